//! Spin-spin dipolar zero-field-splitting tensor.
//!
//! D_ab = (c_dd/2)·∬ ρ_s(r₁)ρ_s(r₂)(r²δ_ab − 3r_a r_b)/r⁵ d³r₁ d³r₂ with
//! r = r₁ − r₂ and c_dd = (μ₀/4π)(g_e μ_B)²/h, which for S = 1 carries no
//! further spin normalization (2S(2S−1) = 2). Point-spin input replaces the
//! double integral by a double sum with i = j pairs excluded.
//!
//! Sign convention: principal axes ordered by |eigenvalue|; D carries the
//! sign of D_zz, E is reported non-negative.

use crate::constants::DIPOLAR_MHZ_A3;
use crate::ingest::{FieldKind, ScalarField};
use rayon::prelude::*;
use thiserror::Error;

pub const DISCRETIZATION_TOL: f64 = 0.05;

#[derive(Debug, Error)]
pub enum ZfsError {
    #[error("spin density must describe S = 1: declared norm {0}, expected 2")]
    WrongTotalSpin(f64),
    #[error("field kind must be spin_density")]
    WrongKind,
    #[error("grid too coarse: exclusion-shell sensitivity {0:.1}% exceeds 5%")]
    GridTooCoarse(f64),
}

/// Point magnetic moment at a Cartesian position (Å); `moment` in units of
/// unpaired electrons.
#[derive(Debug, Clone, Copy)]
pub struct PointSpin {
    pub position: [f64; 3],
    pub moment: f64,
}

/// Symmetric traceless 3×3 ZFS tensor in MHz with derived (D, E) and
/// principal axes.
#[derive(Debug, Clone)]
pub struct ZfsTensor {
    /// MHz, symmetric, traceless.
    pub tensor: [[f64; 3]; 3],
    /// Axial parameter D = (3/2)·D_zz, MHz (signed).
    pub d_mhz: f64,
    /// Rhombic parameter E = |D_xx − D_yy|/2, MHz (non-negative).
    pub e_mhz: f64,
    /// Principal axes (rows x, y, z), orthonormal.
    pub principal_axes: [[f64; 3]; 3],
    /// Principal values ordered |λ_x| ≤ |λ_y| ≤ |λ_z|, MHz.
    pub principal_values: [f64; 3],
}

impl ZfsTensor {
    /// Derive (D, E) and principal axes from a symmetric tensor in MHz.
    pub fn from_tensor(tensor: [[f64; 3]; 3]) -> ZfsTensor {
        let m = nalgebra::Matrix3::from_fn(|i, j| tensor[i][j]);
        let eig = m.symmetric_eigen();
        let mut idx = [0usize, 1, 2];
        idx.sort_by(|&a, &b| {
            eig.eigenvalues[a]
                .abs()
                .partial_cmp(&eig.eigenvalues[b].abs())
                .unwrap()
        });
        let lam = [
            eig.eigenvalues[idx[0]],
            eig.eigenvalues[idx[1]],
            eig.eigenvalues[idx[2]],
        ];
        let mut axes = [[0.0; 3]; 3];
        for (row, &k) in axes.iter_mut().zip(&idx) {
            let v = eig.eigenvectors.column(k);
            *row = [v[0], v[1], v[2]];
        }
        let d_mhz = 1.5 * lam[2];
        let e_mhz = 0.5 * (lam[0] - lam[1]).abs();
        ZfsTensor { tensor, d_mhz, e_mhz, principal_axes: axes, principal_values: lam }
    }

    /// Principal-frame tensor for given (D, E) in MHz.
    pub fn from_d_e(d_mhz: f64, e_mhz: f64) -> ZfsTensor {
        let lz = 2.0 * d_mhz / 3.0;
        let lx = -d_mhz / 3.0 + e_mhz;
        let ly = -d_mhz / 3.0 - e_mhz;
        ZfsTensor::from_tensor([[lx, 0.0, 0.0], [0.0, ly, 0.0], [0.0, 0.0, lz]])
    }

    pub fn trace(&self) -> f64 {
        self.tensor[0][0] + self.tensor[1][1] + self.tensor[2][2]
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.tensor
            .iter()
            .flatten()
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt()
    }
}

/// Dipolar kernel (r²δ_ab − 3r_a r_b)/r⁵ accumulated into `acc` with
/// weight w.
#[inline]
fn accumulate_kernel(acc: &mut [[f64; 3]; 3], r: [f64; 3], w: f64) {
    let r2 = r[0] * r[0] + r[1] * r[1] + r[2] * r[2];
    let r5 = r2 * r2 * r2.sqrt();
    let f = w / r5;
    for a in 0..3 {
        for b in 0..3 {
            let delta = if a == b { r2 } else { 0.0 };
            acc[a][b] += f * (delta - 3.0 * r[a] * r[b]);
        }
    }
}

/// ZFS tensor of a set of point spins (analytic oracle path; no grid).
pub fn zfs_from_point_spins(spins: &[PointSpin]) -> ZfsTensor {
    let mut acc = [[0.0; 3]; 3];
    for (i, si) in spins.iter().enumerate() {
        for sj in spins.iter().skip(i + 1) {
            let r = [
                si.position[0] - sj.position[0],
                si.position[1] - sj.position[1],
                si.position[2] - sj.position[2],
            ];
            // unordered pair counted twice by the double sum, halved by c/2
            accumulate_kernel(&mut acc, r, si.moment * sj.moment);
        }
    }
    let mut tensor = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            tensor[a][b] = DIPOLAR_MHZ_A3 * acc[a][b];
        }
    }
    ZfsTensor::from_tensor(tensor)
}

pub const TOTAL_SPIN_TOL: f64 = 0.05;

/// Pairwise dipolar double sum over weighted sites with pairs closer than
/// `cutoff2` (squared Å) skipped. Unordered pairs counted once; the c/2
/// prefactor of the double integral cancels the factor 2.
fn pair_sum(sites: &[([f64; 3], f64)], cutoff2: f64) -> [[f64; 3]; 3] {
    sites
        .par_iter()
        .enumerate()
        .map(|(i, (pi, wi))| {
            let mut acc = [[0.0; 3]; 3];
            for (pj, wj) in sites.iter().skip(i + 1) {
                let r = [pi[0] - pj[0], pi[1] - pj[1], pi[2] - pj[2]];
                let r2 = r[0] * r[0] + r[1] * r[1] + r[2] * r[2];
                if r2 < cutoff2 {
                    continue;
                }
                accumulate_kernel(&mut acc, r, wi * wj);
            }
            acc
        })
        .reduce(
            || [[0.0; 3]; 3],
            |mut a, a2| {
                for i in 0..3 {
                    for j in 0..3 {
                        a[i][j] += a2[i][j];
                    }
                }
                a
            },
        )
}

fn voxel_diagonal(rho: &ScalarField) -> f64 {
    let a = &rho.axes;
    let d = [
        a[0][0] + a[1][0] + a[2][0],
        a[0][1] + a[1][1] + a[2][1],
        a[0][2] + a[1][2] + a[2][2],
    ];
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

/// ZFS tensor from a spin-density grid (S = 1).
///
/// The O(voxels²) double sum runs in parallel with an exclusion cutoff of
/// one voxel diagonal around the 1/r³ singularity. The discretization error
/// is estimated by redoing the sum on a factor-2 decimated grid and
/// comparing, normalized against the physical dipolar scale
/// c_dd·m²/r_rms³ so symmetric densities with near-zero tensors do not
/// trip the check on roundoff.
pub fn zfs_from_spin_density(rho: &ScalarField) -> Result<ZfsTensor, ZfsError> {
    if rho.kind != FieldKind::SpinDensity {
        return Err(ZfsError::WrongKind);
    }
    if (rho.expected_norm - 2.0).abs() > TOTAL_SPIN_TOL * 2.0 {
        return Err(ZfsError::WrongTotalSpin(rho.expected_norm));
    }

    let dv = rho.voxel_volume();
    let diag = voxel_diagonal(rho);

    // flatten to (position, charge) skipping negligible voxels
    let max_abs = rho.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let (nx, ny, nz) = rho.counts;
    let mut sites: Vec<([f64; 3], f64)> = Vec::new();
    let mut coarse: Vec<([f64; 3], f64)> = Vec::new();
    for ix in 0..nx {
        for iy in 0..ny {
            for iz in 0..nz {
                let v = rho.value(ix, iy, iz);
                if v.abs() > 1e-12 * max_abs {
                    let site = (rho.position(ix, iy, iz), v * dv);
                    sites.push(site);
                    if ix % 2 == 0 && iy % 2 == 0 && iz % 2 == 0 {
                        coarse.push((site.0, site.1 * 8.0));
                    }
                }
            }
        }
    }

    let acc = pair_sum(&sites, diag * diag);
    let acc_coarse = pair_sum(&coarse, 4.0 * diag * diag);

    let mut tensor = [[0.0; 3]; 3];
    let mut diff_norm = 0.0;
    let mut full_norm = 0.0;
    for a in 0..3 {
        for b in 0..3 {
            tensor[a][b] = DIPOLAR_MHZ_A3 * acc[a][b];
            diff_norm += (DIPOLAR_MHZ_A3 * (acc[a][b] - acc_coarse[a][b])).powi(2);
            full_norm += tensor[a][b] * tensor[a][b];
        }
    }

    // physical scale: total moment² over the cube of the rms radius
    let total_moment: f64 = sites.iter().map(|(_, w)| w.abs()).sum();
    let mut centroid = [0.0; 3];
    for (p, w) in &sites {
        for k in 0..3 {
            centroid[k] += w.abs() * p[k] / total_moment;
        }
    }
    let r_rms = (sites
        .iter()
        .map(|(p, w)| {
            w.abs()
                * ((p[0] - centroid[0]).powi(2)
                    + (p[1] - centroid[1]).powi(2)
                    + (p[2] - centroid[2]).powi(2))
        })
        .sum::<f64>()
        / total_moment)
        .sqrt()
        .max(diag);
    let scale = DIPOLAR_MHZ_A3 * total_moment * total_moment / r_rms.powi(3);

    let sensitivity = diff_norm.sqrt() / full_norm.sqrt().max(scale);
    if sensitivity > DISCRETIZATION_TOL {
        return Err(ZfsError::GridTooCoarse(sensitivity * 100.0));
    }
    Ok(ZfsTensor::from_tensor(tensor))
}
