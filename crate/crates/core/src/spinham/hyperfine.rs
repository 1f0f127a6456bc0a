//! Hyperfine tensors from spin-density grids: Fermi-contact isotropic part
//! plus traceless dipolar part.
//!
//! a_iso = (2μ₀/3)·g_e μ_B g_N μ_N·ρ_s(R)/(h·S), with the spin density
//! interpolated trilinearly at the nucleus. The dipolar part is
//! (μ₀/4π)·g_e μ_B g_N μ_N/(h·S)·∫ρ_s(r)(3n̂n̂ − I)/|r − R|³ d³r with a
//! small sphere around R excluded (default: one voxel diagonal).
//! All-electron core-polarization corrections are upstream physics and not
//! applied here.

use crate::constants::{ANGSTROM, BOHR_MAGNETON, G_ELECTRON, MU_0, NUCLEAR_MAGNETON, PLANCK};
use crate::ingest::{FieldKind, ScalarField};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HyperfineError {
    #[error("nucleus at {0:?} Å lies outside the grid")]
    NucleusOutsideGrid([f64; 3]),
    #[error("exclusion radius {radius} Å exceeds a quarter of the grid extent ({limit} Å)")]
    ExclusionRadiusTooLarge { radius: f64, limit: f64 },
    #[error("field kind must be spin_density")]
    WrongKind,
    #[error("electron spin must be positive, got {0}")]
    BadSpin(f64),
}

/// Nucleus carrying a spin, identified by species, position and nuclear
/// g-factor.
#[derive(Debug, Clone)]
pub struct NucleusSpec {
    pub species: String,
    /// Å
    pub position: [f64; 3],
    pub g_n: f64,
}

#[derive(Debug, Clone)]
pub struct HyperfineTensor {
    pub nucleus: NucleusSpec,
    /// Full tensor A in MHz, symmetric.
    pub tensor: [[f64; 3]; 3],
}

impl HyperfineTensor {
    /// Isotropic (Fermi-contact) part, trace(A)/3, MHz.
    pub fn a_iso(&self) -> f64 {
        (self.tensor[0][0] + self.tensor[1][1] + self.tensor[2][2]) / 3.0
    }

    /// Traceless dipolar part, MHz.
    pub fn dipolar(&self) -> [[f64; 3]; 3] {
        let iso = self.a_iso();
        let mut out = self.tensor;
        for i in 0..3 {
            out[i][i] -= iso;
        }
        out
    }

    /// Eigenvalues of A sorted ascending (A_xx, A_yy, A_zz by magnitude of
    /// use in tables), MHz.
    pub fn principal_values(&self) -> [f64; 3] {
        let m = nalgebra::Matrix3::from_fn(|i, j| self.tensor[i][j]);
        let mut ev: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().cloned().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        [ev[0], ev[1], ev[2]]
    }
}

/// Prefactor g_e μ_B g_N μ_N/(h·S) with the density in Å⁻³, yielding MHz.
fn hf_prefactor_mhz(g_n: f64, spin: f64) -> f64 {
    G_ELECTRON * BOHR_MAGNETON * g_n * NUCLEAR_MAGNETON
        / (PLANCK * spin)
        / ANGSTROM.powi(3)
        * 1e-6
}

pub fn hyperfine_from_spin_density(
    rho: &ScalarField,
    nucleus: &NucleusSpec,
    spin: f64,
    exclusion_radius: Option<f64>,
) -> Result<HyperfineTensor, HyperfineError> {
    if rho.kind != FieldKind::SpinDensity {
        return Err(HyperfineError::WrongKind);
    }
    if spin <= 0.0 {
        return Err(HyperfineError::BadSpin(spin));
    }
    let density_at_r = rho
        .sample(nucleus.position)
        .ok_or(HyperfineError::NucleusOutsideGrid(nucleus.position))?;

    let diag = {
        let a = &rho.axes;
        let d = [
            a[0][0] + a[1][0] + a[2][0],
            a[0][1] + a[1][1] + a[2][1],
            a[0][2] + a[1][2] + a[2][2],
        ];
        (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
    };
    let r_excl = exclusion_radius.unwrap_or(diag);
    let extent = (0..3)
        .map(|i| {
            let a = rho.axes[i];
            let n = [rho.counts.0, rho.counts.1, rho.counts.2][i] as f64 - 1.0;
            n * (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
        })
        .fold(f64::INFINITY, f64::min);
    if r_excl > 0.25 * extent {
        return Err(HyperfineError::ExclusionRadiusTooLarge { radius: r_excl, limit: 0.25 * extent });
    }

    let pref = hf_prefactor_mhz(nucleus.g_n, spin);
    let a_iso = 2.0 * MU_0 / 3.0 * pref * density_at_r;

    // dipolar voxel sum, MU_0/4π prefactor
    let dv = rho.voxel_volume();
    let r_excl2 = r_excl * r_excl;
    let mut dip = [[0.0; 3]; 3];
    let (nx, ny, nz) = rho.counts;
    for ix in 0..nx {
        for iy in 0..ny {
            for iz in 0..nz {
                let v = rho.value(ix, iy, iz);
                if v == 0.0 {
                    continue;
                }
                let p = rho.position(ix, iy, iz);
                let r = [
                    p[0] - nucleus.position[0],
                    p[1] - nucleus.position[1],
                    p[2] - nucleus.position[2],
                ];
                let r2 = r[0] * r[0] + r[1] * r[1] + r[2] * r[2];
                if r2 <= r_excl2 {
                    continue;
                }
                let r5 = r2 * r2 * r2.sqrt();
                let w = v * dv / r5;
                for a in 0..3 {
                    for b in 0..3 {
                        let delta = if a == b { r2 } else { 0.0 };
                        dip[a][b] += w * (3.0 * r[a] * r[b] - delta);
                    }
                }
            }
        }
    }
    let dip_pref = MU_0 / (4.0 * std::f64::consts::PI) * pref;

    let mut tensor = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            tensor[a][b] = dip_pref * dip[a][b] + if a == b { a_iso } else { 0.0 };
        }
    }
    Ok(HyperfineTensor { nucleus: nucleus.clone(), tensor })
}

/// Closed-form point-dipole hyperfine tensor for a point moment at
/// separation `r` (Å) from the nucleus, MHz. Independent oracle for the
/// mean-value property of spherical densities.
pub fn point_dipole_tensor(r: [f64; 3], moment: f64, g_n: f64, spin: f64) -> [[f64; 3]; 3] {
    let pref = MU_0 / (4.0 * std::f64::consts::PI) * hf_prefactor_mhz(g_n, spin);
    let r2 = r[0] * r[0] + r[1] * r[1] + r[2] * r[2];
    let r5 = r2 * r2 * r2.sqrt();
    let mut out = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            let delta = if a == b { r2 } else { 0.0 };
            out[a][b] = pref * moment * (3.0 * r[a] * r[b] - delta) / r5;
        }
    }
    out
}
