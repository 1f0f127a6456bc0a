//! Phonon-sideband PL lineshape via the generating-function method.
//!
//! The pipeline is: mass-weighted geometry displacement between ground and
//! excited configurations → per-mode Huang-Rhys factors s_k = ω_k q_k²/2ħ →
//! G(t) = exp(S(t) − S(0)) → Fourier transform onto the emission axis, with
//! the sideband at E < E_ZPL.

use crate::constants::{AMU, ANGSTROM, BOLTZMANN, EV, HBAR, MEV};
use crate::ingest::{DefectConfiguration, PhononBasis};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LineshapeError {
    #[error("atom count mismatch: ground has {0}, excited has {1}")]
    AtomCountMismatch(usize, usize),
    #[error("species mismatch at atom {index}: '{ground}' vs '{excited}'")]
    SpeciesMismatch { index: usize, ground: String, excited: String },
    #[error("displacement of atom {index} is {displacement:.3} Å, above half the shortest lattice vector ({limit:.3} Å); structures are probably mismatched")]
    DisplacementTooLarge { index: usize, displacement: f64, limit: f64 },
    #[error("displacement length {0} does not match 3·natoms = {1} of the phonon basis")]
    DimensionMismatch(usize, usize),
    #[error("zero-frequency mode {index} carries projection q = {q:.3e} (translation contamination)")]
    ZeroFrequencyMode { index: usize, q: f64 },
    #[error("smearing must be > 0, got {0}")]
    SmearingNonPositive(f64),
    #[error("temperature must be >= 0, got {0}")]
    NegativeTemperature(f64),
    #[error("ZPL energy must be > 0, got {0}")]
    NonPositiveZpl(f64),
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("negative spectral intensity {0:.3e} of peak exceeds the FFT-ringing budget (1e-8); aliasing suspected")]
    AliasingDetected(f64),
}

/// Per-mode Huang-Rhys decomposition.
#[derive(Debug, Clone)]
pub struct HuangRhysDecomposition {
    pub modes: Vec<HrMode>,
}

#[derive(Debug, Clone, Copy)]
pub struct HrMode {
    /// ħω_k, meV
    pub frequency_mev: f64,
    /// Mode projection q_k, amu^(1/2)·Å.
    pub q: f64,
    /// Partial Huang-Rhys factor, dimensionless.
    pub s: f64,
}

impl HuangRhysDecomposition {
    /// S_tot = Σ s_k
    pub fn s_total(&self) -> f64 {
        self.modes.iter().map(|m| m.s).sum()
    }

    /// Build directly from (ħω in meV, s) pairs; q back-solved.
    pub fn from_mode_factors(pairs: &[(f64, f64)]) -> Self {
        let modes = pairs
            .iter()
            .map(|&(frequency_mev, s)| {
                let omega = frequency_mev * MEV / HBAR;
                let q_si = (2.0 * HBAR * s / omega).sqrt();
                HrMode { frequency_mev, q: q_si / (AMU.sqrt() * ANGSTROM), s }
            })
            .collect();
        HuangRhysDecomposition { modes }
    }
}

/// √m-weighted displacement between two geometries, minimum-image reduced
/// in the ground-state lattice. Component 3a+c is √m_a·ΔR_a[c] in
/// amu^(1/2)·Å.
pub fn mass_weighted_displacement(
    ground: &DefectConfiguration,
    excited: &DefectConfiguration,
) -> Result<Vec<f64>, LineshapeError> {
    if ground.atoms.len() != excited.atoms.len() {
        return Err(LineshapeError::AtomCountMismatch(ground.atoms.len(), excited.atoms.len()));
    }
    let inv = ground.lattice_inverse();
    let lat = &ground.lattice_vectors;
    let limit = 0.5 * ground.shortest_lattice_vector();
    let mut out = Vec::with_capacity(3 * ground.atoms.len());
    for (index, (g, e)) in ground.atoms.iter().zip(&excited.atoms).enumerate() {
        if g.species != e.species {
            return Err(LineshapeError::SpeciesMismatch {
                index,
                ground: g.species.clone(),
                excited: e.species.clone(),
            });
        }
        let d = [
            e.position[0] - g.position[0],
            e.position[1] - g.position[1],
            e.position[2] - g.position[2],
        ];
        // minimum image: wrap fractional coordinates to [-1/2, 1/2)
        let mut f = [0.0; 3];
        for j in 0..3 {
            f[j] = d[0] * inv[0][j] + d[1] * inv[1][j] + d[2] * inv[2][j];
        }
        for fj in &mut f {
            *fj -= fj.round();
        }
        let mut dr = [0.0; 3];
        for j in 0..3 {
            dr[j] = f[0] * lat[0][j] + f[1] * lat[1][j] + f[2] * lat[2][j];
        }
        let len = (dr[0] * dr[0] + dr[1] * dr[1] + dr[2] * dr[2]).sqrt();
        if len > limit {
            return Err(LineshapeError::DisplacementTooLarge { index, displacement: len, limit });
        }
        let sqrt_m = g.mass.sqrt();
        out.extend(dr.iter().map(|x| sqrt_m * x));
    }
    Ok(out)
}

const ZERO_MODE_Q_TOL: f64 = 1e-8;

/// Project a mass-weighted displacement on a phonon basis:
/// q_k = e_k·ΔQ, s_k = ω_k q_k²/2ħ.
pub fn partial_hr_factors(
    displacement: &[f64],
    basis: &PhononBasis,
) -> Result<HuangRhysDecomposition, LineshapeError> {
    if displacement.len() != 3 * basis.natoms {
        return Err(LineshapeError::DimensionMismatch(displacement.len(), 3 * basis.natoms));
    }
    let mut modes = Vec::with_capacity(basis.modes.len());
    for mode in &basis.modes {
        let q: f64 = mode
            .eigenvector
            .iter()
            .zip(displacement)
            .map(|(e, d)| e * d)
            .sum();
        let s = if mode.frequency_mev == 0.0 {
            if q.abs() > ZERO_MODE_Q_TOL {
                return Err(LineshapeError::ZeroFrequencyMode { index: mode.index, q });
            }
            0.0
        } else {
            let omega = mode.frequency_mev * MEV / HBAR;
            let q_si = q * AMU.sqrt() * ANGSTROM;
            omega * q_si * q_si / (2.0 * HBAR)
        };
        modes.push(HrMode { frequency_mev: mode.frequency_mev, q, s });
    }
    Ok(HuangRhysDecomposition { modes })
}

/// S(ħω) = Σ_k s_k δ(ħω − ħω_k) with Gaussian smearing, on a uniform grid.
#[derive(Debug, Clone)]
pub struct SpectralDensity {
    /// meV, uniform spacing.
    pub energies_mev: Vec<f64>,
    /// 1/meV
    pub values: Vec<f64>,
}

pub fn spectral_density(
    hr: &HuangRhysDecomposition,
    smearing_mev: f64,
) -> Result<SpectralDensity, LineshapeError> {
    if smearing_mev <= 0.0 {
        return Err(LineshapeError::SmearingNonPositive(smearing_mev));
    }
    let sigma = smearing_mev;
    let (lo, hi) = hr
        .modes
        .iter()
        .fold((0.0f64, 6.0 * sigma), |(lo, hi), m| {
            (lo.min(m.frequency_mev - 8.0 * sigma), hi.max(m.frequency_mev + 8.0 * sigma))
        });
    let step = sigma / 8.0;
    let n = ((hi - lo) / step).ceil() as usize + 1;
    let energies_mev: Vec<f64> = (0..n).map(|i| lo + i as f64 * step).collect();
    let norm = 1.0 / (sigma * (2.0 * std::f64::consts::PI).sqrt());
    let values = energies_mev
        .iter()
        .map(|&e| {
            hr.modes
                .iter()
                .map(|m| {
                    let x = (e - m.frequency_mev) / sigma;
                    m.s * norm * (-0.5 * x * x).exp()
                })
                .sum()
        })
        .collect();
    Ok(SpectralDensity { energies_mev, values })
}

/// Fraction of emission in the ZPL, e^(−S_tot).
pub fn debye_waller(hr: &HuangRhysDecomposition) -> f64 {
    (-hr.s_total()).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZplShape {
    /// gamma is the Gaussian standard deviation (default).
    Gaussian,
    /// gamma is the Lorentzian half width at half maximum.
    Lorentzian,
}

/// Uniform output energy grid, eV.
#[derive(Debug, Clone, Copy)]
pub struct SpectrumGrid {
    pub e_min_ev: f64,
    pub e_max_ev: f64,
    pub step_ev: f64,
}

/// Normalized emission lineshape L(E), ∫L dE = 1.
#[derive(Debug, Clone)]
pub struct Spectrum {
    /// eV, uniform.
    pub energies_ev: Vec<f64>,
    /// 1/eV
    pub intensities: Vec<f64>,
    pub e_zpl_ev: f64,
    pub s_total: f64,
    pub gamma_zpl_mev: f64,
    pub temperature_k: f64,
}

const MAX_FFT_LOG2: u32 = 23;

pub fn generating_function_spectrum(
    hr: &HuangRhysDecomposition,
    e_zpl_ev: f64,
    temperature_k: f64,
    gamma_zpl_mev: f64,
    shape: ZplShape,
    grid: SpectrumGrid,
) -> Result<Spectrum, LineshapeError> {
    if e_zpl_ev <= 0.0 {
        return Err(LineshapeError::NonPositiveZpl(e_zpl_ev));
    }
    if gamma_zpl_mev <= 0.0 {
        return Err(LineshapeError::SmearingNonPositive(gamma_zpl_mev));
    }
    if temperature_k < 0.0 {
        return Err(LineshapeError::NegativeTemperature(temperature_k));
    }
    let omega_max_ev = hr
        .modes
        .iter()
        .map(|m| m.frequency_mev)
        .fold(0.0f64, f64::max)
        * 1e-3;
    let gamma_ev = gamma_zpl_mev * 1e-3;
    if grid.step_ev <= 0.0 {
        return Err(LineshapeError::GridTooCoarse("step must be > 0".into()));
    }
    if grid.e_min_ev > e_zpl_ev - 0.5 {
        return Err(LineshapeError::GridTooCoarse(
            "grid must span at least 0.5 eV below the ZPL".into(),
        ));
    }
    if grid.e_max_ev < e_zpl_ev + (5.0 * omega_max_ev).max(10.0 * gamma_ev) {
        return Err(LineshapeError::GridTooCoarse(
            "grid must span at least 5 max phonon energies above the ZPL".into(),
        ));
    }
    if grid.step_ev > 0.5 * gamma_ev {
        return Err(LineshapeError::GridTooCoarse(format!(
            "step {} eV cannot resolve a ZPL of width {} eV",
            grid.step_ev, gamma_ev
        )));
    }

    // time grid from the requested energy window
    let halfspan_j = (e_zpl_ev - grid.e_min_ev)
        .max(grid.e_max_ev - e_zpl_ev)
        .max(4.0 * omega_max_ev)
        * EV;
    let dt = std::f64::consts::PI * HBAR / halfspan_j;
    let gamma_j = gamma_zpl_mev * MEV;
    // total time covers the ZPL decay; native bin resolves both the output
    // step and the ZPL width
    let n_time = 20.0 * HBAR / (gamma_j * dt);
    let n_res = 2.0 * halfspan_j / (grid.step_ev * EV).min(gamma_j / 8.0);
    let n = (n_time.max(n_res).max(64.0)).log2().ceil() as u32;
    if n > MAX_FFT_LOG2 {
        return Err(LineshapeError::GridTooCoarse(format!(
            "requested resolution needs 2^{n} FFT points (limit 2^{MAX_FFT_LOG2})"
        )));
    }
    let n = 1usize << n;

    // thermal occupations
    let occ: Vec<(f64, f64, f64)> = hr
        .modes
        .iter()
        .filter(|m| m.s > 0.0)
        .map(|m| {
            let e_j = m.frequency_mev * MEV;
            let nbar = if temperature_k > 0.0 {
                1.0 / ((e_j / (BOLTZMANN * temperature_k)).exp_m1())
            } else {
                0.0
            };
            (e_j / HBAR, m.s, nbar)
        })
        .collect();
    let s0: f64 = occ.iter().map(|&(_, s, nbar)| s * (2.0 * nbar + 1.0)).sum();

    let mut buf: Vec<Complex64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let t = if i <= n / 2 { i as f64 } else { i as f64 - n as f64 } * dt;
            let mut st = Complex64::new(0.0, 0.0);
            for &(omega, s, nbar) in &occ {
                let phase = omega * t;
                st += s * (nbar + 1.0) * Complex64::new(phase.cos(), -phase.sin());
                if nbar > 0.0 {
                    st += s * nbar * Complex64::new(phase.cos(), phase.sin());
                }
            }
            let g = (st - s0).exp();
            let x = gamma_j * t / HBAR;
            let window = match shape {
                ZplShape::Gaussian => (-0.5 * x * x).exp(),
                ZplShape::Lorentzian => (-x.abs()).exp(),
            };
            g * window
        })
        .collect();

    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);

    // native samples: L(E_k) with E_k = E_ZPL − ΔE_k, ΔE_k the DFT frequency
    let de_j = 2.0 * std::f64::consts::PI * HBAR / (n as f64 * dt);
    let scale = dt / (2.0 * std::f64::consts::PI * HBAR) * EV; // → 1/eV
    let mut native: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let delta = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 } * de_j;
            (e_zpl_ev - delta / EV, buf[k].re * scale)
        })
        .collect();
    native.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    // linear interpolation onto the requested grid
    let npts = ((grid.e_max_ev - grid.e_min_ev) / grid.step_ev).round() as usize + 1;
    let energies_ev: Vec<f64> = (0..npts).map(|i| grid.e_min_ev + i as f64 * grid.step_ev).collect();
    let xs: Vec<f64> = native.iter().map(|p| p.0).collect();
    let mut intensities: Vec<f64> = energies_ev
        .iter()
        .map(|&e| {
            if e <= xs[0] || e >= xs[xs.len() - 1] {
                return 0.0;
            }
            let j = xs.partition_point(|&x| x < e).max(1);
            let (x0, y0) = native[j - 1];
            let (x1, y1) = native[j];
            y0 + (y1 - y0) * (e - x0) / (x1 - x0)
        })
        .collect();

    // clamp FFT ringing; anything beyond the budget signals aliasing
    let peak = intensities.iter().cloned().fold(0.0f64, f64::max);
    let min = intensities.iter().cloned().fold(0.0f64, f64::min);
    if peak > 0.0 && min < -1e-8 * peak {
        return Err(LineshapeError::AliasingDetected(min / peak));
    }
    for v in &mut intensities {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let area = trapezoid(&energies_ev, &intensities);
    if area <= 0.0 {
        return Err(LineshapeError::GridTooCoarse("spectrum has no weight on the grid".into()));
    }
    for v in &mut intensities {
        *v /= area;
    }

    Ok(Spectrum {
        energies_ev,
        intensities,
        e_zpl_ev,
        s_total: hr.s_total(),
        gamma_zpl_mev,
        temperature_k,
    })
}

pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xw, yw)| 0.5 * (yw[0] + yw[1]) * (xw[1] - xw[0]))
        .sum()
}

impl Spectrum {
    /// Integrated intensity over [lo, hi] eV (trapezoidal, on the native grid).
    pub fn window_weight(&self, lo: f64, hi: f64) -> f64 {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for (e, v) in self.energies_ev.iter().zip(&self.intensities) {
            if *e >= lo && *e <= hi {
                x.push(*e);
                y.push(*v);
            }
        }
        trapezoid(&x, &y)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# e_zpl_ev = {:.5e}\n", self.e_zpl_ev));
        out.push_str(&format!("# s_total = {:.5e}\n", self.s_total));
        out.push_str(&format!("# debye_waller = {:.5e}\n", (-self.s_total).exp()));
        out.push_str(&format!("# gamma_zpl_mev = {:.5e}\n", self.gamma_zpl_mev));
        out.push_str(&format!("# temperature_k = {:.5e}\n", self.temperature_k));
        out.push_str("# columns: energy_ev intensity_per_ev\n");
        for (e, v) in self.energies_ev.iter().zip(&self.intensities) {
            out.push_str(&format!("{e:.6} {v:.5e}\n"));
        }
        out
    }
}
