//! Transition dipoles, radiative rates/lifetimes, quantum yield and C2v
//! selection rules.

use crate::constants::{DEBYE, EA_TO_DEBYE, EPSILON_0, EV, HBAR, SPEED_OF_LIGHT};
use crate::ingest::{FieldKind, ScalarField};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PhotophysicsError {
    #[error("grids do not match: {0}")]
    GridMismatch(String),
    #[error("both fields must be of kind 'orbital', got {0} and {1}")]
    KindMismatch(&'static str, &'static str),
    #[error("non-physical input: {0}")]
    NonPhysicalInput(String),
    #[error("tau_pl = {tau_pl:e} s exceeds tau_rad = {tau_rad:e} s")]
    OrderViolation { tau_pl: f64, tau_rad: f64 },
}

/// Source tag for a transition dipole.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DipoleSource {
    GridComputed,
    UserSupplied,
}

#[derive(Debug, Clone, Copy)]
pub struct TransitionDipole {
    /// Debye
    pub vector: [f64; 3],
    pub source: DipoleSource,
}

impl TransitionDipole {
    pub fn from_magnitude(mu_debye: f64) -> Self {
        TransitionDipole { vector: [mu_debye, 0.0, 0.0], source: DipoleSource::UserSupplied }
    }

    pub fn magnitude(&self) -> f64 {
        let v = &self.vector;
        (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
    }
}

/// μ = e·∫ ψ_f(r)·r·ψ_i(r) d³r, reported in Debye.
///
/// The integration origin is the |ψ_i·ψ_f|-weighted centroid, which tames
/// the origin dependence for non-orthogonal numerical orbitals.
pub fn transition_dipole_grid(
    psi_i: &ScalarField,
    psi_f: &ScalarField,
) -> Result<TransitionDipole, PhotophysicsError> {
    if psi_i.kind != FieldKind::Orbital || psi_f.kind != FieldKind::Orbital {
        return Err(PhotophysicsError::KindMismatch(psi_i.kind.token(), psi_f.kind.token()));
    }
    if psi_i.counts != psi_f.counts {
        return Err(PhotophysicsError::GridMismatch(format!(
            "counts {:?} vs {:?}",
            psi_i.counts, psi_f.counts
        )));
    }
    if psi_i.origin != psi_f.origin || psi_i.axes != psi_f.axes {
        return Err(PhotophysicsError::GridMismatch("origin or axes differ".into()));
    }

    let (nx, ny, nz) = psi_i.counts;
    let dv = psi_i.voxel_volume();

    // product-density centroid as origin
    let mut c = [0.0; 3];
    let mut wsum = 0.0;
    for ix in 0..nx {
        for iy in 0..ny {
            for iz in 0..nz {
                let w = (psi_i.value(ix, iy, iz) * psi_f.value(ix, iy, iz)).abs();
                let p = psi_i.position(ix, iy, iz);
                c[0] += w * p[0];
                c[1] += w * p[1];
                c[2] += w * p[2];
                wsum += w;
            }
        }
    }
    if wsum > 0.0 {
        for x in &mut c {
            *x /= wsum;
        }
    }

    let mut mu = [0.0; 3];
    for ix in 0..nx {
        for iy in 0..ny {
            for iz in 0..nz {
                let w = psi_i.value(ix, iy, iz) * psi_f.value(ix, iy, iz) * dv;
                let p = psi_i.position(ix, iy, iz);
                mu[0] += w * (p[0] - c[0]);
                mu[1] += w * (p[1] - c[1]);
                mu[2] += w * (p[2] - c[2]);
            }
        }
    }
    // e·Å → Debye
    for x in &mut mu {
        *x *= EA_TO_DEBYE;
    }
    Ok(TransitionDipole { vector: mu, source: DipoleSource::GridComputed })
}

/// Radiative lifetime; μ = 0 gives a dedicated infinite sentinel, never a
/// floating-point infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadiativeLifetime {
    Finite(f64),
    Infinite,
}

impl fmt::Display for RadiativeLifetime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RadiativeLifetime::Finite(t) => write!(f, "{t:.5e}"),
            RadiativeLifetime::Infinite => write!(f, "infinite"),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EmitterOptics {
    pub e_zpl_ev: f64,
    pub refractive_index: f64,
    pub mu_debye: f64,
    /// 1/s
    pub gamma_rad: f64,
    pub tau_rad: RadiativeLifetime,
}

/// Γ_rad = n_D ω³ μ² / (3π ε₀ c³ ħ), ω = E_ZPL/ħ, evaluated in SI.
pub fn radiative_rate(
    e_zpl_ev: f64,
    mu_debye: f64,
    n_refractive: f64,
) -> Result<EmitterOptics, PhotophysicsError> {
    if e_zpl_ev <= 0.0 {
        return Err(PhotophysicsError::NonPhysicalInput(format!("E_zpl = {e_zpl_ev} eV")));
    }
    if n_refractive < 1.0 {
        return Err(PhotophysicsError::NonPhysicalInput(format!("n = {n_refractive} < 1")));
    }
    if mu_debye < 0.0 {
        return Err(PhotophysicsError::NonPhysicalInput(format!("mu = {mu_debye} D")));
    }
    let e_j = e_zpl_ev * EV;
    let mu_si = mu_debye * DEBYE;
    let gamma_rad = n_refractive * e_j.powi(3) * mu_si * mu_si
        / (3.0 * std::f64::consts::PI * EPSILON_0 * SPEED_OF_LIGHT.powi(3) * HBAR.powi(4));
    let tau_rad = if gamma_rad > 0.0 {
        RadiativeLifetime::Finite(1.0 / gamma_rad)
    } else {
        RadiativeLifetime::Infinite
    };
    Ok(EmitterOptics { e_zpl_ev, refractive_index: n_refractive, mu_debye, gamma_rad, tau_rad })
}

/// QY = τ_pl/τ_rad = Γ_rad/(Γ_rad + Γ_nonrad).
pub fn quantum_yield(tau_rad_s: f64, tau_pl_s: f64) -> Result<f64, PhotophysicsError> {
    if tau_rad_s <= 0.0 || tau_pl_s <= 0.0 {
        return Err(PhotophysicsError::NonPhysicalInput(
            "lifetimes must be positive".into(),
        ));
    }
    if tau_pl_s > tau_rad_s {
        return Err(PhotophysicsError::OrderViolation { tau_pl: tau_pl_s, tau_rad: tau_rad_s });
    }
    Ok(tau_pl_s / tau_rad_s)
}

/// C2v irreducible representations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IrrepLabel {
    A1,
    A2,
    B1,
    B2,
}

pub const C2V_IRREPS: [IrrepLabel; 4] =
    [IrrepLabel::A1, IrrepLabel::A2, IrrepLabel::B1, IrrepLabel::B2];

impl IrrepLabel {
    pub fn parse(s: &str) -> Option<IrrepLabel> {
        match s.to_ascii_uppercase().as_str() {
            "A1" => Some(IrrepLabel::A1),
            "A2" => Some(IrrepLabel::A2),
            "B1" => Some(IrrepLabel::B1),
            "B2" => Some(IrrepLabel::B2),
            _ => None,
        }
    }
}

impl fmt::Display for IrrepLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            IrrepLabel::A1 => "A1",
            IrrepLabel::A2 => "A2",
            IrrepLabel::B1 => "B1",
            IrrepLabel::B2 => "B2",
        };
        write!(f, "{s}")
    }
}

/// C2v multiplication table (Klein four-group).
pub fn irrep_product(a: IrrepLabel, b: IrrepLabel) -> IrrepLabel {
    use IrrepLabel::*;
    match (a, b) {
        (A1, x) | (x, A1) => x,
        (A2, A2) | (B1, B1) | (B2, B2) => A1,
        (A2, B1) | (B1, A2) => B2,
        (A2, B2) | (B2, A2) => B1,
        (B1, B2) | (B2, B1) => A2,
    }
}

/// Polarization component with its C2v transformation label
/// (x: B1, y: B2, z: A1).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarization {
    X,
    Y,
    Z,
}

impl Polarization {
    pub fn irrep(&self) -> IrrepLabel {
        match self {
            Polarization::X => IrrepLabel::B1,
            Polarization::Y => IrrepLabel::B2,
            Polarization::Z => IrrepLabel::A1,
        }
    }
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Polarization::X => write!(f, "x"),
            Polarization::Y => write!(f, "y"),
            Polarization::Z => write!(f, "z"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectionVerdict {
    pub allowed: bool,
    /// Polarization components whose product contains A1.
    pub polarizations: Vec<Polarization>,
}

/// A transition i → f is electric-dipole allowed iff f ⊗ component ⊗ i
/// contains A1 for some component.
pub fn dipole_allowed(initial: IrrepLabel, final_: IrrepLabel) -> SelectionVerdict {
    let polarizations: Vec<Polarization> = [Polarization::X, Polarization::Y, Polarization::Z]
        .into_iter()
        .filter(|p| irrep_product(irrep_product(final_, p.irrep()), initial) == IrrepLabel::A1)
        .collect();
    SelectionVerdict { allowed: !polarizations.is_empty(), polarizations }
}
