//! Physical constants (CODATA 2018) and unit conversions.
//!
//! Every module converts through this table; no other file defines
//! numerical constants for units.

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Planck constant, J·s.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Elementary charge, C.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Vacuum permittivity, F/m.
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
/// Vacuum permeability, N/A².
pub const MU_0: f64 = 1.256_637_062_12e-6;
/// Speed of light, m/s.
pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;
/// Bohr magneton, J/T.
pub const BOHR_MAGNETON: f64 = 9.274_010_078_3e-24;
/// Nuclear magneton, J/T.
pub const NUCLEAR_MAGNETON: f64 = 5.050_783_746_1e-27;
/// Free-electron g-factor (magnitude).
pub const G_ELECTRON: f64 = 2.002_319_304_362_56;
/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Atomic mass unit, kg.
pub const AMU: f64 = 1.660_539_066_60e-27;

/// Electron-volt, J.
pub const EV: f64 = ELEMENTARY_CHARGE;
/// Milli-electron-volt, J.
pub const MEV: f64 = 1e-3 * EV;
/// Ångström, m.
pub const ANGSTROM: f64 = 1e-10;
/// Debye, C·m.
pub const DEBYE: f64 = 3.33564e-30;

/// One e·Å expressed in Debye.
pub const EA_TO_DEBYE: f64 = ELEMENTARY_CHARGE * ANGSTROM / DEBYE;

/// Electron Zeeman factor g_e·μ_B/h in MHz/mT.
pub const ZEEMAN_MHZ_PER_MT: f64 = G_ELECTRON * BOHR_MAGNETON / PLANCK * 1e-6 * 1e-3;

/// Electron spin-spin dipolar constant (μ₀/4π)(g_e μ_B)²/h in MHz·Å³.
///
/// Evaluates to ≈ 52.04 MHz at 10 Å separation divided by r³ in Å³.
pub const DIPOLAR_MHZ_A3: f64 = {
    let g_mu = G_ELECTRON * BOHR_MAGNETON;
    // (1e-7) N/A² prefactor; m³ → Å³ is 1e30, Hz → MHz is 1e-6
    1e-7 * g_mu * g_mu / PLANCK * 1e30 * 1e-6
};

/// Angular frequency (rad/s) of a phonon quantum given in meV.
pub fn omega_from_mev(e_mev: f64) -> f64 {
    e_mev * MEV / HBAR
}
