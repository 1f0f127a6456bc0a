//! Post-processing toolkit for point-defect qubit photophysics.
//!
//! Turns first-principles defect data (geometries, phonon bases,
//! spin-density grids, total energies) into experimentally comparable
//! quantities: PL lineshapes, radiative lifetimes, spin-Hamiltonian level
//! structure and ODMR frequencies, charge-transition-level diagrams,
//! selection-rule verdicts and optical-cycle kinetics.

pub mod constants;
pub mod ingest;
pub mod kinetics;
pub mod levels;
pub mod lineshape;
pub mod photophysics;
pub mod spinham;

pub use ingest::{
    DefectConfiguration, EnergyManifest, FieldKind, PhononBasis, ScalarField,
};
