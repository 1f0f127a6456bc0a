//! Spin-Hamiltonian machinery: zero-field-splitting and hyperfine tensors
//! from spin-density grids, triplet level structure, ODMR transition
//! frequencies and the isotope-purity risk estimate.

mod hyperfine;
mod triplet;
mod zfs;

pub use hyperfine::{
    hyperfine_from_spin_density, point_dipole_tensor, HyperfineError, HyperfineTensor, NucleusSpec,
};
pub use triplet::{
    odmr_frequencies, triplet_levels, NuclearConfiguration, OdmrLine, SpinLevelSet, TripletError,
};
pub use zfs::{zfs_from_point_spins, zfs_from_spin_density, PointSpin, ZfsError, ZfsTensor};

/// Probability that at least one spin-carrying nucleus occupies any of the
/// listed lattice sites: 1 − (1 − abundance)^(Σ counts).
pub fn isotope_risk(shell_site_counts: &[u64], abundance: f64) -> Result<f64, IsotopeError> {
    if !(0.0..=1.0).contains(&abundance) {
        return Err(IsotopeError::BadAbundance(abundance));
    }
    let total: u64 = shell_site_counts.iter().sum();
    Ok(1.0 - (1.0 - abundance).powi(total as i32))
}

#[derive(Debug, thiserror::Error)]
pub enum IsotopeError {
    #[error("abundance must be in [0, 1], got {0}")]
    BadAbundance(f64),
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn isotope_risk_values() {
        assert_eq!(isotope_risk(&[4, 8], 0.0).unwrap(), 0.0);
        // 4 sites at natural 4.5% abundance
        assert_relative_eq!(
            isotope_risk(&[4], 0.045).unwrap(),
            1.0 - 0.955f64.powi(4),
            max_relative = 1e-12
        );
        assert!((isotope_risk(&[4], 0.045).unwrap() - 0.1682).abs() < 1e-3);
        // 2 sites at 0.5% enrichment stays below 1%
        let p = isotope_risk(&[2], 0.005).unwrap();
        assert_relative_eq!(p, 0.009975, max_relative = 1e-6);
        assert!(p < 0.01);
        assert!(isotope_risk(&[1], 1.5).is_err());
    }
}
