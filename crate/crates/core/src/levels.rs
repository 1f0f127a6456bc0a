//! Formation energies, charge-transition levels, ΔSCF ZPL assembly with
//! spin-purification and band-filling corrections, and the generalized
//! Koopmans non-linearity check.
//!
//! E_f(q, E_F) = E_tot(defect, q) − E_tot(bulk) − Σ n_i μ_i + q(E_v + E_F)
//! + E_corr, with the finite-size correction consumed as a per-entry
//! scalar. Transition levels are the Fermi energies where two formation
//! lines cross: E(q/q′) = [E_f(q, 0) − E_f(q′, 0)]/(q′ − q) above E_v.

use crate::ingest::{DefectEntry, EigenLevel, EnergyManifest};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LevelsError {
    #[error("no chemical potential for species '{0}' in the manifest")]
    MissingChemicalPotential(String),
    #[error("no manifest entry '{0}'")]
    UnknownEntry(String),
    #[error("no manifest entry with charge {0:+}")]
    NoEntryForCharge(i32),
    #[error("transition level requires two distinct charges, got {0:+} twice")]
    SameCharge(i32),
    #[error("band edge {edge} eV outside the eigenvalue table range [{lo}, {hi}] eV")]
    EdgeOutsideTable { edge: f64, lo: f64, hi: f64 },
    #[error("entry '{0}' carries no eigenvalue table")]
    NoEigenTable(String),
    #[error("assembled ZPL {0} eV is not positive")]
    NonPositiveZpl(f64),
    #[error("transition level {level} eV lies outside the sanity window for gap {gap} eV")]
    LevelOutsideWindow { level: f64, gap: f64 },
}

/// E_f as a function of Fermi energy: intercept at E_F = E_v plus slope q.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormationEnergyLine {
    pub charge: i32,
    /// E_f at E_F = 0 (i.e. at the valence-band edge), eV.
    pub intercept_ev: f64,
    /// Finite-size correction already folded into the intercept, eV.
    pub correction_ev: f64,
}

impl FormationEnergyLine {
    pub fn slope(&self) -> f64 {
        self.charge as f64
    }

    /// E_f at Fermi energy `e_f` above E_v, eV.
    pub fn at(&self, e_f: f64) -> f64 {
        self.intercept_ev + self.charge as f64 * e_f
    }
}

/// Thermodynamic charge-transition level (q/q′), higher charge first.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionLevel {
    pub q: i32,
    pub q_prime: i32,
    /// eV above E_v.
    pub position_ev: f64,
    /// False when the level falls outside [0, gap] (still reported).
    pub in_gap: bool,
}

impl TransitionLevel {
    pub fn label(&self) -> String {
        format!("({}/{})", charge_tag(self.q), charge_tag(self.q_prime))
    }
}

fn charge_tag(q: i32) -> String {
    match q {
        0 => "0".into(),
        1 => "+".into(),
        -1 => "-".into(),
        other => format!("{other:+}"),
    }
}

/// ΔSCF ZPL with its correction breakdown; zpl = raw + both corrections.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZplResult {
    pub zpl_ev: f64,
    pub raw_dscf_ev: f64,
    pub spin_purification_ev: f64,
    pub band_filling_ev: f64,
}

pub fn assemble_zpl(
    raw_dscf_ev: f64,
    spin_purification_ev: f64,
    band_filling_ev: f64,
) -> Result<ZplResult, LevelsError> {
    let zpl_ev = raw_dscf_ev + spin_purification_ev + band_filling_ev;
    if !(zpl_ev > 0.0) {
        return Err(LevelsError::NonPositiveZpl(zpl_ev));
    }
    Ok(ZplResult { zpl_ev, raw_dscf_ev, spin_purification_ev, band_filling_ev })
}

fn formation_from_entry(
    manifest: &EnergyManifest,
    entry: &DefectEntry,
    e_f: f64,
) -> Result<f64, LevelsError> {
    let mut mu_sum = 0.0;
    for (sym, &n) in &entry.deltas {
        let mu = manifest
            .chemical_potentials
            .get(sym)
            .ok_or_else(|| LevelsError::MissingChemicalPotential(sym.clone()))?;
        mu_sum += n as f64 * mu;
    }
    Ok(entry.energy - manifest.bulk_energy - mu_sum
        + entry.charge as f64 * (manifest.e_v + e_f)
        + entry.correction)
}

/// Formation energy of a labelled entry at Fermi energy `e_f` above E_v, eV.
pub fn formation_energy(
    manifest: &EnergyManifest,
    label: &str,
    e_f: f64,
) -> Result<f64, LevelsError> {
    let entry = manifest
        .entry(label)
        .ok_or_else(|| LevelsError::UnknownEntry(label.to_string()))?;
    formation_from_entry(manifest, entry, e_f)
}

pub fn formation_line(
    manifest: &EnergyManifest,
    label: &str,
) -> Result<FormationEnergyLine, LevelsError> {
    let entry = manifest
        .entry(label)
        .ok_or_else(|| LevelsError::UnknownEntry(label.to_string()))?;
    Ok(FormationEnergyLine {
        charge: entry.charge,
        intercept_ev: formation_from_entry(manifest, entry, 0.0)?,
        correction_ev: entry.correction,
    })
}

/// Lowest formation energy over entries with the given charge, at E_F = 0.
fn best_intercept(manifest: &EnergyManifest, q: i32) -> Result<f64, LevelsError> {
    let mut best: Option<f64> = None;
    for entry in manifest.entries.iter().filter(|e| e.charge == q) {
        let ef = formation_from_entry(manifest, entry, 0.0)?;
        best = Some(best.map_or(ef, |b: f64| b.min(ef)));
    }
    best.ok_or(LevelsError::NoEntryForCharge(q))
}

/// Transition level E(q/q′) above E_v. When several entries share a charge
/// the lowest-E_f one represents it.
pub fn transition_level(
    manifest: &EnergyManifest,
    q: i32,
    q_prime: i32,
) -> Result<TransitionLevel, LevelsError> {
    if q == q_prime {
        return Err(LevelsError::SameCharge(q));
    }
    let ef_q = best_intercept(manifest, q)?;
    let ef_qp = best_intercept(manifest, q_prime)?;
    let position_ev = (ef_q - ef_qp) / (q_prime - q) as f64;
    let gap = manifest.gap();
    if !(-0.5..=gap + 0.5).contains(&position_ev) {
        return Err(LevelsError::LevelOutsideWindow { level: position_ev, gap });
    }
    Ok(TransitionLevel { q, q_prime, position_ev, in_gap: (0.0..=gap).contains(&position_ev) })
}

/// Stable-charge map over E_F ∈ [0, gap].
#[derive(Debug, Clone)]
pub struct CtlDiagram {
    /// (E_F above E_v in eV, stable charge, minimal E_f in eV) per sample.
    pub samples: Vec<(f64, i32, f64)>,
    /// Exact line crossings where the stable charge changes, ordered by E_F.
    pub breakpoints: Vec<TransitionLevel>,
    pub gap_ev: f64,
}

impl CtlDiagram {
    /// Three-column text with a `levels:` header listing the breakpoints.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let labels: Vec<String> = self
            .breakpoints
            .iter()
            .map(|l| format!("{} {:.6}", l.label(), l.position_ev))
            .collect();
        out.push_str(&format!("# levels: {}\n", labels.join(", ")));
        out.push_str("# columns: e_fermi_ev stable_charge min_formation_ev\n");
        for (e_f, q, ef) in &self.samples {
            out.push_str(&format!("{e_f:.6} {q:+} {ef:.6}\n"));
        }
        out
    }
}

pub fn ctl_diagram(
    manifest: &EnergyManifest,
    gap_ev: f64,
    resolution_ev: f64,
) -> Result<CtlDiagram, LevelsError> {
    let n = ((gap_ev / resolution_ev).ceil() as usize).max(1);
    let mut samples = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let e_f = gap_ev * k as f64 / n as f64;
        let mut best: Option<(i32, f64)> = None;
        for entry in &manifest.entries {
            let ef = formation_from_entry(manifest, entry, e_f)?;
            // ties go to the lower charge (the state taking over as E_F rises)
            let better = match best {
                None => true,
                Some((bq, bef)) => ef < bef || (ef == bef && entry.charge < bq),
            };
            if better {
                best = Some((entry.charge, ef));
            }
        }
        let (q, ef) = best.expect("manifest guarantees at least one entry");
        samples.push((e_f, q, ef));
    }
    let mut breakpoints = Vec::new();
    for pair in samples.windows(2) {
        let (q_lo, q_hi) = (pair[0].1, pair[1].1);
        if q_lo != q_hi {
            breakpoints.push(transition_level(manifest, q_lo, q_hi)?);
        }
    }
    Ok(CtlDiagram { samples, breakpoints, gap_ev })
}

/// Exchange (spin-purification) sum rule for the open-shell singlet:
/// E_S = 2·E_mixed − E_T.
pub fn spin_purified_singlet(e_mixed_ev: f64, e_triplet_ev: f64) -> f64 {
    2.0 * e_mixed_ev - e_triplet_ev
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BandFillingKind {
    /// Occupied states above the conduction edge are drained to the edge.
    DonorLike,
    /// Holes below the valence edge are floated up to the edge.
    AcceptorLike,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandFillingResult {
    /// Energy to ADD to the raw total energy, eV. Donor-like ≤ 0,
    /// acceptor-like ≥ 0 by the sign convention documented on
    /// [`band_filling_correction`].
    pub correction_ev: f64,
    pub states_counted: usize,
    /// Present when no state crossed the edge and the correction is zero.
    pub note: Option<String>,
}

/// Moss-Burstein-type band-filling correction from an eigenvalue table.
///
/// Donor-like: ΔE = −Σ_k w_k Σ_n η_{nk}(ε_{nk} − ε_edge) over occupied
/// states above the conduction edge. Acceptor-like mirrors the form for
/// holes: ΔE = +Σ_k w_k Σ_n (2 − η_{nk})(ε_edge − ε_{nk}) over partly
/// empty states below the valence edge. Both remove the spurious
/// dispersion-filling energy; the returned value is added to the raw total.
pub fn band_filling_correction(
    table: &[EigenLevel],
    edge_ev: f64,
    kind: BandFillingKind,
) -> Result<BandFillingResult, LevelsError> {
    if table.is_empty() {
        return Err(LevelsError::NoEigenTable("<eigenvalue table>".into()));
    }
    let lo = table.iter().map(|l| l.energy).fold(f64::INFINITY, f64::min);
    let hi = table.iter().map(|l| l.energy).fold(f64::NEG_INFINITY, f64::max);
    if edge_ev < lo || edge_ev > hi {
        return Err(LevelsError::EdgeOutsideTable { edge: edge_ev, lo, hi });
    }
    let mut correction = 0.0;
    let mut counted = 0usize;
    for level in table {
        match kind {
            BandFillingKind::DonorLike => {
                if level.energy > edge_ev && level.occupation > 0.0 {
                    correction -= level.kweight * level.occupation * (level.energy - edge_ev);
                    counted += 1;
                }
            }
            BandFillingKind::AcceptorLike => {
                if level.energy < edge_ev && level.occupation < 2.0 {
                    correction +=
                        level.kweight * (2.0 - level.occupation) * (edge_ev - level.energy);
                    counted += 1;
                }
            }
        }
    }
    let note = if counted == 0 {
        Some("no states beyond the edge; correction is zero".to_string())
    } else {
        None
    };
    Ok(BandFillingResult { correction_ev: correction, states_counted: counted, note })
}

/// Generalized-Koopmans residual ε_HOMO − [E(N) − E(N−1)]; zero means the
/// highest occupied level reproduces the total-energy ionization energy.
pub fn koopmans_check(
    manifest: &EnergyManifest,
    label_n: &str,
    label_n_minus_1: &str,
    eps_homo_ev: f64,
) -> Result<f64, LevelsError> {
    let e_n = manifest
        .entry(label_n)
        .ok_or_else(|| LevelsError::UnknownEntry(label_n.to_string()))?
        .energy;
    let e_nm1 = manifest
        .entry(label_n_minus_1)
        .ok_or_else(|| LevelsError::UnknownEntry(label_n_minus_1.to_string()))?
        .energy;
    Ok(eps_homo_ev - (e_n - e_nm1))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExcitonBinding {
    /// (E_c − level) − E_zpl, eV.
    pub binding_ev: f64,
    /// False flags NegativeBinding: the ZPL exceeds the ionization energy.
    pub bound: bool,
}

/// Binding energy of the bound exciton against ionization through the
/// donor level: E_bind = (gap − level_above_Ev) − E_zpl.
pub fn exciton_binding(
    level: &TransitionLevel,
    e_zpl_ev: f64,
    gap_ev: f64,
) -> Result<ExcitonBinding, LevelsError> {
    if !(0.0..=gap_ev).contains(&level.position_ev) {
        return Err(LevelsError::LevelOutsideWindow { level: level.position_ev, gap: gap_ev });
    }
    let binding_ev = (gap_ev - level.position_ev) - e_zpl_ev;
    Ok(ExcitonBinding { binding_ev, bound: binding_ev >= 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::parse_manifest;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    /// Back-solved so E_f(0) = 3.72 eV and the levels land at E_v + 0.32
    /// and E_v + 0.97 eV.
    const FIXTURE: &str = "\
bulk_energy = -2494
e_v = 0
e_c = 1.16
mu_C = -9.72
entry Ci0 charge=0 energy=-2500 corr=0
  delta C 1
entry Ci+ charge=1 energy=-2500.32 corr=0
  delta C 1
entry Ci- charge=-1 energy=-2499.03 corr=0
  delta C 1
";

    #[test]
    fn neutral_formation_energy() {
        let m = parse_manifest(FIXTURE).unwrap();
        assert_relative_eq!(formation_energy(&m, "Ci0", 0.0).unwrap(), 3.72, epsilon = 1e-12);
        // charge 0: flat in E_F
        assert_relative_eq!(formation_energy(&m, "Ci0", 0.9).unwrap(), 3.72, epsilon = 1e-12);
    }

    #[test]
    fn slope_equals_charge() {
        let m = parse_manifest(FIXTURE).unwrap();
        let a = formation_energy(&m, "Ci+", 0.0).unwrap();
        let b = formation_energy(&m, "Ci+", 1.0).unwrap();
        assert_relative_eq!(b - a, 1.0, epsilon = 1e-12);
        let line = formation_line(&m, "Ci-").unwrap();
        assert_eq!(line.slope(), -1.0);
        assert_relative_eq!(line.at(0.5) - line.at(0.0), -0.5, epsilon = 1e-12);
    }

    #[test]
    fn fixture_transition_levels() {
        let m = parse_manifest(FIXTURE).unwrap();
        let donor = transition_level(&m, 1, 0).unwrap();
        assert_relative_eq!(donor.position_ev, 0.32, epsilon = 1e-12);
        assert_eq!(donor.label(), "(+/0)");
        assert!(donor.in_gap);
        let acceptor = transition_level(&m, 0, -1).unwrap();
        assert_relative_eq!(acceptor.position_ev, 0.97, epsilon = 1e-12);
        assert_eq!(acceptor.label(), "(0/-)");
    }

    #[test]
    fn level_is_line_crossing() {
        let m = parse_manifest(FIXTURE).unwrap();
        let level = transition_level(&m, 1, 0).unwrap();
        let la = formation_line(&m, "Ci+").unwrap();
        let lb = formation_line(&m, "Ci0").unwrap();
        // independent oracle: intersection of the two lines
        let x = (lb.intercept_ev - la.intercept_ev) / (la.slope() - lb.slope());
        assert_relative_eq!(level.position_ev, x, epsilon = 1e-12);
        assert_relative_eq!(la.at(x), lb.at(x), epsilon = 1e-12);
    }

    #[test]
    fn symmetric_two_state_toy() {
        let text = "\
bulk_energy = 0
e_v = 0
e_c = 1
entry a charge=1 energy=1 corr=0
entry b charge=0 energy=1.5 corr=0
";
        let m = parse_manifest(text).unwrap();
        // lines 1 + E_F and 1.5 cross at E_F = 0.5
        let level = transition_level(&m, 1, 0).unwrap();
        assert_relative_eq!(level.position_ev, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn random_manifest_matches_brute_force() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let bulk: f64 = rng.gen_range(-3000.0..-1000.0);
            let mu_c: f64 = rng.gen_range(-12.0..-6.0);
            let mu_si: f64 = rng.gen_range(-8.0..-4.0);
            let e_v: f64 = rng.gen_range(-1.0..1.0);
            let q: i32 = rng.gen_range(-2..=2);
            let energy: f64 = bulk + rng.gen_range(-20.0..20.0);
            let corr: f64 = rng.gen_range(-0.3..0.3);
            let dc: i32 = rng.gen_range(-2..=2);
            let dsi: i32 = rng.gen_range(-2..=2);
            let text = format!(
                "bulk_energy = {bulk}\ne_v = {e_v}\ne_c = {}\nmu_C = {mu_c}\nmu_Si = {mu_si}\n\
                 entry x charge={q} energy={energy} corr={corr}\n  delta C {dc}\n  delta Si {dsi}\n",
                e_v + 1.17
            );
            let m = parse_manifest(&text).unwrap();
            let e_f: f64 = rng.gen_range(0.0..1.17);
            let got = formation_energy(&m, "x", e_f).unwrap();
            // independent re-evaluation of the defining formula
            let want = energy - bulk - (dc as f64 * mu_c + dsi as f64 * mu_si)
                + q as f64 * (e_v + e_f)
                + corr;
            assert_relative_eq!(got, want, epsilon = 1e-10);
        }
    }

    #[test]
    fn diagram_matches_fixture_and_is_monotonic() {
        let m = parse_manifest(FIXTURE).unwrap();
        let d = ctl_diagram(&m, 1.16, 0.01).unwrap();
        assert_eq!(d.breakpoints.len(), 2);
        assert_relative_eq!(d.breakpoints[0].position_ev, 0.32, epsilon = 1e-12);
        assert_relative_eq!(d.breakpoints[1].position_ev, 0.97, epsilon = 1e-12);
        for (e_f, q, _) in &d.samples {
            let expect = if *e_f < 0.32 {
                1
            } else if *e_f < 0.97 {
                0
            } else {
                -1
            };
            assert_eq!(*q, expect, "at E_F = {e_f}");
        }
        for pair in d.samples.windows(2) {
            assert!(pair[1].1 <= pair[0].1, "charge increased with E_F");
        }
        let text = d.to_text();
        assert!(text.starts_with("# levels: (+/0) 0.320000, (0/-) 0.970000\n"));
    }

    #[test]
    fn single_entry_diagram_is_flat() {
        let text = "bulk_energy = 0\ne_v = 0\ne_c = 1\nentry only charge=0 energy=2 corr=0\n";
        let m = parse_manifest(text).unwrap();
        let d = ctl_diagram(&m, 1.0, 0.05).unwrap();
        assert!(d.breakpoints.is_empty());
        assert!(d.samples.iter().all(|(_, q, _)| *q == 0));
    }

    #[test]
    fn random_diagram_charge_never_increases() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for _ in 0..200 {
            let mut text = String::from("bulk_energy = 0\ne_v = 0\ne_c = 1\n");
            for (i, q) in (-2..=2).enumerate() {
                let e: f64 = rng.gen_range(-1.0..3.0);
                text.push_str(&format!("entry s{i} charge={q} energy={e} corr=0\n"));
            }
            let m = parse_manifest(&text).unwrap();
            let d = ctl_diagram(&m, 1.0, 0.02).unwrap();
            for pair in d.samples.windows(2) {
                assert!(pair[1].1 <= pair[0].1);
            }
        }
    }

    #[test]
    fn spin_purification_algebra() {
        assert_relative_eq!(spin_purified_singlet(0.7, 0.7), 0.7, epsilon = 1e-15);
        assert_relative_eq!(spin_purified_singlet(0.85, 0.86), 0.84, epsilon = 1e-12);
        // linearity under a uniform shift
        let c = 0.37;
        assert_relative_eq!(
            spin_purified_singlet(0.85 + c, 0.86 + c),
            spin_purified_singlet(0.85, 0.86) + c,
            epsilon = 1e-12
        );
    }

    fn lvl(e: f64, occ: f64, kw: f64) -> EigenLevel {
        EigenLevel { energy: e, occupation: occ, kweight: kw }
    }

    #[test]
    fn band_filling_single_term() {
        let table = [lvl(0.5, 2.0, 1.0), lvl(1.21, 1.0, 1.0)];
        let r = band_filling_correction(&table, 1.16, BandFillingKind::DonorLike).unwrap();
        assert_relative_eq!(r.correction_ev, -0.05, epsilon = 1e-12);
        assert_eq!(r.states_counted, 1);
        assert!(r.note.is_none());
    }

    #[test]
    fn band_filling_empty_selection() {
        let table = [lvl(0.5, 2.0, 1.0), lvl(1.3, 0.0, 1.0)];
        let r = band_filling_correction(&table, 1.16, BandFillingKind::DonorLike).unwrap();
        assert_eq!(r.correction_ev, 0.0);
        assert!(r.note.is_some());
    }

    #[test]
    fn band_filling_multi_k_matches_brute_force() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let mut table = Vec::new();
        for kw in [0.25, 0.75] {
            for _ in 0..6 {
                table.push(lvl(rng.gen_range(-1.0..2.0), rng.gen_range(0.0..2.0), kw));
            }
        }
        let edge = 0.8;
        let donor = band_filling_correction(&table, edge, BandFillingKind::DonorLike).unwrap();
        let mut want = 0.0;
        for l in &table {
            if l.energy > edge {
                want -= l.kweight * l.occupation * (l.energy - edge);
            }
        }
        assert_relative_eq!(donor.correction_ev, want, epsilon = 1e-12);
        assert!(donor.correction_ev <= 0.0);

        let acceptor = band_filling_correction(&table, edge, BandFillingKind::AcceptorLike).unwrap();
        let mut want = 0.0;
        for l in &table {
            if l.energy < edge {
                want += l.kweight * (2.0 - l.occupation) * (edge - l.energy);
            }
        }
        assert_relative_eq!(acceptor.correction_ev, want, epsilon = 1e-12);
        assert!(acceptor.correction_ev >= 0.0);
    }

    #[test]
    fn band_filling_edge_outside_table() {
        let table = [lvl(0.0, 2.0, 1.0), lvl(1.0, 0.0, 1.0)];
        assert!(matches!(
            band_filling_correction(&table, 5.0, BandFillingKind::DonorLike),
            Err(LevelsError::EdgeOutsideTable { .. })
        ));
    }

    #[test]
    fn koopmans_residual() {
        let text = "\
bulk_energy = 0
e_v = 0
e_c = 1
entry n charge=0 energy=-10 corr=0
entry nm1 charge=1 energy=-4.8 corr=0
";
        let m = parse_manifest(text).unwrap();
        // E(N) − E(N−1) = −5.2; ε_HOMO = −5.0 → residual +0.2
        assert_relative_eq!(koopmans_check(&m, "n", "nm1", -5.0).unwrap(), 0.2, epsilon = 1e-12);
        // gKT satisfied when the level matches the total-energy difference
        assert_relative_eq!(koopmans_check(&m, "n", "nm1", -5.2).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn exciton_binding_values() {
        let level =
            TransitionLevel { q: 1, q_prime: 0, position_ev: 1.16 - 0.87, in_gap: true };
        let b = exciton_binding(&level, 0.856, 1.16).unwrap();
        assert_relative_eq!(b.binding_ev, 0.014, epsilon = 1e-12);
        assert!(b.bound);

        let exact = exciton_binding(&level, 0.87, 1.16).unwrap();
        assert_relative_eq!(exact.binding_ev, 0.0, epsilon = 1e-12);

        let unbound = exciton_binding(&level, 0.95, 1.16).unwrap();
        assert!(!unbound.bound);
    }

    #[test]
    fn assemble_zpl_breakdown() {
        let z = assemble_zpl(0.88, -0.02, -0.004).unwrap();
        assert_relative_eq!(
            z.zpl_ev,
            z.raw_dscf_ev + z.spin_purification_ev + z.band_filling_ev,
            epsilon = 1e-12
        );
        assert!(assemble_zpl(0.1, -0.2, 0.0).is_err());
    }
}
