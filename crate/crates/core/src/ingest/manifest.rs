//! Energy manifest parser.
//!
//! Format:
//! ```text
//! bulk_energy = <eV>
//! e_v = <eV>
//! e_c = <eV>
//! mu_<SYMBOL> = <eV>
//! <other_key> = <text>            (kept as provenance metadata)
//! entry <label> charge=<q> energy=<eV> corr=<eV>
//!   delta <SYMBOL> <int>          (stoichiometry difference vs bulk)
//!   level <eV> occ=<f> kweight=<w>
//! ```
//!
//! Consecutive `level` lines sharing one kweight form a k-point block;
//! block weights must sum to 1 within 1e-9.

use super::{content_lines, fmt_f64, is_known_species};
use std::collections::BTreeMap;
use thiserror::Error;

pub const KWEIGHT_TOL: f64 = 1e-9;

/// Named total energies, chemical potentials, band edges and per-entry
/// eigenvalue tables.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyManifest {
    /// eV
    pub bulk_energy: f64,
    /// Valence-band edge, eV.
    pub e_v: f64,
    /// Conduction-band edge, eV.
    pub e_c: f64,
    /// μ_i per species symbol, eV.
    pub chemical_potentials: BTreeMap<String, f64>,
    pub entries: Vec<DefectEntry>,
    /// Unrecognized `key = value` lines, kept verbatim for provenance.
    pub metadata: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DefectEntry {
    pub label: String,
    pub charge: i32,
    /// Total energy, eV.
    pub energy: f64,
    /// Electrostatic finite-size correction, eV (consumed as a scalar).
    pub correction: f64,
    /// Stoichiometry difference vs bulk: species → atom count added.
    pub deltas: BTreeMap<String, i32>,
    pub levels: Vec<EigenLevel>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenLevel {
    /// eV
    pub energy: f64,
    /// [0, 2]
    pub occupation: f64,
    pub kweight: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum ManifestError {
    #[error("malformed line {0}: {1}")]
    MalformedLine(usize, String),
    #[error("non-finite value in token '{0}' on line {1}")]
    NonFiniteValue(String, usize),
    #[error("missing required key '{0}'")]
    MissingKey(String),
    #[error("occupation {0} outside [0, 2] on line {1}")]
    InvalidOccupation(f64, usize),
    #[error("band gap inverted: E_c = {e_c} <= E_v = {e_v}")]
    GapInverted { e_v: f64, e_c: f64 },
    #[error("k-point weights of entry '{0}' sum to {1}, expected 1")]
    BadKweightSum(String, f64),
    #[error("unknown species '{0}' on line {1}")]
    UnknownSpecies(String, usize),
}

fn parse_float(tok: &str, line: usize) -> Result<f64, ManifestError> {
    let v: f64 = tok
        .parse()
        .map_err(|_| ManifestError::MalformedLine(line, format!("expected number, got '{tok}'")))?;
    if !v.is_finite() {
        return Err(ManifestError::NonFiniteValue(tok.to_string(), line));
    }
    Ok(v)
}

fn kv_token<'a>(tok: &'a str, key: &str, ln: usize) -> Result<&'a str, ManifestError> {
    tok.strip_prefix(key)
        .and_then(|rest| rest.strip_prefix('='))
        .ok_or_else(|| ManifestError::MalformedLine(ln, format!("expected '{key}=<value>', got '{tok}'")))
}

pub fn parse_manifest(text: &str) -> Result<EnergyManifest, ManifestError> {
    let mut bulk_energy = None;
    let mut e_v = None;
    let mut e_c = None;
    let mut chemical_potentials = BTreeMap::new();
    let mut metadata = BTreeMap::new();
    let mut entries: Vec<DefectEntry> = Vec::new();

    for (ln, line) in content_lines(text) {
        let indented = line.starts_with(' ') || line.starts_with('\t');
        let trimmed = line.trim();
        let toks: Vec<&str> = trimmed.split_whitespace().collect();

        if indented {
            let entry = entries
                .last_mut()
                .ok_or_else(|| ManifestError::MalformedLine(ln, "indented line outside an entry".into()))?;
            match toks.as_slice() {
                ["delta", sym, n] => {
                    if !is_known_species(sym) {
                        return Err(ManifestError::UnknownSpecies(sym.to_string(), ln));
                    }
                    let n: i32 = n
                        .parse()
                        .map_err(|_| ManifestError::MalformedLine(ln, format!("bad delta count '{n}'")))?;
                    entry.deltas.insert(sym.to_string(), n);
                }
                ["level", e, occ, kw] => {
                    let energy = parse_float(e, ln)?;
                    let occupation = parse_float(kv_token(occ, "occ", ln)?, ln)?;
                    if !(0.0..=2.0).contains(&occupation) {
                        return Err(ManifestError::InvalidOccupation(occupation, ln));
                    }
                    let kweight = parse_float(kv_token(kw, "kweight", ln)?, ln)?;
                    entry.levels.push(EigenLevel { energy, occupation, kweight });
                }
                _ => {
                    return Err(ManifestError::MalformedLine(ln, format!("unrecognized entry line '{trimmed}'")))
                }
            }
            continue;
        }

        if toks.first() == Some(&"entry") {
            if toks.len() != 5 {
                return Err(ManifestError::MalformedLine(
                    ln,
                    "expected 'entry <label> charge=<q> energy=<eV> corr=<eV>'".into(),
                ));
            }
            let label = toks[1].to_string();
            let charge: i32 = kv_token(toks[2], "charge", ln)?
                .parse()
                .map_err(|_| ManifestError::MalformedLine(ln, format!("bad charge in '{}'", toks[2])))?;
            let energy = parse_float(kv_token(toks[3], "energy", ln)?, ln)?;
            let correction = parse_float(kv_token(toks[4], "corr", ln)?, ln)?;
            entries.push(DefectEntry {
                label,
                charge,
                energy,
                correction,
                deltas: BTreeMap::new(),
                levels: Vec::new(),
            });
            continue;
        }

        // key = value
        match toks.as_slice() {
            [key, "=", rest @ ..] if !rest.is_empty() => {
                let value = rest.join(" ");
                match *key {
                    "bulk_energy" => bulk_energy = Some(parse_float(&value, ln)?),
                    "e_v" => e_v = Some(parse_float(&value, ln)?),
                    "e_c" => e_c = Some(parse_float(&value, ln)?),
                    _ => {
                        if let Some(sym) = key.strip_prefix("mu_") {
                            if !is_known_species(sym) {
                                return Err(ManifestError::UnknownSpecies(sym.to_string(), ln));
                            }
                            chemical_potentials.insert(sym.to_string(), parse_float(&value, ln)?);
                        } else {
                            metadata.insert(key.to_string(), value);
                        }
                    }
                }
            }
            _ => return Err(ManifestError::MalformedLine(ln, format!("unrecognized line '{trimmed}'"))),
        }
    }

    let bulk_energy = bulk_energy.ok_or(ManifestError::MissingKey("bulk_energy".into()))?;
    let e_v = e_v.ok_or(ManifestError::MissingKey("e_v".into()))?;
    let e_c = e_c.ok_or(ManifestError::MissingKey("e_c".into()))?;
    if e_c <= e_v {
        return Err(ManifestError::GapInverted { e_v, e_c });
    }
    if entries.is_empty() {
        return Err(ManifestError::MissingKey("entry".into()));
    }

    for entry in &entries {
        if entry.levels.is_empty() {
            continue;
        }
        // runs of equal kweight = one k-point each
        let mut sum = 0.0;
        let mut prev: Option<f64> = None;
        for level in &entry.levels {
            if prev != Some(level.kweight) {
                sum += level.kweight;
                prev = Some(level.kweight);
            }
        }
        if (sum - 1.0).abs() > KWEIGHT_TOL {
            return Err(ManifestError::BadKweightSum(entry.label.clone(), sum));
        }
    }

    Ok(EnergyManifest { bulk_energy, e_v, e_c, chemical_potentials, entries, metadata })
}

impl EnergyManifest {
    pub fn entry(&self, label: &str) -> Option<&DefectEntry> {
        self.entries.iter().find(|e| e.label == label)
    }

    pub fn gap(&self) -> f64 {
        self.e_c - self.e_v
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("bulk_energy = {}\n", fmt_f64(self.bulk_energy)));
        out.push_str(&format!("e_v = {}\n", fmt_f64(self.e_v)));
        out.push_str(&format!("e_c = {}\n", fmt_f64(self.e_c)));
        for (sym, mu) in &self.chemical_potentials {
            out.push_str(&format!("mu_{sym} = {}\n", fmt_f64(*mu)));
        }
        for (key, value) in &self.metadata {
            out.push_str(&format!("{key} = {value}\n"));
        }
        for e in &self.entries {
            out.push_str(&format!(
                "entry {} charge={} energy={} corr={}\n",
                e.label,
                e.charge,
                fmt_f64(e.energy),
                fmt_f64(e.correction)
            ));
            for (sym, n) in &e.deltas {
                out.push_str(&format!("  delta {sym} {n}\n"));
            }
            for l in &e.levels {
                out.push_str(&format!(
                    "  level {} occ={} kweight={}\n",
                    fmt_f64(l.energy),
                    fmt_f64(l.occupation),
                    fmt_f64(l.kweight)
                ));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "bulk_energy = -2494\ne_v = 0\ne_c = 1.16\nmu_C = -9.72\nentry Ci0 charge=0 energy=-2500 corr=0\n  delta C 1\n";

    #[test]
    fn minimal_neutral_manifest() {
        let m = parse_manifest(MINIMAL).unwrap();
        assert_eq!(m.entries.len(), 1);
        assert_eq!(m.entries[0].charge, 0);
        assert_eq!(m.entries[0].deltas["C"], 1);
        assert!((m.gap() - 1.16).abs() < 1e-12);
    }

    #[test]
    fn gap_inverted() {
        let text = MINIMAL.replace("e_c = 1.16", "e_c = -0.5");
        assert!(matches!(parse_manifest(&text), Err(ManifestError::GapInverted { .. })));
    }

    #[test]
    fn missing_bulk_energy() {
        let text = MINIMAL.replace("bulk_energy = -2494\n", "");
        match parse_manifest(&text) {
            Err(ManifestError::MissingKey(k)) => assert_eq!(k, "bulk_energy"),
            other => panic!("expected MissingKey, got {other:?}"),
        }
    }

    #[test]
    fn invalid_occupation() {
        let text = format!("{MINIMAL}  level 1.2 occ=2.5 kweight=1\n");
        assert!(matches!(parse_manifest(&text), Err(ManifestError::InvalidOccupation(..))));
    }

    #[test]
    fn kweight_blocks_must_sum_to_one() {
        let good = format!("{MINIMAL}  level 1.2 occ=1 kweight=0.5\n  level 1.3 occ=1 kweight=0.5\n  level 1.2 occ=1 kweight=0.5\n");
        // runs: 0.5, 0.5 (second run starts when... same weight) — consecutive
        // equal weights form ONE block, so sum = 0.5 here and must fail
        assert!(matches!(parse_manifest(&good), Err(ManifestError::BadKweightSum(..))));

        let two_kpoints = format!("{MINIMAL}  level 1.2 occ=1 kweight=0.75\n  level 1.3 occ=1 kweight=0.75\n  level 1.2 occ=1 kweight=0.25\n");
        assert!(parse_manifest(&two_kpoints).is_ok());
    }

    #[test]
    fn metadata_preserved() {
        let text = format!("cutoff_note = 420 eV wavefunction\n{MINIMAL}");
        let m = parse_manifest(&text).unwrap();
        assert_eq!(m.metadata["cutoff_note"], "420 eV wavefunction");
    }

    #[test]
    fn round_trip() {
        let text = format!("{MINIMAL}  level 1.21 occ=1 kweight=1\n");
        let m = parse_manifest(&text).unwrap();
        let s = m.to_text();
        let m2 = parse_manifest(&s).unwrap();
        assert_eq!(m2, m);
        assert_eq!(m2.to_text(), s);
    }
}
