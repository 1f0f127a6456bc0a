//! Phonon basis parser.
//!
//! Format:
//! ```text
//! phonons <natoms> <nmodes>
//! mode <k> <freq_meV>
//! ex ey ez               (natoms lines, mass-weighted eigenvector)
//! ...
//! ```
//!
//! Eigenvectors are required pre-mass-weighted and orthonormal; the parser
//! verifies orthonormality to 1e-6 and never re-diagonalizes anything.

use super::{content_lines, fmt_f64};
use thiserror::Error;

pub const ORTHONORMALITY_TOL: f64 = 1e-6;

/// Mode frequencies and mass-weighted eigenvectors for one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct PhononBasis {
    pub natoms: usize,
    pub modes: Vec<PhononMode>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhononMode {
    pub index: usize,
    /// ħω in meV; ≥ 0 (imaginary modes are rejected at parse time).
    pub frequency_mev: f64,
    /// 3·natoms mass-weighted components, dimensionless.
    pub eigenvector: Vec<f64>,
}

#[derive(Debug, Error, PartialEq)]
pub enum PhononError {
    #[error("malformed line {0}: {1}")]
    MalformedLine(usize, String),
    #[error("non-finite value in token '{0}' on line {1}")]
    NonFiniteValue(String, usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("mode {0} has imaginary (negative) frequency {1} meV")]
    ImaginaryMode(usize, f64),
    #[error("modes {0} and {1} not orthonormal: deviation {2:e}")]
    NonOrthonormal(usize, usize, f64),
}

fn parse_float(tok: &str, line: usize) -> Result<f64, PhononError> {
    let v: f64 = tok
        .parse()
        .map_err(|_| PhononError::MalformedLine(line, format!("expected number, got '{tok}'")))?;
    if !v.is_finite() {
        return Err(PhononError::NonFiniteValue(tok.to_string(), line));
    }
    Ok(v)
}

pub fn parse_phonons(text: &str) -> Result<PhononBasis, PhononError> {
    let mut lines = content_lines(text);
    let (ln, head) = lines
        .next()
        .ok_or_else(|| PhononError::MalformedLine(0, "empty input".into()))?;
    let (natoms, nmodes) = match head.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["phonons", na, nm] => {
            let na: usize = na
                .parse()
                .map_err(|_| PhononError::MalformedLine(ln, format!("bad atom count '{na}'")))?;
            let nm: usize = nm
                .parse()
                .map_err(|_| PhononError::MalformedLine(ln, format!("bad mode count '{nm}'")))?;
            (na, nm)
        }
        _ => return Err(PhononError::MalformedLine(ln, format!("expected 'phonons <natoms> <nmodes>', got '{head}'"))),
    };
    if natoms == 0 {
        return Err(PhononError::DimensionMismatch("natoms must be >= 1".into()));
    }
    if nmodes > 3 * natoms {
        return Err(PhononError::DimensionMismatch(format!(
            "{nmodes} modes declared but only {} degrees of freedom",
            3 * natoms
        )));
    }

    let mut modes = Vec::with_capacity(nmodes);
    for _ in 0..nmodes {
        let (ln, line) = lines
            .next()
            .ok_or_else(|| PhononError::DimensionMismatch("fewer modes than declared".into()))?;
        let (index, freq) = match line.split_whitespace().collect::<Vec<_>>().as_slice() {
            ["mode", k, f] => {
                let k: usize = k
                    .parse()
                    .map_err(|_| PhononError::MalformedLine(ln, format!("bad mode index '{k}'")))?;
                (k, parse_float(f, ln)?)
            }
            _ => return Err(PhononError::MalformedLine(ln, format!("expected 'mode <k> <freq_meV>', got '{line}'"))),
        };
        if freq < 0.0 {
            return Err(PhononError::ImaginaryMode(index, freq));
        }
        let mut eigenvector = Vec::with_capacity(3 * natoms);
        for _ in 0..natoms {
            let (ln, line) = lines
                .next()
                .ok_or_else(|| PhononError::DimensionMismatch("truncated eigenvector".into()))?;
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 3 {
                return Err(PhononError::MalformedLine(ln, "eigenvector row needs 3 components".into()));
            }
            for tok in toks {
                eigenvector.push(parse_float(tok, ln)?);
            }
        }
        modes.push(PhononMode { index, frequency_mev: freq, eigenvector });
    }

    if let Some((ln, line)) = lines.next() {
        return Err(PhononError::MalformedLine(ln, format!("trailing content '{line}'")));
    }

    let basis = PhononBasis { natoms, modes };
    basis.check_orthonormality()?;
    Ok(basis)
}

impl PhononBasis {
    pub fn check_orthonormality(&self) -> Result<(), PhononError> {
        for (i, mi) in self.modes.iter().enumerate() {
            for (j, mj) in self.modes.iter().enumerate().skip(i) {
                let dot: f64 = mi
                    .eigenvector
                    .iter()
                    .zip(&mj.eigenvector)
                    .map(|(a, b)| a * b)
                    .sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                let dev = (dot - expect).abs();
                if dev > ORTHONORMALITY_TOL {
                    return Err(PhononError::NonOrthonormal(mi.index, mj.index, dev));
                }
            }
        }
        Ok(())
    }

    /// Drop declared ω = 0 modes (translations) from the basis.
    pub fn without_zero_modes(&self) -> PhononBasis {
        PhononBasis {
            natoms: self.natoms,
            modes: self
                .modes
                .iter()
                .filter(|m| m.frequency_mev > 0.0)
                .cloned()
                .collect(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("phonons {} {}\n", self.natoms, self.modes.len());
        for m in &self.modes {
            out.push_str(&format!("mode {} {}\n", m.index, fmt_f64(m.frequency_mev)));
            for row in m.eigenvector.chunks(3) {
                out.push_str(&format!("{} {} {}\n", fmt_f64(row[0]), fmt_f64(row[1]), fmt_f64(row[2])));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_mode_single_atom() {
        let text = "phonons 1 1\nmode 1 40\n1 0 0\n";
        let basis = parse_phonons(text).unwrap();
        assert_eq!(basis.modes.len(), 1);
        assert_eq!(basis.modes[0].frequency_mev, 40.0);
    }

    #[test]
    fn duplicate_eigenvectors_rejected() {
        let text = "phonons 1 2\nmode 1 40\n1 0 0\nmode 2 50\n1 0 0\n";
        match parse_phonons(text) {
            Err(PhononError::NonOrthonormal(1, 2, dev)) => assert!((dev - 1.0).abs() < 1e-12),
            other => panic!("expected NonOrthonormal, got {other:?}"),
        }
    }

    #[test]
    fn imaginary_mode_rejected() {
        let text = "phonons 1 1\nmode 1 -5\n1 0 0\n";
        assert!(matches!(parse_phonons(text), Err(PhononError::ImaginaryMode(1, _))));
    }

    #[test]
    fn too_many_modes_rejected() {
        let text = "phonons 1 4\nmode 1 40\n1 0 0\n";
        assert!(matches!(parse_phonons(text), Err(PhononError::DimensionMismatch(_))));
    }

    #[test]
    fn zero_mode_filtering() {
        let text = "phonons 1 3\nmode 1 0\n1 0 0\nmode 2 0\n0 1 0\nmode 3 40\n0 0 1\n";
        let basis = parse_phonons(text).unwrap();
        let reduced = basis.without_zero_modes();
        assert_eq!(reduced.modes.len(), 1);
        assert_eq!(reduced.modes[0].index, 3);
    }

    #[test]
    fn round_trip() {
        let text = "phonons 2 2\nmode 1 12.5\n0.5 0.5 0\n0.5 0.5 0\nmode 2 30\n0.5 -0.5 0\n-0.5 0.5 0\n";
        let basis = parse_phonons(text).unwrap();
        assert_eq!(basis.to_text(), text);
    }
}
