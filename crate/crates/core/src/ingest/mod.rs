//! Parsers and validators for the bespoke line-oriented input formats:
//! structures, phonon bases, volumetric grids and energy manifests.
//!
//! All parsers are pure functions over the input text; parsed values are
//! immutable and freely shareable across threads. Every parser rejects
//! NaN/Inf with a `NonFiniteValue` error and treats trailing content after
//! a complete document as an error.

mod grid;
mod manifest;
mod phonons;
mod structure;

pub use grid::{parse_grid, FieldKind, GridError, ScalarField};
pub use manifest::{
    parse_manifest, DefectEntry, EigenLevel, EnergyManifest, ManifestError,
};
pub use phonons::{parse_phonons, PhononBasis, PhononError, PhononMode};
pub use structure::{parse_structure, Atom, DefectConfiguration, StructureError};

/// A parsed value together with non-fatal diagnostics.
#[derive(Debug, Clone)]
pub struct Parsed<T> {
    pub value: T,
    pub warnings: Vec<String>,
}

impl<T> Parsed<T> {
    pub fn clean(value: T) -> Self {
        Parsed { value, warnings: Vec::new() }
    }
}

/// All IUPAC element symbols; species tokens must be one of these.
pub(crate) const ELEMENT_SYMBOLS: &[&str] = &[
    "H", "He", "Li", "Be", "B", "C", "N", "O", "F", "Ne", "Na", "Mg", "Al",
    "Si", "P", "S", "Cl", "Ar", "K", "Ca", "Sc", "Ti", "V", "Cr", "Mn", "Fe",
    "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As", "Se", "Br", "Kr", "Rb", "Sr",
    "Y", "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd", "In", "Sn",
    "Sb", "Te", "I", "Xe", "Cs", "Ba", "La", "Ce", "Pr", "Nd", "Pm", "Sm",
    "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf", "Ta", "W",
    "Re", "Os", "Ir", "Pt", "Au", "Hg", "Tl", "Pb", "Bi", "Po", "At", "Rn",
    "Fr", "Ra", "Ac", "Th", "Pa", "U", "Np", "Pu", "Am", "Cm", "Bk", "Cf",
    "Es", "Fm", "Md", "No", "Lr", "Rf", "Db", "Sg", "Bh", "Hs", "Mt", "Ds",
    "Rg", "Cn", "Nh", "Fl", "Mc", "Lv", "Ts", "Og",
];

pub(crate) fn is_known_species(symbol: &str) -> bool {
    ELEMENT_SYMBOLS.contains(&symbol)
}

/// Iterate content lines with 1-based line numbers, with `#` comments
/// stripped and blank lines skipped.
pub(crate) fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let trimmed = line.trim_end();
        if trimmed.trim().is_empty() {
            None
        } else {
            Some((i + 1, trimmed))
        }
    })
}

/// Shortest-roundtrip float formatting; this is the canonical on-disk form.
pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x}")
}
