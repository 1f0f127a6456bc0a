//! Structure file parser.
//!
//! Format:
//! ```text
//! lattice
//! ax ay az
//! bx by bz
//! cx cy cz
//! charge <int>
//! atoms <N>
//! SYMBOL mass x y z     (N lines)
//! ```

use super::{content_lines, fmt_f64, is_known_species};
use thiserror::Error;

/// Lattice plus atomic species/positions/masses for one electronic state.
#[derive(Debug, Clone, PartialEq)]
pub struct DefectConfiguration {
    /// Row vectors a, b, c in Å.
    pub lattice_vectors: [[f64; 3]; 3],
    pub atoms: Vec<Atom>,
    /// Net charge in elementary charges.
    pub charge: i32,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub species: String,
    /// amu
    pub mass: f64,
    /// Cartesian position, Å.
    pub position: [f64; 3],
}

#[derive(Debug, Error, PartialEq)]
pub enum StructureError {
    #[error("malformed line {0}: {1}")]
    MalformedLine(usize, String),
    #[error("non-finite value in token '{0}' on line {1}")]
    NonFiniteValue(String, usize),
    #[error("lattice vectors are linearly dependent (determinant {0:e})")]
    SingularLattice(f64),
    #[error("unknown species '{0}' on line {1}")]
    UnknownSpecies(String, usize),
}

fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn parse_float(tok: &str, line: usize) -> Result<f64, StructureError> {
    let v: f64 = tok
        .parse()
        .map_err(|_| StructureError::MalformedLine(line, format!("expected number, got '{tok}'")))?;
    if !v.is_finite() {
        return Err(StructureError::NonFiniteValue(tok.to_string(), line));
    }
    Ok(v)
}

pub fn parse_structure(text: &str) -> Result<DefectConfiguration, StructureError> {
    let mut lines = content_lines(text);
    let mut next = |what: &str| {
        lines
            .next()
            .ok_or_else(|| StructureError::MalformedLine(0, format!("missing {what}")))
    };

    let (ln, head) = next("'lattice' header")?;
    if head.trim() != "lattice" {
        return Err(StructureError::MalformedLine(ln, format!("expected 'lattice', got '{head}'")));
    }

    let mut lattice = [[0.0; 3]; 3];
    for row in &mut lattice {
        let (ln, line) = next("lattice vector")?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 3 {
            return Err(StructureError::MalformedLine(ln, "lattice vector needs 3 components".into()));
        }
        for (c, tok) in row.iter_mut().zip(&toks) {
            *c = parse_float(tok, ln)?;
        }
    }
    let det = det3(&lattice);
    if det.abs() < 1e-10 {
        return Err(StructureError::SingularLattice(det));
    }

    let (ln, line) = next("'charge' line")?;
    let charge: i32 = match line.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["charge", q] => q
            .parse()
            .map_err(|_| StructureError::MalformedLine(ln, format!("bad charge '{q}'")))?,
        _ => return Err(StructureError::MalformedLine(ln, format!("expected 'charge <int>', got '{line}'"))),
    };

    let (ln, line) = next("'atoms' line")?;
    let natoms: usize = match line.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["atoms", n] => n
            .parse()
            .map_err(|_| StructureError::MalformedLine(ln, format!("bad atom count '{n}'")))?,
        _ => return Err(StructureError::MalformedLine(ln, format!("expected 'atoms <N>', got '{line}'"))),
    };
    if natoms == 0 {
        return Err(StructureError::MalformedLine(ln, "atom count must be >= 1".into()));
    }

    let mut atoms = Vec::with_capacity(natoms);
    for _ in 0..natoms {
        let (ln, line) = next("atom line")?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 5 {
            return Err(StructureError::MalformedLine(ln, "atom line needs 'SYMBOL mass x y z'".into()));
        }
        if !is_known_species(toks[0]) {
            return Err(StructureError::UnknownSpecies(toks[0].to_string(), ln));
        }
        let mass = parse_float(toks[1], ln)?;
        if mass <= 0.0 {
            return Err(StructureError::MalformedLine(ln, format!("mass must be > 0, got {mass}")));
        }
        let mut position = [0.0; 3];
        for (c, tok) in position.iter_mut().zip(&toks[2..]) {
            *c = parse_float(tok, ln)?;
        }
        atoms.push(Atom { species: toks[0].to_string(), mass, position });
    }

    if let Some((ln, line)) = lines.next() {
        return Err(StructureError::MalformedLine(ln, format!("trailing content '{line}'")));
    }

    Ok(DefectConfiguration { lattice_vectors: lattice, atoms, charge, label: String::new() })
}

impl DefectConfiguration {
    /// Canonical serialization; `parse(serialize(x)) == x` byte-for-byte on
    /// canonical inputs.
    pub fn to_text(&self) -> String {
        let mut out = String::from("lattice\n");
        for v in &self.lattice_vectors {
            out.push_str(&format!("{} {} {}\n", fmt_f64(v[0]), fmt_f64(v[1]), fmt_f64(v[2])));
        }
        out.push_str(&format!("charge {}\n", self.charge));
        out.push_str(&format!("atoms {}\n", self.atoms.len()));
        for a in &self.atoms {
            out.push_str(&format!(
                "{} {} {} {} {}\n",
                a.species,
                fmt_f64(a.mass),
                fmt_f64(a.position[0]),
                fmt_f64(a.position[1]),
                fmt_f64(a.position[2])
            ));
        }
        out
    }

    /// Length of the shortest lattice vector, Å.
    pub fn shortest_lattice_vector(&self) -> f64 {
        self.lattice_vectors
            .iter()
            .map(|v| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt())
            .fold(f64::INFINITY, f64::min)
    }

    /// Inverse of the lattice matrix (rows are a, b, c), for fractional
    /// coordinate conversion.
    pub fn lattice_inverse(&self) -> [[f64; 3]; 3] {
        let m = &self.lattice_vectors;
        let det = det3(m);
        let cof = |r1: usize, c1: usize, r2: usize, c2: usize| {
            m[r1][c1] * m[r2][c2] - m[r1][c2] * m[r2][c1]
        };
        // inverse of M with rows a,b,c; result such that frac = cart · inv
        // using cart = frac · M convention (row vectors).
        [
            [cof(1, 1, 2, 2) / det, -cof(0, 1, 2, 2) / det, cof(0, 1, 1, 2) / det],
            [-cof(1, 0, 2, 2) / det, cof(0, 0, 2, 2) / det, -cof(0, 0, 1, 2) / det],
            [cof(1, 0, 2, 1) / det, -cof(0, 0, 2, 1) / det, cof(0, 0, 1, 1) / det],
        ]
    }
}
