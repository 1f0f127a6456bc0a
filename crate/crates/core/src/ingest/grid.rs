//! Volumetric grid parser.
//!
//! Format:
//! ```text
//! grid <NX> <NY> <NZ> <kind> <expected_norm>
//! origin x y z
//! axis1 x y z
//! axis2 x y z
//! axis3 x y z
//! v v v ...              (NX·NY·NZ values, iz fastest, ix slowest)
//! ```
//!
//! Normalization tolerance ladder: silent below 2% deviation, warning at
//! 2-5%, hard error above 5% (grids from real codes lose a few percent to
//! voxelization).

use super::{content_lines, fmt_f64, Parsed};
use thiserror::Error;

pub const NORM_WARN_TOL: f64 = 0.02;
pub const NORM_ERROR_TOL: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    /// μ_B/Å³; integral must match the declared total spin (2S).
    SpinDensity,
    /// Å^(-3/2); L2 norm must match the declared norm (usually 1).
    Orbital,
}

impl FieldKind {
    pub fn token(&self) -> &'static str {
        match self {
            FieldKind::SpinDensity => "spin_density",
            FieldKind::Orbital => "orbital",
        }
    }
}

/// Real-valued volumetric grid with origin and voxel step vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    /// Å
    pub origin: [f64; 3],
    /// Voxel step vectors, Å.
    pub axes: [[f64; 3]; 3],
    pub counts: (usize, usize, usize),
    /// iz fastest, ix slowest.
    pub values: Vec<f64>,
    pub kind: FieldKind,
    pub expected_norm: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("malformed line {0}: {1}")]
    MalformedLine(usize, String),
    #[error("non-finite value in token '{0}'")]
    NonFiniteValue(String),
    #[error("value count mismatch: header declares {expected}, body has {found}")]
    CountMismatch { expected: usize, found: usize },
    #[error("normalization error: measured {measured}, expected {expected}")]
    NormalizationError { measured: f64, expected: f64 },
}

fn header_vec(line: &str, ln: usize, tag: &str) -> Result<[f64; 3], GridError> {
    let toks: Vec<&str> = line.split_whitespace().collect();
    if toks.len() != 4 || toks[0] != tag {
        return Err(GridError::MalformedLine(ln, format!("expected '{tag} x y z', got '{line}'")));
    }
    let mut out = [0.0; 3];
    for (c, tok) in out.iter_mut().zip(&toks[1..]) {
        let v: f64 = tok
            .parse()
            .map_err(|_| GridError::MalformedLine(ln, format!("expected number, got '{tok}'")))?;
        if !v.is_finite() {
            return Err(GridError::NonFiniteValue(tok.to_string()));
        }
        *c = v;
    }
    Ok(out)
}

pub fn parse_grid(text: &str) -> Result<Parsed<ScalarField>, GridError> {
    let mut lines = content_lines(text);
    let (ln, head) = lines
        .next()
        .ok_or_else(|| GridError::MalformedLine(0, "empty input".into()))?;
    let toks: Vec<&str> = head.split_whitespace().collect();
    if toks.len() != 6 || toks[0] != "grid" {
        return Err(GridError::MalformedLine(
            ln,
            format!("expected 'grid NX NY NZ kind expected_norm', got '{head}'"),
        ));
    }
    let mut counts = [0usize; 3];
    for (c, tok) in counts.iter_mut().zip(&toks[1..4]) {
        *c = tok
            .parse()
            .map_err(|_| GridError::MalformedLine(ln, format!("bad count '{tok}'")))?;
        if *c < 2 {
            return Err(GridError::MalformedLine(ln, "counts must be >= 2 per axis".into()));
        }
    }
    let kind = match toks[4] {
        "spin_density" => FieldKind::SpinDensity,
        "orbital" => FieldKind::Orbital,
        other => return Err(GridError::MalformedLine(ln, format!("unknown kind '{other}'"))),
    };
    let expected_norm: f64 = toks[5]
        .parse()
        .map_err(|_| GridError::MalformedLine(ln, format!("bad norm '{}'", toks[5])))?;
    if !expected_norm.is_finite() {
        return Err(GridError::NonFiniteValue(toks[5].to_string()));
    }
    if expected_norm <= 0.0 {
        return Err(GridError::MalformedLine(ln, "expected_norm must be > 0".into()));
    }

    let mut next_header = |tag: &str| -> Result<[f64; 3], GridError> {
        let (ln, line) = lines
            .next()
            .ok_or_else(|| GridError::MalformedLine(0, format!("missing '{tag}' line")))?;
        header_vec(line, ln, tag)
    };
    let origin = next_header("origin")?;
    let axes = [next_header("axis1")?, next_header("axis2")?, next_header("axis3")?];

    let expected = counts[0] * counts[1] * counts[2];
    let mut values = Vec::with_capacity(expected);
    for (_, line) in lines {
        for tok in line.split_whitespace() {
            let v: f64 = tok
                .parse()
                .map_err(|_| GridError::MalformedLine(0, format!("expected number, got '{tok}'")))?;
            if !v.is_finite() {
                return Err(GridError::NonFiniteValue(tok.to_string()));
            }
            values.push(v);
            if values.len() > expected {
                return Err(GridError::CountMismatch { expected, found: values.len() });
            }
        }
    }
    if values.len() != expected {
        return Err(GridError::CountMismatch { expected, found: values.len() });
    }

    let field = ScalarField {
        origin,
        axes,
        counts: (counts[0], counts[1], counts[2]),
        values,
        kind,
        expected_norm,
    };

    let measured = field.measured_norm();
    let dev = (measured - expected_norm).abs() / expected_norm.abs();
    if dev > NORM_ERROR_TOL {
        return Err(GridError::NormalizationError { measured, expected: expected_norm });
    }
    let mut warnings = Vec::new();
    if dev > NORM_WARN_TOL {
        warnings.push(format!(
            "normalization off by {:.1}%: measured {measured}, expected {expected_norm}",
            dev * 100.0
        ));
    }
    Ok(Parsed { value: field, warnings })
}

impl ScalarField {
    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (ix * self.counts.1 + iy) * self.counts.2 + iz
    }

    pub fn value(&self, ix: usize, iy: usize, iz: usize) -> f64 {
        self.values[self.index(ix, iy, iz)]
    }

    /// Cartesian position (Å) of voxel (ix, iy, iz).
    pub fn position(&self, ix: usize, iy: usize, iz: usize) -> [f64; 3] {
        let mut p = self.origin;
        for (step, n) in self.axes.iter().zip([ix as f64, iy as f64, iz as f64]) {
            p[0] += n * step[0];
            p[1] += n * step[1];
            p[2] += n * step[2];
        }
        p
    }

    /// Voxel volume |det(axes)|, Å³.
    pub fn voxel_volume(&self) -> f64 {
        let a = &self.axes;
        (a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
            - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]))
            .abs()
    }

    /// Σ v·dV
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.voxel_volume()
    }

    /// sqrt(Σ v²·dV)
    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * self.voxel_volume()).sqrt()
    }

    /// The norm the kind-specific invariant compares against.
    pub fn measured_norm(&self) -> f64 {
        match self.kind {
            FieldKind::SpinDensity => self.integral(),
            FieldKind::Orbital => self.l2_norm(),
        }
    }

    /// Fractional voxel coordinates of a Cartesian point (Å).
    pub fn fractional(&self, p: [f64; 3]) -> [f64; 3] {
        let d = [p[0] - self.origin[0], p[1] - self.origin[1], p[2] - self.origin[2]];
        let a = &self.axes;
        let det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
            - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
        // solve f · A = d for f (rows of A are the step vectors)
        let cof = |r1: usize, c1: usize, r2: usize, c2: usize| {
            a[r1][c1] * a[r2][c2] - a[r1][c2] * a[r2][c1]
        };
        let inv = [
            [cof(1, 1, 2, 2), -cof(0, 1, 2, 2), cof(0, 1, 1, 2)],
            [-cof(1, 0, 2, 2), cof(0, 0, 2, 2), -cof(0, 0, 1, 2)],
            [cof(1, 0, 2, 1), -cof(0, 0, 2, 1), cof(0, 0, 1, 1)],
        ];
        let mut f = [0.0; 3];
        for (j, fj) in f.iter_mut().enumerate() {
            *fj = (d[0] * inv[0][j] + d[1] * inv[1][j] + d[2] * inv[2][j]) / det;
        }
        f
    }

    /// True if the Cartesian point lies inside the grid extent.
    pub fn contains(&self, p: [f64; 3]) -> bool {
        let f = self.fractional(p);
        let n = [self.counts.0, self.counts.1, self.counts.2];
        f.iter().zip(n).all(|(x, n)| *x >= 0.0 && *x <= (n - 1) as f64)
    }

    /// Trilinear interpolation at a Cartesian point (Å); `None` outside.
    pub fn sample(&self, p: [f64; 3]) -> Option<f64> {
        if !self.contains(p) {
            return None;
        }
        let f = self.fractional(p);
        let n = [self.counts.0, self.counts.1, self.counts.2];
        let mut i0 = [0usize; 3];
        let mut t = [0.0; 3];
        for k in 0..3 {
            let base = f[k].floor().min((n[k] - 2) as f64).max(0.0);
            i0[k] = base as usize;
            t[k] = f[k] - base;
        }
        let mut acc = 0.0;
        for dx in 0..2 {
            for dy in 0..2 {
                for dz in 0..2 {
                    let w = (if dx == 0 { 1.0 - t[0] } else { t[0] })
                        * (if dy == 0 { 1.0 - t[1] } else { t[1] })
                        * (if dz == 0 { 1.0 - t[2] } else { t[2] });
                    acc += w * self.value(i0[0] + dx, i0[1] + dy, i0[2] + dz);
                }
            }
        }
        Some(acc)
    }

    /// |v|-weighted centroid, Å.
    pub fn centroid(&self) -> [f64; 3] {
        let mut c = [0.0; 3];
        let mut wsum = 0.0;
        for ix in 0..self.counts.0 {
            for iy in 0..self.counts.1 {
                for iz in 0..self.counts.2 {
                    let w = self.value(ix, iy, iz).abs();
                    let p = self.position(ix, iy, iz);
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
        c
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "grid {} {} {} {} {}\n",
            self.counts.0,
            self.counts.1,
            self.counts.2,
            self.kind.token(),
            fmt_f64(self.expected_norm)
        );
        for (tag, v) in [
            ("origin", &self.origin),
            ("axis1", &self.axes[0]),
            ("axis2", &self.axes[1]),
            ("axis3", &self.axes[2]),
        ] {
            out.push_str(&format!("{tag} {} {} {}\n", fmt_f64(v[0]), fmt_f64(v[1]), fmt_f64(v[2])));
        }
        for chunk in self.values.chunks(self.counts.2.min(8)) {
            let row: Vec<String> = chunk.iter().map(|v| fmt_f64(*v)).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }
}
