//! Finite-box restrictions `H_[m,n]`: eigenvalues, eigenfunctions, Green
//! functions and wave-packet moments.
//!
//! A box is a run of cells `[t_m, t_{m+1}], …, [t_{n-1}, t_n]` with Robin rows
//! `w u(t_m⁺) + z u'(t_m⁺) = 0` on the left and `x u(t_n⁻) + y u'(t_n⁻) = 0` on
//! the right. Interior separating vertices split the box into independent
//! segments.

mod dynamics;
mod eigenfunction;
mod fd;
mod green;
mod phase;
mod solve;

pub use dynamics::{dynamical_moment, dynamical_moment_with, MomentSeries};
pub use eigenfunction::{decay_fit, eigenfunction, eigenpairs, inner_product, DecayFit, Eigenpair};
#[cfg(test)]
pub(crate) use fd::fd_eigenvector;
pub use fd::fd_oracle;
pub use green::{green, GreenEval};
pub use phase::{pruefer_count, secular};
pub use solve::{eigenvalues, separated_spectrum, SegmentSpectrum, DEFAULT_TOL};

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::fmt::sig;
use crate::model::{Realization, VertexCondition};
use crate::sl2::{iwasawa, IwasawaFactors, Mat2};

/// Boundary row `a·u + b·u' = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Robin {
    pub a: f64,
    pub b: f64,
}

impl Robin {
    pub const NEUMANN: Robin = Robin { a: 0.0, b: 1.0 };
    pub const DIRICHLET: Robin = Robin { a: 1.0, b: 0.0 };

    pub fn new(a: f64, b: f64) -> Result<Self> {
        let r = Robin { a, b };
        r.validate()?;
        Ok(r)
    }

    fn validate(&self) -> Result<()> {
        if !self.a.is_finite() || !self.b.is_finite() || (self.a == 0.0 && self.b == 0.0) {
            return Err(LabError::Domain(format!("boundary row ({}, {}) must be finite and nonzero", self.a, self.b)));
        }
        Ok(())
    }

    /// Unit vector `(u, u')` satisfying the row.
    pub fn kernel(&self) -> [f64; 2] {
        let r = self.a.hypot(self.b);
        [self.b / r, -self.a / r]
    }

    /// `(a u + b u') / |(a, b)|`.
    pub fn residual(&self, v: [f64; 2]) -> f64 {
        (self.a * v[0] + self.b * v[1]) / self.a.hypot(self.b)
    }
}

/// Maximal run of cells `first..=last` not interrupted by a separating vertex.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Segment {
    pub first: usize,
    pub last: usize,
    pub left: Robin,
    pub right: Robin,
}

impl Segment {
    pub fn cells(&self) -> usize {
        self.last - self.first + 1
    }
}

#[derive(Clone, Debug)]
pub struct FiniteBox {
    first_site: i64,
    lengths: Vec<f64>,
    positions: Vec<f64>,
    /// Condition at `positions[i]` is `interior[i - 1]`, for `i = 1..cells`.
    interior: Vec<VertexCondition>,
    factors: Vec<Option<(Mat2, IwasawaFactors)>>,
    left: Robin,
    right: Robin,
    segments: Vec<Segment>,
}

impl FiniteBox {
    /// The box over the whole realization window: cells `jmin..=jmax`, with
    /// the draw conditions at the interior vertices `t_jmin, …, t_{jmax-1}`.
    pub fn new(realization: &Realization, left: Robin, right: Robin) -> Result<Self> {
        let lengths = realization.draws.iter().map(|d| d.ell).collect();
        let n = realization.len();
        let interior = realization.draws[..n - 1].iter().map(|d| d.condition).collect();
        let mut b = Self::from_cells(lengths, interior, left, right, realization.positions()[0])?;
        b.first_site = realization.jmin;
        b.positions = realization.positions().to_vec();
        Ok(b)
    }

    pub fn neumann(realization: &Realization) -> Result<Self> {
        Self::new(realization, Robin::NEUMANN, Robin::NEUMANN)
    }

    /// Box from explicit cell lengths and the `cells - 1` interior conditions.
    pub fn from_cells(
        lengths: Vec<f64>,
        interior: Vec<VertexCondition>,
        left: Robin,
        right: Robin,
        origin: f64,
    ) -> Result<Self> {
        if lengths.is_empty() {
            return Err(LabError::Domain("a box needs at least one cell".into()));
        }
        if interior.len() + 1 != lengths.len() {
            return Err(LabError::Domain(format!(
                "{} cells need {} interior conditions, got {}",
                lengths.len(),
                lengths.len() - 1,
                interior.len()
            )));
        }
        left.validate()?;
        right.validate()?;
        let mut positions = Vec::with_capacity(lengths.len() + 1);
        let mut t = origin;
        positions.push(t);
        for &ell in &lengths {
            if !(ell > 0.0) || !ell.is_finite() {
                return Err(LabError::Domain(format!("cell length {ell} is not positive")));
            }
            t += ell;
            positions.push(t);
        }
        let mut factors = Vec::with_capacity(interior.len());
        for c in &interior {
            c.validate()?;
            factors.push(match c.matrix() {
                Some(m) => Some((m, iwasawa(&m)?)),
                None => None,
            });
        }
        let segments = split_segments(&interior, left, right);
        Ok(Self { first_site: 1, lengths, positions, interior, factors, left, right, segments })
    }

    pub fn cells(&self) -> usize {
        self.lengths.len()
    }

    /// Site index of the first cell.
    pub fn first_site(&self) -> i64 {
        self.first_site
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    /// Vertex positions `t_m, …, t_n`.
    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn span(&self) -> f64 {
        self.positions[self.cells()] - self.positions[0]
    }

    pub fn left(&self) -> Robin {
        self.left
    }

    pub fn right(&self) -> Robin {
        self.right
    }

    pub fn interior(&self) -> &[VertexCondition] {
        &self.interior
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn is_connected(&self) -> bool {
        self.segments.len() == 1
    }

    /// Every interior condition is a δ coupling `[[1, 0], [α, 1]]`.
    pub fn delta_couplings(&self) -> Option<Vec<f64>> {
        self.interior
            .iter()
            .map(|c| {
                let m = c.matrix()?;
                let ok = (m.a11 - 1.0).abs() < 1e-12 && m.a12.abs() < 1e-12 && (m.a22 - 1.0).abs() < 1e-12;
                ok.then_some(m.a21)
            })
            .collect()
    }

    /// Index of the cell containing `x` (right-closed at the last cell).
    pub fn cell_containing(&self, x: f64) -> Option<usize> {
        let n = self.cells();
        if !(x >= self.positions[0] && x <= self.positions[n]) {
            return None;
        }
        let k = self.positions.partition_point(|&t| t <= x);
        Some(k.saturating_sub(1).min(n - 1))
    }

    pub(crate) fn vertex(&self, i: usize) -> &(Mat2, IwasawaFactors) {
        self.factors[i - 1].as_ref().expect("connecting vertex inside a segment")
    }
}

fn split_segments(interior: &[VertexCondition], left: Robin, right: Robin) -> Vec<Segment> {
    let mut out = Vec::new();
    let mut first = 0;
    let mut start_bc = left;
    for (k, c) in interior.iter().enumerate() {
        // the vertex sits at the right end of cell k
        if let VertexCondition::Separating { x, y, w, z } = *c {
            out.push(Segment { first, last: k, left: start_bc, right: Robin { a: w, b: z } });
            first = k + 1;
            start_bc = Robin { a: x, b: y };
        }
    }
    out.push(Segment { first, last: interior.len(), left: start_bc, right });
    out
}

/// Spectrum CSV: `index,E`.
pub fn spectrum_csv(eigenvalues: &[f64], comment: Option<&str>) -> String {
    let mut s = String::new();
    if let Some(c) = comment {
        for line in c.lines() {
            s.push_str("# ");
            s.push_str(line);
            s.push('\n');
        }
    }
    s.push_str("index,E\n");
    for (i, e) in eigenvalues.iter().enumerate() {
        s.push_str(&format!("{i},{}\n", sig(*e, 17)));
    }
    s
}

/// Decay CSV: `E,zeta,rate,r2`.
pub fn decay_csv(rows: &[(f64, DecayFit)], comment: Option<&str>) -> String {
    let mut s = String::new();
    if let Some(c) = comment {
        for line in c.lines() {
            s.push_str("# ");
            s.push_str(line);
            s.push('\n');
        }
    }
    s.push_str("E,zeta,rate,r2\n");
    for (e, f) in rows {
        s.push_str(&format!("{},{},{},{}\n", sig(*e, 17), f.center, sig(f.rate, 12), sig(f.r_squared, 12)));
    }
    s
}
