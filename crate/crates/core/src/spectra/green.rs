//! Resolvent kernel `(H - E)⁻¹(x, y) = ψ₋(min)·ψ₊(max) / W`.

use serde::Serialize;

use super::eigenfunction::{backward_pass, cell_value, forward_pass, Scaled};
use super::{FiniteBox, Segment};
use crate::error::{LabError, Result};

const WRONSKIAN_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GreenEval {
    #[serde(rename = "E")]
    pub energy: f64,
    pub x: f64,
    pub y: f64,
    pub value: f64,
}

fn segment_of(bx: &FiniteBox, cell: usize) -> usize {
    bx.segments().iter().position(|s| s.first <= cell && cell <= s.last).expect("cell in a segment")
}

/// Value and log-scale of a one-sided solution at `x` in segment cell `k`.
fn evaluate(bx: &FiniteBox, seg: &Segment, pass: &[Scaled], energy: f64, x: f64) -> (f64, f64) {
    let cell = bx.cell_containing(x).expect("position inside the box").clamp(seg.first, seg.last);
    let (v, log) = pass[cell - seg.first];
    (cell_value(energy, v, x - bx.positions()[cell])[0], log)
}

/// Green function of the box at an energy off its spectrum.
///
/// `ψ₋` satisfies the left boundary row and `ψ₊` the right one, each with a
/// unit boundary vector; `W = ψ₊ψ₋' − ψ₊'ψ₋`.
pub fn green(bx: &FiniteBox, energy: f64, x: f64, y: f64) -> Result<GreenEval> {
    let (lo, hi) = (bx.positions()[0], bx.positions()[bx.cells()]);
    for p in [x, y] {
        if !(p >= lo && p <= hi) {
            return Err(LabError::Domain(format!("position {p} outside the box [{lo}, {hi}]")));
        }
    }
    if !energy.is_finite() {
        return Err(LabError::Domain(format!("energy {energy} is not finite")));
    }
    let (a, b) = (x.min(y), x.max(y));
    let ka = bx.cell_containing(a).expect("checked above");
    let kb = bx.cell_containing(b).expect("checked above");
    let si = segment_of(bx, ka);
    let seg = &bx.segments()[si];
    let fwd = forward_pass(bx, seg, energy);
    let bwd = backward_pass(bx, seg, energy);
    let (f, g) = (fwd[0].0, bwd[0].0);
    let w_unit = g[0] * f[1] - g[1] * f[0];
    let log_w = bwd[0].1;
    let wronskian = w_unit * log_w.exp();
    if wronskian.abs() < WRONSKIAN_TOL {
        return Err(LabError::NearEigenvalue { energy, wronskian });
    }
    if segment_of(bx, kb) != si {
        return Ok(GreenEval { energy, x, y, value: 0.0 });
    }
    let (pa, la) = evaluate(bx, seg, &fwd, energy, a);
    let (pb, lb) = evaluate(bx, seg, &bwd, energy, b);
    let value = pa * pb / w_unit * (la + lb - log_w).exp();
    Ok(GreenEval { energy, x, y, value })
}
