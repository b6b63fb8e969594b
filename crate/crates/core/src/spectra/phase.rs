//! Lifted Prüfer phase of `(u, u')` and the secular function.
//!
//! The phase is `θ = atan2(u, u')`, tracked as `band·π + ρ` with `ρ ∈ [0, π)`
//! the angle of the line through `(u, u')`. Bands change only where `u`
//! vanishes, so counting them is exact up to rounding of `ρ` itself.

use std::f64::consts::PI;

use super::{FiniteBox, Robin, Segment};
use crate::sl2::{cell_functions, IwasawaFactors, Mat2};

/// Above this `√E·ℓ` a cell is advanced in the scaled angle `atan2(√E u, u')`,
/// which turns at the constant rate `√E`.
const ROTATION_BRANCH: f64 = 1.0;

/// Above this `√|E|·ℓ` the hyperbolic cell matrix is divided by `cosh`.
const HYPERBOLIC_SCALING: f64 = 20.0;

pub(crate) fn line_angle(v: [f64; 2]) -> f64 {
    let mut r = v[0].atan2(v[1]);
    if r < 0.0 {
        r += PI;
    }
    if r >= PI {
        0.0
    } else {
        r
    }
}

pub(crate) fn unit(v: [f64; 2]) -> ([f64; 2], f64) {
    let r = v[0].hypot(v[1]);
    ([v[0] / r, v[1] / r], r)
}

/// Free evolution across a cell divided by `e^{scale}`; `inverse` runs it backwards.
pub(crate) fn scaled_cell(energy: f64, ell: f64, inverse: bool) -> (Mat2, f64) {
    let sgn = if inverse { -1.0 } else { 1.0 };
    if energy < 0.0 {
        let k = (-energy).sqrt();
        let kl = k * ell;
        if kl > HYPERBOLIC_SCALING {
            let th = kl.tanh();
            let log_cosh = kl + (0.5 * (1.0 + (-2.0 * kl).exp())).ln();
            return (Mat2::new(1.0, sgn * th / k, sgn * k * th, 1.0), log_cosh);
        }
    }
    let f = cell_functions(energy, ell);
    (Mat2::new(f.c, sgn * f.s, sgn * f.dc, f.c), 0.0)
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Phase {
    pub v: [f64; 2],
    pub band: i64,
    pub rho: f64,
}

impl Phase {
    pub fn start(bc: Robin) -> Self {
        let v = bc.kernel();
        Phase { v, band: 0, rho: line_angle(v) }
    }

    pub fn theta(&self) -> f64 {
        self.band as f64 * PI + self.rho
    }

    /// Moves to the line of `v` choosing the lift closest to `approx`.
    fn settle(&mut self, approx: f64, v: [f64; 2]) {
        let rho = line_angle(v);
        self.band = ((approx - rho) / PI).round() as i64;
        self.rho = rho;
        self.v = v;
    }

    pub fn cell(&mut self, energy: f64, ell: f64) {
        let (m, _) = scaled_cell(energy, ell, false);
        let (out, _) = unit(m.apply(self.v));
        let w = if energy > 0.0 { energy.sqrt() } else { 0.0 };
        if w * ell > ROTATION_BRANCH {
            let phi = self.band as f64 * PI + (w * self.rho.sin()).atan2(self.rho.cos());
            let phi = phi + w * ell;
            let k = (phi / PI).floor();
            let r = phi - k * PI;
            let approx = k * PI + (r.sin() / w).atan2(r.cos());
            self.settle(approx, out);
        } else {
            // u has at most one zero in the cell and θ crosses kπ upwards there
            let (u0, u1) = (self.v[0], out[0]);
            let crossed = u0 != 0.0 && (u1 == 0.0 || (u0 > 0.0) != (u1 > 0.0));
            self.band += crossed as i64;
            self.rho = line_angle(out);
            self.v = out;
        }
    }

    /// `B = ±R(t) D(b) S(q)`: shear and dilation keep the band, the rotation
    /// shifts θ by `-t`, the sign leaves the line alone.
    pub fn vertex(&mut self, m: &Mat2, f: &IwasawaFactors) {
        let [u, up] = self.v;
        let sheared = [u, up + f.q * u];
        let dilated = [f.b * sheared[0], sheared[1] / f.b];
        let approx = self.band as f64 * PI + line_angle(dilated) - f.t;
        let (out, _) = unit(m.apply(self.v));
        self.settle(approx, out);
    }

    /// Number of eigen-levels `θ_bc + kπ` strictly below θ, up to a constant.
    pub fn levels(&self, right: Robin) -> i64 {
        self.band + (self.rho > line_angle(right.kernel())) as i64
    }
}

pub(crate) fn propagate(bx: &FiniteBox, seg: &Segment, energy: f64) -> Phase {
    let mut ph = Phase::start(seg.left);
    for i in seg.first..=seg.last {
        ph.cell(energy, bx.lengths[i]);
        if i < seg.last {
            let (m, f) = bx.vertex(i + 1);
            ph.vertex(m, f);
        }
    }
    ph
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct EndState {
    pub levels: i64,
    pub secular: f64,
    pub theta: f64,
}

pub(crate) fn end_state(bx: &FiniteBox, seg: &Segment, energy: f64) -> EndState {
    let ph = propagate(bx, seg, energy);
    EndState { levels: ph.levels(seg.right), secular: seg.right.residual(ph.v), theta: ph.theta() }
}

/// Lower bound for the segment spectrum and the level count there.
///
/// The end phase converges as `E → -∞`; the bound is accepted once the
/// level count is stable over a factor 16 in `E` and θ has settled.
pub(crate) fn spectral_floor(bx: &FiniteBox, seg: &Segment) -> (f64, i64) {
    let lmin = bx.lengths[seg.first..=seg.last].iter().cloned().fold(f64::INFINITY, f64::min);
    let mut k = 1.0 + 10.0 / (lmin * lmin);
    for i in seg.first + 1..=seg.last {
        let (m, _) = bx.vertex(i);
        let mut scale = m.a21 * m.a21;
        if m.a12 != 0.0 {
            scale += 4.0 / (m.a12 * m.a12);
        }
        k = k.max(scale.min(1e12));
    }
    loop {
        let a = end_state(bx, seg, -k);
        let b = end_state(bx, seg, -4.0 * k);
        let c = end_state(bx, seg, -16.0 * k);
        let settled = (a.theta - c.theta).abs() < 0.05;
        if (a.levels == b.levels && b.levels == c.levels && settled) || k > 1e30 {
            return (-k, a.levels);
        }
        k *= 4.0;
    }
}

/// Secular function: the normalized right-boundary residual of the solution
/// started from the left boundary. For boxes split by separating vertices it
/// is the product of the segment functions.
pub fn secular(bx: &FiniteBox, energy: f64) -> f64 {
    bx.segments().iter().map(|s| end_state(bx, s, energy).secular).product()
}

/// Number of eigenvalues strictly below `energy`.
pub fn pruefer_count(bx: &FiniteBox, energy: f64) -> usize {
    bx.segments()
        .iter()
        .map(|s| {
            let (floor, base) = spectral_floor(bx, s);
            if energy <= floor {
                0
            } else {
                (end_state(bx, s, energy).levels - base).max(0) as usize
            }
        })
        .sum()
}
