//! Real 2×2 matrix algebra for the transfer-matrix cocycle.
//!
//! A one-step transfer matrix acts on the Cauchy data `(u, u')` of a solution
//! of `-u'' = E u`. Across a cell of length `ℓ` the free evolution is the
//! monodromy
//!
//! ```text
//! T(E, ℓ) = [[ c,      s ],
//!            [ -E·s,   c ]]
//! ```
//!
//! with `c = cos(√E ℓ)`, `s = sin(√E ℓ)/√E`, continued analytically to
//! `E ≤ 0`. A vertex with matrix `B ∈ SL(2,ℝ)` is applied after the cell, so
//! the one-step matrix is `B · T(E, ℓ)`.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Determinant tolerance accepted by [`transfer`] and [`iwasawa`].
pub const DET_TOL: f64 = 1e-8;

/// Entrywise tolerance for structural matrix equality.
pub const MATRIX_EQ_TOL: f64 = 1e-10;

/// Below this value of `|E|ℓ²` the cell functions use a truncated Taylor series.
pub const SERIES_THRESHOLD: f64 = 1e-6;

/// Frobenius norm above which [`LogNormAccumulator`] extracts a scale factor.
pub const RENORM_THRESHOLD: f64 = 1e100;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mat2 {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2::new(1.0, 0.0, 0.0, 1.0);
    pub const ZERO: Mat2 = Mat2::new(0.0, 0.0, 0.0, 0.0);

    pub const fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Self { a11, a12, a21, a22 }
    }

    pub fn from_rows(rows: [[f64; 2]; 2]) -> Self {
        Self::new(rows[0][0], rows[0][1], rows[1][0], rows[1][1])
    }

    pub fn to_rows(self) -> [[f64; 2]; 2] {
        [[self.a11, self.a12], [self.a21, self.a22]]
    }

    /// Rotation `R(t)`.
    pub fn rotation(t: f64) -> Self {
        let (s, c) = t.sin_cos();
        Self::new(c, -s, s, c)
    }

    /// Diagonal `D(b) = diag(b, 1/b)`.
    pub fn dilation(b: f64) -> Self {
        Self::new(b, 0.0, 0.0, 1.0 / b)
    }

    /// Lower unipotent `S(q) = [[1, 0], [q, 1]]`, the δ-interaction matrix.
    pub fn shear(q: f64) -> Self {
        Self::new(1.0, 0.0, q, 1.0)
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::new(self.a11 * k, self.a12 * k, self.a21 * k, self.a22 * k)
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.a11, self.a21, self.a12, self.a22)
    }

    /// Inverse via the adjugate; exact for unit determinant.
    pub fn inverse(&self) -> Self {
        let d = self.det();
        Self::new(self.a22 / d, -self.a12 / d, -self.a21 / d, self.a11 / d)
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [self.a11 * v[0] + self.a12 * v[1], self.a21 * v[0] + self.a22 * v[1]]
    }

    pub fn frobenius(&self) -> f64 {
        self.a11.hypot(self.a12).hypot(self.a21.hypot(self.a22))
    }

    /// Largest singular value, in closed form.
    pub fn op_norm(&self) -> f64 {
        let p = (self.a11 + self.a22).hypot(self.a21 - self.a12);
        let m = (self.a11 - self.a22).hypot(self.a21 + self.a12);
        0.5 * (p + m)
    }

    pub fn max_abs(&self) -> f64 {
        self.a11.abs().max(self.a12.abs()).max(self.a21.abs()).max(self.a22.abs())
    }

    pub fn approx_eq(&self, other: &Mat2, tol: f64) -> bool {
        (*self - *other).max_abs() <= tol
    }

    pub fn is_finite(&self) -> bool {
        self.a11.is_finite() && self.a12.is_finite() && self.a21.is_finite() && self.a22.is_finite()
    }

    pub fn check_unimodular(&self, tol: f64) -> Result<()> {
        let det = self.det();
        if !det.is_finite() || (det - 1.0).abs() > tol {
            return Err(LabError::InvalidMatrix { det });
        }
        Ok(())
    }

    /// Eigenvalue of largest modulus (real part only when the pair is complex).
    pub fn spectral_radius(&self) -> f64 {
        let tr = self.trace();
        let disc = tr * tr - 4.0 * self.det();
        if disc <= 0.0 {
            self.det().abs().sqrt()
        } else {
            0.5 * (tr.abs() + disc.sqrt())
        }
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, r: Mat2) -> Mat2 {
        Mat2::new(
            self.a11 * r.a11 + self.a12 * r.a21,
            self.a11 * r.a12 + self.a12 * r.a22,
            self.a21 * r.a11 + self.a22 * r.a21,
            self.a21 * r.a12 + self.a22 * r.a22,
        )
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, r: Mat2) -> Mat2 {
        Mat2::new(self.a11 + r.a11, self.a12 + r.a12, self.a21 + r.a21, self.a22 + r.a22)
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, r: Mat2) -> Mat2 {
        Mat2::new(self.a11 - r.a11, self.a12 - r.a12, self.a21 - r.a21, self.a22 - r.a22)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.scale(-1.0)
    }
}

/// The fundamental pair at `x = ℓ`: `c` with `c(0)=1, c'(0)=0`, `s` with
/// `s(0)=0, s'(0)=1`, and `c' = -E·s`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellFunctions {
    pub c: f64,
    pub s: f64,
    pub dc: f64,
}

pub fn cell_functions(energy: f64, ell: f64) -> CellFunctions {
    let z = energy * ell * ell;
    if z.abs() < SERIES_THRESHOLD {
        // 8 terms of c = Σ (-z)^k/(2k)!, s = ℓ Σ (-z)^k/(2k+1)!
        let mut c = 0.0;
        let mut s = 0.0;
        let mut term_c = 1.0;
        let mut term_s = 1.0;
        for k in 0..8 {
            c += term_c;
            s += term_s;
            let k2 = 2.0 * k as f64;
            term_c *= -z / ((k2 + 1.0) * (k2 + 2.0));
            term_s *= -z / ((k2 + 2.0) * (k2 + 3.0));
        }
        let s = s * ell;
        CellFunctions { c, s, dc: -energy * s }
    } else if energy > 0.0 {
        let w = energy.sqrt();
        let (sn, cs) = (w * ell).sin_cos();
        CellFunctions { c: cs, s: sn / w, dc: -w * sn }
    } else {
        let k = (-energy).sqrt();
        let (sh, ch) = ((k * ell).sinh(), (k * ell).cosh());
        CellFunctions { c: ch, s: sh / k, dc: k * sh }
    }
}

/// Free evolution across a cell of length `ell` at energy `energy`.
pub fn monodromy(energy: f64, ell: f64) -> Result<Mat2> {
    if !energy.is_finite() || !ell.is_finite() {
        return Err(LabError::Domain(format!("monodromy needs finite E and ℓ, got E = {energy}, ℓ = {ell}")));
    }
    if ell <= 0.0 {
        return Err(LabError::Domain(format!("cell length must be positive, got {ell}")));
    }
    Ok(monodromy_unchecked(energy, ell))
}

pub(crate) fn monodromy_unchecked(energy: f64, ell: f64) -> Mat2 {
    let f = cell_functions(energy, ell);
    Mat2::new(f.c, f.s, f.dc, f.c)
}

/// One-step transfer matrix `B · T(E, ℓ)`.
pub fn transfer(energy: f64, ell: f64, b: &Mat2) -> Result<Mat2> {
    b.check_unimodular(DET_TOL)?;
    Ok(*b * monodromy(energy, ell)?)
}

/// Overflow-safe accumulator for the ordered product `M_{n-1} ⋯ M_1 M_0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogNormAccumulator {
    pub current: Mat2,
    pub log_scale: f64,
    pub steps: u64,
}

impl Default for LogNormAccumulator {
    fn default() -> Self {
        Self::new()
    }
}

impl LogNormAccumulator {
    pub fn new() -> Self {
        Self { current: Mat2::IDENTITY, log_scale: 0.0, steps: 0 }
    }

    /// Left-multiplies the running product by `m`.
    #[inline]
    pub fn push(&mut self, m: &Mat2) {
        self.current = *m * self.current;
        self.steps += 1;
        self.renormalize();
    }

    #[inline]
    fn renormalize(&mut self) {
        let f = self.current.frobenius();
        if f > RENORM_THRESHOLD {
            self.current = self.current.scale(1.0 / f);
            self.log_scale += f.ln();
        }
    }

    pub fn log_norm(&self) -> f64 {
        self.log_scale + self.current.op_norm().ln()
    }

    /// Unit vector along the image of `e₁ = (1, 0)`.
    pub fn direction(&self) -> [f64; 2] {
        let v = self.current.apply([1.0, 0.0]);
        let r = v[0].hypot(v[1]);
        [v[0] / r, v[1] / r]
    }

    /// Product of `later · earlier`, i.e. `earlier` was applied first.
    pub fn compose(later: &LogNormAccumulator, earlier: &LogNormAccumulator) -> Self {
        let mut out = Self {
            current: later.current * earlier.current,
            log_scale: later.log_scale + earlier.log_scale,
            steps: later.steps + earlier.steps,
        };
        out.renormalize();
        out
    }
}

/// `log ‖M_{n-1} ⋯ M_0‖` together with the image direction of `e₁`.
pub fn product_lognorm(matrices: &[Mat2]) -> Result<(f64, [f64; 2])> {
    if matrices.is_empty() {
        return Err(LabError::Domain("product of an empty sequence".into()));
    }
    let mut acc = LogNormAccumulator::new();
    for m in matrices {
        acc.push(m);
    }
    Ok((acc.log_norm(), acc.direction()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IwasawaFactors {
    /// `+1` or `-1`.
    pub sign: i8,
    /// Rotation angle in `[0, π)`.
    pub t: f64,
    pub b: f64,
    pub q: f64,
}

impl IwasawaFactors {
    pub fn recompose(&self) -> Mat2 {
        let m = Mat2::rotation(self.t) * Mat2::dilation(self.b) * Mat2::shear(self.q);
        m.scale(self.sign as f64)
    }
}

/// Factors `B = ±R(t) D(b) S(q)` with `t ∈ [0, π)` and `b > 0`.
pub fn iwasawa(m: &Mat2) -> Result<IwasawaFactors> {
    m.check_unimodular(DET_TOL)?;
    // R(t) D(b) S(q) has second column (-sin t, cos t) / b.
    let r = m.a12.hypot(m.a22);
    let mut t = (-m.a12).atan2(m.a22).rem_euclid(PI);
    if t >= PI {
        t = 0.0;
    }
    let (sn, cs) = t.sin_cos();
    let sign: i8 = if -sn * m.a12 + cs * m.a22 >= 0.0 { 1 } else { -1 };
    let b = 1.0 / r;
    let signed = m.scale(sign as f64);
    // R(-t) · signed = D(b) S(q) = [[b, 0], [q/b, 1/b]]
    let lower = Mat2::rotation(-t) * signed;
    Ok(IwasawaFactors { sign, t, b, q: b * lower.a21 })
}

/// A connecting atom `(ℓ, B)` as seen by the cocycle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferAtom {
    pub ell: f64,
    pub b: Mat2,
}

impl TransferAtom {
    pub fn new(ell: f64, b: Mat2) -> Self {
        Self { ell, b }
    }

    pub fn transfer(&self, energy: f64) -> Result<Mat2> {
        transfer(energy, self.ell, &self.b)
    }
}

/// `G(E) = [M^E(ℓ₁,B₁), M^E(ℓ₂,B₂)]`.
pub fn commutator_g(a1: &TransferAtom, a2: &TransferAtom, energy: f64) -> Result<Mat2> {
    let m1 = a1.transfer(energy)?;
    let m2 = a2.transfer(energy)?;
    Ok(m1 * m2 - m2 * m1)
}

pub fn is_plus_minus(b1: &Mat2, b2: &Mat2) -> bool {
    b1.approx_eq(b2, MATRIX_EQ_TOL) || b1.approx_eq(&-*b2, MATRIX_EQ_TOL)
}

pub fn is_plus_minus_identity(b: &Mat2) -> bool {
    is_plus_minus(b, &Mat2::IDENTITY)
}

pub(crate) fn same_length(l1: f64, l2: f64) -> bool {
    (l1 - l2).abs() <= 1e-12 * l1.abs().max(l2.abs())
}

/// Closed-form test for `G ≡ 0`: either equal lengths with `B₁ = ±B₂`, or
/// both matrices in `{I, -I}`.
pub fn commutes_identically(a1: &TransferAtom, a2: &TransferAtom) -> bool {
    (same_length(a1.ell, a2.ell) && is_plus_minus(&a1.b, &a2.b))
        || (is_plus_minus_identity(&a1.b) && is_plus_minus_identity(&a2.b))
}

/// 200 energies `E_k = -10 + (110·k·φ mod 110)`, `k = 1..=200`.
pub fn probe_energies() -> Vec<f64> {
    let phi = 0.5 * (1.0 + 5f64.sqrt());
    (1..=200).map(|k| -10.0 + (110.0 * k as f64 * phi).rem_euclid(110.0)).collect()
}

/// Largest entry of `|G(E)|` over [`probe_energies`].
pub fn commutator_scan(a1: &TransferAtom, a2: &TransferAtom) -> Result<f64> {
    let mut worst = 0.0f64;
    for e in probe_energies() {
        worst = worst.max(commutator_g(a1, a2, e)?.max_abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn close(a: &Mat2, b: &Mat2, tol: f64) {
        assert!(a.approx_eq(b, tol), "{a:?} != {b:?}");
    }

    #[test]
    fn monodromy_examples() {
        close(&monodromy(0.0, 1.0).unwrap(), &Mat2::new(1.0, 1.0, 0.0, 1.0), 1e-15);
        close(&monodromy(PI * PI, 1.0).unwrap(), &Mat2::new(-1.0, 0.0, 0.0, -1.0), 1e-14);
        // mpmath, 40 digits
        let ch = 1.543_080_634_815_243_8;
        let sh = 1.175_201_193_643_801_5;
        close(&monodromy(-1.0, 1.0).unwrap(), &Mat2::new(ch, sh, sh, ch), 1e-14);
    }

    #[test]
    fn monodromy_rejects_bad_input() {
        assert!(monodromy(f64::NAN, 1.0).is_err());
        assert!(monodromy(1.0, f64::INFINITY).is_err());
        assert!(monodromy(1.0, 0.0).is_err());
    }

    #[test]
    fn monodromy_continuous_through_zero() {
        for ell in [0.1, 1.0, 3.0] {
            let a = monodromy(1e-10, ell).unwrap();
            let b = monodromy(-1e-10, ell).unwrap();
            assert!((a - b).max_abs() < 1e-8);
            // and across the series switchover
            let z = SERIES_THRESHOLD / (ell * ell);
            let a = monodromy(z * (1.0 - 1e-9), ell).unwrap();
            let b = monodromy(z * (1.0 + 1e-9), ell).unwrap();
            assert!((a - b).max_abs() < 1e-12);
        }
    }

    #[test]
    fn transfer_examples() {
        let b = Mat2::shear(0.7);
        close(&transfer(2.3, 1.4, &Mat2::IDENTITY).unwrap(), &monodromy(2.3, 1.4).unwrap(), 0.0);
        close(&transfer(PI * PI, 1.0, &b).unwrap(), &Mat2::new(-1.0, 0.0, -0.7, -1.0), 1e-14);
        close(&transfer(1.0, PI / 2.0, &Mat2::shear(1.0)).unwrap(), &Mat2::new(0.0, 1.0, -1.0, 1.0), 1e-15);
        assert!(matches!(transfer(1.0, 1.0, &Mat2::new(2.0, 0.0, 0.0, 1.0)), Err(LabError::InvalidMatrix { .. })));
    }

    #[test]
    fn lognorm_examples() {
        let (ln, _) = product_lognorm(&[Mat2::new(2.0, 0.0, 0.0, 0.5)]).unwrap();
        assert_abs_diff_eq!(ln, 2f64.ln(), epsilon = 1e-15);
        for n in [1, 2, 7, 1000] {
            let (ln, _) = product_lognorm(&vec![-Mat2::IDENTITY; n]).unwrap();
            assert_abs_diff_eq!(ln, 0.0, epsilon = 1e-15);
        }
        // direct product, no renormalization
        let a = Mat2::new(2.0, 1.0, 1.0, 1.0);
        let mut direct = Mat2::IDENTITY;
        for _ in 0..10 {
            direct = a * direct;
        }
        let (ln, dir) = product_lognorm(&[a; 10]).unwrap();
        assert_abs_diff_eq!(ln, direct.op_norm().ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(ln, 9.624_236_501_192_069, epsilon = 1e-12);
        let v = direct.apply([1.0, 0.0]);
        let r = v[0].hypot(v[1]);
        assert_abs_diff_eq!(dir[0], v[0] / r, epsilon = 1e-14);
        assert!(product_lognorm(&[]).is_err());
    }

    #[test]
    fn lognorm_survives_huge_products() {
        let a = Mat2::new(std::f64::consts::E, 0.0, 0.0, 1.0 / std::f64::consts::E);
        let mut acc = LogNormAccumulator::new();
        for _ in 0..100_000 {
            acc.push(&a);
        }
        assert!((acc.log_norm() - 1e5).abs() < 1e-8 * 1e5);
    }

    #[test]
    fn iwasawa_examples() {
        let f = iwasawa(&Mat2::IDENTITY).unwrap();
        assert_eq!((f.sign, f.t, f.b, f.q), (1, 0.0, 1.0, 0.0));
        let f = iwasawa(&Mat2::shear(2.5)).unwrap();
        assert_eq!(f.sign, 1);
        assert_abs_diff_eq!(f.t, 0.0);
        assert_abs_diff_eq!(f.b, 1.0);
        assert_abs_diff_eq!(f.q, 2.5, epsilon = 1e-15);
        let f = iwasawa(&Mat2::new(0.0, -1.0, 1.0, 0.0)).unwrap();
        assert_eq!(f.sign, 1);
        assert_abs_diff_eq!(f.t, PI / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(f.b, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(f.q, 0.0, epsilon = 1e-15);
        let f = iwasawa(&-Mat2::IDENTITY).unwrap();
        assert_eq!(f.sign, -1);
        assert_abs_diff_eq!(f.t, 0.0);
        assert!(iwasawa(&Mat2::new(1.0, 1.0, 1.0, 1.0)).is_err());
    }

    #[test]
    fn commutator_examples() {
        let a = TransferAtom::new(1.0, Mat2::shear(1.0));
        for e in probe_energies() {
            assert_eq!(commutator_g(&a, &a, e).unwrap().max_abs(), 0.0);
        }
        let f1 = TransferAtom::new(1.0, Mat2::IDENTITY);
        let f2 = TransferAtom::new(2.3, Mat2::IDENTITY);
        assert!(commutator_scan(&f1, &f2).unwrap() < 1e-9);
        // mpmath reference at E = 1
        let g = commutator_g(&f1, &a, 1.0).unwrap();
        close(
            &g,
            &Mat2::new(
                0.454_648_713_412_840_85,
                0.708_073_418_273_571_2,
                0.708_073_418_273_571_2,
                -0.454_648_713_412_840_85,
            ),
            1e-14,
        );
    }

    #[test]
    fn commutes_identically_examples() {
        let b = Mat2::new(2.0, 1.0, 3.0, 2.0);
        assert!(commutes_identically(&TransferAtom::new(1.0, b), &TransferAtom::new(1.0, -b)));
        assert!(commutes_identically(
            &TransferAtom::new(1.0, Mat2::IDENTITY),
            &TransferAtom::new(2.0, -Mat2::IDENTITY)
        ));
        let a1 = TransferAtom::new(1.0, Mat2::shear(1.0));
        let a2 = TransferAtom::new(2.0, Mat2::shear(1.0));
        assert!(!commutes_identically(&a1, &a2));
        // mpmath: G(1) = [[-sin 1, 0], [-sin 1, sin 1]]
        let g = commutator_g(&a1, &a2, 1.0).unwrap();
        let s1 = 0.841_470_984_807_896_5;
        close(&g, &Mat2::new(-s1, 0.0, -s1, s1), 1e-14);
        assert!(commutator_scan(&a1, &a2).unwrap() > 1e-6);
    }

    #[test]
    fn probe_grid_is_in_range() {
        let grid = probe_energies();
        assert_eq!(grid.len(), 200);
        assert!(grid.iter().all(|e| (-10.0..100.0).contains(e)));
    }

    fn sl2_strategy() -> impl Strategy<Value = Mat2> {
        (0.0..PI, -3.0f64..3.0, -5.0f64..5.0, any::<bool>()).prop_map(|(t, lb, q, neg)| {
            let m = Mat2::rotation(t) * Mat2::dilation(lb.exp()) * Mat2::shear(q);
            if neg {
                -m
            } else {
                m
            }
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn iwasawa_recomposes(m in sl2_strategy()) {
            let f = iwasawa(&m).unwrap();
            prop_assert!((0.0..PI).contains(&f.t));
            prop_assert!(f.b > 0.0);
            let back = f.recompose();
            prop_assert!((back - m).max_abs() <= 1e-10 * m.max_abs().max(1.0));
        }
    }

    proptest! {
        #[test]
        fn monodromy_is_unimodular(e in -200.0f64..2000.0, ell in 0.01f64..5.0) {
            let m = monodromy(e, ell).unwrap();
            let tol = 1e-12 * m.frobenius().powi(2).max(1.0);
            prop_assert!((m.det() - 1.0).abs() <= tol);
        }

        #[test]
        fn lognorm_split_composes(
            seq in prop::collection::vec(sl2_strategy(), 2..200),
            cut in 1usize..199,
        ) {
            let cut = cut.min(seq.len() - 1);
            let mut first = LogNormAccumulator::new();
            seq[..cut].iter().for_each(|m| first.push(m));
            let mut second = LogNormAccumulator::new();
            seq[cut..].iter().for_each(|m| second.push(m));
            let joined = LogNormAccumulator::compose(&second, &first);
            let (whole, _) = product_lognorm(&seq).unwrap();
            prop_assert!((joined.log_norm() - whole).abs() < 1e-8 * whole.abs().max(1.0));
        }
    }
}
