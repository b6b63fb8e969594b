//! Vertex conditions, disorder measures and sampled realizations.
//!
//! Cell `j` spans `(t_{j-1}, t_j)` and carries draw `j`; the vertex condition
//! at `t_j` is the condition of draw `j`. Positions satisfy `t_0 = 0`,
//! `t_j = ℓ_1 + … + ℓ_j` for `j ≥ 1` and `t_j = -(ℓ_{j+1} + … + ℓ_0)` for
//! `j ≤ -1`.

use std::fs;
use std::ops::RangeInclusive;
use std::path::Path;

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::sl2::{same_length, Mat2, TransferAtom};

const UNIMODULAR_TOL: f64 = 1e-10;
const WEIGHT_TOL: f64 = 1e-12;

/// One `(A, B)` pair of a self-adjoint vertex condition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum VertexCondition {
    /// `A = I`, `B = e^{iθ} I`.
    Trivial { theta: f64 },
    /// `A = I`, `B = e^{iθ} M` with `M ∈ SL(2,ℝ)`.
    Connecting { theta: f64, b: Mat2 },
    /// `x u(t⁺) + y u'(t⁺) = 0` and `w u(t⁻) + z u'(t⁻) = 0`.
    Separating { x: f64, y: f64, w: f64, z: f64 },
}

impl VertexCondition {
    pub fn connecting(b: Mat2) -> Self {
        VertexCondition::Connecting { theta: 0.0, b }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            VertexCondition::Trivial { theta } if !theta.is_finite() => {
                Err(LabError::InvalidModel(format!("non-finite phase {theta}")))
            }
            VertexCondition::Trivial { .. } => Ok(()),
            VertexCondition::Connecting { theta, b } => {
                if !theta.is_finite() || !b.is_finite() {
                    return Err(LabError::InvalidModel("non-finite connecting data".into()));
                }
                b.check_unimodular(UNIMODULAR_TOL)
            }
            VertexCondition::Separating { x, y, w, z } => {
                if ![x, y, w, z].iter().all(|v| v.is_finite()) {
                    return Err(LabError::InvalidModel("non-finite separating data".into()));
                }
                if x == 0.0 && y == 0.0 {
                    return Err(LabError::InvalidModel("separating atom with (x, y) = (0, 0)".into()));
                }
                if w == 0.0 && z == 0.0 {
                    return Err(LabError::InvalidModel("separating atom with (w, z) = (0, 0)".into()));
                }
                Ok(())
            }
        }
    }

    /// Real SL(2,ℝ) factor with the phase gauged away; `None` for separating conditions.
    pub fn matrix(&self) -> Option<Mat2> {
        match *self {
            VertexCondition::Trivial { .. } => Some(Mat2::IDENTITY),
            VertexCondition::Connecting { b, .. } => Some(b),
            VertexCondition::Separating { .. } => None,
        }
    }

    pub fn is_separating(&self) -> bool {
        matches!(self, VertexCondition::Separating { .. })
    }

    pub fn theta(&self) -> f64 {
        match *self {
            VertexCondition::Trivial { theta } | VertexCondition::Connecting { theta, .. } => theta,
            VertexCondition::Separating { .. } => 0.0,
        }
    }

    fn approx_eq(&self, other: &VertexCondition, tol: f64) -> bool {
        let near = |a: f64, b: f64| (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0);
        match (self.matrix(), other.matrix()) {
            (Some(b1), Some(b2)) => near(self.theta(), other.theta()) && b1.approx_eq(&b2, tol),
            (None, None) => match (*self, *other) {
                (
                    VertexCondition::Separating { x, y, w, z },
                    VertexCondition::Separating { x: x2, y: y2, w: w2, z: z2 },
                ) => near(x, x2) && near(y, y2) && near(w, w2) && near(z, z2),
                _ => false,
            },
            _ => false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SupportAtom {
    pub ell: f64,
    pub condition: VertexCondition,
    pub weight: f64,
}

impl SupportAtom {
    pub fn new(ell: f64, condition: VertexCondition, weight: f64) -> Self {
        Self { ell, condition, weight }
    }

    /// The `(ℓ, B)` pair seen by the cocycle, if the atom is connecting.
    pub fn transfer_atom(&self) -> Option<TransferAtom> {
        self.condition.matrix().map(|b| TransferAtom::new(self.ell, b))
    }
}

/// Finitely supported probability measure on `(ℓ, vertex condition)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DisorderMeasure {
    pub name: String,
    atoms: Vec<SupportAtom>,
    cumulative: Vec<f64>,
}

impl DisorderMeasure {
    pub fn new(name: impl Into<String>, atoms: Vec<SupportAtom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(LabError::InvalidModel("measure has no atoms".into()));
        }
        for (i, a) in atoms.iter().enumerate() {
            if !(a.ell.is_finite() && a.ell > 0.0) {
                return Err(LabError::InvalidModel(format!("atom {i}: length {} is not positive", a.ell)));
            }
            if !(a.weight > 0.0 && a.weight <= 1.0 + WEIGHT_TOL) {
                return Err(LabError::InvalidModel(format!("atom {i}: weight {} outside (0, 1]", a.weight)));
            }
            a.condition.validate()?;
            for (k, b) in atoms[..i].iter().enumerate() {
                if same_length(a.ell, b.ell) && a.condition.approx_eq(&b.condition, 1e-12) {
                    return Err(LabError::InvalidModel(format!("atoms {k} and {i} coincide")));
                }
            }
        }
        let total: f64 = atoms.iter().map(|a| a.weight).sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(LabError::InvalidModel(format!("weights sum to {total}, not 1")));
        }
        let mut acc = 0.0;
        let cumulative = atoms
            .iter()
            .map(|a| {
                acc += a.weight;
                acc / total
            })
            .collect();
        Ok(Self { name: name.into(), atoms, cumulative })
    }

    /// Builds a measure after merging coinciding atoms and normalizing weights.
    pub fn merged(name: impl Into<String>, atoms: Vec<SupportAtom>) -> Result<Self> {
        let mut out: Vec<SupportAtom> = Vec::with_capacity(atoms.len());
        for a in atoms {
            match out.iter_mut().find(|b| same_length(a.ell, b.ell) && a.condition.approx_eq(&b.condition, 1e-12)) {
                Some(b) => b.weight += a.weight,
                None => out.push(a),
            }
        }
        let total: f64 = out.iter().map(|a| a.weight).sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(LabError::InvalidModel("weights must be positive".into()));
        }
        for a in &mut out {
            a.weight /= total;
        }
        Self::new(name, out)
    }

    pub fn atoms(&self) -> &[SupportAtom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn min_length(&self) -> f64 {
        self.atoms.iter().map(|a| a.ell).fold(f64::INFINITY, f64::min)
    }

    pub fn max_length(&self) -> f64 {
        self.atoms.iter().map(|a| a.ell).fold(0.0, f64::max)
    }

    pub fn has_separating(&self) -> bool {
        self.atoms.iter().any(|a| a.condition.is_separating())
    }

    /// Atom index for a uniform variate in `[0, 1)`.
    #[inline]
    pub fn pick(&self, u: f64) -> usize {
        self.cumulative.iter().position(|&c| u < c).unwrap_or(self.atoms.len() - 1)
    }

    /// Atom indices for consecutive sites `start, start + 1, …` under `seed`.
    pub fn index_stream(&self, seed: u64, start: i64) -> impl Iterator<Item = usize> + '_ {
        let mut rng = site_rng(seed, start);
        std::iter::repeat_with(move || self.pick(unit_f64(rng.next_u64())))
    }
}

fn site_rng(seed: u64, site: i64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // one 64-bit word pair per site; i64::MIN maps to word 0
    let offset = (site as i128 - i64::MIN as i128) as u128;
    rng.set_word_pos(2 * offset);
    rng
}

#[inline]
fn unit_f64(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Derives an independent 64-bit seed from a master seed and a tag path.
pub fn derive_seed(master: u64, tags: &[u64]) -> u64 {
    tags.iter().fold(master, |key, &tag| {
        let mut rng = ChaCha8Rng::seed_from_u64(key);
        rng.set_stream(tag);
        rng.next_u64()
    })
}

/// `ℓ̄ = Σ wᵢ ℓᵢ`.
pub fn mean_length(measure: &DisorderMeasure) -> f64 {
    measure.atoms.iter().map(|a| a.weight * a.ell).sum()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Draw {
    pub atom: usize,
    pub ell: f64,
    pub condition: VertexCondition,
}

/// Draws for sites `jmin..=jmax` and the vertex positions `t_{jmin-1}..=t_{jmax}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Realization {
    pub seed: u64,
    pub jmin: i64,
    pub jmax: i64,
    pub draws: Vec<Draw>,
    positions: Vec<f64>,
}

impl Realization {
    /// Builds a realization from explicit draws for sites `jmin, jmin + 1, …`.
    /// Positions are anchored so that `t_{jmin-1} = origin`.
    pub fn from_draws(jmin: i64, draws: Vec<Draw>, origin: f64) -> Result<Self> {
        if draws.is_empty() {
            return Err(LabError::Domain("realization needs at least one draw".into()));
        }
        let mut positions = Vec::with_capacity(draws.len() + 1);
        positions.push(origin);
        let mut t = origin;
        for d in &draws {
            if !(d.ell > 0.0) {
                return Err(LabError::Domain(format!("cell length {} is not positive", d.ell)));
            }
            t += d.ell;
            positions.push(t);
        }
        Ok(Self { seed: 0, jmin, jmax: jmin + draws.len() as i64 - 1, draws, positions })
    }

    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn draw(&self, j: i64) -> &Draw {
        &self.draws[(j - self.jmin) as usize]
    }

    /// `t_j` for `j ∈ [jmin - 1, jmax]`.
    pub fn position(&self, j: i64) -> f64 {
        self.positions[(j - self.jmin + 1) as usize]
    }

    /// All stored positions, starting at `t_{jmin-1}`.
    pub fn positions(&self) -> &[f64] {
        &self.positions
    }
}

/// i.i.d. sample on `window`, keyed by `(seed, site)` so overlapping windows agree.
pub fn sample_realization(measure: &DisorderMeasure, seed: u64, window: RangeInclusive<i64>) -> Result<Realization> {
    let (jmin, jmax) = (*window.start(), *window.end());
    if jmin > jmax {
        return Err(LabError::Domain(format!("empty window [{jmin}, {jmax}]")));
    }
    let draws: Vec<Draw> = measure
        .index_stream(seed, jmin)
        .take((jmax - jmin + 1) as usize)
        .map(|atom| {
            let a = measure.atoms[atom];
            Draw { atom, ell: a.ell, condition: a.condition }
        })
        .collect();

    // t_0 = 0, t_j = t_{j-1} + ℓ_j upward and t_{j-1} = t_j - ℓ_j downward
    let lo = jmin.min(1);
    let hi = jmax.max(0);
    let lengths: Vec<f64> =
        measure.index_stream(seed, lo).take((hi - lo + 1) as usize).map(|i| measure.atoms[i].ell).collect();
    let ell = |j: i64| lengths[(j - lo) as usize];
    let slot = |j: i64| (j - jmin + 1) as usize;
    let mut positions = vec![0.0; draws.len() + 1];
    let mut t = 0.0;
    for j in 1..=jmax {
        t += ell(j);
        if j >= jmin - 1 {
            positions[slot(j)] = t;
        }
    }
    let mut t = 0.0;
    for j in (jmin - 1..=0).rev() {
        if j <= jmax {
            positions[slot(j)] = t;
        }
        if j >= jmin {
            t -= ell(j);
        }
    }
    Ok(Realization { seed, jmin, jmax, draws, positions })
}

fn connecting_preset(name: &str, atoms: Vec<(f64, Mat2, f64)>) -> Result<DisorderMeasure> {
    let atoms = atoms.into_iter().map(|(ell, b, w)| SupportAtom::new(ell, VertexCondition::connecting(b), w)).collect();
    DisorderMeasure::merged(name, atoms)
}

fn require_nonempty<T>(xs: &[T]) -> Result<()> {
    if xs.is_empty() {
        return Err(LabError::Domain("preset needs at least one coupling".into()));
    }
    Ok(())
}

/// Kronig–Penney δ model: `B = [[1, 0], [α, 1]]`.
pub fn preset_delta(alphas: &[(f64, f64)], ell: f64) -> Result<DisorderMeasure> {
    require_nonempty(alphas)?;
    connecting_preset("delta", alphas.iter().map(|&(a, w)| (ell, Mat2::shear(a), w)).collect())
}

/// δ′ model: `B = [[1, -α], [0, 1]]`.
pub fn preset_delta_prime(alphas: &[(f64, f64)], ell: f64) -> Result<DisorderMeasure> {
    require_nonempty(alphas)?;
    connecting_preset("delta_prime", alphas.iter().map(|&(a, w)| (ell, Mat2::new(1.0, -a, 0.0, 1.0), w)).collect())
}

/// Phase of `(2 + iα)/(2 - iα)` in `[0, 2π)`.
pub fn gauge_phase(alpha: f64) -> f64 {
    (2.0 * (alpha / 2.0).atan2(1.0)).rem_euclid(std::f64::consts::TAU)
}

/// Magnetic (gauge) model: trivial atoms with phase `(2 + iα)/(2 - iα)`.
pub fn preset_gauge(alphas: &[(f64, f64)], ell: f64) -> Result<DisorderMeasure> {
    require_nonempty(alphas)?;
    let atoms = alphas
        .iter()
        .map(|&(a, w)| SupportAtom::new(ell, VertexCondition::Trivial { theta: gauge_phase(a) }, w))
        .collect();
    DisorderMeasure::merged("gauge", atoms)
}

/// Radial-tree model: `B = [[√β, 0], [α/√β, 1/√β]]` with integer `β ≥ 1`.
pub fn preset_radial_tree(pairs: &[((f64, u32), f64)], ell: f64) -> Result<DisorderMeasure> {
    require_nonempty(pairs)?;
    let mut atoms = Vec::with_capacity(pairs.len());
    for &((alpha, beta), w) in pairs {
        if beta < 1 {
            return Err(LabError::Domain(format!("branching number must be ≥ 1, got {beta}")));
        }
        let r = (beta as f64).sqrt();
        atoms.push((ell, Mat2::new(r, 0.0, alpha / r, 1.0 / r), w));
    }
    connecting_preset("radial_tree", atoms)
}

/// Single free atom of length `ell`.
pub fn preset_free(ell: f64) -> Result<DisorderMeasure> {
    let mut m = preset_delta(&[(0.0, 1.0)], ell)?;
    m.name = "free".into();
    Ok(m)
}

// ---------------------------------------------------------------------------
// Model description files

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AtomKind {
    Trivial,
    Connecting,
    Separating,
}

/// One atom in a model file. `params` is `[θ]` for trivial atoms,
/// `[θ, a11, a12, a21, a22]` for connecting atoms and `[x, y, w, z]` for
/// separating atoms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomRecord {
    pub ell: f64,
    pub kind: AtomKind,
    pub params: Vec<f64>,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub name: String,
    pub atoms: Vec<AtomRecord>,
}

impl From<&DisorderMeasure> for ModelFile {
    fn from(m: &DisorderMeasure) -> Self {
        let atoms = m
            .atoms
            .iter()
            .map(|a| {
                let (kind, params) = match a.condition {
                    VertexCondition::Trivial { theta } => (AtomKind::Trivial, vec![theta]),
                    VertexCondition::Connecting { theta, b } => {
                        (AtomKind::Connecting, vec![theta, b.a11, b.a12, b.a21, b.a22])
                    }
                    VertexCondition::Separating { x, y, w, z } => (AtomKind::Separating, vec![x, y, w, z]),
                };
                AtomRecord { ell: a.ell, kind, params, weight: a.weight }
            })
            .collect();
        ModelFile { name: m.name.clone(), atoms }
    }
}

impl TryFrom<ModelFile> for DisorderMeasure {
    type Error = LabError;

    fn try_from(file: ModelFile) -> Result<Self> {
        let mut atoms = Vec::with_capacity(file.atoms.len());
        for (i, rec) in file.atoms.into_iter().enumerate() {
            let want = match rec.kind {
                AtomKind::Trivial => 1,
                AtomKind::Connecting => 5,
                AtomKind::Separating => 4,
            };
            if rec.params.len() != want {
                return Err(LabError::InvalidModel(format!(
                    "atom {i}: {:?} atoms take {want} params, got {}",
                    rec.kind,
                    rec.params.len()
                )));
            }
            let p = &rec.params;
            let condition = match rec.kind {
                AtomKind::Trivial => VertexCondition::Trivial { theta: p[0] },
                AtomKind::Connecting => {
                    VertexCondition::Connecting { theta: p[0], b: Mat2::new(p[1], p[2], p[3], p[4]) }
                }
                AtomKind::Separating => VertexCondition::Separating { x: p[0], y: p[1], w: p[2], z: p[3] },
            };
            atoms.push(SupportAtom::new(rec.ell, condition, rec.weight));
        }
        DisorderMeasure::new(file.name, atoms)
    }
}

pub fn measure_to_json(measure: &DisorderMeasure) -> Result<String> {
    Ok(serde_json::to_string_pretty(&ModelFile::from(measure))?)
}

pub fn measure_from_json(text: &str) -> Result<DisorderMeasure> {
    let file: ModelFile = serde_json::from_str(text)?;
    DisorderMeasure::try_from(file)
}

pub fn load_measure(path: &Path) -> Result<DisorderMeasure> {
    measure_from_json(&fs::read_to_string(path)?)
}

pub fn save_measure(measure: &DisorderMeasure, path: &Path) -> Result<()> {
    fs::write(path, measure_to_json(measure)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn bernoulli() -> DisorderMeasure {
        preset_delta(&[(1.0, 0.5), (0.0, 0.5)], 1.0).unwrap()
    }

    #[test]
    fn single_atom_sampling_is_deterministic() {
        let m = preset_delta(&[(-2.0, 1.0)], 1.0).unwrap();
        for seed in [0, 1, 99] {
            let r = sample_realization(&m, seed, -5..=5).unwrap();
            assert!(r.draws.iter().all(|d| d.atom == 0));
        }
    }

    #[test]
    fn bernoulli_frequency_concentrates() {
        let m = bernoulli();
        let r = sample_realization(&m, 7, 0..=999_999).unwrap();
        let ones = r.draws.iter().filter(|d| d.atom == 0).count() as f64 / 1e6;
        assert!((0.498..=0.502).contains(&ones), "frequency {ones}");
    }

    #[test]
    fn overlapping_windows_agree() {
        let m = bernoulli();
        let a = sample_realization(&m, 42, -100..=100).unwrap();
        let b = sample_realization(&m, 42, 50..=300).unwrap();
        for j in 50..=100 {
            assert_eq!(a.draw(j).atom, b.draw(j).atom);
            assert_eq!(a.position(j), b.position(j));
        }
        let c = sample_realization(&m, 43, 50..=300).unwrap();
        assert_ne!(
            b.draws.iter().map(|d| d.atom).collect::<Vec<_>>(),
            c.draws.iter().map(|d| d.atom).collect::<Vec<_>>()
        );
    }

    #[test]
    fn positions_follow_cumulative_lengths() {
        let m = DisorderMeasure::new(
            "lengths",
            vec![
                SupportAtom::new(0.5, VertexCondition::connecting(Mat2::IDENTITY), 0.5),
                SupportAtom::new(1.75, VertexCondition::connecting(Mat2::IDENTITY), 0.5),
            ],
        )
        .unwrap();
        let r = sample_realization(&m, 3, -20..=20).unwrap();
        assert_eq!(r.position(0), 0.0);
        let mut t = 0.0;
        for j in 1..=20 {
            t += r.draw(j).ell;
            assert_eq!(r.position(j), t);
        }
        assert_eq!(r.position(-1), -r.draw(0).ell);
        for j in -20..=20 {
            let gap = r.position(j) - r.position(j - 1);
            assert_abs_diff_eq!(gap, r.draw(j).ell, epsilon = 1e-12);
            assert!(gap >= m.min_length() - 1e-12);
        }
    }

    #[test]
    fn windows_away_from_origin() {
        let m = bernoulli();
        let r = sample_realization(&m, 5, 30..=40).unwrap();
        assert_eq!(r.position(29), 29.0);
        assert_eq!(r.position(40), 40.0);
        let r = sample_realization(&m, 5, -40..=-30).unwrap();
        assert_eq!(r.position(-41), -41.0);
        assert_eq!(r.position(-30), -30.0);
    }

    #[test]
    fn presets() {
        let free = preset_delta(&[(0.0, 1.0)], 1.0).unwrap();
        assert_eq!(free.atoms()[0].condition.matrix(), Some(Mat2::IDENTITY));
        assert_eq!(bernoulli().len(), 2);
        let attractive = preset_delta(&[(-2.0, 1.0)], 1.0).unwrap();
        assert_eq!(attractive.atoms()[0].condition.matrix(), Some(Mat2::shear(-2.0)));

        let dp = preset_delta_prime(&[(1.0, 1.0)], 1.0).unwrap();
        assert_eq!(dp.atoms()[0].condition.matrix(), Some(Mat2::new(1.0, -1.0, 0.0, 1.0)));
        let dp0 = preset_delta_prime(&[(0.0, 1.0)], 1.0).unwrap();
        assert_eq!(dp0.atoms()[0].condition.matrix(), Some(Mat2::IDENTITY));

        let g = preset_gauge(&[(0.0, 0.5), (2.0, 0.5)], 1.0).unwrap();
        assert_eq!(g.atoms()[0].condition, VertexCondition::Trivial { theta: 0.0 });
        assert_abs_diff_eq!(g.atoms()[1].condition.theta(), PI / 2.0, epsilon = 1e-15);
        assert!(gauge_phase(-2.0) > PI);

        let tree = preset_radial_tree(&[((0.0, 4), 1.0)], 1.0).unwrap();
        assert_eq!(tree.atoms()[0].condition.matrix(), Some(Mat2::new(2.0, 0.0, 0.0, 0.5)));
        let tree1 = preset_radial_tree(&[((0.0, 1), 1.0)], 1.0).unwrap();
        assert_eq!(tree1.atoms()[0].condition.matrix(), Some(Mat2::IDENTITY));
        assert!(preset_radial_tree(&[((0.0, 0), 1.0)], 1.0).is_err());

        for m in [bernoulli(), dp, g, tree, preset_radial_tree(&[((0.3, 3), 0.5), ((-1.0, 7), 0.5)], 1.0).unwrap()] {
            for a in m.atoms() {
                let b = a.condition.matrix().unwrap();
                assert!((b.det() - 1.0).abs() <= 1e-12);
            }
        }
        let merged = preset_delta(&[(1.0, 0.25), (1.0, 0.25), (0.0, 0.5)], 1.0).unwrap();
        assert_eq!(merged.len(), 2);
        assert_abs_diff_eq!(merged.atoms()[0].weight, 0.5);
    }

    #[test]
    fn mean_lengths() {
        let mk = |atoms: &[(f64, f64)]| {
            DisorderMeasure::new(
                "m",
                atoms
                    .iter()
                    .map(|&(l, w)| SupportAtom::new(l, VertexCondition::connecting(Mat2::IDENTITY), w))
                    .collect(),
            )
            .unwrap()
        };
        assert_eq!(mean_length(&mk(&[(1.0, 1.0)])), 1.0);
        assert_abs_diff_eq!(mean_length(&mk(&[(1.0, 0.5), (3.0, 0.5)])), 2.0);
        assert_abs_diff_eq!(mean_length(&mk(&[(1.0, 0.9), (2.0, 0.1)])), 1.1, epsilon = 1e-15);
    }

    #[test]
    fn invalid_measures_are_rejected() {
        let id = VertexCondition::connecting(Mat2::IDENTITY);
        assert!(DisorderMeasure::new("e", vec![]).is_err());
        assert!(DisorderMeasure::new("w", vec![SupportAtom::new(1.0, id, 0.7)]).is_err());
        assert!(DisorderMeasure::new("l", vec![SupportAtom::new(0.0, id, 1.0)]).is_err());
        let bad = VertexCondition::connecting(Mat2::new(2.0, 0.0, 0.0, 1.0));
        assert!(DisorderMeasure::new("d", vec![SupportAtom::new(1.0, bad, 1.0)]).is_err());
        let sep = VertexCondition::Separating { x: 0.0, y: 0.0, w: 1.0, z: 0.0 };
        assert!(DisorderMeasure::new("s", vec![SupportAtom::new(1.0, sep, 1.0)]).is_err());
        let dup = vec![SupportAtom::new(1.0, id, 0.5), SupportAtom::new(1.0, id, 0.5)];
        assert!(DisorderMeasure::new("dup", dup).is_err());
    }

    #[test]
    fn model_file_schema() {
        let text = r#"{
            "name": "mixed",
            "atoms": [
                {"ell": 1.0, "kind": "trivial", "params": [0.5], "weight": 0.25},
                {"ell": 1.5, "kind": "connecting", "params": [0.0, 1.0, 0.0, 2.0, 1.0], "weight": 0.25},
                {"ell": 2.0, "kind": "separating", "params": [1.0, 0.0, 0.0, 1.0], "weight": 0.5}
            ]
        }"#;
        let m = measure_from_json(text).unwrap();
        assert_eq!(m.name, "mixed");
        assert!(m.has_separating());
        assert_eq!(m.atoms()[1].condition.matrix(), Some(Mat2::shear(2.0)));
        let bad = text.replace("[0.5]", "[0.5, 1.0]");
        assert!(measure_from_json(&bad).is_err());
    }

    #[test]
    fn derived_seeds_differ() {
        let a = derive_seed(1, &[0, 0]);
        assert_eq!(a, derive_seed(1, &[0, 0]));
        assert_ne!(a, derive_seed(1, &[0, 1]));
        assert_ne!(a, derive_seed(1, &[1, 0]));
        assert_ne!(a, derive_seed(2, &[0, 0]));
    }
}
