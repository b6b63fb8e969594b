//! Lyapunov exponents of the transfer-matrix cocycle.
//!
//! The Monte Carlo estimator averages `F_n = (1/n) log ‖M_n^E(ω)‖` over
//! independent replicas. Its reported uncertainty combines the replica
//! standard error with a finite-`n` term read off the same orbits: for
//! checkpoints `k = jn/16` and the last 64 steps, the Brownian-bridge statistic
//! `max_k k |F̄_k - F̄_n| / n` bounds the `O(1/n)` bias of `F̄_n`. Without it a
//! deterministic (single-atom) measure would report a zero error bar. The
//! dense tail catches elliptic periodic orbits whose rotation aliases with
//! the coarse checkpoints.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::fmt::sig;
use crate::model::{derive_seed, mean_length, DisorderMeasure};
use crate::sl2::{LogNormAccumulator, Mat2, TransferAtom};

pub const DEFAULT_STEPS: usize = 100_000;
pub const DEFAULT_REPLICAS: usize = 32;
pub const DEFAULT_THRESHOLD: f64 = 0.01;
pub const MIN_STEPS: usize = 1_000;

const COARSE: usize = 16;
const TAIL: usize = 64;
const CHECKPOINTS: usize = COARSE + TAIL;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovEstimate {
    pub energy: f64,
    /// Replica mean of `F_n`, clamped at zero.
    pub value: f64,
    /// Unclamped replica mean.
    pub raw: f64,
    /// Total uncertainty: `√(statistical² + bias²)`.
    pub stderr: f64,
    /// Standard error of the replica mean alone.
    pub statistical: f64,
    /// Finite-`n` bias estimate.
    pub bias: f64,
    pub steps: usize,
    pub replicas: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovCurve {
    pub grid: Vec<f64>,
    pub estimates: Vec<LyapunovEstimate>,
    pub mean_length: f64,
}

impl LyapunovCurve {
    /// Per-unit-length exponents `L̄(E) = L(E)/ℓ̄`.
    pub fn continuum(&self) -> Vec<f64> {
        self.estimates.iter().map(|e| e.value / self.mean_length).collect()
    }

    /// CSV with columns `E,L,stderr,Lbar,n,replicas`; optional leading `#` comment lines.
    pub fn to_csv(&self, comment: Option<&str>) -> String {
        let mut out = String::new();
        if let Some(c) = comment {
            for line in c.lines() {
                out.push_str("# ");
                out.push_str(line);
                out.push('\n');
            }
        }
        out.push_str("E,L,stderr,Lbar,n,replicas\n");
        for e in &self.estimates {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                sig(e.energy, 12),
                sig(e.value, 12),
                sig(e.stderr, 12),
                sig(e.value / self.mean_length, 12),
                e.steps,
                e.replicas
            ));
        }
        out
    }
}

fn step_matrices(measure: &DisorderMeasure, energy: f64) -> Result<Vec<Mat2>> {
    measure
        .atoms()
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let atom = a
                .transfer_atom()
                .ok_or_else(|| LabError::InvalidModel(format!("atom {i} is separating and has no transfer matrix")))?;
            atom.transfer(energy)
        })
        .collect()
}

/// `F_k` at the [`checkpoint_lengths`], along one orbit starting at `start`.
fn orbit_checkpoints(measure: &DisorderMeasure, mats: &[Mat2], seed: u64, start: i64, n: usize) -> [f64; CHECKPOINTS] {
    let ks = checkpoint_lengths(n);
    let mut acc = LogNormAccumulator::new();
    let mut out = [0.0; CHECKPOINTS];
    let mut next = 0;
    for (k, idx) in measure.index_stream(seed, start).take(n).enumerate() {
        acc.push(&mats[idx]);
        while next < CHECKPOINTS && ks[next] == k + 1 {
            out[next] = acc.log_norm() / (k + 1) as f64;
            next += 1;
        }
    }
    out
}

/// `jn/16` for `j = 1..16`, then `n - 64, …, n - 1`, sorted, ending at `n`.
fn checkpoint_lengths(n: usize) -> [usize; CHECKPOINTS] {
    let mut ks = [0; CHECKPOINTS];
    for (j, k) in ks[..COARSE - 1].iter_mut().enumerate() {
        *k = ((j + 1) * n / COARSE).max(1);
    }
    for (d, k) in ks[COARSE - 1..CHECKPOINTS - 1].iter_mut().enumerate() {
        *k = n.saturating_sub(TAIL - d).max(1);
    }
    ks[CHECKPOINTS - 1] = n;
    ks.sort_unstable();
    ks
}

fn summarize(energy: f64, n: usize, orbits: &[[f64; CHECKPOINTS]]) -> LyapunovEstimate {
    let r = orbits.len();
    let mut means = [0.0; CHECKPOINTS];
    for o in orbits {
        for (m, v) in means.iter_mut().zip(o) {
            *m += v / r as f64;
        }
    }
    let full = means[CHECKPOINTS - 1];
    let statistical = if r > 1 {
        let var = orbits.iter().map(|o| (o[CHECKPOINTS - 1] - full).powi(2)).sum::<f64>() / (r - 1) as f64;
        (var / r as f64).sqrt()
    } else {
        0.0
    };
    let ks = checkpoint_lengths(n);
    let bias = ks[..CHECKPOINTS - 1]
        .iter()
        .zip(&means)
        .map(|(&k, &fk)| k as f64 * (fk - full).abs() / n as f64)
        .fold(0.0, f64::max);
    LyapunovEstimate {
        energy,
        value: full.max(0.0),
        raw: full,
        stderr: statistical.hypot(bias),
        statistical,
        bias,
        steps: n,
        replicas: r,
    }
}

fn check_sizes(n: usize, replicas: usize) -> Result<()> {
    if n < MIN_STEPS {
        return Err(LabError::Domain(format!("need at least {MIN_STEPS} steps, got {n}")));
    }
    if replicas == 0 {
        return Err(LabError::Domain("need at least one replica".into()));
    }
    Ok(())
}

/// Replica estimate of `L(E)` over the sites `start..start + n`.
pub fn lyapunov_mc_window(
    measure: &DisorderMeasure,
    energy: f64,
    start: i64,
    n: usize,
    replicas: usize,
    seed: u64,
) -> Result<LyapunovEstimate> {
    check_sizes(n, replicas)?;
    let mats = step_matrices(measure, energy)?;
    let orbits: Vec<_> = (0..replicas)
        .into_par_iter()
        .map(|r| orbit_checkpoints(measure, &mats, derive_seed(seed, &[r as u64]), start, n))
        .collect();
    Ok(summarize(energy, n, &orbits))
}

pub fn lyapunov_mc(
    measure: &DisorderMeasure,
    energy: f64,
    n: usize,
    replicas: usize,
    seed: u64,
) -> Result<LyapunovEstimate> {
    lyapunov_mc_window(measure, energy, 0, n, replicas, seed)
}

/// `max(0, log |λ_max|)` of the one-step matrix of a single atom.
pub fn lyapunov_periodic(atom: &TransferAtom, energy: f64) -> Result<f64> {
    let tr = atom.transfer(energy)?.trace().abs();
    if tr <= 2.0 {
        return Ok(0.0);
    }
    Ok((0.5 * (tr + (tr * tr - 4.0).sqrt())).ln())
}

/// Estimates over an energy grid. Seeds are derived from `(grid index, replica)`
/// so the result does not depend on scheduling.
pub fn lyapunov_curve(
    measure: &DisorderMeasure,
    grid: &[f64],
    n: usize,
    replicas: usize,
    seed: u64,
) -> Result<LyapunovCurve> {
    if grid.is_empty() {
        return Err(LabError::Domain("empty energy grid".into()));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) || grid.iter().any(|e| !e.is_finite()) {
        return Err(LabError::Domain("energy grid must be finite and strictly increasing".into()));
    }
    check_sizes(n, replicas)?;
    let mats: Vec<Vec<Mat2>> = grid.iter().map(|&e| step_matrices(measure, e)).collect::<Result<_>>()?;
    let orbits: Vec<[f64; CHECKPOINTS]> = (0..grid.len() * replicas)
        .into_par_iter()
        .map(|task| {
            let (ei, r) = (task / replicas, task % replicas);
            let s = derive_seed(seed, &[ei as u64, r as u64]);
            orbit_checkpoints(measure, &mats[ei], s, 0, n)
        })
        .collect();
    let estimates =
        grid.iter().enumerate().map(|(ei, &e)| summarize(e, n, &orbits[ei * replicas..(ei + 1) * replicas])).collect();
    Ok(LyapunovCurve { grid: grid.to_vec(), estimates, mean_length: mean_length(measure) })
}

/// Maximal runs of grid energies with `L(E) < threshold`, as `(first, last)` pairs.
pub fn exceptional_scan(curve: &LyapunovCurve, threshold: f64) -> Result<Vec<(f64, f64)>> {
    if let Some(bad) = curve.estimates.iter().find(|e| e.stderr >= threshold / 3.0) {
        return Err(LabError::Precision(format!(
            "stderr {:.3e} at E = {} exceeds threshold/3 = {:.3e}",
            bad.stderr,
            bad.energy,
            threshold / 3.0
        )));
    }
    let mut out = Vec::new();
    let mut run: Option<(f64, f64)> = None;
    for e in &curve.estimates {
        if e.value < threshold {
            run = Some(match run {
                Some((a, _)) => (a, e.energy),
                None => (e.energy, e.energy),
            });
        } else if let Some(r) = run.take() {
            out.push(r);
        }
    }
    out.extend(run);
    Ok(out)
}

/// Fraction of grid points with `L(E) < threshold`.
pub fn flagged_fraction(curve: &LyapunovCurve, threshold: f64) -> f64 {
    let hits = curve.estimates.iter().filter(|e| e.value < threshold).count();
    hits as f64 / curve.estimates.len() as f64
}

pub fn linspace(a: f64, b: f64, points: usize) -> Vec<f64> {
    match points {
        0 => vec![],
        1 => vec![a],
        _ => (0..points).map(|i| a + (b - a) * i as f64 / (points - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{preset_delta, preset_free, preset_gauge};
    use crate::sl2::Mat2;

    fn delta_atom(alpha: f64) -> TransferAtom {
        TransferAtom::new(1.0, Mat2::shear(alpha))
    }

    #[test]
    fn free_exponent_vanishes() {
        let est = lyapunov_mc(&preset_free(1.0).unwrap(), 5.0, 100_000, 4, 1).unwrap();
        assert!(est.value < 5e-3, "{est:?}");
    }

    #[test]
    fn periodic_closed_form() {
        assert_eq!(lyapunov_periodic(&TransferAtom::new(1.0, Mat2::IDENTITY), 3.7).unwrap(), 0.0);
        // trace 2cos w + sin(w)/w = 2.5 at some w in (0, π/2): bisect the formula directly
        let tr = |w: f64| 2.0 * w.cos() + w.sin() / w;
        let (mut lo, mut hi) = (1e-6, 1.5);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if tr(mid) > 2.5 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let e = (0.5 * (lo + hi)).powi(2);
        let expected = ((2.5 + (2.5f64 * 2.5 - 4.0).sqrt()) / 2.0).ln();
        let got = lyapunov_periodic(&delta_atom(1.0), e).unwrap();
        assert!((got - expected).abs() < 1e-9, "{got} vs {expected}");
        // parabolic points: trace = ±2 exactly gives 0
        assert_eq!(lyapunov_periodic(&TransferAtom::new(1.0, -Mat2::IDENTITY), 0.0).unwrap(), 0.0);
    }

    #[test]
    fn single_atom_mc_matches_closed_form_in_gap() {
        // E = 0.2 lies in the lowest gap of the α = 1 comb (trace > 2)
        let atom = delta_atom(1.0);
        let e = 0.2;
        assert!(atom.transfer(e).unwrap().trace() > 2.0);
        let m = preset_delta(&[(1.0, 1.0)], 1.0).unwrap();
        let est = lyapunov_mc(&m, e, 100_000, 8, 3).unwrap();
        let exact = lyapunov_periodic(&atom, e).unwrap();
        assert!((est.value - exact).abs() < 3.0 * est.stderr, "{est:?} vs {exact}");
        assert!(est.stderr > 0.0);
    }

    #[test]
    fn gauge_curve_vanishes() {
        let m = preset_gauge(&[(0.5, 0.5), (-1.5, 0.5)], 1.0).unwrap();
        let curve = lyapunov_curve(&m, &linspace(0.5, 50.0, 8), 100_000, 4, 11).unwrap();
        assert!(curve.estimates.iter().all(|e| e.value < 5e-3));
        assert!(exceptional_scan(&curve, 0.01).unwrap() == vec![(0.5, 50.0)]);
    }

    #[test]
    fn curve_is_schedule_independent() {
        let m = preset_delta(&[(1.0, 0.5), (0.0, 0.5)], 1.0).unwrap();
        let grid = [2.0, 5.0];
        let a = lyapunov_curve(&m, &grid, 2_000, 3, 9).unwrap();
        let b = lyapunov_curve(&m, &grid, 2_000, 3, 9).unwrap();
        assert_eq!(a, b);
        // per-point seeds: a one-point grid reproduces the first entry
        let c = lyapunov_curve(&m, &grid[..1], 2_000, 3, 9).unwrap();
        assert_eq!(c.estimates[0], a.estimates[0]);
    }

    #[test]
    fn scan_requires_precision() {
        let m = preset_delta(&[(1.0, 0.5), (0.0, 0.5)], 1.0).unwrap();
        let curve = lyapunov_curve(&m, &[2.0], 1_000, 2, 1).unwrap();
        assert!(matches!(exceptional_scan(&curve, 1e-6), Err(LabError::Precision(_))));
    }

    #[test]
    fn scan_groups_runs() {
        let est = |e: f64, v: f64| LyapunovEstimate {
            energy: e,
            value: v,
            raw: v,
            stderr: 0.0,
            statistical: 0.0,
            bias: 0.0,
            steps: 1000,
            replicas: 1,
        };
        let curve = LyapunovCurve {
            grid: vec![1.0, 2.0, 3.0, 4.0, 5.0],
            estimates: vec![est(1.0, 0.0), est(2.0, 0.001), est(3.0, 0.5), est(4.0, 0.0), est(5.0, 0.2)],
            mean_length: 1.0,
        };
        assert_eq!(exceptional_scan(&curve, 0.01).unwrap(), vec![(1.0, 2.0), (4.0, 4.0)]);
        assert!((flagged_fraction(&curve, 0.01) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_sizes_and_separating_atoms() {
        let m = preset_free(1.0).unwrap();
        assert!(lyapunov_mc(&m, 1.0, 10, 1, 0).is_err());
        assert!(lyapunov_mc(&m, 1.0, 1000, 0, 0).is_err());
        let sep = crate::model::DisorderMeasure::new(
            "sep",
            vec![crate::model::SupportAtom::new(
                1.0,
                crate::model::VertexCondition::Separating { x: 1.0, y: 0.0, w: 1.0, z: 0.0 },
                1.0,
            )],
        )
        .unwrap();
        assert!(matches!(lyapunov_mc(&sep, 1.0, 1000, 1, 0), Err(LabError::InvalidModel(_))));
    }

    #[test]
    fn csv_layout() {
        let m = preset_free(1.0).unwrap();
        let curve = lyapunov_curve(&m, &[1.0, 2.0], 1_000, 2, 0).unwrap();
        let csv = curve.to_csv(Some("tool test"));
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "# tool test");
        assert_eq!(lines[1], "E,L,stderr,Lbar,n,replicas");
        assert_eq!(lines.len(), 4);
        assert!(lines[2].starts_with("1,"));
        assert!(lines[2].ends_with(",1000,2"));
    }
}
