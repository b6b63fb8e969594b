//! Localization versus absolutely continuous spectrum, decided from the
//! support of the disorder measure.
//!
//! Localized when the support has a separating atom, two connecting matrices
//! that differ by more than a sign, or two distinct lengths together with a
//! matrix other than `±I`. Otherwise the operator is a gauge transform of the
//! free or of a periodic operator.

use serde::Serialize;
use serde_json::json;

use crate::error::{LabError, Result};
use crate::model::DisorderMeasure;
use crate::sl2::{commutes_identically, is_plus_minus, is_plus_minus_identity, same_length, Mat2};

/// `B₁ = ±B₂` entrywise within `1e-10`: the only phases `e^{iθ}` keeping a
/// real matrix real are `±1`.
pub fn phase_equivalent(b1: &Mat2, b2: &Mat2) -> bool {
    is_plus_minus(b1, b2)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Bullet {
    /// Two lengths, and a matrix that is not `±I`.
    DistinctLengths = 1,
    /// Two matrices not equal up to sign.
    DistinctMatrices = 2,
    /// A separating vertex condition.
    Separating = 3,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AcReason {
    FreeEquivalent,
    PeriodicEquivalent { ell: f64, b: Mat2 },
}

#[derive(Clone, Debug, PartialEq)]
pub enum DichotomyVerdict {
    Localized { bullet: Bullet, witness: Vec<usize> },
    AbsolutelyContinuous(AcReason),
}

impl DichotomyVerdict {
    pub fn is_localized(&self) -> bool {
        matches!(self, DichotomyVerdict::Localized { .. })
    }

    pub fn bullet(&self) -> Option<Bullet> {
        match self {
            DichotomyVerdict::Localized { bullet, .. } => Some(*bullet),
            DichotomyVerdict::AbsolutelyContinuous(_) => None,
        }
    }

    pub fn reason(&self) -> String {
        match self {
            DichotomyVerdict::Localized { bullet: Bullet::Separating, witness } => {
                format!("atom {} carries a separating vertex condition", witness[0])
            }
            DichotomyVerdict::Localized { bullet: Bullet::DistinctMatrices, witness } => {
                format!("atoms {} and {} have matrices that differ by more than a sign", witness[0], witness[1])
            }
            DichotomyVerdict::Localized { bullet: Bullet::DistinctLengths, witness } => {
                format!("atom {} has a matrix other than ±I and atom {} a different length", witness[0], witness[1])
            }
            DichotomyVerdict::AbsolutelyContinuous(AcReason::FreeEquivalent) => "FreeEquivalent".into(),
            DichotomyVerdict::AbsolutelyContinuous(AcReason::PeriodicEquivalent { .. }) => "PeriodicEquivalent".into(),
        }
    }

    /// `{verdict, bullet, witness, reason}`, plus `period` for the periodic case.
    pub fn to_json(&self) -> serde_json::Value {
        match self {
            DichotomyVerdict::Localized { bullet, witness } => json!({
                "verdict": "Localized",
                "bullet": *bullet as u8,
                "witness": witness,
                "reason": self.reason(),
            }),
            DichotomyVerdict::AbsolutelyContinuous(r) => {
                let period = match r {
                    AcReason::PeriodicEquivalent { ell, b } => json!({ "ell": ell, "B": b.to_rows() }),
                    AcReason::FreeEquivalent => serde_json::Value::Null,
                };
                json!({
                    "verdict": "AbsolutelyContinuous",
                    "bullet": null,
                    "witness": [],
                    "reason": self.reason(),
                    "period": period,
                })
            }
        }
    }
}

pub fn classify(measure: &DisorderMeasure) -> DichotomyVerdict {
    let atoms = measure.atoms();
    if let Some(i) = atoms.iter().position(|a| a.condition.is_separating()) {
        return DichotomyVerdict::Localized { bullet: Bullet::Separating, witness: vec![i] };
    }
    let mats: Vec<Mat2> = atoms.iter().map(|a| a.condition.matrix().expect("connecting")).collect();
    for i in 0..mats.len() {
        for j in i + 1..mats.len() {
            if !phase_equivalent(&mats[i], &mats[j]) {
                return DichotomyVerdict::Localized { bullet: Bullet::DistinctMatrices, witness: vec![i, j] };
            }
        }
    }
    if let Some(i) = mats.iter().position(|m| !is_plus_minus_identity(m)) {
        if let Some(j) = atoms.iter().position(|a| !same_length(a.ell, atoms[i].ell)) {
            return DichotomyVerdict::Localized { bullet: Bullet::DistinctLengths, witness: vec![i, j] };
        }
        return DichotomyVerdict::AbsolutelyContinuous(AcReason::PeriodicEquivalent { ell: atoms[i].ell, b: mats[i] });
    }
    DichotomyVerdict::AbsolutelyContinuous(AcReason::FreeEquivalent)
}

#[derive(Clone, Debug, Serialize)]
pub struct PairCheck {
    pub i: usize,
    pub j: usize,
    pub commutes: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CommutatorReport {
    pub pairs: Vec<PairCheck>,
    pub localized: bool,
    pub non_commuting: Option<(usize, usize)>,
}

/// Checks that a connecting-only measure is classified Localized exactly
/// when some pair of support atoms fails to commute identically.
pub fn consistency_with_commutator(measure: &DisorderMeasure) -> Result<CommutatorReport> {
    let atoms: Vec<_> = measure
        .atoms()
        .iter()
        .map(|a| {
            a.transfer_atom().ok_or_else(|| LabError::InvalidModel("commutator check needs connecting atoms".into()))
        })
        .collect::<Result<_>>()?;
    let mut pairs = Vec::new();
    for i in 0..atoms.len() {
        for j in i + 1..atoms.len() {
            pairs.push(PairCheck { i, j, commutes: commutes_identically(&atoms[i], &atoms[j]) });
        }
    }
    let non_commuting = pairs.iter().find(|p| !p.commutes).map(|p| (p.i, p.j));
    let localized = classify(measure).is_localized();
    if localized != non_commuting.is_some() {
        return Err(LabError::Consistency(format!(
            "measure `{}`: classified {} but {}",
            measure.name,
            if localized { "Localized" } else { "AbsolutelyContinuous" },
            if non_commuting.is_some() { "a pair does not commute" } else { "every pair commutes" }
        )));
    }
    Ok(CommutatorReport { pairs, localized, non_commuting })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{preset_delta, preset_free, preset_gauge, DisorderMeasure, SupportAtom, VertexCondition};
    use proptest::prelude::*;

    fn measure(atoms: &[(f64, Mat2)]) -> DisorderMeasure {
        let w = 1.0 / atoms.len() as f64;
        DisorderMeasure::new(
            "test",
            atoms.iter().map(|&(l, b)| SupportAtom::new(l, VertexCondition::connecting(b), w)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn phase_equivalence_examples() {
        let b = Mat2::new(2.0, 1.0, 3.0, 2.0);
        assert!(phase_equivalent(&b, &b));
        assert!(phase_equivalent(&b, &-b));
        assert!(!phase_equivalent(&Mat2::shear(1.0), &Mat2::shear(2.0)));
    }

    #[test]
    fn presets() {
        let gauge = preset_gauge(&[(0.5, 0.3), (2.0, 0.7)], 1.0).unwrap();
        assert_eq!(classify(&gauge), DichotomyVerdict::AbsolutelyContinuous(AcReason::FreeEquivalent));
        let delta = preset_delta(&[(0.0, 0.5), (1.0, 0.5)], 1.0).unwrap();
        let v = classify(&delta);
        assert_eq!(v.bullet(), Some(Bullet::DistinctMatrices));
        assert_eq!(v.to_json()["witness"], json!([0, 1]));
        assert!(consistency_with_commutator(&delta).unwrap().non_commuting.is_some());
        let single = measure(&[(1.0, Mat2::shear(1.0))]);
        assert!(matches!(
            classify(&single),
            DichotomyVerdict::AbsolutelyContinuous(AcReason::PeriodicEquivalent { ell, .. }) if ell == 1.0
        ));
        let free = preset_free(1.0).unwrap();
        assert!(!consistency_with_commutator(&free).unwrap().localized);
        let b = Mat2::new(2.0, 1.0, 1.0, 1.0);
        let signs = measure(&[(1.5, b), (1.5, -b)]);
        let report = consistency_with_commutator(&signs).unwrap();
        assert!(!report.localized && report.pairs.iter().all(|p| p.commutes));
    }

    #[test]
    fn bullets() {
        let lengths = measure(&[(1.0, Mat2::shear(1.0)), (2.0, Mat2::shear(1.0))]);
        assert_eq!(classify(&lengths).bullet(), Some(Bullet::DistinctLengths));
        let free_lengths = measure(&[(1.0, Mat2::IDENTITY), (2.0, -Mat2::IDENTITY)]);
        assert_eq!(classify(&free_lengths), DichotomyVerdict::AbsolutelyContinuous(AcReason::FreeEquivalent));
        let sep = DisorderMeasure::new(
            "sep",
            vec![
                SupportAtom::new(1.0, VertexCondition::connecting(Mat2::IDENTITY), 0.5),
                SupportAtom::new(1.0, VertexCondition::Separating { x: 1.0, y: 0.0, w: 1.0, z: 0.0 }, 0.5),
            ],
        )
        .unwrap();
        let v = classify(&sep);
        assert_eq!(v.bullet(), Some(Bullet::Separating));
        assert_eq!(v.to_json()["witness"], json!([1]));
        assert!(consistency_with_commutator(&sep).is_err());
    }

    fn sl2() -> impl Strategy<Value = Mat2> {
        prop_oneof![
            Just(Mat2::IDENTITY),
            Just(-Mat2::IDENTITY),
            Just(Mat2::shear(1.0)),
            (-2.0..2.0f64).prop_map(Mat2::shear),
            (-3.0..3.0f64, -1.0..1.0f64, -2.0..2.0f64)
                .prop_map(|(t, lb, q)| Mat2::rotation(t) * Mat2::dilation(lb.exp()) * Mat2::shear(q)),
        ]
    }

    fn atoms() -> impl Strategy<Value = Vec<(f64, Mat2, bool)>> {
        let ell = prop_oneof![Just(1.0), Just(2.0), 0.5..3.0f64];
        proptest::collection::vec((ell, sl2(), any::<bool>()), 1..5)
    }

    fn build(raw: &[(f64, Mat2, bool)]) -> Option<DisorderMeasure> {
        let w = 1.0 / raw.len() as f64;
        let atoms = raw
            .iter()
            .map(|&(l, b, flip)| SupportAtom::new(l, VertexCondition::connecting(if flip { -b } else { b }), w))
            .collect();
        DisorderMeasure::merged("random", atoms).ok()
    }

    proptest! {
        #[test]
        fn classify_depends_on_support_up_to_sign(raw in atoms(), perm_seed in any::<u64>(), weights in proptest::collection::vec(0.1..1.0f64, 5)) {
            let Some(m) = build(&raw) else { return Ok(()) };
            let base = classify(&m);
            let mut atoms: Vec<SupportAtom> = m.atoms().to_vec();
            let n = atoms.len();
            atoms.rotate_left((perm_seed % n as u64) as usize);
            let total: f64 = weights[..n].iter().sum();
            for (k, a) in atoms.iter_mut().enumerate() {
                a.weight = weights[k] / total;
                if (perm_seed >> k) & 1 == 1 {
                    a.condition = VertexCondition::connecting(-a.condition.matrix().unwrap());
                }
            }
            let Ok(m2) = DisorderMeasure::merged("shuffled", atoms) else { return Ok(()) };
            let other = classify(&m2);
            prop_assert_eq!(base.is_localized(), other.is_localized());
            prop_assert_eq!(base.bullet(), other.bullet());
        }

        #[test]
        fn witnesses_retrigger(raw in atoms()) {
            let Some(m) = build(&raw) else { return Ok(()) };
            if let DichotomyVerdict::Localized { witness, .. } = classify(&m) {
                let sub: Vec<SupportAtom> = witness.iter().map(|&i| m.atoms()[i]).collect();
                let sub = DisorderMeasure::merged("witness", sub).unwrap();
                prop_assert!(classify(&sub).is_localized());
            }
        }

        #[test]
        fn commutator_biconditional(raw in atoms()) {
            let Some(m) = build(&raw) else { return Ok(()) };
            prop_assert!(consistency_with_commutator(&m).is_ok());
        }
    }
}
