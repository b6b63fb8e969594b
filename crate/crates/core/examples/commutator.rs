//! Commutator test for pairs of atoms, alongside the dichotomy verdict.
//!
//! cargo run --example commutator

use pointlab::dichotomy::{classify, consistency_with_commutator};
use pointlab::model::{preset_delta, preset_gauge, DisorderMeasure, SupportAtom, VertexCondition};
use pointlab::sl2::{commutator_scan, TransferAtom};
use pointlab::Mat2;

fn main() -> pointlab::Result<()> {
    let a = TransferAtom::new(1.0, Mat2::shear(0.0));
    let b = TransferAtom::new(1.0, Mat2::shear(1.0));
    let c = TransferAtom::new(1.0, Mat2::shear(0.0).scale(-1.0));
    println!("max |[M_a, M_b]| over probe energies: {:.3e}", commutator_scan(&a, &b)?);
    println!("max |[M_a, M_-a]| over probe energies: {:.3e}", commutator_scan(&a, &c)?);

    let sign_flip = DisorderMeasure::new(
        "sign flip",
        vec![
            SupportAtom::new(1.0, VertexCondition::connecting(Mat2::IDENTITY), 0.5),
            SupportAtom::new(1.0, VertexCondition::connecting(Mat2::IDENTITY.scale(-1.0)), 0.5),
        ],
    )?;
    for m in [preset_delta(&[(0.0, 0.5), (1.0, 0.5)], 1.0)?, preset_gauge(&[(0.5, 0.5), (2.0, 0.5)], 1.0)?, sign_flip] {
        let report = consistency_with_commutator(&m)?;
        println!(
            "{:<10} localized: {:<5} non-commuting pair: {:?}  verdict: {}",
            m.name,
            report.localized,
            report.non_commuting,
            classify(&m).reason()
        );
    }
    Ok(())
}
