//! Localization verdicts for a handful of measures.
//!
//! cargo run --example dichotomy

use pointlab::dichotomy::classify;
use pointlab::model::{
    preset_delta, preset_delta_prime, preset_free, preset_gauge, preset_radial_tree, DisorderMeasure, SupportAtom,
    VertexCondition,
};
use pointlab::Mat2;

fn main() -> pointlab::Result<()> {
    let mixed_lengths = DisorderMeasure::new(
        "two lengths",
        vec![
            SupportAtom::new(1.0, VertexCondition::connecting(Mat2::shear(0.5)), 0.5),
            SupportAtom::new(1.5, VertexCondition::connecting(Mat2::shear(0.5)), 0.5),
        ],
    )?;
    let dirichlet_break = DisorderMeasure::new(
        "dirichlet break",
        vec![
            SupportAtom::new(1.0, VertexCondition::connecting(Mat2::IDENTITY), 0.9),
            SupportAtom::new(1.0, VertexCondition::Separating { x: 1.0, y: 0.0, w: 1.0, z: 0.0 }, 0.1),
        ],
    )?;
    let models = [
        preset_free(1.0)?,
        preset_delta(&[(2.0, 1.0)], 1.0)?,
        preset_delta(&[(0.0, 0.5), (1.0, 0.5)], 1.0)?,
        preset_delta_prime(&[(-1.0, 0.3), (1.0, 0.7)], 0.8)?,
        preset_gauge(&[(0.5, 0.5), (3.0, 0.5)], 1.0)?,
        preset_radial_tree(&[((0.0, 2), 1.0)], 1.0)?,
        mixed_lengths,
        dirichlet_break,
    ];
    for m in &models {
        let verdict = classify(m);
        println!("{:<16} {}", m.name, verdict.to_json());
    }
    Ok(())
}
