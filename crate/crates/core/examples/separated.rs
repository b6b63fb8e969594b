//! A box cut by Dirichlet vertices splits into independent segments.
//!
//! cargo run --example separated

use pointlab::model::{sample_realization, DisorderMeasure, SupportAtom, VertexCondition};
use pointlab::spectra::{eigenpairs, eigenvalues, separated_spectrum, FiniteBox, DEFAULT_TOL};
use pointlab::Mat2;

fn main() -> pointlab::Result<()> {
    let measure = DisorderMeasure::new(
        "delta with cuts",
        vec![
            SupportAtom::new(1.0, VertexCondition::connecting(Mat2::shear(0.7)), 0.8),
            SupportAtom::new(1.3, VertexCondition::Separating { x: 1.0, y: 0.0, w: 1.0, z: 0.0 }, 0.2),
        ],
    )?;
    let bx = FiniteBox::neumann(&sample_realization(&measure, 3, 1..=25)?)?;
    let window = (0.0, 20.0);

    let parts = separated_spectrum(&bx, window, DEFAULT_TOL)?;
    for part in &parts {
        println!(
            "cells {:>2}..={:<2} [{:>6.2}, {:>6.2}]  {} eigenvalues",
            part.segment.first,
            part.segment.last,
            part.start,
            part.end,
            part.eigenvalues.len()
        );
    }
    let merged: usize = parts.iter().map(|p| p.eigenvalues.len()).sum();
    println!("whole box: {} eigenvalues, sum over segments: {merged}", eigenvalues(&bx, window, DEFAULT_TOL)?.len());

    // each eigenfunction lives on a single segment
    for pair in eigenpairs(&bx, (0.0, 3.0), DEFAULT_TOL)? {
        println!("E = {:>8.5}  support cells {:?}", pair.energy, pair.support);
    }
    Ok(())
}
