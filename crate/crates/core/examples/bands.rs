//! Band structure of the periodic Kronig–Penney chain.
//!
//! cargo run --example bands

use pointlab::lyapunov::{linspace, lyapunov_periodic};
use pointlab::model::preset_delta;
use pointlab::runner::bands;

fn main() -> pointlab::Result<()> {
    let measure = preset_delta(&[(1.0, 1.0)], 1.0)?;
    let atom = measure.atoms()[0].transfer_atom().expect("connecting atom");
    let grid = linspace(-2.0, 40.0, 421);
    let rows = bands(&measure, &grid)?;

    // band edges are where the in-band flag flips
    let mut edges = Vec::new();
    for w in rows.windows(2) {
        if w[0].in_band != w[1].in_band {
            edges.push(0.5 * (w[0].energy + w[1].energy));
        }
    }
    println!("band edges (grid resolution 0.1): {edges:.1?}");
    for r in rows.iter().step_by(40) {
        println!(
            "E = {:>6.2}  tr = {:>8.4}  {}  L = {:.4}",
            r.energy,
            r.trace,
            if r.in_band { "band" } else { "gap " },
            lyapunov_periodic(&atom, r.energy)?
        );
    }
    Ok(())
}
