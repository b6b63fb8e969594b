//! Spreading of a wave packet started on [-1, 1], random versus free.
//!
//! cargo run --release --example dynamics

use pointlab::model::{preset_delta, preset_free, sample_realization};
use pointlab::spectra::{dynamical_moment, FiniteBox};

fn main() -> pointlab::Result<()> {
    let times = [0.0, 10.0, 100.0, 1e3, 1e4];
    let window = (0.3, 1.0);
    for measure in [preset_delta(&[(0.0, 0.5), (1.0, 0.5)], 1.0)?, preset_free(1.0)?] {
        let bx = FiniteBox::neumann(&sample_realization(&measure, 42, -199..=200)?)?;
        let series = dynamical_moment(&bx, window, 2.0, (-1.0, 1.0), &times)?;
        println!("{} ({} modes, projected weight {:.3})", measure.name, series.modes, series.weight);
        for (t, m) in series.times.iter().zip(&series.moments) {
            println!("  t = {t:>7}  <X^2> = {m:.4}");
        }
    }
    Ok(())
}
