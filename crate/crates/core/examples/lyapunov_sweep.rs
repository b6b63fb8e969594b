//! Lyapunov exponent of the Bernoulli δ model against the periodic atoms.
//!
//! cargo run --release --example lyapunov_sweep

use pointlab::lyapunov::{exceptional_scan, linspace, lyapunov_curve, lyapunov_periodic};
use pointlab::model::preset_delta;

fn main() -> pointlab::Result<()> {
    let measure = preset_delta(&[(0.0, 0.5), (1.0, 0.5)], 1.0)?;
    let grid = linspace(0.5, 20.0, 40);
    let curve = lyapunov_curve(&measure, &grid, 100_000, 16, 7)?;

    let atoms: Vec<_> = measure.atoms().iter().filter_map(|a| a.transfer_atom()).collect();
    println!("{:>8} {:>10} {:>10} {:>10} {:>10}", "E", "L", "stderr", "L(α=0)", "L(α=1)");
    for est in &curve.estimates {
        println!(
            "{:>8.3} {:>10.5} {:>10.1e} {:>10.5} {:>10.5}",
            est.energy,
            est.value,
            est.stderr,
            lyapunov_periodic(&atoms[0], est.energy)?,
            lyapunov_periodic(&atoms[1], est.energy)?,
        );
    }

    match exceptional_scan(&curve, 0.01) {
        Ok(runs) => println!("runs with L < 0.01: {runs:?}"),
        Err(e) => println!("scan not resolved: {e}"),
    }
    Ok(())
}
