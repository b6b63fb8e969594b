//! Decay rates of box eigenfunctions against the Lyapunov exponent per
//! unit length at the same energy.
//!
//! cargo run --release --example decay

use pointlab::lyapunov::lyapunov_mc;
use pointlab::model::{mean_length, preset_delta, sample_realization};
use pointlab::spectra::{decay_fit, eigenpairs, FiniteBox, DEFAULT_TOL};

fn main() -> pointlab::Result<()> {
    let measure = preset_delta(&[(0.0, 0.5), (1.0, 0.5)], 1.0)?;
    let bx = FiniteBox::neumann(&sample_realization(&measure, 42, -199..=200)?)?;
    let pairs = eigenpairs(&bx, (0.5, 1.2), DEFAULT_TOL)?;
    let ell = mean_length(&measure);

    let mut ratios = Vec::new();
    println!("{:>10} {:>6} {:>8} {:>8} {:>6}", "E", "center", "rate", "Lbar", "r2");
    for pair in pairs.iter().step_by(pairs.len() / 20 + 1) {
        let fit = match decay_fit(pair) {
            Ok(f) => f,
            Err(e) => {
                println!("{:>10.5} {e}", pair.energy);
                continue;
            }
        };
        let lbar = lyapunov_mc(&measure, pair.energy, 100_000, 8, 1)?.value / ell;
        println!("{:>10.5} {:>6} {:>8.4} {:>8.4} {:>6.3}", pair.energy, fit.center, fit.rate, lbar, fit.r_squared);
        ratios.push(fit.rate / lbar);
    }
    ratios.sort_by(f64::total_cmp);
    println!("median rate / Lbar = {:.3}", ratios[ratios.len() / 2]);
    Ok(())
}
