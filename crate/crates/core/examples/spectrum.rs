//! Eigenvalues of a random δ box, checked against the finite-difference
//! reference and the Prüfer count.
//!
//! cargo run --release --example spectrum

use pointlab::model::{preset_delta, sample_realization};
use pointlab::spectra::{eigenvalues, fd_oracle, pruefer_count, FiniteBox, DEFAULT_TOL};

fn main() -> pointlab::Result<()> {
    let measure = preset_delta(&[(-1.0, 0.3), (0.0, 0.3), (2.0, 0.4)], 1.0)?;
    let bx = FiniteBox::neumann(&sample_realization(&measure, 11, 1..=30)?)?;
    let window = (-2.0, 15.0);

    let exact = eigenvalues(&bx, window, DEFAULT_TOL)?;
    let fd = fd_oracle(&bx, 1e-3, window)?;
    println!("{} eigenvalues in [{}, {})", exact.len(), window.0, window.1);
    for (i, (e, f)) in exact.iter().zip(&fd).enumerate() {
        println!("{i:>3} {e:>20.12} {f:>20.12} {:>10.2e}", (e - f).abs() / e.abs().max(1.0));
    }

    for e in [0.0, 5.0, 10.0] {
        let below = exact.iter().filter(|&&x| x < e).count();
        let counted = pruefer_count(&bx, e) - pruefer_count(&bx, window.0);
        println!("E = {e}: {below} listed below, Prüfer count {counted}");
    }
    Ok(())
}
