//! Build an analytic signal from a real one and check its spectrum.

use analytic_pr::analytic::{analytic_from_real, hilbert, hilbert_matrix, is_analytic};
use analytic_pr::dsp::dft;

fn main() -> analytic_pr::error::Result<()> {
    let x = [1.0, 0.3, -0.7, 2.0, -1.1, 0.4, 0.9, -0.2];
    let z = analytic_from_real(&x)?;
    let hx = hilbert(&x)?;

    println!("  n        x        Hx");
    for (j, (a, b)) in x.iter().zip(&hx).enumerate() {
        println!("{j:3} {a:8.4} {b:9.4}");
    }
    println!("analytic: {}", is_analytic(z.signal(), 1e-10));

    let spectrum = dft(z.signal());
    for (k, c) in spectrum.as_slice().iter().enumerate() {
        println!("zhat[{k}] = {:+.4} {:+.4}i", c.re, c.im);
    }

    // The Hilbert transform is a fixed real matrix.
    let h = hilbert_matrix(x.len())?;
    let hx2 = h.apply(&x)?;
    let diff = hx.iter().zip(&hx2).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("max |H x - hilbert(x)| = {diff:.2e}");
    Ok(())
}
