//! Plain DFT conventions: no scaling forward, `1/N` backward, indices mod N.

use analytic_pr::dsp::{dft, idft, mod_index, Signal};

fn main() -> analytic_pr::error::Result<()> {
    let delta = Signal::from_real(&[1.0, 0.0, 0.0, 0.0])?;
    println!("dft(delta)    = {:?}", dft(&delta).re());

    let constant = Signal::from_real(&[1.0; 4])?;
    println!("dft(constant) = {:?}", dft(&constant).re());

    let z = Signal::from_parts(&[0.5, -1.0, 2.0, 0.25, 1.5], &[1.0, 0.0, -0.5, 0.75, 0.0])?;
    let back = idft(&dft(&z));
    let err = (0..z.n()).map(|j| (back[j] - z[j]).norm()).fold(0.0, f64::max);
    println!("max |idft(dft(z)) - z| = {err:.2e}");

    println!("index -1 mod 5 = {}, z.at(-1) = {}", mod_index(-1, 5), z.at(-1));
    Ok(())
}
