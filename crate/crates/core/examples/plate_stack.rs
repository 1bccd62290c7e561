//! Polarization evolution through birefringent plates, aligned and
//! randomly oriented.

use nmprobe::coupling::{PlateStack, build_channel};
use nmprobe::qubit::{QubitState, trace_distance};
use nmprobe::spectra::TwoPeakFamily;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run() -> nmprobe::Result<Vec<f64>> {
    let fam = TwoPeakFamily::from_wavelengths(0.5, 810.0, 830.0, 3.0)?;
    let plus = QubitState::plus();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut coherences = Vec::new();
    for mm in [1.0, 2.0, 4.0, 8.0] {
        let aligned = build_channel(&PlateStack::aligned(mm, 1, 0.0089)?, &fam.xi1())?.apply(&plus)?;
        let random = build_channel(&PlateStack::random(mm, 3, 0.0089, &mut rng)?, &fam.xi1())?.apply(&plus)?;
        let c = aligned.entry(0, 1).norm() * 2.0;
        println!(
            "{mm:>4} mm  |kappa| = {c:.5}  aligned vs random stack: D = {:.5}",
            trace_distance(&aligned, &random)
        );
        coherences.push(c);
    }
    Ok(coherences)
}

fn main() -> nmprobe::Result<()> {
    run().map(|_| ())
}
