//! Two-peak photon spectrum: separation, decoherence function and the
//! spectral fidelity between the single-peak references.

use nmprobe::spectra::{TwoPeakFamily, spectral_alpha_fidelity, two_peak_coherence};

pub fn run() -> nmprobe::Result<f64> {
    let fam = TwoPeakFamily::from_wavelengths(0.7, 810.0, 818.0, 3.0)?;
    println!("sigma = {:.4e} rad/s, delta_eta = {:.4}", fam.sigma(), fam.delta_eta());
    for tau in [0.0, 0.1, 0.2, 0.4, 0.8] {
        println!("tau = {tau:.1}  |kappa| = {:.6}", two_peak_coherence(fam.a, fam.delta_eta(), tau));
    }
    let f = spectral_alpha_fidelity(&fam.xi2(), &fam.xi3(), 0.5)?;
    println!("F_1/2(xi2, xi3) = {f:.3e}");
    Ok(fam.delta_eta())
}

fn main() -> nmprobe::Result<()> {
    run().map(|_| ())
}
