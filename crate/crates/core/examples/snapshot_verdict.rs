//! One snapshot: bound the spectral amplitude from three probe
//! evolutions and decide whether the dynamics is non-Markovian.

use nmprobe::coupling::{PlateStack, build_channel};
use nmprobe::dephasing::Decision;
use nmprobe::probing::{AcritEstimate, ProbeBounds, ProbeSet, default_alpha_grid, verdict};
use nmprobe::qubit::QubitState;
use nmprobe::spectra::TwoPeakFamily;

pub fn run() -> nmprobe::Result<Decision> {
    let fam = TwoPeakFamily::from_wavelengths(0.7, 810.0, 818.0, 3.0)?;
    let stack = PlateStack::aligned(6.0, 1, 0.0089)?;
    let rho = QubitState::plus();
    let mut phi = Vec::new();
    for xi in [fam.xi1(), fam.xi2(), fam.xi3()] {
        phi.push(build_channel(&stack, &xi)?.apply(&rho)?);
    }
    let probes = ProbeSet {
        rho: [rho.clone(), rho.clone(), rho],
        phi: [phi[0].clone(), phi[1].clone(), phi[2].clone()],
    };
    let bounds = ProbeBounds::compute(&probes, &default_alpha_grid())?;
    println!(
        "A in [{:.4}, {:.4}] (alpha2 = {}, alpha3 = {})",
        bounds.best_lower(),
        bounds.best_upper(),
        bounds.alpha2,
        bounds.alpha3
    );
    let v = verdict(bounds, AcritEstimate::known(fam.delta_eta(), 50.0)?)?;
    println!("A_crit = {:?} -> {}", v.a_crit.value, v.decision);
    Ok(v.decision)
}

fn main() -> nmprobe::Result<()> {
    run().map(|_| ())
}
