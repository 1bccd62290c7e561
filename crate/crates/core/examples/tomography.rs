//! Simulated three-basis tomography with bootstrap error bars.

use nmprobe::qubit::{QubitState, trace_distance};
use nmprobe::tomography::{TomographyRecord, bootstrap, reconstruct, sample_counts};

pub fn run() -> nmprobe::Result<(f64, f64)> {
    let truth = QubitState::from_bloch([0.5, -0.2, 0.7])?;
    let counts = sample_counts(&truth, 10_000, 42)?;
    let estimate = reconstruct(&counts);
    let err = trace_distance(&truth, &estimate);
    println!("estimate = {:?}, D(truth, estimate) = {err:.2e}", estimate.bloch());

    let record = TomographyRecord::measured(counts);
    let summary = bootstrap(&[record], 500, 1, true, |s| Ok(vec![trace_distance(&s[0], &truth)]))?;
    println!("bootstrap D = {:.2e} ± {:.2e}", summary.mean[0], summary.std[0]);
    Ok((err, summary.std[0]))
}

fn main() -> nmprobe::Result<()> {
    run().map(|_| ())
}
