//! Distinguishability of two qubit states across the α range.

use nmprobe::qubit::{QubitState, alpha_fidelity, purity, trace_distance, von_neumann_entropy};

pub fn run() -> nmprobe::Result<Vec<(f64, f64)>> {
    let a = QubitState::from_bloch([0.8, 0.0, 0.1])?;
    let b = QubitState::from_bloch([0.0, 0.6, -0.3])?;
    println!("D(a, b) = {:.6}", trace_distance(&a, &b));
    println!("purity(a) = {:.4}, S(a) = {:.4} nats", purity(&a), von_neumann_entropy(&a));
    let mut out = Vec::new();
    for alpha in [0.5, 0.6, 0.7, 0.8, 0.9, 0.99] {
        let f = alpha_fidelity(&a, &b, alpha)?;
        println!("F_{alpha:.2}(a, b) = {f:.6}");
        out.push((alpha, f));
    }
    Ok(out)
}

fn main() -> nmprobe::Result<()> {
    run().map(|_| ())
}
