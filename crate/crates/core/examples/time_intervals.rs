//! Classify rescaled times by whether backflow is guaranteed for every
//! amplitude consistent with the bounds.

use nmprobe::dephasing::Decision;
use nmprobe::experiment::run_intervals;

pub fn run() -> nmprobe::Result<usize> {
    let report = run_intervals(15.7, (0.62, 0.74), 5.0, 0.001)?;
    for iv in &report.intervals {
        println!("[{:.3}, {:.3}]  {}", iv.start, iv.end, iv.label);
    }
    Ok(report.intervals.iter().filter(|iv| iv.label == Decision::NonMarkovianVerified).count())
}

fn main() -> nmprobe::Result<()> {
    run().map(|_| ())
}
