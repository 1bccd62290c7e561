//! Thickness sweep with shot noise, written as CSV and SVG to a temporary
//! directory.

use nmprobe::config::ExperimentConfig;
use nmprobe::experiment::{RunOptions, run_sweep};
use nmprobe::report::sweep_svg;

pub fn run() -> nmprobe::Result<usize> {
    let cfg = ExperimentConfig {
        a_true: 0.5122,
        lambda2_nm: 830.0,
        thicknesses_mm: vec![1.0, 2.0, 3.0, 4.0, 6.0],
        mc_trials: 100,
        ..Default::default()
    };
    let report = run_sweep(&cfg, RunOptions { seed: Some(3), ..Default::default() })?;
    let dir = std::env::temp_dir().join("nmprobe-sweep-example");
    std::fs::create_dir_all(&dir)?;
    report.write_csv(std::fs::File::create(dir.join("sweep.csv"))?)?;
    std::fs::write(dir.join("sweep.svg"), sweep_svg(&report.rows, "A = 0.5122, 810/830 nm"))?;
    for r in &report.rows {
        println!("{:>4} mm  [{:.3}, {:.3}]  {}", r.thickness_mm, r.best_lower(), r.best_upper(), r.verdict);
    }
    println!("wrote {}", dir.display());
    Ok(report.rows.len())
}

fn main() -> nmprobe::Result<()> {
    run().map(|_| ())
}
