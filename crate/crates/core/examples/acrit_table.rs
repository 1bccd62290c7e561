//! Critical amplitude below which no backflow occurs, numeric versus fit.

use nmprobe::experiment::acrit_table;

pub fn run() -> nmprobe::Result<f64> {
    let etas: Vec<f64> = (2..=20).step_by(2).map(f64::from).collect();
    let mut worst = 0.0f64;
    println!("{:>6} {:>10} {:>10}", "eta", "numeric", "fit");
    for row in acrit_table(&etas, 50.0)? {
        let numeric = row.numeric.map_or("-".to_string(), |v| format!("{v:.6}"));
        println!("{:>6.1} {numeric:>10} {:>10.6}", row.delta_eta, row.fit);
        worst = worst.max(row.abs_diff().unwrap_or(0.0));
    }
    println!("max |numeric - fit| = {worst:.2e}");
    Ok(worst)
}

fn main() -> nmprobe::Result<()> {
    run().map(|_| ())
}
