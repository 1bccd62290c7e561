//! One-dimensional minimization of oscillatory functions: a uniform scan
//! brackets every local minimum, then golden-section search refines each.

use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for a minimum of `f` in `[a, b]`.
pub fn golden_section<F>(f: &F, mut a: f64, mut b: f64, tol: f64, max_iter: usize) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..max_iter {
        if (b - a).abs() <= tol * (1.0 + a.abs().max(b.abs())) {
            let x = 0.5 * (a + b);
            let fx = f(x);
            let best = [(x, fx), (c, fc), (d, fd)]
                .into_iter()
                .min_by(|p, q| p.1.total_cmp(&q.1))
                .unwrap();
            return Ok(best);
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    Err(Error::NonConvergence(format!(
        "golden-section search stalled on [{a}, {b}] after {max_iter} iterations"
    )))
}

/// Global minimum of `f` on `[lo, hi]`: scan with `step`, refine each
/// bracketed local minimum (and the endpoints) with golden-section search.
/// Non-finite values (`+∞` marks "undefined here") are skipped.
pub fn minimize_scan<F>(f: F, lo: f64, hi: f64, step: f64) -> Result<Option<(f64, f64)>>
where
    F: Fn(f64) -> f64,
{
    let n = ((hi - lo) / step).ceil().max(2.0) as usize;
    let xs: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut best: Option<(f64, f64)> = None;
    let mut consider = |cand: (f64, f64)| {
        if cand.1.is_finite() && best.is_none_or(|b| cand.1 < b.1) {
            best = Some(cand);
        }
    };
    for i in 0..=n {
        if !ys[i].is_finite() {
            continue;
        }
        let left = if i > 0 { ys[i - 1] } else { f64::INFINITY };
        let right = if i < n { ys[i + 1] } else { f64::INFINITY };
        if ys[i] <= left && ys[i] <= right {
            let a = xs[i.saturating_sub(1)];
            let b = xs[(i + 1).min(n)];
            consider((xs[i], ys[i]));
            if left.is_finite() || right.is_finite() {
                consider(golden_section(&f, a, b, 1e-13, 400)?);
            }
        }
    }
    Ok(best)
}
