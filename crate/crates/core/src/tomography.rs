//! Polarization state tomography: simulated binomial counts in the H/V,
//! D/A and R/L bases, linear inversion with projection onto physical
//! states, and parametric-bootstrap error bars.

use std::fmt;
use std::io;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qubit::QubitState;

/// Projective measurement basis. The first outcome is `H`, `D` or `R`
/// with `D = (H+V)/√2`, `R = (H+iV)/√2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    #[serde(rename = "HV")]
    Hv,
    #[serde(rename = "DA")]
    Da,
    #[serde(rename = "RL")]
    Rl,
}

impl Basis {
    pub const ALL: [Basis; 3] = [Basis::Hv, Basis::Da, Basis::Rl];

    /// Bloch component measured by this basis.
    fn axis(self) -> usize {
        match self {
            Basis::Da => 0,
            Basis::Rl => 1,
            Basis::Hv => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Basis::Hv => "HV",
            Basis::Da => "DA",
            Basis::Rl => "RL",
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Basis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "HV" => Ok(Basis::Hv),
            "DA" => Ok(Basis::Da),
            "RL" => Ok(Basis::Rl),
            other => Err(Error::Config(format!("unknown basis {other:?}"))),
        }
    }
}

/// Probability of the first outcome of `basis`.
pub fn outcome_probability(rho: &QubitState, basis: Basis) -> f64 {
    (0.5 * (1.0 + rho.bloch()[basis.axis()])).clamp(0.0, 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisCounts {
    pub basis: Basis,
    pub plus: u64,
    pub minus: u64,
    pub shots: u64,
}

/// Counts for one state, one row per basis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountData {
    pub rows: Vec<BasisCounts>,
}

impl CountData {
    pub fn new(rows: Vec<BasisCounts>) -> Result<Self> {
        for b in Basis::ALL {
            match rows.iter().filter(|r| r.basis == b).count() {
                1 => {}
                0 => return Err(Error::Protocol(format!("missing {b} counts"))),
                _ => return Err(Error::Protocol(format!("duplicate {b} counts"))),
            }
        }
        if rows.len() != 3 {
            return Err(Error::Protocol(format!("expected 3 count rows, got {}", rows.len())));
        }
        for r in &rows {
            if r.shots == 0 || r.plus + r.minus != r.shots {
                return Err(Error::Protocol(format!(
                    "{} counts {}+{} do not add up to {} shots",
                    r.basis, r.plus, r.minus, r.shots
                )));
            }
        }
        Ok(CountData { rows })
    }

    fn row(&self, basis: Basis) -> &BasisCounts {
        self.rows.iter().find(|r| r.basis == basis).unwrap()
    }

    /// Observed frequency of the first outcome of `basis`.
    pub fn frequency(&self, basis: Basis) -> f64 {
        let r = self.row(basis);
        r.plus as f64 / r.shots as f64
    }

    pub fn read_csv<R: io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let rows = rdr.deserialize().collect::<std::result::Result<Vec<BasisCounts>, _>>()?;
        Self::new(rows)
    }

    pub fn write_csv<W: io::Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        for r in &self.rows {
            wtr.serialize(r)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Draws `shots` binomial trials per basis from the Born probabilities of
/// `rho`.
pub fn sample_counts_with<R: Rng + ?Sized>(rho: &QubitState, shots: u64, rng: &mut R) -> Result<CountData> {
    let probs = Basis::ALL.map(|b| outcome_probability(rho, b));
    sample_from_probabilities(&probs, shots, rng)
}

/// [`sample_counts_with`] on a fresh generator seeded with `seed`.
pub fn sample_counts(rho: &QubitState, shots: u64, seed: u64) -> Result<CountData> {
    sample_counts_with(rho, shots, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn sample_from_probabilities<R: Rng + ?Sized>(probs: &[f64; 3], shots: u64, rng: &mut R) -> Result<CountData> {
    if shots == 0 {
        return Err(Error::Domain {
            name: "shots",
            value: 0.0,
            expected: "at least 1",
        });
    }
    let rows = Basis::ALL
        .iter()
        .zip(probs)
        .map(|(&basis, &p)| {
            let dist = Binomial::new(shots, p).map_err(|e| Error::Protocol(format!("binomial({shots}, {p}): {e}")))?;
            let plus = dist.sample(rng);
            Ok(BasisCounts {
                basis,
                plus,
                minus: shots - plus,
                shots,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CountData { rows })
}

/// Linear inversion `rᵢ = 2pᵢ − 1`, projected onto the Bloch ball when
/// shot noise pushes it outside.
pub fn reconstruct(counts: &CountData) -> QubitState {
    let mut r = [0.0; 3];
    for b in Basis::ALL {
        r[b.axis()] = 2.0 * counts.frequency(b) - 1.0;
    }
    let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 1.0 {
        r.iter_mut().for_each(|x| *x /= norm);
    }
    QubitState::from_bloch(r).expect("Bloch vector inside the unit ball")
}

/// A measured state together with the data it came from; `counts` is
/// `None` for exact (noiseless) probabilities.
#[derive(Clone, Debug)]
pub struct TomographyRecord {
    pub state: QubitState,
    pub counts: Option<CountData>,
}

impl TomographyRecord {
    pub fn measured(counts: CountData) -> Self {
        TomographyRecord {
            state: reconstruct(&counts),
            counts: Some(counts),
        }
    }

    /// Noiseless tomography: the reconstruction is the true state.
    pub fn exact(state: QubitState) -> Self {
        TomographyRecord { state, counts: None }
    }

    pub fn simulate(rho: &QubitState, shots: Option<u64>, seed: u64) -> Result<Self> {
        match shots {
            None => Ok(Self::exact(rho.clone())),
            Some(n) => Ok(Self::measured(sample_counts(rho, n, seed)?)),
        }
    }

    fn resample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<QubitState> {
        match &self.counts {
            None => Ok(self.state.clone()),
            Some(c) => {
                let rows = c
                    .rows
                    .iter()
                    .map(|r| {
                        let p = r.plus as f64 / r.shots as f64;
                        let dist = Binomial::new(r.shots, p)
                            .map_err(|e| Error::Protocol(format!("binomial({}, {p}): {e}", r.shots)))?;
                        let plus = dist.sample(rng);
                        Ok(BasisCounts {
                            plus,
                            minus: r.shots - plus,
                            ..*r
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(reconstruct(&CountData { rows }))
            }
        }
    }
}

/// Bootstrap summary for a vector of derived quantities.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BootstrapSummary {
    pub mean: Vec<f64>,
    /// Sample standard deviation (`n − 1` normalization).
    pub std: Vec<f64>,
    pub successes: usize,
    pub failures: usize,
}

/// Parametric bootstrap: each of `trials` resamples redraws every record's
/// counts from its observed frequencies and evaluates `f` on the
/// reconstructed states. Resample `b` uses stream `b` of a generator
/// seeded with `seed`, so serial and parallel runs agree exactly.
/// Resamples where `f` fails are dropped and counted.
pub fn bootstrap<F>(records: &[TomographyRecord], trials: usize, seed: u64, parallel: bool, f: F) -> Result<BootstrapSummary>
where
    F: Fn(&[QubitState]) -> Result<Vec<f64>> + Sync,
{
    let point = f(&records.iter().map(|r| r.state.clone()).collect::<Vec<_>>())?;
    if records.iter().all(|r| r.counts.is_none()) {
        return Ok(BootstrapSummary {
            std: vec![0.0; point.len()],
            mean: point,
            successes: 0,
            failures: 0,
        });
    }
    let one = |b: usize| -> Result<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(b as u64);
        let states = records
            .iter()
            .map(|r| r.resample(&mut rng))
            .collect::<Result<Vec<_>>>()?;
        let v = f(&states)?;
        if v.len() != point.len() || v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonConvergence("non-finite bootstrap value".into()));
        }
        Ok(v)
    };
    let results: Vec<Result<Vec<f64>>> = if parallel {
        (0..trials).into_par_iter().map(one).collect()
    } else {
        (0..trials).map(one).collect()
    };
    let ok: Vec<Vec<f64>> = results.into_iter().filter_map(|r| r.ok()).collect();
    let failures = trials - ok.len();
    if ok.is_empty() {
        return Err(Error::NonConvergence(format!("all {trials} bootstrap resamples failed")));
    }
    if failures > 0 {
        log::warn!("{failures} of {trials} bootstrap resamples failed");
    }
    let (mean, std) = (0..point.len())
        .map(|k| mean_std(ok.iter().map(|v| v[k]), point[k]))
        .unzip();
    Ok(BootstrapSummary {
        mean,
        std,
        successes: ok.len(),
        failures,
    })
}

/// Mean and sample standard deviation, accumulated relative to `shift`
/// to avoid cancellation.
fn mean_std(values: impl Iterator<Item = f64>, shift: f64) -> (f64, f64) {
    let (mut n, mut s, mut ss) = (0usize, 0.0, 0.0);
    for v in values {
        let d = v - shift;
        n += 1;
        s += d;
        ss += d * d;
    }
    let nf = n as f64;
    let mean = shift + s / nf;
    let var = if n > 1 {
        ((ss - s * s / nf) / (nf - 1.0)).max(0.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}
