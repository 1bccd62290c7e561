//! Simulated experiment pipeline: plate stack → evolved probes →
//! tomography → bounds with bootstrap error bars → verdict, one row per
//! plate thickness.

use std::io;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, PlateAngles};
use crate::coupling::{PlateStack, apply, build_channel, build_channel_strict};
use crate::dephasing::{Decision, a_crit_fit, a_crit_numeric, classify_intervals, merge_intervals, tau_grid, LabeledInterval};
use crate::error::{Error, Result};
use crate::probing::{
    AcritEstimate, AcritSource, Flag, Flags, ProbeBounds, ProbeSet, Tightest, decide, delta_eta_lower_bound, format_flags,
    optimize_alpha, parse_flags, raw_bounds_at, verdict,
};
use crate::qubit::QubitState;
use crate::spectra::TwoPeakFamily;
use crate::tomography::{TomographyRecord, bootstrap};

pub const CSV_HEADER: [&str; 14] = [
    "thickness_mm",
    "tau",
    "lower_fid",
    "upper_fid",
    "lower_fid_std",
    "upper_fid_std",
    "lower_td",
    "upper_td",
    "lower_td_std",
    "upper_td_std",
    "acrit",
    "acrit_source",
    "verdict",
    "flags",
];

const STREAM_ANGLES: u64 = 1;
const STREAM_COUNTS: u64 = 2;
const STREAM_BOOTSTRAP: u64 = 3;

/// `index`-th 64-bit word of stream `stream` of a generator seeded with
/// `master`. Independent of evaluation order.
pub fn derive_seed(master: u64, stream: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(stream);
    rng.set_word_pos(2 * index as u128);
    rng.next_u64()
}

/// Run-time switches that are not part of the experiment description.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Overrides `config.seed`.
    pub seed: Option<u64>,
    /// Forces exact probabilities.
    pub noiseless: bool,
    /// Escalates numeric warnings to errors.
    pub strict: bool,
    /// Serial evaluation (results are identical either way).
    pub serial: bool,
}

/// One figure point: the CSV schema.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub thickness_mm: f64,
    pub tau: f64,
    pub lower_fid: f64,
    pub upper_fid: f64,
    pub lower_fid_std: f64,
    pub upper_fid_std: f64,
    pub lower_td: f64,
    pub upper_td: f64,
    pub lower_td_std: f64,
    pub upper_td_std: f64,
    pub acrit: Option<f64>,
    pub acrit_source: AcritSource,
    pub verdict: Decision,
    pub flags: Flags,
}

impl SweepRow {
    pub fn best_lower(&self) -> f64 {
        self.lower_fid.max(self.lower_td)
    }

    pub fn best_upper(&self) -> f64 {
        self.upper_fid.min(self.upper_td)
    }

    fn record(&self) -> Vec<String> {
        let f = |x: f64| x.to_string();
        vec![
            f(self.thickness_mm),
            f(self.tau),
            f(self.lower_fid),
            f(self.upper_fid),
            f(self.lower_fid_std),
            f(self.upper_fid_std),
            f(self.lower_td),
            f(self.upper_td),
            f(self.lower_td_std),
            f(self.upper_td_std),
            self.acrit.map(f).unwrap_or_default(),
            self.acrit_source.to_string(),
            self.verdict.to_string(),
            format_flags(&self.flags),
        ]
    }

    fn from_record(rec: &csv::StringRecord) -> Result<Self> {
        if rec.len() != CSV_HEADER.len() {
            return Err(Error::Config(format!("expected {} columns, got {}", CSV_HEADER.len(), rec.len())));
        }
        let num = |i: usize| -> Result<f64> {
            rec[i]
                .parse()
                .map_err(|_| Error::Config(format!("column {}: bad number {:?}", CSV_HEADER[i], &rec[i])))
        };
        Ok(SweepRow {
            thickness_mm: num(0)?,
            tau: num(1)?,
            lower_fid: num(2)?,
            upper_fid: num(3)?,
            lower_fid_std: num(4)?,
            upper_fid_std: num(5)?,
            lower_td: num(6)?,
            upper_td: num(7)?,
            lower_td_std: num(8)?,
            upper_td_std: num(9)?,
            acrit: if rec[10].is_empty() { None } else { Some(num(10)?) },
            acrit_source: rec[11].parse()?,
            verdict: rec[12].parse()?,
            flags: parse_flags(&rec[13])?,
        })
    }
}

/// Per-row details that do not fit the CSV schema.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RowDetail {
    pub thickness_mm: f64,
    pub plate_angles: Vec<f64>,
    pub alpha2: Option<f64>,
    pub alpha3: Option<f64>,
    pub delta_eta_lower_bound: Option<f64>,
    pub delta_eta_alpha: Option<f64>,
    pub acrit_fit: Option<f64>,
    pub acrit_numeric: Option<f64>,
    pub bootstrap_successes: usize,
    pub bootstrap_failures: usize,
    pub notes: Vec<String>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Metadata {
    pub tool: &'static str,
    pub version: &'static str,
    pub seed: u64,
    pub noiseless: bool,
    pub strict: bool,
    pub sigma_hz: f64,
    pub delta_eta: f64,
    pub config: ExperimentConfig,
    pub rows: Vec<RowDetail>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub metadata: Metadata,
}

impl SweepReport {
    pub fn write_csv<W: io::Write>(&self, writer: W) -> Result<()> {
        write_rows(&self.rows, writer)
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("CSV is UTF-8"))
    }

    pub fn metadata_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.metadata)?)
    }

    /// Tightest bounds on A across all rows; A is the same at every
    /// thickness, so each row's interval constrains it.
    pub fn tightest_bounds(&self) -> Option<(f64, f64)> {
        tightest_bounds(&self.rows)
    }
}

pub fn write_rows<W: io::Write>(rows: &[SweepRow], writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(CSV_HEADER)?;
    for r in rows {
        wtr.write_record(r.record())?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_rows<R: io::Read>(reader: R) -> Result<Vec<SweepRow>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::Config(format!("unexpected CSV header {header:?}")));
    }
    rdr.records().map(|r| SweepRow::from_record(&r?)).collect()
}

pub fn tightest_bounds(rows: &[SweepRow]) -> Option<(f64, f64)> {
    let valid: Vec<&SweepRow> = rows
        .iter()
        .filter(|r| !r.flags.contains(&Flag::RowError) && r.best_lower().is_finite() && r.best_upper().is_finite())
        .collect();
    if valid.is_empty() {
        return None;
    }
    let lo = valid.iter().map(|r| r.best_lower()).fold(f64::NEG_INFINITY, f64::max);
    let hi = valid.iter().map(|r| r.best_upper()).fold(f64::INFINITY, f64::min);
    Some((lo, hi))
}

/// Recomputes a row's verdict from its own bound and `acrit` columns.
/// Rows that failed numerically are accepted as they are.
pub fn audit_row(row: &SweepRow) -> bool {
    if row.flags.contains(&Flag::RowError) {
        return row.verdict == Decision::Inconclusive;
    }
    decide(row.best_lower(), row.best_upper(), row.acrit, row.acrit_source).0 == row.verdict
}

/// Everything that is shared by the rows of one sweep.
struct SweepContext<'a> {
    cfg: &'a ExperimentConfig,
    opts: RunOptions,
    seed: u64,
    shots: Option<u64>,
    family: TwoPeakFamily,
    probe: QubitState,
    known: Option<AcritEstimate>,
}

pub fn run_sweep(cfg: &ExperimentConfig, opts: RunOptions) -> Result<SweepReport> {
    cfg.validate()?;
    let family = TwoPeakFamily::from_wavelengths(cfg.a_true, cfg.lambda1_nm, cfg.lambda2_nm, cfg.fwhm_nm)?;
    let seed = opts.seed.unwrap_or(cfg.seed);
    let known = match cfg.a_crit_mode {
        AcritSource::Known => Some(AcritEstimate::known(family.delta_eta(), cfg.tau_max)?),
        AcritSource::Probed => None,
    };
    let ctx = SweepContext {
        cfg,
        opts,
        seed,
        shots: if opts.noiseless { None } else { cfg.shots },
        probe: QubitState::from_bloch(cfg.probe_bloch)?,
        family,
        known,
    };
    let thicknesses = cfg.sorted_thicknesses();
    let eval = |(i, &mm): (usize, &f64)| ctx.row(i as u64, mm);
    let results: Vec<Result<(SweepRow, RowDetail)>> = if opts.serial {
        thicknesses.iter().enumerate().map(eval).collect()
    } else {
        thicknesses.par_iter().enumerate().map(eval).collect()
    };
    let mut rows = Vec::with_capacity(results.len());
    let mut details = Vec::with_capacity(results.len());
    for r in results {
        let (row, detail) = r?;
        rows.push(row);
        details.push(detail);
    }
    Ok(SweepReport {
        rows,
        metadata: Metadata {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            seed,
            noiseless: ctx.shots.is_none(),
            strict: opts.strict,
            sigma_hz: ctx.family.sigma(),
            delta_eta: ctx.family.delta_eta(),
            config: cfg.clone(),
            rows: details,
        },
    })
}

impl SweepContext<'_> {
    fn stack(&self, index: u64, mm: f64) -> Result<PlateStack> {
        let cfg = self.cfg;
        let stack = match cfg.plate_angles {
            PlateAngles::Aligned => PlateStack::aligned(mm, cfg.plates_per_stack, cfg.delta_n)?,
            PlateAngles::Random => {
                let master = cfg.angle_seed.unwrap_or(self.seed);
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(master, STREAM_ANGLES, index));
                PlateStack::random(mm, cfg.plates_per_stack, cfg.delta_n, &mut rng)?
            }
        };
        stack.with_nodes(cfg.quadrature_nodes)
    }

    /// A failing row is kept with missing bounds and a flag.
    fn row(&self, index: u64, mm: f64) -> Result<(SweepRow, RowDetail)> {
        let tau = self.family.tau_for_thickness(mm, self.cfg.delta_n);
        match self.try_row(index, mm, tau) {
            Ok(r) => Ok(r),
            Err(e @ (Error::Io(_) | Error::Config(_))) => Err(e),
            Err(e) if self.opts.strict => Err(e),
            Err(e) => {
                log::warn!("row at {mm} mm failed: {e}");
                let nan = f64::NAN;
                let acrit = self.known.as_ref().and_then(|k| k.value);
                Ok((
                    SweepRow {
                        thickness_mm: mm,
                        tau,
                        lower_fid: nan,
                        upper_fid: nan,
                        lower_fid_std: nan,
                        upper_fid_std: nan,
                        lower_td: nan,
                        upper_td: nan,
                        lower_td_std: nan,
                        upper_td_std: nan,
                        acrit,
                        acrit_source: self.cfg.a_crit_mode,
                        verdict: Decision::Inconclusive,
                        flags: [Flag::RowError].into_iter().collect(),
                    },
                    RowDetail {
                        thickness_mm: mm,
                        plate_angles: Vec::new(),
                        alpha2: None,
                        alpha3: None,
                        delta_eta_lower_bound: None,
                        delta_eta_alpha: None,
                        acrit_fit: None,
                        acrit_numeric: None,
                        bootstrap_successes: 0,
                        bootstrap_failures: 0,
                        notes: Vec::new(),
                        error: Some(e.to_string()),
                    },
                ))
            }
        }
    }

    fn try_row(&self, index: u64, mm: f64, tau: f64) -> Result<(SweepRow, RowDetail)> {
        let cfg = self.cfg;
        let stack = self.stack(index, mm)?;
        let spectra = [self.family.xi1(), self.family.xi2(), self.family.xi3()];
        let mut phi_true = Vec::with_capacity(3);
        for s in &spectra {
            let ch = if self.opts.strict {
                build_channel_strict(&stack, s)?
            } else {
                build_channel(&stack, s)?
            };
            phi_true.push(apply(&ch, &self.probe)?);
        }
        let records = phi_true
            .iter()
            .enumerate()
            .map(|(k, phi)| TomographyRecord::simulate(phi, self.shots, derive_seed(self.seed, STREAM_COUNTS, 3 * index + k as u64)))
            .collect::<Result<Vec<_>>>()?;
        let rho = [self.probe.clone(), self.probe.clone(), self.probe.clone()];
        let probes = ProbeSet {
            rho: rho.clone(),
            phi: [records[0].state.clone(), records[1].state.clone(), records[2].state.clone()],
        };
        let mut bounds = ProbeBounds::compute(&probes, &cfg.alpha_grid)?;
        let (alpha2, alpha3) = (bounds.alpha2, bounds.alpha3);

        let summary = bootstrap(
            &records,
            cfg.mc_trials,
            derive_seed(self.seed, STREAM_BOOTSTRAP, index),
            !self.opts.serial,
            |states| {
                let phi = [states[0].clone(), states[1].clone(), states[2].clone()];
                Ok(raw_bounds_at(&phi, &rho, alpha2, alpha3)?.map(|x| x.clamp(0.0, 1.0)).to_vec())
            },
        )?;
        bounds.std = [summary.std[0], summary.std[1], summary.std[2], summary.std[3]];
        if summary.failures > 0 {
            bounds.flags.insert(Flag::ResampleFailures);
        }

        let mut flags = Flags::new();
        let (delta_eta_lb, delta_eta_alpha, estimate) = match &self.known {
            Some(k) => (None, None, k.clone()),
            None => {
                let (alpha, lb) = optimize_alpha(&cfg.alpha_grid, Tightest::Max, |a| {
                    delta_eta_lower_bound(&probes.phi[1], &probes.phi[2], &rho[1], &rho[2], a, &mut flags)
                })?;
                (Some(lb), Some(alpha), AcritEstimate::probed(lb, cfg.tau_max)?)
            }
        };
        let acrit_fit = estimate.fit;
        let acrit_numeric = estimate.numeric;
        let v = verdict(bounds, estimate)?;
        let mut all_flags = v.flags.clone();
        all_flags.extend(flags);
        let b = &v.bounds;
        Ok((
            SweepRow {
                thickness_mm: mm,
                tau,
                lower_fid: b.lower_fid,
                upper_fid: b.upper_fid,
                lower_fid_std: b.std[0],
                upper_fid_std: b.std[1],
                lower_td: b.lower_td,
                upper_td: b.upper_td,
                lower_td_std: b.std[2],
                upper_td_std: b.std[3],
                acrit: v.a_crit.value,
                acrit_source: v.a_crit.source,
                verdict: v.decision,
                flags: all_flags,
            },
            RowDetail {
                thickness_mm: mm,
                plate_angles: stack.plates.iter().map(|p| p.angle).collect(),
                alpha2: Some(alpha2),
                alpha3: Some(alpha3),
                delta_eta_lower_bound: delta_eta_lb,
                delta_eta_alpha,
                acrit_fit,
                acrit_numeric,
                bootstrap_successes: summary.successes,
                bootstrap_failures: summary.failures,
                notes: v.notes,
                error: None,
            },
        ))
    }
}

/// Time-resolved classification of the amplitude bounds.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntervalReport {
    pub delta_eta: f64,
    pub bounds: (f64, f64),
    pub taus: Vec<f64>,
    pub labels: Vec<Decision>,
    pub intervals: Vec<LabeledInterval>,
}

impl IntervalReport {
    pub fn count(&self, label: Decision, lo: f64, hi: f64) -> usize {
        self.intervals
            .iter()
            .filter(|iv| iv.label == label && iv.end >= lo && iv.start <= hi)
            .count()
    }

    pub fn write_csv<W: io::Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["start_tau", "end_tau", "label"])?;
        for iv in &self.intervals {
            wtr.write_record([iv.start.to_string(), iv.end.to_string(), iv.label.to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Labels `τ ∈ (0, tau_max]` given amplitude bounds `[lo, hi]` and a
/// peak separation.
pub fn run_intervals(delta_eta: f64, bounds: (f64, f64), tau_max: f64, step: f64) -> Result<IntervalReport> {
    let (lo, hi) = bounds;
    if lo > hi {
        return Err(Error::Protocol(format!("crossed amplitude bounds [{lo}, {hi}]")));
    }
    let taus = tau_grid(step, tau_max, step);
    let labels = classify_intervals(delta_eta, (lo.clamp(0.0, 1.0), hi.clamp(0.0, 1.0)), &taus)?;
    let intervals = merge_intervals(&taus, &labels);
    Ok(IntervalReport {
        delta_eta,
        bounds,
        taus,
        labels,
        intervals,
    })
}

/// Interval classification from a sweep's tightest bounds at the
/// configured peak separation.
pub fn intervals_from_sweep(cfg: &ExperimentConfig, report: &SweepReport) -> Result<IntervalReport> {
    let bounds = report
        .tightest_bounds()
        .ok_or_else(|| Error::Protocol("sweep has no valid rows".into()))?;
    run_intervals(report.metadata.delta_eta, bounds, cfg.interval_tau_max, cfg.interval_tau_step)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AcritRow {
    pub delta_eta: f64,
    pub numeric: Option<f64>,
    pub fit: f64,
}

impl AcritRow {
    pub fn abs_diff(&self) -> Option<f64> {
        self.numeric.map(|n| (n - self.fit).abs())
    }
}

pub fn acrit_table(etas: &[f64], tau_max: f64) -> Result<Vec<AcritRow>> {
    etas.par_iter()
        .map(|&eta| {
            Ok(AcritRow {
                delta_eta: eta,
                numeric: a_crit_numeric(eta, tau_max)?,
                fit: a_crit_fit(eta),
            })
        })
        .collect()
}

pub fn write_acrit_table<W: io::Write>(rows: &[AcritRow], writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["delta_eta", "acrit_numeric", "acrit_fit", "abs_diff"])?;
    for r in rows {
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        wtr.write_record([r.delta_eta.to_string(), opt(r.numeric), r.fit.to_string(), opt(r.abs_diff())])?;
    }
    wtr.flush()?;
    Ok(())
}
