//! Experiment configuration, read from a single JSON document.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::coupling::DEFAULT_NODES;
use crate::dephasing::DEFAULT_TAU_MAX;
use crate::error::{Error, Result};
use crate::probing::{AcritSource, default_alpha_grid};

/// Fast-axis orientation of the plates in each stack.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlateAngles {
    Aligned,
    /// Uniform in `[0, π)`, drawn per thickness from `angle_seed`.
    Random,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub lambda1_nm: f64,
    pub lambda2_nm: f64,
    pub fwhm_nm: f64,
    /// Weight of the `lambda1_nm` peak.
    pub a_true: f64,
    pub delta_n: f64,
    pub thicknesses_mm: Vec<f64>,
    pub plate_angles: PlateAngles,
    pub plates_per_stack: usize,
    /// Seed for random plate angles; falls back to `seed`.
    pub angle_seed: Option<u64>,
    /// Shots per basis; `None` means exact probabilities.
    pub shots: Option<u64>,
    pub mc_trials: usize,
    pub alpha_grid: Vec<f64>,
    pub a_crit_mode: AcritSource,
    pub seed: u64,
    pub tau_max: f64,
    pub quadrature_nodes: usize,
    /// Bloch vector of the probe state used for all three couplings.
    pub probe_bloch: [f64; 3],
    /// τ range and step of the interval classification.
    pub interval_tau_max: f64,
    pub interval_tau_step: f64,
    pub out_dir: Option<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            lambda1_nm: 810.0,
            lambda2_nm: 818.0,
            fwhm_nm: 3.0,
            a_true: 0.7,
            delta_n: 0.0089,
            thicknesses_mm: (2..=14).map(f64::from).collect(),
            plate_angles: PlateAngles::Aligned,
            plates_per_stack: 1,
            angle_seed: None,
            shots: Some(10_000),
            mc_trials: 1000,
            alpha_grid: default_alpha_grid(),
            a_crit_mode: AcritSource::Known,
            seed: 0,
            tau_max: DEFAULT_TAU_MAX,
            quadrature_nodes: DEFAULT_NODES,
            probe_bloch: [1.0, 0.0, 0.0],
            interval_tau_max: 5.0,
            interval_tau_step: 0.001,
            out_dir: None,
        }
    }
}

impl ExperimentConfig {
    /// Parses JSON; unknown keys are an error when `strict`, a warning
    /// otherwise.
    pub fn from_json(text: &str, strict: bool) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let obj = value
            .as_object()
            .ok_or_else(|| Error::Config("config must be a JSON object".into()))?;
        let known = serde_json::to_value(ExperimentConfig::default())?;
        let known = known.as_object().unwrap();
        let unknown: Vec<&String> = obj.keys().filter(|k| !known.contains_key(*k)).collect();
        if !unknown.is_empty() {
            let msg = format!("unknown config keys: {unknown:?}");
            if strict {
                return Err(Error::Config(msg));
            }
            log::warn!("{msg}");
        }
        let cfg: ExperimentConfig = serde_json::from_value(value)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, strict: bool) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?, strict)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.into()));
        if !(self.lambda1_nm > 0.0 && self.lambda2_nm > 0.0) {
            return fail("wavelengths must be positive");
        }
        if !(self.fwhm_nm > 0.0) {
            return fail("fwhm_nm must be positive");
        }
        if !(0.0..=1.0).contains(&self.a_true) {
            return fail("a_true must lie in [0, 1]");
        }
        if self.delta_n == 0.0 || !self.delta_n.is_finite() {
            return fail("delta_n must be nonzero");
        }
        if self.thicknesses_mm.is_empty() || self.thicknesses_mm.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return fail("thicknesses_mm must be a nonempty list of positive values");
        }
        if self.plates_per_stack == 0 {
            return fail("plates_per_stack must be at least 1");
        }
        if self.shots == Some(0) {
            return fail("shots must be at least 1");
        }
        if self.shots.is_some() && self.mc_trials < 2 {
            return fail("mc_trials must be at least 2");
        }
        if self.alpha_grid.is_empty() || self.alpha_grid.iter().any(|a| !(0.5..1.0).contains(a)) {
            return fail("alpha_grid must be a nonempty subset of [0.5, 1)");
        }
        let r2: f64 = self.probe_bloch.iter().map(|x| x * x).sum();
        if r2 > 1.0 + 1e-12 {
            return fail("probe_bloch must lie in the unit ball");
        }
        if !(self.tau_max > 0.0 && self.interval_tau_max > 0.0 && self.interval_tau_step > 0.0) {
            return fail("tau ranges must be positive");
        }
        Ok(())
    }

    /// Sorted, deduplicated thickness grid.
    pub fn sorted_thicknesses(&self) -> Vec<f64> {
        let mut t = self.thicknesses_mm.clone();
        t.sort_by(f64::total_cmp);
        t.dedup();
        t
    }
}
