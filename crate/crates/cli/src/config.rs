//! Strict flat-key configuration files.
//!
//! The format is one `section.key = value` assignment per line, `#` comments,
//! blank lines ignored. Parsing is strict: a key outside the known schema, a
//! duplicate key, or a malformed value is an error. Every value the run
//! actually used — including applied defaults — is echoed into the output
//! metadata, so artifacts are self-describing.

use std::collections::{BTreeMap, BTreeSet};

use retrialq_core::model::{BatchDist, ModelParams, ServiceDist};
use retrialq_core::simulate::SimConfig;
use retrialq_core::{Error, Result};

/// Every key the toolkit understands, across all subcommands.
const SCHEMA: &[&str] = &[
    "model.lambda",
    "model.mu",
    "model.batch.kind",
    "model.batch.m",
    "model.batch.p",
    "model.batch.theta",
    "model.batch.d_x",
    "model.service.kind",
    "model.service.rate",
    "model.service.sigma",
    "model.service.x_m",
    "model.service.d_b",
    "exact.trunc",
    "sim.mode",
    "sim.horizon",
    "sim.warmup",
    "sim.replications",
    "sim.base_seed",
    "sim.j_max",
    "compare.j_lo",
    "compare.j_hi",
    "compare.ratio_lo",
    "compare.ratio_hi",
    "compare.band_lo",
    "compare.band_hi",
    "compare.sim_sigma",
    "expansion.theta1",
    "expansion.index1",
    "expansion.theta2",
    "expansion.index2",
    "expansion.trunc",
    "expansion.t_values",
];

fn config_err(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

/// Parsed key-value pairs plus an echo of every value a command resolved.
#[derive(Debug, Clone)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
    echo: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        let known: BTreeSet<&str> = SCHEMA.iter().copied().collect();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(config_err(format!(
                    "line {}: expected `section.key = value`, got `{raw}`",
                    lineno + 1
                )));
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if !known.contains(key.as_str()) {
                return Err(config_err(format!(
                    "line {}: unknown key `{key}`",
                    lineno + 1
                )));
            }
            if values.insert(key.clone(), value).is_some() {
                return Err(config_err(format!(
                    "line {}: duplicate key `{key}`",
                    lineno + 1
                )));
            }
        }
        Ok(Self {
            values,
            echo: BTreeMap::new(),
        })
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Everything the commands resolved so far, defaults included.
    pub fn echo(&self) -> &BTreeMap<String, String> {
        &self.echo
    }

    fn raw(&mut self, key: &str) -> Option<String> {
        let v = self.values.get(key).cloned();
        if let Some(ref v) = v {
            self.echo.insert(key.to_string(), v.clone());
        }
        v
    }

    fn require(&mut self, key: &str) -> Result<String> {
        self.raw(key)
            .ok_or_else(|| config_err(format!("missing required key `{key}`")))
    }

    fn record_default(&mut self, key: &str, value: impl ToString) {
        self.echo.entry(key.to_string()).or_insert(value.to_string());
    }

    fn require_f64(&mut self, key: &str) -> Result<f64> {
        let v = self.require(key)?;
        v.parse::<f64>()
            .map_err(|_| config_err(format!("key `{key}`: not a number: `{v}`")))
    }

    fn f64_or(&mut self, key: &str, default: f64) -> Result<f64> {
        match self.raw(key) {
            Some(v) => v
                .parse::<f64>()
                .map_err(|_| config_err(format!("key `{key}`: not a number: `{v}`"))),
            None => {
                self.record_default(key, default);
                Ok(default)
            }
        }
    }

    fn u64_or(&mut self, key: &str, default: u64) -> Result<u64> {
        match self.raw(key) {
            Some(v) => parse_u64(&v).ok_or_else(|| {
                config_err(format!("key `{key}`: not a nonnegative integer: `{v}`"))
            }),
            None => {
                self.record_default(key, default);
                Ok(default)
            }
        }
    }

    fn require_u64(&mut self, key: &str) -> Result<u64> {
        let v = self.require(key)?;
        parse_u64(&v)
            .ok_or_else(|| config_err(format!("key `{key}`: not a nonnegative integer: `{v}`")))
    }

    /// The `model.*` section.
    pub fn model(&mut self) -> Result<ModelParams> {
        let lambda = self.require_f64("model.lambda")?;
        let mu = self.require_f64("model.mu")?;
        let batch = match self.require("model.batch.kind")?.as_str() {
            "deterministic" => BatchDist::deterministic(self.require_u64("model.batch.m")?)?,
            "geometric" => BatchDist::geometric(self.require_f64("model.batch.p")?)?,
            "pareto_tail" => BatchDist::pareto_tail(
                self.require_f64("model.batch.theta")?,
                self.require_f64("model.batch.d_x")?,
            )?,
            other => {
                return Err(config_err(format!(
                    "model.batch.kind: expected deterministic|geometric|pareto_tail, got `{other}`"
                )))
            }
        };
        let service = match self.require("model.service.kind")?.as_str() {
            "exponential" => ServiceDist::exponential(self.require_f64("model.service.rate")?)?,
            "lomax" => ServiceDist::lomax(
                self.require_f64("model.service.sigma")?,
                self.require_f64("model.service.d_b")?,
            )?,
            "pareto" => ServiceDist::pareto(
                self.require_f64("model.service.x_m")?,
                self.require_f64("model.service.d_b")?,
            )?,
            other => {
                return Err(config_err(format!(
                    "model.service.kind: expected exponential|lomax|pareto, got `{other}`"
                )))
            }
        };
        ModelParams::new(lambda, mu, batch, service)
    }

    /// The `exact.*` section.
    pub fn exact_trunc(&mut self) -> Result<usize> {
        Ok(self.u64_or("exact.trunc", 8192)? as usize)
    }

    /// The `sim.*` section; warmup defaults to 5% of the horizon.
    pub fn sim(&mut self) -> Result<(SimMode, SimConfig)> {
        let mode = match self
            .raw("sim.mode")
            .unwrap_or_else(|| {
                self.record_default("sim.mode", "retrial");
                "retrial".into()
            })
            .as_str()
        {
            "retrial" => SimMode::Retrial,
            "standard" => SimMode::Standard,
            other => {
                return Err(config_err(format!(
                    "sim.mode: expected retrial|standard, got `{other}`"
                )))
            }
        };
        let horizon = self.require_f64("sim.horizon")?;
        let warmup = self.f64_or("sim.warmup", 0.05 * horizon)?;
        let replications = self.u64_or("sim.replications", 8)? as u32;
        let base_seed = self.u64_or("sim.base_seed", 1)?;
        let max_tracked_level = self.u64_or("sim.j_max", 256)? as usize;
        let cfg = SimConfig {
            horizon,
            warmup,
            replications,
            base_seed,
            max_tracked_level,
        };
        cfg.validate()?;
        Ok((mode, cfg))
    }

    /// The `compare.*` section; window defaults derive from the truncation.
    pub fn compare(&mut self, trunc: usize) -> Result<CompareSection> {
        let j_lo = self.u64_or("compare.j_lo", (trunc / 32).max(8) as u64)? as usize;
        let j_hi = self.u64_or("compare.j_hi", (trunc / 4).max(16) as u64)? as usize;
        if !(j_lo < j_hi && j_hi <= trunc) {
            return Err(config_err(format!(
                "compare window [{j_lo}, {j_hi}] must be increasing and within the truncation {trunc}"
            )));
        }
        Ok(CompareSection {
            j_lo,
            j_hi,
            ratio_lo: self.f64_or("compare.ratio_lo", 0.95)?,
            ratio_hi: self.f64_or("compare.ratio_hi", 1.05)?,
            band_lo: self.f64_or("compare.band_lo", 0.7)?,
            band_hi: self.f64_or("compare.band_hi", 1.3)?,
            sim_sigma: self.f64_or("compare.sim_sigma", 3.0)?,
        })
    }

    /// The `expansion.*` section.
    pub fn expansion(&mut self) -> Result<ExpansionSection> {
        let theta1 = self.require_f64("expansion.theta1")?;
        let index1 = self.require_f64("expansion.index1")?;
        let theta2 = self.require_f64("expansion.theta2")?;
        let index2 = self.require_f64("expansion.index2")?;
        if (index1 + 1.0 - index2).abs() > 1e-9 {
            return Err(config_err(format!(
                "expansion hypotheses need index2 = index1 + 1 (one order lighter), got {index1} and {index2}"
            )));
        }
        if index2 <= 1.0 {
            return Err(config_err(
                "expansion.index2 must exceed 1 so the lighter variable has a finite mean",
            ));
        }
        let trunc = self.u64_or("expansion.trunc", 16384)? as usize;
        let t_raw = self.require("expansion.t_values")?;
        let mut t_values = Vec::new();
        for part in t_raw.split(',') {
            let t = parse_u64(part.trim())
                .ok_or_else(|| config_err(format!("expansion.t_values: bad entry `{part}`")))?
                as usize;
            if t >= trunc {
                return Err(config_err(format!(
                    "expansion.t_values: {t} is outside the truncation {trunc}"
                )));
            }
            t_values.push(t);
        }
        if t_values.is_empty() {
            return Err(config_err("expansion.t_values: need at least one point"));
        }
        Ok(ExpansionSection {
            theta1,
            index1,
            theta2,
            index2,
            trunc,
            t_values,
        })
    }
}

/// Accepts plain integers and float forms like `1e7`.
fn parse_u64(v: &str) -> Option<u64> {
    if let Ok(x) = v.parse::<u64>() {
        return Some(x);
    }
    let f = v.parse::<f64>().ok()?;
    (f >= 0.0 && f.fract() == 0.0 && f <= u64::MAX as f64).then_some(f as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimMode {
    Retrial,
    Standard,
}

impl SimMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            SimMode::Retrial => "retrial",
            SimMode::Standard => "standard",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CompareSection {
    pub j_lo: usize,
    pub j_hi: usize,
    pub ratio_lo: f64,
    pub ratio_hi: f64,
    pub band_lo: f64,
    pub band_hi: f64,
    pub sim_sigma: f64,
}

#[derive(Debug, Clone)]
pub struct ExpansionSection {
    pub theta1: f64,
    pub index1: f64,
    pub theta2: f64,
    pub index2: f64,
    pub trunc: usize,
    pub t_values: Vec<usize>,
}
