//! Discrete-event simulation of the batch-arrival retrial queue and of the
//! corresponding ordinary (non-retrial) batch queue.
//!
//! Estimation is time-weighted: the simulator accumulates occupancy time per
//! (server state, orbit level) after a warmup period, so the estimates target
//! the continuous-time stationary laws directly. Orbit retrials are drawn
//! from the aggregate Exp(n * mu) race, which is distributionally exact for
//! independent exponential clocks and costs O(1) per event.
//!
//! Replications are independent; replication r draws from the stream derived
//! by [`crate::rng::stream_seed`], and aggregation is ordered by replication
//! index, so results are bit-identical across runs and thread schedules.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::rng::{stream_seed, SplitMix64};

/// Run-length and estimation windows for one simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Total simulated time per replication.
    pub horizon: f64,
    /// Simulated time discarded before accumulation starts.
    pub warmup: f64,
    pub replications: u32,
    pub base_seed: u64,
    /// Histogram cap: levels above it accumulate in the top bucket.
    pub max_tracked_level: usize,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.warmup >= 0.0 && self.horizon > self.warmup) {
            return Err(Error::InvalidParameter(format!(
                "need horizon > warmup >= 0, got horizon {} warmup {}",
                self.horizon, self.warmup
            )));
        }
        if self.replications < 1 {
            return Err(Error::InvalidParameter(
                "need at least one replication".into(),
            ));
        }
        Ok(())
    }
}

/// A point estimate with a normal-approximation 95% confidence half-width
/// across replications.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CiValue {
    pub mean: f64,
    pub half_width: f64,
}

/// Scalar outcomes of a single replication.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicationSummary {
    pub seed: u64,
    pub busy_fraction: f64,
    pub events: u64,
}

/// Time-weighted stationary estimates with per-level confidence intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimEstimate {
    /// Estimate of P{server busy} (the offered load for a stable queue).
    pub busy_fraction: CiValue,
    /// Mean number in system (tail sum over the tracked levels, so it reads
    /// slightly low when mass escapes past the histogram cap).
    pub total_mean: CiValue,
    /// P{L > j} for j = 0..=max_tracked_level, where L counts everyone in
    /// the system (orbit or queue plus the customer in service).
    pub total_tail: Vec<CiValue>,
    /// P{orbit > j | server idle}.
    pub idle_orbit_tail: Vec<CiValue>,
    /// P{orbit > j | server busy}.
    pub busy_orbit_tail: Vec<CiValue>,
    /// Levels of `total_tail` backed by at least 100 occupancy visits across
    /// all replications; sparser levels are reported but flagged unreliable.
    pub total_tail_reliable: Vec<bool>,
    pub per_replication: Vec<ReplicationSummary>,
    pub events_total: u64,
}

/// Raw occupancy accumulators of one replication.
struct RepAccum {
    seed: u64,
    /// Time at orbit level n with the server idle (capped).
    idle_orbit: Vec<f64>,
    /// Time at orbit level n with the server busy (capped).
    busy_orbit: Vec<f64>,
    /// Visit counts per total-system level (capped), for reliability flags.
    visits_total: Vec<u64>,
    busy_time: f64,
    span: f64,
    events: u64,
}

impl RepAccum {
    fn new(seed: u64, cap: usize, span: f64) -> Self {
        Self {
            seed,
            idle_orbit: vec![0.0; cap + 1],
            busy_orbit: vec![0.0; cap + 1],
            visits_total: vec![0; cap + 1],
            busy_time: 0.0,
            span,
            events: 0,
        }
    }

    /// Adds the overlap of [t0, t1] with the estimation window.
    fn weigh(&mut self, t0: f64, t1: f64, warmup: f64, horizon: f64, busy: bool, orbit: u64) {
        let lo = t0.max(warmup);
        let hi = t1.min(horizon);
        if hi <= lo {
            return;
        }
        let dt = hi - lo;
        let cap = self.idle_orbit.len() - 1;
        let level = (orbit as usize).min(cap);
        if busy {
            self.busy_orbit[level] += dt;
            self.busy_time += dt;
        } else {
            self.idle_orbit[level] += dt;
        }
        let total = (orbit as usize + busy as usize).min(cap);
        self.visits_total[total] += 1;
    }

    fn busy_fraction(&self) -> f64 {
        self.busy_time / self.span
    }

    /// P{L > j}: total-system tail from the same accumulators that define
    /// the conditional orbit laws, so the mixture identity is exact.
    fn total_tail(&self) -> Vec<f64> {
        let cap = self.idle_orbit.len() - 1;
        let mut time_at = vec![0.0; cap + 1];
        for n in 0..=cap {
            time_at[n] += self.idle_orbit[n];
            if n < cap {
                time_at[n + 1] += self.busy_orbit[n];
            } else {
                time_at[cap] += self.busy_orbit[n];
            }
        }
        suffix_tail(&time_at, self.span)
    }

    fn idle_orbit_tail(&self) -> Vec<f64> {
        let idle_total = self.span - self.busy_time;
        suffix_tail(&self.idle_orbit, idle_total)
    }

    fn busy_orbit_tail(&self) -> Vec<f64> {
        suffix_tail(&self.busy_orbit, self.busy_time)
    }
}

/// tail[j] = (total - sum of time_at[0..=j]) / total, clipped at zero.
fn suffix_tail(time_at: &[f64], total: f64) -> Vec<f64> {
    let mut out = vec![0.0; time_at.len()];
    if total <= 0.0 {
        return out;
    }
    let mut acc = 0.0;
    for (j, &t) in time_at.iter().enumerate() {
        acc += t;
        out[j] = ((total - acc) / total).max(0.0);
    }
    out
}

fn run_retrial_once(params: &ModelParams, cfg: &SimConfig, seed: u64) -> RepAccum {
    let mut rng = SplitMix64::new(seed);
    let mut acc = RepAccum::new(seed, cfg.max_tracked_level, cfg.horizon - cfg.warmup);
    let mut t = 0.0f64;
    let mut orbit: u64 = 0;
    let mut busy = false;
    let mut completion = 0.0f64;

    while t < cfg.horizon {
        if busy {
            let next_arrival = t + rng.next_exp(params.lambda);
            if next_arrival < completion && next_arrival < cfg.horizon {
                acc.weigh(t, next_arrival, cfg.warmup, cfg.horizon, true, orbit);
                t = next_arrival;
                orbit += batch(&params.batch, &mut rng);
            } else {
                let until = completion.min(cfg.horizon);
                acc.weigh(t, until, cfg.warmup, cfg.horizon, true, orbit);
                t = until;
                if completion <= cfg.horizon {
                    busy = false;
                }
            }
        } else {
            let rate = params.lambda + orbit as f64 * params.mu;
            let next = t + rng.next_exp(rate);
            let until = next.min(cfg.horizon);
            acc.weigh(t, until, cfg.warmup, cfg.horizon, false, orbit);
            t = until;
            if next <= cfg.horizon {
                if rng.next_open01() < params.lambda / rate {
                    // Arrival to a free server: one customer starts service,
                    // the rest of the batch joins the orbit.
                    orbit += batch(&params.batch, &mut rng) - 1;
                } else {
                    // Successful retrial.
                    orbit -= 1;
                }
                busy = true;
                completion = t + service(&params.service, &mut rng);
            }
        }
        acc.events += 1;
    }
    acc
}

fn run_standard_once(params: &ModelParams, cfg: &SimConfig, seed: u64) -> RepAccum {
    let mut rng = SplitMix64::new(seed);
    let mut acc = RepAccum::new(seed, cfg.max_tracked_level, cfg.horizon - cfg.warmup);
    let mut t = 0.0f64;
    // Customers in the system; the server works on one whenever n > 0. The
    // accumulators store (busy, n - 1) so the busy-conditional histogram
    // counts the customers not in service, mirroring the retrial orbit.
    let mut n: u64 = 0;
    let mut completion = 0.0f64;

    while t < cfg.horizon {
        if n == 0 {
            let next = t + rng.next_exp(params.lambda);
            let until = next.min(cfg.horizon);
            acc.weigh(t, until, cfg.warmup, cfg.horizon, false, 0);
            t = until;
            if next <= cfg.horizon {
                n = batch(&params.batch, &mut rng);
                completion = t + service(&params.service, &mut rng);
            }
        } else {
            let next_arrival = t + rng.next_exp(params.lambda);
            if next_arrival < completion && next_arrival < cfg.horizon {
                acc.weigh(t, next_arrival, cfg.warmup, cfg.horizon, true, n - 1);
                t = next_arrival;
                n += batch(&params.batch, &mut rng);
            } else {
                let until = completion.min(cfg.horizon);
                acc.weigh(t, until, cfg.warmup, cfg.horizon, true, n - 1);
                t = until;
                if completion <= cfg.horizon {
                    n -= 1;
                    if n > 0 {
                        completion = t + service(&params.service, &mut rng);
                    }
                }
            }
        }
        acc.events += 1;
    }
    acc
}

#[inline]
fn batch(b: &crate::model::BatchDist, rng: &mut SplitMix64) -> u64 {
    b.sample(rng.next_open01()).expect("open-interval uniform")
}

#[inline]
fn service(s: &crate::model::ServiceDist, rng: &mut SplitMix64) -> f64 {
    s.sample(rng.next_open01()).expect("open-interval uniform")
}

fn aggregate(reps: Vec<RepAccum>) -> SimEstimate {
    let r = reps.len();
    let cap = reps[0].idle_orbit.len() - 1;
    let ci = |values: &[f64]| -> CiValue {
        let mean = values.iter().sum::<f64>() / r as f64;
        let half_width = if r >= 2 {
            let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
                / (r as f64 - 1.0);
            1.96 * (var / r as f64).sqrt()
        } else {
            0.0
        };
        CiValue { mean, half_width }
    };

    let busy: Vec<f64> = reps.iter().map(|a| a.busy_fraction()).collect();
    let total: Vec<Vec<f64>> = reps.iter().map(|a| a.total_tail()).collect();
    let idle: Vec<Vec<f64>> = reps.iter().map(|a| a.idle_orbit_tail()).collect();
    let busy_orbit: Vec<Vec<f64>> = reps.iter().map(|a| a.busy_orbit_tail()).collect();
    let means: Vec<f64> = total.iter().map(|t| t.iter().sum()).collect();

    let per_level = |series: &[Vec<f64>]| -> Vec<CiValue> {
        (0..=cap)
            .map(|j| {
                let col: Vec<f64> = series.iter().map(|s| s[j]).collect();
                ci(&col)
            })
            .collect()
    };

    let mut visits = vec![0u64; cap + 1];
    for a in &reps {
        for (v, &x) in visits.iter_mut().zip(&a.visits_total) {
            *v += x;
        }
    }
    // A tail at j is informed by every visit to a level above j.
    let mut visits_above = vec![0u64; cap + 1];
    let mut acc_visits = 0u64;
    for j in (0..=cap).rev() {
        acc_visits += if j < cap { visits[j + 1] } else { 0 };
        visits_above[j] = acc_visits;
    }

    SimEstimate {
        busy_fraction: ci(&busy),
        total_mean: ci(&means),
        total_tail: per_level(&total),
        idle_orbit_tail: per_level(&idle),
        busy_orbit_tail: per_level(&busy_orbit),
        total_tail_reliable: visits_above.iter().map(|&v| v >= 100).collect(),
        per_replication: reps
            .iter()
            .map(|a| ReplicationSummary {
                seed: a.seed,
                busy_fraction: a.busy_fraction(),
                events: a.events,
            })
            .collect(),
        events_total: reps.iter().map(|a| a.events).sum(),
    }
}

fn replicate<F>(params: &ModelParams, cfg: &SimConfig, run: F) -> Result<SimEstimate>
where
    F: Fn(&ModelParams, &SimConfig, u64) -> RepAccum + Sync,
{
    params.ensure_stable()?;
    cfg.validate()?;
    let reps: Vec<RepAccum> = (0..cfg.replications as u64)
        .into_par_iter()
        .map(|r| run(params, cfg, stream_seed(cfg.base_seed, r)))
        .collect();
    Ok(aggregate(reps))
}

/// Simulates the retrial queue: estimates of the busy fraction, the total
/// system-size tail, and the orbit tails conditional on the server state.
pub fn simulate_retrial(params: &ModelParams, cfg: &SimConfig) -> Result<SimEstimate> {
    replicate(params, cfg, run_retrial_once)
}

/// Simulates the ordinary (non-retrial) batch queue; the total tail
/// estimates the stationary number in system.
pub fn simulate_standard(params: &ModelParams, cfg: &SimConfig) -> Result<SimEstimate> {
    replicate(params, cfg, run_standard_once)
}
