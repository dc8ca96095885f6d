//! Command implementations: each one parses the sections it needs, runs the
//! engines, and writes a CSV/JSON pair (plus an optional SVG for `compare`).

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use retrialq_core::asymptotics::{self, AsymptoticReport, TailCurve};
use retrialq_core::exact;
use retrialq_core::model::BatchDist;
use retrialq_core::series::TruncSeries;
use retrialq_core::simulate::{self, SimEstimate};
use retrialq_core::{Error, Result};

use crate::config::{RunConfig, SimMode};
use crate::output::{sidecar, write_csv, write_json, write_svg, Cell, PlotSeries};

#[derive(Debug, Serialize)]
struct ExactMeta {
    command: &'static str,
    rho: f64,
    psi: f64,
    trunc: usize,
    mass_deficit: BTreeMap<&'static str, f64>,
    config: BTreeMap<String, String>,
}

/// Exact truncated distributions as a wide CSV plus a metadata sidecar.
pub fn cmd_exact(config_path: &Path, out: &Path) -> Result<()> {
    let mut cfg = RunConfig::load(config_path)?;
    let params = cfg.model()?;
    let trunc = cfg.exact_trunc()?;
    let all = exact::compute_all(&params, trunc)?;

    let series: [(&str, &TruncSeries); 7] = [
        ("k_star", &all.k_star),
        ("k_circ", &all.k_circ),
        ("k", &all.k),
        ("d0", &all.d0),
        ("d1", &all.d1),
        ("linf", &all.l_inf),
        ("lmu", &all.l_mu),
    ];
    let mut header = vec!["j".to_string()];
    for (name, _) in &series {
        header.push(format!("{name}_pmf"));
        header.push(format!("{name}_tail"));
    }
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();

    let tails: Vec<Vec<f64>> = series.iter().map(|(_, s)| s.tails()).collect();
    let mut rows = Vec::with_capacity(trunc + 1);
    for j in 0..=trunc {
        let mut row = Vec::with_capacity(header.len());
        row.push(Cell::Int(j as u64));
        for (idx, (_, s)) in series.iter().enumerate() {
            row.push(Cell::Float(s.coeff(j)));
            row.push(Cell::Float(tails[idx][j]));
        }
        rows.push(row);
    }
    write_csv(out, &header_refs, &rows)?;

    let meta = ExactMeta {
        command: "exact",
        rho: all.rho,
        psi: all.psi,
        trunc,
        mass_deficit: series
            .iter()
            .map(|(name, s)| (*name, s.mass_deficit()))
            .collect(),
        config: cfg.echo().clone(),
    };
    write_json(&sidecar(out), &meta)
}

#[derive(Debug, Serialize)]
struct AsymMeta {
    command: &'static str,
    case_id: &'static str,
    report: AsymptoticReport,
    config: BTreeMap<String, String>,
}

/// Asymptotic tail curves evaluated on a log grid, plus the constants report.
pub fn cmd_asym(
    config_path: &Path,
    out: &Path,
    j_lo: u64,
    j_hi: u64,
    points: usize,
) -> Result<()> {
    if !(j_lo >= 1 && j_hi > j_lo && points >= 2) {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= j_lo < j_hi and points >= 2, got [{j_lo}, {j_hi}] x {points}"
        )));
    }
    let mut cfg = RunConfig::load(config_path)?;
    let params = cfg.model()?;
    let report = asymptotics::report(&params)?;

    let named: Vec<(String, TailCurve)> = {
        let mut v = vec![
            ("k".to_string(), report.k_curve()),
            ("k_star".to_string(), report.curves.k_star),
            ("k_circ".to_string(), report.curves.k_circ),
            ("system_size".to_string(), report.system_size_curve()),
            ("d0".to_string(), report.d0_curve()),
            ("d1".to_string(), report.d1_curve()),
            ("refined_difference".to_string(), report.refined_curve()),
            ("n_bx".to_string(), report.curves.n_bx),
            ("n_bx_x0".to_string(), report.curves.n_bx_x0),
            ("n_bex_xde".to_string(), report.curves.n_bex_xde),
        ];
        if let Some(c) = report.curves.n_b {
            v.push(("n_b".to_string(), c));
        }
        if let Some(c) = report.curves.n_b_eq {
            v.push(("n_b_eq".to_string(), c));
        }
        if let Some(c) = report.curves.n_bex {
            v.push(("n_bex".to_string(), c));
        }
        v
    };

    let mut header = vec!["j".to_string()];
    header.extend(named.iter().map(|(n, _)| format!("{n}_tail_curve")));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();

    let mut rows = Vec::with_capacity(points);
    for j in log_grid(j_lo, j_hi, points) {
        let mut row = vec![Cell::Int(j)];
        row.extend(named.iter().map(|(_, c)| Cell::Float(c.eval(j as f64))));
        rows.push(row);
    }
    write_csv(out, &header_refs, &rows)?;

    let meta = AsymMeta {
        command: "asym",
        case_id: report.case_id.as_str(),
        report,
        config: cfg.echo().clone(),
    };
    write_json(&sidecar(out), &meta)
}

/// Strictly increasing integer grid, geometric between the ends.
fn log_grid(j_lo: u64, j_hi: u64, points: usize) -> Vec<u64> {
    let (a, b) = ((j_lo as f64).ln(), (j_hi as f64).ln());
    let mut grid: Vec<u64> = (0..points)
        .map(|i| {
            (a + (b - a) * i as f64 / (points - 1) as f64)
                .exp()
                .round() as u64
        })
        .collect();
    grid.dedup();
    grid
}

#[derive(Debug, Serialize, Deserialize)]
struct SimArtifact {
    command: String,
    mode: String,
    rho: f64,
    config: BTreeMap<String, String>,
    estimate: SimEstimate,
}

/// Replicated simulation of the configured queue.
pub fn cmd_sim(config_path: &Path, out: &Path) -> Result<()> {
    let mut cfg = RunConfig::load(config_path)?;
    let params = cfg.model()?;
    let (mode, sim_cfg) = cfg.sim()?;
    let estimate = match mode {
        SimMode::Retrial => simulate::simulate_retrial(&params, &sim_cfg)?,
        SimMode::Standard => simulate::simulate_standard(&params, &sim_cfg)?,
    };

    let header = [
        "j",
        "total_tail",
        "total_tail_hw",
        "idle_orbit_tail",
        "idle_orbit_tail_hw",
        "busy_orbit_tail",
        "busy_orbit_tail_hw",
        "reliable",
    ];
    let rows: Vec<Vec<Cell>> = (0..estimate.total_tail.len())
        .map(|j| {
            vec![
                Cell::Int(j as u64),
                Cell::Float(estimate.total_tail[j].mean),
                Cell::Float(estimate.total_tail[j].half_width),
                Cell::Float(estimate.idle_orbit_tail[j].mean),
                Cell::Float(estimate.idle_orbit_tail[j].half_width),
                Cell::Float(estimate.busy_orbit_tail[j].mean),
                Cell::Float(estimate.busy_orbit_tail[j].half_width),
                Cell::Bool(estimate.total_tail_reliable[j]),
            ]
        })
        .collect();
    write_csv(out, &header, &rows)?;

    let artifact = SimArtifact {
        command: "sim".into(),
        mode: mode.as_str().into(),
        rho: params.rho(),
        config: cfg.echo().clone(),
        estimate,
    };
    write_json(&sidecar(out), &artifact)
}

#[derive(Debug, Serialize)]
struct CompareRow {
    j: u64,
    lmu_tail: f64,
    linf_tail: f64,
    /// P{L_mu > j} / P{L_inf > j}.
    equivalence_ratio: f64,
    tail_difference: f64,
    refined_curve: f64,
    /// Difference divided by the refined curve.
    difference_ratio: f64,
    d0_tail: f64,
    d0_curve: f64,
    d0_ratio: f64,
    d1_tail: f64,
    d1_curve: f64,
    d1_ratio: f64,
    k_tail: f64,
    k_curve: f64,
    k_ratio: f64,
}

#[derive(Debug, Serialize)]
struct CheckResult {
    name: String,
    pass: bool,
    value: f64,
    bound_lo: f64,
    bound_hi: f64,
}

#[derive(Debug, Serialize)]
struct SimDelta {
    j: u64,
    simulated: f64,
    exact: f64,
    half_width: f64,
    /// |simulated - exact| in half-width units (0 when the CI is degenerate).
    sigmas: f64,
    reliable: bool,
}

#[derive(Debug, Serialize)]
struct CompareReport {
    command: &'static str,
    case_id: &'static str,
    a: f64,
    rho: f64,
    psi: f64,
    trunc: usize,
    window: (usize, usize),
    rows: Vec<CompareRow>,
    checks: Vec<CheckResult>,
    /// Empirical verification of the ultimately-decreasing premise on the
    /// non-retrial pmf over the window; a violation is a warning, not a
    /// failure.
    linf_pmf_decreasing_on_window: bool,
    warnings: Vec<String>,
    sim_deltas: Option<Vec<SimDelta>>,
    pass: bool,
    config: BTreeMap<String, String>,
}

/// Validates the refined tail equivalence on the exact engine (optionally
/// against a simulation artifact), writes a JSON report and an optional
/// log-log SVG, and returns whether every check passed.
pub fn cmd_compare(
    config_path: &Path,
    out: &Path,
    svg: Option<&Path>,
    sim: Option<&Path>,
) -> Result<bool> {
    let mut cfg = RunConfig::load(config_path)?;
    let params = cfg.model()?;
    let trunc = cfg.exact_trunc()?;
    let section = cfg.compare(trunc)?;
    let all = exact::compute_all(&params, trunc)?;
    let report = asymptotics::report(&params)?;

    let lmu_tails = all.l_mu.tails();
    let linf_tails = all.l_inf.tails();
    let d0_tails = all.d0.tails();
    let d1_tails = all.d1.tails();
    let k_tails = all.k.tails();

    let grid = log_grid(section.j_lo as u64, section.j_hi as u64, 33);
    let row_at = |j: u64| -> CompareRow {
        let ju = j as usize;
        let jf = j as f64;
        let refined = report.refined_curve().eval(jf);
        let d0c = report.d0_curve().eval(jf);
        let d1c = report.d1_curve().eval(jf);
        let kc = report.k_curve().eval(jf);
        CompareRow {
            j,
            lmu_tail: lmu_tails[ju],
            linf_tail: linf_tails[ju],
            equivalence_ratio: lmu_tails[ju] / linf_tails[ju],
            tail_difference: lmu_tails[ju] - linf_tails[ju],
            refined_curve: refined,
            difference_ratio: (lmu_tails[ju] - linf_tails[ju]) / refined,
            d0_tail: d0_tails[ju],
            d0_curve: d0c,
            d0_ratio: d0_tails[ju] / d0c,
            d1_tail: d1_tails[ju],
            d1_curve: d1c,
            d1_ratio: d1_tails[ju] / d1c,
            k_tail: k_tails[ju],
            k_curve: kc,
            k_ratio: k_tails[ju] / kc,
        }
    };
    let rows: Vec<CompareRow> = grid.iter().map(|&j| row_at(j)).collect();

    // Trend probe: deviations at the window start versus the geometric
    // midpoint (the far end touches the truncation edge, where the missing
    // beyond-truncation driver mass bites the order-j^{-a} quantities).
    let mid = ((section.j_lo as f64) * (section.j_hi as f64)).sqrt().round() as usize;
    let first = row_at(section.j_lo as u64);
    let middle = row_at(mid as u64);
    let last = row_at(section.j_hi as u64);

    let mut checks = Vec::new();
    let push_band = |name: &str, value: f64, lo: f64, hi: f64, checks: &mut Vec<CheckResult>| {
        checks.push(CheckResult {
            name: name.into(),
            pass: value >= lo && value <= hi,
            value,
            bound_lo: lo,
            bound_hi: hi,
        });
    };
    push_band(
        "equivalence_ratio_at_window_end",
        last.equivalence_ratio,
        section.ratio_lo,
        section.ratio_hi,
        &mut checks,
    );
    push_band(
        "equivalence_ratio_trend_improves",
        (middle.equivalence_ratio - 1.0).abs(),
        0.0,
        (first.equivalence_ratio - 1.0).abs() + 1e-12,
        &mut checks,
    );
    push_band(
        "difference_ratio_at_window_end",
        last.difference_ratio,
        section.band_lo,
        section.band_hi,
        &mut checks,
    );
    push_band(
        "difference_ratio_trend_improves",
        (middle.difference_ratio - 1.0).abs(),
        0.0,
        (first.difference_ratio - 1.0).abs() + 1e-12,
        &mut checks,
    );
    push_band(
        "d0_ratio_at_window_end",
        last.d0_ratio,
        section.band_lo,
        section.band_hi,
        &mut checks,
    );
    push_band(
        "d1_ratio_at_window_end",
        last.d1_ratio,
        section.band_lo,
        section.band_hi,
        &mut checks,
    );
    push_band(
        "k_ratio_at_window_end",
        last.k_ratio,
        section.band_lo,
        section.band_hi,
        &mut checks,
    );

    let mut warnings = Vec::new();
    let mut decreasing = true;
    for j in section.j_lo..section.j_hi {
        if all.l_inf.coeff(j + 1) > all.l_inf.coeff(j) {
            decreasing = false;
            warnings.push(format!(
                "non-retrial pmf increases at level {j}; the refined difference premise is unverified"
            ));
            break;
        }
    }

    let sim_deltas = match sim {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                Error::InvalidParameter(format!("cannot read sim artifact {}: {e}", path.display()))
            })?;
            let artifact: SimArtifact = serde_json::from_str(&text).map_err(|e| {
                Error::InvalidParameter(format!("bad sim artifact {}: {e}", path.display()))
            })?;
            let exact_tails = if artifact.mode == "standard" {
                &linf_tails
            } else {
                &lmu_tails
            };
            let j_cap = (artifact.estimate.total_tail.len() - 1).min(20).min(trunc);
            let mut deltas = Vec::new();
            let mut worst: f64 = 0.0;
            for j in 0..=j_cap {
                let ci = artifact.estimate.total_tail[j];
                let reliable = artifact.estimate.total_tail_reliable[j];
                let sigmas = if ci.half_width > 0.0 {
                    (ci.mean - exact_tails[j]).abs() / ci.half_width
                } else {
                    0.0
                };
                if reliable {
                    worst = worst.max(sigmas);
                }
                deltas.push(SimDelta {
                    j: j as u64,
                    simulated: ci.mean,
                    exact: exact_tails[j],
                    half_width: ci.half_width,
                    sigmas,
                    reliable,
                });
            }
            push_band(
                "simulation_within_confidence",
                worst,
                0.0,
                section.sim_sigma,
                &mut checks,
            );
            Some(deltas)
        }
        None => None,
    };

    let pass = checks.iter().all(|c| c.pass);
    let compare_report = CompareReport {
        command: "compare",
        case_id: report.case_id.as_str(),
        a: report.a,
        rho: report.rho,
        psi: report.psi,
        trunc,
        window: (section.j_lo, section.j_hi),
        rows,
        checks,
        linf_pmf_decreasing_on_window: decreasing,
        warnings,
        sim_deltas,
        pass,
        config: cfg.echo().clone(),
    };
    write_json(out, &compare_report)?;

    if let Some(svg_path) = svg {
        let grid_all = log_grid(1, trunc as u64, 200);
        let sample = |tails: &[f64]| -> Vec<(f64, f64)> {
            grid_all
                .iter()
                .map(|&j| (j as f64, tails[j as usize]))
                .collect()
        };
        let curve_points = |c: TailCurve| -> Vec<(f64, f64)> {
            grid_all.iter().map(|&j| (j as f64, c.eval(j as f64))).collect()
        };
        let series = vec![
            PlotSeries {
                name: "retrial system size",
                color: "#c03020",
                dashed: false,
                points: sample(&lmu_tails),
            },
            PlotSeries {
                name: "non-retrial system size",
                color: "#2040c0",
                dashed: false,
                points: sample(&linf_tails),
            },
            PlotSeries {
                name: "idle orbit",
                color: "#208040",
                dashed: false,
                points: sample(&d0_tails),
            },
            PlotSeries {
                name: "busy orbit",
                color: "#a06010",
                dashed: false,
                points: sample(&d1_tails),
            },
            PlotSeries {
                name: "system asymptote",
                color: "#2040c0",
                dashed: true,
                points: curve_points(report.system_size_curve()),
            },
            PlotSeries {
                name: "idle-orbit asymptote",
                color: "#208040",
                dashed: true,
                points: curve_points(report.d0_curve()),
            },
            PlotSeries {
                name: "busy-orbit asymptote",
                color: "#a06010",
                dashed: true,
                points: curve_points(report.d1_curve()),
            },
        ];
        write_svg(svg_path, "stationary tails and asymptotes", &series)?;
    }
    Ok(pass)
}

#[derive(Debug, Serialize)]
struct ExpansionMeta {
    command: &'static str,
    /// Heavier variable: tail (theta1/(theta1+j))^(index1) on {1,2,...}.
    theta1: f64,
    index1: f64,
    c1: f64,
    /// Lighter variable: down-shifted power-tail law on {0,1,...}.
    theta2: f64,
    index2: f64,
    c2: f64,
    mu2: f64,
    trunc: usize,
    config: BTreeMap<String, String>,
}

/// Numerical check of the second-order convolution expansion: for
/// independent X1 (tail index d-1) and X2 (tail index d, finite mean mu2),
///
///   P{X1 + X2 > t} - F1bar(t)
///   --------------------------------------  ->  1.
///   (d-1) mu2 t^-1 F1bar(t) + F2bar(t)
pub fn cmd_check_expansion(config_path: &Path, out: &Path) -> Result<()> {
    let mut cfg = RunConfig::load(config_path)?;
    let section = cfg.expansion()?;

    let law1 = BatchDist::pareto_tail(section.theta1, section.index1)?;
    let law2 = BatchDist::pareto_tail(section.theta2, section.index2)?;
    let x1 = TruncSeries::from_batch(&law1, section.trunc);
    // Down-shift the lighter law onto {0,1,...}: same tail constant, and a
    // point mass at zero keeps the hypothesis c2 > 0 honest.
    let x2 = TruncSeries::from_batch_shifted_down(&law2, section.trunc);
    let conv = x1.mul(&x2)?;

    let conv_tails = conv.tails();
    let x1_tails = x1.tails();
    let mu2 = law2.chi1() - 1.0;
    let d = section.index2;

    let header = ["t", "sum_tail", "x1_tail", "x2_tail", "excess", "expansion", "ratio"];
    let mut rows = Vec::new();
    for &t in &section.t_values {
        let tf = t as f64;
        let f1bar = x1_tails[t];
        let f2bar = law2.tail(t as u64 + 1);
        let excess = conv_tails[t] - f1bar;
        let expansion = (d - 1.0) * mu2 * f1bar / tf + f2bar;
        rows.push(vec![
            Cell::Int(t as u64),
            Cell::Float(conv_tails[t]),
            Cell::Float(f1bar),
            Cell::Float(f2bar),
            Cell::Float(excess),
            Cell::Float(expansion),
            Cell::Float(excess / expansion),
        ]);
    }
    write_csv(out, &header, &rows)?;

    let meta = ExpansionMeta {
        command: "check-expansion",
        theta1: section.theta1,
        index1: section.index1,
        c1: section.theta1.powf(section.index1),
        theta2: section.theta2,
        index2: section.index2,
        c2: section.theta2.powf(section.index2),
        mu2,
        trunc: section.trunc,
        config: cfg.echo().clone(),
    };
    write_json(&sidecar(out), &meta)
}
