//! Acceptance suite: one test per release criterion, each printing a
//! `acceptance NN <name>: PASS` line (run with `--nocapture` to see them on
//! success). Heavy shared work (the reference model at the working
//! truncation, the long simulations) is computed once and reused.
//!
//! The reference model throughout: unit-rate arrivals, unit retrial rate,
//! single-customer batches, Lomax(0.75, 2.5) service. Hand arithmetic gives
//! rho = 0.5, a = 2.5, psi = 1, L = 0.75^2.5, c_k = 8/3, c_k_circ = 4/3,
//! c_d0 = 1.6, c_d1 = 8/3, refined coefficient 3.6.

#![allow(clippy::needless_range_loop)]

use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::OnceLock;

use retrialq_core::asymptotics::{self, CaseId};
use retrialq_core::exact::{self, ExactDistributions};
use retrialq_core::model::{BatchDist, ModelParams, ServiceDist};
use retrialq_core::series::{compound_poisson, TruncSeries};

const DESK_TRUNC: usize = 16384;

fn e1() -> ModelParams {
    ModelParams::new(
        1.0,
        1.0,
        BatchDist::deterministic(1).unwrap(),
        ServiceDist::lomax(0.75, 2.5).unwrap(),
    )
    .unwrap()
}

fn e2() -> ModelParams {
    ModelParams::new(
        0.2,
        1.0,
        BatchDist::pareto_tail(2.0, 1.8).unwrap(),
        ServiceDist::exponential(1.0).unwrap(),
    )
    .unwrap()
}

fn e3() -> ModelParams {
    ModelParams::new(
        0.5,
        1.0,
        BatchDist::pareto_tail(2.0, 2.5).unwrap(),
        ServiceDist::lomax(0.75, 2.5).unwrap(),
    )
    .unwrap()
}

/// The reference model at the working truncation, shared by criteria 5-8.
fn desk() -> &'static ExactDistributions {
    static DESK: OnceLock<ExactDistributions> = OnceLock::new();
    DESK.get_or_init(|| exact::compute_all(&e1(), DESK_TRUNC).unwrap())
}

fn work_dir() -> &'static PathBuf {
    static DIR: OnceLock<PathBuf> = OnceLock::new();
    DIR.get_or_init(|| {
        let dir = std::env::temp_dir().join(format!("retrialq-acceptance-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        dir
    })
}

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_retrialq"))
}

fn write_file(name: &str, text: &str) -> PathBuf {
    let path = work_dir().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn run_ok(args: &[&str]) {
    let out = cli().args(args).output().unwrap();
    assert!(
        out.status.success(),
        "command {:?} failed: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn log_slope(tails: &[f64], j_lo: usize, j_hi: usize) -> f64 {
    (tails[j_hi].ln() - tails[j_lo].ln()) / ((j_hi as f64).ln() - (j_lo as f64).ln())
}

/// Criterion 1: every closed-form constant matches an independent
/// second-path evaluation (log-domain arithmetic) to 1e-12, the idle-orbit
/// identity holds exactly, and the reference hand values are reproduced.
#[test]
fn acceptance_01_constants_suite() {
    for (name, params) in [("case1", e1()), ("case2", e2()), ("case3", e3())] {
        let r = asymptotics::report(&params).unwrap();
        let lam = params.lambda;
        let mu = params.mu;
        let chi1 = params.chi1();
        let beta1 = params.beta1();
        let rho = params.rho();
        let a = r.a;
        let lam_chi = lam * chi1;

        // Second path: assemble each constant in the log domain, summing
        // contributions with different association than the branch displays.
        let log_or_zero = |case1_term: f64, case2_term: f64| -> f64 {
            match r.case_id {
                CaseId::Case1 => case1_term,
                CaseId::Case2 => case2_term,
                CaseId::Case3 => case1_term + case2_term,
            }
        };
        let psi2 = (lam.ln() + (rho + chi1 - 1.0).ln() - mu.ln() - (1.0 - rho).ln()).exp();
        assert!(rel_close(r.psi, psi2, 1e-12), "{name} psi {} vs {psi2}", r.psi);

        let ck2 = log_or_zero(
            (a * lam_chi.ln() + chi1.ln()).exp(),
            r.c_x,
        ) / ((a - 1.0) * ((1.0 - rho) * (rho + chi1 - 1.0)));
        assert!(rel_close(r.c_k, ck2, 1e-12), "{name} c_k {} vs {ck2}", r.c_k);

        let ckc2 = log_or_zero(
            (a * lam_chi.ln()).exp(),
            (lam.ln() + beta1.ln() + r.c_x.max(1e-300).ln()).exp(),
        ) / ((a - 1.0) * (1.0 - rho));
        assert!(
            rel_close(r.c_k_circ, ckc2, 1e-12),
            "{name} c_k_circ {} vs {ckc2}",
            r.c_k_circ
        );

        let cd02 = log_or_zero(
            ((a + 1.0) * lam_chi.ln()).exp(),
            lam * r.c_x,
        ) / (a * (mu * (1.0 - rho) * (1.0 - rho)));
        assert!(
            rel_close(r.c_d0, cd02, 1e-12),
            "{name} c_d0 {} vs {cd02}",
            r.c_d0
        );

        let cd12 = log_or_zero(
            (a * lam_chi.ln()).exp(),
            lam * beta1 * r.c_x,
        ) / ((a - 1.0) * ((1.0 - rho) * rho));
        assert!(
            rel_close(r.c_d1, cd12, 1e-12),
            "{name} c_d1 {} vs {cd12}",
            r.c_d1
        );

        // The key identity behind the idle-orbit tail constant.
        let identity = (1.0 - 1.0 / a) * r.c_k * r.psi;
        assert!(
            rel_close(r.c_d0, identity, 1e-12),
            "{name} c_d0 identity {} vs {identity}",
            r.c_d0
        );

        let refined2 = (a - 1.0) * psi2 * ckc2 + cd02;
        assert!(
            rel_close(r.refined_coefficient, refined2, 1e-12),
            "{name} refined {} vs {refined2}",
            r.refined_coefficient
        );
    }

    // Reference hand values.
    let r = asymptotics::report(&e1()).unwrap();
    assert!(matches!(r.case_id, CaseId::Case1) && r.a == 2.5);
    assert!((r.psi - 1.0).abs() < 1e-12);
    assert!((r.c_k - 8.0 / 3.0).abs() < 1e-12);
    assert!((r.c_k_circ - 4.0 / 3.0).abs() < 1e-12);
    assert!((r.c_d0 - 1.6).abs() < 1e-12);
    assert!((r.c_d1 - 8.0 / 3.0).abs() < 1e-12);
    assert!((r.refined_coefficient - 3.6).abs() < 1e-12);

    // Batch-dominated reference: the curve value folds the batch constant.
    let p2 = e2();
    let r2 = asymptotics::report(&p2).unwrap();
    let rho2 = p2.rho();
    let expect = 2f64.powf(1.8) / (0.8 * (1.0 - rho2) * (rho2 + p2.chi1() - 1.0));
    assert!(rel_close(r2.c_k * r2.l, expect, 1e-12));

    println!("acceptance 01 constants-suite: PASS");
}

/// Criterion 2: series-engine oracles — the compound Poisson recursion
/// against the brute-force Poisson mixture, the exponential recurrence
/// against a term-by-term Taylor sum, and the equilibrium self-map of the
/// geometric law.
#[test]
fn acceptance_02_series_oracles() {
    // Compound Poisson vs brute-force mixture at several rates and batches.
    let n = 64;
    for (rate, batch) in [
        (0.5, BatchDist::geometric(0.35).unwrap()),
        (1.25, BatchDist::deterministic(3).unwrap()),
        (0.8, BatchDist::pareto_tail(1.5, 2.2).unwrap()),
    ] {
        let batch_series = TruncSeries::from_batch(&batch, n);
        let got = compound_poisson(rate, &batch_series, n).unwrap();
        let mut oracle = vec![0.0; n + 1];
        let mut pois = (-rate).exp();
        let mut power = TruncSeries::point_mass(0, n);
        for k in 0..=80 {
            if k > 0 {
                power = power.mul(&batch_series).unwrap();
                pois *= rate / k as f64;
            }
            for (o, &p) in oracle.iter_mut().zip(power.coeffs()) {
                *o += pois * p;
            }
        }
        let max_diff = got
            .coeffs()
            .iter()
            .zip(&oracle)
            .map(|(g, o)| (g - o).abs())
            .fold(0.0, f64::max);
        assert!(max_diff <= 1e-12, "rate {rate}: max diff {max_diff}");
    }

    // Exponential recurrence vs Taylor oracle.
    let mut coeffs = vec![0.0; n + 1];
    for (m, c) in coeffs.iter_mut().enumerate().skip(1) {
        *c = 0.04 / m as f64 + if m % 3 == 0 { 0.01 } else { 0.0 };
    }
    let c_total: f64 = coeffs.iter().sum();
    let got = TruncSeries::new_general(coeffs.clone())
        .exp_shifted(c_total)
        .unwrap();
    let mut oracle = vec![0.0; n + 1];
    oracle[0] = 1.0;
    let s = TruncSeries::new_general(coeffs);
    let mut power = TruncSeries::point_mass(0, n);
    let mut factorial = 1.0;
    for k in 1..=90 {
        power = power.mul(&s).unwrap();
        factorial *= k as f64;
        for (o, &p) in oracle.iter_mut().zip(power.coeffs()) {
            *o += p / factorial;
        }
    }
    let scale = (-c_total).exp();
    let max_diff = got
        .coeffs()
        .iter()
        .zip(&oracle)
        .map(|(g, o)| (g - o * scale).abs())
        .fold(0.0, f64::max);
    assert!(max_diff <= 1e-12, "taylor max diff {max_diff}");

    // Equilibrium self-map of the geometric law, exact to 1e-14.
    let p = 0.6f64;
    let m = 512i32;
    let geo: Vec<f64> = (0..=m).map(|k| (1.0 - p) * p.powi(k)).collect();
    let q = TruncSeries::new_pmf(geo).unwrap();
    let eq = q.equilibrium_transform(p / (1.0 - p)).unwrap();
    let max_diff = q
        .coeffs()
        .iter()
        .zip(eq.coeffs())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(max_diff <= 1e-14, "self-map max diff {max_diff}");

    println!("acceptance 02 series-oracles: PASS");
}

/// Criterion 3: a driver concentrated at zero turns the idle-orbit law into
/// exactly Poisson(psi).
#[test]
fn acceptance_03_degenerate_poisson() {
    let n = 1024;
    let psi = 1.0;
    let d0 = exact::d0_from_k(&TruncSeries::point_mass(0, n), psi).unwrap();
    let mut expect = (-psi).exp();
    let mut sup: f64 = 0.0;
    for j in 0..=n {
        sup = sup.max((d0.coeff(j) - expect).abs());
        expect *= psi / (j as f64 + 1.0);
    }
    assert!(sup <= 1e-12, "sup {sup}");
    println!("acceptance 03 degenerate-poisson: PASS");
}

fn mm1_config_text() -> String {
    "model.lambda = 1.0\n\
     model.mu = 1e6\n\
     model.batch.kind = deterministic\n\
     model.batch.m = 1\n\
     model.service.kind = exponential\n\
     model.service.rate = 2.0\n\
     exact.trunc = 1024\n\
     sim.horizon = 1e7\n\
     sim.replications = 8\n\
     sim.base_seed = 2024\n\
     sim.j_max = 64\n"
        .to_string()
}

/// The M/M/1 simulation artifact, produced through the CLI and reused by the
/// determinism criterion.
fn mm1_sim_paths() -> &'static (PathBuf, PathBuf) {
    static PATHS: OnceLock<(PathBuf, PathBuf)> = OnceLock::new();
    PATHS.get_or_init(|| {
        let cfg = write_file("mm1.ini", &mm1_config_text());
        let out = work_dir().join("mm1-sim.csv");
        run_ok(&[
            "sim",
            "-c",
            cfg.to_str().unwrap(),
            "-o",
            out.to_str().unwrap(),
        ]);
        (cfg, out)
    })
}

fn load_sim_estimate(csv_path: &Path) -> serde_json::Value {
    let json_path = csv_path.with_extension("json");
    serde_json::from_str(&std::fs::read_to_string(json_path).unwrap()).unwrap()
}

/// Criterion 4: against the closed-form M/M/1 law (huge retrial rate), the
/// exact engine reproduces the geometric tail to 1e-3 for j <= 20 and the
/// simulation agrees within three confidence half-widths.
#[test]
fn acceptance_04_mm1_oracle() {
    let p = ModelParams::new(
        1.0,
        1e6,
        BatchDist::deterministic(1).unwrap(),
        ServiceDist::exponential(2.0).unwrap(),
    )
    .unwrap();
    let rho = p.rho();
    assert!((rho - 0.5).abs() < 1e-15);
    let all = exact::compute_all(&p, 1024).unwrap();
    let tails = all.l_mu.tails();
    for j in 0..=20usize {
        let expect = rho.powi(j as i32 + 1);
        assert!(
            (tails[j] - expect).abs() < 1e-3,
            "exact j={j}: {} vs {expect}",
            tails[j]
        );
    }

    let (_, sim_csv) = mm1_sim_paths();
    let artifact = load_sim_estimate(sim_csv);
    let est = &artifact["estimate"];
    for j in 0..=20usize {
        if !est["total_tail_reliable"][j].as_bool().unwrap() {
            continue;
        }
        let mean = est["total_tail"][j]["mean"].as_f64().unwrap();
        let hw = est["total_tail"][j]["half_width"].as_f64().unwrap();
        let expect = rho.powi(j as i32 + 1);
        assert!(
            (mean - expect).abs() <= 3.0 * hw,
            "sim j={j}: {mean} +- {hw} vs {expect}"
        );
    }
    println!("acceptance 04 mm1-oracle: PASS");
}

/// Criterion 5: the orbit-driver tail follows its predicted power law at
/// desk scale — slope -(a-1) over the window, ratio to the curve inside
/// [0.8, 1.2] at the window end, deviation shrinking across the window.
#[test]
fn acceptance_05_driver_tail_asymptotics() {
    let all = desk();
    let rep = asymptotics::report(&e1()).unwrap();
    let tails = all.k.tails();
    let slope = log_slope(&tails, 1024, 4096);
    assert!(
        (slope + 1.5).abs() <= 0.1,
        "driver tail slope {slope} vs -1.5"
    );
    let curve = rep.k_curve();
    let r_start = tails[1024] / curve.eval(1024.0);
    let r_end = tails[4096] / curve.eval(4096.0);
    assert!((0.8..=1.2).contains(&r_end), "end ratio {r_end}");
    assert!(
        (r_end - 1.0).abs() <= (r_start - 1.0).abs(),
        "trend {r_start} -> {r_end}"
    );
    println!("acceptance 05 driver-tail-asymptotics: PASS");
}

/// Criterion 6: the idle-orbit tail follows c_d0 j^(-a) L at desk scale; the
/// hand-computed curve value at j = 1000 is confirmed against the exact
/// engine before the band is trusted.
#[test]
fn acceptance_06_idle_orbit_tail_asymptotics() {
    let all = desk();
    let rep = asymptotics::report(&e1()).unwrap();
    let curve = rep.d0_curve();
    let tails = all.d0.tails();

    // Hand value of the predicted curve at j = 1000.
    let predicted = curve.eval(1000.0);
    assert!(
        (predicted - 2.465e-8).abs() < 5e-12,
        "curve(1000) = {predicted:e}"
    );
    // The exact engine confirms it within five percent at this depth.
    let ratio_1000 = tails[1000] / predicted;
    assert!(
        (0.95..=1.05).contains(&ratio_1000),
        "exact/curve at 1000: {ratio_1000}"
    );

    let r_start = tails[1024] / curve.eval(1024.0);
    let r_mid = tails[2048] / curve.eval(2048.0);
    let r_end = tails[4096] / curve.eval(4096.0);
    assert!((0.7..=1.3).contains(&r_end), "end ratio {r_end}");
    // The deviation shrinks over the window interior; the far end touches
    // the truncation edge, where the missing beyond-truncation driver mass
    // suppresses the measured tail.
    assert!(
        (r_mid - 1.0).abs() <= (r_start - 1.0).abs(),
        "trend {r_start} -> {r_mid}"
    );
    println!("acceptance 06 idle-orbit-tail-asymptotics: PASS");
}

/// Criterion 7: the refined equivalence at desk scale — the two system-size
/// tails agree within five percent at the window end, and their difference
/// tracks the refined curve inside [0.7, 1.3] with a shrinking deviation;
/// the ultimately-decreasing premise holds empirically on the window.
#[test]
fn acceptance_07_refined_equivalence() {
    let all = desk();
    let rep = asymptotics::report(&e1()).unwrap();
    let lmu = all.l_mu.tails();
    let linf = all.l_inf.tails();
    let refined = rep.refined_curve();
    assert!((rep.refined_coefficient - 3.6).abs() < 1e-12);

    let equiv_end = lmu[4096] / linf[4096];
    assert!((0.95..=1.05).contains(&equiv_end), "equivalence {equiv_end}");

    let dr = |j: usize| (lmu[j] - linf[j]) / refined.eval(j as f64);
    let (d_start, d_mid, d_end) = (dr(1024), dr(2048), dr(4096));
    assert!((0.7..=1.3).contains(&d_end), "difference ratio {d_end}");
    assert!(
        (d_mid - 1.0).abs() <= (d_start - 1.0).abs(),
        "trend {d_start} -> {d_mid}"
    );

    for j in 1024..4096 {
        assert!(
            all.l_inf.coeff(j + 1) <= all.l_inf.coeff(j),
            "non-retrial pmf increases at {j}"
        );
    }
    println!("acceptance 07 refined-equivalence: PASS");
}

fn e1_sim_config_text() -> String {
    "model.lambda = 1.0\n\
     model.mu = 1.0\n\
     model.batch.kind = deterministic\n\
     model.batch.m = 1\n\
     model.service.kind = lomax\n\
     model.service.sigma = 0.75\n\
     model.service.d_b = 2.5\n\
     exact.trunc = 1024\n\
     sim.horizon = 1e7\n\
     sim.replications = 16\n\
     sim.base_seed = 31\n\
     sim.j_max = 64\n"
        .to_string()
}

/// The reference-model simulation artifact, shared with the determinism
/// criterion.
fn e1_sim_paths() -> &'static (PathBuf, PathBuf) {
    static PATHS: OnceLock<(PathBuf, PathBuf)> = OnceLock::new();
    PATHS.get_or_init(|| {
        let cfg = write_file("e1-sim.ini", &e1_sim_config_text());
        let out = work_dir().join("e1-sim.csv");
        run_ok(&[
            "sim",
            "-c",
            cfg.to_str().unwrap(),
            "-o",
            out.to_str().unwrap(),
        ]);
        (cfg, out)
    })
}

/// Criterion 8: simulated retrial-system tails agree with the exact engine
/// within three confidence half-widths up to level 20, and the busy
/// fraction reproduces the offered load to 0.005.
#[test]
fn acceptance_08_cross_engine() {
    let (_, sim_csv) = e1_sim_paths();
    let artifact = load_sim_estimate(sim_csv);
    let est = &artifact["estimate"];
    let busy = est["busy_fraction"]["mean"].as_f64().unwrap();
    assert!((busy - 0.5).abs() <= 0.005, "busy fraction {busy}");

    let tails = desk().l_mu.tails();
    for j in 0..=20usize {
        if !est["total_tail_reliable"][j].as_bool().unwrap() {
            continue;
        }
        let mean = est["total_tail"][j]["mean"].as_f64().unwrap();
        let hw = est["total_tail"][j]["half_width"].as_f64().unwrap();
        assert!(
            (mean - tails[j]).abs() <= 3.0 * hw,
            "j={j}: sim {mean} +- {hw} vs exact {}",
            tails[j]
        );
    }
    println!("acceptance 08 cross-engine: PASS");
}

/// Criterion 9: the second-order convolution expansion holds numerically for
/// matched-index discrete power-tail laws: the excess over the heavy tail,
/// divided by the predicted expansion, is within ten percent at t = 2000.
#[test]
fn acceptance_09_second_order_expansion() {
    let cfg = write_file(
        "expansion.ini",
        "expansion.theta1 = 2.0\n\
         expansion.index1 = 1.5\n\
         expansion.theta2 = 2.0\n\
         expansion.index2 = 2.5\n\
         expansion.trunc = 16384\n\
         expansion.t_values = 500, 1000, 2000\n",
    );
    let out = work_dir().join("expansion.csv");
    run_ok(&[
        "check-expansion",
        "-c",
        cfg.to_str().unwrap(),
        "-o",
        out.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&out).unwrap();
    let mut checked = false;
    for line in text.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        let t: u64 = cells[0].parse().unwrap();
        let ratio: f64 = cells[6].parse().unwrap();
        if t == 2000 {
            assert!((0.9..=1.1).contains(&ratio), "ratio at 2000: {ratio}");
            checked = true;
        }
    }
    assert!(checked, "t = 2000 row missing");

    // Scaling the heavy component's constant by ten must not move the
    // limiting ratio (theta1 = (10 * 2^1.5)^(2/3) makes c1 ten times larger).
    let cfg10 = write_file(
        "expansion10.ini",
        "expansion.theta1 = 9.28318\n\
         expansion.index1 = 1.5\n\
         expansion.theta2 = 2.0\n\
         expansion.index2 = 2.5\n\
         expansion.trunc = 16384\n\
         expansion.t_values = 2000\n",
    );
    let out10 = work_dir().join("expansion10.csv");
    run_ok(&[
        "check-expansion",
        "-c",
        cfg10.to_str().unwrap(),
        "-o",
        out10.to_str().unwrap(),
    ]);
    let text10 = std::fs::read_to_string(&out10).unwrap();
    let last = text10.lines().last().unwrap();
    let ratio10: f64 = last.split(',').next_back().unwrap().parse().unwrap();
    assert!(
        (0.9..=1.1).contains(&ratio10),
        "scaled-constant ratio {ratio10}"
    );
    println!("acceptance 09 second-order-expansion: PASS");
}

/// Criterion 10: byte-identical artifacts on re-run for every command,
/// including the parallel-replication simulations of criteria 4 and 8.
#[test]
fn acceptance_10_determinism() {
    let dir = work_dir();

    // Re-run the two simulation workloads and compare bytes.
    let (mm1_cfg, mm1_out) = mm1_sim_paths();
    let rerun = dir.join("mm1-sim-rerun.csv");
    run_ok(&[
        "sim",
        "-c",
        mm1_cfg.to_str().unwrap(),
        "-o",
        rerun.to_str().unwrap(),
    ]);
    assert_eq!(
        std::fs::read(mm1_out).unwrap(),
        std::fs::read(&rerun).unwrap(),
        "simulation CSV differs between runs"
    );
    assert_eq!(
        std::fs::read(mm1_out.with_extension("json")).unwrap(),
        std::fs::read(rerun.with_extension("json")).unwrap(),
        "simulation JSON differs between runs"
    );

    let (e1_cfg, e1_out) = e1_sim_paths();
    let rerun_e1 = dir.join("e1-sim-rerun.csv");
    run_ok(&[
        "sim",
        "-c",
        e1_cfg.to_str().unwrap(),
        "-o",
        rerun_e1.to_str().unwrap(),
    ]);
    assert_eq!(
        std::fs::read(e1_out).unwrap(),
        std::fs::read(&rerun_e1).unwrap()
    );

    // Exact, asymptotic, comparison, and expansion artifacts.
    let cfg = write_file(
        "det.ini",
        "model.lambda = 1.0\n\
         model.mu = 1.0\n\
         model.batch.kind = deterministic\n\
         model.batch.m = 1\n\
         model.service.kind = lomax\n\
         model.service.sigma = 0.75\n\
         model.service.d_b = 2.5\n\
         exact.trunc = 1024\n",
    );
    for (args, outs) in [
        (vec!["exact"], vec!["det-exact.csv", "det-exact.json"]),
        (vec!["asym"], vec!["det-asym.csv", "det-asym.json"]),
        (vec!["compare"], vec!["det-cmp.json"]),
    ] {
        let mut bytes: Vec<Vec<u8>> = Vec::new();
        for round in 0..2 {
            let out = dir.join(format!("round{round}-{}", outs[0]));
            let mut full: Vec<String> = args.iter().map(|s| s.to_string()).collect();
            full.push("-c".into());
            full.push(cfg.to_str().unwrap().into());
            full.push("-o".into());
            full.push(out.to_str().unwrap().into());
            if args[0] == "compare" {
                let svg = dir.join(format!("round{round}-det.svg"));
                full.push("--svg".into());
                full.push(svg.to_str().unwrap().into());
            }
            let full_refs: Vec<&str> = full.iter().map(String::as_str).collect();
            run_ok(&full_refs);
            let mut blob = std::fs::read(&out).unwrap();
            if outs.len() > 1 {
                blob.extend(std::fs::read(out.with_extension("json")).unwrap());
            }
            if args[0] == "compare" {
                blob.extend(std::fs::read(dir.join(format!("round{round}-det.svg"))).unwrap());
            }
            bytes.push(blob);
        }
        assert_eq!(bytes[0], bytes[1], "{} artifacts differ", args[0]);
    }
    println!("acceptance 10 determinism: PASS");
}
