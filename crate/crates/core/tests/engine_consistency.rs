//! Cross-module consistency: the exact series engine against the closed-form
//! asymptotics, across all three tail regimes.

use retrialq_core::asymptotics::{self, TailCurve};
use retrialq_core::exact;
use retrialq_core::model::{BatchDist, ModelParams, ServiceDist, WeightKind};
use retrialq_core::series::{compound_over_service, TruncSeries};

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

fn log_slope(tails: &[f64], j_lo: usize, j_hi: usize) -> f64 {
    (tails[j_hi].ln() - tails[j_lo].ln()) / ((j_hi as f64).ln() - (j_lo as f64).ln())
}

fn check_window_tol(
    name: &str,
    tails: &[f64],
    curve: TailCurve,
    j_lo: usize,
    j_hi: usize,
    slope_tol: f64,
) {
    for j in [j_lo, j_hi] {
        let ratio = tails[j] / curve.eval(j as f64);
        assert!(
            (0.7..=1.3).contains(&ratio),
            "{name} at {j}: ratio {ratio}"
        );
    }
    let slope = log_slope(tails, j_lo, j_hi);
    assert!(
        (slope + curve.exponent).abs() <= slope_tol,
        "{name}: slope {slope} vs -{}",
        curve.exponent
    );
    // Tails never increase.
    for j in j_lo..j_hi {
        assert!(tails[j + 1] <= tails[j] + 1e-15, "{name} rises at {j}");
    }
}

fn check_window(name: &str, tails: &[f64], curve: TailCurve, j_lo: usize, j_hi: usize) {
    check_window_tol(name, tails, curve, j_lo, j_hi, 0.1);
}

#[test]
fn tails_track_asymptotic_curves_reference_model() {
    let params = e1();
    let n = 4096;
    let all = exact::compute_all(&params, n).unwrap();
    let rep = asymptotics::report(&params).unwrap();
    let (j_lo, j_hi) = (n / 16, n / 4);
    check_window("driver", &all.k.tails(), rep.k_curve(), j_lo, j_hi);
    check_window("k_star", &all.k_star.tails(), rep.curves.k_star, j_lo, j_hi);
    check_window("k_circ", &all.k_circ.tails(), rep.curves.k_circ, j_lo, j_hi);
    check_window("idle orbit", &all.d0.tails(), rep.d0_curve(), j_lo, j_hi);
    check_window("busy orbit", &all.d1.tails(), rep.d1_curve(), j_lo, j_hi);
    check_window(
        "non-retrial size",
        &all.l_inf.tails(),
        rep.system_size_curve(),
        j_lo,
        j_hi,
    );
    check_window(
        "retrial size",
        &all.l_mu.tails(),
        rep.system_size_curve(),
        j_lo,
        j_hi,
    );
}

#[test]
fn tails_track_asymptotic_curves_batch_dominated() {
    let params = e2();
    let n = 2048;
    let all = exact::compute_all(&params, n).unwrap();
    let rep = asymptotics::report(&params).unwrap();
    let (j_lo, j_hi) = (n / 16, n / 4);
    check_window("driver", &all.k.tails(), rep.k_curve(), j_lo, j_hi);
    // The idle-orbit tail sits one power below the rest, so at this
    // truncation its measured slope still carries more second-order drift.
    check_window_tol("idle orbit", &all.d0.tails(), rep.d0_curve(), j_lo, j_hi, 0.12);
    check_window("busy orbit", &all.d1.tails(), rep.d1_curve(), j_lo, j_hi);
    check_window(
        "retrial size",
        &all.l_mu.tails(),
        rep.system_size_curve(),
        j_lo,
        j_hi,
    );
}

#[test]
fn tails_track_asymptotic_curves_equal_index() {
    let params = e3();
    let n = 2048;
    let all = exact::compute_all(&params, n).unwrap();
    let rep = asymptotics::report(&params).unwrap();
    let (j_lo, j_hi) = (n / 16, n / 4);
    check_window("driver", &all.k.tails(), rep.k_curve(), j_lo, j_hi);
    check_window_tol("idle orbit", &all.d0.tails(), rep.d0_curve(), j_lo, j_hi, 0.12);
    check_window(
        "retrial size",
        &all.l_mu.tails(),
        rep.system_size_curve(),
        j_lo,
        j_hi,
    );
}

#[test]
fn decomposition_identity_all_regimes() {
    for (params, n) in [(e1(), 1024usize), (e2(), 512), (e3(), 512)] {
        let all = exact::compute_all(&params, n).unwrap();
        let rho = all.rho;
        let mut sup: f64 = 0.0;
        for j in 0..=n {
            let mut mix = (1.0 - rho) * all.d0.coeff(j);
            if j >= 1 {
                mix += rho * all.d1.coeff(j - 1);
            }
            sup = sup.max((all.l_mu.coeff(j) - mix).abs());
        }
        assert!(sup <= 1e-10, "decomposition sup {sup}");
    }
}

#[test]
fn equilibrium_route_matches_quadrature_route() {
    // The compounded equilibrium block has a second construction: the
    // discrete equilibrium of the plain arrival block with mean rho. The
    // two routes go through different quadratures and must agree.
    for (params, n) in [(e1(), 1024usize), (e3(), 512)] {
        let n_bx = compound_over_service(&params, WeightKind::Service, n).unwrap();
        let n_bex = compound_over_service(&params, WeightKind::EquilibriumService, n).unwrap();
        let x_de = TruncSeries::from_batch(&params.batch, n)
            .equilibrium_transform(params.chi1())
            .unwrap();
        let t_quadrature = n_bex.mul(&x_de).unwrap();
        let t_algebraic = n_bx.equilibrium_transform(params.rho()).unwrap();
        let sup = t_quadrature.sup_distance(&t_algebraic);
        assert!(sup < 1e-9, "routes differ by {sup}");
    }
}

#[test]
fn driver_scalar_factorization() {
    // K(z) = K*(z) K~(z) evaluated through the closed forms, against the
    // series product, in every regime.
    for (params, n) in [(e1(), 2048usize), (e2(), 512), (e3(), 512)] {
        let all = exact::compute_all(&params, n).unwrap();
        for z in [0.2, 0.5, 0.8] {
            let scalar = exact::k_star_scalar(&params, z).unwrap()
                * exact::k_circ_scalar(&params, z).unwrap();
            let series = all.k.eval(z);
            assert!(
                ((series - scalar) / scalar).abs() < 1e-7,
                "K({z}): series {series} vs scalar {scalar}"
            );
        }
    }
}

#[test]
fn idle_orbit_mean_is_psi_in_all_regimes() {
    // The truncated mean sits below psi by roughly psi * deficit(K) plus the
    // idle-orbit tail mass beyond the truncation; both are visible through
    // the deficits, which gives a computable bound.
    for (params, n) in [(e1(), 4096usize), (e2(), 2048), (e3(), 2048)] {
        let all = exact::compute_all(&params, n).unwrap();
        let psi = params.psi().unwrap();
        let bound = 1e-6
            + 2.0 * (psi * all.k.mass_deficit() + 6.0 * n as f64 * all.d0.mass_deficit());
        let diff = (all.d0.mean() - psi).abs();
        assert!(diff < bound, "mean {} vs psi {psi} (bound {bound})", all.d0.mean());
    }
}

#[test]
fn retrial_limit_collapses_to_non_retrial() {
    let params = ModelParams::new(
        1.0,
        1e6,
        BatchDist::deterministic(1).unwrap(),
        ServiceDist::exponential(2.0).unwrap(),
    )
    .unwrap();
    let all = exact::compute_all(&params, 1024).unwrap();
    assert!(all.l_mu.tv_distance(&all.l_inf) < 1e-3);
}
