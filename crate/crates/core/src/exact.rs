//! Exact (truncated) stationary distributions, assembled from the known
//! generating functions.
//!
//! The orbit increment given an idle server decomposes into independent
//! pieces: an equilibrium factor K* (the equilibrium law of the customers
//! arriving within one service plus the residual batch), a geometric
//! compound K~ over equilibrium-service arrival blocks, their sum K, and
//! finally D0 whose GF is exp(-psi * integral of K(u) from z to 1). The
//! system sizes follow by convolution: L_inf for the ordinary batch queue
//! and L_mu = L_inf + D0 for the retrial queue, while the busy-server orbit
//! D1 adds one more arrival block and the compound factor.
//!
//! The exponential is computed from the rewritten integral form whose
//! integrand is a pmf; the raw ratio form (which has a removable singularity
//! near u = 1) is kept only as a scalar-point oracle, `d0_scalar`.

use crate::error::{Error, Result};
use crate::model::{ModelParams, WeightKind};
use crate::quad::adaptive_pieces;
use crate::series::{compound_over_service, TruncSeries};

/// The seven stationary laws of one model at a shared truncation.
#[derive(Debug, Clone)]
pub struct ExactDistributions {
    /// Equilibrium factor of the orbit driver.
    pub k_star: TruncSeries,
    /// Geometric-compound factor of the orbit driver.
    pub k_circ: TruncSeries,
    /// Orbit driver K = K* + K~.
    pub k: TruncSeries,
    /// Orbit size given an idle server.
    pub d0: TruncSeries,
    /// Orbit size given a busy server.
    pub d1: TruncSeries,
    /// System size of the ordinary (non-retrial) batch queue.
    pub l_inf: TruncSeries,
    /// System size of the retrial queue.
    pub l_mu: TruncSeries,
    pub psi: f64,
    pub rho: f64,
}

/// Shared building blocks: every public series operation recomputes only
/// what it needs, while `compute_all` reuses one set.
struct Prereqs {
    /// Customers arriving within one service time.
    n_bx: TruncSeries,
    /// Residual batch X - 1.
    x0: TruncSeries,
    /// Customers within an equilibrium service plus an equilibrium batch.
    t: TruncSeries,
}

fn prereqs(params: &ModelParams, trunc: usize) -> Result<Prereqs> {
    params.ensure_stable()?;
    let n_bx = compound_over_service(params, WeightKind::Service, trunc)?;
    let n_bex = compound_over_service(params, WeightKind::EquilibriumService, trunc)?;
    let x0 = TruncSeries::from_batch_shifted_down(&params.batch, trunc);
    let x_de =
        TruncSeries::from_batch(&params.batch, trunc).equilibrium_transform(params.chi1())?;
    let t = n_bex.mul(&x_de)?;
    Ok(Prereqs { n_bx, x0, t })
}

fn k_star_from(params: &ModelParams, pre: &Prereqs) -> Result<TruncSeries> {
    let n_bx_x0 = pre.n_bx.mul(&pre.x0)?;
    n_bx_x0.equilibrium_transform(params.rho() + params.chi1() - 1.0)
}

fn k_circ_from(params: &ModelParams, pre: &Prereqs) -> Result<TruncSeries> {
    pre.t.reciprocal_complement(params.rho())
}

/// Equilibrium factor of the orbit driver.
pub fn k_star_series(params: &ModelParams, trunc: usize) -> Result<TruncSeries> {
    let pre = prereqs(params, trunc)?;
    k_star_from(params, &pre)
}

/// Geometric-compound factor of the orbit driver.
pub fn k_circ_series(params: &ModelParams, trunc: usize) -> Result<TruncSeries> {
    let pre = prereqs(params, trunc)?;
    k_circ_from(params, &pre)
}

/// The orbit driver K.
pub fn k_series(params: &ModelParams, trunc: usize) -> Result<TruncSeries> {
    let pre = prereqs(params, trunc)?;
    k_star_from(params, &pre)?.mul(&k_circ_from(params, &pre)?)
}

/// D0 from a driver pmf and a mean orbit level psi:
/// exp(-psi * integral from z to 1 of K(u) du).
///
/// The shift constant is accumulated from the truncated exponent itself
/// (psi * a_0 differs from it only by the dropped k_N/(N+1) term), so the
/// result is recognizably a pmf at every truncation.
pub fn d0_from_k(k: &TruncSeries, psi: f64) -> Result<TruncSeries> {
    let a = k.integral_to_one();
    let mut exponent = vec![0.0; k.trunc() + 1];
    let mut c = 0.0;
    for (j, e) in exponent.iter_mut().enumerate().skip(1) {
        *e = -psi * a.coeff(j);
        c += *e;
    }
    TruncSeries::new_general(exponent).exp_shifted(c)
}

/// Orbit size given an idle server.
pub fn d0_series(params: &ModelParams, trunc: usize) -> Result<TruncSeries> {
    d0_from_k(&k_series(params, trunc)?, params.psi()?)
}

/// System size of the ordinary batch queue (arrival block times the
/// geometric compound).
pub fn l_inf_series(params: &ModelParams, trunc: usize) -> Result<TruncSeries> {
    let pre = prereqs(params, trunc)?;
    pre.n_bx.mul(&k_circ_from(params, &pre)?)
}

/// System size of the retrial queue, L_mu = L_inf + D0.
pub fn l_mu_series(params: &ModelParams, trunc: usize) -> Result<TruncSeries> {
    Ok(compute_all(params, trunc)?.l_mu)
}

/// Orbit size given a busy server: one arrival block plus the compound
/// factor plus the idle-orbit law.
pub fn d1_series(params: &ModelParams, trunc: usize) -> Result<TruncSeries> {
    Ok(compute_all(params, trunc)?.d1)
}

/// The sub-probability laws of (server state, orbit size): mass 1 - rho on
/// the idle component and rho on the busy component.
pub fn joint_orbit_server(params: &ModelParams, trunc: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let all = compute_all(params, trunc)?;
    let rho = all.rho;
    let p0 = all.d0.coeffs().iter().map(|&c| (1.0 - rho) * c).collect();
    let p1 = all.d1.coeffs().iter().map(|&c| rho * c).collect();
    Ok((p0, p1))
}

/// Computes all seven series, sharing the quadrature work.
pub fn compute_all(params: &ModelParams, trunc: usize) -> Result<ExactDistributions> {
    let psi = params.psi()?;
    let pre = prereqs(params, trunc)?;
    let k_star = k_star_from(params, &pre)?;
    let k_circ = k_circ_from(params, &pre)?;
    let k = k_star.mul(&k_circ)?;
    let d0 = d0_from_k(&k, psi)?;
    let l_inf = pre.n_bx.mul(&k_circ)?;
    let l_mu = l_inf.mul(&d0)?;
    let d1 = pre.t.mul(&k_circ)?.mul(&d0)?;
    Ok(ExactDistributions {
        k_star,
        k_circ,
        k,
        d0,
        d1,
        l_inf,
        l_mu,
        psi,
        rho: params.rho(),
    })
}

// ---------------------------------------------------------------------------
// Scalar-point oracles.
//
// Independent evaluations of the generating functions straight from their
// closed forms (service transform by quadrature, batch GF by summation).
// Tests compare the series against these at interior points.
// ---------------------------------------------------------------------------

/// beta(lambda - lambda X(z)).
pub fn arrival_block_scalar(params: &ModelParams, z: f64) -> Result<f64> {
    let xz = params.batch.gf(z);
    params.service.lst(params.lambda * (1.0 - xz))
}

/// K~(z) = (1 - rho)(1 - z) / (beta(lambda - lambda X(z)) - z).
pub fn k_circ_scalar(params: &ModelParams, z: f64) -> Result<f64> {
    if z == 1.0 {
        return Ok(1.0);
    }
    let b = arrival_block_scalar(params, z)?;
    Ok((1.0 - params.rho()) * (1.0 - z) / (b - z))
}

/// K*(z) = (1 - beta(lambda - lambda X(z)) X0(z)) / ((rho + chi1 - 1)(1 - z)).
pub fn k_star_scalar(params: &ModelParams, z: f64) -> Result<f64> {
    if z == 1.0 {
        return Ok(1.0);
    }
    let b = arrival_block_scalar(params, z)?;
    let x0 = if z == 0.0 {
        params.batch.pmf(1)
    } else {
        params.batch.gf(z) / z
    };
    Ok((1.0 - b * x0) / ((params.rho() + params.chi1() - 1.0) * (1.0 - z)))
}

/// GF of the ordinary-queue system size.
pub fn l_inf_scalar(params: &ModelParams, z: f64) -> Result<f64> {
    Ok(arrival_block_scalar(params, z)? * k_circ_scalar(params, z)?)
}

/// Direct quadrature of the raw exponential-integral form of the idle-orbit
/// GF. The integrand has a removable singularity at u = 1; the last 1e-9 of
/// the range is replaced by its limit value psi.
pub fn d0_scalar(params: &ModelParams, z: f64) -> Result<f64> {
    params.ensure_stable()?;
    if !(0.0..=1.0).contains(&z) {
        return Err(Error::InvalidParameter(format!(
            "scalar evaluation point must lie in [0,1], got {z}"
        )));
    }
    let psi = params.psi()?;
    if z == 1.0 {
        return Ok(1.0);
    }
    let eps = 1e-9;
    let hi = 1.0 - eps;
    let integrand = |u: f64| -> f64 {
        let b = arrival_block_scalar(params, u).unwrap_or(f64::NAN);
        let x0 = if u == 0.0 {
            params.batch.pmf(1)
        } else {
            params.batch.gf(u) / u
        };
        (params.lambda / params.mu) * (1.0 - b * x0) / (b - u)
    };
    let mut pieces = vec![z];
    let mut step = (1.0 - z) / 2.0;
    // The integrand steepens toward u = 1; bisect the approach.
    while 1.0 - (pieces.last().unwrap() + step) > eps && pieces.len() < 40 {
        let next = pieces.last().unwrap() + step;
        pieces.push(next);
        step = (1.0 - next) / 2.0;
    }
    pieces.push(hi);
    let integral = adaptive_pieces(integrand, &pieces, 1e-10, 1e-14)?;
    Ok((-(integral + psi * eps)).exp())
}

/// GF of the busy-orbit size via the ratio form:
/// D1(z) = (1 - beta) / (beta - z) * (1 - rho) / rho * D0(z).
pub fn d1_scalar_from_d0(params: &ModelParams, z: f64, d0_at_z: f64) -> Result<f64> {
    let b = arrival_block_scalar(params, z)?;
    let rho = params.rho();
    Ok((1.0 - b) / (b - z) * (1.0 - rho) / rho * d0_at_z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BatchDist, ModelParams, ServiceDist};

    fn e1() -> ModelParams {
        ModelParams::new(
            1.0,
            1.0,
            BatchDist::deterministic(1).unwrap(),
            ServiceDist::lomax(0.75, 2.5).unwrap(),
        )
        .unwrap()
    }

    fn mm1ish(mu: f64) -> ModelParams {
        ModelParams::new(
            1.0,
            mu,
            BatchDist::deterministic(1).unwrap(),
            ServiceDist::exponential(2.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn stability_gate() {
        let p = ModelParams::new(
            3.0,
            1.0,
            BatchDist::deterministic(1).unwrap(),
            ServiceDist::lomax(0.75, 2.5).unwrap(),
        )
        .unwrap();
        assert!(matches!(
            compute_all(&p, 64),
            Err(Error::Unstable { .. })
        ));
    }

    #[test]
    fn k_star_reduces_to_arrival_equilibrium_for_unit_batches() {
        // With X = 1 the residual batch vanishes, so K* is the equilibrium
        // law of the arrivals within one service, mean rho.
        let p = mm1ish(1.0);
        let n = 256;
        let k_star = k_star_series(&p, n).unwrap();
        let n_bx = compound_over_service(&p, WeightKind::Service, n).unwrap();
        let expect = n_bx.equilibrium_transform(p.rho()).unwrap();
        assert!(k_star.sup_distance(&expect) < 1e-12);
        // The mass and deficit reconcile up to the quadrature noise carried
        // by the arrival-block coefficients.
        let total: f64 = k_star.coeffs().iter().sum();
        assert!(total <= 1.0 + 1e-9);
        assert!((total + k_star.mass_deficit() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn k_star_geometric_hand_value() {
        // lambda=1, X=1, Exponential(2): arrivals within a service are
        // geometric with ratio 1/3, and the equilibrium of a geometric law
        // on {0,1,...} is itself.
        let p = mm1ish(1.0);
        let n = 128;
        let k_star = k_star_series(&p, n).unwrap();
        for j in 0..12 {
            let expect = (2.0 / 3.0) * (1.0f64 / 3.0).powi(j as i32);
            assert!(
                (k_star.coeff(j) - expect).abs() < 1e-9,
                "j={j}: {} vs {expect}",
                k_star.coeff(j)
            );
        }
    }

    #[test]
    fn k_circ_base_coefficient_and_unit_batch_structure() {
        let p = e1();
        let n = 512;
        let pre = prereqs(&p, n).unwrap();
        let k_circ = k_circ_from(&p, &pre).unwrap();
        let rho = p.rho();
        let expect0 = (1.0 - rho) / (1.0 - rho * pre.t.coeff(0));
        assert!((k_circ.coeff(0) - expect0).abs() < 1e-14);
        // X = 1: the equilibrium batch is a point mass at zero, so the
        // compounded block equals the equilibrium-service arrivals alone.
        let n_bex = compound_over_service(&p, WeightKind::EquilibriumService, n).unwrap();
        assert!(pre.t.sup_distance(&n_bex) < 1e-14);
    }

    #[test]
    fn series_match_scalar_oracles_at_interior_points() {
        let p = e1();
        let n = 4096;
        let all = compute_all(&p, n).unwrap();
        for z in [0.0, 0.3, 0.5, 0.9] {
            let ks = k_star_scalar(&p, z).unwrap();
            assert!(
                (all.k_star.eval(z) - ks).abs() < 1e-8,
                "k_star({z}): {} vs {ks}",
                all.k_star.eval(z)
            );
            let kc = k_circ_scalar(&p, z).unwrap();
            assert!(
                (all.k_circ.eval(z) - kc).abs() < 1e-8,
                "k_circ({z}): {} vs {kc}",
                all.k_circ.eval(z)
            );
            let li = l_inf_scalar(&p, z).unwrap();
            assert!(
                (all.l_inf.eval(z) - li).abs() < 1e-8,
                "l_inf({z}): {} vs {li}",
                all.l_inf.eval(z)
            );
        }
    }

    #[test]
    fn d0_series_matches_raw_integral_oracle() {
        let p = e1();
        let n = 4096;
        let d0 = d0_series(&p, n).unwrap();
        for z in [0.0, 0.5, 0.9] {
            let direct = d0_scalar(&p, z).unwrap();
            let series = d0.eval(z);
            assert!(
                ((series - direct) / direct).abs() < 1e-6,
                "z={z}: series {series} vs direct {direct}"
            );
        }
    }

    #[test]
    fn d0_mean_is_psi() {
        // The truncated mean sits below psi by roughly psi * deficit(K)
        // plus the idle-orbit tail mass, both O(N^{-(a-1)}); the tight
        // tolerance needs the full working truncation.
        let p = e1();
        let psi = p.psi().unwrap();
        assert!((psi - 1.0).abs() < 1e-15);
        let d0 = d0_series(&p, 4096).unwrap();
        assert!(
            (d0.mean() - psi).abs() < 8e-6 * (1.0 + psi),
            "mean {} vs psi {psi}",
            d0.mean()
        );
        let d0_big = d0_series(&p, 16384).unwrap();
        assert!(
            (d0_big.mean() - psi).abs() < 1e-6 * (1.0 + psi),
            "mean {} vs psi {psi}",
            d0_big.mean()
        );
    }

    #[test]
    fn degenerate_driver_gives_poisson_idle_orbit() {
        let k = TruncSeries::point_mass(0, 1024);
        let psi = 1.0;
        let d0 = d0_from_k(&k, psi).unwrap();
        let mut expect = (-psi).exp();
        let mut sup: f64 = 0.0;
        for j in 0..=1024 {
            sup = sup.max((d0.coeff(j) - expect).abs());
            expect *= psi / (j as f64 + 1.0);
        }
        assert!(sup <= 1e-12, "sup {sup}");
    }

    #[test]
    fn mm1_system_size_is_geometric() {
        // Unit batches, exponential service, enormous retrial rate: the
        // retrial queue collapses to M/M/1 with P{L > j} = rho^{j+1}.
        let p = mm1ish(1e6);
        let n = 1024;
        let all = compute_all(&p, n).unwrap();
        let tails = all.l_mu.tails();
        let rho = p.rho();
        for j in 0..=20usize {
            let expect = rho.powi(j as i32 + 1);
            assert!(
                (tails[j] - expect).abs() < 1e-3,
                "j={j}: {} vs {expect}",
                tails[j]
            );
            // The non-retrial law is geometric to quadrature accuracy
            // regardless of the retrial rate.
            let pmf = (1.0 - rho) * rho.powi(j as i32);
            assert!(
                (all.l_inf.coeff(j) - pmf).abs() < 1e-8,
                "pmf j={j}: {} vs {pmf}",
                all.l_inf.coeff(j)
            );
        }
        // And l_inf is the same law up to the vanishing idle-orbit factor.
        assert!(all.l_mu.tv_distance(&all.l_inf) < 1e-3);
    }

    #[test]
    fn decomposition_identity_coefficientwise() {
        // L_mu as l_inf (x) d0 versus the direct mixture
        // (1-rho) d0(j) + rho d1(j-1).
        let p = e1();
        let n = 2048;
        let all = compute_all(&p, n).unwrap();
        let rho = all.rho;
        let mut sup: f64 = 0.0;
        for j in 0..=n {
            let mut mix = (1.0 - rho) * all.d0.coeff(j);
            if j >= 1 {
                mix += rho * all.d1.coeff(j - 1);
            }
            sup = sup.max((all.l_mu.coeff(j) - mix).abs());
        }
        assert!(sup <= 1e-10, "sup {sup}");
    }

    #[test]
    fn joint_law_mass_split() {
        let p = e1();
        let (p0, p1) = joint_orbit_server(&p, 1024).unwrap();
        let m0: f64 = p0.iter().sum();
        let m1: f64 = p1.iter().sum();
        // Each component misses only its share of the truncation deficit.
        assert!((m0 - 0.5).abs() < 1e-6, "idle mass {m0}");
        assert!((m1 - 0.5).abs() < 2e-3, "busy mass {m1}");
        assert!(m0 + m1 <= 1.0 + 1e-9);
    }

    #[test]
    fn d1_scalar_consistency() {
        let p = e1();
        let n = 4096;
        let all = compute_all(&p, n).unwrap();
        let z = 0.5;
        let expect = d1_scalar_from_d0(&p, z, all.d0.eval(z)).unwrap();
        let got = all.d1.eval(z);
        assert!(
            ((got - expect) / expect).abs() < 1e-6,
            "{got} vs {expect}"
        );
        // Coefficient 0 of the busy orbit is the product of the three
        // component zero coefficients.
        let pre = prereqs(&p, 64).unwrap();
        let kc = k_circ_from(&p, &pre).unwrap();
        let d1_small = d1_series(&p, 64).unwrap();
        let d0_small = d0_series(&p, 64).unwrap();
        let expect0 = pre.t.coeff(0) * kc.coeff(0) * d0_small.coeff(0);
        assert!((d1_small.coeff(0) - expect0).abs() < 1e-12);
    }

    #[test]
    fn d1_mean_is_sum_of_component_means() {
        let p = e1();
        let n = 4096;
        let pre = prereqs(&p, n).unwrap();
        let all = compute_all(&p, n).unwrap();
        let sum = pre.t.mean() + all.k_circ.mean() + all.d0.mean();
        // Heavy tails make truncated means converge slowly; the convolution
        // loses a little more than the parts, so compare with slack.
        let diff = (all.d1.mean() - sum).abs();
        assert!(diff < 0.05 * sum, "d1 mean {} vs {sum}", all.d1.mean());
    }

    #[test]
    fn l_inf_mean_matches_finite_difference_of_gf() {
        // Light enough tails for a finite second moment: compare the series
        // mean against a finite difference of the closed-form GF near 1.
        let p = ModelParams::new(
            1.0,
            1.0,
            BatchDist::deterministic(1).unwrap(),
            ServiceDist::lomax(0.75, 3.5).unwrap(),
        )
        .unwrap();
        let n = 4096;
        let l_inf = l_inf_series(&p, n).unwrap();
        let h = 1e-5;
        let g1 = l_inf_scalar(&p, 1.0 - h).unwrap();
        let g2 = l_inf_scalar(&p, 1.0 - 2.0 * h).unwrap();
        // Richardson-extrapolated backward difference of G at 1.
        let d1 = (1.0 - g1) / h;
        let d2 = (1.0 - g2) / (2.0 * h);
        let fd_mean = 2.0 * d1 - d2;
        assert!(
            (l_inf.mean() - fd_mean).abs() < 1e-4 * (1.0 + fd_mean.abs()),
            "series {} vs finite-difference {fd_mean}",
            l_inf.mean()
        );
    }
}
