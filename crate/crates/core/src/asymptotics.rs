//! Closed-form tail asymptotics: regime classification over the heavy-tail
//! assumptions, the tail constants of every distribution in the analysis,
//! and the refined-equivalence coefficient for the difference between the
//! retrial and non-retrial system-size tails.
//!
//! Conventions. All tails are expressed as c * j^(-e) * L with a constant
//! slowly varying part L shared by the batch and service laws. When the
//! service tail is heavy, L is the service tail constant and the batch
//! constant c_x is rescaled against it; when only the batch is heavy, L is
//! the batch tail constant and c_x = 1. Light-tailed laws carry an infinite
//! tail index and a zero tail constant, meaning their tail is o(j^(-d) L(j))
//! for every power the classification compares against.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Tolerance under which the two tail indices are treated as equal.
const INDEX_EQ_TOL: f64 = 1e-9;

/// Which of the two laws dominates the tail behaviour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseId {
    /// Service tail strictly heavier than the batch tail (d_x > d_b).
    Case1,
    /// Batch tail strictly heavier than the service tail (d_x < d_b).
    Case2,
    /// Equally heavy tails (d_x = d_b), both contributing.
    Case3,
}

impl CaseId {
    pub fn as_str(&self) -> &'static str {
        match self {
            CaseId::Case1 => "case1",
            CaseId::Case2 => "case2",
            CaseId::Case3 => "case3",
        }
    }
}

/// Classified tail regime of a model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regime {
    pub case_id: CaseId,
    /// a = min(d_b, d_x) > 1.
    pub a: f64,
    pub d_b: f64,
    pub d_x: f64,
    /// Service tail constant (None when the service is light-tailed).
    pub l_service: Option<f64>,
    /// Batch tail constant (None when the batch is light-tailed).
    pub l_batch: Option<f64>,
    /// The reference slowly varying constant all curves are expressed
    /// against.
    pub l_ref: f64,
    /// Batch tail constant normalized by `l_ref` (zero in Case 1).
    pub c_x: f64,
}

/// A one-term asymptotic tail j -> constant * j^(-exponent) * slowly_varying.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailCurve {
    pub constant: f64,
    pub exponent: f64,
    pub slowly_varying: f64,
}

impl TailCurve {
    pub fn eval(&self, j: f64) -> f64 {
        self.constant * j.powf(-self.exponent) * self.slowly_varying
    }
}

/// Determines the tail regime, or reports why none applies.
pub fn classify(params: &ModelParams) -> Result<Regime> {
    let d_b = params.service.tail_index();
    let d_x = params.batch.tail_index();
    if d_b.is_infinite() && d_x.is_infinite() {
        return Err(Error::UnsupportedRegime(
            "both the service time and the batch size are light-tailed".into(),
        ));
    }
    for (name, d) in [("service", d_b), ("batch", d_x)] {
        if d.is_finite() && d <= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "{name} tail index {d} <= 1 implies an infinite mean"
            )));
        }
    }
    let l_service = (d_b.is_finite()).then(|| params.service.tail_constant());
    let l_batch = (d_x.is_finite()).then(|| params.batch.tail_constant());

    let case_id = if d_b.is_finite() && d_x.is_finite() && (d_x - d_b).abs() < INDEX_EQ_TOL {
        CaseId::Case3
    } else if d_x > d_b {
        CaseId::Case1
    } else {
        CaseId::Case2
    };
    let a = d_b.min(d_x);
    let (l_ref, c_x) = match (case_id, l_service, l_batch) {
        (CaseId::Case1, Some(ls), _) => (ls, 0.0),
        (CaseId::Case2, Some(ls), Some(lb)) => (ls, lb / ls),
        (CaseId::Case2, None, Some(lb)) => (lb, 1.0),
        (CaseId::Case3, Some(ls), Some(lb)) => (ls, lb / ls),
        _ => unreachable!("classification guarantees a heavy law per case"),
    };
    Ok(Regime {
        case_id,
        a,
        d_b,
        d_x,
        l_service,
        l_batch,
        l_ref,
        c_x,
    })
}

/// P{K > j} ~ c_k j^(-a+1) L(j): tail constant of the orbit-increment driver.
pub fn c_k(params: &ModelParams, regime: &Regime) -> f64 {
    let a = regime.a;
    let chi1 = params.chi1();
    let rho = params.rho();
    let lam_chi = params.lambda * chi1;
    let denom = (a - 1.0) * (1.0 - rho) * (rho + chi1 - 1.0);
    match regime.case_id {
        CaseId::Case1 => lam_chi.powf(a) * chi1 / denom,
        CaseId::Case2 => regime.c_x / denom,
        CaseId::Case3 => (lam_chi.powf(a) * chi1 + regime.c_x) / denom,
    }
}

/// Tail constant of the geometric-compound factor (also the constant of the
/// system-size tails of both queues).
pub fn c_k_circ(params: &ModelParams, regime: &Regime) -> f64 {
    let a = regime.a;
    let rho = params.rho();
    let lam_chi = params.lambda * params.chi1();
    let lb = params.lambda * params.beta1();
    let denom = (a - 1.0) * (1.0 - rho);
    match regime.case_id {
        CaseId::Case1 => lam_chi.powf(a) / denom,
        CaseId::Case2 => lb * regime.c_x / denom,
        CaseId::Case3 => (lam_chi.powf(a) + lb * regime.c_x) / denom,
    }
}

/// Tail constant of the equilibrium factor K* (reported alongside the rest).
pub fn c_k_star(params: &ModelParams, regime: &Regime) -> f64 {
    let a = regime.a;
    let chi1 = params.chi1();
    let rho = params.rho();
    let lam_chi = params.lambda * chi1;
    let lb = params.lambda * params.beta1();
    let denom = (a - 1.0) * (rho + chi1 - 1.0);
    match regime.case_id {
        CaseId::Case1 => lam_chi.powf(a) / denom,
        CaseId::Case2 => (1.0 + lb) * regime.c_x / denom,
        CaseId::Case3 => (lam_chi.powf(a) + (1.0 + lb) * regime.c_x) / denom,
    }
}

/// P{D0 > j} ~ c_d0 j^(-a) L(j): tail constant of the orbit size given an
/// idle server. The branch display is cross-checked against the identity
/// c_d0 = (1 - 1/a) c_k psi, which must agree to 1e-12 relative.
pub fn c_d0(params: &ModelParams, regime: &Regime) -> Result<f64> {
    let a = regime.a;
    let rho = params.rho();
    let lam_chi = params.lambda * params.chi1();
    let denom = a * params.mu * (1.0 - rho) * (1.0 - rho);
    let branch = match regime.case_id {
        CaseId::Case1 => lam_chi.powf(a + 1.0) / denom,
        CaseId::Case2 => params.lambda * regime.c_x / denom,
        CaseId::Case3 => (lam_chi.powf(a + 1.0) + params.lambda * regime.c_x) / denom,
    };
    let via_identity = (1.0 - 1.0 / a) * c_k(params, regime) * params.psi()?;
    if (branch - via_identity).abs() > 1e-12 * branch.abs().max(1.0) {
        return Err(Error::Numerical(format!(
            "idle-orbit tail constant mismatch: branch {branch} vs identity {via_identity}"
        )));
    }
    Ok(branch)
}

/// P{D1 > j} ~ c_d1 j^(-a+1) L(j): tail constant of the orbit size given a
/// busy server.
pub fn c_d1(params: &ModelParams, regime: &Regime) -> f64 {
    let a = regime.a;
    let rho = params.rho();
    let lam_chi = params.lambda * params.chi1();
    let lb = params.lambda * params.beta1();
    let denom = (a - 1.0) * (1.0 - rho) * rho;
    match regime.case_id {
        CaseId::Case1 => lam_chi.powf(a) / denom,
        CaseId::Case2 => lb * regime.c_x / denom,
        CaseId::Case3 => (lam_chi.powf(a) + lb * regime.c_x) / denom,
    }
}

/// The refined-equivalence curve: the difference of the two system-size
/// tails satisfies
/// P{L_mu > j} - P{L_inf > j} ~ [(a-1) psi c_k_circ + c_d0] j^(-a) L(j).
pub fn refined_difference_curve(params: &ModelParams) -> Result<TailCurve> {
    let regime = classify(params)?;
    let psi = params.psi()?;
    let c = (regime.a - 1.0) * psi * c_k_circ(params, &regime) + c_d0(params, &regime)?;
    Ok(TailCurve {
        constant: c,
        exponent: regime.a,
        slowly_varying: regime.l_ref,
    })
}

/// Tail curves of the intermediate building blocks; a `None` slot means the
/// curve is not defined in the active regime (light-tailed law, or only a
/// bound is available).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntermediateCurves {
    /// Batches arriving within one service time.
    pub n_b: Option<TailCurve>,
    /// Batches arriving within one equilibrium service time.
    pub n_b_eq: Option<TailCurve>,
    /// Customers arriving within one service time.
    pub n_bx: TailCurve,
    /// Customers within a service plus the residual batch X - 1.
    pub n_bx_x0: TailCurve,
    /// Customers arriving within one equilibrium service time.
    pub n_bex: Option<TailCurve>,
    /// Customers within an equilibrium service plus an equilibrium batch.
    pub n_bex_xde: TailCurve,
    /// Equilibrium factor of the orbit driver.
    pub k_star: TailCurve,
    /// Geometric-compound factor of the orbit driver.
    pub k_circ: TailCurve,
}

/// Evaluates every defined intermediate curve for the active regime.
pub fn intermediate_curves(params: &ModelParams, regime: &Regime) -> IntermediateCurves {
    let a = regime.a;
    let l = regime.l_ref;
    let chi1 = params.chi1();
    let rho = params.rho();
    let beta1 = params.beta1();
    let lam = params.lambda;
    let lam_chi = lam * chi1;
    let lb = lam * beta1;
    let curve = |constant: f64, exponent: f64| TailCurve {
        constant,
        exponent,
        slowly_varying: l,
    };

    let service_heavy = regime.d_b.is_finite();
    let n_b = service_heavy.then(|| curve(lam.powf(regime.d_b), regime.d_b));
    let n_b_eq = service_heavy.then(|| {
        curve(
            lam.powf(regime.d_b - 1.0) / ((regime.d_b - 1.0) * beta1),
            regime.d_b - 1.0,
        )
    });

    let (n_bx, n_bx_x0, n_bex, n_bex_xde) = match regime.case_id {
        CaseId::Case1 => {
            let nbx = curve(lam_chi.powf(a), a);
            let nbex = curve(lam_chi.powf(a - 1.0) / ((a - 1.0) * beta1), a - 1.0);
            (nbx, nbx, Some(nbex), nbex)
        }
        CaseId::Case2 => (
            curve(lb * regime.c_x, regime.d_x),
            curve((1.0 + lb) * regime.c_x, regime.d_x),
            None,
            curve(regime.c_x / (chi1 * (regime.d_x - 1.0)), regime.d_x - 1.0),
        ),
        CaseId::Case3 => (
            curve(lam_chi.powf(a) + lb * regime.c_x, a),
            curve(lam_chi.powf(a) + (1.0 + lb) * regime.c_x, a),
            Some(curve(
                lam_chi.powf(a - 1.0) / ((a - 1.0) * beta1),
                a - 1.0,
            )),
            curve(
                (lam_chi.powf(a) + lb * regime.c_x) / ((a - 1.0) * rho),
                a - 1.0,
            ),
        ),
    };

    IntermediateCurves {
        n_b,
        n_b_eq,
        n_bx,
        n_bx_x0,
        n_bex,
        n_bex_xde,
        k_star: curve(c_k_star(params, regime), a - 1.0),
        k_circ: curve(c_k_circ(params, regime), a - 1.0),
    }
}

/// The complete asymptotic picture of one model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticReport {
    pub case_id: CaseId,
    pub a: f64,
    pub rho: f64,
    pub psi: f64,
    /// Reference slowly varying constant.
    pub l: f64,
    /// Normalized batch tail constant.
    pub c_x: f64,
    pub c_k: f64,
    pub c_k_star: f64,
    pub c_k_circ: f64,
    pub c_d0: f64,
    pub c_d1: f64,
    /// Coefficient of the refined tail difference.
    pub refined_coefficient: f64,
    pub curves: IntermediateCurves,
}

impl AsymptoticReport {
    /// Curve for P{K > j}.
    pub fn k_curve(&self) -> TailCurve {
        TailCurve {
            constant: self.c_k,
            exponent: self.a - 1.0,
            slowly_varying: self.l,
        }
    }

    /// Curve shared by P{L_mu > j} and P{L_inf > j}.
    pub fn system_size_curve(&self) -> TailCurve {
        TailCurve {
            constant: self.c_k_circ,
            exponent: self.a - 1.0,
            slowly_varying: self.l,
        }
    }

    /// Curve for P{D0 > j}.
    pub fn d0_curve(&self) -> TailCurve {
        TailCurve {
            constant: self.c_d0,
            exponent: self.a,
            slowly_varying: self.l,
        }
    }

    /// Curve for P{D1 > j}.
    pub fn d1_curve(&self) -> TailCurve {
        TailCurve {
            constant: self.c_d1,
            exponent: self.a - 1.0,
            slowly_varying: self.l,
        }
    }

    /// Curve for P{L_mu > j} - P{L_inf > j}.
    pub fn refined_curve(&self) -> TailCurve {
        TailCurve {
            constant: self.refined_coefficient,
            exponent: self.a,
            slowly_varying: self.l,
        }
    }
}

/// Classifies the model and evaluates every constant and curve.
pub fn report(params: &ModelParams) -> Result<AsymptoticReport> {
    let regime = classify(params)?;
    let psi = params.psi()?;
    let c_d0 = c_d0(params, &regime)?;
    let c_k_circ_v = c_k_circ(params, &regime);
    Ok(AsymptoticReport {
        case_id: regime.case_id,
        a: regime.a,
        rho: params.rho(),
        psi,
        l: regime.l_ref,
        c_x: regime.c_x,
        c_k: c_k(params, &regime),
        c_k_star: c_k_star(params, &regime),
        c_k_circ: c_k_circ_v,
        c_d0,
        c_d1: c_d1(params, &regime),
        refined_coefficient: (regime.a - 1.0) * psi * c_k_circ_v + c_d0,
        curves: intermediate_curves(params, &regime),
    })
}
