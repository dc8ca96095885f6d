//! Truncated nonnegative power-series calculus.
//!
//! Every exact distribution in this crate is a [`TruncSeries`]: coefficients
//! of z^0 ..= z^N for a fixed truncation N, plus a mass deficit for pmf-kind
//! series. All recurrences are plain O(N^2) convolutions; coefficients below
//! the truncation are exact (up to floating-point roundoff and any quadrature
//! error in the inputs), so the deficit equals the probability mass that the
//! true law places beyond N. Tail values therefore include the deficit.
//!
//! Negative coefficients can only arise from roundoff; anything at or above
//! -1e-12 is clamped to zero, anything worse is reported as a numerical
//! failure.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{service_nodes, BatchDist, ModelParams, WeightKind};

const NEG_CLAMP: f64 = -1e-12;
const PMF_SUM_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesKind {
    /// Coefficients are probabilities of a law on {0, 1, ...}.
    Pmf,
    /// Arbitrary real coefficients.
    General,
}

/// A power series truncated at degree N.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncSeries {
    coeffs: Vec<f64>,
    kind: SeriesKind,
    mass_deficit: f64,
}

impl TruncSeries {
    /// Wraps pmf coefficients, clamping tiny negative roundoff and checking
    /// that the total mass does not exceed one.
    pub fn new_pmf(mut coeffs: Vec<f64>) -> Result<Self> {
        assert!(!coeffs.is_empty());
        for (j, c) in coeffs.iter_mut().enumerate() {
            if *c < 0.0 {
                if *c >= NEG_CLAMP {
                    *c = 0.0;
                } else {
                    return Err(Error::Numerical(format!(
                        "pmf coefficient {j} is {c:e}, below the clamp threshold"
                    )));
                }
            }
        }
        let sum: f64 = coeffs.iter().sum();
        if sum > 1.0 + PMF_SUM_SLACK {
            return Err(Error::Numerical(format!(
                "pmf mass {sum} exceeds one beyond tolerance"
            )));
        }
        Ok(Self {
            coeffs,
            kind: SeriesKind::Pmf,
            mass_deficit: (1.0 - sum).max(0.0),
        })
    }

    pub fn new_general(coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty());
        Self {
            coeffs,
            kind: SeriesKind::General,
            mass_deficit: 0.0,
        }
    }

    /// The pmf of a point mass at `j`.
    pub fn point_mass(j: usize, trunc: usize) -> Self {
        let mut coeffs = vec![0.0; trunc + 1];
        coeffs[j] = 1.0;
        Self {
            coeffs,
            kind: SeriesKind::Pmf,
            mass_deficit: 0.0,
        }
    }

    /// Truncated pmf of a batch law (support {1, 2, ...}).
    pub fn from_batch(batch: &BatchDist, trunc: usize) -> Self {
        let mut coeffs = vec![0.0; trunc + 1];
        for j in 1..=trunc {
            coeffs[j] = batch.pmf(j as u64);
        }
        Self {
            coeffs,
            kind: SeriesKind::Pmf,
            mass_deficit: batch.tail(trunc as u64),
        }
    }

    /// Truncated pmf of X - 1 where X is a batch law.
    pub fn from_batch_shifted_down(batch: &BatchDist, trunc: usize) -> Self {
        let mut coeffs = vec![0.0; trunc + 1];
        for j in 0..=trunc {
            coeffs[j] = batch.pmf(j as u64 + 1);
        }
        Self {
            coeffs,
            kind: SeriesKind::Pmf,
            mass_deficit: batch.tail(trunc as u64 + 1),
        }
    }

    pub fn trunc(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, j: usize) -> f64 {
        self.coeffs[j]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn kind(&self) -> SeriesKind {
        self.kind
    }

    pub fn is_pmf(&self) -> bool {
        self.kind == SeriesKind::Pmf
    }

    /// For pmf-kind series, the probability mass beyond the truncation.
    pub fn mass_deficit(&self) -> f64 {
        self.mass_deficit
    }

    /// Sum of j * c_j within the truncation.
    pub fn mean(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(j, &c)| j as f64 * c)
            .sum()
    }

    /// Horner evaluation at a scalar point.
    pub fn eval(&self, z: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * z + c)
    }

    /// Tail values P{N > j} for j = 0..=N; for pmf-kind series the mass
    /// deficit (the exact beyond-truncation mass) is included.
    pub fn tails(&self) -> Vec<f64> {
        let n = self.trunc();
        let mut tails = vec![0.0; n + 1];
        let mut acc = if self.kind == SeriesKind::Pmf {
            self.mass_deficit
        } else {
            0.0
        };
        for j in (0..n).rev() {
            acc += self.coeffs[j + 1];
            tails[j] = acc;
        }
        tails[n] = if self.kind == SeriesKind::Pmf {
            self.mass_deficit
        } else {
            0.0
        };
        tails
    }

    /// Largest absolute coefficient difference.
    pub fn sup_distance(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Total-variation distance between two pmfs, counting the deficits as
    /// mass at a virtual beyond-truncation point.
    pub fn tv_distance(&self, other: &Self) -> f64 {
        let body: f64 = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).abs())
            .sum();
        0.5 * (body + (self.mass_deficit - other.mass_deficit).abs())
    }

    fn require_same_trunc(&self, other: &Self) -> Result<()> {
        if self.trunc() != other.trunc() {
            return Err(Error::TruncationMismatch {
                left: self.trunc(),
                right: other.trunc(),
            });
        }
        Ok(())
    }

    /// Coefficient-wise convolution truncated at N (the law of the sum of
    /// independent variables when both inputs are pmfs).
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.require_same_trunc(other)?;
        let n = self.trunc();
        let mut out = vec![0.0; n + 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in other.coeffs[..=n - i].iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        if self.is_pmf() && other.is_pmf() {
            Self::new_pmf(out)
        } else {
            Ok(Self::new_general(out))
        }
    }

    /// The geometric compound (1 - scale) / (1 - scale * T(z)): the law of
    /// T_1 + ... + T_J with J geometric, P{J = k} = (1-scale) scale^k.
    pub fn reciprocal_complement(&self, scale: f64) -> Result<Self> {
        if !self.is_pmf() {
            return Err(Error::InvalidParameter(
                "geometric compounding needs a pmf-kind series".into(),
            ));
        }
        if !(scale >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "geometric compound scale must be nonnegative, got {scale}"
            )));
        }
        if scale >= 1.0 {
            return Err(Error::Unstable { rho: scale });
        }
        let n = self.trunc();
        let denom = 1.0 - scale * self.coeffs[0];
        let mut out = vec![0.0; n + 1];
        out[0] = (1.0 - scale) / denom;
        for m in 1..=n {
            let mut s = 0.0;
            for (j, &t) in self.coeffs[1..=m].iter().enumerate() {
                s += t * out[m - 1 - j];
            }
            out[m] = scale * s / denom;
        }
        Self::new_pmf(out)
    }

    /// e^{-c} exp(S(z)) for a series S with zero constant term and
    /// nonnegative coefficients. When c = S(1) the result is a pmf.
    pub fn exp_shifted(&self, c: f64) -> Result<Self> {
        if self.coeffs[0].abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "exponent series must have zero constant term, got {}",
                self.coeffs[0]
            )));
        }
        let n = self.trunc();
        let mut weighted = Vec::new();
        for (m, &s) in self.coeffs.iter().enumerate().skip(1) {
            if s < NEG_CLAMP {
                return Err(Error::Numerical(format!(
                    "exponent coefficient {m} is {s:e}, below the clamp threshold"
                )));
            }
            if s > 0.0 {
                weighted.push((m, m as f64 * s));
            }
        }
        let out = exp_recursion(&weighted, 1.0, c, n);
        let s1: f64 = self.coeffs.iter().sum();
        if (c - s1).abs() <= 1e-9 * c.abs().max(1.0) {
            Self::new_pmf(out)
        } else {
            Ok(Self::new_general(out))
        }
    }

    /// A(z) = integral from z to 1 of K(u) du as a truncated series:
    /// a_0 = sum_j k_j / (j+1) and a_j = -k_{j-1} / j for j >= 1.
    pub fn integral_to_one(&self) -> Self {
        let n = self.trunc();
        let mut out = vec![0.0; n + 1];
        let mut a0 = 0.0f64;
        let mut carry = 0.0f64;
        for (j, &k) in self.coeffs.iter().enumerate() {
            let term = k / (j as f64 + 1.0);
            let y = term - carry;
            let t = a0 + y;
            carry = (t - a0) - y;
            a0 = t;
        }
        out[0] = a0;
        for j in 1..=n {
            out[j] = -self.coeffs[j - 1] / j as f64;
        }
        Self::new_general(out)
    }

    /// Discrete equilibrium law q_de(n) = P{N > n} / mean. The mean must be
    /// the exact mean of the untruncated law; tails include the deficit.
    pub fn equilibrium_transform(&self, mean: f64) -> Result<Self> {
        if !(mean > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "equilibrium transform needs a positive mean, got {mean}"
            )));
        }
        let tails = self.tails();
        Self::new_pmf(tails.into_iter().map(|t| t / mean).collect())
    }

    /// Iterated tail sequences: level 1 is j -> P{N > j} (deficit included),
    /// level m+1 sums the truncated level-m sequence above j.
    pub fn tail_sequence(&self, level: usize) -> Self {
        assert!(level >= 1);
        let n = self.trunc();
        let mut cur = self.tails();
        for _ in 1..level {
            let mut next = vec![0.0; n + 1];
            let mut acc = 0.0;
            for j in (0..n).rev() {
                acc += cur[j + 1];
                next[j] = acc;
            }
            cur = next;
        }
        Self::new_general(cur)
    }

    /// n-th factorial moment within the truncation; for pmf-kind series the
    /// value is an underestimate whenever the deficit is positive (the level
    /// of underestimation is visible through `mass_deficit`).
    pub fn factorial_moment(&self, n: usize) -> f64 {
        let mut acc = 0.0;
        for (k, &q) in self.coeffs.iter().enumerate() {
            if k < n || q == 0.0 {
                continue;
            }
            let mut ff = 1.0;
            for i in 0..n {
                ff *= (k - i) as f64;
            }
            acc += ff * q;
        }
        acc
    }
}

/// Shared recurrence for exp-type series: given pairs (m, m * s_m) and a
/// rate multiplier, computes e^{-c} exp(rate * S(z)) up to degree `trunc`,
/// rescaling on the fly so that large exponents neither overflow nor drown.
fn exp_recursion(weighted: &[(usize, f64)], rate: f64, c: f64, trunc: usize) -> Vec<f64> {
    let mut f = vec![0.0f64; trunc + 1];
    f[0] = 1.0;
    let mut logscale = -c;
    for m in 1..=trunc {
        let mut s = 0.0;
        for &(j, w) in weighted {
            if j > m {
                break;
            }
            s += w * f[m - j];
        }
        let v = s * rate / m as f64;
        f[m] = v;
        if v > 1e250 {
            for e in f[..=m].iter_mut() {
                *e /= v;
            }
            logscale += v.ln();
        }
    }
    for e in f.iter_mut() {
        if *e > 0.0 {
            *e = (e.ln() + logscale).exp();
        }
    }
    f
}

/// Compound Poisson pmf: exp(rate (X(z) - 1)) for a batch pmf with no mass
/// at zero.
pub fn compound_poisson(rate: f64, batch: &TruncSeries, trunc: usize) -> Result<TruncSeries> {
    if !(rate >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "compound Poisson rate must be nonnegative, got {rate}"
        )));
    }
    if !batch.is_pmf() {
        return Err(Error::InvalidParameter(
            "compound Poisson needs a pmf-kind batch series".into(),
        ));
    }
    if batch.coeff(0) != 0.0 {
        return Err(Error::InvalidParameter(
            "batch law must place no mass at zero".into(),
        ));
    }
    if rate == 0.0 {
        return Ok(TruncSeries::point_mass(0, trunc));
    }
    let weighted: Vec<(usize, f64)> = batch
        .coeffs()
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, &x)| x > 0.0)
        .map(|(j, &x)| (j, j as f64 * x))
        .collect();
    TruncSeries::new_pmf(exp_recursion(&weighted, rate, rate, trunc))
}

/// Pmf of the number of customers arriving within a service (or
/// equilibrium-service) duration: the quadrature mixture over service nodes
/// of compound-Poisson laws, refined by doubling the node resolution until
/// the result changes by less than 1e-10 in sup norm.
pub fn compound_over_service(
    params: &ModelParams,
    which: WeightKind,
    trunc: usize,
) -> Result<TruncSeries> {
    let batch = TruncSeries::from_batch(&params.batch, trunc);
    let weighted: Vec<(usize, f64)> = batch
        .coeffs()
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, &x)| x > 0.0)
        .map(|(j, &x)| (j, j as f64 * x))
        .collect();

    let mut prev: Option<Vec<f64>> = None;
    for level in 0..=6u32 {
        let nodes = service_nodes(params, which, trunc, level);
        // Node chunks are mixed in parallel and folded in chunk order, so
        // the result is bitwise identical for any thread count.
        let partials: Vec<Vec<f64>> = nodes
            .par_chunks(64)
            .map(|chunk| {
                let mut acc = vec![0.0f64; trunc + 1];
                for &(x, w) in chunk {
                    let rate = params.lambda * x;
                    let cp = exp_recursion(&weighted, rate, rate, trunc);
                    for (a, c) in acc.iter_mut().zip(&cp) {
                        *a += w * c;
                    }
                }
                acc
            })
            .collect();
        let mut out = vec![0.0f64; trunc + 1];
        for partial in &partials {
            for (o, p) in out.iter_mut().zip(partial) {
                *o += p;
            }
        }
        if let Some(p) = prev {
            let sup = out
                .iter()
                .zip(&p)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if sup < 1e-11 {
                let series = TruncSeries::new_pmf(out)?;
                if which == WeightKind::Service && series.mass_deficit() < 1e-8 {
                    // Truncation removes up to ~deficit * N * d/(d-1) of the
                    // mean; 6 N deficit covers every admissible tail index.
                    let rho = params.rho();
                    let mean = series.mean();
                    let slack = 1e-6 + 6.0 * trunc as f64 * series.mass_deficit();
                    if mean > rho + 1e-6 || mean < rho - slack {
                        return Err(Error::Numerical(format!(
                            "arrivals-within-service mean {mean} disagrees with rho {rho}"
                        )));
                    }
                }
                return Ok(series);
            }
        }
        prev = Some(out);
    }
    Err(Error::Numerical(
        "service-mixture quadrature did not stabilize after 6 refinements".into(),
    ))
}
