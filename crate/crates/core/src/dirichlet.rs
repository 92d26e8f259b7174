//! Dirichlet distributions on the simplex: density, sampling, maximum-likelihood
//! fitting, and the Fit/Sym/Flat random-model constructors.
//!
//! As every concentration tends to zero a Dirichlet tends to the categorical
//! distribution `p_i = alpha_i / sum(alpha)`. Fits on hard (or numerically
//! degenerate) data return that categorical limit directly.

use std::fmt::Display;

use log::warn;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hard_models::ProportionVector;
use crate::indices::IndexKind;
use crate::membership::MembershipMatrix;
use crate::scalar::Scalar;
use crate::special::{digamma, inv_digamma, ln_gamma, trigamma};

/// Memberships are clamped to `[CLAMP_EPSILON, 1 - CLAMP_EPSILON]` before taking logs.
pub const CLAMP_EPSILON: f64 = 1e-6;
/// Fitted precision below which the categorical limit is returned.
pub const DEGENERATE_PRECISION: f64 = 0.01;
/// Upper bound on any fitted concentration.
pub const MAX_CONCENTRATION: f64 = 1e6;
/// Stopping threshold on the largest concentration update.
pub const FIT_TOLERANCE: f64 = 1e-10;
pub const FIT_MAX_ITERATIONS: usize = 10_000;

/// Concentration vector of a Dirichlet distribution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirichletParams<T> {
    alpha: Vec<T>,
}

impl<T: Scalar> DirichletParams<T> {
    pub fn new(alpha: Vec<T>) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::Parameter("concentration vector is empty".into()));
        }
        if let Some(a) = alpha.iter().find(|a| !a.is_finite() || **a <= T::zero()) {
            return Err(Error::Parameter(format!(
                "concentration {a} is not positive and finite"
            )));
        }
        Ok(Self { alpha })
    }

    pub fn symmetric(dim: usize, alpha: T) -> Result<Self> {
        Self::new(vec![alpha; dim])
    }

    /// Uniform distribution on the open simplex.
    pub fn flat(dim: usize) -> Result<Self> {
        Self::symmetric(dim, T::one())
    }

    pub fn alpha(&self) -> &[T] {
        &self.alpha
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    pub fn precision(&self) -> T {
        self.alpha.iter().copied().sum()
    }

    pub fn mean(&self) -> Vec<T> {
        let a0 = self.precision();
        self.alpha.iter().map(|&a| a / a0).collect()
    }

    /// `ln B(alpha) = sum ln Gamma(alpha_i) - ln Gamma(sum alpha)`.
    pub fn ln_beta(&self) -> T {
        self.alpha.iter().map(|&a| ln_gamma(a)).sum::<T>() - ln_gamma(self.precision())
    }

    /// Log density at an interior point of the simplex.
    pub fn log_pdf(&self, x: &[T]) -> Result<T> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "point of dimension {} for a {}-dimensional Dirichlet",
                x.len(),
                self.dim()
            )));
        }
        if x.iter().any(|&v| !(v > T::zero() && v < T::one())) && self.dim() > 1 {
            return Err(Error::Domain(
                "density is defined on the open simplex only".into(),
            ));
        }
        let s: T = x.iter().copied().sum();
        if (s - T::one()).abs() > T::lit(1e-9) {
            return Err(Error::Domain(format!("coordinates sum to {s}, not 1")));
        }
        let kernel: T = self
            .alpha
            .iter()
            .zip(x)
            .map(|(&a, &v)| (a - T::one()) * v.ln())
            .sum();
        Ok(kernel - self.ln_beta())
    }

    pub fn sampler(&self) -> DirichletSampler<T> {
        DirichletSampler::new(self)
    }
}

/// A random-model distribution over membership vectors.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum ModelDistribution<T> {
    Dirichlet(DirichletParams<T>),
    /// Categorical limit of a vanishing-precision Dirichlet.
    Categorical(ProportionVector<T>),
}

impl<T: Scalar> ModelDistribution<T> {
    pub fn dim(&self) -> usize {
        match self {
            ModelDistribution::Dirichlet(d) => d.dim(),
            ModelDistribution::Categorical(p) => p.len(),
        }
    }

    pub fn is_categorical(&self) -> bool {
        matches!(self, ModelDistribution::Categorical(_))
    }

    pub fn sampler(&self) -> Sampler<T> {
        match self {
            ModelDistribution::Dirichlet(d) => Sampler::Dirichlet(d.sampler()),
            ModelDistribution::Categorical(p) => Sampler::Categorical(CategoricalSampler::new(p)),
        }
    }

    /// `count` i.i.d. membership vectors (one-hot for the categorical case).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, count: usize) -> Vec<Vec<T>> {
        let sampler = self.sampler();
        (0..count)
            .map(|_| {
                let mut v = vec![T::zero(); self.dim()];
                sampler.sample_into(rng, &mut v);
                v
            })
            .collect()
    }
}

impl<T: Scalar> Display for ModelDistribution<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let (name, values) = match self {
            ModelDistribution::Dirichlet(d) => ("dirichlet", d.alpha()),
            ModelDistribution::Categorical(p) => ("categorical", p.as_slice()),
        };
        write!(f, "{name}(")?;
        for (i, v) in values.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{:.6}", v.to_f64_lossy())?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone)]
enum CoordinateSampler<T: Scalar> {
    Direct(T::Gamma),
    /// `Gamma(a) = Gamma(a + 1) * U^(1/a)`, kept in log space for small `a`.
    Boosted {
        gamma: T::Gamma,
        inv_alpha: T,
    },
}

/// Draws Dirichlet vectors by normalizing independent Gamma(alpha_i, 1) variates.
///
/// When any concentration is below 1 the variates are formed in log space so
/// that tiny concentrations cannot underflow every coordinate to zero.
#[derive(Debug, Clone)]
pub struct DirichletSampler<T: Scalar> {
    coords: Vec<CoordinateSampler<T>>,
    log_space: bool,
}

impl<T: Scalar> DirichletSampler<T> {
    fn new(d: &DirichletParams<T>) -> Self {
        let log_space = d.alpha.iter().any(|&a| a < T::one());
        let coords = d
            .alpha
            .iter()
            .map(|&a| {
                if log_space && a < T::one() {
                    CoordinateSampler::Boosted {
                        gamma: T::gamma_dist(a + T::one()).expect("validated concentration"),
                        inv_alpha: a.recip(),
                    }
                } else {
                    CoordinateSampler::Direct(T::gamma_dist(a).expect("validated concentration"))
                }
            })
            .collect();
        Self { coords, log_space }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    #[inline]
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [T]) {
        if !self.log_space {
            let mut total = T::zero();
            for (o, c) in out.iter_mut().zip(&self.coords) {
                let CoordinateSampler::Direct(g) = c else {
                    unreachable!()
                };
                *o = rng.sample(g);
                total = total + *o;
            }
            let inv = total.recip();
            out.iter_mut().for_each(|o| *o = *o * inv);
            return;
        }
        let mut max = T::neg_infinity();
        for (o, c) in out.iter_mut().zip(&self.coords) {
            *o = match c {
                CoordinateSampler::Direct(g) => rng.sample(g).ln(),
                CoordinateSampler::Boosted { gamma, inv_alpha } => {
                    rng.sample(gamma).ln() + T::open01(rng).ln() * *inv_alpha
                }
            };
            max = max.max(*o);
        }
        let mut total = T::zero();
        for o in out.iter_mut() {
            *o = (*o - max).exp();
            total = total + *o;
        }
        let inv = total.recip();
        out.iter_mut().for_each(|o| *o = *o * inv);
    }
}

/// Inverse-CDF sampler over cluster labels.
#[derive(Debug, Clone)]
pub struct CategoricalSampler<T> {
    cumulative: Vec<T>,
}

impl<T: Scalar> CategoricalSampler<T> {
    fn new(p: &ProportionVector<T>) -> Self {
        let mut acc = T::zero();
        let cumulative = p
            .as_slice()
            .iter()
            .map(|&x| {
                acc = acc + x;
                acc
            })
            .collect();
        Self { cumulative }
    }

    #[inline]
    pub fn sample_label<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u = T::open01(rng) * *self.cumulative.last().expect("nonempty");
        self.cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.cumulative.len() - 1)
    }
}

/// Sampler for either kind of model distribution.
#[derive(Debug, Clone)]
pub enum Sampler<T: Scalar> {
    Dirichlet(DirichletSampler<T>),
    Categorical(CategoricalSampler<T>),
}

impl<T: Scalar> Sampler<T> {
    pub fn dim(&self) -> usize {
        match self {
            Sampler::Dirichlet(d) => d.dim(),
            Sampler::Categorical(c) => c.cumulative.len(),
        }
    }

    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [T]) {
        match self {
            Sampler::Dirichlet(d) => d.sample_into(rng, out),
            Sampler::Categorical(c) => {
                let k = c.sample_label(rng);
                out.iter_mut()
                    .enumerate()
                    .for_each(|(j, o)| *o = if j == k { T::one() } else { T::zero() });
            }
        }
    }

    /// Agreement of two i.i.d. draws. `scratch` must hold at least `2 * dim` values.
    #[inline]
    pub fn pair_agreement<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        kind: IndexKind,
        scratch: &mut [T],
    ) -> T {
        match self {
            Sampler::Categorical(c) => {
                if c.sample_label(rng) == c.sample_label(rng) {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Sampler::Dirichlet(d) => {
                let (u, rest) = scratch.split_at_mut(d.dim());
                let v = &mut rest[..d.dim()];
                d.sample_into(rng, u);
                d.sample_into(rng, v);
                kind.agreement_unchecked(u, v)
            }
        }
    }
}

/// The three Dirichlet random models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DirichletModel {
    /// Maximum-likelihood Dirichlet per clustering.
    Fit,
    /// Maximum-likelihood symmetric Dirichlet per clustering.
    Sym,
    /// All-ones concentration with the clustering's dimension.
    Flat,
}

/// A fitted model distribution plus diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirichletFit<T> {
    pub distribution: ModelDistribution<T>,
    pub iterations: usize,
    /// The categorical limit was returned (hard input or vanishing precision).
    pub categorical_limit: bool,
    /// Some concentration hit [`MAX_CONCENTRATION`].
    pub capped: bool,
}

impl<T: Scalar> DirichletFit<T> {
    fn categorical(p: Vec<T>) -> Result<Self> {
        Ok(Self {
            distribution: ModelDistribution::Categorical(ProportionVector::new(p)?),
            iterations: 0,
            categorical_limit: true,
            capped: false,
        })
    }
}

/// Builds the random-model distributions for a pair of clusterings.
pub fn build_model<T: Scalar>(
    m1: &MembershipMatrix<T>,
    m2: &MembershipMatrix<T>,
    model: DirichletModel,
) -> Result<(DirichletFit<T>, DirichletFit<T>)> {
    Ok((model_for(m1, model)?, model_for(m2, model)?))
}

/// Random-model distribution for one clustering.
pub fn model_for<T: Scalar>(
    m: &MembershipMatrix<T>,
    model: DirichletModel,
) -> Result<DirichletFit<T>> {
    match model {
        DirichletModel::Fit => fit_mle(m, false),
        DirichletModel::Sym => fit_mle(m, true),
        DirichletModel::Flat => {
            m.require_fuzzy("clustering")?;
            Ok(DirichletFit {
                distribution: ModelDistribution::Dirichlet(DirichletParams::flat(m.n_clusters())?),
                iterations: 0,
                categorical_limit: false,
                capped: false,
            })
        }
    }
}

/// Sufficient statistics of the clamped data.
struct Moments<T> {
    mean_log: Vec<T>,
    mean: Vec<T>,
    mean_sq: Vec<T>,
}

fn moments<T: Scalar>(m: &MembershipMatrix<T>) -> Moments<T> {
    let eps = T::lit(CLAMP_EPSILON);
    let n = m.n_clusters();
    let count = T::from_usize(m.n_points()).expect("row count representable");
    let mut acc = Moments {
        mean_log: vec![T::zero(); n],
        mean: vec![T::zero(); n],
        mean_sq: vec![T::zero(); n],
    };
    let mut row = vec![T::zero(); n];
    for r in m.rows() {
        for (x, &v) in row.iter_mut().zip(r) {
            *x = v.max(eps).min(T::one() - eps);
        }
        let s: T = row.iter().copied().sum();
        for (j, x) in row.iter().enumerate() {
            let x = *x / s;
            acc.mean_log[j] = acc.mean_log[j] + x.ln();
            acc.mean[j] = acc.mean[j] + x;
            acc.mean_sq[j] = acc.mean_sq[j] + x * x;
        }
    }
    for v in [&mut acc.mean_log, &mut acc.mean, &mut acc.mean_sq] {
        v.iter_mut().for_each(|x| *x = *x / count);
    }
    acc
}

/// Method-of-moments precision estimate, averaged over coordinates.
fn moment_precision<T: Scalar>(mo: &Moments<T>) -> T {
    let estimates: Vec<T> = mo
        .mean
        .iter()
        .zip(&mo.mean_sq)
        .filter_map(|(&m, &q)| {
            let var = q - m * m;
            (var > T::zero())
                .then(|| (m - q) / var)
                .filter(|s| s.is_finite() && *s > T::zero())
        })
        .collect();
    if estimates.is_empty() {
        T::lit(MAX_CONCENTRATION)
    } else {
        let k = T::from_usize(estimates.len()).expect("small count");
        estimates.into_iter().sum::<T>() / k
    }
}

/// Mean log-likelihood per point, up to the data-only term.
fn log_likelihood<T: Scalar>(alpha: &[T], mean_log: &[T]) -> T {
    let a0: T = alpha.iter().copied().sum();
    ln_gamma(a0)
        + alpha
            .iter()
            .zip(mean_log)
            .map(|(&a, &s)| (a - T::one()) * s - ln_gamma(a))
            .sum::<T>()
}

/// Maximum-likelihood Dirichlet (or symmetric Dirichlet) for a clustering.
///
/// Hard input, a single cluster, or a fitted precision below
/// [`DEGENERATE_PRECISION`] yield the categorical limit: column means for the
/// general fit, the uniform vector for the symmetric fit.
pub fn fit_mle<T: Scalar>(m: &MembershipMatrix<T>, symmetric: bool) -> Result<DirichletFit<T>> {
    let class = m.require_fuzzy("clustering")?;
    let n = m.n_clusters();
    let limit = || {
        if symmetric {
            let u = T::one() / T::from_usize(n).expect("small count");
            DirichletFit::categorical(vec![u; n])
        } else {
            DirichletFit::categorical(m.column_means())
        }
    };
    if class.is_hard() || n == 1 {
        return limit();
    }
    let mo = moments(m);
    let fit = if symmetric {
        fit_symmetric(&mo)
    } else {
        fit_general(&mo)
    }?;
    if fit.alpha.iter().copied().sum::<T>() < T::lit(DEGENERATE_PRECISION) {
        return limit();
    }
    if fit.capped {
        warn!("fitted concentration reached the cap {MAX_CONCENTRATION}");
    }
    Ok(DirichletFit {
        distribution: ModelDistribution::Dirichlet(DirichletParams::new(fit.alpha)?),
        iterations: fit.iterations,
        categorical_limit: false,
        capped: fit.capped,
    })
}

struct RawFit<T> {
    alpha: Vec<T>,
    iterations: usize,
    capped: bool,
}

fn tolerance<T: Scalar>(alpha: &[T]) -> T {
    let biggest = alpha.iter().copied().fold(T::zero(), T::max);
    T::lit(FIT_TOLERANCE).max(T::lit(64.0) * T::epsilon() * biggest)
}

fn non_convergence<T: Scalar>(alpha: &[T]) -> Error {
    Error::NonConvergence {
        iterations: FIT_MAX_ITERATIONS,
        last: alpha.iter().map(|a| a.to_f64_lossy()).collect(),
    }
}

/// Safeguarded Newton ascent on the concave log-likelihood, with the
/// fixed-point update `psi(alpha_i) = psi(sum alpha) + mean log x_i` as the
/// fallback whenever a Newton step fails to improve the likelihood.
fn fit_general<T: Scalar>(mo: &Moments<T>) -> Result<RawFit<T>> {
    let cap = T::lit(MAX_CONCENTRATION);
    let floor = T::min_positive_value();
    let s = &mo.mean_log;
    let precision = moment_precision(mo);
    let mut alpha: Vec<T> = mo
        .mean
        .iter()
        .map(|&m| (m * precision).min(cap).max(floor))
        .collect();
    let n = alpha.len();
    let mut ll = log_likelihood(&alpha, s);
    let mut trial = vec![T::zero(); n];
    for iteration in 1..=FIT_MAX_ITERATIONS {
        let a0: T = alpha.iter().copied().sum();
        let psi0 = digamma(a0);
        let grad: Vec<T> = alpha
            .iter()
            .zip(s)
            .map(|(&a, &sk)| psi0 - digamma(a) + sk)
            .collect();
        // Hessian = diag(-psi'(alpha)) + psi'(a0) 11^T, inverted in O(n).
        let q: Vec<T> = alpha.iter().map(|&a| -trigamma(a)).collect();
        let z = trigamma(a0);
        let num: T = grad.iter().zip(&q).map(|(&g, &qk)| g / qk).sum();
        let den: T = z.recip() + q.iter().map(|&qk| qk.recip()).sum::<T>();
        let b = num / den;
        let mut accepted = false;
        let mut t = T::one();
        for _ in 0..40 {
            let mut ok = true;
            for k in 0..n {
                let next = alpha[k] - t * (grad[k] - b) / q[k];
                if !(next > T::zero()) || !next.is_finite() {
                    ok = false;
                    break;
                }
                trial[k] = next;
            }
            if ok && trial.iter().any(|&a| a >= cap) {
                return Ok(capped_fit(s, iteration));
            }
            if ok {
                let trial_ll = log_likelihood(&trial, s);
                if trial_ll >= ll {
                    ll = trial_ll;
                    accepted = true;
                    break;
                }
            }
            t = t / T::lit(2.0);
        }
        if !accepted {
            for k in 0..n {
                trial[k] = inv_digamma(psi0 + s[k]).max(floor);
            }
            if trial.iter().any(|&a| a >= cap) {
                return Ok(capped_fit(s, iteration));
            }
            ll = log_likelihood(&trial, s);
        }
        let moved = alpha
            .iter()
            .zip(&trial)
            .map(|(&a, &b)| (a - b).abs())
            .fold(T::zero(), T::max);
        let tol = tolerance(&trial);
        alpha.copy_from_slice(&trial);
        if moved < tol {
            return Ok(RawFit {
                alpha,
                iterations: iteration,
                capped: false,
            });
        }
        if alpha.iter().copied().sum::<T>() < T::lit(DEGENERATE_PRECISION) * T::lit(1e-3) {
            return Ok(RawFit {
                alpha,
                iterations: iteration,
                capped: false,
            });
        }
    }
    if alpha.iter().copied().sum::<T>() < T::lit(DEGENERATE_PRECISION) {
        return Ok(RawFit {
            alpha,
            iterations: FIT_MAX_ITERATIONS,
            capped: false,
        });
    }
    Err(non_convergence(&alpha))
}

/// Best point with the largest concentration pinned at the cap: every
/// stationary point at fixed precision has `psi(alpha_k) = mean log x_k + mu`.
fn capped_fit<T: Scalar>(s: &[T], iterations: usize) -> RawFit<T> {
    let top = s.iter().copied().fold(T::neg_infinity(), T::max);
    let mu = digamma(T::lit(MAX_CONCENTRATION)) - top;
    let alpha = s
        .iter()
        .map(|&sk| {
            if sk == top {
                T::lit(MAX_CONCENTRATION)
            } else {
                inv_digamma(sk + mu).min(T::lit(MAX_CONCENTRATION))
            }
        })
        .collect();
    RawFit {
        alpha,
        iterations,
        capped: true,
    }
}

/// One shared concentration `a`: maximizes
/// `ln Gamma(n a) - n ln Gamma(a) + (a - 1) sum_i mean log x_i`.
fn fit_symmetric<T: Scalar>(mo: &Moments<T>) -> Result<RawFit<T>> {
    let cap = T::lit(MAX_CONCENTRATION);
    let n = T::from_usize(mo.mean.len()).expect("small count");
    let total_log: T = mo.mean_log.iter().copied().sum();
    let mean_log = total_log / n;
    let ll = |a: T| ln_gamma(n * a) - n * ln_gamma(a) + (a - T::one()) * total_log;
    let mut a = (moment_precision(mo) / n).min(cap);
    let mut current = ll(a);
    for iteration in 1..=FIT_MAX_ITERATIONS {
        let grad = n * digamma(n * a) - n * digamma(a) + total_log;
        let hess = n * n * trigamma(n * a) - n * trigamma(a);
        let mut next = None;
        let mut t = T::one();
        for _ in 0..40 {
            let cand = (a - t * grad / hess).min(cap);
            if cand > T::zero() && cand.is_finite() && ll(cand) >= current {
                next = Some(cand);
                break;
            }
            t = t / T::lit(2.0);
        }
        let next = next.unwrap_or_else(|| inv_digamma(digamma(n * a) + mean_log).min(cap));
        current = ll(next);
        let moved = (next - a).abs();
        a = next;
        if moved < tolerance(&[a]) {
            let capped = a >= cap;
            return Ok(RawFit {
                alpha: vec![a; mo.mean.len()],
                iterations: iteration,
                capped,
            });
        }
    }
    if a * n < T::lit(DEGENERATE_PRECISION) {
        return Ok(RawFit {
            alpha: vec![a; mo.mean.len()],
            iterations: FIT_MAX_ITERATIONS,
            capped: false,
        });
    }
    Err(non_convergence(&[a]))
}
