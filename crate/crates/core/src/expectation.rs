//! Monte-Carlo expected concordance under random models.
//!
//! Under any model that draws membership vectors i.i.d. per point, the
//! expected index over all pairs equals the expected concordance of a single
//! pair, so each sample needs only two draws per random clustering and the cost
//! is independent of `N`. The one-sided variant holds the second clustering
//! fixed and samples one of its observed pairs uniformly; the permutation model
//! samples an independent uniform pair from each clustering.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dirichlet::ModelDistribution;
use crate::error::{Error, Result};
use crate::indices::{check_same_points, IndexKind, PairAgreements};
use crate::membership::MembershipMatrix;
use crate::rng::{substream, McRng};
use crate::scalar::{CompensatedSum, Scalar};

pub const DEFAULT_SAMPLES: u64 = 10_000_000;
/// Largest clustering accepted by the exhaustive one-sided cross-check.
pub const EXHAUSTIVE_MAX_POINTS: usize = 512;

/// Monte-Carlo run configuration. Output is a deterministic function of all three fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    pub samples: u64,
    pub seed: u64,
    pub workers: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            samples: DEFAULT_SAMPLES,
            seed: 0,
            workers: 1,
        }
    }
}

impl McConfig {
    pub fn new(samples: u64, seed: u64) -> Self {
        Self {
            samples,
            seed,
            workers: 1,
        }
    }

    pub fn with_workers(self, workers: usize) -> Self {
        Self { workers, ..self }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::Parameter("sample count must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::Parameter("worker count must be at least 1".into()));
        }
        Ok(())
    }
}

/// Estimated expected concordance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpectationEstimate<T> {
    pub value: T,
    /// Sample standard deviation over `sqrt(samples)`; zero for closed forms.
    pub std_error: T,
    /// Zero for closed forms.
    pub samples: u64,
}

impl<T: Scalar> ExpectationEstimate<T> {
    pub fn exact(value: T) -> Self {
        Self {
            value,
            std_error: T::zero(),
            samples: 0,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.samples == 0
    }
}

#[derive(Clone, Copy)]
struct Partial<T> {
    sum: CompensatedSum<T>,
    sum_sq: CompensatedSum<T>,
}

/// Runs `draw` `cfg.samples` times split over `cfg.workers` substreams and
/// combines the partial sums in worker order.
fn monte_carlo<T, F>(cfg: &McConfig, scratch_len: usize, draw: F) -> Result<ExpectationEstimate<T>>
where
    T: Scalar,
    F: Fn(&mut McRng, &mut [T]) -> T + Sync,
{
    cfg.validate()?;
    let workers = cfg.workers.min(cfg.samples as usize).max(1);
    let run = |w: usize| {
        let count =
            cfg.samples / workers as u64 + u64::from((w as u64) < cfg.samples % workers as u64);
        let mut rng = substream(cfg.seed, w as u64);
        let mut scratch = vec![T::zero(); scratch_len];
        let mut p = Partial {
            sum: CompensatedSum::new(),
            sum_sq: CompensatedSum::new(),
        };
        for _ in 0..count {
            let x = draw(&mut rng, &mut scratch);
            p.sum.add(x);
            p.sum_sq.add(x * x);
        }
        p
    };
    let partials: Vec<Partial<T>> = if workers == 1 {
        vec![run(0)]
    } else {
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..workers).map(|w| s.spawn(move || run(w))).collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("sampling worker panicked"))
                .collect()
        })
    };
    let mut sum = CompensatedSum::new();
    let mut sum_sq = CompensatedSum::new();
    for p in &partials {
        sum.merge(&p.sum);
        sum_sq.merge(&p.sum_sq);
    }
    let k = T::from_u64(cfg.samples).expect("sample count representable");
    let mean = sum.value() / k;
    let std_error = if cfg.samples > 1 {
        let var = ((sum_sq.value() - sum.value() * mean) / (k - T::one())).max(T::zero());
        (var / k).sqrt()
    } else {
        T::zero()
    };
    Ok(ExpectationEstimate {
        value: mean.max(T::zero()).min(T::one()),
        std_error,
        samples: cfg.samples,
    })
}

/// Uniform unordered pair of distinct points.
#[inline]
fn random_pair<R: Rng + ?Sized>(rng: &mut R, n: usize) -> (usize, usize) {
    let i = rng.random_range(0..n);
    let mut j = rng.random_range(0..n - 1);
    if j >= i {
        j += 1;
    }
    (i, j)
}

/// Both clusterings random: `E_{D1,D2}[conc]`.
pub fn expected_conc_two_sided<T: Scalar>(
    d1: &ModelDistribution<T>,
    d2: &ModelDistribution<T>,
    kind: IndexKind,
    cfg: &McConfig,
) -> Result<ExpectationEstimate<T>> {
    let (s1, s2) = (d1.sampler(), d2.sampler());
    let scratch = 2 * d1.dim().max(d2.dim());
    monte_carlo(cfg, scratch, |rng, buf| {
        let a1 = s1.pair_agreement(rng, kind, buf);
        let a2 = s2.pair_agreement(rng, kind, buf);
        kind.concordance(a1, a2)
    })
}

/// First clustering random, second fixed: `E_{D1,C2}[conc]`.
pub fn expected_conc_one_sided<T: Scalar>(
    d1: &ModelDistribution<T>,
    c2: &MembershipMatrix<T>,
    kind: IndexKind,
    cfg: &McConfig,
) -> Result<ExpectationEstimate<T>> {
    c2.require_fuzzy("fixed clustering")?;
    let fixed = PairAgreements::new(c2, kind)?;
    let sampler = d1.sampler();
    let n = c2.n_points();
    monte_carlo(cfg, 2 * d1.dim(), |rng, buf| {
        let (i, j) = random_pair(rng, n);
        let a2 = fixed.agreement(i, j);
        let a1 = sampler.pair_agreement(rng, kind, buf);
        kind.concordance(a1, a2)
    })
}

/// One-sided expectation summing over every observed pair per sample.
///
/// Slower than [`expected_conc_one_sided`] by a factor of `N(N-1)/2`; kept as
/// a cross-check for small clusterings.
pub fn expected_conc_one_sided_exhaustive<T: Scalar>(
    d1: &ModelDistribution<T>,
    c2: &MembershipMatrix<T>,
    kind: IndexKind,
    cfg: &McConfig,
) -> Result<ExpectationEstimate<T>> {
    c2.require_fuzzy("fixed clustering")?;
    if c2.n_points() > EXHAUSTIVE_MAX_POINTS {
        return Err(Error::Capability(format!(
            "exhaustive pair summation is limited to {EXHAUSTIVE_MAX_POINTS} points"
        )));
    }
    let fixed = PairAgreements::new(c2, kind)?.all_pairs();
    let pairs = T::from_usize(fixed.len()).expect("pair count representable");
    let sampler = d1.sampler();
    monte_carlo(cfg, 2 * d1.dim(), |rng, buf| {
        let a1 = sampler.pair_agreement(rng, kind, buf);
        fixed
            .iter()
            .map(|&a2| kind.concordance(a1, a2))
            .collect::<CompensatedSum<T>>()
            .value()
            / pairs
    })
}

/// Permutation model for fuzzy or hard clusterings.
///
/// A uniformly random relabelling of the points maps each pair to a uniform
/// pair, so the expectation is that of the concordance between an independent
/// uniform pair of each clustering.
pub fn expected_conc_perm<T: Scalar>(
    c1: &MembershipMatrix<T>,
    c2: &MembershipMatrix<T>,
    kind: IndexKind,
    cfg: &McConfig,
) -> Result<ExpectationEstimate<T>> {
    check_same_points(c1, c2)?;
    c1.require_fuzzy("first clustering")?;
    c2.require_fuzzy("second clustering")?;
    let (p1, p2) = (
        PairAgreements::new(c1, kind)?,
        PairAgreements::new(c2, kind)?,
    );
    let n = c1.n_points();
    monte_carlo(cfg, 0, |rng, _| {
        let (i, j) = random_pair(rng, n);
        let (k, l) = random_pair(rng, n);
        kind.concordance(p1.agreement(i, j), p2.agreement(k, l))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirichlet::DirichletParams;
    use crate::hard_models::ProportionVector;

    fn cat(p: &[f64]) -> ModelDistribution<f64> {
        ModelDistribution::Categorical(ProportionVector::new(p.to_vec()).unwrap())
    }

    fn within(e: &ExpectationEstimate<f64>, want: f64, sigmas: f64) {
        assert!(
            (e.value - want).abs() <= sigmas * e.std_error,
            "estimate {} +- {} vs {want}",
            e.value,
            e.std_error
        );
    }

    #[test]
    fn two_sided_categorical_matches_closed_form() {
        let d = cat(&[0.5, 0.5]);
        let e =
            expected_conc_two_sided(&d, &d, IndexKind::Ndc, &McConfig::new(1_000_000, 1)).unwrap();
        within(&e, 0.5, 3.0);
    }

    #[test]
    fn one_sided_matches_exhaustive_enumeration() {
        // c2 = {1,1,2}, d1 = Cat(2/3, 1/3). Pairs of c2 agree with probability
        // 1/3; two categorical draws agree with probability 5/9.
        let c2 = MembershipMatrix::<f64>::from_labels(&[0, 0, 1], 2).unwrap();
        let d1 = cat(&[2.0 / 3.0, 1.0 / 3.0]);
        let q = 5.0 / 9.0;
        let oracle = (1.0 / 3.0) * q + (2.0 / 3.0) * (1.0 - q);
        let e = expected_conc_one_sided(&d1, &c2, IndexKind::Ndc, &McConfig::new(1_000_000, 2))
            .unwrap();
        within(&e, oracle, 3.0);
    }

    #[test]
    fn one_sided_with_identical_points_is_mean_agreement() {
        let c2 = MembershipMatrix::from_rows(&[[0.2, 0.8]; 6]).unwrap();
        let d1 = ModelDistribution::Dirichlet(DirichletParams::<f64>::flat(2).unwrap());
        let cfg = McConfig::new(200_000, 3);
        let e = expected_conc_one_sided(&d1, &c2, IndexKind::Ndc, &cfg).unwrap();
        // Flat on the 1-simplex: 1 - |U - V| has mean 2/3.
        within(&e, 2.0 / 3.0, 4.0);
    }

    #[test]
    fn exhaustive_and_sampled_one_sided_agree() {
        let c2 = MembershipMatrix::<f64>::from_rows(&[
            [0.9, 0.05, 0.05],
            [0.1, 0.8, 0.1],
            [0.3, 0.3, 0.4],
            [0.6, 0.3, 0.1],
            [0.05, 0.05, 0.9],
        ])
        .unwrap();
        let d1 = ModelDistribution::Dirichlet(DirichletParams::new(vec![0.5, 1.5]).unwrap());
        let a =
            expected_conc_one_sided(&d1, &c2, IndexKind::Ndc, &McConfig::new(400_000, 4)).unwrap();
        let b = expected_conc_one_sided_exhaustive(
            &d1,
            &c2,
            IndexKind::Ndc,
            &McConfig::new(100_000, 5),
        )
        .unwrap();
        let tol = 3.0 * (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
        assert!((a.value - b.value).abs() < tol, "{a:?} {b:?}");
        // Averaging over the fixed pairs removes part of the per-draw variance.
        assert!(b.std_error * 100_000f64.sqrt() < a.std_error * 400_000f64.sqrt());
    }

    #[test]
    fn perm_single_cluster_is_one() {
        let c = MembershipMatrix::<f64>::from_labels(&[0, 0, 0, 0], 1).unwrap();
        let e = expected_conc_perm(&c, &c, IndexKind::Ndc, &McConfig::new(1000, 6)).unwrap();
        assert_eq!(e.value, 1.0);
        assert_eq!(e.std_error, 0.0);
    }

    #[test]
    fn perm_hard_matches_closed_form() {
        let c = MembershipMatrix::<f64>::from_labels(&[0, 0, 1], 2).unwrap();
        let e = expected_conc_perm(&c, &c, IndexKind::Ndc, &McConfig::new(1_000_000, 7)).unwrap();
        within(&e, 5.0 / 9.0, 3.0);
    }

    #[test]
    fn deterministic_under_fixed_configuration() {
        let d = ModelDistribution::Dirichlet(DirichletParams::<f64>::flat(3).unwrap());
        let cfg = McConfig::new(50_001, 11).with_workers(3);
        let a = expected_conc_two_sided(&d, &d, IndexKind::Brouwer, &cfg).unwrap();
        let b = expected_conc_two_sided(&d, &d, IndexKind::Brouwer, &cfg).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
        let single =
            expected_conc_two_sided(&d, &d, IndexKind::Brouwer, &cfg.with_workers(1)).unwrap();
        let tol = 3.0 * (a.std_error.powi(2) + single.std_error.powi(2)).sqrt();
        assert!((a.value - single.value).abs() < tol);
    }

    #[test]
    fn rejects_empty_runs() {
        let d = cat(&[1.0]);
        assert!(expected_conc_two_sided(&d, &d, IndexKind::Ndc, &McConfig::new(0, 0)).is_err());
        let cfg = McConfig::new(10, 0).with_workers(0);
        assert!(expected_conc_two_sided(&d, &d, IndexKind::Ndc, &cfg).is_err());
    }
}
