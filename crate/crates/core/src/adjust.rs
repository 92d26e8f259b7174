//! Chance-adjusted indices: `(raw - E[raw]) / (max - E[raw])` with `max = 1`.

use std::collections::HashMap;
use std::fmt::{self, Display};
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dirichlet::{model_for, DirichletFit, DirichletModel, ModelDistribution};
use crate::error::{Error, Result};
use crate::expectation::{
    expected_conc_one_sided, expected_conc_perm, expected_conc_two_sided, ExpectationEstimate,
    McConfig,
};
use crate::hard_models::{
    expected_ri_all, expected_ri_cat, expected_ri_num, expected_ri_perm, ClusterSizes,
    ProportionVector, NUM_EXACT_MAX_POINTS,
};
use crate::indices::{check_same_points, raw_index, IndexKind};
use crate::membership::MembershipMatrix;
use crate::rng::{derive_seed, GENERATOR};
use crate::scalar::Scalar;

/// `|1 - E|` below this is treated as a vanishing denominator.
pub const DEGENERATE_DENOMINATOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelFamily {
    Perm,
    Cat,
    Num,
    All,
    Fit,
    Sym,
    Flat,
}

impl ModelFamily {
    pub const ALL: [ModelFamily; 7] = [
        Self::Perm,
        Self::Cat,
        Self::Num,
        Self::All,
        Self::Fit,
        Self::Sym,
        Self::Flat,
    ];

    /// Defined for hard clusterings only.
    pub fn is_hard_only(self) -> bool {
        matches!(self, Self::Cat | Self::Num | Self::All)
    }

    pub fn dirichlet(self) -> Option<DirichletModel> {
        match self {
            Self::Fit => Some(DirichletModel::Fit),
            Self::Sym => Some(DirichletModel::Sym),
            Self::Flat => Some(DirichletModel::Flat),
            _ => None,
        }
    }

    pub fn supports_one_sided(self) -> bool {
        !self.is_hard_only()
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Perm => "perm",
            Self::Cat => "cat",
            Self::Num => "num",
            Self::All => "all",
            Self::Fit => "fit",
            Self::Sym => "sym",
            Self::Flat => "flat",
        }
    }
}

impl Display for ModelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        Self::ALL
            .into_iter()
            .find(|m| m.name() == lower)
            .ok_or_else(|| {
                Error::Parameter(format!(
                    "unknown model `{s}` (expected one of perm, cat, num, all, fit, sym, flat)"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sidedness {
    /// First clustering random, second held fixed.
    One,
    #[default]
    Two,
}

impl Display for Sidedness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::One => "one",
            Self::Two => "two",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RandomModel {
    pub family: ModelFamily,
    pub sided: Sidedness,
    /// Use a closed form when the inputs allow one. When false, models that
    /// have a sampling route use it even for hard inputs.
    pub prefer_closed_form: bool,
}

impl RandomModel {
    pub fn two_sided(family: ModelFamily) -> Self {
        Self {
            family,
            sided: Sidedness::Two,
            prefer_closed_form: true,
        }
    }

    pub fn one_sided(family: ModelFamily) -> Self {
        Self {
            family,
            sided: Sidedness::One,
            prefer_closed_form: true,
        }
    }

    pub fn sampled(self) -> Self {
        Self {
            prefer_closed_form: false,
            ..self
        }
    }

    fn code(self) -> u64 {
        self.family as u64 * 2 + u64::from(self.sided == Sidedness::One)
    }

    fn check(self, hard: bool) -> Result<()> {
        if self.sided == Sidedness::One && !self.family.supports_one_sided() {
            return Err(Error::Unsupported(format!(
                "the {} model has no one-sided variant (use perm, fit, sym or flat)",
                self.family
            )));
        }
        if self.family.is_hard_only() && !hard {
            return Err(Error::Unsupported(format!(
                "the {} model is defined for hard clusterings only",
                self.family
            )));
        }
        Ok(())
    }
}

impl Display for RandomModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.family)?;
        if self.sided == Sidedness::One {
            f.write_str(" (one-sided)")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    MonteCarlo,
}

/// Conditions worth surfacing next to a result.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Flags {
    /// A fitted model fell back to its categorical limit.
    pub categorical_limit: bool,
    /// A fitted concentration hit the cap.
    pub capped: bool,
    /// The index is not reflexive, so `max = 1` may be unreachable.
    pub non_reflexive: bool,
    /// The large-`N` approximation replaced the exact Stirling ratio.
    pub num_approximated: bool,
}

impl Flags {
    /// Names of the set flags, `;`-separated.
    pub fn describe(&self) -> String {
        [
            (self.categorical_limit, "categorical_limit"),
            (self.capped, "capped"),
            (self.non_reflexive, "non_reflexive"),
            (self.num_approximated, "num_approximated"),
        ]
        .iter()
        .filter(|(on, _)| *on)
        .map(|(_, name)| *name)
        .collect::<Vec<_>>()
        .join(";")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance<T> {
    pub model: RandomModel,
    pub kind: IndexKind,
    pub method: Method,
    pub samples: u64,
    pub seed: u64,
    pub workers: usize,
    pub generator: &'static str,
    /// Model distributions used for the first and (two-sided) second clustering.
    pub fitted: Vec<ModelDistribution<T>>,
    pub flags: Flags,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdjustedResult<T> {
    pub raw: T,
    pub expected: T,
    pub adjusted: T,
    pub max_index: T,
    /// Monte-Carlo standard error of `expected`; zero for closed forms.
    pub expected_std_error: T,
    /// Monte-Carlo error of `expected` carried through to `adjusted`.
    pub std_error: T,
    pub provenance: Provenance<T>,
}

/// Assembles the adjusted value from its parts.
pub fn assemble<T: Scalar>(raw: T, expected: T, expected_se: T) -> Result<(T, T)> {
    let denom = T::one() - expected;
    let threshold = T::lit(DEGENERATE_DENOMINATOR).max(T::lit(4.0) * T::epsilon());
    if denom.abs() < threshold {
        return Err(Error::UndefinedAdjustment {
            expected: expected.to_f64_lossy(),
        });
    }
    let adjusted = (raw - expected) / denom;
    let se = (raw - T::one()).abs() / (denom * denom) * expected_se;
    Ok((adjusted, se))
}

fn content_hash<T: Scalar>(m: &MembershipMatrix<T>) -> u64 {
    // FNV-1a over shape and bit patterns; stable across platforms and runs.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut feed = |x: u64| {
        for b in x.to_le_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    };
    feed(m.n_points() as u64);
    feed(m.n_clusters() as u64);
    for &v in m.values() {
        feed(v.to_f64_lossy().to_bits());
    }
    h
}

type FitKey = (u64, usize, usize, DirichletModel);

/// Fitted model distributions keyed by matrix content and model.
#[derive(Debug)]
pub struct FitCache<T> {
    map: Mutex<HashMap<FitKey, Arc<DirichletFit<T>>>>,
}

impl<T> Default for FitCache<T> {
    fn default() -> Self {
        Self {
            map: Mutex::new(HashMap::new()),
        }
    }
}

impl<T: Scalar> FitCache<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get_or_fit(
        &self,
        m: &MembershipMatrix<T>,
        model: DirichletModel,
    ) -> Result<Arc<DirichletFit<T>>> {
        let key = (content_hash(m), m.n_points(), m.n_clusters(), model);
        if let Some(fit) = self.map.lock().expect("fit cache poisoned").get(&key) {
            return Ok(Arc::clone(fit));
        }
        let fit = Arc::new(model_for(m, model)?);
        self.map
            .lock()
            .expect("fit cache poisoned")
            .entry(key)
            .or_insert_with(|| Arc::clone(&fit));
        Ok(fit)
    }

    pub fn len(&self) -> usize {
        self.map.lock().expect("fit cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A validated pair with its raw index, reusable across models and seeds.
#[derive(Debug, Clone)]
pub struct Comparison<'a, T: Scalar> {
    c1: &'a MembershipMatrix<T>,
    c2: &'a MembershipMatrix<T>,
    kind: IndexKind,
    raw: T,
    hard: bool,
}

impl<'a, T: Scalar> Comparison<'a, T> {
    pub fn new(
        c1: &'a MembershipMatrix<T>,
        c2: &'a MembershipMatrix<T>,
        kind: IndexKind,
    ) -> Result<Self> {
        check_same_points(c1, c2)?;
        let hard = c1.require_fuzzy("first clustering")?.is_hard()
            && c2.require_fuzzy("second clustering")?.is_hard();
        let raw = raw_index(c1, c2, kind)?;
        Ok(Self {
            c1,
            c2,
            kind,
            raw,
            hard,
        })
    }

    pub fn raw(&self) -> T {
        self.raw
    }

    pub fn both_hard(&self) -> bool {
        self.hard
    }

    pub fn adjust(
        &self,
        model: RandomModel,
        cache: &FitCache<T>,
        cfg: &McConfig,
    ) -> Result<AdjustedResult<T>> {
        model.check(self.hard)?;
        let mut flags = Flags {
            non_reflexive: !self.kind.is_reflexive(),
            ..Flags::default()
        };
        let mut fitted = Vec::new();
        let closed = model.prefer_closed_form;
        let estimate = match model.family {
            ModelFamily::Perm if self.hard && closed => {
                let (s1, s2) = (
                    ClusterSizes::from_matrix(self.c1)?,
                    ClusterSizes::from_matrix(self.c2)?,
                );
                ExpectationEstimate::exact(expected_ri_perm(&s1, &s2)?)
            }
            ModelFamily::Perm => expected_conc_perm(self.c1, self.c2, self.kind, cfg)?,
            ModelFamily::Cat => {
                let p1 = ProportionVector::from_sizes(&ClusterSizes::from_matrix(self.c1)?)?;
                let p2 = ProportionVector::from_sizes(&ClusterSizes::from_matrix(self.c2)?)?;
                let (d1, d2) = (
                    ModelDistribution::Categorical(p1.clone()),
                    ModelDistribution::Categorical(p2.clone()),
                );
                let e = if closed {
                    ExpectationEstimate::exact(expected_ri_cat(&p1, &p2))
                } else {
                    expected_conc_two_sided(&d1, &d2, self.kind, cfg)?
                };
                fitted = vec![d1, d2];
                e
            }
            ModelFamily::Num => {
                let n_points = self.c1.n_points();
                let exact = n_points <= NUM_EXACT_MAX_POINTS;
                flags.num_approximated = !exact;
                let (n1, n2) = (self.c1.n_clusters(), self.c2.n_clusters());
                ExpectationEstimate::exact(expected_ri_num(n1, n2, n_points, exact)?)
            }
            ModelFamily::All => ExpectationEstimate::exact(expected_ri_all(self.c1.n_points())?),
            ModelFamily::Fit | ModelFamily::Sym | ModelFamily::Flat => {
                let dm = model.family.dirichlet().expect("dirichlet family");
                let f1 = cache.get_or_fit(self.c1, dm)?;
                flags.categorical_limit |= f1.categorical_limit;
                flags.capped |= f1.capped;
                fitted.push(f1.distribution.clone());
                match model.sided {
                    Sidedness::One => {
                        expected_conc_one_sided(&f1.distribution, self.c2, self.kind, cfg)?
                    }
                    Sidedness::Two => {
                        let f2 = cache.get_or_fit(self.c2, dm)?;
                        flags.categorical_limit |= f2.categorical_limit;
                        flags.capped |= f2.capped;
                        fitted.push(f2.distribution.clone());
                        match (&f1.distribution, &f2.distribution) {
                            (
                                ModelDistribution::Categorical(p1),
                                ModelDistribution::Categorical(p2),
                            ) if closed => ExpectationEstimate::exact(expected_ri_cat(p1, p2)),
                            (d1, d2) => expected_conc_two_sided(d1, d2, self.kind, cfg)?,
                        }
                    }
                }
            }
        };
        let (adjusted, std_error) = assemble(self.raw, estimate.value, estimate.std_error)?;
        let sampled = !estimate.is_exact();
        Ok(AdjustedResult {
            raw: self.raw,
            expected: estimate.value,
            adjusted,
            max_index: T::one(),
            expected_std_error: estimate.std_error,
            std_error,
            provenance: Provenance {
                model,
                kind: self.kind,
                method: if sampled {
                    Method::MonteCarlo
                } else {
                    Method::ClosedForm
                },
                samples: estimate.samples,
                seed: if sampled { cfg.seed } else { 0 },
                workers: if sampled { cfg.workers } else { 0 },
                generator: GENERATOR,
                fitted,
                flags,
            },
        })
    }
}

/// Adjusted index of one pair under one random model.
pub fn adjusted_index<T: Scalar>(
    c1: &MembershipMatrix<T>,
    c2: &MembershipMatrix<T>,
    model: RandomModel,
    kind: IndexKind,
    cfg: &McConfig,
) -> Result<AdjustedResult<T>> {
    Comparison::new(c1, c2, kind)?.adjust(model, &FitCache::new(), cfg)
}

/// One `(pair, model)` cell of a batch.
#[derive(Debug)]
pub struct BatchCell<T> {
    pub pair: usize,
    pub model: RandomModel,
    pub seed: u64,
    pub result: Result<AdjustedResult<T>>,
}

/// Seed for a cell, derived from the pair's content and the model so that
/// reordering or duplicating pairs does not change any cell.
pub fn cell_seed<T: Scalar>(
    seed: u64,
    c1: &MembershipMatrix<T>,
    c2: &MembershipMatrix<T>,
    model: RandomModel,
) -> u64 {
    derive_seed(seed, &[content_hash(c1), content_hash(c2), model.code()])
}

/// Every pair under every model. Cells run in parallel; a failing cell is
/// recorded and the rest continue. Output is ordered by pair, then model.
pub fn adjusted_batch<T: Scalar>(
    pairs: &[(&MembershipMatrix<T>, &MembershipMatrix<T>)],
    models: &[RandomModel],
    kind: IndexKind,
    cfg: &McConfig,
) -> Vec<BatchCell<T>> {
    let cache = FitCache::new();
    let comparisons: Vec<Result<Comparison<'_, T>>> = pairs
        .par_iter()
        .map(|&(c1, c2)| Comparison::new(c1, c2, kind))
        .collect();
    let cells: Vec<(usize, usize)> = (0..pairs.len())
        .flat_map(|p| (0..models.len()).map(move |m| (p, m)))
        .collect();
    cells
        .into_par_iter()
        .map(|(p, m)| {
            let model = models[m];
            let (c1, c2) = pairs[p];
            let seed = cell_seed(cfg.seed, c1, c2, model);
            let result = match &comparisons[p] {
                Ok(cmp) => cmp.adjust(model, &cache, &cfg.with_seed(seed)),
                Err(e) => Err(e.clone()),
            };
            BatchCell {
                pair: p,
                model,
                seed,
                result,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn labels(l: &[usize], n: usize) -> MembershipMatrix<f64> {
        MembershipMatrix::from_labels(l, n).unwrap()
    }

    proptest::proptest! {
        #[test]
        fn assemble_is_monotone_and_scale_free(e in 0.0f64..0.99, r1 in 0.0f64..=1.0, r2 in 0.0f64..=1.0, b in 0.1f64..10.0, c in -5.0f64..5.0) {
            let (a1, _) = assemble(r1, e, 0.0).unwrap();
            let (a2, _) = assemble(r2, e, 0.0).unwrap();
            proptest::prop_assert_eq!(r1 < r2, a1 < a2);
            // A common affine rescaling of index, expectation and maximum leaves the ratio unchanged.
            let scaled = ((b * r1 + c) - (b * e + c)) / ((b + c) - (b * e + c));
            proptest::prop_assert!((scaled - a1).abs() < 1e-9 * (1.0 + a1.abs()));
            proptest::prop_assert!(assemble(e, e, 0.0).unwrap().0.abs() < 1e-15);
            proptest::prop_assert_eq!(assemble(1.0, e, 0.0).unwrap().0, 1.0);
        }
    }

    #[test]
    fn assemble_algebra() {
        let (a, se) = assemble(0.8, 0.6, 0.01).unwrap();
        assert_abs_diff_eq!(a, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(se, 0.2 / 0.16 * 0.01, epsilon = 1e-12);
        assert_eq!(assemble(1.0, 0.3, 0.0).unwrap().0, 1.0);
        assert!(matches!(
            assemble(0.5, 1.0, 0.0),
            Err(Error::UndefinedAdjustment { .. })
        ));
    }

    #[test]
    fn identical_inputs_adjust_to_one() {
        let m =
            MembershipMatrix::from_rows(&[[0.9, 0.1], [0.2, 0.8], [0.5, 0.5], [0.7, 0.3]]).unwrap();
        let cfg = McConfig::new(20_000, 1);
        for family in [
            ModelFamily::Perm,
            ModelFamily::Fit,
            ModelFamily::Sym,
            ModelFamily::Flat,
        ] {
            for model in [
                RandomModel::two_sided(family),
                RandomModel::one_sided(family),
            ] {
                let r = adjusted_index(&m, &m, model, IndexKind::Ndc, &cfg).unwrap();
                assert_eq!(r.raw, 1.0);
                assert_eq!(r.adjusted, 1.0, "{model}");
            }
        }
    }

    #[test]
    fn single_cluster_pair_is_undefined() {
        let m = labels(&[0, 0, 0], 1);
        let r = adjusted_index(
            &m,
            &m,
            RandomModel::two_sided(ModelFamily::Perm),
            IndexKind::Ndc,
            &McConfig::default(),
        );
        assert!(matches!(r, Err(Error::UndefinedAdjustment { .. })));
    }

    #[test]
    fn hard_only_models_reject_fuzzy_and_one_sided() {
        let f = MembershipMatrix::from_rows(&[[0.9, 0.1], [0.2, 0.8], [0.5, 0.5]]).unwrap();
        let h = labels(&[0, 1, 1], 2);
        let cfg = McConfig::new(100, 1);
        for family in [ModelFamily::Cat, ModelFamily::Num, ModelFamily::All] {
            let e = adjusted_index(&f, &h, RandomModel::two_sided(family), IndexKind::Ndc, &cfg)
                .unwrap_err();
            assert!(e.is_usage(), "{e}");
            let e = adjusted_index(&h, &h, RandomModel::one_sided(family), IndexKind::Ndc, &cfg)
                .unwrap_err();
            assert!(e.is_usage(), "{e}");
        }
    }

    #[test]
    fn hard_perm_uses_closed_form() {
        let a = labels(&[0, 0, 1, 1, 2, 2], 3);
        let b = labels(&[0, 0, 0, 1, 1, 1], 2);
        let r = adjusted_index(
            &a,
            &b,
            RandomModel::two_sided(ModelFamily::Perm),
            IndexKind::Ndc,
            &McConfig::default(),
        )
        .unwrap();
        assert_eq!(r.provenance.method, Method::ClosedForm);
        assert_eq!(r.std_error, 0.0);
        // Contingency [[2,0],[1,1],[0,2]]: sum C(n_ij,2)=2, rows 3, columns 6, pairs 15.
        let expected_index = 3.0 * 6.0 / 15.0;
        assert_abs_diff_eq!(
            r.adjusted,
            (2.0 - expected_index) / (4.5 - expected_index),
            epsilon = 1e-12
        );
    }

    #[test]
    fn sampled_cat_matches_closed_form() {
        let a = labels(&[0, 0, 0, 1, 1, 2, 2, 2], 3);
        let b = labels(&[0, 1, 0, 1, 0, 1, 1, 1], 2);
        let cfg = McConfig::new(400_000, 9);
        let exact = adjusted_index(
            &a,
            &b,
            RandomModel::two_sided(ModelFamily::Cat),
            IndexKind::Ndc,
            &cfg,
        )
        .unwrap();
        let mc = adjusted_index(
            &a,
            &b,
            RandomModel::two_sided(ModelFamily::Cat).sampled(),
            IndexKind::Ndc,
            &cfg,
        )
        .unwrap();
        assert_eq!(mc.provenance.method, Method::MonteCarlo);
        // Standard error of the sampled expectation is below 1e-3 here.
        assert_abs_diff_eq!(exact.expected, mc.expected, epsilon = 3e-3);
    }

    #[test]
    fn fit_on_hard_input_reduces_to_cat() {
        let a = labels(&[0, 0, 0, 1, 1, 2, 2, 2], 3);
        let b = labels(&[0, 1, 0, 1, 0, 1, 1, 1], 2);
        let cfg = McConfig::new(1000, 2);
        let cat = adjusted_index(
            &a,
            &b,
            RandomModel::two_sided(ModelFamily::Cat),
            IndexKind::Ndc,
            &cfg,
        )
        .unwrap();
        let fit = adjusted_index(
            &a,
            &b,
            RandomModel::two_sided(ModelFamily::Fit),
            IndexKind::Ndc,
            &cfg,
        )
        .unwrap();
        assert_abs_diff_eq!(cat.adjusted, fit.adjusted, epsilon = 1e-12);
        assert!(fit.provenance.flags.categorical_limit);
    }

    #[test]
    fn brouwer_is_flagged() {
        let m = MembershipMatrix::from_rows(&[[0.9, 0.1], [0.2, 0.8], [0.5, 0.5]]).unwrap();
        let r = adjusted_index(
            &m,
            &m,
            RandomModel::two_sided(ModelFamily::Flat),
            IndexKind::Brouwer,
            &McConfig::new(1000, 1),
        )
        .unwrap();
        assert!(r.provenance.flags.non_reflexive);
        assert_eq!(r.provenance.flags.describe(), "non_reflexive");
    }

    #[test]
    fn batch_is_order_independent_and_records_errors() {
        let a =
            MembershipMatrix::from_rows(&[[0.9, 0.1], [0.2, 0.8], [0.5, 0.5], [0.6, 0.4]]).unwrap();
        let b =
            MembershipMatrix::from_rows(&[[0.3, 0.7], [0.2, 0.8], [0.9, 0.1], [0.6, 0.4]]).unwrap();
        let short = labels(&[0, 1, 1], 2);
        let models = [
            RandomModel::two_sided(ModelFamily::Fit),
            RandomModel::two_sided(ModelFamily::Flat),
        ];
        let cfg = McConfig::new(5000, 11);
        let one = adjusted_batch(
            &[(&a, &b), (&a, &short), (&a, &b)],
            &models,
            IndexKind::Ndc,
            &cfg,
        );
        assert_eq!(one.len(), 6);
        assert!(one[2].result.is_err() && one[3].result.is_err());
        let first = one[0].result.as_ref().unwrap();
        assert_eq!(first, one[4].result.as_ref().unwrap());
        let two = adjusted_batch(&[(&a, &b)], &models, IndexKind::Ndc, &cfg);
        assert_eq!(first, two[0].result.as_ref().unwrap());
        assert!(adjusted_batch::<f64>(&[], &models, IndexKind::Ndc, &cfg).is_empty());
    }

    #[test]
    fn cache_reuses_fits() {
        let a =
            MembershipMatrix::from_rows(&[[0.9, 0.1], [0.2, 0.8], [0.5, 0.5], [0.6, 0.4]]).unwrap();
        let cache = FitCache::new();
        let f1 = cache.get_or_fit(&a, DirichletModel::Fit).unwrap();
        let f2 = cache.get_or_fit(&a.clone(), DirichletModel::Fit).unwrap();
        assert!(Arc::ptr_eq(&f1, &f2));
        cache.get_or_fit(&a, DirichletModel::Sym).unwrap();
        assert_eq!(cache.len(), 2);
    }
}
