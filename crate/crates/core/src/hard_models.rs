//! Closed-form expected Rand index under the hard random models.
//!
//! Every two-sided expectation has the form `q1 q2 + (1 - q1)(1 - q2)` where
//! `qk` is the probability that a random pair of points is co-clustered by the
//! k-th random clustering. The models differ only in `qk`:
//!
//! | model | `qk` |
//! |-------|------|
//! | permutation | `sum_i C(c_i, 2) / C(N, 2)` |
//! | categorical | `sum_i p_i^2` |
//! | num | `S(N-1, n) / S(N, n)` (Stirling numbers of the second kind) |
//! | all | `B(N-1) / B(N)` (Bell numbers) |

use serde::Serialize;

use crate::error::{Error, Result};
use crate::membership::MembershipMatrix;
use crate::scalar::{Field, Scalar};

/// Largest point count for the exact Stirling-ratio form of the Num model.
pub const NUM_EXACT_MAX_POINTS: usize = 5000;
/// Largest point count whose Bell numbers are computed in exact integers.
pub const BELL_EXACT_MAX_POINTS: usize = 25;

/// Per-cluster point counts of a hard clustering.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClusterSizes {
    counts: Vec<u64>,
}

impl ClusterSizes {
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::Parameter("cluster size vector is empty".into()));
        }
        Ok(Self { counts })
    }

    /// Sizes of a hard clustering; fuzzy input is rejected.
    pub fn from_matrix<T: Scalar>(m: &MembershipMatrix<T>) -> Result<Self> {
        if !m.classify().is_hard() {
            return Err(Error::Unsupported(
                "cluster sizes need a hard clustering".into(),
            ));
        }
        let mut counts = vec![0u64; m.n_clusters()];
        for l in m.argmax_labels() {
            counts[l] += 1;
        }
        Ok(Self { counts })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn n_points(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Number of unordered pairs inside clusters, `sum_i C(c_i, 2)`.
    pub fn co_clustered_pairs(&self) -> u64 {
        self.counts.iter().map(|&c| choose2(c)).sum()
    }
}

/// Cluster proportion vector on the simplex.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProportionVector<T> {
    p: Vec<T>,
}

impl<T: Field> ProportionVector<T> {
    /// Exact proportions `c_i / N`.
    pub fn from_sizes(sizes: &ClusterSizes) -> Result<Self> {
        let n = sizes.n_points();
        if n == 0 {
            return Err(Error::Parameter("cluster sizes sum to zero".into()));
        }
        let total = T::from_count(n);
        Ok(Self {
            p: sizes
                .counts
                .iter()
                .map(|&c| T::from_count(c) / total.clone())
                .collect(),
        })
    }

    pub fn as_slice(&self) -> &[T] {
        &self.p
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    /// Probability that two i.i.d. draws land in the same cluster.
    pub fn collision_probability(&self) -> T {
        self.p
            .iter()
            .fold(T::zero(), |acc, x| acc + x.clone() * x.clone())
    }
}

impl<T: Scalar> ProportionVector<T> {
    /// Validates nonnegativity and unit sum (tolerance 1e-9).
    pub fn new(p: Vec<T>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::Parameter("proportion vector is empty".into()));
        }
        if p.iter().any(|x| !x.is_finite() || *x < T::zero()) {
            return Err(Error::Parameter(
                "proportions must be finite and nonnegative".into(),
            ));
        }
        let s: T = p.iter().copied().sum();
        if (s - T::one()).abs() > T::lit(1e-9) {
            return Err(Error::Parameter(format!("proportions sum to {s}, not 1")));
        }
        Ok(Self { p })
    }
}

fn choose2(c: u64) -> u64 {
    c * c.saturating_sub(1) / 2
}

fn two_sided<T: Field>(q1: T, q2: T) -> T {
    q1.clone() * q2.clone() + (T::one() - q1) * (T::one() - q2)
}

/// Permutation model (cluster counts and sizes fixed).
pub fn expected_ri_perm<T: Field>(s1: &ClusterSizes, s2: &ClusterSizes) -> Result<T> {
    let n = s1.n_points();
    if n != s2.n_points() {
        return Err(Error::DimensionMismatch(format!(
            "cluster sizes cover {n} and {} points",
            s2.n_points()
        )));
    }
    if n < 2 {
        return Err(Error::Parameter("need at least 2 points".into()));
    }
    let pairs = T::from_count(choose2(n));
    let t1 = T::from_count(s1.co_clustered_pairs());
    let t2 = T::from_count(s2.co_clustered_pairs());
    Ok(
        (t1.clone() * t2.clone() + (pairs.clone() - t1) * (pairs.clone() - t2))
            / (pairs.clone() * pairs),
    )
}

/// Categorical model (each point's label drawn i.i.d. from `p`).
pub fn expected_ri_cat<T: Field>(p1: &ProportionVector<T>, p2: &ProportionVector<T>) -> T {
    two_sided(p1.collision_probability(), p2.collision_probability())
}

/// Large-`N` approximation of the Num model: uniform categorical on `n` clusters.
pub fn expected_ri_num_approx<T: Field>(n1: u64, n2: u64) -> Result<T> {
    if n1 == 0 || n2 == 0 {
        return Err(Error::Parameter("cluster counts must be positive".into()));
    }
    Ok(two_sided(
        T::one() / T::from_count(n1),
        T::one() / T::from_count(n2),
    ))
}

/// Num model (cluster count fixed, partition uniform).
pub fn expected_ri_num<T: Scalar>(n1: usize, n2: usize, n_points: usize, exact: bool) -> Result<T> {
    for n in [n1, n2] {
        if n == 0 || n > n_points {
            return Err(Error::Parameter(format!(
                "cluster count {n} must lie in 1..={n_points}"
            )));
        }
    }
    if !exact {
        return expected_ri_num_approx(n1 as u64, n2 as u64);
    }
    if n_points > NUM_EXACT_MAX_POINTS {
        return Err(Error::Capability(format!(
            "exact Num expectation is limited to {NUM_EXACT_MAX_POINTS} points ({n_points} given); use the approximation"
        )));
    }
    let q1 = T::lit(stirling_ratio(n_points, n1));
    let q2 = T::lit(stirling_ratio(n_points, n2));
    Ok(two_sided(q1, q2))
}

/// All model (partition uniform over every clustering of the points).
pub fn expected_ri_all<T: Scalar>(n_points: usize) -> Result<T> {
    if n_points < 2 {
        return Err(Error::Parameter("need at least 2 points".into()));
    }
    let r = T::lit(bell_ratio(n_points));
    Ok(two_sided(r, r))
}

#[inline]
fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln S(m, k)` for `k = 0..=max_k` at `m = n` and `m = n - 1`.
fn stirling_log_rows(n: usize, max_k: usize) -> (Vec<f64>, Vec<f64>) {
    let mut row = vec![f64::NEG_INFINITY; max_k + 1];
    row[0] = 0.0;
    let mut prev = row.clone();
    for m in 1..=n {
        prev.copy_from_slice(&row);
        for k in (1..=m.min(max_k)).rev() {
            row[k] = log_add_exp((k as f64).ln() + row[k], row[k - 1]);
        }
        row[0] = f64::NEG_INFINITY;
    }
    (prev, row)
}

/// `S(n - 1, k) / S(n, k)`, computed in log space.
pub fn stirling_ratio(n: usize, k: usize) -> f64 {
    assert!(k >= 1 && k <= n, "need 1 <= k <= n");
    let (prev, row) = stirling_log_rows(n, k);
    (prev[k] - row[k]).exp()
}

/// `B(n - 1) / B(n)` via the Bell triangle; exact integers for `n <= 25`.
pub fn bell_ratio(n: usize) -> f64 {
    assert!(n >= 1, "need n >= 1");
    if n <= BELL_EXACT_MAX_POINTS {
        let mut row: Vec<u128> = vec![1];
        let mut bells = vec![1u128];
        for _ in 1..=n {
            let mut next = Vec::with_capacity(row.len() + 1);
            next.push(*row.last().expect("nonempty"));
            for &x in &row {
                let last = *next.last().expect("nonempty");
                next.push(last + x);
            }
            bells.push(next[0]);
            row = next;
        }
        return bells[n - 1] as f64 / bells[n] as f64;
    }
    let mut row = vec![0.0f64];
    let mut prev_bell = 0.0;
    for _ in 1..=n {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(*row.last().expect("nonempty"));
        for &x in &row {
            let last = *next.last().expect("nonempty");
            next.push(log_add_exp(last, x));
        }
        prev_bell = row[0];
        row = next;
    }
    (prev_bell - row[0]).exp()
}
