//! Agreement and concordance kernels and the raw pairwise index.
//!
//! Both supported extensions share one shape: an agreement value in `[0, 1]`
//! per clustering and pair of points, and a concordance between the two
//! clusterings' agreements. The raw index is the mean concordance over all
//! unordered pairs. On hard inputs both reduce to the classic Rand index.

use std::borrow::Cow;
use std::fmt::Display;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::membership::MembershipMatrix;
use crate::scalar::{CompensatedSum, Scalar};

/// Agreement/concordance pair defining a fuzzy Rand extension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IndexKind {
    /// Normalized degree of concordance: L1 agreement, `1 - |a1 - a2|` concordance.
    #[default]
    Ndc,
    /// Cosine agreement, `a1 a2 + (1 - a1)(1 - a2)` concordance. Not reflexive.
    Brouwer,
}

impl IndexKind {
    pub fn is_reflexive(self) -> bool {
        self == IndexKind::Ndc
    }

    #[inline]
    pub fn concordance<T: Scalar>(self, a1: T, a2: T) -> T {
        match self {
            IndexKind::Ndc => T::one() - (a1 - a2).abs(),
            IndexKind::Brouwer => a1 * a2 + (T::one() - a1) * (T::one() - a2),
        }
    }

    /// Agreement between two raw membership vectors.
    pub fn agreement<T: Scalar>(self, u: &[T], v: &[T]) -> Result<T> {
        match self {
            IndexKind::Ndc => agreement_ndc(u, v),
            IndexKind::Brouwer => agreement_brouwer(u, v),
        }
    }

    /// Agreement for vectors already on the simplex, skipping checks.
    /// For Brouwer the vectors must be nonzero.
    #[inline]
    pub(crate) fn agreement_unchecked<T: Scalar>(self, u: &[T], v: &[T]) -> T {
        match self {
            IndexKind::Ndc => ndc(u, v),
            IndexKind::Brouwer => {
                let (mut dot, mut uu, mut vv) = (T::zero(), T::zero(), T::zero());
                for (&a, &b) in u.iter().zip(v) {
                    dot = dot + a * b;
                    uu = uu + a * a;
                    vv = vv + b * b;
                }
                clamp_unit(dot / (uu * vv).sqrt())
            }
        }
    }
}

impl Display for IndexKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            IndexKind::Ndc => "ndc",
            IndexKind::Brouwer => "brouwer",
        })
    }
}

impl FromStr for IndexKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ndc" => Ok(IndexKind::Ndc),
            "brouwer" => Ok(IndexKind::Brouwer),
            other => Err(Error::Parameter(format!(
                "unknown index kind {other:?} (ndc|brouwer)"
            ))),
        }
    }
}

#[inline]
fn clamp_unit<T: Scalar>(x: T) -> T {
    x.max(T::zero()).min(T::one())
}

#[inline]
fn ndc<T: Scalar>(u: &[T], v: &[T]) -> T {
    let l1 = u
        .iter()
        .zip(v)
        .fold(T::zero(), |acc, (&a, &b)| acc + (a - b).abs());
    clamp_unit(T::one() - l1 / T::lit(2.0))
}

fn check_dims<T>(u: &[T], v: &[T]) -> Result<()> {
    if u.len() == v.len() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(format!(
            "membership vectors of length {} and {}",
            u.len(),
            v.len()
        )))
    }
}

/// `1 - ||u - v||_1 / 2`.
pub fn agreement_ndc<T: Scalar>(u: &[T], v: &[T]) -> Result<T> {
    check_dims(u, v)?;
    Ok(ndc(u, v))
}

/// Cosine similarity of two nonzero membership vectors.
pub fn agreement_brouwer<T: Scalar>(u: &[T], v: &[T]) -> Result<T> {
    check_dims(u, v)?;
    if u.iter().all(|x| x.is_zero()) || v.iter().all(|x| x.is_zero()) {
        return Err(Error::UndefinedAgreement(
            "cosine agreement of a zero vector".into(),
        ));
    }
    Ok(IndexKind::Brouwer.agreement_unchecked(u, v))
}

pub fn concordance<T: Scalar>(a1: T, a2: T, kind: IndexKind) -> T {
    kind.concordance(a1, a2)
}

/// A clustering prepared for repeated pair-agreement lookups.
///
/// Brouwer rows are normalized once up front.
#[derive(Debug, Clone)]
pub struct PairAgreements<'a, T: Scalar> {
    kind: IndexKind,
    cols: usize,
    rows: Cow<'a, [T]>,
}

impl<'a, T: Scalar> PairAgreements<'a, T> {
    pub fn new(m: &'a MembershipMatrix<T>, kind: IndexKind) -> Result<Self> {
        let rows = match kind {
            IndexKind::Ndc => Cow::Borrowed(m.values()),
            IndexKind::Brouwer => {
                let mut out = Vec::with_capacity(m.values().len());
                for (i, r) in m.rows().enumerate() {
                    let norm = r.iter().map(|&x| x * x).sum::<T>().sqrt();
                    if norm.is_zero() {
                        return Err(Error::UndefinedAgreement(format!(
                            "row {i} is the zero vector"
                        )));
                    }
                    out.extend(r.iter().map(|&x| x / norm));
                }
                Cow::Owned(out)
            }
        };
        Ok(Self {
            kind,
            cols: m.n_clusters(),
            rows,
        })
    }

    pub fn n_points(&self) -> usize {
        self.rows.len() / self.cols
    }

    #[inline]
    fn row(&self, i: usize) -> &[T] {
        &self.rows[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn agreement(&self, i: usize, j: usize) -> T {
        let (u, v) = (self.row(i), self.row(j));
        match self.kind {
            IndexKind::Ndc => ndc(u, v),
            IndexKind::Brouwer => {
                clamp_unit(u.iter().zip(v).fold(T::zero(), |acc, (&a, &b)| acc + a * b))
            }
        }
    }

    /// Agreements of every unordered pair `(i < j)` in row-major pair order.
    pub fn all_pairs(&self) -> Vec<T> {
        let n = self.n_points();
        let mut out = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                out.push(self.agreement(i, j));
            }
        }
        out
    }
}

pub(crate) fn check_same_points<T: Scalar>(
    c1: &MembershipMatrix<T>,
    c2: &MembershipMatrix<T>,
) -> Result<()> {
    if c1.n_points() == c2.n_points() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(format!(
            "clusterings cover {} and {} points",
            c1.n_points(),
            c2.n_points()
        )))
    }
}

/// Mean concordance over all `N(N-1)/2` unordered pairs.
///
/// Rows are summed in parallel with per-row compensated sums that are merged
/// in row order, so the result does not depend on the thread count.
pub fn raw_index<T: Scalar>(
    c1: &MembershipMatrix<T>,
    c2: &MembershipMatrix<T>,
    kind: IndexKind,
) -> Result<T> {
    check_same_points(c1, c2)?;
    c1.require_fuzzy("first clustering")?;
    c2.require_fuzzy("second clustering")?;
    let (a1, a2) = (
        PairAgreements::new(c1, kind)?,
        PairAgreements::new(c2, kind)?,
    );
    let n = c1.n_points();
    let partials: Vec<CompensatedSum<T>> = (0..n - 1)
        .into_par_iter()
        .map(|i| {
            (i + 1..n)
                .map(|j| kind.concordance(a1.agreement(i, j), a2.agreement(i, j)))
                .collect()
        })
        .collect();
    let mut total = CompensatedSum::new();
    for p in &partials {
        total.merge(p);
    }
    let pairs = T::from_usize(n * (n - 1) / 2).expect("pair count representable");
    Ok(total.value() / pairs)
}
