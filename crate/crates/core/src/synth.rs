//! Synthetic clusterings: the nine-point toy allocations and the factorial
//! generator used by the benchmark and the error analysis.
//!
//! Rounding is largest-remainder apportionment throughout (ties go to the
//! lower cluster index), so sizes always sum to the point count.

use std::fmt::{self, Display};

use rand::seq::index::sample as sample_indices;
use serde::{Deserialize, Serialize};

use crate::adjust::Sidedness;
use crate::dirichlet::{DirichletParams, ModelDistribution};
use crate::error::{Error, Result};
use crate::hard_models::ProportionVector;
use crate::membership::MembershipMatrix;
use crate::rng::{derive_seed, substream};
use crate::scalar::Scalar;

/// Share of points (and of concentration mass) given to the favoured clusters.
pub const MAJORITY_SHARE: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ToyName {
    UnevenLowFuzzy,
    EvenLowFuzzy,
    HighFuzzy,
    UnevenHard,
    EvenHard,
}

impl ToyName {
    pub const ALL: [ToyName; 5] = [
        Self::UnevenLowFuzzy,
        Self::EvenLowFuzzy,
        Self::HighFuzzy,
        Self::UnevenHard,
        Self::EvenHard,
    ];
}

impl Display for ToyName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// The ten toy comparisons, numbered from 1.
pub const TOY_COMPARISONS: [(ToyName, ToyName); 10] = {
    use ToyName::*;
    [
        (UnevenLowFuzzy, EvenLowFuzzy),
        (UnevenLowFuzzy, HighFuzzy),
        (UnevenLowFuzzy, UnevenHard),
        (UnevenLowFuzzy, EvenHard),
        (EvenLowFuzzy, HighFuzzy),
        (EvenLowFuzzy, UnevenHard),
        (EvenLowFuzzy, EvenHard),
        (HighFuzzy, UnevenHard),
        (HighFuzzy, EvenHard),
        (UnevenHard, EvenHard),
    ]
};

/// Nine points in three clusters, five ways.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyAllocations<T> {
    pub uneven_low_fuzzy: MembershipMatrix<T>,
    pub even_low_fuzzy: MembershipMatrix<T>,
    pub high_fuzzy: MembershipMatrix<T>,
    pub uneven_hard: MembershipMatrix<T>,
    pub even_hard: MembershipMatrix<T>,
}

const EVEN_LABELS: [usize; 9] = [0, 0, 0, 1, 1, 1, 2, 2, 2];
const UNEVEN_LABELS: [usize; 9] = [0, 0, 0, 0, 0, 0, 0, 1, 2];

fn low_fuzzy<T: Scalar>(labels: &[usize]) -> MembershipMatrix<T> {
    let rows: Vec<[T; 3]> = labels
        .iter()
        .map(|&l| {
            let mut r = [T::lit(0.01); 3];
            r[l] = T::lit(0.98);
            r
        })
        .collect();
    MembershipMatrix::from_rows(&rows).expect("valid toy matrix")
}

impl<T: Scalar> ToyAllocations<T> {
    pub fn new() -> Self {
        let uneven_low_fuzzy = low_fuzzy(&UNEVEN_LABELS);
        let even_low_fuzzy = low_fuzzy(&EVEN_LABELS);
        // Slight lean towards the even clusters, strength varying by point.
        let rows: Vec<[T; 3]> = EVEN_LABELS
            .iter()
            .enumerate()
            .map(|(i, &l)| {
                let d = 0.004 + 0.002 * (i % 3) as f64;
                let mut r = [T::lit(1.0 / 3.0 - d / 2.0); 3];
                r[l] = T::lit(1.0 / 3.0 + d);
                r
            })
            .collect();
        let high_fuzzy = MembershipMatrix::from_rows(&rows).expect("valid toy matrix");
        Self {
            uneven_hard: uneven_low_fuzzy.harden(),
            even_hard: even_low_fuzzy.harden(),
            uneven_low_fuzzy,
            even_low_fuzzy,
            high_fuzzy,
        }
    }

    pub fn get(&self, name: ToyName) -> &MembershipMatrix<T> {
        match name {
            ToyName::UnevenLowFuzzy => &self.uneven_low_fuzzy,
            ToyName::EvenLowFuzzy => &self.even_low_fuzzy,
            ToyName::HighFuzzy => &self.high_fuzzy,
            ToyName::UnevenHard => &self.uneven_hard,
            ToyName::EvenHard => &self.even_hard,
        }
    }

    /// The ten comparison pairs in order.
    pub fn pairs(&self) -> Vec<(&MembershipMatrix<T>, &MembershipMatrix<T>)> {
        TOY_COMPARISONS
            .iter()
            .map(|&(a, b)| (self.get(a), self.get(b)))
            .collect()
    }
}

impl<T: Scalar> Default for ToyAllocations<T> {
    fn default() -> Self {
        Self::new()
    }
}

pub fn toy_allocations<T: Scalar>() -> ToyAllocations<T> {
    ToyAllocations::new()
}

/// One cell of the factorial simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FactorialParams {
    pub n_clusters: usize,
    pub n_points: usize,
    /// Proportion of clusters receiving the majority share of points.
    pub imbalance: f64,
    /// Mean concentration per coordinate of the replacement Dirichlet; 0 means categorical.
    pub precision: f64,
    pub randomize_rate: f64,
    pub sided: Sidedness,
    pub seed: u64,
}

impl FactorialParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: String| Err(Error::Parameter(what));
        if self.n_clusters == 0 {
            return bad("n_clusters must be at least 1".into());
        }
        if self.n_points < 2 {
            return bad("n_points must be at least 2".into());
        }
        if !(self.imbalance > 0.0 && self.imbalance <= 1.0) {
            return bad(format!("imbalance {} outside (0, 1]", self.imbalance));
        }
        if !(self.precision >= 0.0 && self.precision.is_finite()) {
            return bad(format!(
                "precision {} must be finite and nonnegative",
                self.precision
            ));
        }
        if !(self.randomize_rate > 0.0 && self.randomize_rate <= 1.0) {
            return bad(format!(
                "randomize_rate {} outside (0, 1]",
                self.randomize_rate
            ));
        }
        Ok(())
    }

    /// Number of favoured clusters, `ceil(imbalance * n_clusters)`.
    pub fn favoured_clusters(&self) -> usize {
        (self.imbalance * self.n_clusters as f64 - 1e-9)
            .ceil()
            .max(0.0) as usize
    }

    /// Per-cluster weights: the majority share split evenly over the favoured
    /// clusters and the rest split evenly over the others. Uniform when every
    /// cluster is favoured.
    pub fn cluster_weights(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let n = self.n_clusters;
        let k = self.favoured_clusters();
        if k == 0 {
            return Err(Error::Parameter(
                "no cluster receives the majority share".into(),
            ));
        }
        if k >= n {
            return Ok(vec![1.0 / n as f64; n]);
        }
        let (hi, lo) = (
            MAJORITY_SHARE / k as f64,
            (1.0 - MAJORITY_SHARE) / (n - k) as f64,
        );
        Ok((0..n).map(|j| if j < k { hi } else { lo }).collect())
    }

    /// Base cluster sizes (largest remainder over the weights).
    pub fn cluster_sizes(&self) -> Result<Vec<usize>> {
        Ok(apportion(self.n_points, &self.cluster_weights()?))
    }

    /// Rows replaced per randomized matrix.
    pub fn replaced_rows(&self) -> usize {
        ((self.randomize_rate * self.n_points as f64).round() as usize).min(self.n_points)
    }

    /// Distribution of the replacement membership vectors.
    pub fn replacement<T: Scalar>(&self) -> Result<ModelDistribution<T>> {
        let w: Vec<T> = self.cluster_weights()?.into_iter().map(T::lit).collect();
        if self.precision == 0.0 {
            return Ok(ModelDistribution::Categorical(ProportionVector::new(w)?));
        }
        let scale = T::lit(self.precision * self.n_clusters as f64);
        Ok(ModelDistribution::Dirichlet(DirichletParams::new(
            w.into_iter().map(|x| x * scale).collect(),
        )?))
    }
}

/// Splits `total` into integer parts proportional to `weights`.
pub fn apportion(total: usize, weights: &[f64]) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    let quotas: Vec<f64> = weights.iter().map(|w| w / sum * total as f64).collect();
    let mut parts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let short = total - parts.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    // Stable sort keeps lower indices first among equal remainders.
    order.sort_by(|&a, &b| {
        let (ra, rb) = (quotas[a] - quotas[a].floor(), quotas[b] - quotas[b].floor());
        rb.partial_cmp(&ra).expect("finite quotas")
    });
    for &j in order.iter().take(short) {
        parts[j] += 1;
    }
    parts
}

fn randomize<T: Scalar>(
    m: &mut MembershipMatrix<T>,
    dist: &ModelDistribution<T>,
    points: &[usize],
    seed: u64,
    stream: u64,
) {
    let mut rng = substream(seed, stream);
    let sampler = dist.sampler();
    let mut row = vec![T::zero(); m.n_clusters()];
    for &i in points {
        sampler.sample_into(&mut rng, &mut row);
        m.set_row(i, &row);
    }
}

/// Two clusterings that start in perfect agreement. A set of
/// `round(rate * N)` points is chosen once, and each chosen point gets an
/// independent draw from the replacement distribution in every randomized
/// clustering: both when two-sided, the second only when one-sided.
pub fn generate_pair<T: Scalar>(
    p: &FactorialParams,
) -> Result<(MembershipMatrix<T>, MembershipMatrix<T>)> {
    let sizes = p.cluster_sizes()?;
    let labels: Vec<usize> = sizes
        .iter()
        .enumerate()
        .flat_map(|(j, &s)| std::iter::repeat_n(j, s))
        .collect();
    let base = MembershipMatrix::from_labels(&labels, p.n_clusters)?;
    let dist = p.replacement()?;
    let mut points =
        sample_indices(&mut substream(p.seed, 0), p.n_points, p.replaced_rows()).into_vec();
    points.sort_unstable();
    let mut first = base.clone();
    let mut second = base;
    if p.sided == Sidedness::Two {
        randomize(&mut first, &dist, &points, p.seed, 1);
    }
    randomize(&mut second, &dist, &points, p.seed, 2);
    Ok((first, second))
}

/// Value lists of a factorial design; the full design is their product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorialGrid {
    pub n_clusters: Vec<usize>,
    pub n_points: Vec<usize>,
    pub imbalance: Vec<f64>,
    pub precision: Vec<f64>,
    pub randomize_rate: Vec<f64>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub sided: Sidedness,
    #[serde(default)]
    pub seed: u64,
}

fn default_replicates() -> usize {
    5
}

/// One generated cell of a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridCell {
    pub setting: usize,
    pub replicate: usize,
    pub params: FactorialParams,
}

impl FactorialGrid {
    /// The benchmark design: 7 cluster counts, 7 sizes, 4 imbalances,
    /// 5 precisions, 5 randomize rates, 5 replicates.
    pub fn benchmark() -> Self {
        Self {
            n_clusters: vec![2, 4, 8, 16, 32, 64, 128],
            n_points: vec![128, 256, 512, 1024, 2048, 4096, 8192],
            imbalance: vec![0.8, 0.6, 0.4, 0.2],
            precision: vec![0.0, 0.01, 0.1, 1.0, 1.5],
            randomize_rate: vec![0.2, 0.4, 0.6, 0.8, 1.0],
            replicates: 5,
            sided: Sidedness::Two,
            seed: 0,
        }
    }

    /// The 48-setting error-analysis design with 10 replicates.
    pub fn error_analysis() -> Self {
        Self {
            n_clusters: vec![2, 50],
            n_points: vec![100, 1000],
            imbalance: vec![0.8, 0.2],
            precision: vec![0.1, 1.0, 1.5],
            randomize_rate: vec![0.5, 1.0],
            replicates: 10,
            sided: Sidedness::Two,
            seed: 0,
        }
    }

    pub fn n_settings(&self) -> usize {
        self.n_clusters.len()
            * self.n_points.len()
            * self.imbalance.len()
            * self.precision.len()
            * self.randomize_rate.len()
    }

    /// All cells, setting-major, each with a seed derived from the grid seed,
    /// setting and replicate.
    pub fn cells(&self) -> Vec<GridCell> {
        let mut out = Vec::with_capacity(self.n_settings() * self.replicates);
        let mut setting = 0;
        for &n_clusters in &self.n_clusters {
            for &n_points in &self.n_points {
                for &imbalance in &self.imbalance {
                    for &precision in &self.precision {
                        for &randomize_rate in &self.randomize_rate {
                            for replicate in 0..self.replicates {
                                let seed =
                                    derive_seed(self.seed, &[setting as u64, replicate as u64]);
                                let params = FactorialParams {
                                    n_clusters,
                                    n_points,
                                    imbalance,
                                    precision,
                                    randomize_rate,
                                    sided: self.sided,
                                    seed,
                                };
                                out.push(GridCell {
                                    setting,
                                    replicate,
                                    params,
                                });
                            }
                            setting += 1;
                        }
                    }
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_settings() == 0 {
            return Err(Error::Parameter("grid has an empty value list".into()));
        }
        for c in self.cells().iter().filter(|c| c.replicate == 0) {
            c.params.validate()?;
            c.params.cluster_weights()?;
        }
        Ok(())
    }
}
