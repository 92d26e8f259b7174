//! Adjusted Rand indices for hard and fuzzy clusterings.
//!
//! Two fuzzy Rand extensions are provided ([`IndexKind::Ndc`] and
//! [`IndexKind::Brouwer`]), together with chance adjustment under the classic
//! hard random models (permutation, categorical, fixed cluster count, all
//! partitions) and three Dirichlet models for fuzzy memberships (fitted,
//! symmetric fitted, flat). Dirichlet expectations are estimated by seeded,
//! parallel Monte Carlo; hard expectations have closed forms.
//!
//! The numeric core is generic over [`Scalar`] (`f32`, `f64`); closed-form
//! hard expectations are generic over [`Field`] and also evaluate exactly
//! over [`Rational`].
//!
//! ```
//! use fuzzy_ari::{adjusted_index, IndexKind, McConfig, Membership, ModelFamily, RandomModel};
//!
//! let a = Membership::from_rows(&[[0.9, 0.1], [0.8, 0.2], [0.1, 0.9], [0.2, 0.8]]).unwrap();
//! let b = Membership::from_labels(&[0, 0, 1, 1], 2).unwrap();
//! let model = RandomModel::two_sided(ModelFamily::Flat);
//! let r = adjusted_index(&a, &b, model, IndexKind::Ndc, &McConfig::new(100_000, 1)).unwrap();
//! assert!(r.adjusted > 0.0 && r.adjusted < 1.0);
//! ```

pub mod adjust;
pub mod dirichlet;
pub mod error;
pub mod expectation;
pub mod experiments;
pub mod hard_models;
pub mod indices;
pub mod membership;
pub mod rng;
pub mod scalar;
pub mod special;
pub mod synth;

pub use adjust::{
    adjusted_batch, adjusted_index, AdjustedResult, BatchCell, Comparison, FitCache, Flags, Method,
    ModelFamily, Provenance, RandomModel, Sidedness,
};
pub use dirichlet::{
    fit_mle, model_for, DirichletFit, DirichletModel, DirichletParams, ModelDistribution,
};
pub use error::{Error, Result};
pub use expectation::{
    expected_conc_one_sided, expected_conc_perm, expected_conc_two_sided, ExpectationEstimate,
    McConfig,
};
pub use hard_models::{
    expected_ri_all, expected_ri_cat, expected_ri_num, expected_ri_num_approx, expected_ri_perm,
    ClusterSizes, ProportionVector,
};
pub use indices::{agreement_brouwer, agreement_ndc, concordance, raw_index, IndexKind};
pub use membership::{Classification, MembershipMatrix};
pub use scalar::{Field, Scalar};
pub use synth::{generate_pair, toy_allocations, FactorialGrid, FactorialParams, ToyAllocations};

/// Exact rational scalar for the closed-form hard expectations.
pub type Rational = num_rational::Ratio<i128>;

pub type Membership = MembershipMatrix<f64>;
pub type Membership32 = MembershipMatrix<f32>;
pub type Dirichlet = DirichletParams<f64>;
pub type Dirichlet32 = DirichletParams<f32>;
pub type Distribution = ModelDistribution<f64>;
pub type Distribution32 = ModelDistribution<f32>;
pub type Adjusted = AdjustedResult<f64>;
pub type Adjusted32 = AdjustedResult<f32>;
pub type Estimate = ExpectationEstimate<f64>;
pub type Estimate32 = ExpectationEstimate<f32>;
pub type Proportions = ProportionVector<f64>;
