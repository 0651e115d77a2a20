//! Modern Hopfield retrieval, exact and in almost-linear time through a
//! polynomial low-rank factorization of the softmax kernel, plus the
//! gap nearest-neighbour reduction and capacity tools built on it.

pub mod capacity;
pub mod error;
pub mod feature_map;
pub mod hopfield;
pub mod pattern;
pub mod poly_approx;
pub mod reduction;
pub mod rng;

pub use error::{Error, Result};
pub use feature_map::{MonomialFeatureMap, MultiIndex};
pub use hopfield::{Normalization, RetrievalConfig, RetrievalMode, RetrievalResult};
pub use pattern::{PatternMatrix, Role};
pub use poly_approx::{ExpPolynomial, Polynomial};
pub use reduction::{AConvention, AnnsInstance, CaseDecision, Verdict};
