//! Random linear network coding laboratory.
//!
//! Simulates random linear codes on single-source multicast DAGs (the
//! butterfly network being the canonical instance) and computes their
//! failure probabilities three ways: closed-form formulas, exhaustive
//! enumeration with exact rationals, and seeded Monte Carlo.

pub mod closed_form;
pub mod engine;
pub mod exact;
pub mod field;
pub mod network;
pub mod probability;
pub mod rng;

pub use closed_form::{butterfly_failure, limit_failure, threshold_search, FormulaInput, Target};
pub use engine::{
    decoding_report, propagate, sample_code, structural_factorization_check, CoefficientAssignment,
    DecodingReport, ErasurePattern, KernelTable,
};
pub use exact::{ExactRational, Polynomial};
pub use field::{FieldElement, FieldSpec};
pub use network::{build_butterfly, NetworkSpec};
pub use probability::{
    enumerate_exact, erasure_polynomial, monte_carlo, ErasureModel, Estimate, FailureProbabilities,
    Probability,
};
