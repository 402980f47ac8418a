//! Minimum-entropy couplings of discrete distributions.
//!
//! Given m distributions with equal total mass, a coupling is a joint
//! distribution whose axis marginals reproduce each input. Finding the
//! coupling of minimum Shannon entropy is NP-hard; this crate provides:
//!
//! - a greedy coupler with a full per-step trace ([`greedy`]),
//! - computable lower bounds on the optimum: the majorization meet, the
//!   profile curve, and the major-profile distribution ([`bounds`]),
//! - three exact solvers for pairs of distributions: bound-pruned
//!   backtracking, bitmask dynamic programming over spanning subtrees, and
//!   vertex enumeration of the transport polytope ([`exact`]),
//! - numeric approximation-guarantee constants, for entropy and for general
//!   concave power costs ([`guarantees`]),
//! - instance generators, a runtime benchmark harness, a local-search gap
//!   finder, and a self-contained verification suite ([`bench`]).
//!
//! All masses are 64-bit floats; [`EPS`] is the absolute mass tolerance used
//! for trimming, marginal checks, and feasibility everywhere.

#![forbid(unsafe_code)]

pub mod bench;
pub mod bounds;
pub mod dist;
pub mod exact;
pub mod greedy;
pub mod guarantees;

pub use bench::{
    bench_csv, bench_runtimes, gen_dirichlet, gen_fib_lucas, gen_geometric_gap,
    gen_uniform_family, geometric_opt_coupling, local_search_gap, sample_simplex, verify_suite,
    Algorithm, BenchConfig, BenchRow, GapSearchConfig, GapSearchResult, Quantity, VerifyReport,
};
pub use bounds::{
    lower_bound, major_profile, majorization_meet, profile_curve, profile_entropy,
    profile_transpose_entropy, rem_mass_advanced, rem_mass_simple, BoundKind, ProfileCurve,
};
pub use dist::{
    cost, coupling_cost, coupling_entropy, entropy, instance_from_json, instance_from_json_with,
    load_instance, load_instance_with, save_coupling, validate_coupling, CostFn, Coupling,
    CouplingEntry, Dist, InstanceSet, MarginalViolation,
};
pub use exact::{
    backtrack_exact, check_forest_leaf_property, dp_exact, vertex_enum_exact, BipartiteForest,
    ExactResult,
};
pub use greedy::{greedy_coupling, greedy_sizes, monovariant_trace, GreedyStep, GreedyTrace};
pub use guarantees::{
    check_mult_guarantee, mult_guarantee_general, mult_ratio_two, small_m_constant,
    small_m_report, GuaranteeReport, MultCheck,
};

/// Absolute mass tolerance: construction trims anything smaller, marginal
/// checks scale it by the state count, and the solvers treat residuals within
/// it as zero.
pub const EPS: f64 = 1e-12;

#[derive(Debug, thiserror::Error)]
pub enum MecError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("size limit: {0}")]
    SizeLimit(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, MecError>;
