//! Zero-rate reliability quantities for discrete memoryless channels with list
//! decoding.
//!
//! The crate computes the per-subset exponents `D_m` and their minimum over a
//! code, the single-letter zero-rate exponent `E_L(0+)`, exact maximum-likelihood
//! list-decoding error probabilities at small blocklength (by direct enumeration
//! and by conditional type classes), Ramsey-style extraction of subcodes with
//! nearly exchangeable joint types, and the sample-space halving procedure on
//! finite ensembles of random variables.
//!
//! Exponents are in nats. Symbols are 0-based.

pub mod acceptance;
pub mod channel;
pub mod combinatorics;
pub mod decoder;
pub mod error;
pub mod exponent;
pub mod halving;
pub mod par;
pub mod ramsey;
mod simplex;
pub mod types;
mod util;

/// Exact rational used for joint types and ensemble weights.
pub type Rational = num_rational::Ratio<i128>;

pub use channel::{
    check_list_zero_error_vanishes, kl_divergence, mu_x, q_star_x, support_set, validate_channel,
    Channel, Divergence, SimplexPoint, SupportSet,
};
pub use error::{Error, Result};
pub use types::{
    column_composition, column_product_counts, conditional_type, enumerate_conditional_types,
    joint_type, region_partition, Code, ColumnComposition, ConditionalType, ConditionalTypes,
    JointType, RegionPartition, TypeClass,
};
pub use exponent::{
    correction_constant, d_min, d_subset, mu_code, mu_code_direct, plotkin_bound_value,
    plotkin_upper_bound, sion_exchange_check, zero_rate_exponent, BoundReport, DminReport,
    ExponentResult, SionReport, ZeroRateMethod,
};
pub use decoder::{
    error_probabilities, error_probabilities_direct, error_probabilities_pair,
    error_probabilities_via_types, lattice_min_max, likelihood, ml_list_decode, verify_lower_bound,
    DecodeMethod, DecodingOutcome, LowerBoundReport,
};
pub use ramsey::{
    check_komlos_conditions, color_edge, delta_bound, extract_subcode, find_monochromatic_subset,
    is_monochromatic, komlos_delta_bound, komlos_lemma1_check, permutation_deviation, trim_last,
    ColorVector, KomlosCheck, PermutationDeviation, SearchMode, SubcodeReport,
};
pub use halving::{
    build_f, delta_tilde, distance, ensemble_from_code, halving_step, monochromatic_rv_extract,
    pairwise_skew, run_halving, theorem_check, variance, FiniteEnsemble, HalvingStepRecord,
    HalvingTrace, SignFunction, SkewTable, TheoremReport,
};
