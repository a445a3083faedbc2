//! Verifiable laboratory for prime-gap sieve machinery: exact simplex
//! integration, certified eigenvalue ratios, admissible tuples, covering
//! systems for long composite runs, and prime-counting support.

pub mod covering;
pub mod dyadic;
pub mod eigen;
pub mod error;
pub mod measure;
pub mod optimizer;
pub mod primes;
pub mod simplex;
pub mod tuples;

pub use covering::{
    crt_witness, default_z, max_covered_y, plan_erdos_rankin, plan_greedy_only,
    plan_random_weighted, plan_trivial, survivors_of_stages, verify_cover, verify_gap_witness,
    CoverReport, CoveringPlan, ErSurvivorReport, GapWitness, MaxCoverReport, RandomStageReport,
    Stage, Strategy, SurvivorSet, SurvivorStat,
};
pub use dyadic::Df;
pub use error::{Error, Result};
pub use measure::{
    g_moments, mc_concentration, product_ratio_lower_bound, ConcentrationEstimate, GProfile,
    RatioLowerBound,
};
pub use optimizer::{
    assemble_i_form, assemble_j_form, closed_form_ratio, empirical_weight_expectation,
    guaranteed_primes, i_bilinear, j_bilinear, min_k_certify, min_k_certify_bracketed,
    scan_k_range, solve_ratio, solve_ratio_enriched, ExpectationParams, FormPair, GenPoly,
    MinKReport, RatioCertificate, RejectedK, WeightStats,
};
pub use num_bigint::{BigInt, BigUint};
pub use num_rational::BigRational;
pub use simplex::{
    enumerate_signatures, expand_signature, expand_to_monomials, factorial, integrate_sympoly,
    monomial_simplex_integral, orbit_count, BasisFamily, MonomialExpansion, MonomialTerm,
    Signature, SymPoly,
};
pub use tuples::{
    gap_bound_pipeline, is_admissible, narrowest_tuple, primes_after_k_tuple,
    AdmissibilityWitness, AdmissibleTuple, GapBoundReport, LinearSystem, NarrowestTuple,
    REFERENCE_54_TUPLE,
};
