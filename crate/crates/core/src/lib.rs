//! Blackwell dominance, garblings, and a cardinal informativeness measure
//! for finite statistical experiments.
//!
//! An experiment is a column-stochastic matrix: entry (i, j) is the
//! probability of signal i in state j. Experiment `A` dominates `B` when
//! some garbling `G` (a square column-stochastic matrix) satisfies
//! `G A = B`. This crate decides dominance constructively — through the
//! unique inverse candidate `B A^-1` when `A` is nonsingular, through a
//! sup-norm-residual feasibility program otherwise — and grades every
//! experiment with the score `||I - E||_inf`, a complete extension of the
//! dominance order on square experiments.
//!
//! The [`harness`] module replays seeded Monte-Carlo campaigns over the
//! structural claims (norm contraction under garbling, similarity of
//! translated garblings, chain limits, score monotonicity, solver
//! cross-checks) and emits byte-reproducible JSON reports.

pub mod blackwell;
pub mod error;
pub mod experiment;
pub mod harness;
pub mod inmi;
pub mod io;
pub mod lp;
pub mod matrix;

pub use blackwell::{
    check_diagram, decide_by_inverse, decide_by_lp, dominates, find_garbling, iterate_garblings,
    translate_garbling, DominanceVerdict, GarblingSearch, IterationStep, Method, Relation,
    TranslationResult, DOMINANCE_TOL,
};
pub use error::{Error, Result};
pub use experiment::{Belief, Dichotomy, Experiment, Garbling};
pub use harness::{
    default_trials, mix_seed, report_from_json, report_to_json, run_campaign, CampaignConfig,
    Theorem, TrialReport, WorstCase,
};
pub use inmi::{
    appendix_frobenius_gap, contraction_gap, d_inmi, delta_garbling_check, inmi_compare,
    kron_commutativity_gap, rank_one_structure, FrobeniusGapReport, InmiComparison, InmiRelation,
    InmiScore, RankOneReport,
};
pub use io::{MatrixJson, COLUMN_STOCHASTIC_CONVENTION};
pub use lp::{
    extract_garbling_candidate, garbling_feasibility_program, solve, LinearProgram, LpOutcome,
    LpStatus,
};
pub use matrix::{Matrix, NormKind};
