//! Workbench for ultrafilter extensions of finite first-order models.
//!
//! The crate has three layers:
//!
//! * finite structures and their maps ([`model`], [`format`]), a formula
//!   language with classical and ultrafilter quantifiers ([`formula`]),
//!   and the extension operator taking a model to the model on its
//!   ultrafilters ([`beta`]);
//! * an exact symbolic layer over the Boolean algebra of eventually
//!   periodic subsets of the naturals ([`epset`], [`symbolic`],
//!   [`kleene`]), which decides two-level ultrafilter-quantifier
//!   statements for principal ultrafilters and for classes of
//!   non-principal ultrafilters concentrated on an infinite set;
//! * builders and checkers for a specific two-sorted pairing structure
//!   and the combinatorial facts that hold in its extension ([`suite`]),
//!   bundled into a reproducible verification suite.
//!
//! Everything is deterministic: the sampled batteries in [`suite`] and
//! [`sample`] are driven by an explicit seed.

pub mod beta;
pub mod epset;
pub mod format;
pub mod formula;
pub mod kleene;
pub mod model;
pub mod sample;
pub mod suite;
pub mod symbolic;

pub use beta::{
    beta_extend, enumerate_ultrafilters, lift_check, natural_embedding, pushforward, BetaError,
    BetaMode, BetaModel, FiniteUltrafilter, LiftReport,
};
pub use epset::EPSet;
pub use format::{model_from_json, model_to_json, parse_model, serialize_model, FormatError};
pub use formula::{
    evaluate, parse_formula, Assignment, EvalError, Formula, ParseError, Term, UfMode,
};
pub use kleene::Kleene;
pub use model::{
    classify_map, map_profile, Classification, MapProfile, MapWitness, Model, ModelError, Symbol,
    Violation, Vocabulary,
};
pub use suite::{
    build_m1, compute_g, cut_segments, formula_phi, formula_psi, lemma3_finite, lemma3_symbolic,
    run_suite, truncation_inner_check, CutPair, Lemma3FiniteReport, Lemma3SymbolicReport,
    MutantMode, StrictOrder, SuiteConfig, SuiteError, SuiteReport, TruncatedM1,
};
pub use symbolic::{
    eval_two_level, pair_image_membership, OuterConstraint, PairOrder, PairingCode, ParamFamily,
    SymbolicError, SymbolicUF,
};
