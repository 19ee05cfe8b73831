//! Performance bounds, restricted isometry constants and numerical checks of
//! the inequalities the bounds are built from.

pub mod bounds;
pub mod lemmas;
pub mod ric;

pub use bounds::{
    bound_constants, convergence_root, dipp_bound, iteration_count, sipp_bound, BoundConstants, CVariant, DippBound,
    IterationCount, LStarMode, SippBound,
};
pub use lemmas::{a_co_measure, fusion_checks, lemma_suite, LemmaCheck, LemmaSuite};
pub use ric::{ric_exact, ric_sampled};
