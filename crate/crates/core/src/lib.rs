// `!(x > 0.0)` rejects NaN on purpose; index loops follow the algebra.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod belief;
pub mod builtins;
pub mod certificates;
pub mod error;
pub mod feasibility;
pub mod grid;
pub mod lp;
pub mod one_state;
pub mod reductions;
pub mod transport;

pub use belief::{
    Belief, BeliefProfile, ConditionalBeliefFamily, Distribution, InformationStructure, PersuasionProblem, Prior,
    StateSpace, Utility,
};
pub use error::{Error, Result};
