//! Fuzzy first-order logic with Łukasiewicz connectives.

mod compiled;
mod fuzzy;
mod grounding;
mod parser;
mod syntax;

pub use compiled::{satisfiability, satisfiability_gradient, CompiledTheory, Evaluation, PredicateGradients};
pub use fuzzy::{
    and, and_grad, eval_connectives, harmonic_mean, implies, implies_grad, not, or, or_grad, Aggregator,
    Connective, ExistsMode, LogicConfig, HARMONIC_EPS,
};
pub use grounding::{eval_formula, GroundedTheory};
pub use parser::{parse_formula, parse_kb};
pub use syntax::{Formula, KnowledgeBase, PredicateSig, Term};
