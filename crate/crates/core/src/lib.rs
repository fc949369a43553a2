//! Graph-structured P systems: model, maximally parallel execution
//! engine, and a compiler from mu-recursive function expressions to
//! systems whose halting output is the function value, with a direct
//! interpreter as the differential-testing oracle.

pub mod compiler;
pub mod engine;
pub mod multiset;
pub mod recfun;
pub mod system;

pub use compiler::{compile, CompileError, CompiledUnit};
pub use engine::{
    admissible_rules, apply_step, enumerate_maximal_sets, initial_configuration, run,
    run_exhaustive, run_seeded, select_maximal, Configuration, EngineError, ExhaustiveRun, Outcome,
    RuleInstanceSet, RunResult, SplitMix64, Strategy, Trace,
};
pub use multiset::{Multiset, MultisetError, Symbol};
pub use recfun::{eval, parse, EvalError, EvalResult, ParseError, RecExpr};
pub use system::{
    Compartment, Edge, EvolutionRule, Label, PSystem, RuleKind, Stage, StructuralError, Target,
};

/// Default step budget for runs: a generous desk-scale divergence guard.
pub const DEFAULT_MAX_STEPS: u64 = 1_000_000;
