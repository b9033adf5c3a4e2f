//! Grid-pattern DSL with a bottom-up program synthesizer.
//!
//! Programs over a 10×10 boolean canvas are built from five primitive
//! shapes, four unary operators (`invert` and three reflections) and three
//! binary operators (`add`, `subtract`, `overlap`). The [`synth`] module
//! searches this space breadth-first by program size, pruning
//! observationally equivalent programs, and can grow its primitive set with
//! each solved target.

pub mod corpus;
pub mod grid;
pub mod lang;
pub mod library;
pub mod synth;

pub use corpus::{load_corpus, CorpusError, Pattern, PatternCorpus};
pub use grid::{BinaryOp, Canvas, GridError, Operator, PrimitiveGeometry, Shape, UnaryOp};
pub use lang::{evaluate, evaluate_with_steps, parse, EvalError, Expr, ExprMeasures, ParseError};
pub use library::{Library, LibraryEntry, LibraryError, Origin};
pub use synth::{
    rank, solve, solve_sequence, solve_sequence_from, Criterion, Enumerator, SearchConfig,
    SearchStats, SolveResult, StratumOutcome, Variant,
};
