//! Finite-trace temporal logic: formulas, trace semantics and DFA
//! compilation.
//!
//! [`parse_ltlf`] turns concrete syntax into a [`Formula`], [`eval_trace`]
//! is the brute-force semantic oracle, and [`compile_dfa`] produces a
//! minimal, complete [`Dfa`](crate::automaton::Dfa) whose language equals
//! the set of traces satisfying the formula. Compilation and trace
//! evaluation are independent code paths on purpose: equivalence between
//! them is the main correctness check for both.

mod ast;
mod compile;
mod eval;
mod parser;

pub use ast::{Alphabet, Formula, Symbol, Trace};
pub use compile::{compile_dfa, compile_dfa_with_cap, DEFAULT_STATE_CAP};
pub use eval::eval_trace;
pub use parser::parse_ltlf;

use thiserror::Error;

/// Errors from parsing or compiling a formula.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LtlfError {
    /// The input text does not conform to the grammar.
    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },
    /// An identifier is not in the declared proposition set.
    #[error("unknown atomic proposition `{name}` at byte {position}")]
    UnknownAtom { name: String, position: usize },
    /// A proposition was declared more than once, or the set is empty.
    #[error("invalid proposition set: {0}")]
    BadAlphabet(String),
    /// The intermediate automaton exceeded the configured state cap.
    #[error("state cap exceeded: automaton grew past {cap} states")]
    StateCap { cap: usize },
}
