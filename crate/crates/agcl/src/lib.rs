//! Automaton-guided curriculum generation for reinforcement-learning
//! tasks.
//!
//! The pipeline: a finite-trace temporal-logic objective is compiled into
//! a minimal DFA ([`ltlf`]), simple accepting paths through the DFA are
//! turned into concrete source tasks via an object-oriented task-space
//! description ([`oomdp`]), candidate task sequences are scored and
//! merged into a curriculum DAG ([`curriculum`]), and a from-scratch DQN
//! learner trains through the DAG with value-function transfer
//! ([`learner`], [`harness`]) on a crafting gridworld ([`gridworld`]).
//!
//! Start with the runnable examples:
//!
//! ```text
//! cargo run --release --example compile_formula
//! cargo run --release --example plan_curriculum
//! cargo run --release --example gridworld_scripted
//! cargo run --release --example train_collect_task
//! cargo run --release --example transfer_blend
//! cargo run --release --example run_experiment
//! ```
//!
//! or with the thin CLI: `agcl compile|plan|run|report|selftest`.

pub mod automaton;
pub mod curriculum;
pub mod gridworld;
pub mod harness;
pub mod learner;
pub mod ltlf;
pub mod oomdp;
pub mod seed;

pub use automaton::{Dfa, NodeId, TracePath};
pub use curriculum::{CandidateList, CurriculumDag, Mode};
pub use gridworld::{Action, GridEnv, Observation};
pub use learner::{Hyper, QParams, TrainReport};
pub use ltlf::{Alphabet, Formula, Symbol};
pub use oomdp::{OomdpSpec, OomdpState, TaskConfig};
