//! Uncertainty quantification for LLM function-calling outputs.
//!
//! Parse model outputs into call ASTs ([`parser`]), label them against
//! ground truth ([`matching`]), score them with single- and multi-sample
//! estimators ([`estimators`], [`smt`], [`ptrue`]) and evaluate how well the
//! scores separate correct from incorrect outputs ([`evaluation`]).

pub mod ast;
pub mod cli;
pub mod estimators;
pub mod evaluation;
pub mod fixture;
pub mod matching;
pub mod model;
pub mod parser;
pub mod ptrue;
pub mod smt;

pub use ast::{ast_equal, CallFormat, FunctionCallAst, ParseOutcome, Value};
pub use estimators::{ClusterMethod, ScoreError};
pub use matching::{match_ground_truth, CorrectnessLabel};
pub use model::{GroundTruth, Method, Record, Split, Token, TokenizedSequence, UncertaintyScore};
pub use parser::parse;
