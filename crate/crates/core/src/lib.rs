//! Source-code authorship attribution toolkit.
//!
//! Pipeline: ingest a labeled C/C++ corpus ([`corpus`]), tokenize and parse
//! each sample ([`lexer`], [`ast`]), compute a canonical 54-slot stylometric
//! feature vector ([`features`], [`dynamic`]), train tree-ensemble
//! classifiers ([`ensemble`]), explain predictions with Shapley values
//! ([`explain`]), and score everything ([`eval`]).

pub mod ast;
pub mod corpus;
pub mod csvio;
pub mod dynamic;
pub mod eval;
pub mod ensemble;
pub mod explain;
pub mod features;
pub mod lexer;

/// Version stamp for the canonical feature schema and model files.
pub const SCHEMA_VERSION: &str = "authattr-features-v1";

/// Tool version recorded in artifact headers.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
