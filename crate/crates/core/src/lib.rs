//! Certain answers to conjunctive queries over incomplete data constrained by
//! Extended Entity-Relationship schemata.
//!
//! The crate is organised bottom-up:
//!
//! * [`eer`] parses and validates the textual EER definition language.
//! * [`relational`] holds constants, facts, databases, key and inclusion
//!   dependencies, CD-shape recognition and conjunctive queries.
//! * [`translation`] maps an EER schema to its relational schema and CD set.
//! * [`chase`] builds the (bounded) chase, the chase with equalities, decides
//!   chase existence and computes the level bound.
//! * [`datalog`] evaluates definite programs, semi-naively when function-free.
//! * [`rewrite`] compiles a query and a CD set into a function-free program.
//! * [`pipeline`] ties everything together and cross-validates the paths.

pub mod chase;
pub mod datalog;
pub mod eer;
pub mod lex;
pub mod pipeline;
pub mod relational;
pub mod rewrite;
pub mod translation;

pub use relational::{Constant, Database, Fact, Sym};
