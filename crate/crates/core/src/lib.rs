//! Covering arrays with constraints as SAT and MaxSAT problems.
//!
//! A SUT model (parameters, domains, constraints) is turned into propositional
//! encodings whose optimal solutions are minimum covering arrays or test
//! suites of fixed size with maximum tuple coverage. The crate ships its own
//! incremental CDCL engine and the MaxSAT algorithms that drive it.

pub mod cli;
pub mod cnf;
pub mod encode;
pub mod opt;
pub mod sat;
pub mod sut;
pub mod tuples;
pub mod verify;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Sut(#[from] sut::SutError),
    #[error(transparent)]
    Cnf(#[from] cnf::CnfError),
    #[error(transparent)]
    Engine(#[from] sat::EngineError),
    #[error("strength t={t} out of range for a model with {params} parameters")]
    Strength { t: usize, params: usize },
    #[error("encoding: {0}")]
    Encoding(String),
    #[error("oracle guard: {0}")]
    Oracle(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Invalid(String),
}
