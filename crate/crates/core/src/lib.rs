//! Ranked enumeration of conjunctive query answers.
//!
//! The pipeline: a query and a [`relational::Database`] are materialized
//! into weighted atom tables, compiled into a tree-shaped dynamic
//! programming instance ([`dp::TdpInstance`]), and enumerated in weight
//! order by one of the any-k algorithms in [`part`] and [`rec`].  Cyclic
//! queries go through [`union`], projections through [`projection`], and
//! [`batch`] holds the sort-everything baselines used as references.
//!
//! Weights live in a selective dioid ([`dioid::SelectiveDioid`]); the same
//! code ranks by sum, product, lexicographic order or plain join
//! membership.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod batch;
pub mod counters;
pub mod dioid;
pub mod dp;
pub mod enumerate;
mod heap;
pub mod part;
pub mod projection;
pub mod rec;
pub mod relational;
pub mod union;

pub use counters::Counters;
pub use dioid::SelectiveDioid;
pub use enumerate::{Algorithm, RankedEnumerator, Solution};

use alloc::string::String;

/// Errors surfaced by the library.  [`Error::is_data_error`] separates
/// problems with input data from problems with the request itself.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid query: {0}")]
    Query(String),
    #[error("query is cyclic")]
    Cyclic,
    #[error("query is not free-connex")]
    NotFreeConnex,
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("relation `{relation}` has arity {found}, atom expects {expected}")]
    ArityMismatch { relation: String, expected: usize, found: usize },
    #[error("relation `{relation}`, tuple {tuple}: {source}")]
    Weight { relation: String, tuple: usize, source: dioid::DioidError },
    #[error(transparent)]
    Dioid(#[from] dioid::DioidError),
    #[error("cross product of {product} exceeds the cap of {cap}")]
    CapExceeded { product: u128, cap: u128 },
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Data(String),
}

impl Error {
    pub fn is_data_error(&self) -> bool {
        matches!(self, Error::ArityMismatch { .. } | Error::Weight { .. } | Error::Data(_))
    }
}
