//! The interface shared by all ranked enumerators.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::counters::Counters;
use crate::dioid::SelectiveDioid;
use crate::dp::TdpInstance;
use crate::part::{PartEnumerator, Strategy};
use crate::rec::RecEnumerator;
use crate::Error;

/// One ranked answer: its weight and, per atom, the index of the tuple it
/// uses in that atom's relation.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution<W> {
    pub weight: W,
    pub witness: Vec<u32>,
}

/// Produces answers one at a time in non-decreasing weight order.
pub trait RankedEnumerator {
    type Weight;

    fn next_solution(&mut self) -> Option<Solution<Self::Weight>>;

    fn counters(&self) -> &Counters;
}

impl<E: RankedEnumerator + ?Sized> RankedEnumerator for Box<E> {
    type Weight = E::Weight;

    fn next_solution(&mut self) -> Option<Solution<E::Weight>> {
        (**self).next_solution()
    }

    fn counters(&self) -> &Counters {
        (**self).counters()
    }
}

/// Collects up to `limit` answers (all of them for `None`).
pub fn drain<E: RankedEnumerator + ?Sized>(e: &mut E, limit: Option<usize>) -> Vec<Solution<E::Weight>> {
    let mut out = Vec::new();
    while limit.is_none_or(|k| out.len() < k) {
        match e.next_solution() {
            Some(s) => out.push(s),
            None => break,
        }
    }
    out
}

/// Enumeration algorithms selectable at run time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Eager,
    Lazy,
    All,
    Take2,
    Recursive,
    /// Materialize everything, then sort.
    Batch,
}

impl Algorithm {
    pub const ANY_K: [Algorithm; 5] =
        [Algorithm::Eager, Algorithm::Lazy, Algorithm::All, Algorithm::Take2, Algorithm::Recursive];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Eager => "eager",
            Algorithm::Lazy => "lazy",
            Algorithm::All => "all",
            Algorithm::Take2 => "take2",
            Algorithm::Recursive => "recursive",
            Algorithm::Batch => "batch",
        }
    }

    pub fn is_any_k(self) -> bool {
        self != Algorithm::Batch
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Ok(match s {
            "eager" => Algorithm::Eager,
            "lazy" => Algorithm::Lazy,
            "all" => Algorithm::All,
            "take2" => Algorithm::Take2,
            "recursive" => Algorithm::Recursive,
            "batch" => Algorithm::Batch,
            _ => return Err(Error::Config(format!("unknown algorithm `{s}`"))),
        })
    }
}

/// Tuning knobs that do not change the output.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Options {
    /// Build every per-state choice structure before the first answer
    /// instead of on first use.
    pub eager_init: bool,
}

pub type BoxedEnumerator<'a, W> = Box<dyn RankedEnumerator<Weight = W> + 'a>;

/// An any-k enumerator over an evaluated instance.
pub fn any_k<'a, D: SelectiveDioid + 'a>(
    inst: &'a TdpInstance<D>,
    algorithm: Algorithm,
    options: Options,
) -> Result<BoxedEnumerator<'a, D::Weight>, Error> {
    let strategy = match algorithm {
        Algorithm::Eager => Strategy::Eager,
        Algorithm::Lazy => Strategy::Lazy,
        Algorithm::All => Strategy::All,
        Algorithm::Take2 => Strategy::Take2,
        Algorithm::Recursive => return Ok(Box::new(RecEnumerator::new(inst))),
        Algorithm::Batch => return Err(Error::Config("batch is not an any-k algorithm".into())),
    };
    Ok(Box::new(PartEnumerator::with_options(inst, strategy, options)))
}

/// Replays a precomputed, already sorted list of answers.
pub struct Replay<W> {
    items: alloc::vec::IntoIter<Solution<W>>,
    counters: Counters,
}

impl<W> Replay<W> {
    pub fn new(items: Vec<Solution<W>>, counters: Counters) -> Self {
        Self { items: items.into_iter(), counters }
    }
}

impl<W> RankedEnumerator for Replay<W> {
    type Weight = W;

    fn next_solution(&mut self) -> Option<Solution<W>> {
        let s = self.items.next()?;
        self.counters.results += 1;
        Some(s)
    }

    fn counters(&self) -> &Counters {
        &self.counters
    }
}
