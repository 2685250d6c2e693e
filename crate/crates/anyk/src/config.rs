//! What to run: query, data, dioid and algorithm.

use std::path::PathBuf;
use std::str::FromStr;

use anyk_core::Algorithm;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShapeKind {
    Path,
    Star,
    Cycle,
}

impl FromStr for ShapeKind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "path" => Ok(ShapeKind::Path),
            "star" => Ok(ShapeKind::Star),
            "cycle" => Ok(ShapeKind::Cycle),
            _ => Err(CliError::Config(format!("unknown shape `{s}` (path, star or cycle)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum QuerySource {
    Shape { kind: ShapeKind, length: usize },
    Json(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    /// One file shared by every relation, or one per distinct relation
    /// name in order of first use.
    Files(Vec<PathBuf>),
    Uniform(usize),
    WorstCase(usize),
    Adversarial(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DioidSpec {
    MinSum,
    MaxSum,
    MaxTimes,
    Bool,
    Lex(usize),
}

impl FromStr for DioidSpec {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Ok(match s {
            "min-sum" => DioidSpec::MinSum,
            "max-sum" => DioidSpec::MaxSum,
            "max-times" => DioidSpec::MaxTimes,
            "bool" => DioidSpec::Bool,
            _ => match s.strip_prefix("lex:").map(str::parse::<usize>) {
                Some(Ok(n)) if n > 0 => DioidSpec::Lex(n),
                _ => {
                    return Err(CliError::Config(format!(
                        "unknown dioid `{s}` (min-sum, max-sum, max-times, bool or lex:<n>)"
                    )))
                }
            },
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Projection {
    AllWeight,
    MinWeight,
}

impl FromStr for Projection {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "all-weight" => Ok(Projection::AllWeight),
            "min-weight" => Ok(Projection::MinWeight),
            _ => Err(CliError::Config(format!("unknown projection `{s}` (all-weight or min-weight)"))),
        }
    }
}

/// One run.  Built by the command line or directly by callers.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub query: QuerySource,
    pub data: DataSource,
    pub seed: u64,
    pub algorithm: Algorithm,
    pub dioid: DioidSpec,
    pub tiebreak: bool,
    /// Overrides the free variables of the query.
    pub free: Option<Vec<String>>,
    pub projection: Option<Projection>,
    pub k: Option<usize>,
    pub repeats: usize,
    pub metrics: Option<PathBuf>,
    pub dump_dp: bool,
    pub dump_plan: bool,
    pub eager_init: bool,
}

impl RunConfig {
    pub fn new(query: QuerySource, data: DataSource) -> Self {
        Self {
            query,
            data,
            seed: 0,
            algorithm: Algorithm::Take2,
            dioid: DioidSpec::MinSum,
            tiebreak: false,
            free: None,
            projection: None,
            k: None,
            repeats: 1,
            metrics: None,
            dump_dp: false,
            dump_plan: false,
            eager_init: false,
        }
    }

    /// Checks what can be checked before loading anything.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: &str| Err(CliError::Config(m.to_string()));
        if self.repeats == 0 {
            return bad("--repeats must be at least 1");
        }
        if let QuerySource::Shape { kind, length } = self.query {
            if length == 0 || (kind == ShapeKind::Cycle && length < 3) {
                return bad("--length must be at least 1, and at least 3 for cycles");
            }
        }
        match &self.data {
            DataSource::Files(f) if f.is_empty() => return bad("no data: pass --data or a generator"),
            DataSource::WorstCase(n) if n % 2 != 0 => return bad("--gen-worst-case needs an even size"),
            DataSource::Adversarial(n) if *n < 2 => return bad("--gen-adversarial needs a size of at least 2"),
            _ => {}
        }
        if self.projection.is_some() && self.free.is_none() && matches!(self.query, QuerySource::Shape { .. }) {
            return bad("--projection needs free variables (--free)");
        }
        if self.projection == Some(Projection::MinWeight) && self.algorithm == Algorithm::Batch {
            return bad("min-weight projection runs on an any-k algorithm, not batch");
        }
        Ok(())
    }
}
