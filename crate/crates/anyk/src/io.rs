//! Edge-list CSV and query JSON.

use std::collections::HashMap;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use anyk_core::relational::{QuerySpec, Relation};
use anyk_core::SelectiveDioid;
use serde::Deserialize;

use crate::error::CliError;

/// Assigns ids to non-numeric values.  Numeric values keep their value;
/// other strings get ids from the top half of the range so the two never
/// collide.
#[derive(Debug, Default)]
pub struct Dictionary {
    ids: HashMap<String, u64>,
}

impl Dictionary {
    const FIRST: u64 = 1 << 63;

    pub fn encode(&mut self, s: &str) -> u64 {
        if let Ok(v) = s.parse::<u64>() {
            if v < Self::FIRST {
                return v;
            }
        }
        let next = Self::FIRST + self.ids.len() as u64;
        *self.ids.entry(s.to_string()).or_insert(next)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// Reads `src,dst,weight` rows into a binary relation.  A first row equal
/// to `src,dst,weight` is skipped.  Errors name the 1-based row.
pub fn read_edge_csv<R: Read>(input: R, name: &str, dict: &mut Dictionary) -> Result<Relation, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut rel = Relation::new(name, 2);
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| CliError::Data(format!("{name}: row {row}: {e}")))?;
        if i == 0 && record.iter().eq(["src", "dst", "weight"]) {
            continue;
        }
        if record.len() != 3 {
            return Err(CliError::Data(format!("{name}: row {row}: expected 3 fields, found {}", record.len())));
        }
        let weight: f64 = record[2]
            .parse()
            .map_err(|_| CliError::Data(format!("{name}: row {row}: invalid weight `{}`", &record[2])))?;
        if !weight.is_finite() {
            return Err(CliError::Data(format!("{name}: row {row}: weight must be finite")));
        }
        rel.push(&[dict.encode(&record[0]), dict.encode(&record[1])], weight);
    }
    Ok(rel)
}

/// Loads an edge-list file and checks that every weight is a valid,
/// non-zero element of `dioid`.
pub fn load_edge_csv<D: SelectiveDioid>(
    path: &Path,
    name: &str,
    dict: &mut Dictionary,
    dioid: &D,
) -> Result<Relation, CliError> {
    let file = File::open(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    let rel = read_edge_csv(file, name, dict)?;
    rel.check_weights(dioid, 0).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    Ok(rel)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct QueryJson {
    atoms: Vec<AtomJson>,
    #[serde(default)]
    free: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomJson {
    rel: String,
    vars: Vec<String>,
}

/// Parses `{"atoms":[{"rel":"R1","vars":["x1","x2"]},…],"free":["x1"]}`.
pub fn parse_query(text: &str) -> Result<QuerySpec, CliError> {
    let spec: QueryJson = serde_json::from_str(text).map_err(|e| CliError::Config(format!("query: {e}")))?;
    let atoms: Vec<(&str, &[String])> = spec.atoms.iter().map(|a| (a.rel.as_str(), &a.vars[..])).collect();
    Ok(QuerySpec::new(&atoms, spec.free.as_deref())?)
}

pub fn load_query(path: &Path) -> Result<QuerySpec, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    parse_query(&text)
}
