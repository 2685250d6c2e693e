//! Relations, databases, conjunctive queries and their join trees.
//!
//! Relations store raw `f64` weights.  [`materialize_atoms`] produces one
//! [`AtomTable`] per query atom with weights lifted into a dioid; this is
//! the form every algorithm consumes.

mod generate;
mod gyo;

pub use generate::{nprr_adversarial, uniform, worst_case_cycle};
pub use gyo::{build_join_tree, is_acyclic, is_free_connex, JoinTree};

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::dioid::SelectiveDioid;
use crate::Error;

/// A named relation: flat tuple storage plus one raw weight per tuple.
#[derive(Debug, Clone, PartialEq)]
pub struct Relation {
    name: String,
    arity: usize,
    values: Vec<u64>,
    weights: Vec<f64>,
}

impl Relation {
    pub fn new(name: impl Into<String>, arity: usize) -> Self {
        Self { name: name.into(), arity, values: Vec::new(), weights: Vec::new() }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Appends a tuple.  Panics if `tuple` has the wrong arity.
    pub fn push(&mut self, tuple: &[u64], weight: f64) {
        assert_eq!(tuple.len(), self.arity, "tuple arity");
        self.values.extend_from_slice(tuple);
        self.weights.push(weight);
    }

    pub fn tuple(&self, i: usize) -> &[u64] {
        &self.values[i * self.arity..(i + 1) * self.arity]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Checks that every weight lifts into `dioid` (as atom `position`).
    pub fn check_weights<D: SelectiveDioid>(&self, dioid: &D, position: usize) -> Result<(), Error> {
        for (t, &w) in self.weights.iter().enumerate() {
            dioid.lift(w, position, t as u32).map_err(|source| Error::Weight {
                relation: self.name.clone(),
                tuple: t,
                source,
            })?;
        }
        Ok(())
    }
}

/// Relations by name.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Database {
    relations: BTreeMap<String, Relation>,
}

impl Database {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, rel: Relation) -> Result<(), Error> {
        if self.relations.contains_key(rel.name()) {
            return Err(Error::Config(format!("duplicate relation `{}`", rel.name())));
        }
        self.relations.insert(rel.name().to_string(), rel);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&Relation> {
        self.relations.get(name)
    }

    pub fn relation(&self, name: &str) -> Result<&Relation, Error> {
        self.get(name).ok_or_else(|| Error::UnknownRelation(name.to_string()))
    }

    pub fn relations(&self) -> impl Iterator<Item = &Relation> {
        self.relations.values()
    }

    /// Total number of tuples over all relations.
    pub fn size(&self) -> usize {
        self.relations.values().map(Relation::len).sum()
    }
}

/// One atom of a query: a relation name and variable ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub relation: String,
    pub vars: Vec<usize>,
}

/// A conjunctive query.  Variables are interned to dense ids; `free` is
/// `None` for full queries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuerySpec {
    atoms: Vec<Atom>,
    var_names: Vec<String>,
    free: Option<Vec<usize>>,
}

impl QuerySpec {
    /// Builds a query from `(relation, [variables])` pairs.
    pub fn new<R, V>(atoms: &[(R, &[V])], free: Option<&[V]>) -> Result<Self, Error>
    where
        R: AsRef<str>,
        V: AsRef<str>,
    {
        if atoms.is_empty() {
            return Err(Error::Query("a query needs at least one atom".into()));
        }
        let mut var_names: Vec<String> = Vec::new();
        let mut intern = |name: &str| -> usize {
            match var_names.iter().position(|v| v == name) {
                Some(i) => i,
                None => {
                    var_names.push(name.to_string());
                    var_names.len() - 1
                }
            }
        };
        let mut out = Vec::with_capacity(atoms.len());
        for (i, (rel, vars)) in atoms.iter().enumerate() {
            if vars.is_empty() {
                return Err(Error::Query(format!("atom {i} has no variables")));
            }
            out.push(Atom {
                relation: rel.as_ref().to_string(),
                vars: vars.iter().map(|v| intern(v.as_ref())).collect(),
            });
        }
        let free = match free {
            None => None,
            Some(names) => {
                let mut ids = Vec::with_capacity(names.len());
                for n in names {
                    let Some(id) = var_names.iter().position(|v| v == n.as_ref()) else {
                        return Err(Error::Query(format!("free variable `{}` is not in the body", n.as_ref())));
                    };
                    if ids.contains(&id) {
                        return Err(Error::Query(format!("free variable `{}` listed twice", n.as_ref())));
                    }
                    ids.push(id);
                }
                Some(ids)
            }
        };
        Ok(Self { atoms: out, var_names, free })
    }

    /// `R1(x1,x2), R2(x2,x3), …, Rℓ(xℓ,xℓ+1)`.
    pub fn path(len: usize) -> Self {
        Self::shape(len, |i| (i + 1, i + 2))
    }

    /// `R1(x0,x1), …, Rℓ(x0,xℓ)`.
    pub fn star(len: usize) -> Self {
        Self::shape(len, |i| (0, i + 1))
    }

    /// `R1(x1,x2), …, Rℓ(xℓ,x1)`.
    pub fn cycle(len: usize) -> Self {
        Self::shape(len, |i| (i + 1, (i + 1) % len + 1))
    }

    fn shape(len: usize, vars: impl Fn(usize) -> (usize, usize)) -> Self {
        let names: Vec<(String, [String; 2])> = (0..len)
            .map(|i| {
                let (a, b) = vars(i);
                (format!("R{}", i + 1), [format!("x{a}"), format!("x{b}")])
            })
            .collect();
        let atoms: Vec<(&str, &[String])> = names.iter().map(|(r, v)| (r.as_str(), &v[..])).collect();
        Self::new(&atoms, None).expect("shape queries are well formed")
    }

    /// Same atoms with a different set of free variables.
    pub fn with_free<V: AsRef<str>>(&self, free: Option<&[V]>) -> Result<Self, Error> {
        let atoms: Vec<(&str, Vec<&str>)> = self
            .atoms
            .iter()
            .map(|a| (a.relation.as_str(), a.vars.iter().map(|&v| self.var_names[v].as_str()).collect()))
            .collect();
        let refs: Vec<(&str, &[&str])> = atoms.iter().map(|(r, v)| (*r, &v[..])).collect();
        let free_names: Option<Vec<&str>> = free.map(|f| f.iter().map(AsRef::as_ref).collect());
        Self::new(&refs, free_names.as_deref())
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn num_vars(&self) -> usize {
        self.var_names.len()
    }

    pub fn var_name(&self, v: usize) -> &str {
        &self.var_names[v]
    }

    pub fn var_id(&self, name: &str) -> Option<usize> {
        self.var_names.iter().position(|v| v == name)
    }

    pub fn free(&self) -> Option<&[usize]> {
        self.free.as_deref()
    }

    pub fn is_full(&self) -> bool {
        match &self.free {
            None => true,
            Some(f) => f.len() == self.var_names.len(),
        }
    }

    /// Distinct variables of each atom, in first-occurrence order.
    pub fn var_sets(&self) -> Vec<Vec<usize>> {
        self.atoms.iter().map(|a| distinct(&a.vars)).collect()
    }
}

pub(crate) fn distinct(vars: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::with_capacity(vars.len());
    for &v in vars {
        if !out.contains(&v) {
            out.push(v);
        }
    }
    out
}

/// A query atom materialized over its relation, with dioid weights.
///
/// Columns are the atom's distinct variables.  `origin[r]` is the index of
/// row `r` in the source relation.  `terminals` holds extra per-row weight
/// vectors that the DP builder attaches as weighted leaf branches.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomTable<W> {
    pub vars: Vec<usize>,
    values: Vec<u64>,
    pub weights: Vec<W>,
    pub origin: Vec<u32>,
    pub terminals: Vec<Vec<W>>,
}

impl<W> AtomTable<W> {
    pub fn new(vars: Vec<usize>) -> Self {
        Self { vars, values: Vec::new(), weights: Vec::new(), origin: Vec::new(), terminals: Vec::new() }
    }

    pub fn push(&mut self, row: &[u64], weight: W, origin: u32) {
        debug_assert_eq!(row.len(), self.vars.len());
        self.values.extend_from_slice(row);
        self.weights.push(weight);
        self.origin.push(origin);
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn arity(&self) -> usize {
        self.vars.len()
    }

    pub fn row(&self, r: usize) -> &[u64] {
        let a = self.vars.len();
        &self.values[r * a..(r + 1) * a]
    }

    /// Column of variable `v`, if the atom has it.
    pub fn column(&self, v: usize) -> Option<usize> {
        self.vars.iter().position(|&x| x == v)
    }

    /// Values of `cols` in row `r`.
    pub fn key(&self, r: usize, cols: &[usize]) -> Vec<u64> {
        let row = self.row(r);
        cols.iter().map(|&c| row[c]).collect()
    }
}

/// Materializes every atom of `q`: applies equality selections from
/// repeated variables and lifts weights into `dioid` (atom index is the
/// lift position).
pub fn materialize_atoms<D: SelectiveDioid>(
    q: &QuerySpec,
    db: &Database,
    dioid: &D,
) -> Result<Vec<AtomTable<D::Weight>>, Error> {
    let mut tables = Vec::with_capacity(q.atoms().len());
    for (i, atom) in q.atoms().iter().enumerate() {
        let rel = db.relation(&atom.relation)?;
        if rel.arity() != atom.vars.len() {
            return Err(Error::ArityMismatch {
                relation: atom.relation.clone(),
                expected: atom.vars.len(),
                found: rel.arity(),
            });
        }
        let vars = distinct(&atom.vars);
        // Column of the first occurrence of each atom column's variable.
        let first: Vec<usize> = atom.vars.iter().map(|v| atom.vars.iter().position(|x| x == v).unwrap()).collect();
        let keep: Vec<usize> = (0..atom.vars.len()).filter(|&c| first[c] == c).collect();
        let mut table = AtomTable::new(vars);
        let mut row = Vec::with_capacity(keep.len());
        for t in 0..rel.len() {
            let tuple = rel.tuple(t);
            if (0..tuple.len()).any(|c| tuple[c] != tuple[first[c]]) {
                continue;
            }
            let w = dioid.lift(rel.weight(t), i, t as u32).map_err(|source| Error::Weight {
                relation: atom.relation.clone(),
                tuple: t,
                source,
            })?;
            row.clear();
            row.extend(keep.iter().map(|&c| tuple[c]));
            table.push(&row, w, t as u32);
        }
        tables.push(table);
    }
    Ok(tables)
}

/// A unary relation over the distinct values of column `column` of `rel`,
/// weighted by `weights`.  Joining it into a query puts a weight on that
/// attribute.
pub fn lift_attribute_weights(
    rel: &Relation,
    column: usize,
    weights: &BTreeMap<u64, f64>,
    name: impl Into<String>,
) -> Result<Relation, Error> {
    if column >= rel.arity() {
        return Err(Error::Config(format!("relation `{}` has no column {column}", rel.name())));
    }
    let mut out = Relation::new(name, 1);
    let mut seen = BTreeMap::new();
    for t in 0..rel.len() {
        let v = rel.tuple(t)[column];
        if seen.insert(v, ()).is_none() {
            let Some(&w) = weights.get(&v) else {
                return Err(Error::Data(format!("no weight for value {v} of `{}`", rel.name())));
            };
            out.push(&[v], w);
        }
    }
    Ok(out)
}
