//! Random instances and oracle comparisons shared by the integration tests.
#![allow(dead_code)]

use std::fmt::Debug;

use anyk_core::batch::brute_force;
use anyk_core::dp::TdpInstance;
use anyk_core::enumerate::{any_k, drain, Options};
use anyk_core::relational::{build_join_tree, materialize_atoms, Database, QuerySpec, Relation};
use anyk_core::{Algorithm, Counters, RankedEnumerator, SelectiveDioid, Solution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Brute force is only a safety net here; the backtracking search prunes
/// on join keys, so its cost follows the output, not the cross product.
pub const CAP: u128 = 1 << 60;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Path(usize),
    Star(usize),
    Tree(usize),
}

impl Shape {
    pub fn atoms(self) -> usize {
        match self {
            Shape::Path(l) | Shape::Star(l) | Shape::Tree(l) => l,
        }
    }
}

/// Binary atoms `R1..Rℓ`; random trees attach each atom to one variable of
/// an earlier atom.
pub fn query(shape: Shape, rng: &mut impl Rng) -> QuerySpec {
    match shape {
        Shape::Path(l) => QuerySpec::path(l),
        Shape::Star(l) => QuerySpec::star(l),
        Shape::Tree(l) => {
            let mut atoms: Vec<(String, [String; 2])> = vec![("R1".into(), ["x0".into(), "x1".into()])];
            for i in 1..l {
                let parent = rng.random_range(0..i);
                let shared = atoms[parent].1[rng.random_range(0..2)].clone();
                atoms.push((format!("R{}", i + 1), [shared, format!("x{}", i + 1)]));
            }
            let refs: Vec<(&str, &[String])> = atoms.iter().map(|(r, v)| (r.as_str(), &v[..])).collect();
            QuerySpec::new(&refs, None).unwrap()
        }
    }
}

pub fn relation(name: &str, n: usize, domain: u64, rng: &mut impl Rng) -> Relation {
    let mut r = Relation::new(name, 2);
    for _ in 0..n {
        let t = [rng.random_range(1..=domain), rng.random_range(1..=domain)];
        r.push(&t, rng.random_range(0.0..100.0));
    }
    r
}

/// One relation per atom.  The domain keeps the expected fan-out of a join
/// value between one and three.
pub fn database(q: &QuerySpec, n: usize, rng: &mut impl Rng) -> Database {
    let fanout = rng.random_range(1..=3) as u64;
    let domain = (n as u64 / fanout).max(2);
    let mut db = Database::new();
    for a in q.atoms() {
        db.insert(relation(&a.relation, n, domain, rng)).unwrap();
    }
    db
}

/// Equality for weights, with the tolerance float folds need.
pub trait Close {
    fn close(&self, other: &Self) -> bool;
}

impl Close for f64 {
    fn close(&self, other: &f64) -> bool {
        (self - other).abs() <= 1e-9 || self == other
    }
}

impl Close for bool {
    fn close(&self, other: &bool) -> bool {
        self == other
    }
}

impl Close for Vec<u64> {
    fn close(&self, other: &Vec<u64>) -> bool {
        self == other
    }
}

impl<A: Close> Close for (A, Vec<u64>) {
    fn close(&self, other: &Self) -> bool {
        self.0.close(&other.0) && self.1 == other.1
    }
}

pub fn instance<D: SelectiveDioid>(q: &QuerySpec, db: &Database, d: &D) -> TdpInstance<D> {
    let tables = materialize_atoms(q, db, d).unwrap();
    TdpInstance::new(&build_join_tree(q).unwrap(), &tables, d).unwrap()
}

/// Compares a ranked stream with the brute-force answer set: weights
/// elementwise, witnesses as multisets.
pub fn same_as_oracle<D>(q: &QuerySpec, db: &Database, d: &D, out: &[Solution<D::Weight>]) -> Result<(), String>
where
    D: SelectiveDioid,
    D::Weight: Close + Debug,
{
    let oracle = brute_force(q, db, d, CAP).map_err(|e| e.to_string())?;
    if out.len() != oracle.len() {
        return Err(format!("{} answers, oracle has {}", out.len(), oracle.len()));
    }
    for (i, s) in out.iter().enumerate() {
        if !s.weight.close(oracle.weight(i)) {
            return Err(format!("rank {i}: weight {:?}, oracle {:?}", s.weight, oracle.weight(i)));
        }
    }
    let mut got: Vec<Vec<u32>> = out.iter().map(|s| s.witness.clone()).collect();
    let mut want: Vec<Vec<u32>> = (0..oracle.len()).map(|i| oracle.witness(i).to_vec()).collect();
    got.sort_unstable();
    want.sort_unstable();
    if got != want {
        return Err("witness multisets differ".into());
    }
    Ok(())
}

/// Drains `algorithm` on `q` and checks it against the oracle.  Returns
/// the answers and the enumeration plus build counters.
pub fn run_checked<D>(
    q: &QuerySpec,
    db: &Database,
    d: &D,
    algorithm: Algorithm,
) -> Result<(Vec<Solution<D::Weight>>, Counters), String>
where
    D: SelectiveDioid,
    D::Weight: Close + Debug,
{
    let inst = instance(q, db, d);
    let mut e = any_k(&inst, algorithm, Options::default()).map_err(|e| e.to_string())?;
    let out = drain(&mut e, None);
    same_as_oracle(q, db, d, &out).map_err(|m| format!("{algorithm}: {m}"))?;
    let mut c = e.counters().clone();
    c.absorb(inst.build_counters());
    Ok((out, c))
}

/// A relation of `n` unary tuples with the given values and weights.
pub fn unary(name: &str, rows: &[(u64, f64)]) -> Relation {
    let mut r = Relation::new(name, 1);
    for &(v, w) in rows {
        r.push(&[v], w);
    }
    r
}

/// The three-relation Cartesian example: values and weights 1,2,3 /
/// 10,20,30 / 100,200,300.
pub fn running_example() -> (QuerySpec, Database) {
    let q = QuerySpec::new(&[("R1", &["a"][..]), ("R2", &["b"][..]), ("R3", &["c"][..])], None).unwrap();
    let mut db = Database::new();
    for (name, base) in [("R1", 1u64), ("R2", 10), ("R3", 100)] {
        let rows: Vec<(u64, f64)> = (1..=3).map(|i| (i * base, (i * base) as f64)).collect();
        db.insert(unary(name, &rows)).unwrap();
    }
    (q, db)
}

/// `ℓ` unary relations joined as a cross product.
pub fn cartesian(weights: &[Vec<f64>]) -> (QuerySpec, Database) {
    let names: Vec<(String, [String; 1])> =
        (0..weights.len()).map(|i| (format!("R{}", i + 1), [format!("v{}", i + 1)])).collect();
    let refs: Vec<(&str, &[String])> = names.iter().map(|(r, v)| (r.as_str(), &v[..])).collect();
    let q = QuerySpec::new(&refs, None).unwrap();
    let mut db = Database::new();
    for ((name, _), ws) in names.iter().zip(weights) {
        let rows: Vec<(u64, f64)> = ws.iter().enumerate().map(|(i, &w)| (i as u64, w)).collect();
        db.insert(unary(name, &rows)).unwrap();
    }
    (q, db)
}

/// Random binary relations `R1..Rℓ` for an ℓ-cycle.
pub fn cycle_database(l: usize, n: usize, domain: u64, rng: &mut impl Rng) -> Database {
    let mut db = Database::new();
    for i in 1..=l {
        db.insert(relation(&format!("R{i}"), n, domain, rng)).unwrap();
    }
    db
}
