//! Materialize-then-sort baselines and the brute-force reference.
//!
//! Weights here are always folded over atoms in index order from freshly
//! lifted base weights, independently of any DP instance.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use hashbrown::{HashMap, HashSet};

use crate::counters::Counters;
use crate::dioid::SelectiveDioid;
use crate::enumerate::Solution;
use crate::relational::{build_join_tree, materialize_atoms, AtomTable, Database, JoinTree, QuerySpec};
use crate::union::decompose_simple_cycle;
use crate::Error;

/// Answers in rank order, stored flat.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedResultSet<W> {
    width: usize,
    weights: Vec<W>,
    witnesses: Vec<u32>,
    /// Work spent producing and sorting the answers.
    pub counters: Counters,
}

impl<W: Clone> RankedResultSet<W> {
    fn sorted<D: SelectiveDioid<Weight = W>>(
        d: &D,
        width: usize,
        weights: Vec<W>,
        witnesses: Vec<u32>,
        mut counters: Counters,
    ) -> Self {
        let mut order: Vec<u32> = (0..weights.len() as u32).collect();
        let mut n = 0u64;
        order.sort_by(|&a, &b| {
            n += 1;
            d.cmp(&weights[a as usize], &weights[b as usize])
        });
        counters.comparisons += n;
        let mut w = Vec::with_capacity(weights.len());
        let mut x = Vec::with_capacity(witnesses.len());
        for i in order {
            let i = i as usize;
            w.push(weights[i].clone());
            x.extend_from_slice(&witnesses[i * width..(i + 1) * width]);
        }
        counters.results = w.len() as u64;
        Self { width, weights: w, witnesses: x, counters }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weight(&self, i: usize) -> &W {
        &self.weights[i]
    }

    pub fn witness(&self, i: usize) -> &[u32] {
        &self.witnesses[i * self.width..(i + 1) * self.width]
    }

    pub fn to_solutions(&self) -> Vec<Solution<W>> {
        (0..self.len()).map(|i| Solution { weight: self.weights[i].clone(), witness: self.witness(i).to_vec() }).collect()
    }
}

fn fold_weight<D: SelectiveDioid>(d: &D, tables: &[AtomTable<D::Weight>], rows: &[u32]) -> D::Weight {
    let mut w = d.one();
    for (t, &r) in tables.iter().zip(rows) {
        w = d.times(&w, &t.weights[r as usize]);
    }
    w
}

fn origins<W>(tables: &[AtomTable<W>], rows: &[u32]) -> Vec<u32> {
    tables.iter().zip(rows).map(|(t, &r)| t.origin[r as usize]).collect()
}

/// Every answer of `q` by backtracking over atoms in index order, sorted.
/// Refuses inputs whose cross product exceeds `cap`.
pub fn brute_force<D: SelectiveDioid>(
    q: &QuerySpec,
    db: &Database,
    dioid: &D,
    cap: u128,
) -> Result<RankedResultSet<D::Weight>, Error> {
    let tables = materialize_atoms(q, db, dioid)?;
    let rows = brute_rows(&tables, q.num_vars(), cap)?;
    let mut weights = Vec::with_capacity(rows.len());
    let mut witnesses = Vec::with_capacity(rows.len() * tables.len());
    for r in rows {
        weights.push(fold_weight(dioid, &tables, &r));
        witnesses.extend(origins(&tables, &r));
    }
    Ok(RankedResultSet::sorted(dioid, tables.len(), weights, witnesses, Counters::default()))
}

fn brute_rows<W>(tables: &[AtomTable<W>], num_vars: usize, cap: u128) -> Result<Vec<Vec<u32>>, Error> {
    let product = tables.iter().fold(1u128, |acc, t| acc.saturating_mul(t.len() as u128));
    if product > cap {
        return Err(Error::CapExceeded { product, cap });
    }
    let mut out = Vec::new();
    let mut binding: Vec<Option<u64>> = vec![None; num_vars];
    let mut rows: Vec<u32> = Vec::with_capacity(tables.len());
    search(tables, 0, &mut binding, &mut rows, &mut out);
    Ok(out)
}

fn search<W>(
    tables: &[AtomTable<W>],
    i: usize,
    binding: &mut Vec<Option<u64>>,
    rows: &mut Vec<u32>,
    out: &mut Vec<Vec<u32>>,
) {
    if i == tables.len() {
        out.push(rows.clone());
        return;
    }
    let t = &tables[i];
    for r in 0..t.len() {
        let row = t.row(r);
        if t.vars.iter().zip(row).any(|(&v, &x)| binding[v].is_some_and(|b| b != x)) {
            continue;
        }
        let fresh: Vec<usize> = t.vars.iter().copied().filter(|&v| binding[v].is_none()).collect();
        for (&v, &x) in t.vars.iter().zip(row) {
            binding[v] = Some(x);
        }
        rows.push(r as u32);
        search(tables, i + 1, binding, rows, out);
        rows.pop();
        for v in fresh {
            binding[v] = None;
        }
    }
}

/// Per group of free-variable values, the best weight over all answers in
/// the group, sorted by weight.  Values are listed in the order of the
/// query's free variables.
pub fn brute_force_min_weight<D: SelectiveDioid>(
    q: &QuerySpec,
    db: &Database,
    dioid: &D,
    cap: u128,
) -> Result<Vec<(D::Weight, Vec<u64>)>, Error> {
    let free = q.free().ok_or_else(|| Error::Query("query has no free variables".into()))?.to_vec();
    let tables = materialize_atoms(q, db, dioid)?;
    let rows = brute_rows(&tables, q.num_vars(), cap)?;
    let mut groups: BTreeMap<Vec<u64>, D::Weight> = BTreeMap::new();
    for r in rows {
        let w = fold_weight(dioid, &tables, &r);
        let key = free_values(&tables, &r, &free);
        groups
            .entry(key)
            .and_modify(|g| *g = dioid.plus(g, &w))
            .or_insert(w);
    }
    let mut out: Vec<(D::Weight, Vec<u64>)> = groups.into_iter().map(|(k, w)| (w, k)).collect();
    out.sort_by(|a, b| dioid.cmp(&a.0, &b.0));
    Ok(out)
}

pub(crate) fn free_values<W>(tables: &[AtomTable<W>], rows: &[u32], free: &[usize]) -> Vec<u64> {
    free.iter()
        .map(|&v| {
            let (t, r) = tables
                .iter()
                .zip(rows)
                .find(|(t, _)| t.vars.contains(&v))
                .expect("free variables occur in the body");
            t.row(*r as usize)[t.column(v).unwrap()]
        })
        .collect()
}

fn shared_cols<W>(parent: &AtomTable<W>, child: &AtomTable<W>) -> (Vec<usize>, Vec<usize>) {
    let shared: Vec<usize> = child.vars.iter().copied().filter(|v| parent.vars.contains(v)).collect();
    (
        shared.iter().map(|&v| parent.column(v).unwrap()).collect(),
        shared.iter().map(|&v| child.column(v).unwrap()).collect(),
    )
}

/// Rows of each table that take part in some answer, by a bottom-up then
/// top-down pass of semi-joins along `tree`.
pub fn yannakakis_survivors<W>(tables: &[AtomTable<W>], tree: &JoinTree, counters: &mut Counters) -> Vec<Vec<bool>> {
    let mut alive: Vec<Vec<bool>> = tables.iter().map(|t| vec![true; t.len()]).collect();
    let pre = tree.preorder();
    let mut semijoin = |keep: usize, by: usize, alive: &mut Vec<Vec<bool>>| {
        let (kt, bt) = (&tables[keep], &tables[by]);
        let (kc, bc) = if tree.parent[by] == Some(keep) {
            shared_cols(kt, bt)
        } else {
            let (p, c) = shared_cols(bt, kt);
            (c, p)
        };
        let keys: HashSet<Vec<u64>> =
            (0..bt.len()).filter(|&r| alive[by][r]).map(|r| bt.key(r, &bc)).collect();
        for r in 0..kt.len() {
            counters.probes += 1;
            if alive[keep][r] && !keys.contains(&kt.key(r, &kc)) {
                alive[keep][r] = false;
            }
        }
    };
    for &u in pre.iter().rev() {
        for &c in &tree.children[u] {
            semijoin(u, c, &mut alive);
        }
    }
    for &u in &pre {
        for &c in &tree.children[u] {
            semijoin(c, u, &mut alive);
        }
    }
    alive
}

/// Calls `emit` with the row index per table of every answer of an
/// acyclic join, after a full semi-join reduction.
pub fn yannakakis_join<W>(
    tables: &[AtomTable<W>],
    tree: &JoinTree,
    counters: &mut Counters,
    mut emit: impl FnMut(&[u32]),
) {
    let alive = yannakakis_survivors(tables, tree, counters);
    let pre = tree.preorder();
    let m = tables.len();
    // Per non-root table: parent key columns and an index of child rows.
    let mut parent_cols: Vec<Vec<usize>> = vec![Vec::new(); m];
    let mut index: Vec<HashMap<Vec<u64>, Vec<u32>>> = vec![HashMap::new(); m];
    for &u in &pre[1..] {
        let p = tree.parent[u].unwrap();
        let (pc, cc) = shared_cols(&tables[p], &tables[u]);
        for r in (0..tables[u].len()).filter(|&r| alive[u][r]) {
            index[u].entry(tables[u].key(r, &cc)).or_default().push(r as u32);
        }
        parent_cols[u] = pc;
    }
    let root = pre[0];
    let empty: Vec<u32> = Vec::new();
    let root_rows: Vec<u32> = (0..tables[root].len() as u32).filter(|&r| alive[root][r as usize]).collect();
    let mut rows = vec![0u32; m];
    let mut cands: Vec<&[u32]> = vec![&empty; m];
    let mut cursor = vec![0usize; m];
    cands[0] = &root_rows;
    let mut depth = 0usize;
    let mut count = 0u64;
    loop {
        if cursor[depth] == cands[depth].len() {
            if depth == 0 {
                break;
            }
            depth -= 1;
            continue;
        }
        let u = pre[depth];
        rows[u] = cands[depth][cursor[depth]];
        cursor[depth] += 1;
        if depth + 1 == m {
            count += 1;
            emit(&rows);
            continue;
        }
        depth += 1;
        let v = pre[depth];
        let p = tree.parent[v].unwrap();
        counters.probes += 1;
        let key = tables[p].key(rows[p] as usize, &parent_cols[v]);
        cands[depth] = index[v].get(&key).map_or(&empty[..], |x| &x[..]);
        cursor[depth] = 0;
    }
    counters.tuples_materialized += count;
}

/// Yannakakis join of an acyclic query followed by a full sort.
pub fn yannakakis_sorted<D: SelectiveDioid>(
    q: &QuerySpec,
    db: &Database,
    dioid: &D,
) -> Result<RankedResultSet<D::Weight>, Error> {
    let tree = build_join_tree(q)?;
    let tables = materialize_atoms(q, db, dioid)?;
    let mut counters = Counters::default();
    let mut weights = Vec::new();
    let mut witnesses = Vec::new();
    yannakakis_join(&tables, &tree, &mut counters, |r| {
        weights.push(fold_weight(dioid, &tables, r));
        witnesses.extend(tables.iter().zip(r).map(|(t, &x)| t.origin[x as usize]));
    });
    Ok(RankedResultSet::sorted(dioid, tables.len(), weights, witnesses, counters))
}

/// Full output of a simple cycle: every member of the heavy/light
/// decomposition joined out completely, mapped to base witnesses,
/// deduplicated and sorted.
pub fn batch_cyclic_sorted<D: SelectiveDioid>(
    q: &QuerySpec,
    db: &Database,
    dioid: &D,
) -> Result<RankedResultSet<D::Weight>, Error> {
    let plan = decompose_simple_cycle(q, db, dioid)?;
    let base = materialize_atoms(q, db, dioid)?;
    let row_of: Vec<HashMap<u32, u32>> =
        base.iter().map(|t| t.origin.iter().enumerate().map(|(r, &o)| (o, r as u32)).collect()).collect();
    let mut counters = plan.counters.clone();
    let mut seen: HashSet<Vec<u32>> = HashSet::new();
    let mut weights = Vec::new();
    let mut witnesses = Vec::new();
    let mut member_witness = Vec::new();
    let mut base_rows = Vec::new();
    for m in &plan.members {
        if m.instance.is_empty() {
            continue;
        }
        let (bags, tree) = m.bags();
        yannakakis_join(bags, tree, &mut counters, |rows| {
            member_witness.clear();
            member_witness.extend(rows.iter().enumerate().map(|(b, &r)| bags[b].origin[r as usize]));
            let witness = m.base_witness(&member_witness, plan.num_atoms);
            if !plan.disjoint && !seen.insert(witness.clone()) {
                return;
            }
            base_rows.clear();
            base_rows.extend(witness.iter().enumerate().map(|(a, o)| row_of[a][o]));
            weights.push(fold_weight(dioid, &base, &base_rows));
            witnesses.extend_from_slice(&witness);
        });
    }
    Ok(RankedResultSet::sorted(dioid, plan.num_atoms, weights, witnesses, counters))
}

/// Orders two weights; exposed for callers that sort answers themselves.
pub fn compare<D: SelectiveDioid>(d: &D, a: &D::Weight, b: &D::Weight) -> Ordering {
    d.cmp(a, b)
}
