//! Queries with free variables.
//!
//! [`AllWeight`] keeps every answer of the full query and only hides the
//! bound variables.  [`ConnexPlan`] ranks each assignment of the free
//! variables once, at the best weight of any of its extensions; it needs
//! a free-connex query.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::counters::Counters;
use crate::dioid::SelectiveDioid;
use crate::dp::TdpInstance;
use crate::enumerate::{any_k, Algorithm, BoxedEnumerator, Options, RankedEnumerator};
use crate::relational::{is_free_connex, materialize_atoms, AtomTable, Database, JoinTree, QuerySpec, Relation};
use crate::Error;

/// An answer restricted to the free variables.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedSolution<W> {
    pub weight: W,
    /// Values of the free variables, in the query's free-variable order.
    pub values: Vec<u64>,
    /// Tuple index per atom of the full answer behind this one.  Empty
    /// under min-weight semantics, where no single answer is meant.
    pub witness: Vec<u32>,
}

/// Produces projected answers in non-decreasing weight order.
pub trait ProjectedEnumerator {
    type Weight;

    fn next_projected(&mut self) -> Option<ProjectedSolution<Self::Weight>>;

    fn counters(&self) -> &Counters;
}

impl<E: ProjectedEnumerator + ?Sized> ProjectedEnumerator for Box<E> {
    type Weight = E::Weight;

    fn next_projected(&mut self) -> Option<ProjectedSolution<E::Weight>> {
        (**self).next_projected()
    }

    fn counters(&self) -> &Counters {
        (**self).counters()
    }
}

/// Collects up to `limit` projected answers.
pub fn drain_projected<E: ProjectedEnumerator + ?Sized>(
    e: &mut E,
    limit: Option<usize>,
) -> Vec<ProjectedSolution<E::Weight>> {
    let mut out = Vec::new();
    while limit.is_none_or(|k| out.len() < k) {
        match e.next_projected() {
            Some(s) => out.push(s),
            None => break,
        }
    }
    out
}

/// All-weight semantics: each full answer, projected.  Answers that agree
/// on the free variables are all emitted.
pub struct AllWeight<'a, E> {
    inner: E,
    lookup: Vec<(&'a Relation, usize, usize)>,
}

impl<'a, E: RankedEnumerator> AllWeight<'a, E> {
    /// Wraps `inner`, whose witnesses index the atoms of `q` over `db`.
    /// A query without free variables projects onto every variable.
    pub fn new(q: &QuerySpec, db: &'a Database, inner: E) -> Result<Self, Error> {
        let free: Vec<usize> = match q.free() {
            Some(f) => f.to_vec(),
            None => (0..q.num_vars()).collect(),
        };
        let mut lookup = Vec::with_capacity(free.len());
        for v in free {
            let (a, atom) = q
                .atoms()
                .iter()
                .enumerate()
                .find(|(_, atom)| atom.vars.contains(&v))
                .ok_or_else(|| Error::Query("free variable missing from the body".into()))?;
            let col = atom.vars.iter().position(|&x| x == v).unwrap();
            lookup.push((db.relation(&atom.relation)?, a, col));
        }
        Ok(Self { inner, lookup })
    }
}

impl<E: RankedEnumerator> ProjectedEnumerator for AllWeight<'_, E> {
    type Weight = E::Weight;

    fn next_projected(&mut self) -> Option<ProjectedSolution<E::Weight>> {
        let s = self.inner.next_solution()?;
        let values = self.lookup.iter().map(|&(rel, a, col)| rel.tuple(s.witness[a] as usize)[col]).collect();
        Some(ProjectedSolution { weight: s.weight, values, witness: s.witness })
    }

    fn counters(&self) -> &Counters {
        self.inner.counters()
    }
}

/// A node of the free part of the extended join tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreeNode {
    /// Query atom it comes from.
    pub atom: usize,
    pub vars: Vec<usize>,
    /// Duplicate-free projection of the atom onto its free variables,
    /// weighted `one`, rather than the atom itself.
    pub projected: bool,
}

/// Best completion weights through one bound subtree.
#[derive(Debug, Clone, PartialEq)]
pub struct Boundary<W> {
    /// Free node the subtree hangs under.
    pub node: usize,
    /// Query atom at the top of the subtree.
    pub child_atom: usize,
    /// Weight per row of the free node's table (`None` for rows that take
    /// part in no answer).
    pub weights: Vec<Option<W>>,
}

/// The min-weight evaluation plan of a free-connex query.
///
/// `full` is the DP over the whole extended join tree: the free nodes
/// first, then every atom that has a bound variable.  `pruned` keeps only
/// the free nodes; each bound subtree is replaced by a weighted leaf
/// carrying its best completion.
#[derive(Debug, Clone)]
pub struct ConnexPlan<D: SelectiveDioid> {
    pub full: TdpInstance<D>,
    pub pruned: TdpInstance<D>,
    pub nodes: Vec<FreeNode>,
    pub boundaries: Vec<Boundary<D::Weight>>,
    tables: Vec<AtomTable<D::Weight>>,
    /// (free node, column) holding each free variable.
    lookup: Vec<(usize, usize)>,
    counters: Counters,
}

impl<D: SelectiveDioid> ConnexPlan<D> {
    /// Preprocessing work of both instances.
    pub fn build_counters(&self) -> &Counters {
        &self.counters
    }

    /// Table of free node `node`; its row `r` is row `r` of that node in
    /// `full`.
    pub fn node_table(&self, node: usize) -> &AtomTable<D::Weight> {
        &self.tables[node]
    }

    fn values(&self, witness: &[u32]) -> Vec<u64> {
        self.lookup.iter().map(|&(n, c)| self.tables[n].row(witness[n] as usize)[c]).collect()
    }
}

/// Best weight per distinct value tuple: the table as a set.
fn dedup_rows<D: SelectiveDioid>(t: &AtomTable<D::Weight>, vars: Vec<usize>, d: &D, one: bool) -> AtomTable<D::Weight> {
    let cols: Vec<usize> = vars.iter().map(|&v| t.column(v).unwrap()).collect();
    let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut keys: Vec<Vec<u64>> = Vec::new();
    let mut weights: Vec<D::Weight> = Vec::new();
    for r in 0..t.len() {
        let w = if one { d.one() } else { t.weights[r].clone() };
        let k = t.key(r, &cols);
        match index.get(&k) {
            Some(&i) => weights[i] = d.plus(&weights[i], &w),
            None => {
                index.insert(k.clone(), keys.len());
                keys.push(k);
                weights.push(w);
            }
        }
    }
    let mut out = AtomTable::new(vars);
    for (i, (k, w)) in keys.iter().zip(weights).enumerate() {
        out.push(k, w, i as u32);
    }
    out
}

/// Builds the min-weight plan of `q`, which must be free-connex and have
/// free variables.
pub fn build_connex_plan<D: SelectiveDioid>(q: &QuerySpec, db: &Database, dioid: &D) -> Result<ConnexPlan<D>, Error> {
    let free: Vec<usize> = q.free().ok_or_else(|| Error::Query("query has no free variables".into()))?.to_vec();
    if free.is_empty() {
        return Err(Error::Query("query has no free variables".into()));
    }
    if !is_free_connex(q) {
        return Err(Error::NotFreeConnex);
    }
    let atoms = materialize_atoms(q, db, dioid)?;
    let m = atoms.len();
    let is_free = |v: &usize| free.contains(v);

    // Join tree of the atoms plus one hyperedge over the free variables,
    // rooted at that hyperedge.
    let mut sets: Vec<Vec<usize>> = atoms.iter().map(|t| t.vars.clone()).collect();
    sets.push(free.clone());
    let star = JoinTree::from_var_sets(&sets).ok_or(Error::NotFreeConnex)?.rerooted(m);

    // Free part: atoms over free variables only, and projections of the
    // others onto their free variables.
    let mut nodes = Vec::new();
    let mut tables: Vec<AtomTable<D::Weight>> = Vec::new();
    let mut projection_of = vec![usize::MAX; m];
    for (a, t) in atoms.iter().enumerate() {
        let fv: Vec<usize> = t.vars.iter().copied().filter(is_free).collect();
        if fv.is_empty() {
            continue;
        }
        let projected = fv.len() < t.vars.len();
        tables.push(dedup_rows(t, fv.clone(), dioid, projected));
        if projected {
            projection_of[a] = nodes.len();
        }
        nodes.push(FreeNode { atom: a, vars: fv, projected });
    }
    let u = nodes.len();
    let free_sets: Vec<Vec<usize>> = nodes.iter().map(|n| n.vars.clone()).collect();
    let free_tree = JoinTree::from_var_sets(&free_sets).ok_or(Error::NotFreeConnex)?;

    // Bound atoms hang below the free part.
    let bound: Vec<usize> = (0..m).filter(|&a| atoms[a].vars.iter().any(|v| !is_free(v))).collect();
    let mut node_of = vec![usize::MAX; m];
    for (i, &a) in bound.iter().enumerate() {
        node_of[a] = u + i;
        tables.push(atoms[a].clone());
    }
    let n = tables.len();
    let mut parent: Vec<Option<usize>> = free_tree.parent.clone();
    parent.resize(n, None);
    for &a in &bound {
        let shares_bound = |p: usize| atoms[a].vars.iter().any(|v| !is_free(v) && atoms[p].vars.contains(v));
        let p = match star.parent[a] {
            Some(p) if p != m && shares_bound(p) => node_of[p],
            Some(p) if projection_of[a] == usize::MAX && p != m && node_of[p] != usize::MAX => node_of[p],
            _ if projection_of[a] != usize::MAX => projection_of[a],
            _ => free_tree.root,
        };
        parent[node_of[a]] = Some(p);
    }
    let mut children = vec![Vec::new(); n];
    for (c, p) in parent.iter().enumerate() {
        if let Some(p) = p {
            children[*p].push(c);
        }
    }
    let tree = JoinTree { root: free_tree.root, parent, children };
    debug_assert!(tree.is_coherent(&tables.iter().map(|t| t.vars.clone()).collect::<Vec<_>>()));

    let full = TdpInstance::new(&tree, &tables, dioid)?;

    // Free tables restricted to surviving rows, with one weighted leaf per
    // bound child.
    let mut boundaries = Vec::new();
    let mut pruned_tables = Vec::with_capacity(u);
    for (node, t) in tables[..u].iter().enumerate() {
        let alive: Vec<usize> = (0..t.len()).filter(|&r| full.row_state(node, r).is_some()).collect();
        let mut p = AtomTable::new(t.vars.clone());
        for &r in &alive {
            p.push(t.row(r), t.weights[r].clone(), r as u32);
        }
        for (branch, &c) in tree.children[node].iter().enumerate() {
            if c < u {
                continue;
            }
            let mut per_row = vec![None; t.len()];
            let mut leaf = Vec::with_capacity(alive.len());
            for &r in &alive {
                let w = full.branch_value(full.row_state(node, r).unwrap(), branch).clone();
                per_row[r] = Some(w.clone());
                leaf.push(w);
            }
            p.terminals.push(leaf);
            boundaries.push(Boundary { node, child_atom: bound[c - u], weights: per_row });
        }
        pruned_tables.push(p);
    }
    let pruned = TdpInstance::new(&free_tree, &pruned_tables, dioid)?;

    let lookup = free
        .iter()
        .map(|&v| {
            let n = nodes.iter().position(|n| n.vars.contains(&v)).expect("free variables occur in the body");
            (n, nodes[n].vars.iter().position(|&x| x == v).unwrap())
        })
        .collect();
    let mut counters = full.build_counters().clone();
    counters.absorb(pruned.build_counters());
    tables.truncate(u);
    Ok(ConnexPlan { full, pruned, nodes, boundaries, tables, lookup, counters })
}

/// Min-weight semantics: every free-variable assignment once, at its best
/// weight.
pub struct MinWeight<'a, D: SelectiveDioid> {
    plan: &'a ConnexPlan<D>,
    inner: BoxedEnumerator<'a, D::Weight>,
}

impl<'a, D: SelectiveDioid + 'a> MinWeight<'a, D> {
    pub fn new(plan: &'a ConnexPlan<D>, algorithm: Algorithm, options: Options) -> Result<Self, Error> {
        Ok(Self { plan, inner: any_k(&plan.pruned, algorithm, options)? })
    }
}

impl<D: SelectiveDioid> ProjectedEnumerator for MinWeight<'_, D> {
    type Weight = D::Weight;

    fn next_projected(&mut self) -> Option<ProjectedSolution<D::Weight>> {
        let s = self.inner.next_solution()?;
        Some(ProjectedSolution { weight: s.weight, values: self.plan.values(&s.witness), witness: Vec::new() })
    }

    fn counters(&self) -> &Counters {
        self.inner.counters()
    }
}
