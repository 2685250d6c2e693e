//! Tree-shaped dynamic programming instances.
//!
//! A [`RawTdp`] is built from a join tree and its atom tables; stages are
//! numbered in breadth-first order from a single-state source stage.  Every
//! join-tree node becomes a relational stage (one state per row), every
//! join-tree edge a connector stage keyed by the shared variables, and each
//! leaf gets a one-state terminal stage.  Rows of a parent reach the
//! matching connector state at weight `one`; the connector reaches the
//! child rows at the child's tuple weight, so an equi-join costs `O(n)`
//! edges instead of `O(n²)`.
//!
//! [`RawTdp::bottom_up`] computes `π₁` (best completion weight) of every
//! state, removes states that cannot take part in a solution, and returns
//! the [`TdpInstance`] the enumerators work on.

use alloc::collections::VecDeque;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::{self, Write};
use core::ops::Range;

use hashbrown::HashMap;

use crate::counters::Counters;
use crate::dioid::SelectiveDioid;
use crate::enumerate::Solution;
use crate::relational::{AtomTable, JoinTree};
use crate::Error;

pub(crate) const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageKind {
    Source,
    Relational,
    Connector,
    Terminal,
}

impl StageKind {
    fn label(self) -> &'static str {
        match self {
            StageKind::Source => "source",
            StageKind::Relational => "relational",
            StageKind::Connector => "connector",
            StageKind::Terminal => "terminal",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stage {
    pub kind: StageKind,
    /// Relational: its atom.  Connector: the child atom.  Terminal: the
    /// atom it hangs under.
    pub atom: Option<usize>,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// Index of this stage among its parent's children.
    pub branch: usize,
    pub states: Range<u32>,
}

/// A non-source stage as the enumerators see it: stages in tree order,
/// with the position of the parent stage (`None` for the source).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Position {
    pub stage: usize,
    pub parent: Option<usize>,
    pub branch: usize,
    pub atom: Option<usize>,
}

#[derive(Debug, Clone, Copy)]
enum Spec {
    Source,
    Atom(usize),
    Connector { parent: usize, child: usize },
    Synthetic { atom: usize, index: usize },
    Terminal(usize),
}

struct Connector {
    parent_cols: Vec<usize>,
    keys: HashMap<Vec<u64>, u32>,
    groups: Vec<Vec<u32>>,
}

/// Flat adjacency shared by the raw and evaluated instances.
#[derive(Debug, Clone)]
struct Graph<W> {
    state_stage: Vec<u32>,
    state_row: Vec<u32>,
    slot_start: Vec<u32>,
    edge_start: Vec<u32>,
    edge_target: Vec<u32>,
    edge_weight: Vec<W>,
}

impl<W> Graph<W> {
    fn new() -> Self {
        Self {
            state_stage: Vec::new(),
            state_row: Vec::new(),
            slot_start: vec![0],
            edge_start: vec![0],
            edge_target: Vec::new(),
            edge_weight: Vec::new(),
        }
    }

    fn num_states(&self) -> usize {
        self.state_stage.len()
    }

    fn slots(&self, s: usize) -> Range<usize> {
        self.slot_start[s] as usize..self.slot_start[s + 1] as usize
    }

    fn edges(&self, slot: usize) -> Range<usize> {
        self.edge_start[slot] as usize..self.edge_start[slot + 1] as usize
    }
}

/// A DP instance before bottom-up evaluation.
pub struct RawTdp<D: SelectiveDioid> {
    dioid: D,
    stages: Vec<Stage>,
    graph: Graph<D::Weight>,
    atom_stage: Vec<usize>,
    origin: Vec<Vec<u32>>,
    counters: Counters,
}

/// Builds the DP graph for `tables` joined along `tree`.
pub fn build_tdp<D: SelectiveDioid>(
    tree: &JoinTree,
    tables: &[AtomTable<D::Weight>],
    dioid: &D,
) -> Result<RawTdp<D>, Error> {
    if tables.is_empty() || tree.len() != tables.len() {
        return Err(Error::Config(alloc::format!(
            "join tree has {} nodes for {} atoms",
            tree.len(),
            tables.len()
        )));
    }
    let mut counters = Counters::default();

    // Stage tree in breadth-first order.
    let mut stages: Vec<Stage> = Vec::new();
    let mut specs: Vec<Spec> = Vec::new();
    let mut queue = VecDeque::new();
    queue.push_back((Spec::Source, None));
    while let Some((spec, parent)) = queue.pop_front() {
        let id = stages.len();
        let (kind, atom) = match spec {
            Spec::Source => (StageKind::Source, None),
            Spec::Atom(a) => (StageKind::Relational, Some(a)),
            Spec::Connector { child, .. } => (StageKind::Connector, Some(child)),
            Spec::Synthetic { atom, .. } | Spec::Terminal(atom) => (StageKind::Terminal, Some(atom)),
        };
        let branch = match parent {
            Some(p) => {
                let stage: &mut Stage = &mut stages[p];
                stage.children.push(id);
                stage.children.len() - 1
            }
            None => 0,
        };
        stages.push(Stage { kind, atom, parent, children: Vec::new(), branch, states: 0..0 });
        specs.push(spec);
        match spec {
            Spec::Source => queue.push_back((Spec::Atom(tree.root), Some(id))),
            Spec::Atom(a) => {
                for &c in &tree.children[a] {
                    queue.push_back((Spec::Connector { parent: a, child: c }, Some(id)));
                }
                for index in 0..tables[a].terminals.len() {
                    queue.push_back((Spec::Synthetic { atom: a, index }, Some(id)));
                }
                if tree.children[a].is_empty() && tables[a].terminals.is_empty() {
                    queue.push_back((Spec::Terminal(a), Some(id)));
                }
            }
            Spec::Connector { child, .. } => queue.push_back((Spec::Atom(child), Some(id))),
            Spec::Synthetic { .. } | Spec::Terminal(_) => {}
        }
    }

    // Connector keys and state ranges.
    let mut connectors: Vec<Option<Connector>> = Vec::with_capacity(stages.len());
    let mut atom_stage = vec![usize::MAX; tables.len()];
    let mut next = 0u32;
    for (id, spec) in specs.iter().enumerate() {
        let (count, conn) = match *spec {
            Spec::Source | Spec::Synthetic { .. } | Spec::Terminal(_) => (1, None),
            Spec::Atom(a) => {
                atom_stage[a] = id;
                (tables[a].len(), None)
            }
            Spec::Connector { parent, child } => {
                let (p, c) = (&tables[parent], &tables[child]);
                let shared: Vec<usize> = c.vars.iter().copied().filter(|v| p.vars.contains(v)).collect();
                let child_cols: Vec<usize> = shared.iter().map(|&v| c.column(v).unwrap()).collect();
                let parent_cols: Vec<usize> = shared.iter().map(|&v| p.column(v).unwrap()).collect();
                let mut keys: HashMap<Vec<u64>, u32> = HashMap::new();
                let mut groups: Vec<Vec<u32>> = Vec::new();
                for r in 0..c.len() {
                    counters.probes += 1;
                    let k = c.key(r, &child_cols);
                    let g = *keys.entry(k).or_insert_with(|| {
                        groups.push(Vec::new());
                        (groups.len() - 1) as u32
                    });
                    groups[g as usize].push(r as u32);
                }
                (groups.len(), Some(Connector { parent_cols, keys, groups }))
            }
        };
        let count = u32::try_from(count).map_err(|_| Error::Config("instance too large".into()))?;
        stages[id].states = next..next + count;
        next = next.checked_add(count).ok_or_else(|| Error::Config("instance too large".into()))?;
        connectors.push(conn);
    }

    // States, slots and edges.
    let one = dioid.one();
    let mut g: Graph<D::Weight> = Graph::new();
    for (id, stage) in stages.iter().enumerate() {
        for local in 0..stage.states.len() as u32 {
            g.state_stage.push(id as u32);
            g.state_row.push(if stage.kind == StageKind::Relational { local } else { NONE });
            for &ch in &stage.children {
                let child = &stages[ch];
                match (specs[id], specs[ch]) {
                    (Spec::Source, Spec::Atom(a)) => {
                        for r in 0..tables[a].len() {
                            g.edge_target.push(child.states.start + r as u32);
                            g.edge_weight.push(tables[a].weights[r].clone());
                        }
                    }
                    (Spec::Atom(a), Spec::Connector { .. }) => {
                        let conn = connectors[ch].as_ref().unwrap();
                        counters.probes += 1;
                        let k = tables[a].key(local as usize, &conn.parent_cols);
                        if let Some(&target) = conn.keys.get(&k) {
                            g.edge_target.push(child.states.start + target);
                            g.edge_weight.push(one.clone());
                        }
                    }
                    (Spec::Atom(a), Spec::Synthetic { index, .. }) => {
                        let w = &tables[a].terminals[index][local as usize];
                        if !dioid.is_zero(w) {
                            g.edge_target.push(child.states.start);
                            g.edge_weight.push(w.clone());
                        }
                    }
                    (Spec::Atom(_), Spec::Terminal(_)) => {
                        g.edge_target.push(child.states.start);
                        g.edge_weight.push(one.clone());
                    }
                    (Spec::Connector { child: c, .. }, Spec::Atom(_)) => {
                        let conn = connectors[id].as_ref().unwrap();
                        for &r in &conn.groups[local as usize] {
                            g.edge_target.push(child.states.start + r);
                            g.edge_weight.push(tables[c].weights[r as usize].clone());
                        }
                    }
                    _ => unreachable!("stage tree shape"),
                }
                g.edge_start.push(g.edge_target.len() as u32);
            }
            g.slot_start.push((g.edge_start.len() - 1) as u32);
        }
    }
    counters.states_built = g.num_states() as u64;
    counters.edges_built = g.edge_target.len() as u64;

    Ok(RawTdp {
        dioid: dioid.clone(),
        stages,
        graph: g,
        atom_stage,
        origin: tables.iter().map(|t| t.origin.clone()).collect(),
        counters,
    })
}

impl<D: SelectiveDioid> RawTdp<D> {
    pub fn num_states(&self) -> usize {
        self.graph.num_states()
    }

    pub fn num_edges(&self) -> usize {
        self.graph.edge_target.len()
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    /// Computes `π₁` bottom-up, keeps only states on some complete
    /// solution, and returns the evaluated instance.
    pub fn bottom_up(self) -> TdpInstance<D> {
        let d = &self.dioid;
        let g = &self.graph;
        let n = g.num_states();
        let mut pi: Vec<D::Weight> = vec![d.zero(); n];
        let mut choice: Vec<D::Weight> = vec![d.zero(); g.edge_target.len()];
        let mut cmps = 0u64;
        for s in (0..n).rev() {
            let mut acc = d.one();
            for slot in g.slots(s) {
                let mut best: Option<usize> = None;
                for e in g.edges(slot) {
                    let cw = d.times(&g.edge_weight[e], &pi[g.edge_target[e] as usize]);
                    if !d.is_zero(&cw) {
                        let better = match best {
                            None => true,
                            Some(b) => {
                                cmps += 1;
                                d.less(&cw, &choice[b])
                            }
                        };
                        if better {
                            best = Some(e);
                        }
                    }
                    choice[e] = cw;
                }
                acc = match best {
                    Some(b) => d.times(&acc, &choice[b]),
                    None => d.zero(),
                };
            }
            pi[s] = acc;
        }

        // Keep states reachable from the source through non-zero choices.
        let mut alive = vec![false; n];
        if n > 0 && !d.is_zero(&pi[0]) {
            alive[0] = true;
        }
        for s in 0..n {
            if !alive[s] {
                continue;
            }
            for slot in g.slots(s) {
                for e in g.edges(slot) {
                    if !d.is_zero(&choice[e]) {
                        alive[g.edge_target[e] as usize] = true;
                    }
                }
            }
        }

        let mut new_id = vec![NONE; n];
        let mut next = 0u32;
        for s in 0..n {
            if alive[s] {
                new_id[s] = next;
                next += 1;
            }
        }
        let mut stages = self.stages;
        for st in &mut stages {
            let lo = st.states.clone().map(|s| new_id[s as usize]).find(|&x| x != NONE);
            let count = st.states.clone().filter(|&s| alive[s as usize]).count() as u32;
            let lo = lo.unwrap_or(next);
            st.states = lo..lo + count;
        }

        let mut out: Graph<D::Weight> = Graph::new();
        let mut edge_choice = Vec::new();
        let mut slot_best = Vec::new();
        for s in 0..n {
            if !alive[s] {
                continue;
            }
            out.state_stage.push(g.state_stage[s]);
            out.state_row.push(g.state_row[s]);
            for slot in g.slots(s) {
                let base = out.edge_target.len();
                let mut best = NONE;
                for e in g.edges(slot) {
                    let t = g.edge_target[e] as usize;
                    if !alive[t] {
                        continue;
                    }
                    let local = (out.edge_target.len() - base) as u32;
                    if best == NONE || d.less(&choice[e], &edge_choice[base + best as usize]) {
                        best = local;
                    }
                    out.edge_target.push(new_id[t]);
                    out.edge_weight.push(g.edge_weight[e].clone());
                    edge_choice.push(choice[e].clone());
                }
                debug_assert!(best != NONE, "alive states have a choice on every branch");
                slot_best.push(best);
                out.edge_start.push(out.edge_target.len() as u32);
            }
            out.slot_start.push((out.edge_start.len() - 1) as u32);
        }
        let pi1: Vec<D::Weight> = (0..n).filter(|&s| alive[s]).map(|s| pi[s].clone()).collect();

        let mut row_state: Vec<Vec<u32>> = self.origin.iter().map(|o| vec![NONE; o.len()]).collect();
        for (s, (&st, &row)) in out.state_stage.iter().zip(&out.state_row).enumerate() {
            if row != NONE {
                let atom = stages[st as usize].atom.unwrap();
                row_state[atom][row as usize] = s as u32;
            }
        }

        let positions: Vec<Position> = stages
            .iter()
            .enumerate()
            .skip(1)
            .map(|(id, st)| Position {
                stage: id,
                parent: st.parent.and_then(|p| p.checked_sub(1)),
                branch: st.branch,
                atom: if st.kind == StageKind::Relational { st.atom } else { None },
            })
            .collect();
        let (pre, post) = tree_intervals(&stages);
        let is_path = stages.iter().all(|s| s.children.len() <= 1);

        let mut counters = self.counters;
        counters.comparisons += cmps;
        TdpInstance {
            dioid: self.dioid,
            stages,
            graph: out,
            edge_choice,
            slot_best,
            pi1,
            atom_stage: self.atom_stage,
            row_state,
            origin: self.origin,
            positions,
            pre,
            post,
            is_path,
            counters,
        }
    }
}

fn tree_intervals(stages: &[Stage]) -> (Vec<u32>, Vec<u32>) {
    let mut pre = vec![0; stages.len()];
    let mut post = vec![0; stages.len()];
    let mut clock = 0u32;
    let mut stack = vec![(0usize, false)];
    while let Some((u, done)) = stack.pop() {
        if done {
            post[u] = clock;
            continue;
        }
        pre[u] = clock;
        clock += 1;
        stack.push((u, true));
        for &c in stages[u].children.iter().rev() {
            stack.push((c, false));
        }
    }
    (pre, post)
}

/// An evaluated DP instance: every remaining state has a non-zero `π₁` and
/// lies on at least one complete solution.
#[derive(Debug, Clone)]
pub struct TdpInstance<D: SelectiveDioid> {
    dioid: D,
    stages: Vec<Stage>,
    graph: Graph<D::Weight>,
    edge_choice: Vec<D::Weight>,
    slot_best: Vec<u32>,
    pi1: Vec<D::Weight>,
    atom_stage: Vec<usize>,
    row_state: Vec<Vec<u32>>,
    origin: Vec<Vec<u32>>,
    positions: Vec<Position>,
    pre: Vec<u32>,
    post: Vec<u32>,
    is_path: bool,
    counters: Counters,
}

impl<D: SelectiveDioid> TdpInstance<D> {
    /// Builds and evaluates in one step.
    pub fn new(tree: &JoinTree, tables: &[AtomTable<D::Weight>], dioid: &D) -> Result<Self, Error> {
        Ok(build_tdp(tree, tables, dioid)?.bottom_up())
    }

    pub fn dioid(&self) -> &D {
        &self.dioid
    }

    /// True when the query has no answers.
    pub fn is_empty(&self) -> bool {
        self.graph.num_states() == 0
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn positions(&self) -> &[Position] {
        &self.positions
    }

    pub fn num_atoms(&self) -> usize {
        self.atom_stage.len()
    }

    pub fn num_states(&self) -> usize {
        self.graph.num_states()
    }

    pub fn num_edges(&self) -> usize {
        self.graph.edge_target.len()
    }

    /// Every stage has at most one child.
    pub fn is_path(&self) -> bool {
        self.is_path
    }

    /// Construction and evaluation work.
    pub fn build_counters(&self) -> &Counters {
        &self.counters
    }

    /// `π₁` of the source: the weight of the best solution.
    pub fn best_weight(&self) -> Option<&D::Weight> {
        self.pi1.first()
    }

    pub fn pi1(&self, state: u32) -> &D::Weight {
        &self.pi1[state as usize]
    }

    /// State of row `row` of `atom`, if it survived pruning.
    pub fn row_state(&self, atom: usize, row: usize) -> Option<u32> {
        let s = self.row_state[atom][row];
        (s != NONE).then_some(s)
    }

    /// Surviving rows of each atom.
    pub fn survivors(&self) -> Vec<Vec<bool>> {
        self.row_state.iter().map(|r| r.iter().map(|&s| s != NONE).collect()).collect()
    }

    /// Stage (relational, for an atom) that holds `atom`.
    pub fn atom_stage(&self, atom: usize) -> usize {
        self.atom_stage[atom]
    }

    /// Best choice weight (`w ⊗ π₁`) of `state` on `branch`.
    pub fn branch_value(&self, state: u32, branch: usize) -> &D::Weight {
        let slot = self.slot(state, branch);
        &self.edge_choice[self.edge_range(slot).start + self.slot_best[slot] as usize]
    }

    // Accessors used by the enumerators.

    pub(crate) const SOURCE: u32 = 0;

    pub(crate) fn slot(&self, state: u32, branch: usize) -> usize {
        self.graph.slot_start[state as usize] as usize + branch
    }

    pub(crate) fn num_slots(&self) -> usize {
        self.slot_best.len()
    }

    pub(crate) fn slots_of(&self, state: u32) -> Range<usize> {
        self.graph.slots(state as usize)
    }

    pub(crate) fn edge_range(&self, slot: usize) -> Range<usize> {
        self.graph.edges(slot)
    }

    pub(crate) fn degree(&self, slot: usize) -> usize {
        self.edge_range(slot).len()
    }

    pub(crate) fn best_local(&self, slot: usize) -> u32 {
        self.slot_best[slot]
    }

    pub(crate) fn target(&self, edge: usize) -> u32 {
        self.graph.edge_target[edge]
    }

    pub(crate) fn edge_weight(&self, edge: usize) -> &D::Weight {
        &self.graph.edge_weight[edge]
    }

    pub(crate) fn choice(&self, edge: usize) -> &D::Weight {
        &self.edge_choice[edge]
    }

    pub(crate) fn state_row(&self, state: u32) -> u32 {
        self.graph.state_row[state as usize]
    }

    pub(crate) fn state_stage(&self, state: u32) -> usize {
        self.graph.state_stage[state as usize] as usize
    }

    /// Whether position `c` lies in the subtree of position `r`.
    pub(crate) fn in_subtree(&self, c: usize, r: usize) -> bool {
        let (sc, sr) = (self.positions[c].stage, self.positions[r].stage);
        self.pre[sr] <= self.pre[sc] && self.pre[sc] < self.post[sr]
    }

    /// Orders two choices of one slot: by choice weight, then by index.
    pub(crate) fn choice_less(&self, base: usize, a: u32, b: u32) -> bool {
        match self.dioid.cmp(&self.edge_choice[base + a as usize], &self.edge_choice[base + b as usize]) {
            core::cmp::Ordering::Less => true,
            core::cmp::Ordering::Greater => false,
            core::cmp::Ordering::Equal => a < b,
        }
    }

    /// Witness (original tuple index per atom) of a full state assignment
    /// given per position.
    pub(crate) fn witness_of(&self, states: &[u32]) -> Vec<u32> {
        let mut w = vec![0u32; self.num_atoms()];
        for (p, pos) in self.positions.iter().enumerate() {
            if let Some(a) = pos.atom {
                w[a] = self.origin[a][self.state_row(states[p]) as usize];
            }
        }
        w
    }

    pub(crate) fn origin(&self, atom: usize, row: u32) -> u32 {
        self.origin[atom][row as usize]
    }

    /// The best solution, following best pointers from the source.
    pub fn top1(&self) -> Option<Solution<D::Weight>> {
        if self.is_empty() {
            return None;
        }
        let mut states = vec![0u32; self.positions.len()];
        let mut weight = self.dioid.one();
        for (p, pos) in self.positions.iter().enumerate() {
            let x = pos.parent.map_or(Self::SOURCE, |q| states[q]);
            let slot = self.slot(x, pos.branch);
            let e = self.edge_range(slot).start + self.slot_best[slot] as usize;
            states[p] = self.target(e);
            weight = self.dioid.times(&weight, self.edge_weight(e));
        }
        Some(Solution { weight, witness: self.witness_of(&states) })
    }

    /// Weight of the solution whose witness is `witness` (original tuple
    /// index per atom), folded in stage order.
    pub fn solution_weight(&self, witness: &[u32]) -> Result<D::Weight, Error> {
        let bad = || Error::Data(String::from("witness is not a solution of this instance"));
        if witness.len() != self.num_atoms() || self.is_empty() {
            return Err(bad());
        }
        let mut states = vec![0u32; self.positions.len()];
        let mut weight = self.dioid.one();
        for (p, pos) in self.positions.iter().enumerate() {
            let x = pos.parent.map_or(Self::SOURCE, |q| states[q]);
            let edges = self.edge_range(self.slot(x, pos.branch));
            let e = match pos.atom {
                Some(a) => {
                    let row = self.origin[a].iter().position(|&o| o == witness[a]).ok_or_else(bad)?;
                    let s = self.row_state(a, row).ok_or_else(bad)?;
                    edges.clone().find(|&e| self.target(e) == s).ok_or_else(bad)?
                }
                None => {
                    if edges.len() != 1 {
                        return Err(bad());
                    }
                    edges.start
                }
            };
            states[p] = self.target(e);
            weight = self.dioid.times(&weight, self.edge_weight(e));
        }
        Ok(weight)
    }

    /// Writes `stage <id> kind=<k> parent=<p>` and `state <id> pi1=<w>`
    /// lines.
    pub fn dump(&self, out: &mut dyn Write) -> fmt::Result {
        for (id, st) in self.stages.iter().enumerate() {
            match st.parent {
                Some(p) => writeln!(out, "stage {id} kind={} parent={p}", st.kind.label())?,
                None => writeln!(out, "stage {id} kind={} parent=-", st.kind.label())?,
            }
            for s in st.states.clone() {
                write!(out, "state {s} pi1=")?;
                self.dioid.write_weight(&self.pi1[s as usize], out)?;
                out.write_char('\n')?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::dioid::{BoolInverted, MinSum};
    use crate::relational::{build_join_tree, materialize_atoms, Database, QuerySpec, Relation};

    pub(crate) fn running_example() -> (QuerySpec, Database) {
        let q = QuerySpec::new(&[("R1", &["a"][..]), ("R2", &["b"][..]), ("R3", &["c"][..])], None).unwrap();
        let mut db = Database::new();
        for (name, vals) in [("R1", [1u64, 2, 3]), ("R2", [10, 20, 30]), ("R3", [100, 200, 300])] {
            let mut r = Relation::new(name, 1);
            for v in vals {
                r.push(&[v], v as f64);
            }
            db.insert(r).unwrap();
        }
        (q, db)
    }

    fn instance(q: &QuerySpec, db: &Database) -> TdpInstance<MinSum> {
        let tables = materialize_atoms(q, db, &MinSum).unwrap();
        TdpInstance::new(&build_join_tree(q).unwrap(), &tables, &MinSum).unwrap()
    }

    #[test]
    fn running_example_pi() {
        let (q, db) = running_example();
        let inst = instance(&q, &db);
        // source, R1, C12, R2, C23, R3, terminal
        let kinds: Vec<StageKind> = inst.stages().iter().map(|s| s.kind).collect();
        use StageKind::*;
        assert_eq!(kinds, [Source, Relational, Connector, Relational, Connector, Relational, Terminal]);
        assert_eq!(inst.best_weight(), Some(&111.0));
        // π₁ of R1 row "2" excludes its own weight; R2 row "10" likewise.
        assert_eq!(*inst.pi1(inst.row_state(0, 1).unwrap()), 110.0);
        assert_eq!(*inst.pi1(inst.row_state(1, 0).unwrap()), 100.0);
        let top = inst.top1().unwrap();
        assert_eq!(top.weight, 111.0);
        assert_eq!(top.witness, [0, 0, 0]);
        assert_eq!(inst.solution_weight(&[2, 1, 0]).unwrap(), 123.0);
        // 3 source edges, 3 into each connector and out of it twice, 3 to the terminal.
        assert_eq!(inst.num_edges(), 3 + 3 + 3 + 3 + 3 + 3);
        let mut s = String::new();
        inst.dump(&mut s).unwrap();
        assert!(s.starts_with("stage 0 kind=source parent=-\nstate 0 pi1=111.000000\n"));
    }

    #[test]
    fn pruning_removes_dangling() {
        let q = QuerySpec::path(2);
        let mut db = Database::new();
        let mut r1 = Relation::new("R1", 2);
        r1.push(&[1, 5], 1.0);
        r1.push(&[2, 6], 1.0);
        let mut r2 = Relation::new("R2", 2);
        r2.push(&[5, 9], 2.0);
        r2.push(&[7, 9], 2.0);
        db.insert(r1).unwrap();
        db.insert(r2).unwrap();
        let inst = instance(&q, &db);
        assert_eq!(inst.survivors(), [vec![true, false], vec![true, false]]);
        assert!(inst.solution_weight(&[1, 0]).is_err());
        assert_eq!(inst.solution_weight(&[0, 0]).unwrap(), 3.0);
    }

    #[test]
    fn empty_join() {
        let q = QuerySpec::path(2);
        let mut db = Database::new();
        let mut r1 = Relation::new("R1", 2);
        r1.push(&[1, 5], 1.0);
        let mut r2 = Relation::new("R2", 2);
        r2.push(&[6, 9], 2.0);
        db.insert(r1).unwrap();
        db.insert(r2).unwrap();
        let inst = instance(&q, &db);
        assert!(inst.is_empty());
        assert!(inst.top1().is_none());
    }

    #[test]
    fn star_stage_order() {
        let q = QuerySpec::star(3);
        let mut db = Database::new();
        for i in 1..=3 {
            let mut r = Relation::new(alloc::format!("R{i}"), 2);
            r.push(&[1, i], 1.0);
            db.insert(r).unwrap();
        }
        let tables = materialize_atoms(&q, &db, &BoolInverted).unwrap();
        let inst = TdpInstance::new(&build_join_tree(&q).unwrap(), &tables, &BoolInverted).unwrap();
        // source, R1, two connectors, R2, R3, two terminals
        assert_eq!(inst.stages().len(), 8);
        assert_eq!(inst.stages()[1].children, [2, 3]);
        assert!(!inst.is_path());
        assert!(inst.in_subtree(3, 1) && !inst.in_subtree(3, 2));
    }
}
