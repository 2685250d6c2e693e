//! Any-k by memoized recursion over ranked suffixes.
//!
//! For each state and branch the enumerator keeps the ranked list of
//! solutions of that branch's subtree computed so far, plus a heap of
//! pending alternatives.  The `j`-th solution of a branch is a choice
//! edge plus a rank into the target state's own list, so suffixes are
//! shared by every prefix that reaches the same state.  States with two or
//! more branches combine their branch lists by ranking rank vectors.
//!
//! The `j`-th entry of a list is only peeked when produced; it is popped
//! (and replaced by its successor) when entry `j + 1` is first asked for.
//! Requests that depend on deeper lists are resolved with an explicit work
//! stack instead of native recursion.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use hashbrown::HashMap;

use crate::counters::Counters;
use crate::dioid::SelectiveDioid;
use crate::dp::{TdpInstance, NONE};
use crate::enumerate::{RankedEnumerator, Solution};
use crate::heap::Heap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Node {
    /// The ranked solutions of one `(state, branch)` slot.
    Slot(u32),
    /// The ranked solutions of a state with several branches.
    Comb(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Full {
    Terminal,
    Node(Node),
}

#[derive(Debug, Clone)]
struct SlotSol<W> {
    local: u32,
    child: u32,
    weight: W,
}

#[derive(Debug, Clone)]
struct SlotStore<W> {
    sols: Vec<SlotSol<W>>,
    pending: Option<Heap<SlotSol<W>>>,
    done: bool,
}

impl<W> Default for SlotStore<W> {
    fn default() -> Self {
        Self { sols: Vec::new(), pending: None, done: false }
    }
}

#[derive(Debug, Clone)]
struct CombSol<W> {
    ranks: Vec<u32>,
    /// Lowest branch index a successor may increment.
    last: u32,
    weight: W,
    seq: u64,
}

#[derive(Debug, Clone)]
struct CombStore<W> {
    sols: Vec<CombSol<W>>,
    pending: Option<Heap<CombSol<W>>>,
    done: bool,
}

/// Recursive any-k enumerator.
pub struct RecEnumerator<'a, D: SelectiveDioid> {
    inst: &'a TdpInstance<D>,
    slots: Vec<SlotStore<D::Weight>>,
    combs: HashMap<u32, CombStore<D::Weight>>,
    emitted: u32,
    seq: u64,
    live: u64,
    counters: Counters,
    stack: Vec<(Node, u32)>,
}

fn slot_less<D: SelectiveDioid>(d: &D) -> impl FnMut(&SlotSol<D::Weight>, &SlotSol<D::Weight>) -> bool + '_ {
    move |a, b| match d.cmp(&a.weight, &b.weight) {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => a.local < b.local,
    }
}

fn comb_less<D: SelectiveDioid>(d: &D) -> impl FnMut(&CombSol<D::Weight>, &CombSol<D::Weight>) -> bool + '_ {
    move |a, b| match d.cmp(&a.weight, &b.weight) {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => a.seq < b.seq,
    }
}

impl<'a, D: SelectiveDioid> RecEnumerator<'a, D> {
    pub fn new(inst: &'a TdpInstance<D>) -> Self {
        Self {
            inst,
            slots: vec![SlotStore::default(); inst.num_slots()],
            combs: HashMap::new(),
            emitted: 0,
            seq: 0,
            live: 0,
            counters: Counters::default(),
            stack: Vec::new(),
        }
    }

    fn full(&self, state: u32) -> Full {
        let slots = self.inst.slots_of(state);
        match slots.len() {
            0 => Full::Terminal,
            1 => Full::Node(Node::Slot(slots.start as u32)),
            _ => Full::Node(Node::Comb(state)),
        }
    }

    /// `Some(true)` if rank `r` of `n` exists, `Some(false)` if it is known
    /// not to, `None` if it has not been computed yet.
    fn status(&self, n: Node, r: u32) -> Option<bool> {
        let (len, done) = match n {
            Node::Slot(s) => {
                let st = &self.slots[s as usize];
                (st.sols.len(), st.done)
            }
            Node::Comb(s) => match self.combs.get(&s) {
                Some(c) => (c.sols.len(), c.done),
                None => (0, false),
            },
        };
        if (r as usize) < len {
            Some(true)
        } else if done {
            Some(false)
        } else {
            None
        }
    }

    fn full_status(&self, f: Full, r: u32) -> Option<bool> {
        match f {
            Full::Terminal => Some(r == 0),
            Full::Node(n) => self.status(n, r),
        }
    }

    fn full_weight(&self, f: Full, r: u32) -> D::Weight {
        match f {
            Full::Terminal => self.inst.dioid().one(),
            Full::Node(Node::Slot(s)) => self.slots[s as usize].sols[r as usize].weight.clone(),
            Full::Node(Node::Comb(s)) => self.combs[&s].sols[r as usize].weight.clone(),
        }
    }

    /// Makes sure rank `r` of `n` is decided; returns whether it exists.
    fn ensure(&mut self, n: Node, r: u32) -> bool {
        self.stack.clear();
        self.stack.push((n, r));
        while let Some(&(m, k)) = self.stack.last() {
            if self.status(m, k).is_some() {
                self.stack.pop();
                continue;
            }
            match self.next_dep(m) {
                Some(dep) => self.stack.push(dep),
                None => self.advance(m),
            }
        }
        self.status(n, r) == Some(true)
    }

    /// The first undecided rank that computing the next entry of `n`
    /// needs, if any.
    fn next_dep(&self, n: Node) -> Option<(Node, u32)> {
        match n {
            Node::Slot(s) => {
                let last = self.slots[s as usize].sols.last()?;
                let e = self.inst.edge_range(s as usize).start + last.local as usize;
                let f = self.full(self.inst.target(e));
                match (f, self.full_status(f, last.child + 1)) {
                    (Full::Node(m), None) => Some((m, last.child + 1)),
                    _ => None,
                }
            }
            Node::Comb(state) => {
                let last = self.combs.get(&state)?.sols.last()?;
                let slots = self.inst.slots_of(state);
                for i in last.last as usize..slots.len() {
                    let b = Node::Slot((slots.start + i) as u32);
                    if self.status(b, last.ranks[i] + 1).is_none() {
                        return Some((b, last.ranks[i] + 1));
                    }
                }
                None
            }
        }
    }

    fn first_slot_sol(&self, slot: usize) -> SlotSol<D::Weight> {
        let local = self.inst.best_local(slot);
        let e = self.inst.edge_range(slot).start + local as usize;
        SlotSol { local, child: 0, weight: self.inst.choice(e).clone() }
    }

    /// Computes the next entry of `n`, all of whose dependencies are
    /// decided.
    fn advance(&mut self, n: Node) {
        let inst = self.inst;
        let d = inst.dioid();
        match n {
            Node::Slot(s) => {
                let slot = s as usize;
                let Some(last) = self.slots[slot].sols.last().cloned() else {
                    let first = self.first_slot_sol(slot);
                    self.slots[slot].sols.push(first);
                    return;
                };
                let base = inst.edge_range(slot).start;
                let e = base + last.local as usize;
                let f = self.full(inst.target(e));
                let next = (self.full_status(f, last.child + 1) == Some(true)).then(|| SlotSol {
                    local: last.local,
                    child: last.child + 1,
                    weight: d.times(inst.edge_weight(e), &self.full_weight(f, last.child + 1)),
                });
                if inst.degree(slot) == 1 {
                    match next {
                        Some(sol) => self.slots[slot].sols.push(sol),
                        None => self.slots[slot].done = true,
                    }
                    return;
                }
                let c = &mut self.counters;
                let store = &mut self.slots[slot];
                let mut less = slot_less(d);
                let heap = store.pending.get_or_insert_with(|| {
                    let deg = inst.degree(slot) as u32;
                    let init: Vec<SlotSol<D::Weight>> = (0..deg)
                        .map(|l| SlotSol { local: l, child: 0, weight: inst.choice(base + l as usize).clone() })
                        .collect();
                    c.pq_push += u64::from(deg);
                    self.live += u64::from(deg);
                    Heap::from_vec(init, &mut less, &mut c.comparisons)
                });
                let popped = heap.pop(&mut less, &mut c.comparisons);
                debug_assert_eq!(popped.as_ref().map(|p| p.local), Some(last.local));
                c.pq_pop += 1;
                self.live -= 1;
                if let Some(sol) = next {
                    heap.push(sol, &mut less, &mut c.comparisons);
                    c.pq_push += 1;
                    self.live += 1;
                }
                match heap.peek() {
                    Some(top) => {
                        let top = top.clone();
                        store.sols.push(top);
                    }
                    None => store.done = true,
                }
                c.set_live(self.live);
            }
            Node::Comb(state) => {
                let slots = inst.slots_of(state);
                if !self.combs.contains_key(&state) {
                    let mut weight = d.one();
                    for slot in slots.clone() {
                        if self.slots[slot].sols.is_empty() {
                            let first = self.first_slot_sol(slot);
                            self.slots[slot].sols.push(first);
                        }
                        weight = d.times(&weight, &self.slots[slot].sols[0].weight);
                    }
                    let first = CombSol { ranks: vec![0; slots.len()], last: 0, weight, seq: self.seq };
                    self.seq += 1;
                    self.combs.insert(state, CombStore { sols: vec![first], pending: None, done: false });
                    return;
                }
                let last = self.combs[&state].sols.last().cloned().unwrap();
                let mut fresh = Vec::new();
                for i in last.last as usize..slots.len() {
                    let r = last.ranks[i] + 1;
                    if self.status(Node::Slot((slots.start + i) as u32), r) != Some(true) {
                        continue;
                    }
                    let mut ranks = last.ranks.clone();
                    ranks[i] = r;
                    let mut weight = d.one();
                    for (j, slot) in slots.clone().enumerate() {
                        weight = d.times(&weight, &self.slots[slot].sols[ranks[j] as usize].weight);
                    }
                    fresh.push(CombSol { ranks, last: i as u32, weight, seq: self.seq });
                    self.seq += 1;
                }
                let c = &mut self.counters;
                let store = self.combs.get_mut(&state).unwrap();
                let mut less = comb_less(d);
                let heap = store.pending.get_or_insert_with(|| {
                    c.pq_push += 1;
                    self.live += 1;
                    Heap::from_vec(vec![last.clone()], &mut less, &mut c.comparisons)
                });
                heap.pop(&mut less, &mut c.comparisons);
                c.pq_pop += 1;
                self.live -= 1;
                for sol in fresh {
                    heap.push(sol, &mut less, &mut c.comparisons);
                    c.pq_push += 1;
                    self.live += 1;
                }
                match heap.peek() {
                    Some(top) => {
                        let top = top.clone();
                        store.sols.push(top);
                    }
                    None => store.done = true,
                }
                c.set_live(self.live);
            }
        }
    }

    /// Follows rank pointers from the root.  Entries at rank 0 below the
    /// first solution are created on the way; they need no heap work.
    fn witness(&mut self, rank: u32) -> Vec<u32> {
        let inst = self.inst;
        let mut w = vec![0u32; inst.num_atoms()];
        let root = inst.slot(TdpInstance::<D>::SOURCE, 0) as u32;
        let mut stack = vec![(Node::Slot(root), rank)];
        while let Some((n, r)) = stack.pop() {
            let exists = self.ensure(n, r);
            debug_assert!(exists);
            match n {
                Node::Slot(s) => {
                    let sol = &self.slots[s as usize].sols[r as usize];
                    let t = inst.target(inst.edge_range(s as usize).start + sol.local as usize);
                    let row = inst.state_row(t);
                    if row != NONE {
                        let atom = inst.stages()[inst.state_stage(t)].atom.unwrap();
                        w[atom] = inst.origin(atom, row);
                    }
                    if let Full::Node(m) = self.full(t) {
                        stack.push((m, sol.child));
                    }
                }
                Node::Comb(state) => {
                    let sol = &self.combs[&state].sols[r as usize];
                    for (i, slot) in inst.slots_of(state).enumerate() {
                        stack.push((Node::Slot(slot as u32), sol.ranks[i]));
                    }
                }
            }
        }
        w
    }
}

impl<D: SelectiveDioid> RankedEnumerator for RecEnumerator<'_, D> {
    type Weight = D::Weight;

    fn next_solution(&mut self) -> Option<Solution<D::Weight>> {
        if self.inst.is_empty() {
            return None;
        }
        let root = self.inst.slot(TdpInstance::<D>::SOURCE, 0);
        let k = self.emitted;
        if !self.ensure(Node::Slot(root as u32), k) {
            return None;
        }
        self.emitted += 1;
        self.counters.results += 1;
        let weight = self.slots[root].sols[k as usize].weight.clone();
        Some(Solution { weight, witness: self.witness(k) })
    }

    fn counters(&self) -> &Counters {
        &self.counters
    }
}
