//! Any-k by partitioning the solution space (Lawler-style).
//!
//! Each candidate stands for a subspace: a fixed prefix of states in stage
//! order, a restricted choice at one stage, and free choices after it.
//! Popping the best candidate yields its best solution; the subspace minus
//! that solution is split into new candidates, one group per stage from
//! the candidate's stage onward.  The [`Strategy`] decides which
//! alternative choices each split produces.
//!
//! Prefixes are shared: they live in an append-only arena of
//! `(state, decision edge, previous node)` links.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::counters::Counters;
use crate::dioid::SelectiveDioid;
use crate::dp::{TdpInstance, NONE};
use crate::enumerate::{Options, RankedEnumerator, Solution};
use crate::heap::{heapify, Heap};

/// How the alternatives to a choice are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Choice lists sorted on first use; the successor is the next in order.
    Eager,
    /// A heap per choice list, popped into a sorted prefix as needed.
    Lazy,
    /// Every alternative to the best choice is inserted at once.
    All,
    /// Choice lists heapified once; successors are found among heap
    /// children and siblings.  The heap is never popped.
    Take2,
}

#[derive(Debug, Clone)]
enum Choices {
    Unbuilt,
    Sorted(Vec<u32>),
    Lazy { heap: Heap<u32>, sorted: Vec<u32> },
    Take2(Vec<u32>),
}

#[derive(Debug, Clone, Copy)]
struct Node {
    state: u32,
    edge: u32,
    prev: u32,
}

#[derive(Debug, Clone)]
struct Candidate<W> {
    /// Arena node holding the state at position `pos - 1`.
    prefix: u32,
    pos: u32,
    /// Strategy-specific handle of the choice at `pos`.
    handle: u32,
    prefix_weight: W,
    choice_weight: W,
    key: W,
    seq: u64,
}

/// Any-k enumerator over an evaluated instance.
pub struct PartEnumerator<'a, D: SelectiveDioid> {
    inst: &'a TdpInstance<D>,
    strategy: Strategy,
    choices: Vec<Choices>,
    cand: Heap<Candidate<D::Weight>>,
    nodes: Vec<Node>,
    seq: u64,
    refold: bool,
    counters: Counters,
    states: Vec<u32>,
    edges: Vec<usize>,
    handles: Vec<u32>,
    slots: Vec<usize>,
    succ: Vec<u32>,
}

fn cand_less<D: SelectiveDioid>(d: &D) -> impl FnMut(&Candidate<D::Weight>, &Candidate<D::Weight>) -> bool + '_ {
    move |a, b| match d.cmp(&a.key, &b.key) {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => a.seq < b.seq,
    }
}

impl<'a, D: SelectiveDioid> PartEnumerator<'a, D> {
    pub fn new(inst: &'a TdpInstance<D>, strategy: Strategy) -> Self {
        Self::with_options(inst, strategy, Options::default())
    }

    pub fn with_options(inst: &'a TdpInstance<D>, strategy: Strategy, options: Options) -> Self {
        let p = inst.positions().len();
        let mut e = Self {
            inst,
            strategy,
            choices: vec![Choices::Unbuilt; inst.num_slots()],
            cand: Heap::new(),
            nodes: Vec::new(),
            seq: 0,
            refold: !inst.is_path() && !inst.dioid().has_inverse(),
            counters: Counters::default(),
            states: vec![0; p],
            edges: vec![0; p],
            handles: vec![0; p],
            slots: vec![0; p],
            succ: Vec::new(),
        };
        if inst.is_empty() {
            return e;
        }
        if options.eager_init && strategy != Strategy::All {
            for slot in 0..inst.num_slots() {
                e.ensure_built(slot);
            }
        }
        let slot = inst.slot(TdpInstance::<D>::SOURCE, 0);
        let handle = e.top_handle(slot);
        let seed = Candidate {
            prefix: NONE,
            pos: 0,
            handle,
            prefix_weight: inst.dioid().one(),
            choice_weight: inst.branch_value(TdpInstance::<D>::SOURCE, 0).clone(),
            key: inst.best_weight().unwrap().clone(),
            seq: 0,
        };
        e.seq = 1;
        let d = inst.dioid();
        e.cand.push(seed, &mut cand_less(d), &mut e.counters.comparisons);
        e.counters.pq_push += 1;
        e.counters.set_live(1);
        e
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    /// `(prefix weight, choice weight)` of every pending candidate, in
    /// heap array order.
    pub fn pending(&self) -> Vec<(D::Weight, D::Weight)> {
        self.cand.iter().map(|c| (c.prefix_weight.clone(), c.choice_weight.clone())).collect()
    }

    fn top_handle(&self, slot: usize) -> u32 {
        match self.strategy {
            Strategy::All => self.inst.best_local(slot),
            _ => 0,
        }
    }

    fn local_of(&self, slot: usize, handle: u32) -> u32 {
        if self.strategy == Strategy::All {
            return handle;
        }
        match &self.choices[slot] {
            Choices::Unbuilt => {
                debug_assert_eq!(handle, 0);
                self.inst.best_local(slot)
            }
            Choices::Sorted(order) => order[handle as usize],
            Choices::Lazy { sorted, .. } => sorted[handle as usize],
            Choices::Take2(heap) => heap[handle as usize],
        }
    }

    fn ensure_built(&mut self, slot: usize) {
        if !matches!(self.choices[slot], Choices::Unbuilt) || self.inst.degree(slot) <= 1 {
            return;
        }
        let inst = self.inst;
        let base = inst.edge_range(slot).start;
        let deg = inst.degree(slot) as u32;
        let mut less = |a: &u32, b: &u32| inst.choice_less(base, *a, *b);
        let c = &mut self.counters;
        self.choices[slot] = match self.strategy {
            Strategy::All => return,
            Strategy::Eager => {
                let mut order: Vec<u32> = (0..deg).collect();
                let mut n = 0u64;
                order.sort_by(|a, b| {
                    n += 1;
                    if less(a, b) {
                        Ordering::Less
                    } else {
                        Ordering::Greater
                    }
                });
                c.comparisons += n;
                Choices::Sorted(order)
            }
            Strategy::Lazy => {
                let mut heap = Heap::from_vec((0..deg).collect(), &mut less, &mut c.comparisons);
                c.pq_push += u64::from(deg);
                let mut sorted = Vec::with_capacity(2);
                for _ in 0..2 {
                    if let Some(x) = heap.pop(&mut less, &mut c.comparisons) {
                        c.pq_pop += 1;
                        sorted.push(x);
                    }
                }
                Choices::Lazy { heap, sorted }
            }
            Strategy::Take2 => {
                let mut arr: Vec<u32> = (0..deg).collect();
                heapify(&mut arr, &mut less, &mut c.comparisons);
                c.pq_push += u64::from(deg);
                Choices::Take2(arr)
            }
        };
    }

    /// Handles of the alternatives to `handle` in `slot`, into `self.succ`.
    fn successors(&mut self, slot: usize, handle: u32) {
        self.succ.clear();
        let deg = self.inst.degree(slot) as u32;
        if deg <= 1 {
            return;
        }
        if self.strategy == Strategy::All {
            let best = self.inst.best_local(slot);
            if handle == best {
                self.succ.extend((0..deg).filter(|&l| l != best));
            }
            return;
        }
        self.ensure_built(slot);
        let inst = self.inst;
        let base = inst.edge_range(slot).start;
        match &mut self.choices[slot] {
            Choices::Sorted(_) => {
                if handle + 1 < deg {
                    self.succ.push(handle + 1);
                }
            }
            Choices::Lazy { heap, sorted } => {
                let next = handle as usize + 1;
                if next == sorted.len() {
                    let mut less = |a: &u32, b: &u32| inst.choice_less(base, *a, *b);
                    if let Some(x) = heap.pop(&mut less, &mut self.counters.comparisons) {
                        self.counters.pq_pop += 1;
                        self.counters.choice_pops += 1;
                        sorted.push(x);
                    }
                }
                if next < sorted.len() {
                    self.succ.push(next as u32);
                }
            }
            Choices::Take2(heap) => {
                // The heap read as a first-child / next-sibling tree: a
                // node leads to its better child, and the better child of
                // a pair also leads to its sibling.
                let mut n = 0u64;
                let mut better = |h: u32| -> Option<u32> {
                    let (a, b) = (2 * h + 1, 2 * h + 2);
                    if a >= deg {
                        None
                    } else if b < deg {
                        n += 1;
                        let (x, y) = (heap[a as usize], heap[b as usize]);
                        Some(if inst.choice_less(base, y, x) { b } else { a })
                    } else {
                        Some(a)
                    }
                };
                if let Some(c) = better(handle) {
                    self.succ.push(c);
                }
                if handle > 0 {
                    let sibling = if handle % 2 == 1 { handle + 1 } else { handle - 1 };
                    if sibling < deg && better((handle - 1) / 2) == Some(handle) {
                        self.succ.push(sibling);
                    }
                }
                self.counters.comparisons += n;
            }
            Choices::Unbuilt => unreachable!(),
        }
    }
}

impl<D: SelectiveDioid> RankedEnumerator for PartEnumerator<'_, D> {
    type Weight = D::Weight;

    fn next_solution(&mut self) -> Option<Solution<D::Weight>> {
        let inst = self.inst;
        let d = inst.dioid();
        let top = self.cand.pop(&mut cand_less(d), &mut self.counters.comparisons)?;
        self.counters.pq_pop += 1;
        let p_len = inst.positions().len();
        let r = top.pos as usize;

        // Shared prefix, then the best completion from position r on.
        let mut node = top.prefix;
        for p in (0..r).rev() {
            let n = self.nodes[node as usize];
            self.states[p] = n.state;
            self.edges[p] = n.edge as usize;
            node = n.prev;
        }
        for c in r..p_len {
            let pos = inst.positions()[c];
            let x = pos.parent.map_or(TdpInstance::<D>::SOURCE, |q| self.states[q]);
            let slot = inst.slot(x, pos.branch);
            let handle = if c == r { top.handle } else { self.top_handle(slot) };
            let e = inst.edge_range(slot).start + self.local_of(slot, handle) as usize;
            self.states[c] = inst.target(e);
            self.edges[c] = e;
            self.handles[c] = handle;
            self.slots[c] = slot;
        }
        let mut total = top.prefix_weight.clone();
        for c in r..p_len {
            total = d.times(&total, inst.edge_weight(self.edges[c]));
        }

        // Split the remaining subspace.
        let mut batch: Vec<Candidate<D::Weight>> = Vec::new();
        let mut pw = top.prefix_weight;
        let mut tail = top.prefix;
        let mut tail_pos = r;
        for c in r..p_len {
            self.successors(self.slots[c], self.handles[c]);
            if !self.succ.is_empty() {
                while tail_pos < c {
                    self.nodes.push(Node {
                        state: self.states[tail_pos],
                        edge: self.edges[tail_pos] as u32,
                        prev: tail,
                    });
                    tail = (self.nodes.len() - 1) as u32;
                    tail_pos += 1;
                }
                let rest = if inst.is_path() {
                    pw.clone()
                } else if self.refold {
                    let mut acc = d.one();
                    for q in 0..p_len {
                        if q != c && !inst.in_subtree(q, c) {
                            acc = d.times(&acc, inst.edge_weight(self.edges[q]));
                        }
                    }
                    acc
                } else {
                    let inv = d.invert(inst.choice(self.edges[c])).expect("invertible dioid");
                    d.times(&total, &inv)
                };
                let base = inst.edge_range(self.slots[c]).start;
                for i in 0..self.succ.len() {
                    let e = base + self.local_of(self.slots[c], self.succ[i]) as usize;
                    let cw = inst.choice(e).clone();
                    batch.push(Candidate {
                        prefix: tail,
                        pos: c as u32,
                        handle: self.succ[i],
                        prefix_weight: pw.clone(),
                        key: d.times(&rest, &cw),
                        choice_weight: cw,
                        seq: self.seq,
                    });
                    self.seq += 1;
                }
            }
            pw = d.times(&pw, inst.edge_weight(self.edges[c]));
        }
        self.counters.pq_push += batch.len() as u64;
        self.cand.extend_bulk(batch, &mut cand_less(d), &mut self.counters.comparisons);
        self.counters.set_live(self.cand.len() as u64);
        self.counters.results += 1;
        Some(Solution { weight: total, witness: inst.witness_of(&self.states) })
    }

    fn counters(&self) -> &Counters {
        &self.counters
    }
}
