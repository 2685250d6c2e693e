//! Ranked enumeration over a union of DP instances, and the heavy/light
//! decomposition of simple cycles into such unions.
//!
//! A [`DecompositionPlan`] holds acyclic members built over materialized
//! bags.  Each bag row remembers which base tuples it was built from, so
//! member answers map back to witnesses of the original query.  The
//! [`UnionEnumerator`] merges the members' ranked streams with a queue
//! holding one entry per member.  When members may overlap, duplicates
//! arrive back to back (the dioid must break ties) and are dropped.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt::{self, Write};

use hashbrown::HashMap;

use crate::counters::Counters;
use crate::dioid::SelectiveDioid;
use crate::dp::TdpInstance;
use crate::enumerate::{any_k, Algorithm, BoxedEnumerator, Options, RankedEnumerator, Solution};
use crate::heap::Heap;
use crate::relational::{materialize_atoms, AtomTable, Database, JoinTree, QuerySpec};
use crate::Error;

/// Base tuples behind each row of one bag: `(base atom, tuple index)`
/// pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BagLineage {
    offsets: Vec<u32>,
    pairs: Vec<(u32, u32)>,
}

impl BagLineage {
    pub fn new() -> Self {
        Self { offsets: vec![0], pairs: Vec::new() }
    }

    /// Records the lineage of the next row.
    pub fn push(&mut self, pairs: &[(u32, u32)]) {
        self.pairs.extend_from_slice(pairs);
        self.offsets.push(self.pairs.len() as u32);
    }

    pub fn row(&self, r: usize) -> &[(u32, u32)] {
        &self.pairs[self.offsets[r] as usize..self.offsets[r + 1] as usize]
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// One acyclic member of a union.
#[derive(Debug, Clone)]
pub struct Member<D: SelectiveDioid> {
    pub instance: TdpInstance<D>,
    lineage: Vec<BagLineage>,
    bags: Vec<AtomTable<D::Weight>>,
    tree: JoinTree,
    /// Base atoms whose weights each bag carries.
    pub charges: Vec<Vec<usize>>,
    pub bag_sizes: Vec<usize>,
}

impl<D: SelectiveDioid> Member<D> {
    /// Builds a member from bags and their lineage.  A bag's row `r` must
    /// have `origin[r] == r`.
    pub fn new(bags: Vec<AtomTable<D::Weight>>, lineage: Vec<BagLineage>, dioid: &D) -> Result<Self, Error> {
        let sets: Vec<Vec<usize>> = bags.iter().map(|b| b.vars.clone()).collect();
        let tree = JoinTree::from_var_sets(&sets).ok_or_else(|| Error::Config("member bags are cyclic".into()))?;
        let instance = TdpInstance::new(&tree, &bags, dioid)?;
        let charges = lineage
            .iter()
            .map(|l| {
                let mut atoms: Vec<usize> = l.pairs.iter().map(|p| p.0 as usize).collect();
                atoms.sort_unstable();
                atoms.dedup();
                atoms
            })
            .collect();
        let bag_sizes = bags.iter().map(AtomTable::len).collect();
        Ok(Self { instance, lineage, bags, tree, charges, bag_sizes })
    }

    /// The bag tables and the join tree joining them.
    pub fn bags(&self) -> (&[AtomTable<D::Weight>], &JoinTree) {
        (&self.bags, &self.tree)
    }

    /// Maps a member witness (one bag row per bag) to base tuple indices.
    pub fn base_witness(&self, witness: &[u32], num_atoms: usize) -> Vec<u32> {
        let mut out = vec![u32::MAX; num_atoms];
        for (bag, &row) in witness.iter().enumerate() {
            for &(atom, tuple) in self.lineage[bag].row(row as usize) {
                out[atom as usize] = tuple;
            }
        }
        out
    }
}

/// A union of acyclic members answering one query.
#[derive(Debug, Clone)]
pub struct DecompositionPlan<D: SelectiveDioid> {
    pub members: Vec<Member<D>>,
    pub num_atoms: usize,
    /// No answer is produced by two members.
    pub disjoint: bool,
    /// Heavy threshold of each base atom (empty for hand-built plans).
    pub thresholds: Vec<u64>,
    /// Bag materialization and member construction work.
    pub counters: Counters,
    dioid: D,
}

impl<D: SelectiveDioid> DecompositionPlan<D> {
    pub fn new(members: Vec<Member<D>>, num_atoms: usize, disjoint: bool, dioid: D) -> Self {
        let mut counters = Counters::default();
        for m in &members {
            counters.absorb(m.instance.build_counters());
        }
        Self { members, num_atoms, disjoint, thresholds: Vec::new(), counters, dioid }
    }

    pub fn dioid(&self) -> &D {
        &self.dioid
    }

    /// Member count, bag sizes and heavy thresholds, one fact per line.
    pub fn describe(&self, out: &mut dyn Write) -> fmt::Result {
        writeln!(out, "members {}", self.members.len())?;
        for (a, t) in self.thresholds.iter().enumerate() {
            writeln!(out, "threshold atom={a} value={t}")?;
        }
        for (i, m) in self.members.iter().enumerate() {
            write!(out, "member {i} bags=")?;
            for (j, s) in m.bag_sizes.iter().enumerate() {
                if j > 0 {
                    out.write_char(',')?;
                }
                write!(out, "{s}")?;
            }
            out.write_char('\n')?;
        }
        Ok(())
    }
}

/// Smallest `t ≥ 1` with `t^ℓ ≥ n²`, i.e. `⌈n^(2/ℓ)⌉` in integers.
pub fn heavy_threshold(n: usize, len: usize) -> u64 {
    let target = (n as u128) * (n as u128);
    let reaches = |t: u64| {
        let mut acc: u128 = 1;
        for _ in 0..len {
            acc = acc.saturating_mul(u128::from(t));
            if acc >= target {
                return true;
            }
        }
        acc >= target
    };
    let (mut lo, mut hi) = (1u64, (n as u64).max(1));
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if reaches(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo
}

/// Checks that `q` is `R₁(v₁,v₂), …, Rℓ(vℓ,v₁)` with distinct `vᵢ`, and
/// returns `[v₁, …, vℓ]`.
fn cycle_vars(q: &QuerySpec) -> Result<Vec<usize>, Error> {
    let atoms = q.atoms();
    let l = atoms.len();
    let bad = || Error::Query(String::from("expected a simple cycle R1(v1,v2), ..., Rl(vl,v1) with l >= 3"));
    if l < 3 || atoms.iter().any(|a| a.vars.len() != 2) {
        return Err(bad());
    }
    let vars: Vec<usize> = atoms.iter().map(|a| a.vars[0]).collect();
    for i in 0..l {
        if atoms[i].vars[1] != vars[(i + 1) % l] || vars[..i].contains(&vars[i]) {
            return Err(bad());
        }
    }
    Ok(vars)
}

struct BagBuilder<W> {
    table: AtomTable<W>,
    lineage: BagLineage,
}

impl<W> BagBuilder<W> {
    fn new(vars: Vec<usize>) -> Self {
        Self { table: AtomTable::new(vars), lineage: BagLineage::new() }
    }

    fn push(&mut self, row: &[u64], weight: W, lineage: &[(u32, u32)]) {
        let r = self.table.len() as u32;
        self.table.push(row, weight, r);
        self.lineage.push(lineage);
    }
}

/// Splits an ℓ-cycle into ℓ members with one heavy atom each (atoms
/// before it restricted to light tuples) and one all-light member.
/// Heaviness is the frequency of a tuple's first value in its relation,
/// compared with [`heavy_threshold`].
pub fn decompose_simple_cycle<D: SelectiveDioid>(
    q: &QuerySpec,
    db: &Database,
    dioid: &D,
) -> Result<DecompositionPlan<D>, Error> {
    let xs = cycle_vars(q)?;
    let l = xs.len();
    let tables = materialize_atoms(q, db, dioid)?;
    let mut counters = Counters::default();

    let thresholds: Vec<u64> = tables.iter().map(|t| heavy_threshold(t.len(), l)).collect();
    let heavy: Vec<Vec<bool>> = tables
        .iter()
        .zip(&thresholds)
        .map(|(t, &thr)| {
            let mut freq: HashMap<u64, u64> = HashMap::new();
            for r in 0..t.len() {
                *freq.entry(t.row(r)[0]).or_default() += 1;
            }
            (0..t.len()).map(|r| freq[&t.row(r)[0]] >= thr).collect()
        })
        .collect();
    let origin = |a: usize, r: usize| (a as u32, tables[a].origin[r]);

    let mut members = Vec::with_capacity(l + 1);
    for h in 0..l {
        // Rows of atom j available in member h.
        let allowed = |j: usize, r: usize| match j.cmp(&h) {
            Ordering::Less => !heavy[j][r],
            Ordering::Equal => heavy[j][r],
            Ordering::Greater => true,
        };
        let at = |k: usize| (h + k) % l;
        let x = |k: usize| xs[at(k)];

        let th = &tables[h];
        let mut heavy_values: Vec<u64> = Vec::new();
        let mut index: HashMap<(u64, u64), Vec<u32>> = HashMap::new();
        for r in (0..th.len()).filter(|&r| allowed(h, r)) {
            let row = th.row(r);
            index.entry((row[0], row[1])).or_default().push(r as u32);
            if !heavy_values.contains(&row[0]) {
                heavy_values.push(row[0]);
            }
        }
        heavy_values.sort_unstable();

        let mut bags: Vec<BagBuilder<D::Weight>> = Vec::new();
        // (X0, X1, X2): heavy tuples of atom h joined with atom h+1.
        let mut first = BagBuilder::new(vec![x(0), x(1), x(2)]);
        let t1 = &tables[at(1)];
        for &a in &heavy_values {
            for r in (0..t1.len()).filter(|&r| allowed(at(1), r)) {
                counters.probes += 1;
                let row = t1.row(r);
                if let Some(us) = index.get(&(a, row[0])) {
                    for &u in us {
                        let w = dioid.times(&th.weights[u as usize], &t1.weights[r]);
                        first.push(&[a, row[0], row[1]], w, &[origin(h, u as usize), origin(at(1), r)]);
                    }
                }
            }
        }
        bags.push(first);
        // (X0, Xk, Xk+1) = heavy values × atom h+k.
        for k in 2..l - 1 {
            let tk = &tables[at(k)];
            let mut bag = BagBuilder::new(vec![x(0), x(k), x(k + 1)]);
            for &a in &heavy_values {
                for r in (0..tk.len()).filter(|&r| allowed(at(k), r)) {
                    counters.probes += 1;
                    let row = tk.row(r);
                    bag.push(&[a, row[0], row[1]], tk.weights[r].clone(), &[origin(at(k), r)]);
                }
            }
            bags.push(bag);
        }
        // (Xℓ-1, X0) restricted to heavy X0.
        let tl = &tables[at(l - 1)];
        let mut last = BagBuilder::new(vec![x(l - 1), x(0)]);
        for r in (0..tl.len()).filter(|&r| allowed(at(l - 1), r)) {
            counters.probes += 1;
            let row = tl.row(r);
            if heavy_values.binary_search(&row[1]).is_ok() {
                last.push(row, tl.weights[r].clone(), &[origin(at(l - 1), r)]);
            }
        }
        bags.push(last);
        members.push(finish_member(bags, dioid, &mut counters)?);
    }

    // All-light member: two chain joins meeting at X0 and Xc.
    let c = l.div_ceil(2);
    let chain = |from: usize, to: usize, counters: &mut Counters| {
        let mut vars: Vec<usize> = (from..to).map(|j| xs[j]).collect();
        vars.push(xs[to % l]);
        let mut index: Vec<HashMap<u64, Vec<u32>>> = vec![HashMap::new(); l];
        for j in from + 1..to {
            for r in (0..tables[j].len()).filter(|&r| !heavy[j][r]) {
                index[j].entry(tables[j].row(r)[0]).or_default().push(r as u32);
            }
        }
        let mut bag = BagBuilder::new(vars);
        let mut values = Vec::with_capacity(to - from + 1);
        let mut lineage = Vec::with_capacity(to - from);
        let mut rows: Vec<u32> = Vec::with_capacity(to - from);
        // Depth-first extension of partial chains.
        for r0 in (0..tables[from].len()).filter(|&r| !heavy[from][r]) {
            rows.clear();
            rows.push(r0 as u32);
            let mut cursor: Vec<usize> = vec![0];
            loop {
                let depth = rows.len();
                if depth == to - from {
                    values.clear();
                    lineage.clear();
                    let mut w = dioid.one();
                    for (k, &r) in rows.iter().enumerate() {
                        let row = tables[from + k].row(r as usize);
                        if k == 0 {
                            values.push(row[0]);
                        }
                        values.push(row[1]);
                        w = dioid.times(&w, &tables[from + k].weights[r as usize]);
                        lineage.push(origin(from + k, r as usize));
                    }
                    bag.push(&values, w, &lineage);
                    rows.pop();
                    cursor.pop();
                    if rows.is_empty() {
                        break;
                    }
                    continue;
                }
                let j = from + depth;
                let prev = tables[j - 1].row(*rows.last().unwrap() as usize)[1];
                let next = index[j].get(&prev).and_then(|v| v.get(*cursor.last().unwrap()));
                counters.probes += 1;
                match next {
                    Some(&r) => {
                        *cursor.last_mut().unwrap() += 1;
                        rows.push(r);
                        cursor.push(0);
                    }
                    None => {
                        rows.pop();
                        cursor.pop();
                        if rows.is_empty() {
                            break;
                        }
                    }
                }
            }
        }
        bag
    };
    let left = chain(0, c, &mut counters);
    let right = chain(c, l, &mut counters);
    members.push(finish_member(vec![left, right], dioid, &mut counters)?);

    let mut plan = DecompositionPlan::new(members, l, true, dioid.clone());
    plan.thresholds = thresholds;
    plan.counters.absorb(&counters);
    Ok(plan)
}

fn finish_member<D: SelectiveDioid>(
    bags: Vec<BagBuilder<D::Weight>>,
    dioid: &D,
    counters: &mut Counters,
) -> Result<Member<D>, Error> {
    let (tables, lineage): (Vec<_>, Vec<_>) = bags.into_iter().map(|b| (b.table, b.lineage)).unzip();
    counters.tuples_materialized += tables.iter().map(|t| t.len() as u64).sum::<u64>();
    Member::new(tables, lineage, dioid)
}

struct Entry<W> {
    weight: W,
    witness: Vec<u32>,
    member: usize,
}

/// Merges the ranked streams of a plan's members.
pub struct UnionEnumerator<'a, D: SelectiveDioid> {
    plan: &'a DecompositionPlan<D>,
    inner: Vec<BoxedEnumerator<'a, D::Weight>>,
    queue: Heap<Entry<D::Weight>>,
    dedup: bool,
    last: Option<Vec<u32>>,
    last_member: Option<usize>,
    suppressed: u64,
    max_suppressed_run: u64,
    own: Counters,
    total: Counters,
}

fn entry_less<D: SelectiveDioid>(d: &D) -> impl FnMut(&Entry<D::Weight>, &Entry<D::Weight>) -> bool + '_ {
    move |a, b| match d.cmp(&a.weight, &b.weight) {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => a.member < b.member,
    }
}

impl<'a, D: SelectiveDioid + 'a> UnionEnumerator<'a, D> {
    /// Fails when the plan may produce an answer twice and the dioid does
    /// not break ties, since duplicates would not arrive consecutively.
    pub fn new(plan: &'a DecompositionPlan<D>, algorithm: Algorithm, options: Options) -> Result<Self, Error> {
        if !plan.disjoint && !plan.dioid.breaks_ties() {
            return Err(Error::Config(String::from(
                "overlapping union members need a tie-breaking dioid (use --tiebreak)",
            )));
        }
        let mut inner = Vec::with_capacity(plan.members.len());
        for m in &plan.members {
            inner.push(any_k(&m.instance, algorithm, options)?);
        }
        let mut e = Self {
            plan,
            inner,
            queue: Heap::new(),
            dedup: !plan.disjoint,
            last: None,
            last_member: None,
            suppressed: 0,
            max_suppressed_run: 0,
            own: Counters::default(),
            total: Counters::default(),
        };
        for i in 0..e.inner.len() {
            e.refill(i);
        }
        e.sum_counters();
        Ok(e)
    }

    fn refill(&mut self, member: usize) {
        if let Some(s) = self.inner[member].next_solution() {
            let witness = self.plan.members[member].base_witness(&s.witness, self.plan.num_atoms);
            let entry = Entry { weight: s.weight, witness, member };
            self.queue.push(entry, &mut entry_less(&self.plan.dioid), &mut self.own.comparisons);
            self.own.pq_push += 1;
            self.own.set_live(self.queue.len() as u64);
        }
    }

    fn sum_counters(&mut self) {
        let mut t = self.plan.counters.clone();
        t.absorb(&self.own);
        for e in &self.inner {
            let mut c = e.counters().clone();
            c.results = 0;
            t.absorb(&c);
        }
        t.results = self.own.results;
        self.total = t;
    }

    /// Member that produced the most recent answer.
    pub fn last_member(&self) -> Option<usize> {
        self.last_member
    }

    /// Duplicates dropped so far.
    pub fn suppressed(&self) -> u64 {
        self.suppressed
    }

    /// Largest number of duplicates dropped between two answers.
    pub fn max_suppressed_run(&self) -> u64 {
        self.max_suppressed_run
    }
}

impl<'a, D: SelectiveDioid + 'a> RankedEnumerator for UnionEnumerator<'a, D> {
    type Weight = D::Weight;

    fn next_solution(&mut self) -> Option<Solution<D::Weight>> {
        let mut run = 0u64;
        let out = loop {
            let Some(top) = self.queue.pop(&mut entry_less(&self.plan.dioid), &mut self.own.comparisons) else {
                break None;
            };
            self.own.pq_pop += 1;
            self.refill(top.member);
            if self.dedup && self.last.as_deref() == Some(&top.witness[..]) {
                self.suppressed += 1;
                run += 1;
                continue;
            }
            if self.dedup {
                self.last = Some(top.witness.clone());
            }
            self.last_member = Some(top.member);
            self.own.results += 1;
            break Some(Solution { weight: top.weight, witness: top.witness });
        };
        self.max_suppressed_run = self.max_suppressed_run.max(run);
        self.sum_counters();
        out
    }

    fn counters(&self) -> &Counters {
        &self.total
    }
}

/// Boxes a union enumerator.
pub fn union_enumerator<'a, D: SelectiveDioid + 'a>(
    plan: &'a DecompositionPlan<D>,
    algorithm: Algorithm,
    options: Options,
) -> Result<BoxedEnumerator<'a, D::Weight>, Error> {
    Ok(Box::new(UnionEnumerator::new(plan, algorithm, options)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use crate::batch::brute_force;
    use crate::dioid::{MinSum, TieBreak};
    use crate::enumerate::drain;
    use crate::relational::{worst_case_cycle, Relation};

    #[test]
    fn thresholds() {
        assert_eq!(heavy_threshold(100, 4), 10);
        assert_eq!(heavy_threshold(101, 4), 11);
        assert_eq!(heavy_threshold(1000, 6), 10);
        assert_eq!(heavy_threshold(0, 4), 1);
        assert_eq!(heavy_threshold(8, 3), 4);
    }

    fn cycle_db(l: usize, rel: &Relation) -> Database {
        let mut db = Database::new();
        for i in 1..=l {
            db.insert(rel.clone().renamed(format!("R{i}"))).unwrap();
        }
        db
    }

    #[test]
    fn worst_case_four_cycle_matches_brute_force() {
        let rel = worst_case_cycle("R", 100, 3).unwrap();
        let db = cycle_db(4, &rel);
        let q = QuerySpec::cycle(4);
        let plan = decompose_simple_cycle(&q, &db, &MinSum).unwrap();
        assert_eq!(plan.members.len(), 5);
        let mut e = UnionEnumerator::new(&plan, Algorithm::Lazy, Options::default()).unwrap();
        let out = drain(&mut e, None);
        let oracle = brute_force(&q, &db, &MinSum, 1 << 30).unwrap();
        assert_eq!(out.len(), oracle.len());
        assert_eq!(out.len(), 2 * 50 * 50);
        assert!(out.windows(2).all(|p| p[0].weight <= p[1].weight + 1e-9));
        let mut ws: Vec<Vec<u32>> = out.iter().map(|s| s.witness.clone()).collect();
        ws.sort();
        let mut expected: Vec<Vec<u32>> = (0..oracle.len()).map(|i| oracle.witness(i).to_vec()).collect();
        expected.sort();
        assert_eq!(ws, expected);
    }

    #[test]
    fn all_light_data_uses_light_member() {
        let mut r = Relation::new("R", 2);
        for i in 0..4u64 {
            r.push(&[i, (i + 1) % 4], i as f64);
        }
        let db = cycle_db(4, &r);
        let plan = decompose_simple_cycle(&QuerySpec::cycle(4), &db, &MinSum).unwrap();
        for m in &plan.members[..4] {
            assert!(m.instance.is_empty());
        }
        assert!(!plan.members[4].instance.is_empty());
        let mut e = UnionEnumerator::new(&plan, Algorithm::Eager, Options::default()).unwrap();
        let out = drain(&mut e, None);
        assert_eq!(out.len(), 4);
        assert_eq!(e.last_member(), Some(4));
        let mut s = String::new();
        plan.describe(&mut s).unwrap();
        assert!(s.starts_with("members 5\nthreshold atom=0 value=2\n"));
    }

    fn single_bag_member<D: SelectiveDioid>(d: &D, tuples: &[(u64, f64)], atom: u32) -> Member<D> {
        let mut t = AtomTable::new(vec![0]);
        let mut l = BagLineage::new();
        for (i, &(v, w)) in tuples.iter().enumerate() {
            t.push(&[v], d.lift(w, 0, v as u32).unwrap(), i as u32);
            l.push(&[(atom, v as u32)]);
        }
        Member::new(vec![t], vec![l], d).unwrap()
    }

    #[test]
    fn merge_of_two_members() {
        let a = single_bag_member(&MinSum, &[(1, 1.0), (3, 3.0), (5, 5.0)], 0);
        let b = single_bag_member(&MinSum, &[(2, 2.0), (4, 4.0)], 0);
        let plan = DecompositionPlan::new(vec![a, b], 1, true, MinSum);
        let out = drain(&mut UnionEnumerator::new(&plan, Algorithm::Take2, Options::default()).unwrap(), None);
        let w: Vec<f64> = out.iter().map(|s| s.weight).collect();
        assert_eq!(w, [1.0, 2.0, 3.0, 4.0, 5.0]);
    }

    #[test]
    fn overlap_needs_tiebreak() {
        let a = single_bag_member(&MinSum, &[(1, 1.0)], 0);
        let plan = DecompositionPlan::new(vec![a], 1, false, MinSum);
        assert!(UnionEnumerator::new(&plan, Algorithm::Eager, Options::default()).is_err());

        let d = TieBreak::new(MinSum, 1);
        let a = single_bag_member(&d, &[(1, 5.0), (2, 5.0), (3, 5.0)], 0);
        let b = single_bag_member(&d, &[(2, 5.0), (3, 5.0), (4, 5.0)], 0);
        let plan = DecompositionPlan::new(vec![a, b], 1, false, d);
        let mut e = UnionEnumerator::new(&plan, Algorithm::Recursive, Options::default()).unwrap();
        let out = drain(&mut e, None);
        let ws: Vec<u32> = out.iter().map(|s| s.witness[0]).collect();
        assert_eq!(ws, [1, 2, 3, 4]);
        assert_eq!(e.suppressed(), 2);
        assert!(e.max_suppressed_run() <= 2);
    }
}
