//! Acceptance checks.  Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

mod common;

use std::collections::HashMap;
use std::fmt::Debug;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyk_core::batch::{
    batch_cyclic_sorted, brute_force, brute_force_min_weight, yannakakis_sorted, yannakakis_survivors,
};
use anyk_core::dioid::{BoolInverted, Lexicographic, MaxSum, MaxTimes, MinSum, TieBreak};
use anyk_core::enumerate::{any_k, drain, Options};
use anyk_core::projection::{build_connex_plan, drain_projected, MinWeight};
use anyk_core::rec::RecEnumerator;
use anyk_core::relational::{
    build_join_tree, is_free_connex, materialize_atoms, nprr_adversarial, uniform, worst_case_cycle, AtomTable,
    Database, QuerySpec, Relation,
};
use anyk_core::union::{decompose_simple_cycle, BagLineage, DecompositionPlan, Member, UnionEnumerator};
use anyk_core::{Algorithm, Counters, RankedEnumerator, SelectiveDioid};
use common::{Close, Shape};
use rand::Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let t = start.elapsed();
    ensure(t <= limit, || format!("took {t:?}, limit {limit:?}"))
}

fn values_of(db: &Database, q: &QuerySpec, witness: &[u32]) -> Vec<u64> {
    q.atoms().iter().zip(witness).map(|(a, &t)| db.get(&a.relation).unwrap().tuple(t as usize)[0]).collect()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let (q, db) = common::running_example();
    let inst = common::instance(&q, &db, &MinSum);
    let want = [(111.0, vec![1, 10, 100]), (112.0, vec![2, 10, 100]), (113.0, vec![3, 10, 100])];
    let mut all = Algorithm::ANY_K.to_vec();
    all.push(Algorithm::Batch);
    for algo in all {
        let out = if algo == Algorithm::Batch {
            yannakakis_sorted(&q, &db, &MinSum).map_err(|e| e.to_string())?.to_solutions()
        } else {
            drain(&mut any_k(&inst, algo, Options::default()).unwrap(), None)
        };
        ensure(out.len() == 27, || format!("{algo}: {} results", out.len()))?;
        for (s, (w, v)) in out.iter().zip(&want) {
            let got = values_of(&db, &q, &s.witness);
            ensure(s.weight == *w && got == *v, || format!("{algo}: got {} {:?}", s.weight, got))?;
        }
        common::same_as_oracle(&q, &db, &MinSum, &out)?;
    }
    within(start, Duration::from_secs(1))?;
    Ok("top-3 111/112/113 and 27 results for all six".into())
}

/// Lazy and Take2 results per instance, kept for criterion 8.
#[derive(Default)]
struct Sweep {
    instances: usize,
    pairs: Vec<(u64, u64)>,
    sequence_mismatch: Option<String>,
}

fn sweep_one<D>(q: &QuerySpec, db: &Database, d: &D, sweep: &mut Sweep) -> Result<(), String>
where
    D: SelectiveDioid,
    D::Weight: Close + Debug + PartialEq,
{
    let mut lazy = None;
    let mut take2 = None;
    for algo in Algorithm::ANY_K {
        let (out, c) = common::run_checked(q, db, d, algo)?;
        let weights: Vec<D::Weight> = out.into_iter().map(|s| s.weight).collect();
        match algo {
            Algorithm::Lazy => lazy = Some((weights, c.total_ops())),
            Algorithm::Take2 => take2 = Some((weights, c.total_ops())),
            _ => {}
        }
    }
    let (lw, lo) = lazy.unwrap();
    let (tw, to) = take2.unwrap();
    if lw != tw && sweep.sequence_mismatch.is_none() {
        sweep.sequence_mismatch = Some(format!("{q:?}"));
    }
    sweep.pairs.push((lo, to));
    sweep.instances += 1;
    Ok(())
}

fn criterion_2(sweep: &mut Sweep) -> Outcome {
    let start = Instant::now();
    let shapes = [
        Shape::Path(3),
        Shape::Path(4),
        Shape::Path(6),
        Shape::Star(3),
        Shape::Star(4),
        Shape::Star(6),
        Shape::Tree(6),
    ];
    let mut rng = common::rng(2);
    let mut answers = 0usize;
    for shape in shapes {
        for i in 0..200 {
            let shape = match shape {
                Shape::Tree(_) => Shape::Tree(rng.random_range(2..=6)),
                s => s,
            };
            let q = common::query(shape, &mut rng);
            let n = rng.random_range(1..=30);
            let db = common::database(&q, n, &mut rng);
            let ctx = |m: String| format!("{shape:?} #{i} n={n}: {m}");
            answers += brute_force(&q, &db, &MinSum, common::CAP).map_err(|e| ctx(e.to_string()))?.len();
            sweep_one(&q, &db, &MinSum, sweep).map_err(|m| ctx(format!("min-sum {m}")))?;
            sweep_one(&q, &db, &MaxSum, sweep).map_err(|m| ctx(format!("max-sum {m}")))?;
            let lex = Lexicographic::new(q.atoms().len());
            sweep_one(&q, &db, &lex, sweep).map_err(|m| ctx(format!("lex {m}")))?;
        }
    }
    within(start, Duration::from_secs(300))?;
    Ok(format!("{} instances x 3 dioids x 5 algorithms, {answers} answers", 200 * shapes.len()))
}

/// Every member drained on its own: each base witness must come from
/// exactly one member.
fn member_partition<D: SelectiveDioid>(plan: &DecompositionPlan<D>) -> Result<usize, String> {
    let mut seen: HashMap<Vec<u32>, usize> = HashMap::new();
    for (i, m) in plan.members.iter().enumerate() {
        let mut e = any_k(&m.instance, Algorithm::Take2, Options::default()).unwrap();
        while let Some(s) = e.next_solution() {
            let w = m.base_witness(&s.witness, plan.num_atoms);
            if let Some(j) = seen.insert(w.clone(), i) {
                return Err(format!("witness {w:?} from members {j} and {i}"));
            }
        }
    }
    Ok(seen.len())
}

fn check_cycle(q: &QuerySpec, db: &Database) -> Result<usize, String> {
    let plan = decompose_simple_cycle(q, db, &MinSum).map_err(|e| e.to_string())?;
    let produced = member_partition(&plan)?;
    for algo in [Algorithm::Take2, Algorithm::Lazy, Algorithm::Recursive] {
        let mut e = UnionEnumerator::new(&plan, algo, Options::default()).map_err(|e| e.to_string())?;
        let out = drain(&mut e, None);
        common::same_as_oracle(q, db, &MinSum, &out).map_err(|m| format!("{algo}: {m}"))?;
        ensure(e.suppressed() == 0, || format!("{algo}: {} duplicates", e.suppressed()))?;
        ensure(out.len() == produced, || "members and union disagree".into())?;
    }
    let batch = batch_cyclic_sorted(q, db, &MinSum).map_err(|e| e.to_string())?;
    common::same_as_oracle(q, db, &MinSum, &batch.to_solutions()).map_err(|m| format!("batch: {m}"))?;
    Ok(produced)
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut rng = common::rng(3);
    let mut checked = 0;
    let mut answers = 0;
    for l in [4usize, 6] {
        let q = QuerySpec::cycle(l);
        for i in 0..25 {
            let n = rng.random_range(4..=60);
            let domain = (n / if l == 4 { 4 } else { 3 }).max(2) as u64;
            let db = common::cycle_database(l, n, domain, &mut rng);
            answers += check_cycle(&q, &db).map_err(|m| format!("{l}-cycle random #{i} n={n}: {m}"))?;
            checked += 1;
        }
        for n in [10usize, 30, 60] {
            let rel = worst_case_cycle("R", n, 1).map_err(|e| e.to_string())?;
            let mut db = Database::new();
            for j in 1..=l {
                db.insert(rel.clone().renamed(format!("R{j}"))).unwrap();
            }
            answers += check_cycle(&q, &db).map_err(|m| format!("{l}-cycle worst case n={n}: {m}"))?;
            checked += 1;
        }
    }
    within(start, Duration::from_secs(300))?;
    Ok(format!("{checked} cycle instances, {answers} answers, member outputs disjoint"))
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let q = QuerySpec::new(
        &[("R", &["a", "b"][..]), ("S", &["b", "c"][..]), ("T", &["c", "d"][..]), ("W", &["d", "a"][..])],
        None,
    )
    .unwrap();
    let mut ttf = Vec::new();
    let mut full = Vec::new();
    for n in [500usize, 1000, 2000] {
        let db = nprr_adversarial(n, 4);
        let plan = decompose_simple_cycle(&q, &db, &MinSum).map_err(|e| e.to_string())?;
        let mut e = UnionEnumerator::new(&plan, Algorithm::Take2, Options::default()).unwrap();
        ensure(e.next_solution().is_some(), || "no first answer".into())?;
        ttf.push(e.counters().total_ops() as f64);
        let b = batch_cyclic_sorted(&q, &db, &MinSum).map_err(|e| e.to_string())?;
        ensure(b.len() == 2 * n * n, || format!("batch found {} answers at n={n}", b.len()))?;
        full.push(b.counters.total_ops() as f64);
    }
    let growth = |v: &[f64]| [v[1] / v[0], v[2] / v[1]];
    let (g_any, g_batch) = (growth(&ttf), growth(&full));
    ensure(g_any.iter().all(|&g| g <= 2.5), || format!("any-k TTF growth {g_any:?}"))?;
    ensure(g_batch.iter().all(|&g| g >= 3.5), || format!("batch growth {g_batch:?}"))?;
    within(start, Duration::from_secs(120))?;
    Ok(format!(
        "TTF ops {ttf:?} (growth {:.2}, {:.2}); batch ops {full:?} (growth {:.2}, {:.2})",
        g_any[0], g_any[1], g_batch[0], g_batch[1]
    ))
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let mut rng = common::rng(5);
    let weights: Vec<Vec<f64>> = (0..4).map(|_| (0..10).map(|_| rng.random_range(0.0..100.0)).collect()).collect();
    let (q, db) = common::cartesian(&weights);
    let inst = common::instance(&q, &db, &MinSum);
    let mut e = RecEnumerator::new(&inst);
    let out = drain(&mut e, None);
    ensure(out.len() == 10_000, || format!("{} results", out.len()))?;
    common::same_as_oracle(&q, &db, &MinSum, &out)?;
    let c = e.counters();
    let rec_ops = c.pq_push + c.pq_pop;
    let bound = 2 * (10 + 100 + 1000 + 10_000);
    let batch = yannakakis_sorted(&q, &db, &MinSum).map_err(|e| e.to_string())?;
    let sort_cmps = batch.counters.comparisons;
    ensure(rec_ops <= bound, || format!("recursive used {rec_ops} queue operations, bound {bound}"))?;
    ensure(rec_ops < sort_cmps, || format!("recursive {rec_ops} not below batch sort {sort_cmps}"))?;
    within(start, Duration::from_secs(10))?;
    Ok(format!("recursive queue ops {rec_ops} <= {bound}; batch sort comparisons {sort_cmps}"))
}

/// Cross product of three relations where the first `n` answers take the
/// best tuple of R1 and R2 and a different R3 tuple each.
fn recursive_worst_case(n: usize) -> (QuerySpec, Database) {
    let heavy = |i: usize| if i == 0 { 0.0 } else { (10 * n + i) as f64 };
    let r1: Vec<f64> = (0..n).map(heavy).collect();
    let r3: Vec<f64> = (0..n).map(|i| (i + 1) as f64).collect();
    common::cartesian(&[r1.clone(), r1, r3])
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let (n, l) = (1000usize, 3usize);
    let (q, db) = recursive_worst_case(n);
    let inst = common::instance(&q, &db, &MinSum);
    let mut rec = RecEnumerator::new(&inst);
    let out = drain(&mut rec, Some(n));
    let distinct_last: std::collections::HashSet<u32> = out.iter().map(|s| s.witness[2]).collect();
    ensure(out.len() == n && distinct_last.len() == n, || "first n answers must differ in R3".into())?;
    let mut take2 = any_k(&inst, Algorithm::Take2, Options::default()).unwrap();
    let out2 = drain(&mut take2, Some(n));
    ensure(out.iter().zip(&out2).all(|(a, b)| a.weight == b.weight), || "sequences differ".into())?;
    let log_n = (n as f64).log2();
    let rec_ops = rec.counters().pq_work() as f64;
    let rec_floor = 0.5 * n as f64 * (l - 1) as f64 * log_n;
    let take2_ops = take2.counters().pq_work() as f64;
    let c = take2_ops / (n as f64 * log_n + (n * l) as f64);
    ensure(rec_ops >= rec_floor, || format!("recursive {rec_ops} below {rec_floor:.0}"))?;
    ensure(c <= 4.0, || format!("take2 constant {c:.2}"))?;
    within(start, Duration::from_secs(30))?;
    Ok(format!("recursive {rec_ops} >= {rec_floor:.0}; take2 {take2_ops} = {c:.2} x (n log n + n l)"))
}

fn four_path(n: usize, domain: u64, seed: u64) -> (QuerySpec, Database) {
    let q = QuerySpec::path(4);
    let mut db = Database::new();
    for i in 1..=4 {
        db.insert(uniform(&format!("R{i}"), n, domain, seed * 10 + i)).unwrap();
    }
    (q, db)
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let (n, k, l) = (10_000usize, 1000usize, 4u64);
    let bound = k as u64 * l + l;
    let mut peaks = Vec::new();
    let mut all_peak = 0u64;
    for domain in [n as u64 / 10, n as u64 / 100] {
        let (q, db) = four_path(n, domain, 7);
        let inst = common::instance(&q, &db, &MinSum);
        for algo in [Algorithm::Eager, Algorithm::Lazy, Algorithm::Take2, Algorithm::All] {
            let mut e = any_k(&inst, algo, Options::default()).unwrap();
            let out = drain(&mut e, Some(k));
            ensure(out.len() == k, || format!("{algo}: only {} results", out.len()))?;
            let peak = e.counters().candidates_peak;
            if algo == Algorithm::All {
                all_peak = all_peak.max(peak);
            } else {
                ensure(peak <= bound, || format!("{algo} domain {domain}: peak {peak} > {bound}"))?;
                peaks.push(peak);
            }
        }
    }
    ensure(all_peak > 10 * k as u64 * l, || format!("all peaked at {all_peak}"))?;
    within(start, Duration::from_secs(30))?;
    Ok(format!("eager/lazy/take2 peaks {peaks:?} <= {bound}; all peak {all_peak}"))
}

fn criterion_8(sweep: &Sweep) -> Outcome {
    if let Some(q) = &sweep.sequence_mismatch {
        return Err(format!("lazy and take2 sequences differ on {q}"));
    }
    let worst = sweep.pairs.iter().map(|&(a, b)| a.max(b) as f64 / a.min(b).max(1) as f64).fold(1.0, f64::max);
    ensure(worst <= 4.0, || format!("operation ratio {worst:.2}"))?;
    Ok(format!("{} runs identical; largest lazy/take2 operation ratio {worst:.2}", sweep.instances))
}

fn one_bag_member<D: SelectiveDioid>(d: &D, rel: &Relation, tuples: &[u32]) -> Member<D> {
    let mut t = AtomTable::new(vec![0]);
    let mut lineage = BagLineage::new();
    for (r, &i) in tuples.iter().enumerate() {
        let w = d.lift(rel.weight(i as usize), 0, i).unwrap();
        t.push(rel.tuple(i as usize), w, r as u32);
        lineage.push(&[(0, i)]);
    }
    Member::new(vec![t], vec![lineage], d).unwrap()
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let mut rel = Relation::new("R", 1);
    for v in 0..8u64 {
        rel.push(&[v], 5.0);
    }
    let d = TieBreak::new(MinSum, 1);
    let a = one_bag_member(&d, &rel, &[0, 1, 2, 3, 4, 5]);
    let b = one_bag_member(&d, &rel, &[2, 3, 4, 5, 6, 7]);
    let plan = DecompositionPlan::new(vec![a, b], 1, false, d.clone());
    let mut e = UnionEnumerator::new(&plan, Algorithm::Take2, Options::default()).map_err(|e| e.to_string())?;
    let mut got = Vec::new();
    let mut last_suppressed = 0;
    while let Some(s) = e.next_solution() {
        ensure(d.project(&s.weight) == 5.0, || "base weight changed".into())?;
        let run = e.suppressed() - last_suppressed;
        ensure(run <= plan.members.len() as u64, || format!("{run} suppressed before one answer"))?;
        last_suppressed = e.suppressed();
        got.push(s.witness[0]);
    }
    let mut sorted = got.clone();
    sorted.sort_unstable();
    sorted.dedup();
    ensure(sorted.len() == got.len() && got.len() == 8, || format!("emitted {got:?}"))?;
    ensure(e.suppressed() == 4, || format!("{} suppressed, expected 4", e.suppressed()))?;
    ensure(UnionEnumerator::new(&DecompositionPlan::new(vec![], 1, false, MinSum), Algorithm::Take2, Options::default()).is_err(), || {
        "overlapping union without tie-breaking accepted".into()
    })?;
    within(start, Duration::from_secs(1))?;
    Ok(format!("8 distinct answers, 4 duplicates dropped, longest run {}", e.max_suppressed_run()))
}

/// The free-connex example query with a small hand-made database.  Row
/// `y3 = 1` of R4's projection has completions of weight 1 and 2.
fn connex_example() -> (QuerySpec, Database) {
    let q = QuerySpec::new(
        &[
            ("R1", &["y1", "y2"][..]),
            ("R2", &["y2", "y3"][..]),
            ("R3", &["x1", "y1", "y4"][..]),
            ("R4", &["x2", "y3"][..]),
        ],
        Some(&["y1", "y2", "y3", "y4"][..]),
    )
    .unwrap();
    let rows: [(&str, &[(&[u64], f64)]); 4] = [
        ("R1", &[(&[1, 1], 1.0), (&[2, 1], 2.0), (&[2, 2], 3.0)]),
        ("R2", &[(&[1, 1], 1.0), (&[1, 2], 4.0), (&[2, 2], 2.0)]),
        ("R3", &[(&[1, 1, 1], 3.0), (&[2, 1, 1], 1.0), (&[1, 2, 2], 5.0), (&[3, 2, 3], 2.0)]),
        ("R4", &[(&[1, 1], 1.0), (&[2, 1], 2.0), (&[3, 2], 4.0)]),
    ];
    let mut db = Database::new();
    for (name, tuples) in rows {
        let mut r = Relation::new(name, tuples[0].0.len());
        for (t, w) in tuples {
            r.push(t, *w);
        }
        db.insert(r).unwrap();
    }
    (q, db)
}

fn min_weight_matches<D>(q: &QuerySpec, db: &Database, d: &D, algo: Algorithm) -> Result<usize, String>
where
    D: SelectiveDioid,
    D::Weight: Close + Debug,
{
    let plan = build_connex_plan(q, db, d).map_err(|e| e.to_string())?;
    let out = drain_projected(&mut MinWeight::new(&plan, algo, Options::default()).unwrap(), None);
    let oracle = brute_force_min_weight(q, db, d, common::CAP).map_err(|e| e.to_string())?;
    ensure(out.len() == oracle.len(), || format!("{} groups, oracle has {}", out.len(), oracle.len()))?;
    for (i, (s, o)) in out.iter().zip(&oracle).enumerate() {
        ensure(s.weight.close(&o.0), || format!("rank {i}: {:?} vs {:?}", s.weight, o.0))?;
    }
    let by_values: HashMap<&Vec<u64>, &D::Weight> = oracle.iter().map(|(w, v)| (v, w)).collect();
    for s in &out {
        let w = by_values.get(&s.values).ok_or_else(|| format!("unexpected group {:?}", s.values))?;
        ensure(s.weight.close(w), || format!("group {:?}: {:?} vs {:?}", s.values, s.weight, w))?;
    }
    Ok(out.len())
}

fn criterion_10() -> Outcome {
    let start = Instant::now();
    let (q, db) = connex_example();
    let plan = build_connex_plan(&q, &db, &MinSum).map_err(|e| e.to_string())?;
    let boundary = plan
        .boundaries
        .iter()
        .find(|b| b.child_atom == 3)
        .ok_or("no boundary above R4")?;
    let table = plan.node_table(boundary.node);
    let row = (0..table.len()).find(|&r| table.row(r) == [1]).ok_or("no y3 = 1 row")?;
    ensure(boundary.weights[row] == Some(1.0), || format!("boundary weight {:?}", boundary.weights[row]))?;
    let groups = min_weight_matches(&q, &db, &MinSum, Algorithm::Take2)?;

    let mut rng = common::rng(10);
    let mut done = 0;
    let mut attempts = 0;
    while done < 100 {
        attempts += 1;
        let size = rng.random_range(2..=6);
        let full = common::query(Shape::Tree(size), &mut rng);
        let free: Vec<String> =
            (0..full.num_vars()).filter(|_| rng.random_bool(0.5)).map(|v| full.var_name(v).to_string()).collect();
        if free.is_empty() {
            continue;
        }
        let q = full.with_free(Some(&free)).unwrap();
        if !is_free_connex(&q) {
            continue;
        }
        let n = rng.random_range(1..=30);
        let db = common::database(&q, n, &mut rng);
        let algo = Algorithm::ANY_K[done % 5];
        min_weight_matches(&q, &db, &MinSum, algo).map_err(|m| format!("instance {done} ({algo}): {m}"))?;
        done += 1;
    }
    within(start, Duration::from_secs(120))?;
    Ok(format!("boundary weight 1; {groups} example groups; 100 random instances ({attempts} drawn)"))
}

fn criterion_11() -> Outcome {
    let start = Instant::now();
    let mut rng = common::rng(11);
    for i in 0..20 {
        let q = common::query(Shape::Tree(rng.random_range(2..=6)), &mut rng);
        let n = rng.random_range(1..=30);
        let db = common::database(&q, n, &mut rng);
        let tables = materialize_atoms(&q, &db, &BoolInverted).unwrap();
        let tree = build_join_tree(&q).unwrap();
        let inst = common::instance(&q, &db, &BoolInverted);
        let count = drain(&mut any_k(&inst, Algorithm::Take2, Options::default()).unwrap(), None).len();
        let size = brute_force(&q, &db, &BoolInverted, common::CAP).unwrap().len();
        ensure(count == size, || format!("#{i}: {count} answers, join has {size}"))?;
        let yk = yannakakis_survivors(&tables, &tree, &mut Counters::default());
        ensure(inst.survivors() == yk, || format!("#{i}: survivors differ"))?;
    }
    within(start, Duration::from_secs(60))?;
    Ok("20 instances: counts and survivors match".into())
}

/// Checks the selective dioid laws on `samples` triples.
fn dioid_laws<D>(d: &D, name: &str, mut sample: impl FnMut() -> D::Weight) -> Result<(), String>
where
    D: SelectiveDioid,
    D::Weight: Debug + PartialEq,
{
    let eq = |a: &D::Weight, b: &D::Weight| d.cmp(a, b) == std::cmp::Ordering::Equal && a == b;
    for i in 0..1000 {
        let (a, b, c) = match i {
            0 => (d.zero(), sample(), sample()),
            1 => (sample(), d.one(), d.zero()),
            _ => (sample(), sample(), sample()),
        };
        let fail = |law: &str| format!("{name}: {law} fails on {a:?}, {b:?}, {c:?}");
        let ab = d.plus(&a, &b);
        ensure(eq(&ab, &a) || eq(&ab, &b), || fail("selectivity"))?;
        ensure(eq(&ab, &d.plus(&b, &a)), || fail("commutativity of plus"))?;
        ensure(eq(&d.plus(&ab, &c), &d.plus(&a, &d.plus(&b, &c))), || fail("associativity of plus"))?;
        ensure(eq(&d.times(&a, &b), &d.times(&b, &a)), || fail("commutativity of times"))?;
        let left = d.times(&d.times(&a, &b), &c);
        ensure(eq(&left, &d.times(&a, &d.times(&b, &c))), || fail("associativity of times"))?;
        let dist = d.times(&a, &d.plus(&b, &c));
        ensure(eq(&dist, &d.plus(&d.times(&a, &b), &d.times(&a, &c))), || fail("distributivity"))?;
        ensure(eq(&d.plus(&a, &d.zero()), &a), || fail("zero is neutral for plus"))?;
        ensure(eq(&d.times(&a, &d.one()), &a), || fail("one is neutral for times"))?;
        ensure(d.is_zero(&d.times(&a, &d.zero())), || fail("zero absorbs"))?;
    }
    Ok(())
}

fn criterion_12() -> Outcome {
    let start = Instant::now();
    let mut rng = common::rng(12);
    // Integer-valued samples keep float sums and products exact.
    let mut int = |lo: u32, hi: u32| f64::from(rng.random_range(lo..=hi));
    dioid_laws(&MinSum, "min-sum", || int(0, 1_000_000))?;
    dioid_laws(&MaxSum, "max-sum", || int(0, 1_000_000))?;
    dioid_laws(&MaxTimes, "max-times", || int(1, 1000))?;
    let mut rng = common::rng(13);
    dioid_laws(&BoolInverted, "boolean", || rng.random_bool(0.7))?;
    let lex = Lexicographic::new(3);
    let mut rng = common::rng(14);
    dioid_laws(&lex, "lex", || (0..3).map(|_| rng.random_range(0..50)).collect())?;
    let tb = TieBreak::new(MinSum, 3);
    let mut rng = common::rng(15);
    dioid_laws(&tb, "tie-break", || {
        let p = rng.random_range(0..3);
        tb.lift(f64::from(rng.random_range(0..20u32)), p, rng.random_range(0..4)).unwrap()
    })?;
    within(start, Duration::from_secs(10))?;
    Ok("6 dioids x 1000 samples".into())
}

fn main() -> ExitCode {
    let mut sweep = Sweep::default();
    let mut failed = 0;
    let mut report = |n: usize, r: Outcome| match r {
        Ok(msg) => println!("criterion {n:>2}: PASS  {msg}"),
        Err(msg) => {
            failed += 1;
            println!("criterion {n:>2}: FAIL  {msg}");
        }
    };
    report(1, criterion_1());
    report(2, criterion_2(&mut sweep));
    report(3, criterion_3());
    report(4, criterion_4());
    report(5, criterion_5());
    report(6, criterion_6());
    report(7, criterion_7());
    report(8, criterion_8(&sweep));
    report(9, criterion_9());
    report(10, criterion_10());
    report(11, criterion_11());
    report(12, criterion_12());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
