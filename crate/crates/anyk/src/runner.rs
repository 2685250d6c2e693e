//! Executes runs and comparisons: builds the instance, drives the
//! enumerator, writes results and metrics.

use std::fmt::Write as _;
use std::fs::File;
use std::io::Write;
use std::time::Instant;

use anyk_core::batch::{batch_cyclic_sorted, brute_force, brute_force_min_weight, yannakakis_sorted};
use anyk_core::dioid::{format_weight, BoolInverted, Lexicographic, MaxSum, MaxTimes, MinSum, TieBreak};
use anyk_core::dp::TdpInstance;
use anyk_core::enumerate::{any_k, Options, Replay};
use anyk_core::projection::{build_connex_plan, AllWeight, ConnexPlan, MinWeight, ProjectedEnumerator, ProjectedSolution};
use anyk_core::relational::{
    build_join_tree, materialize_atoms, nprr_adversarial, uniform, worst_case_cycle, Database, QuerySpec, Relation,
};
use anyk_core::union::{decompose_simple_cycle, UnionEnumerator};
use anyk_core::{Algorithm, Counters, Error, RankedEnumerator, SelectiveDioid, Solution};

use crate::config::{DataSource, DioidSpec, Projection, QuerySource, RunConfig, ShapeKind};
use crate::error::CliError;
use crate::io::{load_query, read_edge_csv, Dictionary};

pub const METRICS_HEADER: [&str; 7] = ["k", "tt_ns", "pq_push", "pq_pop", "comparisons", "candidates_live", "results"];

/// Counters and elapsed time after the first `k` answers.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub k: u64,
    pub tt_ns: u128,
    pub counters: Counters,
}

impl Checkpoint {
    fn record(&self) -> [String; 7] {
        let c = &self.counters;
        [
            self.k.to_string(),
            self.tt_ns.to_string(),
            c.pq_push.to_string(),
            c.pq_pop.to_string(),
            c.comparisons.to_string(),
            c.candidates_peak.max(c.candidates_live).to_string(),
            c.results.to_string(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub results: u64,
    /// Median elapsed time over the repeats, counters of the first run.
    pub checkpoints: Vec<Checkpoint>,
}

/// The query and database of a run.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub query: QuerySpec,
    pub db: Database,
}

pub fn build_query(cfg: &RunConfig) -> Result<QuerySpec, CliError> {
    let q = match &cfg.query {
        QuerySource::Shape { kind: ShapeKind::Path, length } => QuerySpec::path(*length),
        QuerySource::Shape { kind: ShapeKind::Star, length } => QuerySpec::star(*length),
        QuerySource::Shape { kind: ShapeKind::Cycle, length } => QuerySpec::cycle(*length),
        QuerySource::Json(path) => load_query(path)?,
    };
    match &cfg.free {
        Some(free) => Ok(q.with_free(Some(free))?),
        None => Ok(q),
    }
}

/// Distinct relation names in order of first use.
fn relation_names(q: &QuerySpec) -> Vec<String> {
    let mut names: Vec<String> = Vec::new();
    for a in q.atoms() {
        if !names.contains(&a.relation) {
            names.push(a.relation.clone());
        }
    }
    names
}

pub fn prepare(cfg: &RunConfig) -> Result<Prepared, CliError> {
    let query = build_query(cfg)?;
    let names = relation_names(&query);
    let mut db = Database::new();
    if !matches!(cfg.data, DataSource::Files(_)) && query.atoms().iter().any(|a| a.vars.len() != 2) {
        return Err(CliError::Config("generated data is binary; every atom needs two variables".into()));
    }
    let mut insert = |r: Relation| db.insert(r).map_err(CliError::from);
    match &cfg.data {
        DataSource::Files(paths) => {
            let mut dict = Dictionary::default();
            let read = |path: &std::path::Path, name: &str, dict: &mut Dictionary| {
                let file = File::open(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
                read_edge_csv(file, name, dict)
            };
            if paths.len() == 1 {
                let rel = read(&paths[0], &names[0], &mut dict)?;
                for name in &names {
                    insert(rel.clone().renamed(name.clone()))?;
                }
            } else if paths.len() == names.len() {
                for (path, name) in paths.iter().zip(&names) {
                    insert(read(path, name, &mut dict)?)?;
                }
            } else {
                return Err(CliError::Config(format!(
                    "{} data files for {} relations; pass one shared file or one per relation",
                    paths.len(),
                    names.len()
                )));
            }
        }
        DataSource::Uniform(n) => {
            let domain = (*n as u64 / 10).max(1);
            for (i, name) in names.iter().enumerate() {
                insert(uniform(name, *n, domain, cfg.seed.wrapping_add(i as u64)))?;
            }
        }
        DataSource::WorstCase(n) => {
            for (i, name) in names.iter().enumerate() {
                insert(worst_case_cycle(name, *n, cfg.seed.wrapping_add(i as u64))?)?;
            }
        }
        DataSource::Adversarial(n) => {
            if names.len() != 4 {
                return Err(CliError::Config("--gen-adversarial needs a query over four relations".into()));
            }
            let base = nprr_adversarial(*n, cfg.seed);
            for (name, src) in names.iter().zip(["R", "S", "T", "W"]) {
                insert(base.get(src).expect("generated relation").clone().renamed(name.clone()))?;
            }
        }
    }
    Ok(Prepared { query, db })
}

/// Equality of weights up to float rounding from different fold orders.
pub trait Approx {
    fn approx(&self, other: &Self) -> bool;
}

impl Approx for f64 {
    fn approx(&self, other: &f64) -> bool {
        self == other || (self - other).abs() <= 1e-9 * self.abs().max(other.abs()).max(1.0)
    }
}

impl Approx for bool {
    fn approx(&self, other: &bool) -> bool {
        self == other
    }
}

impl Approx for Vec<u64> {
    fn approx(&self, other: &Vec<u64>) -> bool {
        self == other
    }
}

impl<A: Approx> Approx for (A, Vec<u64>) {
    fn approx(&self, other: &Self) -> bool {
        self.0.approx(&other.0) && self.1 == other.1
    }
}

/// Work that needs the concrete dioid type.
trait DioidTask {
    type Out;

    fn run<D>(self, d: D) -> Self::Out
    where
        D: SelectiveDioid,
        D::Weight: Approx;
}

fn with_dioid<T: DioidTask>(spec: DioidSpec, tiebreak: bool, atoms: usize, task: T) -> T::Out {
    match (spec, tiebreak) {
        (DioidSpec::MinSum, false) => task.run(MinSum),
        (DioidSpec::MinSum, true) => task.run(TieBreak::new(MinSum, atoms)),
        (DioidSpec::MaxSum, false) => task.run(MaxSum),
        (DioidSpec::MaxSum, true) => task.run(TieBreak::new(MaxSum, atoms)),
        (DioidSpec::MaxTimes, false) => task.run(MaxTimes),
        (DioidSpec::MaxTimes, true) => task.run(TieBreak::new(MaxTimes, atoms)),
        (DioidSpec::Bool, false) => task.run(BoolInverted),
        (DioidSpec::Bool, true) => task.run(TieBreak::new(BoolInverted, atoms)),
        (DioidSpec::Lex(n), false) => task.run(Lexicographic::new(n)),
        (DioidSpec::Lex(n), true) => task.run(TieBreak::new(Lexicographic::new(n), atoms)),
    }
}

fn check_width(spec: DioidSpec, q: &QuerySpec) -> Result<(), CliError> {
    match spec {
        DioidSpec::Lex(n) if n < q.atoms().len() => Err(CliError::Config(format!(
            "lex:{n} has fewer components than the query has atoms ({})",
            q.atoms().len()
        ))),
        _ => Ok(()),
    }
}

/// Full answers seen through the projected interface.
struct Full<E>(E);

impl<E: RankedEnumerator> ProjectedEnumerator for Full<E> {
    type Weight = E::Weight;

    fn next_projected(&mut self) -> Option<ProjectedSolution<E::Weight>> {
        let s = self.0.next_solution()?;
        Some(ProjectedSolution { weight: s.weight, values: Vec::new(), witness: s.witness })
    }

    fn counters(&self) -> &Counters {
        self.0.counters()
    }
}

fn mode(cfg: &RunConfig, q: &QuerySpec) -> Result<Option<Projection>, CliError> {
    if q.free().is_none() || (q.is_full() && cfg.projection.is_none()) {
        if cfg.projection.is_some() && q.free().is_none() {
            return Err(CliError::Config("--projection needs free variables (--free)".into()));
        }
        return Ok(None);
    }
    Ok(Some(cfg.projection.unwrap_or(Projection::AllWeight)))
}

type Sink<'s, W> = dyn FnMut(u64, &ProjectedSolution<W>) -> Result<(), CliError> + 's;

fn drive<W>(
    e: &mut dyn ProjectedEnumerator<Weight = W>,
    base: &Counters,
    start: Instant,
    k: Option<usize>,
    sink: &mut Sink<'_, W>,
) -> Result<Vec<Checkpoint>, CliError> {
    let mut points = Vec::new();
    let snapshot = |e: &dyn ProjectedEnumerator<Weight = W>, n: u64| {
        let mut counters = base.clone();
        counters.absorb(e.counters());
        counters.results = n;
        Checkpoint { k: n, tt_ns: start.elapsed().as_nanos(), counters }
    };
    let mut n = 0u64;
    let mut next_point = 1u64;
    while k.is_none_or(|k| n < k as u64) {
        let Some(s) = e.next_projected() else { break };
        n += 1;
        sink(n, &s)?;
        if n == next_point {
            points.push(snapshot(e, n));
            next_point *= 2;
        }
    }
    if points.last().map(|p| p.k) != Some(n) {
        points.push(snapshot(e, n));
    }
    Ok(points)
}

fn dump_text(diag: &mut dyn Write, f: impl FnOnce(&mut String) -> std::fmt::Result) -> Result<(), CliError> {
    let mut s = String::new();
    f(&mut s).expect("writing to a string");
    diag.write_all(s.as_bytes())?;
    Ok(())
}

fn describe_connex<D: SelectiveDioid>(q: &QuerySpec, plan: &ConnexPlan<D>, out: &mut String) -> std::fmt::Result {
    for (i, node) in plan.nodes.iter().enumerate() {
        let vars: Vec<&str> = node.vars.iter().map(|&v| q.var_name(v)).collect();
        let kind = if node.projected { "projection" } else { "atom" };
        writeln!(out, "free node {i} {kind} of atom {} vars={}", node.atom, vars.join(","))?;
    }
    for b in &plan.boundaries {
        writeln!(out, "boundary node={} child_atom={}", b.node, b.child_atom)?;
    }
    Ok(())
}

fn wrap<'e, W: 'e>(
    projection: Option<Projection>,
    q: &QuerySpec,
    db: &'e Database,
    e: Box<dyn RankedEnumerator<Weight = W> + 'e>,
) -> Result<Box<dyn ProjectedEnumerator<Weight = W> + 'e>, CliError> {
    Ok(match projection {
        Some(Projection::AllWeight) => Box::new(AllWeight::new(q, db, e)?),
        _ => Box::new(Full(e)),
    })
}

/// One pass over the enumeration.  Diagnostics are written only when
/// `diag` is given.
fn execute<D: SelectiveDioid>(
    cfg: &RunConfig,
    prep: &Prepared,
    d: &D,
    mut diag: Option<&mut dyn Write>,
    sink: &mut Sink<'_, D::Weight>,
) -> Result<Vec<Checkpoint>, CliError> {
    let (q, db) = (&prep.query, &prep.db);
    let start = Instant::now();
    let options = Options { eager_init: cfg.eager_init };
    let projection = mode(cfg, q)?;
    let none = Counters::default();
    let wrap = |e| wrap(projection, q, db, e);
    let replay = |s: Vec<Solution<D::Weight>>, c: Counters| Box::new(Replay::new(s, c));
    match build_join_tree(q) {
        Ok(tree) => {
            if projection == Some(Projection::MinWeight) {
                let plan = build_connex_plan(q, db, d)?;
                if let Some(diag) = diag.as_deref_mut() {
                    if cfg.dump_plan {
                        dump_text(diag, |s| describe_connex(q, &plan, s))?;
                    }
                    if cfg.dump_dp {
                        dump_text(diag, |s| plan.pruned.dump(s))?;
                    }
                }
                let mut e = MinWeight::new(&plan, cfg.algorithm, options)?;
                return drive(&mut e, plan.build_counters(), start, cfg.k, sink);
            }
            if cfg.algorithm == Algorithm::Batch {
                let rs = yannakakis_sorted(q, db, d)?;
                let mut e = wrap(replay(rs.to_solutions(), rs.counters.clone()))?;
                return drive(e.as_mut(), &none, start, cfg.k, sink);
            }
            let tables = materialize_atoms(q, db, d)?;
            let inst = TdpInstance::new(&tree, &tables, d)?;
            if let Some(diag) = diag.as_deref_mut() {
                if cfg.dump_plan {
                    dump_text(diag, |s| writeln!(s, "join tree parents {:?}", tree.parent))?;
                }
                if cfg.dump_dp {
                    dump_text(diag, |s| inst.dump(s))?;
                }
            }
            let mut e = wrap(any_k(&inst, cfg.algorithm, options)?)?;
            drive(e.as_mut(), inst.build_counters(), start, cfg.k, sink)
        }
        Err(Error::Cyclic) => {
            if projection == Some(Projection::MinWeight) {
                return Err(Error::Cyclic.into());
            }
            if cfg.algorithm == Algorithm::Batch {
                let rs = batch_cyclic_sorted(q, db, d)?;
                let mut e = wrap(replay(rs.to_solutions(), rs.counters.clone()))?;
                return drive(e.as_mut(), &none, start, cfg.k, sink);
            }
            let plan = decompose_simple_cycle(q, db, d)?;
            if let Some(diag) = diag {
                if cfg.dump_plan {
                    dump_text(diag, |s| plan.describe(s))?;
                }
                if cfg.dump_dp {
                    for (i, m) in plan.members.iter().enumerate() {
                        dump_text(diag, |s| {
                            writeln!(s, "member {i}")?;
                            m.instance.dump(s)
                        })?;
                    }
                }
            }
            let mut e = wrap(Box::new(UnionEnumerator::new(&plan, cfg.algorithm, options)?))?;
            drive(e.as_mut(), &none, start, cfg.k, sink)
        }
        Err(e) => Err(e.into()),
    }
}

/// `rank<TAB>weight<TAB>atom:tuple…`, or `var=value` columns for
/// projected answers.
pub fn format_row<D: SelectiveDioid>(
    d: &D,
    rank: u64,
    s: &ProjectedSolution<D::Weight>,
    free_names: Option<&[String]>,
) -> String {
    let mut line = format!("{rank}\t{}", format_weight(d, &s.weight));
    match free_names {
        Some(names) => {
            for (name, v) in names.iter().zip(&s.values) {
                let _ = write!(line, "\t{name}={v}");
            }
        }
        None => {
            for (a, t) in s.witness.iter().enumerate() {
                let _ = write!(line, "\t{a}:{t}");
            }
        }
    }
    line
}

fn free_names(cfg: &RunConfig, q: &QuerySpec) -> Result<Option<Vec<String>>, CliError> {
    Ok(mode(cfg, q)?.map(|_| q.free().unwrap().iter().map(|&v| q.var_name(v).to_string()).collect()))
}

fn median(mut v: Vec<u128>) -> u128 {
    v.sort_unstable();
    v[v.len() / 2]
}

pub fn write_metrics(path: &std::path::Path, points: &[Checkpoint]) -> Result<(), CliError> {
    let file = File::create(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    let mut w = csv::Writer::from_writer(file);
    let io = |e: csv::Error| CliError::Output(e.into());
    w.write_record(METRICS_HEADER).map_err(io)?;
    for p in points {
        w.write_record(p.record()).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

struct RunTask<'a> {
    cfg: &'a RunConfig,
    prep: &'a Prepared,
    out: &'a mut dyn Write,
    diag: &'a mut dyn Write,
}

impl DioidTask for RunTask<'_> {
    type Out = Result<RunSummary, CliError>;

    fn run<D>(self, d: D) -> Self::Out
    where
        D: SelectiveDioid,
        D::Weight: Approx,
    {
        let RunTask { cfg, prep, out, diag } = self;
        let names = free_names(cfg, &prep.query)?;
        let mut runs: Vec<Vec<Checkpoint>> = Vec::with_capacity(cfg.repeats);
        for r in 0..cfg.repeats {
            let points = if r == 0 {
                let mut sink = |rank: u64, s: &ProjectedSolution<D::Weight>| -> Result<(), CliError> {
                    writeln!(out, "{}", format_row(&d, rank, s, names.as_deref()))?;
                    Ok(())
                };
                execute(cfg, prep, &d, Some(&mut *diag), &mut sink)?
            } else {
                execute(cfg, prep, &d, None, &mut |_, _| Ok(()))?
            };
            runs.push(points);
        }
        let mut points = runs[0].clone();
        for (i, p) in points.iter_mut().enumerate() {
            p.tt_ns = median(runs.iter().map(|r| r[i].tt_ns).collect());
        }
        if let Some(path) = &cfg.metrics {
            write_metrics(path, &points)?;
        }
        Ok(RunSummary { results: points.last().map_or(0, |p| p.k), checkpoints: points })
    }
}

/// Runs `cfg`, writing result rows to `out` and dumps to `diag`.
pub fn run(cfg: &RunConfig, out: &mut dyn Write, diag: &mut dyn Write) -> Result<RunSummary, CliError> {
    cfg.validate()?;
    let prep = prepare(cfg)?;
    check_width(cfg.dioid, &prep.query)?;
    with_dioid(cfg.dioid, cfg.tiebreak, prep.query.atoms().len(), RunTask { cfg, prep: &prep, out, diag })
}

/// The second side of a comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Against {
    Algorithm(Algorithm),
    /// The brute-force oracle.
    Brute,
}

impl std::str::FromStr for Against {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "brute" => Ok(Against::Brute),
            _ => s.parse().map(Against::Algorithm).map_err(CliError::from),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareConfig {
    pub base: RunConfig,
    pub against: Against,
    /// Generator size for the second side, when it differs.
    pub against_size: Option<usize>,
    pub brute_cap: u128,
}

/// One side of a comparison.
#[derive(Debug, Clone)]
struct Side<W> {
    label: String,
    tuples: usize,
    weights: Vec<W>,
    first: Counters,
    last: Counters,
}

impl<W> Side<W> {
    fn from_points(label: String, tuples: usize, weights: Vec<W>, points: &[Checkpoint]) -> Self {
        let first = points.iter().find(|p| p.k == 1).or(points.last()).map(|p| p.counters.clone()).unwrap_or_default();
        let last = points.last().map(|p| p.counters.clone()).unwrap_or_default();
        Self { label, tuples, weights, first, last }
    }

    fn row(&self) -> [u64; 8] {
        let c = &self.last;
        [
            self.tuples as u64,
            self.weights.len() as u64,
            self.first.total_ops(),
            c.total_ops(),
            c.pq_push,
            c.pq_pop,
            c.comparisons,
            c.candidates_peak.max(c.candidates_live),
        ]
    }
}

struct CompareTask<'a> {
    cfg: &'a CompareConfig,
    prep_a: &'a Prepared,
    prep_b: &'a Prepared,
    out: &'a mut dyn Write,
}

fn collect<D: SelectiveDioid>(cfg: &RunConfig, prep: &Prepared, d: &D) -> Result<Side<D::Weight>, CliError> {
    let mut weights = Vec::new();
    let points = execute(cfg, prep, d, None, &mut |_, s| {
        weights.push(s.weight.clone());
        Ok(())
    })?;
    Ok(Side::from_points(cfg.algorithm.name().to_string(), prep.db.size(), weights, &points))
}

fn brute<D: SelectiveDioid>(cfg: &RunConfig, prep: &Prepared, d: &D, cap: u128) -> Result<Side<D::Weight>, CliError> {
    let (q, db) = (&prep.query, &prep.db);
    let (mut weights, counters) = match mode(cfg, q)? {
        Some(Projection::MinWeight) => {
            let groups = brute_force_min_weight(q, db, d, cap)?;
            (groups.into_iter().map(|(w, _)| w).collect::<Vec<_>>(), Counters::default())
        }
        _ => {
            let rs = brute_force(q, db, d, cap)?;
            ((0..rs.len()).map(|i| rs.weight(i).clone()).collect(), rs.counters.clone())
        }
    };
    if let Some(k) = cfg.k {
        weights.truncate(k);
    }
    Ok(Side { label: "brute".into(), tuples: db.size(), weights, first: counters.clone(), last: counters })
}

impl DioidTask for CompareTask<'_> {
    type Out = Result<bool, CliError>;

    fn run<D>(self, d: D) -> Self::Out
    where
        D: SelectiveDioid,
        D::Weight: Approx,
    {
        let CompareTask { cfg, prep_a, prep_b, out } = self;
        let a = collect(&cfg.base, prep_a, &d)?;
        let b = match cfg.against {
            Against::Brute => brute(&cfg.base, prep_b, &d, cfg.brute_cap)?,
            Against::Algorithm(algo) => collect(&RunConfig { algorithm: algo, ..cfg.base.clone() }, prep_b, &d)?,
        };
        writeln!(out, "side\talgorithm\ttuples\tresults\tttf_ops\ttotal_ops\tpq_push\tpq_pop\tcomparisons\tcandidates_live")?;
        for (name, s) in [("a", &a), ("b", &b)] {
            let cols: Vec<String> = s.row().iter().map(u64::to_string).collect();
            writeln!(out, "{name}\t{}\t{}", s.label, cols.join("\t"))?;
        }
        let ratios: Vec<String> = a
            .row()
            .iter()
            .zip(b.row())
            .map(|(&x, y)| if x == 0 { "-".to_string() } else { format!("{:.3}", y as f64 / x as f64) })
            .collect();
        writeln!(out, "ratio\tb/a\t{}", ratios.join("\t"))?;
        if prep_a.db.size() != prep_b.db.size() {
            writeln!(out, "inputs differ; sequences not compared")?;
            return Ok(true);
        }
        let mismatch = a.weights.iter().zip(&b.weights).position(|(x, y)| !x.approx(y));
        match (mismatch, a.weights.len() == b.weights.len()) {
            (None, true) => {
                writeln!(out, "sequences equal ({} answers)", a.weights.len())?;
                Ok(true)
            }
            (Some(i), _) => {
                writeln!(
                    out,
                    "sequences differ at rank {}: {} vs {}",
                    i + 1,
                    format_weight(&d, &a.weights[i]),
                    format_weight(&d, &b.weights[i])
                )?;
                Ok(false)
            }
            (None, false) => {
                writeln!(out, "sequences differ in length: {} vs {}", a.weights.len(), b.weights.len())?;
                Ok(false)
            }
        }
    }
}

/// Runs both sides and writes a report.  Returns whether the weight
/// sequences agree.
pub fn compare(cfg: &CompareConfig, out: &mut dyn Write) -> Result<bool, CliError> {
    cfg.base.validate()?;
    let prep_a = prepare(&cfg.base)?;
    let prep_b = match cfg.against_size {
        None => prep_a.clone(),
        Some(n) => {
            let data = match cfg.base.data {
                DataSource::Uniform(_) => DataSource::Uniform(n),
                DataSource::WorstCase(_) => DataSource::WorstCase(n),
                DataSource::Adversarial(_) => DataSource::Adversarial(n),
                DataSource::Files(_) => return Err(CliError::Config("--against-size needs generated data".into())),
            };
            let other = RunConfig { data, ..cfg.base.clone() };
            other.validate()?;
            prepare(&other)?
        }
    };
    check_width(cfg.base.dioid, &prep_a.query)?;
    let atoms = prep_a.query.atoms().len();
    with_dioid(cfg.base.dioid, cfg.base.tiebreak, atoms, CompareTask { cfg, prep_a: &prep_a, prep_b: &prep_b, out })
}
