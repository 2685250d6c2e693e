//! Command-line arguments.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use anyk_core::Algorithm;
use clap::{ArgGroup, Args, Parser, Subcommand};

use crate::config::{DataSource, DioidSpec, Projection, QuerySource, RunConfig, ShapeKind};
use crate::error::CliError;
use crate::runner::{self, Against, CompareConfig};

#[derive(Debug, Parser)]
#[command(name = "anyk", version, about = "Ranked enumeration of join query answers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Enumerate answers in weight order as TSV.
    Run(RunArgs),
    /// Run two algorithms on the same input and compare their weights.
    Compare(CompareArgs),
}

fn parse<T: FromStr<Err = CliError>>(s: &str) -> Result<T, String> {
    s.parse().map_err(|e: CliError| e.to_string())
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse().map_err(|e: anyk_core::Error| e.to_string())
}

#[derive(Debug, Clone, Args)]
#[command(group(ArgGroup::new("query_source").required(true).args(["shape", "query"])))]
#[command(group(ArgGroup::new("data_source").required(true).args(["data", "gen_uniform", "gen_worst_case", "gen_adversarial"])))]
pub struct RunArgs {
    /// Query shape: path, star or cycle.
    #[arg(long, value_parser = parse::<ShapeKind>)]
    pub shape: Option<ShapeKind>,
    /// Number of atoms of the shape.
    #[arg(long, default_value_t = 3)]
    pub length: usize,
    /// Query as JSON: {"atoms":[{"rel":"R1","vars":["x1","x2"]}],"free":["x1"]}.
    #[arg(long, value_name = "FILE")]
    pub query: Option<PathBuf>,
    /// Edge list `src,dst,weight`; one shared file or one per relation.
    #[arg(long, value_name = "CSV")]
    pub data: Vec<PathBuf>,
    /// N tuples per relation, values uniform on 1..=N/10.
    #[arg(long, value_name = "N")]
    pub gen_uniform: Option<usize>,
    /// N tuples per relation of the form (0,i) and (i,0).
    #[arg(long, value_name = "N")]
    pub gen_worst_case: Option<usize>,
    /// The adversarial 4-cycle database with 2N tuples per relation.
    #[arg(long, value_name = "N")]
    pub gen_adversarial: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// eager, lazy, all, take2, recursive or batch.
    #[arg(long, default_value = "take2", value_parser = parse_algorithm)]
    pub algorithm: Algorithm,
    /// min-sum, max-sum, max-times, bool or lex:<n>.
    #[arg(long, default_value = "min-sum", value_parser = parse::<DioidSpec>)]
    pub dioid: DioidSpec,
    /// Break weight ties by tuple ids.
    #[arg(long)]
    pub tiebreak: bool,
    /// Free variables, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub free: Option<Vec<String>>,
    /// all-weight or min-weight.
    #[arg(long, value_parser = parse::<Projection>)]
    pub projection: Option<Projection>,
    /// Stop after K answers.
    #[arg(long)]
    pub k: Option<usize>,
    /// Repeat the run and report median times.
    #[arg(long, default_value_t = 1)]
    pub repeats: usize,
    /// Write checkpoint counters as CSV.
    #[arg(long, value_name = "PATH")]
    pub metrics: Option<PathBuf>,
    /// Print the DP graph to stderr.
    #[arg(long)]
    pub dump_dp: bool,
    /// Print the join tree or decomposition to stderr.
    #[arg(long)]
    pub dump_plan: bool,
    /// Build all choice structures before the first answer.
    #[arg(long)]
    pub eager_init: bool,
}

impl RunArgs {
    pub fn config(&self) -> RunConfig {
        let query = match (&self.query, self.shape) {
            (Some(path), _) => QuerySource::Json(path.clone()),
            (None, kind) => QuerySource::Shape { kind: kind.unwrap_or(ShapeKind::Path), length: self.length },
        };
        let data = match (self.gen_uniform, self.gen_worst_case, self.gen_adversarial) {
            (Some(n), _, _) => DataSource::Uniform(n),
            (_, Some(n), _) => DataSource::WorstCase(n),
            (_, _, Some(n)) => DataSource::Adversarial(n),
            _ => DataSource::Files(self.data.clone()),
        };
        RunConfig {
            seed: self.seed,
            algorithm: self.algorithm,
            dioid: self.dioid,
            tiebreak: self.tiebreak,
            free: self.free.clone(),
            projection: self.projection,
            k: self.k,
            repeats: self.repeats,
            metrics: self.metrics.clone(),
            dump_dp: self.dump_dp,
            dump_plan: self.dump_plan,
            eager_init: self.eager_init,
            ..RunConfig::new(query, data)
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Second algorithm, or `brute` for the brute-force oracle.
    #[arg(long, value_parser = parse::<Against>)]
    pub against: Against,
    /// Generator size for the second side.
    #[arg(long, value_name = "N")]
    pub against_size: Option<usize>,
    /// Largest cross product the brute-force oracle accepts.
    #[arg(long, default_value_t = 10_000_000)]
    pub brute_cap: u128,
}

/// Parses `args` and runs the command.  Returns the process exit code:
/// 0 on success, 1 on a failed comparison, 2 on a bad request and 3 on
/// bad input data.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = err.write_all(text.as_bytes());
                2
            } else {
                let _ = out.write_all(text.as_bytes());
                0
            };
        }
    };
    let result = match &cli.command {
        Command::Run(args) => runner::run(&args.config(), out, err).map(|_| true),
        Command::Compare(args) => {
            let cfg = CompareConfig {
                base: args.run.config(),
                against: args.against,
                against_size: args.against_size,
                brute_cap: args.brute_cap,
            };
            runner::compare(&cfg, out)
        }
    };
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
