//! Thin command-line front end over the library's benchmark harness.
//!
//! Subcommands: `generate` a synthetic CSV dataset, `build-and-run` a
//! workload against a chosen index/split configuration and emit a JSON
//! report, and `oracle-check` the index answers against a linear scan.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use trajindex::bench::{
    self, BenchQuery, DatasetSpec, MovementModel, Report, ReportConfig, WorkloadSpec,
};
use trajindex::{oracle, IndexKind, SplitAlgorithm, TreeParams};

#[derive(Parser)]
#[command(name = "trajindex-bench", about = "Trajectory index benchmark driver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic trajectory dataset as CSV (`id,t,x,y`).
    Generate(GenerateArgs),
    /// Build an index over a CSV dataset, run a workload, emit a JSON report.
    BuildAndRun(RunArgs),
    /// Compare index answers against a brute-force linear scan.
    OracleCheck(RunArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 50)]
    vehicles: u64,
    #[arg(long, default_value_t = 2)]
    trips: u64,
    /// Mean instants per trip.
    #[arg(long, default_value_t = 100)]
    instants: usize,
    /// Side length of the square region.
    #[arg(long, default_value_t = 10_000.0)]
    extent: f64,
    /// Duration of one trip, in seconds.
    #[arg(long, default_value_t = 3_600.0)]
    time_span: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = ModelArg::RandomWaypoint)]
    model: ModelArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    RandomWaypoint,
    Loop,
}

#[derive(Clone, Copy, ValueEnum)]
enum IndexArg {
    Rtree,
    Quadtree,
    Kdtree,
}

impl IndexArg {
    fn kind(self) -> IndexKind {
        match self {
            IndexArg::Rtree => IndexKind::RTree,
            IndexArg::Quadtree => IndexKind::QuadTree,
            IndexArg::Kdtree => IndexKind::KdTree,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SplitArg {
    None,
    Equi,
    Seg,
    Merge,
    Adapt,
    Linear,
}

#[derive(Args)]
struct RunArgs {
    /// Input CSV dataset.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value_t = IndexArg::Rtree)]
    index: IndexArg,
    #[arg(long, value_enum, default_value_t = SplitArg::Merge)]
    split: SplitArg,
    /// Target number of boxes per trajectory (equi, merge, adapt uses ceil(n/m)).
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// Segments per box (seg, adapt).
    #[arg(long, default_value_t = 10)]
    m: usize,
    /// Expected query extent in x (linear split).
    #[arg(long, default_value_t = 100.0)]
    qx: f64,
    /// Expected query extent in y (linear split).
    #[arg(long, default_value_t = 100.0)]
    qy: f64,
    /// Expected query extent in t (linear split).
    #[arg(long, default_value_t = 600.0)]
    qt: f64,
    /// Space-partitioning tree bucket size.
    #[arg(long, default_value_t = 16)]
    bucket: usize,
    /// Balanced tree node capacity.
    #[arg(long, default_value_t = 64)]
    node_cap: usize,
    /// Balanced tree minimum fill factor.
    #[arg(long, default_value_t = 0.4)]
    fill: f64,
    /// Workload seed (ignored if --workload supplies one).
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Workload spec JSON; defaults to a mixed point/region/knn workload.
    #[arg(long)]
    workload: Option<PathBuf>,
    /// Report output path (build-and-run only; defaults to stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn algorithm(&self) -> SplitAlgorithm {
        match self.split {
            SplitArg::None => SplitAlgorithm::None,
            SplitArg::Equi => SplitAlgorithm::Equi { k: self.k },
            SplitArg::Seg => SplitAlgorithm::Seg { m: self.m },
            SplitArg::Merge => SplitAlgorithm::Merge { k: self.k },
            SplitArg::Adapt => SplitAlgorithm::Adapt { m: self.m },
            SplitArg::Linear => {
                SplitAlgorithm::Linear { qx: self.qx, qy: self.qy, qt: self.qt }
            }
        }
    }

    fn params(&self) -> TreeParams {
        TreeParams { node_capacity: self.node_cap, fill_factor: self.fill, bucket: self.bucket }
    }

    fn workload(&self) -> Result<WorkloadSpec, String> {
        match &self.workload {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
                serde_json::from_str(&text)
                    .map_err(|e| format!("bad workload {}: {e}", path.display()))
            }
            None => Ok(WorkloadSpec { seed: self.seed, ..Default::default() }),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(args) => generate(&args),
        Command::BuildAndRun(args) => build_and_run(&args),
        Command::OracleCheck(args) => oracle_check(&args),
    };
    match result {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}

fn generate(args: &GenerateArgs) -> Result<ExitCode, String> {
    let spec = DatasetSpec {
        vehicles: args.vehicles,
        trips_per_vehicle: args.trips,
        instants_per_trip: args.instants,
        extent: args.extent,
        time_span: args.time_span,
        seed: args.seed,
        model: match args.model {
            ModelArg::RandomWaypoint => MovementModel::RandomWaypoint,
            ModelArg::Loop => MovementModel::Loop,
        },
    };
    let data = bench::generate(&spec);
    let instants: usize = data.iter().map(|t| t.num_instants()).sum();
    bench::write_csv(&args.out, &data).map_err(|e| e.to_string())?;
    eprintln!("wrote {} trajectories ({instants} instants) to {}", data.len(), args.out.display());
    Ok(ExitCode::SUCCESS)
}

fn prepare(
    args: &RunArgs,
) -> Result<(trajindex::Store, trajindex::Index, bench::BuildStats, Vec<BenchQuery>), String> {
    let (store, cleaning) = bench::load_csv(&args.data).map_err(|e| e.to_string())?;
    if cleaning.duplicate_timestamps > 0 || cleaning.out_of_order_rows > 0 {
        eprintln!(
            "cleaned input: {} duplicate timestamps dropped, {} out-of-order rows re-sorted",
            cleaning.duplicate_timestamps, cleaning.out_of_order_rows
        );
    }
    let (index, stats) =
        bench::build(&store, args.index.kind(), args.algorithm(), &args.params(), 1.0)
            .map_err(|e| e.to_string())?;
    let extent = bench::dataset_extent(&store).ok_or("dataset is empty")?;
    let workload = args.workload()?;
    let queries = bench::generate_queries(&workload, &extent);
    Ok((store, index, stats, queries))
}

fn build_and_run(args: &RunArgs) -> Result<ExitCode, String> {
    let (store, index, build, queries) = prepare(args)?;
    let (records, _) = bench::run(&index, &store, &queries).map_err(|e| e.to_string())?;
    let report = Report {
        config: ReportConfig {
            index: args.index.kind().name().to_string(),
            split: bench::describe_split(&args.algorithm()),
            node_capacity: args.node_cap,
            fill_factor: args.fill,
            bucket: args.bucket,
            workload_seed: args.workload()?.seed,
        },
        build,
        aggregate: bench::aggregate(&records),
        queries: records,
    };
    match &args.out {
        Some(path) => {
            bench::report_emit(&report, path)
                .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
            eprintln!("report written to {}", path.display());
        }
        None => {
            println!("{}", serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?)
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn oracle_check(args: &RunArgs) -> Result<ExitCode, String> {
    let (store, index, _, queries) = prepare(args)?;
    let (_, outcomes) = bench::run(&index, &store, &queries).map_err(|e| e.to_string())?;
    let mut mismatches = 0usize;
    for (i, (q, outcome)) in queries.iter().zip(&outcomes).enumerate() {
        let ok = match q {
            BenchQuery::Range { query, .. } => {
                let expect = oracle::range_scan(&store, query);
                if expect == outcome.tuples {
                    true
                } else {
                    eprintln!(
                        "query {i} ({}): index {:?} != scan {:?}",
                        q.kind(),
                        outcome.tuples,
                        expect
                    );
                    false
                }
            }
            BenchQuery::Knn { query, .. } => {
                let expect = oracle::knn_scan(&store, query).map_err(|e| e.to_string())?;
                let got: Vec<_> = outcome
                    .tuples
                    .iter()
                    .copied()
                    .zip(outcome.distances.as_deref().unwrap_or(&[]).iter().copied())
                    .collect();
                if expect == got {
                    true
                } else {
                    eprintln!("query {i} ({}): index {got:?} != scan {expect:?}", q.kind());
                    false
                }
            }
        };
        if !ok {
            mismatches += 1;
        }
    }
    if mismatches == 0 {
        println!("oracle-check: {} queries, all match", queries.len());
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("oracle-check: {mismatches}/{} queries mismatched", queries.len());
        Ok(ExitCode::FAILURE)
    }
}
