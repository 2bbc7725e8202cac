//! Full benchmark pipeline in-process: generate a dataset, build two index
//! configurations, run the default mixed workload, and emit JSON reports.
//! (The `trajindex-bench` binary drives the same path from the shell.)
//!
//! Run with: cargo run --example benchmark_report

use trajindex::bench::{
    self, DatasetSpec, MovementModel, Report, ReportConfig, WorkloadSpec,
};
use trajindex::{IndexKind, SplitAlgorithm, Store, TreeParams};

fn main() {
    let data = bench::generate(&DatasetSpec {
        vehicles: 60,
        trips_per_vehicle: 1,
        model: MovementModel::Loop,
        ..Default::default()
    });
    let store: Store = data.into_iter().map(|t| (t.tuple_id(), t)).collect();
    let extent = bench::dataset_extent(&store).unwrap();
    let workload = WorkloadSpec::default();
    let queries = bench::generate_queries(&workload, &extent);
    let params = TreeParams::default();

    let dir = std::env::temp_dir().join("trajindex-benchmark-report");
    std::fs::create_dir_all(&dir).unwrap();

    let mut baseline_results = None;
    for algorithm in [SplitAlgorithm::None, SplitAlgorithm::Merge { k: 10 }] {
        let (index, build) =
            bench::build(&store, IndexKind::RTree, algorithm, &params, 1.0).unwrap();
        let (records, outcomes) = bench::run(&index, &store, &queries).unwrap();
        let report = Report {
            config: ReportConfig {
                index: IndexKind::RTree.name().to_string(),
                split: bench::describe_split(&algorithm),
                node_capacity: params.node_capacity,
                fill_factor: params.fill_factor,
                bucket: params.bucket,
                workload_seed: workload.seed,
            },
            build,
            aggregate: bench::aggregate(&records),
            queries: records,
        };
        let path = dir.join(format!("report-{}.json", report.config.split.replace(['(', ')', '=', ','], "-")));
        bench::report_emit(&report, &path).unwrap();
        println!(
            "split={:<12} entries={:>5} nodes={:>4} candidates={:>5} results={:>4}  -> {}",
            report.config.split,
            report.build.entries,
            report.build.nodes,
            report.aggregate.candidates,
            report.aggregate.results,
            path.display()
        );
        // Result sets are split-invariant; only the counters above move.
        let tuples: Vec<_> = outcomes.iter().map(|o| o.tuples.clone()).collect();
        match &baseline_results {
            None => baseline_results = Some(tuples),
            Some(expect) => assert_eq!(&tuples, expect, "split changed query answers"),
        }
    }
}
