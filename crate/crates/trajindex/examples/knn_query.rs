//! Nearest-neighbor search: the five vehicles that passed closest to a
//! point, with and without a time window, checked against a linear scan.
//!
//! Run with: cargo run --example knn_query

use trajindex::bench::{self, DatasetSpec};
use trajindex::query::knn;
use trajindex::{oracle, IndexKind, KnnQuery, Period, SplitAlgorithm, Store, TreeParams};

fn main() {
    let data = bench::generate(&DatasetSpec { vehicles: 100, ..Default::default() });
    let store: Store = data.into_iter().map(|t| (t.tuple_id(), t)).collect();
    let (index, _) = bench::build(
        &store,
        IndexKind::RTree,
        SplitAlgorithm::Merge { k: 10 },
        &TreeParams::default(),
        1.0,
    )
    .unwrap();

    for period in [None, Some(Period::new(0.0, 900.0))] {
        let q = KnnQuery { x: 5_000.0, y: 5_000.0, period, k: 5 };
        let r = knn(&index, &store, &q).unwrap();
        match period {
            None => println!("5 nearest to the center, any time:"),
            Some(p) => println!("\n5 nearest to the center during [{}, {}]s:", p.tstart, p.tend),
        }
        for (id, dist) in &r.hits {
            println!("  vehicle {:>3}  nearest approach {:>8.1} m", id.0, dist);
        }
        println!(
            "  ({} of {} tuples ever scored an exact distance)",
            r.stats.candidates,
            store.len()
        );
        assert_eq!(r.hits, oracle::knn_scan(&store, &q).unwrap(), "index disagrees with scan");
    }
    println!("\nBoth answers verified against the brute-force nearest-approach sort.");
}
