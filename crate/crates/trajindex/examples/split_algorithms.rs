//! Compare the splitting algorithms on one circling trajectory: box counts,
//! total padded volume, and the gap to the dynamic-programming optimum.
//!
//! Run with: cargo run --example split_algorithms

use trajindex::split::{
    adapt_split, equi_split, linear_split, merge_split, optimal_split_volume, seg_split,
};
use trajindex::{Instant, TrajectorySequence, TupleId, VolumeModel};

fn main() {
    // A vehicle circling the block: the single bounding box covers the whole
    // disc even though the vehicle only ever visits the rim.
    let n = 60;
    let instants = (0..n)
        .map(|i| {
            let a = std::f64::consts::TAU * i as f64 / n as f64;
            Instant::new(100.0 * a.cos(), 100.0 * a.sin(), i as f64 * 60.0)
        })
        .collect();
    let t = TrajectorySequence::new(TupleId(1), instants).unwrap();
    let vm = VolumeModel::from_extent(&t.bbox(), 1.0);

    let total = |boxes: &[trajindex::STBox]| -> f64 { boxes.iter().map(|b| vm.volume(b)).sum() };
    let whole = vm.volume(&t.bbox());
    println!("{} instants, single-box volume {whole:.3e}\n", t.num_instants());
    println!("{:<14} {:>5} {:>12} {:>10}", "algorithm", "boxes", "total volume", "vs 1 box");
    let show = |name: &str, boxes: Vec<trajindex::STBox>| {
        let v = total(&boxes);
        println!("{:<14} {:>5} {:>12.3e} {:>9.1}%", name, boxes.len(), v, 100.0 * v / whole);
    };
    show("none", vec![t.bbox()]);
    show("equi k=8", equi_split(&t, 8).unwrap());
    show("seg m=8", seg_split(&t, 8).unwrap());
    show("merge k=8", merge_split(&t, 8, &vm).unwrap());
    show("adapt m=8", adapt_split(&t, 8, &vm).unwrap());
    show("linear", linear_split(&t, 10.0, 10.0, 300.0).unwrap());

    let (boxes, optimum) = optimal_split_volume(&t, 8, &vm).unwrap();
    println!("\nexact optimum for 8 boxes: {optimum:.3e} ({} boxes, O(n^2 k) dynamic program)", boxes.len());
    let greedy = total(&merge_split(&t, 8, &vm).unwrap());
    println!("greedy merge comes within {:.2}% of it", 100.0 * (greedy / optimum - 1.0));
}
