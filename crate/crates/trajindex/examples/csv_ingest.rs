//! CSV round trip with cleaning: write a messy `id,t,x,y` file, load it
//! back, and show the sorted, deduplicated trajectories plus the cleaning
//! counters.
//!
//! Run with: cargo run --example csv_ingest

use trajindex::bench::load_csv;

fn main() {
    let dir = std::env::temp_dir().join("trajindex-csv-ingest");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("vehicles.csv");

    // Row 4 duplicates (id=7, t=60); rows for id=9 arrive out of order.
    std::fs::write(
        &path,
        "id,t,x,y\n\
         7,0,100.0,200.0\n\
         7,60,110.0,210.0\n\
         7,120,120.0,220.0\n\
         7,60,999.0,999.0\n\
         9,300,50.0,50.0\n\
         9,180,30.0,30.0\n\
         9,240,40.0,40.0\n",
    )
    .unwrap();

    let (store, stats) = load_csv(&path).unwrap();
    println!(
        "loaded {} trajectories; dropped {} duplicate timestamps, re-sorted {} rows\n",
        store.len(),
        stats.duplicate_timestamps,
        stats.out_of_order_rows
    );
    for (id, t) in &store {
        println!("vehicle {} ({} instants, bbox {:?}):", id.0, t.num_instants(), t.bbox());
        for i in t.instants() {
            println!("  t={:>5}  ({:>6.1}, {:>6.1})", i.t, i.x, i.y);
        }
    }

    // Malformed rows fail with the line number rather than loading silently.
    let bad = dir.join("bad.csv");
    std::fs::write(&bad, "id,t,x,y\n7,0,1.0,2.0\n7,not-a-number,3.0,4.0\n").unwrap();
    println!("\nmalformed file: {}", load_csv(&bad).unwrap_err());
}
