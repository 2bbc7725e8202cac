//! Benchmark harness: synthetic dataset generation, CSV ingestion, index
//! construction, workload execution and machine-readable reports.

use std::io::Write;
use std::path::Path;
use std::time::Instant as WallClock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::{Index, IndexKind, TreeParams};
use crate::query::{self, KnnQuery, Operator, RangeQuery, RefinePredicate, Store};
use crate::split::{extract_value, SplitAlgorithm, SplitConfig};
use crate::stbox::{STBox, VolumeModel};
use crate::traj::{Instant, Period, Region, TrajectorySequence, TupleId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MovementModel {
    /// Piecewise travel toward random waypoints inside the region.
    RandomWaypoint,
    /// Circling trips whose bounding box is much larger than the swept
    /// corridor, the worst case for single-box indexing.
    Loop,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub vehicles: u64,
    pub trips_per_vehicle: u64,
    /// Mean instants per trip; actual counts vary around this.
    pub instants_per_trip: usize,
    /// Side length of the square region, in coordinate units.
    pub extent: f64,
    /// Duration of one trip, in seconds.
    pub time_span: f64,
    pub seed: u64,
    pub model: MovementModel,
}

impl Default for DatasetSpec {
    fn default() -> DatasetSpec {
        DatasetSpec {
            vehicles: 50,
            trips_per_vehicle: 2,
            instants_per_trip: 100,
            extent: 10_000.0,
            time_span: 3_600.0,
            seed: 42,
            model: MovementModel::RandomWaypoint,
        }
    }
}

/// Deterministic synthetic trajectories: same spec, same output.
pub fn generate(spec: &DatasetSpec) -> Vec<TrajectorySequence> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = Vec::new();
    let mut next_id = 0u64;
    for _vehicle in 0..spec.vehicles {
        for trip in 0..spec.trips_per_vehicle {
            let n = if spec.instants_per_trip <= 2 {
                spec.instants_per_trip.max(1)
            } else {
                rng.gen_range(spec.instants_per_trip / 2..=spec.instants_per_trip * 3 / 2).max(2)
            };
            let t_start = trip as f64 * spec.time_span;
            let points = match spec.model {
                MovementModel::RandomWaypoint => {
                    random_waypoint_trip(&mut rng, spec, n, t_start)
                }
                MovementModel::Loop => loop_trip(&mut rng, spec, n, t_start),
            };
            out.push(TrajectorySequence::new(TupleId(next_id), points).expect("generated trip"));
            next_id += 1;
        }
    }
    out
}

fn random_waypoint_trip(
    rng: &mut ChaCha8Rng,
    spec: &DatasetSpec,
    n: usize,
    t_start: f64,
) -> Vec<Instant> {
    let dt = if n > 1 { spec.time_span / (n - 1) as f64 } else { spec.time_span };
    let mut x = rng.gen_range(0.0..spec.extent);
    let mut y = rng.gen_range(0.0..spec.extent);
    let mut wx = rng.gen_range(0.0..spec.extent);
    let mut wy = rng.gen_range(0.0..spec.extent);
    let step = spec.extent / 20.0;
    let mut points = Vec::with_capacity(n);
    for i in 0..n {
        points.push(Instant::new(x, y, t_start + i as f64 * dt));
        let (dx, dy) = (wx - x, wy - y);
        let dist = (dx * dx + dy * dy).sqrt();
        if dist < step {
            x = wx;
            y = wy;
            wx = rng.gen_range(0.0..spec.extent);
            wy = rng.gen_range(0.0..spec.extent);
        } else {
            x += dx / dist * step;
            y += dy / dist * step;
        }
    }
    points
}

fn loop_trip(rng: &mut ChaCha8Rng, spec: &DatasetSpec, n: usize, t_start: f64) -> Vec<Instant> {
    let dt = if n > 1 { spec.time_span / (n - 1) as f64 } else { spec.time_span };
    let cx = spec.extent / 2.0 + rng.gen_range(-0.05..0.05) * spec.extent;
    let cy = spec.extent / 2.0 + rng.gen_range(-0.05..0.05) * spec.extent;
    let radius = rng.gen_range(0.25..0.35) * spec.extent;
    let phase = rng.gen_range(0.0..std::f64::consts::TAU);
    (0..n)
        .map(|i| {
            let angle = phase + std::f64::consts::TAU * i as f64 / n.max(2) as f64;
            Instant::new(
                cx + radius * angle.cos(),
                cy + radius * angle.sin(),
                t_start + i as f64 * dt,
            )
        })
        .collect()
}

/// Counters from CSV cleaning.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleaningStats {
    /// Rows dropped because another row of the same id had the same timestamp.
    pub duplicate_timestamps: usize,
    /// Rows that arrived out of timestamp order and were re-sorted.
    pub out_of_order_rows: usize,
}

/// Write trajectories in the `id,t,x,y` CSV contract.
pub fn write_csv(path: &Path, trajectories: &[TrajectorySequence]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["id", "t", "x", "y"])?;
    for t in trajectories {
        for inst in t.instants() {
            w.write_record([
                t.tuple_id().0.to_string(),
                format!("{:?}", inst.t),
                format!("{:?}", inst.x),
                format!("{:?}", inst.y),
            ])
            ?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Load the `id,t,x,y` CSV contract: rows grouped by id, sorted by t,
/// duplicate timestamps collapsed to the first occurrence.
pub fn load_csv(path: &Path) -> Result<(Store, CleaningStats)> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let mut rows: std::collections::BTreeMap<u64, Vec<(f64, f64, f64)>> = Default::default();
    let mut stats = CleaningStats::default();
    for record in reader.records() {
        let record = record.map_err(|e| Error::CsvParse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let parse_field = |i: usize, name: &str| -> Result<f64> {
            record
                .get(i)
                .ok_or_else(|| Error::CsvParse { line, message: format!("missing {name}") })?
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::CsvParse { line, message: format!("bad {name}: {e}") })
        };
        let id = record
            .get(0)
            .ok_or_else(|| Error::CsvParse { line, message: "missing id".into() })?
            .trim()
            .parse::<u64>()
            .map_err(|e| Error::CsvParse { line, message: format!("bad id: {e}") })?;
        let t = parse_field(1, "t")?;
        let x = parse_field(2, "x")?;
        let y = parse_field(3, "y")?;
        let group = rows.entry(id).or_default();
        if group.last().is_some_and(|last| t < last.0) {
            stats.out_of_order_rows += 1;
        }
        group.push((t, x, y));
    }
    let mut store = Store::new();
    for (id, mut group) in rows {
        group.sort_by(|a, b| a.0.total_cmp(&b.0)); // stable: first occurrence wins ties
        let before = group.len();
        group.dedup_by(|a, b| a.0 == b.0);
        stats.duplicate_timestamps += before - group.len();
        let instants = group.into_iter().map(|(t, x, y)| Instant::new(x, y, t)).collect();
        store.insert(TupleId(id), TrajectorySequence::new(TupleId(id), instants)?);
    }
    Ok((store, stats))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BuildStats {
    pub entries: usize,
    pub nodes: usize,
    pub ms: f64,
}

/// Union box of every trajectory in the store.
pub fn dataset_extent(store: &Store) -> Option<STBox> {
    let mut it = store.values().map(|t| t.bbox());
    let first = it.next()?;
    Some(it.fold(first, |a, b| a.union(&b)))
}

/// Split every trajectory with the configured algorithm and insert all
/// entries. Volume padding derives from the dataset extent.
pub fn build(
    store: &Store,
    kind: IndexKind,
    algorithm: SplitAlgorithm,
    params: &TreeParams,
    time_scale: f64,
) -> Result<(Index, BuildStats)> {
    let extent = dataset_extent(store).unwrap_or_else(|| STBox::point(0.0, 0.0, 0.0));
    let volume = VolumeModel::from_extent(&extent, time_scale);
    let cfg = SplitConfig::new(algorithm, volume)?;
    let start = WallClock::now();
    let mut index = Index::new(kind, params, volume);
    for t in store.values() {
        index.insert_all(extract_value(t, &cfg)?);
    }
    let ms = start.elapsed().as_secs_f64() * 1e3;
    let stats = BuildStats { entries: index.entry_count(), nodes: index.node_count(), ms };
    Ok((index, stats))
}

/// One workload group: a query kind plus its generation parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QueryGroup {
    /// Spatial point queries: which trajectories passed within eps.
    Point { count: usize, eps: f64 },
    /// Point at a short period: passed within eps during the period.
    PointPeriod { count: usize, eps: f64, duration: f64 },
    /// Rectangle during a period.
    RegionPeriod { count: usize, width: f64, height: f64, duration: f64 },
    /// k nearest trajectories to a point.
    Knn { count: usize, k: usize },
    /// k nearest during a period.
    KnnPeriod { count: usize, k: usize, duration: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkloadSpec {
    pub seed: u64,
    pub groups: Vec<QueryGroup>,
}

impl Default for WorkloadSpec {
    fn default() -> WorkloadSpec {
        WorkloadSpec {
            seed: 7,
            groups: vec![
                QueryGroup::Point { count: 20, eps: 50.0 },
                QueryGroup::PointPeriod { count: 20, eps: 50.0, duration: 600.0 },
                QueryGroup::RegionPeriod { count: 20, width: 500.0, height: 500.0, duration: 600.0 },
                QueryGroup::Knn { count: 10, k: 5 },
                QueryGroup::KnnPeriod { count: 10, k: 5, duration: 1800.0 },
            ],
        }
    }
}

/// A concrete generated query.
#[derive(Debug, Clone, PartialEq)]
pub enum BenchQuery {
    Range { kind: &'static str, query: RangeQuery },
    Knn { kind: &'static str, query: KnnQuery },
}

impl BenchQuery {
    pub fn kind(&self) -> &'static str {
        match self {
            BenchQuery::Range { kind, .. } => kind,
            BenchQuery::Knn { kind, .. } => kind,
        }
    }
}

/// Instantiate the workload's queries inside the dataset extent.
pub fn generate_queries(spec: &WorkloadSpec, extent: &STBox) -> Vec<BenchQuery> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = Vec::new();
    let sample_x = |rng: &mut ChaCha8Rng| rng.gen_range(extent.xmin..=extent.xmax);
    let sample_y = |rng: &mut ChaCha8Rng| rng.gen_range(extent.ymin..=extent.ymax);
    for group in &spec.groups {
        match *group {
            QueryGroup::Point { count, eps } => {
                for _ in 0..count {
                    let (x, y) = (sample_x(&mut rng), sample_y(&mut rng));
                    out.push(BenchQuery::Range {
                        kind: "point",
                        query: RangeQuery {
                            bounds: STBox::spatial(x - eps, x + eps, y - eps, y + eps),
                            operator: Operator::Overlaps,
                            refine: Some(RefinePredicate::Point { x, y, eps, period: None }),
                        },
                    });
                }
            }
            QueryGroup::PointPeriod { count, eps, duration } => {
                for _ in 0..count {
                    let (x, y) = (sample_x(&mut rng), sample_y(&mut rng));
                    let t0 = rng.gen_range(extent.tmin..=(extent.tmax - duration).max(extent.tmin));
                    let period = Period::new(t0, t0 + duration);
                    out.push(BenchQuery::Range {
                        kind: "point_period",
                        query: RangeQuery {
                            bounds: STBox::new(
                                x - eps,
                                x + eps,
                                y - eps,
                                y + eps,
                                period.tstart,
                                period.tend,
                            ),
                            operator: Operator::Overlaps,
                            refine: Some(RefinePredicate::Point { x, y, eps, period: Some(period) }),
                        },
                    });
                }
            }
            QueryGroup::RegionPeriod { count, width, height, duration } => {
                for _ in 0..count {
                    let x = rng.gen_range(extent.xmin..=(extent.xmax - width).max(extent.xmin));
                    let y = rng.gen_range(extent.ymin..=(extent.ymax - height).max(extent.ymin));
                    let t0 = rng.gen_range(extent.tmin..=(extent.tmax - duration).max(extent.tmin));
                    let region = Region::new(x, x + width, y, y + height);
                    let period = Period::new(t0, t0 + duration);
                    out.push(BenchQuery::Range {
                        kind: "region_period",
                        query: RangeQuery {
                            bounds: STBox::new(
                                region.xmin,
                                region.xmax,
                                region.ymin,
                                region.ymax,
                                period.tstart,
                                period.tend,
                            ),
                            operator: Operator::Overlaps,
                            refine: Some(RefinePredicate::Region { region, period: Some(period) }),
                        },
                    });
                }
            }
            QueryGroup::Knn { count, k } => {
                for _ in 0..count {
                    out.push(BenchQuery::Knn {
                        kind: "knn",
                        query: KnnQuery {
                            x: sample_x(&mut rng),
                            y: sample_y(&mut rng),
                            period: None,
                            k,
                        },
                    });
                }
            }
            QueryGroup::KnnPeriod { count, k, duration } => {
                for _ in 0..count {
                    let x = sample_x(&mut rng);
                    let y = sample_y(&mut rng);
                    let t0 = rng.gen_range(extent.tmin..=(extent.tmax - duration).max(extent.tmin));
                    out.push(BenchQuery::Knn {
                        kind: "knn_period",
                        query: KnnQuery { x, y, period: Some(Period::new(t0, t0 + duration)), k },
                    });
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub kind: String,
    pub matched_entries: usize,
    pub candidates: usize,
    pub results: usize,
    pub ms: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub queries: usize,
    pub matched_entries: usize,
    pub candidates: usize,
    pub results: usize,
    pub ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub index: String,
    pub split: String,
    pub node_capacity: usize,
    pub fill_factor: f64,
    pub bucket: usize,
    pub workload_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: ReportConfig,
    pub build: BuildStats,
    pub queries: Vec<QueryRecord>,
    pub aggregate: Aggregate,
}

/// Result tuples of one executed query, kept for cross-variant comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryOutcome {
    pub tuples: Vec<TupleId>,
    /// Exact distances, for nearest-neighbor queries.
    pub distances: Option<Vec<f64>>,
}

pub fn describe_split(algorithm: &SplitAlgorithm) -> String {
    match algorithm {
        SplitAlgorithm::None => "none".into(),
        SplitAlgorithm::Equi { k } => format!("equi(k={k})"),
        SplitAlgorithm::Seg { m } => format!("seg(m={m})"),
        SplitAlgorithm::Merge { k } => format!("merge(k={k})"),
        SplitAlgorithm::Adapt { m } => format!("adapt(m={m})"),
        SplitAlgorithm::Linear { qx, qy, qt } => format!("linear(qx={qx},qy={qy},qt={qt})"),
    }
}

/// Execute every query against the index; per-query records plus the
/// result sets (which must not depend on the split configuration).
pub fn run(
    index: &Index,
    store: &Store,
    queries: &[BenchQuery],
) -> Result<(Vec<QueryRecord>, Vec<QueryOutcome>)> {
    let mut records = Vec::with_capacity(queries.len());
    let mut outcomes = Vec::with_capacity(queries.len());
    for q in queries {
        let start = WallClock::now();
        let (stats, outcome) = match q {
            BenchQuery::Range { query, .. } => {
                let r = query::search(index, store, query)?;
                (r.stats, QueryOutcome { tuples: r.tuples, distances: None })
            }
            BenchQuery::Knn { query, .. } => {
                let r = query::knn(index, store, query)?;
                let (tuples, distances) = r.hits.into_iter().unzip();
                (r.stats, QueryOutcome { tuples, distances: Some(distances) })
            }
        };
        let ms = start.elapsed().as_secs_f64() * 1e3;
        records.push(QueryRecord {
            kind: q.kind().to_string(),
            matched_entries: stats.matched_entries,
            candidates: stats.candidates,
            results: stats.results,
            ms,
        });
        outcomes.push(outcome);
    }
    Ok((records, outcomes))
}

pub fn aggregate(records: &[QueryRecord]) -> Aggregate {
    let mut agg = Aggregate { queries: records.len(), ..Default::default() };
    for r in records {
        agg.matched_entries += r.matched_entries;
        agg.candidates += r.candidates;
        agg.results += r.results;
        agg.ms += r.ms;
    }
    agg
}

/// Write the report as JSON with stable key order.
pub fn report_emit(report: &Report, path: &Path) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut file, report)?;
    file.write_all(b"\n")?;
    Ok(())
}

pub fn report_load(path: &Path) -> Result<Report> {
    let file = std::fs::File::open(path)?;
    Ok(serde_json::from_reader(file)?)
}
