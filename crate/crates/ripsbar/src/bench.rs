//! The benchmark harness: seeded synthetic datasets, a fixed set of stage
//! timers, and a runner that executes a list of pipeline variants and refuses
//! to report numbers unless every variant produced the same diagram.
//!
//! Stage names are a closed set so reports stay comparable across runs:
//! `ingest` (dataset and distance matrix), `sort` (distance argsort), `rank`
//! (canonical integer filtration), `complex` (Rips expansion and boundary
//! operators), `weights` (start-weight reordering, when enabled), `field` and
//! `schur` (Morse backend only), `extract` (reduction and diagram assembly;
//! for the column and row backends the whole reduction is accounted here).

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::complex::build_vr_complex;
use crate::error::{Error, Result};
use crate::ingest::{canonical_from_sorted, distance_matrix, sortperm, DistanceMatrix, PointCloud};
use crate::reduce::{persist_complex, reorder_complex, Backend, PersistOpts, PersistenceDiagram};

pub const STAGES: [&str; 8] =
    ["ingest", "rank", "complex", "weights", "sort", "field", "schur", "extract"];

#[derive(Clone, Debug, Serialize)]
pub struct StageTiming {
    pub stage: &'static str,
    pub seconds: f64,
}

/// A seeded synthetic input.
pub enum Dataset {
    Points(PointCloud),
    Distances(DistanceMatrix),
}

impl Dataset {
    pub fn distances(&self) -> DistanceMatrix {
        match self {
            Dataset::Points(pc) => distance_matrix(pc),
            Dataset::Distances(dm) => dm.clone(),
        }
    }
}

/// Generates one of the named dataset families, deterministically in `seed`.
///
/// `circle`: jittered points near the unit circle. `sphere`: uniform on the
/// unit 2-sphere. `clusters`: two tight clusters far apart. `grid`: a square
/// planar lattice with jitter. `random_metric`: distances drawn uniformly
/// from [1, 2], a metric by construction.
pub fn generate_dataset(kind: &str, n: usize, seed: u64) -> Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = |xs: Vec<f64>, ys: Vec<f64>| -> Result<Dataset> {
        Ok(Dataset::Points(PointCloud::new(vec![xs, ys], None)?))
    };
    match kind {
        "circle" => {
            let mut xs = Vec::with_capacity(n);
            let mut ys = Vec::with_capacity(n);
            for i in 0..n {
                let theta = 2.0 * std::f64::consts::PI * (i as f64) / (n as f64)
                    + rng.gen_range(-0.02..0.02);
                let r = 1.0 + rng.gen_range(-0.05..0.05);
                xs.push(r * theta.cos());
                ys.push(r * theta.sin());
            }
            points(xs, ys)
        }
        "sphere" => {
            let mut coords = vec![Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n)];
            for _ in 0..n {
                let z: f64 = rng.gen_range(-1.0..=1.0);
                let theta = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
                let s = (1.0 - z * z).sqrt();
                coords[0].push(s * theta.cos());
                coords[1].push(s * theta.sin());
                coords[2].push(z);
            }
            Ok(Dataset::Points(PointCloud::new(coords, None)?))
        }
        "clusters" => {
            let mut xs = Vec::with_capacity(n);
            let mut ys = Vec::with_capacity(n);
            for i in 0..n {
                let cx = if i % 2 == 0 { 0.0 } else { 10.0 };
                xs.push(cx + rng.gen_range(-0.5..0.5));
                ys.push(rng.gen_range(-0.5..0.5));
            }
            points(xs, ys)
        }
        "grid" => {
            let side = (n as f64).sqrt().ceil() as usize;
            let mut xs = Vec::with_capacity(n);
            let mut ys = Vec::with_capacity(n);
            for i in 0..n {
                xs.push((i % side) as f64 + rng.gen_range(-0.1..0.1));
                ys.push((i / side) as f64 + rng.gen_range(-0.1..0.1));
            }
            points(xs, ys)
        }
        "random_metric" => {
            let mut d = vec![0.0f64; n * n];
            for i in 0..n {
                for j in (i + 1)..n {
                    let v = rng.gen_range(1.0..2.0);
                    d[i * n + j] = v;
                    d[j * n + i] = v;
                }
            }
            Ok(Dataset::Distances(DistanceMatrix::new(n, d)?))
        }
        other => Err(Error::UnknownDatasetKind(other.to_string())),
    }
}

pub fn dataset_kinds() -> &'static [&'static str] {
    &["circle", "sphere", "clusters", "grid", "random_metric"]
}

#[derive(Clone, Debug)]
pub struct BenchVariant {
    pub label: String,
    pub opts: PersistOpts,
    /// Distance threshold for this variant only; inherits the config's when
    /// unset. Changing it across variants changes the input, so the mismatch
    /// guard will fire; useful for testing the guard and for threshold
    /// sensitivity sweeps with a single variant.
    pub upperlim_override: Option<f64>,
}

impl BenchVariant {
    /// The default comparison set: every backend, then each optimization
    /// toggled on top of the column backend.
    pub fn standard_set(workers: usize) -> Vec<BenchVariant> {
        let base = PersistOpts { clearing: false, workers, ..PersistOpts::default() };
        let v = |label: &str, opts: PersistOpts| BenchVariant {
            label: label.to_string(),
            opts,
            upperlim_override: None,
        };
        vec![
            v("column", base),
            v("column+clearing", PersistOpts { clearing: true, ..base }),
            v("row", PersistOpts { backend: Backend::Row, ..base }),
            v("morse", PersistOpts { backend: Backend::Morse, ..base }),
            v("column+cohomology", PersistOpts { cohomology: true, clearing: true, ..base }),
            v("column+reorder", PersistOpts { reorder: true, ..base }),
            v(
                "morse+clearing+reorder",
                PersistOpts { backend: Backend::Morse, clearing: true, reorder: true, ..base },
            ),
        ]
    }
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub dataset: String,
    pub n: usize,
    pub seed: u64,
    /// Highest homology dimension reported; the complex is built one higher.
    pub maxdim: usize,
    pub upperlim: f64,
    pub workers: usize,
    pub variants: Vec<BenchVariant>,
}

impl BenchConfig {
    /// A small configuration meant to finish in well under a minute while
    /// still exercising every variant.
    pub fn quick() -> Self {
        Self {
            dataset: "circle".into(),
            n: 60,
            seed: 1,
            maxdim: 1,
            upperlim: 0.9,
            workers: 2,
            variants: BenchVariant::standard_set(2),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VariantReport {
    pub label: String,
    pub total_seconds: f64,
    pub stages: Vec<StageTiming>,
    pub bars: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchReport {
    pub dataset: String,
    pub n: usize,
    pub seed: u64,
    pub maxdim: usize,
    pub upperlim: f64,
    pub workers: usize,
    pub simplex_counts: Vec<usize>,
    pub variants: Vec<VariantReport>,
}

impl BenchReport {
    pub fn render_text(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        writeln!(
            out,
            "dataset {} n {} seed {} maxdim {} upperlim {} workers {}",
            self.dataset, self.n, self.seed, self.maxdim, self.upperlim, self.workers
        )
        .unwrap();
        writeln!(out, "simplices per dimension: {:?}", self.simplex_counts).unwrap();
        let width = self.variants.iter().map(|v| v.label.len()).max().unwrap_or(8).max(8);
        write!(out, "{:width$}  {:>9}", "variant", "total").unwrap();
        for s in STAGES {
            write!(out, "  {s:>8}").unwrap();
        }
        writeln!(out).unwrap();
        for v in &self.variants {
            write!(out, "{:width$}  {:>8.3}s", v.label, v.total_seconds).unwrap();
            for s in STAGES {
                let secs = v
                    .stages
                    .iter()
                    .find(|t| t.stage == s)
                    .map_or(0.0, |t| t.seconds.max(0.0));
                write!(out, "  {secs:>7.3}s").unwrap();
            }
            writeln!(out).unwrap();
        }
        out
    }
}

/// Runs every variant on the same dataset and collects per-stage timings.
/// Aborts with [`Error::DiagramMismatch`] if any variant's normalized diagram
/// differs from the first variant's.
pub fn run_benchmark(config: &BenchConfig) -> Result<BenchReport> {
    if config.variants.is_empty() {
        return Err(Error::InvalidConfig("benchmark needs at least one variant".into()));
    }
    let t = Instant::now();
    let dataset = generate_dataset(&config.dataset, config.n, config.seed)?;
    let dm = dataset.distances();
    let ingest_seconds = t.elapsed().as_secs_f64();

    let mut reference: Option<(String, PersistenceDiagram)> = None;
    let mut variants = Vec::new();
    let mut simplex_counts = Vec::new();
    for variant in &config.variants {
        let total = Instant::now();
        let mut stages =
            vec![StageTiming { stage: "ingest", seconds: ingest_seconds }];
        let time = |stages: &mut Vec<StageTiming>, stage: &'static str, t: Instant| {
            stages.push(StageTiming { stage, seconds: t.elapsed().as_secs_f64() });
        };

        let t = Instant::now();
        let upperlim = variant.upperlim_override.unwrap_or(config.upperlim);
        let m = dm.size();
        let mut pairs = Vec::new();
        let mut values = Vec::new();
        for i in 0..m {
            for j in (i + 1)..m {
                let v = dm.get(i, j);
                if v <= upperlim {
                    pairs.push((i, j));
                    values.push(v);
                }
            }
        }
        let perm = sortperm(&values, variant.opts.sort)?;
        time(&mut stages, "sort", t);

        let t = Instant::now();
        let filtration = canonical_from_sorted(&dm, &pairs, &values, &perm)?;
        time(&mut stages, "rank", t);

        let t = Instant::now();
        let complex = build_vr_complex(&filtration, config.maxdim + 1);
        time(&mut stages, "complex", t);

        let t = Instant::now();
        let complex = if variant.opts.reorder {
            reorder_complex(&complex, variant.opts.workers)
        } else {
            complex
        };
        time(&mut stages, "weights", t);

        let t = Instant::now();
        let opts = PersistOpts { reorder: false, ..variant.opts };
        let reduced = persist_complex(&complex, &opts)?;
        let reduce_seconds = t.elapsed().as_secs_f64();
        let field: f64 = reduced.morse_stats.iter().map(|s| s.field_seconds()).sum();
        let schur: f64 = reduced.morse_stats.iter().map(|s| s.schur_seconds()).sum();
        stages.push(StageTiming { stage: "field", seconds: field });
        stages.push(StageTiming { stage: "schur", seconds: schur });
        stages.push(StageTiming {
            stage: "extract",
            seconds: (reduce_seconds - field - schur).max(0.0),
        });

        let diagram = reduced.diagram.clone();
        match &reference {
            None => {
                simplex_counts =
                    (0..=reduced.complex.maxdim()).map(|k| reduced.complex.count(k)).collect();
                reference = Some((variant.label.clone(), diagram.clone()));
            }
            Some((ref_label, ref_diagram)) => {
                if diagram.normalized() != ref_diagram.normalized() {
                    return Err(Error::DiagramMismatch(format!(
                        "variant {:?} disagrees with variant {:?}",
                        variant.label, ref_label
                    )));
                }
            }
        }
        variants.push(VariantReport {
            label: variant.label.clone(),
            total_seconds: total.elapsed().as_secs_f64(),
            stages,
            bars: diagram.normalized().len(),
        });
    }

    Ok(BenchReport {
        dataset: config.dataset.clone(),
        n: config.n,
        seed: config.seed,
        maxdim: config.maxdim,
        upperlim: config.upperlim,
        workers: config.workers,
        simplex_counts,
        variants,
    })
}
