//! Command-line front end: barcodes, Betti curves, diagram plots, and the
//! benchmark harness. Exit code 0 on success, 1 on data or computation
//! errors, 2 on usage errors.

mod output;
mod svg;

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ripsbar::bench::{self, BenchConfig, BenchVariant};
use ripsbar::complex::build_vr_complex;
use ripsbar::ingest::{
    self, latlon2euc, order_canonical_form, DistanceMatrix, PointCloud, RowsAre, SortAlgo,
};
use ripsbar::reduce::{persist_complex, Backend, PersistOpts, Reduced};

#[derive(Parser)]
#[command(name = "ripsbar", version, about = "Persistent homology of Vietoris-Rips filtrations")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compute the persistence diagram of an input.
    Compute(ComputeArgs),
    /// Print a Betti number as a step function of the filtration value.
    Betti(BettiArgs),
    /// Render the persistence diagram as an SVG image.
    Plot(PlotArgs),
    /// Time the pipeline variants against each other on a synthetic dataset.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum RowsAreArg {
    Points,
    Dimensions,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Column,
    Row,
    Morse,
}

#[derive(Clone, Copy, ValueEnum)]
enum SortArg {
    Radix,
    Merge,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct InputArgs {
    /// CSV file of points (or of distances with --distance-matrix), or a
    /// synthetic dataset "gen:<kind>:<n>" with kind one of circle, sphere,
    /// clusters, grid, random_metric.
    input: String,

    /// Seed for synthetic datasets.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// The input file is a full symmetric distance matrix.
    #[arg(long)]
    distance_matrix: bool,

    /// Treat the two selected columns as (latitude, longitude) in degrees and
    /// place the points on the unit sphere.
    #[arg(long)]
    latlon: bool,

    /// 1-based file columns holding coordinates (default: all columns).
    #[arg(long, value_delimiter = ',')]
    columns: Option<Vec<usize>>,

    /// 1-based file column holding point labels.
    #[arg(long)]
    label_col: Option<usize>,

    /// Skip the first row of the file.
    #[arg(long)]
    header: bool,

    /// Whether file rows are points or coordinate dimensions.
    #[arg(long, value_enum, default_value_t = RowsAreArg::Points)]
    rows_are: RowsAreArg,
}

#[derive(Args)]
struct PipelineArgs {
    /// Largest distance included in the filtration (default: no limit).
    #[arg(long)]
    upperlim: Option<f64>,

    /// Exclude distances exactly equal to the limit instead of including them.
    #[arg(long)]
    strict_threshold: bool,

    /// Highest homology dimension to report.
    #[arg(long, default_value_t = 1)]
    maxdim: usize,

    #[arg(long, value_enum, default_value_t = BackendArg::Column)]
    backend: BackendArg,

    /// Reduce antitransposed boundary matrices (same diagram, often faster,
    /// no generators).
    #[arg(long)]
    cohomology: bool,

    /// Disable the clearing optimization.
    #[arg(long)]
    no_clearing: bool,

    /// Reorder simplices by start-weight within each birth grade.
    #[arg(long)]
    reorder: bool,

    /// Keep bars of zero persistence.
    #[arg(long)]
    keep_zero: bool,

    /// Worker threads (default: RIPSBAR_WORKERS or 1).
    #[arg(long)]
    workers: Option<usize>,

    #[arg(long, value_enum, default_value_t = SortArg::Radix)]
    sort: SortArg,
}

#[derive(Args)]
struct ComputeArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    pipeline: PipelineArgs,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Include a representative cycle per bar (json format only).
    #[arg(long)]
    generators: bool,
    /// Write here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BettiArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Homology dimension of the curve.
    #[arg(long, default_value_t = 0)]
    dim: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Output SVG path.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Small preset configuration.
    #[arg(long)]
    quick: bool,
    #[arg(long, default_value = "circle")]
    dataset: String,
    #[arg(long, default_value_t = 60)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    maxdim: usize,
    #[arg(long, default_value_t = 0.9)]
    upperlim: f64,
    #[arg(long)]
    workers: Option<usize>,
    /// Emit the report as JSON instead of a table.
    #[arg(long)]
    json: bool,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn workers_or_env(flag: Option<usize>) -> usize {
    flag.or_else(|| {
        std::env::var("RIPSBAR_WORKERS")
            .ok()
            .and_then(|v| v.parse().ok())
    })
    .unwrap_or(1)
    .max(1)
}

fn persist_opts(p: &PipelineArgs) -> PersistOpts {
    PersistOpts {
        backend: match p.backend {
            BackendArg::Column => Backend::Column,
            BackendArg::Row => Backend::Row,
            BackendArg::Morse => Backend::Morse,
        },
        cohomology: p.cohomology,
        clearing: !p.no_clearing,
        reorder: p.reorder,
        workers: workers_or_env(p.workers),
        keep_zero: p.keep_zero,
        sort: match p.sort {
            SortArg::Radix => SortAlgo::Radix,
            SortArg::Merge => SortAlgo::Merge,
        },
    }
}

fn load_distances(input: &InputArgs) -> anyhow::Result<DistanceMatrix> {
    if let Some(spec) = input.input.strip_prefix("gen:") {
        let (kind, n) = spec
            .split_once(':')
            .with_context(|| format!("expected gen:<kind>:<n>, got {:?}", input.input))?;
        let n: usize = n
            .parse()
            .with_context(|| format!("bad point count in {:?}", input.input))?;
        return Ok(bench::generate_dataset(kind, n, input.seed)?.distances());
    }
    let path = Path::new(&input.input);
    if input.distance_matrix {
        return Ok(ingest::read_distance_matrix_csv(path)?);
    }
    let rows_are = match input.rows_are {
        RowsAreArg::Points => RowsAre::Points,
        RowsAreArg::Dimensions => RowsAre::Dimensions,
    };
    let pc = ingest::read_point_cloud_csv(
        path,
        rows_are,
        input.columns.as_deref(),
        input.header,
        input.label_col,
    )?;
    let pc = if input.latlon {
        if pc.dims() != 2 {
            bail!("--latlon needs exactly two coordinate columns, got {}", pc.dims());
        }
        let pairs: Vec<(f64, f64)> = (0..pc.npoints())
            .map(|i| (pc.coords[0][i], pc.coords[1][i]))
            .collect();
        let euc = latlon2euc(&pairs)?;
        let coords = (0..3)
            .map(|d| euc.iter().map(|p| p[d]).collect())
            .collect();
        PointCloud::new(coords, pc.labels.clone())?
    } else {
        pc
    };
    Ok(ingest::distance_matrix(&pc))
}

fn run_pipeline(input: &InputArgs, pipeline: &PipelineArgs) -> anyhow::Result<Reduced> {
    let dm = load_distances(input)?;
    let opts = persist_opts(pipeline);
    let upperlim = pipeline.upperlim.unwrap_or(f64::INFINITY);
    let filtration = order_canonical_form(&dm, upperlim, pipeline.strict_threshold, opts.sort)?;
    let complex = build_vr_complex(&filtration, pipeline.maxdim + 1);
    Ok(persist_complex(&complex, &opts)?)
}

fn emit(output: Option<&PathBuf>, content: &str) -> anyhow::Result<()> {
    match output {
        Some(path) => std::fs::write(path, content)
            .with_context(|| format!("cannot write {}", path.display())),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn run() -> anyhow::Result<()> {
    match Cli::parse().cmd {
        Cmd::Compute(args) => {
            let reduced = run_pipeline(&args.input, &args.pipeline)?;
            let content = match args.format {
                Format::Csv => {
                    if args.generators {
                        bail!("--generators needs --format json");
                    }
                    output::diagram_csv(&reduced.diagram)
                }
                Format::Json => {
                    let value = output::diagram_json(&reduced, args.generators)?;
                    format!("{}\n", serde_json::to_string_pretty(&value)?)
                }
            };
            emit(args.output.as_ref(), &content)
        }
        Cmd::Betti(args) => {
            let reduced = run_pipeline(&args.input, &args.pipeline)?;
            let curve = reduced.diagram.betti_curve(args.dim);
            emit(args.output.as_ref(), &output::betti_csv(&curve))
        }
        Cmd::Plot(args) => {
            let reduced = run_pipeline(&args.input, &args.pipeline)?;
            emit(Some(&args.output), &svg::diagram_svg(&reduced.diagram))
        }
        Cmd::Bench(args) => {
            let workers = workers_or_env(args.workers);
            let config = if args.quick {
                BenchConfig::quick()
            } else {
                BenchConfig {
                    dataset: args.dataset.clone(),
                    n: args.n,
                    seed: args.seed,
                    maxdim: args.maxdim,
                    upperlim: args.upperlim,
                    workers,
                    variants: BenchVariant::standard_set(workers),
                }
            };
            let report = bench::run_benchmark(&config)?;
            let content = if args.json {
                format!("{}\n", serde_json::to_string_pretty(&report)?)
            } else {
                report.render_text()
            };
            emit(args.output.as_ref(), &content)
        }
    }
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
