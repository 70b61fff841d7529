//! Command-line front end: `gen`, `measure`, `order`, `slice` and `repro`.
//!
//! Data goes to files (VOXL, CSV) or stdout; diagnostics go to stderr. Every
//! output file gets a `<file>.manifest.json` sidecar recording the command
//! line, configuration, input digests, tool version and wall-clock time.

use std::fs::{self, OpenOptions};
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::distance;
use crate::field::{self, ScreenedPoissonProblem, SolverSettings};
use crate::measure::{self, CongruityResult, MeasureConfig, ShapeOrdering};
use crate::shapegen::{self, CompositeCubeSpec, Face, NamedVolume, ShapeSetParams};
use crate::voxel::{read_voxl_file, write_voxl_file, VoxelVolume};

/// Environment variable consulted when `--threads` is not given.
pub const THREADS_ENV: &str = "CONGRUITY_THREADS";

/// Column set of per-shape measurement CSVs.
pub const MEASURE_HEADER: [&str; 13] = [
    "name",
    "rho1",
    "rho2",
    "delta1",
    "delta2",
    "e_11",
    "e_12",
    "e_21",
    "e_22",
    "mean",
    "bins",
    "band1_size",
    "band2_size",
];

/// Column set of ordering CSVs. Ranks are 1-based and ascending.
pub const ORDER_HEADER: [&str; 12] = [
    "name",
    "rank_mean",
    "rank_11",
    "rank_12",
    "rank_21",
    "rank_22",
    "e_11",
    "e_12",
    "e_21",
    "e_22",
    "mean",
    "consensus",
];

#[derive(Debug, Parser)]
#[command(
    name = "congruity",
    version,
    about = "Entropy-based shape congruity on voxel grids"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a shape and write it as a VOXL file.
    Gen {
        #[command(subcommand)]
        shape: ShapeCommand,
    },
    /// Compute the four entropies and their mean for one VOXL file.
    Measure(MeasureArgs),
    /// Measure several VOXL files and rank them.
    Order(OrderArgs),
    /// Export one plane of a normalized field as a CSV matrix.
    Slice(SliceArgs),
    /// Generate, measure and rank both bundled shape sets.
    Repro(ReproArgs),
}

#[derive(Debug, Subcommand)]
pub enum ShapeCommand {
    /// Axis-aligned solid cube (square in 2D).
    Cube {
        #[arg(long)]
        side: usize,
        #[command(flatten)]
        common: GenCommon,
    },
    /// Voxelized ball (disk in 2D).
    Sphere {
        #[arg(long)]
        radius: f64,
        #[command(flatten)]
        common: GenCommon,
    },
    /// Base cube with centred cubic attachments on the listed faces.
    Composite {
        #[arg(long)]
        base: usize,
        #[arg(long)]
        attach: usize,
        /// Comma-separated faces, e.g. `+x,-x`. Empty for a plain cube.
        #[arg(long, default_value = "", allow_hyphen_values = true)]
        faces: String,
        #[command(flatten)]
        common: GenCommon,
    },
    /// Base cube with one attachment.
    Attachment {
        #[arg(long)]
        base: usize,
        #[arg(long)]
        attach: usize,
        #[arg(long, allow_hyphen_values = true)]
        face: String,
        #[command(flatten)]
        common: GenCommon,
    },
}

#[derive(Debug, Args)]
pub struct GenCommon {
    #[arg(long, default_value_t = 3)]
    pub dim: usize,
    #[arg(long, default_value_t = shapegen::DEFAULT_PADDING)]
    pub padding: usize,
    /// Carve a half-ball dent into this face of the generated shape.
    #[arg(long, allow_hyphen_values = true, requires = "concave_depth")]
    pub concave_face: Option<String>,
    #[arg(long)]
    pub concave_depth: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Clone)]
pub struct ConfigArgs {
    /// Histogram bins over [0, 1].
    #[arg(long, default_value_t = 64)]
    pub bins: usize,
    /// Exponent p in rho2 = rho1^p.
    #[arg(long, default_value_t = 0.3)]
    pub rho_exponent: f64,
    /// Two increasing fractions of the maximum thickness.
    #[arg(long, default_value = "0.05,0.1")]
    pub delta_fractions: String,
    /// Band half-width in world units (default: half the voxel spacing).
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Relative residual bound for the field solve.
    #[arg(long, default_value_t = 1e-10)]
    pub solver_tolerance: f64,
    /// Largest system solved by Cholesky; bigger ones use CG.
    #[arg(long, default_value_t = 200_000)]
    pub cholesky_limit: usize,
    /// Worker threads (default: all cores).
    #[arg(long, env = THREADS_ENV)]
    pub threads: Option<usize>,
}

impl ConfigArgs {
    pub fn to_config(&self) -> Result<MeasureConfig> {
        let fractions: Vec<f64> = self
            .delta_fractions
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .context("--delta-fractions must be two comma-separated numbers")?;
        ensure!(
            fractions.len() == 2,
            "--delta-fractions needs exactly two values, got {}",
            fractions.len()
        );
        let config = MeasureConfig {
            bin_count: self.bins,
            rho_exponent: self.rho_exponent,
            delta_fractions: [fractions[0], fractions[1]],
            band_tolerance: self.tolerance,
            solver: SolverSettings {
                tolerance: self.solver_tolerance,
                cholesky_limit: self.cholesky_limit,
                ..SolverSettings::default()
            },
        };
        config.check()?;
        Ok(config)
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = self.threads {
            ensure!(n > 0, "--threads must be positive");
            builder = builder.num_threads(n);
        }
        Ok(builder.build()?)
    }
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    pub input: PathBuf,
    /// Row label (default: file stem).
    #[arg(long)]
    pub name: Option<String>,
    /// Append one row to this CSV, writing the header if the file is new.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(Debug, Args)]
pub struct OrderArgs {
    #[arg(required = true, num_args = 2..)]
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Axis {
    X,
    Y,
    Z,
}

#[derive(Debug, Args)]
pub struct SliceArgs {
    pub input: PathBuf,
    /// Which field: 1 for rho1 (smooth), 2 for rho2.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub rho_index: u8,
    /// Slice normal; ignored for 2D inputs.
    #[arg(long, value_enum, default_value_t = Axis::Z)]
    pub axis: Axis,
    /// Plane index along the axis (default: middle plane).
    #[arg(long)]
    pub index: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(Debug, Args)]
pub struct ReproArgs {
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub config: ConfigArgs,
}

/// Executes a parsed command line.
pub fn run(cli: Cli) -> Result<()> {
    let started = Instant::now();
    let argv: Vec<String> = std::env::args().collect();
    match cli.command {
        Command::Gen { shape } => cmd_gen(shape, &argv, started),
        Command::Measure(args) => cmd_measure(args, &argv, started),
        Command::Order(args) => cmd_order(args, &argv, started),
        Command::Slice(args) => cmd_slice(args, &argv, started),
        Command::Repro(args) => cmd_repro(args, &argv, started),
    }
}

pub fn generate(shape: &ShapeCommand) -> Result<VoxelVolume> {
    let (volume, common) = match shape {
        ShapeCommand::Cube { side, common } => (
            shapegen::make_cube(common.dim, *side, common.padding)?,
            common,
        ),
        ShapeCommand::Sphere { radius, common } => (
            shapegen::make_sphere(common.dim, *radius, common.padding)?,
            common,
        ),
        ShapeCommand::Composite {
            base,
            attach,
            faces,
            common,
        } => {
            let spec = CompositeCubeSpec {
                dim: common.dim,
                base_side: *base,
                attach_side: *attach,
                faces: Face::parse_list(faces)?,
                padding: common.padding,
            };
            (shapegen::make_composite_cube(&spec)?, common)
        }
        ShapeCommand::Attachment {
            base,
            attach,
            face,
            common,
        } => (
            shapegen::make_cube_with_attachment(
                common.dim,
                *base,
                *attach,
                face.parse()?,
                common.padding,
            )?,
            common,
        ),
    };
    match (&common.concave_face, common.concave_depth) {
        (Some(face), Some(depth)) => {
            Ok(shapegen::make_concave_face(&volume, face.parse()?, depth)?)
        }
        (None, None) => Ok(volume),
        _ => bail!("--concave-face and --concave-depth must be given together"),
    }
}

fn shape_out(shape: &ShapeCommand) -> &Path {
    match shape {
        ShapeCommand::Cube { common, .. }
        | ShapeCommand::Sphere { common, .. }
        | ShapeCommand::Composite { common, .. }
        | ShapeCommand::Attachment { common, .. } => &common.out,
    }
}

fn cmd_gen(shape: ShapeCommand, argv: &[String], started: Instant) -> Result<()> {
    let volume = generate(&shape)?;
    let out = shape_out(&shape);
    write_voxl_file(&volume, out).with_context(|| format!("writing {}", out.display()))?;
    println!("{}", volume.interior_count());
    RunManifest::new(argv, serde_json::Value::Null, &[], started).write_for(out)?;
    Ok(())
}

fn load(path: &Path) -> Result<VoxelVolume> {
    let volume = read_voxl_file(path).with_context(|| format!("reading {}", path.display()))?;
    volume
        .ensure_valid()
        .with_context(|| format!("validating {}", path.display()))?;
    Ok(volume)
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// One CSV row in [`MEASURE_HEADER`] order.
pub fn measure_row(name: &str, r: &CongruityResult) -> Vec<String> {
    let p = &r.parameters;
    let e = &r.entropies;
    vec![
        name.to_string(),
        p.rho[0].to_string(),
        p.rho[1].to_string(),
        p.delta[0].to_string(),
        p.delta[1].to_string(),
        e[0][0].to_string(),
        e[0][1].to_string(),
        e[1][0].to_string(),
        e[1][1].to_string(),
        r.mean_entropy.to_string(),
        r.config.bin_count.to_string(),
        r.band_sizes[0].to_string(),
        r.band_sizes[1].to_string(),
    ]
}

/// Human-readable summary of one measurement.
pub fn measure_report(name: &str, r: &CongruityResult) -> String {
    let p = &r.parameters;
    let mut s = format!(
        "{name}\n  rho1 = {}  rho2 = {}\n  max thickness = {}  delta1 = {}  delta2 = {}  (band tolerance {})\n  band sizes = {} / {}\n",
        p.rho[0], p.rho[1], p.max_thickness, p.delta[0], p.delta[1], r.band_tolerance, r.band_sizes[0], r.band_sizes[1]
    );
    for i in 0..2 {
        for k in 0..2 {
            s.push_str(&format!(
                "  e_{}{} = {:.6}\n",
                i + 1,
                k + 1,
                r.entropies[i][k]
            ));
        }
    }
    s.push_str(&format!("  mean = {:.6}\n", r.mean_entropy));
    for w in &r.warnings {
        s.push_str(&format!("  warning: {w}\n"));
    }
    s
}

fn cmd_measure(args: MeasureArgs, argv: &[String], started: Instant) -> Result<()> {
    let config = args.config.to_config()?;
    let volume = load(&args.input)?;
    let name = args.name.clone().unwrap_or_else(|| stem(&args.input));
    let result = args
        .config
        .pool()?
        .install(|| measure::congruity_measure(&volume, &config))
        .with_context(|| format!("measuring {}", args.input.display()))?;
    print!("{}", measure_report(&name, &result));
    if let Some(csv_path) = &args.csv {
        append_measure_row(csv_path, &measure_row(&name, &result))?;
        RunManifest::new(
            argv,
            serde_json::to_value(&config)?,
            &[&args.input],
            started,
        )
        .write_for(csv_path)?;
    }
    Ok(())
}

fn append_measure_row(path: &Path, row: &[String]) -> Result<()> {
    let existing = fs::read_to_string(path).unwrap_or_default();
    let header = MEASURE_HEADER.join(",");
    if !existing.is_empty() {
        let first = existing.lines().next().unwrap_or_default();
        ensure!(
            first == header,
            "{} has a different header; refusing to append",
            path.display()
        );
    }
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let mut w = csv::Writer::from_writer(file);
    if existing.is_empty() {
        w.write_record(MEASURE_HEADER)?;
    }
    w.write_record(row)?;
    w.flush()?;
    Ok(())
}

/// Measures every shape on the given pool; output order follows input order.
pub fn measure_all(
    shapes: &[NamedVolume],
    config: &MeasureConfig,
    pool: &rayon::ThreadPool,
) -> Result<Vec<(String, CongruityResult)>> {
    pool.install(|| {
        shapes
            .par_iter()
            .map(|s| {
                measure::congruity_measure(&s.volume, config)
                    .map(|r| (s.name.clone(), r))
                    .with_context(|| format!("measuring {}", s.name))
            })
            .collect()
    })
}

pub fn measures_csv(results: &[(String, CongruityResult)]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(MEASURE_HEADER)?;
    for (name, r) in results {
        w.write_record(measure_row(name, r))?;
    }
    Ok(w.into_inner()?)
}

pub fn order_csv(
    results: &[(String, CongruityResult)],
    ordering: &ShapeOrdering,
) -> Result<Vec<u8>> {
    let rank =
        |list: &[String], name: &str| list.iter().position(|n| n == name).map_or(0, |p| p + 1);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(ORDER_HEADER)?;
    for name in &ordering.by_mean {
        let r = &results
            .iter()
            .find(|(n, _)| n == name)
            .expect("ranked name exists")
            .1;
        let e = &r.entropies;
        w.write_record([
            name.clone(),
            rank(&ordering.by_mean, name).to_string(),
            rank(&ordering.by_measure[0][0], name).to_string(),
            rank(&ordering.by_measure[0][1], name).to_string(),
            rank(&ordering.by_measure[1][0], name).to_string(),
            rank(&ordering.by_measure[1][1], name).to_string(),
            e[0][0].to_string(),
            e[0][1].to_string(),
            e[1][0].to_string(),
            e[1][1].to_string(),
            r.mean_entropy.to_string(),
            ordering.consensus.to_string(),
        ])?;
    }
    Ok(w.into_inner()?)
}

pub fn order_report(ordering: &ShapeOrdering) -> String {
    let mut s = format!("ascending mean entropy: {}\n", ordering.by_mean.join(" < "));
    for i in 0..2 {
        for k in 0..2 {
            s.push_str(&format!(
                "e_{}{}: {}\n",
                i + 1,
                k + 1,
                ordering.by_measure[i][k].join(" < ")
            ));
        }
    }
    s.push_str(&format!("consensus: {}\n", ordering.consensus));
    if ordering.ties.is_empty() {
        s.push_str("ties: none\n");
    }
    for t in &ordering.ties {
        s.push_str(&format!(
            "tie on {} at {}: {}\n",
            t.criterion,
            t.value,
            t.names.join(", ")
        ));
    }
    s
}

fn cmd_order(args: OrderArgs, argv: &[String], started: Instant) -> Result<()> {
    ensure!(args.inputs.len() >= 2, "order needs at least two inputs");
    let config = args.config.to_config()?;
    let shapes = args
        .inputs
        .iter()
        .map(|p| {
            Ok(NamedVolume {
                name: stem(p),
                volume: load(p)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let results = measure_all(&shapes, &config, &args.config.pool()?)?;
    let ordering = measure::order_shapes(&results);
    print!("{}", order_report(&ordering));
    if let Some(csv_path) = &args.csv {
        fs::write(csv_path, order_csv(&results, &ordering)?)?;
        let inputs: Vec<&Path> = args.inputs.iter().map(PathBuf::as_path).collect();
        RunManifest::new(argv, serde_json::to_value(&config)?, &inputs, started)
            .write_for(csv_path)?;
    }
    Ok(())
}

/// Normalized field `v_{rho_index}` on one plane, as `(header, rows)` CSV text.
pub fn slice_csv(
    volume: &VoxelVolume,
    config: &MeasureConfig,
    rho_index: usize,
    axis: usize,
    index: Option<usize>,
) -> Result<Vec<u8>> {
    ensure!((1..=2).contains(&rho_index), "rho index must be 1 or 2");
    config.check()?;
    volume.ensure_valid()?;
    let (axis, index) = if volume.dim() == 2 {
        (2, 0)
    } else {
        let n = volume.grid().extents3()[axis];
        let index = index.unwrap_or(n / 2);
        ensure!(
            index < n,
            "slice index {index} outside 0..{n} on axis {axis}"
        );
        (axis, index)
    };
    let dist = distance::distance_transform(volume);
    let params = measure::derive_parameters(volume, &dist, config)?;
    let problem =
        ScreenedPoissonProblem::new(volume, params.rho[rho_index - 1]).with_settings(config.solver);
    let field = field::normalize(&field::solve_screened_poisson(&problem)?)?;
    let rows = field.slice(axis, index)?;

    let names = ["x", "y", "z"];
    let (inner, outer) = match axis {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    let width = rows.first().map_or(0, Vec::len);
    let mut header = vec![format!("{}\\{}", names[outer], names[inner])];
    header.extend((0..width).map(|i| i.to_string()));
    w.write_record(&header)?;
    for (o, row) in rows.iter().enumerate() {
        let mut rec = vec![o.to_string()];
        rec.extend(row.iter().map(f64::to_string));
        w.write_record(&rec)?;
    }
    Ok(w.into_inner()?)
}

fn cmd_slice(args: SliceArgs, argv: &[String], started: Instant) -> Result<()> {
    let config = args.config.to_config()?;
    let volume = load(&args.input)?;
    let axis = match args.axis {
        Axis::X => 0,
        Axis::Y => 1,
        Axis::Z => 2,
    };
    let bytes = args
        .config
        .pool()?
        .install(|| slice_csv(&volume, &config, args.rho_index as usize, axis, args.index))?;
    fs::write(&args.out, bytes).with_context(|| format!("writing {}", args.out.display()))?;
    RunManifest::new(
        argv,
        serde_json::to_value(&config)?,
        &[&args.input],
        started,
    )
    .write_for(&args.out)?;
    Ok(())
}

/// Files written by `repro`, relative to the output directory.
pub const REPRO_FILES: [&str; 6] = [
    "composite_measures.csv",
    "composite_order.csv",
    "composite_order.txt",
    "deviation_measures.csv",
    "deviation_order.csv",
    "deviation_order.txt",
];

/// Generates, measures and ranks both bundled shape sets into `out`.
pub fn repro(out: &Path, config: &MeasureConfig, pool: &rayon::ThreadPool) -> Result<()> {
    fs::create_dir_all(out)?;
    let params = ShapeSetParams::default();
    let sets = [
        ("composite", shapegen::composite_cube_set(&params)?),
        ("deviation", shapegen::deviation_set(&params)?),
    ];
    for (label, shapes) in &sets {
        let results = measure_all(shapes, config, pool)?;
        let ordering = measure::order_shapes(&results);
        let report = order_report(&ordering);
        println!("[{label}]\n{report}");
        fs::write(
            out.join(format!("{label}_measures.csv")),
            measures_csv(&results)?,
        )?;
        fs::write(
            out.join(format!("{label}_order.csv")),
            order_csv(&results, &ordering)?,
        )?;
        fs::write(out.join(format!("{label}_order.txt")), report)?;
    }
    Ok(())
}

fn cmd_repro(args: ReproArgs, argv: &[String], started: Instant) -> Result<()> {
    let config = args.config.to_config()?;
    repro(&args.out, &config, &args.config.pool()?)?;
    let config = serde_json::to_value(&config)?;
    for f in REPRO_FILES {
        RunManifest::new(argv, config.clone(), &[], started).write_for(&args.out.join(f))?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// Provenance sidecar for an output file.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command_line: Vec<String>,
    pub config: serde_json::Value,
    pub inputs: Vec<InputDigest>,
    pub output: String,
    pub output_sha256: String,
    pub duration_seconds: f64,
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

impl RunManifest {
    pub fn new(
        argv: &[String],
        config: serde_json::Value,
        inputs: &[&Path],
        started: Instant,
    ) -> Self {
        let inputs = inputs
            .iter()
            .map(|p| InputDigest {
                path: p.display().to_string(),
                sha256: fs::read(p).map(|b| sha256_hex(&b)).unwrap_or_default(),
            })
            .collect();
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command_line: argv.to_vec(),
            config,
            inputs,
            output: String::new(),
            output_sha256: String::new(),
            duration_seconds: started.elapsed().as_secs_f64(),
        }
    }

    pub fn sidecar_path(output: &Path) -> PathBuf {
        let mut name = output.as_os_str().to_owned();
        name.push(".manifest.json");
        PathBuf::from(name)
    }

    /// Writes `<output>.manifest.json`.
    pub fn write_for(mut self, output: &Path) -> Result<()> {
        self.output = output.display().to_string();
        self.output_sha256 = fs::read(output).map(|b| sha256_hex(&b)).unwrap_or_default();
        let mut f = fs::File::create(Self::sidecar_path(output))?;
        serde_json::to_writer_pretty(&mut f, &self)?;
        writeln!(f)?;
        Ok(())
    }
}
