//! Command-line front end for moment-signature experiments.
//!
//! Subcommands cover the full pipeline — sampling concepts, fitting
//! signatures, algebra on fitted signatures, level-2 concepts, the streaming
//! stack, random projections, MLP moment recovery, and the named
//! reproduction experiments. Point clouds travel as CSV (`x1,…,xd[,label]`),
//! everything else as JSON.
//!
//! Exit codes: 0 success, 1 a reproduction experiment failed a check,
//! 2 malformed input, 3 numeric failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use momentsig::algebra::{self, DictionaryOptions, IntersectOptions};
use momentsig::cloud::PointCloud;
use momentsig::generators::{self, ManifoldSpec};
use momentsig::hierarchy::{self, Level2Config};
use momentsig::mlp::{self, RandomMlp};
use momentsig::projection::{target_dim, ProjectionRecord, RandomProjection};
use momentsig::repro;
use momentsig::signature::{FitConfig, Signature, DEFAULT_EPSILON};
use momentsig::stream::{self, Stack, StackConfig};
use momentsig::Error;

/// Environment variable overriding the default fit/level-2 epsilon.
const ENV_EPSILON: &str = "MOMENTSIG_EPSILON";
/// Environment variable overriding the default intersection tolerance.
const ENV_INTERSECT_TOL: &str = "MOMENTSIG_INTERSECT_TOL";
/// Environment variable overriding the default subset-check tolerance.
const ENV_SUBSET_TOL: &str = "MOMENTSIG_SUBSET_TOL";

#[derive(Parser)]
#[command(
    name = "momentsig",
    about = "Moment-matrix concept signatures: fit, compare, compose, stream",
    version,
    propagate_version = true
)]
struct Cli {
    /// Seed for every stochastic component; equal seeds give identical runs.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a point cloud from a concept spec (JSON) into CSV.
    Gen(GenArgs),
    /// Fit a signature to a point cloud.
    Fit(FitArgs),
    /// Score points against a fitted signature (0 means on-concept).
    Score(ScoreArgs),
    /// Intersect two signatures into the common sub-concept.
    Intersect(IntersectArgs),
    /// Similarity between two signatures.
    Sim(SimArgs),
    /// Decompose union concepts into their atomic concepts.
    Dict(DictArgs),
    /// Fit a level-2 signature over a family of signatures.
    Hier(HierArgs),
    /// Score a candidate signature against a level-2 concept.
    HierScore(HierScoreArgs),
    /// Run a point stream through a layered attention stack.
    Stream(StreamArgs),
    /// Randomly project a point cloud to a lower dimension.
    Project(ProjectArgs),
    /// Recover moment matrices from a random square-activation MLP.
    MlpCheck(MlpCheckArgs),
    /// Run named reproduction experiments and print measured checks.
    Repro(ReproArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Concept spec JSON (shape, optional noise and region).
    #[arg(long)]
    spec: PathBuf,
    /// Number of points to sample.
    #[arg(long, short = 'n')]
    count: usize,
    /// Output CSV path.
    #[arg(long, short = 'o')]
    output: PathBuf,
}

#[derive(Args)]
struct FitArgs {
    /// Input point cloud CSV.
    #[arg(long)]
    input: PathBuf,
    /// Maximum monomial degree of the feature map.
    #[arg(long)]
    degree: u32,
    /// Null-space threshold (default 1e-6, or MOMENTSIG_EPSILON).
    #[arg(long)]
    epsilon: Option<f64>,
    /// Drop the constant feature (fit through the origin).
    #[arg(long)]
    homogeneous: bool,
    /// Randomly project points to this dimension before fitting.
    #[arg(long)]
    project_to: Option<usize>,
    /// Seed for the projection (defaults to the global --seed).
    #[arg(long)]
    projection_seed: Option<u64>,
    /// Whiten the cloud (zero mean, identity covariance) before fitting.
    #[arg(long)]
    whiten: bool,
    /// Rescale the cloud into the unit ball before fitting.
    #[arg(long)]
    rescale_unit_ball: bool,
    /// Output signature JSON path.
    #[arg(long, short = 'o')]
    output: PathBuf,
}

#[derive(Args)]
struct ScoreArgs {
    /// Signature JSON.
    signature: PathBuf,
    /// Single point as comma-separated coordinates, e.g. "2,0".
    #[arg(long, conflicts_with = "input")]
    point: Option<String>,
    /// Score every row of this CSV instead (one score per line).
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Args)]
struct IntersectArgs {
    /// First signature JSON.
    a: PathBuf,
    /// Second signature JSON.
    b: PathBuf,
    /// Convergence tolerance (default 1e-10, or MOMENTSIG_INTERSECT_TOL).
    #[arg(long)]
    tol: Option<f64>,
    /// Iteration budget for the alternating projections.
    #[arg(long)]
    max_iter: Option<usize>,
    /// Output signature JSON path.
    #[arg(long, short = 'o')]
    output: PathBuf,
}

#[derive(Args)]
struct SimArgs {
    /// First signature JSON.
    a: PathBuf,
    /// Second signature JSON.
    b: PathBuf,
    /// Report single-equation coefficient similarity instead of overlaps.
    #[arg(long)]
    coefficients: bool,
}

#[derive(Args)]
struct DictArgs {
    /// Union-concept signature JSONs.
    #[arg(required = true)]
    signatures: Vec<PathBuf>,
    /// Output directory for atom_NN.json files.
    #[arg(long, short = 'o')]
    output: PathBuf,
}

#[derive(Args)]
struct HierArgs {
    /// Member signature JSONs (at least two).
    #[arg(required = true)]
    signatures: Vec<PathBuf>,
    /// Level-2 fit degree.
    #[arg(long, default_value_t = 2)]
    degree: u32,
    /// Level-2 null-space threshold (default 1e-4, or MOMENTSIG_EPSILON).
    #[arg(long)]
    epsilon: Option<f64>,
    /// Project flattened signatures above this length.
    #[arg(long)]
    projection_dim: Option<usize>,
    /// Output level-2 signature JSON path.
    #[arg(long, short = 'o')]
    output: PathBuf,
}

#[derive(Args)]
struct HierScoreArgs {
    /// Level-2 signature JSON.
    level2: PathBuf,
    /// Candidate level-1 signature JSON.
    candidate: PathBuf,
}

#[derive(Args)]
struct StreamArgs {
    /// Stack configuration JSON.
    #[arg(long)]
    config: PathBuf,
    /// Input point cloud CSV, streamed row by row.
    #[arg(long)]
    input: PathBuf,
    /// Write one step report per line (JSON lines).
    #[arg(long)]
    report: Option<PathBuf>,
    /// Save each layer's dictionary under DIR/layer_N/ afterwards.
    #[arg(long)]
    dict_dir: Option<PathBuf>,
    /// Warm-start dictionaries from a directory written by --dict-dir.
    #[arg(long)]
    load_dict: Option<PathBuf>,
}

#[derive(Args)]
struct ProjectArgs {
    /// Input point cloud CSV.
    #[arg(long)]
    input: PathBuf,
    /// Target dimension; omit to derive one from the guarantee parameters.
    #[arg(long)]
    out_dim: Option<usize>,
    /// Manifold dimension k for the derived target dimension.
    #[arg(long, default_value_t = 1)]
    subspace_dim: usize,
    /// Failure probability δ for the derived target dimension.
    #[arg(long, default_value_t = 0.05)]
    failure_prob: f64,
    /// Distortion ε for the derived target dimension.
    #[arg(long, default_value_t = 0.5)]
    distortion: f64,
    /// Output CSV path.
    #[arg(long, short = 'o')]
    output: PathBuf,
}

#[derive(Args)]
struct MlpCheckArgs {
    /// Input point cloud CSV.
    #[arg(long)]
    input: PathBuf,
    /// Number of random units.
    #[arg(long, default_value_t = mlp::DEFAULT_UNITS)]
    units: usize,
    /// Also recover the squared moment matrix.
    #[arg(long)]
    squared: bool,
}

#[derive(Args)]
struct ReproArgs {
    /// Experiment ids; omit to run the whole suite.
    ids: Vec<String>,
    /// Write the full reports as JSON.
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
}

/// What went wrong, mapped to the exit-code contract.
enum Failure {
    /// Exit 2: unreadable or structurally invalid input.
    Input(String),
    /// Exit 3: a numeric routine failed.
    Numeric(String),
    /// Exit 1: a reproduction experiment failed its checks.
    Assertion(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Assertion(_) => 1,
            Failure::Input(_) => 2,
            Failure::Numeric(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Numeric(m) | Failure::Assertion(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NoConvergence { .. } | Error::Incompatible(_) | Error::Numeric(_) => {
                Failure::Numeric(e.to_string())
            }
            _ => Failure::Input(e.to_string()),
        }
    }
}

type CliResult = Result<(), Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Gen(args) => gen(args, cli.seed),
        Command::Fit(args) => fit(args, cli.seed),
        Command::Score(args) => score(args),
        Command::Intersect(args) => intersect(args),
        Command::Sim(args) => sim(args),
        Command::Dict(args) => dict(args),
        Command::Hier(args) => hier(args, cli.seed),
        Command::HierScore(args) => hier_score(args),
        Command::Stream(args) => stream_cmd(args),
        Command::Project(args) => project(args, cli.seed),
        Command::MlpCheck(args) => mlp_check(args, cli.seed),
        Command::Repro(args) => repro_cmd(args, cli.seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}

/// Read an f64 override from the environment; a present-but-malformed value
/// is a hard input error rather than a silent fallback.
fn env_f64(name: &str) -> Result<Option<f64>, Failure> {
    match std::env::var(name) {
        Ok(raw) => raw
            .trim()
            .parse::<f64>()
            .map(Some)
            .map_err(|_| Failure::Input(format!("env {name}={raw:?} is not a number"))),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(Failure::Input(format!("env {name}: {e}"))),
    }
}

fn resolve_epsilon(flag: Option<f64>, fallback: f64) -> Result<f64, Failure> {
    Ok(flag.or(env_f64(ENV_EPSILON)?).unwrap_or(fallback))
}

fn read_cloud(path: &Path) -> Result<PointCloud, Failure> {
    PointCloud::read_csv_path(path)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn read_signature(path: &Path) -> Result<Signature, Failure> {
    Signature::load_json_path(path)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn parse_point(raw: &str) -> Result<Vec<f64>, Failure> {
    raw.split(',')
        .map(|f| {
            f.trim()
                .parse::<f64>()
                .map_err(|_| Failure::Input(format!("--point: {f:?} is not a number")))
        })
        .collect()
}

fn gen(args: &GenArgs, seed: u64) -> CliResult {
    let spec: ManifoldSpec = read_json(&args.spec)?;
    let cloud = generators::sample(&spec, args.count, seed)?;
    cloud.write_csv_path(&args.output)?;
    println!("wrote {} points of dim {} to {}", cloud.len(), cloud.dim(), args.output.display());
    Ok(())
}

fn fit(args: &FitArgs, seed: u64) -> CliResult {
    let mut cloud = read_cloud(&args.input)?;
    if args.whiten {
        cloud.whiten()?;
    }
    if args.rescale_unit_ball {
        cloud.rescale_to_unit_ball();
    }
    let mut config = FitConfig::degree(args.degree)
        .with_epsilon(resolve_epsilon(args.epsilon, DEFAULT_EPSILON)?);
    if args.homogeneous {
        config = config.homogeneous();
    }
    if let Some(out_dim) = args.project_to {
        config = config.with_projection(ProjectionRecord {
            seed: args.projection_seed.unwrap_or(seed),
            in_dim: cloud.dim(),
            out_dim,
        });
    }
    let sig = Signature::fit(&cloud, &config)?;
    sig.save_json_path(&args.output)?;
    println!(
        "fitted degree-{} signature: {} features, null rank {}",
        args.degree,
        sig.feature_dim(),
        sig.null_rank()
    );
    Ok(())
}

fn score(args: &ScoreArgs) -> CliResult {
    let sig = read_signature(&args.signature)?;
    match (&args.point, &args.input) {
        (Some(raw), None) => {
            let p = parse_point(raw)?;
            println!("{:.12e}", sig.membership_score(&p)?);
            Ok(())
        }
        (None, Some(path)) => {
            let cloud = read_cloud(path)?;
            for p in cloud.points() {
                println!("{:.12e}", sig.membership_score(p)?);
            }
            Ok(())
        }
        _ => Err(Failure::Input("provide exactly one of --point or --input".into())),
    }
}

fn intersect(args: &IntersectArgs) -> CliResult {
    let a = read_signature(&args.a)?;
    let b = read_signature(&args.b)?;
    let mut opts = IntersectOptions::default();
    if let Some(t) = args.tol.or(env_f64(ENV_INTERSECT_TOL)?) {
        opts.tol = t;
    }
    if let Some(m) = args.max_iter {
        opts.max_iter = m;
    }
    let out = algebra::intersect(&a, &b, &opts)?;
    out.save_json_path(&args.output)?;
    println!("intersection null rank {}", out.null_rank());
    Ok(())
}

fn sim(args: &SimArgs) -> CliResult {
    let a = read_signature(&args.a)?;
    let b = read_signature(&args.b)?;
    if args.coefficients {
        let value = algebra::coefficient_similarity(&a, &b)?;
        println!("{}", serde_json::json!({ "coefficient_similarity": value }));
    } else {
        let s = algebra::similarity(&a, &b)?;
        println!(
            "{}",
            serde_json::json!({ "t_overlap": s.t_overlap, "f_overlap": s.f_overlap })
        );
    }
    Ok(())
}

fn dict(args: &DictArgs) -> CliResult {
    let sigs: Vec<Signature> =
        args.signatures.iter().map(|p| read_signature(p)).collect::<Result<_, _>>()?;
    let mut opts = DictionaryOptions::default();
    if let Some(t) = env_f64(ENV_SUBSET_TOL)? {
        opts.subset_tol = t;
    }
    let atoms = algebra::discover_dictionary(&sigs, &opts)?;
    std::fs::create_dir_all(&args.output)
        .map_err(|e| Failure::Input(format!("{}: {e}", args.output.display())))?;
    for (i, atom) in atoms.iter().enumerate() {
        atom.save_json_path(args.output.join(format!("atom_{i:02}.json")))?;
    }
    println!("{} atoms from {} concepts in {}", atoms.len(), sigs.len(), args.output.display());
    Ok(())
}

fn hier(args: &HierArgs, seed: u64) -> CliResult {
    let sigs: Vec<Signature> =
        args.signatures.iter().map(|p| read_signature(p)).collect::<Result<_, _>>()?;
    let mut config = Level2Config::default()
        .with_degree(args.degree)
        .with_epsilon(resolve_epsilon(args.epsilon, Level2Config::default().epsilon)?);
    if let Some(dim) = args.projection_dim {
        config.projection_dim = dim;
    }
    config.projection_seed = seed;
    let level2 = hierarchy::signature_of_signatures(&sigs, &config)?;
    level2.save_json_path(&args.output)?;
    println!(
        "level-2 signature over {} members: {} features, null rank {}",
        sigs.len(),
        level2.feature_dim(),
        level2.null_rank()
    );
    Ok(())
}

fn hier_score(args: &HierScoreArgs) -> CliResult {
    let level2 = read_signature(&args.level2)?;
    let candidate = read_signature(&args.candidate)?;
    println!("{:.12e}", hierarchy::level2_score(&level2, &candidate)?);
    Ok(())
}

fn stream_cmd(args: &StreamArgs) -> CliResult {
    let config: StackConfig = read_json(&args.config)?;
    let cloud = read_cloud(&args.input)?;
    let mut stack = Stack::new(config)?;
    if let Some(dir) = &args.load_dict {
        for i in 0..stack.layer_count() {
            let layer_dir = dir.join(format!("layer_{i}"));
            if layer_dir.is_dir() {
                stack.install_dictionary(i, stream::load_dictionary(&layer_dir)?)?;
            }
        }
    }
    let mut report_file = match &args.report {
        Some(path) => Some(std::io::BufWriter::new(
            std::fs::File::create(path)
                .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?,
        )),
        None => None,
    };
    for p in cloud.points() {
        let report = stack.step(p)?;
        if let Some(f) = &mut report_file {
            use std::io::Write;
            serde_json::to_writer(&mut *f, &report).map_err(Error::from)?;
            writeln!(f).map_err(Error::from)?;
        }
    }
    if let Some(f) = &mut report_file {
        use std::io::Write;
        f.flush().map_err(Error::from)?;
    }
    if let Some(dir) = &args.dict_dir {
        for i in 0..stack.layer_count() {
            stream::save_dictionary(stack.layer(i), &dir.join(format!("layer_{i}")))?;
        }
    }
    let sizes: Vec<String> = (0..stack.layer_count())
        .map(|i| format!("layer {i}: {} entries", stack.layer(i).dictionary().len()))
        .collect();
    println!("streamed {} points; {}", stack.steps(), sizes.join(", "));
    Ok(())
}

fn project(args: &ProjectArgs, seed: u64) -> CliResult {
    let cloud = read_cloud(&args.input)?;
    let out_dim = match args.out_dim {
        Some(m) => m,
        None => target_dim(args.subspace_dim, args.failure_prob, args.distortion)?,
    };
    let projection = RandomProjection::new(cloud.dim(), out_dim, seed)?;
    let projected = projection.project_cloud(&cloud)?;
    projected.write_csv_path(&args.output)?;
    println!("projected {} → {} dims into {}", cloud.dim(), out_dim, args.output.display());
    Ok(())
}

fn mlp_check(args: &MlpCheckArgs, seed: u64) -> CliResult {
    let cloud = read_cloud(&args.input)?;
    let d = cloud.dim();
    let mut net = RandomMlp::new(d, args.units, seed)?;
    net.calibrate(seed)?;
    let direct = mlp::raw_moment(&cloud)?;
    let recovered = net.recover_moment(&cloud)?;
    let moment_error = (&recovered - &direct).norm() / direct.norm().max(f64::MIN_POSITIVE);
    let calibration = net.calibration().expect("calibrated above");
    let mut out = serde_json::json!({
        "units": args.units,
        "dim": d,
        "moment_relative_error": moment_error,
        "calibrated_stage1": calibration.stage1,
        "calibrated_stage2": calibration.stage2,
        "whitened_input_constants": mlp::whitened_input_constants(d),
    });
    if args.squared {
        let direct_sq = &direct * &direct;
        let recovered_sq = net.recover_moment_squared(&cloud)?;
        out["moment_squared_relative_error"] = serde_json::json!(
            (&recovered_sq - &direct_sq).norm() / direct_sq.norm().max(f64::MIN_POSITIVE)
        );
    }
    println!("{out}");
    Ok(())
}

fn repro_cmd(args: &ReproArgs, seed: u64) -> CliResult {
    let ids: Vec<&str> = if args.ids.is_empty() {
        repro::EXPERIMENTS.to_vec()
    } else {
        args.ids.iter().map(|s| s.as_str()).collect()
    };
    let mut reports = Vec::with_capacity(ids.len());
    for id in ids {
        let report = repro::run(id, seed)?;
        for line in report.lines() {
            println!("{line}");
        }
        reports.push(report);
    }
    if let Some(path) = &args.output {
        let json = serde_json::to_string_pretty(&reports).map_err(Error::from)?;
        std::fs::write(path, json)
            .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    }
    let failed: Vec<&str> =
        reports.iter().filter(|r| !r.pass).map(|r| r.id.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Assertion(format!("experiments failed: {}", failed.join(", "))))
    }
}
