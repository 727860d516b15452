//! `waveliq` command-line front end.
//!
//! JSON goes to stdout, diagnostics to stderr. Exit codes: 0 success,
//! 1 unreadable or undecodable input, 2 validation failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use waveliq::bench::{self, ladder};
use waveliq::imgio::{load_manifest, read_image, to_luma};
use waveliq::refine::RefineConfig;
use waveliq::score::{evaluate_pair, extract_features, pooled, with_jobs, ScoreConfig, ScoreMode};
use waveliq::simdist::{
    coupled_distance, directed_pair, load_feature_file, map_similarity, write_feature_file, write_grid_file, Coupling,
    GroundMetric,
};
use waveliq::wavelet::{decompose_with, CdaVariant, WaveletPyramid};
use waveliq::Error;

#[derive(Parser, Debug)]
#[command(
    name = "waveliq",
    version,
    about = "Wavelet/Hausdorff full-reference image quality metric"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Score one distorted image against its reference.
    Score(ScoreArgs),
    /// Score every record of a dataset manifest and report PLCC/SRCC.
    Bench(BenchArgs),
    /// Write a 3-kind x 5-level distortion ladder and its manifest.
    Ladder(LadderArgs),
    /// Export, compare or inspect feature tensor files.
    #[command(subcommand)]
    Features(FeaturesCommand),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Dwt,
    Ch,
    #[value(name = "dwt+ch")]
    DwtCh,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MetricArg {
    L1,
    L2,
}

impl From<MetricArg> for GroundMetric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::L1 => GroundMetric::L1,
            MetricArg::L2 => GroundMetric::L2,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Toggle {
    On,
    Off,
}

#[derive(Args, Debug, Clone)]
struct ScoringFlags {
    #[arg(long, value_enum, default_value = "dwt+ch")]
    mode: ModeArg,
    #[arg(long, default_value_t = 2)]
    levels: usize,
    #[arg(long, default_value_t = 64)]
    bins: usize,
    #[arg(long, value_enum, default_value = "l2")]
    metric: MetricArg,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, default_value_t = 1.0)]
    low_weight: f64,
    #[arg(long, default_value_t = 1.0)]
    high_weight: f64,
    /// Use the identically-zero C_DA expression instead of the row difference.
    #[arg(long)]
    compat_eq9_verbatim: bool,
}

impl ScoringFlags {
    fn to_config(&self) -> Result<ScoreConfig, Error> {
        let cfg = ScoreConfig {
            mode: match self.mode {
                ModeArg::Dwt => ScoreMode::DwtOnly,
                ModeArg::Ch => ScoreMode::ChOnly,
                ModeArg::DwtCh => ScoreMode::DwtPlusCh,
            },
            refine: RefineConfig {
                low_weight: self.low_weight,
                high_weight: self.high_weight,
                ..RefineConfig::for_levels(self.levels)
            },
            metric: self.metric.into(),
            bins: self.bins,
            levels: self.levels,
            beta: self.beta,
            cda_variant: if self.compat_eq9_verbatim {
                CdaVariant::Verbatim
            } else {
                CdaVariant::RowDifference
            },
            ..ScoreConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args, Debug)]
struct ScoreArgs {
    reference: PathBuf,
    distorted: PathBuf,
    #[command(flatten)]
    scoring: ScoringFlags,
    #[arg(long)]
    jobs: Option<usize>,
    /// Dump both wavelet pyramids as tensor files under this directory.
    #[arg(long)]
    dump_pyramid: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    manifest: PathBuf,
    /// Where to write the JSON report.
    #[arg(long, short)]
    out: PathBuf,
    #[command(flatten)]
    scoring: ScoringFlags,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long, value_enum, default_value = "on")]
    logistic: Toggle,
    /// Also write `record_id,q_p,mos` next to the report.
    #[arg(long)]
    csv: bool,
    /// Dataset name recorded in the report (default: derived from the manifest path).
    #[arg(long)]
    name: Option<String>,
}

#[derive(Args, Debug)]
struct LadderArgs {
    reference: PathBuf,
    out_dir: PathBuf,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Subcommand, Debug)]
enum FeaturesCommand {
    /// Compute the refined feature set of an image and write it as a tensor file.
    Export {
        image: PathBuf,
        out: PathBuf,
        #[command(flatten)]
        scoring: ScoringFlags,
    },
    /// Hausdorff and coupled distances between two tensor files.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, value_enum, default_value = "l2")]
        metric: MetricArg,
    },
    /// Print the dimension and count of a tensor file.
    Info { file: PathBuf },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("WAVELIQ_LOG", "warn")).init();
    let cli = Cli::parse();
    if let Some(0) = match &cli.command {
        Command::Score(a) => a.jobs,
        Command::Bench(a) => a.jobs,
        _ => None,
    } {
        eprintln!("error: --jobs must be at least 1");
        return ExitCode::from(2);
    }
    let result = match cli.command {
        Command::Score(args) => cmd_score(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Ladder(args) => cmd_ladder(args),
        Command::Features(cmd) => cmd_features(cmd),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_failure() { 1 } else { 2 })
        }
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<(), Error> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Format(e.to_string()))?;
    println!("{text}");
    Ok(())
}

fn cmd_score(args: ScoreArgs) -> Result<(), Error> {
    let cfg = args.scoring.to_config()?;
    let reference = read_image(&args.reference)?;
    let distorted = read_image(&args.distorted)?;
    let report = with_jobs(args.jobs, || evaluate_pair(&reference, &distorted, &cfg))?;
    if let Some(dir) = &args.dump_pyramid {
        for (name, img) in [("ref", &reference), ("dist", &distorted)] {
            let pyr = decompose_with(&to_luma(img), &cfg.filters, cfg.levels, cfg.cda_variant)?;
            dump_pyramid(&pyr, &dir.join(name))?;
        }
    }
    print_json(&report)
}

const SUBBAND_NAMES: [&str; 4] = ["s_ll", "s_lh", "s_hl", "s_hh"];

fn dump_pyramid(pyr: &WaveletPyramid, dir: &Path) -> Result<(), Error> {
    for (k, level) in pyr.levels().iter().enumerate() {
        let ldir = dir.join(format!("level{}", k + 1));
        fs::create_dir_all(&ldir).map_err(|e| Error::Io {
            path: ldir.clone(),
            source: e,
        })?;
        for (i, name) in SUBBAND_NAMES.iter().enumerate() {
            let grids = [
                ("", level.subbands.as_array()[i]),
                ("_c_a", &level.pairs[i].c_a),
                ("_c_d", &level.pairs[i].c_d),
                ("_c_aa", &level.quads[i].c_aa),
                ("_c_ad", &level.quads[i].c_ad),
                ("_c_da", &level.quads[i].c_da),
                ("_c_dd", &level.quads[i].c_dd),
            ];
            for (suffix, grid) in grids {
                write_grid_file(grid, &ldir.join(format!("{name}{suffix}.wlfs")))?;
            }
        }
    }
    Ok(())
}

fn dataset_name(manifest: &Path) -> String {
    let stem = manifest.file_stem().and_then(|s| s.to_str()).unwrap_or("dataset");
    if stem == "manifest" {
        if let Some(parent) = manifest
            .canonicalize()
            .ok()
            .as_deref()
            .and_then(Path::parent)
            .and_then(Path::file_name)
            .and_then(|s| s.to_str())
        {
            return parent.to_string();
        }
    }
    stem.to_string()
}

fn cmd_bench(args: BenchArgs) -> Result<(), Error> {
    let cfg = args.scoring.to_config()?;
    let manifest = load_manifest(&args.manifest)?;
    let name = args.name.clone().unwrap_or_else(|| dataset_name(&args.manifest));
    let use_logistic = matches!(args.logistic, Toggle::On);
    let report = bench::run_benchmark(&name, &manifest, &cfg, use_logistic, args.jobs)?;
    report.write_json(&args.out)?;
    if args.csv {
        report.write_csv(&args.out.with_extension("csv"))?;
    }
    for failed in report.failed_records() {
        eprintln!(
            "warning: {} failed: {}",
            failed.record_id,
            failed.error.as_deref().unwrap_or("")
        );
    }
    if let Some(e) = &report.correlation_error {
        eprintln!("warning: correlations unavailable: {e}");
    }
    println!("{}", report.summary_line());
    Ok(())
}

fn cmd_ladder(args: LadderArgs) -> Result<(), Error> {
    let reference = read_image(&args.reference)?;
    let ref_path = args.reference.canonicalize().map_err(|e| Error::Io {
        path: args.reference.clone(),
        source: e,
    })?;
    let manifest = ladder::write_ladder(&reference, &ref_path, &args.out_dir, args.seed)?;
    print_json(&serde_json::json!({
        "manifest": args.out_dir.join(ladder::MANIFEST_NAME),
        "records": manifest.len(),
        "seed": args.seed,
    }))
}

fn cmd_features(cmd: FeaturesCommand) -> Result<(), Error> {
    match cmd {
        FeaturesCommand::Export { image, out, scoring } => {
            let cfg = scoring.to_config()?;
            let img = read_image(&image)?;
            let fs = pooled(&extract_features(&img, &cfg)?)?;
            write_feature_file(&fs, &out)?;
            print_json(&serde_json::json!({ "path": out, "dim": fs.dim(), "count": fs.len() }))
        }
        FeaturesCommand::Compare { a, b, metric } => {
            let metric: GroundMetric = metric.into();
            let (fa, fb) = (load_feature_file(&a)?, load_feature_file(&b)?);
            let (ab, ba) = directed_pair(&fa, &fb, metric)?;
            let h = ab.max(ba);
            let coupled = coupled_distance(&fa, &fb, Coupling::Aligned, metric).ok();
            print_json(&serde_json::json!({
                "hausdorff": h,
                "a_to_b": ab,
                "b_to_a": ba,
                "coupled": coupled,
                "similarity": map_similarity(h)?,
            }))
        }
        FeaturesCommand::Info { file } => {
            let fs = load_feature_file(&file)?;
            print_json(&serde_json::json!({ "dim": fs.dim(), "count": fs.len() }))
        }
    }
}
