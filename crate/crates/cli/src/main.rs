use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lesioneval::phantom::{generate_phantom, Perturbation, PhantomSpec};
use lesioneval::ranking::table_io::{read_metrics_file, write_frs, write_metrics, write_pvalue_matrix, write_ranks};
use lesioneval::ranking::{
    build_rank_table, format_frs, pairwise_matrix, permutation_test, MetricKind, MetricTable, PermutationOptions,
    ScalingMode,
};
use lesioneval::report::{boxplot_svg, render_markdown, render_missing_log, run_batch, summarize, write_summary_csv};
use lesioneval::report::{BatchOptions, StdMode};
use lesioneval::{evaluate_case, read_label_volume, write_label_volume, EvalConfig, RegionKind};

#[derive(Parser)]
#[command(name = "lesioneval", version, about = "Lesion-wise segmentation scoring and challenge ranking")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalOpts {
    /// Evaluation config file (key = value lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for permutation tests and phantoms.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Permutations per team pair; 0 skips the tests.
    #[arg(long, global = true, default_value_t = 100_000)]
    permutations: usize,
    /// Worker threads; 0 picks one per CPU.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Cumulative rank scaling: mean-of-6, sum-of-6 or region-sum-metric-mean.
    #[arg(long, global = true, default_value = "region-sum-metric-mean")]
    scaling: String,
}

#[derive(Subcommand)]
enum Command {
    /// Score one prediction against its ground truth and print JSON.
    Eval { gt: PathBuf, pred: PathBuf },
    /// Score every team directory against a ground-truth directory.
    Batch {
        gt_dir: PathBuf,
        teams_dir: PathBuf,
        out_csv: PathBuf,
        /// Also emit sensitivity rows.
        #[arg(long)]
        with_sensitivity: bool,
    },
    /// Rank teams from a metrics CSV; writes ranks.csv, frs.csv and pvalues.csv.
    Rank { metrics_csv: PathBuf, out_dir: PathBuf },
    /// Permutation test between two teams, printed as JSON.
    Permtest {
        metrics_csv: PathBuf,
        team_a: String,
        team_b: String,
        /// Count only permuted gaps strictly above the observed gap.
        #[arg(long)]
        strict: bool,
        /// Use the signed gap FRS(b) - FRS(a) instead of its magnitude.
        #[arg(long)]
        one_sided: bool,
    },
    /// Mean ± std (median) tables as Markdown and CSV.
    Summary {
        metrics_csv: PathBuf,
        /// Markdown output; the CSV goes next to it with a .csv extension.
        out_path: PathBuf,
        /// Use the N - 1 standard deviation.
        #[arg(long)]
        sample_std: bool,
    },
    /// Per-team box plot of one region and metric as SVG.
    Boxplot {
        metrics_csv: PathBuf,
        region: String,
        metric: String,
        out_svg: PathBuf,
    },
    /// Write a synthetic ground-truth / prediction pair.
    Phantom {
        out_gt: PathBuf,
        out_pred: PathBuf,
        /// Grid size as NX,NY,NZ.
        #[arg(long, default_value = "64,64,64")]
        dims: String,
        /// Voxel spacing in mm as SX,SY,SZ.
        #[arg(long, default_value = "1,1,1")]
        spacing: String,
        /// Lesions per label.
        #[arg(long, default_value_t = 1)]
        lesions: usize,
        #[arg(long, default_value_t = 3)]
        radius_min: usize,
        #[arg(long, default_value_t = 6)]
        radius_max: usize,
        /// none, erode, dilate, shift:DX,DY,DZ, drop:ET|TC|WT or false-blob:COUNT,SIZE.
        #[arg(long, default_value = "none")]
        perturbation: String,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl From<lesioneval::Error> for Failure {
    fn from(e: lesioneval::Error) -> Self {
        Failure {
            code: if e.is_validation() { 2 } else { 1 },
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure {
        code: 1,
        message: format!("cannot write {}: {e}", path.display()),
    })
}

fn create_file(path: &Path) -> Result<fs::File, Failure> {
    fs::File::create(path).map_err(|e| Failure {
        code: 1,
        message: format!("cannot create {}: {e}", path.display()),
    })
}

fn parse_triple<T: std::str::FromStr>(text: &str, what: &str) -> Result<[T; 3], Failure> {
    let parts: Vec<T> = text
        .split(',')
        .map(|p| p.trim().parse::<T>())
        .collect::<Result<_, _>>()
        .map_err(|_| usage(format!("--{what} expects three comma-separated numbers, got {text:?}")))?;
    parts
        .try_into()
        .map_err(|_| usage(format!("--{what} expects three comma-separated numbers, got {text:?}")))
}

fn json_failure(e: serde_json::Error) -> Failure {
    Failure {
        code: 1,
        message: format!("JSON encoding failed: {e}"),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let g = cli.global;
    let config = match &g.config {
        Some(path) => EvalConfig::load(path)?,
        None => EvalConfig::default(),
    };
    let scaling: ScalingMode = g.scaling.parse()?;
    let perm_opts = |strict: bool, two_sided: bool| PermutationOptions {
        n_permutations: g.permutations,
        seed: g.seed,
        strict,
        two_sided,
    };

    match cli.command {
        Command::Eval { gt, pred } => {
            let gt = read_label_volume(&gt)?;
            let pred = read_label_volume(&pred)?;
            let metrics = evaluate_case(&gt, &pred, &config)?;
            println!("{}", serde_json::to_string_pretty(&metrics).map_err(json_failure)?);
        }
        Command::Batch {
            gt_dir,
            teams_dir,
            out_csv,
            with_sensitivity,
        } => {
            let opts = BatchOptions {
                config,
                jobs: g.jobs,
                with_sensitivity,
            };
            let outcome = run_batch(&gt_dir, &teams_dir, &opts)?;
            write_metrics(create_file(&out_csv)?, &outcome.records)?;
            let mut log_path = out_csv.clone().into_os_string();
            log_path.push(".log");
            let log = render_missing_log(&outcome.missing);
            write_file(Path::new(&log_path), &log)?;
            for line in log.lines() {
                eprintln!("warning: {line}");
            }
            println!("{} rows written to {}", outcome.records.len(), out_csv.display());
        }
        Command::Rank { metrics_csv, out_dir } => {
            let table = MetricTable::from_records(&read_metrics_file(&metrics_csv)?)?;
            let ranks = build_rank_table(&table, scaling)?;
            fs::create_dir_all(&out_dir).map_err(|e| Failure {
                code: 1,
                message: format!("cannot create {}: {e}", out_dir.display()),
            })?;
            write_ranks(create_file(&out_dir.join("ranks.csv"))?, &ranks)?;
            write_frs(create_file(&out_dir.join("frs.csv"))?, &ranks)?;
            let ordered: Vec<String> = ranks.order().iter().map(|&t| ranks.teams()[t].clone()).collect();
            let matrix = if ordered.len() >= 2 && g.permutations > 0 {
                Some(pairwise_matrix(&ranks, &perm_opts(false, true))?)
            } else {
                None
            };
            write_pvalue_matrix(create_file(&out_dir.join("pvalues.csv"))?, &ordered, matrix.as_ref())?;
            println!("rank\tteam\tFRS");
            for (team, frs, place) in ranks.leaderboard() {
                println!("{place}\t{team}\t{}", format_frs(frs));
            }
        }
        Command::Permtest {
            metrics_csv,
            team_a,
            team_b,
            strict,
            one_sided,
        } => {
            let table = MetricTable::from_records(&read_metrics_file(&metrics_csv)?)?;
            let ranks = build_rank_table(&table, scaling)?;
            let result = permutation_test(&ranks, &team_a, &team_b, &perm_opts(strict, !one_sided))?;
            println!("{}", serde_json::to_string_pretty(&result).map_err(json_failure)?);
        }
        Command::Summary {
            metrics_csv,
            out_path,
            sample_std,
        } => {
            let mode = if sample_std { StdMode::Sample } else { StdMode::Population };
            let rows = summarize(&read_metrics_file(&metrics_csv)?, mode)?;
            let markdown = render_markdown(&rows);
            write_file(&out_path, &markdown)?;
            write_summary_csv(create_file(&out_path.with_extension("csv"))?, &rows)?;
            print!("{markdown}");
        }
        Command::Boxplot {
            metrics_csv,
            region,
            metric,
            out_svg,
        } => {
            let region: RegionKind = region.parse()?;
            let metric: MetricKind = metric.parse()?;
            let svg = boxplot_svg(&read_metrics_file(&metrics_csv)?, region, metric)?;
            write_file(&out_svg, svg)?;
        }
        Command::Phantom {
            out_gt,
            out_pred,
            dims,
            spacing,
            lesions,
            radius_min,
            radius_max,
            perturbation,
        } => {
            let spec = PhantomSpec {
                seed: g.seed,
                dims: parse_triple(&dims, "dims")?,
                spacing: parse_triple(&spacing, "spacing")?,
                n_lesions: lesions,
                radius_range: (radius_min, radius_max),
                perturbation: perturbation.parse::<Perturbation>()?,
            };
            let (gt, pred) = generate_phantom(&spec)?;
            write_label_volume(&gt, &out_gt)?;
            write_label_volume(&pred, &out_pred)?;
            println!("{}", spec.digest());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
