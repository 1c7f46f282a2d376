use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use spin_negativity::dataset::{load_dataset, save_dataset, Family, Layout};
use spin_negativity::ensemble::load_ensemble;
use spin_negativity::experiment::{
    build_dataset, compare_models, default_layout, linspace, run_pipeline, scaling_fit, sweep_alpha,
    sweep_samples, sweep_theta, write_curve, ComparisonTable, ExperimentConfig, SweepLog, MODEL_ROWS,
};
use spin_negativity::metrics::compute_metrics;
use spin_negativity::states::Spin;
use spin_negativity::{Error, Result};

#[derive(Parser)]
#[command(name = "spin-negativity", version, about = "Entanglement negativity of spin states: data, stacked models, sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunArgs {
    #[arg(long)]
    family: Option<Family>,
    /// Spin, e.g. 0.5, 1 or 5.
    #[arg(long)]
    j: Option<f64>,
    /// Spin of subsystem B (pure states only).
    #[arg(long)]
    j2: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    layout: Option<Layout>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    normalize_negativity: bool,
    /// TOML file whose keys override the flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Build a dataset and write it as CSV plus sidecar.
    Generate(RunArgs),
    /// Fit the stacked ensemble and write it with a report.
    Train(RunArgs),
    /// Metrics of a saved ensemble on a saved dataset.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Model-by-metric table.
    Compare(RunArgs),
    SweepSamples {
        #[command(flatten)]
        run: RunArgs,
        /// Ascending, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
    },
    SweepTheta {
        #[command(flatten)]
        run: RunArgs,
        /// Saved ensemble; trained from the run flags when absent.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        points: Option<usize>,
    },
    SweepAlpha {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        points: Option<usize>,
    },
    /// Refit the scaling law on sweep logs.
    ScalingFit {
        #[arg(long, value_delimiter = ',', required = true)]
        logs: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn config_from(args: &RunArgs) -> Result<ExperimentConfig> {
    let family = args.family.unwrap_or(Family::Pure);
    let j = args.j.unwrap_or(0.5);
    let mut c = ExperimentConfig::desk_default(family, j);
    c.j2 = args.j2;
    if let Some(s) = args.samples {
        c.samples = s;
    }
    if let Some(s) = args.seed {
        c.seed = s;
    }
    if let Some(k) = args.folds {
        c.ensemble.folds = k;
    }
    c.layout = args.layout.unwrap_or_else(|| default_layout(family, j));
    c.out_dir = args.out.clone();
    c.normalize_negativity = args.normalize_negativity;
    if let Some(path) = &args.config {
        if !path.exists() {
            return Err(Error::MissingFile(path.clone()));
        }
        c = c.overlay_toml(&std::fs::read_to_string(path)?)?;
    }
    c.validate()?;
    Ok(c)
}

fn out_dir(c: &ExperimentConfig) -> PathBuf {
    c.out_dir.clone().unwrap_or_else(|| PathBuf::from("."))
}

fn print_table(table: &ComparisonTable) {
    print!("{}", table.to_text());
}

fn trained(run: &RunArgs, model: &Option<PathBuf>) -> Result<(ExperimentConfig, spin_negativity::ensemble::StackedEnsemble)> {
    let mut c = config_from(run)?;
    c.out_dir = Some(out_dir(&c));
    match model {
        Some(p) => Ok((c, load_ensemble(p)?)),
        None => {
            let r = run_pipeline(&c)?;
            Ok((c, r.ensemble))
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(args) => {
            let c = config_from(&args)?;
            let dir = out_dir(&c);
            std::fs::create_dir_all(&dir)?;
            let d = build_dataset(&c)?;
            save_dataset(&d, &dir.join("dataset.csv"))?;
            println!("wrote {} rows x {} features to {}", d.len(), d.width(), dir.join("dataset.csv").display());
        }
        Command::Train(args) => {
            let mut c = config_from(&args)?;
            c.out_dir = Some(out_dir(&c));
            let r = run_pipeline(&c)?;
            print_table(&ComparisonTable::from_report(&r.report));
        }
        Command::Evaluate { model, data, out } => {
            let e = load_ensemble(&model)?;
            let d = load_dataset(&data)?;
            let o = e.predict_all(&d.features)?;
            let mut rows = Vec::new();
            let cols = ["mlp", "gbt", "extra_trees"];
            for name in cols {
                let c = e.meta_columns.iter().position(|m| m.name() == name).expect("base column");
                let p: Vec<f64> = o.base.row_iter().map(|r| r[c]).collect();
                rows.push((name.to_string(), compute_metrics(&d.targets, &p)?));
            }
            rows.push(("ensemble".into(), compute_metrics(&d.targets, &o.ensemble)?));
            debug_assert!(rows.iter().map(|r| r.0.as_str()).eq(MODEL_ROWS));
            let table = ComparisonTable {
                family: d.meta.family,
                j: d.meta.j1.value(),
                samples: d.len(),
                rows,
            };
            print_table(&table);
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir)?;
                table.write(&dir)?;
            }
        }
        Command::Compare(args) => {
            let mut c = config_from(&args)?;
            c.out_dir = Some(out_dir(&c));
            let (table, _) = compare_models(&c)?;
            print_table(&table);
        }
        Command::SweepSamples { run, sizes } => {
            let mut c = config_from(&run)?;
            c.out_dir = Some(out_dir(&c));
            let (log, _) = sweep_samples(&c, &sizes)?;
            for r in log.rows.iter().filter(|r| r.model == "ensemble") {
                println!("S={:<8} ensemble r2={:.6} ({})", r.samples, r.r2, r.status);
            }
        }
        Command::SweepTheta { run, model, points } => {
            let (c, e) = trained(&run, &model)?;
            let grid = linspace(0.0, std::f64::consts::FRAC_PI_2, points.unwrap_or(c.curve_points));
            let curve = sweep_theta(&e, Spin::new(c.j)?, &grid, c.normalize_negativity)?;
            write_curve(&curve, &out_dir(&c), "theta_curve")?;
            println!("max |predicted - exact| = {:.4e}", curve.max_abs_error());
        }
        Command::SweepAlpha { run, model, points } => {
            let (c, e) = trained(&run, &model)?;
            let layout = e.feature_spec.as_ref().map_or(c.layout, |s| s.layout);
            let grid = linspace(0.0, 1.0, points.unwrap_or(c.curve_points));
            let curve = sweep_alpha(&e, Spin::new(c.j)?, layout, &grid, c.normalize_negativity)?;
            write_curve(&curve, &out_dir(&c), "alpha_curve")?;
            println!(
                "predicted threshold {:?}, exact threshold {:?}",
                curve.predicted_threshold(),
                curve.exact_threshold()
            );
        }
        Command::ScalingFit { logs, out } => {
            let logs = logs.iter().map(|p| SweepLog::read_csv(p)).collect::<Result<Vec<_>>>()?;
            let fit = scaling_fit(&logs)?;
            let c = fit.coefficients;
            println!(
                "log10 S = {:.4} + {:.4} j + {:.4} mse + {:.4} mae + {:.4} r2 (published sign pattern: {})",
                c.c0, c.c_j, c.c_mse, c.c_mae, c.c_r2, fit.matches_published_signs
            );
            let dir = out.unwrap_or_else(|| PathBuf::from("."));
            std::fs::create_dir_all(&dir)?;
            write_fit(&dir.join("scaling_fit.json"), &fit)?;
        }
    }
    Ok(())
}

fn write_fit(path: &Path, fit: &spin_negativity::experiment::ScalingFit) -> Result<()> {
    let mut text = serde_json::to_string_pretty(fit)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
