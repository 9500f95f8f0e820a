//! Command-line surface for the targeting-strategy optimizer.
//!
//! Data goes to stdout (or `--out`); diagnostics and summaries go to
//! stderr. Exit codes: 0 success, 1 usage error, 2 dataset validation
//! failure, 3 runtime/domain error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use adtarget::engine::{
    self, active_matrix_csv, correlation_report, default_grid, strategy_csv, sweep_csv,
    GroupReport, Strategy, SweepResult,
};
use adtarget::mckp::{build_instance, prune};
use adtarget::prefix::build_family;
use adtarget::stats::{self, StatsDataset, Unit};

#[derive(Parser)]
#[command(
    name = "adtarget",
    version,
    about = "Profit-maximizing audience-targeting strategies",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a dataset for MECE consistency
    Validate {
        /// Dataset file (.json or .csv)
        #[arg(long)]
        data: PathBuf,
        /// How probabilities are written in a CSV file
        #[arg(long)]
        unit: Option<Unit>,
        /// Allowed deviation of each share sum from 1
        #[arg(long, default_value_t = stats::EPS_NORM_EXPORT)]
        eps: f64,
    },
    /// Compute the optimal strategy for one coverage floor
    Optimize {
        #[arg(long)]
        data: PathBuf,
        /// Minimum audience coverage, in [0,1]
        #[arg(long = "L", value_parser = parse_floor)]
        l: f64,
        /// Feature names to force inactive
        #[arg(long, value_delimiter = ',')]
        exclude: Vec<String>,
        #[arg(long)]
        unit: Option<Unit>,
        #[arg(long, default_value_t = stats::EPS_NORM_EXPORT)]
        eps: f64,
        #[command(flatten)]
        econ: EconArgs,
        /// Write the result here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
        /// Write the knapsack instance (debug JSON) here
        #[arg(long)]
        dump_instance: Option<PathBuf>,
    },
    /// Optimize across a grid of coverage floors
    Sweep {
        #[arg(long)]
        data: PathBuf,
        /// Number of evenly spaced floors on [0,1]
        #[arg(long, default_value_t = 50, conflicts_with = "grid_file")]
        grid_points: usize,
        /// File with one floor per line, overriding --grid-points
        #[arg(long)]
        grid_file: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        exclude: Vec<String>,
        /// JSON file with correlated-feature groups: [["a","b"], ...]
        #[arg(long)]
        groups: Option<PathBuf>,
        #[arg(long)]
        unit: Option<Unit>,
        #[arg(long, default_value_t = stats::EPS_NORM_EXPORT)]
        eps: f64,
        #[command(flatten)]
        econ: EconArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
        /// Write the feature-activity matrix CSV here
        #[arg(long)]
        matrix_out: Option<PathBuf>,
        /// Worker threads for the sweep (default: $ADTARGET_JOBS or 1)
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Generate a synthetic demo dataset
    GenDemo {
        /// "appendix" for the built-in 24-feature catalog, or a JSON file
        /// with [["name", type_count], ...]
        #[arg(long, default_value = "appendix")]
        schema: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Dirichlet concentration of the share sampler
        #[arg(long, default_value_t = 1.0)]
        concentration: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the feature-frequency table of a saved sweep
    Freq {
        /// Sweep JSON produced by the sweep command
        #[arg(long)]
        sweep: PathBuf,
    },
}

#[derive(Args)]
struct EconArgs {
    /// Base conversion rate B = P(Buy), as a fraction
    #[arg(long)]
    buy_rate: Option<f64>,
    /// Total audience count N
    #[arg(long)]
    audience: Option<u64>,
    /// Unit price of the product
    #[arg(long)]
    price: Option<f64>,
    /// Unit production cost
    #[arg(long)]
    cost: Option<f64>,
    /// Advertising expenditure budget
    #[arg(long)]
    budget: Option<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
}

/// Sweep output shape: the sweep itself plus the optional correlation
/// assessment when `--groups` is given.
#[derive(Serialize, Deserialize)]
struct SweepReport {
    #[serde(flatten)]
    result: SweepResult,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    correlation: Option<Vec<GroupReport>>,
}

fn parse_floor(text: &str) -> Result<f64, String> {
    let value: f64 = text
        .parse()
        .map_err(|_| format!("{text:?} is not a number"))?;
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err("L must lie in [0,1]".into())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Validate { data, unit, eps } => {
            let dataset = load_dataset_file(&data, unit)?;
            let report = stats::validate(&dataset, eps);
            if report.is_valid() {
                let types: usize = dataset.features.iter().map(|f| f.type_count()).sum();
                println!(
                    "valid: {} feature(s), {} type(s), eps = {eps}",
                    dataset.feature_count(),
                    types
                );
                Ok(ExitCode::SUCCESS)
            } else {
                for violation in &report.violations {
                    println!("violation: {violation}");
                }
                println!("{} violation(s)", report.violations.len());
                Ok(ExitCode::from(2))
            }
        }

        Command::Optimize {
            data,
            l,
            exclude,
            unit,
            eps,
            econ,
            out,
            format,
            dump_instance,
        } => {
            let dataset = match load_normalized(&data, unit, eps, &econ)? {
                Ok(dataset) => dataset,
                Err(code) => return Ok(code),
            };
            if let Some(path) = &dump_instance {
                let families: Vec<_> = dataset
                    .features
                    .iter()
                    .enumerate()
                    .map(|(i, f)| build_family(f, i))
                    .collect();
                let instance = prune(&build_instance(&families, l, dataset.buy_rate)?);
                fs::write(path, instance.dump_json())
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            let strategy = engine::evaluate(&engine::optimize(&dataset, l, &exclude)?, &dataset);
            print_strategy_summary(&strategy);
            let rendered = match format {
                OutputFormat::Json => to_pretty_json(&strategy),
                OutputFormat::Csv => strategy_csv(&strategy),
            };
            emit(out.as_deref(), &rendered)?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Sweep {
            data,
            grid_points,
            grid_file,
            exclude,
            groups,
            unit,
            eps,
            econ,
            out,
            format,
            matrix_out,
            jobs,
        } => {
            let dataset = match load_normalized(&data, unit, eps, &econ)? {
                Ok(dataset) => dataset,
                Err(code) => return Ok(code),
            };
            let grid = match &grid_file {
                Some(path) => read_grid_file(path)?,
                None => default_grid(grid_points),
            };
            let jobs = jobs.unwrap_or_else(default_jobs).max(1);
            let result = engine::sweep(&dataset, &grid, &exclude, jobs)?;

            let correlation = match &groups {
                Some(path) => {
                    let declared: Vec<Vec<String>> = serde_json::from_slice(
                        &fs::read(path).with_context(|| format!("reading {}", path.display()))?,
                    )
                    .with_context(|| format!("parsing groups file {}", path.display()))?;
                    let reports = correlation_report(&result, &declared)?;
                    print_correlation_summary(&reports);
                    Some(reports)
                }
                None => None,
            };
            eprintln!(
                "sweep complete: {} point(s), {} feature(s)",
                result.points.len(),
                result.frequency.len()
            );

            if let Some(path) = &matrix_out {
                fs::write(path, active_matrix_csv(&result))
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            let rendered = match format {
                OutputFormat::Json => to_pretty_json(&SweepReport {
                    result,
                    correlation,
                }),
                OutputFormat::Csv => sweep_csv(&result),
            };
            emit(out.as_deref(), &rendered)?;
            Ok(ExitCode::SUCCESS)
        }

        Command::GenDemo {
            schema,
            seed,
            concentration,
            out,
        } => {
            let schema = if schema == "appendix" {
                stats::appendix_schema()
            } else {
                let path = Path::new(&schema);
                serde_json::from_slice::<Vec<(String, usize)>>(
                    &fs::read(path).with_context(|| format!("reading {}", path.display()))?,
                )
                .with_context(|| format!("parsing schema file {}", path.display()))?
            };
            let dataset = stats::generate_synthetic(&schema, seed, concentration)?;
            emit(out.as_deref(), &stats::to_json(&dataset))?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Freq { sweep } => {
            let report: SweepReport = serde_json::from_slice(
                &fs::read(&sweep).with_context(|| format!("reading {}", sweep.display()))?,
            )
            .with_context(|| format!("parsing sweep file {}", sweep.display()))?;
            let mut csv = String::from("feature,count\n");
            for entry in &report.result.frequency {
                csv.push_str(&format!("{},{}\n", entry.feature, entry.count));
            }
            emit(None, &csv)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn load_dataset_file(path: &Path, unit: Option<Unit>) -> anyhow::Result<StatsDataset> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let extension = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase);
    match extension.as_deref() {
        Some("json") => {
            if unit.is_some() {
                eprintln!("note: --unit is ignored for JSON input; the file declares its own unit");
            }
            Ok(stats::load_json(&bytes)?)
        }
        Some("csv") => Ok(stats::load_csv(&bytes, unit.unwrap_or_default())?),
        _ => bail!(
            "cannot infer data format from {:?}: expected a .json or .csv file",
            path.display()
        ),
    }
}

/// Loads, applies economic overrides, validates, and renormalizes.
/// `Err(exit_code)` in the inner result means validation failed and the
/// violations were already reported.
fn load_normalized(
    path: &Path,
    unit: Option<Unit>,
    eps: f64,
    econ: &EconArgs,
) -> anyhow::Result<Result<StatsDataset, ExitCode>> {
    let mut dataset = load_dataset_file(path, unit)?;
    if econ.buy_rate.is_some() {
        dataset.buy_rate = econ.buy_rate;
    }
    if econ.audience.is_some() {
        dataset.audience_count = econ.audience;
    }
    if econ.price.is_some() {
        dataset.price = econ.price;
    }
    if econ.cost.is_some() {
        dataset.unit_cost = econ.cost;
    }
    if econ.budget.is_some() {
        dataset.budget = econ.budget;
    }
    dataset.check_domain()?;
    let report = stats::validate(&dataset, eps);
    match report.normalized {
        Some(normalized) => Ok(Ok(normalized)),
        None => {
            for violation in &report.violations {
                eprintln!("validation: {violation}");
            }
            eprintln!(
                "dataset failed validation with {} violation(s)",
                report.violations.len()
            );
            Ok(Err(ExitCode::from(2)))
        }
    }
}

fn read_grid_file(path: &Path) -> anyhow::Result<Vec<f64>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut grid = Vec::new();
    for (index, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let value: f64 = line.parse().with_context(|| {
            format!("{}:{}: invalid floor {line:?}", path.display(), index + 1)
        })?;
        grid.push(value);
    }
    if grid.is_empty() {
        bail!("grid file {} contains no floors", path.display());
    }
    Ok(grid)
}

fn default_jobs() -> usize {
    std::env::var("ADTARGET_JOBS")
        .ok()
        .and_then(|value| value.parse().ok())
        .filter(|&jobs| jobs >= 1)
        .unwrap_or(1)
}

fn to_pretty_json<T: Serialize>(value: &T) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("serialization");
    out.push('\n');
    out
}

fn emit(out: Option<&Path>, data: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => {
            fs::write(path, data).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{data}"),
    }
    Ok(())
}

fn print_strategy_summary(strategy: &Strategy) {
    eprintln!(
        "optimal strategy at L = {}: lift {:.4}, coverage {:.4}, {} of {} feature(s) active",
        strategy.l_floor,
        strategy.lift,
        strategy.coverage,
        strategy.active_count(),
        strategy.selections.len()
    );
    for selection in strategy.selections.iter().filter(|s| s.active) {
        eprintln!(
            "  {}: {} (k = {}/{}, lift {:.4})",
            selection.feature,
            selection.selected.join(", "),
            selection.prefix_len,
            selection.type_count,
            selection.lift
        );
    }
    match strategy.metrics.conditional_buy_prob {
        Some(p) => eprintln!("  P(Buy | S) = {p:.6}"),
        None => eprintln!(
            "  P(Buy | S) = {:.4}·B (supply --buy-rate to resolve)",
            strategy.lift
        ),
    }
    if let Some(sales) = strategy.metrics.expected_sales {
        eprintln!("  expected sales = {sales:.2}");
    }
    if let Some(profit) = strategy.metrics.profit {
        eprintln!("  profit = {profit:.2}");
    }
    for warning in &strategy.metrics.warnings {
        eprintln!("warning: {warning}");
    }
}

fn print_correlation_summary(reports: &[GroupReport]) {
    for report in reports {
        if report.violation {
            eprintln!(
                "correlation: [{}] co-activate at some floor; keep {:?}, exclude [{}]",
                report.group.join(", "),
                report.keep.as_deref().unwrap_or("?"),
                report.exclude.join(", ")
            );
        } else {
            eprintln!(
                "correlation: [{}] never co-activate; no action needed",
                report.group.join(", ")
            );
        }
    }
}
