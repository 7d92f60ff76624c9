use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use hillvallea::harness::{self, ExperimentConfig, OutputFormat};
use hillvallea::problems::data;
use hillvallea::scoring::Scenario;
use hillvallea::{Error, RunConfig, XiScaling};

const EXIT_CONFIG: u8 = 1;
const EXIT_MISSING_DATA: u8 = 2;
const EXIT_RUN_FAILURE: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "hillvallea", version, about = "Hill-valley niching optimizer and benchmark harness")]
#[command(args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(clap::Args, Debug)]
struct RunArgs {
    /// Problem ids: `1-20`, `4` or a list such as `1,2,6-8`.
    #[arg(long, default_value = "1-20")]
    problems: String,
    /// Repetitions per problem.
    #[arg(long, default_value_t = 50)]
    runs: usize,
    /// Base seed; run r uses seed + r.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory with composition data and optional optima files.
    #[arg(long)]
    data_dir: Option<PathBuf>,
    /// Output directory for traces and score tables.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Parallel worker threads.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Restart parameters N,NINC,NC,NCINC.
    #[arg(long, default_value = "64,2,0.8,1.1")]
    xi: String,
    /// Whether N is multiplied by the dimension.
    #[arg(long, value_enum, default_value_t = Scaling::WithD)]
    xi_scaling: Scaling,
    /// Budget override P=B; repeatable.
    #[arg(long = "budget-override", value_name = "P=B")]
    budget_override: Vec<String>,
    /// Niche radius override P=R; repeatable.
    #[arg(long = "radius-override", value_name = "P=R")]
    radius_override: Vec<String>,
    /// Keep every distinct niche in the archive, local optima included.
    #[arg(long)]
    keep_local: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the optima database (optima_XX.txt) for the selected problems.
    ExportOptima {
        #[arg(long, default_value = "1-10")]
        problems: String,
        #[arg(long)]
        data_dir: Option<PathBuf>,
        /// Destination directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Convert the original CEC2013 data layout into composition files.
    ImportCec2013 {
        /// Directory containing optima.dat and CF*_M_D*.dat.
        src: PathBuf,
        /// Destination data directory.
        #[arg(long)]
        data_dir: PathBuf,
    },
    /// Re-score saved trace files without re-running the optimizer.
    Rescore {
        /// Trace files written by a previous run.
        #[arg(required = true)]
        traces: Vec<PathBuf>,
        #[arg(long)]
        data_dir: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Scaling {
    WithD,
    Literal,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::MissingData(_) => EXIT_MISSING_DATA,
        Error::Io(_) | Error::Csv(_) | Error::Json(_) | Error::Eval(_) => EXIT_RUN_FAILURE,
        _ => EXIT_CONFIG,
    }
}

fn experiment_config(a: &RunArgs) -> Result<ExperimentConfig, Error> {
    let mut budget_overrides = BTreeMap::new();
    for o in &a.budget_override {
        let (p, b) = harness::parse_override::<u64>(o)?;
        budget_overrides.insert(p, b);
    }
    let mut radius_overrides = BTreeMap::new();
    for o in &a.radius_override {
        let (p, r) = harness::parse_override::<f64>(o)?;
        radius_overrides.insert(p, r);
    }
    let run_config = RunConfig {
        restart: harness::parse_xi(&a.xi)?,
        xi_scaling: match a.xi_scaling {
            Scaling::WithD => XiScaling::WithDimension,
            Scaling::Literal => XiScaling::Literal,
        },
        archive_tolerance: if a.keep_local { None } else { RunConfig::default().archive_tolerance },
        ..RunConfig::default()
    };
    let cfg = ExperimentConfig {
        problems: harness::parse_problem_list(&a.problems)?,
        runs: a.runs,
        base_seed: a.seed,
        run_config,
        budget_overrides,
        radius_overrides,
        data_dir: a.data_dir.clone(),
        out: a.out.clone(),
        format: a.format.into(),
        jobs: a.jobs,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn print_summary(report: &hillvallea::ScoreReport) {
    println!("problem  runs  {:>8} {:>8} {:>8} {:>8}", "S1", "S2", "S3", "SR");
    for p in &report.problems {
        println!(
            "{:>7} {:>5}  {:>8.4} {:>8.4} {:>8.4} {:>8.4}",
            p.problem_id,
            p.runs,
            p.mean(Scenario::S1),
            p.mean(Scenario::S2),
            p.mean(Scenario::S3),
            p.mean_sr()
        );
    }
    println!(
        "{:>7} {:>5}  {:>8.4} {:>8.4} {:>8.4}",
        "avg",
        "",
        report.average(Scenario::S1),
        report.average(Scenario::S2),
        report.average(Scenario::S3)
    );
}

fn run_main(a: &RunArgs) -> Result<u8, Error> {
    let cfg = experiment_config(a)?;
    let result = harness::run_experiment(&cfg)?;
    print_summary(&result.report);
    for f in &result.failed {
        eprintln!("run failed: problem {} run {}: {}", f.problem_id, f.run, f.reason);
    }
    Ok(if result.failed.is_empty() { 0 } else { EXIT_RUN_FAILURE })
}

fn dispatch(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        None => run_main(&cli.run),
        Some(Command::ExportOptima { problems, data_dir, out }) => {
            std::fs::create_dir_all(&out)?;
            for id in harness::parse_problem_list(&problems)? {
                let p = hillvallea::make_problem(id, data_dir.as_deref())?;
                let path = out.join(data::optima_file_name(id));
                data::write_optima(&path, p.optima())?;
                println!("{}", path.display());
            }
            Ok(0)
        }
        Some(Command::ImportCec2013 { src, data_dir }) => {
            for path in data::import_cec2013(&src, &data_dir)? {
                println!("{}", path.display());
            }
            Ok(0)
        }
        Some(Command::Rescore { traces, data_dir, out, format }) => {
            let cfg = ExperimentConfig {
                data_dir,
                ..ExperimentConfig::default()
            };
            let report = harness::rescore_traces(&traces, &cfg)?;
            print_summary(&report);
            if let Some(out) = out {
                harness::emit_tables(&report, format.into(), &out)?;
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
