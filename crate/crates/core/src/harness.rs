//! Experiment runner: seeded repetitions over suite problems, scoring at all
//! accuracy levels, aggregation, per-run trace files and score tables.
//!
//! Output layout under the output directory:
//!
//! ```text
//! traces/p04_r000.csv     one per run: feval, fitness, coordinates
//! s1.csv s2.csv s3.csv    scenario tables (csv format)
//! sr.csv                  success rates, same layout
//! scores.json             all four tables (json format)
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::orchestrator::{run, RunConfig, RunTrace, TraceRecord};
use crate::problems::{data, make_problem, table_entry, Problem};
use crate::scoring::{aggregate, score_run, AccuracyLevel, LevelScores, ProblemScores, RunScores, Scenario, ScoreReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(Error::Config(format!("unknown output format {other:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub problems: Vec<usize>,
    pub runs: usize,
    pub base_seed: u64,
    pub run_config: RunConfig,
    pub budget_overrides: BTreeMap<usize, u64>,
    pub radius_overrides: BTreeMap<usize, f64>,
    pub data_dir: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    pub jobs: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            problems: (1..=20).collect(),
            runs: 50,
            base_seed: 0,
            run_config: RunConfig::default(),
            budget_overrides: BTreeMap::new(),
            radius_overrides: BTreeMap::new(),
            data_dir: None,
            out: None,
            format: OutputFormat::Csv,
            jobs: 1,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.problems.is_empty() {
            return Err(Error::Config("no problems selected".into()));
        }
        for &id in &self.problems {
            table_entry(id).map_err(|_| Error::Config(format!("unknown problem id {id}")))?;
        }
        if self.runs == 0 {
            return Err(Error::Config("runs must be at least 1".into()));
        }
        if self.jobs == 0 {
            return Err(Error::Config("jobs must be at least 1".into()));
        }
        for id in self.budget_overrides.keys().chain(self.radius_overrides.keys()) {
            if !self.problems.contains(id) {
                return Err(Error::Config(format!("override for unselected problem {id}")));
            }
        }
        if self.radius_overrides.values().any(|r| !(*r > 0.0)) {
            return Err(Error::Config("niche radii must be positive".into()));
        }
        if !(self.run_config.selection_fraction > 0.0 && self.run_config.selection_fraction <= 1.0) {
            return Err(Error::Config("selection fraction must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

/// Parses `1-20`, `4`, or `1,2,5-7`.
pub fn parse_problem_list(spec: &str) -> Result<Vec<usize>> {
    let bad = || Error::Config(format!("bad problem list {spec:?}"));
    let mut ids = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let a: usize = a.trim().parse().map_err(|_| bad())?;
                let b: usize = b.trim().parse().map_err(|_| bad())?;
                if a > b {
                    return Err(bad());
                }
                ids.extend(a..=b);
            }
            None => ids.push(part.parse().map_err(|_| bad())?),
        }
    }
    ids.sort_unstable();
    ids.dedup();
    Ok(ids)
}

/// Parses `N,NINC,NC,NCINC`.
pub fn parse_xi(spec: &str) -> Result<crate::orchestrator::RestartParams> {
    let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
    let bad = || Error::Config(format!("bad xi {spec:?}: expected N,NINC,NC,NCINC"));
    if parts.len() != 4 {
        return Err(bad());
    }
    let n: usize = parts[0].parse().map_err(|_| bad())?;
    let vals: Vec<f64> = parts[1..]
        .iter()
        .map(|p| p.parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    crate::orchestrator::RestartParams::new(n, vals[0], vals[1], vals[2])
        .map_err(|e| Error::Config(e.to_string()))
}

/// Parses `P=V`.
pub fn parse_override<T: std::str::FromStr>(spec: &str) -> Result<(usize, T)> {
    let bad = || Error::Config(format!("bad override {spec:?}: expected P=VALUE"));
    let (p, v) = spec.split_once('=').ok_or_else(bad)?;
    Ok((p.trim().parse().map_err(|_| bad())?, v.trim().parse().map_err(|_| bad())?))
}

/// Builds the configured problems, applying overrides and any optima
/// database found in the data directory.
pub fn load_problems(cfg: &ExperimentConfig) -> Result<Vec<Problem>> {
    cfg.problems
        .iter()
        .map(|&id| {
            let mut p = make_problem(id, cfg.data_dir.as_deref())?;
            if let Some(dir) = &cfg.data_dir {
                let path = dir.join(data::optima_file_name(id));
                if path.exists() {
                    let optima = data::read_optima(&path, p.dim())?;
                    p = p.with_optima(optima)?;
                }
            }
            if let Some(&b) = cfg.budget_overrides.get(&id) {
                p = p.with_budget(b);
            }
            if let Some(&r) = cfg.radius_overrides.get(&id) {
                p = p.with_niche_radius(r);
            }
            Ok(p)
        })
        .collect()
}

/// One completed run.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub problem_id: usize,
    pub run: usize,
    pub seed: u64,
    pub evals_used: u64,
    pub trace: RunTrace,
    pub scores: RunScores,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FailedRun {
    pub problem_id: usize,
    pub run: usize,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub report: ScoreReport,
    pub runs: Vec<RunRecord>,
    pub failed: Vec<FailedRun>,
    pub files: Vec<PathBuf>,
}

fn execute_one(problem: &Problem, cfg: &ExperimentConfig, run_index: usize) -> Result<RunRecord, FailedRun> {
    let seed = cfg.base_seed + run_index as u64;
    let fail = |reason: String| FailedRun {
        problem_id: problem.id(),
        run: run_index,
        reason,
    };
    let outcome = catch_unwind(AssertUnwindSafe(|| run(problem, &cfg.run_config, seed))).map_err(|panic| {
        let msg = panic
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "run panicked".into());
        fail(msg)
    })?;
    let scores = score_run(&outcome.trace, problem).map_err(|e| fail(e.to_string()))?;
    Ok(RunRecord {
        problem_id: problem.id(),
        run: run_index,
        seed,
        evals_used: outcome.evals_used,
        trace: outcome.trace,
        scores,
    })
}

#[cfg(feature = "parallel")]
fn execute_all(
    problems: &[Problem],
    cfg: &ExperimentConfig,
    tasks: &[(usize, usize)],
) -> Result<Vec<Result<RunRecord, FailedRun>>> {
    use rayon::prelude::*;
    if cfg.jobs == 1 {
        return Ok(tasks.iter().map(|&(p, r)| execute_one(&problems[p], cfg, r)).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {} workers: {e}", cfg.jobs)))?;
    Ok(pool.install(|| {
        tasks
            .par_iter()
            .map(|&(p, r)| execute_one(&problems[p], cfg, r))
            .collect()
    }))
}

#[cfg(not(feature = "parallel"))]
fn execute_all(
    problems: &[Problem],
    cfg: &ExperimentConfig,
    tasks: &[(usize, usize)],
) -> Result<Vec<Result<RunRecord, FailedRun>>> {
    Ok(tasks.iter().map(|&(p, r)| execute_one(&problems[p], cfg, r)).collect())
}

/// Runs every (problem, run) pair. Run `r` always gets seed
/// `base_seed + r`. Missing data fails before any run starts.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let problems = load_problems(cfg)?;
    let tasks: Vec<(usize, usize)> = (0..problems.len())
        .flat_map(|p| (0..cfg.runs).map(move |r| (p, r)))
        .collect();
    let results = execute_all(&problems, cfg, &tasks)?;

    let mut runs = Vec::new();
    let mut failed = Vec::new();
    for r in results {
        match r {
            Ok(rec) => runs.push(rec),
            Err(f) => failed.push(f),
        }
    }
    let scores: Vec<RunScores> = runs.iter().map(|r| r.scores.clone()).collect();
    let report = aggregate(&scores);

    let mut files = Vec::new();
    if let Some(out) = &cfg.out {
        let trace_dir = out.join("traces");
        fs::create_dir_all(&trace_dir)?;
        for rec in &runs {
            let path = trace_dir.join(format!("p{:02}_r{:03}.csv", rec.problem_id, rec.run));
            write_trace(&path, rec.problem_id, &rec.trace)?;
            files.push(path);
        }
        files.extend(emit_tables(&report, cfg.format, out)?);
    }
    Ok(ExperimentResult {
        report,
        runs,
        failed,
        files,
    })
}

/// Writes a trace as CSV: a `#` header line with problem, seed and budget,
/// then `feval,fitness,x0,...`.
pub fn write_trace(path: &Path, problem_id: usize, trace: &RunTrace) -> Result<()> {
    let d = trace.records.first().map_or(0, |r| r.x.len());
    let mut text = format!("# problem={problem_id} seed={} budget={}\n", trace.seed, trace.budget);
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["feval".to_string(), "fitness".to_string()];
    header.extend((0..d).map(|i| format!("x{i}")));
    w.write_record(&header)?;
    for r in &trace.records {
        let mut row = vec![r.feval.to_string(), r.fitness.to_string()];
        row.extend(r.x.iter().map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    text.push_str(&String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv is utf-8"));
    fs::write(path, text)?;
    Ok(())
}

/// Reads a trace written by [`write_trace`]; returns the problem id too.
pub fn read_trace(path: &Path) -> Result<(usize, RunTrace)> {
    let text = fs::read_to_string(path)?;
    let bad = |why: &str| Error::InvalidTrace(format!("{}: {why}", path.display()));
    let first = text.lines().next().ok_or_else(|| bad("empty file"))?;
    let meta: BTreeMap<&str, &str> = first
        .trim_start_matches('#')
        .split_whitespace()
        .filter_map(|kv| kv.split_once('='))
        .collect();
    let field = |k: &str| -> Result<u64> {
        meta.get(k)
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| bad(&format!("missing {k} in header")))
    };
    let (problem, seed, budget) = (field("problem")? as usize, field("seed")?, field("budget")?);
    let mut rd = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut records = Vec::new();
    for row in rd.records() {
        let row = row?;
        let num = |i: usize| -> Result<f64> { row[i].parse().map_err(|_| bad("bad number")) };
        let feval: u64 = row[0].parse().map_err(|_| bad("bad feval"))?;
        let fitness = num(1)?;
        let x = (2..row.len()).map(num).collect::<Result<Vec<_>>>()?;
        records.push(TraceRecord { feval, fitness, x });
    }
    Ok((problem, RunTrace { records, budget, seed }))
}

/// Re-scores saved traces without re-optimizing.
pub fn rescore_traces(paths: &[PathBuf], cfg: &ExperimentConfig) -> Result<ScoreReport> {
    let mut problems: BTreeMap<usize, Problem> = BTreeMap::new();
    let mut scores = Vec::new();
    for path in paths {
        let (id, trace) = read_trace(path)?;
        if !problems.contains_key(&id) {
            let sub = ExperimentConfig {
                problems: vec![id],
                budget_overrides: cfg.budget_overrides.iter().filter(|(k, _)| **k == id).map(|(k, v)| (*k, *v)).collect(),
                radius_overrides: cfg.radius_overrides.iter().filter(|(k, _)| **k == id).map(|(k, v)| (*k, *v)).collect(),
                ..cfg.clone()
            };
            problems.insert(id, load_problems(&sub)?.remove(0));
        }
        // the trace carries the budget it was produced under
        let problem = problems[&id].clone().with_budget(trace.budget);
        scores.push(score_run(&trace, &problem)?);
    }
    Ok(aggregate(&scores))
}

/// One row of a score table: a problem, or the `avg` summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub problem: String,
    pub runs: usize,
    pub mean: f64,
    pub levels: Vec<f64>,
}

/// A per-scenario table (or the success-rate table, named `SR`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreTable {
    pub scenario: String,
    pub rows: Vec<TableRow>,
}

fn level_value(l: &LevelScores, table: &str) -> f64 {
    match Scenario::parse(table) {
        Some(s) => l.get(s),
        None => l.sr,
    }
}

const TABLE_NAMES: [&str; 4] = ["S1", "S2", "S3", "SR"];

/// The score tables for a report, with a final `avg` row each.
pub fn tables_from_report(report: &ScoreReport) -> Vec<ScoreTable> {
    TABLE_NAMES
        .iter()
        .map(|&name| {
            let mut rows: Vec<TableRow> = report
                .problems
                .iter()
                .map(|p| {
                    let levels: Vec<f64> = p.levels.iter().map(|l| level_value(l, name)).collect();
                    TableRow {
                        problem: p.problem_id.to_string(),
                        runs: p.runs,
                        mean: levels.iter().sum::<f64>() / levels.len() as f64,
                        levels,
                    }
                })
                .collect();
            let k = rows.len().max(1) as f64;
            let avg_levels: Vec<f64> = (0..AccuracyLevel::ALL.len())
                .map(|i| rows.iter().map(|r| r.levels[i]).sum::<f64>() / k)
                .collect();
            let avg = TableRow {
                problem: "avg".into(),
                runs: rows.iter().map(|r| r.runs).sum(),
                mean: rows.iter().map(|r| r.mean).sum::<f64>() / k,
                levels: avg_levels,
            };
            rows.push(avg);
            ScoreTable {
                scenario: name.into(),
                rows,
            }
        })
        .collect()
}

/// Rebuilds a report from its tables.
pub fn report_from_tables(tables: &[ScoreTable]) -> Result<ScoreReport> {
    let find = |name: &str| {
        tables
            .iter()
            .find(|t| t.scenario == name)
            .ok_or_else(|| Error::Config(format!("missing table {name}")))
    };
    let [s1, s2, s3, sr] = [find("S1")?, find("S2")?, find("S3")?, find("SR")?];
    let mut problems = Vec::new();
    for (i, row) in s1.rows.iter().enumerate() {
        if row.problem == "avg" {
            continue;
        }
        let problem_id = row
            .problem
            .parse()
            .map_err(|_| Error::Config(format!("bad problem label {:?}", row.problem)))?;
        let mut levels = [LevelScores::default(); 5];
        for (j, l) in levels.iter_mut().enumerate() {
            *l = LevelScores {
                pr: row.levels[j],
                f1: s2.rows[i].levels[j],
                dyn_f1: s3.rows[i].levels[j],
                sr: sr.rows[i].levels[j],
            };
        }
        problems.push(ProblemScores {
            problem_id,
            runs: row.runs,
            levels,
        });
    }
    Ok(ScoreReport { problems })
}

fn table_file_name(t: &ScoreTable) -> String {
    format!("{}.csv", t.scenario.to_lowercase())
}

/// Writes the score tables into `dir`; returns the written paths.
pub fn emit_tables(report: &ScoreReport, format: OutputFormat, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let tables = tables_from_report(report);
    match format {
        OutputFormat::Json => {
            let path = dir.join("scores.json");
            fs::write(&path, serde_json::to_string_pretty(&tables)?)?;
            Ok(vec![path])
        }
        OutputFormat::Csv => tables
            .iter()
            .map(|t| {
                let path = dir.join(table_file_name(t));
                let mut w = csv::Writer::from_path(&path)?;
                let mut header = vec!["problem".to_string(), "scenario".into(), "runs".into(), "mean".into()];
                header.extend(AccuracyLevel::ALL.iter().map(|a| a.label()));
                w.write_record(&header)?;
                for r in &t.rows {
                    let mut rec = vec![r.problem.clone(), t.scenario.clone(), r.runs.to_string(), r.mean.to_string()];
                    rec.extend(r.levels.iter().map(|v| v.to_string()));
                    w.write_record(&rec)?;
                }
                w.flush()?;
                Ok(path)
            })
            .collect(),
    }
}

/// Parses one CSV score table written by [`emit_tables`].
pub fn read_table_csv(path: &Path) -> Result<ScoreTable> {
    let mut rd = csv::Reader::from_path(path)?;
    let bad = || Error::Config(format!("malformed score table {}", path.display()));
    let mut scenario = String::new();
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        if rec.len() != 4 + AccuracyLevel::ALL.len() {
            return Err(bad());
        }
        scenario = rec[1].to_string();
        let num = |i: usize| rec[i].parse::<f64>().map_err(|_| bad());
        rows.push(TableRow {
            problem: rec[0].to_string(),
            runs: rec[2].parse().map_err(|_| bad())?,
            mean: num(3)?,
            levels: (4..rec.len()).map(num).collect::<Result<_>>()?,
        });
    }
    Ok(ScoreTable { scenario, rows })
}

/// Reads back all tables of a CSV or JSON output directory.
pub fn read_tables(dir: &Path, format: OutputFormat) -> Result<Vec<ScoreTable>> {
    match format {
        OutputFormat::Json => Ok(serde_json::from_str(&fs::read_to_string(dir.join("scores.json"))?)?),
        OutputFormat::Csv => TABLE_NAMES
            .iter()
            .map(|n| read_table_csv(&dir.join(format!("{}.csv", n.to_lowercase()))))
            .collect(),
    }
}
