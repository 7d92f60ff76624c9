//! Competition measures: distinct global optima at five accuracy levels,
//! peak ratio, success rate, static F1 and dynamic F1.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::orchestrator::RunTrace;
use crate::problems::Problem;
use crate::solution::{distance, Solution};

/// A fitness tolerance from `{1e-1, 1e-2, 1e-3, 1e-4, 1e-5}`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct AccuracyLevel(f64);

impl AccuracyLevel {
    pub const ALL: [AccuracyLevel; 5] = [
        AccuracyLevel(1e-1),
        AccuracyLevel(1e-2),
        AccuracyLevel(1e-3),
        AccuracyLevel(1e-4),
        AccuracyLevel(1e-5),
    ];

    pub fn new(epsilon: f64) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|a| a.0 == epsilon)
            .ok_or(Error::InvalidAccuracy(epsilon))
    }

    pub fn epsilon(self) -> f64 {
        self.0
    }

    /// Column label, e.g. `1e-3`.
    pub fn label(self) -> String {
        format!("{:e}", self.0)
    }
}

/// Number of distinct global optima covered by `solutions`.
///
/// Solutions are visited best first; each claims the nearest unclaimed
/// optimum whose fitness is within `eps` and whose position is within the
/// niche radius.
pub fn count_distinct_global(solutions: &[Solution], problem: &Problem, eps: AccuracyLevel) -> usize {
    let mut order: Vec<&Solution> = solutions.iter().collect();
    order.sort_by(|a, b| b.f.total_cmp(&a.f));
    let optima = problem.optima();
    let radius = problem.niche_radius();
    let mut claimed = vec![false; optima.len()];
    let mut g = 0;
    for s in order {
        let mut pick: Option<(usize, f64)> = None;
        for (i, o) in optima.iter().enumerate() {
            if claimed[i] || (o.f - s.f).abs() > eps.0 {
                continue;
            }
            let d = distance(&s.x, &o.x);
            if d <= radius && pick.is_none_or(|(_, best)| d < best) {
                pick = Some((i, d));
            }
        }
        if let Some((i, _)) = pick {
            claimed[i] = true;
            g += 1;
        }
    }
    g
}

/// `g / G_p`.
pub fn peak_ratio(g: usize, n_global: usize) -> Result<f64> {
    if n_global == 0 {
        return Err(Error::NoGlobalOptima);
    }
    Ok(g as f64 / n_global as f64)
}

/// `g / |O|`, zero for an empty set.
pub fn success_rate(g: usize, n_solutions: usize) -> f64 {
    if n_solutions == 0 {
        0.0
    } else {
        g as f64 / n_solutions as f64
    }
}

/// Harmonic mean of peak ratio and success rate, zero when both are zero.
pub fn f1(pr: f64, sr: f64) -> f64 {
    if pr + sr == 0.0 {
        0.0
    } else {
        2.0 * pr * sr / (pr + sr)
    }
}

fn f1_of(solutions: &[Solution], problem: &Problem, eps: AccuracyLevel) -> Result<f64> {
    let g = count_distinct_global(solutions, problem, eps);
    Ok(f1(peak_ratio(g, problem.n_global_optima())?, success_rate(g, solutions.len())))
}

/// Area under the F1-over-evaluations curve, normalized by the budget:
///
/// `((B - f_n) / B) F1(O) + sum_{i=2..n} ((f_i - f_{i-1}) / B) F1(O[1..i-1])`
///
/// The interval before the first acceptance contributes nothing.
pub fn dyn_f1(trace: &RunTrace, problem: &Problem, eps: AccuracyLevel) -> Result<f64> {
    let records = &trace.records;
    if records.is_empty() {
        return Ok(0.0);
    }
    if let Some(w) = records.windows(2).find(|w| w[1].feval < w[0].feval) {
        return Err(Error::InvalidTrace(format!(
            "records out of order: feval {} follows {}",
            w[1].feval, w[0].feval
        )));
    }
    let budget = trace.budget as f64;
    if budget <= 0.0 {
        return Err(Error::InvalidTrace("budget must be positive".into()));
    }
    let last = records[records.len() - 1].feval as f64;
    if last > budget {
        return Err(Error::InvalidTrace(format!("feval {last} exceeds the budget {budget}")));
    }
    let solutions = trace.solutions();
    let prefix_f1 = (1..=solutions.len())
        .map(|t| f1_of(&solutions[..t], problem, eps))
        .collect::<Result<Vec<f64>>>()?;
    let fevals: Vec<u64> = records.iter().map(|r| r.feval).collect();
    Ok(dyn_f1_from_prefixes(&fevals, &prefix_f1, trace.budget))
}

/// The dynamic-F1 sum given acceptance times (ascending) and the F1 of each
/// prefix: `prefix_f1[t]` is the F1 of the first `t + 1` solutions.
pub fn dyn_f1_from_prefixes(fevals: &[u64], prefix_f1: &[f64], budget: u64) -> f64 {
    assert_eq!(fevals.len(), prefix_f1.len());
    let n = fevals.len();
    if n == 0 {
        return 0.0;
    }
    let b = budget as f64;
    let mut total = (b - fevals[n - 1] as f64) / b * prefix_f1[n - 1];
    for i in 1..n {
        total += (fevals[i] - fevals[i - 1]) as f64 / b * prefix_f1[i - 1];
    }
    total
}

/// PR, SR, F1 and dynamic F1 at one accuracy level.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LevelScores {
    pub pr: f64,
    pub sr: f64,
    pub f1: f64,
    pub dyn_f1: f64,
}

impl LevelScores {
    pub fn get(&self, scenario: Scenario) -> f64 {
        match scenario {
            Scenario::S1 => self.pr,
            Scenario::S2 => self.f1,
            Scenario::S3 => self.dyn_f1,
        }
    }
}

/// The three scoring scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Scenario {
    /// Peak ratio.
    S1,
    /// Static F1.
    S2,
    /// Dynamic F1.
    S3,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [Scenario::S1, Scenario::S2, Scenario::S3];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::S1 => "S1",
            Scenario::S2 => "S2",
            Scenario::S3 => "S3",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|sc| sc.name() == s)
    }
}

/// Scores of one run at every accuracy level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunScores {
    pub problem_id: usize,
    pub seed: u64,
    pub levels: [LevelScores; 5],
}

/// Scores a finished run from its trace.
pub fn score_run(trace: &RunTrace, problem: &Problem) -> Result<RunScores> {
    let solutions = trace.solutions();
    let mut levels = [LevelScores::default(); 5];
    for (slot, eps) in levels.iter_mut().zip(AccuracyLevel::ALL) {
        let g = count_distinct_global(&solutions, problem, eps);
        let pr = peak_ratio(g, problem.n_global_optima())?;
        let sr = success_rate(g, solutions.len());
        *slot = LevelScores {
            pr,
            sr,
            f1: f1(pr, sr),
            dyn_f1: dyn_f1(trace, problem, eps)?,
        };
    }
    Ok(RunScores {
        problem_id: problem.id(),
        seed: trace.seed,
        levels,
    })
}

/// Mean scores of one problem over its runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemScores {
    pub problem_id: usize,
    pub runs: usize,
    pub levels: [LevelScores; 5],
}

impl ProblemScores {
    /// The scenario score: mean over the five accuracy levels.
    pub fn mean(&self, scenario: Scenario) -> f64 {
        self.levels.iter().map(|l| l.get(scenario)).sum::<f64>() / self.levels.len() as f64
    }

    pub fn mean_sr(&self) -> f64 {
        self.levels.iter().map(|l| l.sr).sum::<f64>() / self.levels.len() as f64
    }
}

/// Per-problem means and grand averages.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ScoreReport {
    pub problems: Vec<ProblemScores>,
}

impl ScoreReport {
    /// Mean of the per-problem scenario scores.
    pub fn average(&self, scenario: Scenario) -> f64 {
        if self.problems.is_empty() {
            return 0.0;
        }
        self.problems.iter().map(|p| p.mean(scenario)).sum::<f64>() / self.problems.len() as f64
    }

    pub fn problem(&self, id: usize) -> Option<&ProblemScores> {
        self.problems.iter().find(|p| p.problem_id == id)
    }
}

/// Averages run scores per problem (sorted by id).
pub fn aggregate(runs: &[RunScores]) -> ScoreReport {
    let mut by_problem: BTreeMap<usize, Vec<&RunScores>> = BTreeMap::new();
    for r in runs {
        by_problem.entry(r.problem_id).or_default().push(r);
    }
    let problems = by_problem
        .into_iter()
        .map(|(problem_id, rs)| {
            let k = rs.len() as f64;
            let mut levels = [LevelScores::default(); 5];
            for (i, slot) in levels.iter_mut().enumerate() {
                slot.pr = rs.iter().map(|r| r.levels[i].pr).sum::<f64>() / k;
                slot.sr = rs.iter().map(|r| r.levels[i].sr).sum::<f64>() / k;
                slot.f1 = rs.iter().map(|r| r.levels[i].f1).sum::<f64>() / k;
                slot.dyn_f1 = rs.iter().map(|r| r.levels[i].dyn_f1).sum::<f64>() / k;
            }
            ProblemScores {
                problem_id,
                runs: rs.len(),
                levels,
            }
        })
        .collect();
    ScoreReport { problems }
}
