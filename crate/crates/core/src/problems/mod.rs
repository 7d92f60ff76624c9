//! The 20 benchmark problems of the CEC2013 niching suite and the budgeted
//! evaluator through which every fitness evaluation passes.

pub mod composition;
pub mod data;
pub mod functions;

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, EvalError, Result};
use crate::solution::Solution;
use composition::{CompositionFunction, CompositionKind};

/// Axis-aligned box `[lower_i, upper_i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() {
            return Err(Error::InvalidBounds("dimension must be at least 1".into()));
        }
        if lower.len() != upper.len() {
            return Err(Error::InvalidBounds(format!(
                "{} lower vs {} upper values",
                lower.len(),
                upper.len()
            )));
        }
        if let Some(i) = (0..lower.len()).find(|&i| !(lower[i] < upper[i])) {
            return Err(Error::InvalidBounds(format!(
                "lower[{i}] = {} is not below upper[{i}] = {}",
                lower[i], upper[i]
            )));
        }
        Ok(Self { lower, upper })
    }

    /// The cube `[lower, upper]^d`.
    pub fn cube(d: usize, lower: f64, upper: f64) -> Result<Self> {
        Self::new(vec![lower; d], vec![upper; d])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn range(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }

    pub fn ranges(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.range(i)).collect()
    }

    /// `ln` of the box volume; the volume itself overflows nothing in the
    /// suite but the log form keeps edge-length computations well scaled.
    pub fn ln_volume(&self) -> f64 {
        (0..self.dim()).map(|i| self.range(i).ln()).sum()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, hi))| *v >= *lo && *v <= *hi)
    }

    pub fn clamp(&self, x: &mut [f64]) {
        for (v, (lo, hi)) in x.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *v = v.clamp(*lo, *hi);
        }
    }

    pub fn diagonal(&self) -> f64 {
        (0..self.dim()).map(|i| self.range(i).powi(2)).sum::<f64>().sqrt()
    }
}

/// A known global optimum; used for scoring only, never by the optimizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalOptimum {
    pub x: Vec<f64>,
    pub f: f64,
}

type Callback = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Objective {
    FiveUnevenPeakTrap,
    EqualMaxima,
    UnevenDecreasingMaxima,
    Himmelblau,
    SixHumpCamelBack,
    Shubert,
    Vincent,
    ModifiedRastrigin,
    Composition(Arc<CompositionFunction>),
    Custom(Callback),
}

impl Objective {
    fn eval(&self, x: &[f64]) -> f64 {
        use functions::*;
        match self {
            Objective::FiveUnevenPeakTrap => five_uneven_peak_trap(x),
            Objective::EqualMaxima => equal_maxima(x),
            Objective::UnevenDecreasingMaxima => uneven_decreasing_maxima(x),
            Objective::Himmelblau => himmelblau(x),
            Objective::SixHumpCamelBack => six_hump_camel_back(x),
            Objective::Shubert => shubert(x),
            Objective::Vincent => vincent(x),
            Objective::ModifiedRastrigin => modified_rastrigin(x),
            Objective::Composition(cf) => cf.eval(x),
            Objective::Custom(f) => f(x),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum TableObjective {
    FiveUnevenPeakTrap,
    EqualMaxima,
    UnevenDecreasingMaxima,
    Himmelblau,
    SixHumpCamelBack,
    Shubert,
    Vincent,
    ModifiedRastrigin,
    Composition(CompositionKind),
}

/// One row of the suite table.
#[derive(Debug, Clone, Copy)]
pub struct TableEntry {
    pub id: usize,
    pub name: &'static str,
    pub dim: usize,
    pub n_global_optima: usize,
    pub budget: u64,
    /// Default niche radius used when matching solutions to optima.
    pub niche_radius: f64,
    pub(crate) objective: TableObjective,
}

macro_rules! entry {
    ($id:expr, $name:expr, $d:expr, $g:expr, $b:expr, $r:expr, $obj:expr) => {
        TableEntry {
            id: $id,
            name: $name,
            dim: $d,
            n_global_optima: $g,
            budget: $b,
            niche_radius: $r,
            objective: $obj,
        }
    };
}

use CompositionKind::{Cf1, Cf2, Cf3, Cf4};
use TableObjective as T;

/// The suite: id, name, dimension, number of global optima, budget, radius.
pub const TABLE: [TableEntry; 20] = [
    entry!(1, "Five-Uneven-Peak Trap", 1, 2, 50_000, 0.01, T::FiveUnevenPeakTrap),
    entry!(2, "Equal Maxima", 1, 5, 50_000, 0.01, T::EqualMaxima),
    entry!(3, "Uneven Decreasing Maxima", 1, 1, 50_000, 0.01, T::UnevenDecreasingMaxima),
    entry!(4, "Himmelblau", 2, 4, 50_000, 0.01, T::Himmelblau),
    entry!(5, "Six-Hump Camel Back", 2, 2, 50_000, 0.5, T::SixHumpCamelBack),
    entry!(6, "Shubert", 2, 18, 200_000, 0.5, T::Shubert),
    entry!(7, "Vincent", 2, 36, 200_000, 0.2, T::Vincent),
    entry!(8, "Shubert", 3, 81, 400_000, 0.5, T::Shubert),
    entry!(9, "Vincent", 3, 216, 400_000, 0.2, T::Vincent),
    entry!(10, "Modified Rastrigin", 2, 12, 200_000, 0.01, T::ModifiedRastrigin),
    entry!(11, "Composition Function 1", 2, 6, 200_000, 0.01, T::Composition(Cf1)),
    entry!(12, "Composition Function 2", 2, 8, 200_000, 0.01, T::Composition(Cf2)),
    entry!(13, "Composition Function 3", 2, 6, 200_000, 0.01, T::Composition(Cf3)),
    entry!(14, "Composition Function 3", 3, 6, 400_000, 0.01, T::Composition(Cf3)),
    entry!(15, "Composition Function 4", 3, 8, 400_000, 0.01, T::Composition(Cf4)),
    entry!(16, "Composition Function 3", 5, 6, 400_000, 0.01, T::Composition(Cf3)),
    entry!(17, "Composition Function 4", 5, 8, 400_000, 0.01, T::Composition(Cf4)),
    entry!(18, "Composition Function 3", 10, 6, 400_000, 0.01, T::Composition(Cf3)),
    entry!(19, "Composition Function 4", 10, 8, 400_000, 0.01, T::Composition(Cf4)),
    entry!(20, "Composition Function 4", 20, 8, 400_000, 0.01, T::Composition(Cf4)),
];

pub fn table_entry(id: usize) -> Result<&'static TableEntry> {
    if (1..=20).contains(&id) {
        Ok(&TABLE[id - 1])
    } else {
        Err(Error::InvalidProblem(id))
    }
}

/// Whether problem `id` needs composition data files.
pub fn needs_data(id: usize) -> bool {
    id >= 11
}

/// One benchmark instance. Immutable; share it freely between runs.
#[derive(Clone)]
pub struct Problem {
    id: usize,
    name: String,
    bounds: Bounds,
    budget: u64,
    optima: Vec<GlobalOptimum>,
    niche_radius: f64,
    objective: Objective,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("id", &self.id)
            .field("name", &self.name)
            .field("dim", &self.dim())
            .field("budget", &self.budget)
            .field("n_global_optima", &self.optima.len())
            .field("niche_radius", &self.niche_radius)
            .finish()
    }
}

/// Builds suite problem `id`. Problems 11..=20 read
/// `composition_XX.txt` from `data_dir`.
pub fn make_problem(id: usize, data_dir: Option<&Path>) -> Result<Problem> {
    let entry = table_entry(id)?;
    let d = entry.dim;
    let (objective, bounds, positions) = match entry.objective {
        T::FiveUnevenPeakTrap => (
            Objective::FiveUnevenPeakTrap,
            Bounds::cube(1, 0.0, 30.0)?,
            functions::five_uneven_peak_trap_optima(),
        ),
        T::EqualMaxima => (
            Objective::EqualMaxima,
            Bounds::cube(1, 0.0, 1.0)?,
            functions::equal_maxima_optima(),
        ),
        T::UnevenDecreasingMaxima => (
            Objective::UnevenDecreasingMaxima,
            Bounds::cube(1, 0.0, 1.0)?,
            functions::uneven_decreasing_maxima_optima(),
        ),
        T::Himmelblau => (
            Objective::Himmelblau,
            Bounds::cube(2, -6.0, 6.0)?,
            functions::himmelblau_optima(),
        ),
        T::SixHumpCamelBack => (
            Objective::SixHumpCamelBack,
            Bounds::new(vec![-1.9, -1.1], vec![1.9, 1.1])?,
            functions::six_hump_camel_back_optima(),
        ),
        T::Shubert => (
            Objective::Shubert,
            Bounds::cube(d, -10.0, 10.0)?,
            functions::shubert_optima(d),
        ),
        T::Vincent => (
            Objective::Vincent,
            Bounds::cube(d, 0.25, 10.0)?,
            functions::vincent_optima(d),
        ),
        T::ModifiedRastrigin => (
            Objective::ModifiedRastrigin,
            Bounds::cube(d, 0.0, 1.0)?,
            functions::modified_rastrigin_optima(d),
        ),
        T::Composition(kind) => {
            let name = data::composition_file_name(id);
            let path = match data_dir {
                Some(dir) => dir.join(&name),
                None => return Err(Error::MissingData(name.into())),
            };
            let cf = data::read_composition(&path, kind, d)?;
            let positions: Vec<Vec<f64>> = cf.shifts().map(<[f64]>::to_vec).collect();
            (
                Objective::Composition(Arc::new(cf)),
                Bounds::cube(d, -5.0, 5.0)?,
                positions,
            )
        }
    };
    let optima = positions
        .into_iter()
        .map(|x| {
            let f = objective.eval(&x);
            GlobalOptimum { x, f }
        })
        .collect::<Vec<_>>();
    debug_assert_eq!(optima.len(), entry.n_global_optima);
    if let Some(o) = optima.iter().find(|o| !bounds.contains(&o.x)) {
        return Err(Error::InvalidBounds(format!("optimum {:?} lies outside the domain", o.x)));
    }
    Ok(Problem {
        id,
        name: entry.name.to_string(),
        bounds,
        budget: entry.budget,
        optima,
        niche_radius: entry.niche_radius,
        objective,
    })
}

impl Problem {
    /// A user-supplied objective, mainly for tests. `id` is 0.
    pub fn custom<F>(
        name: impl Into<String>,
        bounds: Bounds,
        budget: u64,
        optima: Vec<GlobalOptimum>,
        niche_radius: f64,
        f: F,
    ) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self {
            id: 0,
            name: name.into(),
            bounds,
            budget,
            optima,
            niche_radius,
            objective: Objective::Custom(Arc::new(f)),
        }
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.bounds.dim()
    }

    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    pub fn n_global_optima(&self) -> usize {
        self.optima.len()
    }

    pub fn optima(&self) -> &[GlobalOptimum] {
        &self.optima
    }

    pub fn niche_radius(&self) -> f64 {
        self.niche_radius
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    pub fn with_niche_radius(mut self, radius: f64) -> Self {
        self.niche_radius = radius;
        self
    }

    /// Replaces the scoring optima, e.g. with rows from an optima database file.
    pub fn with_optima(mut self, optima: Vec<GlobalOptimum>) -> Result<Self> {
        if optima.is_empty() {
            return Err(Error::NoGlobalOptima);
        }
        if let Some(o) = optima.iter().find(|o| o.x.len() != self.dim() || !self.bounds.contains(&o.x)) {
            return Err(Error::InvalidBounds(format!("optimum {:?} does not fit the domain", o.x)));
        }
        self.optima = optima;
        Ok(self)
    }

    /// The raw objective value, outside any budget. Optimizers must go
    /// through an [`Evaluator`]; this is for scoring, plotting and tests.
    pub fn objective(&self, x: &[f64]) -> f64 {
        self.objective.eval(x)
    }
}

/// The single gateway for budgeted fitness evaluations within a run.
#[derive(Debug)]
pub struct Evaluator<'p> {
    problem: &'p Problem,
    evals_used: u64,
    best_seen: Option<Solution>,
}

impl<'p> Evaluator<'p> {
    pub fn new(problem: &'p Problem) -> Self {
        Self {
            problem,
            evals_used: 0,
            best_seen: None,
        }
    }

    pub fn problem(&self) -> &'p Problem {
        self.problem
    }

    pub fn evals_used(&self) -> u64 {
        self.evals_used
    }

    pub fn remaining_budget(&self) -> u64 {
        self.problem.budget - self.evals_used
    }

    pub fn is_exhausted(&self) -> bool {
        self.evals_used >= self.problem.budget
    }

    pub fn best_seen(&self) -> Option<&Solution> {
        self.best_seen.as_ref()
    }

    /// Evaluates `x`, consuming one unit of budget.
    pub fn evaluate(&mut self, x: &[f64]) -> Result<f64, EvalError> {
        self.evaluate_solution(x.to_vec()).map(|s| s.f)
    }

    /// Like [`Evaluator::evaluate`], returning the timestamped solution.
    pub fn evaluate_solution(&mut self, x: Vec<f64>) -> Result<Solution, EvalError> {
        let bounds = &self.problem.bounds;
        if x.len() != bounds.dim() {
            return Err(EvalError::Dimension {
                expected: bounds.dim(),
                got: x.len(),
            });
        }
        for (i, &v) in x.iter().enumerate() {
            let (lower, upper) = (bounds.lower[i], bounds.upper[i]);
            if !(v >= lower && v <= upper) {
                return Err(EvalError::OutOfBounds {
                    index: i,
                    value: v,
                    lower,
                    upper,
                });
            }
        }
        if self.is_exhausted() {
            return Err(EvalError::BudgetExhausted);
        }
        let f = self.problem.objective(&x);
        self.evals_used += 1;
        let sol = Solution::new(x, f, self.evals_used);
        if self.best_seen.as_ref().is_none_or(|b| f > b.f) {
            self.best_seen = Some(sol.clone());
        }
        Ok(sol)
    }
}
