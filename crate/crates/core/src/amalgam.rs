//! AMaLGaM-Univariate: a Gaussian estimation-of-distribution local search
//! with a diagonal model, adaptive variance scaling (AVS) driven by the
//! standard-deviation ratio (SDR), and anticipated mean shift (AMS).

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::hillvalley::Cluster;
use crate::problems::{Bounds, Evaluator};
use crate::solution::{sort_by_fitness_desc, Solution};

/// Tunable constants of the core search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmalgamParams {
    /// Truncation selection fraction.
    pub tau: f64,
    pub eta_dec: f64,
    pub eta_inc: f64,
    /// Mean-shift step length, in units of the multiplier-scaled shift.
    pub delta_ams: f64,
    /// Fraction of each generation moved along the anticipated mean shift.
    pub alpha_ams: f64,
    pub sdr_threshold: f64,
    /// Stagnation limit is `nis_base + d` generations.
    pub nis_base: usize,
    pub fitness_tol: f64,
    pub param_tol: f64,
    pub c_mult_min: f64,
    pub c_mult_max: f64,
    /// Initial standard deviations are floored at this fraction of the range.
    pub init_std_floor: f64,
    /// Re-estimated standard deviations are floored at this fraction of the range.
    pub std_floor: f64,
}

impl Default for AmalgamParams {
    fn default() -> Self {
        let tau = 0.35;
        Self {
            tau,
            eta_dec: 0.9,
            eta_inc: 1.0 / 0.9,
            delta_ams: 2.0,
            alpha_ams: 0.5 * tau,
            sdr_threshold: 1.0,
            nis_base: 25,
            fitness_tol: 1e-12,
            param_tol: 1e-12,
            c_mult_min: 1e-10,
            c_mult_max: 1e3,
            init_std_floor: 1e-4,
            std_floor: 1e-12,
        }
    }
}

impl AmalgamParams {
    pub fn selection_size(&self, pop_size: usize) -> usize {
        ((self.tau * pop_size as f64).ceil() as usize).clamp(1, pop_size)
    }

    pub fn ams_count(&self, pop_size: usize) -> usize {
        (self.alpha_ams * pop_size as f64).floor() as usize
    }

    pub fn nis_limit(&self, d: usize) -> usize {
        self.nis_base + d
    }
}

/// Base population size for dimension `d`: `ceil(10 sqrt(d))`.
pub fn guideline_pop_size(d: usize) -> usize {
    (10.0 * (d as f64).sqrt()).ceil() as usize
}

/// Why a core search stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    DistributionCollapsed,
    Stagnation,
    FitnessConverged,
    BudgetExhausted,
    /// Stopped early because the search could not reach a known better level.
    Dominated,
}

/// State of one core search. Plain data; movable between threads.
#[derive(Debug, Clone, PartialEq)]
pub struct CoreSearchState {
    pub mean: Vec<f64>,
    pub stddev: Vec<f64>,
    pub c_mult: f64,
    pub pop_size: usize,
    /// Generations without improvement.
    pub nis: usize,
    pub best: Solution,
    pub prev_mean: Vec<f64>,
    pub generation: usize,
    /// Fitness spread (best minus worst) of the last selection.
    pub selection_spread: Option<f64>,
    pub budget_exhausted: bool,
    ranges: Vec<f64>,
    params: AmalgamParams,
}

/// Starts a core search from a cluster: mean and sample standard deviation
/// of the members, the latter floored at `init_std_floor * range`.
pub fn init_core_search(cluster: &Cluster, pop_size: usize, bounds: &Bounds, params: AmalgamParams) -> CoreSearchState {
    let members = cluster.members();
    let d = bounds.dim();
    let n = members.len() as f64;
    let mean: Vec<f64> = (0..d).map(|i| members.iter().map(|m| m.x[i]).sum::<f64>() / n).collect();
    let stddev = (0..d)
        .map(|i| {
            let floor = params.init_std_floor * bounds.range(i);
            if members.len() < 2 {
                return floor;
            }
            let var = members.iter().map(|m| (m.x[i] - mean[i]).powi(2)).sum::<f64>() / (n - 1.0);
            var.sqrt().max(floor)
        })
        .collect();
    CoreSearchState::new(mean, stddev, pop_size, cluster.best().clone(), bounds, params)
}

impl CoreSearchState {
    /// A state with an explicit initial distribution.
    pub fn new(
        mean: Vec<f64>,
        stddev: Vec<f64>,
        pop_size: usize,
        best: Solution,
        bounds: &Bounds,
        params: AmalgamParams,
    ) -> Self {
        assert!(pop_size >= 2, "core search needs a population of at least 2");
        Self {
            prev_mean: mean.clone(),
            mean,
            stddev,
            c_mult: 1.0,
            pop_size,
            nis: 0,
            best,
            generation: 0,
            selection_spread: None,
            budget_exhausted: false,
            ranges: bounds.ranges(),
            params,
        }
    }

    pub fn params(&self) -> &AmalgamParams {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// One generation: sample, shift, evaluate, select, re-estimate, adapt.
    /// On budget exhaustion the distribution is left untouched and
    /// `budget_exhausted` is set.
    pub fn step<R: Rng + ?Sized>(&mut self, ev: &mut Evaluator<'_>, bounds: &Bounds, rng: &mut R) {
        if self.budget_exhausted {
            return;
        }
        let d = self.dim();
        let n = self.pop_size;
        let p = self.params;

        let shift: Vec<f64> = (0..d)
            .map(|i| p.delta_ams * self.c_mult * (self.mean[i] - self.prev_mean[i]))
            .collect();
        let n_ams = p.ams_count(n);
        let mut population = Vec::with_capacity(n);
        for k in 0..n {
            let mut x: Vec<f64> = (0..d)
                .map(|i| {
                    let z: f64 = rng.sample(StandardNormal);
                    self.mean[i] + self.c_mult * self.stddev[i] * z
                })
                .collect();
            if k < n_ams {
                x.iter_mut().zip(&shift).for_each(|(v, s)| *v += s);
            }
            bounds.clamp(&mut x);
            match ev.evaluate_solution(x) {
                Ok(s) => population.push(s),
                Err(_) => {
                    self.budget_exhausted = true;
                    return;
                }
            }
        }

        sort_by_fitness_desc(&mut population);
        let selection = &population[..p.selection_size(n)];
        let m = selection.len() as f64;

        let improvements: Vec<&Solution> = selection.iter().filter(|s| s.f > self.best.f).collect();
        let old_mean = std::mem::take(&mut self.mean);
        let old_std = self.stddev.clone();

        self.mean = (0..d).map(|i| selection.iter().map(|s| s.x[i]).sum::<f64>() / m).collect();
        for i in 0..d {
            let var = selection.iter().map(|s| (s.x[i] - self.mean[i]).powi(2)).sum::<f64>() / m;
            self.stddev[i] = var.sqrt().max(p.std_floor * self.ranges[i]);
        }
        self.prev_mean = old_mean;

        let nis_limit = p.nis_limit(d);
        if !improvements.is_empty() {
            self.nis = 0;
            if self.c_mult < 1.0 {
                self.c_mult = 1.0;
            }
            let k = improvements.len() as f64;
            let sdr = (0..d)
                .map(|i| {
                    let avg = improvements.iter().map(|s| s.x[i]).sum::<f64>() / k;
                    (avg - self.prev_mean[i]).abs() / old_std[i]
                })
                .fold(0.0, f64::max);
            if sdr > p.sdr_threshold {
                self.c_mult *= p.eta_inc;
            }
            self.best = selection[0].clone();
        } else {
            if self.c_mult <= 1.0 {
                self.nis += 1;
            }
            if self.c_mult > 1.0 || self.nis >= nis_limit {
                self.c_mult *= p.eta_dec;
            }
            if self.c_mult < 1.0 && self.nis < nis_limit {
                self.c_mult = 1.0;
            }
        }
        self.c_mult = self.c_mult.clamp(p.c_mult_min, p.c_mult_max);
        self.selection_spread = Some(selection[0].f - selection[selection.len() - 1].f);
        self.generation += 1;
    }

    /// Checks the stopping rules with explicit tolerances.
    pub fn termination(&self, fitness_tol: f64, param_tol: f64) -> Option<Termination> {
        if self.budget_exhausted {
            return Some(Termination::BudgetExhausted);
        }
        let collapsed = self
            .stddev
            .iter()
            .zip(&self.ranges)
            .all(|(s, r)| self.c_mult * s < param_tol * r);
        if collapsed {
            return Some(Termination::DistributionCollapsed);
        }
        if self.nis > self.params.nis_limit(self.dim()) {
            return Some(Termination::Stagnation);
        }
        match self.selection_spread {
            Some(spread) if spread < fitness_tol => Some(Termination::FitnessConverged),
            _ => None,
        }
    }

    pub fn is_terminated(&self) -> bool {
        self.termination(self.params.fitness_tol, self.params.param_tol).is_some()
    }

    /// Steps until a stopping rule fires; returns the rule.
    pub fn run_to_termination<R: Rng + ?Sized>(
        &mut self,
        ev: &mut Evaluator<'_>,
        bounds: &Bounds,
        rng: &mut R,
    ) -> Termination {
        loop {
            self.step(ev, bounds, rng);
            if let Some(t) = self.termination(self.params.fitness_tol, self.params.param_tol) {
                return t;
            }
        }
    }
}

/// `core_search_terminated` in free-function form.
pub fn core_search_terminated(state: &CoreSearchState, fitness_tol: f64, param_tol: f64) -> bool {
    state.termination(fitness_tol, param_tol).is_some()
}
