//! Browser bindings for the demo page. Every export returns a JSON string so
//! the page needs no generated type glue beyond `wasm-bindgen`'s.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use wasm_bindgen::prelude::*;

use hillvallea::hillvalley::hill_valley_clustering;
use hillvallea::sampling::sample_uniform;
use hillvallea::scoring::{count_distinct_global, score_run};
use hillvallea::solution::sort_by_fitness_desc;
use hillvallea::{make_problem, run, AccuracyLevel, Evaluator, Problem, RunConfig};

/// Problems that need no data files and have one or two dimensions.
pub const DEMO_PROBLEMS: [usize; 7] = [1, 2, 3, 4, 5, 6, 10];

#[derive(Debug, Serialize)]
pub struct Landscape {
    pub problem: usize,
    pub name: String,
    pub dim: usize,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Samples per axis.
    pub resolution: usize,
    /// Row-major, `resolution` values for 1-D and `resolution²` for 2-D.
    pub values: Vec<f64>,
    pub optima: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize)]
pub struct ClusterPoint {
    pub x: Vec<f64>,
    pub f: f64,
    pub cluster: usize,
}

#[derive(Debug, Serialize)]
pub struct ClusterView {
    pub points: Vec<ClusterPoint>,
    pub clusters: usize,
    pub evaluations: u64,
}

#[derive(Debug, Serialize)]
pub struct Elite {
    pub x: Vec<f64>,
    pub f: f64,
    pub feval: u64,
}

#[derive(Debug, Serialize)]
pub struct OptimizeView {
    pub elites: Vec<Elite>,
    pub evals: u64,
    pub restarts: usize,
    pub budget: u64,
    pub n_global: usize,
    /// Global optima found at each accuracy level, 1e-1 first.
    pub found: Vec<usize>,
    pub peak_ratio: Vec<f64>,
    pub dyn_f1: Vec<f64>,
}

#[derive(Debug, Serialize)]
struct Failure {
    error: String,
}

fn demo_problem(id: usize) -> Result<Problem, String> {
    if !DEMO_PROBLEMS.contains(&id) {
        return Err(format!("problem {id} is not available in the demo"));
    }
    make_problem(id, None).map_err(|e| e.to_string())
}

pub fn landscape_view(id: usize, resolution: usize) -> Result<Landscape, String> {
    let p = demo_problem(id)?;
    let res = resolution.clamp(2, 400);
    let b = p.bounds();
    let at = |i: usize, k: usize| b.lower()[i] + b.range(i) * k as f64 / (res - 1) as f64;
    let values = match p.dim() {
        1 => (0..res).map(|k| p.objective(&[at(0, k)])).collect(),
        _ => {
            let mut v = Vec::with_capacity(res * res);
            for row in 0..res {
                for col in 0..res {
                    v.push(p.objective(&[at(0, col), at(1, row)]));
                }
            }
            v
        }
    };
    Ok(Landscape {
        problem: id,
        name: p.name().to_string(),
        dim: p.dim(),
        lower: b.lower().to_vec(),
        upper: b.upper().to_vec(),
        resolution: res,
        values,
        optima: p.optima().iter().map(|o| o.x.clone()).collect(),
    })
}

/// Samples `n` uniform points, keeps the fitter half and clusters it.
pub fn cluster_view(id: usize, n: usize, seed: u64) -> Result<ClusterView, String> {
    let p = demo_problem(id)?;
    let n = n.clamp(4, 5000);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ev = Evaluator::new(&p);
    let mut population = Vec::with_capacity(n);
    for x in sample_uniform(n, p.bounds(), &mut rng) {
        population.push(ev.evaluate_solution(x).map_err(|e| e.to_string())?);
    }
    sort_by_fitness_desc(&mut population);
    population.truncate(n.div_ceil(2));
    let c = hill_valley_clustering(&population, &mut ev, p.bounds());
    let points = population
        .into_iter()
        .zip(&c.labels)
        .map(|(s, &cluster)| ClusterPoint { x: s.x, f: s.f, cluster })
        .collect();
    Ok(ClusterView {
        points,
        clusters: c.clusters.len(),
        evaluations: c.evaluations,
    })
}

pub fn optimize_view(id: usize, budget: u64, seed: u64) -> Result<OptimizeView, String> {
    let p = demo_problem(id)?;
    let full = p.budget();
    let p = p.with_budget(budget.clamp(1, full));
    let outcome = run(&p, &RunConfig::default(), seed);
    let scores = score_run(&outcome.trace, &p).map_err(|e| e.to_string())?;
    let solutions = outcome.trace.solutions();
    Ok(OptimizeView {
        elites: outcome
            .trace
            .records
            .iter()
            .map(|r| Elite { x: r.x.clone(), f: r.fitness, feval: r.feval })
            .collect(),
        evals: outcome.evals_used,
        restarts: outcome.restarts.len(),
        budget: p.budget(),
        n_global: p.n_global_optima(),
        found: AccuracyLevel::ALL
            .iter()
            .map(|&eps| count_distinct_global(&solutions, &p, eps))
            .collect(),
        peak_ratio: scores.levels.iter().map(|l| l.pr).collect(),
        dyn_f1: scores.levels.iter().map(|l| l.dyn_f1).collect(),
    })
}

fn to_json<T: Serialize>(r: Result<T, String>) -> String {
    let out = match r {
        Ok(v) => serde_json::to_string(&v),
        Err(error) => serde_json::to_string(&Failure { error }),
    };
    out.unwrap_or_else(|e| format!("{{\"error\":\"{e}\"}}"))
}

/// Objective values on a regular grid over the problem's domain.
#[wasm_bindgen]
pub fn landscape(problem: usize, resolution: usize) -> String {
    to_json(landscape_view(problem, resolution))
}

/// Hill-valley clustering of the fitter half of a uniform sample.
#[wasm_bindgen]
pub fn cluster_population(problem: usize, n: usize, seed: u32) -> String {
    to_json(cluster_view(problem, n, seed as u64))
}

/// One full optimizer run with a reduced budget.
#[wasm_bindgen]
pub fn optimize(problem: usize, budget: u32, seed: u32) -> String {
    to_json(optimize_view(problem, budget as u64, seed as u64))
}

#[wasm_bindgen]
pub fn demo_problems() -> String {
    let list: Vec<(usize, String, usize)> = DEMO_PROBLEMS
        .iter()
        .filter_map(|&id| demo_problem(id).ok().map(|p| (id, p.name().to_string(), p.dim())))
        .collect();
    serde_json::to_string(&list).unwrap_or_default()
}
