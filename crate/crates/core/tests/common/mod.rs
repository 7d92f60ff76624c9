//! Independent reference implementations shared by the property suites and
//! the acceptance runner. None of these call into the code they check.

#![allow(dead_code)]

use std::f64::consts::PI;

use hillvallea::hillvalley::hill_valley_test;
use hillvallea::orchestrator::TraceRecord;
use hillvallea::{Bounds, Evaluator, Problem, RunTrace, Solution};
use rand::Rng;

/// Fixed 1-D landscapes on [0, 1] used for the hill-valley oracle.
pub fn landscapes() -> Vec<(&'static str, fn(f64) -> f64)> {
    vec![
        ("sine6", |x| (5.0 * PI * x).sin().powi(6)),
        ("decreasing", |x| {
            (-2.0 * 2f64.ln() * ((x - 0.08) / 0.854).powi(2)).exp() * (5.0 * PI * (x.powf(0.75) - 0.05)).sin().powi(6)
        }),
        ("two_scales", |x| (3.0 * PI * x).cos() + 0.3 * (17.0 * PI * x).cos()),
        ("gaussians", |x| {
            let g = |m: f64, s: f64| (-((x - m) / s).powi(2)).exp();
            g(0.2, 0.05) + 0.8 * g(0.45, 0.1) + g(0.8, 0.03)
        }),
        ("ramp", |x| x + 0.1 * (30.0 * x).sin()),
    ]
}

pub fn unit_problem(f: fn(f64) -> f64) -> Problem {
    Problem::custom("oracle", Bounds::cube(1, 0.0, 1.0).unwrap(), u64::MAX, vec![], 0.01, move |x| f(x[0]))
}

/// True when `points` equally spaced points strictly between `a` and `b` never
/// drop below the worse endpoint.
pub fn grid_same_niche(f: fn(f64) -> f64, a: f64, b: f64, points: usize) -> bool {
    let worst = f(a).min(f(b));
    (1..=points).all(|k| {
        let t = k as f64 / (points + 1) as f64;
        f(a + t * (b - a)) >= worst
    })
}

/// Outcome of comparing the n_t-point test with the dense-grid oracle.
#[derive(Debug, Clone, Copy, Default)]
pub struct Agreement {
    pub pairs: usize,
    pub agree: usize,
    /// Test said "same niche" where the grid found a valley.
    pub missed_valleys: usize,
    /// Test found a valley the grid did not.
    pub false_valleys: usize,
}

impl Agreement {
    pub fn rate(&self) -> f64 {
        self.agree as f64 / self.pairs as f64
    }
}

pub fn hill_valley_agreement<R: Rng>(f: fn(f64) -> f64, pairs: usize, n_t: usize, rng: &mut R) -> Agreement {
    let p = unit_problem(f);
    let mut ev = Evaluator::new(&p);
    let mut out = Agreement {
        pairs,
        ..Agreement::default()
    };
    for _ in 0..pairs {
        let a: f64 = rng.random();
        let b: f64 = rng.random();
        let sa = Solution::new(vec![a], f(a), 0);
        let sb = Solution::new(vec![b], f(b), 0);
        let verdict = hill_valley_test(&mut ev, &sa, &sb, n_t).unwrap();
        match (verdict, grid_same_niche(f, a, b, 10_000)) {
            (v, g) if v == g => out.agree += 1,
            (true, false) => out.missed_valleys += 1,
            _ => out.false_valleys += 1,
        }
    }
    out
}

fn min_pairwise(points: &[&[f64]]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let d = points[i].iter().zip(points[j]).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
            best = best.min(d);
        }
    }
    best
}

/// Largest achievable minimum pairwise distance over all `k`-subsets.
pub fn brute_force_dispersion(c: &[Vec<f64>], k: usize) -> f64 {
    let n = c.len();
    let mut best = f64::NEG_INFINITY;
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let pts: Vec<&[f64]> = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| c[i].as_slice()).collect();
        best = best.max(min_pairwise(&pts));
    }
    best
}

pub fn subset_dispersion(c: &[Vec<f64>], picks: &[usize]) -> f64 {
    let pts: Vec<&[f64]> = picks.iter().map(|&i| c[i].as_slice()).collect();
    min_pairwise(&pts)
}

/// Distinct global optima by greedy fitness-descending matching.
pub fn matched_optima(solutions: &[(Vec<f64>, f64)], optima: &[(Vec<f64>, f64)], eps: f64, radius: f64) -> usize {
    let mut order: Vec<usize> = (0..solutions.len()).collect();
    order.sort_by(|&a, &b| solutions[b].1.partial_cmp(&solutions[a].1).unwrap());
    let mut claimed = vec![false; optima.len()];
    for i in order {
        let (x, f) = &solutions[i];
        for (j, (o, fo)) in optima.iter().enumerate() {
            let d = x.iter().zip(o).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
            if !claimed[j] && (fo - f).abs() <= eps && d <= radius {
                claimed[j] = true;
                break;
            }
        }
    }
    claimed.iter().filter(|&&c| c).count()
}

pub fn f1_oracle(g: usize, n_global: usize, n_solutions: usize) -> f64 {
    if n_solutions == 0 || g == 0 {
        return 0.0;
    }
    let pr = g as f64 / n_global as f64;
    let sr = g as f64 / n_solutions as f64;
    2.0 * pr * sr / (pr + sr)
}

/// Integrates the step function "F1 of everything accepted so far" over
/// evaluation counts 0..budget, one unit at a time.
pub fn integrate_f1(fevals: &[u64], prefix_f1: &[f64], budget: u64) -> f64 {
    let mut total = 0.0;
    let mut accepted = 0;
    for t in 0..budget {
        while accepted < fevals.len() && fevals[accepted] <= t {
            accepted += 1;
        }
        if accepted > 0 {
            total += prefix_f1[accepted - 1];
        }
    }
    total / budget as f64
}

/// A random trace on problem 2: points on or near the peaks, plus strays.
pub fn random_trace<R: Rng>(p: &Problem, rng: &mut R) -> RunTrace {
    let budget = rng.random_range(50..3_000u64);
    let n = rng.random_range(0..12usize).min(budget as usize);
    let mut fevals: Vec<u64> = (0..n).map(|_| rng.random_range(1..=budget)).collect();
    fevals.sort();
    fevals.dedup();
    let records = fevals
        .into_iter()
        .map(|feval| {
            let x = match rng.random_range(0..3) {
                0 => 0.1 + 0.2 * rng.random_range(0..5) as f64,
                1 => 0.1 + 0.2 * rng.random_range(0..5) as f64 + rng.random_range(-0.004..0.004),
                _ => rng.random_range(0.0..1.0),
            };
            TraceRecord {
                feval,
                fitness: p.objective(&[x]),
                x: vec![x],
            }
        })
        .collect();
    RunTrace { records, budget, seed: 0 }
}

pub fn oracle_prefix_f1(trace: &RunTrace, p: &Problem, eps: f64) -> Vec<f64> {
    let optima: Vec<(Vec<f64>, f64)> = p.optima().iter().map(|o| (o.x.clone(), o.f)).collect();
    (1..=trace.records.len())
        .map(|t| {
            let sols: Vec<(Vec<f64>, f64)> = trace.records[..t].iter().map(|r| (r.x.clone(), r.fitness)).collect();
            let g = matched_optima(&sols, &optima, eps, p.niche_radius());
            f1_oracle(g, optima.len(), t)
        })
        .collect()
}
