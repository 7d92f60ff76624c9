use serde::{Deserialize, Serialize};

/// An evaluated point. Fitness is maximized; `eval_index` is the value of the
/// evaluation counter right after this point was evaluated (1-based).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub x: Vec<f64>,
    pub f: f64,
    pub eval_index: u64,
}

impl Solution {
    pub fn new(x: Vec<f64>, f: f64, eval_index: u64) -> Self {
        Self { x, f, eval_index }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn distance(&self, other: &Solution) -> f64 {
        distance(&self.x, &other.x)
    }
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum()
}

/// Euclidean distance in raw search-space coordinates.
pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    squared_distance(a, b).sqrt()
}

/// Sorts solutions best first. The sort is stable, so equal fitness keeps
/// insertion order.
pub fn sort_by_fitness_desc(solutions: &mut [Solution]) {
    solutions.sort_by(|a, b| b.f.total_cmp(&a.f));
}
