//! Initial-population sampling: uniform draws, cluster-aware rejection
//! against the previous restart's labelled population, and greedy scattered
//! subset selection.
//!
//! Nothing here evaluates the objective.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::problems::Bounds;
use crate::solution::squared_distance;
use crate::spatial::StaticTree;

/// Probability of rejecting a candidate whose neighbourhood in the previous
/// initial population lies in a single cluster.
pub const REJECTION_PROBABILITY: f64 = 0.9;

/// Redraws per point before a candidate is accepted unconditionally.
pub const MAX_REDRAWS: usize = 100;

/// The previous restart's initial population with the cluster each point
/// ended up in. Points outside the clustered selection carry `None`.
#[derive(Debug, Clone, Default)]
pub struct LabeledHistory {
    points: Vec<Vec<f64>>,
    labels: Vec<Option<usize>>,
    /// Index into `points`; absent for an empty history.
    index: Option<StaticTree>,
}

impl LabeledHistory {
    pub fn new(points: Vec<Vec<f64>>, labels: Vec<Option<usize>>) -> Result<Self> {
        if points.len() != labels.len() {
            return Err(Error::Config(format!(
                "history has {} points but {} labels",
                points.len(),
                labels.len()
            )));
        }
        if let Some(i) = points.iter().position(|p| p.len() != points[0].len() || p.iter().any(|v| !v.is_finite())) {
            return Err(Error::Config(format!("history point {i} is not a finite point of the common dimension")));
        }
        let index = (!points.is_empty()).then(|| StaticTree::new(&points));
        Ok(Self { points, labels, index })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn labels(&self) -> &[Option<usize>] {
        &self.labels
    }

    /// True when the `k` nearest history points (all of them if fewer) share
    /// one cluster label.
    pub fn neighbourhood_is_single_cluster(&self, x: &[f64], k: usize) -> bool {
        self.single_cluster_with(x, k, &mut Vec::new())
    }

    fn single_cluster_with(&self, x: &[f64], k: usize, buf: &mut Vec<(f64, usize)>) -> bool {
        let Some(tree) = &self.index else {
            return false;
        };
        tree.nearest(x, k.min(self.points.len()), buf);
        let Some(&(_, i0)) = buf.first() else {
            return false;
        };
        let first = self.labels[i0];
        first.is_some() && buf.iter().all(|&(_, i)| self.labels[i] == first)
    }
}

fn uniform_point<R: Rng + ?Sized>(bounds: &Bounds, rng: &mut R) -> Vec<f64> {
    bounds
        .lower()
        .iter()
        .zip(bounds.upper())
        .map(|(&lo, &hi)| rng.random_range(lo..hi))
        .collect()
}

/// `n` points drawn i.i.d. uniformly from `bounds`.
pub fn sample_uniform<R: Rng + ?Sized>(n: usize, bounds: &Bounds, rng: &mut R) -> Vec<Vec<f64>> {
    (0..n).map(|_| uniform_point(bounds, rng)).collect()
}

/// Counters from one rejection-sampling pass.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RejectionStats {
    /// Candidates drawn, accepted or not.
    pub draws: usize,
    pub rejected: usize,
    /// Points accepted only because the redraw cap was hit.
    pub forced: usize,
}

/// Draws `n` points, rejecting with probability [`REJECTION_PROBABILITY`]
/// any candidate whose `d + 1` nearest history points belong to one cluster.
/// With an empty history this consumes the random stream exactly like
/// [`sample_uniform`].
pub fn rejection_sample<R: Rng + ?Sized>(
    n: usize,
    bounds: &Bounds,
    history: &LabeledHistory,
    rng: &mut R,
) -> Vec<Vec<f64>> {
    rejection_sample_with_stats(n, bounds, history, rng).0
}

pub fn rejection_sample_with_stats<R: Rng + ?Sized>(
    n: usize,
    bounds: &Bounds,
    history: &LabeledHistory,
    rng: &mut R,
) -> (Vec<Vec<f64>>, RejectionStats) {
    let k = bounds.dim() + 1;
    let mut stats = RejectionStats::default();
    let mut out = Vec::with_capacity(n);
    let mut buf = Vec::with_capacity(k);
    for _ in 0..n {
        let mut redraws = 0;
        loop {
            let x = uniform_point(bounds, rng);
            stats.draws += 1;
            let reject = !history.is_empty()
                && history.single_cluster_with(&x, k, &mut buf)
                && rng.random_bool(REJECTION_PROBABILITY);
            if !reject {
                out.push(x);
                break;
            }
            stats.rejected += 1;
            redraws += 1;
            if redraws >= MAX_REDRAWS {
                stats.forced += 1;
                out.push(uniform_point(bounds, rng));
                stats.draws += 1;
                break;
            }
        }
    }
    (out, stats)
}

/// Total order on non-NaN squared distances for the pick heap.
#[derive(Debug, Clone, Copy, PartialEq)]
struct HeapScore(f64);

impl Eq for HeapScore {}

impl PartialOrd for HeapScore {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapScore {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Farthest-point greedy selection of `k` candidates; returns indices in pick
/// order. The first pick is the candidate farthest from the centroid, each
/// later pick maximizes the distance to the nearest already-picked point.
/// Ties go to the lowest index.
pub fn greedy_scattered_subset(candidates: &[Vec<f64>], k: usize) -> Result<Vec<usize>> {
    let n = candidates.len();
    if k > n {
        return Err(Error::SubsetSize { k, n });
    }
    if k == 0 {
        return Ok(Vec::new());
    }
    let d = candidates[0].len();
    let mut centroid = vec![0.0; d];
    for c in candidates {
        for (m, v) in centroid.iter_mut().zip(c) {
            *m += v;
        }
    }
    centroid.iter_mut().for_each(|m| *m /= n as f64);

    let argmax = |scores: &[f64]| {
        let mut best = 0;
        for (i, &s) in scores.iter().enumerate() {
            if s > scores[best] {
                best = i;
            }
        }
        best
    };
    let from_centroid: Vec<f64> = candidates.iter().map(|c| squared_distance(c, &centroid)).collect();
    let first = argmax(&from_centroid);

    let mut picked = Vec::with_capacity(k);
    picked.push(first);
    // Squared distance to the picked set; picked points are parked at -1 so
    // duplicates of them can still be chosen but the same index cannot.
    let mut nearest: Vec<f64> = candidates.iter().map(|c| squared_distance(c, &candidates[first])).collect();
    nearest[first] = -1.0;
    if k == 1 {
        return Ok(picked);
    }

    // A pick with score s can only lower `nearest` for candidates within
    // squared distance s of it, so a range query replaces the full scan.
    // Heap entries go stale when `nearest` shrinks; they are skipped on pop.
    let tree = StaticTree::new(candidates);
    let mut heap: BinaryHeap<(HeapScore, Reverse<usize>)> = nearest
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != first)
        .map(|(i, &s)| (HeapScore(s), Reverse(i)))
        .collect();
    while picked.len() < k {
        let (HeapScore(score), Reverse(next)) = heap.pop().expect("k <= n leaves a candidate");
        if nearest[next] != score {
            continue;
        }
        picked.push(next);
        nearest[next] = -1.0;
        tree.within(&candidates[next], score, |i, d2| {
            if d2 < nearest[i] {
                nearest[i] = d2;
                heap.push((HeapScore(d2), Reverse(i)));
            }
        });
    }
    Ok(picked)
}

/// Draws `2n` candidates by rejection sampling and keeps a scattered subset
/// of `n`.
pub fn sample_initial_population<R: Rng + ?Sized>(
    n: usize,
    bounds: &Bounds,
    history: &LabeledHistory,
    rng: &mut R,
) -> Vec<Vec<f64>> {
    let mut candidates = rejection_sample(2 * n, bounds, history, rng);
    let picks = greedy_scattered_subset(&candidates, n).expect("2n candidates for n picks");
    picks
        .into_iter()
        .map(|i| std::mem::take(&mut candidates[i]))
        .collect()
}
