//! Hill-valley niche detection.
//!
//! Two solutions share a niche when no point sampled on the segment between
//! them is worse than the worse endpoint. Hill-valley clustering applies the
//! test to each solution and its nearest better neighbours from distinct
//! clusters. Worse-half solutions closer than one expected edge length to a
//! better neighbour are accepted into its cluster without evaluations.

use kdtree::distance::squared_euclidean;
use kdtree::KdTree;

use crate::error::EvalError;
use crate::problems::{Bounds, Evaluator};
use crate::solution::{squared_distance, Solution};

/// Upper limit on test points per pair.
pub const MAX_TEST_POINTS: usize = 10;

/// Typical nearest-neighbour spacing of `n` uniform points in `bounds`:
/// `(V / n)^(1/d)`.
pub fn expected_edge_length(n: usize, bounds: &Bounds) -> f64 {
    let n = n.max(1) as f64;
    ((bounds.ln_volume() - n.ln()) / bounds.dim() as f64).exp()
}

/// `min(10, 1 + floor(dist / eel))`.
pub fn n_test_points(dist: f64, eel: f64) -> usize {
    let steps = (dist / eel).floor();
    if steps >= (MAX_TEST_POINTS - 1) as f64 {
        MAX_TEST_POINTS
    } else {
        1 + steps as usize
    }
}

/// Runs the hill-valley test with `n_t` interior points. Returns
/// `Ok(false)` at the first point worse than both endpoints.
///
/// Endpoints are put in a canonical order first, so swapping `a` and `b`
/// evaluates the very same points in the same order.
pub fn hill_valley_test(
    ev: &mut Evaluator<'_>,
    a: &Solution,
    b: &Solution,
    n_t: usize,
) -> Result<bool, EvalError> {
    hill_valley_test_with_depth(ev, a, b, n_t, 0.0)
}

/// As [`hill_valley_test`], but a valley only counts when some test point is
/// more than `depth` below the worse endpoint. Two converged copies of one
/// optimum can otherwise be split by rounding noise at the midpoint.
pub fn hill_valley_test_with_depth(
    ev: &mut Evaluator<'_>,
    a: &Solution,
    b: &Solution,
    n_t: usize,
    depth: f64,
) -> Result<bool, EvalError> {
    if a.x == b.x {
        return Ok(true);
    }
    let (a, b) = match a.x.partial_cmp(&b.x) {
        Some(std::cmp::Ordering::Greater) => (b, a),
        _ => (a, b),
    };
    let worst = a.f.min(b.f) - depth;
    let bounds = ev.problem().bounds().clone();
    for k in 1..=n_t {
        let t = k as f64 / (n_t + 1) as f64;
        let mut x: Vec<f64> = a.x.iter().zip(&b.x).map(|(p, q)| p + t * (q - p)).collect();
        bounds.clamp(&mut x);
        if ev.evaluate(&x)? < worst {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A niche: member solutions believed to share one basin.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    members: Vec<Solution>,
    best: usize,
}

impl Cluster {
    pub fn new(members: Vec<Solution>) -> Self {
        assert!(!members.is_empty(), "a cluster needs at least one member");
        let mut best = 0;
        for (i, m) in members.iter().enumerate() {
            if m.f > members[best].f {
                best = i;
            }
        }
        Self { members, best }
    }

    pub fn members(&self) -> &[Solution] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn best(&self) -> &Solution {
        &self.members[self.best]
    }

    pub fn best_index(&self) -> usize {
        self.best
    }
}

/// Output of [`hill_valley_clustering`].
#[derive(Debug, Clone)]
pub struct Clustering {
    pub clusters: Vec<Cluster>,
    /// Cluster index of every selection member, in selection order.
    pub labels: Vec<usize>,
    /// Evaluations spent on hill-valley tests.
    pub evaluations: u64,
    /// The budget ran out; unprocessed solutions became singletons.
    pub interrupted: bool,
}

/// The `k` clusters closest to `x`, each represented by its nearest member
/// already in `tree`, as `(squared distance, member, cluster)` sorted by
/// distance. Ties go to the lower cluster index, and within a cluster to
/// the lower member index.
fn nearest_clusters(
    tree: &KdTree<f64, usize, &[f64]>,
    x: &[f64],
    selection: &[Solution],
    labels: &[usize],
    k: usize,
    out: &mut Vec<(f64, usize, usize)>,
) {
    out.clear();
    let mut cutoff = f64::INFINITY;
    for (tree_d2, &j) in tree.iter_nearest(x, &squared_euclidean).expect("finite coordinates") {
        // Widened so that rounding in the tree cannot reorder near-ties.
        if tree_d2 > cutoff * (1.0 + 1e-9) + f64::MIN_POSITIVE {
            break;
        }
        let d2 = squared_distance(x, &selection[j].x);
        let c = labels[j];
        match out.iter_mut().find(|e| e.2 == c) {
            Some(e) => {
                if (d2, j) < (e.0, e.1) {
                    *e = (d2, j, c);
                }
            }
            None => out.push((d2, j, c)),
        }
        if out.len() >= k && cutoff.is_infinite() {
            cutoff = tree_d2;
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.2.cmp(&b.2)));
    out.truncate(k);
}

/// Clusters a fitness-sorted selection (best first).
pub fn hill_valley_clustering(selection: &[Solution], ev: &mut Evaluator<'_>, bounds: &Bounds) -> Clustering {
    hill_valley_clustering_with_anchors(selection, &[], ev, bounds)
}

/// As [`hill_valley_clustering`], where `anchor[i]` marks members that
/// found their own cluster without being tested. Others join an anchor's
/// cluster only by passing the test; force-accept does not apply to them.
/// An empty mask means no anchors.
pub fn hill_valley_clustering_with_anchors(
    selection: &[Solution],
    anchor: &[bool],
    ev: &mut Evaluator<'_>,
    bounds: &Bounds,
) -> Clustering {
    assert!(anchor.is_empty() || anchor.len() == selection.len(), "one anchor flag per member");
    let is_anchor = |i: usize| anchor.get(i).copied().unwrap_or(false);
    debug_assert!(
        selection.windows(2).all(|w| w[0].f >= w[1].f),
        "selection must be sorted best first"
    );
    let n = selection.len();
    let start = ev.evals_used();
    if n == 0 {
        return Clustering {
            clusters: Vec::new(),
            labels: Vec::new(),
            evaluations: 0,
            interrupted: false,
        };
    }
    let eel = expected_edge_length(n, bounds);
    let better_half = n.div_ceil(2);
    let max_candidates = bounds.dim() + 1;

    let mut labels = vec![0usize; n];
    let mut n_clusters = 1;
    let mut interrupted = false;
    // Better solutions inserted so far, queried in order of distance.
    let mut tree: KdTree<f64, usize, &[f64]> = KdTree::with_capacity(bounds.dim(), 16);
    tree.add(selection[0].x.as_slice(), 0).expect("finite coordinates");
    let mut candidates: Vec<(f64, usize, usize)> = Vec::with_capacity(max_candidates + 1);

    let mut anchored = vec![is_anchor(0)];
    for i in 1..n {
        if interrupted || is_anchor(i) {
            labels[i] = n_clusters;
            n_clusters += 1;
            anchored.push(is_anchor(i));
            tree.add(selection[i].x.as_slice(), i).expect("finite coordinates");
            continue;
        }
        nearest_clusters(&tree, &selection[i].x, selection, &labels, max_candidates, &mut candidates);

        let mut assigned = None;
        for &(d2, j, c) in &candidates {
            let n_t = n_test_points(d2.sqrt(), eel);
            // Joining an anchor's cluster always takes a real test.
            if i >= better_half && n_t == 1 && !anchored[c] {
                assigned = Some(c);
                break;
            }
            match hill_valley_test(ev, &selection[i], &selection[j], n_t) {
                Ok(true) => {
                    assigned = Some(c);
                    break;
                }
                Ok(false) => {}
                Err(_) => {
                    interrupted = true;
                    break;
                }
            }
        }
        labels[i] = match assigned {
            Some(c) => c,
            None => {
                n_clusters += 1;
                anchored.push(false);
                n_clusters - 1
            }
        };
        tree.add(selection[i].x.as_slice(), i).expect("finite coordinates");
    }

    let mut groups: Vec<Vec<Solution>> = vec![Vec::new(); n_clusters];
    for (s, &l) in selection.iter().zip(&labels) {
        groups[l].push(s.clone());
    }
    Clustering {
        clusters: groups.into_iter().map(Cluster::new).collect(),
        labels,
        evaluations: ev.evals_used() - start,
        interrupted,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{make_problem, Problem};

    fn sol(x: &[f64], f: f64) -> Solution {
        Solution::new(x.to_vec(), f, 1)
    }

    #[test]
    fn edge_length_examples() {
        assert!((expected_edge_length(100, &Bounds::cube(2, 0.0, 1.0).unwrap()) - 0.1).abs() < 1e-12);
        assert!((expected_edge_length(10, &Bounds::cube(1, 0.0, 1.0).unwrap()) - 0.1).abs() < 1e-12);
        assert!((expected_edge_length(4, &Bounds::cube(2, 0.0, 2.0).unwrap()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn test_point_counts() {
        assert_eq!(n_test_points(0.5, 1.0), 1);
        assert_eq!(n_test_points(1.5, 1.0), 2);
        assert_eq!(n_test_points(100.0, 1.0), 10);
        assert_eq!(n_test_points(1.0, 1.0), 2);
        assert_eq!(n_test_points(0.0, 1.0), 1);
        assert_eq!(n_test_points(f64::INFINITY, 1.0), 10);
    }

    #[test]
    fn equal_maxima_peaks_are_different_niches() {
        let p = make_problem(2, None).unwrap();
        let mut ev = Evaluator::new(&p);
        assert!(!hill_valley_test(&mut ev, &sol(&[0.1], 1.0), &sol(&[0.3], 1.0), 1).unwrap());
        assert_eq!(ev.evals_used(), 1);
    }

    #[test]
    fn concave_pair_is_one_niche() {
        let p = Problem::custom("bowl", Bounds::cube(1, -2.0, 2.0).unwrap(), 100, vec![], 0.1, |x| -x[0] * x[0]);
        let mut ev = Evaluator::new(&p);
        assert!(hill_valley_test(&mut ev, &sol(&[-1.0], -1.0), &sol(&[1.0], -1.0), 3).unwrap());
        assert_eq!(ev.evals_used(), 3);
    }

    #[test]
    fn shallow_valley_is_ignored_with_depth() {
        let p = Problem::custom("dip", Bounds::cube(1, -2.0, 2.0).unwrap(), 100, vec![], 0.1, |x| {
            if x[0].abs() < 0.1 { -1e-13 } else { 0.0 }
        });
        let mut ev = Evaluator::new(&p);
        let (a, b) = (sol(&[-1.0], 0.0), sol(&[1.0], 0.0));
        assert!(!hill_valley_test(&mut ev, &a, &b, 1).unwrap());
        assert!(hill_valley_test_with_depth(&mut ev, &a, &b, 1, 1e-12).unwrap());
        assert!(!hill_valley_test_with_depth(&mut ev, &a, &b, 1, 1e-14).unwrap());
    }

    #[test]
    fn identical_endpoints_cost_nothing() {
        let p = make_problem(2, None).unwrap();
        let mut ev = Evaluator::new(&p);
        assert!(hill_valley_test(&mut ev, &sol(&[0.4], 0.5), &sol(&[0.4], 0.5), 5).unwrap());
        assert_eq!(ev.evals_used(), 0);
    }

    #[test]
    fn exhausted_budget_propagates() {
        let p = make_problem(2, None).unwrap().with_budget(0);
        let mut ev = Evaluator::new(&p);
        assert_eq!(
            hill_valley_test(&mut ev, &sol(&[0.1], 1.0), &sol(&[0.3], 1.0), 1),
            Err(EvalError::BudgetExhausted)
        );
    }

    #[test]
    fn single_solution_is_one_cluster() {
        let p = make_problem(2, None).unwrap();
        let mut ev = Evaluator::new(&p);
        let c = hill_valley_clustering(&[sol(&[0.1], 1.0)], &mut ev, p.bounds());
        assert_eq!(c.clusters.len(), 1);
        assert_eq!(c.labels, vec![0]);
    }

    /// The plain quadratic scan the tree query replaces.
    fn brute_nearest_clusters(x: &[f64], better: &[Solution], labels: &[usize], k: usize) -> Vec<(f64, usize, usize)> {
        let n_clusters = labels.iter().max().map_or(0, |m| m + 1);
        let mut slots = vec![(f64::INFINITY, usize::MAX); n_clusters];
        for (j, s) in better.iter().enumerate() {
            let d2 = squared_distance(x, &s.x);
            if d2 < slots[labels[j]].0 {
                slots[labels[j]] = (d2, j);
            }
        }
        let mut out: Vec<(f64, usize, usize)> = slots
            .iter()
            .enumerate()
            .filter(|(_, s)| s.1 != usize::MAX)
            .map(|(c, &(d2, j))| (d2, j, c))
            .collect();
        out.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.2.cmp(&b.2)));
        out.truncate(k);
        out
    }

    #[test]
    fn tree_query_matches_quadratic_scan() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for d in [1, 2, 3, 5] {
            for n in [1, 5, 40, 300] {
                let pts: Vec<Solution> = (0..n)
                    .map(|_| {
                        // a coarse lattice produces exact ties
                        let x: Vec<f64> = (0..d).map(|_| (rng.random_range(0..6) as f64) * 0.5).collect();
                        sol(&x, 0.0)
                    })
                    .collect();
                let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..7)).collect();
                let mut tree: KdTree<f64, usize, &[f64]> = KdTree::with_capacity(d, 16);
                for (i, p) in pts.iter().enumerate() {
                    tree.add(p.x.as_slice(), i).unwrap();
                }
                let mut out = Vec::new();
                for _ in 0..20 {
                    let x: Vec<f64> = (0..d).map(|_| rng.random_range(-0.5..3.0)).collect();
                    nearest_clusters(&tree, &x, &pts, &labels, d + 1, &mut out);
                    assert_eq!(out, brute_nearest_clusters(&x, &pts, &labels, d + 1));
                }
            }
        }
    }

    #[test]
    fn anchors_found_clusters_without_tests() {
        let p = Problem::custom("bowl", Bounds::cube(1, -2.0, 2.0).unwrap(), 100, vec![], 0.1, |x| -x[0] * x[0]);
        let mut ev = Evaluator::new(&p);
        let sel: Vec<Solution> = [0.0, 0.5, -1.5].iter().map(|&x| sol(&[x], p.objective(&[x]))).collect();
        let c = hill_valley_clustering_with_anchors(&sel, &[true, true, false], &mut ev, p.bounds());
        assert_eq!(c.labels[..2], [0, 1]);
        assert_eq!(c.clusters.len(), 2);
        // only the non-anchor was tested
        assert!(c.evaluations > 0 && c.evaluations <= MAX_TEST_POINTS as u64 * 2);
    }

    #[test]
    fn interrupted_clustering_leaves_singletons() {
        let p = make_problem(2, None).unwrap().with_budget(0);
        let mut ev = Evaluator::new(&p);
        let sel: Vec<Solution> = [0.1, 0.3, 0.5, 0.7]
            .iter()
            .map(|&x| sol(&[x], p.objective(&[x])))
            .collect();
        let c = hill_valley_clustering(&sel, &mut ev, p.bounds());
        assert!(c.interrupted);
        assert_eq!(c.clusters.len(), 4);
    }
}
