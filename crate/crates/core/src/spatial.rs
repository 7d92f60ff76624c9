//! A static kd-tree over a fixed point set, built once and queried without
//! allocating. Used by the samplers, which issue millions of small queries.

use crate::solution::squared_distance;

const LEAF: usize = 8;

#[derive(Debug, Clone)]
enum Node {
    Leaf { start: usize, end: usize },
    Split { dim: usize, at: f64, left: usize, right: usize },
}

#[derive(Debug, Clone)]
pub(crate) struct StaticTree {
    dim: usize,
    /// Point coordinates in tree order, `dim` values per point.
    coords: Vec<f64>,
    /// Original index of each point in tree order.
    ids: Vec<usize>,
    nodes: Vec<Node>,
}

impl StaticTree {
    pub(crate) fn new<P: AsRef<[f64]>>(points: &[P]) -> Self {
        let dim = points.first().map_or(0, |p| p.as_ref().len());
        let mut ids: Vec<usize> = (0..points.len()).collect();
        let mut nodes = Vec::new();
        if !ids.is_empty() {
            build(points, dim, &mut ids, 0, &mut nodes);
        }
        let coords = ids.iter().flat_map(|&i| points[i].as_ref().iter().copied()).collect();
        Self { dim, coords, ids, nodes }
    }

    fn point(&self, slot: usize) -> &[f64] {
        &self.coords[slot * self.dim..(slot + 1) * self.dim]
    }

    /// The `k` nearest points as `(squared distance, index)`, closest first.
    /// Equal distances are ordered by index.
    pub(crate) fn nearest(&self, q: &[f64], k: usize, out: &mut Vec<(f64, usize)>) {
        out.clear();
        if k == 0 || self.nodes.is_empty() {
            return;
        }
        self.nearest_in(0, q, k, out);
    }

    fn nearest_in(&self, node: usize, q: &[f64], k: usize, out: &mut Vec<(f64, usize)>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for slot in start..end {
                    let cand = (squared_distance(self.point(slot), q), self.ids[slot]);
                    if out.len() == k && !less(cand, out[k - 1]) {
                        continue;
                    }
                    let at = out.partition_point(|&e| less(e, cand));
                    out.insert(at, cand);
                    out.truncate(k);
                }
            }
            Node::Split { dim, at, left, right } => {
                let gap = q[dim] - at;
                let (near, far) = if gap < 0.0 { (left, right) } else { (right, left) };
                self.nearest_in(near, q, k, out);
                if out.len() < k || gap * gap <= out[k - 1].0 {
                    self.nearest_in(far, q, k, out);
                }
            }
        }
    }

    /// Calls `f(index, squared distance)` for every point with squared
    /// distance at most `r2`, in no particular order.
    pub(crate) fn within(&self, q: &[f64], r2: f64, mut f: impl FnMut(usize, f64)) {
        if !self.nodes.is_empty() {
            self.within_in(0, q, r2, &mut f);
        }
    }

    fn within_in(&self, node: usize, q: &[f64], r2: f64, f: &mut impl FnMut(usize, f64)) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for slot in start..end {
                    let d2 = squared_distance(self.point(slot), q);
                    if d2 <= r2 {
                        f(self.ids[slot], d2);
                    }
                }
            }
            Node::Split { dim, at, left, right } => {
                let gap = q[dim] - at;
                let (near, far) = if gap < 0.0 { (left, right) } else { (right, left) };
                self.within_in(near, q, r2, f);
                if gap * gap <= r2 {
                    self.within_in(far, q, r2, f);
                }
            }
        }
    }
}

fn less(a: (f64, usize), b: (f64, usize)) -> bool {
    a.0 < b.0 || (a.0 == b.0 && a.1 < b.1)
}

/// Builds the subtree over `ids` (whose first element sits at tree slot
/// `offset`) and returns its node index.
fn build<P: AsRef<[f64]>>(points: &[P], dim: usize, ids: &mut [usize], offset: usize, nodes: &mut Vec<Node>) -> usize {
    let me = nodes.len();
    nodes.push(Node::Leaf { start: offset, end: offset + ids.len() });
    if ids.len() <= LEAF || dim == 0 {
        return me;
    }
    // Split the widest coordinate at its median.
    let coord = |i: usize, k: usize| points[i].as_ref()[k];
    let (split_dim, spread) = (0..dim)
        .map(|k| {
            let (lo, hi) = ids
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| (lo.min(coord(i, k)), hi.max(coord(i, k))));
            (k, hi - lo)
        })
        .fold((0, f64::NEG_INFINITY), |best, c| if c.1 > best.1 { c } else { best });
    if !(spread > 0.0) {
        return me;
    }
    let mid = ids.len() / 2;
    ids.select_nth_unstable_by(mid, |&a, &b| coord(a, split_dim).total_cmp(&coord(b, split_dim)));
    let at = coord(ids[mid], split_dim);
    let (lo, hi) = ids.split_at_mut(mid);
    let left = build(points, dim, lo, offset, nodes);
    let right = build(points, dim, hi, offset + mid, nodes);
    nodes[me] = Node::Split { dim: split_dim, at, left, right };
    me
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_nearest(points: &[Vec<f64>], q: &[f64], k: usize) -> Vec<(f64, usize)> {
        let mut all: Vec<(f64, usize)> = points.iter().enumerate().map(|(i, p)| (squared_distance(p, q), i)).collect();
        all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        all.truncate(k);
        all
    }

    #[test]
    fn queries_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut out = Vec::new();
        for case in 0..200 {
            let d = rng.random_range(1..=6);
            let n = rng.random_range(1..300);
            // Coarse grid coordinates force ties and duplicates.
            let points: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..d).map(|_| (rng.random_range(0..8) as f64) * 0.5).collect())
                .collect();
            let tree = StaticTree::new(&points);
            for _ in 0..10 {
                let q: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..5.0)).collect();
                let k = rng.random_range(1..12);
                tree.nearest(&q, k, &mut out);
                assert_eq!(out, brute_nearest(&points, &q, k), "case {case}");

                let r2 = rng.random_range(0.0..4.0);
                let mut got = Vec::new();
                tree.within(&q, r2, |i, _| got.push(i));
                got.sort();
                let want: Vec<usize> = (0..n).filter(|&i| squared_distance(&points[i], &q) <= r2).collect();
                assert_eq!(got, want, "case {case}");
            }
        }
    }

    #[test]
    fn empty_tree_answers_nothing() {
        let tree = StaticTree::new::<Vec<f64>>(&[]);
        let mut out = vec![(0.0, 0)];
        tree.nearest(&[0.0], 3, &mut out);
        assert!(out.is_empty());
        tree.within(&[0.0], 1.0, |_, _| panic!("no points"));
    }
}
