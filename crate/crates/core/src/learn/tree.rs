use rand::seq::index;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::synth::Dataset;

/// Tree node. Rows with `x[feature] <= threshold` go left.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    /// Bootstrap-weighted class counts of the training rows in the leaf.
    Leaf { counts: [u32; 2] },
}

/// Fully grown classification tree, stored as a flat node array rooted at 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tree {
    nodes: Vec<Node>,
}

pub(crate) fn majority(counts: [u32; 2]) -> u8 {
    u8::from(counts[1] > counts[0])
}

impl Tree {
    #[cfg(test)]
    pub(crate) fn from_nodes(nodes: Vec<Node>) -> Tree {
        Tree { nodes }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn predict(&self, row: &[f64]) -> u8 {
        let mut id = 0;
        loop {
            match &self.nodes[id] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => id = if row[*feature] <= *threshold { *left } else { *right },
                Node::Leaf { counts } => return majority(*counts),
            }
        }
    }

    pub fn uses_feature(&self, j: usize) -> bool {
        self.nodes
            .iter()
            .any(|n| matches!(n, Node::Split { feature, .. } if *feature == j))
    }

    pub fn depth(&self) -> usize {
        let mut best = 0;
        let mut stack = vec![(0usize, 0usize)];
        while let Some((id, depth)) = stack.pop() {
            best = best.max(depth);
            if let Node::Split { left, right, .. } = self.nodes[id] {
                stack.push((left, depth + 1));
                stack.push((right, depth + 1));
            }
        }
        best
    }

    /// Thresholds of the splits on feature `j`, appended to `out`.
    pub(crate) fn thresholds_on(&self, j: usize, out: &mut Vec<f64>) {
        for node in &self.nodes {
            if let Node::Split { feature, threshold, .. } = node {
                if *feature == j {
                    out.push(*threshold);
                }
            }
        }
    }

    /// Position in `sorted` (sorted, deduplicated thresholds) of each split on
    /// feature `j`, aligned with the node array; `u32::MAX` elsewhere.
    pub(crate) fn ranks_on(&self, j: usize, sorted: &[f64]) -> Vec<u32> {
        self.nodes
            .iter()
            .map(|node| match node {
                Node::Split { feature, threshold, .. } if *feature == j => {
                    sorted.partition_point(|&b| b < *threshold) as u32
                }
                _ => u32::MAX,
            })
            .collect()
    }

    /// Classes predicted for `row` as its `j`-th entry sweeps the segments
    /// `0..=m` cut by `m` sorted thresholds, segment `s` covering
    /// `(t[s-1], t[s]]`. Emits `(first, last, class)` segment ranges.
    pub(crate) fn profile(&self, row: &[f64], j: usize, ranks: &[u32], m: u32, out: &mut Vec<(u32, u32, u8)>) {
        let mut stack = vec![(0usize, 0u32, m)];
        while let Some((id, first, last)) = stack.pop() {
            match &self.nodes[id] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    if *feature == j {
                        let q = ranks[id];
                        if first <= q {
                            stack.push((*left, first, last.min(q)));
                        }
                        if q < last {
                            stack.push((*right, first.max(q + 1), last));
                        }
                    } else if row[*feature] <= *threshold {
                        stack.push((*left, first, last));
                    } else {
                        stack.push((*right, first, last));
                    }
                }
                Node::Leaf { counts } => out.push((first, last, majority(*counts))),
            }
        }
    }
}

/// Split purity `Σ_children Σ_c n_c² / n_child` as an exact fraction;
/// larger is purer, equivalent to lower weighted Gini impurity.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Score {
    num: u128,
    den: u128,
}

impl Score {
    fn new(left: [u64; 2], right: [u64; 2]) -> Score {
        let nl = u128::from(left[0] + left[1]);
        let nr = u128::from(right[0] + right[1]);
        let sq = |c: [u64; 2]| u128::from(c[0] * c[0] + c[1] * c[1]);
        Score {
            num: sq(left) * nr + sq(right) * nl,
            den: nl * nr,
        }
    }

    fn better_than(&self, other: &Score) -> bool {
        self.num * other.den > other.num * self.den
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Split {
    pub feature: usize,
    pub threshold: f64,
    score: Score,
}

fn midpoint(a: f64, b: f64) -> f64 {
    let t = a + (b - a) / 2.0;
    if t < b {
        t
    } else {
        a
    }
}

/// Best threshold on feature `j` for the rows `sorted`, which are ordered by
/// that feature and all carry positive weight.
fn best_for_feature(data: &Dataset, sorted: &[usize], w: &[u32], j: usize) -> Option<(f64, Score)> {
    let cond = data.condition();
    let mut total = [0u64; 2];
    for &r in sorted {
        total[cond[r] as usize] += u64::from(w[r]);
    }
    let mut left = [0u64; 2];
    let mut best: Option<(f64, Score)> = None;
    for k in 0..sorted.len().saturating_sub(1) {
        let r = sorted[k];
        left[cond[r] as usize] += u64::from(w[r]);
        let a = data.value(r, j);
        let b = data.value(sorted[k + 1], j);
        if a == b {
            continue;
        }
        let score = Score::new(left, [total[0] - left[0], total[1] - left[1]]);
        if best.as_ref().is_none_or(|(_, s)| score.better_than(s)) {
            best = Some((midpoint(a, b), score));
        }
    }
    best
}

/// Best split over `features`, ties going to the lowest feature index and
/// then the lowest threshold.
pub(crate) fn best_split(data: &Dataset, lists: &[Vec<usize>], w: &[u32], features: &[usize]) -> Option<Split> {
    let mut sorted_features = features.to_vec();
    sorted_features.sort_unstable();
    let mut best: Option<Split> = None;
    for j in sorted_features {
        if let Some((threshold, score)) = best_for_feature(data, &lists[j], w, j) {
            if best.as_ref().is_none_or(|b| score.better_than(&b.score)) {
                best = Some(Split {
                    feature: j,
                    threshold,
                    score,
                });
            }
        }
    }
    best
}

/// Training rows sorted by each feature, ties by row index.
pub(crate) fn presort(data: &Dataset, rows: &[usize]) -> Vec<Vec<usize>> {
    (0..data.d())
        .map(|j| {
            let mut list = rows.to_vec();
            list.sort_by(|&a, &b| data.value(a, j).total_cmp(&data.value(b, j)).then(a.cmp(&b)));
            list
        })
        .collect()
}

/// Grows one tree on the rows with positive weight in `w` (indexed by row).
pub(crate) fn grow(data: &Dataset, presorted: &[Vec<usize>], w: &[u32], mtry: usize, rng: &mut ChaCha8Rng) -> Tree {
    let d = data.d();
    let cond = data.condition();
    let root: Vec<Vec<usize>> = presorted
        .iter()
        .map(|l| l.iter().copied().filter(|&r| w[r] > 0).collect())
        .collect();
    let mut nodes = vec![Node::Leaf { counts: [0, 0] }];
    let mut stack = vec![(0usize, root)];
    let mut goes_left = vec![false; data.n()];
    while let Some((id, lists)) = stack.pop() {
        let mut counts = [0u32; 2];
        for &r in &lists[0] {
            counts[cond[r] as usize] += w[r];
        }
        if counts[0] == 0 || counts[1] == 0 {
            nodes[id] = Node::Leaf { counts };
            continue;
        }
        let drawn = index::sample(rng, d, mtry).into_vec();
        let mut split = best_split(data, &lists, w, &drawn);
        if split.is_none() && mtry < d {
            // Every drawn feature is constant here; fall back to the others.
            let rest: Vec<usize> = (0..d).filter(|j| !drawn.contains(j)).collect();
            split = best_split(data, &lists, w, &rest);
        }
        let Some(split) = split else {
            nodes[id] = Node::Leaf { counts };
            continue;
        };
        for &r in &lists[split.feature] {
            goes_left[r] = data.value(r, split.feature) <= split.threshold;
        }
        let mut left = Vec::with_capacity(d);
        let mut right = Vec::with_capacity(d);
        for list in lists {
            let (l, r): (Vec<usize>, Vec<usize>) = list.into_iter().partition(|&r| goes_left[r]);
            left.push(l);
            right.push(r);
        }
        let left_id = nodes.len();
        nodes.push(Node::Leaf { counts: [0, 0] });
        nodes.push(Node::Leaf { counts: [0, 0] });
        nodes[id] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left: left_id,
            right: left_id + 1,
        };
        stack.push((left_id + 1, right));
        stack.push((left_id, left));
    }
    Tree { nodes }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng;

    fn weighted_gini(data: &Dataset, w: &[u32], j: usize, t: f64) -> f64 {
        let mut l = [0.0; 2];
        let mut r = [0.0; 2];
        for i in 0..data.n() {
            let c = data.condition()[i] as usize;
            if data.value(i, j) <= t {
                l[c] += f64::from(w[i]);
            } else {
                r[c] += f64::from(w[i]);
            }
        }
        let g = |c: [f64; 2]| {
            let n = c[0] + c[1];
            if n == 0.0 {
                0.0
            } else {
                n * (1.0 - (c[0] / n).powi(2) - (c[1] / n).powi(2))
            }
        };
        g(l) + g(r)
    }

    #[test]
    fn root_split_matches_exhaustive_gini_search() {
        let mut r = rng::stream(99, &[]);
        let mut checked = 0;
        for _ in 0..2000 {
            let n = r.random_range(3..=12);
            let d = r.random_range(1..=2);
            let cond: Vec<u8> = (0..n).map(|_| r.random_range(0..2)).collect();
            // Coarse values force many ties between rows.
            let x: Vec<f64> = (0..n * d).map(|_| f64::from(r.random_range(0..5u8))).collect();
            let names: Vec<String> = (0..d).map(|j| format!("f{j}")).collect();
            let Ok(data) = Dataset::new(cond, x, names) else { continue };
            let w: Vec<u32> = (0..n).map(|_| r.random_range(0..3)).collect();
            let rows: Vec<usize> = (0..n).collect();
            let lists: Vec<Vec<usize>> = presort(&data, &rows)
                .into_iter()
                .map(|l| l.into_iter().filter(|&i| w[i] > 0).collect())
                .collect();
            let all: Vec<usize> = (0..d).collect();
            let got = best_split(&data, &lists, &w, &all);

            // Exhaustive: every feature, every midpoint between distinct
            // weighted values, scanned in (feature, threshold) order.
            let mut want: Option<(usize, f64, f64)> = None;
            for j in 0..d {
                let mut vals: Vec<f64> = (0..n).filter(|&i| w[i] > 0).map(|i| data.value(i, j)).collect();
                vals.sort_by(f64::total_cmp);
                vals.dedup();
                for pair in vals.windows(2) {
                    let t = (pair[0] + pair[1]) / 2.0;
                    let g = weighted_gini(&data, &w, j, t);
                    if want.is_none_or(|(_, _, bg)| g < bg - 1e-9) {
                        want = Some((j, t, g));
                    }
                }
            }
            match (got, want) {
                (None, None) => {}
                (Some(s), Some((j, t, _))) => {
                    assert_eq!((s.feature, s.threshold), (j, t));
                    checked += 1;
                }
                (g, w) => panic!("mismatch: {g:?} vs {w:?}"),
            }
        }
        assert!(checked > 1000);
    }

    #[test]
    fn separable_data_is_fit_exactly() {
        let x: Vec<f64> = (0..40).map(|i| i as f64 - 19.5).collect();
        let cond: Vec<u8> = x.iter().map(|&v| u8::from(v > 0.0)).collect();
        let data = Dataset::new(cond.clone(), x.clone(), vec!["x".into()]).unwrap();
        let rows: Vec<usize> = (0..40).collect();
        let tree = grow(&data, &presort(&data, &rows), &[1; 40], 1, &mut rng::stream(1, &[]));
        assert_eq!(tree.nodes().len(), 3);
        match tree.nodes()[0] {
            Node::Split { threshold, .. } => assert_eq!(threshold, 0.0),
            _ => panic!("expected a split"),
        }
        for (v, c) in x.iter().zip(&cond) {
            assert_eq!(tree.predict(&[*v]), *c);
        }
    }

    #[test]
    fn thresholds_lie_between_training_values() {
        let mut r = rng::stream(5, &[]);
        let n = 80;
        let x: Vec<f64> = (0..n * 2).map(|_| r.random::<f64>()).collect();
        let cond: Vec<u8> = (0..n).map(|i| u8::from(x[2 * i] + 0.3 * x[2 * i + 1] > 0.6)).collect();
        let data = Dataset::new(cond, x, vec!["a".into(), "b".into()]).unwrap();
        let rows: Vec<usize> = (0..n).collect();
        let tree = grow(&data, &presort(&data, &rows), &vec![1; n], 1, &mut r);
        for node in tree.nodes() {
            if let Node::Split { feature, threshold, .. } = node {
                let below = (0..n).filter(|&i| data.value(i, *feature) < *threshold).count();
                let above = (0..n).filter(|&i| data.value(i, *feature) > *threshold).count();
                assert!(below > 0 && above > 0);
            }
        }
        // Fully grown on distinct values: every training row is recovered.
        for i in 0..n {
            assert_eq!(tree.predict(data.row(i)), data.condition()[i]);
        }
    }

    #[test]
    fn profile_agrees_with_prediction() {
        let mut r = rng::stream(8, &[]);
        let n = 60;
        let x: Vec<f64> = (0..n * 3).map(|_| r.random::<f64>()).collect();
        let cond: Vec<u8> = (0..n).map(|_| r.random_range(0..2)).collect();
        let data = Dataset::new(cond, x, vec!["a".into(), "b".into(), "c".into()]).unwrap();
        let rows: Vec<usize> = (0..n).collect();
        let tree = grow(&data, &presort(&data, &rows), &vec![1; n], 1, &mut r);
        for j in 0..3 {
            let mut t = Vec::new();
            tree.thresholds_on(j, &mut t);
            t.sort_by(f64::total_cmp);
            t.dedup();
            let ranks = tree.ranks_on(j, &t);
            for i in 0..10 {
                let mut segs = Vec::new();
                tree.profile(data.row(i), j, &ranks, t.len() as u32, &mut segs);
                for _ in 0..20 {
                    let v: f64 = r.random::<f64>() * 1.2 - 0.1;
                    let s = t.partition_point(|&b| b < v) as u32;
                    let mut row = data.row(i).to_vec();
                    row[j] = v;
                    let hits: Vec<_> = segs.iter().filter(|(a, b, _)| *a <= s && s <= *b).collect();
                    assert_eq!(hits.len(), 1);
                    assert_eq!(hits[0].2, tree.predict(&row));
                }
            }
        }
    }
}
