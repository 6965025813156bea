//! Reachability-based d-separation.
//!
//! Walks (node, direction) states along active trails: a state records
//! whether the trail entered the node from a child (moving up) or from a
//! parent (moving down). A non-collider blocks when conditioned on; a collider
//! passes only when it or one of its descendants is conditioned on, i.e. when
//! it is an ancestor of the conditioning set.

use super::Dag;
use crate::error::{Error, Result};

#[derive(Clone, Copy)]
enum Dir {
    Up,
    Down,
}

impl Dag {
    /// Nodes connected to `source` by a trail that is active given `z`.
    pub(crate) fn active_reachable(&self, source: usize, z: &[bool]) -> Vec<bool> {
        let n = self.len();
        let anc = self.ancestors_of_set(z);
        let mut visited_up = vec![false; n];
        let mut visited_down = vec![false; n];
        let mut reachable = vec![false; n];
        let mut stack = vec![(source, Dir::Up)];
        while let Some((v, dir)) = stack.pop() {
            let seen = match dir {
                Dir::Up => &mut visited_up[v],
                Dir::Down => &mut visited_down[v],
            };
            if *seen {
                continue;
            }
            *seen = true;
            if !z[v] {
                reachable[v] = true;
            }
            match dir {
                Dir::Up => {
                    if !z[v] {
                        stack.extend(self.parents(v).iter().map(|&p| (p, Dir::Up)));
                        stack.extend(self.children(v).iter().map(|&c| (c, Dir::Down)));
                    }
                }
                Dir::Down => {
                    if !z[v] {
                        stack.extend(self.children(v).iter().map(|&c| (c, Dir::Down)));
                    }
                    if anc[v] {
                        stack.extend(self.parents(v).iter().map(|&p| (p, Dir::Up)));
                    }
                }
            }
        }
        reachable[source] = false;
        reachable
    }

    pub(crate) fn d_separated_idx(&self, a: usize, b: usize, z: &[bool]) -> bool {
        !self.active_reachable(a, z)[b]
    }

    /// True iff every path between `a` and `b` is blocked by `z`.
    pub fn is_d_separated<I, S>(&self, a: &str, b: &str, z: I) -> Result<bool>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let ai = self.index_of(a)?;
        let bi = self.index_of(b)?;
        let zm = self.resolve_set(z)?;
        if ai == bi {
            return Err(Error::invalid(format!("endpoints coincide (`{a}`)")));
        }
        if zm[ai] || zm[bi] {
            return Err(Error::invalid(
                "endpoints must not belong to the conditioning set",
            ));
        }
        Ok(self.d_separated_idx(ai, bi, &zm))
    }

    /// Set version: `A` and `B` are d-separated by `Z` iff every pair is.
    pub fn is_d_separated_sets<S: AsRef<str>>(&self, a: &[S], b: &[S], z: &[S]) -> Result<bool> {
        if a.is_empty() || b.is_empty() {
            return Err(Error::invalid("node sets A and B must be nonempty"));
        }
        let am = self.resolve_set(a)?;
        let bm = self.resolve_set(b)?;
        let zm = self.resolve_set(z)?;
        if (0..self.len()).any(|i| (am[i] && bm[i]) || (am[i] && zm[i]) || (bm[i] && zm[i])) {
            return Err(Error::invalid("node sets must be pairwise disjoint"));
        }
        for ai in (0..self.len()).filter(|&i| am[i]) {
            let reach = self.active_reachable(ai, &zm);
            if (0..self.len()).any(|bi| bm[bi] && reach[bi]) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use crate::graph::Dag;

    fn chain() -> Dag {
        Dag::from_edges(&[("X0", "X1"), ("X1", "X2")], &[]).unwrap()
    }
    fn collider() -> Dag {
        Dag::from_edges(&[("X0", "X1"), ("X2", "X1")], &[]).unwrap()
    }
    fn fork() -> Dag {
        Dag::from_edges(&[("X1", "X0"), ("X1", "X2")], &[]).unwrap()
    }
    fn mixed() -> Dag {
        Dag::from_edges(&[("S", "X1"), ("X1", "X2"), ("S", "X3"), ("X2", "X3")], &[]).unwrap()
    }

    #[test]
    fn three_canonical_junctions() {
        assert!(chain().is_d_separated("X0", "X2", ["X1"]).unwrap());
        assert!(!chain().is_d_separated("X0", "X2", [""; 0]).unwrap());
        assert!(fork().is_d_separated("X0", "X2", ["X1"]).unwrap());
        assert!(!collider().is_d_separated("X0", "X2", ["X1"]).unwrap());
        assert!(collider().is_d_separated("X0", "X2", [""; 0]).unwrap());
    }

    #[test]
    fn collider_child_opens_path_to_stimulus() {
        assert!(!mixed().is_d_separated("S", "X2", ["X1", "X3"]).unwrap());
        assert!(!mixed().is_d_separated("S", "X2", [""; 0]).unwrap());
    }

    #[test]
    fn descendant_of_collider_opens_path() {
        let dag = Dag::from_edges(&[("A", "C"), ("B", "C"), ("C", "D")], &[]).unwrap();
        assert!(dag.is_d_separated("A", "B", [""; 0]).unwrap());
        assert!(!dag.is_d_separated("A", "B", ["D"]).unwrap());
    }

    #[test]
    fn set_queries() {
        assert!(chain().is_d_separated_sets(&["X0"], &["X2"], &["X1"]).unwrap());
        let empty: [&str; 0] = [];
        assert!(!fork().is_d_separated_sets(&["X0"], &["X2"], &empty).unwrap());
        let two = Dag::builder().node("A").node("B").build().unwrap();
        assert!(two.is_d_separated_sets(&["A"], &["B"], &empty).unwrap());
        assert!(chain().is_d_separated_sets(&["X0"], &["X0"], &empty).is_err());
        assert!(chain().is_d_separated_sets(&["X0"], &["X2"], &["X2"]).is_err());
    }

    #[test]
    fn argument_errors() {
        let d = chain();
        assert!(d.is_d_separated("X0", "X0", [""; 0]).is_err());
        assert!(d.is_d_separated("X0", "X2", ["X0"]).is_err());
        assert!(d.is_d_separated("X0", "Nope", [""; 0]).is_err());
        assert!(d.is_d_separated("X0", "X2", ["Nope"]).is_err());
    }
}
