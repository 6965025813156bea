//! Literal d-separation by path enumeration.
//!
//! Enumerates every undirected simple path and applies the blocking
//! definition node by node. Exponential, and only compiled for tests and the
//! `oracle` feature; it shares nothing with the reachability walk except the
//! edge list.

use super::Dag;

fn descendants_or_self_in(dag: &Dag, v: usize, z: &[bool]) -> bool {
    if z[v] {
        return true;
    }
    let mut seen = vec![false; dag.len()];
    let mut stack = vec![v];
    while let Some(u) = stack.pop() {
        for &c in dag.children(u) {
            if z[c] {
                return true;
            }
            if !seen[c] {
                seen[c] = true;
                stack.push(c);
            }
        }
    }
    false
}

fn path_blocked(dag: &Dag, path: &[usize], z: &[bool]) -> bool {
    path.windows(3).any(|w| {
        let (prev, mid, next) = (w[0], w[1], w[2]);
        let head_to_head = dag.has_edge(prev, mid) && dag.has_edge(next, mid);
        if head_to_head {
            !descendants_or_self_in(dag, mid, z)
        } else {
            z[mid]
        }
    })
}

/// All undirected simple paths from `a` to `b`.
pub fn undirected_paths(dag: &Dag, a: usize, b: usize) -> Vec<Vec<usize>> {
    fn walk(dag: &Dag, b: usize, path: &mut Vec<usize>, on: &mut [bool], out: &mut Vec<Vec<usize>>) {
        let v = *path.last().unwrap();
        if v == b {
            out.push(path.clone());
            return;
        }
        let neighbours: Vec<usize> = dag
            .parents(v)
            .iter()
            .chain(dag.children(v))
            .copied()
            .collect();
        for u in neighbours {
            if !on[u] {
                on[u] = true;
                path.push(u);
                walk(dag, b, path, on, out);
                path.pop();
                on[u] = false;
            }
        }
    }
    let mut out = Vec::new();
    let mut on = vec![false; dag.len()];
    on[a] = true;
    walk(dag, b, &mut vec![a], &mut on, &mut out);
    out
}

/// Brute-force d-separation of node indices `a` and `b` by the mask `z`.
pub fn is_d_separated(dag: &Dag, a: usize, b: usize, z: &[bool]) -> bool {
    undirected_paths(dag, a, b)
        .iter()
        .all(|p| path_blocked(dag, p, z))
}
