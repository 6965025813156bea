use serde::Serialize;

use super::Dag;
use crate::error::{Error, Result};

/// Position of a node downstream of a cause, relative to an observed set.
///
/// Read dually, `DirectEffect` of `c` means `c` is a direct cause.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EffectClass {
    DirectEffect,
    IndirectEffect,
    NonEffect,
}

/// Ground-truth relevance of one feature under faithfulness.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleRelevance {
    pub feature: String,
    /// Not d-separated from the condition by the empty set.
    pub encoding: bool,
    /// Not d-separated from the condition by all remaining features.
    pub decoding: bool,
}

/// `a ⫫ b | given`, as implied by d-separation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Independence {
    pub a: String,
    pub b: String,
    pub given: Vec<String>,
}

impl std::fmt::Display for Independence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} _||_ {} | {{{}}}", self.a, self.b, self.given.join(", "))
    }
}

impl Dag {
    /// Every directed path from `a` to `b`, children visited in insertion order.
    pub fn directed_paths(&self, a: &str, b: &str) -> Result<Vec<Vec<String>>> {
        let ai = self.index_of(a)?;
        let bi = self.index_of(b)?;
        if ai == bi {
            return Err(Error::invalid(format!("endpoints coincide (`{a}`)")));
        }
        let mut out = Vec::new();
        let mut path = vec![ai];
        self.extend_paths(bi, &mut path, &mut out);
        Ok(out
            .into_iter()
            .map(|p| p.into_iter().map(|i| self.name(i).to_owned()).collect())
            .collect())
    }

    fn extend_paths(&self, target: usize, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let v = *path.last().unwrap();
        if v == target {
            out.push(path.clone());
            return;
        }
        for &c in self.children(v) {
            path.push(c);
            self.extend_paths(target, path, out);
            path.pop();
        }
    }

    /// Classifies `x` as a direct, indirect or non-effect of `c` wrt `observed`.
    ///
    /// A path counts as direct when every intermediate node lies outside the
    /// observed set; hidden nodes are simply unobserved.
    pub fn classify_effect<I, S>(&self, c: &str, x: &str, observed: I) -> Result<EffectClass>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let ci = self.index_of(c)?;
        let xi = self.index_of(x)?;
        let obs = self.resolve_set(observed)?;
        if !obs[ci] || !obs[xi] {
            return Err(Error::invalid(format!(
                "`{c}` and `{x}` must both belong to the observed set"
            )));
        }
        if ci == xi {
            return Err(Error::invalid(format!("endpoints coincide (`{c}`)")));
        }
        Ok(self.classify_idx(ci, xi, &obs))
    }

    pub(crate) fn classify_idx(&self, ci: usize, xi: usize, obs: &[bool]) -> EffectClass {
        if !self.descendants(ci)[xi] {
            return EffectClass::NonEffect;
        }
        // Walk only through unobserved intermediates.
        let mut seen = vec![false; self.len()];
        let mut stack = vec![ci];
        while let Some(v) = stack.pop() {
            for &u in self.children(v) {
                if u == xi {
                    return EffectClass::DirectEffect;
                }
                if !obs[u] && !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        EffectClass::IndirectEffect
    }

    /// Encoding and decoding relevance each feature would have under an
    /// independence oracle.
    pub fn oracle_relevance<S: AsRef<str>>(
        &self,
        condition: &str,
        features: &[S],
    ) -> Result<Vec<OracleRelevance>> {
        let ci = self.index_of(condition)?;
        let fm = self.resolve_set(features)?;
        if fm[ci] {
            return Err(Error::invalid(format!(
                "condition `{condition}` listed among the features"
            )));
        }
        if self.is_hidden(ci) {
            return Err(Error::invalid(format!("condition `{condition}` is hidden")));
        }
        for f in features {
            let i = self.index_of(f.as_ref())?;
            if self.is_hidden(i) {
                return Err(Error::invalid(format!(
                    "feature `{}` is hidden and cannot be observed",
                    f.as_ref()
                )));
            }
        }
        let none = vec![false; self.len()];
        let marginal = self.active_reachable(ci, &none);
        let mut out = Vec::with_capacity(features.len());
        for f in features {
            let fi = self.index_of(f.as_ref())?;
            let mut rest = fm.clone();
            rest[fi] = false;
            out.push(OracleRelevance {
                feature: f.as_ref().to_owned(),
                encoding: marginal[fi],
                decoding: !self.d_separated_idx(ci, fi, &rest),
            });
        }
        Ok(out)
    }

    /// All `(a, b, Z)` with `a`, `b`, `Z` drawn from `observed` such that `Z`
    /// d-separates `a` and `b`. Pairs follow the order of `observed`; subsets
    /// are enumerated in increasing bitmask order.
    pub fn implied_independencies<S: AsRef<str>>(&self, observed: &[S]) -> Result<Vec<Independence>> {
        let idx: Vec<usize> = observed
            .iter()
            .map(|s| self.index_of(s.as_ref()))
            .collect::<Result<_>>()?;
        for (k, i) in idx.iter().enumerate() {
            if idx[..k].contains(i) {
                return Err(Error::invalid(format!(
                    "`{}` listed twice in the observed set",
                    self.name(*i)
                )));
            }
        }
        if idx.len() > 24 {
            return Err(Error::invalid("observed set too large to enumerate"));
        }
        let mut out = Vec::new();
        for p in 0..idx.len() {
            for q in p + 1..idx.len() {
                let others: Vec<usize> = (0..idx.len()).filter(|&k| k != p && k != q).collect();
                for mask in 0u32..(1u32 << others.len()) {
                    let mut z = vec![false; self.len()];
                    let mut given = Vec::new();
                    for (bit, &k) in others.iter().enumerate() {
                        if mask >> bit & 1 == 1 {
                            z[idx[k]] = true;
                            given.push(self.name(idx[k]).to_owned());
                        }
                    }
                    if self.d_separated_idx(idx[p], idx[q], &z) {
                        out.push(Independence {
                            a: self.name(idx[p]).to_owned(),
                            b: self.name(idx[q]).to_owned(),
                            given,
                        });
                    }
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mixed() -> Dag {
        Dag::from_edges(&[("S", "X1"), ("X1", "X2"), ("S", "X3"), ("X2", "X3")], &[]).unwrap()
    }

    #[test]
    fn directed_path_enumeration() {
        let chain = Dag::from_edges(&[("X0", "X1"), ("X1", "X2")], &[]).unwrap();
        assert_eq!(chain.directed_paths("X0", "X2").unwrap(), [["X0", "X1", "X2"]]);
        let mut paths = mixed().directed_paths("S", "X3").unwrap();
        paths.sort();
        assert_eq!(
            paths,
            vec![
                vec!["S", "X1", "X2", "X3"],
                vec!["S", "X3"],
            ]
        );
        let collider = Dag::from_edges(&[("X0", "X1"), ("X2", "X1")], &[]).unwrap();
        assert!(collider.directed_paths("X0", "X2").unwrap().is_empty());
        assert!(collider.directed_paths("X0", "X0").is_err());
        assert!(collider.directed_paths("X0", "Q").is_err());
    }

    #[test]
    fn effect_class_depends_on_observed_set() {
        let dag = Dag::from_edges(&[("C", "X1"), ("X1", "X2")], &[]).unwrap();
        assert_eq!(
            dag.classify_effect("C", "X2", ["C", "X1", "X2"]).unwrap(),
            EffectClass::IndirectEffect
        );
        assert_eq!(
            dag.classify_effect("C", "X2", ["C", "X2"]).unwrap(),
            EffectClass::DirectEffect
        );
        let iso = Dag::builder().edge("C", "X1").node("X2").build().unwrap();
        assert_eq!(
            iso.classify_effect("C", "X2", ["C", "X1", "X2"]).unwrap(),
            EffectClass::NonEffect
        );
        assert!(iso.classify_effect("C", "X2", ["C", "X1"]).is_err());
    }

    #[test]
    fn hidden_mediator_keeps_effect_direct() {
        let dag = Dag::from_edges(&[("S", "H"), ("H", "X")], &["H"]).unwrap();
        assert_eq!(
            dag.classify_effect("S", "X", ["S", "X"]).unwrap(),
            EffectClass::DirectEffect
        );
    }

    #[test]
    fn oracle_relevance_fixtures() {
        let chain = Dag::from_edges(&[("S", "X1"), ("X1", "X2")], &[]).unwrap();
        let r = chain.oracle_relevance("S", &["X1", "X2"]).unwrap();
        assert!(r[0].encoding && r[0].decoding);
        assert!(r[1].encoding && !r[1].decoding);

        let collider = Dag::from_edges(&[("S", "X1"), ("X2", "X1")], &[]).unwrap();
        let r = collider.oracle_relevance("S", &["X1", "X2"]).unwrap();
        assert!(!r[1].encoding && r[1].decoding);

        let r = mixed().oracle_relevance("S", &["X1", "X2", "X3"]).unwrap();
        assert!(r.iter().all(|o| o.encoding && o.decoding));

        assert!(chain.oracle_relevance("S", &["S", "X1"]).is_err());
    }

    #[test]
    fn hidden_nodes_never_condition() {
        // S -> X1 <- H -> X2: X2 only connects to S through the collider X1.
        let dag = Dag::from_edges(&[("S", "X1"), ("H", "X1"), ("H", "X2")], &["H"]).unwrap();
        let r = dag.oracle_relevance("S", &["X1", "X2"]).unwrap();
        assert!(!r[1].encoding && r[1].decoding);
        assert!(dag.oracle_relevance("S", &["X1", "H"]).is_err());
    }

    #[test]
    fn implied_independence_lists() {
        let chain = Dag::from_edges(&[("X0", "X1"), ("X1", "X2")], &[]).unwrap();
        let ind = chain.implied_independencies(&["X0", "X1", "X2"]).unwrap();
        assert_eq!(
            ind,
            vec![Independence {
                a: "X0".into(),
                b: "X2".into(),
                given: vec!["X1".into()]
            }]
        );
        let full = Dag::from_edges(&[("A", "B"), ("B", "C"), ("A", "C")], &[]).unwrap();
        assert!(full.implied_independencies(&["A", "B", "C"]).unwrap().is_empty());
        let two = Dag::builder().node("A").node("B").build().unwrap();
        let ind = two.implied_independencies(&["A", "B"]).unwrap();
        assert_eq!(ind[0].to_string(), "A _||_ B | {}");
    }
}
