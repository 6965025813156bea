//! Structural-equation sampler over a [`Dag`].
//!
//! Seeding discipline: a dataset drawn with seed `s` takes each node's noise
//! from the stream `(s, NODE, hash(name))`, and subject `k` of a cohort uses
//! the base seed `derive(s, SUBJECT, k)`. Streams are keyed by node *name*,
//! so reordering declarations or evaluating nodes in another valid order
//! leaves every sampled column unchanged.

mod dataset;
mod parse;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Dag;
use crate::pipeline::Paradigm;
use crate::rng::{self, tag};

pub use dataset::Dataset;

/// Generating mechanism of a single node.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Mechanism {
    /// `x = Σ w·parent + N(0, sd²)`
    LinearGaussian { weights: Vec<(String, f64)>, sd: f64 },
    /// `x = Σ w·parent² + N(0, sd²)`
    Quadratic { weights: Vec<(String, f64)>, sd: f64 },
    /// Root node drawn as Bernoulli(p), encoded 0/1.
    BernoulliRoot { p: f64 },
    /// `x ~ Bernoulli(σ(Σ w·parent + bias))`, encoded 0/1.
    LogisticSink { weights: Vec<(String, f64)>, bias: f64 },
}

impl Mechanism {
    fn weights(&self) -> &[(String, f64)] {
        match self {
            Mechanism::LinearGaussian { weights, .. }
            | Mechanism::Quadratic { weights, .. }
            | Mechanism::LogisticSink { weights, .. } => weights,
            Mechanism::BernoulliRoot { .. } => &[],
        }
    }

    fn is_binary(&self) -> bool {
        matches!(self, Mechanism::BernoulliRoot { .. } | Mechanism::LogisticSink { .. })
    }
}

/// Default weight magnitude range and noise level for unspecified mechanisms.
pub const DEFAULT_WEIGHT_RANGE: (f64, f64) = (0.6, 1.0);
pub const DEFAULT_NOISE_SD: f64 = 1.0;

/// Deterministic default weight for the edge `parent -> node`: magnitude
/// uniform on [`DEFAULT_WEIGHT_RANGE`], random sign.
pub fn default_weight(node: &str, parent: &str) -> f64 {
    let mut r = rng::stream(0, &[tag::WEIGHT, rng::name_id(node), rng::name_id(parent)]);
    let (lo, hi) = DEFAULT_WEIGHT_RANGE;
    let magnitude = r.random_range(lo..hi);
    if r.random::<bool>() {
        magnitude
    } else {
        -magnitude
    }
}

/// A DAG plus one mechanism per node and a designated condition node.
#[derive(Debug, Clone, PartialEq)]
pub struct Sem {
    dag: Dag,
    mechanisms: Vec<Mechanism>,
    condition: usize,
    paradigm: Paradigm,
    features: Vec<usize>,
}

impl Sem {
    /// Validates mechanisms against the graph.
    ///
    /// `mechanisms` must contain exactly one entry per node.
    pub fn new(
        dag: Dag,
        mechanisms: Vec<(String, Mechanism)>,
        condition: &str,
        paradigm: Paradigm,
    ) -> Result<Sem> {
        let mut slots: Vec<Option<Mechanism>> = vec![None; dag.len()];
        for (name, mech) in mechanisms {
            let i = dag.index_of(&name)?;
            if slots[i].is_some() {
                return Err(Error::invalid(format!("node `{name}` has two mechanisms")));
            }
            slots[i] = Some(mech);
        }
        let mechanisms: Vec<Mechanism> = slots
            .into_iter()
            .enumerate()
            .map(|(i, m)| {
                m.ok_or_else(|| Error::invalid(format!("node `{}` has no mechanism", dag.name(i))))
            })
            .collect::<Result<_>>()?;

        for (i, mech) in mechanisms.iter().enumerate() {
            check_mechanism(&dag, i, mech)?;
        }

        let ci = dag.index_of(condition)?;
        if dag.is_hidden(ci) {
            return Err(Error::invalid(format!("condition `{condition}` is hidden")));
        }
        match (paradigm, &mechanisms[ci]) {
            (Paradigm::Stimulus, Mechanism::BernoulliRoot { .. }) => {}
            (Paradigm::Response, Mechanism::LogisticSink { .. }) => {
                if !dag.children(ci).is_empty() {
                    return Err(Error::invalid(format!(
                        "response condition `{condition}` must be a sink"
                    )));
                }
            }
            (Paradigm::Stimulus, _) => {
                return Err(Error::invalid(format!(
                    "stimulus condition `{condition}` needs a bernoulli root mechanism"
                )))
            }
            (Paradigm::Response, _) => {
                return Err(Error::invalid(format!(
                    "response condition `{condition}` needs a logistic sink mechanism"
                )))
            }
        }
        let features: Vec<usize> = (0..dag.len())
            .filter(|&i| i != ci && !dag.is_hidden(i))
            .collect();
        for &f in &features {
            if mechanisms[f].is_binary() {
                return Err(Error::invalid(format!(
                    "feature `{}` must have a real-valued mechanism",
                    dag.name(f)
                )));
            }
        }
        if features.is_empty() {
            return Err(Error::invalid("model has no observable feature nodes"));
        }
        Ok(Sem {
            dag,
            mechanisms,
            condition: ci,
            paradigm,
            features,
        })
    }

    /// Fills every node without an explicit mechanism with the defaults:
    /// the condition gets `bernoulli(p=0.5)` (stimulus) or a logistic sink
    /// with default weights and zero bias (response); any other node a linear
    /// Gaussian mechanism with [`default_weight`]s and unit noise.
    pub fn with_defaults(
        dag: Dag,
        explicit: Vec<(String, Mechanism)>,
        condition: &str,
        paradigm: Paradigm,
    ) -> Result<Sem> {
        let mut all = explicit;
        for i in 0..dag.len() {
            let name = dag.name(i);
            if all.iter().any(|(n, _)| n == name) {
                continue;
            }
            let weights: Vec<(String, f64)> = dag
                .parents(i)
                .iter()
                .map(|&p| (dag.name(p).to_owned(), default_weight(name, dag.name(p))))
                .collect();
            let mech = if name == condition {
                match paradigm {
                    Paradigm::Stimulus => Mechanism::BernoulliRoot { p: 0.5 },
                    Paradigm::Response => Mechanism::LogisticSink { weights, bias: 0.0 },
                }
            } else {
                Mechanism::LinearGaussian {
                    weights,
                    sd: DEFAULT_NOISE_SD,
                }
            };
            all.push((name.to_owned(), mech));
        }
        Sem::new(dag, all, condition, paradigm)
    }

    /// Parses a SEM fixture: the DAG text format plus `condition:`,
    /// `paradigm:` and `mech:` lines.
    ///
    /// ```text
    /// condition: S
    /// paradigm: stimulus
    /// S -> X1
    /// mech: X1 = linear(S:0.8; sd=1.0)
    /// ```
    pub fn parse(text: &str) -> Result<Sem> {
        parse::parse_sem(text)
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn condition(&self) -> &str {
        self.dag.name(self.condition)
    }

    pub fn paradigm(&self) -> Paradigm {
        self.paradigm
    }

    pub fn mechanism(&self, node: &str) -> Result<&Mechanism> {
        Ok(&self.mechanisms[self.dag.index_of(node)?])
    }

    /// Observable feature names in declaration order.
    pub fn feature_names(&self) -> Vec<String> {
        self.features
            .iter()
            .map(|&i| self.dag.name(i).to_owned())
            .collect()
    }

    /// Draws `n` iid rows.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Dataset> {
        if n < 2 {
            return Err(Error::invalid(format!("need at least 2 samples, got {n}")));
        }
        let mut values: Vec<Vec<f64>> = vec![Vec::new(); self.dag.len()];
        for &v in self.dag.topological_order() {
            let mut stream = rng::stream(seed, &[tag::NODE, rng::name_id(self.dag.name(v))]);
            let mech = &self.mechanisms[v];
            let parent_values: Vec<(&[f64], f64)> = mech
                .weights()
                .iter()
                .map(|(p, w)| {
                    let pi = self.dag.index_of(p).expect("validated parent");
                    (values[pi].as_slice(), *w)
                })
                .collect();
            let linear = |i: usize, square: bool| -> f64 {
                parent_values
                    .iter()
                    .map(|(col, w)| if square { w * col[i] * col[i] } else { w * col[i] })
                    .sum()
            };
            let col: Vec<f64> = match mech {
                Mechanism::LinearGaussian { sd, .. } => (0..n)
                    .map(|i| {
                        let z: f64 = StandardNormal.sample(&mut stream);
                        linear(i, false) + sd * z
                    })
                    .collect(),
                Mechanism::Quadratic { sd, .. } => (0..n)
                    .map(|i| {
                        let z: f64 = StandardNormal.sample(&mut stream);
                        linear(i, true) + sd * z
                    })
                    .collect(),
                Mechanism::BernoulliRoot { p } => (0..n)
                    .map(|_| f64::from(u8::from(stream.random::<f64>() < *p)))
                    .collect(),
                Mechanism::LogisticSink { bias, .. } => (0..n)
                    .map(|i| {
                        let prob = 1.0 / (1.0 + (-(linear(i, false) + bias)).exp());
                        f64::from(u8::from(stream.random::<f64>() < prob))
                    })
                    .collect(),
            };
            values[v] = col;
        }
        let condition: Vec<u8> = values[self.condition].iter().map(|&c| c as u8).collect();
        let d = self.features.len();
        let mut features = Vec::with_capacity(n * d);
        for i in 0..n {
            features.extend(self.features.iter().map(|&f| values[f][i]));
        }
        Dataset::new(condition, features, self.feature_names())
    }

    /// Independent datasets for `n_subjects` subjects, subject `k` sampled
    /// with the derived seed `(seed, SUBJECT, k)`.
    pub fn subject_cohort(&self, n_subjects: usize, n_per_subject: usize, seed: u64) -> Result<Vec<Dataset>> {
        if n_subjects == 0 {
            return Err(Error::invalid("cohort needs at least one subject"));
        }
        (0..n_subjects)
            .into_par_iter()
            .map(|k| self.sample(n_per_subject, subject_seed(seed, k)))
            .collect()
    }
}

/// Seed used for subject `k` of a cohort drawn with base seed `seed`.
pub fn subject_seed(seed: u64, k: usize) -> u64 {
    rng::derive_seed(seed, &[tag::SUBJECT, k as u64])
}

fn check_mechanism(dag: &Dag, i: usize, mech: &Mechanism) -> Result<()> {
    let name = dag.name(i);
    let parents: Vec<&str> = dag.parents(i).iter().map(|&p| dag.name(p)).collect();
    let keyed: Vec<&str> = mech.weights().iter().map(|(p, _)| p.as_str()).collect();
    let mismatch = keyed.len() != parents.len()
        || parents.iter().any(|p| !keyed.contains(p))
        || keyed.iter().enumerate().any(|(k, p)| keyed[..k].contains(p));
    if mismatch && !matches!(mech, Mechanism::BernoulliRoot { .. }) {
        return Err(Error::invalid(format!(
            "mechanism of `{name}` is keyed by {{{}}} but its parents are {{{}}}",
            keyed.join(", "),
            parents.join(", ")
        )));
    }
    if mech.weights().iter().any(|(_, w)| !w.is_finite()) {
        return Err(Error::invalid(format!("non-finite weight in mechanism of `{name}`")));
    }
    match mech {
        Mechanism::LinearGaussian { sd, .. } | Mechanism::Quadratic { sd, .. } => {
            if !(*sd > 0.0 && sd.is_finite()) {
                return Err(Error::invalid(format!("noise sd of `{name}` must be positive")));
            }
        }
        Mechanism::BernoulliRoot { p } => {
            if !parents.is_empty() {
                return Err(Error::invalid(format!("bernoulli node `{name}` must be a root")));
            }
            if !(*p > 0.0 && *p < 1.0) {
                return Err(Error::invalid(format!("bernoulli p of `{name}` must lie in (0, 1)")));
            }
        }
        Mechanism::LogisticSink { bias, .. } => {
            if !bias.is_finite() {
                return Err(Error::invalid(format!("non-finite bias for `{name}`")));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pearson(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len() as f64;
        let ma = a.iter().sum::<f64>() / n;
        let mb = b.iter().sum::<f64>() / n;
        let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
        let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
        let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
        cov / (va * vb).sqrt()
    }

    fn single_edge(weight: f64, sd: f64) -> Sem {
        let dag = Dag::from_edges(&[("S", "X1")], &[]).unwrap();
        Sem::new(
            dag,
            vec![
                ("S".into(), Mechanism::BernoulliRoot { p: 0.5 }),
                (
                    "X1".into(),
                    Mechanism::LinearGaussian {
                        weights: vec![("S".into(), weight)],
                        sd,
                    },
                ),
            ],
            "S",
            Paradigm::Stimulus,
        )
        .unwrap()
    }

    #[test]
    fn zero_weight_gives_independence() {
        let ds = single_edge(0.0, 1.0).sample(10_000, 3).unwrap();
        let r = pearson(&ds.condition_f64(), &ds.column(0));
        assert!(r.abs() < 0.05, "corr {r}");
    }

    #[test]
    fn tiny_noise_gives_near_perfect_correlation() {
        let ds = single_edge(1.0, 1e-6).sample(1000, 3).unwrap();
        let r = pearson(&ds.condition_f64(), &ds.column(0));
        assert!(r > 0.999, "corr {r}");
    }

    #[test]
    fn sampling_is_deterministic() {
        let sem = single_edge(0.8, 1.0);
        assert_eq!(sem.sample(100, 42).unwrap(), sem.sample(100, 42).unwrap());
        assert_ne!(sem.sample(100, 42).unwrap(), sem.sample(100, 43).unwrap());
    }

    #[test]
    fn class_balance_at_half() {
        // sd of the fraction is about 0.0035; tolerance is over four sd.
        let ds = single_edge(0.8, 1.0).sample(20_000, 11).unwrap();
        let frac = ds.condition().iter().filter(|&&c| c == 1).count() as f64 / 20_000.0;
        assert!((frac - 0.5).abs() < 0.015, "fraction {frac}");
    }

    #[test]
    fn zero_noise_is_rejected() {
        let dag = Dag::from_edges(&[("S", "X1")], &[]).unwrap();
        let err = Sem::new(
            dag,
            vec![
                ("S".into(), Mechanism::BernoulliRoot { p: 0.5 }),
                (
                    "X1".into(),
                    Mechanism::LinearGaussian {
                        weights: vec![("S".into(), 1.0)],
                        sd: 0.0,
                    },
                ),
            ],
            "S",
            Paradigm::Stimulus,
        );
        assert!(err.is_err());
    }

    #[test]
    fn weights_must_match_parents() {
        let dag = Dag::from_edges(&[("S", "X1"), ("X2", "X1")], &[]).unwrap();
        let err = Sem::with_defaults(
            dag,
            vec![(
                "X1".into(),
                Mechanism::LinearGaussian {
                    weights: vec![("S".into(), 1.0)],
                    sd: 1.0,
                },
            )],
            "S",
            Paradigm::Stimulus,
        )
        .unwrap_err();
        assert!(err.to_string().contains("parents"), "{err}");
    }

    #[test]
    fn condition_mechanism_must_match_paradigm() {
        let dag = Dag::from_edges(&[("S", "X1")], &[]).unwrap();
        assert!(Sem::with_defaults(dag.clone(), vec![], "S", Paradigm::Response).is_err());
        assert!(Sem::with_defaults(dag.clone(), vec![], "X1", Paradigm::Stimulus).is_err());
        let resp = Dag::from_edges(&[("X1", "R")], &[]).unwrap();
        let sem = Sem::with_defaults(resp, vec![], "R", Paradigm::Response).unwrap();
        let ds = sem.sample(500, 1).unwrap();
        assert_eq!(ds.feature_names(), ["X1"]);
    }

    #[test]
    fn default_weights_lie_in_range() {
        for (a, b) in [("X1", "S"), ("X2", "X1"), ("Y", "Z"), ("Q", "R")] {
            let w = default_weight(a, b).abs();
            assert!((0.6..1.0).contains(&w));
        }
    }

    #[test]
    fn hidden_nodes_are_dropped() {
        let dag = Dag::from_edges(&[("S", "X1"), ("H", "X1"), ("H", "X2")], &["H"]).unwrap();
        let sem = Sem::with_defaults(dag, vec![], "S", Paradigm::Stimulus).unwrap();
        let ds = sem.sample(50, 0).unwrap();
        assert_eq!(ds.feature_names(), ["X1", "X2"]);
    }

    #[test]
    fn cohort_seeds() {
        let sem = single_edge(0.8, 1.0);
        let cohort = sem.subject_cohort(3, 40, 9).unwrap();
        assert_eq!(cohort.len(), 3);
        assert_ne!(cohort[0], cohort[1]);
        let single = sem.subject_cohort(1, 40, 9).unwrap();
        assert_eq!(single[0], sem.sample(40, subject_seed(9, 0)).unwrap());
        assert_eq!(single[0], cohort[0]);
        assert!(sem.subject_cohort(0, 40, 9).is_err());
    }
}
