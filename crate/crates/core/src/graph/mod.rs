//! Causal DAGs and exact graphical reasoning.
//!
//! A [`Dag`] is immutable once built. Node identity is a case-sensitive
//! string and every query returns nodes in insertion order, so reports built
//! on top of these queries are reproducible.

#[cfg(any(test, feature = "oracle"))]
pub mod brute;
mod dsep;
pub(crate) mod parse;
mod query;

use std::fmt;

use indexmap::IndexSet;
use serde::Serialize;

use crate::error::{Error, Result};

pub use query::{EffectClass, Independence, OracleRelevance};

/// Directed acyclic graph over named nodes, some of which may be hidden.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dag {
    names: IndexSet<String>,
    edges: Vec<(usize, usize)>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    hidden: Vec<bool>,
    topo: Vec<usize>,
}

/// Incremental construction of a [`Dag`]; validation happens in [`DagBuilder::build`].
#[derive(Debug, Default, Clone)]
pub struct DagBuilder {
    names: IndexSet<String>,
    edges: Vec<(usize, usize)>,
    hidden: Vec<String>,
}

pub(crate) fn validate_name(name: &str) -> Result<()> {
    if name.is_empty()
        || name.chars().any(|c| c.is_whitespace() || matches!(c, ',' | ':' | '#' | '{' | '}' | '='))
        || name.contains("->")
    {
        return Err(Error::invalid(format!("invalid node name `{name}`")));
    }
    Ok(())
}

impl DagBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    fn intern(&mut self, name: &str) -> usize {
        match self.names.get_index_of(name) {
            Some(i) => i,
            None => self.names.insert_full(name.to_owned()).0,
        }
    }

    /// Declares a node; declaring an existing node is a no-op.
    pub fn node(mut self, name: &str) -> Self {
        self.intern(name);
        self
    }

    pub fn edge(mut self, tail: &str, head: &str) -> Self {
        let t = self.intern(tail);
        let h = self.intern(head);
        self.edges.push((t, h));
        self
    }

    pub fn hidden(mut self, name: &str) -> Self {
        self.hidden.push(name.to_owned());
        self
    }

    pub fn build(self) -> Result<Dag> {
        for name in &self.names {
            validate_name(name)?;
        }
        let n = self.names.len();
        let mut parents = vec![Vec::new(); n];
        let mut children = vec![Vec::new(); n];
        for &(t, h) in &self.edges {
            if t == h {
                return Err(Error::invalid(format!(
                    "self-loop on `{}`",
                    self.names[t]
                )));
            }
            if children[t].contains(&h) {
                return Err(Error::invalid(format!(
                    "duplicate edge `{} -> {}`",
                    self.names[t], self.names[h]
                )));
            }
            children[t].push(h);
            parents[h].push(t);
        }
        let mut hidden = vec![false; n];
        for name in &self.hidden {
            let i = self
                .names
                .get_index_of(name.as_str())
                .ok_or_else(|| Error::UnknownNode(name.clone()))?;
            hidden[i] = true;
        }
        let topo = topological_order(&self.names, &parents, &children)?;
        Ok(Dag {
            names: self.names,
            edges: self.edges,
            parents,
            children,
            hidden,
            topo,
        })
    }
}

/// Kahn's algorithm; ties are resolved by insertion order.
fn topological_order(
    names: &IndexSet<String>,
    parents: &[Vec<usize>],
    children: &[Vec<usize>],
) -> Result<Vec<usize>> {
    let n = names.len();
    let mut indegree: Vec<usize> = parents.iter().map(Vec::len).collect();
    let mut ready: std::collections::BTreeSet<usize> =
        (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(v) = ready.pop_first() {
        order.push(v);
        for &c in &children[v] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.insert(c);
            }
        }
    }
    if order.len() < n {
        let stuck = (0..n).find(|&i| indegree[i] > 0).unwrap_or(0);
        return Err(Error::Cycle(names[stuck].clone()));
    }
    Ok(order)
}

impl Dag {
    pub fn builder() -> DagBuilder {
        DagBuilder::new()
    }

    /// Builds a DAG from `(tail, head)` pairs plus an optional hidden set.
    pub fn from_edges(edges: &[(&str, &str)], hidden: &[&str]) -> Result<Dag> {
        let mut b = DagBuilder::new();
        for (t, h) in edges {
            b = b.edge(t, h);
        }
        for h in hidden {
            b = b.hidden(h);
        }
        b.build()
    }

    /// Parses the line-oriented DAG text format.
    ///
    /// ```text
    /// # comment
    /// S -> X1
    /// X1 -> X2
    /// nodes: X3          # isolated nodes
    /// hidden: H
    /// ```
    ///
    /// `condition:`, `paradigm:` and `mech:` lines belong to the SEM fixture
    /// format and are skipped, so every SEM fixture is also a DAG file.
    pub fn parse(text: &str) -> Result<Dag> {
        parse::parse_dag(text)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> + '_ {
        self.names.iter().map(String::as_str)
    }

    pub fn name(&self, idx: usize) -> &str {
        &self.names[idx]
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.names
            .get_index_of(name)
            .ok_or_else(|| Error::UnknownNode(name.to_owned()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.names.contains(name)
    }

    /// Edges in insertion order, as node indices.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn parents(&self, idx: usize) -> &[usize] {
        &self.parents[idx]
    }

    pub fn children(&self, idx: usize) -> &[usize] {
        &self.children[idx]
    }

    pub fn has_edge(&self, tail: usize, head: usize) -> bool {
        self.children[tail].contains(&head)
    }

    pub fn is_hidden(&self, idx: usize) -> bool {
        self.hidden[idx]
    }

    pub fn hidden_names(&self) -> impl Iterator<Item = &str> + '_ {
        (0..self.len())
            .filter(|&i| self.hidden[i])
            .map(|i| self.name(i))
    }

    /// Observable nodes in insertion order.
    pub fn observed_names(&self) -> impl Iterator<Item = &str> + '_ {
        (0..self.len())
            .filter(|&i| !self.hidden[i])
            .map(|i| self.name(i))
    }

    /// A topological order (parents before children, ties by insertion order).
    pub fn topological_order(&self) -> &[usize] {
        &self.topo
    }

    /// Strict descendants of `idx`.
    pub fn descendants(&self, idx: usize) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        let mut stack: Vec<usize> = self.children[idx].clone();
        while let Some(v) = stack.pop() {
            if !seen[v] {
                seen[v] = true;
                stack.extend_from_slice(&self.children[v]);
            }
        }
        seen
    }

    /// Ancestors of every node in `set`, including the members themselves.
    pub fn ancestors_of_set(&self, set: &[bool]) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        let mut stack: Vec<usize> = (0..self.len()).filter(|&i| set[i]).collect();
        while let Some(v) = stack.pop() {
            if !seen[v] {
                seen[v] = true;
                stack.extend_from_slice(&self.parents[v]);
            }
        }
        seen
    }

    pub(crate) fn resolve_set<I, S>(&self, names: I) -> Result<Vec<bool>>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut mask = vec![false; self.len()];
        for name in names {
            mask[self.index_of(name.as_ref())?] = true;
        }
        Ok(mask)
    }

    /// Renders the DAG back into the text format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut touched = vec![false; self.len()];
        for &(t, h) in &self.edges {
            touched[t] = true;
            touched[h] = true;
            out.push_str(&format!("{} -> {}\n", self.name(t), self.name(h)));
        }
        let isolated: Vec<&str> = (0..self.len())
            .filter(|&i| !touched[i])
            .map(|i| self.name(i))
            .collect();
        if !isolated.is_empty() {
            out.push_str(&format!("nodes: {}\n", isolated.join(", ")));
        }
        let hidden: Vec<&str> = self.hidden_names().collect();
        if !hidden.is_empty() {
            out.push_str(&format!("hidden: {}\n", hidden.join(", ")));
        }
        out
    }
}

impl fmt::Display for Dag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Serializable edge-list view, used when echoing a graph into reports.
#[derive(Debug, Clone, Serialize)]
pub struct DagSummary {
    pub nodes: Vec<String>,
    pub edges: Vec<(String, String)>,
    pub hidden: Vec<String>,
}

impl From<&Dag> for DagSummary {
    fn from(dag: &Dag) -> Self {
        DagSummary {
            nodes: dag.names().map(str::to_owned).collect(),
            edges: dag
                .edges()
                .iter()
                .map(|&(t, h)| (dag.name(t).to_owned(), dag.name(h).to_owned()))
                .collect(),
            hidden: dag.hidden_names().map(str::to_owned).collect(),
        }
    }
}
