use serde::Serialize;

use super::relevance::RelevanceDecision;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FeatureDecision {
    pub feature: String,
    pub encoding: RelevanceDecision,
    pub decoding: RelevanceDecision,
}

/// Features sorted by their encoding and decoding relevance.
///
/// The five sets are disjoint and cover every feature; a feature with any
/// indeterminate decision goes to `indeterminate`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FeaturePartition {
    pub enc_dec: Vec<String>,
    pub enc_only: Vec<String>,
    pub dec_only: Vec<String>,
    pub neither: Vec<String>,
    pub indeterminate: Vec<String>,
    pub decisions: Vec<FeatureDecision>,
}

impl FeaturePartition {
    /// Features relevant in encoding, whatever their decoding decision.
    pub fn encoding_relevant(&self) -> Vec<&str> {
        self.decisions
            .iter()
            .filter(|d| d.encoding == RelevanceDecision::Relevant)
            .map(|d| d.feature.as_str())
            .collect()
    }

    pub fn features(&self) -> impl Iterator<Item = &str> + '_ {
        self.decisions.iter().map(|d| d.feature.as_str())
    }
}

/// Partitions features given per-feature encoding and decoding decisions,
/// both listed as `(feature, decision)` in the same feature order.
pub fn partition(
    encoding: &[(String, RelevanceDecision)],
    decoding: &[(String, RelevanceDecision)],
) -> Result<FeaturePartition> {
    if encoding.len() != decoding.len() || encoding.iter().zip(decoding).any(|(e, d)| e.0 != d.0) {
        return Err(Error::invalid(format!(
            "encoding features {:?} do not match decoding features {:?}",
            encoding.iter().map(|e| &e.0).collect::<Vec<_>>(),
            decoding.iter().map(|d| &d.0).collect::<Vec<_>>()
        )));
    }
    use RelevanceDecision::*;
    let mut p = FeaturePartition {
        enc_dec: Vec::new(),
        enc_only: Vec::new(),
        dec_only: Vec::new(),
        neither: Vec::new(),
        indeterminate: Vec::new(),
        decisions: Vec::new(),
    };
    for ((name, enc), (_, dec)) in encoding.iter().zip(decoding) {
        let set = match (enc, dec) {
            (Relevant, Relevant) => &mut p.enc_dec,
            (Relevant, Irrelevant) => &mut p.enc_only,
            (Irrelevant, Relevant) => &mut p.dec_only,
            (Irrelevant, Irrelevant) => &mut p.neither,
            _ => &mut p.indeterminate,
        };
        set.push(name.clone());
        p.decisions.push(FeatureDecision {
            feature: name.clone(),
            encoding: *enc,
            decoding: *dec,
        });
    }
    Ok(p)
}
