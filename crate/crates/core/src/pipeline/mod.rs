//! Encoding and decoding relevance across subjects, group aggregation, and
//! the causal interpretation rules.

mod paradigm;
mod partition;
mod relevance;
mod report;
mod rules;

pub use paradigm::Paradigm;
pub use partition::{partition, FeatureDecision, FeaturePartition};
pub use relevance::{
    decoding_relevance, encoding_relevance, group_aggregate, DecodingRelevance, GroupDecision, RelevanceDecision,
    RelevanceMatrix, Side, Thresholds,
};
pub use report::{
    render_table, run_analysis, AnalysisConfig, CausalReport, DecodingGate, SideResult, CHANCE_PE, SCHEMA_VERSION,
};
pub use rules::{
    combined_inference, interpret, CombinedStatement, FeatureStatements, Interpretation, RuleId, RuleScope, Statement,
    RESPONSE_CAVEAT,
};
