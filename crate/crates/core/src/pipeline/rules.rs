use serde::Serialize;

use super::partition::FeaturePartition;
use super::relevance::RelevanceDecision;
use super::Paradigm;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum RuleId {
    S1,
    S2,
    S3,
    S4,
    S5,
    S6,
    S7,
    S8,
    R1,
    R2,
    R3,
    R4,
    R5,
    R6,
    R7,
    R8,
}

/// Which analyses a rule reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RuleScope {
    Encoding,
    Decoding,
    Combined,
}

impl RuleId {
    pub const ALL: [RuleId; 16] = [
        RuleId::S1,
        RuleId::S2,
        RuleId::S3,
        RuleId::S4,
        RuleId::S5,
        RuleId::S6,
        RuleId::S7,
        RuleId::S8,
        RuleId::R1,
        RuleId::R2,
        RuleId::R3,
        RuleId::R4,
        RuleId::R5,
        RuleId::R6,
        RuleId::R7,
        RuleId::R8,
    ];

    fn index(self) -> usize {
        self as usize % 8
    }

    pub fn paradigm(self) -> Paradigm {
        if (self as usize) < 8 {
            Paradigm::Stimulus
        } else {
            Paradigm::Response
        }
    }

    pub fn scope(self) -> RuleScope {
        match self.index() {
            0 | 1 => RuleScope::Encoding,
            2 | 3 => RuleScope::Decoding,
            _ => RuleScope::Combined,
        }
    }

    /// The premise `(encoding, decoding)`; `None` marks the side a
    /// single-model rule does not read.
    pub fn premise(self) -> (Option<bool>, Option<bool>) {
        match self.index() {
            0 => (Some(true), None),
            1 => (Some(false), None),
            2 => (None, Some(true)),
            3 => (None, Some(false)),
            4 => (Some(true), Some(true)),
            5 => (Some(true), Some(false)),
            6 => (Some(false), Some(true)),
            _ => (Some(false), Some(false)),
        }
    }

    /// Conclusion text of the rule table.
    pub fn conclusion(self) -> &'static str {
        use RuleId::*;
        match self {
            S1 | S5 => "X effect of S",
            S2 => "X no effect of S",
            S6 => "X indirect effect of S",
            S7 | R7 => "provides brain state context",
            S8 => "neither effect nor provides brain state context",
            R2 => "X no cause of R",
            R6 => "X no direct cause of R",
            R8 => "neither cause nor provides brain state context",
            S3 | S4 | R1 | R3 | R4 | R5 => "inconclusive",
        }
    }

    pub fn is_inconclusive(self) -> bool {
        self.conclusion() == "inconclusive"
    }

    fn find(paradigm: Paradigm, premise: (Option<bool>, Option<bool>)) -> RuleId {
        *RuleId::ALL
            .iter()
            .find(|r| r.paradigm() == paradigm && r.premise() == premise)
            .expect("every premise has a rule")
    }

    pub fn encoding_rule(paradigm: Paradigm, relevant: bool) -> RuleId {
        RuleId::find(paradigm, (Some(relevant), None))
    }

    pub fn decoding_rule(paradigm: Paradigm, relevant: bool) -> RuleId {
        RuleId::find(paradigm, (None, Some(relevant)))
    }

    pub fn combined_rule(paradigm: Paradigm, encoding: bool, decoding: bool) -> RuleId {
        RuleId::find(paradigm, (Some(encoding), Some(decoding)))
    }

    /// Conclusion applied to a named feature.
    pub fn render(self, feature: &str) -> String {
        let c = self.conclusion();
        match c.strip_prefix("X ") {
            Some(rest) => format!("{feature} {rest}"),
            None => format!("{feature}: {c}"),
        }
    }
}

impl std::fmt::Display for RuleId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Statement {
    pub rule: RuleId,
    pub conclusion: &'static str,
    pub text: String,
}

impl Statement {
    fn new(rule: RuleId, feature: &str) -> Statement {
        Statement {
            rule,
            conclusion: rule.conclusion(),
            text: rule.render(feature),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FeatureStatements {
    pub feature: String,
    pub encoding: RelevanceDecision,
    pub decoding: RelevanceDecision,
    pub statements: Vec<Statement>,
    pub notes: Vec<String>,
}

impl FeatureStatements {
    /// The rule combining both analyses, if one applies.
    pub fn combined_rule(&self) -> Option<RuleId> {
        self.statements
            .iter()
            .map(|s| s.rule)
            .find(|r| r.scope() == RuleScope::Combined)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CombinedStatement {
    pub rule: Option<RuleId>,
    pub features: Vec<String>,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Interpretation {
    pub paradigm: Paradigm,
    pub features: Vec<FeatureStatements>,
    pub combined: Vec<CombinedStatement>,
    pub warnings: Vec<String>,
    pub notes: Vec<String>,
    pub caveats: Vec<String>,
}

impl Interpretation {
    pub fn feature(&self, name: &str) -> Option<&FeatureStatements> {
        self.features.iter().find(|f| f.feature == name)
    }
}

pub const RESPONSE_CAVEAT: &str = "response paradigm: a feature and R that share a hidden common cause \
     show the same relevance pattern as a feature that causes R, so no statement here establishes a cause of R";

fn as_bool(d: RelevanceDecision) -> Option<bool> {
    match d {
        RelevanceDecision::Relevant => Some(true),
        RelevanceDecision::Irrelevant => Some(false),
        RelevanceDecision::Indeterminate => None,
    }
}

fn set_text(features: &[String]) -> String {
    format!("{{{}}}", features.join(", "))
}

/// Deductions that combine features: in a stimulus paradigm, some
/// encoding-relevant feature must be a direct effect of S with respect to the
/// observed set, and direct effects are never d-separated from S by the
/// remaining features. Returns `(statements, warnings, notes)`.
pub fn combined_inference(
    paradigm: Paradigm,
    part: &FeaturePartition,
) -> (Vec<CombinedStatement>, Vec<String>, Vec<String>) {
    let mut statements = Vec::new();
    let mut warnings = Vec::new();
    let mut notes = Vec::new();
    match paradigm {
        Paradigm::Stimulus => {
            let enc: Vec<String> = part.encoding_relevant().into_iter().map(String::from).collect();
            if !part.indeterminate.is_empty() {
                notes.push(format!(
                    "direct-effect deduction withheld: relevance of {} is indeterminate",
                    set_text(&part.indeterminate)
                ));
            } else if !enc.is_empty() {
                if part.enc_dec.is_empty() {
                    warnings.push(format!(
                        "consistency: {} are relevant in encoding but none is relevant in decoding; \
                         some encoding-relevant feature must be a direct effect of S and therefore \
                         decoding-relevant, which points to a test error or a violated assumption",
                        set_text(&enc)
                    ));
                } else {
                    statements.push(CombinedStatement {
                        rule: None,
                        features: part.enc_dec.clone(),
                        text: format!(
                            "at least one member of {} is a direct effect of S wrt the observed set",
                            set_text(&part.enc_dec)
                        ),
                    });
                }
            }
        }
        Paradigm::Response => {
            for f in &part.enc_only {
                statements.push(CombinedStatement {
                    rule: Some(RuleId::R6),
                    features: vec![f.clone()],
                    text: RuleId::R6.render(f),
                });
            }
        }
    }
    (statements, warnings, notes)
}

/// Applies the rule table to every feature of `part`, then the combined
/// deductions. Defined for every paradigm and decision pair.
pub fn interpret(paradigm: Paradigm, part: &FeaturePartition) -> Interpretation {
    let features = part
        .decisions
        .iter()
        .map(|d| {
            let mut statements = Vec::new();
            let mut notes = Vec::new();
            let enc = as_bool(d.encoding);
            let dec = as_bool(d.decoding);
            match enc {
                Some(e) => statements.push(Statement::new(RuleId::encoding_rule(paradigm, e), &d.feature)),
                None => notes.push("encoding relevance indeterminate: no encoding statement".to_string()),
            }
            match dec {
                Some(r) => statements.push(Statement::new(RuleId::decoding_rule(paradigm, r), &d.feature)),
                None => notes.push("decoding relevance indeterminate: no decoding statement".to_string()),
            }
            match (enc, dec) {
                (Some(e), Some(r)) => statements.push(Statement::new(RuleId::combined_rule(paradigm, e, r), &d.feature)),
                _ => notes.push("no combined statement: a relevance decision is indeterminate".to_string()),
            }
            FeatureStatements {
                feature: d.feature.clone(),
                encoding: d.encoding,
                decoding: d.decoding,
                statements,
                notes,
            }
        })
        .collect();
    let (combined, warnings, notes) = combined_inference(paradigm, part);
    let caveats = match paradigm {
        Paradigm::Stimulus => Vec::new(),
        Paradigm::Response => vec![RESPONSE_CAVEAT.to_string()],
    };
    Interpretation {
        paradigm,
        features,
        combined,
        warnings,
        notes,
        caveats,
    }
}
