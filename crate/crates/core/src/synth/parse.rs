use super::{Mechanism, Sem};
use crate::error::{Error, Result};
use crate::graph::parse::{builder_from_lines, lines, Line};
use crate::pipeline::Paradigm;

fn parse_number(lineno: usize, field: &str, text: &str) -> Result<f64> {
    text.trim()
        .parse::<f64>()
        .map_err(|_| Error::parse(lineno, format!("{field}: `{}` is not a number", text.trim())))
}

/// `X1 = linear(S:0.8, H:-0.7; sd=1.0)`
fn parse_mech(lineno: usize, value: &str) -> Result<(String, Mechanism)> {
    let (node, rhs) = value
        .split_once('=')
        .ok_or_else(|| Error::parse(lineno, "expected `mech: node = kind(...)`"))?;
    let node = node.trim().to_owned();
    let rhs = rhs.trim();
    let open = rhs
        .find('(')
        .ok_or_else(|| Error::parse(lineno, "expected `kind(...)`"))?;
    if !rhs.ends_with(')') {
        return Err(Error::parse(lineno, "missing closing `)`"));
    }
    let kind = rhs[..open].trim();
    let inner = &rhs[open + 1..rhs.len() - 1];

    let mut weights: Vec<(String, f64)> = Vec::new();
    let mut options: Vec<(&str, f64)> = Vec::new();
    for segment in inner.split(';') {
        for item in segment.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            if let Some((k, v)) = item.split_once('=') {
                options.push((k.trim(), parse_number(lineno, k.trim(), v)?));
            } else if let Some((p, w)) = item.split_once(':') {
                weights.push((p.trim().to_owned(), parse_number(lineno, p.trim(), w)?));
            } else {
                return Err(Error::parse(
                    lineno,
                    format!("expected `parent:weight` or `key=value`, found `{item}`"),
                ));
            }
        }
    }
    let allowed: &[&str] = match kind {
        "linear" | "quadratic" => &["sd"],
        "bernoulli" => &["p"],
        "logistic" => &["bias"],
        other => return Err(Error::parse(lineno, format!("unknown mechanism `{other}`"))),
    };
    if let Some((k, _)) = options.iter().find(|(k, _)| !allowed.contains(k)) {
        return Err(Error::parse(lineno, format!("`{kind}` does not take `{k}`")));
    }
    let opt = |key: &str, default: f64| {
        options
            .iter()
            .rev()
            .find(|(k, _)| *k == key)
            .map_or(default, |(_, v)| *v)
    };
    let mech = match kind {
        "linear" => Mechanism::LinearGaussian {
            weights,
            sd: opt("sd", super::DEFAULT_NOISE_SD),
        },
        "quadratic" => Mechanism::Quadratic {
            weights,
            sd: opt("sd", super::DEFAULT_NOISE_SD),
        },
        "bernoulli" => {
            if !weights.is_empty() {
                return Err(Error::parse(lineno, "bernoulli takes no parent weights"));
            }
            Mechanism::BernoulliRoot { p: opt("p", 0.5) }
        }
        _ => Mechanism::LogisticSink {
            weights,
            bias: opt("bias", 0.0),
        },
    };
    Ok((node, mech))
}

pub(crate) fn parse_sem(text: &str) -> Result<Sem> {
    let parsed = lines(text)?;
    let dag = builder_from_lines(&parsed)?.build()?;
    let mut condition: Option<String> = None;
    let mut paradigm = Paradigm::Stimulus;
    let mut mechs: Vec<(String, Mechanism)> = Vec::new();
    for (lineno, line) in &parsed {
        if let Line::Directive { key, value } = line {
            match *key {
                "condition" => condition = Some(value.to_string()),
                "paradigm" => {
                    paradigm = value
                        .parse()
                        .map_err(|e: Error| Error::parse(*lineno, e.to_string()))?
                }
                "mech" => {
                    let (node, mech) = parse_mech(*lineno, value)?;
                    if !dag.contains(&node) {
                        return Err(Error::parse(*lineno, format!("unknown node `{node}`")));
                    }
                    if mechs.iter().any(|(n, _)| *n == node) {
                        return Err(Error::parse(*lineno, format!("second mechanism for `{node}`")));
                    }
                    mechs.push((node, mech));
                }
                _ => unreachable!("rejected by the DAG reader"),
            }
        }
    }
    let condition =
        condition.ok_or_else(|| Error::invalid("fixture does not declare `condition:`"))?;
    Sem::with_defaults(dag, mechs, &condition, paradigm)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_mechanism_kinds() {
        let sem = Sem::parse(
            "condition: S\n\
             paradigm: stimulus\n\
             S -> X1\n\
             S -> X2\n\
             X1 -> X3\n\
             mech: S = bernoulli(p=0.4)\n\
             mech: X1 = linear(S:0.8; sd=0.5)\n\
             mech: X2 = quadratic(S:1.5)\n",
        )
        .unwrap();
        assert_eq!(sem.mechanism("S").unwrap(), &Mechanism::BernoulliRoot { p: 0.4 });
        assert_eq!(
            sem.mechanism("X1").unwrap(),
            &Mechanism::LinearGaussian {
                weights: vec![("S".into(), 0.8)],
                sd: 0.5
            }
        );
        assert_eq!(
            sem.mechanism("X2").unwrap(),
            &Mechanism::Quadratic {
                weights: vec![("S".into(), 1.5)],
                sd: 1.0
            }
        );
        // X3 falls back to a default linear mechanism.
        match sem.mechanism("X3").unwrap() {
            Mechanism::LinearGaussian { weights, sd } => {
                assert_eq!(weights.len(), 1);
                assert_eq!(*sd, 1.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn response_fixture() {
        let sem = Sem::parse(
            "condition: R\nparadigm: response\nX1 -> R\nmech: R = logistic(X1:1.2; bias=-0.3)\n",
        )
        .unwrap();
        assert_eq!(sem.paradigm(), Paradigm::Response);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = Sem::parse("condition: S\nS -> X1\nmech: X1 = cubic(S:1)\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = Sem::parse("condition: S\nS -> X1\nmech: X1 = linear(S:abc)\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = Sem::parse("condition: S\nS -> X1\nmech: Q = linear(sd=1)\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = Sem::parse("S -> X1\n").unwrap_err();
        assert!(err.to_string().contains("condition"));
        assert!(matches!(
            Sem::parse("condition: S\nS -> X1\nX1 -> S\n"),
            Err(Error::Cycle(_))
        ));
    }

    #[test]
    fn declaration_order_does_not_change_columns() {
        let a = Sem::parse("condition: S\nS -> X1\nX1 -> X2\nS -> X3\nX2 -> X3\n").unwrap();
        let b = Sem::parse("condition: S\nX2 -> X3\nS -> X3\nX1 -> X2\nS -> X1\n").unwrap();
        let da = a.sample(200, 5).unwrap();
        let db = b.sample(200, 5).unwrap();
        assert_eq!(da.condition(), db.condition());
        for name in ["X1", "X2", "X3"] {
            assert_eq!(da.column_by_name(name), db.column_by_name(name), "{name}");
        }
    }
}
