use super::{Dag, DagBuilder};
use crate::error::{Error, Result};

/// One meaningful line of a DAG or SEM fixture file.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Line<'a> {
    /// `a -> b -> c` yields the chain of nodes.
    Edges(Vec<&'a str>),
    Nodes(Vec<&'a str>),
    Hidden(Vec<&'a str>),
    /// `key: value` directive not understood by the DAG layer.
    Directive { key: &'a str, value: &'a str },
}

fn split_list(value: &str) -> Vec<&str> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect()
}

/// Strips comments and blank lines, returning `(line number, parsed line)`.
pub(crate) fn lines(text: &str) -> Result<Vec<(usize, Line<'_>)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if line.contains("->") {
            let nodes: Vec<&str> = line.split("->").map(str::trim).collect();
            if nodes.len() < 2 || nodes.iter().any(|n| n.is_empty()) {
                return Err(Error::parse(lineno, format!("malformed edge `{line}`")));
            }
            for n in &nodes {
                super::validate_name(n).map_err(|e| Error::parse(lineno, e.to_string()))?;
            }
            out.push((lineno, Line::Edges(nodes)));
            continue;
        }
        let Some((key, value)) = line.split_once(':') else {
            return Err(Error::parse(
                lineno,
                format!("expected `tail -> head` or `key: value`, found `{line}`"),
            ));
        };
        let key = key.trim();
        let value = value.trim();
        let parsed = match key {
            "nodes" | "hidden" => {
                let list = split_list(value);
                for n in &list {
                    super::validate_name(n).map_err(|e| Error::parse(lineno, e.to_string()))?;
                }
                if key == "nodes" {
                    Line::Nodes(list)
                } else {
                    Line::Hidden(list)
                }
            }
            _ => Line::Directive { key, value },
        };
        out.push((lineno, parsed));
    }
    Ok(out)
}

/// Keys of the SEM fixture extension, silently accepted by the DAG reader.
const SEM_KEYS: [&str; 3] = ["condition", "paradigm", "mech"];

pub(crate) fn builder_from_lines(parsed: &[(usize, Line<'_>)]) -> Result<DagBuilder> {
    let mut b = DagBuilder::new();
    let mut seen_edges: Vec<(&str, &str, usize)> = Vec::new();
    for (lineno, line) in parsed {
        match line {
            Line::Edges(chain) => {
                for pair in chain.windows(2) {
                    if let Some((_, _, first)) = seen_edges
                        .iter()
                        .find(|(t, h, _)| *t == pair[0] && *h == pair[1])
                    {
                        return Err(Error::parse(
                            *lineno,
                            format!(
                                "duplicate edge `{} -> {}` (first declared on line {first})",
                                pair[0], pair[1]
                            ),
                        ));
                    }
                    seen_edges.push((pair[0], pair[1], *lineno));
                    b = b.edge(pair[0], pair[1]);
                }
            }
            Line::Nodes(list) => {
                for n in list {
                    b = b.node(n);
                }
            }
            Line::Hidden(list) => {
                for n in list {
                    b = b.node(n).hidden(n);
                }
            }
            Line::Directive { key, .. } => {
                if !SEM_KEYS.contains(key) {
                    return Err(Error::parse(*lineno, format!("unknown directive `{key}`")));
                }
            }
        }
    }
    Ok(b)
}

pub(crate) fn parse_dag(text: &str) -> Result<Dag> {
    let parsed = lines(text)?;
    builder_from_lines(&parsed)?.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_edges_comments_and_hidden() {
        let dag = Dag::parse(
            "# four-node fixture\n\
             S -> X1   # stimulus\n\
             \n\
             X1 -> X2 -> X3\n\
             H -> X3\n\
             hidden: H\n\
             nodes: Iso\n",
        )
        .unwrap();
        assert_eq!(
            dag.names().collect::<Vec<_>>(),
            ["S", "X1", "X2", "X3", "H", "Iso"]
        );
        assert_eq!(dag.edges().len(), 4);
        assert_eq!(dag.hidden_names().collect::<Vec<_>>(), ["H"]);
    }

    #[test]
    fn reports_line_numbers() {
        let err = Dag::parse("A -> B\nwhat is this\n").unwrap_err();
        assert_eq!(
            err,
            Error::parse(2, "expected `tail -> head` or `key: value`, found `what is this`")
        );
        let err = Dag::parse("A -> B\nA -> B\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = Dag::parse("A -> \n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = Dag::parse("colour: blue\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn sem_directives_are_skipped() {
        let dag = Dag::parse("condition: S\nS -> X\nmech: X = linear(S:1; sd=1)\n").unwrap();
        assert_eq!(dag.len(), 2);
    }

    #[test]
    fn cyclic_file_is_rejected() {
        assert!(matches!(
            Dag::parse("A -> B\nB -> A\n"),
            Err(Error::Cycle(_))
        ));
    }
}
