//! Regression suites: queries with their expected signature or error.
//!
//! Case lines are tab separated: query, expectation, and an optional node
//! count delta. `@fixture` switches the starting diagram.
//!
//! ```text
//! @fixture base
//! Show a scatterplot of mpg and horsepower  visualize:columns=mpg+horsepower,target=new(scatterplot)  +1
//! What time is it now  !ParseRejected
//! ```

use std::fmt;

use crate::demo::{Fixture, Renaming};
use crate::engine::{Engine, ErrorCategory, QueryOptions, Session};
use crate::error::{Error, Result};
use crate::parser::normalize_signature;
use crate::tagger::Category;

pub const BUNDLED_SUITE: &str = include_str!("../resources/suite.tsv");

#[derive(Debug, Clone, PartialEq)]
pub enum Expect {
    Signature(String),
    Error(ErrorCategory),
}

impl fmt::Display for Expect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expect::Signature(s) => f.write_str(s),
            Expect::Error(c) => write!(f, "!{c}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Case {
    pub line: usize,
    pub fixture: Fixture,
    pub query: String,
    pub expect: Expect,
    /// Expected change in node count.
    pub nodes: Option<i64>,
}

pub fn read_suite(text: &str) -> Result<Vec<Case>> {
    let mut fixture = Fixture::Base;
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let bad = |msg: String| Error::MalformedData(format!("suite line {line}: {msg}"));
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if let Some(name) = trimmed.strip_prefix("@fixture") {
            fixture = Fixture::parse(name.trim()).ok_or_else(|| bad(format!("unknown fixture {:?}", name.trim())))?;
            continue;
        }
        let fields: Vec<&str> = raw.split('\t').map(str::trim).collect();
        if fields.len() < 2 || fields.len() > 3 || fields[0].is_empty() || fields[1].is_empty() {
            return Err(bad("expected query<TAB>expectation[<TAB>node delta]".into()));
        }
        let expect = match fields[1].strip_prefix('!') {
            Some(cat) => {
                Expect::Error(ErrorCategory::parse(cat).ok_or_else(|| bad(format!("unknown category {cat:?}")))?)
            }
            None => Expect::Signature(normalize_signature(fields[1])),
        };
        let nodes = match fields.get(2) {
            Some(n) => Some(
                n.trim_start_matches('+')
                    .parse::<i64>()
                    .map_err(|_| bad(format!("bad node delta {n:?}")))?,
            ),
            None => None,
        };
        out.push(Case {
            line,
            fixture,
            query: fields[0].to_string(),
            expect,
            nodes,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub case: Case,
    /// The signature of the executed parse, or `!Category`.
    pub actual: String,
    pub node_delta: i64,
    pub passed: bool,
    /// False when a failed query changed the diagram.
    pub transactional: bool,
    /// For successful mutating queries: whether undo restored the prior
    /// hash and redo the later one.
    pub history_ok: Option<bool>,
}

/// Runs one case on a fresh copy of its fixture.
pub fn run_case(engine: &Engine, case: &Case, renaming: &Renaming) -> Outcome {
    let diagram = case.fixture.build_renamed(renaming);
    let mut session = Session::new(diagram);
    let before = session.diagram.hash();
    let count = session.diagram.node_count() as i64;
    let result = engine.run(&mut session, &case.query, &QueryOptions::default());
    let after = session.diagram.hash();
    let node_delta = session.diagram.node_count() as i64 - count;
    let (actual, transactional, history_ok) = match &result {
        Ok(r) => {
            let history = if r.execution.history || before == after {
                None
            } else {
                let undone = session.diagram.undo().is_ok() && session.diagram.hash() == before;
                let redone = session.diagram.redo().is_ok() && session.diagram.hash() == after;
                Some(undone && redone)
            };
            (r.interpretation.signature(), true, history)
        }
        Err(e) => (format!("!{}", e.category), before == after, None),
    };
    let expected = match &case.expect {
        Expect::Signature(s) => rename_signature(s, renaming),
        Expect::Error(c) => format!("!{c}"),
    };
    let passed = actual == expected && case.nodes.is_none_or(|n| n == node_delta);
    Outcome {
        case: case.clone(),
        actual,
        node_delta,
        passed,
        transactional,
        history_ok,
    }
}

pub fn run_suite(engine: &Engine, cases: &[Case], renaming: &Renaming) -> Vec<Outcome> {
    cases.iter().map(|c| run_case(engine, c, renaming)).collect()
}

/// Rewrites the column and node label mentions of `query`, found by
/// tagging it against `fixture`.
pub fn rename_query(engine: &Engine, fixture: Fixture, query: &str, renaming: &Renaming) -> String {
    let tagged = engine.tag(&fixture.build(), query);
    let chars: Vec<char> = query.chars().collect();
    let mut out = String::new();
    let mut at = 0;
    for span in tagged.tag_spans.iter().filter(|s| !s.suppressed) {
        if !matches!(span.category, Category::Column | Category::NodeLabel) {
            continue;
        }
        let (start, end) = (tagged.tokens[span.start].start, tagged.tokens[span.end - 1].end);
        out.extend(&chars[at..start]);
        out.push_str(&renaming.name(&span.value));
        at = end;
    }
    out.extend(&chars[at..]);
    out
}

/// Applies `renaming` to the column options and label references of a
/// signature.
pub fn rename_signature(signature: &str, renaming: &Renaming) -> String {
    let frames: Vec<String> = signature
        .split(" ; ")
        .map(|frame| {
            let Some((name, body)) = frame.split_once(':') else {
                return frame.to_string();
            };
            let parts: Vec<String> = body
                .split(',')
                .map(|part| {
                    let Some((k, v)) = part.split_once('=') else {
                        return part.to_string();
                    };
                    let items: Vec<String> = v
                        .split('+')
                        .map(|item| match k {
                            "columns" | "column" | "group" => renaming.name(item),
                            "source" | "target" => {
                                match item.strip_prefix("label(").and_then(|l| l.strip_suffix(')')) {
                                    Some(l) => format!("label({})", renaming.name(l)),
                                    None => item.to_string(),
                                }
                            }
                            _ => item.to_string(),
                        })
                        .collect();
                    format!("{k}={}", items.join("+"))
                })
                .collect();
            format!("{name}:{}", parts.join(","))
        })
        .collect();
    frames.join(" ; ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_cases_and_fixtures() {
        let cases =
            read_suite("# c\n@fixture single\nShow mpg\tvisualize:columns=mpg\t+1\nfoo\t!ParseRejected\n").unwrap();
        assert_eq!(cases.len(), 2);
        assert_eq!(cases[0].fixture, Fixture::SingleTable);
        assert_eq!(cases[0].nodes, Some(1));
        assert_eq!(cases[1].expect, Expect::Error(ErrorCategory::ParseRejected));
        assert_eq!(cases[1].line, 4);
    }

    #[test]
    fn malformed_lines_report_line_numbers() {
        let err = read_suite("ok\t!ParseRejected\nno tab here\n").unwrap_err();
        assert!(err.to_string().contains("line 2"));
        assert!(read_suite("q\t!Nope\n").is_err());
        assert!(read_suite("@fixture moon\n").is_err());
    }

    #[test]
    fn renames_signatures() {
        let r = Renaming::new([("mpg", "efficiency"), ("MyChart", "Overview")]);
        assert_eq!(
            rename_signature(
                "visualize:columns=mpg+origin,source=label(MyChart) ; filter:column=mpg,min=3",
                &r
            ),
            "visualize:columns=efficiency+origin,source=label(Overview) ; filter:column=efficiency,min=3"
        );
    }

    #[test]
    fn renames_tagged_mentions_only() {
        let e = Engine::bundled();
        let r = Renaming::new([("mpg", "efficiency"), ("horsepower", "power"), ("MyChart", "Overview")]);
        assert_eq!(
            rename_query(&e, Fixture::Base, "Show mpg from MyChart, and horsepwer", &r),
            "Show efficiency from Overview, and power"
        );
    }

    #[test]
    fn wrong_expectation_fails() {
        let e = Engine::bundled();
        let cases = read_suite("Show mpg and horsepower\tvisualize:columns=mpg\n").unwrap();
        let out = run_suite(&e, &cases, &Renaming::default());
        assert!(!out[0].passed);
        assert_eq!(out[0].actual, "visualize:columns=mpg+horsepower");
    }
}
