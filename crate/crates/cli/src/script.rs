//! Query scripts: one query per line, `#` comments, and two directives
//! emulating interaction.
//!
//! ```text
//! Show a scatterplot of mpg and horsepower
//! !select node-2 0-9,12
//! !click node-2
//! Highlight the selected cars in red
//! ```

use std::collections::BTreeSet;

use nlflow_core::{Engine, Error, ErrorReport, QueryOptions, Session};

#[derive(Debug, Clone, PartialEq)]
pub enum Line {
    Query(String),
    /// Replaces the selection of the labelled node.
    Select {
        label: String,
        rows: BTreeSet<usize>,
    },
    /// Clicks the labelled node.
    Click {
        label: String,
    },
}

/// Parses `0-3,7` into `{0, 1, 2, 3, 7}`.
pub fn parse_rows(text: &str) -> Option<BTreeSet<usize>> {
    let mut rows = BTreeSet::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b) = (a.trim().parse::<usize>().ok()?, b.trim().parse::<usize>().ok()?);
                if a > b {
                    return None;
                }
                rows.extend(a..=b);
            }
            None => {
                rows.insert(part.parse().ok()?);
            }
        }
    }
    Some(rows)
}

/// Non-empty, non-comment lines with their 1-based line numbers.
pub fn read_script(text: &str) -> Result<Vec<(usize, Line)>, (usize, String)> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parsed = if let Some(rest) = line.strip_prefix("!select") {
            let (label, rows) = rest
                .trim()
                .rsplit_once(char::is_whitespace)
                .ok_or((n, "expected !select <label> <rows>".to_string()))?;
            let rows = parse_rows(rows).ok_or((n, format!("bad row list {rows:?}")))?;
            Line::Select {
                label: label.trim().to_string(),
                rows,
            }
        } else if let Some(rest) = line.strip_prefix("!click") {
            if rest.trim().is_empty() {
                return Err((n, "expected !click <label>".into()));
            }
            Line::Click {
                label: rest.trim().to_string(),
            }
        } else if line.starts_with('!') {
            return Err((n, format!("unknown directive {line:?}")));
        } else {
            Line::Query(line.to_string())
        };
        out.push((n, parsed));
    }
    Ok(out)
}

/// One executed line.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub line: usize,
    pub text: String,
    /// The frame signature for queries.
    pub signature: Option<String>,
    pub created: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScriptError {
    pub line: usize,
    pub report: ErrorReport,
}

fn node_id(session: &Session, label: &str) -> Result<nlflow_core::dataflow::NodeId, ErrorReport> {
    session
        .diagram
        .node_by_label(label)
        .map(|n| n.id)
        .ok_or_else(|| Error::NodeNotFound(label.to_string()).into())
}

/// Runs `lines` in order, stopping at the first failure.
pub fn run_lines(
    engine: &Engine,
    session: &mut Session,
    lines: &[(usize, Line)],
    mut on_step: impl FnMut(&Step),
) -> Result<Vec<Step>, ScriptError> {
    let mut steps = Vec::new();
    for (line, l) in lines {
        let fail = |report: ErrorReport| ScriptError { line: *line, report };
        let step = match l {
            Line::Query(q) => {
                let r = engine.run(session, q, &QueryOptions::default()).map_err(fail)?;
                Step {
                    line: *line,
                    text: q.clone(),
                    signature: Some(r.interpretation.signature()),
                    created: r.execution.created.len(),
                }
            }
            Line::Select { label, rows } => {
                let id = node_id(session, label).map_err(fail)?;
                session
                    .diagram
                    .set_selection(id, rows.iter().copied())
                    .map_err(|e| fail(e.into()))?;
                Step {
                    line: *line,
                    text: format!("!select {label} ({} rows)", rows.len()),
                    signature: None,
                    created: 0,
                }
            }
            Line::Click { label } => {
                let id = node_id(session, label).map_err(fail)?;
                session
                    .tracker
                    .record_click(&session.diagram, Some(id), None)
                    .map_err(|e| fail(e.into()))?;
                Step {
                    line: *line,
                    text: format!("!click {label}"),
                    signature: None,
                    created: 0,
                }
            }
        };
        on_step(&step);
        steps.push(step);
    }
    Ok(steps)
}
