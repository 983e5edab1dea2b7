//! Grammar files: rules with placeholders, POS classes, wildcards and
//! semantic actions.

mod action;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

pub use action::{Action, Func};

use crate::error::{Error, Result};
use crate::tagger::{Category, FunctionIndicator, PosTag};

const DEFAULT_GRAMMAR: &str = include_str!("../../resources/default.grammar");

/// Longest token run a single wildcard may cover.
pub const WILDCARD_MAX: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PlaceholderKind {
    Column,
    NodeLabel,
    NodeType,
    DatasetName,
    Number,
    Quoted,
}

impl PlaceholderKind {
    pub const ALL: [PlaceholderKind; 6] = [
        PlaceholderKind::Column,
        PlaceholderKind::NodeLabel,
        PlaceholderKind::NodeType,
        PlaceholderKind::DatasetName,
        PlaceholderKind::Number,
        PlaceholderKind::Quoted,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PlaceholderKind::Column => "Column",
            PlaceholderKind::NodeLabel => "NodeLabel",
            PlaceholderKind::NodeType => "NodeType",
            PlaceholderKind::DatasetName => "DatasetName",
            PlaceholderKind::Number => "Number",
            PlaceholderKind::Quoted => "Quoted",
        }
    }

    pub fn category(self) -> Option<Category> {
        match self {
            PlaceholderKind::Column => Some(Category::Column),
            PlaceholderKind::NodeLabel => Some(Category::NodeLabel),
            PlaceholderKind::NodeType => Some(Category::NodeType),
            PlaceholderKind::DatasetName => Some(Category::DatasetName),
            PlaceholderKind::Number | PlaceholderKind::Quoted => None,
        }
    }

    pub fn of_category(c: Category) -> PlaceholderKind {
        match c {
            Category::Column => PlaceholderKind::Column,
            Category::NodeLabel => PlaceholderKind::NodeLabel,
            Category::NodeType => PlaceholderKind::NodeType,
            Category::DatasetName => PlaceholderKind::DatasetName,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Symbol {
    Literal(String),
    Variable(String),
    Placeholder(PlaceholderKind),
    Pos(PosTag),
    /// A word the synonym lexicon classifies as this function indicator.
    Indicator(FunctionIndicator),
    Wildcard,
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Literal(w) => write!(f, "'{w}'"),
            Symbol::Variable(v) => f.write_str(v),
            Symbol::Placeholder(k) => write!(f, "${}", k.as_str()),
            Symbol::Pos(p) => write!(f, "@{}", p.grammar_name()),
            Symbol::Indicator(k) => write!(f, "~{}", k.as_str()),
            Symbol::Wildcard => f.write_str("*"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub id: usize,
    pub lhs: String,
    pub rhs: Vec<Symbol>,
    pub action: Action,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} :=", self.lhs)?;
        for s in &self.rhs {
            write!(f, " {s}")?;
        }
        write!(f, " => {}", self.action)
    }
}

/// A loaded grammar (V, Σ, R, S). Rule ids are file positions.
#[derive(Debug, Clone, PartialEq)]
pub struct Grammar {
    pub start: String,
    pub variables: BTreeSet<String>,
    pub rules: Vec<Rule>,
}

fn is_variable_name(s: &str) -> bool {
    s.chars().next().is_some_and(|c| c.is_ascii_uppercase()) && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn syntax(line: usize, message: impl Into<String>) -> Error {
    Error::GrammarSyntax {
        line,
        message: message.into(),
    }
}

fn parse_symbol(word: &str, line: usize) -> Result<Symbol> {
    if word == "*" {
        return Ok(Symbol::Wildcard);
    }
    if let Some(inner) = word.strip_prefix('\'') {
        let lit = inner
            .strip_suffix('\'')
            .filter(|l| !l.is_empty())
            .ok_or_else(|| syntax(line, format!("bad literal {word}")))?;
        return Ok(Symbol::Literal(lit.to_lowercase()));
    }
    if let Some(kind) = word.strip_prefix('$') {
        return PlaceholderKind::ALL
            .into_iter()
            .find(|k| k.as_str() == kind)
            .map(Symbol::Placeholder)
            .ok_or_else(|| syntax(line, format!("unknown placeholder {word}")));
    }
    if let Some(class) = word.strip_prefix('@') {
        return PosTag::from_grammar_name(class)
            .map(Symbol::Pos)
            .ok_or_else(|| syntax(line, format!("unknown POS class {word}")));
    }
    if let Some(kind) = word.strip_prefix('~') {
        return kind.parse().map(Symbol::Indicator).map_err(|e: String| syntax(line, e));
    }
    if is_variable_name(word) {
        return Ok(Symbol::Variable(word.to_string()));
    }
    Err(syntax(line, format!("unrecognized symbol {word}")))
}

impl Grammar {
    /// The grammar bundled with the engine.
    pub fn bundled() -> Grammar {
        Grammar::parse(DEFAULT_GRAMMAR).expect("bundled grammar is valid")
    }

    pub fn bundled_text() -> &'static str {
        DEFAULT_GRAMMAR
    }

    pub fn parse(text: &str) -> Result<Grammar> {
        let mut start: Option<String> = None;
        let mut declared: BTreeSet<String> = BTreeSet::new();
        let mut rules = Vec::new();
        let mut rule_lines = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line_no = n + 1;
            let line = match raw.find('#') {
                // '#' inside a quoted literal is not a comment
                Some(i) if raw[..i].matches('\'').count() % 2 == 0 => &raw[..i],
                _ => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("start ") {
                let name = rest.trim();
                if !is_variable_name(name) {
                    return Err(syntax(line_no, format!("bad start variable {name:?}")));
                }
                if start.is_some() {
                    return Err(syntax(line_no, "duplicate start declaration"));
                }
                start = Some(name.to_string());
                continue;
            }
            if let Some(rest) = line.strip_prefix("var ") {
                for name in rest.split_whitespace() {
                    if !is_variable_name(name) {
                        return Err(syntax(line_no, format!("bad variable name {name:?}")));
                    }
                    declared.insert(name.to_string());
                }
                continue;
            }
            let (lhs, body) = line
                .split_once(":=")
                .ok_or_else(|| syntax(line_no, "expected `LHS := symbols => action`"))?;
            let lhs = lhs.trim();
            if !is_variable_name(lhs) {
                return Err(syntax(line_no, format!("bad left-hand side {lhs:?}")));
            }
            let (rhs_text, action_text) = match body.split_once("=>") {
                Some((r, a)) => (r, Some(a.trim())),
                None => (body, None),
            };
            let rhs = rhs_text
                .split_whitespace()
                .map(|w| parse_symbol(w, line_no))
                .collect::<Result<Vec<_>>>()?;
            if rhs.is_empty() {
                return Err(syntax(line_no, format!("empty right-hand side for {lhs}")));
            }
            let action = match action_text {
                Some(a) => Action::parse(a).map_err(|m| syntax(line_no, m))?,
                None => Action::default_for(rhs.len()),
            };
            declared.insert(lhs.to_string());
            rule_lines.push(line_no);
            rules.push(Rule {
                id: rules.len(),
                lhs: lhs.to_string(),
                rhs,
                action,
            });
        }
        let start = start.ok_or_else(|| syntax(0, "missing start declaration"))?;
        if !declared.contains(&start) {
            return Err(Error::UndefinedVariable(start));
        }
        for rule in &rules {
            for s in &rule.rhs {
                if let Symbol::Variable(v) = s {
                    if !declared.contains(v) {
                        return Err(Error::UndefinedVariable(v.clone()));
                    }
                }
            }
        }
        let grammar = Grammar {
            start,
            variables: declared,
            rules,
        };
        if let Some(cycle) = grammar.unary_cycle() {
            let line = rule_lines[grammar.rules.iter().position(|r| r.lhs == cycle).unwrap_or(0)];
            return Err(syntax(line, format!("unary rule cycle through {cycle}")));
        }
        Ok(grammar)
    }

    /// Unary edges A -> B for rules `A := B`.
    fn unary_edges(&self) -> BTreeMap<&str, BTreeSet<&str>> {
        let mut edges: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        for r in &self.rules {
            if let [Symbol::Variable(b)] = r.rhs.as_slice() {
                edges.entry(r.lhs.as_str()).or_default().insert(b.as_str());
            }
        }
        edges
    }

    fn unary_cycle(&self) -> Option<String> {
        let edges = self.unary_edges();
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut state: BTreeMap<&str, u8> = BTreeMap::new();
        fn visit<'a>(
            v: &'a str,
            edges: &BTreeMap<&'a str, BTreeSet<&'a str>>,
            state: &mut BTreeMap<&'a str, u8>,
        ) -> Option<String> {
            match state.get(v) {
                Some(1) => return Some(v.to_string()),
                Some(2) => return None,
                _ => {}
            }
            state.insert(v, 1);
            for next in edges.get(v).into_iter().flatten() {
                if let Some(c) = visit(next, edges, state) {
                    return Some(c);
                }
            }
            state.insert(v, 2);
            None
        }
        for v in self.variables.iter() {
            if let Some(c) = visit(v, &edges, &mut state) {
                return Some(c);
            }
        }
        None
    }

    /// Variables ordered so that for every unary rule `A := B`, B comes
    /// before A.
    pub fn unary_order(&self) -> Vec<String> {
        let edges = self.unary_edges();
        let mut done: BTreeSet<&str> = BTreeSet::new();
        let mut order = Vec::new();
        fn visit<'a>(
            v: &'a str,
            edges: &BTreeMap<&'a str, BTreeSet<&'a str>>,
            done: &mut BTreeSet<&'a str>,
            order: &mut Vec<String>,
        ) {
            if !done.insert(v) {
                return;
            }
            for next in edges.get(v).into_iter().flatten() {
                visit(next, edges, done, order);
            }
            order.push(v.to_string());
        }
        for v in &self.variables {
            visit(v, &edges, &mut done, &mut order);
        }
        order
    }

    /// Σ: every literal word used by some rule.
    pub fn terminals(&self) -> BTreeSet<String> {
        self.rules
            .iter()
            .flat_map(|r| r.rhs.iter())
            .filter_map(|s| match s {
                Symbol::Literal(w) => Some(w.clone()),
                _ => None,
            })
            .collect()
    }

    pub fn rules_for<'a>(&'a self, lhs: &'a str) -> impl Iterator<Item = &'a Rule> + 'a {
        self.rules.iter().filter(move |r| r.lhs == lhs)
    }

    /// Non-fatal problems: unreachable variables, variables without rules,
    /// actions referencing positions beyond the rule's arity.
    pub fn validate(&self) -> Vec<String> {
        let mut warnings = Vec::new();
        let mut reachable: BTreeSet<&str> = BTreeSet::new();
        let mut stack = vec![self.start.as_str()];
        while let Some(v) = stack.pop() {
            if !reachable.insert(v) {
                continue;
            }
            for r in self.rules_for(v) {
                for s in &r.rhs {
                    if let Symbol::Variable(next) = s {
                        stack.push(next);
                    }
                }
            }
        }
        for v in &self.variables {
            if !reachable.contains(v.as_str()) {
                warnings.push(format!("unreachable: {v}"));
            }
            if self.rules_for(v).next().is_none() {
                warnings.push(format!("no rules: {v}"));
            }
        }
        for r in &self.rules {
            let max = r.action.max_ref();
            if max > r.rhs.len() {
                warnings.push(format!(
                    "rule {} ({}): action references %{max} but the rule has {} symbols",
                    r.id,
                    r.lhs,
                    r.rhs.len()
                ));
            }
        }
        warnings
    }

    /// Grammar file text; parsing it back yields the same rule list.
    pub fn to_text(&self) -> String {
        let mut out = format!("start {}\n", self.start);
        let ruleless: Vec<&str> = self
            .variables
            .iter()
            .filter(|v| self.rules_for(v).next().is_none())
            .map(String::as_str)
            .collect();
        if !ruleless.is_empty() {
            out.push_str(&format!("var {}\n", ruleless.join(" ")));
        }
        for r in &self.rules {
            out.push_str(&r.to_string());
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TINY: &str = "
# toy grammar
start Query
Query := Visualization
Visualization := ShowVerb Columns 'in' $NodeType => set(merge(frame(visualize), %2), target, new(%4))
ShowVerb := ~visualize => frame()
Columns := $Column => set(frame(), columns, list(%1))
Columns := $Column @CONJ Columns => set(frame(), columns, list(%1, %3))
";

    #[test]
    fn loads_rules_in_file_order() {
        let g = Grammar::parse(TINY).unwrap();
        assert_eq!(g.start, "Query");
        assert_eq!(g.rules.len(), 5);
        assert_eq!(g.rules[1].id, 1);
        assert_eq!(g.rules[1].rhs[2], Symbol::Literal("in".into()));
        assert_eq!(g.rules[1].rhs[3], Symbol::Placeholder(PlaceholderKind::NodeType));
        assert_eq!(g.rules[0].action, Action::Ref(1));
        assert!(g.validate().is_empty());
        assert_eq!(g.terminals(), BTreeSet::from(["in".to_string()]));
    }

    #[test]
    fn round_trip() {
        let g = Grammar::parse(TINY).unwrap();
        let again = Grammar::parse(&g.to_text()).unwrap();
        assert_eq!(again.rules, g.rules);
        assert_eq!(again.variables, g.variables);
    }

    #[test]
    fn load_errors() {
        assert!(matches!(
            Grammar::parse("Query := 'x'"),
            Err(Error::GrammarSyntax { line: 0, .. })
        ));
        assert_eq!(
            Grammar::parse("start Query\nQuery := Missing"),
            Err(Error::UndefinedVariable("Missing".into()))
        );
        assert!(matches!(
            Grammar::parse("start Q\nQ := => list()"),
            Err(Error::GrammarSyntax { line: 2, .. })
        ));
        assert!(matches!(
            Grammar::parse("start Q\nstart Q\nQ := 'x'"),
            Err(Error::GrammarSyntax { line: 2, .. })
        ));
        assert!(matches!(
            Grammar::parse("start Q\nQ := 'x' => nope(%1)"),
            Err(Error::GrammarSyntax { line: 2, .. })
        ));
        assert!(Grammar::parse("start Q\nQ := R\nR := Q\nR := 'x'").is_err());
    }

    #[test]
    fn warnings() {
        let g = Grammar::parse("start Q\nvar Empty\nQ := 'x' => %3\nX := 'y'").unwrap();
        let w = g.validate();
        assert!(w.contains(&"unreachable: X".to_string()));
        assert!(w.contains(&"no rules: Empty".to_string()));
        assert!(w.iter().any(|m| m.contains("%3")));
    }

    #[test]
    fn unary_order_puts_dependencies_first() {
        let g = Grammar::parse(TINY).unwrap();
        let order = g.unary_order();
        let pos = |v: &str| order.iter().position(|o| o == v).unwrap();
        assert!(pos("Visualization") < pos("Query"));
    }
}
