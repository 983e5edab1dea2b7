use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

use serde::Serialize;

use super::frame::{signature, FunctionFrame, Value};
use super::semantics::evaluate;
use super::weights::{rule_feature, Features, Weights};
use crate::error::{Error, Result};
use crate::grammar::{Action, Grammar, PlaceholderKind, Symbol, WILDCARD_MAX};
use crate::tagger::{parse_number, FunctionIndicator, PosTag, TaggedQuery, TokenKind};

pub const DEFAULT_BEAM: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LeafKind {
    Literal,
    Placeholder(PlaceholderKind),
    Pos(PosTag),
    Indicator(FunctionIndicator),
    Wildcard,
}

/// A node of a derivation: a rule application or a matched terminal.
#[derive(Debug)]
pub struct Tree {
    pub rule: Option<usize>,
    pub leaf: Option<LeafKind>,
    pub start: usize,
    pub end: usize,
    pub children: Vec<Arc<Tree>>,
    pub value: Value,
    score: f64,
    size: usize,
    seq: Arc<Vec<u32>>,
}

impl Tree {
    fn leaf(kind: LeafKind, start: usize, end: usize, value: Value, score: f64) -> Tree {
        Tree {
            rule: None,
            leaf: Some(kind),
            start,
            end,
            children: Vec::new(),
            value,
            score,
            size: 0,
            seq: Arc::new(Vec::new()),
        }
    }

    /// Number of rule applications.
    pub fn size(&self) -> usize {
        self.size
    }

    /// Rule ids in preorder.
    pub fn rule_sequence(&self) -> &[u32] {
        &self.seq
    }

    pub fn features(&self) -> Features {
        let mut f = Features::new();
        self.collect_features(&mut f);
        f
    }

    fn collect_features(&self, f: &mut Features) {
        if let Some(r) = self.rule {
            *f.entry(rule_feature(r)).or_default() += 1.0;
        }
        match self.leaf {
            Some(LeafKind::Placeholder(k)) => *f.entry(format!("ph:{}", k.as_str())).or_default() += 1.0,
            Some(LeafKind::Wildcard) => *f.entry("wildcard".to_string()).or_default() += 1.0,
            _ => {}
        }
        for c in &self.children {
            c.collect_features(f);
        }
    }

    /// Indented tree rendering for debugging and the CLI.
    pub fn render(&self, grammar: &Grammar, tokens: &[String]) -> String {
        let mut out = String::new();
        self.render_into(grammar, tokens, 0, &mut out);
        out
    }

    fn render_into(&self, grammar: &Grammar, tokens: &[String], depth: usize, out: &mut String) {
        let text = tokens[self.start..self.end].join(" ");
        let pad = "  ".repeat(depth);
        match self.rule {
            Some(r) => {
                let _ = writeln!(out, "{pad}{} [r{r}] \"{text}\"", grammar.rules[r].lhs);
            }
            None => {
                let kind = match self.leaf {
                    Some(LeafKind::Placeholder(k)) => format!("${}", k.as_str()),
                    Some(LeafKind::Pos(p)) => format!("@{}", p.grammar_name()),
                    Some(LeafKind::Indicator(i)) => format!("~{}", i.as_str()),
                    Some(LeafKind::Wildcard) => "*".into(),
                    _ => "'".into(),
                };
                let _ = writeln!(out, "{pad}{kind} \"{text}\"");
            }
        }
        for c in &self.children {
            c.render_into(grammar, tokens, depth + 1, out);
        }
    }
}

fn rank(a_score: f64, a_size: usize, a_seq: &[u32], b_score: f64, b_size: usize, b_seq: &[u32]) -> Ordering {
    b_score
        .total_cmp(&a_score)
        .then(a_size.cmp(&b_size))
        .then_with(|| a_seq.cmp(b_seq))
}

fn tree_order(a: &Arc<Tree>, b: &Arc<Tree>) -> Ordering {
    rank(a.score, a.size, &a.seq, b.score, b.size, &b.seq)
}

/// A complete parse of the query.
#[derive(Debug, Clone)]
pub struct Derivation {
    pub tree: Arc<Tree>,
    pub frames: Vec<FunctionFrame>,
    pub features: Features,
    pub score: f64,
}

impl Derivation {
    pub fn signature(&self) -> String {
        signature(&self.frames)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Sym {
    Lit(usize),
    Var(usize),
    Ph(PlaceholderKind),
    Pos(PosTag),
    Ind(FunctionIndicator),
    Wild,
}

#[derive(Debug)]
struct CRule {
    id: usize,
    lhs: usize,
    rhs: Vec<Sym>,
    action: Action,
}

/// A grammar prepared for chart parsing. Immutable and shareable.
#[derive(Debug)]
pub struct Parser {
    grammar: Arc<Grammar>,
    literals: Vec<String>,
    var_names: Vec<String>,
    start: usize,
    rules: Vec<CRule>,
    /// Rules with at least two symbols or a single terminal, by lhs.
    chain_rules: Vec<usize>,
    /// `A := B` rules grouped by A, listed in dependency order.
    unary: Vec<(usize, Vec<usize>)>,
}

#[derive(Clone)]
struct Partial {
    score: f64,
    size: usize,
    seq: Vec<u32>,
    children: Vec<Arc<Tree>>,
}

struct Chart<'a> {
    parser: &'a Parser,
    tagged: &'a TaggedQuery,
    beam: usize,
    n: usize,
    rule_w: Vec<f64>,
    ph_w: HashMap<PlaceholderKind, f64>,
    wild_w: f64,
    lit_at: Vec<Option<usize>>,
    numbers: Vec<Option<f64>>,
    spans_at: Vec<Vec<(usize, PlaceholderKind, String)>>,
    cells: Vec<Vec<Vec<Arc<Tree>>>>,
    memo: HashMap<(usize, usize, usize, usize), Arc<Vec<Partial>>>,
}

impl<'a> Chart<'a> {
    fn cell(&self, start: usize, end: usize) -> &Vec<Vec<Arc<Tree>>> {
        &self.cells[start * (self.n + 1) + end]
    }

    fn terminal_matches(&self, sym: Sym, pos: usize, max_end: usize) -> Vec<Arc<Tree>> {
        let mut out = Vec::new();
        if pos >= self.n {
            return out;
        }
        let tok = &self.tagged.tokens[pos];
        match sym {
            Sym::Lit(id) => {
                if self.lit_at[pos] == Some(id) {
                    out.push(Arc::new(Tree::leaf(
                        LeafKind::Literal,
                        pos,
                        pos + 1,
                        Value::Str(tok.text.clone()),
                        0.0,
                    )));
                }
            }
            Sym::Pos(p) => {
                if self.tagged.pos_tags[pos] == p {
                    out.push(Arc::new(Tree::leaf(
                        LeafKind::Pos(p),
                        pos,
                        pos + 1,
                        Value::Str(tok.text.clone()),
                        0.0,
                    )));
                }
            }
            Sym::Ind(k) => {
                if self.tagged.indicators[pos] == Some(k) {
                    out.push(Arc::new(Tree::leaf(
                        LeafKind::Indicator(k),
                        pos,
                        pos + 1,
                        Value::Str(tok.text.clone()),
                        0.0,
                    )));
                }
            }
            Sym::Ph(kind) => {
                let w = self.ph_w.get(&kind).copied().unwrap_or(0.0);
                match kind {
                    PlaceholderKind::Number => {
                        if let Some(v) = self.numbers[pos] {
                            out.push(Arc::new(Tree::leaf(
                                LeafKind::Placeholder(kind),
                                pos,
                                pos + 1,
                                Value::Num(v),
                                w,
                            )));
                        }
                    }
                    PlaceholderKind::Quoted => {
                        if tok.kind == TokenKind::Quoted {
                            let inner: String = tok.text.chars().skip(1).take(tok.text.chars().count() - 2).collect();
                            out.push(Arc::new(Tree::leaf(
                                LeafKind::Placeholder(kind),
                                pos,
                                pos + 1,
                                Value::Str(inner),
                                w,
                            )));
                        }
                    }
                    _ => {
                        for (end, k, value) in &self.spans_at[pos] {
                            if *k == kind && *end <= max_end {
                                out.push(Arc::new(Tree::leaf(
                                    LeafKind::Placeholder(kind),
                                    pos,
                                    *end,
                                    Value::Entity(kind, value.clone()),
                                    w,
                                )));
                            }
                        }
                    }
                }
            }
            Sym::Wild => {
                let mut end = pos;
                while end < max_end && end - pos < WILDCARD_MAX && self.tagged.tokens[end].kind != TokenKind::Punct {
                    end += 1;
                    let text = self.tagged.tokens[pos..end]
                        .iter()
                        .map(|t| t.text.as_str())
                        .collect::<Vec<_>>()
                        .join(" ");
                    out.push(Arc::new(Tree::leaf(
                        LeafKind::Wildcard,
                        pos,
                        end,
                        Value::Str(text),
                        self.wild_w,
                    )));
                }
            }
            Sym::Var(_) => unreachable!("variables are matched through the chart"),
        }
        out
    }

    /// Constituents for `sym` starting at `pos` and ending at or before `max_end`.
    fn matches(&self, sym: Sym, pos: usize, max_end: usize) -> Vec<Arc<Tree>> {
        match sym {
            Sym::Var(v) => {
                let mut out = Vec::new();
                for end in pos + 1..=max_end {
                    out.extend(self.cell(pos, end)[v].iter().cloned());
                }
                out
            }
            other => self.terminal_matches(other, pos, max_end),
        }
    }

    /// All ways `rhs[k..]` of rule `r` covers exactly `[pos, end)`.
    fn suffix(&mut self, r: usize, k: usize, pos: usize, end: usize) -> Arc<Vec<Partial>> {
        if let Some(hit) = self.memo.get(&(r, k, pos, end)) {
            return hit.clone();
        }
        let rule_len = self.parser.rules[r].rhs.len();
        let remaining = rule_len - k;
        let mut out: Vec<Partial> = Vec::new();
        if end - pos >= remaining {
            let sym = self.parser.rules[r].rhs[k];
            if remaining == 1 {
                for t in self.matches(sym, pos, end) {
                    if t.end == end {
                        out.push(Partial {
                            score: t.score,
                            size: t.size,
                            seq: t.seq.to_vec(),
                            children: vec![t],
                        });
                    }
                }
            } else {
                let max_end = end - (remaining - 1);
                for t in self.matches(sym, pos, max_end) {
                    let rest = self.suffix(r, k + 1, t.end, end);
                    for p in rest.iter() {
                        let mut seq = t.seq.to_vec();
                        seq.extend_from_slice(&p.seq);
                        let mut children = Vec::with_capacity(p.children.len() + 1);
                        children.push(t.clone());
                        children.extend(p.children.iter().cloned());
                        out.push(Partial {
                            score: t.score + p.score,
                            size: t.size + p.size,
                            seq,
                            children,
                        });
                    }
                }
            }
        }
        out.sort_by(|a, b| rank(a.score, a.size, &a.seq, b.score, b.size, &b.seq));
        out.truncate(self.beam);
        let out = Arc::new(out);
        self.memo.insert((r, k, pos, end), out.clone());
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn apply(
        &self,
        r: usize,
        start: usize,
        end: usize,
        score: f64,
        size: usize,
        seq: &[u32],
        children: Vec<Arc<Tree>>,
    ) -> Arc<Tree> {
        let rule = &self.parser.rules[r];
        let values: Vec<Value> = children.iter().map(|c| c.value.clone()).collect();
        let mut full_seq = Vec::with_capacity(seq.len() + 1);
        full_seq.push(rule.id as u32);
        full_seq.extend_from_slice(seq);
        Arc::new(Tree {
            rule: Some(rule.id),
            leaf: None,
            start,
            end,
            value: evaluate(&rule.action, &values),
            children,
            score: self.rule_w[r] + score,
            size: size + 1,
            seq: Arc::new(full_seq),
        })
    }

    fn fill(&mut self) {
        let n = self.n;
        let nvars = self.parser.var_names.len();
        for len in 1..=n {
            for start in 0..=n - len {
                let end = start + len;
                let mut lists: Vec<Vec<Arc<Tree>>> = vec![Vec::new(); nvars];
                for idx in 0..self.parser.chain_rules.len() {
                    let r = self.parser.chain_rules[idx];
                    let partials = self.suffix(r, 0, start, end);
                    let lhs = self.parser.rules[r].lhs;
                    for p in partials.iter() {
                        let t = self.apply(r, start, end, p.score, p.size, &p.seq, p.children.clone());
                        lists[lhs].push(t);
                    }
                }
                for (lhs, rules) in &self.parser.unary {
                    for &r in rules {
                        let Sym::Var(b) = self.parser.rules[r].rhs[0] else {
                            continue;
                        };
                        let below = lists[b].clone();
                        for t in below {
                            let (score, size, seq) = (t.score, t.size, t.seq.clone());
                            let new = self.apply(r, start, end, score, size, &seq, vec![t]);
                            lists[*lhs].push(new);
                        }
                    }
                    lists[*lhs].sort_by(tree_order);
                    lists[*lhs].truncate(self.beam);
                }
                for list in lists.iter_mut() {
                    list.sort_by(tree_order);
                    list.truncate(self.beam);
                }
                self.cells[start * (n + 1) + end] = lists;
            }
        }
    }
}

impl Parser {
    pub fn new(grammar: Arc<Grammar>) -> Parser {
        let var_names: Vec<String> = grammar.variables.iter().cloned().collect();
        let var_id = |name: &str| var_names.iter().position(|v| v == name).expect("variable declared");
        let mut literals: Vec<String> = Vec::new();
        let mut rules = Vec::new();
        for r in &grammar.rules {
            let rhs = r
                .rhs
                .iter()
                .map(|s| match s {
                    Symbol::Literal(w) => {
                        let id = match literals.iter().position(|l| l == w) {
                            Some(i) => i,
                            None => {
                                literals.push(w.clone());
                                literals.len() - 1
                            }
                        };
                        Sym::Lit(id)
                    }
                    Symbol::Variable(v) => Sym::Var(var_id(v)),
                    Symbol::Placeholder(k) => Sym::Ph(*k),
                    Symbol::Pos(p) => Sym::Pos(*p),
                    Symbol::Indicator(k) => Sym::Ind(*k),
                    Symbol::Wildcard => Sym::Wild,
                })
                .collect();
            rules.push(CRule {
                id: r.id,
                lhs: var_id(&r.lhs),
                rhs,
                action: r.action.clone(),
            });
        }
        let chain_rules = rules
            .iter()
            .filter(|r| !matches!(r.rhs.as_slice(), [Sym::Var(_)]))
            .map(|r| r.id)
            .collect();
        let mut unary = Vec::new();
        for name in grammar.unary_order() {
            let v = var_id(&name);
            let ids: Vec<usize> = rules
                .iter()
                .filter(|r| r.lhs == v && matches!(r.rhs.as_slice(), [Sym::Var(_)]))
                .map(|r| r.id)
                .collect();
            if !ids.is_empty() {
                unary.push((v, ids));
            }
        }
        let start = var_id(&grammar.start);
        Parser {
            grammar,
            literals,
            var_names,
            start,
            rules,
            chain_rules,
            unary,
        }
    }

    pub fn bundled() -> Parser {
        Parser::new(Arc::new(Grammar::bundled()))
    }

    pub fn grammar(&self) -> &Arc<Grammar> {
        &self.grammar
    }

    /// Ranked full-span derivations of the start variable.
    pub fn parse(&self, tagged: &TaggedQuery, weights: &Weights, beam: usize) -> Result<Vec<Derivation>> {
        let n = tagged.tokens.len();
        if n == 0 || beam == 0 {
            return Err(Error::ParseRejected);
        }
        let lit_at = tagged
            .tokens
            .iter()
            .map(|t| self.literals.iter().position(|l| *l == t.normalized))
            .collect();
        let numbers = tagged
            .tokens
            .iter()
            .map(|t| match t.kind {
                TokenKind::Number | TokenKind::Word => parse_number(&t.normalized),
                _ => None,
            })
            .collect();
        let mut spans_at = vec![Vec::new(); n];
        for s in tagged.tag_spans.iter().filter(|s| !s.suppressed) {
            spans_at[s.start].push((s.end, PlaceholderKind::of_category(s.category), s.value.clone()));
        }
        let ph_w = PlaceholderKind::ALL
            .into_iter()
            .map(|k| (k, weights.get(&format!("ph:{}", k.as_str()))))
            .collect();
        let mut chart = Chart {
            parser: self,
            tagged,
            beam,
            n,
            rule_w: self.rules.iter().map(|r| weights.get(&rule_feature(r.id))).collect(),
            ph_w,
            wild_w: weights.get("wildcard"),
            lit_at,
            numbers,
            spans_at,
            cells: vec![Vec::new(); (n + 1) * (n + 1)],
            memo: HashMap::new(),
        };
        chart.fill();
        let top = chart.cell(0, n)[self.start].clone();
        let mut out: Vec<Derivation> = top
            .into_iter()
            .filter_map(|tree| {
                let frames = tree.value.clone().into_frames()?;
                let features = tree.features();
                let score = weights.dot(&features);
                Some(Derivation {
                    tree,
                    frames,
                    features,
                    score,
                })
            })
            .collect();
        if out.is_empty() {
            return Err(Error::ParseRejected);
        }
        out.sort_by(|a, b| rank(a.score, a.tree.size, &a.tree.seq, b.score, b.tree.size, &b.tree.seq));
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tagger::{Category, Lexicon, TagContext, TaggerConfig};

    const TOY: &str = "
start Query
Query := Command => list(%1)
Command := ~visualize Columns => merge(frame(visualize), %2)
Command := ~visualize Columns 'in' @DET $NodeType => set(merge(frame(visualize), %2), targets, new(%5))
Command := ~visualize 'a' 'plot' 'of' Rows => set(frame(visualize), targets, new())
Command := ~visualize 'a' 'plot' 'of' Columns => set(merge(frame(visualize), %5), targets, new())
Rows := * => frame()
Columns := ColumnList => set(frame(), columns, %1)
ColumnList := $Column => list(%1)
ColumnList := $Column 'and' ColumnList => list(%1, %3)
";

    fn setup(q: &str) -> TaggedQuery {
        let mut ctx = TagContext::new();
        for c in ["mpg", "horsepower"] {
            ctx.add(Category::Column, c, c);
        }
        let ctx = ctx.with_node_types();
        TaggedQuery::analyze(q, &ctx, &TaggerConfig::default(), &Lexicon::default())
    }

    fn toy() -> Parser {
        Parser::new(Arc::new(Grammar::parse(TOY).unwrap()))
    }

    #[test]
    fn parses_column_lists() {
        let p = toy();
        let d = p
            .parse(&setup("Show mpg and horsepower in a scatterplot"), &Weights::zero(), 64)
            .unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(
            d[0].signature(),
            "visualize:columns=mpg+horsepower,target=new(scatterplot)"
        );
        assert_eq!(d[0].features["ph:Column"], 2.0);
        assert_eq!(d[0].features["ph:NodeType"], 1.0);
        assert_eq!(d[0].tree.start, 0);
        assert_eq!(d[0].tree.end, 7);
    }

    #[test]
    fn rejects_unknown_queries() {
        let p = toy();
        assert_eq!(
            p.parse(&setup("What time is it now"), &Weights::zero(), 64)
                .unwrap_err(),
            Error::ParseRejected
        );
        assert_eq!(
            p.parse(&setup(""), &Weights::zero(), 64).unwrap_err(),
            Error::ParseRejected
        );
    }

    #[test]
    fn ambiguity_ranked_by_weights() {
        let p = toy();
        let q = setup("Show a plot of horsepower");
        let d = p.parse(&q, &Weights::zero(), 64).unwrap();
        assert_eq!(d.len(), 2);
        // zero weights: smaller tree first, so the wildcard reading wins
        assert_eq!(d[0].signature(), "visualize:target=new()");
        let mut w = Weights::zero();
        w.set("ph:Column", 1.0);
        let d = p.parse(&q, &w, 64).unwrap();
        assert_eq!(d[0].signature(), "visualize:columns=horsepower,target=new()");
        for der in &d {
            assert!((der.score - w.dot(&der.features)).abs() < 1e-12);
        }
    }

    #[test]
    fn features_count_rule_uses() {
        let p = toy();
        let d = p
            .parse(&setup("Show mpg and horsepower and mpg"), &Weights::zero(), 64)
            .unwrap();
        let ids: Vec<usize> = p
            .grammar()
            .rules
            .iter()
            .filter(|r| r.lhs == "ColumnList")
            .map(|r| r.id)
            .collect();
        assert_eq!(d[0].features[&rule_feature(ids[0])], 1.0);
        assert_eq!(d[0].features[&rule_feature(ids[1])], 2.0);
        let again = p
            .parse(&setup("Show mpg and horsepower and mpg"), &Weights::zero(), 64)
            .unwrap();
        assert_eq!(again[0].features, d[0].features);
    }
}
