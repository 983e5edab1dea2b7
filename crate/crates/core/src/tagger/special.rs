use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::distance::levenshtein_ratio;
use super::tokenize::{tokenize, Token, TokenKind};
use crate::dataflow::{Diagram, NodeKind};
use crate::error::{Error, Result};

/// Special-utterance categories in precedence order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    Column,
    NodeLabel,
    NodeType,
    DatasetName,
}

impl Category {
    pub const ALL: [Category; 4] = [
        Category::Column,
        Category::NodeLabel,
        Category::NodeType,
        Category::DatasetName,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Column => "Column",
            Category::NodeLabel => "NodeLabel",
            Category::NodeType => "NodeType",
            Category::DatasetName => "DatasetName",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Surface forms for node types. Bare "filter" and "table" are left out:
/// they are far more often a verb or part of a dataset phrase.
pub const NODE_TYPE_SURFACES: &[(&str, &str)] = &[
    ("scatterplot", "scatterplot"),
    ("scatter plot", "scatterplot"),
    ("histogram", "histogram"),
    ("parallel coordinates", "parallel-coordinates"),
    ("parallel coordinate", "parallel-coordinates"),
    ("line chart", "line-chart"),
    ("line plot", "line-chart"),
    ("heatmap", "heatmap"),
    ("heat map", "heatmap"),
    ("map", "map"),
    ("table view", "table-view"),
    ("attribute filter", "attribute-filter"),
    ("visual editor", "visual-editor"),
    ("color editor", "visual-editor"),
    ("set operator", "set-operator"),
    ("data source", "data-source"),
    ("constants extractor", "constants-extractor"),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Utterance {
    pub category: Category,
    /// Text as it may appear in a query.
    pub surface: String,
    /// The entity it resolves to.
    pub value: String,
}

/// The live special utterances a query may mention.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TagContext {
    pub entries: Vec<Utterance>,
}

impl TagContext {
    pub fn new() -> TagContext {
        TagContext::default()
    }

    pub fn add(&mut self, category: Category, surface: impl Into<String>, value: impl Into<String>) {
        let surface = surface.into();
        let value = value.into();
        if !self
            .entries
            .iter()
            .any(|u| u.category == category && u.surface.eq_ignore_ascii_case(&surface))
        {
            self.entries.push(Utterance {
                category,
                surface,
                value,
            });
        }
    }

    pub fn with_node_types(mut self) -> TagContext {
        for (surface, value) in NODE_TYPE_SURFACES {
            self.add(Category::NodeType, *surface, *value);
        }
        self
    }

    /// Columns come from datasets that have a data source node; dataset
    /// names come from every registered dataset.
    pub fn from_diagram(diagram: &Diagram) -> TagContext {
        let mut ctx = TagContext::new();
        let loaded: BTreeSet<&str> = diagram
            .nodes()
            .filter_map(|n| match &n.kind {
                NodeKind::DataSource { table } => Some(table.as_str()),
                _ => None,
            })
            .collect();
        for table in diagram.datasets().filter(|t| loaded.contains(t.name.as_str())) {
            for col in &table.columns {
                ctx.add(Category::Column, col.name.clone(), col.name.clone());
            }
        }
        for node in diagram.nodes() {
            ctx.add(Category::NodeLabel, node.label.clone(), node.label.clone());
        }
        let mut ctx = ctx.with_node_types();
        for table in diagram.datasets() {
            ctx.add(Category::DatasetName, table.name.clone(), table.name.clone());
        }
        ctx
    }

    pub fn of(&self, category: Category) -> impl Iterator<Item = &Utterance> {
        self.entries.iter().filter(move |u| u.category == category)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaggerConfig {
    pub max_gram: usize,
    pub ratio_threshold: f64,
}

impl Default for TaggerConfig {
    fn default() -> Self {
        TaggerConfig {
            max_gram: 3,
            ratio_threshold: 0.2,
        }
    }
}

impl TaggerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_gram < 1 {
            return Err(Error::OptionsError("maxGram must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.ratio_threshold) {
            return Err(Error::OptionsError("ratio threshold must lie in [0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub category: Category,
    pub value: String,
    pub ratio: f64,
}

/// A tagged token range `[start, end)`. A suppressed span keeps its
/// candidates but is ignored by the parser.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TagSpan {
    pub start: usize,
    pub end: usize,
    pub category: Category,
    pub value: String,
    pub ratio: f64,
    pub candidates: Vec<Candidate>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub suppressed: bool,
}

impl TagSpan {
    pub fn overlaps(&self, other: &TagSpan) -> bool {
        self.start < other.end && other.start < self.end
    }
}

fn candidate_order(a: &Candidate, b: &Candidate) -> Ordering {
    a.ratio
        .total_cmp(&b.ratio)
        .then(a.category.cmp(&b.category))
        .then(a.value.cmp(&b.value))
}

/// Compares every k-gram of wordlike tokens against every context entry.
pub fn tag_special_utterances(tokens: &[Token], context: &TagContext, config: &TaggerConfig) -> Vec<TagSpan> {
    let mut entries: Vec<(String, usize, &Utterance)> = Vec::new();
    for u in &context.entries {
        let mut surfaces = vec![u.surface.clone()];
        if u.surface.contains('_') {
            surfaces.push(u.surface.replace('_', " "));
        }
        for surface in surfaces {
            let words: Vec<String> = tokenize(&surface).into_iter().map(|t| t.normalized).collect();
            if !words.is_empty() {
                entries.push((words.join(" "), words.len(), u));
            }
        }
    }
    let longest = entries.iter().map(|(_, n, _)| *n).max().unwrap_or(0);
    let max_k = config.max_gram.max(longest);
    let eligible: Vec<bool> = tokens.iter().map(|t| t.kind == TokenKind::Word).collect();

    let mut found: Vec<TagSpan> = Vec::new();
    for start in 0..tokens.len() {
        for k in 1..=max_k {
            let end = start + k;
            if end > tokens.len() || !eligible[end - 1] {
                break;
            }
            let gram = tokens[start..end]
                .iter()
                .map(|t| t.normalized.as_str())
                .collect::<Vec<_>>()
                .join(" ");
            let gram_len = gram.chars().count();
            let mut candidates: Vec<Candidate> = Vec::new();
            for (surface, words, u) in &entries {
                // a gram only matches entries with the same word count, so
                // "a scatterplot" never absorbs its determiner
                if *words != k {
                    continue;
                }
                let len = surface.chars().count();
                let max = len.max(gram_len) as f64;
                if (len.abs_diff(gram_len) as f64) / max > config.ratio_threshold {
                    continue;
                }
                let ratio = levenshtein_ratio(&gram, surface);
                if ratio <= config.ratio_threshold {
                    match candidates
                        .iter_mut()
                        .find(|c| c.category == u.category && c.value == u.value)
                    {
                        Some(c) => c.ratio = c.ratio.min(ratio),
                        None => candidates.push(Candidate {
                            category: u.category,
                            value: u.value.clone(),
                            ratio,
                        }),
                    }
                }
            }
            if candidates.is_empty() {
                continue;
            }
            candidates.sort_by(candidate_order);
            let best = candidates[0].clone();
            found.push(TagSpan {
                start,
                end,
                category: best.category,
                value: best.value,
                ratio: best.ratio,
                candidates,
                suppressed: false,
            });
        }
    }

    found.sort_by(|a, b| {
        (b.end - b.start)
            .cmp(&(a.end - a.start))
            .then(a.ratio.total_cmp(&b.ratio))
            .then(a.category.cmp(&b.category))
            .then(a.start.cmp(&b.start))
    });
    let mut chosen: Vec<TagSpan> = Vec::new();
    for span in found {
        if !chosen.iter().any(|c| c.overlaps(&span)) {
            chosen.push(span);
        }
    }
    chosen.sort_by_key(|s| s.start);
    chosen
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "choice", rename_all = "lowercase")]
pub enum TagChoice {
    None,
    Candidate { category: Category, value: String },
}

/// Replaces the chosen interpretation of one span.
pub fn override_tag(spans: &[TagSpan], index: usize, choice: &TagChoice) -> Result<Vec<TagSpan>> {
    let mut out = spans.to_vec();
    let span = out
        .get_mut(index)
        .ok_or_else(|| Error::RangeError(format!("no tag span at index {index}")))?;
    match choice {
        TagChoice::None => span.suppressed = true,
        TagChoice::Candidate { category, value } => {
            let c = span
                .candidates
                .iter()
                .find(|c| c.category == *category && c.value == *value)
                .ok_or_else(|| {
                    Error::RangeError(format!("{category} {value:?} is not a candidate for span {index}"))
                })?;
            span.category = c.category;
            span.value = c.value.clone();
            span.ratio = c.ratio;
            span.suppressed = false;
        }
    }
    Ok(out)
}

/// Token indices covered by unsuppressed spans.
pub fn tagged_tokens(spans: &[TagSpan]) -> BTreeSet<usize> {
    spans
        .iter()
        .filter(|s| !s.suppressed)
        .flat_map(|s| s.start..s.end)
        .collect()
}
