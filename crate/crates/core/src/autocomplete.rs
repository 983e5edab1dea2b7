//! Template-driven query suggestions and special utterance completion.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parser::{Parser, Weights};
use crate::tagger::{Category, Lexicon, TagContext, TaggedQuery, TaggerConfig};

const DEFAULT_TEMPLATES: &str = include_str!("../resources/templates.txt");

/// Values used to check that value slots accept user input.
pub const SAMPLE_NUMBER: &str = "10";
pub const SAMPLE_STRING: &str = "japan";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Slot {
    String,
    Number,
    Column,
    NodeType,
    NodeLabel,
    Dataset,
}

impl Slot {
    fn parse(text: &str) -> Option<Slot> {
        Some(match text {
            "[string]" => Slot::String,
            "[number]" => Slot::Number,
            "[column]" => Slot::Column,
            "[nodeType]" => Slot::NodeType,
            "[nodeLabel]" => Slot::NodeLabel,
            "[dataset]" => Slot::Dataset,
            _ => return None,
        })
    }

    pub fn text(self) -> &'static str {
        match self {
            Slot::String => "[string]",
            Slot::Number => "[number]",
            Slot::Column => "[column]",
            Slot::NodeType => "[nodeType]",
            Slot::NodeLabel => "[nodeLabel]",
            Slot::Dataset => "[dataset]",
        }
    }

    pub fn category(self) -> Option<Category> {
        match self {
            Slot::Column => Some(Category::Column),
            Slot::NodeType => Some(Category::NodeType),
            Slot::NodeLabel => Some(Category::NodeLabel),
            Slot::Dataset => Some(Category::DatasetName),
            Slot::String | Slot::Number => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Piece {
    Word(String),
    Slot(Slot),
    /// `*items`: whatever the user calls the rows ("cars", "sales"),
    /// written as "items" until typed.
    Rows,
}

const ROWS: &str = "items";

/// Words that never name rows.
const NOT_ROWS: &[&str] = &[
    "a", "an", "the", "and", "by", "from", "in", "of", "to", "with", "whose", "where",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    pub pieces: Vec<Piece>,
}

impl Template {
    pub fn parse(line: &str) -> Template {
        let pieces = line
            .split_whitespace()
            .map(|w| match Slot::parse(w) {
                Some(s) => Piece::Slot(s),
                None if w == "*items" => Piece::Rows,
                None => Piece::Word(w.to_lowercase()),
            })
            .collect();
        Template { pieces }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateSet {
    pub templates: Vec<Template>,
}

impl TemplateSet {
    pub fn bundled() -> TemplateSet {
        TemplateSet::from_text(DEFAULT_TEMPLATES).expect("bundled templates are valid")
    }

    /// One template per line; `#` starts a comment line.
    pub fn from_text(text: &str) -> Result<TemplateSet> {
        let mut templates = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(bad) = line
                .split_whitespace()
                .find(|w| w.starts_with('[') && Slot::parse(w).is_none())
            {
                return Err(Error::MalformedData(format!(
                    "templates line {}: unknown slot {bad}",
                    n + 1
                )));
            }
            templates.push(Template::parse(line));
        }
        Ok(TemplateSet { templates })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Suggestion {
    /// Query text; value slots stay as `[string]` / `[number]`.
    pub text: String,
    pub score: f64,
    pub template: usize,
}

/// What the parser needs to check a suggestion.
pub struct Checker<'a> {
    pub parser: &'a Parser,
    pub weights: &'a Weights,
    pub lexicon: &'a Lexicon,
    pub tagger: &'a TaggerConfig,
    pub beam: usize,
}

impl Checker<'_> {
    fn score(&self, text: &str, context: &TagContext) -> Option<f64> {
        let tagged = TaggedQuery::analyze(text, context, self.tagger, self.lexicon);
        self.parser
            .parse(&tagged, self.weights, self.beam)
            .ok()
            .map(|d| d[0].score)
    }
}

/// Fills value slots with sample values.
pub fn fill_values(text: &str, number: &str, string: &str) -> String {
    text.split(' ')
        .map(|w| match Slot::parse(w) {
            Some(Slot::Number) => number,
            Some(Slot::String) => string,
            _ => w,
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn words(text: &str) -> Vec<String> {
    text.split_whitespace().map(str::to_lowercase).collect()
}

/// Partial input split into complete words and a trailing fragment.
struct Input {
    words: Vec<String>,
    fragment: Option<String>,
}

impl Input {
    fn new(partial: &str) -> Input {
        let mut words = words(partial);
        let fragment = if partial.ends_with(char::is_whitespace) || words.is_empty() {
            None
        } else {
            words.pop()
        };
        Input { words, fragment }
    }

    fn len(&self) -> usize {
        self.words.len() + usize::from(self.fragment.is_some())
    }

    fn matches(&self, i: usize, candidate: &str) -> bool {
        if i < self.words.len() {
            self.words[i] == candidate
        } else {
            self.fragment.as_deref().is_some_and(|f| candidate.starts_with(f))
        }
    }
}

/// Alignment state: template position, input position, filled slots.
#[derive(Debug, Clone)]
struct Partial {
    piece: usize,
    pos: usize,
    filled: Vec<String>,
}

fn align(template: &Template, input: &Input, context: &TagContext) -> Vec<Vec<String>> {
    let mut done = Vec::new();
    let mut stack = vec![Partial {
        piece: 0,
        pos: 0,
        filled: Vec::new(),
    }];
    while let Some(p) = stack.pop() {
        if p.pos == input.len() {
            done.push(p.filled);
            continue;
        }
        let Some(piece) = template.pieces.get(p.piece) else {
            continue;
        };
        match piece {
            Piece::Word(w) => {
                if input.matches(p.pos, w) {
                    stack.push(Partial {
                        piece: p.piece + 1,
                        pos: p.pos + 1,
                        filled: p.filled,
                    });
                }
            }
            Piece::Rows => {
                let word = match input.words.get(p.pos) {
                    Some(w) => Some(w.clone()).filter(|w| w.parse::<f64>().is_err() && !NOT_ROWS.contains(&w.as_str())),
                    None => input
                        .fragment
                        .as_ref()
                        .filter(|f| ROWS.starts_with(f.as_str()))
                        .map(|_| ROWS.to_string()),
                };
                if let Some(w) = word {
                    let mut filled = p.filled;
                    filled.push(w);
                    stack.push(Partial {
                        piece: p.piece + 1,
                        pos: p.pos + 1,
                        filled,
                    });
                }
            }
            Piece::Slot(slot) => match slot.category() {
                Some(cat) => {
                    for u in context.of(cat) {
                        let surface = words(&u.surface);
                        // the input may end inside a multi-word utterance
                        let n = surface.len().min(input.len() - p.pos);
                        if (0..n).all(|k| input.matches(p.pos + k, &surface[k])) {
                            let mut filled = p.filled.clone();
                            filled.push(u.surface.clone());
                            stack.push(Partial {
                                piece: p.piece + 1,
                                pos: (p.pos + surface.len()).min(input.len()),
                                filled,
                            });
                        }
                    }
                }
                None => {
                    let word = input.words.get(p.pos).or(input.fragment.as_ref());
                    if let Some(w) = word.filter(|w| *slot == Slot::String || w.parse::<f64>().is_ok()) {
                        let mut filled = p.filled.clone();
                        filled.push(w.clone());
                        stack.push(Partial {
                            piece: p.piece + 1,
                            pos: p.pos + 1,
                            filled,
                        });
                    }
                }
            },
        }
    }
    done
}

/// Writes out `template`, using `filled` for its first slots and default
/// context entries for the rest. None when the context lacks entries.
fn instantiate(template: &Template, filled: &[String], context: &TagContext) -> Option<String> {
    let mut out: Vec<String> = Vec::new();
    let mut used: Vec<String> = filled.to_vec();
    let mut k = 0;
    for piece in &template.pieces {
        match piece {
            Piece::Word(w) => out.push(w.clone()),
            Piece::Rows => {
                out.push(filled.get(k).cloned().unwrap_or_else(|| ROWS.to_string()));
                k += 1;
            }
            Piece::Slot(slot) => {
                if let Some(v) = filled.get(k) {
                    out.push(v.clone());
                } else {
                    match slot.category() {
                        Some(cat) => {
                            let pick = context
                                .of(cat)
                                .map(|u| u.surface.clone())
                                .find(|s| !used.contains(s))
                                .or_else(|| context.of(cat).next().map(|u| u.surface.clone()))?;
                            used.push(pick.clone());
                            out.push(pick);
                        }
                        None => out.push(slot.text().to_string()),
                    }
                }
                k += 1;
            }
        }
    }
    Some(out.join(" "))
}

/// Suggestions extending `partial`, each accepted by the parser once its
/// value slots are filled. An empty partial lists templates in file order.
pub fn complete_query(
    partial: &str,
    context: &TagContext,
    templates: &TemplateSet,
    checker: &Checker<'_>,
    max_results: usize,
) -> Vec<Suggestion> {
    let input = Input::new(partial);
    let mut out: Vec<Suggestion> = Vec::new();
    for (ti, t) in templates.templates.iter().enumerate() {
        for filled in align(t, &input, context) {
            let Some(text) = instantiate(t, &filled, context) else {
                continue;
            };
            if out.iter().any(|s| s.text == text) {
                continue;
            }
            let probe = fill_values(&text, SAMPLE_NUMBER, SAMPLE_STRING);
            if let Some(score) = checker.score(&probe, context) {
                out.push(Suggestion {
                    text,
                    score,
                    template: ti,
                });
            }
        }
    }
    if partial.trim().is_empty() {
        out.sort_by_key(|s| s.template);
    } else {
        out.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.template.cmp(&b.template)));
    }
    out.truncate(max_results);
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenCandidate {
    pub utterance: String,
    pub category: Category,
}

/// Context utterances starting with `partial_word`, by category then length.
pub fn complete_token(partial_word: &str, context: &TagContext) -> Vec<TokenCandidate> {
    let p = partial_word.trim().to_lowercase();
    if p.is_empty() {
        return Vec::new();
    }
    let mut out: Vec<TokenCandidate> = Vec::new();
    for u in &context.entries {
        if u.surface.to_lowercase().starts_with(&p)
            && !out.iter().any(|c| c.utterance == u.surface && c.category == u.category)
        {
            out.push(TokenCandidate {
                utterance: u.surface.clone(),
                category: u.category,
            });
        }
    }
    out.sort();
    out
}

impl PartialOrd for TokenCandidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for TokenCandidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.category
            .cmp(&other.category)
            .then(self.utterance.len().cmp(&other.utterance.len()))
            .then_with(|| self.utterance.cmp(&other.utterance))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demo;
    use crate::engine::Engine;

    fn setup() -> (Engine, TagContext) {
        let e = Engine::bundled();
        let ctx = e.context(&demo::base_diagram());
        (e, ctx)
    }

    #[test]
    fn every_template_parses_when_filled() {
        let (e, ctx) = setup();
        let checker = Checker {
            parser: &e.parser,
            weights: &e.weights,
            lexicon: &e.lexicon,
            tagger: &e.config.tagger,
            beam: e.config.beam,
        };
        assert!(e.templates.templates.len() >= 50);
        for t in &e.templates.templates {
            let text = instantiate(t, &[], &ctx).expect("context fills every slot");
            let probe = fill_values(&text, SAMPLE_NUMBER, SAMPLE_STRING);
            assert!(checker.score(&probe, &ctx).is_some(), "template rejected: {probe}");
        }
    }

    #[test]
    fn suggestions_extend_the_partial() {
        let (e, _) = setup();
        let d = demo::base_diagram();
        let out = e.suggest(&d, "Show a ", 20);
        assert!(!out.is_empty());
        assert!(out.iter().all(|s| s.text.starts_with("show a ")));
        assert!(out.iter().any(|s| s.text.starts_with("show a scatterplot of")));
        assert!(e.suggest(&d, "zzz qqq", 20).is_empty());
    }

    #[test]
    fn empty_partial_follows_template_order() {
        let (e, _) = setup();
        let out = e.suggest(&demo::base_diagram(), "", 5);
        assert_eq!(out.len(), 5);
        assert!(out.windows(2).all(|w| w[0].template < w[1].template));
    }

    #[test]
    fn value_slots_keep_typed_numbers() {
        let (e, _) = setup();
        let out = e.suggest(&demo::base_diagram(), "filter items with mpg greater than 3", 5);
        assert!(
            out.iter().any(|s| s.text == "filter items with mpg greater than 3"),
            "{out:?}"
        );
        let open = e.suggest(&demo::base_diagram(), "filter items with mpg between", 5);
        assert!(open.iter().any(|s| s.text.contains("[number]")));
    }

    #[test]
    fn typed_row_nouns_are_kept() {
        let (e, _) = setup();
        let out = e.suggest(&demo::base_diagram(), "Find 3 cars wi", 10);
        assert!(!out.is_empty());
        assert!(out.iter().all(|s| s.text.starts_with("find 3 cars with")), "{out:?}");
        let out = e.suggest(&demo::base_diagram(), "highlight the selected it", 10);
        assert!(out.iter().any(|s| s.text == "highlight the selected items"));
    }

    #[test]
    fn token_completion() {
        let (_, ctx) = setup();
        let scatter = complete_token("scatter", &ctx);
        assert_eq!(scatter[0].utterance, "scatterplot");
        assert_eq!(scatter[0].category, Category::NodeType);
        let hors = complete_token("HORS", &ctx);
        assert_eq!(
            hors,
            vec![TokenCandidate {
                utterance: "horsepower".into(),
                category: Category::Column
            }]
        );
        assert!(complete_token("zzz", &ctx).is_empty());
        assert!(complete_token("", &ctx).is_empty());
    }
}
