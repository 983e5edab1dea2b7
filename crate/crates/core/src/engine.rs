//! The query pipeline: tag, parse, complete, execute, lay out.

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::autocomplete::{complete_query, complete_token, Checker, Suggestion, TemplateSet, TokenCandidate};
use crate::completion::{complete_frames, CompletedCommand, FocusTracker};
use crate::dataflow::Diagram;
use crate::error::{Error, Result};
use crate::executor::{execute, Execution, LayoutConfig};
use crate::grammar::Grammar;
use crate::parser::{Derivation, FunctionFrame, Parser, Weights, DEFAULT_BEAM};
use crate::tagger::{override_tag, Lexicon, TagChoice, TagContext, TaggedQuery, TaggerConfig, TokenKind};

/// Threshold used when checking whether a missed tag caused a rejection.
const LOOSE_RATIO: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ErrorCategory {
    ParseRejected,
    ContextInvalid,
    NotImplemented,
    NotSupported,
    TaggingError,
    Composite,
    OptionsError,
    Internal,
}

impl ErrorCategory {
    pub const ALL: [ErrorCategory; 8] = [
        ErrorCategory::ParseRejected,
        ErrorCategory::ContextInvalid,
        ErrorCategory::NotImplemented,
        ErrorCategory::NotSupported,
        ErrorCategory::TaggingError,
        ErrorCategory::Composite,
        ErrorCategory::OptionsError,
        ErrorCategory::Internal,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCategory::ParseRejected => "ParseRejected",
            ErrorCategory::ContextInvalid => "ContextInvalid",
            ErrorCategory::NotImplemented => "NotImplemented",
            ErrorCategory::NotSupported => "NotSupported",
            ErrorCategory::TaggingError => "TaggingError",
            ErrorCategory::Composite => "Composite",
            ErrorCategory::OptionsError => "OptionsError",
            ErrorCategory::Internal => "Internal",
        }
    }

    pub fn parse(text: &str) -> Option<ErrorCategory> {
        ErrorCategory::ALL.into_iter().find(|c| c.as_str() == text)
    }

    pub fn of(err: &Error) -> ErrorCategory {
        match err {
            Error::ParseRejected => ErrorCategory::ParseRejected,
            Error::NodeNotFound(_)
            | Error::UnknownNode(_)
            | Error::ColumnNotFound(_)
            | Error::InsufficientSources { .. }
            | Error::DatasetNotFound(_)
            | Error::TableMismatch(..)
            | Error::PortError(_)
            | Error::CycleError
            | Error::NothingToUndo
            | Error::NothingToRedo
            | Error::RangeError(_)
            | Error::NameConflict(_) => ErrorCategory::ContextInvalid,
            Error::OptionsError(_) => ErrorCategory::OptionsError,
            Error::NotImplemented(_) => ErrorCategory::NotImplemented,
            _ => ErrorCategory::Internal,
        }
    }
}

impl fmt::Display for ErrorCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A failed query, as shown to the user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub category: ErrorCategory,
    pub message: String,
    /// Token range `[start, end)` the failure points at.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span: Option<(usize, usize)>,
}

impl ErrorReport {
    pub fn new(category: ErrorCategory, message: impl Into<String>) -> ErrorReport {
        ErrorReport {
            category,
            message: message.into(),
            span: None,
        }
    }

    fn at(mut self, span: (usize, usize)) -> ErrorReport {
        self.span = Some(span);
        self
    }
}

impl From<Error> for ErrorReport {
    fn from(err: Error) -> Self {
        ErrorReport::new(ErrorCategory::of(&err), err.to_string())
    }
}

impl fmt::Display for ErrorReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.category, self.message)
    }
}

impl std::error::Error for ErrorReport {}

/// A user correction of one tag span, by span index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TagOverride {
    pub span: usize,
    #[serde(flatten)]
    pub choice: TagChoice,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct QueryOptions {
    #[serde(default)]
    pub overrides: Vec<TagOverride>,
    /// Index into the ranked derivations; 0 takes the best.
    #[serde(default)]
    pub derivation: usize,
}

/// A parsed and completed query, not yet applied.
#[derive(Debug, Clone)]
pub struct Interpretation {
    pub tagged: TaggedQuery,
    pub derivations: Vec<Derivation>,
    pub chosen: usize,
    pub command: CompletedCommand,
}

impl Interpretation {
    pub fn frames(&self) -> &[FunctionFrame] {
        &self.derivations[self.chosen].frames
    }

    pub fn signature(&self) -> String {
        self.derivations[self.chosen].signature()
    }
}

#[derive(Debug, Clone)]
pub struct QueryResult {
    pub interpretation: Interpretation,
    pub execution: Execution,
}

/// Per-user mutable state.
#[derive(Debug, Clone, Default)]
pub struct Session {
    pub diagram: Diagram,
    pub tracker: FocusTracker,
}

impl Session {
    pub fn new(diagram: Diagram) -> Session {
        Session {
            diagram,
            tracker: FocusTracker::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineConfig {
    pub tagger: TaggerConfig,
    pub beam: usize,
    pub layout: LayoutConfig,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            tagger: TaggerConfig::default(),
            beam: DEFAULT_BEAM,
            layout: LayoutConfig::default(),
        }
    }
}

/// Files replacing the bundled language resources.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResourcePaths {
    pub grammar: Option<PathBuf>,
    pub weights: Option<PathBuf>,
    pub templates: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Read-only language resources shared by all sessions.
#[derive(Debug)]
pub struct Engine {
    pub parser: Parser,
    pub weights: Weights,
    pub lexicon: Lexicon,
    pub templates: TemplateSet,
    pub config: EngineConfig,
}

impl Engine {
    pub fn new(grammar: Grammar, weights: Weights, templates: TemplateSet, config: EngineConfig) -> Result<Engine> {
        config.tagger.validate()?;
        Ok(Engine {
            parser: Parser::new(Arc::new(grammar)),
            weights,
            lexicon: Lexicon::default(),
            templates,
            config,
        })
    }

    pub fn bundled() -> Engine {
        Engine {
            parser: Parser::bundled(),
            weights: Weights::bundled(),
            lexicon: Lexicon::default(),
            templates: TemplateSet::bundled(),
            config: EngineConfig::default(),
        }
    }

    /// Builds an engine from the bundled resources with `paths` overriding
    /// individual files.
    pub fn load(paths: &ResourcePaths) -> Result<Engine> {
        let grammar = match &paths.grammar {
            Some(p) => Grammar::parse(&read(p)?)?,
            None => Grammar::bundled(),
        };
        let weights = match &paths.weights {
            Some(p) => Weights::from_text(&read(p)?)?,
            None => Weights::bundled(),
        };
        let templates = match &paths.templates {
            Some(p) => TemplateSet::from_text(&read(p)?)?,
            None => TemplateSet::bundled(),
        };
        Engine::new(grammar, weights, templates, EngineConfig::default())
    }

    pub fn with_weights(mut self, weights: Weights) -> Engine {
        self.weights = weights;
        self
    }

    pub fn context(&self, diagram: &Diagram) -> TagContext {
        TagContext::from_diagram(diagram)
    }

    pub fn tag(&self, diagram: &Diagram, query: &str) -> TaggedQuery {
        self.tag_with(query, &self.context(diagram), &self.config.tagger)
    }

    fn tag_with(&self, query: &str, context: &TagContext, tagger: &TaggerConfig) -> TaggedQuery {
        TaggedQuery::analyze(query, context, tagger, &self.lexicon)
    }

    pub fn tag_overridden(&self, diagram: &Diagram, query: &str, overrides: &[TagOverride]) -> Result<TaggedQuery> {
        let mut tagged = self.tag(diagram, query);
        for o in overrides {
            tagged.tag_spans = override_tag(&tagged.tag_spans, o.span, &o.choice)?;
        }
        Ok(tagged)
    }

    pub fn parse(&self, tagged: &TaggedQuery) -> Result<Vec<Derivation>> {
        self.parser.parse(tagged, &self.weights, self.config.beam)
    }

    /// Tags, parses and completes `query` without touching the diagram.
    pub fn interpret(
        &self,
        session: &Session,
        query: &str,
        options: &QueryOptions,
    ) -> std::result::Result<Interpretation, ErrorReport> {
        let tagged = self.tag_overridden(&session.diagram, query, &options.overrides)?;
        let derivations = match self.parse(&tagged) {
            Ok(d) => d,
            Err(Error::ParseRejected) => return Err(self.classify_rejection(&session.diagram, query, &tagged)),
            Err(e) => return Err(e.into()),
        };
        let chosen = options.derivation;
        let Some(d) = derivations.get(chosen) else {
            return Err(ErrorReport::new(
                ErrorCategory::OptionsError,
                format!("derivation {chosen} requested but only {} exist", derivations.len()),
            ));
        };
        let command = complete_frames(&d.frames, &session.diagram, &session.tracker)?;
        Ok(Interpretation {
            tagged,
            derivations,
            chosen,
            command,
        })
    }

    /// Runs `query` against the session. On error the diagram is unchanged.
    pub fn run(
        &self,
        session: &mut Session,
        query: &str,
        options: &QueryOptions,
    ) -> std::result::Result<QueryResult, ErrorReport> {
        let interpretation = self.interpret(session, query, options)?;
        let focus = session.tracker.rank(&session.diagram, |_| true).first().copied();
        let execution = execute(
            &interpretation.command,
            &mut session.diagram,
            focus,
            &self.config.layout,
        )?;
        session.tracker.purge(&session.diagram);
        Ok(QueryResult {
            interpretation,
            execution,
        })
    }

    fn parses(&self, tagged: &TaggedQuery) -> bool {
        self.parse(tagged).is_ok()
    }

    /// Explains why the grammar rejected `query`.
    pub fn classify_rejection(&self, diagram: &Diagram, query: &str, tagged: &TaggedQuery) -> ErrorReport {
        let words: Vec<&str> = tagged
            .tokens
            .iter()
            .filter(|t| t.kind == TokenKind::Word)
            .map(|t| t.normalized.as_str())
            .collect();
        if let Some(reason) = unsupported(&words) {
            return ErrorReport::new(ErrorCategory::NotSupported, reason);
        }
        if let Some(first) = words.first().filter(|w| UNIMPLEMENTED_VERBS.contains(w)) {
            return ErrorReport::new(
                ErrorCategory::NotImplemented,
                format!("\"{first}\" operations on existing nodes are not available"),
            );
        }

        let context = self.context(diagram);
        let loose = TaggerConfig {
            ratio_threshold: LOOSE_RATIO.max(self.config.tagger.ratio_threshold),
            ..self.config.tagger
        };
        let retagged = self.tag_with(query, &context, &loose);
        if retagged.tag_spans != tagged.tag_spans && self.parses(&retagged) {
            let missed = retagged
                .tag_spans
                .iter()
                .find(|s| !tagged.tag_spans.contains(s))
                .map(|s| (s.start, s.end));
            let report = ErrorReport::new(
                ErrorCategory::TaggingError,
                "a misspelled name was not recognized; check the tagged words",
            );
            return match missed {
                Some(span) => report.at(span),
                None => report,
            };
        }
        for (i, span) in tagged.tag_spans.iter().enumerate() {
            if span.suppressed {
                continue;
            }
            let Ok(spans) = override_tag(&tagged.tag_spans, i, &TagChoice::None) else {
                continue;
            };
            let attempt = TaggedQuery {
                tag_spans: spans,
                ..tagged.clone()
            };
            if self.parses(&attempt) {
                return ErrorReport::new(
                    ErrorCategory::TaggingError,
                    format!(
                        "\"{}\" was tagged as {} {:?}; the query parses without that tag",
                        token_text(tagged, span.start, span.end),
                        span.category,
                        span.value
                    ),
                )
                .at((span.start, span.end));
            }
        }

        let mut prefixes: Vec<(String, usize)> = split_points(tagged)
            .into_iter()
            .map(|cut| (query.chars().take(tagged.tokens[cut].start).collect(), cut))
            .collect();
        if let Some((head, _)) = query.split_once(';') {
            let cut = tagged
                .tokens
                .iter()
                .take_while(|t| t.end <= head.chars().count())
                .count();
            prefixes.push((head.to_string(), cut));
        }
        for (prefix, cut) in prefixes {
            let attempt = self.tag_with(prefix.trim_end_matches([' ', ',']), &context, &self.config.tagger);
            if !attempt.tokens.is_empty() && self.parses(&attempt) {
                return ErrorReport::new(
                    ErrorCategory::Composite,
                    "the query combines several functions; try splitting it into separate queries",
                )
                .at((0, cut));
            }
        }
        ErrorReport::new(ErrorCategory::ParseRejected, "the query was not understood")
    }

    fn checker(&self) -> Checker<'_> {
        Checker {
            parser: &self.parser,
            weights: &self.weights,
            lexicon: &self.lexicon,
            tagger: &self.config.tagger,
            beam: self.config.beam,
        }
    }

    pub fn suggest(&self, diagram: &Diagram, partial: &str, max_results: usize) -> Vec<Suggestion> {
        complete_query(
            partial,
            &self.context(diagram),
            &self.templates,
            &self.checker(),
            max_results,
        )
    }

    pub fn complete_token(&self, diagram: &Diagram, partial_word: &str) -> Vec<TokenCandidate> {
        complete_token(partial_word, &self.context(diagram))
    }

    /// Whether the parser accepts `query` in the diagram's context.
    pub fn accepts(&self, diagram: &Diagram, query: &str) -> bool {
        self.parses(&self.tag(diagram, query))
    }
}

const UNIMPLEMENTED_VERBS: &[&str] = &["change", "rename", "sort", "move", "resize", "swap"];
const YES_NO: &[&str] = &[
    "does", "do", "did", "is", "are", "was", "were", "can", "could", "would", "will", "should", "has", "have",
];
const WH: &[&str] = &["what", "which", "who", "why", "how", "where", "when"];
const ANALYTIC: &[&str] = &[
    "average",
    "mean",
    "sum",
    "total",
    "count",
    "correlation",
    "correlated",
    "trend",
    "median",
    "increase",
    "decrease",
    "compare",
];

/// Analytic questions the dataflow model has no node for.
fn unsupported(words: &[&str]) -> Option<String> {
    let first = *words.first()?;
    if first == "how" && matches!(words.get(1), Some(&"many") | Some(&"much")) {
        return Some("counting questions are answered by reading a chart, not by a diagram change".into());
    }
    if YES_NO.contains(&first) {
        return Some("yes/no questions about the data cannot be answered with a diagram change".into());
    }
    if WH.contains(&first) && words.iter().any(|w| ANALYTIC.contains(w)) {
        return Some("analytic questions about the data cannot be answered with a diagram change".into());
    }
    None
}

/// Token indices where a composite query may be cut: before "and" or
/// "then" that follow at least two tokens.
fn split_points(tagged: &TaggedQuery) -> Vec<usize> {
    let toks = &tagged.tokens;
    let mut out = Vec::new();
    for i in 2..toks.len() {
        let t = toks[i].normalized.as_str();
        let cut = match t {
            "and" | "then" => {
                if toks[i - 1].normalized == "," {
                    i - 1
                } else {
                    i
                }
            }
            _ => continue,
        };
        if !out.contains(&cut) {
            out.push(cut);
        }
    }
    out
}

fn token_text(tagged: &TaggedQuery, start: usize, end: usize) -> String {
    tagged.tokens[start..end]
        .iter()
        .map(|t| t.text.as_str())
        .collect::<Vec<_>>()
        .join(" ")
}
