use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::tokenize::{parse_number, Token, TokenKind};
use crate::error::{Error, Result};

const DEFAULT_SYNONYMS: &str = include_str!("../../resources/synonyms.tsv");
const DEFAULT_POS: &str = include_str!("../../resources/pos.tsv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FunctionIndicator {
    Visualize,
    Encode,
    Filter,
    Merge,
    Highlight,
    Link,
    Load,
    Undo,
    Redo,
    Remove,
}

impl FunctionIndicator {
    pub const ALL: [FunctionIndicator; 10] = [
        FunctionIndicator::Visualize,
        FunctionIndicator::Encode,
        FunctionIndicator::Filter,
        FunctionIndicator::Merge,
        FunctionIndicator::Highlight,
        FunctionIndicator::Link,
        FunctionIndicator::Load,
        FunctionIndicator::Undo,
        FunctionIndicator::Redo,
        FunctionIndicator::Remove,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FunctionIndicator::Visualize => "visualize",
            FunctionIndicator::Encode => "encode",
            FunctionIndicator::Filter => "filter",
            FunctionIndicator::Merge => "merge",
            FunctionIndicator::Highlight => "highlight",
            FunctionIndicator::Link => "link",
            FunctionIndicator::Load => "load",
            FunctionIndicator::Undo => "undo",
            FunctionIndicator::Redo => "redo",
            FunctionIndicator::Remove => "remove",
        }
    }
}

impl fmt::Display for FunctionIndicator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FunctionIndicator {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.to_ascii_lowercase();
        FunctionIndicator::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown function indicator {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PosTag {
    Verb,
    Noun,
    Adjective,
    Preposition,
    Determiner,
    Conjunction,
    Number,
    Pronoun,
    Other,
}

impl PosTag {
    pub const ALL: [PosTag; 9] = [
        PosTag::Verb,
        PosTag::Noun,
        PosTag::Adjective,
        PosTag::Preposition,
        PosTag::Determiner,
        PosTag::Conjunction,
        PosTag::Number,
        PosTag::Pronoun,
        PosTag::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PosTag::Verb => "verb",
            PosTag::Noun => "noun",
            PosTag::Adjective => "adjective",
            PosTag::Preposition => "preposition",
            PosTag::Determiner => "determiner",
            PosTag::Conjunction => "conjunction",
            PosTag::Number => "number",
            PosTag::Pronoun => "pronoun",
            PosTag::Other => "other",
        }
    }

    /// Short grammar-file spelling, as in `@PREP`.
    pub fn grammar_name(self) -> &'static str {
        match self {
            PosTag::Verb => "VERB",
            PosTag::Noun => "NOUN",
            PosTag::Adjective => "ADJ",
            PosTag::Preposition => "PREP",
            PosTag::Determiner => "DET",
            PosTag::Conjunction => "CONJ",
            PosTag::Number => "NUM",
            PosTag::Pronoun => "PRON",
            PosTag::Other => "OTHER",
        }
    }

    pub fn from_grammar_name(s: &str) -> Option<PosTag> {
        PosTag::ALL.into_iter().find(|p| p.grammar_name() == s)
    }
}

impl FromStr for PosTag {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.to_ascii_lowercase();
        PosTag::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown part of speech {s:?}"))
    }
}

fn read_table<T: FromStr<Err = String>>(text: &str) -> Result<HashMap<String, T>> {
    let mut out = HashMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (word, class) = line
            .split_once('\t')
            .ok_or_else(|| Error::MalformedData(format!("line {}: expected word<TAB>class", n + 1)))?;
        let class = class
            .trim()
            .parse()
            .map_err(|e| Error::MalformedData(format!("line {}: {e}", n + 1)))?;
        out.insert(word.trim().to_lowercase(), class);
    }
    Ok(out)
}

/// Extension point for classifying words the bundled lexicon does not know.
pub trait SimilarityScorer: Send + Sync {
    fn classify(&self, word: &str) -> Option<FunctionIndicator>;
}

/// Word lists backing POS tagging and function-word classification.
pub struct Lexicon {
    synonyms: HashMap<String, FunctionIndicator>,
    pos: HashMap<String, PosTag>,
    scorer: Option<Box<dyn SimilarityScorer>>,
}

impl fmt::Debug for Lexicon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Lexicon")
            .field("synonyms", &self.synonyms.len())
            .field("pos", &self.pos.len())
            .field("scorer", &self.scorer.is_some())
            .finish()
    }
}

impl Default for Lexicon {
    fn default() -> Self {
        Lexicon::from_text(DEFAULT_SYNONYMS, DEFAULT_POS).expect("bundled lexicon is valid")
    }
}

impl Lexicon {
    pub fn from_text(synonyms: &str, pos: &str) -> Result<Lexicon> {
        Ok(Lexicon {
            synonyms: read_table(synonyms)?,
            pos: read_table(pos)?,
            scorer: None,
        })
    }

    pub fn with_scorer(mut self, scorer: Box<dyn SimilarityScorer>) -> Lexicon {
        self.scorer = Some(scorer);
        self
    }

    fn lookup_synonym(&self, word: &str) -> Option<FunctionIndicator> {
        if let Some(k) = self.synonyms.get(word) {
            return Some(*k);
        }
        // crude inflection stripping: shows, highlighting
        for suffix in ["ing", "es", "s"] {
            if let Some(stem) = word.strip_suffix(suffix) {
                if stem.len() >= 3 {
                    if let Some(k) = self.synonyms.get(stem) {
                        return Some(*k);
                    }
                }
            }
        }
        None
    }

    pub fn classify_function_word(&self, word: &str) -> Option<FunctionIndicator> {
        let w = word.to_lowercase();
        self.lookup_synonym(&w)
            .or_else(|| self.scorer.as_ref().and_then(|s| s.classify(&w)))
    }

    pub fn pos_of(&self, token: &Token) -> PosTag {
        match token.kind {
            TokenKind::Number => return PosTag::Number,
            TokenKind::Punct => return PosTag::Other,
            TokenKind::Quoted => return PosTag::Noun,
            TokenKind::Word => {}
        }
        let w = token.normalized.as_str();
        if let Some(p) = self.pos.get(w) {
            return *p;
        }
        if parse_number(w).is_some() {
            return PosTag::Number;
        }
        if self.synonyms.contains_key(w) {
            return PosTag::Verb;
        }
        if w.ends_with("ly") {
            return PosTag::Other;
        }
        if w.ends_with("ed") || w.ends_with("ize") || w.ends_with("ise") {
            return PosTag::Verb;
        }
        PosTag::Noun
    }

    pub fn pos_tag(&self, tokens: &[Token]) -> Vec<PosTag> {
        tokens.iter().map(|t| self.pos_of(t)).collect()
    }
}
