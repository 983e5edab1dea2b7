//! Query tokenization and tagging.

mod distance;
mod lexicon;
mod special;
mod tokenize;

use serde::{Deserialize, Serialize};

pub use distance::{levenshtein, levenshtein_ratio};
pub use lexicon::{FunctionIndicator, Lexicon, PosTag, SimilarityScorer};
pub use special::{
    override_tag, tag_special_utterances, tagged_tokens, Candidate, Category, TagChoice, TagContext, TagSpan,
    TaggerConfig, Utterance, NODE_TYPE_SURFACES,
};
pub use tokenize::{parse_number, tokenize, Token, TokenKind};

/// Everything the parser needs to know about a query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TaggedQuery {
    pub tokens: Vec<Token>,
    pub tag_spans: Vec<TagSpan>,
    pub pos_tags: Vec<PosTag>,
    pub indicators: Vec<Option<FunctionIndicator>>,
}

impl TaggedQuery {
    pub fn analyze(query: &str, context: &TagContext, config: &TaggerConfig, lexicon: &Lexicon) -> TaggedQuery {
        let tokens = tokenize(query);
        let tag_spans = tag_special_utterances(&tokens, context, config);
        let pos_tags = lexicon.pos_tag(&tokens);
        let indicators = tokens
            .iter()
            .map(|t| match t.kind {
                TokenKind::Word => lexicon.classify_function_word(&t.normalized),
                _ => None,
            })
            .collect();
        TaggedQuery {
            tokens,
            tag_spans,
            pos_tags,
            indicators,
        }
    }
}
