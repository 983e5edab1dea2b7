use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TokenKind {
    Word,
    Number,
    Punct,
    Quoted,
}

/// A query token. Offsets are char positions into the original query;
/// quoted strings keep their quotes in `text` but not in `normalized`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    pub start: usize,
    pub end: usize,
    pub normalized: String,
    pub kind: TokenKind,
}

impl Token {
    fn new(chars: &[char], start: usize, end: usize, kind: TokenKind) -> Token {
        let text: String = chars[start..end].iter().collect();
        let normalized = match kind {
            TokenKind::Quoted => chars[start + 1..end - 1].iter().collect::<String>().to_lowercase(),
            _ => text.to_lowercase(),
        };
        Token {
            text,
            start,
            end,
            normalized,
            kind,
        }
    }

    /// Eligible for special-utterance matching and wildcards.
    pub fn is_wordlike(&self) -> bool {
        matches!(self.kind, TokenKind::Word | TokenKind::Number)
    }
}

fn is_operator(c: char) -> bool {
    matches!(c, '<' | '>' | '=' | '!')
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '-' | '\'' | '&' | '#' | '/')
}

/// Splits a query on whitespace and punctuation. Commas and comparison
/// operators become their own tokens; other punctuation is dropped.
pub fn tokenize(query: &str) -> Vec<Token> {
    let chars: Vec<char> = query.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '\'' || c == '"' {
            if let Some(close) = chars[i + 1..].iter().position(|&d| d == c) {
                let end = i + 1 + close + 1;
                if end - i > 2 {
                    tokens.push(Token::new(&chars, i, end, TokenKind::Quoted));
                }
                i = end;
                continue;
            }
            i += 1;
            continue;
        }
        if c == ',' {
            tokens.push(Token::new(&chars, i, i + 1, TokenKind::Punct));
            i += 1;
            continue;
        }
        if is_operator(c) {
            let start = i;
            while i < chars.len() && is_operator(chars[i]) {
                i += 1;
            }
            // a lone '!' is sentence punctuation
            if !(i - start == 1 && c == '!') {
                tokens.push(Token::new(&chars, start, i, TokenKind::Punct));
            }
            continue;
        }
        let numeric_start =
            c.is_ascii_digit() || ((c == '-' || c == '.') && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()));
        if is_word_char(c) || numeric_start {
            let start = i;
            i += 1;
            while i < chars.len() {
                let d = chars[i];
                let decimal_point =
                    d == '.' && chars[i - 1].is_ascii_digit() && chars.get(i + 1).is_some_and(|e| e.is_ascii_digit());
                if is_word_char(d) || decimal_point {
                    i += 1;
                } else {
                    break;
                }
            }
            // trailing apostrophes and hyphens are not part of the word
            let mut end = i;
            while end > start + 1 && matches!(chars[end - 1], '\'' | '-') {
                end -= 1;
            }
            let text: String = chars[start..end].iter().collect();
            let kind = if text.parse::<f64>().is_ok_and(f64::is_finite) {
                TokenKind::Number
            } else {
                TokenKind::Word
            };
            tokens.push(Token::new(&chars, start, end, kind));
            continue;
        }
        // other punctuation is dropped
        i += 1;
    }
    tokens
}

const UNITS: [&str; 21] = [
    "zero",
    "one",
    "two",
    "three",
    "four",
    "five",
    "six",
    "seven",
    "eight",
    "nine",
    "ten",
    "eleven",
    "twelve",
    "thirteen",
    "fourteen",
    "fifteen",
    "sixteen",
    "seventeen",
    "eighteen",
    "nineteen",
    "twenty",
];

const TENS: [(&str, f64); 8] = [
    ("thirty", 30.0),
    ("forty", 40.0),
    ("fifty", 50.0),
    ("sixty", 60.0),
    ("seventy", 70.0),
    ("eighty", 80.0),
    ("ninety", 90.0),
    ("hundred", 100.0),
];

/// Numeric literal or a simple English number word.
pub fn parse_number(word: &str) -> Option<f64> {
    let w = word.trim().to_lowercase();
    if let Ok(v) = w.parse::<f64>() {
        return v.is_finite().then_some(v);
    }
    if let Some(i) = UNITS.iter().position(|u| *u == w) {
        return Some(i as f64);
    }
    TENS.iter().find(|(t, _)| *t == w).map(|(_, v)| *v)
}
