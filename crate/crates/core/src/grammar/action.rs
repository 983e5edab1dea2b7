use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Func {
    Frame,
    Set,
    List,
    Merge,
    Join,
    Label,
    Type,
    Dataset,
    Focus,
    New,
}

impl Func {
    const ALL: [Func; 10] = [
        Func::Frame,
        Func::Set,
        Func::List,
        Func::Merge,
        Func::Join,
        Func::Label,
        Func::Type,
        Func::Dataset,
        Func::Focus,
        Func::New,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Func::Frame => "frame",
            Func::Set => "set",
            Func::List => "list",
            Func::Merge => "merge",
            Func::Join => "join",
            Func::Label => "label",
            Func::Type => "type",
            Func::Dataset => "dataset",
            Func::Focus => "focus",
            Func::New => "new",
        }
    }

    fn arity(self) -> (usize, usize) {
        match self {
            Func::Frame | Func::New => (0, 1),
            Func::Set => (3, 3),
            Func::List | Func::Merge | Func::Join => (0, usize::MAX),
            Func::Label | Func::Type | Func::Dataset => (1, 1),
            Func::Focus => (0, 0),
        }
    }
}

impl FromStr for Func {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Func::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| format!("unknown action function {s:?}"))
    }
}

/// A semantic action expression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Action {
    /// `%n`, 1-based reference to an RHS constituent.
    Ref(usize),
    Str(String),
    Num(f64),
    Call(Func, Vec<Action>),
}

impl Action {
    /// Highest positional reference used anywhere in the expression.
    pub fn max_ref(&self) -> usize {
        match self {
            Action::Ref(n) => *n,
            Action::Str(_) | Action::Num(_) => 0,
            Action::Call(_, args) => args.iter().map(Action::max_ref).max().unwrap_or(0),
        }
    }

    /// The action used when a rule gives none: pass a single constituent
    /// through, otherwise merge all constituents.
    pub fn default_for(arity: usize) -> Action {
        if arity == 1 {
            Action::Ref(1)
        } else {
            Action::Call(Func::Merge, (1..=arity).map(Action::Ref).collect())
        }
    }

    pub fn parse(text: &str) -> Result<Action, String> {
        let toks = lex(text)?;
        let mut pos = 0;
        let action = parse_expr(&toks, &mut pos)?;
        if pos != toks.len() {
            return Err(format!("unexpected {:?} after action", toks[pos]));
        }
        Ok(action)
    }
}

fn is_bare(s: &str) -> bool {
    !s.is_empty()
        && s.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        && s.parse::<Func>().is_err()
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Ref(n) => write!(f, "%{n}"),
            Action::Str(s) if is_bare(s) => f.write_str(s),
            Action::Str(s) => write!(f, "'{s}'"),
            Action::Num(n) => write!(f, "{n}"),
            Action::Call(func, args) => {
                write!(f, "{}(", func.as_str())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ref(usize),
    Ident(String),
    Quoted(String),
    Num(f64),
    Open,
    Close,
    Comma,
}

fn lex(text: &str) -> Result<Vec<Tok>, String> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            _ if c.is_whitespace() => i += 1,
            '(' => {
                out.push(Tok::Open);
                i += 1;
            }
            ')' => {
                out.push(Tok::Close);
                i += 1;
            }
            ',' => {
                out.push(Tok::Comma);
                i += 1;
            }
            '%' => {
                let start = i + 1;
                i = start;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let digits: String = chars[start..i].iter().collect();
                let n: usize = digits.parse().map_err(|_| "expected a number after %".to_string())?;
                if n == 0 {
                    return Err("positional references start at %1".into());
                }
                out.push(Tok::Ref(n));
            }
            '\'' => {
                let close = chars[i + 1..]
                    .iter()
                    .position(|&d| d == '\'')
                    .ok_or("unterminated string in action")?;
                out.push(Tok::Quoted(chars[i + 1..i + 1 + close].iter().collect()));
                i += close + 2;
            }
            _ if c.is_ascii_digit() || c == '-' || c == '.' => {
                let start = i;
                i += 1;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                out.push(Tok::Num(s.parse().map_err(|_| format!("bad number {s:?}"))?));
            }
            _ if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '-') {
                    i += 1;
                }
                out.push(Tok::Ident(chars[start..i].iter().collect()));
            }
            _ => return Err(format!("unexpected character {c:?} in action")),
        }
    }
    Ok(out)
}

fn parse_expr(toks: &[Tok], pos: &mut usize) -> Result<Action, String> {
    let tok = toks.get(*pos).ok_or("unexpected end of action")?.clone();
    *pos += 1;
    match tok {
        Tok::Ref(n) => Ok(Action::Ref(n)),
        Tok::Quoted(s) => Ok(Action::Str(s)),
        Tok::Num(n) => Ok(Action::Num(n)),
        Tok::Ident(name) => {
            if toks.get(*pos) != Some(&Tok::Open) {
                return Ok(Action::Str(name));
            }
            *pos += 1;
            let func: Func = name.parse()?;
            let mut args = Vec::new();
            if toks.get(*pos) == Some(&Tok::Close) {
                *pos += 1;
            } else {
                loop {
                    args.push(parse_expr(toks, pos)?);
                    match toks.get(*pos) {
                        Some(Tok::Comma) => *pos += 1,
                        Some(Tok::Close) => {
                            *pos += 1;
                            break;
                        }
                        _ => return Err(format!("expected ',' or ')' in {name}(...)")),
                    }
                }
            }
            let (lo, hi) = func.arity();
            if args.len() < lo || args.len() > hi {
                return Err(format!("{name} takes {lo}..{hi} arguments, got {}", args.len()));
            }
            Ok(Action::Call(func, args))
        }
        other => Err(format!("unexpected {other:?} in action")),
    }
}
