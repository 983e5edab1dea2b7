use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::grammar::PlaceholderKind;
use crate::tagger::FunctionIndicator;

/// An unresolved reference to a diagram node.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "ref", content = "value", rename_all = "kebab-case")]
pub enum NodeRef {
    ByLabel(String),
    /// A visualization type, a node kind, or "visualization" for any chart.
    ByType(String),
    /// The data source node of a named dataset.
    ByDataset(String),
    ImplicitFocus,
    NewNode(Option<String>),
}

impl fmt::Display for NodeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeRef::ByLabel(l) => write!(f, "label({l})"),
            NodeRef::ByType(t) => write!(f, "type({t})"),
            NodeRef::ByDataset(d) => write!(f, "dataset({d})"),
            NodeRef::ImplicitFocus => f.write_str("focus()"),
            NodeRef::NewNode(Some(t)) => write!(f, "new({t})"),
            NodeRef::NewNode(None) => f.write_str("new()"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PortSpec {
    #[default]
    Unspecified,
    Data,
    Selection,
}

impl PortSpec {
    pub fn as_str(self) -> &'static str {
        match self {
            PortSpec::Unspecified => "unspecified",
            PortSpec::Data => "data",
            PortSpec::Selection => "selection",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OptionValue {
    Num(f64),
    Str(String),
    List(Vec<OptionValue>),
}

pub fn format_number(n: f64) -> String {
    if n.fract() == 0.0 && n.abs() < 1e15 {
        format!("{n:.0}")
    } else {
        format!("{n}")
    }
}

impl fmt::Display for OptionValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OptionValue::Num(n) => f.write_str(&format_number(*n)),
            OptionValue::Str(s) => f.write_str(s),
            OptionValue::List(items) => {
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str("+")?;
                    }
                    write!(f, "{v}")?;
                }
                Ok(())
            }
        }
    }
}

impl OptionValue {
    pub fn as_text(&self) -> Option<String> {
        match self {
            OptionValue::Num(n) => Some(format_number(*n)),
            OptionValue::Str(s) => Some(s.clone()),
            OptionValue::List(_) => None,
        }
    }

    pub fn as_num(&self) -> Option<f64> {
        match self {
            OptionValue::Num(n) => Some(*n),
            OptionValue::Str(s) => s.parse().ok(),
            OptionValue::List(_) => None,
        }
    }

    /// Scalars become one-element lists.
    pub fn texts(&self) -> Vec<String> {
        match self {
            OptionValue::List(items) => items.iter().filter_map(OptionValue::as_text).collect(),
            other => other.as_text().into_iter().collect(),
        }
    }
}

/// The five query components: function type, options, sources, targets
/// and port specification.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FunctionFrame {
    pub function: Option<FunctionIndicator>,
    pub options: BTreeMap<String, OptionValue>,
    pub sources: Vec<NodeRef>,
    pub targets: Vec<NodeRef>,
    pub port: PortSpec,
}

impl FunctionFrame {
    pub fn new(function: Option<FunctionIndicator>) -> FunctionFrame {
        FunctionFrame {
            function,
            ..FunctionFrame::default()
        }
    }

    /// Folds `other` into `self`: lists concatenate, scalars take the later
    /// value, the first function type wins.
    pub fn absorb(&mut self, other: FunctionFrame) {
        if self.function.is_none() {
            self.function = other.function;
        }
        for (k, v) in other.options {
            match (self.options.get_mut(&k), v) {
                (Some(OptionValue::List(a)), OptionValue::List(b)) => a.extend(b),
                (_, v) => {
                    self.options.insert(k, v);
                }
            }
        }
        self.sources.extend(other.sources);
        self.targets.extend(other.targets);
        if other.port != PortSpec::Unspecified {
            self.port = other.port;
        }
    }

    pub fn option(&self, key: &str) -> Option<&OptionValue> {
        self.options.get(key)
    }

    pub fn text(&self, key: &str) -> Option<String> {
        self.options.get(key).and_then(OptionValue::as_text)
    }

    pub fn num(&self, key: &str) -> Option<f64> {
        self.options.get(key).and_then(OptionValue::as_num)
    }

    pub fn texts(&self, key: &str) -> Vec<String> {
        self.options.get(key).map(OptionValue::texts).unwrap_or_default()
    }

    /// Compact text form, e.g.
    /// `visualize:columns=mpg+horsepower,port=selection,source=label(MyChart)`.
    pub fn signature(&self) -> String {
        let mut parts: Vec<(String, String)> = self.options.iter().map(|(k, v)| (k.clone(), v.to_string())).collect();
        if self.port != PortSpec::Unspecified {
            parts.push(("port".into(), self.port.as_str().into()));
        }
        let join = |refs: &[NodeRef]| refs.iter().map(|r| r.to_string()).collect::<Vec<_>>().join("+");
        if !self.sources.is_empty() {
            parts.push(("source".into(), join(&self.sources)));
        }
        if !self.targets.is_empty() {
            parts.push(("target".into(), join(&self.targets)));
        }
        parts.sort();
        let name = self.function.map(|f| f.as_str()).unwrap_or("none");
        if parts.is_empty() {
            return name.to_string();
        }
        let body: Vec<String> = parts.into_iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("{name}:{}", body.join(","))
    }
}

/// Signature of a whole command; frames are joined with " ; ".
pub fn signature(frames: &[FunctionFrame]) -> String {
    frames
        .iter()
        .map(FunctionFrame::signature)
        .collect::<Vec<_>>()
        .join(" ; ")
}

/// Canonical spacing for comparing hand-written signatures.
pub fn normalize_signature(text: &str) -> String {
    text.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect::<Vec<_>>()
        .join(" ; ")
}

/// A semantic value flowing up the derivation tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Null,
    Str(String),
    Num(f64),
    Entity(PlaceholderKind, String),
    Ref(NodeRef),
    List(Vec<Value>),
    Frame(Box<FunctionFrame>),
}

impl Value {
    pub fn text(&self) -> Option<String> {
        match self {
            Value::Str(s) | Value::Entity(_, s) => Some(s.clone()),
            Value::Num(n) => Some(format_number(*n)),
            _ => None,
        }
    }

    pub fn to_option(&self) -> Option<OptionValue> {
        match self {
            Value::Str(s) | Value::Entity(_, s) => Some(OptionValue::Str(s.clone())),
            Value::Num(n) => Some(OptionValue::Num(*n)),
            Value::List(items) => Some(OptionValue::List(items.iter().filter_map(Value::to_option).collect())),
            Value::Ref(r) => Some(OptionValue::Str(r.to_string())),
            Value::Null | Value::Frame(_) => None,
        }
    }

    /// Node references contained in this value.
    pub fn refs(&self) -> Vec<NodeRef> {
        match self {
            Value::Ref(r) => vec![r.clone()],
            Value::List(items) => items.iter().flat_map(Value::refs).collect(),
            Value::Frame(f) => f.sources.clone(),
            _ => Vec::new(),
        }
    }

    /// The frames a complete derivation denotes, or None when the value
    /// is not a non-empty list of typed frames.
    pub fn into_frames(self) -> Option<Vec<FunctionFrame>> {
        let frames = match self {
            Value::Frame(f) => vec![*f],
            Value::List(items) => items
                .into_iter()
                .map(|v| match v {
                    Value::Frame(f) => Some(*f),
                    _ => None,
                })
                .collect::<Option<Vec<_>>>()?,
            _ => return None,
        };
        (!frames.is_empty() && frames.iter().all(|f| f.function.is_some())).then_some(frames)
    }
}
