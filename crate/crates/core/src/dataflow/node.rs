use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u64);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeId(pub u64);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VisType {
    Scatterplot,
    Histogram,
    ParallelCoordinates,
    LineChart,
    Heatmap,
    Map,
    TableView,
}

impl VisType {
    pub const ALL: [VisType; 7] = [
        VisType::Scatterplot,
        VisType::Histogram,
        VisType::ParallelCoordinates,
        VisType::LineChart,
        VisType::Heatmap,
        VisType::Map,
        VisType::TableView,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            VisType::Scatterplot => "scatterplot",
            VisType::Histogram => "histogram",
            VisType::ParallelCoordinates => "parallel-coordinates",
            VisType::LineChart => "line-chart",
            VisType::Heatmap => "heatmap",
            VisType::Map => "map",
            VisType::TableView => "table-view",
        }
    }
}

impl fmt::Display for VisType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for VisType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        VisType::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| format!("unknown visualization type {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Max,
    Min,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Predicate {
    Range {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        min: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        max: Option<f64>,
    },
    Equals {
        values: Vec<String>,
    },
    Extremum {
        direction: Direction,
        count: usize,
    },
    NoOp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    pub column: String,
    pub predicate: Predicate,
}

impl FilterSpec {
    pub fn validate(&self) -> Result<(), String> {
        match &self.predicate {
            Predicate::Range {
                min: Some(lo),
                max: Some(hi),
            } if lo > hi => Err(format!("range minimum {lo} exceeds maximum {hi}")),
            Predicate::Extremum { count: 0, .. } => Err("extremum count must be at least 1".into()),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum EncodingSpec {
    AssignConstant { color: String },
    ColorScale { column: String, scale: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SetOp {
    Union,
    Intersection,
    Difference,
}

impl SetOp {
    pub fn as_str(self) -> &'static str {
        match self {
            SetOp::Union => "union",
            SetOp::Intersection => "intersection",
            SetOp::Difference => "difference",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NodeKind {
    DataSource { table: String },
    Visualization { vis: VisType, columns: Vec<String> },
    AttributeFilter { spec: FilterSpec },
    VisualEditor { spec: EncodingSpec },
    SetOperator { op: SetOp },
    ConstantsExtractor { column: String },
}

/// Coarse node categories, used for type references like "the filter".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KindTag {
    DataSource,
    Visualization,
    AttributeFilter,
    VisualEditor,
    SetOperator,
    ConstantsExtractor,
}

impl KindTag {
    pub fn as_str(self) -> &'static str {
        match self {
            KindTag::DataSource => "data-source",
            KindTag::Visualization => "visualization",
            KindTag::AttributeFilter => "attribute-filter",
            KindTag::VisualEditor => "visual-editor",
            KindTag::SetOperator => "set-operator",
            KindTag::ConstantsExtractor => "constants-extractor",
        }
    }
}

impl FromStr for KindTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            KindTag::DataSource,
            KindTag::Visualization,
            KindTag::AttributeFilter,
            KindTag::VisualEditor,
            KindTag::SetOperator,
            KindTag::ConstantsExtractor,
        ]
        .into_iter()
        .find(|k| k.as_str() == s)
        .ok_or_else(|| format!("unknown node kind {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Port {
    DataIn,
    ConstantsIn,
    DataOut,
    SelectionOut,
}

impl Port {
    pub fn is_input(self) -> bool {
        matches!(self, Port::DataIn | Port::ConstantsIn)
    }
}

impl fmt::Display for Port {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Port::DataIn => "data-in",
            Port::ConstantsIn => "constants-in",
            Port::DataOut => "data-out",
            Port::SelectionOut => "selection-out",
        })
    }
}

impl NodeKind {
    pub fn tag(&self) -> KindTag {
        match self {
            NodeKind::DataSource { .. } => KindTag::DataSource,
            NodeKind::Visualization { .. } => KindTag::Visualization,
            NodeKind::AttributeFilter { .. } => KindTag::AttributeFilter,
            NodeKind::VisualEditor { .. } => KindTag::VisualEditor,
            NodeKind::SetOperator { .. } => KindTag::SetOperator,
            NodeKind::ConstantsExtractor { .. } => KindTag::ConstantsExtractor,
        }
    }

    pub fn ports(&self) -> &'static [Port] {
        match self {
            NodeKind::DataSource { .. } => &[Port::DataOut],
            NodeKind::Visualization { .. } => &[Port::DataIn, Port::DataOut, Port::SelectionOut],
            NodeKind::AttributeFilter { .. } => &[Port::DataIn, Port::ConstantsIn, Port::DataOut],
            NodeKind::VisualEditor { .. } | NodeKind::SetOperator { .. } | NodeKind::ConstantsExtractor { .. } => {
                &[Port::DataIn, Port::DataOut]
            }
        }
    }

    pub fn has_port(&self, port: Port) -> bool {
        self.ports().contains(&port)
    }

    pub fn vis_type(&self) -> Option<VisType> {
        match self {
            NodeKind::Visualization { vis, .. } => Some(*vis),
            _ => None,
        }
    }

    pub fn is_visualization(&self) -> bool {
        matches!(self, NodeKind::Visualization { .. })
    }

    /// Default box size in canvas pixels; embedded charts are larger.
    pub fn default_size(&self) -> Size {
        match self {
            NodeKind::Visualization { .. } => Size { w: 240.0, h: 180.0 },
            _ => Size { w: 120.0, h: 60.0 },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Size {
    pub w: f64,
    pub h: f64,
}

/// A diagram node. `position` is the top-left corner of its box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub label: String,
    #[serde(flatten)]
    pub kind: NodeKind,
    pub position: Point,
    pub size: Size,
    #[serde(default)]
    pub pinned: bool,
}

impl Node {
    pub fn center(&self) -> Point {
        Point::new(self.position.x + self.size.w / 2.0, self.position.y + self.size.h / 2.0)
    }

    /// Half the bounding-box diagonal.
    pub fn radius(&self) -> f64 {
        self.size.w.hypot(self.size.h) / 2.0
    }

    pub fn overlaps(&self, other: &Node) -> bool {
        self.position.x < other.position.x + other.size.w
            && other.position.x < self.position.x + self.size.w
            && self.position.y < other.position.y + other.size.h
            && other.position.y < self.position.y + self.size.h
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Endpoint {
    pub node: NodeId,
    pub port: Port,
}

impl Endpoint {
    pub fn new(node: NodeId, port: Port) -> Self {
        Endpoint { node, port }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub id: EdgeId,
    pub from: Endpoint,
    pub to: Endpoint,
}
