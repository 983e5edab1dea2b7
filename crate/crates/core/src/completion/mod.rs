//! Fills in what a parsed query leaves implicit: node references, default
//! options, port choices.

mod focus;

pub use focus::{FocusParams, FocusTracker};

use serde::{Deserialize, Serialize};

use crate::dataflow::{
    ColumnKind, Diagram, Direction, EdgeId, EncodingSpec, Endpoint, FilterSpec, KindTag, Node, NodeId, NodeKind, Port,
    Predicate, SetOp, Table, VisType,
};
use crate::error::{Error, Result};
use crate::parser::{format_number, FunctionFrame, NodeRef, OptionValue, PortSpec};
use crate::tagger::FunctionIndicator;

pub const DEFAULT_VIS: VisType = VisType::Scatterplot;
pub const DEFAULT_HIGHLIGHT_COLOR: &str = "red";
pub const DEFAULT_COLOR_SCALE: &str = "red-green";
pub const DEFAULT_SET_OP: SetOp = SetOp::Union;

/// A node an executed step reads from: an existing node, or the output
/// node of an earlier step of the same command.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "node", content = "id", rename_all = "kebab-case")]
pub enum NodeSlot {
    Existing(NodeId),
    Created(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceSpec {
    pub node: NodeSlot,
    pub port: Port,
}

/// One fully resolved diagram operation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "kebab-case")]
pub enum Step {
    Visualize {
        source: SourceSpec,
        vis: VisType,
        columns: Vec<String>,
    },
    /// With `splice` set the filter goes onto the input edge of `source`.
    Filter {
        source: SourceSpec,
        spec: FilterSpec,
        splice: bool,
    },
    Encode {
        source: SourceSpec,
        spec: EncodingSpec,
        splice: bool,
    },
    SetOperation {
        sources: Vec<SourceSpec>,
        op: SetOp,
    },
    Highlight {
        source: NodeId,
        color: String,
        vis: VisType,
        columns: Vec<String>,
    },
    Link {
        source: SourceSpec,
        column: String,
        table_node: NodeId,
    },
    Load {
        dataset: String,
    },
    RemoveNode {
        node: NodeId,
    },
    RemoveEdge {
        edge: EdgeId,
    },
    AddEdge {
        from: Endpoint,
        to: Endpoint,
    },
    Undo,
    Redo,
}

impl Step {
    /// Nodes this step creates when executed.
    pub fn creates(&self) -> usize {
        match self {
            Step::Visualize { .. } | Step::Filter { .. } | Step::Encode { .. } | Step::SetOperation { .. } => 1,
            Step::Load { .. } => 1,
            Step::Highlight { .. } => 3,
            Step::Link { .. } => 2,
            _ => 0,
        }
    }

    pub fn is_history(&self) -> bool {
        matches!(self, Step::Undo | Step::Redo)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletedCommand {
    pub steps: Vec<Step>,
}

/// The table whose rows flow out of `id`, following first inputs upstream.
pub fn table_of(diagram: &Diagram, id: NodeId) -> Option<&Table> {
    let mut current = id;
    for _ in 0..=diagram.node_count() {
        let node = diagram.node(current)?;
        match &node.kind {
            NodeKind::DataSource { table } => return diagram.dataset(table),
            NodeKind::ConstantsExtractor { .. } => return None,
            _ => current = diagram.edges_into(current, Port::DataIn).next()?.from.node,
        }
    }
    None
}

fn check_column(table: &Table, column: &str) -> Result<String> {
    table
        .column(column)
        .map(|c| c.name.clone())
        .ok_or_else(|| Error::ColumnNotFound(column.to_string()))
}

fn numeric(table: &Table, column: &str) -> bool {
    table.column(column).is_some_and(|c| c.kind == ColumnKind::Numeric)
}

/// Default columns for a new chart of `vis` over `table`.
pub fn default_columns(vis: VisType, table: &Table) -> Result<Vec<String>> {
    let nums: Vec<String> = table.numeric_columns().map(|c| c.name.clone()).collect();
    let need = match vis {
        VisType::Histogram => 1,
        VisType::TableView => 0,
        _ => 2,
    };
    if nums.len() < need {
        return Err(Error::OptionsError(format!(
            "{} needs {need} numeric columns; table {} has {}",
            vis,
            table.name,
            nums.len()
        )));
    }
    Ok(match vis {
        VisType::ParallelCoordinates => nums,
        VisType::TableView => table.columns.iter().map(|c| c.name.clone()).collect(),
        _ => nums.into_iter().take(need).collect(),
    })
}

fn check_vis_columns(vis: VisType, columns: &[String], table: &Table) -> Result<()> {
    let bad = |msg: String| Err(Error::OptionsError(msg));
    match vis {
        VisType::Histogram if columns.len() != 1 => bad(format!("a histogram shows one column, got {}", columns.len())),
        VisType::Scatterplot | VisType::Heatmap if columns.len() != 2 => {
            bad(format!("a {vis} shows two columns, got {}", columns.len()))
        }
        VisType::LineChart if !(2..=3).contains(&columns.len()) => bad(format!(
            "a line chart shows two columns and an optional series, got {}",
            columns.len()
        )),
        VisType::ParallelCoordinates | VisType::Map if columns.len() < 2 => {
            bad(format!("a {vis} needs at least two columns"))
        }
        VisType::Scatterplot | VisType::LineChart => match columns.iter().take(2).find(|c| !numeric(table, c)) {
            Some(c) => bad(format!("column {c} is not numeric")),
            None => Ok(()),
        },
        _ => Ok(()),
    }
}

fn parse_vis(name: &str) -> Result<VisType> {
    name.parse()
        .map_err(|_| Error::OptionsError(format!("{name} is not a visualization type")))
}

fn type_matches(node: &Node, ty: &str) -> bool {
    if ty == "visualization" {
        return node.kind.is_visualization();
    }
    if let Ok(vis) = ty.parse::<VisType>() {
        return node.kind.vis_type() == Some(vis);
    }
    ty.parse::<KindTag>().is_ok_and(|k| node.kind.tag() == k)
}

struct Completer<'a> {
    diagram: &'a Diagram,
    tracker: &'a FocusTracker,
    steps: Vec<Step>,
    /// Output node of each step, when it creates one, and its table.
    outputs: Vec<Option<(NodeSlot, Option<&'a Table>)>>,
    /// The frame after the one being completed.
    next: Option<&'a FunctionFrame>,
}

impl<'a> Completer<'a> {
    fn node(&self, id: NodeId) -> &'a Node {
        self.diagram.node(id).expect("resolved ids exist")
    }

    fn table(&self, slot: NodeSlot) -> Option<&'a Table> {
        match slot {
            NodeSlot::Existing(id) => table_of(self.diagram, id),
            NodeSlot::Created(i) => self.outputs[i].and_then(|(_, t)| t),
        }
    }

    fn by_label(&self, label: &str) -> Result<NodeId> {
        self.diagram
            .node_by_label(label)
            .map(|n| n.id)
            .ok_or_else(|| Error::NodeNotFound(label.to_string()))
    }

    /// Resolves an explicit reference; `taken` nodes are skipped for type
    /// references so repeated references pick distinct nodes.
    fn explicit(&self, r: &NodeRef, taken: &[NodeId]) -> Result<Option<NodeId>> {
        let pick = |keep: &dyn Fn(&Node) -> bool, what: String| {
            self.tracker
                .rank(self.diagram, |n| keep(n) && !taken.contains(&n.id))
                .first()
                .copied()
                .ok_or(Error::NodeNotFound(what))
        };
        Ok(match r {
            NodeRef::ByLabel(l) => Some(self.by_label(l)?),
            NodeRef::ByType(t) => Some(pick(&|n| type_matches(n, t), t.clone())?),
            NodeRef::ByDataset(d) => {
                if self.diagram.dataset(d).is_none() {
                    return Err(Error::DatasetNotFound(d.clone()));
                }
                Some(pick(
                    &|n| matches!(&n.kind, NodeKind::DataSource { table } if table.eq_ignore_ascii_case(d)),
                    format!("data source of {d}"),
                )?)
            }
            NodeRef::ImplicitFocus | NodeRef::NewNode(_) => None,
        })
    }

    /// Source nodes for a step: explicit references first, then the most
    /// focused eligible nodes until `needed` are found. Earlier created
    /// nodes of the command stand in for the focus.
    fn sources(
        &self,
        refs: &[NodeRef],
        needed: usize,
        chain: bool,
        eligible: &dyn Fn(&Node) -> bool,
    ) -> Result<Vec<NodeSlot>> {
        let mut out: Vec<NodeSlot> = Vec::new();
        let mut taken: Vec<NodeId> = Vec::new();
        let mut implicit = 0;
        for r in refs {
            match self.explicit(r, &taken)? {
                Some(id) => {
                    taken.push(id);
                    out.push(NodeSlot::Existing(id));
                }
                None if matches!(r, NodeRef::ImplicitFocus) => implicit += 1,
                None => {}
            }
        }
        let want = needed.max(out.len() + implicit);
        if out.len() < want && chain {
            if let Some((slot, _)) = self.outputs.iter().rev().flatten().next() {
                out.push(*slot);
            }
        }
        if out.len() < want {
            let ranked = self
                .tracker
                .rank(self.diagram, |n| !taken.contains(&n.id) && eligible(n));
            let available = out.len() + ranked.len();
            if available < want {
                return Err(Error::InsufficientSources {
                    needed: want,
                    available,
                });
            }
            out.extend(ranked.into_iter().take(want - out.len()).map(NodeSlot::Existing));
        }
        Ok(out)
    }

    fn row_source(&self, n: &Node, port: PortSpec, columns: &[String]) -> bool {
        if matches!(n.kind, NodeKind::ConstantsExtractor { .. }) {
            return false;
        }
        if port == PortSpec::Selection && !n.kind.is_visualization() {
            return false;
        }
        match table_of(self.diagram, n.id) {
            Some(t) => columns.iter().all(|c| t.column(c).is_some()),
            None => false,
        }
    }

    fn out_port(&self, slot: NodeSlot, port: PortSpec) -> Result<Port> {
        match (port, slot) {
            (PortSpec::Selection, NodeSlot::Existing(id)) => {
                let node = self.node(id);
                if !node.kind.has_port(Port::SelectionOut) {
                    return Err(Error::PortError(format!(
                        "{} has no selection to read from",
                        node.label
                    )));
                }
                Ok(Port::SelectionOut)
            }
            (PortSpec::Selection, NodeSlot::Created(_)) => Err(Error::PortError(
                "a node created by this query has no selection yet".into(),
            )),
            _ => Ok(Port::DataOut),
        }
    }

    fn push(&mut self, step: Step, output: Option<(NodeSlot, Option<&'a Table>)>) {
        self.steps.push(step);
        self.outputs.push(output);
    }

    fn created(&self) -> NodeSlot {
        NodeSlot::Created(self.steps.len())
    }

    fn frame(&mut self, frame: &FunctionFrame) -> Result<()> {
        let function = frame
            .function
            .ok_or_else(|| Error::OptionsError("query names no function".into()))?;
        match function {
            FunctionIndicator::Visualize => self.visualize(frame),
            FunctionIndicator::Filter => self.filter(frame),
            FunctionIndicator::Encode => self.encode(frame),
            FunctionIndicator::Merge => self.merge(frame),
            FunctionIndicator::Highlight => self.highlight(frame),
            FunctionIndicator::Link => self.link(frame),
            FunctionIndicator::Load => {
                let name = frame
                    .text("dataset")
                    .ok_or_else(|| Error::OptionsError("no dataset named".into()))?;
                let table = self.diagram.dataset(&name).ok_or(Error::DatasetNotFound(name))?;
                let slot = self.created();
                self.push(
                    Step::Load {
                        dataset: table.name.clone(),
                    },
                    Some((slot, Some(table))),
                );
                Ok(())
            }
            FunctionIndicator::Undo => {
                self.push(Step::Undo, None);
                Ok(())
            }
            FunctionIndicator::Redo => {
                self.push(Step::Redo, None);
                Ok(())
            }
            FunctionIndicator::Remove => self.remove(frame),
        }
    }

    fn visualize(&mut self, frame: &FunctionFrame) -> Result<()> {
        // a filter spliced onto an existing chart already shows the result
        if matches!(self.steps.last(), Some(Step::Filter { splice: true, .. }))
            && frame.targets.is_empty()
            && frame.sources.is_empty()
        {
            return Ok(());
        }
        let mut columns = frame.texts("columns");
        if let Some(g) = frame.text("group") {
            if !columns.iter().any(|c| c.eq_ignore_ascii_case(&g)) {
                columns.push(g);
            }
        }
        let target = match frame.targets.first() {
            None => None,
            Some(NodeRef::NewNode(t)) => Some(t.clone()),
            Some(other) => return Err(Error::NotImplemented(format!("visualizing into existing node {other}"))),
        };
        let vis = match target {
            Some(Some(t)) => parse_vis(&t)?,
            Some(None) | None => match columns.len() {
                1 => VisType::Histogram,
                n if n >= 3 => VisType::ParallelCoordinates,
                _ => DEFAULT_VIS,
            },
        };
        let chain = frame.sources.is_empty();
        let slot = self.sources(&frame.sources, 1, chain, &|n| self.row_source(n, frame.port, &columns))?[0];
        let port = self.out_port(slot, frame.port)?;
        let table = self
            .table(slot)
            .ok_or_else(|| Error::NodeNotFound("a node with data to visualize".into()))?;
        let columns = if columns.is_empty() {
            default_columns(vis, table)?
        } else {
            columns
                .iter()
                .map(|c| check_column(table, c))
                .collect::<Result<Vec<_>>>()?
        };
        check_vis_columns(vis, &columns, table)?;
        let out = self.created();
        self.push(
            Step::Visualize {
                source: SourceSpec { node: slot, port },
                vis,
                columns,
            },
            Some((out, Some(table))),
        );
        Ok(())
    }

    fn filter(&mut self, frame: &FunctionFrame) -> Result<()> {
        let column = frame
            .text("column")
            .ok_or_else(|| Error::OptionsError("no column to filter on".into()))?;
        let slot = self.sources(&frame.sources, 1, frame.sources.is_empty(), &|n| {
            self.row_source(n, frame.port, std::slice::from_ref(&column))
        })?[0];
        let table = self
            .table(slot)
            .ok_or_else(|| Error::NodeNotFound("a node with data to filter".into()))?;
        let column = check_column(table, &column)?;
        let predicate = predicate_of(frame, table, &column)?;
        let spec = FilterSpec { column, predicate };
        spec.validate().map_err(Error::OptionsError)?;
        // a chart's filter goes onto its input unless the query names the source
        let splice = match slot {
            NodeSlot::Existing(id) => {
                frame.port == PortSpec::Unspecified
                    && frame.sources.is_empty()
                    && self.next.is_none_or(|f| {
                        f.function == Some(FunctionIndicator::Visualize) && f.targets.is_empty() && f.sources.is_empty()
                    })
                    && self.node(id).kind.is_visualization()
                    && self.diagram.edges_into(id, Port::DataIn).next().is_some()
            }
            NodeSlot::Created(_) => false,
        };
        let port = if splice {
            Port::DataOut
        } else {
            self.out_port(slot, frame.port)?
        };
        let out = self.created();
        self.push(
            Step::Filter {
                source: SourceSpec { node: slot, port },
                spec,
                splice,
            },
            Some((out, Some(table))),
        );
        Ok(())
    }

    fn encode(&mut self, frame: &FunctionFrame) -> Result<()> {
        let column = frame.text("column");
        let needed: Vec<String> = column.iter().cloned().collect();
        let slot = self.sources(&frame.sources, 1, frame.sources.is_empty(), &|n| {
            self.row_source(n, frame.port, &needed)
        })?[0];
        let table = self
            .table(slot)
            .ok_or_else(|| Error::NodeNotFound("a node with data to encode".into()))?;
        let spec = match (column, frame.text("color")) {
            (Some(c), _) => {
                let c = check_column(table, &c)?;
                EncodingSpec::ColorScale {
                    column: c,
                    scale: frame.text("scale").unwrap_or_else(|| DEFAULT_COLOR_SCALE.to_string()),
                }
            }
            (None, Some(color)) => EncodingSpec::AssignConstant { color },
            (None, None) => return Err(Error::OptionsError("nothing to encode".into())),
        };
        let splice = match slot {
            NodeSlot::Existing(id) => {
                frame.port != PortSpec::Selection
                    && self.node(id).kind.is_visualization()
                    && self.diagram.edges_into(id, Port::DataIn).next().is_some()
            }
            NodeSlot::Created(_) => false,
        };
        let port = if splice {
            Port::DataOut
        } else {
            self.out_port(slot, frame.port)?
        };
        let out = self.created();
        self.push(
            Step::Encode {
                source: SourceSpec { node: slot, port },
                spec,
                splice,
            },
            Some((out, Some(table))),
        );
        Ok(())
    }

    fn merge(&mut self, frame: &FunctionFrame) -> Result<()> {
        let op = match frame.text("op").as_deref() {
            None | Some("union") => DEFAULT_SET_OP,
            Some("intersection") => SetOp::Intersection,
            Some("difference") => SetOp::Difference,
            Some(other) => return Err(Error::OptionsError(format!("unknown set operation {other}"))),
        };
        let explicit: Vec<&NodeRef> = frame
            .sources
            .iter()
            .filter(|r| !matches!(r, NodeRef::ImplicitFocus))
            .collect();
        let mut taken: Vec<NodeId> = Vec::new();
        let mut slots: Vec<NodeSlot> = Vec::new();
        for r in &explicit {
            if let Some(id) = self.explicit(r, &taken)? {
                taken.push(id);
                slots.push(NodeSlot::Existing(id));
            }
        }
        let want = frame.sources.len().max(2);
        if slots.len() < want {
            if let Some((slot, _)) = self.outputs.iter().rev().flatten().next() {
                slots.push(*slot);
            }
        }
        if slots.len() < want {
            let ranked = self.tracker.rank(self.diagram, |n| {
                !taken.contains(&n.id) && self.row_source(n, PortSpec::Unspecified, &[])
            });
            let mut ranked: Vec<NodeSlot> = ranked.into_iter().map(NodeSlot::Existing).collect();
            // prefer nodes over the table of the first chosen source
            let anchor = slots
                .first()
                .or(ranked.first())
                .and_then(|s| self.table(*s))
                .map(|t| t.name.clone());
            if let Some(anchor) = anchor {
                ranked.retain(|s| self.table(*s).is_some_and(|t| t.name == anchor));
            }
            let available = slots.len() + ranked.len();
            if available < want {
                return Err(Error::InsufficientSources {
                    needed: want,
                    available,
                });
            }
            slots.extend(ranked.into_iter().take(want - slots.len()));
        }
        let tables: Vec<&Table> = slots
            .iter()
            .map(|s| {
                self.table(*s)
                    .ok_or_else(|| Error::NodeNotFound("a node with data to merge".into()))
            })
            .collect::<Result<_>>()?;
        if let Some(other) = tables.iter().find(|t| t.name != tables[0].name) {
            return Err(Error::TableMismatch(tables[0].name.clone(), other.name.clone()));
        }
        let mut sources = Vec::new();
        for (i, slot) in slots.iter().enumerate() {
            let port = if i == 0 {
                self.out_port(*slot, frame.port)?
            } else {
                Port::DataOut
            };
            sources.push(SourceSpec { node: *slot, port });
        }
        let out = self.created();
        self.push(Step::SetOperation { sources, op }, Some((out, Some(tables[0]))));
        Ok(())
    }

    fn highlight(&mut self, frame: &FunctionFrame) -> Result<()> {
        if frame.sources.len() > 1 {
            return Err(Error::NotImplemented("highlighting across several sources".into()));
        }
        let target = match frame.targets.first() {
            None => DEFAULT_VIS,
            Some(NodeRef::NewNode(None)) => DEFAULT_VIS,
            Some(NodeRef::NewNode(Some(t))) => parse_vis(t)?,
            Some(other) => {
                return Err(Error::NotImplemented(format!(
                    "highlighting into existing node {other}"
                )))
            }
        };
        let slot = self.sources(&frame.sources, 1, false, &|n| {
            n.kind.is_visualization() && self.row_source(n, PortSpec::Selection, &[])
        })?[0];
        let NodeSlot::Existing(id) = slot else {
            return Err(Error::PortError("highlight needs an existing visualization".into()));
        };
        let node = self.node(id);
        if !node.kind.has_port(Port::SelectionOut) {
            return Err(Error::PortError(format!("{} has no selection", node.label)));
        }
        let table = self
            .table(slot)
            .ok_or_else(|| Error::NodeNotFound("a visualization with data".into()))?;
        let columns = match &node.kind {
            NodeKind::Visualization { vis, columns } if *vis == target => columns.clone(),
            _ => default_columns(target, table)?,
        };
        let color = frame
            .text("color")
            .unwrap_or_else(|| DEFAULT_HIGHLIGHT_COLOR.to_string());
        let out = self.created();
        self.push(
            Step::Highlight {
                source: id,
                color,
                vis: target,
                columns,
            },
            Some((out, Some(table))),
        );
        Ok(())
    }

    fn link(&mut self, frame: &FunctionFrame) -> Result<()> {
        if frame.text("mode").as_deref() == Some("edge") {
            let from = self.single(frame.sources.first(), "a node to connect from")?;
            let to = self.single(frame.targets.first(), "a node to connect to")?;
            let from_node = self.node(from);
            let to_port = if matches!(from_node.kind, NodeKind::ConstantsExtractor { .. }) {
                Port::ConstantsIn
            } else {
                Port::DataIn
            };
            let from_port = if frame.port == PortSpec::Selection {
                Port::SelectionOut
            } else {
                Port::DataOut
            };
            self.push(
                Step::AddEdge {
                    from: Endpoint::new(from, from_port),
                    to: Endpoint::new(to, to_port),
                },
                None,
            );
            return Ok(());
        }
        let target_ref = frame
            .targets
            .first()
            .ok_or_else(|| Error::OptionsError("no table to link to".into()))?;
        let table_node = self
            .explicit(target_ref, &[])?
            .ok_or_else(|| Error::OptionsError("link needs a table to search".into()))?;
        let target_table = table_of(self.diagram, table_node)
            .ok_or_else(|| Error::NodeNotFound(format!("table behind {}", self.node(table_node).label)))?;
        let slot = self.sources(&frame.sources, 1, frame.sources.is_empty(), &|n| {
            n.id != table_node
                && self.row_source(n, frame.port, &[])
                && table_of(self.diagram, n.id).is_some_and(|t| t.name != target_table.name)
        })?[0];
        let port = self.out_port(slot, frame.port)?;
        let source_table = self
            .table(slot)
            .ok_or_else(|| Error::NodeNotFound("a node with data to link".into()))?;
        let column = match frame.text("column") {
            Some(c) => {
                let c = check_column(source_table, &c)?;
                if target_table.column(&c).is_none() {
                    return Err(Error::OptionsError(format!(
                        "table {} has no column {c}",
                        target_table.name
                    )));
                }
                c
            }
            None => source_table
                .columns
                .iter()
                .map(|c| c.name.clone())
                .find(|c| target_table.column(c).is_some())
                .ok_or_else(|| {
                    Error::OptionsError(format!(
                        "tables {} and {} share no column",
                        source_table.name, target_table.name
                    ))
                })?,
        };
        let out = self.created();
        self.push(
            Step::Link {
                source: SourceSpec { node: slot, port },
                column,
                table_node,
            },
            Some((out, Some(target_table))),
        );
        Ok(())
    }

    fn single(&self, r: Option<&NodeRef>, what: &str) -> Result<NodeId> {
        match r {
            Some(NodeRef::ImplicitFocus) | None => self
                .tracker
                .rank(self.diagram, |_| true)
                .first()
                .copied()
                .ok_or_else(|| Error::NodeNotFound(what.to_string())),
            Some(r) => self
                .explicit(r, &[])?
                .ok_or_else(|| Error::NodeNotFound(what.to_string())),
        }
    }

    fn remove(&mut self, frame: &FunctionFrame) -> Result<()> {
        let node = self.single(frame.sources.first(), "a node to remove")?;
        if frame.text("mode").as_deref() == Some("edge") {
            let to = self.single(frame.targets.first(), "a node the edge leads to")?;
            let edge = self.diagram.edges_from(node).find(|e| e.to.node == to).ok_or_else(|| {
                Error::NodeNotFound(format!(
                    "edge from {} to {}",
                    self.node(node).label,
                    self.node(to).label
                ))
            })?;
            self.push(Step::RemoveEdge { edge: edge.id }, None);
        } else {
            self.push(Step::RemoveNode { node }, None);
        }
        Ok(())
    }
}

fn predicate_of(frame: &FunctionFrame, table: &Table, column: &str) -> Result<Predicate> {
    if let Some(dir) = frame.text("direction") {
        let direction = match dir.as_str() {
            "max" => Direction::Max,
            "min" => Direction::Min,
            other => return Err(Error::OptionsError(format!("unknown direction {other}"))),
        };
        let count = match frame.num("count") {
            Some(c) if c >= 1.0 && c.fract() == 0.0 => c as usize,
            Some(c) => return Err(Error::OptionsError(format!("cannot keep {} rows", format_number(c)))),
            None => 1,
        };
        if !numeric(table, column) {
            return Err(Error::OptionsError(format!("column {column} is not numeric")));
        }
        return Ok(Predicate::Extremum { direction, count });
    }
    if let Some(values) = frame.option("values") {
        let values = match values {
            OptionValue::List(_) => values.texts(),
            other => other.as_text().into_iter().collect(),
        };
        return Ok(Predicate::Equals { values });
    }
    let (min, max) = (frame.num("min"), frame.num("max"));
    if min.is_some() || max.is_some() {
        if !numeric(table, column) {
            return Err(Error::OptionsError(format!("column {column} is not numeric")));
        }
        return Ok(Predicate::Range { min, max });
    }
    Ok(Predicate::NoOp)
}

/// Resolves parsed frames against the diagram and focus state.
pub fn complete_frames(
    frames: &[FunctionFrame],
    diagram: &Diagram,
    tracker: &FocusTracker,
) -> Result<CompletedCommand> {
    let mut c = Completer {
        diagram,
        tracker,
        steps: Vec::new(),
        outputs: Vec::new(),
        next: None,
    };
    for (i, frame) in frames.iter().enumerate() {
        c.next = frames.get(i + 1);
        c.frame(frame)?;
    }
    Ok(CompletedCommand { steps: c.steps })
}
