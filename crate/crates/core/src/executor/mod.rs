//! Turns completed commands into diagram changes.

mod layout;

pub use layout::{layout_adjust, LayoutConfig};

use crate::completion::{CompletedCommand, NodeSlot, SourceSpec, Step};
use crate::dataflow::{
    evaluate, Diagram, DiagramDelta, EncodingSpec, Endpoint, FilterSpec, NodeId, NodeKind, Point, Port, Predicate,
    SetOp,
};
use crate::error::{Error, Result};

const GAP: f64 = 80.0;

/// What one command did to the diagram.
#[derive(Debug, Clone, PartialEq)]
pub struct Execution {
    pub delta: DiagramDelta,
    /// Nodes created, in creation order.
    pub created: Vec<NodeId>,
    /// True when the command was an undo or redo of an earlier delta.
    pub history: bool,
}

struct Exec<'a> {
    d: &'a mut Diagram,
    outputs: Vec<Option<NodeId>>,
    created: Vec<NodeId>,
}

impl Exec<'_> {
    fn resolve(&self, slot: NodeSlot) -> Result<NodeId> {
        match slot {
            NodeSlot::Existing(id) => Ok(id),
            NodeSlot::Created(i) => self
                .outputs
                .get(i)
                .copied()
                .flatten()
                .ok_or_else(|| Error::NotImplemented(format!("step {i} has no output node"))),
        }
    }

    fn endpoint(&self, source: &SourceSpec) -> Result<Endpoint> {
        Ok(Endpoint::new(self.resolve(source.node)?, source.port))
    }

    fn beside(&self, id: NodeId, row: f64) -> Point {
        let n = self.d.node(id).expect("source exists");
        Point::new(
            n.position.x + n.size.w + GAP,
            n.position.y + row * (n.size.h + GAP / 2.0),
        )
    }

    fn add(&mut self, kind: NodeKind, near: Point) -> Result<NodeId> {
        let id = self.d.add_node(kind, None, Some(near))?;
        self.created.push(id);
        Ok(id)
    }

    fn wire(&mut self, from: Endpoint, to: NodeId, port: Port) -> Result<()> {
        self.d.add_edge(from, Endpoint::new(to, port))?;
        Ok(())
    }

    /// Puts `kind` between `target` and whatever feeds its data input.
    fn splice(&mut self, target: NodeId, kind: NodeKind) -> Result<NodeId> {
        let edge = *self
            .d
            .edges_into(target, Port::DataIn)
            .next()
            .ok_or_else(|| Error::PortError("nothing feeds the node to splice into".into()))?;
        let at = self.d.node(target).expect("target exists").position;
        self.d.remove_edge(edge.id)?;
        let id = self.add(kind, Point::new(at.x - GAP, at.y + GAP))?;
        self.wire(edge.from, id, Port::DataIn)?;
        self.wire(Endpoint::new(id, Port::DataOut), target, Port::DataIn)?;
        Ok(id)
    }

    /// Adds `kind` fed by `source`, or spliced in front of it.
    fn attach(&mut self, source: &SourceSpec, kind: NodeKind, splice: bool) -> Result<NodeId> {
        let from = self.endpoint(source)?;
        if splice {
            return self.splice(from.node, kind);
        }
        let id = self.add(kind, self.beside(from.node, 0.0))?;
        self.wire(from, id, Port::DataIn)?;
        Ok(id)
    }

    fn step(&mut self, step: &Step) -> Result<Option<NodeId>> {
        Ok(match step {
            Step::Visualize { source, vis, columns } => Some(self.attach(
                source,
                NodeKind::Visualization {
                    vis: *vis,
                    columns: columns.clone(),
                },
                false,
            )?),
            Step::Filter { source, spec, splice } => {
                Some(self.attach(source, NodeKind::AttributeFilter { spec: spec.clone() }, *splice)?)
            }
            Step::Encode { source, spec, splice } => {
                Some(self.attach(source, NodeKind::VisualEditor { spec: spec.clone() }, *splice)?)
            }
            Step::SetOperation { sources, op } => {
                let first = self.resolve(sources[0].node)?;
                let id = self.add(NodeKind::SetOperator { op: *op }, self.beside(first, 0.5))?;
                for s in sources {
                    let from = self.endpoint(s)?;
                    self.wire(from, id, Port::DataIn)?;
                }
                Some(id)
            }
            Step::Highlight {
                source,
                color,
                vis,
                columns,
            } => {
                let editor = self.add(
                    NodeKind::VisualEditor {
                        spec: EncodingSpec::AssignConstant { color: color.clone() },
                    },
                    self.beside(*source, 1.0),
                )?;
                self.wire(Endpoint::new(*source, Port::SelectionOut), editor, Port::DataIn)?;
                let union = self.add(NodeKind::SetOperator { op: SetOp::Union }, self.beside(editor, 0.0))?;
                self.wire(Endpoint::new(editor, Port::DataOut), union, Port::DataIn)?;
                self.wire(Endpoint::new(*source, Port::DataOut), union, Port::DataIn)?;
                let chart = self.add(
                    NodeKind::Visualization {
                        vis: *vis,
                        columns: columns.clone(),
                    },
                    self.beside(union, 0.0),
                )?;
                self.wire(Endpoint::new(union, Port::DataOut), chart, Port::DataIn)?;
                Some(chart)
            }
            Step::Link {
                source,
                column,
                table_node,
            } => {
                let from = self.endpoint(source)?;
                let extractor = self.add(
                    NodeKind::ConstantsExtractor { column: column.clone() },
                    self.beside(from.node, 0.0),
                )?;
                self.wire(from, extractor, Port::DataIn)?;
                let filter = self.add(
                    NodeKind::AttributeFilter {
                        spec: FilterSpec {
                            column: column.clone(),
                            predicate: Predicate::Equals { values: Vec::new() },
                        },
                    },
                    self.beside(*table_node, 0.0),
                )?;
                self.wire(Endpoint::new(extractor, Port::DataOut), filter, Port::ConstantsIn)?;
                self.wire(Endpoint::new(*table_node, Port::DataOut), filter, Port::DataIn)?;
                Some(filter)
            }
            Step::Load { dataset } => {
                let id = self
                    .d
                    .add_node(NodeKind::DataSource { table: dataset.clone() }, None, None)?;
                self.created.push(id);
                Some(id)
            }
            Step::RemoveNode { node } => {
                self.d.remove_node(*node)?;
                None
            }
            Step::RemoveEdge { edge } => {
                self.d.remove_edge(*edge)?;
                None
            }
            Step::AddEdge { from, to } => {
                self.d.add_edge(*from, *to)?;
                None
            }
            Step::Undo | Step::Redo => {
                return Err(Error::NotImplemented(
                    "undo or redo combined with other functions".into(),
                ))
            }
        })
    }
}

/// Applies `cmd` as one undo unit, then adjusts the layout around the new
/// nodes and `focus`. On any error the diagram is left untouched.
pub fn execute(
    cmd: &CompletedCommand,
    diagram: &mut Diagram,
    focus: Option<NodeId>,
    layout: &LayoutConfig,
) -> Result<Execution> {
    if let [step] = cmd.steps.as_slice() {
        if step.is_history() {
            let delta = match step {
                Step::Undo => diagram.undo()?,
                _ => diagram.redo()?,
            };
            return Ok(Execution {
                delta,
                created: Vec::new(),
                history: true,
            });
        }
    }
    let (created, delta) = diagram.transaction(|d| {
        let mut ex = Exec {
            d,
            outputs: Vec::new(),
            created: Vec::new(),
        };
        for step in &cmd.steps {
            let out = ex.step(step)?;
            ex.outputs.push(out);
        }
        let created = ex.created;
        let (_, errors) = evaluate(d)?;
        if let Some((_, err)) = errors.into_iter().find(|(id, _)| created.contains(id)) {
            return Err(err);
        }
        let mut seeds = created.clone();
        seeds.extend(focus.filter(|f| d.node(*f).is_some()));
        layout_adjust(d, &seeds, &created, layout)?;
        Ok(created)
    })?;
    Ok(Execution {
        delta,
        created,
        history: false,
    })
}
