use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::node::{Edge, EdgeId, Endpoint, Node, NodeId, NodeKind, Point, Port};
use super::propagate::{self, Payload};
use super::table::Table;
use crate::error::{Error, Result};

/// One reversible primitive mutation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum Op {
    AddNode {
        node: Node,
    },
    RemoveNode {
        node: Node,
    },
    AddEdge {
        edge: Edge,
    },
    RemoveEdge {
        edge: Edge,
    },
    UpdateNode {
        before: Node,
        after: Node,
    },
    SetSelection {
        node: NodeId,
        before: Option<BTreeSet<usize>>,
        after: Option<BTreeSet<usize>>,
    },
}

impl Op {
    fn inverse(&self) -> Op {
        match self.clone() {
            Op::AddNode { node } => Op::RemoveNode { node },
            Op::RemoveNode { node } => Op::AddNode { node },
            Op::AddEdge { edge } => Op::RemoveEdge { edge },
            Op::RemoveEdge { edge } => Op::AddEdge { edge },
            Op::UpdateNode { before, after } => Op::UpdateNode {
                before: after,
                after: before,
            },
            Op::SetSelection { node, before, after } => Op::SetSelection {
                node,
                before: after,
                after: before,
            },
        }
    }
}

/// An atomic undo unit: the ops one command applied, in order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DiagramDelta {
    pub ops: Vec<Op>,
}

impl DiagramDelta {
    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn created_nodes(&self) -> Vec<NodeId> {
        let removed: BTreeSet<NodeId> = self.removed_nodes_raw().collect();
        self.ops
            .iter()
            .filter_map(|op| match op {
                Op::AddNode { node } if !removed.contains(&node.id) => Some(node.id),
                _ => None,
            })
            .collect()
    }

    fn removed_nodes_raw(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.ops.iter().filter_map(|op| match op {
            Op::RemoveNode { node } => Some(node.id),
            _ => None,
        })
    }

    pub fn removed_nodes(&self) -> Vec<NodeId> {
        let added: BTreeSet<NodeId> = self
            .ops
            .iter()
            .filter_map(|op| match op {
                Op::AddNode { node } => Some(node.id),
                _ => None,
            })
            .collect();
        self.removed_nodes_raw().filter(|id| !added.contains(id)).collect()
    }

    pub fn created_edges(&self) -> Vec<Edge> {
        let removed: BTreeSet<EdgeId> = self
            .ops
            .iter()
            .filter_map(|op| match op {
                Op::RemoveEdge { edge } => Some(edge.id),
                _ => None,
            })
            .collect();
        self.ops
            .iter()
            .filter_map(|op| match op {
                Op::AddEdge { edge } if !removed.contains(&edge.id) => Some(*edge),
                _ => None,
            })
            .collect()
    }

    pub fn removed_edges(&self) -> Vec<Edge> {
        let added: BTreeSet<EdgeId> = self
            .ops
            .iter()
            .filter_map(|op| match op {
                Op::AddEdge { edge } => Some(edge.id),
                _ => None,
            })
            .collect();
        self.ops
            .iter()
            .filter_map(|op| match op {
                Op::RemoveEdge { edge } if !added.contains(&edge.id) => Some(*edge),
                _ => None,
            })
            .collect()
    }

    /// Existing nodes whose options (not just position) changed.
    pub fn changed_nodes(&self) -> Vec<NodeId> {
        let created: BTreeSet<NodeId> = self.created_nodes().into_iter().collect();
        let mut out = Vec::new();
        for op in &self.ops {
            if let Op::UpdateNode { before, after } = op {
                if before.kind != after.kind && !created.contains(&after.id) && !out.contains(&after.id) {
                    out.push(after.id);
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Default)]
struct History {
    undo: Vec<DiagramDelta>,
    redo: Vec<DiagramDelta>,
}

/// The dataflow diagram plus its dataset store and undo history.
#[derive(Debug, Clone, Default)]
pub struct Diagram {
    pub(crate) nodes: BTreeMap<NodeId, Node>,
    pub(crate) edges: BTreeMap<EdgeId, Edge>,
    pub(crate) datasets: BTreeMap<String, Arc<Table>>,
    pub(crate) selections: BTreeMap<NodeId, BTreeSet<usize>>,
    pub(crate) next_node: u64,
    pub(crate) next_edge: u64,
    history: History,
    open: Vec<Vec<Op>>,
}

#[derive(Serialize)]
struct HashView<'a> {
    nodes: Vec<&'a Node>,
    edges: Vec<&'a Edge>,
    selections: &'a BTreeMap<NodeId, BTreeSet<usize>>,
    datasets: Vec<(&'a str, usize, usize)>,
}

impl Diagram {
    pub fn new() -> Self {
        Diagram {
            next_node: 1,
            next_edge: 1,
            ..Default::default()
        }
    }

    // ---- read access ----

    pub fn nodes(&self) -> impl Iterator<Item = &Node> {
        self.nodes.values()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.nodes.get(&id)
    }

    pub fn node_by_label(&self, label: &str) -> Option<&Node> {
        self.nodes
            .values()
            .find(|n| n.label == label)
            .or_else(|| self.nodes.values().find(|n| n.label.eq_ignore_ascii_case(label)))
    }

    pub fn edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.values()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, id: EdgeId) -> Option<&Edge> {
        self.edges.get(&id)
    }

    pub fn edges_into(&self, node: NodeId, port: Port) -> impl Iterator<Item = &Edge> {
        self.edges
            .values()
            .filter(move |e| e.to.node == node && e.to.port == port)
    }

    pub fn edges_from(&self, node: NodeId) -> impl Iterator<Item = &Edge> {
        self.edges.values().filter(move |e| e.from.node == node)
    }

    pub fn incident_edges(&self, node: NodeId) -> impl Iterator<Item = &Edge> {
        self.edges
            .values()
            .filter(move |e| e.from.node == node || e.to.node == node)
    }

    pub fn datasets(&self) -> impl Iterator<Item = &Table> {
        self.datasets.values().map(|t| t.as_ref())
    }

    pub fn dataset(&self, name: &str) -> Option<&Table> {
        self.datasets
            .get(name)
            .or_else(|| {
                self.datasets
                    .iter()
                    .find(|(k, _)| k.eq_ignore_ascii_case(name))
                    .map(|(_, t)| t)
            })
            .map(|t| t.as_ref())
    }

    pub(crate) fn dataset_arc(&self, name: &str) -> Option<Arc<Table>> {
        self.datasets.get(name).cloned()
    }

    pub fn selection(&self, node: NodeId) -> Option<&BTreeSet<usize>> {
        self.selections.get(&node)
    }

    pub fn selections(&self) -> &BTreeMap<NodeId, BTreeSet<usize>> {
        &self.selections
    }

    pub fn can_undo(&self) -> bool {
        !self.history.undo.is_empty()
    }

    pub fn can_redo(&self) -> bool {
        !self.history.redo.is_empty()
    }

    /// Stable digest over the sorted node, edge, selection and dataset encodings.
    pub fn hash(&self) -> String {
        let view = HashView {
            nodes: self.nodes.values().collect(),
            edges: self.edges.values().collect(),
            selections: &self.selections,
            datasets: self
                .datasets
                .values()
                .map(|t| (t.name.as_str(), t.columns.len(), t.row_count()))
                .collect(),
        };
        let encoded = serde_json::to_vec(&view).expect("diagram encodes");
        hex::encode(Sha256::digest(&encoded))
    }

    /// Topological node order; ties resolved by node id.
    pub fn topological_order(&self) -> Result<Vec<NodeId>> {
        let mut indegree: BTreeMap<NodeId, usize> = self.nodes.keys().map(|id| (*id, 0)).collect();
        for edge in self.edges.values() {
            *indegree.get_mut(&edge.to.node).expect("edge endpoint exists") += 1;
        }
        let mut ready: BTreeSet<NodeId> = indegree.iter().filter(|(_, d)| **d == 0).map(|(id, _)| *id).collect();
        let mut order = Vec::with_capacity(self.nodes.len());
        while let Some(id) = ready.pop_first() {
            order.push(id);
            for edge in self.edges.values().filter(|e| e.from.node == id) {
                let d = indegree.get_mut(&edge.to.node).expect("edge endpoint exists");
                *d -= 1;
                if *d == 0 {
                    ready.insert(edge.to.node);
                }
            }
        }
        if order.len() != self.nodes.len() {
            return Err(Error::CycleError);
        }
        Ok(order)
    }

    /// Graph distance ignoring edge direction.
    pub fn neighbourhood(&self, seeds: &[NodeId], hops: usize) -> BTreeSet<NodeId> {
        let mut seen: BTreeSet<NodeId> = seeds.iter().copied().filter(|id| self.nodes.contains_key(id)).collect();
        let mut frontier: Vec<NodeId> = seen.iter().copied().collect();
        for _ in 0..hops {
            let mut next = Vec::new();
            for id in frontier {
                for edge in self.incident_edges(id) {
                    let other = if edge.from.node == id {
                        edge.to.node
                    } else {
                        edge.from.node
                    };
                    if seen.insert(other) {
                        next.push(other);
                    }
                }
            }
            frontier = next;
        }
        seen
    }

    fn reaches(&self, from: NodeId, to: NodeId) -> bool {
        let mut stack = vec![from];
        let mut seen = BTreeSet::new();
        while let Some(id) = stack.pop() {
            if id == to {
                return true;
            }
            if seen.insert(id) {
                stack.extend(self.edges_from(id).map(|e| e.to.node));
            }
        }
        false
    }

    // ---- datasets (not part of the undo history) ----

    pub fn add_dataset(&mut self, table: Table) -> Result<()> {
        if self.datasets.contains_key(&table.name) {
            return Err(Error::NameConflict(table.name));
        }
        self.datasets.insert(table.name.clone(), Arc::new(table));
        Ok(())
    }

    pub fn load_dataset(&mut self, name: &str, text: &str, delimiter: u8) -> Result<&Table> {
        if self.datasets.contains_key(name) {
            return Err(Error::NameConflict(name.to_string()));
        }
        let table = Table::from_text(name, text, delimiter)?;
        self.add_dataset(table)?;
        Ok(self.dataset(name).expect("just inserted"))
    }

    // ---- history plumbing ----

    fn apply(&mut self, op: &Op) {
        match op {
            Op::AddNode { node } => {
                self.nodes.insert(node.id, node.clone());
            }
            Op::RemoveNode { node } => {
                self.nodes.remove(&node.id);
            }
            Op::AddEdge { edge } => {
                self.edges.insert(edge.id, *edge);
            }
            Op::RemoveEdge { edge } => {
                self.edges.remove(&edge.id);
            }
            Op::UpdateNode { after, .. } => {
                self.nodes.insert(after.id, after.clone());
            }
            Op::SetSelection { node, after, .. } => match after {
                Some(rows) => {
                    self.selections.insert(*node, rows.clone());
                }
                None => {
                    self.selections.remove(node);
                }
            },
        }
    }

    fn record(&mut self, op: Op) {
        self.apply(&op);
        self.history.redo.clear();
        match self.open.last_mut() {
            Some(group) => group.push(op),
            None => self.history.undo.push(DiagramDelta { ops: vec![op] }),
        }
    }

    /// Starts an atomic group; everything recorded until the matching
    /// [`Diagram::end_group`] becomes one undo unit. Groups nest.
    pub fn begin_group(&mut self) {
        self.open.push(Vec::new());
    }

    pub fn end_group(&mut self) -> DiagramDelta {
        let ops = self.open.pop().expect("end_group without begin_group");
        match self.open.last_mut() {
            Some(parent) => {
                parent.extend(ops.iter().cloned());
            }
            None if !ops.is_empty() => self.history.undo.push(DiagramDelta { ops: ops.clone() }),
            None => {}
        }
        DiagramDelta { ops }
    }

    /// Reverts everything recorded in the innermost open group and discards it.
    pub fn rollback_group(&mut self) {
        let ops = self.open.pop().expect("rollback_group without begin_group");
        for op in ops.iter().rev() {
            self.apply(&op.inverse());
        }
    }

    /// Runs `f` as one atomic undo unit; on error every change is reverted.
    pub fn transaction<T>(&mut self, f: impl FnOnce(&mut Diagram) -> Result<T>) -> Result<(T, DiagramDelta)> {
        self.begin_group();
        match f(self) {
            Ok(value) => Ok((value, self.end_group())),
            Err(err) => {
                self.rollback_group();
                Err(err)
            }
        }
    }

    pub fn undo(&mut self) -> Result<DiagramDelta> {
        let delta = self.history.undo.pop().ok_or(Error::NothingToUndo)?;
        for op in delta.ops.iter().rev() {
            self.apply(&op.inverse());
        }
        self.history.redo.push(delta.clone());
        Ok(delta)
    }

    pub fn redo(&mut self) -> Result<DiagramDelta> {
        let delta = self.history.redo.pop().ok_or(Error::NothingToRedo)?;
        for op in &delta.ops {
            self.apply(op);
        }
        self.history.undo.push(delta.clone());
        Ok(delta)
    }

    pub fn clear_history(&mut self) {
        self.history = History::default();
    }

    // ---- mutations ----

    fn unique_label(&self, base: &str) -> String {
        if self.node_by_label_exact(base).is_none() {
            return base.to_string();
        }
        (2..)
            .map(|n| format!("{base}-{n}"))
            .find(|candidate| self.node_by_label_exact(candidate).is_none())
            .expect("unbounded search")
    }

    fn node_by_label_exact(&self, label: &str) -> Option<&Node> {
        self.nodes.values().find(|n| n.label == label)
    }

    fn default_position(&self) -> Point {
        self.nodes
            .values()
            .map(|n| n.position.x + n.size.w)
            .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.max(x))))
            .map_or(Point::new(40.0, 40.0), |right| Point::new(right + 60.0, 40.0))
    }

    fn check_kind(&self, kind: &NodeKind) -> Result<()> {
        match kind {
            NodeKind::DataSource { table } if self.dataset(table).is_none() => {
                Err(Error::DatasetNotFound(table.clone()))
            }
            NodeKind::AttributeFilter { spec } => spec.validate().map_err(Error::OptionsError),
            _ => Ok(()),
        }
    }

    pub fn add_node(&mut self, kind: NodeKind, label: Option<&str>, position: Option<Point>) -> Result<NodeId> {
        self.check_kind(&kind)?;
        let id = NodeId(self.next_node);
        self.next_node += 1;
        let label = match label {
            Some(l) => self.unique_label(l),
            None => self.unique_label(&format!("node-{}", id.0)),
        };
        let position = position.unwrap_or_else(|| self.default_position());
        let size = kind.default_size();
        let node = Node {
            id,
            label,
            kind,
            position,
            size,
            pinned: false,
        };
        self.record(Op::AddNode { node });
        Ok(id)
    }

    /// Removes a node with its incident edges and selection as one undo unit.
    pub fn remove_node(&mut self, id: NodeId) -> Result<()> {
        let node = self.nodes.get(&id).cloned().ok_or(Error::UnknownNode(id))?;
        self.begin_group();
        let incident: Vec<Edge> = self.incident_edges(id).copied().collect();
        for edge in incident {
            self.record(Op::RemoveEdge { edge });
        }
        if let Some(rows) = self.selections.get(&id).cloned() {
            self.record(Op::SetSelection {
                node: id,
                before: Some(rows),
                after: None,
            });
        }
        self.record(Op::RemoveNode { node });
        self.end_group();
        Ok(())
    }

    pub fn update_node(&mut self, id: NodeId, f: impl FnOnce(&mut Node)) -> Result<()> {
        let before = self.nodes.get(&id).cloned().ok_or(Error::UnknownNode(id))?;
        let mut after = before.clone();
        f(&mut after);
        after.id = id;
        if after == before {
            return Ok(());
        }
        self.check_kind(&after.kind)?;
        if after.label != before.label && self.nodes.values().any(|n| n.id != id && n.label == after.label) {
            return Err(Error::NameConflict(after.label));
        }
        self.record(Op::UpdateNode { before, after });
        Ok(())
    }

    pub fn set_options(&mut self, id: NodeId, kind: NodeKind) -> Result<()> {
        self.update_node(id, |n| n.kind = kind)
    }

    /// Moves a node; `pin` marks it as user-positioned so layout leaves it alone.
    pub fn move_node(&mut self, id: NodeId, position: Point, pin: bool) -> Result<()> {
        self.update_node(id, |n| {
            n.position = position;
            n.pinned |= pin;
        })
    }

    pub fn add_edge(&mut self, from: Endpoint, to: Endpoint) -> Result<EdgeId> {
        let source = self.nodes.get(&from.node).ok_or(Error::UnknownNode(from.node))?;
        let target = self.nodes.get(&to.node).ok_or(Error::UnknownNode(to.node))?;
        if from.port.is_input() || !source.kind.has_port(from.port) {
            return Err(Error::PortError(format!(
                "{} has no output port {}",
                source.label, from.port
            )));
        }
        if !to.port.is_input() || !target.kind.has_port(to.port) {
            return Err(Error::PortError(format!(
                "{} has no input port {}",
                target.label, to.port
            )));
        }
        let emits_constants = matches!(source.kind, NodeKind::ConstantsExtractor { .. });
        if emits_constants != (to.port == Port::ConstantsIn) {
            return Err(Error::PortError(format!(
                "cannot wire {}.{} to {}.{}",
                source.label, from.port, target.label, to.port
            )));
        }
        let multi_input = matches!(target.kind, NodeKind::SetOperator { .. }) && to.port == Port::DataIn;
        if !multi_input && self.edges_into(to.node, to.port).next().is_some() {
            return Err(Error::PortError(format!(
                "{}.{} is already connected",
                target.label, to.port
            )));
        }
        if self.edges.values().any(|e| e.from == from && e.to == to) {
            return Err(Error::PortError("duplicate edge".into()));
        }
        if from.node == to.node || self.reaches(to.node, from.node) {
            return Err(Error::CycleError);
        }
        let id = EdgeId(self.next_edge);
        self.next_edge += 1;
        self.record(Op::AddEdge {
            edge: Edge { id, from, to },
        });
        Ok(id)
    }

    pub fn remove_edge(&mut self, id: EdgeId) -> Result<()> {
        let edge = *self
            .edges
            .get(&id)
            .ok_or_else(|| Error::RangeError(format!("unknown edge {}", id.0)))?;
        self.record(Op::RemoveEdge { edge });
        Ok(())
    }

    /// Stores the interactive selection of a visualization node. Rows must
    /// be part of the node's current input.
    pub fn set_selection(&mut self, id: NodeId, rows: impl IntoIterator<Item = usize>) -> Result<()> {
        let node = self.nodes.get(&id).ok_or(Error::UnknownNode(id))?;
        if !node.kind.is_visualization() {
            return Err(Error::PortError(format!("{} is not a visualization", node.label)));
        }
        let rows: BTreeSet<usize> = rows.into_iter().collect();
        let input = propagate::node_input(self, id)?;
        let available: BTreeSet<usize> = match &input {
            Some(Payload::Rows(subset)) => subset.rows.clone(),
            _ => BTreeSet::new(),
        };
        if let Some(bad) = rows.iter().find(|r| !available.contains(r)) {
            return Err(Error::RangeError(format!(
                "row {bad} is not in the input of {}",
                node.label
            )));
        }
        let before = self.selections.get(&id).cloned();
        let after = Some(rows);
        if before != after {
            self.record(Op::SetSelection {
                node: id,
                before,
                after,
            });
        }
        Ok(())
    }

    pub(crate) fn restore_counters(&mut self, next_node: u64, next_edge: u64) {
        let max_node = self.nodes.keys().map(|id| id.0).max().unwrap_or(0);
        let max_edge = self.edges.keys().map(|id| id.0).max().unwrap_or(0);
        self.next_node = next_node.max(max_node + 1);
        self.next_edge = next_edge.max(max_edge + 1);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataflow::node::{EncodingSpec, VisType};

    fn cars() -> Diagram {
        let mut d = Diagram::new();
        d.load_dataset("cars", "name,mpg\na,10\nb,20\nc,30\n", b',').unwrap();
        d
    }

    fn vis() -> NodeKind {
        NodeKind::Visualization {
            vis: VisType::Scatterplot,
            columns: vec![],
        }
    }

    #[test]
    fn labels_are_made_unique() {
        let mut d = cars();
        let a = d.add_node(vis(), Some("MyChart"), None).unwrap();
        let b = d.add_node(vis(), Some("MyChart"), None).unwrap();
        assert_eq!(d.node(a).unwrap().label, "MyChart");
        assert_eq!(d.node(b).unwrap().label, "MyChart-2");
        let c = d.add_node(vis(), None, None).unwrap();
        assert_eq!(d.node(c).unwrap().label, format!("node-{}", c.0));
    }

    #[test]
    fn visualization_has_three_ports() {
        assert_eq!(vis().ports().len(), 3);
    }

    #[test]
    fn wiring_rules() {
        let mut d = cars();
        let src = d
            .add_node(NodeKind::DataSource { table: "cars".into() }, None, None)
            .unwrap();
        let chart = d.add_node(vis(), Some("MyChart"), None).unwrap();
        let editor = d
            .add_node(
                NodeKind::VisualEditor {
                    spec: EncodingSpec::AssignConstant { color: "red".into() },
                },
                None,
                None,
            )
            .unwrap();
        d.add_edge(Endpoint::new(src, Port::DataOut), Endpoint::new(chart, Port::DataIn))
            .unwrap();
        d.add_edge(
            Endpoint::new(chart, Port::SelectionOut),
            Endpoint::new(editor, Port::DataIn),
        )
        .unwrap();
        // loop back
        let err = d
            .add_edge(Endpoint::new(editor, Port::DataOut), Endpoint::new(chart, Port::DataIn))
            .unwrap_err();
        assert!(matches!(err, Error::PortError(_) | Error::CycleError));
        let err = d
            .add_edge(Endpoint::new(src, Port::DataIn), Endpoint::new(chart, Port::DataIn))
            .unwrap_err();
        assert!(matches!(err, Error::PortError(_)));
    }

    #[test]
    fn cycle_rejected() {
        let mut d = cars();
        let a = d
            .add_node(
                NodeKind::SetOperator {
                    op: crate::dataflow::SetOp::Union,
                },
                None,
                None,
            )
            .unwrap();
        let b = d
            .add_node(
                NodeKind::SetOperator {
                    op: crate::dataflow::SetOp::Union,
                },
                None,
                None,
            )
            .unwrap();
        d.add_edge(Endpoint::new(a, Port::DataOut), Endpoint::new(b, Port::DataIn))
            .unwrap();
        let err = d
            .add_edge(Endpoint::new(b, Port::DataOut), Endpoint::new(a, Port::DataIn))
            .unwrap_err();
        assert_eq!(err, Error::CycleError);
        assert_eq!(
            d.add_edge(Endpoint::new(a, Port::DataOut), Endpoint::new(a, Port::DataIn))
                .unwrap_err(),
            Error::CycleError
        );
        assert!(d.topological_order().is_ok());
    }

    #[test]
    fn undo_redo_round_trip() {
        let mut d = cars();
        let h0 = d.hash();
        d.add_node(vis(), None, None).unwrap();
        let h1 = d.hash();
        assert_eq!(d.node_count(), 1);
        d.undo().unwrap();
        assert_eq!(d.node_count(), 0);
        assert_eq!(d.hash(), h0);
        d.redo().unwrap();
        assert_eq!(d.hash(), h1);
        d.undo().unwrap();
        d.undo().unwrap_err();
        d.redo().unwrap();
        assert_eq!(d.redo().unwrap_err(), Error::NothingToRedo);
    }

    #[test]
    fn remove_node_is_atomic() {
        let mut d = cars();
        let src = d
            .add_node(NodeKind::DataSource { table: "cars".into() }, None, None)
            .unwrap();
        let chart = d.add_node(vis(), None, None).unwrap();
        d.add_edge(Endpoint::new(src, Port::DataOut), Endpoint::new(chart, Port::DataIn))
            .unwrap();
        d.set_selection(chart, [0, 2]).unwrap();
        let before = d.hash();
        d.remove_node(chart).unwrap();
        assert_eq!(d.edge_count(), 0);
        assert!(d.selection(chart).is_none());
        d.undo().unwrap();
        assert_eq!(d.hash(), before);
    }

    #[test]
    fn transaction_rolls_back() {
        let mut d = cars();
        let before = d.hash();
        let result: Result<((), DiagramDelta)> = d.transaction(|d| {
            d.add_node(vis(), None, None)?;
            Err(Error::OptionsError("boom".into()))
        });
        assert!(result.is_err());
        assert_eq!(d.hash(), before);
        assert!(!d.can_undo());
    }

    #[test]
    fn selection_checks() {
        let mut d = cars();
        let src = d
            .add_node(NodeKind::DataSource { table: "cars".into() }, None, None)
            .unwrap();
        let chart = d.add_node(vis(), None, None).unwrap();
        assert!(matches!(d.set_selection(src, [0]), Err(Error::PortError(_))));
        // unconnected chart has no rows to select
        assert!(matches!(d.set_selection(chart, [0]), Err(Error::RangeError(_))));
        d.add_edge(Endpoint::new(src, Port::DataOut), Endpoint::new(chart, Port::DataIn))
            .unwrap();
        d.set_selection(chart, [1]).unwrap();
        assert!(matches!(d.set_selection(chart, [7]), Err(Error::RangeError(_))));
        d.set_selection(chart, []).unwrap();
        assert_eq!(d.selection(chart).unwrap().len(), 0);
    }

    #[test]
    fn unknown_dataset_source() {
        let mut d = Diagram::new();
        let err = d
            .add_node(NodeKind::DataSource { table: "nope".into() }, None, None)
            .unwrap_err();
        assert_eq!(err, Error::DatasetNotFound("nope".into()));
    }
}
