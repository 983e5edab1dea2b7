//! Diagram documents: the JSON form used for save/load and service payloads.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::diagram::Diagram;
use super::node::{Edge, Node, NodeId};
use super::table::Table;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DiagramDocument {
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    pub datasets: Vec<Table>,
    pub selections: BTreeMap<NodeId, BTreeSet<usize>>,
    #[serde(default)]
    pub next_node_id: u64,
    #[serde(default)]
    pub next_edge_id: u64,
}

impl Diagram {
    pub fn to_document(&self) -> DiagramDocument {
        DiagramDocument {
            nodes: self.nodes.values().cloned().collect(),
            edges: self.edges.values().copied().collect(),
            datasets: self.datasets.values().map(|t| t.as_ref().clone()).collect(),
            selections: self.selections.clone(),
            next_node_id: self.next_node,
            next_edge_id: self.next_edge,
        }
    }

    pub fn save(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("document encodes")
    }

    /// Rebuilds a diagram from a document, re-validating every invariant.
    /// The undo history starts empty.
    pub fn from_document(doc: DiagramDocument) -> Result<Diagram> {
        let mut diagram = Diagram::new();
        for table in doc.datasets {
            let rebuilt = Table::new(
                table.name.clone(),
                table.columns.iter().map(|c| c.name.clone()).collect(),
                table.rows,
            )?;
            if rebuilt.columns != table.columns {
                return Err(Error::MalformedData(format!(
                    "column kinds of {} do not match its rows",
                    table.name
                )));
            }
            if diagram.datasets.insert(table.name.clone(), Arc::new(rebuilt)).is_some() {
                return Err(Error::MalformedData(format!("duplicate dataset {}", table.name)));
            }
        }
        let mut labels = BTreeSet::new();
        for node in doc.nodes {
            if !labels.insert(node.label.clone()) {
                return Err(Error::MalformedData(format!("duplicate label {}", node.label)));
            }
            if let super::node::NodeKind::DataSource { table } = &node.kind {
                if !diagram.datasets.contains_key(table) {
                    return Err(Error::MalformedData(format!(
                        "data source references unknown dataset {table}"
                    )));
                }
            }
            if diagram.nodes.insert(node.id, node).is_some() {
                return Err(Error::MalformedData("duplicate node id".into()));
            }
        }
        diagram.restore_counters(doc.next_node_id, doc.next_edge_id);
        let mut edges = doc.edges;
        edges.sort_by_key(|e| e.id);
        for edge in edges {
            let next_edge = diagram.next_edge;
            diagram.next_edge = edge.id.0;
            let added = diagram.add_edge(edge.from, edge.to);
            diagram.next_edge = next_edge.max(edge.id.0 + 1);
            added.map_err(|e| Error::MalformedData(format!("edge {}: {e}", edge.id.0)))?;
        }
        for (node, rows) in doc.selections {
            diagram
                .set_selection(node, rows)
                .map_err(|e| Error::MalformedData(format!("selection on {node}: {e}")))?;
        }
        diagram.clear_history();
        Ok(diagram)
    }

    pub fn load(text: &str) -> Result<Diagram> {
        let doc: DiagramDocument = serde_json::from_str(text).map_err(|e| Error::MalformedData(e.to_string()))?;
        Diagram::from_document(doc)
    }
}
