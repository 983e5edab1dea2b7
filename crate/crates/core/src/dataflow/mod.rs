//! Tabular data, the subset-flow diagram, propagation, and undo history.

mod diagram;
mod node;
mod persist;
mod propagate;
mod table;

pub use diagram::{Diagram, DiagramDelta, Op};
pub use node::{
    Direction, Edge, EdgeId, EncodingSpec, Endpoint, FilterSpec, KindTag, Node, NodeId, NodeKind, Point, Port,
    Predicate, SetOp, Size, VisType,
};
pub use persist::DiagramDocument;
pub use propagate::{evaluate, named_color, node_input, propagate, NodeOutput, Outputs, Payload, Subset, Visual};
pub use table::{Column, ColumnKind, Table};
