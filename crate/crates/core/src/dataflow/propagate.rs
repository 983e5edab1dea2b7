//! Subset-flow evaluation: every edge carries a row subset of one table
//! (plus per-row visual properties), except the constants payload that a
//! constants extractor hands to an equality filter.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::diagram::Diagram;
use super::node::{Direction, EncodingSpec, NodeId, NodeKind, Port, Predicate, SetOp};
use super::table::{ColumnKind, Table};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Visual {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Subset {
    #[serde(serialize_with = "table_name")]
    pub table: Arc<Table>,
    pub rows: BTreeSet<usize>,
    pub visuals: BTreeMap<usize, Visual>,
}

fn table_name<S: serde::Serializer>(table: &Arc<Table>, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&table.name)
}

impl Subset {
    pub fn all(table: Arc<Table>) -> Self {
        let rows = (0..table.row_count()).collect();
        Subset {
            table,
            rows,
            visuals: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    fn restrict(&self, rows: BTreeSet<usize>) -> Subset {
        let visuals = self
            .visuals
            .iter()
            .filter(|(r, _)| rows.contains(r))
            .map(|(r, v)| (*r, v.clone()))
            .collect();
        Subset {
            table: Arc::clone(&self.table),
            rows,
            visuals,
        }
    }

    fn column(&self, name: &str) -> Result<usize> {
        self.table
            .column_index(name)
            .ok_or_else(|| Error::ColumnNotFound(format!("{name} (table {})", self.table.name)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Payload {
    Rows(Subset),
    Constants { values: Vec<String> },
}

impl Payload {
    pub fn as_rows(&self) -> Option<&Subset> {
        match self {
            Payload::Rows(s) => Some(s),
            Payload::Constants { .. } => None,
        }
    }
}

/// What a node emits. `data` is `None` while the node has no input.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct NodeOutput {
    pub data: Option<Payload>,
    pub selection: Option<Subset>,
}

impl NodeOutput {
    pub fn port(&self, port: Port) -> Option<Payload> {
        match port {
            Port::DataOut => self.data.clone(),
            Port::SelectionOut => self.selection.clone().map(Payload::Rows),
            _ => None,
        }
    }

    pub fn rows(&self) -> Option<&Subset> {
        self.data.as_ref().and_then(Payload::as_rows)
    }
}

pub type Outputs = BTreeMap<NodeId, NodeOutput>;

/// Evaluates every node in topological order. Fails on the first node whose
/// options do not fit its input.
pub fn propagate(diagram: &Diagram) -> Result<Outputs> {
    let (outputs, errors) = evaluate(diagram)?;
    match errors.into_iter().next() {
        Some((_, err)) => Err(err),
        None => Ok(outputs),
    }
}

/// Like [`propagate`] but keeps going past failing nodes (their outputs
/// are left empty) and reports the failures alongside.
pub fn evaluate(diagram: &Diagram) -> Result<(Outputs, Vec<(NodeId, Error)>)> {
    let order = diagram.topological_order()?;
    let mut outputs: Outputs = BTreeMap::new();
    let mut errors = Vec::new();
    for id in order {
        match evaluate_node(diagram, id, &outputs) {
            Ok(out) => {
                outputs.insert(id, out);
            }
            Err(err) => {
                outputs.insert(id, NodeOutput::default());
                errors.push((id, err));
            }
        }
    }
    Ok((outputs, errors))
}

/// The payload arriving at a node's data input, evaluated leniently.
pub fn node_input(diagram: &Diagram, id: NodeId) -> Result<Option<Payload>> {
    let (outputs, _) = evaluate(diagram)?;
    Ok(gather(diagram, id, Port::DataIn, &outputs).into_iter().next())
}

fn gather(diagram: &Diagram, id: NodeId, port: Port, outputs: &Outputs) -> Vec<Payload> {
    diagram
        .edges_into(id, port)
        .filter_map(|e| outputs.get(&e.from.node).and_then(|o| o.port(e.from.port)))
        .collect()
}

fn single_rows(inputs: Vec<Payload>) -> Option<Subset> {
    inputs.into_iter().find_map(|p| match p {
        Payload::Rows(s) => Some(s),
        Payload::Constants { .. } => None,
    })
}

fn evaluate_node(diagram: &Diagram, id: NodeId, outputs: &Outputs) -> Result<NodeOutput> {
    let node = diagram.node(id).expect("ordered ids exist");
    let inputs = gather(diagram, id, Port::DataIn, outputs);
    let out = match &node.kind {
        NodeKind::DataSource { table } => {
            let table = diagram
                .dataset_arc(table)
                .ok_or_else(|| Error::DatasetNotFound(table.clone()))?;
            NodeOutput {
                data: Some(Payload::Rows(Subset::all(table))),
                selection: None,
            }
        }
        NodeKind::Visualization { .. } => match single_rows(inputs) {
            Some(input) => {
                let selected: BTreeSet<usize> = diagram
                    .selection(id)
                    .map(|sel| sel.intersection(&input.rows).copied().collect())
                    .unwrap_or_default();
                let selection = input.restrict(selected);
                NodeOutput {
                    data: Some(Payload::Rows(input)),
                    selection: Some(selection),
                }
            }
            None => NodeOutput::default(),
        },
        NodeKind::AttributeFilter { spec } => match single_rows(inputs) {
            Some(input) => {
                let constants = gather(diagram, id, Port::ConstantsIn, outputs)
                    .into_iter()
                    .find_map(|p| match p {
                        Payload::Constants { values } => Some(values),
                        Payload::Rows(_) => None,
                    });
                let rows = filter_rows(&input, &spec.column, &spec.predicate, constants.as_deref())?;
                NodeOutput {
                    data: Some(Payload::Rows(input.restrict(rows))),
                    selection: None,
                }
            }
            None => NodeOutput::default(),
        },
        NodeKind::VisualEditor { spec } => match single_rows(inputs) {
            Some(input) => NodeOutput {
                data: Some(Payload::Rows(encode(input, spec)?)),
                selection: None,
            },
            None => NodeOutput::default(),
        },
        NodeKind::SetOperator { op } => {
            let subsets: Vec<Subset> = inputs.into_iter().filter_map(|p| p.as_rows().cloned()).collect();
            NodeOutput {
                data: combine(*op, subsets)?.map(Payload::Rows),
                selection: None,
            }
        }
        NodeKind::ConstantsExtractor { column } => match single_rows(inputs) {
            Some(input) => {
                let col = input.column(column)?;
                let mut seen = BTreeSet::new();
                let values = input
                    .rows
                    .iter()
                    .map(|&r| input.table.cell(r, col).to_string())
                    .filter(|v| seen.insert(v.clone()))
                    .collect();
                NodeOutput {
                    data: Some(Payload::Constants { values }),
                    selection: None,
                }
            }
            None => NodeOutput::default(),
        },
    };
    Ok(out)
}

fn filter_rows(
    input: &Subset,
    column: &str,
    predicate: &Predicate,
    constants: Option<&[String]>,
) -> Result<BTreeSet<usize>> {
    let col = input.column(column)?;
    let table = &input.table;
    let rows = match predicate {
        Predicate::NoOp => input.rows.clone(),
        Predicate::Range { min, max } => {
            if table.columns[col].kind != ColumnKind::Numeric {
                return Err(Error::OptionsError(format!(
                    "range filter on non-numeric column {column}"
                )));
            }
            input
                .rows
                .iter()
                .copied()
                .filter(|&r| match table.numeric(r, col) {
                    Some(v) => min.is_none_or(|lo| v >= lo) && max.is_none_or(|hi| v <= hi),
                    None => false,
                })
                .collect()
        }
        Predicate::Equals { values } => {
            let wanted: BTreeSet<String> = constants
                .unwrap_or(values.as_slice())
                .iter()
                .map(|v| v.trim().to_lowercase())
                .collect();
            input
                .rows
                .iter()
                .copied()
                .filter(|&r| wanted.contains(&table.cell(r, col).trim().to_lowercase()))
                .collect()
        }
        Predicate::Extremum { direction, count } => {
            if table.columns[col].kind != ColumnKind::Numeric {
                return Err(Error::OptionsError(format!(
                    "extremum filter on non-numeric column {column}"
                )));
            }
            let mut ranked: Vec<(f64, usize)> = input
                .rows
                .iter()
                .filter_map(|&r| table.numeric(r, col).map(|v| (v, r)))
                .collect();
            ranked.sort_by(|a, b| {
                let by_value = match direction {
                    Direction::Max => b.0.total_cmp(&a.0),
                    Direction::Min => a.0.total_cmp(&b.0),
                };
                by_value.then(a.1.cmp(&b.1))
            });
            ranked.into_iter().take(*count).map(|(_, r)| r).collect()
        }
    };
    Ok(rows)
}

fn combine(op: SetOp, subsets: Vec<Subset>) -> Result<Option<Subset>> {
    let mut iter = subsets.into_iter();
    let Some(first) = iter.next() else {
        return Ok(None);
    };
    let mut acc = first;
    for next in iter {
        if !Arc::ptr_eq(&acc.table, &next.table) && acc.table.name != next.table.name {
            return Err(Error::TableMismatch(acc.table.name.clone(), next.table.name.clone()));
        }
        acc = match op {
            SetOp::Union => {
                let rows = acc.rows.union(&next.rows).copied().collect();
                let mut visuals = acc.visuals;
                visuals.extend(next.visuals);
                Subset {
                    table: acc.table,
                    rows,
                    visuals,
                }
            }
            SetOp::Intersection => {
                let rows: BTreeSet<usize> = acc.rows.intersection(&next.rows).copied().collect();
                let mut visuals = acc.visuals;
                visuals.extend(next.visuals);
                visuals.retain(|r, _| rows.contains(r));
                Subset {
                    table: acc.table,
                    rows,
                    visuals,
                }
            }
            SetOp::Difference => {
                let rows = acc.rows.difference(&next.rows).copied().collect();
                acc.restrict(rows)
            }
        };
    }
    Ok(Some(acc))
}

fn encode(input: Subset, spec: &EncodingSpec) -> Result<Subset> {
    let mut out = input;
    match spec {
        EncodingSpec::AssignConstant { color } => {
            for &r in &out.rows {
                out.visuals.insert(
                    r,
                    Visual {
                        color: Some(color.clone()),
                    },
                );
            }
        }
        EncodingSpec::ColorScale { column, scale } => {
            let col = out.column(column)?;
            let (lo_color, hi_color) = parse_scale(scale)?;
            if out.table.columns[col].kind != ColumnKind::Numeric {
                // text columns get one palette color per distinct value
                let values: BTreeSet<&str> = out.rows.iter().map(|&r| out.table.rows[r][col].as_str()).collect();
                let index: BTreeMap<&str, usize> = values.into_iter().enumerate().map(|(i, v)| (v, i)).collect();
                let colors: Vec<(usize, String)> = out
                    .rows
                    .iter()
                    .map(|&r| {
                        let c = CATEGORICAL[index[out.table.rows[r][col].as_str()] % CATEGORICAL.len()];
                        (r, hex(c))
                    })
                    .collect();
                for (r, color) in colors {
                    out.visuals.insert(r, Visual { color: Some(color) });
                }
                return Ok(out);
            }
            let values: Vec<(usize, f64)> = out
                .rows
                .iter()
                .filter_map(|&r| out.table.numeric(r, col).map(|v| (r, v)))
                .collect();
            let lo = values.iter().map(|v| v.1).fold(f64::INFINITY, f64::min);
            let hi = values.iter().map(|v| v.1).fold(f64::NEG_INFINITY, f64::max);
            for (r, v) in values {
                let t = if hi > lo { (v - lo) / (hi - lo) } else { 0.5 };
                out.visuals.insert(
                    r,
                    Visual {
                        color: Some(mix(lo_color, hi_color, t)),
                    },
                );
            }
        }
    }
    Ok(out)
}

const CATEGORICAL: [[u8; 3]; 8] = [
    [31, 119, 180],
    [255, 127, 14],
    [44, 160, 44],
    [214, 39, 40],
    [148, 103, 189],
    [140, 86, 75],
    [227, 119, 194],
    [127, 127, 127],
];

pub fn named_color(name: &str) -> Option<[u8; 3]> {
    Some(match name.trim().to_lowercase().as_str() {
        "red" => [214, 39, 40],
        "green" => [44, 160, 44],
        "blue" => [31, 119, 180],
        "yellow" => [255, 221, 51],
        "orange" => [255, 127, 14],
        "purple" => [148, 103, 189],
        "pink" => [227, 119, 194],
        "brown" => [140, 86, 75],
        "gray" | "grey" => [127, 127, 127],
        "black" => [0, 0, 0],
        "white" => [255, 255, 255],
        "cyan" => [23, 190, 207],
        _ => return None,
    })
}

fn parse_scale(scale: &str) -> Result<([u8; 3], [u8; 3])> {
    let mut parts = scale.split('-');
    match (
        parts.next().and_then(named_color),
        parts.next().and_then(named_color),
        parts.next(),
    ) {
        (Some(a), Some(b), None) => Ok((a, b)),
        _ => Err(Error::OptionsError(format!("unknown color scale {scale:?}"))),
    }
}

fn hex(c: [u8; 3]) -> String {
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

fn mix(a: [u8; 3], b: [u8; 3], t: f64) -> String {
    let channel = |i: usize| (a[i] as f64 + (b[i] as f64 - a[i] as f64) * t).round() as u8;
    hex([channel(0), channel(1), channel(2)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataflow::node::{Endpoint, FilterSpec, VisType};

    const CARS: &str = "name,mpg,origin\na,10,usa\nb,20,japan\nc,15,usa\nd,,europe\ne,20,japan\nf,18,usa\n";

    fn setup() -> (Diagram, NodeId) {
        let mut d = Diagram::new();
        d.load_dataset("cars", CARS, b',').unwrap();
        let src = d
            .add_node(NodeKind::DataSource { table: "cars".into() }, None, None)
            .unwrap();
        (d, src)
    }

    fn filter(d: &mut Diagram, src: NodeId, column: &str, predicate: Predicate) -> NodeId {
        let f = d
            .add_node(
                NodeKind::AttributeFilter {
                    spec: FilterSpec {
                        column: column.into(),
                        predicate,
                    },
                },
                None,
                None,
            )
            .unwrap();
        d.add_edge(Endpoint::new(src, Port::DataOut), Endpoint::new(f, Port::DataIn))
            .unwrap();
        f
    }

    fn rows_of(out: &Outputs, id: NodeId) -> Vec<usize> {
        out[&id].rows().unwrap().rows.iter().copied().collect()
    }

    #[test]
    fn range_filter_skips_missing() {
        let (mut d, src) = setup();
        let f = filter(
            &mut d,
            src,
            "mpg",
            Predicate::Range {
                min: Some(15.0),
                max: Some(20.0),
            },
        );
        let out = propagate(&d).unwrap();
        assert_eq!(rows_of(&out, f), vec![1, 2, 4, 5]);
    }

    #[test]
    fn extremum_breaks_ties_by_row() {
        let (mut d, src) = setup();
        let f = filter(
            &mut d,
            src,
            "mpg",
            Predicate::Extremum {
                direction: Direction::Max,
                count: 2,
            },
        );
        let out = propagate(&d).unwrap();
        assert_eq!(rows_of(&out, f), vec![1, 4]);
        let g = filter(
            &mut d,
            src,
            "mpg",
            Predicate::Extremum {
                direction: Direction::Min,
                count: 1,
            },
        );
        assert_eq!(rows_of(&propagate(&d).unwrap(), g), vec![0]);
    }

    #[test]
    fn missing_column_reported() {
        let (mut d, src) = setup();
        filter(&mut d, src, "weight", Predicate::NoOp);
        assert!(matches!(propagate(&d), Err(Error::ColumnNotFound(_))));
    }

    #[test]
    fn union_merges_visuals_later_wins() {
        let (mut d, src) = setup();
        let usa = filter(
            &mut d,
            src,
            "origin",
            Predicate::Equals {
                values: vec!["usa".into()],
            },
        );
        let japan = filter(
            &mut d,
            src,
            "origin",
            Predicate::Equals {
                values: vec!["japan".into()],
            },
        );
        let red = d
            .add_node(
                NodeKind::VisualEditor {
                    spec: EncodingSpec::AssignConstant { color: "red".into() },
                },
                None,
                None,
            )
            .unwrap();
        d.add_edge(Endpoint::new(src, Port::DataOut), Endpoint::new(red, Port::DataIn))
            .unwrap();
        let union = d
            .add_node(NodeKind::SetOperator { op: SetOp::Union }, None, None)
            .unwrap();
        d.add_edge(Endpoint::new(red, Port::DataOut), Endpoint::new(union, Port::DataIn))
            .unwrap();
        d.add_edge(Endpoint::new(usa, Port::DataOut), Endpoint::new(union, Port::DataIn))
            .unwrap();
        d.add_edge(Endpoint::new(japan, Port::DataOut), Endpoint::new(union, Port::DataIn))
            .unwrap();
        let out = propagate(&d).unwrap();
        let merged = out[&union].rows().unwrap();
        assert_eq!(merged.len(), 6);
        // usa/japan inputs carry no visuals, so the red from the first input survives
        assert_eq!(merged.visuals[&0].color.as_deref(), Some("red"));

        let inter = d
            .add_node(
                NodeKind::SetOperator {
                    op: SetOp::Intersection,
                },
                None,
                None,
            )
            .unwrap();
        d.add_edge(Endpoint::new(usa, Port::DataOut), Endpoint::new(inter, Port::DataIn))
            .unwrap();
        d.add_edge(Endpoint::new(japan, Port::DataOut), Endpoint::new(inter, Port::DataIn))
            .unwrap();
        assert!(propagate(&d).unwrap()[&inter].rows().unwrap().is_empty());
    }

    #[test]
    fn union_disjoint_sizes_add() {
        let (mut d, src) = setup();
        let usa = filter(
            &mut d,
            src,
            "origin",
            Predicate::Equals {
                values: vec!["usa".into()],
            },
        );
        let japan = filter(
            &mut d,
            src,
            "origin",
            Predicate::Equals {
                values: vec!["japan".into()],
            },
        );
        let union = d
            .add_node(NodeKind::SetOperator { op: SetOp::Union }, None, None)
            .unwrap();
        d.add_edge(Endpoint::new(usa, Port::DataOut), Endpoint::new(union, Port::DataIn))
            .unwrap();
        d.add_edge(Endpoint::new(japan, Port::DataOut), Endpoint::new(union, Port::DataIn))
            .unwrap();
        let out = propagate(&d).unwrap();
        assert_eq!(out[&usa].rows().unwrap().len(), 3);
        assert_eq!(out[&japan].rows().unwrap().len(), 2);
        assert_eq!(out[&union].rows().unwrap().len(), 5);
    }

    #[test]
    fn table_mismatch() {
        let (mut d, src) = setup();
        d.load_dataset("sales", "name,units\na,1\n", b',').unwrap();
        let sales = d
            .add_node(NodeKind::DataSource { table: "sales".into() }, None, None)
            .unwrap();
        let union = d
            .add_node(NodeKind::SetOperator { op: SetOp::Union }, None, None)
            .unwrap();
        d.add_edge(Endpoint::new(src, Port::DataOut), Endpoint::new(union, Port::DataIn))
            .unwrap();
        d.add_edge(Endpoint::new(sales, Port::DataOut), Endpoint::new(union, Port::DataIn))
            .unwrap();
        assert!(matches!(propagate(&d), Err(Error::TableMismatch(_, _))));
    }

    #[test]
    fn selection_flows_out_of_visualization() {
        let (mut d, src) = setup();
        let chart = d
            .add_node(
                NodeKind::Visualization {
                    vis: VisType::Scatterplot,
                    columns: vec![],
                },
                Some("MyChart"),
                None,
            )
            .unwrap();
        d.add_edge(Endpoint::new(src, Port::DataOut), Endpoint::new(chart, Port::DataIn))
            .unwrap();
        let editor = d
            .add_node(
                NodeKind::VisualEditor {
                    spec: EncodingSpec::AssignConstant { color: "blue".into() },
                },
                None,
                None,
            )
            .unwrap();
        d.add_edge(
            Endpoint::new(chart, Port::SelectionOut),
            Endpoint::new(editor, Port::DataIn),
        )
        .unwrap();
        assert!(propagate(&d).unwrap()[&editor].rows().unwrap().is_empty());
        d.set_selection(chart, [1, 3]).unwrap();
        let out = propagate(&d).unwrap();
        assert_eq!(rows_of(&out, editor), vec![1, 3]);
        assert_eq!(out[&editor].rows().unwrap().visuals.len(), 2);
    }

    #[test]
    fn constants_feed_equals_filter() {
        let (mut d, src) = setup();
        d.load_dataset("sales", "name,units\na,1\nz,2\nc,3\n", b',').unwrap();
        let sales = d
            .add_node(NodeKind::DataSource { table: "sales".into() }, None, None)
            .unwrap();
        let usa = filter(
            &mut d,
            src,
            "origin",
            Predicate::Equals {
                values: vec!["usa".into()],
            },
        );
        let extractor = d
            .add_node(NodeKind::ConstantsExtractor { column: "name".into() }, None, None)
            .unwrap();
        d.add_edge(
            Endpoint::new(usa, Port::DataOut),
            Endpoint::new(extractor, Port::DataIn),
        )
        .unwrap();
        let eq = filter(&mut d, sales, "name", Predicate::Equals { values: vec![] });
        d.add_edge(
            Endpoint::new(extractor, Port::DataOut),
            Endpoint::new(eq, Port::ConstantsIn),
        )
        .unwrap();
        let out = propagate(&d).unwrap();
        assert_eq!(
            out[&extractor].data,
            Some(Payload::Constants {
                values: vec!["a".into(), "c".into(), "f".into()]
            })
        );
        assert_eq!(rows_of(&out, eq), vec![0, 2]);
        // constants may only enter through the constants port
        let chart = d
            .add_node(
                NodeKind::Visualization {
                    vis: VisType::TableView,
                    columns: vec![],
                },
                None,
                None,
            )
            .unwrap();
        assert!(d
            .add_edge(
                Endpoint::new(extractor, Port::DataOut),
                Endpoint::new(chart, Port::DataIn)
            )
            .is_err());
    }

    #[test]
    fn color_scale_interpolates() {
        let (mut d, src) = setup();
        let editor = d
            .add_node(
                NodeKind::VisualEditor {
                    spec: EncodingSpec::ColorScale {
                        column: "mpg".into(),
                        scale: "red-green".into(),
                    },
                },
                None,
                None,
            )
            .unwrap();
        d.add_edge(Endpoint::new(src, Port::DataOut), Endpoint::new(editor, Port::DataIn))
            .unwrap();
        let out = propagate(&d).unwrap();
        let visuals = &out[&editor].rows().unwrap().visuals;
        assert_eq!(visuals[&0].color.as_deref(), Some("#d62728"));
        assert_eq!(visuals[&1].color.as_deref(), Some("#2ca02c"));
        assert!(!visuals.contains_key(&3));
    }

    #[test]
    fn text_color_scale_uses_palette() {
        let (mut d, src) = setup();
        let editor = d
            .add_node(
                NodeKind::VisualEditor {
                    spec: EncodingSpec::ColorScale {
                        column: "origin".into(),
                        scale: "red-green".into(),
                    },
                },
                None,
                None,
            )
            .unwrap();
        d.add_edge(Endpoint::new(src, Port::DataOut), Endpoint::new(editor, Port::DataIn))
            .unwrap();
        let out = propagate(&d).unwrap();
        let visuals = &out[&editor].rows().unwrap().visuals;
        // europe, japan, usa in sorted order
        assert_eq!(visuals[&3].color.as_deref(), Some("#1f77b4"));
        assert_eq!(visuals[&1].color, visuals[&4].color);
        assert_eq!(visuals[&0].color.as_deref(), Some("#2ca02c"));
    }
}
