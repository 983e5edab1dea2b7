//! Bundled sample data: a 9-column car table, car sales, and monthly
//! street speeds.

use std::collections::BTreeMap;

use crate::dataflow::{Diagram, Endpoint, NodeKind, Point, Port, Table, VisType};

pub const AUTO_MPG: &str = include_str!("../resources/data/auto-mpg.csv");
pub const SALES: &str = include_str!("../resources/data/sales.csv");
pub const SPEED: &str = include_str!("../resources/data/speed.csv");

pub const MY_CHART: &str = "MyChart";

/// Replacement names for columns and node labels; identity when empty.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Renaming {
    map: BTreeMap<String, String>,
}

impl Renaming {
    pub fn new<I, A, B>(pairs: I) -> Renaming
    where
        I: IntoIterator<Item = (A, B)>,
        A: Into<String>,
        B: Into<String>,
    {
        Renaming {
            map: pairs.into_iter().map(|(a, b)| (a.into(), b.into())).collect(),
        }
    }

    pub fn name(&self, original: &str) -> String {
        self.map.get(original).cloned().unwrap_or_else(|| original.to_string())
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&str, &str)> {
        self.map.iter().map(|(a, b)| (a.as_str(), b.as_str()))
    }
}

/// A renaming of every bundled column and fixture node label.
pub fn alternate_names() -> Renaming {
    Renaming::new([
        ("name", "model"),
        ("mpg", "economy"),
        ("cylinders", "pistons"),
        ("displacement", "volume"),
        ("horsepower", "power"),
        ("weight", "mass"),
        ("acceleration", "pickup"),
        ("year", "vintage"),
        ("origin", "region"),
        ("units", "quantity"),
        ("price", "cost"),
        ("time", "month"),
        ("speed", "velocity"),
        ("speed limit", "posted limit"),
        (MY_CHART, "Overview"),
        ("node-1", "FirstSource"),
        ("node-2", "SecondSource"),
    ])
}

pub fn catalog() -> Vec<Table> {
    catalog_renamed(&Renaming::default())
}

pub fn catalog_renamed(renaming: &Renaming) -> Vec<Table> {
    [("auto-mpg", AUTO_MPG), ("sales", SALES), ("speed", SPEED)]
        .into_iter()
        .map(|(name, text)| {
            let mut t = Table::from_text(name, text, b',').expect("bundled data is valid");
            for c in &mut t.columns {
                c.name = renaming.name(&c.name);
            }
            t
        })
        .collect()
}

/// Named starting diagrams for scripts and test suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fixture {
    /// All bundled datasets registered, no nodes.
    Empty,
    /// Only the car table, loaded into one data source node.
    SingleTable,
    /// Car and sales tables loaded, plus a scatterplot labeled MyChart over
    /// the cars with a selection of the high-mpg rows.
    Base,
    /// All datasets registered, the speed table loaded.
    Speed,
}

impl Fixture {
    pub const ALL: [Fixture; 4] = [Fixture::Empty, Fixture::SingleTable, Fixture::Base, Fixture::Speed];

    pub fn name(self) -> &'static str {
        match self {
            Fixture::Empty => "empty",
            Fixture::SingleTable => "single",
            Fixture::Base => "base",
            Fixture::Speed => "speed",
        }
    }

    pub fn parse(name: &str) -> Option<Fixture> {
        Fixture::ALL.into_iter().find(|f| f.name() == name)
    }

    pub fn build(self) -> Diagram {
        self.build_renamed(&Renaming::default())
    }

    pub fn build_renamed(self, r: &Renaming) -> Diagram {
        let mut d = Diagram::new();
        let mut tables = catalog_renamed(r);
        if self == Fixture::SingleTable {
            tables.truncate(1);
        }
        for t in tables {
            d.add_dataset(t).expect("distinct names");
        }
        let source = |d: &mut Diagram, table: &str, y: f64| {
            let label = r.name(&format!("node-{}", d.node_count() + 1));
            d.add_node(
                NodeKind::DataSource { table: table.into() },
                Some(&label),
                Some(Point::new(40.0, y)),
            )
            .expect("dataset registered")
        };
        match self {
            Fixture::Empty => {}
            Fixture::SingleTable => {
                source(&mut d, "auto-mpg", 200.0);
            }
            Fixture::Speed => {
                source(&mut d, "speed", 200.0);
            }
            Fixture::Base => {
                let cars = source(&mut d, "auto-mpg", 200.0);
                source(&mut d, "sales", 600.0);
                let chart = d
                    .add_node(
                        NodeKind::Visualization {
                            vis: VisType::Scatterplot,
                            columns: vec![r.name("mpg"), r.name("horsepower")],
                        },
                        Some(&r.name(MY_CHART)),
                        Some(Point::new(320.0, 160.0)),
                    )
                    .expect("valid node");
                d.add_edge(Endpoint::new(cars, Port::DataOut), Endpoint::new(chart, Port::DataIn))
                    .expect("valid edge");
                let table = d.dataset("auto-mpg").expect("registered");
                let mpg = table.column_index(&r.name("mpg")).expect("mpg column");
                let rows: Vec<usize> = (0..table.row_count())
                    .filter(|&row| table.numeric(row, mpg).is_some_and(|v| v >= 30.0))
                    .collect();
                d.set_selection(chart, rows).expect("rows are in the chart input");
            }
        }
        d.clear_history();
        d
    }
}

pub fn empty_diagram() -> Diagram {
    Fixture::Empty.build()
}

pub fn single_table_diagram() -> Diagram {
    Fixture::SingleTable.build()
}

pub fn base_diagram() -> Diagram {
    Fixture::Base.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataflow::ColumnKind;

    #[test]
    fn sample_data_shapes() {
        let c = catalog();
        assert_eq!(c[0].columns.len(), 9);
        assert_eq!(c[0].columns.iter().filter(|c| c.kind == ColumnKind::Numeric).count(), 7);
        let d = base_diagram();
        let chart = d.node_by_label(MY_CHART).unwrap();
        assert!(!d.selection(chart.id).unwrap().is_empty());
        assert!(!d.can_undo());
    }

    #[test]
    fn renaming_applies_to_columns_and_labels() {
        let r = Renaming::new([("mpg", "efficiency"), (MY_CHART, "Overview"), ("node-1", "cars")]);
        let d = Fixture::Base.build_renamed(&r);
        let chart = d.node_by_label("Overview").unwrap();
        assert!(d.node_by_label("cars").is_some());
        assert!(!d.selection(chart.id).unwrap().is_empty());
        assert!(d.dataset("auto-mpg").unwrap().column_index("efficiency").is_some());
        assert_eq!(Fixture::Base.build().hash(), base_diagram().hash());
    }
}
