use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dataflow::{Diagram, Node, NodeId, Point};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FocusParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Default for FocusParams {
    fn default() -> Self {
        FocusParams {
            alpha: 2.0,
            beta: 5.0,
            gamma: 500.0,
        }
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Click-driven activeness plus mouse proximity, per session.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct FocusTracker {
    activeness: BTreeMap<NodeId, f64>,
    mouse: Option<Point>,
    last_clicked: Option<NodeId>,
    pub params: FocusParams,
}

impl FocusTracker {
    pub fn new() -> FocusTracker {
        FocusTracker::default()
    }

    /// Registers a click on a node (`Some`) or on the background (`None`).
    /// A node click places the mouse at the node's center.
    pub fn record_click(&mut self, diagram: &Diagram, target: Option<NodeId>, position: Option<Point>) -> Result<()> {
        let node_center = match target {
            Some(id) => Some(
                diagram
                    .node(id)
                    .ok_or_else(|| Error::RangeError(format!("unknown node {id}")))?
                    .center(),
            ),
            None => None,
        };
        self.purge(diagram);
        for a in self.activeness.values_mut() {
            *a /= 2.0;
        }
        self.activeness.retain(|_, a| *a > 0.0);
        if let Some(id) = target {
            *self.activeness.entry(id).or_default() += 1.0;
        }
        self.last_clicked = target;
        if let Some(p) = node_center.or(position) {
            self.mouse = Some(p);
        }
        Ok(())
    }

    pub fn set_mouse(&mut self, position: Point) {
        self.mouse = Some(position);
    }

    pub fn mouse(&self) -> Option<Point> {
        self.mouse
    }

    pub fn activeness(&self, id: NodeId) -> f64 {
        self.activeness.get(&id).copied().unwrap_or(0.0)
    }

    /// Drops entries for nodes no longer in the diagram.
    pub fn purge(&mut self, diagram: &Diagram) {
        self.activeness.retain(|id, _| diagram.node(*id).is_some());
        if self.last_clicked.is_some_and(|id| diagram.node(id).is_none()) {
            self.last_clicked = None;
        }
    }

    /// Proximity term `alpha * (1 - sigmoid(d / gamma - beta))`; zero when
    /// no mouse position is known.
    pub fn proximity(&self, node: &Node) -> f64 {
        match self.mouse {
            Some(m) => {
                let d = m.distance(node.center());
                self.params.alpha * (1.0 - sigmoid(d / self.params.gamma - self.params.beta))
            }
            None => 0.0,
        }
    }

    pub fn focus_score(&self, node: &Node) -> f64 {
        self.activeness(node.id) + self.proximity(node)
    }

    /// Nodes passing `keep`, by decreasing focus score. Ties go to the
    /// node clicked last, then to the most recently created.
    pub fn rank(&self, diagram: &Diagram, keep: impl Fn(&Node) -> bool) -> Vec<NodeId> {
        let mut scored: Vec<(f64, bool, NodeId)> = diagram
            .nodes()
            .filter(|n| keep(n))
            .map(|n| (self.focus_score(n), self.last_clicked == Some(n.id), n.id))
            .collect();
        scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(b.1.cmp(&a.1)).then(b.2.cmp(&a.2)));
        scored.into_iter().map(|(_, _, id)| id).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataflow::{NodeKind, Table};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn diagram(n: usize) -> (Diagram, Vec<NodeId>) {
        let mut d = Diagram::new();
        d.add_dataset(Table::from_text("t", "a,b\n1,2\n", b',').unwrap())
            .unwrap();
        let ids = (0..n)
            .map(|i| {
                d.add_node(
                    NodeKind::DataSource { table: "t".into() },
                    None,
                    Some(Point::new(300.0 * i as f64, 0.0)),
                )
                .unwrap()
            })
            .collect();
        (d, ids)
    }

    #[test]
    fn activeness_halves_per_click() {
        let (d, ids) = diagram(2);
        let mut t = FocusTracker::new();
        t.record_click(&d, Some(ids[0]), None).unwrap();
        assert_eq!(t.activeness(ids[0]), 1.0);
        assert_eq!(t.activeness(ids[1]), 0.0);
        for n in 1..=20 {
            t.record_click(&d, None, Some(Point::new(5000.0, 5000.0))).unwrap();
            assert_abs_diff_eq!(t.activeness(ids[0]), 2f64.powi(-n), epsilon = 1e-12);
        }
        assert!(t.record_click(&d, Some(NodeId(99)), None).is_err());
    }

    #[test]
    fn score_formula() {
        let (d, ids) = diagram(1);
        let mut t = FocusTracker::new();
        t.record_click(&d, Some(ids[0]), None).unwrap();
        let node = d.node(ids[0]).unwrap();
        // independent evaluation: 1 + 2 * (1 - 1 / (1 + e^5))
        let expected = 1.0 + 2.0 * (1.0 - 1.0 / (1.0 + 5f64.exp()));
        assert_abs_diff_eq!(t.focus_score(node), expected, epsilon = 1e-9);
        assert_abs_diff_eq!(t.focus_score(node), 2.9866, epsilon = 1e-4);

        let mut far = FocusTracker::new();
        far.set_mouse(Point::new(node.center().x + 2500.0, node.center().y));
        assert_abs_diff_eq!(far.focus_score(node), 1.0, epsilon = 1e-12);
        far.set_mouse(Point::new(1e9, 0.0));
        assert!(far.focus_score(node) < 1e-9);
    }

    #[test]
    fn later_click_ranks_first() {
        let (d, ids) = diagram(3);
        let mut t = FocusTracker::new();
        t.record_click(&d, Some(ids[0]), None).unwrap();
        t.record_click(&d, Some(ids[1]), None).unwrap();
        assert_eq!(&t.rank(&d, |_| true)[..2], &[ids[1], ids[0]]);
        let mut bg = FocusTracker::new();
        let c = d.node(ids[2]).unwrap().center();
        bg.record_click(&d, None, Some(Point::new(c.x + 10.0, c.y))).unwrap();
        assert_eq!(bg.rank(&d, |_| true)[0], ids[2]);
        assert!(FocusTracker::new().rank(&Diagram::new(), |_| true).is_empty());
        // no clicks and no mouse: most recent creation first
        assert_eq!(FocusTracker::new().rank(&d, |_| true)[0], ids[2]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]
        #[test]
        fn clicked_node_ranks_first(
            positions in prop::collection::vec((0.0f64..4000.0, 0.0f64..4000.0), 2..8),
            clicks in prop::collection::vec((any::<bool>(), 0usize..8, 0.0f64..4000.0, 0.0f64..4000.0), 1..30),
            last in 0usize..8,
        ) {
            let mut d = Diagram::new();
            d.add_dataset(Table::from_text("t", "a\n1\n", b',').unwrap()).unwrap();
            let ids: Vec<NodeId> = positions
                .iter()
                .map(|&(x, y)| d.add_node(NodeKind::DataSource { table: "t".into() }, None, Some(Point::new(x, y))).unwrap())
                .collect();
            let mut t = FocusTracker::new();
            for (on_node, i, x, y) in clicks {
                let target = on_node.then(|| ids[i % ids.len()]);
                t.record_click(&d, target, Some(Point::new(x, y))).unwrap();
            }
            let total: f64 = ids.iter().map(|id| t.activeness(*id)).sum();
            prop_assert!(total <= 2.0);
            let x = ids[last % ids.len()];
            t.record_click(&d, Some(x), None).unwrap();
            prop_assert_eq!(t.rank(&d, |_| true)[0], x);
        }
    }
}
