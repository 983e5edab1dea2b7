use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataflow::{Diagram, NodeId, Point};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayoutConfig {
    /// Preferred gap between connected boxes, in pixels.
    pub edge_length: f64,
    pub max_iter: usize,
    /// Stop once no node moves further than this in one iteration.
    pub epsilon: f64,
    pub seed: u64,
    pub hops: usize,
    pub repulsion: f64,
    pub spring: f64,
    /// Minimum clearance between boxes after overlap removal.
    pub margin: f64,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        LayoutConfig {
            edge_length: 150.0,
            max_iter: 300,
            epsilon: 0.5,
            seed: 17,
            hops: 2,
            repulsion: 400.0,
            spring: 0.06,
            margin: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Body {
    x: f64,
    y: f64,
    w: f64,
    h: f64,
    r: f64,
    movable: bool,
}

impl Body {
    fn overlap(&self, o: &Body, margin: f64) -> Option<(f64, f64)> {
        let ox = (self.w + o.w) / 2.0 + margin - (self.x - o.x).abs();
        let oy = (self.h + o.h) / 2.0 + margin - (self.y - o.y).abs();
        (ox > 0.0 && oy > 0.0).then_some((ox, oy))
    }
}

/// Local force-directed adjustment. Only unpinned nodes within `hops` of
/// `seeds` move; everything else acts as a fixed obstacle. Returns the
/// number of nodes moved.
pub fn layout_adjust(diagram: &mut Diagram, seeds: &[NodeId], created: &[NodeId], cfg: &LayoutConfig) -> Result<usize> {
    let vicinity = diagram.neighbourhood(seeds, cfg.hops);
    let ids: Vec<NodeId> = diagram.nodes().map(|n| n.id).collect();
    let mut bodies: Vec<Body> = diagram
        .nodes()
        .map(|n| {
            let c = n.center();
            Body {
                x: c.x,
                y: c.y,
                w: n.size.w,
                h: n.size.h,
                r: n.radius(),
                movable: !n.pinned && (vicinity.contains(&n.id) || created.contains(&n.id)),
            }
        })
        .collect();
    if !bodies.iter().any(|b| b.movable) {
        return Ok(0);
    }
    let index: BTreeMap<NodeId, usize> = ids.iter().enumerate().map(|(i, id)| (*id, i)).collect();
    let springs: Vec<(usize, usize)> = diagram
        .edges()
        .map(|e| (index[&e.from.node], index[&e.to.node]))
        .filter(|(a, b)| a != b)
        .collect();
    let start: Vec<(f64, f64)> = bodies.iter().map(|b| (b.x, b.y)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = bodies.len();

    for iter in 0..cfg.max_iter {
        let mut force = vec![(0.0f64, 0.0f64); n];
        for i in 0..n {
            if !bodies[i].movable {
                continue;
            }
            for j in 0..n {
                if i == j {
                    continue;
                }
                let (mut dx, mut dy) = (bodies[i].x - bodies[j].x, bodies[i].y - bodies[j].y);
                if dx.abs() < 1e-6 && dy.abs() < 1e-6 {
                    dx = rng.random_range(-1.0..1.0);
                    dy = rng.random_range(-1.0..1.0);
                }
                let d2 = (dx * dx + dy * dy).max(1.0);
                let d = d2.sqrt();
                let f = cfg.repulsion * bodies[i].r * bodies[j].r / d2;
                force[i].0 += f * dx / d;
                force[i].1 += f * dy / d;
            }
        }
        for &(a, b) in &springs {
            let (dx, dy) = (bodies[b].x - bodies[a].x, bodies[b].y - bodies[a].y);
            let d = (dx * dx + dy * dy).sqrt().max(1e-6);
            let rest = cfg.edge_length + bodies[a].r + bodies[b].r;
            let f = cfg.spring * (d - rest);
            let (fx, fy) = (f * dx / d, f * dy / d);
            force[a].0 += fx;
            force[a].1 += fy;
            force[b].0 -= fx;
            force[b].1 -= fy;
        }
        // step size cools from 40 px
        let cap = 40.0 * (1.0 - iter as f64 / cfg.max_iter as f64) + 1.0;
        let mut max_move: f64 = 0.0;
        for i in 0..n {
            if !bodies[i].movable {
                continue;
            }
            let (fx, fy) = force[i];
            let len = (fx * fx + fy * fy).sqrt();
            let scale = if len > cap { cap / len } else { 1.0 };
            bodies[i].x += fx * scale;
            bodies[i].y += fy * scale;
            max_move = max_move.max(len * scale);
        }
        if max_move < cfg.epsilon {
            break;
        }
    }

    remove_overlaps(&mut bodies, cfg.margin);

    let mut moved = 0;
    for (i, id) in ids.iter().enumerate() {
        let b = &bodies[i];
        if !b.movable || (b.x, b.y) == start[i] {
            continue;
        }
        let node = diagram.node(*id).expect("node exists");
        let pos = Point::new(b.x - node.size.w / 2.0, b.y - node.size.h / 2.0);
        diagram.move_node(*id, pos, false)?;
        moved += 1;
    }
    Ok(moved)
}

/// Pushes movable boxes apart along the axis of least overlap until no
/// pair involving a movable box overlaps.
fn remove_overlaps(bodies: &mut [Body], margin: f64) {
    let n = bodies.len();
    for _ in 0..500 {
        let mut any = false;
        for i in 0..n {
            for j in i + 1..n {
                let (a, b) = (bodies[i], bodies[j]);
                if !a.movable && !b.movable {
                    continue;
                }
                let Some((ox, oy)) = a.overlap(&b, margin) else {
                    continue;
                };
                any = true;
                let share = if a.movable && b.movable { 0.5 } else { 1.0 };
                let (mx, my) = if ox <= oy {
                    let sign = if a.x >= b.x { 1.0 } else { -1.0 };
                    (sign * (ox + 0.01), 0.0)
                } else {
                    let sign = if a.y >= b.y { 1.0 } else { -1.0 };
                    (0.0, sign * (oy + 0.01))
                };
                if a.movable {
                    bodies[i].x += mx * share;
                    bodies[i].y += my * share;
                }
                if b.movable {
                    bodies[j].x -= mx * share;
                    bodies[j].y -= my * share;
                }
            }
        }
        if !any {
            break;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataflow::{Endpoint, NodeKind, Port, Table, VisType};

    fn setup() -> (Diagram, NodeId, NodeId) {
        let mut d = Diagram::new();
        d.add_dataset(Table::from_text("t", "a,b\n1,2\n3,4\n", b',').unwrap())
            .unwrap();
        let src = d
            .add_node(
                NodeKind::DataSource { table: "t".into() },
                None,
                Some(Point::new(100.0, 100.0)),
            )
            .unwrap();
        let vis = d
            .add_node(
                NodeKind::Visualization {
                    vis: VisType::Scatterplot,
                    columns: vec!["a".into(), "b".into()],
                },
                None,
                Some(Point::new(120.0, 110.0)),
            )
            .unwrap();
        d.add_edge(Endpoint::new(src, Port::DataOut), Endpoint::new(vis, Port::DataIn))
            .unwrap();
        (d, src, vis)
    }

    #[test]
    fn separates_overlapping_boxes() {
        let (mut d, src, vis) = setup();
        assert!(d.node(src).unwrap().overlaps(d.node(vis).unwrap()));
        layout_adjust(&mut d, &[vis], &[vis], &LayoutConfig::default()).unwrap();
        let nodes: Vec<_> = d.nodes().cloned().collect();
        for i in 0..nodes.len() {
            for j in i + 1..nodes.len() {
                assert!(
                    !nodes[i].overlaps(&nodes[j]),
                    "{:?} overlaps {:?}",
                    nodes[i].id,
                    nodes[j].id
                );
            }
        }
    }

    #[test]
    fn pinned_nodes_stay_put() {
        let (mut d, src, vis) = setup();
        d.move_node(src, Point::new(100.0, 100.0), true).unwrap();
        let before = d.node(src).unwrap().position;
        layout_adjust(&mut d, &[vis], &[vis], &LayoutConfig::default()).unwrap();
        let after = d.node(src).unwrap().position;
        assert_eq!(before.x.to_bits(), after.x.to_bits());
        assert_eq!(before.y.to_bits(), after.y.to_bits());
        assert!(!d.node(vis).unwrap().overlaps(d.node(src).unwrap()));
    }

    #[test]
    fn lone_node_does_not_move() {
        let mut d = Diagram::new();
        d.add_dataset(Table::from_text("t", "a\n1\n", b',').unwrap()).unwrap();
        let id = d
            .add_node(
                NodeKind::DataSource { table: "t".into() },
                None,
                Some(Point::new(5.0, 7.0)),
            )
            .unwrap();
        assert_eq!(
            layout_adjust(&mut d, &[id], &[id], &LayoutConfig::default()).unwrap(),
            0
        );
        assert_eq!(d.node(id).unwrap().position, Point::new(5.0, 7.0));
    }

    #[test]
    fn deterministic() {
        let (mut a, _, vis) = setup();
        let (mut b, _, _) = setup();
        layout_adjust(&mut a, &[vis], &[vis], &LayoutConfig::default()).unwrap();
        layout_adjust(&mut b, &[vis], &[vis], &LayoutConfig::default()).unwrap();
        assert_eq!(a.hash(), b.hash());
    }
}
