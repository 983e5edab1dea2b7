use nlflow_core::dataflow::{
    Diagram, EncodingSpec, FilterSpec, NodeId, NodeKind, Point, Port, Predicate, SetOp, VisType,
};
use nlflow_core::demo::{self, Fixture, Renaming};
use nlflow_core::suite::{read_suite, run_suite, BUNDLED_SUITE};
use nlflow_core::{Engine, ErrorCategory, QueryOptions, Session};

fn run(engine: &Engine, session: &mut Session, query: &str) -> Vec<NodeId> {
    engine
        .run(session, query, &QueryOptions::default())
        .unwrap_or_else(|e| panic!("{query}: {e}"))
        .execution
        .created
}

fn kind(d: &Diagram, id: NodeId) -> &NodeKind {
    &d.node(id).unwrap().kind
}

#[test]
fn parallel_coordinates_of_selection() {
    let engine = Engine::bundled();
    let mut s = Session::new(demo::base_diagram());
    let chart = s.diagram.node_by_label(demo::MY_CHART).unwrap().id;
    let edges = s.diagram.edge_count();
    let created = run(
        &engine,
        &mut s,
        "Visualize mpg, horsepower, and origin of the selected cars from MyChart in a parallel coordinates plot",
    );
    assert_eq!(created.len(), 1);
    assert_eq!(
        kind(&s.diagram, created[0]),
        &NodeKind::Visualization {
            vis: VisType::ParallelCoordinates,
            columns: vec!["mpg".into(), "horsepower".into(), "origin".into()],
        }
    );
    assert_eq!(s.diagram.edge_count(), edges + 1);
    let e = s.diagram.edges_into(created[0], Port::DataIn).next().unwrap();
    assert_eq!((e.from.node, e.from.port), (chart, Port::SelectionOut));
}

#[test]
fn function_categories_create_expected_nodes() {
    let engine = Engine::bundled();
    let cases = [
        ("Show a scatterplot of mpg and horsepower", 1),
        ("Encode mpg by red green color scale", 1),
        ("Find all cars with mpg between 15 and 20", 1),
        ("List five cars with maximum mpg", 1),
        ("Merge the cars with those from the scatterplot", 1),
        ("Highlight the selected cars in a parallel coordinates plot", 3),
        ("Link the cars with a same name from the sales table", 2),
    ];
    for (query, n) in cases {
        let mut s = Session::new(demo::base_diagram());
        let before = s.diagram.node_count();
        assert_eq!(run(&engine, &mut s, query).len(), n, "{query}");
        assert_eq!(s.diagram.node_count(), before + n, "{query}");
    }
}

#[test]
fn highlight_wiring() {
    let engine = Engine::bundled();
    let mut s = Session::new(demo::base_diagram());
    let chart = s.diagram.node_by_label(demo::MY_CHART).unwrap().id;
    let edges = s.diagram.edge_count();
    let created = run(&engine, &mut s, "Highlight the selected cars");
    assert_eq!(s.diagram.edge_count(), edges + 4);
    let [editor, union, view] = created[..] else {
        panic!("{created:?}")
    };
    assert_eq!(
        kind(&s.diagram, editor),
        &NodeKind::VisualEditor {
            spec: EncodingSpec::AssignConstant { color: "red".into() }
        }
    );
    assert_eq!(kind(&s.diagram, union), &NodeKind::SetOperator { op: SetOp::Union });
    assert!(kind(&s.diagram, view).is_visualization());
    let from = |to: NodeId| -> Vec<(NodeId, Port)> {
        let mut v: Vec<_> = s
            .diagram
            .edges_into(to, Port::DataIn)
            .map(|e| (e.from.node, e.from.port))
            .collect();
        v.sort();
        v
    };
    assert_eq!(from(editor), vec![(chart, Port::SelectionOut)]);
    let mut expected = vec![(chart, Port::DataOut), (editor, Port::DataOut)];
    expected.sort();
    assert_eq!(from(union), expected);
    assert_eq!(from(view), vec![(union, Port::DataOut)]);
}

#[test]
fn link_wiring() {
    let engine = Engine::bundled();
    let mut s = Session::new(demo::base_diagram());
    let sales = s.diagram.node_by_label("node-2").unwrap().id;
    let edges = s.diagram.edge_count();
    let created = run(&engine, &mut s, "Link the cars with a same name from the sales table");
    assert_eq!(s.diagram.edge_count(), edges + 3);
    let [extractor, filter] = created[..] else {
        panic!("{created:?}")
    };
    assert_eq!(
        kind(&s.diagram, extractor),
        &NodeKind::ConstantsExtractor { column: "name".into() }
    );
    let into_filter: Vec<_> = s
        .diagram
        .edges()
        .filter(|e| e.to.node == filter)
        .map(|e| (e.from.node, e.to.port))
        .collect();
    assert!(into_filter.contains(&(extractor, Port::ConstantsIn)));
    assert!(into_filter.contains(&(sales, Port::DataIn)));
}

#[test]
fn completion_defaults() {
    let engine = Engine::bundled();
    let mut s = Session::new(demo::single_table_diagram());
    let id = run(&engine, &mut s, "Show a scatterplot")[0];
    assert_eq!(
        kind(&s.diagram, id),
        &NodeKind::Visualization {
            vis: VisType::Scatterplot,
            columns: vec!["mpg".into(), "cylinders".into()],
        }
    );
    let id = run(&engine, &mut s, "Filter by mpg")[0];
    assert_eq!(
        kind(&s.diagram, id),
        &NodeKind::AttributeFilter {
            spec: FilterSpec {
                column: "mpg".into(),
                predicate: Predicate::NoOp
            }
        }
    );
    let mut s = Session::new(demo::single_table_diagram());
    let id = run(&engine, &mut s, "Show the data")[0];
    assert_eq!(kind(&s.diagram, id).vis_type(), Some(VisType::Scatterplot));
}

#[test]
fn clicked_node_is_merged() {
    let engine = Engine::bundled();
    let mut s = Session::new(demo::base_diagram());
    let sales = s.diagram.node_by_label("node-2").unwrap().id;
    run(&engine, &mut s, "Show the sales data");
    s.tracker.record_click(&s.diagram, Some(sales), None).unwrap();
    let created = run(&engine, &mut s, "Merge these two nodes");
    let inputs: Vec<NodeId> = s
        .diagram
        .edges_into(created[0], Port::DataIn)
        .map(|e| e.from.node)
        .collect();
    assert!(inputs.contains(&sales), "{inputs:?}");
}

#[test]
fn undo_and_redo_restore_hashes() {
    let engine = Engine::bundled();
    let mut s = Session::new(demo::base_diagram());
    let h0 = s.diagram.hash();
    run(&engine, &mut s, "Highlight the selected cars in red");
    let h1 = s.diagram.hash();
    assert_ne!(h0, h1);
    run(&engine, &mut s, "Undo");
    assert_eq!(s.diagram.hash(), h0);
    run(&engine, &mut s, "Redo");
    assert_eq!(s.diagram.hash(), h1);
    let err = engine.run(&mut s, "Redo", &QueryOptions::default()).unwrap_err();
    assert_eq!(err.category, ErrorCategory::ContextInvalid);
    assert_eq!(s.diagram.hash(), h1);
}

#[test]
fn layout_keeps_new_nodes_apart_and_pinned_nodes_fixed() {
    let engine = Engine::bundled();
    let mut s = Session::new(demo::base_diagram());
    let chart = s.diagram.node_by_label(demo::MY_CHART).unwrap().id;
    s.diagram.move_node(chart, Point::new(300.0, 150.0), true).unwrap();
    let pinned = s.diagram.node(chart).unwrap().position;
    run(
        &engine,
        &mut s,
        "Highlight the selected cars in a parallel coordinates plot",
    );
    run(&engine, &mut s, "Encode mpg by red green color scale");
    assert_eq!(s.diagram.node(chart).unwrap().position, pinned);
    let nodes: Vec<_> = s.diagram.nodes().cloned().collect();
    for (i, a) in nodes.iter().enumerate() {
        for b in &nodes[i + 1..] {
            assert!(!a.overlaps(b), "{} overlaps {}", a.label, b.label);
        }
    }
}

#[test]
fn bundled_suite_passes() {
    let engine = Engine::bundled();
    let cases = read_suite(BUNDLED_SUITE).unwrap();
    assert!(cases.len() >= 60);
    let failures: Vec<String> = run_suite(&engine, &cases, &Renaming::default())
        .into_iter()
        .filter(|o| !o.passed || !o.transactional || o.history_ok == Some(false))
        .map(|o| format!("line {}: {} => {}", o.case.line, o.case.query, o.actual))
        .collect();
    assert!(failures.is_empty(), "{failures:#?}");
}

#[test]
fn speed_fixture_loads_one_table() {
    let d = Fixture::Speed.build();
    assert_eq!(d.node_count(), 1);
    assert!(matches!(&d.nodes().next().unwrap().kind, NodeKind::DataSource { table } if table == "speed"));
}

#[test]
fn suite_survives_renaming() {
    let engine = Engine::bundled();
    let rules = engine.parser.grammar().rules.len();
    let r = demo::alternate_names();
    let cases: Vec<_> = read_suite(BUNDLED_SUITE)
        .unwrap()
        .into_iter()
        .map(|mut c| {
            c.query = nlflow_core::suite::rename_query(&engine, c.fixture, &c.query, &r);
            c
        })
        .collect();
    let failures: Vec<String> = run_suite(&engine, &cases, &r)
        .into_iter()
        .filter(|o| !o.passed)
        .map(|o| format!("line {}: {} => {}", o.case.line, o.case.query, o.actual))
        .collect();
    assert!(failures.is_empty(), "{failures:#?}");
    assert_eq!(engine.parser.grammar().rules.len(), rules);
}
