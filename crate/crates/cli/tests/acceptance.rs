//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the test fails if any criterion does.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use nlflow_core::autocomplete::fill_values;
use nlflow_core::dataflow::{Diagram, NodeId, NodeKind, Point, Port, Predicate, Table, VisType};
use nlflow_core::demo::{self, Fixture};
use nlflow_core::grammar::Grammar;
use nlflow_core::parser::{read_examples, Weights, BUNDLED_EXAMPLES};
use nlflow_core::suite::{read_suite, rename_query, run_suite, Expect, BUNDLED_SUITE};
use nlflow_core::tagger::{Category, TagContext};
use nlflow_core::{Engine, ErrorCategory, QueryOptions, Session};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).to_path_buf()
}

fn data_dir() -> PathBuf {
    root().join("../core/resources/data")
}

fn nlflow(args: &[&str]) -> std::process::Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_nlflow"));
    for var in ["NLFLOW_GRAMMAR", "NLFLOW_WEIGHTS", "NLFLOW_TEMPLATES"] {
        c.env_remove(var);
    }
    c.args(args).output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn run(engine: &Engine, s: &mut Session, query: &str) -> Vec<NodeId> {
    engine
        .run(s, query, &QueryOptions::default())
        .unwrap_or_else(|e| panic!("{query}: {e}"))
        .execution
        .created
}

fn within(limit: Duration, start: Instant, what: &str) {
    let took = start.elapsed();
    assert!(took < limit, "{what} took {took:?}, limit {limit:?}");
}

fn selection_to_parallel_coordinates() {
    let engine = Engine::bundled();
    let mut s = Session::new(demo::base_diagram());
    assert_eq!(s.diagram.dataset("auto-mpg").unwrap().columns.len(), 9);
    let chart = s.diagram.node_by_label("MyChart").unwrap().id;
    assert!(!s.diagram.selection(chart).unwrap().is_empty());
    let (nodes, edges) = (s.diagram.node_count(), s.diagram.edge_count());
    let start = Instant::now();
    let created = run(
        &engine,
        &mut s,
        "Visualize mpg, horsepower, and origin of the selected cars from MyChart in a parallel coordinates plot",
    );
    within(Duration::from_secs(1), start, "query");
    assert_eq!(created.len(), 1);
    assert_eq!(s.diagram.node_count(), nodes + 1);
    assert_eq!(s.diagram.edge_count(), edges + 1);
    assert_eq!(
        s.diagram.node(created[0]).unwrap().kind,
        NodeKind::Visualization {
            vis: VisType::ParallelCoordinates,
            columns: vec!["mpg".into(), "horsepower".into(), "origin".into()],
        }
    );
    let into: Vec<_> = s.diagram.edges().filter(|e| e.to.node == created[0]).collect();
    assert_eq!(into.len(), 1);
    assert_eq!((into[0].from.node, into[0].from.port), (chart, Port::SelectionOut));
}

fn function_category_deltas() {
    let engine = Engine::bundled();
    let rows = [
        ("Show a scatterplot of mpg and horsepower", 1),
        ("Encode mpg by red green color scale", 1),
        ("Find all cars with mpg between 15 and 20", 1),
        ("List five cars with maximum mpg", 1),
        ("Merge the cars with those from the scatterplot", 1),
        ("Highlight the selected cars in a parallel coordinates plot", 3),
        ("Link the cars with a same name from the sales table", 2),
    ];
    for (query, delta) in rows {
        let mut s = Session::new(demo::base_diagram());
        let before = s.diagram.node_count();
        let created = run(&engine, &mut s, query);
        assert_eq!(created.len(), delta, "{query}");
        assert_eq!(s.diagram.node_count(), before + delta, "{query}");
    }
}

fn regression_suite() {
    let cases = read_suite(BUNDLED_SUITE).unwrap();
    assert!(cases.len() >= 60, "only {} cases", cases.len());
    let signatures: Vec<&str> = cases
        .iter()
        .filter_map(|c| match &c.expect {
            Expect::Signature(s) => Some(s.as_str()),
            Expect::Error(_) => None,
        })
        .collect();
    for function in ["visualize", "encode", "filter", "merge", "highlight", "link"] {
        assert!(
            signatures
                .iter()
                .any(|s| s.split(" ; ").any(|f| f.starts_with(function))),
            "no {function} case"
        );
    }
    assert!(signatures.iter().any(|s| s.contains(" ; ")), "no multi-function case");
    for q in ["What time is it now", "Split the data into two halves"] {
        assert!(
            cases
                .iter()
                .any(|c| c.query == q && c.expect == Expect::Error(ErrorCategory::ParseRejected)),
            "missing rejection case {q:?}"
        );
    }
    let suite = root().join("../core/resources/suite.tsv");
    let out = nlflow(&["test", path(&suite)]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{stdout}");
    assert!(
        stdout.contains(&format!("{} passed, 0 failed", cases.len())),
        "{stdout}"
    );
}

/// Independent edit distance for the typo checks.
fn oracle_ratio(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.to_lowercase().chars().collect();
    let b: Vec<char> = b.to_lowercase().chars().collect();
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in d[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = d[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
            d[i][j] = sub.min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
        }
    }
    let len = a.len().max(b.len());
    if len == 0 {
        0.0
    } else {
        d[a.len()][b.len()] as f64 / len as f64
    }
}

fn typo_tolerance() {
    let engine = Engine::bundled();
    let diagram = demo::base_diagram();
    assert_eq!(oracle_ratio("horsepwer", "horsepower"), 0.1);
    let tagged = engine.tag(&diagram, "horsepwer");
    assert_eq!(tagged.tag_spans.len(), 1);
    let span = &tagged.tag_spans[0];
    assert_eq!((span.category, span.value.as_str()), (Category::Column, "horsepower"));
    assert_eq!(span.ratio, oracle_ratio("horsepwer", "horsepower"));

    let context = TagContext::from_diagram(&diagram);
    let surfaces: Vec<&str> = context.entries.iter().map(|u| u.surface.as_str()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut checked = 0;
    while checked < 1000 {
        let len = rng.random_range(6..=12);
        let word: String = (0..len).map(|_| rng.random_range(b'a'..=b'z') as char).collect();
        if surfaces.iter().any(|s| oracle_ratio(&word, s) <= 0.2) {
            continue;
        }
        let tagged = engine.tag(&diagram, &word);
        assert!(tagged.tag_spans.is_empty(), "{word} tagged as {:?}", tagged.tag_spans);
        checked += 1;
    }
}

fn top_signature(engine: &Engine, diagram: &Diagram, query: &str) -> String {
    engine.parse(&engine.tag(diagram, query)).unwrap()[0].signature()
}

fn ranker_training() {
    let examples = read_examples(BUNDLED_EXAMPLES).unwrap();
    assert!(examples.len() <= 20);
    let expected = [
        ("Show a plot of horsepower", "visualize:columns=horsepower,target=new()"),
        ("Show a plot of cars", "visualize:target=new()"),
    ];
    let diagram = demo::base_diagram();
    let zero = Engine::bundled().with_weights(Weights::zero());
    let misranked = expected
        .iter()
        .filter(|(q, sig)| top_signature(&zero, &diagram, q) != *sig)
        .count();
    assert!(misranked >= 1, "zero weights already rank both correctly");

    let dir = tempfile::tempdir().unwrap();
    let weights = dir.path().join("weights.txt");
    let start = Instant::now();
    let out = nlflow(&[
        "train",
        path(&root().join("../core/resources/training.tsv")),
        "--out",
        path(&weights),
    ]);
    within(Duration::from_secs(10), start, "training");
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let trained = Weights::from_text(&std::fs::read_to_string(&weights).unwrap()).unwrap();
    let engine = Engine::bundled().with_weights(trained);
    for (q, sig) in expected {
        assert_eq!(top_signature(&engine, &diagram, q), sig, "{q}");
    }
}

fn layout_diagram(positions: &[(f64, f64)]) -> (Diagram, Vec<NodeId>) {
    let mut d = Diagram::new();
    d.add_dataset(Table::from_text("t", "a,b\n1,2\n", b',').unwrap())
        .unwrap();
    let ids = positions
        .iter()
        .map(|&(x, y)| {
            d.add_node(NodeKind::DataSource { table: "t".into() }, None, Some(Point::new(x, y)))
                .unwrap()
        })
        .collect();
    (d, ids)
}

fn focus_heuristics() {
    let (d, ids) = layout_diagram(&[(0.0, 0.0), (900.0, 0.0)]);
    for n in 0..=30 {
        let mut s = Session::new(d.clone());
        s.tracker.record_click(&s.diagram, Some(ids[0]), None).unwrap();
        for i in 0..n {
            let elsewhere = if i % 2 == 0 { Some(ids[1]) } else { None };
            s.tracker.record_click(&s.diagram, elsewhere, None).unwrap();
        }
        let expected = 2f64.powi(-n);
        assert!((s.tracker.activeness(ids[0]) - expected).abs() <= 1e-12, "n = {n}");
    }

    let mut s = Session::new(d.clone());
    s.tracker.record_click(&s.diagram, Some(ids[0]), None).unwrap();
    let sigma = |x: f64| 1.0 / (1.0 + (-x).exp());
    let expected = 1.0 + 2.0 * (1.0 - sigma(-5.0));
    let score = s.tracker.focus_score(s.diagram.node(ids[0]).unwrap());
    assert!((score - expected).abs() <= 1e-9, "{score} vs {expected}");

    let clicks = prop::collection::vec(prop::option::weighted(0.8, 0usize..8), 0..20);
    let layout = prop::collection::vec((-2000.0f64..2000.0, -2000.0f64..2000.0), 2..8);
    let mut runner = TestRunner::new(Config {
        cases: 500,
        failure_persistence: None,
        ..Config::default()
    });
    runner
        .run(&(layout, clicks, 0usize..8), |(layout, clicks, last)| {
            let (d, ids) = layout_diagram(&layout);
            let mut s = Session::new(d);
            for c in clicks {
                let target = c.map(|i| ids[i % ids.len()]);
                s.tracker
                    .record_click(&s.diagram, target, Some(Point::new(0.0, 0.0)))
                    .unwrap();
            }
            let clicked = ids[last % ids.len()];
            s.tracker.record_click(&s.diagram, Some(clicked), None).unwrap();
            prop_assert_eq!(s.tracker.rank(&s.diagram, |_| true)[0], clicked);
            Ok(())
        })
        .unwrap();
}

fn completion_defaults() {
    let engine = Engine::bundled();
    let diagram = demo::single_table_diagram();
    let table = diagram.dataset("auto-mpg").unwrap();
    let numeric: Vec<String> = table
        .columns
        .iter()
        .enumerate()
        .filter(|(c, _)| table.rows.iter().all(|r| r[*c].trim().parse::<f64>().is_ok()))
        .map(|(_, col)| col.name.clone())
        .take(2)
        .collect();

    let mut s = Session::new(diagram.clone());
    let id = run(&engine, &mut s, "Show a scatterplot")[0];
    assert_eq!(
        s.diagram.node(id).unwrap().kind,
        NodeKind::Visualization {
            vis: VisType::Scatterplot,
            columns: numeric,
        }
    );
    let id = run(&engine, &mut s, "Filter by mpg")[0];
    match &s.diagram.node(id).unwrap().kind {
        NodeKind::AttributeFilter { spec } => {
            assert_eq!(spec.column, "mpg");
            assert_eq!(spec.predicate, Predicate::NoOp);
        }
        other => panic!("{other:?}"),
    }
    let mut s = Session::new(diagram);
    let id = run(&engine, &mut s, "Show the data")[0];
    assert_eq!(s.diagram.node(id).unwrap().kind.vis_type(), Some(VisType::Scatterplot));
}

fn grammar_independence() {
    let renaming = demo::alternate_names();
    let mut originals: Vec<String> = demo::catalog()
        .iter()
        .flat_map(|t| t.columns.iter().map(|c| c.name.clone()))
        .collect();
    for f in Fixture::ALL {
        originals.extend(f.build().nodes().map(|n| n.label.clone()));
    }
    for name in &originals {
        assert_ne!(&renaming.name(name), name, "{name} is not renamed");
    }
    for f in Fixture::ALL {
        let d = f.build_renamed(&renaming);
        let labels: Vec<&str> = d.nodes().map(|n| n.label.as_str()).collect();
        let columns: Vec<&str> = d
            .datasets()
            .flat_map(|t| t.columns.iter().map(|c| c.name.as_str()))
            .collect();
        assert!(
            labels.iter().chain(&columns).all(|x| !originals.iter().any(|o| o == x)),
            "{labels:?} {columns:?}"
        );
    }

    let engine = Engine::bundled();
    let grammar_before = engine.parser.grammar().to_text();
    let mut cases = read_suite(BUNDLED_SUITE).unwrap();
    let mut changed = 0;
    for c in &mut cases {
        let renamed = rename_query(&engine, c.fixture, &c.query, &renaming);
        changed += usize::from(renamed != c.query);
        c.query = renamed;
    }
    assert!(changed >= 30, "only {changed} queries mention a column or label");
    let failures: Vec<String> = run_suite(&engine, &cases, &renaming)
        .iter()
        .filter(|o| !o.passed)
        .map(|o| format!("{} => {}", o.case.query, o.actual))
        .collect();
    assert!(failures.is_empty(), "{failures:#?}");
    assert_eq!(engine.parser.grammar().to_text(), grammar_before);
    assert_eq!(grammar_before, Grammar::bundled().to_text());

    let out = nlflow(&["test", "--rename", path(&root().join("../core/resources/suite.tsv"))]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}

fn transactions_and_undo() {
    let engine = Engine::bundled();
    let cases = read_suite(BUNDLED_SUITE).unwrap();
    let outcomes = run_suite(&engine, &cases, &demo::Renaming::default());
    let errors = outcomes.iter().filter(|o| o.actual.starts_with('!')).count();
    let mutating = outcomes.iter().filter(|o| o.history_ok.is_some()).count();
    assert!(
        errors >= 10 && mutating >= 40,
        "{errors} error cases, {mutating} mutating cases"
    );
    for o in &outcomes {
        assert!(o.transactional, "{} changed the diagram on failure", o.case.query);
        assert_ne!(o.history_ok, Some(false), "{}: undo/redo mismatch", o.case.query);
    }
}

fn autocomplete_soundness() {
    let engine = Engine::bundled();
    let diagram = demo::base_diagram();
    let origin = diagram.dataset("auto-mpg").unwrap().rows[0][8].clone();
    let queries: Vec<String> = read_suite(BUNDLED_SUITE)
        .unwrap()
        .into_iter()
        .filter(|c| c.fixture == Fixture::Base && matches!(c.expect, Expect::Signature(_)))
        .map(|c| c.query)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut partials = vec![String::new()];
    while partials.len() < 50 {
        let q = &queries[rng.random_range(0..queries.len())];
        let chars: Vec<char> = q.chars().collect();
        let cut = rng.random_range(1..=chars.len());
        partials.push(chars[..cut].iter().collect());
    }
    let mut total = 0;
    let mut answered = 0;
    for partial in &partials {
        let suggestions = engine.suggest(&diagram, partial, 10);
        answered += usize::from(!suggestions.is_empty());
        for s in suggestions {
            let filled = fill_values(&s.text, "10", &origin);
            assert!(
                engine.accepts(&diagram, &filled),
                "{partial:?} -> {:?} ({filled:?})",
                s.text
            );
            total += 1;
        }
    }
    assert!(
        answered >= 40 && total >= 100,
        "{answered} partials answered, {total} suggestions"
    );

    let candidates = engine.complete_token(&diagram, "scatter");
    assert_eq!(candidates[0].utterance, "scatterplot");
    assert_eq!(candidates[0].category, Category::NodeType);
}

fn speed_case_study() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("speed.json");
    let script = root().join("scripts/speed-study.txt");
    let start = Instant::now();
    let o = nlflow(&["run", path(&script), "--data", path(&data_dir()), "--out", path(&out)]);
    within(Duration::from_secs(2), start, "script");
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let d = Diagram::load(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(d.node_count(), 4);
    let find = |pred: &dyn Fn(&NodeKind) -> bool| -> Vec<NodeId> {
        d.nodes().filter(|n| pred(&n.kind)).map(|n| n.id).collect()
    };
    let sources = find(&|k| matches!(k, NodeKind::DataSource { table } if table == "speed"));
    let editors = find(&|k| matches!(k, NodeKind::VisualEditor { .. }));
    let histograms = find(&|k| k.vis_type() == Some(VisType::Histogram));
    let lines = find(&|k| k.vis_type() == Some(VisType::LineChart));
    assert_eq!(
        (sources.len(), editors.len(), histograms.len(), lines.len()),
        (1, 1, 1, 1)
    );
    let (source, editor) = (sources[0], editors[0]);
    let input = |id: NodeId| -> Vec<NodeId> { d.edges_into(id, Port::DataIn).map(|e| e.from.node).collect() };
    assert_eq!(input(editor), [source]);
    let hist_in = input(histograms[0]);
    assert!(hist_in == [source] || hist_in == [editor], "{hist_in:?}");
    assert_eq!(input(lines[0]), [editor]);
    match &d.node(lines[0]).unwrap().kind {
        NodeKind::Visualization { columns, .. } => assert_eq!(columns[..2], ["time", "speed"]),
        other => panic!("{other:?}"),
    }
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn()); 11] = [
        (
            "parallel coordinates from a chart selection",
            selection_to_parallel_coordinates,
        ),
        ("function category node deltas", function_category_deltas),
        ("bundled regression suite", regression_suite),
        ("typo tolerance", typo_tolerance),
        ("disambiguation training", ranker_training),
        ("focus heuristics", focus_heuristics),
        ("completion defaults", completion_defaults),
        ("grammar independence under renaming", grammar_independence),
        ("transactionality and undo", transactions_and_undo),
        ("autocomplete soundness", autocomplete_soundness),
        ("speed case-study script", speed_case_study),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let n = i + 1;
        match catch_unwind(AssertUnwindSafe(check)) {
            Ok(()) => println!("criterion {n:>2} PASS  {name}"),
            Err(e) => {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                println!("criterion {n:>2} FAIL  {name}: {msg}");
                failed.push(n);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
