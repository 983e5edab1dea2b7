use std::time::{Duration, Instant};

use nlflow_core::demo;
use nlflow_core::parser::{read_examples, train, Parser, TrainConfig, Weights, BUNDLED_EXAMPLES, DEFAULT_BEAM};
use nlflow_core::tagger::{Lexicon, TagContext, TaggedQuery, TaggerConfig};

fn retrain() -> nlflow_core::parser::TrainReport {
    let examples = read_examples(BUNDLED_EXAMPLES).unwrap();
    assert!(examples.len() <= 20);
    let ctx = TagContext::from_diagram(&demo::base_diagram());
    train(
        &Parser::bundled(),
        &examples,
        &ctx,
        &TaggerConfig::default(),
        &Lexicon::default(),
        Weights::zero(),
        &TrainConfig::default(),
    )
    .unwrap()
}

fn top(query: &str, weights: &Weights) -> String {
    let ctx = TagContext::from_diagram(&demo::base_diagram());
    let tagged = TaggedQuery::analyze(query, &ctx, &TaggerConfig::default(), &Lexicon::default());
    Parser::bundled().parse(&tagged, weights, DEFAULT_BEAM).unwrap()[0].signature()
}

#[test]
fn bundled_weights_are_reproducible() {
    let start = Instant::now();
    let report = retrain();
    assert!(start.elapsed() < Duration::from_secs(10));
    assert_eq!(report.accuracy, 1.0);
    assert_eq!(report.weights, Weights::bundled());
    assert_eq!(report.weights.to_text(), retrain().weights.to_text());
}

#[test]
fn training_fixes_column_versus_rows_ambiguity() {
    let column = "visualize:columns=horsepower,target=new()";
    let rows = "visualize:target=new()";
    let zero = Weights::zero();
    let before = (
        top("Show a plot of horsepower", &zero),
        top("Show a plot of cars", &zero),
    );
    assert!(
        before.0 != column || before.1 != rows,
        "zero weights already rank both: {before:?}"
    );
    let trained = Weights::bundled();
    assert_eq!(top("Show a plot of horsepower", &trained), column);
    assert_eq!(top("Show a plot of cars", &trained), rows);
}
