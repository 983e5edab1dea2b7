use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::chart::{Derivation, Parser, DEFAULT_BEAM};
use super::frame::normalize_signature;
use super::weights::Weights;
use crate::error::{Error, Result};
use crate::tagger::{Lexicon, TagContext, TaggedQuery, TaggerConfig};

/// The examples the bundled weights were trained on.
pub const BUNDLED_EXAMPLES: &str = include_str!("../../resources/training.tsv");

/// A query paired with the signature of its intended parse.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub query: String,
    pub signature: String,
}

/// Reads `query<TAB>signature` lines; `#` starts a comment line.
pub fn read_examples(text: &str) -> Result<Vec<Example>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let (q, s) = line
            .split_once('\t')
            .ok_or_else(|| Error::MalformedData(format!("line {}: expected query<TAB>signature", n + 1)))?;
        out.push(Example {
            query: q.trim().to_string(),
            signature: normalize_signature(s),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub beam: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 50,
            learning_rate: 0.1,
            seed: 7,
            beam: DEFAULT_BEAM,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub weights: Weights,
    pub epochs_run: usize,
    pub updates: usize,
    /// Fraction of examples whose top parse has the preferred signature.
    pub accuracy: f64,
}

fn best_preferred<'a>(derivations: &'a [Derivation], signature: &str) -> Option<&'a Derivation> {
    derivations.iter().find(|d| d.signature() == signature)
}

/// Multiclass hinge training over the parser's derivations.
///
/// For each example the loss-augmented argmax `y*` (score plus 1 for a
/// wrong signature) is compared against the best derivation `y` with the
/// preferred signature; on a violation `w += lr * (f(y) - f(y*))`.
/// Stops early after an epoch without updates.
pub fn train(
    parser: &Parser,
    examples: &[Example],
    context: &TagContext,
    tagger: &TaggerConfig,
    lexicon: &Lexicon,
    initial: Weights,
    config: &TrainConfig,
) -> Result<TrainReport> {
    let tagged: Vec<TaggedQuery> = examples
        .iter()
        .map(|e| TaggedQuery::analyze(&e.query, context, tagger, lexicon))
        .collect();
    let mut weights = initial;
    for (ex, t) in examples.iter().zip(&tagged) {
        let parses = parser
            .parse(t, &weights, config.beam)
            .map_err(|_| Error::TrainingData {
                query: ex.query.clone(),
                reason: "query does not parse".into(),
            })?;
        if best_preferred(&parses, &ex.signature).is_none() {
            return Err(Error::TrainingData {
                query: ex.query.clone(),
                reason: format!("no derivation has signature {}", ex.signature),
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut updates = 0;
    let mut epochs_run = 0;
    for _ in 0..config.epochs {
        epochs_run += 1;
        order.shuffle(&mut rng);
        let mut changed = false;
        for &i in &order {
            let parses = parser.parse(&tagged[i], &weights, config.beam)?;
            let Some(gold) = best_preferred(&parses, &examples[i].signature) else {
                continue;
            };
            let augmented = parses
                .iter()
                .map(|d| {
                    let cost = if d.signature() == examples[i].signature {
                        0.0
                    } else {
                        1.0
                    };
                    (d, d.score + cost)
                })
                .fold(None::<(&Derivation, f64)>, |best, (d, s)| match best {
                    Some((_, bs)) if bs >= s => best,
                    _ => Some((d, s)),
                });
            let Some((predicted, aug)) = augmented else { continue };
            if predicted.signature() != examples[i].signature && aug >= gold.score {
                weights.update(&gold.features, &predicted.features, config.learning_rate);
                updates += 1;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let accuracy = accuracy_of(parser, examples, &tagged, &weights, config.beam);
    Ok(TrainReport {
        weights,
        epochs_run,
        updates,
        accuracy,
    })
}

fn accuracy_of(parser: &Parser, examples: &[Example], tagged: &[TaggedQuery], weights: &Weights, beam: usize) -> f64 {
    if examples.is_empty() {
        return 1.0;
    }
    let mut correct = 0;
    for (ex, t) in examples.iter().zip(tagged) {
        if parser
            .parse(t, weights, beam)
            .is_ok_and(|parses| parses[0].signature() == ex.signature)
        {
            correct += 1;
        }
    }
    correct as f64 / examples.len() as f64
}

/// Fraction of `examples` whose top parse under `weights` has the preferred
/// signature. Queries that fail to parse count as wrong.
pub fn accuracy(
    parser: &Parser,
    examples: &[Example],
    context: &TagContext,
    tagger: &TaggerConfig,
    lexicon: &Lexicon,
    weights: &Weights,
    beam: usize,
) -> f64 {
    let tagged: Vec<TaggedQuery> = examples
        .iter()
        .map(|e| TaggedQuery::analyze(&e.query, context, tagger, lexicon))
        .collect();
    accuracy_of(parser, examples, &tagged, weights, beam)
}
