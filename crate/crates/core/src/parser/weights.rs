use std::collections::BTreeMap;

use crate::error::{Error, Result};

const DEFAULT_WEIGHTS: &str = include_str!("../../resources/default.weights");

pub type Features = BTreeMap<String, f64>;

pub fn rule_feature(id: usize) -> String {
    format!("r{id}")
}

/// Ranker weight vector; absent features weigh 0.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Weights {
    w: BTreeMap<String, f64>,
}

impl Weights {
    pub fn zero() -> Weights {
        Weights::default()
    }

    /// Weights trained on the bundled examples for the bundled grammar.
    pub fn bundled() -> Weights {
        Weights::from_text(DEFAULT_WEIGHTS).expect("bundled weights are valid")
    }

    pub fn get(&self, feature: &str) -> f64 {
        self.w.get(feature).copied().unwrap_or(0.0)
    }

    pub fn set(&mut self, feature: impl Into<String>, value: f64) {
        let feature = feature.into();
        if value == 0.0 {
            self.w.remove(&feature);
        } else {
            self.w.insert(feature, value);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &f64)> {
        self.w.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn dot(&self, features: &Features) -> f64 {
        features.iter().map(|(f, c)| self.get(f) * c).sum()
    }

    /// `w += scale * (a - b)`.
    pub fn update(&mut self, a: &Features, b: &Features, scale: f64) {
        let mut delta: BTreeMap<&String, f64> = BTreeMap::new();
        for (f, c) in a {
            *delta.entry(f).or_default() += c;
        }
        for (f, c) in b {
            *delta.entry(f).or_default() -= c;
        }
        for (f, d) in delta {
            if d != 0.0 {
                let v = self.get(f) + scale * d;
                self.set(f.clone(), v);
            }
        }
    }

    pub fn from_text(text: &str) -> Result<Weights> {
        let mut w = Weights::zero();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (f, v) = line
                .split_once('\t')
                .ok_or_else(|| Error::MalformedData(format!("weights line {}: expected feature<TAB>weight", n + 1)))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::MalformedData(format!("weights line {}: bad weight {v:?}", n + 1)))?;
            if !v.is_finite() {
                return Err(Error::MalformedData(format!(
                    "weights line {}: weight must be finite",
                    n + 1
                )));
            }
            w.set(f.trim(), v);
        }
        Ok(w)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("# feature\tweight\n");
        for (f, v) in &self.w {
            out.push_str(&format!("{f}\t{v}\n"));
        }
        out
    }
}
