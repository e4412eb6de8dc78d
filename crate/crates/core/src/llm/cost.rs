use std::collections::BTreeMap;
use std::fmt;
use std::ops::Add;

use serde::{Deserialize, Serialize, Serializer};

/// Rates per 1000 tokens.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelPrice {
    pub input_per_1k: f64,
    pub output_per_1k: f64,
}

/// Per-model token prices. Ships empty; rates come from configuration.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PriceTable {
    #[serde(default = "default_currency")]
    pub currency: String,
    #[serde(default)]
    pub models: BTreeMap<String, ModelPrice>,
}

fn default_currency() -> String {
    "USD".into()
}

impl PriceTable {
    pub fn new(currency: impl Into<String>) -> Self {
        PriceTable {
            currency: currency.into(),
            models: BTreeMap::new(),
        }
    }

    pub fn with(mut self, model: impl Into<String>, input_per_1k: f64, output_per_1k: f64) -> Self {
        self.models.insert(
            model.into(),
            ModelPrice {
                input_per_1k,
                output_per_1k,
            },
        );
        self
    }
}

/// A monetary amount, or "unavailable" when the model has no price entry.
/// Never silently zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cost {
    Known(f64),
    Unavailable,
}

impl Cost {
    pub fn amount(self) -> Option<f64> {
        match self {
            Cost::Known(x) => Some(x),
            Cost::Unavailable => None,
        }
    }
}

impl Add for Cost {
    type Output = Cost;

    fn add(self, rhs: Cost) -> Cost {
        match (self, rhs) {
            (Cost::Known(a), Cost::Known(b)) => Cost::Known(a + b),
            _ => Cost::Unavailable,
        }
    }
}

impl std::iter::Sum for Cost {
    fn sum<I: Iterator<Item = Cost>>(iter: I) -> Cost {
        iter.fold(Cost::Known(0.0), Add::add)
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cost::Known(x) => write!(f, "{x:.6}"),
            Cost::Unavailable => f.write_str("unavailable"),
        }
    }
}

impl Serialize for Cost {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Cost::Known(x) => s.serialize_f64(*x),
            Cost::Unavailable => s.serialize_str("unavailable"),
        }
    }
}

pub fn estimate_cost(prompt_tokens: u64, completion_tokens: u64, model: &str, prices: &PriceTable) -> Cost {
    match prices.models.get(model) {
        Some(p) => Cost::Known(
            prompt_tokens as f64 / 1000.0 * p.input_per_1k
                + completion_tokens as f64 / 1000.0 * p.output_per_1k,
        ),
        None => Cost::Unavailable,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic() {
        let prices = PriceTable::new("USD").with("m", 0.5, 1.5);
        assert_eq!(estimate_cost(0, 0, "m", &prices), Cost::Known(0.0));
        assert_eq!(estimate_cost(1000, 1000, "m", &prices), Cost::Known(2.0));
        assert_eq!(estimate_cost(10, 10, "other", &prices), Cost::Unavailable);
    }

    #[test]
    fn unavailable_is_sticky() {
        let total: Cost = [Cost::Known(1.0), Cost::Unavailable].into_iter().sum();
        assert_eq!(total, Cost::Unavailable);
        assert_eq!(Cost::Unavailable.to_string(), "unavailable");
        assert_eq!(Cost::Known(0.0012346).to_string(), "0.001235");
    }
}
