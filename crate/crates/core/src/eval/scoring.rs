use std::collections::BTreeSet;
use std::fmt;

use serde::{Serialize, Serializer};

use super::corpus::EvalCase;
use crate::pipeline::{PipelineError, QueryResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Correct,
    Incorrect,
    /// The pipeline failed. Counts as incorrect.
    Error,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Correct => "correct",
            Verdict::Incorrect => "incorrect",
            Verdict::Error => "error",
        }
    }
}

/// Exact set equality on issue keys.
pub fn score_keys<'a>(case: &EvalCase, returned: impl IntoIterator<Item = &'a str>) -> Verdict {
    let got: BTreeSet<&str> = returned.into_iter().collect();
    if got == case.expected_set() {
        Verdict::Correct
    } else {
        Verdict::Incorrect
    }
}

pub fn score_case(case: &EvalCase, result: Result<&QueryResult, &PipelineError>) -> Verdict {
    match result {
        Ok(r) => score_keys(case, r.issues.iter().map(|i| i.key.as_str())),
        Err(_) => Verdict::Error,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DecimalSeparator {
    #[default]
    Dot,
    Comma,
}

/// A percentage held in hundredths of a percent, rounded half up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Percent(u32);

impl Percent {
    pub fn from_ratio(num: u64, den: u64) -> Percent {
        if den == 0 {
            return Percent(0);
        }
        // 10000 * num / den, half up, in integers
        Percent(((20_000 * num + den) / (2 * den)) as u32)
    }

    pub fn basis_points(self) -> u32 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 100.0
    }

    pub fn format(self, sep: DecimalSeparator) -> String {
        let sep = match sep {
            DecimalSeparator::Dot => '.',
            DecimalSeparator::Comma => ',',
        };
        format!("{}{sep}{:02}", self.0 / 100, self.0 % 100)
    }
}

impl fmt::Display for Percent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.format(DecimalSeparator::Dot))
    }
}

impl Serialize for Percent {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.value())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn case(keys: &[&str]) -> EvalCase {
        EvalCase {
            id: "t".into(),
            qtype: 1,
            question: "q".into(),
            reference_jql: "project = GPT4".into(),
            expected_keys: keys.iter().map(|k| k.to_string()).collect(),
            traits: vec![],
            miss_jql: None,
            notes: None,
        }
    }

    #[test]
    fn set_equality() {
        let c = case(&["GPT4-2"]);
        assert_eq!(score_keys(&c, ["GPT4-2"]), Verdict::Correct);
        assert_eq!(score_keys(&c, ["GPT4-2", "GPT4-2"]), Verdict::Correct);
        assert_eq!(score_keys(&c, ["GPT4-2", "GPT4-5"]), Verdict::Incorrect);
        assert_eq!(score_keys(&c, []), Verdict::Incorrect);
        let c = case(&["GPT4-1", "GPT4-3"]);
        assert_eq!(score_keys(&c, ["GPT4-3", "GPT4-1"]), Verdict::Correct);
    }

    #[test]
    fn table_one_rounding() {
        let got: Vec<String> = [12, 16, 26, 34].iter().map(|&n| Percent::from_ratio(n, 70).to_string()).collect();
        assert_eq!(got, ["17.14", "22.86", "37.14", "48.57"]);
        assert_eq!(Percent::from_ratio(70, 70).to_string(), "100.00");
        assert_eq!(Percent::from_ratio(0, 70).to_string(), "0.00");
        assert_eq!(Percent::from_ratio(1, 8).to_string(), "12.50");
        // 1/16 = 6.25 exactly, 1/32 = 3.125 rounds up
        assert_eq!(Percent::from_ratio(1, 32).to_string(), "3.13");
        assert_eq!(Percent::from_ratio(12, 70).format(DecimalSeparator::Comma), "17,14");
    }
}
