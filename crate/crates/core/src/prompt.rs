//! Prompt blocks and per-phase assembly.
//!
//! Block texts live in `data/prompt_blocks.toml` and are never retyped in
//! code. A different block file can be loaded with [`PromptKit::from_path`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::jql::Field;
use crate::llm::estimate_tokens;

const BUNDLED_BLOCKS: &str = include_str!("../data/prompt_blocks.toml");

/// Reduced-issue JSON larger than this triggers truncation in Phase 3.
pub const DEFAULT_PHASE3_BUDGET: usize = 12_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BlockId {
    #[serde(rename = "P1_B1")]
    P1B1,
    #[serde(rename = "P1_B2")]
    P1B2,
    #[serde(rename = "P1_B3")]
    P1B3,
    #[serde(rename = "P1_B4")]
    P1B4,
    P2,
    P3,
}

impl BlockId {
    pub const ALL: [BlockId; 6] = [
        BlockId::P1B1,
        BlockId::P1B2,
        BlockId::P1B3,
        BlockId::P1B4,
        BlockId::P2,
        BlockId::P3,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockKind {
    ZeroShot,
    FewShotExample,
    MappingTable,
    Instruction,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptBlock {
    pub id: BlockId,
    pub kind: BlockKind,
    pub text: String,
}

/// The Phase-1 template variants: cumulative prefixes of the four blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum Variant {
    B1,
    B1_2,
    B1_3,
    #[default]
    Full,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::B1, Variant::B1_2, Variant::B1_3, Variant::Full];

    pub fn name(self) -> &'static str {
        match self {
            Variant::B1 => "B1",
            Variant::B1_2 => "B1-2",
            Variant::B1_3 => "B1-3",
            Variant::Full => "full",
        }
    }

    pub fn blocks(self) -> &'static [BlockId] {
        const ORDER: [BlockId; 4] = [BlockId::P1B1, BlockId::P1B2, BlockId::P1B3, BlockId::P1B4];
        let n = match self {
            Variant::B1 => 1,
            Variant::B1_2 => 2,
            Variant::B1_3 => 3,
            Variant::Full => 4,
        };
        &ORDER[..n]
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = PromptError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| PromptError::UnknownVariant(s.to_string()))
    }
}

impl Serialize for Variant {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Variant {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// A phase template: which blocks, in which order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    pub phase: u8,
    pub name: &'static str,
    pub blocks: Vec<BlockId>,
}

impl PromptTemplate {
    pub fn phase1(variant: Variant) -> Self {
        PromptTemplate {
            phase: 1,
            name: variant.name(),
            blocks: variant.blocks().to_vec(),
        }
    }

    pub fn phase2() -> Self {
        PromptTemplate {
            phase: 2,
            name: "phase2",
            blocks: vec![BlockId::P2],
        }
    }

    pub fn phase3() -> Self {
        PromptTemplate {
            phase: 3,
            name: "phase3",
            blocks: vec![BlockId::P3],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AssembledPrompt {
    pub system_text: String,
    pub user_text: String,
    /// Estimate for the system text only.
    pub token_estimate: u64,
}

impl AssembledPrompt {
    fn new(system_text: String, user_text: String) -> Self {
        AssembledPrompt {
            token_estimate: estimate_tokens(&system_text),
            system_text,
            user_text,
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum PromptError {
    #[error("the query is empty")]
    EmptyQuery,
    #[error("issue JSON is {len} characters, over the {budget} budget")]
    TruncationRequired { len: usize, budget: usize },
    #[error("unknown template `{0}` (expected B1, B1-2, B1-3 or full)")]
    UnknownVariant(String),
    #[error("prompt block file: {0}")]
    Blocks(String),
    #[error("no fields available for selection")]
    NoFields,
}

#[derive(Deserialize)]
struct BlockFile {
    block: Vec<PromptBlock>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptKit {
    blocks: BTreeMap<BlockId, PromptBlock>,
}

impl PromptKit {
    pub fn bundled() -> Self {
        PromptKit::from_toml(BUNDLED_BLOCKS).expect("bundled prompt blocks are valid")
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, PromptError> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| PromptError::Blocks(format!("{}: {e}", path.as_ref().display())))?;
        PromptKit::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, PromptError> {
        let file: BlockFile = toml::from_str(text).map_err(|e| PromptError::Blocks(e.to_string()))?;
        let mut blocks = BTreeMap::new();
        for block in file.block {
            if blocks.insert(block.id, block.clone()).is_some() {
                return Err(PromptError::Blocks(format!("block {:?} defined twice", block.id)));
            }
        }
        if let Some(missing) = BlockId::ALL.iter().find(|id| !blocks.contains_key(id)) {
            return Err(PromptError::Blocks(format!("block {missing:?} is missing")));
        }
        Ok(PromptKit { blocks })
    }

    pub fn block(&self, id: BlockId) -> &PromptBlock {
        &self.blocks[&id]
    }

    pub fn system_text(&self, template: &PromptTemplate) -> String {
        template
            .blocks
            .iter()
            .map(|id| self.block(*id).text.as_str())
            .collect::<Vec<_>>()
            .join("\n\n")
    }

    pub fn assemble_phase1(&self, variant: Variant, query: &str) -> Result<AssembledPrompt, PromptError> {
        if query.trim().is_empty() {
            return Err(PromptError::EmptyQuery);
        }
        Ok(AssembledPrompt::new(
            self.system_text(&PromptTemplate::phase1(variant)),
            query.to_string(),
        ))
    }

    /// The user text lists the selectable fields after the question.
    pub fn assemble_phase2(&self, query: &str, available: &[Field]) -> Result<AssembledPrompt, PromptError> {
        if query.trim().is_empty() {
            return Err(PromptError::EmptyQuery);
        }
        if available.is_empty() {
            return Err(PromptError::NoFields);
        }
        let names: Vec<&str> = available.iter().map(|f| f.name()).collect();
        Ok(AssembledPrompt::new(
            self.system_text(&PromptTemplate::phase2()),
            format!("{query}\n\nAvailable fields: {}", names.join(", ")),
        ))
    }

    pub fn assemble_phase3(
        &self,
        query: &str,
        reduced_issues: &str,
        budget: usize,
    ) -> Result<AssembledPrompt, PromptError> {
        if query.trim().is_empty() {
            return Err(PromptError::EmptyQuery);
        }
        let len = reduced_issues.chars().count();
        if len > budget {
            return Err(PromptError::TruncationRequired { len, budget });
        }
        Ok(AssembledPrompt::new(
            self.system_text(&PromptTemplate::phase3()),
            format!("{query}\n\n{reduced_issues}"),
        ))
    }
}

/// Outcome of reading a Phase-2 completion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldSelection {
    pub fields: BTreeSet<Field>,
    /// Nothing usable was named, so every field in the vocabulary was kept.
    pub fallback: bool,
}

/// Read a comma-separated field list out of a model reply.
///
/// Tolerates a leading label (`Necessary JSON fields: [assignee]`), brackets,
/// quotes and `fields.` prefixes. Names outside `vocabulary` are dropped; if
/// none remain the whole vocabulary is returned.
pub fn parse_field_selection(completion: &str, vocabulary: &BTreeSet<Field>) -> FieldSelection {
    let body = match completion.rfind(':') {
        Some(i) if !completion[i + 1..].trim().is_empty() => &completion[i + 1..],
        _ => completion,
    };
    let junk = |c: char| {
        c.is_whitespace()
            || matches!(c, '[' | ']' | '(' | ')' | '{' | '}' | '"' | '\'' | '`' | '.' | '“' | '”' | '‘' | '’' | '*' | '-')
    };
    let fields: BTreeSet<Field> = body
        .split([',', '\n', ';'])
        .filter_map(|raw| {
            let name = raw.trim_matches(junk);
            let name = name.strip_prefix("fields.").unwrap_or(name);
            let name = name.rsplit('.').next().unwrap_or(name);
            Field::from_name(&name.to_lowercase())
        })
        .filter(|f| vocabulary.contains(f))
        .collect();
    if fields.is_empty() {
        tracing::info!(completion, "field selection fell back to every field");
        FieldSelection {
            fields: vocabulary.clone(),
            fallback: true,
        }
    } else {
        FieldSelection {
            fields,
            fallback: false,
        }
    }
}
