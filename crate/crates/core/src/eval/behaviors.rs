//! Scripted model behaviors over a corpus.

use super::corpus::{Corpus, Trait};
use crate::llm::{Fault, Matcher, NoiseCurve, Phase, Rule, ScriptedBehavior};
use crate::prompt::{BlockId, PromptKit};

pub const BEHAVIORS: [&str; 3] = ["golden", "table1", "tempnoise"];

const MONTH_QUESTION: &str = "¿Cuántas tareas creadas este mes están en progreso?";
const PEOPLE_QUESTION: &str = "¿Cuántas personas tienen asignadas tareas en el proyecto GPT4?";

/// Phase 2 and 3 answers shared by every behavior.
fn answer_rules(b: ScriptedBehavior) -> ScriptedBehavior {
    b.rule(Rule::new(Matcher::question(MONTH_QUESTION), "status, created").in_phase(Phase::Two))
        .rule(
            Rule::new(
                Matcher::question(MONTH_QUESTION),
                "Hay {{issue_count}} tarea creada este mes que está en progreso.",
            )
            .in_phase(Phase::Three),
        )
        .rule(Rule::new(Matcher::question(PEOPLE_QUESTION), "Necessary JSON fields: [assignee]").in_phase(Phase::Two))
        .rule(
            Rule::new(
                Matcher::question(PEOPLE_QUESTION),
                "Hay {{distinct_count:assignee}} personas con tareas asignadas en el proyecto GPT4.",
            )
            .in_phase(Phase::Three),
        )
        .rule(Rule::new(Matcher::Substring(String::new()), "key, summary, status").in_phase(Phase::Two))
        .rule(
            Rule::new(
                Matcher::Substring(String::new()),
                "He encontrado {{issue_count}} incidencias que responden a la pregunta.",
            )
            .in_phase(Phase::Three),
        )
}

/// Answers every case with its reference JQL.
pub fn golden(corpus: &Corpus) -> ScriptedBehavior {
    let b = corpus.cases.iter().fold(ScriptedBehavior::new("golden"), |b, c| {
        b.rule(Rule::new(Matcher::question(&c.question), c.reference_jql.clone()).in_phase(Phase::One))
    });
    answer_rules(b)
}

/// A model that needs each Phase-1 block to get the matching cases right.
///
/// Without the status table it writes English status names, without the
/// project example it invents a project, and without the priority example
/// it translates priority names. Cases with a `miss_jql` are never solved.
pub fn table1(corpus: &Corpus, kit: &PromptKit) -> ScriptedBehavior {
    let needs = |t: Trait| match t {
        Trait::Status => (Fault::EnglishStatus, BlockId::P1B2),
        Trait::NoProject => (Fault::InventProject, BlockId::P1B3),
        Trait::Priority => (Fault::SpanishPriority, BlockId::P1B4),
    };
    let b = corpus.cases.iter().fold(ScriptedBehavior::new("table1"), |b, c| {
        let rule = match &c.miss_jql {
            Some(miss) => Rule::new(Matcher::question(&c.question), miss.clone()),
            None => c.traits.iter().fold(
                Rule::new(Matcher::question(&c.question), c.reference_jql.clone()),
                |rule, t| {
                    let (fault, block) = needs(*t);
                    rule.with_fault(fault, Some(&kit.block(block).text))
                },
            ),
        };
        b.rule(rule.in_phase(Phase::One))
    });
    answer_rules(b)
}

/// Corruption probability by temperature: none at 0, worst at 0.8.
pub fn temperature_curve() -> NoiseCurve {
    NoiseCurve::new(vec![(0.0, 0.0), (0.8, 0.6), (1.0, 0.5)])
}

/// [`table1`] plus random corruption that grows with temperature.
pub fn tempnoise(corpus: &Corpus, kit: &PromptKit, seed: u64) -> ScriptedBehavior {
    let mut b = table1(corpus, kit).noise(temperature_curve()).seed(seed);
    b.name = "tempnoise".into();
    b
}

pub fn by_name(name: &str, corpus: &Corpus, kit: &PromptKit, seed: u64) -> Option<ScriptedBehavior> {
    match name {
        "golden" => Some(golden(corpus).seed(seed)),
        "table1" => Some(table1(corpus, kit).seed(seed)),
        "tempnoise" => Some(tempnoise(corpus, kit, seed)),
        _ => None,
    }
}
