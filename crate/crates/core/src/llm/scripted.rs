//! A deterministic stand-in for a chat model.
//!
//! Responses come from an ordered rule list. On Phase-1 requests the backend
//! can additionally corrupt the scripted JQL with the failure modes real
//! models show: inventing a project, translating Spanish status names to
//! English, translating priority names to Spanish, malformed syntax and
//! chatty prose around the query.

use std::collections::{BTreeSet, HashSet};
use std::sync::Arc;
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regex::Regex;
use serde::{Deserialize, Serialize};
use serde_json::Value as Json;

use super::{estimate_tokens, ChatBackend, ChatRequest, ChatResponse, LlmError, Phase};
use crate::jql::{parse_jql, Clause, Expr, Field, Operand, Query, Value};
use crate::vocab::{english_status_for, spanish_priority_for};

#[derive(Debug, Clone)]
pub enum Matcher {
    Exact(String),
    Substring(String),
    Pattern(Regex),
}

impl Matcher {
    /// Matches a user message that starts with `question`, alone or followed
    /// by more lines (as in a retry that appends the parse error).
    pub fn question(question: &str) -> Matcher {
        let re = Regex::new(&format!("^{}(?:\n|$)", regex::escape(question))).expect("escaped pattern");
        Matcher::Pattern(re)
    }

    pub fn matches(&self, text: &str) -> bool {
        match self {
            Matcher::Exact(s) => text == s,
            Matcher::Substring(s) => text.contains(s.as_str()),
            Matcher::Pattern(re) => re.is_match(text),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Fault {
    InventProject,
    EnglishStatus,
    SpanishPriority,
    MalformedJql,
    ExtraProse,
}

/// A fault that fires unless the system prompt contains a given text.
#[derive(Debug, Clone)]
pub struct ConditionalFault {
    pub fault: Fault,
    pub unless_system_contains: Option<String>,
}

#[derive(Debug, Clone)]
pub struct Rule {
    pub phase: Option<Phase>,
    pub matcher: Matcher,
    /// May contain `{{issue_count}}` and `{{distinct_count:FIELD}}`, filled
    /// from the JSON issue list at the end of the user message.
    pub response: String,
    pub faults: Vec<ConditionalFault>,
}

impl Rule {
    pub fn new(matcher: Matcher, response: impl Into<String>) -> Self {
        Rule {
            phase: None,
            matcher,
            response: response.into(),
            faults: Vec::new(),
        }
    }

    pub fn in_phase(mut self, phase: Phase) -> Self {
        self.phase = Some(phase);
        self
    }

    pub fn with_fault(mut self, fault: Fault, unless_system_contains: Option<&str>) -> Self {
        self.faults.push(ConditionalFault {
            fault,
            unless_system_contains: unless_system_contains.map(str::to_string),
        });
        self
    }
}

/// Corruption probability as a piecewise-linear function of temperature.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseCurve {
    points: Vec<(f64, f64)>,
}

impl NoiseCurve {
    pub fn new(mut points: Vec<(f64, f64)>) -> Self {
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        NoiseCurve { points }
    }

    /// `p(t) = slope * t`.
    pub fn linear(slope: f64) -> Self {
        NoiseCurve::new(vec![(0.0, 0.0), (1.0, slope)])
    }

    pub fn probability(&self, t: f64) -> f64 {
        let pts = &self.points;
        let p = match pts.iter().position(|(x, _)| *x >= t) {
            None => pts.last().map(|p| p.1).unwrap_or(0.0),
            Some(0) => pts[0].1,
            Some(i) => {
                let (x0, y0) = pts[i - 1];
                let (x1, y1) = pts[i];
                y0 + (y1 - y0) * (t - x0) / (x1 - x0)
            }
        };
        p.clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone)]
pub struct ScriptedBehavior {
    pub name: String,
    pub rules: Vec<Rule>,
    /// Applied to every Phase-1 response.
    pub fault_modes: BTreeSet<Fault>,
    pub temperature_noise: Option<NoiseCurve>,
    pub seed: u64,
    /// Project key used by [`Fault::InventProject`].
    pub invented_project: String,
}

impl ScriptedBehavior {
    pub fn new(name: impl Into<String>) -> Self {
        ScriptedBehavior {
            name: name.into(),
            rules: Vec::new(),
            fault_modes: BTreeSet::new(),
            temperature_noise: None,
            seed: 0,
            invented_project: "PROJ".into(),
        }
    }

    pub fn rule(mut self, rule: Rule) -> Self {
        self.rules.push(rule);
        self
    }

    pub fn fault_mode(mut self, fault: Fault) -> Self {
        self.fault_modes.insert(fault);
        self
    }

    pub fn noise(mut self, curve: NoiseCurve) -> Self {
        self.temperature_noise = Some(curve);
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

#[derive(Debug, Clone)]
pub struct ScriptedBackend {
    behavior: Arc<ScriptedBehavior>,
}

impl ScriptedBackend {
    pub fn new(behavior: ScriptedBehavior) -> Self {
        ScriptedBackend {
            behavior: Arc::new(behavior),
        }
    }

    pub fn behavior(&self) -> &ScriptedBehavior {
        &self.behavior
    }

    fn rng_for(&self, req: &ChatRequest) -> ChaCha8Rng {
        // FNV-1a over everything that identifies the request
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |bytes: &[u8]| {
            for b in bytes {
                h ^= *b as u64;
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        };
        eat(&self.behavior.seed.to_le_bytes());
        eat(&req.temperature.value().to_bits().to_le_bytes());
        for m in &req.messages {
            eat(m.content.as_bytes());
            eat(&[0xff]);
        }
        ChaCha8Rng::seed_from_u64(h)
    }
}

impl ChatBackend for ScriptedBackend {
    fn complete(&self, req: &ChatRequest) -> Result<ChatResponse, LlmError> {
        let b = &self.behavior;
        let user = req.last_user();
        let rule = b
            .rules
            .iter()
            .find(|r| r.phase.is_none_or(|p| Some(p) == req.phase) && r.matcher.matches(user))
            .ok_or_else(|| LlmError::Unscripted(user.chars().take(80).collect()))?;
        let mut content = render(&rule.response, user);

        if req.phase == Some(Phase::One) {
            let system = req.system_text();
            let mut faults: Vec<Fault> = rule
                .faults
                .iter()
                .filter(|f| {
                    f.unless_system_contains
                        .as_deref()
                        .is_none_or(|needle| !system.contains(needle))
                })
                .map(|f| f.fault)
                .collect();
            faults.extend(b.fault_modes.iter().copied());
            if let Some(curve) = &b.temperature_noise {
                let mut rng = self.rng_for(req);
                if rng.random::<f64>() < curve.probability(req.temperature.value()) {
                    let options = applicable(&content);
                    faults.push(if options.is_empty() {
                        Fault::MalformedJql
                    } else {
                        options[rng.random_range(0..options.len())]
                    });
                }
            }
            let mut seen = HashSet::new();
            for fault in faults {
                if seen.insert(fault) {
                    content = apply_fault(fault, &content, &b.invented_project);
                }
            }
        }

        let prompt_tokens = req.messages.iter().map(|m| estimate_tokens(&m.content)).sum();
        Ok(ChatResponse {
            completion_tokens: estimate_tokens(&content),
            content,
            prompt_tokens,
            model: req.model.clone(),
            latency: Duration::ZERO,
            estimated: true,
        })
    }

    fn id(&self) -> String {
        format!("scripted:{}", self.behavior.name)
    }

    fn deterministic(&self) -> bool {
        true
    }
}

fn issues_in(user: &str) -> Vec<Json> {
    user.rfind("\n\n[")
        .and_then(|i| serde_json::from_str::<Vec<Json>>(&user[i + 2..]).ok())
        .unwrap_or_default()
}

fn render(template: &str, user: &str) -> String {
    if !template.contains("{{") {
        return template.to_string();
    }
    let issues = issues_in(user);
    let placeholder = Regex::new(r"\{\{\s*(issue_count|distinct_count:([A-Za-z]+))\s*\}\}").unwrap();
    placeholder
        .replace_all(template, |caps: &regex::Captures<'_>| match caps.get(2) {
            None => issues.len().to_string(),
            Some(field) => {
                let mut distinct = BTreeSet::new();
                for issue in &issues {
                    match &issue[field.as_str()] {
                        Json::Null => {}
                        Json::Array(items) => distinct.extend(items.iter().map(Json::to_string)),
                        other => {
                            distinct.insert(other.to_string());
                        }
                    }
                }
                distinct.len().to_string()
            }
        })
        .into_owned()
}

fn has_field(q: &Query, field: Field) -> bool {
    q.clauses().iter().any(|c| c.field == field)
}

/// Faults that would change this JQL.
fn applicable(jql: &str) -> Vec<Fault> {
    let Ok(q) = parse_jql(jql) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    if !has_field(&q, Field::Project) {
        out.push(Fault::InventProject);
    }
    if has_field(&q, Field::Status) {
        out.push(Fault::EnglishStatus);
    }
    if has_field(&q, Field::Priority) {
        out.push(Fault::SpanishPriority);
    }
    out
}

fn rewrite_values(expr: &mut Expr, field: Field, f: &dyn Fn(&str) -> Option<String>) {
    match expr {
        Expr::And(xs) | Expr::Or(xs) => xs.iter_mut().for_each(|x| rewrite_values(x, field, f)),
        Expr::Not(x) => rewrite_values(x, field, f),
        Expr::Clause(c) if c.field == field => {
            let values: &mut [Value] = match &mut c.operand {
                Operand::Single(v) => std::slice::from_mut(v),
                Operand::List(vs) => vs,
                Operand::None => &mut [],
            };
            for v in values {
                if let Value::Text(t) = v {
                    if let Some(new) = f(&t.value) {
                        t.value = new;
                    }
                }
            }
        }
        Expr::Clause(_) => {}
    }
}

pub(crate) fn apply_fault(fault: Fault, jql: &str, invented_project: &str) -> String {
    let parsed = parse_jql(jql);
    match (fault, parsed) {
        (Fault::MalformedJql, _) => format!("({jql}"),
        (Fault::ExtraProse, _) => {
            format!("Claro, aquí tienes la consulta que necesitas: {jql}. Espero que te sirva de ayuda.")
        }
        (Fault::InventProject, Ok(mut q)) => {
            if has_field(&q, Field::Project) {
                let p = invented_project.to_string();
                rewrite_values(&mut q.root, Field::Project, &|_| Some(p.clone()));
            } else {
                let root = std::mem::replace(&mut q.root, Expr::Clause(Clause::is_empty(Field::Key)));
                q.root = Expr::and([root, Clause::eq(Field::Project, invented_project).into()]);
            }
            q.to_string()
        }
        (Fault::EnglishStatus, Ok(mut q)) => {
            rewrite_values(&mut q.root, Field::Status, &|s| {
                english_status_for(s).map(str::to_string)
            });
            q.to_string()
        }
        (Fault::SpanishPriority, Ok(mut q)) => {
            rewrite_values(&mut q.root, Field::Priority, &|s| {
                spanish_priority_for(s).map(str::to_string)
            });
            q.to_string()
        }
        (_, Err(_)) => jql.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::Temperature;

    fn req(system: &str, user: &str, t: f64) -> ChatRequest {
        ChatRequest::new("m", Temperature::new(t).unwrap(), system, user).in_phase(Phase::One)
    }

    #[test]
    fn ping_pong() {
        let backend = ScriptedBackend::new(
            ScriptedBehavior::new("t").rule(Rule::new(Matcher::Exact("ping".into()), "pong")),
        );
        for t in [0.0, 0.5, 1.0] {
            let r = backend
                .complete(&ChatRequest::new("m", Temperature::new(t).unwrap(), "", "ping"))
                .unwrap();
            assert_eq!(r.content, "pong");
        }
        assert!(matches!(
            backend.complete(&ChatRequest::new("m", Temperature::ZERO, "", "pang")),
            Err(LlmError::Unscripted(_))
        ));
    }

    #[test]
    fn english_status_fault() {
        let backend = ScriptedBackend::new(
            ScriptedBehavior::new("t")
                .rule(Rule::new(
                    Matcher::question("Muestra las incidencias en progreso"),
                    "status = \"En Progreso\"",
                ))
                .fault_mode(Fault::EnglishStatus),
        );
        let r = backend.complete(&req("sys", "Muestra las incidencias en progreso", 0.0)).unwrap();
        assert_eq!(r.content, "status = \"In Progress\"");
    }

    #[test]
    fn conditional_fault_respects_system_text() {
        let backend = ScriptedBackend::new(ScriptedBehavior::new("t").rule(
            Rule::new(Matcher::question("q"), "assignee = maria.lopez")
                .with_fault(Fault::InventProject, Some("do not invent")),
        ));
        assert_eq!(
            backend.complete(&req("be terse", "q", 0.0)).unwrap().content,
            "assignee = maria.lopez AND project = PROJ"
        );
        assert_eq!(
            backend.complete(&req("please do not invent", "q", 0.0)).unwrap().content,
            "assignee = maria.lopez"
        );
    }

    #[test]
    fn retry_text_still_matches() {
        let m = Matcher::question("¿Qué hay (abierto)?");
        assert!(m.matches("¿Qué hay (abierto)?"));
        assert!(m.matches("¿Qué hay (abierto)?\n\nThe previous answer failed"));
        assert!(!m.matches("¿Qué hay (abierto)? más"));
    }

    #[test]
    fn other_faults() {
        assert_eq!(
            apply_fault(Fault::SpanishPriority, "priority in (Highest, Low)", "X"),
            "priority IN (Máxima, Baja)"
        );
        assert_eq!(
            apply_fault(Fault::InventProject, "project = GPT4 AND status = Abierto", "X"),
            "project = X AND status = Abierto"
        );
        assert!(parse_jql(&apply_fault(Fault::MalformedJql, "status = Abierto", "X")).is_err());
        assert!(parse_jql(&apply_fault(Fault::ExtraProse, "status = Abierto", "X")).is_err());
    }

    #[test]
    fn noise_is_deterministic_and_tracks_temperature() {
        let backend = ScriptedBackend::new(
            ScriptedBehavior::new("t")
                .rule(Rule::new(Matcher::Substring(String::new()), "status = Abierto"))
                .noise(NoiseCurve::linear(0.4))
                .seed(7),
        );
        let corrupted = |t: f64| {
            (0..400)
                .filter(|i| {
                    backend.complete(&req("s", &format!("q{i}"), t)).unwrap().content != "status = Abierto"
                })
                .count()
        };
        assert_eq!(corrupted(0.0), 0);
        let hot = corrupted(1.0);
        assert!((120..200).contains(&hot), "{hot}");
        assert_eq!(hot, corrupted(1.0));
    }

    #[test]
    fn curve_interpolates() {
        let c = NoiseCurve::new(vec![(0.0, 0.0), (0.5, 0.1), (1.0, 0.5)]);
        assert!((c.probability(0.25) - 0.05).abs() < 1e-12);
        assert!((c.probability(0.75) - 0.3).abs() < 1e-12);
        assert_eq!(c.probability(2.0), 0.5);
    }

    #[test]
    fn phase_three_placeholders() {
        let backend = ScriptedBackend::new(ScriptedBehavior::new("t").rule(
            Rule::new(
                Matcher::Substring("personas".into()),
                "Son {{distinct_count:assignee}} personas en {{issue_count}} incidencias",
            )
            .in_phase(Phase::Three),
        ));
        let user = "¿Cuántas personas?\n\n[{\"key\":\"A-1\",\"assignee\":\"x\"},{\"key\":\"A-2\",\"assignee\":\"y\"},{\"key\":\"A-3\",\"assignee\":\"x\"}]";
        let r = backend
            .complete(&ChatRequest::new("m", Temperature::ZERO, "s", user).in_phase(Phase::Three))
            .unwrap();
        assert_eq!(r.content, "Son 2 personas en 3 incidencias");
    }
}
