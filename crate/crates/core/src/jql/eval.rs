use std::cmp::Ordering;

use chrono::{DateTime, Utc};
use thiserror::Error;

use super::ast::*;
use super::field::{Domain, Field};
use super::time::{midnight, Clock, DateOperand};
use crate::issue::{split_key, FieldRef, FieldView};
use crate::vocab::priority_rank;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("field `{field}` does not support {op}: {reason}")]
    TypeMismatch {
        field: Field,
        op: &'static str,
        reason: String,
    },
    #[error("clause on `{field}` has the wrong number of operands for {op}")]
    MalformedClause { field: Field, op: &'static str },
}

fn allowed(field: Field, op: Operator) -> bool {
    use Operator::*;
    let common = matches!(op, IsEmpty | IsNotEmpty);
    common
        || match field.domain() {
            Domain::Enum if field == Field::Key => {
                matches!(op, Eq | Neq | In | NotIn | Gt | Gte | Lt | Lte)
            }
            Domain::Enum | Domain::User => matches!(op, Eq | Neq | In | NotIn),
            Domain::Text => matches!(op, Contains | NotContains),
            Domain::Date => matches!(op, Eq | Neq | Gt | Gte | Lt | Lte),
            Domain::Number => matches!(op, Eq | Neq | Gt | Gte | Lt | Lte | In | NotIn),
        }
}

fn check_value(field: Field, op: Operator, value: &Value) -> Result<(), String> {
    let ordering = matches!(op, Operator::Gt | Operator::Gte | Operator::Lt | Operator::Lte);
    match (field.domain(), value) {
        (Domain::Date, Value::Function(_) | Value::Date(_)) => Ok(()),
        (Domain::Date, other) => Err(format!("expected a date or date function, got {other}")),
        (Domain::Number, Value::Number(_)) => Ok(()),
        (Domain::Number, Value::Text(t)) if t.value.trim().parse::<i64>().is_ok() => Ok(()),
        (Domain::Number, other) => Err(format!("expected a number, got {other}")),
        (_, Value::Function(_) | Value::Date(_)) => {
            Err(format!("expected text, got date value {value}"))
        }
        (_, Value::Text(t)) if field == Field::Key && ordering && split_key(&t.value).is_none() => {
            Err(format!("`{}` is not an issue key", t.value))
        }
        _ => Ok(()),
    }
}

/// Check every clause against its field's domain without touching any data.
pub fn validate(query: &Query) -> Result<(), EvalError> {
    for clause in query.clauses() {
        let op = clause.op.symbol();
        if !clause.is_well_formed() {
            return Err(EvalError::MalformedClause {
                field: clause.field,
                op,
            });
        }
        if !allowed(clause.field, clause.op) {
            return Err(EvalError::TypeMismatch {
                field: clause.field,
                op,
                reason: "operator not supported for this field".into(),
            });
        }
        for v in clause.values() {
            check_value(clause.field, clause.op, v).map_err(|reason| EvalError::TypeMismatch {
                field: clause.field,
                op,
                reason,
            })?;
        }
    }
    Ok(())
}

/// Run `query` over `items`.
///
/// Returns the matching items in `ORDER BY` order; without one, newest
/// `created` first. Ties are broken by issue key, ascending.
pub fn evaluate<'a, V: FieldView>(
    query: &Query,
    items: &'a [V],
    clock: &Clock,
) -> Result<Vec<&'a V>, EvalError> {
    validate(query)?;
    let mut hits: Vec<&V> = items
        .iter()
        .filter(|item| eval_expr(&query.root, *item, clock))
        .collect();
    sort_items(&mut hits, &query.order_by);
    Ok(hits)
}

pub(crate) fn sort_items<V: FieldView>(items: &mut [&V], order_by: &[OrderKey]) {
    let default = [OrderKey {
        field: Field::Created,
        direction: Direction::Desc,
    }];
    let keys = if order_by.is_empty() {
        &default[..]
    } else {
        order_by
    };
    items.sort_by(|a, b| {
        keys.iter()
            .map(|k| compare_field(k.field, k.direction, a.field(k.field), b.field(k.field)))
            .find(|o| *o != Ordering::Equal)
            .unwrap_or_else(|| compare_keys(a.key(), b.key()))
    });
}

fn compare_keys(a: &str, b: &str) -> Ordering {
    match (split_key(a), split_key(b)) {
        (Some((pa, na)), Some((pb, nb))) => pa.cmp(pb).then(na.cmp(&nb)),
        _ => a.cmp(b),
    }
}

/// Absent values sort last in either direction.
fn compare_field(
    field: Field,
    direction: Direction,
    a: Option<FieldRef<'_>>,
    b: Option<FieldRef<'_>>,
) -> Ordering {
    let (a, b) = match (a, b) {
        (None, None) => return Ordering::Equal,
        (None, Some(_)) => return Ordering::Greater,
        (Some(_), None) => return Ordering::Less,
        (Some(a), Some(b)) => (a, b),
    };
    let ord = match (a, b) {
        (FieldRef::Text(x), FieldRef::Text(y)) if field == Field::Key => compare_keys(x, y),
        (FieldRef::Text(x), FieldRef::Text(y)) if field == Field::Priority => {
            // descending urgency reads as ascending rank
            let rank = |s: &str| priority_rank(s).unwrap_or(usize::MAX);
            rank(y).cmp(&rank(x)).then_with(|| x.to_lowercase().cmp(&y.to_lowercase()))
        }
        (FieldRef::Text(x), FieldRef::Text(y)) => x.to_lowercase().cmp(&y.to_lowercase()),
        (FieldRef::Number(x), FieldRef::Number(y)) => x.cmp(&y),
        (FieldRef::List(x), FieldRef::List(y)) => x
            .join(",")
            .to_lowercase()
            .cmp(&y.join(",").to_lowercase()),
        (x, y) => instant(x).cmp(&instant(y)),
    };
    match direction {
        Direction::Asc => ord,
        Direction::Desc => ord.reverse(),
    }
}

fn instant(v: FieldRef<'_>) -> Option<DateTime<Utc>> {
    match v {
        FieldRef::Timestamp(t) => Some(t),
        FieldRef::Date(d) => Some(midnight(d)),
        _ => None,
    }
}

fn eval_expr<V: FieldView>(expr: &Expr, item: &V, clock: &Clock) -> bool {
    match expr {
        Expr::And(children) => children.iter().all(|c| eval_expr(c, item, clock)),
        Expr::Or(children) => children.iter().any(|c| eval_expr(c, item, clock)),
        Expr::Not(inner) => !eval_expr(inner, item, clock),
        Expr::Clause(c) => eval_clause(c, item, clock),
    }
}

fn eval_clause<V: FieldView>(clause: &Clause, item: &V, clock: &Clock) -> bool {
    let value = item.field(clause.field);
    match clause.op {
        Operator::IsEmpty => return value.is_none(),
        Operator::IsNotEmpty => return value.is_some(),
        _ => {}
    }
    // every other operator needs a value to compare
    let Some(value) = value else {
        return false;
    };
    let values = clause.values();
    match clause.op {
        Operator::Eq => equals(clause.field, value, &values[0], clock),
        Operator::Neq => !equals(clause.field, value, &values[0], clock),
        Operator::In => values.iter().any(|v| equals(clause.field, value, v, clock)),
        Operator::NotIn => !values.iter().any(|v| equals(clause.field, value, v, clock)),
        Operator::Contains => contains(value, &values[0]),
        Operator::NotContains => !contains(value, &values[0]),
        op => ordered(clause.field, op, value, &values[0], clock),
    }
}

fn text_eq(a: &str, b: &str) -> bool {
    a == b || a.to_lowercase() == b.to_lowercase()
}

fn date_operand(v: &Value, clock: &Clock) -> Option<DateOperand> {
    match v {
        Value::Function(f) => Some(f.resolve(clock)),
        Value::Date(d) => Some(d.resolve()),
        _ => None,
    }
}

fn operand_number(v: &Value) -> Option<i64> {
    match v {
        Value::Number(n) => Some(*n),
        Value::Text(t) => t.value.trim().parse().ok(),
        _ => None,
    }
}

fn equals(field: Field, actual: FieldRef<'_>, operand: &Value, clock: &Clock) -> bool {
    match actual {
        FieldRef::Text(s) => operand.as_plain_text().is_some_and(|o| text_eq(s, &o)),
        FieldRef::List(items) => operand
            .as_plain_text()
            .is_some_and(|o| items.iter().any(|s| text_eq(s, &o))),
        FieldRef::Number(n) => operand_number(operand) == Some(n),
        FieldRef::Timestamp(_) | FieldRef::Date(_) => {
            let x = instant(actual).unwrap();
            match date_operand(operand, clock) {
                Some(DateOperand::Span { start, end }) => start <= x && x < end,
                Some(DateOperand::Instant {
                    period: Some((start, end)),
                    ..
                }) => start <= x && x < end,
                Some(DateOperand::Instant { at, period: None }) => x == at,
                None => {
                    debug_assert!(false, "validated date operand on {field}");
                    false
                }
            }
        }
    }
}

fn contains(actual: FieldRef<'_>, operand: &Value) -> bool {
    let needle = match operand.as_plain_text() {
        Some(n) => n.to_lowercase(),
        None => return false,
    };
    match actual {
        FieldRef::Text(s) => s.to_lowercase().contains(&needle),
        FieldRef::List(items) => items.iter().any(|s| s.to_lowercase().contains(&needle)),
        _ => false,
    }
}

fn ordered(field: Field, op: Operator, actual: FieldRef<'_>, operand: &Value, clock: &Clock) -> bool {
    let cmp = |ord: Ordering| match op {
        Operator::Gt => ord == Ordering::Greater,
        Operator::Gte => ord != Ordering::Less,
        Operator::Lt => ord == Ordering::Less,
        Operator::Lte => ord != Ordering::Greater,
        _ => false,
    };
    match actual {
        FieldRef::Number(n) => operand_number(operand).is_some_and(|m| cmp(n.cmp(&m))),
        FieldRef::Text(k) if field == Field::Key => {
            let (Some((pa, na)), Some(other)) = (split_key(k), operand.as_plain_text()) else {
                return false;
            };
            match split_key(&other) {
                Some((pb, nb)) if pa.eq_ignore_ascii_case(pb) => cmp(na.cmp(&nb)),
                _ => false,
            }
        }
        FieldRef::Timestamp(_) | FieldRef::Date(_) => {
            let x = instant(actual).unwrap();
            match date_operand(operand, clock) {
                Some(DateOperand::Span { start, end }) => match op {
                    Operator::Gt => x >= end,
                    Operator::Gte => x >= start,
                    Operator::Lt => x < start,
                    Operator::Lte => x < end,
                    _ => false,
                },
                Some(DateOperand::Instant { at, .. }) => cmp(x.cmp(&at)),
                None => false,
            }
        }
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture::Fixture;
    use crate::jql::parse_jql;

    fn run(jql: &str) -> Vec<String> {
        let fx = Fixture::bundled();
        let q = parse_jql(jql).unwrap();
        evaluate(&q, &fx.issues, &fx.clock())
            .unwrap()
            .into_iter()
            .map(|i| i.key.clone())
            .collect()
    }

    #[test]
    fn open_issues_on_fixture() {
        assert_eq!(run("status = \"Abierto\"").len(), 14);
        assert_eq!(run("status = abierto").len(), 14);
    }

    #[test]
    fn contradiction_is_empty() {
        assert!(run("status = \"Abierto\" AND status != \"Abierto\"").is_empty());
    }

    #[test]
    fn accents_matter_case_does_not() {
        assert!(run("status = \"Ábierto\"").is_empty());
        assert_eq!(run("status = \"EN PROGRESO\""), vec!["GPT4-15"]);
    }

    #[test]
    fn start_of_month_matches_whole_month() {
        assert_eq!(
            run("status = 'En Progreso' AND created = startOfMonth()"),
            vec!["GPT4-15"]
        );
    }

    #[test]
    fn default_order_is_newest_first() {
        let keys = run("project = GPT4");
        assert_eq!(keys.len(), 20);
        assert_eq!(keys.first().map(String::as_str), Some("GPT4-20"));
        assert_eq!(keys.last().map(String::as_str), Some("GPT4-1"));
    }

    #[test]
    fn explicit_order_and_absent_last() {
        let keys = run("project = GPT4 ORDER BY assignee ASC, key DESC");
        let fx = Fixture::bundled();
        let unassigned = fx.issues.iter().filter(|i| i.assignee.is_none()).count();
        assert!(keys[keys.len() - unassigned..]
            .iter()
            .all(|k| fx.issue(k).unwrap().assignee.is_none()));
    }

    #[test]
    fn type_mismatch() {
        let fx = Fixture::bundled();
        for jql in [
            "status > Abierto",
            "summary = login",
            "created = hoy",
            "timespent = mucho",
            "assignee = startOfDay()",
            "key > banana",
        ] {
            let q = parse_jql(jql).unwrap();
            assert!(
                matches!(
                    evaluate(&q, &fx.issues, &fx.clock()),
                    Err(EvalError::TypeMismatch { .. })
                ),
                "{jql}"
            );
        }
    }

    #[test]
    fn day_granularity_comparisons() {
        // GPT4-1 was created on 2023-08-02 09:15
        assert!(run("created > 2023-08-02").iter().all(|k| k != "GPT4-1"));
        assert!(run("created >= 2023-08-02").iter().any(|k| k == "GPT4-1"));
        assert!(run("created <= 2023-08-02").iter().any(|k| k == "GPT4-1"));
        assert!(run("created < 2023-08-02").iter().all(|k| k != "GPT4-1"));
        assert!(run("created = 2023-08-02").iter().any(|k| k == "GPT4-1"));
    }

    #[test]
    fn key_ordering_comparisons() {
        let mut keys = run("key >= GPT4-18");
        keys.sort();
        assert_eq!(keys, vec!["GPT4-18", "GPT4-19", "GPT4-20"]);
        assert!(run("key < OTHER-3").is_empty());
    }

    #[test]
    fn neq_excludes_absent() {
        let fx = Fixture::bundled();
        let assigned = fx.issues.iter().filter(|i| i.assignee.is_some()).count();
        let not_joel = run("assignee != joel.garcia").len();
        let joel = run("assignee = joel.garcia").len();
        assert_eq!(not_joel + joel, assigned);
    }
}
