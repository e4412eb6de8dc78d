//! Test oracles for the JQL engine.
//!
//! [`brute_force`] filters issues one at a time over their Jira JSON
//! rendering with its own field access and calendar arithmetic, sharing
//! nothing with the engine but the AST. [`gen`] builds random queries and
//! stores for property tests.

pub mod gen;

use std::collections::BTreeSet;

use chrono::{DateTime, Datelike, Duration, NaiveDate, NaiveDateTime, TimeZone, Utc};
use jiragpt_core::issue::{to_jira_json, Issue};
use jiragpt_core::jql::{DateFunctionKind, Expr, Field, Offset, OffsetUnit, Operator, Query, Value};
use serde_json::Value as Json;

#[derive(Debug, Clone, PartialEq)]
enum V {
    Str(String),
    Strs(Vec<String>),
    Num(i64),
    At(DateTime<Utc>),
    Missing,
}

fn read(issue: &Json, field: Field) -> V {
    let f = &issue["fields"];
    let s = |v: &Json| v.as_str().filter(|s| !s.is_empty()).map(str::to_string);
    let name = |k: &str| s(&f[k]["name"]).map(V::Str).unwrap_or(V::Missing);
    let list = |k: &str| {
        let items: Vec<String> = f[k]
            .as_array()
            .map(|a| {
                a.iter()
                    .filter_map(|x| s(x).or_else(|| s(&x["name"])))
                    .collect()
            })
            .unwrap_or_default();
        if items.is_empty() {
            V::Missing
        } else {
            V::Strs(items)
        }
    };
    let time = |k: &str| {
        s(&f[k])
            .and_then(|t| DateTime::parse_from_str(&t, "%Y-%m-%dT%H:%M:%S%.3f%z").ok())
            .map(|t| V::At(t.with_timezone(&Utc)))
            .unwrap_or(V::Missing)
    };
    match field {
        Field::Key => V::Str(issue["key"].as_str().unwrap().to_string()),
        Field::Id => {
            let id = issue["id"].as_str().unwrap();
            id.parse().map(V::Num).unwrap_or(V::Str(id.to_string()))
        }
        Field::Summary => s(&f["summary"]).map(V::Str).unwrap_or(V::Missing),
        Field::Description => s(&f["description"]).map(V::Str).unwrap_or(V::Missing),
        Field::Status => name("status"),
        Field::Assignee => name("assignee"),
        Field::Reporter => name("reporter"),
        Field::Creator => name("creator"),
        Field::Priority => name("priority"),
        Field::IssueType => name("issuetype"),
        Field::Resolution => name("resolution"),
        Field::Project => s(&f["project"]["key"]).map(V::Str).unwrap_or(V::Missing),
        Field::Created => time("created"),
        Field::Updated => time("updated"),
        Field::ResolutionDate => time("resolutiondate"),
        Field::DueDate => s(&f["duedate"])
            .and_then(|d| NaiveDate::parse_from_str(&d, "%Y-%m-%d").ok())
            .map(|d| V::At(day_start(d)))
            .unwrap_or(V::Missing),
        Field::Labels => list("labels"),
        Field::Components => list("components"),
        Field::FixVersions => list("fixVersions"),
        Field::TimeEstimate => f["timeestimate"].as_i64().map(V::Num).unwrap_or(V::Missing),
        Field::TimeSpent => f["timespent"].as_i64().map(V::Num).unwrap_or(V::Missing),
    }
}

fn day_start(d: NaiveDate) -> DateTime<Utc> {
    Utc.from_utc_datetime(&NaiveDateTime::new(d, chrono::NaiveTime::MIN))
}

fn shift_months(t: DateTime<Utc>, n: i32) -> DateTime<Utc> {
    // walk month by month, clamping the day
    let total = t.year() * 12 + t.month0() as i32 + n;
    let (y, m0) = (total.div_euclid(12), total.rem_euclid(12) as u32);
    let mut day = t.day();
    loop {
        if let Some(d) = NaiveDate::from_ymd_opt(y, m0 + 1, day) {
            return Utc.from_utc_datetime(&d.and_time(t.time()));
        }
        day -= 1;
    }
}

fn month_start(t: DateTime<Utc>) -> DateTime<Utc> {
    day_start(NaiveDate::from_ymd_opt(t.year(), t.month(), 1).unwrap())
}

fn week_start(t: DateTime<Utc>) -> DateTime<Utc> {
    let mut d = t.date_naive();
    while d.weekday() != chrono::Weekday::Mon {
        d = d.pred_opt().unwrap();
    }
    day_start(d)
}

/// A resolved date operand: the instant used for ordering and the range used
/// for equality.
struct When {
    at: DateTime<Utc>,
    from: DateTime<Utc>,
    until: DateTime<Utc>,
    literal: bool,
    exact: bool,
}

fn resolve(value: &Value, now: DateTime<Utc>) -> Option<When> {
    match value {
        Value::Date(d) => {
            let (from, until) = match d.time {
                None => (day_start(d.date), day_start(d.date.succ_opt()?)),
                Some(t) => {
                    let from = Utc.from_utc_datetime(&d.date.and_time(t));
                    (from, from + Duration::seconds(60))
                }
            };
            Some(When {
                at: from,
                from,
                until,
                literal: true,
                exact: false,
            })
        }
        Value::Function(f) => {
            let base = match f.offset {
                Some(Offset {
                    amount,
                    unit: OffsetUnit::Month,
                }) => shift_months(now, amount),
                _ => now,
            };
            let later = |t: DateTime<Utc>| match f.offset {
                Some(Offset {
                    amount,
                    unit: OffsetUnit::Day,
                }) => t + Duration::hours(24 * amount as i64),
                Some(Offset {
                    amount,
                    unit: OffsetUnit::Week,
                }) => t + Duration::hours(24 * 7 * amount as i64),
                _ => t,
            };
            let ms = Duration::milliseconds(1);
            let (at, span): (DateTime<Utc>, Option<fn(DateTime<Utc>) -> (DateTime<Utc>, DateTime<Utc>)>) =
                match f.kind {
                    DateFunctionKind::Now => (later(base), None),
                    DateFunctionKind::StartOfDay => (later(day_start(base.date_naive())), Some(day)),
                    DateFunctionKind::EndOfDay => (
                        later(day_start(base.date_naive()) + Duration::hours(24) - ms),
                        Some(day),
                    ),
                    DateFunctionKind::StartOfWeek => (later(week_start(base)), Some(week)),
                    DateFunctionKind::EndOfWeek => {
                        (later(week_start(base) + Duration::hours(24 * 7) - ms), Some(week))
                    }
                    DateFunctionKind::StartOfMonth => (later(month_start(base)), Some(month)),
                    DateFunctionKind::EndOfMonth => {
                        (later(shift_months(month_start(base), 1) - ms), Some(month))
                    }
                };
            let (from, until) = match span {
                Some(span) => span(at),
                None => (at, at + ms),
            };
            Some(When {
                at,
                from,
                until,
                literal: false,
                exact: span.is_none(),
            })
        }
        _ => None,
    }
}

fn day(t: DateTime<Utc>) -> (DateTime<Utc>, DateTime<Utc>) {
    let s = day_start(t.date_naive());
    (s, s + Duration::hours(24))
}

fn week(t: DateTime<Utc>) -> (DateTime<Utc>, DateTime<Utc>) {
    let s = week_start(t);
    (s, s + Duration::hours(24 * 7))
}

fn month(t: DateTime<Utc>) -> (DateTime<Utc>, DateTime<Utc>) {
    let s = month_start(t);
    (s, shift_months(s, 1))
}

fn plain(v: &Value) -> Option<String> {
    match v {
        Value::Text(t) => Some(t.value.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

fn same(a: &str, b: &str) -> bool {
    a.to_lowercase() == b.to_lowercase()
}

fn key_parts(k: &str) -> Option<(String, u64)> {
    let dash = k.rfind('-')?;
    let n: u64 = k[dash + 1..].parse().ok()?;
    if n == 0 || k[dash + 1..].starts_with('+') {
        return None;
    }
    Some((k[..dash].to_uppercase(), n))
}

fn eq(actual: &V, operand: &Value, now: DateTime<Utc>) -> bool {
    match actual {
        V::Missing => false,
        V::Str(s) => plain(operand).is_some_and(|o| same(s, &o)),
        V::Strs(items) => plain(operand).is_some_and(|o| items.iter().any(|s| same(s, &o))),
        V::Num(n) => plain(operand).and_then(|o| o.trim().parse::<i64>().ok()) == Some(*n),
        V::At(t) => match resolve(operand, now) {
            Some(w) if w.exact => *t == w.at,
            Some(w) => w.from <= *t && *t < w.until,
            None => false,
        },
    }
}

fn order(op: Operator, actual: &V, operand: &Value, now: DateTime<Utc>) -> bool {
    let test = |lhs: i128, rhs: i128| match op {
        Operator::Gt => lhs > rhs,
        Operator::Gte => lhs >= rhs,
        Operator::Lt => lhs < rhs,
        Operator::Lte => lhs <= rhs,
        _ => unreachable!(),
    };
    match actual {
        V::Num(n) => plain(operand)
            .and_then(|o| o.trim().parse::<i64>().ok())
            .is_some_and(|m| test(*n as i128, m as i128)),
        V::Str(k) => match (key_parts(k), plain(operand).as_deref().and_then(key_parts)) {
            (Some((p, a)), Some((q, b))) if p == q => test(a as i128, b as i128),
            _ => false,
        },
        V::At(t) => {
            let Some(w) = resolve(operand, now) else {
                return false;
            };
            let x = t.timestamp_millis() as i128;
            if w.literal {
                let (from, until) = (w.from.timestamp_millis() as i128, w.until.timestamp_millis() as i128);
                match op {
                    Operator::Gt => x >= until,
                    Operator::Gte => x >= from,
                    Operator::Lt => x < from,
                    Operator::Lte => x < until,
                    _ => unreachable!(),
                }
            } else {
                test(x, w.at.timestamp_millis() as i128)
            }
        }
        _ => false,
    }
}

fn holds(expr: &Expr, issue: &Json, now: DateTime<Utc>) -> bool {
    match expr {
        Expr::And(xs) => xs.iter().all(|x| holds(x, issue, now)),
        Expr::Or(xs) => xs.iter().any(|x| holds(x, issue, now)),
        Expr::Not(x) => !holds(x, issue, now),
        Expr::Clause(c) => {
            let actual = read(issue, c.field);
            let vals = c.values();
            let present = actual != V::Missing;
            match c.op {
                Operator::IsEmpty => !present,
                Operator::IsNotEmpty => present,
                Operator::Eq => eq(&actual, &vals[0], now),
                Operator::Neq => present && !eq(&actual, &vals[0], now),
                Operator::In => vals.iter().any(|v| eq(&actual, v, now)),
                Operator::NotIn => present && !vals.iter().any(|v| eq(&actual, v, now)),
                Operator::Contains | Operator::NotContains => {
                    let needle = plain(&vals[0]).unwrap_or_default().to_lowercase();
                    let found = match &actual {
                        V::Str(s) => s.to_lowercase().contains(&needle),
                        V::Strs(items) => items.iter().any(|s| s.to_lowercase().contains(&needle)),
                        _ => false,
                    };
                    present && (found == (c.op == Operator::Contains))
                }
                op => order(op, &actual, &vals[0], now),
            }
        }
    }
}

/// Keys of the issues `query` selects, checked one issue at a time.
///
/// The query must already be type-correct; ordering is ignored.
pub fn brute_force(query: &Query, issues: &[Issue], now: DateTime<Utc>) -> BTreeSet<String> {
    issues
        .iter()
        .map(to_jira_json)
        .filter(|j| holds(&query.root, j, now))
        .map(|j| j["key"].as_str().unwrap().to_string())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use jiragpt_core::fixture::Fixture;
    use jiragpt_core::jql::parse_jql;

    fn keys(jql: &str) -> BTreeSet<String> {
        let fx = Fixture::bundled();
        brute_force(&parse_jql(jql).unwrap(), &fx.issues, fx.clock)
    }

    #[test]
    fn counts_on_fixture() {
        assert_eq!(keys("status = Abierto").len(), 14);
        assert_eq!(keys("status = 'En Progreso' AND created = startOfMonth()").len(), 1);
        assert_eq!(keys("assignee is empty").len(), 4);
    }

    #[test]
    fn month_shift_clamps() {
        let t = Utc.with_ymd_and_hms(2023, 3, 31, 5, 0, 0).unwrap();
        assert_eq!(shift_months(t, -1), Utc.with_ymd_and_hms(2023, 2, 28, 5, 0, 0).unwrap());
        assert_eq!(shift_months(t, -15), Utc.with_ymd_and_hms(2021, 12, 31, 5, 0, 0).unwrap());
    }
}
