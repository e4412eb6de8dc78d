//! Proptest strategies for queries and issue stores.

use chrono::{DateTime, Duration, NaiveDate, NaiveTime, TimeZone, Utc};
use jiragpt_core::issue::Issue;
use jiragpt_core::jql::{
    Clause, DateFunction, DateFunctionKind, DateLiteral, Direction, Expr, Field, Offset,
    OffsetUnit, Operand, Operator, OrderKey, Query, QuoteStyle, Text, Value,
};
use proptest::collection::vec;
use proptest::prelude::*;
use proptest::sample::select;

const OPERATORS: [Operator; 12] = [
    Operator::Eq,
    Operator::Neq,
    Operator::Gt,
    Operator::Gte,
    Operator::Lt,
    Operator::Lte,
    Operator::Contains,
    Operator::NotContains,
    Operator::In,
    Operator::NotIn,
    Operator::IsEmpty,
    Operator::IsNotEmpty,
];

fn quote() -> impl Strategy<Value = QuoteStyle> {
    select(vec![QuoteStyle::Bare, QuoteStyle::Single, QuoteStyle::Double])
}

fn offset() -> impl Strategy<Value = Option<Offset>> {
    proptest::option::of(
        (-60i32..60, select(vec![OffsetUnit::Day, OffsetUnit::Week, OffsetUnit::Month]))
            .prop_map(|(amount, unit)| Offset { amount, unit }),
    )
}

fn function() -> impl Strategy<Value = DateFunction> {
    (select(DateFunctionKind::ALL.to_vec()), offset()).prop_map(|(kind, offset)| DateFunction { kind, offset })
}

fn date_literal() -> impl Strategy<Value = DateLiteral> {
    (
        0i64..3000,
        proptest::option::of((0u32..24, 0u32..60)),
    )
        .prop_map(|(days, time)| DateLiteral {
            date: NaiveDate::from_ymd_opt(2022, 1, 1).unwrap() + Duration::days(days),
            time: time.map(|(h, m)| NaiveTime::from_hms_opt(h, m, 0).unwrap()),
        })
}

/// Strings made only of date characters could read back as a date literal.
fn date_like(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_digit() || matches!(c, '-' | ' ' | ':'))
}

fn text() -> impl Strategy<Value = Text> {
    (
        "[a-zA-Z0-9 ._\\-\"'\\\\áÉñ()=,!<>~\t]{0,14}".prop_filter("date-shaped", |s| !date_like(s)),
        quote(),
    )
        .prop_map(|(s, q)| Text::new(s, q))
}

/// Any syntactically valid value.
pub fn any_value() -> impl Strategy<Value = Value> {
    prop_oneof![
        4 => text().prop_map(Value::Text),
        1 => select(vec!["and", "OR", "empty", "null", "now", "startOfDay", "Order", "42", "-7", "GPT4-12"])
            .prop_map(Value::from),
        2 => any::<i64>().prop_map(Value::Number),
        2 => function().prop_map(Value::Function),
        2 => date_literal().prop_map(Value::Date),
    ]
}

fn any_clause() -> impl Strategy<Value = Clause> {
    (select(Field::ALL.to_vec()), select(OPERATORS.to_vec()), vec(any_value(), 1..4)).prop_map(
        |(field, op, mut values)| {
            let operand = match op {
                Operator::IsEmpty | Operator::IsNotEmpty => Operand::None,
                Operator::In | Operator::NotIn => Operand::List(values),
                _ => Operand::Single(values.swap_remove(0)),
            };
            Clause::new(field, op, operand)
        },
    )
}

fn tree(leaf: impl Strategy<Value = Clause> + 'static) -> impl Strategy<Value = Expr> {
    leaf.prop_map(Expr::Clause).prop_recursive(4, 24, 4, |inner| {
        prop_oneof![
            vec(inner.clone(), 2..4).prop_map(Expr::and),
            vec(inner.clone(), 2..4).prop_map(Expr::or),
            inner.prop_map(Expr::not),
        ]
    })
}

fn order_by() -> impl Strategy<Value = Vec<OrderKey>> {
    vec(
        (select(Field::ALL.to_vec()), select(vec![Direction::Asc, Direction::Desc]))
            .prop_map(|(field, direction)| OrderKey { field, direction }),
        0..3,
    )
}

/// Any well-formed AST, type-correct or not. For printer round-trips.
pub fn any_query() -> impl Strategy<Value = Query> {
    (tree(any_clause()), order_by()).prop_map(|(root, order_by)| Query { root, order_by })
}

const STATUSES: [&str; 9] = [
    "Abierto", "En Progreso", "Resuelto", "Validado", "Entregado", "Cerrado", "Reabierto", "abierto",
    "Open",
];
const USERS: [&str; 4] = ["joel.garcia", "maria.lopez", "ana.ruiz", "JOEL.GARCIA"];
const PRIORITIES: [&str; 6] = ["Highest", "High", "Medium", "Low", "Lowest", "Máxima"];
const TYPES: [&str; 3] = ["Tarea", "Error", "Historia"];
const PROJECTS: [&str; 3] = ["GPT4", "OTRO", "gpt4"];
const LABELS: [&str; 4] = ["backend", "frontend", "bloqueado", "urgente"];
const COMPONENTS: [&str; 3] = ["API", "Interfaz", "Base de datos"];
const VERSIONS: [&str; 3] = ["v1.0", "v1.1", "v2.0"];
const WORDS: [&str; 8] = ["error", "API", "informe", "usuario", "datos", "ñandú", "PDF", "x"];

fn pool(items: &'static [&'static str]) -> impl Strategy<Value = Value> + Clone {
    select(items.to_vec()).prop_map(Value::from)
}

fn pool_for(field: Field) -> BoxedStrategy<Value> {
    match field {
        Field::Status => pool(&STATUSES).boxed(),
        Field::Assignee | Field::Reporter | Field::Creator => pool(&USERS).boxed(),
        Field::Priority => pool(&PRIORITIES).boxed(),
        Field::IssueType => pool(&TYPES).boxed(),
        Field::Project => pool(&PROJECTS).boxed(),
        Field::Resolution => pool(&["Hecho", "Duplicado"]).boxed(),
        Field::Labels => pool(&LABELS).boxed(),
        Field::Components => pool(&COMPONENTS).boxed(),
        Field::FixVersions => pool(&VERSIONS).boxed(),
        Field::Key => (select(vec!["GPT4", "OTRO", "gpt4"]), 1u32..30)
            .prop_map(|(p, n)| Value::from(format!("{p}-{n}").as_str()))
            .boxed(),
        Field::Id => (10_000i64..10_060).prop_map(Value::Number).boxed(),
        Field::TimeEstimate | Field::TimeSpent => prop_oneof![
            (0i64..20).prop_map(|h| Value::Number(h * 1800)),
            (0i64..20).prop_map(|h| Value::from((h * 3600).to_string().as_str())),
        ]
        .boxed(),
        Field::Summary | Field::Description => pool(&WORDS).boxed(),
        _ => unreachable!("date fields are handled separately"),
    }
}

fn date_value(clock: DateTime<Utc>) -> BoxedStrategy<Value> {
    let today = clock.date_naive();
    prop_oneof![
        (-150i64..40, proptest::option::of((0u32..24, select(vec![0u32, 30])))).prop_map(
            move |(d, t)| Value::Date(DateLiteral {
                date: today + Duration::days(d),
                time: t.map(|(h, m)| NaiveTime::from_hms_opt(h, m, 0).unwrap()),
            })
        ),
        (
            select(DateFunctionKind::ALL.to_vec()),
            proptest::option::of((
                -4i32..3,
                select(vec![OffsetUnit::Day, OffsetUnit::Week, OffsetUnit::Month])
            ))
        )
            .prop_map(|(kind, o)| Value::Function(DateFunction {
                kind,
                offset: o.map(|(amount, unit)| Offset {
                    amount: if unit == OffsetUnit::Day { amount * 9 } else { amount },
                    unit
                }),
            })),
    ]
    .boxed()
}

fn is_date(field: Field) -> bool {
    matches!(
        field,
        Field::Created | Field::Updated | Field::ResolutionDate | Field::DueDate
    )
}

fn operators_for(field: Field) -> Vec<Operator> {
    use Operator::*;
    match field {
        Field::Summary | Field::Description => vec![Contains, NotContains, IsEmpty, IsNotEmpty],
        f if is_date(f) => vec![Eq, Neq, Gt, Gte, Lt, Lte, IsEmpty, IsNotEmpty],
        Field::Id | Field::TimeEstimate | Field::TimeSpent | Field::Key => {
            vec![Eq, Neq, Gt, Gte, Lt, Lte, In, NotIn, IsEmpty, IsNotEmpty]
        }
        _ => vec![Eq, Neq, In, NotIn, IsEmpty, IsNotEmpty],
    }
}

fn valid_clause(clock: DateTime<Utc>) -> impl Strategy<Value = Clause> {
    select(Field::ALL.to_vec())
        .prop_flat_map(move |field| {
            let values = if is_date(field) {
                date_value(clock)
            } else {
                pool_for(field)
            };
            (Just(field), select(operators_for(field)), vec(values, 1..4))
        })
        .prop_map(|(field, op, mut values)| {
            let operand = match op {
                Operator::IsEmpty | Operator::IsNotEmpty => Operand::None,
                Operator::In | Operator::NotIn => Operand::List(values),
                _ => Operand::Single(values.swap_remove(0)),
            };
            Clause::new(field, op, operand)
        })
}

/// Type-correct queries whose values are likely to hit a [`store`].
pub fn valid_query(clock: DateTime<Utc>) -> impl Strategy<Value = Query> {
    (tree(valid_clause(clock)), order_by()).prop_map(|(root, order_by)| Query { root, order_by })
}

/// A reference instant somewhere in 2023-2024, minute resolution.
pub fn clock() -> impl Strategy<Value = DateTime<Utc>> {
    (0i64..(731 * 24 * 60)).prop_map(|m| {
        Utc.with_ymd_and_hms(2023, 1, 1, 0, 0, 0).unwrap() + Duration::minutes(m)
    })
}

fn opt(items: &'static [&'static str]) -> impl Strategy<Value = Option<String>> {
    proptest::option::weighted(0.8, select(items.to_vec()).prop_map(str::to_string))
}

fn names(items: &'static [&'static str]) -> impl Strategy<Value = Vec<String>> {
    proptest::sample::subsequence(items.to_vec(), 0..=2)
        .prop_map(|v| v.into_iter().map(str::to_string).collect())
}

fn issue(clock: DateTime<Utc>) -> impl Strategy<Value = Issue> {
    let minutes = 150 * 24 * 60i64;
    (
        (
            select(vec!["GPT4", "OTRO"]),
            select(STATUSES[..7].to_vec()),
            opt(&USERS[..3]),
            select(USERS[..3].to_vec()),
            opt(&PRIORITIES[..5]),
            select(TYPES.to_vec()),
            select(WORDS.to_vec()),
            opt(&WORDS),
        ),
        (
            0..minutes,
            0..minutes,
            proptest::option::of(-40i64..60),
            names(&LABELS),
            names(&COMPONENTS),
            names(&VERSIONS),
            proptest::option::of(0i64..20),
            proptest::option::of(0i64..20),
        ),
    )
        .prop_map(
            move |(
                (project, status, assignee, reporter, priority, issuetype, word, description),
                (age, touched, due, labels, components, fix_versions, est, spent),
            )| {
                let created = clock - Duration::minutes(age);
                let updated = created + Duration::minutes(touched.min(age));
                let resolved = matches!(status, "Resuelto" | "Cerrado" | "Entregado" | "Validado");
                Issue {
                    key: project.to_string(),
                    id: String::new(),
                    summary: format!("Revisar {word}"),
                    description,
                    status: status.to_string(),
                    assignee,
                    reporter: reporter.to_string(),
                    creator: reporter.to_string(),
                    priority,
                    issuetype: issuetype.to_string(),
                    project: project.to_string(),
                    created,
                    updated,
                    resolutiondate: resolved.then_some(updated),
                    duedate: due.map(|d| clock.date_naive() + Duration::days(d)),
                    resolution: resolved.then(|| "Hecho".to_string()),
                    labels,
                    components,
                    fix_versions,
                    timeestimate: est.map(|h| h * 1800),
                    timespent: spent.map(|h| h * 3600),
                }
            },
        )
}

/// Up to `max` issues across two projects, numbered from 1 per project.
pub fn store(clock: DateTime<Utc>, max: usize) -> impl Strategy<Value = Vec<Issue>> {
    vec(issue(clock), 0..=max).prop_map(|mut issues| {
        let mut next = std::collections::BTreeMap::<String, u32>::new();
        for (i, issue) in issues.iter_mut().enumerate() {
            let n = next.entry(issue.project.clone()).or_insert(0);
            *n += 1;
            issue.key = format!("{}-{n}", issue.project);
            issue.id = (10_001 + i).to_string();
        }
        issues
    })
}

/// A clock, a store around it and a type-correct query.
pub fn scenario(max_issues: usize) -> impl Strategy<Value = (DateTime<Utc>, Vec<Issue>, Query)> {
    clock().prop_flat_map(move |c| (Just(c), store(c, max_issues), valid_query(c)))
}
