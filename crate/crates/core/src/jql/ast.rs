use std::hash::{Hash, Hasher};

use chrono::{NaiveDate, NaiveTime};
use serde::{Serialize, Serializer};

use super::field::Field;

/// A parsed query: a boolean filter plus an optional ordering.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Query {
    pub root: Expr,
    pub order_by: Vec<OrderKey>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OrderKey {
    pub field: Field,
    pub direction: Direction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Asc,
    Desc,
}

/// Boolean structure of a filter.
///
/// `And`/`Or` always hold at least two children and never directly contain a
/// node of their own kind. Build them through [`Expr::and`] and [`Expr::or`]
/// to keep that shape.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    And(Vec<Expr>),
    Or(Vec<Expr>),
    Not(Box<Expr>),
    Clause(Clause),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Clause {
    pub field: Field,
    pub op: Operator,
    pub operand: Operand,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Operator {
    Eq,
    Neq,
    Gt,
    Gte,
    Lt,
    Lte,
    Contains,
    NotContains,
    In,
    NotIn,
    IsEmpty,
    IsNotEmpty,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Operand {
    None,
    Single(Value),
    List(Vec<Value>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Value {
    Text(Text),
    Number(i64),
    Function(DateFunction),
    Date(DateLiteral),
}

/// A string operand. The quote style records how it was written and is
/// ignored by equality and hashing.
#[derive(Debug, Clone, Eq)]
pub struct Text {
    pub value: String,
    pub quote: QuoteStyle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QuoteStyle {
    Bare,
    Single,
    Double,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DateFunction {
    pub kind: DateFunctionKind,
    pub offset: Option<Offset>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DateFunctionKind {
    StartOfMonth,
    EndOfMonth,
    StartOfWeek,
    EndOfWeek,
    StartOfDay,
    EndOfDay,
    Now,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Offset {
    pub amount: i32,
    pub unit: OffsetUnit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OffsetUnit {
    Day,
    Week,
    Month,
}

/// `yyyy-MM-dd`, optionally with `HH:mm`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DateLiteral {
    pub date: NaiveDate,
    pub time: Option<NaiveTime>,
}

impl Query {
    pub fn new(root: Expr) -> Self {
        Query {
            root,
            order_by: Vec::new(),
        }
    }

    pub fn ordered_by(mut self, field: Field, direction: Direction) -> Self {
        self.order_by.push(OrderKey { field, direction });
        self
    }

    /// Every clause in the tree, depth first.
    pub fn clauses(&self) -> Vec<&Clause> {
        let mut out = Vec::new();
        self.root.collect_clauses(&mut out);
        out
    }
}

impl Expr {
    /// Conjunction, flattening nested `And`s and collapsing singletons.
    ///
    /// Panics on an empty list.
    pub fn and(children: impl IntoIterator<Item = Expr>) -> Expr {
        Self::combine(children, true)
    }

    /// Disjunction, flattening nested `Or`s and collapsing singletons.
    ///
    /// Panics on an empty list.
    pub fn or(children: impl IntoIterator<Item = Expr>) -> Expr {
        Self::combine(children, false)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(inner: Expr) -> Expr {
        Expr::Not(Box::new(inner))
    }

    fn combine(children: impl IntoIterator<Item = Expr>, conj: bool) -> Expr {
        let mut flat = Vec::new();
        for child in children {
            match child {
                Expr::And(inner) if conj => flat.extend(inner),
                Expr::Or(inner) if !conj => flat.extend(inner),
                other => flat.push(other),
            }
        }
        assert!(!flat.is_empty(), "boolean combinator needs at least one child");
        if flat.len() == 1 {
            flat.pop().unwrap()
        } else if conj {
            Expr::And(flat)
        } else {
            Expr::Or(flat)
        }
    }

    fn collect_clauses<'a>(&'a self, out: &mut Vec<&'a Clause>) {
        match self {
            Expr::And(c) | Expr::Or(c) => c.iter().for_each(|e| e.collect_clauses(out)),
            Expr::Not(inner) => inner.collect_clauses(out),
            Expr::Clause(c) => out.push(c),
        }
    }
}

impl From<Clause> for Expr {
    fn from(c: Clause) -> Self {
        Expr::Clause(c)
    }
}

impl Clause {
    pub fn new(field: Field, op: Operator, operand: Operand) -> Self {
        Clause { field, op, operand }
    }

    pub fn eq(field: Field, value: impl Into<Value>) -> Self {
        Clause::new(field, Operator::Eq, Operand::Single(value.into()))
    }

    pub fn compare(field: Field, op: Operator, value: impl Into<Value>) -> Self {
        Clause::new(field, op, Operand::Single(value.into()))
    }

    pub fn is_empty(field: Field) -> Self {
        Clause::new(field, Operator::IsEmpty, Operand::None)
    }

    pub fn is_not_empty(field: Field) -> Self {
        Clause::new(field, Operator::IsNotEmpty, Operand::None)
    }

    pub fn within(field: Field, values: Vec<Value>) -> Self {
        Clause::new(field, Operator::In, Operand::List(values))
    }

    /// Whether the operand shape agrees with the operator.
    pub fn is_well_formed(&self) -> bool {
        match (self.op, &self.operand) {
            (Operator::IsEmpty | Operator::IsNotEmpty, Operand::None) => true,
            (Operator::In | Operator::NotIn, Operand::List(v)) => !v.is_empty(),
            (Operator::IsEmpty | Operator::IsNotEmpty | Operator::In | Operator::NotIn, _) => {
                false
            }
            (_, Operand::Single(_)) => true,
            _ => false,
        }
    }

    /// Operand values as a slice, whatever the arity.
    pub fn values(&self) -> &[Value] {
        match &self.operand {
            Operand::None => &[],
            Operand::Single(v) => std::slice::from_ref(v),
            Operand::List(v) => v,
        }
    }
}

impl Operator {
    pub fn symbol(self) -> &'static str {
        match self {
            Operator::Eq => "=",
            Operator::Neq => "!=",
            Operator::Gt => ">",
            Operator::Gte => ">=",
            Operator::Lt => "<",
            Operator::Lte => "<=",
            Operator::Contains => "~",
            Operator::NotContains => "!~",
            Operator::In => "IN",
            Operator::NotIn => "NOT IN",
            Operator::IsEmpty => "IS EMPTY",
            Operator::IsNotEmpty => "IS NOT EMPTY",
        }
    }
}

impl Text {
    pub fn new(value: impl Into<String>, quote: QuoteStyle) -> Self {
        Text {
            value: value.into(),
            quote,
        }
    }
}

impl PartialEq for Text {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value
    }
}

impl Hash for Text {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.value.hash(state);
    }
}

impl Value {
    pub fn text(value: impl Into<String>) -> Value {
        Value::Text(Text::new(value, QuoteStyle::Bare))
    }

    pub fn function(kind: DateFunctionKind) -> Value {
        Value::Function(DateFunction { kind, offset: None })
    }

    pub fn function_with_offset(kind: DateFunctionKind, amount: i32, unit: OffsetUnit) -> Value {
        Value::Function(DateFunction {
            kind,
            offset: Some(Offset { amount, unit }),
        })
    }

    pub fn date(y: i32, m: u32, d: u32) -> Value {
        Value::Date(DateLiteral {
            date: NaiveDate::from_ymd_opt(y, m, d).expect("valid calendar date"),
            time: None,
        })
    }

    /// The operand as a plain string, for comparison with enum-like fields.
    pub fn as_plain_text(&self) -> Option<String> {
        match self {
            Value::Text(t) => Some(t.value.clone()),
            Value::Number(n) => Some(n.to_string()),
            _ => None,
        }
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::text(s)
    }
}

impl From<i64> for Value {
    fn from(n: i64) -> Self {
        Value::Number(n)
    }
}

impl From<DateFunction> for Value {
    fn from(f: DateFunction) -> Self {
        Value::Function(f)
    }
}

impl DateFunctionKind {
    pub const ALL: [DateFunctionKind; 7] = [
        DateFunctionKind::StartOfMonth,
        DateFunctionKind::EndOfMonth,
        DateFunctionKind::StartOfWeek,
        DateFunctionKind::EndOfWeek,
        DateFunctionKind::StartOfDay,
        DateFunctionKind::EndOfDay,
        DateFunctionKind::Now,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DateFunctionKind::StartOfMonth => "startOfMonth",
            DateFunctionKind::EndOfMonth => "endOfMonth",
            DateFunctionKind::StartOfWeek => "startOfWeek",
            DateFunctionKind::EndOfWeek => "endOfWeek",
            DateFunctionKind::StartOfDay => "startOfDay",
            DateFunctionKind::EndOfDay => "endOfDay",
            DateFunctionKind::Now => "now",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|k| k.name().eq_ignore_ascii_case(name))
    }

    /// Unit assumed for an offset written without one, e.g. `startOfMonth(-1)`.
    pub fn natural_unit(self) -> OffsetUnit {
        match self {
            DateFunctionKind::StartOfMonth | DateFunctionKind::EndOfMonth => OffsetUnit::Month,
            DateFunctionKind::StartOfWeek | DateFunctionKind::EndOfWeek => OffsetUnit::Week,
            _ => OffsetUnit::Day,
        }
    }
}

impl OffsetUnit {
    pub fn suffix(self) -> char {
        match self {
            OffsetUnit::Day => 'd',
            OffsetUnit::Week => 'w',
            OffsetUnit::Month => 'M',
        }
    }
}

/// Queries travel through JSON payloads in their canonical text form.
impl Serialize for Query {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn status(v: &str) -> Expr {
        Clause::eq(Field::Status, v).into()
    }

    #[test]
    fn and_flattens_and_collapses() {
        let e = Expr::and([status("a"), Expr::and([status("b"), status("c")])]);
        assert_eq!(e, Expr::And(vec![status("a"), status("b"), status("c")]));
        assert_eq!(Expr::and([status("a")]), status("a"));
        let mixed = Expr::and([status("a"), Expr::or([status("b"), status("c")])]);
        assert!(matches!(&mixed, Expr::And(c) if matches!(c[1], Expr::Or(_))));
    }

    #[test]
    fn quote_style_is_not_semantic() {
        assert_eq!(
            Text::new("En Progreso", QuoteStyle::Single),
            Text::new("En Progreso", QuoteStyle::Double)
        );
    }

    #[test]
    fn arity_rules() {
        assert!(Clause::is_empty(Field::Assignee).is_well_formed());
        assert!(!Clause::new(Field::Status, Operator::In, Operand::List(vec![])).is_well_formed());
        assert!(!Clause::new(Field::Status, Operator::Eq, Operand::None).is_well_formed());
        assert!(Clause::within(Field::Status, vec!["a".into()]).is_well_formed());
    }
}
