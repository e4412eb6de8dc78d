use std::sync::OnceLock;

use chrono::{NaiveDate, NaiveTime};
use regex::Regex;

use super::ast::*;
use super::field::Field;
use super::lexer::{tokenize, Tok, Token};
use super::ParseError;

/// Parse a JQL string into a normalized [`Query`].
///
/// Keywords and field names are case-insensitive. Precedence is
/// `NOT` > `AND` > `OR`.
pub fn parse_jql(text: &str) -> Result<Query, ParseError> {
    let tokens = tokenize(text)?;
    let mut p = Parser { tokens, pos: 0 };
    p.query()
}

const KEYWORDS: &[&str] = &[
    "and", "or", "not", "in", "is", "empty", "null", "order", "by", "asc", "desc",
];

pub(crate) fn is_keyword(word: &str) -> bool {
    KEYWORDS.iter().any(|k| k.eq_ignore_ascii_case(word))
}

fn date_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^(\d{4})-(\d{2})-(\d{2})(?: (\d{2}):(\d{2}))?$").unwrap())
}

fn number_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^[+-]?\d+$").unwrap())
}

fn offset_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^([+-]?)(\d+)([dwM]?)$").unwrap())
}

/// Recognize `yyyy-MM-dd` / `yyyy-MM-dd HH:mm`.
pub(crate) fn parse_date_literal(s: &str) -> Option<DateLiteral> {
    let caps = date_re().captures(s)?;
    let n = |i: usize| caps.get(i).map(|m| m.as_str().parse::<u32>().unwrap());
    let date = NaiveDate::from_ymd_opt(n(1)? as i32, n(2)?, n(3)?)?;
    let time = match (n(4), n(5)) {
        (Some(h), Some(m)) => Some(NaiveTime::from_hms_opt(h, m, 0)?),
        _ => None,
    };
    Some(DateLiteral { date, time })
}

pub(crate) fn looks_numeric(s: &str) -> bool {
    number_re().is_match(s)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: &[&str]) -> Result<T, ParseError> {
        let t = self.peek();
        Err(ParseError::Syntax {
            offset: t.offset,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: t.tok.describe(),
        })
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Word(w) if w.eq_ignore_ascii_case(kw))
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.at_keyword(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_keyword(&mut self, kw: &str, expected: &[&str]) -> Result<(), ParseError> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            self.error(expected)
        }
    }

    fn query(&mut self) -> Result<Query, ParseError> {
        if self.at_keyword("order") || self.peek().tok == Tok::Eof {
            return self.error(&["field", "`(`", "NOT"]);
        }
        let root = self.or_expr()?;
        let mut order_by = Vec::new();
        if self.eat_keyword("order") {
            self.expect_keyword("by", &["BY"])?;
            loop {
                let field = self.field()?;
                let direction = if self.eat_keyword("desc") {
                    Direction::Desc
                } else {
                    self.eat_keyword("asc");
                    Direction::Asc
                };
                order_by.push(OrderKey { field, direction });
                if self.peek().tok == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        if self.peek().tok != Tok::Eof {
            return self.error(&["AND", "OR", "ORDER BY", "end of input"]);
        }
        Ok(Query { root, order_by })
    }

    fn or_expr(&mut self) -> Result<Expr, ParseError> {
        let mut items = vec![self.and_expr()?];
        while self.eat_keyword("or") {
            items.push(self.and_expr()?);
        }
        Ok(Expr::or(items))
    }

    fn and_expr(&mut self) -> Result<Expr, ParseError> {
        let mut items = vec![self.not_expr()?];
        while self.eat_keyword("and") {
            items.push(self.not_expr()?);
        }
        Ok(Expr::and(items))
    }

    fn not_expr(&mut self) -> Result<Expr, ParseError> {
        if self.eat_keyword("not") {
            return Ok(Expr::not(self.not_expr()?));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        if self.peek().tok == Tok::LParen {
            self.bump();
            let inner = self.or_expr()?;
            if self.peek().tok != Tok::RParen {
                return self.error(&["`)`", "AND", "OR"]);
            }
            self.bump();
            return Ok(inner);
        }
        self.clause().map(Expr::Clause)
    }

    fn field(&mut self) -> Result<Field, ParseError> {
        let t = self.peek().clone();
        match &t.tok {
            Tok::Word(w) if !is_keyword(w) => match Field::from_name(w) {
                Some(f) => {
                    self.bump();
                    Ok(f)
                }
                None => Err(ParseError::UnknownField {
                    offset: t.offset,
                    name: w.clone(),
                }),
            },
            _ => self.error(&["field"]),
        }
    }

    fn clause(&mut self) -> Result<Clause, ParseError> {
        let field = self.field()?;
        let t = self.peek().clone();
        let op = match &t.tok {
            Tok::Op(sym) => {
                self.bump();
                match *sym {
                    "=" => Operator::Eq,
                    "!=" => Operator::Neq,
                    ">" => Operator::Gt,
                    ">=" => Operator::Gte,
                    "<" => Operator::Lt,
                    "<=" => Operator::Lte,
                    "~" => Operator::Contains,
                    _ => Operator::NotContains,
                }
            }
            Tok::Word(w) if w.eq_ignore_ascii_case("in") => {
                self.bump();
                let values = self.value_list()?;
                return Ok(Clause::new(field, Operator::In, Operand::List(values)));
            }
            Tok::Word(w) if w.eq_ignore_ascii_case("not") => {
                self.bump();
                self.expect_keyword("in", &["IN"])?;
                let values = self.value_list()?;
                return Ok(Clause::new(field, Operator::NotIn, Operand::List(values)));
            }
            Tok::Word(w) if w.eq_ignore_ascii_case("is") => {
                self.bump();
                let negated = self.eat_keyword("not");
                if !(self.eat_keyword("empty") || self.eat_keyword("null")) {
                    return self.error(&["EMPTY", "NULL"]);
                }
                let op = if negated {
                    Operator::IsNotEmpty
                } else {
                    Operator::IsEmpty
                };
                return Ok(Clause::new(field, op, Operand::None));
            }
            _ => {
                return self.error(&[
                    "`=`", "`!=`", "`>`", "`>=`", "`<`", "`<=`", "`~`", "`!~`", "IN", "NOT IN",
                    "IS",
                ])
            }
        };
        // `field = EMPTY` / `field != EMPTY` are Jira spellings of IS [NOT] EMPTY.
        if matches!(op, Operator::Eq | Operator::Neq)
            && (self.at_keyword("empty") || self.at_keyword("null"))
        {
            self.bump();
            let op = if op == Operator::Eq {
                Operator::IsEmpty
            } else {
                Operator::IsNotEmpty
            };
            return Ok(Clause::new(field, op, Operand::None));
        }
        let value = self.value()?;
        Ok(Clause::new(field, op, Operand::Single(value)))
    }

    fn value_list(&mut self) -> Result<Vec<Value>, ParseError> {
        if self.peek().tok != Tok::LParen {
            return self.error(&["`(`"]);
        }
        self.bump();
        let mut values = vec![self.value()?];
        loop {
            match self.peek().tok {
                Tok::Comma => {
                    self.bump();
                    values.push(self.value()?);
                }
                Tok::RParen => {
                    self.bump();
                    return Ok(values);
                }
                _ => return self.error(&["`,`", "`)`"]),
            }
        }
    }

    fn value(&mut self) -> Result<Value, ParseError> {
        let t = self.peek().clone();
        match &t.tok {
            Tok::Quoted(s, style) => {
                self.bump();
                Ok(match parse_date_literal(s) {
                    Some(d) => Value::Date(d),
                    None => Value::Text(Text::new(s.clone(), *style)),
                })
            }
            Tok::Word(w) if !is_keyword(w) => {
                if *self.peek_at(1) == Tok::LParen {
                    return self.function(w, t.offset);
                }
                if DateFunctionKind::from_name(w).is_some() {
                    self.bump();
                    return self.error(&["`(`"]);
                }
                self.bump();
                if let Some(d) = parse_date_literal(w) {
                    return Ok(Value::Date(d));
                }
                if looks_numeric(w) {
                    if let Ok(n) = w.parse::<i64>() {
                        return Ok(Value::Number(n));
                    }
                }
                Ok(Value::Text(Text::new(w.clone(), QuoteStyle::Bare)))
            }
            _ => self.error(&["value"]),
        }
    }

    fn function(&mut self, name: &str, offset: usize) -> Result<Value, ParseError> {
        let kind = DateFunctionKind::from_name(name).ok_or_else(|| ParseError::UnknownFunction {
            offset,
            name: name.to_string(),
        })?;
        self.bump(); // name
        self.bump(); // (
        let offset_value = match self.peek().tok.clone() {
            Tok::RParen => None,
            Tok::Word(arg) | Tok::Quoted(arg, _) => {
                let caps = match offset_re().captures(arg.trim()) {
                    Some(c) => c,
                    None => return self.error(&["offset such as -1M, +7d or 2w"]),
                };
                let magnitude: i32 = match caps[2].parse() {
                    Ok(n) => n,
                    Err(_) => return self.error(&["offset within range"]),
                };
                let amount = if &caps[1] == "-" { -magnitude } else { magnitude };
                let unit = match &caps[3] {
                    "d" => OffsetUnit::Day,
                    "w" => OffsetUnit::Week,
                    "M" => OffsetUnit::Month,
                    _ => kind.natural_unit(),
                };
                self.bump();
                Some(Offset { amount, unit })
            }
            _ => return self.error(&["`)`", "offset"]),
        };
        if self.peek().tok != Tok::RParen {
            return self.error(&["`)`"]);
        }
        self.bump();
        Ok(Value::Function(DateFunction {
            kind,
            offset: offset_value,
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clause(field: Field, op: Operator, v: Value) -> Expr {
        Clause::compare(field, op, v).into()
    }

    #[test]
    fn block_three_example() {
        let q = parse_jql(r#"status = "En Progreso" AND project = GPT4"#).unwrap();
        assert_eq!(
            q.root,
            Expr::And(vec![
                Clause::eq(Field::Status, "En Progreso").into(),
                Clause::eq(Field::Project, "GPT4").into(),
            ])
        );
        assert!(q.order_by.is_empty());
    }

    #[test]
    fn single_clause() {
        let q = parse_jql("project = GPT4").unwrap();
        assert_eq!(q.root, Clause::eq(Field::Project, "GPT4").into());
    }

    #[test]
    fn is_not_empty_is_case_insensitive() {
        let q = parse_jql("assignee is not empty AND project = GPT4").unwrap();
        assert_eq!(
            q.root,
            Expr::And(vec![
                Clause::is_not_empty(Field::Assignee).into(),
                Clause::eq(Field::Project, "GPT4").into(),
            ])
        );
    }

    #[test]
    fn date_function_with_order_by() {
        let q = parse_jql("created = startOfMonth() ORDER BY created DESC").unwrap();
        let expected = Query::new(clause(
            Field::Created,
            Operator::Eq,
            Value::function(DateFunctionKind::StartOfMonth),
        ))
        .ordered_by(Field::Created, Direction::Desc);
        assert_eq!(q, expected);
    }

    #[test]
    fn precedence_not_and_or() {
        let q = parse_jql("status = A OR NOT status = B AND priority = High").unwrap();
        assert_eq!(
            q.root,
            Expr::or([
                Clause::eq(Field::Status, "A").into(),
                Expr::and([
                    Expr::not(Clause::eq(Field::Status, "B").into()),
                    Clause::eq(Field::Priority, "High").into(),
                ]),
            ])
        );
    }

    #[test]
    fn parentheses_override_and_flatten() {
        let q = parse_jql("(status = A OR status = B) AND (priority = High AND key = GPT4-1)")
            .unwrap();
        match q.root {
            Expr::And(children) => {
                assert_eq!(children.len(), 3);
                assert!(matches!(children[0], Expr::Or(_)));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn value_kinds() {
        let q = parse_jql(
            "timespent > 3600 AND created >= '2023-08-01' AND updated < \"2023-08-01 10:30\" AND labels in (a, \"b c\")",
        )
        .unwrap();
        let clauses = q.clauses();
        assert_eq!(clauses[0].values(), &[Value::Number(3600)]);
        assert_eq!(clauses[1].values(), &[Value::date(2023, 8, 1)]);
        match &clauses[2].values()[0] {
            Value::Date(d) => assert_eq!(d.time, NaiveTime::from_hms_opt(10, 30, 0)),
            other => panic!("{other:?}"),
        }
        assert_eq!(clauses[3].op, Operator::In);
        assert_eq!(clauses[3].values().len(), 2);
    }

    #[test]
    fn function_offsets() {
        let q = parse_jql("created >= startOfMonth(-1) AND updated > startOfDay(\"-7d\")").unwrap();
        let c = q.clauses();
        assert_eq!(
            c[0].values(),
            &[Value::function_with_offset(
                DateFunctionKind::StartOfMonth,
                -1,
                OffsetUnit::Month
            )]
        );
        assert_eq!(
            c[1].values(),
            &[Value::function_with_offset(
                DateFunctionKind::StartOfDay,
                -7,
                OffsetUnit::Day
            )]
        );
    }

    #[test]
    fn eq_empty_is_is_empty() {
        let q = parse_jql("assignee = EMPTY AND duedate != null").unwrap();
        let c = q.clauses();
        assert_eq!(c[0].op, Operator::IsEmpty);
        assert_eq!(c[1].op, Operator::IsNotEmpty);
    }

    #[test]
    fn malformed_operator() {
        let err = parse_jql(r#"status === "Abierto""#).unwrap_err();
        match err {
            ParseError::Syntax {
                offset, expected, ..
            } => {
                assert_eq!(offset, 8);
                assert!(expected.contains(&"value".to_string()));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_field_and_function() {
        assert!(matches!(
            parse_jql("sprint = 5"),
            Err(ParseError::UnknownField { offset: 0, ref name }) if name == "sprint"
        ));
        assert!(matches!(
            parse_jql("assignee = currentUser()"),
            Err(ParseError::UnknownFunction { offset: 11, ref name }) if name == "currentUser"
        ));
        // a known function name used without a call is rejected, not read as text
        assert!(matches!(
            parse_jql("created = startOfMonth"),
            Err(ParseError::Syntax { .. })
        ));
    }

    #[test]
    fn trailing_garbage_and_empty_input() {
        assert!(parse_jql("project = GPT4 project").is_err());
        assert!(parse_jql("").is_err());
        assert!(parse_jql("   ").is_err());
        assert!(parse_jql("ORDER BY created").is_err());
        assert!(parse_jql("status in ()").is_err());
        assert!(parse_jql("status = A AND").is_err());
        assert!(parse_jql("(status = A").is_err());
    }

    #[test]
    fn history_operators_are_rejected() {
        assert!(parse_jql("status was \"En Progreso\"").is_err());
        assert!(parse_jql("status changed to Cerrado").is_err());
    }

    #[test]
    fn order_by_defaults_to_ascending() {
        let q = parse_jql("project = GPT4 order by priority, created desc").unwrap();
        assert_eq!(
            q.order_by,
            vec![
                OrderKey {
                    field: Field::Priority,
                    direction: Direction::Asc
                },
                OrderKey {
                    field: Field::Created,
                    direction: Direction::Desc
                }
            ]
        );
    }
}
