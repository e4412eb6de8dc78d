use std::fmt::{self, Display, Formatter, Write};

use super::ast::*;
use super::lexer::is_word_char;
use super::parser::{is_keyword, looks_numeric, parse_date_literal};

/// Canonical rendering. Equivalent to `q.to_string()`.
pub fn print_jql(q: &Query) -> String {
    q.to_string()
}

impl Display for Query {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.root)?;
        if !self.order_by.is_empty() {
            f.write_str(" ORDER BY ")?;
            for (i, key) in self.order_by.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                let dir = match key.direction {
                    Direction::Asc => "ASC",
                    Direction::Desc => "DESC",
                };
                write!(f, "{} {dir}", key.field)?;
            }
        }
        Ok(())
    }
}

impl Display for Expr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Expr::And(children) => join(f, children, " AND ", |c| !matches!(c, Expr::Clause(_) | Expr::Not(_))),
            Expr::Or(children) => join(f, children, " OR ", |c| !matches!(c, Expr::Clause(_) | Expr::Not(_))),
            Expr::Not(inner) => match inner.as_ref() {
                Expr::Clause(_) | Expr::Not(_) => write!(f, "NOT {inner}"),
                _ => write!(f, "NOT ({inner})"),
            },
            Expr::Clause(c) => write!(f, "{c}"),
        }
    }
}

fn join(
    f: &mut Formatter<'_>,
    children: &[Expr],
    sep: &str,
    needs_parens: impl Fn(&Expr) -> bool,
) -> fmt::Result {
    for (i, child) in children.iter().enumerate() {
        if i > 0 {
            f.write_str(sep)?;
        }
        if needs_parens(child) {
            write!(f, "({child})")?;
        } else {
            write!(f, "{child}")?;
        }
    }
    Ok(())
}

impl Display for Clause {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match &self.operand {
            Operand::None => write!(f, "{} {}", self.field, self.op.symbol()),
            Operand::Single(v) => write!(f, "{} {} {v}", self.field, self.op.symbol()),
            Operand::List(values) => {
                write!(f, "{} {} (", self.field, self.op.symbol())?;
                for (i, v) in values.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_char(')')
            }
        }
    }
}

impl Display for Value {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self {
            Value::Text(t) => write_text(f, &t.value),
            Value::Number(n) => write!(f, "{n}"),
            Value::Function(func) => write!(f, "{func}"),
            Value::Date(d) => match d.time {
                None => write!(f, "{}", d.date.format("%Y-%m-%d")),
                Some(t) => write!(f, "\"{} {}\"", d.date.format("%Y-%m-%d"), t.format("%H:%M")),
            },
        }
    }
}

impl Display for DateFunction {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        match self.offset {
            None => write!(f, "{}()", self.kind.name()),
            Some(o) => write!(f, "{}({:+}{})", self.kind.name(), o.amount, o.unit.suffix()),
        }
    }
}

/// A text value can go unquoted only if it reads back as the same text.
fn can_be_bare(s: &str) -> bool {
    !s.is_empty()
        && s.chars().all(is_word_char)
        && !is_keyword(s)
        && super::ast::DateFunctionKind::from_name(s).is_none()
        && !looks_numeric(s)
        && parse_date_literal(s).is_none()
}

fn write_text(f: &mut Formatter<'_>, s: &str) -> fmt::Result {
    if can_be_bare(s) {
        return f.write_str(s);
    }
    f.write_char('"')?;
    for c in s.chars() {
        match c {
            '"' => f.write_str("\\\"")?,
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            '\t' => f.write_str("\\t")?,
            other => f.write_char(other)?,
        }
    }
    f.write_char('"')
}
