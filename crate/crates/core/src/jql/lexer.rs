use super::ast::QuoteStyle;
use super::ParseError;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    LParen,
    RParen,
    Comma,
    /// `=`, `!=`, `>`, `>=`, `<`, `<=`, `~`, `!~`
    Op(&'static str),
    Word(String),
    Quoted(String, QuoteStyle),
    Eof,
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub offset: usize,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Op(o) => format!("`{o}`"),
            Tok::Word(w) => format!("`{w}`"),
            Tok::Quoted(q, _) => format!("string {q:?}"),
            Tok::Eof => "end of input".into(),
        }
    }
}

/// Characters allowed inside an unquoted word.
pub(crate) fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '.' | '-' | '+' | '@' | '/' | ':' | '#')
}

pub(crate) fn tokenize(input: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let mut chars = input.char_indices().peekable();
    while let Some(&(offset, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        let tok = match c {
            '(' => {
                chars.next();
                Tok::LParen
            }
            ')' => {
                chars.next();
                Tok::RParen
            }
            ',' => {
                chars.next();
                Tok::Comma
            }
            '=' => {
                chars.next();
                Tok::Op("=")
            }
            '~' => {
                chars.next();
                Tok::Op("~")
            }
            '!' | '<' | '>' => {
                chars.next();
                let followed_by = chars.peek().map(|&(_, c)| c);
                match (c, followed_by) {
                    ('!', Some('=')) => {
                        chars.next();
                        Tok::Op("!=")
                    }
                    ('!', Some('~')) => {
                        chars.next();
                        Tok::Op("!~")
                    }
                    ('!', _) => {
                        return Err(ParseError::Syntax {
                            offset,
                            expected: vec!["`!=`".into(), "`!~`".into()],
                            found: "`!`".into(),
                        })
                    }
                    ('<', Some('=')) => {
                        chars.next();
                        Tok::Op("<=")
                    }
                    ('>', Some('=')) => {
                        chars.next();
                        Tok::Op(">=")
                    }
                    ('<', _) => Tok::Op("<"),
                    _ => Tok::Op(">"),
                }
            }
            '"' | '\'' => {
                chars.next();
                let style = if c == '"' {
                    QuoteStyle::Double
                } else {
                    QuoteStyle::Single
                };
                let mut value = String::new();
                let mut closed = false;
                while let Some((_, ch)) = chars.next() {
                    if ch == c {
                        closed = true;
                        break;
                    }
                    if ch == '\\' {
                        match chars.next() {
                            Some((_, 'n')) => value.push('\n'),
                            Some((_, 't')) => value.push('\t'),
                            Some((_, other)) => value.push(other),
                            None => break,
                        }
                    } else {
                        value.push(ch);
                    }
                }
                if !closed {
                    return Err(ParseError::Syntax {
                        offset,
                        expected: vec![format!("closing {c}")],
                        found: "end of input".into(),
                    });
                }
                Tok::Quoted(value, style)
            }
            c if is_word_char(c) => {
                let mut word = String::new();
                while let Some(&(_, ch)) = chars.peek() {
                    if !is_word_char(ch) {
                        break;
                    }
                    word.push(ch);
                    chars.next();
                }
                Tok::Word(word)
            }
            other => {
                return Err(ParseError::Syntax {
                    offset,
                    expected: vec!["field, value or operator".into()],
                    found: format!("`{other}`"),
                })
            }
        };
        out.push(Token { tok, offset });
    }
    out.push(Token {
        tok: Tok::Eof,
        offset: input.len(),
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn operators_and_words() {
        assert_eq!(
            toks("status!=Abierto AND key>=GPT4-3"),
            vec![
                Tok::Word("status".into()),
                Tok::Op("!="),
                Tok::Word("Abierto".into()),
                Tok::Word("AND".into()),
                Tok::Word("key".into()),
                Tok::Op(">="),
                Tok::Word("GPT4-3".into()),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn quoted_strings_unescape() {
        assert_eq!(
            toks(r#"'En Progreso' "a \"b\"""#),
            vec![
                Tok::Quoted("En Progreso".into(), QuoteStyle::Single),
                Tok::Quoted("a \"b\"".into(), QuoteStyle::Double),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn offsets_are_bytes() {
        let t = tokenize("summary ~ \"ñu\" AND x").unwrap();
        assert_eq!(t[3].offset, 16);
    }

    #[test]
    fn unterminated_string_reports_start() {
        let err = tokenize("status = \"Abierto").unwrap_err();
        assert_eq!(err.offset(), 9);
    }
}
