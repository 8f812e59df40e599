use std::sync::Arc;

use crate::diag::{Diagnostic, Pos, SourceSpan};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Int(u64),
    Str(String),
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    LParen,
    RParen,
    Comma,
    Eq,
    Colon,
    Slash,
    Star,
    DotDot,
    Arrow,
    Squiggle,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(n) => format!("integer `{n}`"),
            Tok::Str(_) => "string".to_string(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Star => "`*`".into(),
            Tok::DotDot => "`..`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Squiggle => "`~>`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

pub(crate) fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

pub(crate) fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '@'
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    pos: Pos,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.col = 1;
        } else {
            self.pos.col += 1;
        }
        Some(c)
    }
}

pub(crate) fn tokenize(file: &Arc<str>, text: &str) -> (Vec<Token>, Vec<Diagnostic>) {
    let mut cur = Cursor {
        chars: text.chars().peekable(),
        pos: Pos::START,
    };
    let mut tokens = Vec::new();
    let mut diags = Vec::new();
    let span = |a: Pos, b: Pos| SourceSpan::new(file.clone(), a, b);

    while let Some(c) = cur.peek() {
        let start = cur.pos;
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if c == '#' {
            while let Some(c) = cur.peek() {
                if c == '\n' {
                    break;
                }
                cur.bump();
            }
            continue;
        }
        let tok = if is_ident_start(c) {
            let mut s = String::new();
            while let Some(c) = cur.peek().filter(|&c| is_ident_continue(c)) {
                s.push(c);
                cur.bump();
            }
            Tok::Ident(s)
        } else if c.is_ascii_digit() {
            let mut value: Option<u64> = Some(0);
            while let Some(d) = cur.peek().and_then(|c| c.to_digit(10)) {
                value = value.and_then(|v| v.checked_mul(10)).and_then(|v| v.checked_add(d as u64));
                cur.bump();
            }
            match value {
                Some(v) => Tok::Int(v),
                None => {
                    diags.push(Diagnostic::error("L002", "integer literal too large", Some(span(start, cur.pos))));
                    Tok::Int(u64::MAX)
                }
            }
        } else if c == '"' {
            cur.bump();
            let mut s = String::new();
            let mut closed = false;
            while let Some(c) = cur.peek() {
                if c == '\n' {
                    break;
                }
                cur.bump();
                match c {
                    '"' => {
                        closed = true;
                        break;
                    }
                    '\\' => match cur.peek() {
                        Some('"') | Some('\\') => s.push(cur.bump().unwrap_or('\\')),
                        Some('n') => {
                            cur.bump();
                            s.push('\n');
                        }
                        _ => s.push('\\'),
                    },
                    c => s.push(c),
                }
            }
            if !closed {
                diags.push(Diagnostic::error("L003", "unterminated string literal", Some(span(start, cur.pos))));
            }
            Tok::Str(s)
        } else {
            cur.bump();
            match c {
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                ',' => Tok::Comma,
                '=' => Tok::Eq,
                ':' => Tok::Colon,
                '/' => Tok::Slash,
                '*' => Tok::Star,
                '.' if cur.peek() == Some('.') => {
                    cur.bump();
                    Tok::DotDot
                }
                '-' if cur.peek() == Some('>') => {
                    cur.bump();
                    Tok::Arrow
                }
                '~' if cur.peek() == Some('>') => {
                    cur.bump();
                    Tok::Squiggle
                }
                other => {
                    diags.push(Diagnostic::error(
                        "L001",
                        format!("unexpected character {other:?}"),
                        Some(span(start, cur.pos)),
                    ));
                    continue;
                }
            }
        };
        tokens.push(Token {
            tok,
            span: span(start, cur.pos),
        });
    }
    tokens.push(Token {
        tok: Tok::Eof,
        span: span(cur.pos, cur.pos),
    });
    (tokens, diags)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        let (t, d) = tokenize(&Arc::from("t"), s);
        assert!(d.is_empty(), "{d:?}");
        t.into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn arrows_and_labels() {
        assert_eq!(
            toks("P[1..10/rand] ~> Q # comment\n->"),
            vec![
                Tok::Ident("P".into()),
                Tok::LBracket,
                Tok::Int(1),
                Tok::DotDot,
                Tok::Int(10),
                Tok::Slash,
                Tok::Ident("rand".into()),
                Tok::RBracket,
                Tok::Squiggle,
                Tok::Ident("Q".into()),
                Tok::Arrow,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn expanded_ids_lex_as_one_ident() {
        assert_eq!(toks("E@P_0_1"), vec![Tok::Ident("E@P_0_1".into()), Tok::Eof]);
    }

    #[test]
    fn bad_characters_are_reported_and_skipped() {
        let (t, d) = tokenize(&Arc::from("t"), "a $ b");
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].code, "L001");
        assert_eq!(d[0].span.as_ref().unwrap().start, Pos { line: 1, col: 3 });
        assert_eq!(t.len(), 3);
    }

    #[test]
    fn overflowing_integer() {
        let (_, d) = tokenize(&Arc::from("t"), "99999999999999999999999");
        assert_eq!(d[0].code, "L002");
    }

    #[test]
    fn string_escapes() {
        assert_eq!(toks(r#""a\"b""#), vec![Tok::Str("a\"b".into()), Tok::Eof]);
    }
}
