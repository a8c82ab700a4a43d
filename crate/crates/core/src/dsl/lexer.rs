use crate::model::SourceSpan;

use super::{ParseError, ParseErrorCode};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Str(String),
    Int(i64),
    Float(f64),
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Semi,
    Comma,
    Dot,
    At,
    Colon,
    Eq,
    Star,
    Arrow,
    DashArrow,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Str(s) => format!("string {s:?}"),
            Tok::Int(v) => format!("number {v}"),
            Tok::Float(v) => format!("number {v}"),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::At => "`@`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Star => "`*`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::DashArrow => "`-.->`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

/// Splits LF-normalised text into tokens. Lexical errors are collected and
/// the offending character skipped, so lexing always reaches the end.
pub(crate) fn lex(text: &str, errors: &mut Vec<ParseError>) -> Vec<Token> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0usize;
    let mut line = 1u32;
    let mut col = 1u32;

    while i < chars.len() {
        let c = chars[i];
        let start_line = line;
        let start_col = col;
        let span = |len: usize| SourceSpan::new(start_line, start_col, len as u32);

        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
                col += 1;
            }
            continue;
        }

        let single = match c {
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            ';' => Some(Tok::Semi),
            ',' => Some(Tok::Comma),
            '.' => Some(Tok::Dot),
            '@' => Some(Tok::At),
            ':' => Some(Tok::Colon),
            '=' => Some(Tok::Eq),
            '*' => Some(Tok::Star),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Token { tok, span: span(1) });
            i += 1;
            col += 1;
            continue;
        }

        if c == '-' {
            let rest: String = chars[i..chars.len().min(i + 4)].iter().collect();
            if rest.starts_with("-.->") {
                out.push(Token { tok: Tok::DashArrow, span: span(4) });
                i += 4;
                col += 4;
                continue;
            }
            if rest.starts_with("->") {
                out.push(Token { tok: Tok::Arrow, span: span(2) });
                i += 2;
                col += 2;
                continue;
            }
            if !chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()) {
                errors.push(ParseError::new(ParseErrorCode::UnexpectedToken, span(1), "stray `-`"));
                i += 1;
                col += 1;
                continue;
            }
        }

        if c.is_ascii_digit() || c == '-' {
            let start = i;
            i += 1;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let mut is_float = false;
            if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                is_float = true;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            let lit: String = chars[start..i].iter().collect();
            let len = i - start;
            col += len as u32;
            let tok = if is_float {
                lit.parse::<f64>().ok().map(Tok::Float)
            } else {
                lit.parse::<i64>()
                    .map(Tok::Int)
                    .ok()
                    .or_else(|| lit.parse::<f64>().ok().map(Tok::Float))
            };
            match tok {
                Some(tok) => out.push(Token { tok, span: span(len) }),
                None => errors.push(ParseError::new(
                    ParseErrorCode::UnexpectedToken,
                    span(len),
                    format!("malformed number `{lit}`"),
                )),
            }
            continue;
        }

        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            let len = i - start;
            col += len as u32;
            out.push(Token { tok: Tok::Ident(word), span: span(len) });
            continue;
        }

        if c == '"' {
            let start = i;
            i += 1;
            let mut value = String::new();
            let mut closed = false;
            while i < chars.len() {
                match chars[i] {
                    '"' => {
                        closed = true;
                        i += 1;
                        break;
                    }
                    '\n' => break,
                    '\\' if i + 1 < chars.len() => {
                        match chars[i + 1] {
                            'n' => value.push('\n'),
                            't' => value.push('\t'),
                            other => value.push(other),
                        }
                        i += 2;
                    }
                    other => {
                        value.push(other);
                        i += 1;
                    }
                }
            }
            let len = i - start;
            col += len as u32;
            if closed {
                out.push(Token { tok: Tok::Str(value), span: span(len) });
            } else {
                errors.push(ParseError::new(
                    ParseErrorCode::UnexpectedToken,
                    span(len),
                    "unterminated string",
                ));
            }
            continue;
        }

        errors.push(ParseError::new(
            ParseErrorCode::UnexpectedToken,
            span(1),
            format!("unexpected character `{c}`"),
        ));
        i += 1;
        col += 1;
    }

    out.push(Token { tok: Tok::Eof, span: SourceSpan::new(line, col, 0) });
    out
}
