//! Recursive-descent parser for the equation language.
//!
//! ```text
//! equation = sum [ "=" zero ] ;
//! sum      = term { ("+" | "-") term } ;
//! term     = unary { ("*" | "/") unary | implicit } ;
//! implicit = power ;               (only directly after ")" and before "(" or a letter)
//! unary    = "-" unary | power ;
//! power    = primary [ "^" integer ] ;
//! primary  = number | "x" | "y" | "z" | parameter | "(" sum ")" ;
//! ```

use thiserror::Error;

use super::{Expr, Var};

/// Largest exponent accepted after `^`.
pub const MAX_EXPONENT: u32 = 64;

/// Syntax or semantic error with the byte offset it refers to.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message} at offset {offset}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

impl ParseError {
    fn new(offset: usize, message: impl Into<String>) -> Self {
        Self { offset, message: message.into() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Tok {
    Num { value: f64, integral: bool },
    Var(Var),
    Param(char),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Equals,
    Eof,
}

#[derive(Clone, Copy, Debug)]
struct Token {
    tok: Tok,
    start: usize,
}

fn describe(tok: Tok) -> String {
    match tok {
        Tok::Num { .. } => "number".into(),
        Tok::Var(v) => format!("'{}'", v.name()),
        Tok::Param(c) => format!("'{c}'"),
        Tok::Plus => "'+'".into(),
        Tok::Minus => "'-'".into(),
        Tok::Star => "'*'".into(),
        Tok::Slash => "'/'".into(),
        Tok::Caret => "'^'".into(),
        Tok::LParen => "'('".into(),
        Tok::RParen => "')'".into(),
        Tok::Equals => "'='".into(),
        Tok::Eof => "end of input".into(),
    }
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'=' => Tok::Equals,
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let mut integral = true;
                if i < bytes.len() && bytes[i] == b'.' {
                    integral = false;
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                let lit = &text[start..i];
                if lit == "." {
                    return Err(ParseError::new(start, "malformed number '.'"));
                }
                let value: f64 =
                    lit.parse().map_err(|_| ParseError::new(start, format!("malformed number '{lit}'")))?;
                if !value.is_finite() {
                    return Err(ParseError::new(start, "number out of range"));
                }
                out.push(Token { tok: Tok::Num { value, integral }, start });
                continue;
            }
            c if c.is_ascii_alphabetic() => {
                while i < bytes.len() && bytes[i].is_ascii_alphanumeric() {
                    i += 1;
                }
                let word = &text[start..i];
                let tok = match word {
                    "x" => Tok::Var(Var::X),
                    "y" => Tok::Var(Var::Y),
                    "z" => Tok::Var(Var::Z),
                    w if super::is_parameter_name(w) => Tok::Param(c as char),
                    w => {
                        return Err(ParseError::new(
                            start,
                            format!("unknown identifier '{w}' (parameters are single lowercase letters)"),
                        ))
                    }
                };
                out.push(Token { tok, start });
                continue;
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(ParseError::new(start, format!("unexpected character '{ch}'")));
            }
        };
        i += 1;
        out.push(Token { tok, start });
    }
    out.push(Token { tok: Tok::Eof, start: text.len() });
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Token {
        self.tokens[self.pos]
    }

    fn prev(&self) -> Option<Tok> {
        self.pos.checked_sub(1).map(|p| self.tokens[p].tok)
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos];
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek().tok {
                Tok::Plus => {
                    self.bump();
                    lhs = lhs + self.term()?;
                }
                Tok::Minus => {
                    self.bump();
                    lhs = lhs - self.term()?;
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek().tok {
                Tok::Star => {
                    self.bump();
                    lhs = lhs * self.unary()?;
                }
                Tok::Slash => {
                    self.bump();
                    lhs = lhs / self.unary()?;
                }
                Tok::LParen | Tok::Var(_) | Tok::Param(_) if self.prev() == Some(Tok::RParen) => {
                    lhs = lhs * self.power()?;
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek().tok == Tok::Minus {
            self.bump();
            return Ok(-self.unary()?);
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if self.peek().tok != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let t = self.bump();
        let exponent = match t.tok {
            Tok::Num { value, integral: true } => {
                if value > MAX_EXPONENT as f64 {
                    return Err(ParseError::new(
                        t.start,
                        format!("exponent {value} exceeds the maximum of {MAX_EXPONENT}"),
                    ));
                }
                value as u32
            }
            Tok::Num { .. } => return Err(ParseError::new(t.start, "exponent must be an integer")),
            Tok::Minus => return Err(ParseError::new(t.start, "exponent must be a non-negative integer")),
            Tok::Eof => return Err(ParseError::new(t.start, "expected exponent after '^'")),
            other => {
                return Err(ParseError::new(
                    t.start,
                    format!("exponent must be an integer literal, found {}", describe(other)),
                ))
            }
        };
        if self.peek().tok == Tok::Caret {
            return Err(ParseError::new(self.peek().start, "chained '^' needs parentheses"));
        }
        Ok(base.pow(exponent))
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let t = self.bump();
        match t.tok {
            Tok::Num { value, .. } => Ok(Expr::Const(value)),
            Tok::Var(v) => Ok(Expr::Var(v)),
            Tok::Param(c) => Ok(Expr::Param(c.to_string())),
            Tok::LParen => {
                if self.peek().tok == Tok::RParen {
                    return Err(ParseError::new(self.peek().start, "empty parentheses"));
                }
                let inner = self.sum()?;
                let close = self.peek();
                if close.tok != Tok::RParen {
                    return Err(ParseError::new(
                        close.start,
                        format!("expected ')' to close '(' at offset {}, found {}", t.start, describe(close.tok)),
                    ));
                }
                self.bump();
                Ok(inner)
            }
            Tok::Eof => {
                let msg = match self.prev_operator() {
                    Some(op) => format!("dangling operator {}", describe(op)),
                    None => "expected an operand".into(),
                };
                Err(ParseError::new(t.start, msg))
            }
            other => Err(ParseError::new(t.start, format!("expected an operand, found {}", describe(other)))),
        }
    }

    fn prev_operator(&self) -> Option<Tok> {
        match self.prev() {
            Some(op @ (Tok::Plus | Tok::Minus | Tok::Star | Tok::Slash | Tok::Caret | Tok::LParen)) => Some(op),
            _ => None,
        }
    }
}

pub(super) fn parse(text: &str) -> Result<Expr, ParseError> {
    let tokens = lex(text)?;
    if tokens.len() == 1 {
        return Err(ParseError::new(0, "empty equation"));
    }
    let mut p = Parser { tokens, pos: 0 };
    let expr = p.sum()?;
    let t = p.bump();
    match t.tok {
        Tok::Eof => Ok(expr),
        Tok::Equals => {
            let rhs = p.bump();
            match rhs.tok {
                Tok::Num { value, .. } if value == 0.0 => {}
                _ => return Err(ParseError::new(rhs.start, "only '=0' may follow the equation")),
            }
            let end = p.bump();
            if end.tok != Tok::Eof {
                return Err(ParseError::new(end.start, format!("unexpected {} after '=0'", describe(end.tok))));
            }
            Ok(expr)
        }
        Tok::RParen => Err(ParseError::new(t.start, "unmatched ')'")),
        other => Err(ParseError::new(t.start, format!("expected an operator, found {}", describe(other)))),
    }
}
