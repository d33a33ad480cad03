use std::fmt;

use thiserror::Error;

use super::{BinOp, Node};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnexpectedEnd,
    UnexpectedChar(char),
    Expected(&'static str),
    InvalidNumber,
    VariableOutOfRange { index: usize, dimension: usize },
    NonIntegerExponent,
    NegativeExponent,
    TrailingInput,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::UnexpectedEnd => f.write_str("unexpected end of input"),
            ParseErrorKind::UnexpectedChar(c) => write!(f, "unexpected character {c:?}"),
            ParseErrorKind::Expected(what) => write!(f, "expected {what}"),
            ParseErrorKind::InvalidNumber => f.write_str("invalid number literal"),
            ParseErrorKind::VariableOutOfRange { index, dimension } => {
                write!(f, "variable x{index} out of range for dimension {dimension}")
            }
            ParseErrorKind::NonIntegerExponent => f.write_str("exponent must be an integer"),
            ParseErrorKind::NegativeExponent => f.write_str("exponent must be nonnegative"),
            ParseErrorKind::TrailingInput => f.write_str("unexpected trailing input"),
        }
    }
}

/// Syntax or validation error with the byte offset where it was detected.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at offset {offset}")]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

impl ParseError {
    pub(crate) fn new(offset: usize, kind: ParseErrorKind) -> Self {
        ParseError { offset, kind }
    }
}

type PResult<T> = Result<T, ParseError>;

pub(crate) struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    dimension: usize,
}

impl<'a> Parser<'a> {
    pub(crate) fn new(src: &'a str, dimension: usize) -> Self {
        Parser {
            src: src.as_bytes(),
            pos: 0,
            dimension,
        }
    }

    pub(crate) fn parse(mut self) -> PResult<Node> {
        let node = self.expr()?;
        self.skip_ws();
        if self.pos < self.src.len() {
            return Err(self.error(ParseErrorKind::TrailingInput));
        }
        Ok(node)
    }

    fn error(&self, kind: ParseErrorKind) -> ParseError {
        ParseError::new(self.pos, kind)
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8, what: &'static str) -> PResult<()> {
        if self.eat(c) {
            Ok(())
        } else if self.peek().is_none() {
            Err(self.error(ParseErrorKind::UnexpectedEnd))
        } else {
            Err(self.error(ParseErrorKind::Expected(what)))
        }
    }

    fn expr(&mut self) -> PResult<Node> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => BinOp::Add,
                Some(b'-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> PResult<Node> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => BinOp::Mul,
                Some(b'/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.factor()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn factor(&mut self) -> PResult<Node> {
        let base = self.atom()?;
        if !self.eat(b'^') {
            return Ok(base);
        }
        match self.peek() {
            None => Err(self.error(ParseErrorKind::UnexpectedEnd)),
            Some(b'-') => Err(self.error(ParseErrorKind::NegativeExponent)),
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                let (text, is_integer) = self.number_text()?;
                if !is_integer {
                    return Err(ParseError::new(start, ParseErrorKind::NonIntegerExponent));
                }
                let k: u32 = text
                    .parse()
                    .map_err(|_| ParseError::new(start, ParseErrorKind::InvalidNumber))?;
                Ok(Node::Pow(Box::new(base), k))
            }
            Some(_) => Err(self.error(ParseErrorKind::Expected("nonnegative integer exponent"))),
        }
    }

    fn atom(&mut self) -> PResult<Node> {
        let c = match self.peek() {
            None => return Err(self.error(ParseErrorKind::UnexpectedEnd)),
            Some(c) => c,
        };
        match c {
            b'-' => {
                self.pos += 1;
                Ok(Node::Neg(Box::new(self.atom()?)))
            }
            b'(' => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect(b')', "')'")?;
                Ok(inner)
            }
            b'0'..=b'9' => {
                let start = self.pos;
                let (text, _) = self.number_text()?;
                text.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .map(Node::Const)
                    .ok_or_else(|| ParseError::new(start, ParseErrorKind::InvalidNumber))
            }
            b'a'..=b'z' | b'A'..=b'Z' => self.identifier(),
            _ => Err(self.error(ParseErrorKind::UnexpectedChar(c as char))),
        }
    }

    fn identifier(&mut self) -> PResult<Node> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphabetic() {
            self.pos += 1;
        }
        let name = &self.src[start..self.pos];
        match name {
            b"x" => self.variable(start),
            b"abs" => {
                self.expect(b'(', "'(' after abs")?;
                let inner = self.expr()?;
                self.expect(b')', "')'")?;
                Ok(Node::Abs(Box::new(inner)))
            }
            b"min" | b"max" => {
                self.expect(b'(', "'(' after min/max")?;
                let mut args = vec![self.expr()?];
                while self.eat(b',') {
                    args.push(self.expr()?);
                }
                if args.len() < 2 {
                    return Err(if self.peek().is_none() {
                        self.error(ParseErrorKind::UnexpectedEnd)
                    } else {
                        self.error(ParseErrorKind::Expected("',' (min/max take two or more arguments)"))
                    });
                }
                self.expect(b')', "')'")?;
                Ok(if name == b"min" { Node::Min(args) } else { Node::Max(args) })
            }
            _ => Err(ParseError::new(start, ParseErrorKind::Expected("x<index>, abs, min or max"))),
        }
    }

    fn variable(&mut self, start: usize) -> PResult<Node> {
        let digits_start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if digits_start == self.pos {
            return Err(if self.pos >= self.src.len() {
                self.error(ParseErrorKind::UnexpectedEnd)
            } else {
                self.error(ParseErrorKind::Expected("variable index"))
            });
        }
        let text = std::str::from_utf8(&self.src[digits_start..self.pos]).expect("ascii digits");
        let index: usize = text.parse().unwrap_or(usize::MAX);
        if index == 0 || index > self.dimension {
            return Err(ParseError::new(
                start,
                ParseErrorKind::VariableOutOfRange {
                    index,
                    dimension: self.dimension,
                },
            ));
        }
        Ok(Node::Var(index - 1))
    }

    /// Scans `digits ('.' digits*)? ([eE] [+-]? digits)?`; reports whether
    /// the literal is a plain integer.
    fn number_text(&mut self) -> PResult<(&'a str, bool)> {
        let src = self.src;
        let start = self.pos;
        let digits = |p: &mut usize| {
            let s = *p;
            while *p < src.len() && src[*p].is_ascii_digit() {
                *p += 1;
            }
            *p - s
        };
        let mut p = self.pos;
        digits(&mut p);
        let mut is_integer = true;
        if p < src.len() && src[p] == b'.' {
            p += 1;
            digits(&mut p);
            is_integer = false;
        }
        if p < src.len() && (src[p] == b'e' || src[p] == b'E') {
            let mut q = p + 1;
            if q < src.len() && (src[q] == b'+' || src[q] == b'-') {
                q += 1;
            }
            if digits(&mut q) == 0 {
                self.pos = q;
                return Err(self.error(ParseErrorKind::InvalidNumber));
            }
            p = q;
            is_integer = false;
        }
        self.pos = p;
        let text = std::str::from_utf8(&src[start..p]).expect("ascii number");
        Ok((text, is_integer))
    }
}
