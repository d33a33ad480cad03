//! A small arithmetic expression language for IVF endpoint functions.
//!
//! Grammar (whitespace insensitive):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := atom ('^' uint)?
//! atom   := number | 'x' uint | '(' expr ')' | '-' atom
//!         | 'abs(' expr ')' | ('min' | 'max') '(' expr (',' expr)+ ')'
//! ```
//!
//! Variables are 1-based (`x1 .. xn`). A leading minus belongs to the atom,
//! so `-x1^2` reads as `(-x1)^2`; write `0 - x1^2` or `-(x1^2)` for the
//! negated square.

mod parser;

use std::fmt;

use crate::error::{Error, Result};

pub use parser::{ParseError, ParseErrorKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }
}

/// Expression tree. Variable indices are 0-based internally.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    Var(usize),
    Neg(Box<Node>),
    Abs(Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    Pow(Box<Node>, u32),
    Min(Vec<Node>),
    Max(Vec<Node>),
}

impl Node {
    fn eval(&self, x: &[f64]) -> Result<f64> {
        Ok(match self {
            Node::Const(c) => *c,
            Node::Var(i) => x[*i],
            Node::Neg(a) => -a.eval(x)?,
            Node::Abs(a) => a.eval(x)?.abs(),
            Node::Binary(op, a, b) => {
                let (a, b) = (a.eval(x)?, b.eval(x)?);
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(Error::DivisionByZero);
                        }
                        a / b
                    }
                }
            }
            Node::Pow(a, k) => a.eval(x)?.powi(*k as i32),
            Node::Min(args) => fold_args(args, x, f64::min)?,
            Node::Max(args) => fold_args(args, x, f64::max)?,
        })
    }

    fn max_var(&self) -> Option<usize> {
        match self {
            Node::Const(_) => None,
            Node::Var(i) => Some(*i),
            Node::Neg(a) | Node::Abs(a) | Node::Pow(a, _) => a.max_var(),
            Node::Binary(_, a, b) => a.max_var().max(b.max_var()),
            Node::Min(args) | Node::Max(args) => args.iter().filter_map(Node::max_var).max(),
        }
    }
}

fn fold_args(args: &[Node], x: &[f64], f: fn(f64, f64) -> f64) -> Result<f64> {
    let mut acc = args[0].eval(x)?;
    for a in &args[1..] {
        acc = f(acc, a.eval(x)?);
    }
    Ok(acc)
}

/// Fully parenthesized form that reparses to the same tree.
impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Const(c) => write!(f, "{c}"),
            Node::Var(i) => write!(f, "x{}", i + 1),
            Node::Neg(a) => write!(f, "-({a})"),
            Node::Abs(a) => write!(f, "abs({a})"),
            Node::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Node::Pow(a, k) => write!(f, "({a})^{k}"),
            Node::Min(args) | Node::Max(args) => {
                f.write_str(if matches!(self, Node::Min(_)) { "min(" } else { "max(" })?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// A parsed expression bound to a declared dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    root: Node,
    dimension: usize,
}

impl Expression {
    /// Wraps a tree, checking that every variable fits the dimension.
    pub fn from_node(root: Node, dimension: usize) -> Result<Self> {
        if let Some(i) = root.max_var() {
            if i >= dimension {
                return Err(ParseError::new(0, ParseErrorKind::VariableOutOfRange {
                    index: i + 1,
                    dimension,
                })
                .into());
            }
        }
        Ok(Expression { root, dimension })
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn eval(&self, point: &[f64]) -> Result<f64> {
        if point.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                found: point.len(),
            });
        }
        self.root.eval(point)
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

pub fn parse(source: &str, dimension: usize) -> Result<Expression> {
    if dimension == 0 {
        return Err(Error::InvalidParameter("dimension must be positive".into()));
    }
    let root = parser::Parser::new(source, dimension).parse()?;
    Ok(Expression { root, dimension })
}

pub fn eval(ast: &Expression, point: &[f64]) -> Result<f64> {
    ast.eval(point)
}
