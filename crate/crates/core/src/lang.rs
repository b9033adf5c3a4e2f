//! Program representation: AST, text grammar, printer, evaluator and size
//! measures.
//!
//! Grammar (whitespace insignificant):
//!
//! ```text
//! expr  := IDENT | IDENT '(' expr ( ',' expr )? ')'
//! IDENT := [A-Za-z_][A-Za-z0-9_]*
//! ```
//!
//! Identifiers resolve, in order, to a primitive (long name or alias), an
//! operator (long name or alias), a step reference `step_K` (K ≥ 1), or a
//! helper name. Helper names are not checked at parse time.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::grid::{BinaryOp, Canvas, Operator, Shape, UnaryOp};
use crate::library::{Library, Origin};

const MAX_NESTING: usize = 512;
const STEP_PREFIX: &str = "step_";

/// A program.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Primitive(Shape),
    Helper(String),
    /// 1-based reference to an earlier step of a session trial.
    Step(usize),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("`{name}` at byte {offset} takes {expected} argument(s), found {found}")]
    Arity {
        name: String,
        offset: usize,
        expected: usize,
        found: usize,
    },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unknown helper `{0}`")]
    UnknownHelper(String),
    #[error("step_{index} does not refer to an earlier step (only {available} available)")]
    InvalidStep { index: usize, available: usize },
}

/// Size measures of a program.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ExprMeasures {
    /// Operators plus leaves.
    pub node_count: usize,
    /// Primitive, helper and step leaves, each counted once.
    pub leaf_count: usize,
    pub depth: usize,
}

impl Expr {
    pub fn primitive(shape: Shape) -> Self {
        Expr::Primitive(shape)
    }

    pub fn helper(name: impl Into<String>) -> Self {
        Expr::Helper(name.into())
    }

    pub fn unary(op: UnaryOp, child: Expr) -> Self {
        Expr::Unary(op, Box::new(child))
    }

    pub fn binary(op: BinaryOp, left: Expr, right: Expr) -> Self {
        Expr::Binary(op, Box::new(left), Box::new(right))
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Expr::Primitive(_) | Expr::Helper(_) | Expr::Step(_))
    }

    pub fn measures(&self) -> ExprMeasures {
        match self {
            Expr::Primitive(_) | Expr::Helper(_) | Expr::Step(_) => ExprMeasures {
                node_count: 1,
                leaf_count: 1,
                depth: 1,
            },
            Expr::Unary(_, child) => {
                let m = child.measures();
                ExprMeasures {
                    node_count: m.node_count + 1,
                    leaf_count: m.leaf_count,
                    depth: m.depth + 1,
                }
            }
            Expr::Binary(_, l, r) => {
                let (a, b) = (l.measures(), r.measures());
                ExprMeasures {
                    node_count: a.node_count + b.node_count + 1,
                    leaf_count: a.leaf_count + b.leaf_count,
                    depth: a.depth.max(b.depth) + 1,
                }
            }
        }
    }

    /// Leaf count with helper references replaced by the programs they were
    /// built from, recursively. Helpers without a recorded program count as
    /// one leaf.
    pub fn expanded_leaf_count(&self, lib: &Library) -> usize {
        match self {
            Expr::Primitive(_) | Expr::Step(_) => 1,
            Expr::Helper(name) => match lib.get(name).map(|e| &e.origin) {
                Some(Origin::Program(p)) => p.expanded_leaf_count(lib),
                _ => 1,
            },
            Expr::Unary(_, c) => c.expanded_leaf_count(lib),
            Expr::Binary(_, l, r) => l.expanded_leaf_count(lib) + r.expanded_leaf_count(lib),
        }
    }

    /// Visits every leaf left to right.
    pub fn for_each_leaf<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        match self {
            Expr::Unary(_, c) => c.for_each_leaf(f),
            Expr::Binary(_, l, r) => {
                l.for_each_leaf(f);
                r.for_each_leaf(f);
            }
            leaf => f(leaf),
        }
    }

    /// Helper names referenced by this program, in leaf order, with repeats.
    pub fn helper_refs(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.for_each_leaf(&mut |leaf| {
            if let Expr::Helper(name) = leaf {
                out.push(name.as_str());
            }
        });
        out
    }

    /// Step indices referenced by this program, in leaf order, with repeats.
    pub fn step_refs(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.for_each_leaf(&mut |leaf| {
            if let Expr::Step(k) = leaf {
                out.push(*k);
            }
        });
        out
    }

    /// Replaces every `step_K` with the K-th program of `steps` (1-based).
    /// `steps` holds the already-resolved programs of the preceding steps.
    pub fn inline_steps(&self, steps: &[Expr]) -> Result<Expr, EvalError> {
        Ok(match self {
            Expr::Step(k) => {
                if *k == 0 || *k > steps.len() {
                    return Err(EvalError::InvalidStep {
                        index: *k,
                        available: steps.len(),
                    });
                }
                steps[k - 1].clone()
            }
            Expr::Unary(op, c) => Expr::unary(*op, c.inline_steps(steps)?),
            Expr::Binary(op, l, r) => {
                Expr::binary(*op, l.inline_steps(steps)?, r.inline_steps(steps)?)
            }
            leaf => leaf.clone(),
        })
    }
}

/// Evaluates a step-free program against `lib`.
pub fn evaluate(expr: &Expr, lib: &Library) -> Result<Canvas, EvalError> {
    evaluate_with_steps(expr, lib, &[])
}

/// Evaluates a program whose `step_K` leaves denote the frozen canvases of
/// earlier steps (`steps[K - 1]`).
pub fn evaluate_with_steps(
    expr: &Expr,
    lib: &Library,
    steps: &[Canvas],
) -> Result<Canvas, EvalError> {
    Ok(match expr {
        Expr::Primitive(shape) => lib.primitive(*shape),
        Expr::Helper(name) => {
            lib.get(name)
                .ok_or_else(|| EvalError::UnknownHelper(name.clone()))?
                .canvas
        }
        Expr::Step(k) => {
            if *k == 0 || *k > steps.len() {
                return Err(EvalError::InvalidStep {
                    index: *k,
                    available: steps.len(),
                });
            }
            steps[k - 1]
        }
        Expr::Unary(op, c) => evaluate_with_steps(c, lib, steps)?.apply_unary(*op),
        Expr::Binary(op, l, r) => {
            let a = evaluate_with_steps(l, lib, steps)?;
            let b = evaluate_with_steps(r, lib, steps)?;
            a.apply_binary(*op, b)
        }
    })
}

/// True for names the grammar reserves: primitives, operators and `step_*`.
pub fn is_reserved(name: &str) -> bool {
    Shape::from_name(name).is_some()
        || Operator::from_name(name).is_some()
        || name.starts_with(STEP_PREFIX)
}

/// True for strings matching the identifier lexeme.
pub fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser { src: text, pos: 0 };
    let expr = p.expr(0)?;
    p.skip_ws();
    if p.pos != text.len() {
        return Err(p.syntax("unexpected trailing input"));
    }
    Ok(expr)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

enum Head {
    Shape(Shape),
    Op(Operator),
    Step(usize),
    Helper(String),
}

impl<'a> Parser<'a> {
    fn syntax(&self, message: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        let rest = &self.src[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn peek(&self) -> Option<u8> {
        self.src.as_bytes().get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> bool {
        self.skip_ws();
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<(usize, &'a str), ParseError> {
        self.skip_ws();
        let start = self.pos;
        let bytes = self.src.as_bytes();
        match bytes.get(start) {
            Some(b) if b.is_ascii_alphabetic() || *b == b'_' => {}
            Some(_) => return Err(self.syntax("expected identifier")),
            None => return Err(self.syntax("unexpected end of input, expected identifier")),
        }
        let mut end = start + 1;
        while end < bytes.len() && (bytes[end].is_ascii_alphanumeric() || bytes[end] == b'_') {
            end += 1;
        }
        self.pos = end;
        Ok((start, &self.src[start..end]))
    }

    fn classify(name: &str, offset: usize) -> Result<Head, ParseError> {
        if let Some(shape) = Shape::from_name(name) {
            return Ok(Head::Shape(shape));
        }
        if let Some(op) = Operator::from_name(name) {
            return Ok(Head::Op(op));
        }
        if let Some(digits) = name.strip_prefix(STEP_PREFIX) {
            return match digits.parse::<usize>() {
                Ok(k) if k >= 1 && !digits.starts_with('0') => Ok(Head::Step(k)),
                _ => Err(ParseError::UnknownIdentifier {
                    name: name.to_string(),
                    offset,
                }),
            };
        }
        Ok(Head::Helper(name.to_string()))
    }

    fn expr(&mut self, nesting: usize) -> Result<Expr, ParseError> {
        if nesting > MAX_NESTING {
            return Err(self.syntax("program nested too deeply"));
        }
        let (offset, name) = self.ident()?;
        let head = Self::classify(name, offset)?;
        let mut args = Vec::new();
        if self.eat(b'(') {
            args.push(self.expr(nesting + 1)?);
            while self.eat(b',') {
                args.push(self.expr(nesting + 1)?);
            }
            if !self.eat(b')') {
                return Err(self.syntax("expected `,` or `)`"));
            }
        }
        let arity_error = |expected: usize, found: usize| ParseError::Arity {
            name: name.to_string(),
            offset,
            expected,
            found,
        };
        match head {
            Head::Op(op) if args.len() != op.arity() => Err(arity_error(op.arity(), args.len())),
            Head::Op(Operator::Unary(op)) => Ok(Expr::unary(op, args.pop().unwrap())),
            Head::Op(Operator::Binary(op)) => {
                let right = args.pop().unwrap();
                let left = args.pop().unwrap();
                Ok(Expr::binary(op, left, right))
            }
            Head::Helper(_) if !args.is_empty() => Err(ParseError::UnknownIdentifier {
                name: name.to_string(),
                offset,
            }),
            _ if !args.is_empty() => Err(arity_error(0, args.len())),
            Head::Shape(shape) => Ok(Expr::Primitive(shape)),
            Head::Step(k) => Ok(Expr::Step(k)),
            Head::Helper(name) => Ok(Expr::Helper(name)),
        }
    }
}

impl fmt::Display for Expr {
    /// Canonical text: short aliases, no whitespace.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Primitive(shape) => f.write_str(shape.alias()),
            Expr::Helper(name) => f.write_str(name),
            Expr::Step(k) => write!(f, "{STEP_PREFIX}{k}"),
            Expr::Unary(op, c) => write!(f, "{}({c})", op.alias()),
            Expr::Binary(op, l, r) => write!(f, "{}({l},{r})", op.name()),
        }
    }
}

impl FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}
