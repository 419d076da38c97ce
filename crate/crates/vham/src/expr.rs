//! Arithmetic expression DSL for problem data.
//!
//! The value map `g`, the two kernels, the pointwise maps, and the declared
//! Lipschitz bound functions are all plain expression strings, so problem
//! instances are data rather than code. The grammar is ordinary infix
//! arithmetic (`^` binds tighter than unary minus, which binds tighter than
//! `*` `/`, which bind tighter than `+` `-`), with parentheses and the
//! function calls `exp`, `sin`, `cos`, `abs`, `sqrt` (one argument) and
//! `min`, `max`, `pow` (two arguments). Numeric literals are decimal,
//! scientific notation accepted.
//!
//! Expressions are immutable after parsing and evaluation is pure, so a
//! parsed `Expression` may be shared freely across threads.

use std::fmt;

use crate::error::{Error, Result};

/// The fixed variable vocabulary: outer point `x, y, z`, integration point
/// `r, s, t`, and the scalar `v` fed through pointwise maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    X,
    Y,
    Z,
    R,
    S,
    T,
    V,
}

impl Var {
    pub const ALL: [Var; 7] = [Var::X, Var::Y, Var::Z, Var::R, Var::S, Var::T, Var::V];

    pub fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::Y => "y",
            Var::Z => "z",
            Var::R => "r",
            Var::S => "s",
            Var::T => "t",
            Var::V => "v",
        }
    }

    pub fn from_name(name: &str) -> Option<Var> {
        match name {
            "x" => Some(Var::X),
            "y" => Some(Var::Y),
            "z" => Some(Var::Z),
            "r" => Some(Var::R),
            "s" => Some(Var::S),
            "t" => Some(Var::T),
            "v" => Some(Var::V),
            _ => None,
        }
    }

    fn slot(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A set of variables an expression is allowed to reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct VarSet(u8);

impl VarSet {
    pub const EMPTY: VarSet = VarSet(0);
    pub const XYZ: VarSet = VarSet(0b0000111);
    pub const XYZV: VarSet = VarSet(0b1000111);
    pub const RST: VarSet = VarSet(0b0111000);
    pub const RSTV: VarSet = VarSet(0b1111000);
    pub const XYZRST: VarSet = VarSet(0b0111111);
    pub const ALL: VarSet = VarSet(0b1111111);

    pub fn of(vars: &[Var]) -> VarSet {
        let mut s = VarSet::EMPTY;
        for &v in vars {
            s = s.with(v);
        }
        s
    }

    pub fn with(self, v: Var) -> VarSet {
        VarSet(self.0 | (1 << v.slot()))
    }

    pub fn contains(self, v: Var) -> bool {
        self.0 & (1 << v.slot()) != 0
    }

    pub fn union(self, other: VarSet) -> VarSet {
        VarSet(self.0 | other.0)
    }

    pub fn intersects(self, other: VarSet) -> bool {
        self.0 & other.0 != 0
    }

    pub fn is_subset_of(self, other: VarSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = Var> {
        Var::ALL.into_iter().filter(move |v| self.contains(*v))
    }

    /// Comma-separated variable names, for error messages.
    pub fn names(self) -> String {
        self.iter()
            .map(Var::name)
            .collect::<Vec<_>>()
            .join(", ")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Exp,
    Sin,
    Cos,
    Abs,
    Sqrt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Min,
    Max,
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Const(f64),
    Var(Var),
    Unary(UnaryOp, Box<Node>),
    Binary(BinaryOp, Box<Node>, Box<Node>),
}

/// Values for the variables an expression is evaluated at.
#[derive(Debug, Clone, Copy, Default)]
pub struct Bindings {
    slots: [Option<f64>; 7],
}

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(mut self, var: Var, value: f64) -> Self {
        self.slots[var.slot()] = Some(value);
        self
    }

    pub fn get(&self, var: Var) -> Option<f64> {
        self.slots[var.slot()]
    }

    pub fn xyz(x: f64, y: f64, z: f64) -> Self {
        Self::new().set(Var::X, x).set(Var::Y, y).set(Var::Z, z)
    }

    pub fn xyzv(x: f64, y: f64, z: f64, v: f64) -> Self {
        Self::xyz(x, y, z).set(Var::V, v)
    }
}

/// A parsed, immutable arithmetic expression.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    root: Node,
}

impl Expression {
    /// Parse `text`, rejecting any variable outside `allowed`.
    pub fn parse(text: &str, allowed: VarSet) -> Result<Expression> {
        let tokens = tokenize(text)?;
        let mut parser = Parser {
            tokens,
            pos: 0,
            allowed,
            end: text.len(),
        };
        let root = parser.parse_add()?;
        if let Some((pos, _)) = parser.peek() {
            return Err(Error::Syntax {
                pos,
                msg: "unexpected trailing input".into(),
            });
        }
        Ok(Expression { root })
    }

    pub fn constant(c: f64) -> Expression {
        debug_assert!(c.is_finite(), "expression constants must be finite");
        Expression {
            root: Node::Const(c),
        }
    }

    pub fn var(v: Var) -> Expression {
        Expression { root: Node::Var(v) }
    }

    pub fn unary(op: UnaryOp, e: Expression) -> Expression {
        Expression {
            root: Node::Unary(op, Box::new(e.root)),
        }
    }

    pub fn binary(op: BinaryOp, a: Expression, b: Expression) -> Expression {
        Expression {
            root: Node::Binary(op, Box::new(a.root), Box::new(b.root)),
        }
    }

    /// Evaluate at the given bindings. Deterministic; errors on missing
    /// bindings and on operations leaving the reals (sqrt of a negative,
    /// division by zero, non-real powers, overflow to infinity).
    pub fn eval(&self, bindings: &Bindings) -> Result<f64> {
        eval_node(&self.root, bindings)
    }

    pub fn free_vars(&self) -> VarSet {
        let mut set = VarSet::EMPTY;
        collect_vars(&self.root, &mut set);
        set
    }

    pub fn references_any(&self, set: VarSet) -> bool {
        self.free_vars().intersects(set)
    }

    /// True for the literal constant zero; used to skip vanishing terms.
    pub fn is_zero(&self) -> bool {
        matches!(self.root, Node::Const(c) if c == 0.0)
    }

    /// True for the bare variable `v` (the identity pointwise map).
    pub fn is_identity_v(&self) -> bool {
        matches!(self.root, Node::Var(Var::V))
    }

    /// Fully parenthesized form; parsing it back evaluates identically.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        write_node(&self.root, &mut out);
        out
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical())
    }
}

fn collect_vars(node: &Node, set: &mut VarSet) {
    match node {
        Node::Const(_) => {}
        Node::Var(v) => *set = set.with(*v),
        Node::Unary(_, a) => collect_vars(a, set),
        Node::Binary(_, a, b) => {
            collect_vars(a, set);
            collect_vars(b, set);
        }
    }
}

fn finite(op: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::EvalDomain {
            op,
            detail: format!("produced non-finite value {value}"),
        })
    }
}

fn eval_node(node: &Node, b: &Bindings) -> Result<f64> {
    match node {
        Node::Const(c) => Ok(*c),
        Node::Var(v) => b.get(*v).ok_or(Error::MissingBinding { name: v.name() }),
        Node::Unary(op, a) => {
            let x = eval_node(a, b)?;
            match op {
                UnaryOp::Neg => Ok(-x),
                UnaryOp::Exp => finite("exp", x.exp()),
                UnaryOp::Sin => Ok(x.sin()),
                UnaryOp::Cos => Ok(x.cos()),
                UnaryOp::Abs => Ok(x.abs()),
                UnaryOp::Sqrt => {
                    if x < 0.0 {
                        Err(Error::EvalDomain {
                            op: "sqrt",
                            detail: format!("sqrt of negative value {x}"),
                        })
                    } else {
                        Ok(x.sqrt())
                    }
                }
            }
        }
        Node::Binary(op, a, c) => {
            let x = eval_node(a, b)?;
            let y = eval_node(c, b)?;
            match op {
                BinaryOp::Add => finite("+", x + y),
                BinaryOp::Sub => finite("-", x - y),
                BinaryOp::Mul => finite("*", x * y),
                BinaryOp::Div => {
                    if y == 0.0 {
                        Err(Error::EvalDomain {
                            op: "/",
                            detail: "division by zero".into(),
                        })
                    } else {
                        finite("/", x / y)
                    }
                }
                BinaryOp::Pow => {
                    let p = x.powf(y);
                    if p.is_nan() {
                        Err(Error::EvalDomain {
                            op: "pow",
                            detail: format!("{x}^{y} is not real"),
                        })
                    } else {
                        finite("pow", p)
                    }
                }
                BinaryOp::Min => Ok(x.min(y)),
                BinaryOp::Max => Ok(x.max(y)),
            }
        }
    }
}

fn write_node(node: &Node, out: &mut String) {
    match node {
        Node::Const(c) => {
            if c.is_sign_negative() {
                out.push_str(&format!("(-{:?})", -c));
            } else {
                out.push_str(&format!("{c:?}"));
            }
        }
        Node::Var(v) => out.push_str(v.name()),
        Node::Unary(UnaryOp::Neg, a) => {
            out.push_str("(-");
            write_node(a, out);
            out.push(')');
        }
        Node::Unary(op, a) => {
            let name = match op {
                UnaryOp::Exp => "exp",
                UnaryOp::Sin => "sin",
                UnaryOp::Cos => "cos",
                UnaryOp::Abs => "abs",
                UnaryOp::Sqrt => "sqrt",
                UnaryOp::Neg => unreachable!(),
            };
            out.push_str(name);
            out.push('(');
            write_node(a, out);
            out.push(')');
        }
        Node::Binary(op, a, b) => match op {
            BinaryOp::Min | BinaryOp::Max => {
                out.push_str(if *op == BinaryOp::Min { "min" } else { "max" });
                out.push('(');
                write_node(a, out);
                out.push_str(", ");
                write_node(b, out);
                out.push(')');
            }
            _ => {
                let sym = match op {
                    BinaryOp::Add => " + ",
                    BinaryOp::Sub => " - ",
                    BinaryOp::Mul => " * ",
                    BinaryOp::Div => " / ",
                    BinaryOp::Pow => " ^ ",
                    _ => unreachable!(),
                };
                out.push('(');
                write_node(a, out);
                out.push_str(sym);
                write_node(b, out);
                out.push(')');
            }
        },
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'+' => {
                out.push((i, Tok::Plus));
                i += 1;
            }
            b'-' => {
                out.push((i, Tok::Minus));
                i += 1;
            }
            b'*' => {
                out.push((i, Tok::Star));
                i += 1;
            }
            b'/' => {
                out.push((i, Tok::Slash));
                i += 1;
            }
            b'^' => {
                out.push((i, Tok::Caret));
                i += 1;
            }
            b'(' => {
                out.push((i, Tok::LParen));
                i += 1;
            }
            b')' => {
                out.push((i, Tok::RParen));
                i += 1;
            }
            b',' => {
                out.push((i, Tok::Comma));
                i += 1;
            }
            b'0'..=b'9' | b'.' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                // exponent part only if it is actually followed by digits
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let slice = &text[start..i];
                let value: f64 = slice.parse().map_err(|_| Error::Syntax {
                    pos: start,
                    msg: format!("invalid numeric literal `{slice}`"),
                })?;
                if !value.is_finite() {
                    return Err(Error::Syntax {
                        pos: start,
                        msg: format!("numeric literal `{slice}` overflows"),
                    });
                }
                out.push((start, Tok::Num(value)));
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                out.push((start, Tok::Ident(text[start..i].to_string())));
            }
            _ => {
                return Err(Error::Syntax {
                    pos: i,
                    msg: format!("unexpected character `{}`", text[i..].chars().next().unwrap()),
                })
            }
        }
    }
    Ok(out)
}

const FUNCTIONS: &[(&str, usize)] = &[
    ("exp", 1),
    ("sin", 1),
    ("cos", 1),
    ("abs", 1),
    ("sqrt", 1),
    ("min", 2),
    ("max", 2),
    ("pow", 2),
];

struct Parser {
    tokens: Vec<(usize, Tok)>,
    pos: usize,
    allowed: VarSet,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<(usize, &Tok)> {
        self.tokens.get(self.pos).map(|(p, t)| (*p, t))
    }

    fn advance(&mut self) -> Option<(usize, Tok)> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn parse_add(&mut self) -> Result<Node> {
        let mut lhs = self.parse_mul()?;
        loop {
            match self.peek() {
                Some((_, Tok::Plus)) => {
                    self.advance();
                    let rhs = self.parse_mul()?;
                    lhs = Node::Binary(BinaryOp::Add, Box::new(lhs), Box::new(rhs));
                }
                Some((_, Tok::Minus)) => {
                    self.advance();
                    let rhs = self.parse_mul()?;
                    lhs = Node::Binary(BinaryOp::Sub, Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn parse_mul(&mut self) -> Result<Node> {
        let mut lhs = self.parse_unary()?;
        loop {
            match self.peek() {
                Some((_, Tok::Star)) => {
                    self.advance();
                    let rhs = self.parse_unary()?;
                    lhs = Node::Binary(BinaryOp::Mul, Box::new(lhs), Box::new(rhs));
                }
                Some((_, Tok::Slash)) => {
                    self.advance();
                    let rhs = self.parse_unary()?;
                    lhs = Node::Binary(BinaryOp::Div, Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn parse_unary(&mut self) -> Result<Node> {
        if let Some((_, Tok::Minus)) = self.peek() {
            self.advance();
            let inner = self.parse_unary()?;
            return Ok(Node::Unary(UnaryOp::Neg, Box::new(inner)));
        }
        self.parse_power()
    }

    fn parse_power(&mut self) -> Result<Node> {
        let base = self.parse_atom()?;
        if let Some((_, Tok::Caret)) = self.peek() {
            self.advance();
            // exponent re-enters at unary level: right-associative, signed
            let exponent = self.parse_unary()?;
            return Ok(Node::Binary(
                BinaryOp::Pow,
                Box::new(base),
                Box::new(exponent),
            ));
        }
        Ok(base)
    }

    fn parse_atom(&mut self) -> Result<Node> {
        match self.advance() {
            Some((_, Tok::Num(value))) => Ok(Node::Const(value)),
            Some((pos, Tok::Ident(name))) => {
                if matches!(self.peek(), Some((_, Tok::LParen))) {
                    return self.parse_call(pos, name);
                }
                match Var::from_name(&name) {
                    Some(v) if self.allowed.contains(v) => Ok(Node::Var(v)),
                    _ => Err(Error::UnknownVariable { name, pos }),
                }
            }
            Some((_, Tok::LParen)) => {
                let inner = self.parse_add()?;
                match self.advance() {
                    Some((_, Tok::RParen)) => Ok(inner),
                    Some((pos, _)) => Err(Error::Syntax {
                        pos,
                        msg: "expected `)`".into(),
                    }),
                    None => Err(Error::Syntax {
                        pos: self.end,
                        msg: "expected `)`".into(),
                    }),
                }
            }
            Some((pos, _)) => Err(Error::Syntax {
                pos,
                msg: "expected a number, variable, function call, or `(`".into(),
            }),
            None => Err(Error::Syntax {
                pos: self.end,
                msg: "unexpected end of expression".into(),
            }),
        }
    }

    fn parse_call(&mut self, pos: usize, name: String) -> Result<Node> {
        let arity = match FUNCTIONS.iter().find(|(f, _)| *f == name) {
            Some((_, arity)) => *arity,
            None => {
                return Err(Error::Syntax {
                    pos,
                    msg: format!("unknown function `{name}`"),
                })
            }
        };
        self.advance(); // consume `(`
        let mut args = Vec::new();
        if !matches!(self.peek(), Some((_, Tok::RParen))) {
            loop {
                args.push(self.parse_add()?);
                match self.peek() {
                    Some((_, Tok::Comma)) => {
                        self.advance();
                    }
                    _ => break,
                }
            }
        }
        match self.advance() {
            Some((_, Tok::RParen)) => {}
            Some((p, _)) => {
                return Err(Error::Syntax {
                    pos: p,
                    msg: "expected `)` or `,` in argument list".into(),
                })
            }
            None => {
                return Err(Error::Syntax {
                    pos: self.end,
                    msg: "unterminated argument list".into(),
                })
            }
        }
        if args.len() != arity {
            return Err(Error::Arity {
                name,
                expected: arity,
                got: args.len(),
                pos,
            });
        }
        let mut args = args.into_iter();
        Ok(match name.as_str() {
            "exp" => Node::Unary(UnaryOp::Exp, Box::new(args.next().unwrap())),
            "sin" => Node::Unary(UnaryOp::Sin, Box::new(args.next().unwrap())),
            "cos" => Node::Unary(UnaryOp::Cos, Box::new(args.next().unwrap())),
            "abs" => Node::Unary(UnaryOp::Abs, Box::new(args.next().unwrap())),
            "sqrt" => Node::Unary(UnaryOp::Sqrt, Box::new(args.next().unwrap())),
            "min" => {
                let a = args.next().unwrap();
                Node::Binary(BinaryOp::Min, Box::new(a), Box::new(args.next().unwrap()))
            }
            "max" => {
                let a = args.next().unwrap();
                Node::Binary(BinaryOp::Max, Box::new(a), Box::new(args.next().unwrap()))
            }
            "pow" => {
                let a = args.next().unwrap();
                Node::Binary(BinaryOp::Pow, Box::new(a), Box::new(args.next().unwrap()))
            }
            _ => unreachable!(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn eval_str(text: &str, b: &Bindings) -> f64 {
        Expression::parse(text, VarSet::ALL).unwrap().eval(b).unwrap()
    }

    #[test]
    fn parses_products_of_variables() {
        let e = Expression::parse("x*y*z", VarSet::XYZ).unwrap();
        assert_eq!(e.free_vars(), VarSet::XYZ);
        assert_eq!(e.eval(&Bindings::xyz(1.0, 2.0, 3.0)).unwrap(), 6.0);
    }

    #[test]
    fn parses_exponential_kernel() {
        let e = Expression::parse("exp(-(r+s+t))*v", VarSet::RSTV).unwrap();
        let b = Bindings::new()
            .set(Var::R, 0.0)
            .set(Var::S, 0.0)
            .set(Var::T, 0.0)
            .set(Var::V, 5.0);
        assert_eq!(e.eval(&b).unwrap(), 5.0);
    }

    #[test]
    fn rejects_variable_outside_allowed_set() {
        let err = Expression::parse("x*q", VarSet::XYZ).unwrap_err();
        match err {
            Error::UnknownVariable { name, pos } => {
                assert_eq!(name, "q");
                assert_eq!(pos, 2);
            }
            other => panic!("expected UnknownVariable, got {other:?}"),
        }
        // a real variable name that is simply not allowed here
        assert!(matches!(
            Expression::parse("x*r", VarSet::XYZ).unwrap_err(),
            Error::UnknownVariable { .. }
        ));
    }

    #[test]
    fn min_max_and_pow() {
        let b = Bindings::new().set(Var::X, 0.2).set(Var::Y, 0.7);
        assert_eq!(eval_str("min(x, y)", &b), 0.2);
        assert_eq!(eval_str("max(x, y)", &b), 0.7);
        assert_eq!(eval_str("pow(2, 10)", &Bindings::new()), 1024.0);
        assert_eq!(eval_str("2^10", &Bindings::new()), 1024.0);
    }

    #[test]
    fn precedence() {
        let b = Bindings::new();
        assert_eq!(eval_str("2+3*4", &b), 14.0);
        assert_eq!(eval_str("(2+3)*4", &b), 20.0);
        assert_eq!(eval_str("-2^2", &b), -4.0); // pow binds tighter than unary minus
        assert_eq!(eval_str("2^-1", &b), 0.5);
        assert_eq!(eval_str("2^3^2", &b), 512.0); // right-associative
        assert_eq!(eval_str("6/3/2", &b), 1.0); // left-associative
    }

    #[test]
    fn scientific_literals() {
        let b = Bindings::new();
        assert_eq!(eval_str("1.5e2", &b), 150.0);
        assert_eq!(eval_str("2e-3", &b), 0.002);
        assert_eq!(eval_str(".5", &b), 0.5);
        assert!(matches!(
            Expression::parse("1e999", VarSet::EMPTY).unwrap_err(),
            Error::Syntax { .. }
        ));
    }

    #[test]
    fn arity_errors() {
        assert!(matches!(
            Expression::parse("min(x)", VarSet::XYZ).unwrap_err(),
            Error::Arity { expected: 2, got: 1, .. }
        ));
        assert!(matches!(
            Expression::parse("exp(x, y)", VarSet::XYZ).unwrap_err(),
            Error::Arity { expected: 1, got: 2, .. }
        ));
        assert!(matches!(
            Expression::parse("foo(x)", VarSet::XYZ).unwrap_err(),
            Error::Syntax { .. }
        ));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        match Expression::parse("x + ", VarSet::XYZ).unwrap_err() {
            Error::Syntax { pos, .. } => assert_eq!(pos, 4),
            other => panic!("unexpected {other:?}"),
        }
        assert!(Expression::parse("", VarSet::XYZ).is_err());
        assert!(Expression::parse("(x", VarSet::XYZ).is_err());
        assert!(Expression::parse("x y", VarSet::XYZ).is_err());
    }

    #[test]
    fn domain_errors() {
        let b = Bindings::new().set(Var::X, -1.0);
        let e = Expression::parse("sqrt(x)", VarSet::XYZ).unwrap();
        assert!(matches!(e.eval(&b), Err(Error::EvalDomain { op: "sqrt", .. })));

        let e = Expression::parse("1/x", VarSet::XYZ).unwrap();
        let b0 = Bindings::new().set(Var::X, 0.0);
        assert!(matches!(e.eval(&b0), Err(Error::EvalDomain { op: "/", .. })));

        let e = Expression::parse("x^0.5", VarSet::XYZ).unwrap();
        assert!(matches!(e.eval(&b), Err(Error::EvalDomain { op: "pow", .. })));

        let e = Expression::parse("exp(x)", VarSet::XYZ).unwrap();
        let big = Bindings::new().set(Var::X, 1e4);
        assert!(matches!(e.eval(&big), Err(Error::EvalDomain { op: "exp", .. })));
    }

    #[test]
    fn missing_binding() {
        let e = Expression::parse("x + y", VarSet::XYZ).unwrap();
        let b = Bindings::new().set(Var::X, 1.0);
        assert!(matches!(e.eval(&b), Err(Error::MissingBinding { name: "y" })));
    }

    #[test]
    fn canonical_examples() {
        assert_eq!(Expression::constant(1.5).canonical(), "1.5");
        let e = Expression::parse("x+y*z", VarSet::XYZ).unwrap();
        assert_eq!(e.canonical(), "(x + (y * z))");
        // negative constants re-parse through unary minus
        let c = Expression::binary(
            BinaryOp::Pow,
            Expression::constant(-1.5),
            Expression::constant(2.0),
        );
        let reparsed = Expression::parse(&c.canonical(), VarSet::EMPTY).unwrap();
        assert_eq!(
            reparsed.eval(&Bindings::new()).unwrap(),
            c.eval(&Bindings::new()).unwrap()
        );
    }

    fn arb_node(allowed: &'static [Var]) -> impl Strategy<Value = Expression> {
        let leaf = prop_oneof![
            (-10.0f64..10.0).prop_map(Expression::constant),
            proptest::sample::select(allowed).prop_map(Expression::var),
        ];
        leaf.prop_recursive(4, 48, 2, |inner| {
            prop_oneof![
                (
                    proptest::sample::select(&[
                        UnaryOp::Neg,
                        UnaryOp::Exp,
                        UnaryOp::Sin,
                        UnaryOp::Cos,
                        UnaryOp::Abs,
                        UnaryOp::Sqrt
                    ][..]),
                    inner.clone()
                )
                    .prop_map(|(op, e)| Expression::unary(op, e)),
                (
                    proptest::sample::select(&[
                        BinaryOp::Add,
                        BinaryOp::Sub,
                        BinaryOp::Mul,
                        BinaryOp::Div,
                        BinaryOp::Pow,
                        BinaryOp::Min,
                        BinaryOp::Max
                    ][..]),
                    inner.clone(),
                    inner
                )
                    .prop_map(|(op, a, b)| Expression::binary(op, a, b)),
            ]
        })
    }

    proptest! {
        // print -> parse round-trip preserves evaluation bit-for-bit
        #[test]
        fn canonical_round_trip(
            e in arb_node(&[Var::X, Var::Y, Var::Z]),
            x in -3.0f64..3.0,
            y in -3.0f64..3.0,
            z in -3.0f64..3.0,
        ) {
            let text = e.canonical();
            let reparsed = Expression::parse(&text, VarSet::XYZ).unwrap();
            let b = Bindings::xyz(x, y, z);
            match (e.eval(&b), reparsed.eval(&b)) {
                (Ok(a), Ok(c)) => prop_assert_eq!(a.to_bits(), c.to_bits()),
                (Err(_), Err(_)) => {}
                (a, c) => prop_assert!(false, "round-trip mismatch: {:?} vs {:?}", a, c),
            }
        }

        // evaluation is pure
        #[test]
        fn eval_is_pure(e in arb_node(&[Var::X, Var::V]), x in -3.0f64..3.0, v in -3.0f64..3.0) {
            let b = Bindings::new().set(Var::X, x).set(Var::V, v);
            let first = e.eval(&b);
            let second = e.eval(&b);
            match (first, second) {
                (Ok(a), Ok(c)) => prop_assert_eq!(a.to_bits(), c.to_bits()),
                (Err(_), Err(_)) => {}
                _ => prop_assert!(false),
            }
        }
    }
}
