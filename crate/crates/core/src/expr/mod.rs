//! A small real-valued expression language.
//!
//! Expressions define map coordinates (in `x1 … xd`), simulation functions
//! (in `t, s`) and scalar functions (in `t` or `eps`). The grammar is
//!
//! ```text
//! expr    = term { ("+" | "-") term } ;
//! term    = unary { ("*" | "/") unary } ;
//! unary   = "-" unary | power ;
//! power   = atom [ "^" unary ] ;
//! atom    = number | "pi" | "e" | ident | func "(" args ")" | "(" expr ")" ;
//! func    = "abs" | "sin" | "cos" | "exp" | "ln" | "sqrt" | "min" | "max" ;
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so `-2^2`
//! is `-4` and `2^3^2` is `512`.

mod parser;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use parser::MAX_DEPTH;

/// Names that can never be used as variables.
pub const RESERVED: &[&str] = &[
    "pi", "e", "abs", "sin", "cos", "exp", "ln", "sqrt", "min", "max",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NamedConst {
    Pi,
    E,
}

impl NamedConst {
    pub fn value(self) -> f64 {
        match self {
            NamedConst::Pi => std::f64::consts::PI,
            NamedConst::E => std::f64::consts::E,
        }
    }

    fn name(self) -> &'static str {
        match self {
            NamedConst::Pi => "pi",
            NamedConst::E => "e",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Abs,
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
}

impl UnaryOp {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "abs" => UnaryOp::Abs,
            "sin" => UnaryOp::Sin,
            "cos" => UnaryOp::Cos,
            "exp" => UnaryOp::Exp,
            "ln" => UnaryOp::Ln,
            "sqrt" => UnaryOp::Sqrt,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Abs => "abs",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Exp => "exp",
            UnaryOp::Ln => "ln",
            UnaryOp::Sqrt => "sqrt",
        }
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            UnaryOp::Neg => -x,
            UnaryOp::Abs => x.abs(),
            UnaryOp::Sin => x.sin(),
            UnaryOp::Cos => x.cos(),
            UnaryOp::Exp => x.exp(),
            UnaryOp::Ln => x.ln(),
            UnaryOp::Sqrt => x.sqrt(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Min,
    Max,
}

impl BinaryOp {
    fn from_name(name: &str) -> Option<Self> {
        match name {
            "min" => Some(BinaryOp::Min),
            "max" => Some(BinaryOp::Max),
            _ => None,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Pow => "^",
            BinaryOp::Min => "min",
            BinaryOp::Max => "max",
        }
    }
}

/// Expression tree. Variables are indices into the owning signature.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    Named(NamedConst),
    Var(usize),
    Unary(UnaryOp, Box<Node>),
    Binary(BinaryOp, Box<Node>, Box<Node>),
}

impl Node {
    pub fn constant(value: f64) -> Node {
        Node::Const(value)
    }

    pub fn var(index: usize) -> Node {
        Node::Var(index)
    }

    pub fn unary(op: UnaryOp, arg: Node) -> Node {
        Node::Unary(op, Box::new(arg))
    }

    pub fn binary(op: BinaryOp, lhs: Node, rhs: Node) -> Node {
        Node::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn depth(&self) -> usize {
        match self {
            Node::Const(_) | Node::Named(_) | Node::Var(_) => 1,
            Node::Unary(_, a) => 1 + a.depth(),
            Node::Binary(_, a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    // Binding strength used by the printer; mirrors the parser's levels.
    fn precedence(&self) -> u8 {
        match self {
            Node::Binary(BinaryOp::Add | BinaryOp::Sub, ..) => 1,
            Node::Binary(BinaryOp::Mul | BinaryOp::Div, ..) => 2,
            Node::Unary(UnaryOp::Neg, _) => 3,
            Node::Binary(BinaryOp::Pow, ..) => 4,
            _ => 5,
        }
    }

    fn eval(&self, sig: &[String], values: &[f64]) -> Result<f64, EvalError> {
        let value = match self {
            Node::Const(c) => *c,
            Node::Named(c) => c.value(),
            Node::Var(i) => values[*i],
            Node::Unary(op, a) => op.apply(a.eval(sig, values)?),
            Node::Binary(op, a, b) => {
                let x = a.eval(sig, values)?;
                let y = b.eval(sig, values)?;
                match op {
                    BinaryOp::Add => x + y,
                    BinaryOp::Sub => x - y,
                    BinaryOp::Mul => x * y,
                    BinaryOp::Div => x / y,
                    BinaryOp::Pow => {
                        if x < 0.0 && y.fract() != 0.0 {
                            return Err(EvalError {
                                node: Printer { node: self, sig }.to_string(),
                                kind: EvalErrorKind::NegativeBaseFractionalPower,
                            });
                        }
                        x.powf(y)
                    }
                    BinaryOp::Min => x.min(y),
                    BinaryOp::Max => x.max(y),
                }
            }
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(EvalError {
                node: Printer { node: self, sig }.to_string(),
                kind: EvalErrorKind::NonFinite(value),
            })
        }
    }
}

struct Printer<'a> {
    node: &'a Node,
    sig: &'a [String],
}

impl Printer<'_> {
    fn child<'b>(&'b self, node: &'b Node) -> Printer<'b> {
        Printer {
            node,
            sig: self.sig,
        }
    }

    fn wrapped(&self, f: &mut fmt::Formatter<'_>, node: &Node, parens: bool) -> fmt::Result {
        if parens {
            write!(f, "({})", self.child(node))
        } else {
            write!(f, "{}", self.child(node))
        }
    }
}

impl fmt::Display for Printer<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node {
            // `{}` on f64 is the shortest representation that round-trips.
            Node::Const(c) => write!(f, "{c}"),
            Node::Named(c) => f.write_str(c.name()),
            Node::Var(i) => f.write_str(&self.sig[*i]),
            Node::Unary(UnaryOp::Neg, a) => {
                f.write_str("-")?;
                self.wrapped(f, a, a.precedence() < 3)
            }
            Node::Unary(op, a) => write!(f, "{}({})", op.name(), self.child(a)),
            Node::Binary(op @ (BinaryOp::Min | BinaryOp::Max), a, b) => {
                write!(f, "{}({}, {})", op.symbol(), self.child(a), self.child(b))
            }
            Node::Binary(BinaryOp::Pow, a, b) => {
                self.wrapped(f, a, a.precedence() <= 4)?;
                f.write_str("^")?;
                self.wrapped(f, b, b.precedence() < 3)
            }
            Node::Binary(op, a, b) => {
                let p = self.node.precedence();
                self.wrapped(f, a, a.precedence() < p)?;
                write!(f, " {} ", op.symbol())?;
                self.wrapped(f, b, b.precedence() <= p)
            }
        }
    }
}

/// A parsed expression together with its ordered variable signature.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    signature: Arc<[String]>,
    root: Node,
}

impl Expr {
    /// Parse `source` against the ordered variable names in `signature`.
    pub fn parse<S: AsRef<str>>(source: &str, signature: &[S]) -> Result<Expr, ParseError> {
        let signature = validate_signature(signature)?;
        let root = parser::parse(source, &signature)?;
        Ok(Expr { signature, root })
    }

    /// Wrap an already-built tree. Fails if a variable index is out of range
    /// or the signature is malformed.
    pub fn from_node<S: AsRef<str>>(root: Node, signature: &[S]) -> Result<Expr, ParseError> {
        let signature = validate_signature(signature)?;
        fn max_var(node: &Node) -> Option<usize> {
            match node {
                Node::Var(i) => Some(*i),
                Node::Unary(_, a) => max_var(a),
                Node::Binary(_, a, b) => max_var(a).max(max_var(b)),
                _ => None,
            }
        }
        if let Some(i) = max_var(&root) {
            if i >= signature.len() {
                return Err(ParseError::new(0, format!("variable index {i} outside signature")));
            }
        }
        Ok(Expr { signature, root })
    }

    pub fn signature(&self) -> &[String] {
        &self.signature
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    /// Evaluate at `values`, ordered as the signature. Any non-finite
    /// intermediate is an error naming the offending subexpression.
    pub fn eval(&self, values: &[f64]) -> Result<f64, EvalError> {
        if values.len() != self.signature.len() {
            return Err(EvalError {
                node: self.to_string(),
                kind: EvalErrorKind::Arity {
                    expected: self.signature.len(),
                    got: values.len(),
                },
            });
        }
        self.root.eval(&self.signature, values)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Printer {
            node: &self.root,
            sig: &self.signature,
        }
        .fmt(f)
    }
}

impl Serialize for Expr {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

fn validate_signature<S: AsRef<str>>(signature: &[S]) -> Result<Arc<[String]>, ParseError> {
    let mut names: Vec<String> = Vec::with_capacity(signature.len());
    for name in signature {
        let name = name.as_ref();
        let valid = name
            .chars()
            .next()
            .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
            && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
        if !valid {
            return Err(ParseError::new(0, format!("invalid variable name `{name}`")));
        }
        if RESERVED.contains(&name) {
            return Err(ParseError::new(0, format!("`{name}` is reserved")));
        }
        if names.iter().any(|n| n == name) {
            return Err(ParseError::new(0, format!("duplicate variable `{name}`")));
        }
        names.push(name.to_owned());
    }
    Ok(names.into())
}

/// Positioned parse failure. `position` is a byte offset into the source.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
#[error("parse error at byte {position}: {message}")]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

impl ParseError {
    pub(crate) fn new(position: usize, message: impl Into<String>) -> Self {
        ParseError {
            position,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum EvalErrorKind {
    NonFinite(f64),
    NegativeBaseFractionalPower,
    Arity { expected: usize, got: usize },
}

/// Evaluation failure carrying the printed subexpression that produced it.
#[derive(Debug, Clone, PartialEq, thiserror::Error, Serialize)]
#[error("evaluating `{node}`: {kind:?}")]
pub struct EvalError {
    pub node: String,
    pub kind: EvalErrorKind,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(src: &str) -> Expr {
        Expr::parse(src, &["t", "s"]).unwrap()
    }

    #[test]
    fn parses_zeta_into_expected_tree() {
        let e = ts("0.5*s - t");
        let want = Node::binary(
            BinaryOp::Sub,
            Node::binary(BinaryOp::Mul, Node::constant(0.5), Node::var(1)),
            Node::var(0),
        );
        assert_eq!(e.root(), &want);
        assert_eq!(e.eval(&[1.0, 3.0]).unwrap(), 0.5);
    }

    #[test]
    fn function_call_parses_to_unary() {
        let e = Expr::parse("cos(x1)", &["x1"]).unwrap();
        assert_eq!(e.root(), &Node::unary(UnaryOp::Cos, Node::var(0)));
    }

    #[test]
    fn power_is_right_associative_and_binds_tighter_than_neg() {
        let none: [&str; 0] = [];
        assert_eq!(Expr::parse("2^3^2", &none).unwrap().eval(&[]).unwrap(), 512.0);
        assert_eq!(Expr::parse("-2^2", &none).unwrap().eval(&[]).unwrap(), -4.0);
        assert_eq!(Expr::parse("2^-1", &none).unwrap().eval(&[]).unwrap(), 0.5);
        assert_eq!(Expr::parse("1 - 2 - 3", &none).unwrap().eval(&[]).unwrap(), -4.0);
        assert_eq!(Expr::parse("8 / 4 / 2", &none).unwrap().eval(&[]).unwrap(), 1.0);
    }

    #[test]
    fn min_and_named_constants() {
        let e = Expr::parse("min(1, x1^2)", &["x1"]).unwrap();
        assert_eq!(e.eval(&[3.0]).unwrap(), 1.0);
        let none: [&str; 0] = [];
        let pi = Expr::parse("pi", &none).unwrap();
        assert_eq!(pi.eval(&[]).unwrap(), std::f64::consts::PI);
        assert_eq!(Expr::parse("ln(e)", &none).unwrap().eval(&[]).unwrap(), 1.0);
    }

    #[test]
    fn ln_of_zero_is_an_error() {
        let e = Expr::parse("ln(t)", &["t"]).unwrap();
        let err = e.eval(&[0.0]).unwrap_err();
        assert_eq!(err.node, "ln(t)");
        assert!(matches!(err.kind, EvalErrorKind::NonFinite(v) if v == f64::NEG_INFINITY));
    }

    #[test]
    fn division_by_zero_and_fractional_power_fail() {
        let e = Expr::parse("1 / t", &["t"]).unwrap();
        assert!(e.eval(&[0.0]).is_err());
        let p = Expr::parse("t ^ 0.5", &["t"]).unwrap();
        let err = p.eval(&[-4.0]).unwrap_err();
        assert_eq!(err.kind, EvalErrorKind::NegativeBaseFractionalPower);
        // integer exponents of negative bases are fine
        assert_eq!(Expr::parse("t ^ 3", &["t"]).unwrap().eval(&[-2.0]).unwrap(), -8.0);
    }

    #[test]
    fn arity_mismatch_on_eval() {
        let e = ts("s - t");
        assert!(matches!(
            e.eval(&[1.0]).unwrap_err().kind,
            EvalErrorKind::Arity { expected: 2, got: 1 }
        ));
    }

    #[test]
    fn printer_keeps_structure() {
        for src in [
            "0.5 * s - t",
            "s / (1 + s) - t",
            "t - (s - t)",
            "(t ^ s) ^ 2",
            "t ^ s ^ 2",
            "-t ^ 2",
            "(-t) ^ 2",
            "--t",
            "-(t + s)",
            "t * -s",
            "max(t, min(s, 1e-7)) / (t / s)",
            "1e300 + 2.5e-300",
        ] {
            let e = ts(src);
            let printed = e.to_string();
            let again = ts(&printed);
            assert_eq!(e, again, "{src} printed as {printed}");
        }
    }

    #[test]
    fn signature_rules() {
        assert!(Expr::parse("x", &["e"]).is_err());
        assert!(Expr::parse("x", &["x", "x"]).is_err());
        assert!(Expr::parse("x", &["1x"]).is_err());
        let err = Expr::parse("t + y", &["t"]).unwrap_err();
        assert_eq!(err.position, 4);
        assert!(err.message.contains("`y`"));
    }
}
