//! Tiny expression language for initial data, sources and potentials.
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := ('+' | '-') unary | power
//! power := atom ('^' unary)?
//! atom  := number | 'x' | 't' | 'pi' | 'e' | func '(' expr ')' | '(' expr ')'
//! func  := sin | cos | tan | exp | ln | log | sqrt | abs | sign | tanh
//! ```
//!
//! Exponentiation binds tighter than unary minus on its left, so `-x^2` is `-(x^2)`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
    Abs,
    Sign,
    Tanh,
}

impl Func {
    fn lookup(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "ln" | "log" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "sign" => Func::Sign,
            "tanh" => Func::Tanh,
            _ => return None,
        })
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Tan => v.tan(),
            Func::Exp => v.exp(),
            Func::Ln => v.ln(),
            Func::Sqrt => v.sqrt(),
            Func::Abs => v.abs(),
            Func::Sign => {
                if v > 0.0 {
                    1.0
                } else if v < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            Func::Tanh => v.tanh(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Node {
    Num(f64),
    X,
    T,
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

impl Node {
    fn eval(&self, x: f64, t: f64) -> f64 {
        match self {
            Node::Num(v) => *v,
            Node::X => x,
            Node::T => t,
            Node::Neg(a) => -a.eval(x, t),
            Node::Add(a, b) => a.eval(x, t) + b.eval(x, t),
            Node::Sub(a, b) => a.eval(x, t) - b.eval(x, t),
            Node::Mul(a, b) => a.eval(x, t) * b.eval(x, t),
            Node::Div(a, b) => a.eval(x, t) / b.eval(x, t),
            Node::Pow(a, b) => {
                let e = b.eval(x, t);
                let base = a.eval(x, t);
                if e.fract() == 0.0 && e.abs() <= 64.0 {
                    base.powi(e as i32)
                } else {
                    base.powf(e)
                }
            }
            Node::Call(f, a) => f.apply(a.eval(x, t)),
        }
    }

    fn uses(&self, var: &Node) -> bool {
        match self {
            Node::X | Node::T => self == var,
            Node::Num(_) => false,
            Node::Neg(a) | Node::Call(_, a) => a.uses(var),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) => {
                a.uses(var) || b.uses(var)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(char),
    Open,
    Close,
}

fn tokenize(src: &str) -> std::result::Result<Vec<Token>, String> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            // scientific notation: 1e-3, 2.5E+4
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut k = i + 1;
                if k < chars.len() && (chars[k] == '+' || chars[k] == '-') {
                    k += 1;
                }
                if k < chars.len() && chars[k].is_ascii_digit() {
                    i = k;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v = text.parse::<f64>().map_err(|_| format!("bad number `{text}`"))?;
            out.push(Token::Num(v));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^".contains(c) {
            out.push(Token::Op(c));
            i += 1;
        } else if c == '(' {
            out.push(Token::Open);
            i += 1;
        } else if c == ')' {
            out.push(Token::Close);
            i += 1;
        } else {
            return Err(format!("unexpected character `{c}`"));
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> std::result::Result<Node, String> {
        let mut lhs = self.term()?;
        while let Some(Token::Op(op @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if op == '+' { Node::Add(lhs.into(), rhs.into()) } else { Node::Sub(lhs.into(), rhs.into()) };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> std::result::Result<Node, String> {
        let mut lhs = self.unary()?;
        while let Some(Token::Op(op @ ('*' | '/'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = if op == '*' { Node::Mul(lhs.into(), rhs.into()) } else { Node::Div(lhs.into(), rhs.into()) };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> std::result::Result<Node, String> {
        match self.peek() {
            Some(Token::Op('-')) => {
                self.pos += 1;
                Ok(Node::Neg(self.unary()?.into()))
            }
            Some(Token::Op('+')) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> std::result::Result<Node, String> {
        let base = self.atom()?;
        if let Some(Token::Op('^')) = self.peek() {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Node::Pow(base.into(), exp.into()));
        }
        Ok(base)
    }

    fn atom(&mut self) -> std::result::Result<Node, String> {
        match self.next() {
            Some(Token::Num(v)) => Ok(Node::Num(v)),
            Some(Token::Open) => {
                let inner = self.expr()?;
                match self.next() {
                    Some(Token::Close) => Ok(inner),
                    _ => Err("missing `)`".into()),
                }
            }
            Some(Token::Ident(name)) => match name.as_str() {
                "x" => Ok(Node::X),
                "t" => Ok(Node::T),
                "pi" => Ok(Node::Num(std::f64::consts::PI)),
                "e" => Ok(Node::Num(std::f64::consts::E)),
                other => {
                    let f = Func::lookup(other).ok_or_else(|| format!("unknown identifier `{other}`"))?;
                    if self.next() != Some(Token::Open) {
                        return Err(format!("expected `(` after `{other}`"));
                    }
                    let arg = self.expr()?;
                    if self.next() != Some(Token::Close) {
                        return Err(format!("missing `)` in call to `{other}`"));
                    }
                    Ok(Node::Call(f, arg.into()))
                }
            },
            Some(tok) => Err(format!("unexpected token {tok:?}")),
            None => Err("unexpected end of expression".into()),
        }
    }
}

/// A parsed expression in the variables `x` and `t`.
#[derive(Clone)]
pub struct Expr {
    source: String,
    root: Arc<Node>,
}

impl Expr {
    pub fn parse(src: &str) -> Result<Self> {
        let err = |message: String| Error::Expression { expr: src.to_owned(), message };
        let tokens = tokenize(src).map_err(err)?;
        if tokens.is_empty() {
            return Err(err("empty expression".into()));
        }
        let mut parser = Parser { tokens, pos: 0 };
        let root = parser.expr().map_err(err)?;
        if parser.pos != parser.tokens.len() {
            return Err(err(format!("trailing input at token {}", parser.pos)));
        }
        Ok(Self { source: src.to_owned(), root: Arc::new(root) })
    }

    pub fn constant(v: f64) -> Self {
        Self { source: format!("{v}"), root: Arc::new(Node::Num(v)) }
    }

    pub fn eval(&self, x: f64, t: f64) -> f64 {
        self.root.eval(x, t)
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn depends_on_t(&self) -> bool {
        self.root.uses(&Node::T)
    }

    /// The expression as a shareable closure `(t, x) -> value`.
    pub fn to_fn(&self) -> crate::wave_fd::ScalarFn {
        let root = Arc::clone(&self.root);
        Arc::new(move |t, x| root.eval(x, t))
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({:?})", self.source)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

impl std::str::FromStr for Expr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn ev(src: &str, x: f64, t: f64) -> f64 {
        Expr::parse(src).unwrap().eval(x, t)
    }

    #[test]
    fn baseline_expressions() {
        assert!((ev("2 + sin(pi*x)", 0.5, 0.0) - 3.0).abs() < 1e-15);
        assert!((ev("sin(2*pi*x)", 0.25, 0.0) - 1.0).abs() < 1e-15);
        assert_eq!(ev("2", 0.3, 0.7), 2.0);
        assert!((ev("-0.5 + x", 0.5, 0.0)).abs() < 1e-15);
    }

    #[test]
    fn precedence() {
        assert_eq!(ev("1 + 2 * 3", 0.0, 0.0), 7.0);
        assert_eq!(ev("(1 + 2) * 3", 0.0, 0.0), 9.0);
        assert_eq!(ev("-x^2", 3.0, 0.0), -9.0);
        assert_eq!(ev("2^3^2", 0.0, 0.0), 512.0);
        assert_eq!(ev("8 / 4 / 2", 0.0, 0.0), 1.0);
        assert_eq!(ev("1e-3 * 2E2", 0.0, 0.0), 0.2);
        assert_eq!(ev("2*x*(1-x)*t^2", 0.5, 2.0), 2.0);
    }

    #[test]
    fn functions() {
        assert!((ev("cos(pi*t)", 0.0, 1.0) + 1.0).abs() < 1e-15);
        assert!((ev("exp(ln(3))", 0.0, 0.0) - 3.0).abs() < 1e-14);
        assert_eq!(ev("abs(-2) + sqrt(16) + sign(-3)", 0.0, 0.0), 5.0);
        assert!((ev("pi", 0.0, 0.0) - PI).abs() < 1e-16);
    }

    #[test]
    fn variables_detected() {
        assert!(Expr::parse("sin(t)*x").unwrap().depends_on_t());
        assert!(!Expr::parse("2 + sin(pi*x)").unwrap().depends_on_t());
    }

    #[test]
    fn errors() {
        for bad in ["", "1 +", "sin x", "foo(1)", "(1", "1 2", "3 $ 4", "y"] {
            assert!(Expr::parse(bad).is_err(), "{bad}");
        }
    }
}
