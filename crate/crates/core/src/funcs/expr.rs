//! Complex-valued arithmetic expressions over grid coordinates.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' unary)?
//! atom  := number | 'x' | 'y' | 'pi' | 'e' | 'i' | func '(' expr ')' | '(' expr ')'
//! func  := sin | cos | exp | log | tanh | sinc | abs | sqrt
//! ```

use num_complex::Complex64;

use crate::error::{FslError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Tanh,
    Sinc,
    Abs,
    Sqrt,
}

#[derive(Clone, Debug, PartialEq)]
enum Node {
    Const(Complex64),
    Var(usize),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    root: Node,
    source: String,
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
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
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v = text.parse::<f64>().map_err(|_| FslError::Parse(format!("bad number '{text}'")))?;
            out.push(Token::Num(v));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^()".contains(c) {
            out.push(Token::Op(c));
            i += 1;
        } else {
            return Err(FslError::Parse(format!("unexpected character '{c}'")));
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek_op(&self) -> Option<char> {
        match self.tokens.get(self.pos) {
            Some(Token::Op(c)) => Some(*c),
            _ => None,
        }
    }

    fn expect(&mut self, op: char) -> Result<()> {
        if self.peek_op() == Some(op) {
            self.pos += 1;
            Ok(())
        } else {
            Err(FslError::Parse(format!("expected '{op}' at token {}", self.pos)))
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        while let Some(op @ ('+' | '-')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if op == '+' { Node::Add(lhs.into(), rhs.into()) } else { Node::Sub(lhs.into(), rhs.into()) };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        while let Some(op @ ('*' | '/')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = if op == '*' { Node::Mul(lhs.into(), rhs.into()) } else { Node::Div(lhs.into(), rhs.into()) };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node> {
        if self.peek_op() == Some('-') {
            self.pos += 1;
            return Ok(Node::Neg(self.unary()?.into()));
        }
        if self.peek_op() == Some('+') {
            self.pos += 1;
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if self.peek_op() == Some('^') {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Node::Pow(base.into(), exp.into()));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        let tok = self.tokens.get(self.pos).cloned().ok_or_else(|| FslError::Parse("unexpected end of input".into()))?;
        self.pos += 1;
        match tok {
            Token::Num(v) => Ok(Node::Const(Complex64::new(v, 0.0))),
            Token::Op('(') => {
                let inner = self.expr()?;
                self.expect(')')?;
                Ok(inner)
            }
            Token::Op(c) => Err(FslError::Parse(format!("unexpected '{c}'"))),
            Token::Ident(name) => {
                let func = match name.as_str() {
                    "x" => return Ok(Node::Var(0)),
                    "y" => return Ok(Node::Var(1)),
                    "pi" => return Ok(Node::Const(Complex64::new(std::f64::consts::PI, 0.0))),
                    "e" => return Ok(Node::Const(Complex64::new(std::f64::consts::E, 0.0))),
                    "i" => return Ok(Node::Const(Complex64::new(0.0, 1.0))),
                    "sin" => Func::Sin,
                    "cos" => Func::Cos,
                    "exp" => Func::Exp,
                    "log" => Func::Log,
                    "tanh" => Func::Tanh,
                    "sinc" => Func::Sinc,
                    "abs" => Func::Abs,
                    "sqrt" => Func::Sqrt,
                    other => return Err(FslError::Parse(format!("unknown identifier '{other}'"))),
                };
                self.expect('(')?;
                let arg = self.expr()?;
                self.expect(')')?;
                Ok(Node::Call(func, arg.into()))
            }
        }
    }
}

fn is_real(z: Complex64) -> bool {
    z.im == 0.0
}

fn eval(node: &Node, vars: &[f64]) -> Complex64 {
    match node {
        Node::Const(c) => *c,
        Node::Var(i) => Complex64::new(vars.get(*i).copied().unwrap_or(0.0), 0.0),
        Node::Neg(a) => -eval(a, vars),
        Node::Add(a, b) => eval(a, vars) + eval(b, vars),
        Node::Sub(a, b) => eval(a, vars) - eval(b, vars),
        Node::Mul(a, b) => eval(a, vars) * eval(b, vars),
        Node::Div(a, b) => eval(a, vars) / eval(b, vars),
        Node::Pow(a, b) => {
            let (base, exp) = (eval(a, vars), eval(b, vars));
            if is_real(exp) && exp.re == 0.0 {
                Complex64::new(1.0, 0.0)
            } else if is_real(base) && is_real(exp) && (base.re >= 0.0 || exp.re.fract() == 0.0) {
                Complex64::new(base.re.powf(exp.re), 0.0)
            } else if base == Complex64::new(0.0, 0.0) {
                base
            } else {
                base.powc(exp)
            }
        }
        Node::Call(f, a) => {
            let z = eval(a, vars);
            match f {
                Func::Sin => z.sin(),
                Func::Cos => z.cos(),
                Func::Exp => z.exp(),
                Func::Log => z.ln(),
                Func::Tanh => z.tanh(),
                Func::Sinc => {
                    if z.norm() < 1e-300 {
                        Complex64::new(1.0, 0.0)
                    } else {
                        z.sin() / z
                    }
                }
                Func::Abs => Complex64::new(z.norm(), 0.0),
                Func::Sqrt => {
                    if is_real(z) && z.re >= 0.0 {
                        Complex64::new(z.re.sqrt(), 0.0)
                    } else {
                        z.sqrt()
                    }
                }
            }
        }
    }
}

fn max_var(node: &Node) -> Option<usize> {
    match node {
        Node::Const(_) => None,
        Node::Var(i) => Some(*i),
        Node::Neg(a) | Node::Call(_, a) => max_var(a),
        Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) => {
            max_var(a).max(max_var(b))
        }
    }
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        let tokens = tokenize(src)?;
        if tokens.is_empty() {
            return Err(FslError::Parse("empty expression".into()));
        }
        let mut p = Parser { tokens, pos: 0 };
        let root = p.expr()?;
        if p.pos != p.tokens.len() {
            return Err(FslError::Parse(format!("trailing input at token {}", p.pos)));
        }
        Ok(Expr { root, source: src.to_string() })
    }

    /// Evaluates with `vars[0] = x`, `vars[1] = y`.
    pub fn eval(&self, vars: &[f64]) -> Complex64 {
        eval(&self.root, vars)
    }

    /// Smallest number of coordinates the expression needs (`x` → 1, `y` → 2).
    pub fn min_dims(&self) -> usize {
        max_var(&self.root).map_or(1, |i| i + 1)
    }

    pub fn source(&self) -> &str {
        &self.source
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(s: &str, x: f64) -> Complex64 {
        Expr::parse(s).unwrap().eval(&[x, 0.25])
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(ev("1 + 2 * 3", 0.0).re, 7.0);
        assert_eq!(ev("2 ^ 3 ^ 2", 0.0).re, 512.0);
        assert_eq!(ev("-2 ^ 2", 0.0).re, -4.0);
        assert_eq!(ev("(1 + 2) * 3", 0.0).re, 9.0);
        assert_eq!(ev("8 / 4 / 2", 0.0).re, 1.0);
        assert_eq!(ev("1e-3 * 2E2", 0.0).re, 0.2);
    }

    #[test]
    fn functions_constants_and_variables() {
        assert!((ev("sin(pi * x)", 0.5).re - 1.0).abs() < 1e-15);
        assert!((ev("exp(i * pi)", 0.0) + 1.0).norm() < 1e-15);
        assert_eq!(ev("sinc(0)", 0.0).re, 1.0);
        assert_eq!(ev("x ^ x", 0.0).re, 1.0);
        assert!((ev("x + y", 0.5).re - 0.75).abs() < 1e-15);
        assert!((ev("log(e)", 0.0).re - 1.0).abs() < 1e-15);
        assert_eq!(ev("abs(3 - 4 * i)", 0.0).re, 5.0);
        assert!((ev("tanh(x)", 0.3).re - 0.3f64.tanh()).abs() < 1e-15);
    }

    #[test]
    fn dims_detection() {
        assert_eq!(Expr::parse("cos(x)").unwrap().min_dims(), 1);
        assert_eq!(Expr::parse("x*y").unwrap().min_dims(), 2);
        assert_eq!(Expr::parse("3").unwrap().min_dims(), 1);
    }

    #[test]
    fn parse_errors() {
        for bad in ["", "1 +", "foo(x)", "sin x", "(1", "1 2", "3 $ 4", "z"] {
            assert!(matches!(Expr::parse(bad), Err(FslError::Parse(_))), "{bad}");
        }
    }
}
