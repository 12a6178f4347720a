//! Closed-form coefficient expressions.
//!
//! The language is a small whitelist: numbers, `pi`, the variables `t`,
//! `x1`..`x9` (`x` is `x1`), `r = |x|`, the operators `+ - * / ^`, and the
//! functions `sin cos exp abs sqrt`, `ball(radius)` (indicator of
//! `|x| <= radius`) and `box(v, half)` (indicator of `|v| <= half`).
//! Anything else is rejected at parse time.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Time,
    Coord(usize),
    Radius,
    Neg(Box<Node>),
    Bin(Op, Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Func {
    Sin,
    Cos,
    Exp,
    Abs,
    Sqrt,
    Ball,
    Box,
}

impl Func {
    fn lookup(name: &str) -> Option<(Func, usize)> {
        Some(match name {
            "sin" => (Func::Sin, 1),
            "cos" => (Func::Cos, 1),
            "exp" => (Func::Exp, 1),
            "abs" => (Func::Abs, 1),
            "sqrt" => (Func::Sqrt, 1),
            "ball" => (Func::Ball, 1),
            "box" => (Func::Box, 2),
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "column {}: {}", self.column, self.message)
    }
}

impl std::error::Error for ParseError {}

/// A parsed expression in `dim` space variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    source: String,
    root: Node,
    dim: usize,
}

impl Expr {
    pub fn parse(source: &str, dim: usize) -> Result<Self, ParseError> {
        let tokens = tokenize(source)?;
        let mut p = Parser { tokens, pos: 0, dim, end: source.len() + 1 };
        let root = p.expr()?;
        if let Some((col, tok)) = p.tokens.get(p.pos) {
            return Err(ParseError { column: *col, message: format!("unexpected {tok}") });
        }
        Ok(Self { source: source.to_string(), root, dim })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, t: f64, x: &[f64]) -> f64 {
        eval(&self.root, t, x)
    }

    /// Whether the expression reads `t`.
    pub fn depends_on_time(&self) -> bool {
        uses_time(&self.root)
    }
}

fn uses_time(n: &Node) -> bool {
    match n {
        Node::Time => true,
        Node::Num(_) | Node::Coord(_) | Node::Radius => false,
        Node::Neg(a) => uses_time(a),
        Node::Bin(_, a, b) => uses_time(a) || uses_time(b),
        Node::Call(_, args) => args.iter().any(uses_time),
    }
}

fn indicator(b: bool) -> f64 {
    if b { 1.0 } else { 0.0 }
}

fn eval(n: &Node, t: f64, x: &[f64]) -> f64 {
    match n {
        Node::Num(v) => *v,
        Node::Time => t,
        Node::Coord(i) => x[*i],
        Node::Radius => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
        Node::Neg(a) => -eval(a, t, x),
        Node::Bin(op, a, b) => {
            let (a, b) = (eval(a, t, x), eval(b, t, x));
            match op {
                Op::Add => a + b,
                Op::Sub => a - b,
                Op::Mul => {
                    // an indicator switching off a singular factor gives 0
                    if a == 0.0 || b == 0.0 { 0.0 } else { a * b }
                }
                Op::Div => a / b,
                Op::Pow => a.powf(b),
            }
        }
        Node::Call(f, args) => {
            let a = eval(&args[0], t, x);
            match f {
                Func::Sin => a.sin(),
                Func::Cos => a.cos(),
                Func::Exp => a.exp(),
                Func::Abs => a.abs(),
                Func::Sqrt => a.sqrt(),
                Func::Ball => indicator(eval(&Node::Radius, t, x) <= a),
                Func::Box => indicator(a.abs() <= eval(&args[1], t, x)),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(v) => write!(f, "number {v}"),
            Tok::Ident(s) => write!(f, "identifier '{s}'"),
            Tok::Sym(c) => write!(f, "'{c}'"),
        }
    }
}

fn tokenize(s: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
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
            let v = text
                .parse::<f64>()
                .map_err(|_| ParseError { column: col, message: format!("malformed number '{text}'") })?;
            out.push((col, Tok::Num(v)));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((col, Tok::Ident(chars[start..i].iter().collect())));
        } else if "+-*/^(),".contains(c) {
            out.push((col, Tok::Sym(c)));
            i += 1;
        } else {
            return Err(ParseError { column: col, message: format!("unexpected character '{c}'") });
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<(usize, Tok)>,
    pos: usize,
    dim: usize,
    end: usize,
}

impl Parser {
    fn peek_sym(&self, c: char) -> bool {
        matches!(self.tokens.get(self.pos), Some((_, Tok::Sym(s))) if *s == c)
    }

    fn column(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |t| t.0)
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.peek_sym(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(ParseError { column: self.column(), message: format!("expected '{c}'") })
        }
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.peek_sym('+') {
                Op::Add
            } else if self.peek_sym('-') {
                Op::Sub
            } else {
                return Ok(lhs);
            };
            self.pos += 1;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(self.term()?));
        }
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.peek_sym('*') {
                Op::Mul
            } else if self.peek_sym('/') {
                Op::Div
            } else {
                return Ok(lhs);
            };
            self.pos += 1;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        if self.peek_sym('-') {
            self.pos += 1;
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        if self.peek_sym('+') {
            self.pos += 1;
            return self.unary();
        }
        let base = self.atom()?;
        if self.peek_sym('^') {
            self.pos += 1;
            return Ok(Node::Bin(Op::Pow, Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node, ParseError> {
        let column = self.column();
        let Some((_, tok)) = self.tokens.get(self.pos).cloned() else {
            return Err(ParseError { column, message: "unexpected end of expression".into() });
        };
        self.pos += 1;
        match tok {
            Tok::Num(v) => Ok(Node::Num(v)),
            Tok::Sym('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if let Some((func, arity)) = Func::lookup(&name) {
                    self.expect('(')?;
                    let mut args = vec![self.expr()?];
                    while self.peek_sym(',') {
                        self.pos += 1;
                        args.push(self.expr()?);
                    }
                    self.expect(')')?;
                    if args.len() != arity {
                        return Err(ParseError {
                            column,
                            message: format!("{name} takes {arity} argument(s), got {}", args.len()),
                        });
                    }
                    return Ok(Node::Call(func, args));
                }
                self.variable(&name, column)
            }
            other => Err(ParseError { column, message: format!("unexpected {other}") }),
        }
    }

    fn variable(&self, name: &str, column: usize) -> Result<Node, ParseError> {
        match name {
            "t" => return Ok(Node::Time),
            "r" => return Ok(Node::Radius),
            "pi" => return Ok(Node::Num(std::f64::consts::PI)),
            "x" => return Ok(Node::Coord(0)),
            _ => {}
        }
        if let Some(i) = name.strip_prefix('x').and_then(|s| s.parse::<usize>().ok()) {
            if (1..=self.dim).contains(&i) {
                return Ok(Node::Coord(i - 1));
            }
            return Err(ParseError { column, message: format!("'{name}' is out of range for dimension {}", self.dim) });
        }
        Err(ParseError { column, message: format!("unknown identifier '{name}'") })
    }
}
