//! A small arithmetic expression language for describing target functions on
//! the command line.
//!
//! Grammar (usual precedence, `^` binds tightest and associates right):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | power
//! power  := atom ['^' factor]
//! atom   := number | variable | function '(' expr {',' expr} ')' | '(' expr ')'
//! ```
//!
//! Variables are `x1, x2, ...` (1-based). Functions: `sin`, `cos`, `exp`,
//! `log`, `sqrt`, `abs` (unary) and `min`, `max` (binary). Errors carry the
//! byte offset into the source string where they were detected.

use std::fmt;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("parse error at byte {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("evaluation error at byte {offset}: {message}")]
pub struct EvalError {
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Abs,
    Min,
    Max,
}

impl Func {
    fn arity(self) -> usize {
        match self {
            Func::Min | Func::Max => 2,
            _ => 1,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "min" => Func::Min,
            "max" => Func::Max,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone)]
pub struct Expr {
    pub kind: ExprKind,
    /// Byte offset of the token that produced this node.
    pub offset: usize,
}

#[derive(Debug, Clone)]
pub enum ExprKind {
    Num(f64),
    /// Zero-based variable index (`x1` parses to index 0).
    Var(usize),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

impl Expr {
    /// Number of input variables the expression needs (highest index used).
    pub fn arity(&self) -> usize {
        match &self.kind {
            ExprKind::Num(_) => 0,
            ExprKind::Var(i) => i + 1,
            ExprKind::Neg(e) => e.arity(),
            ExprKind::Bin(_, a, b) => a.arity().max(b.arity()),
            ExprKind::Call(_, args) => args.iter().map(Expr::arity).max().unwrap_or(0),
        }
    }

    pub fn eval(&self, vars: &[f64]) -> Result<f64, EvalError> {
        let v = match &self.kind {
            ExprKind::Num(n) => *n,
            ExprKind::Var(i) => {
                *vars.get(*i).ok_or_else(|| EvalError {
                    offset: self.offset,
                    message: format!("variable x{} out of range (have {} inputs)", i + 1, vars.len()),
                })?
            }
            ExprKind::Neg(e) => -e.eval(vars)?,
            ExprKind::Bin(op, a, b) => {
                let (x, y) = (a.eval(vars)?, b.eval(vars)?);
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => {
                        if y == 0.0 {
                            return Err(self.err("division by zero"));
                        }
                        x / y
                    }
                    BinOp::Pow => self.pow(x, y)?,
                }
            }
            ExprKind::Call(f, args) => {
                let x = args[0].eval(vars)?;
                match f {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Exp => x.exp(),
                    Func::Log => {
                        if x <= 0.0 {
                            return Err(self.err(&format!("log of non-positive value {x}")));
                        }
                        x.ln()
                    }
                    Func::Sqrt => {
                        if x < 0.0 {
                            return Err(self.err(&format!("sqrt of negative value {x}")));
                        }
                        x.sqrt()
                    }
                    Func::Abs => x.abs(),
                    Func::Min => x.min(args[1].eval(vars)?),
                    Func::Max => x.max(args[1].eval(vars)?),
                }
            }
        };
        if !v.is_finite() {
            return Err(self.err("non-finite result"));
        }
        Ok(v)
    }

    /// `x^y`: exact integer powers up to |y| = 16 use repeated multiplication
    /// (well-defined for any base); everything else requires a positive base,
    /// except `0^y` which is 0 for y > 0 and 1 for y = 0.
    fn pow(&self, x: f64, y: f64) -> Result<f64, EvalError> {
        if y.fract() == 0.0 && y.abs() <= 16.0 {
            return Ok(x.powi(y as i32));
        }
        if x > 0.0 {
            return Ok(x.powf(y));
        }
        if x == 0.0 {
            if y > 0.0 {
                return Ok(0.0);
            }
            return Err(self.err("zero base with non-positive exponent"));
        }
        Err(self.err(&format!("negative base {x} with non-integer exponent {y}")))
    }

    fn err(&self, message: &str) -> EvalError {
        EvalError { offset: self.offset, message: message.into() }
    }

    fn precedence(&self) -> u8 {
        match &self.kind {
            ExprKind::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
            ExprKind::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
            ExprKind::Neg(_) => 3,
            ExprKind::Bin(BinOp::Pow, ..) => 4,
            _ => 5,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Parenthesize children whose precedence is too low for the slot;
        // `-` and `/` need strictly-higher on the right, `^` on the left.
        fn child(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
            if e.precedence() < min {
                write!(f, "(")?;
                fmt::Display::fmt(e, f)?;
                write!(f, ")")
            } else {
                fmt::Display::fmt(e, f)
            }
        }
        match &self.kind {
            ExprKind::Num(n) => write!(f, "{n}"),
            ExprKind::Var(i) => write!(f, "x{}", i + 1),
            ExprKind::Neg(e) => {
                write!(f, "-")?;
                child(f, e, 3)
            }
            ExprKind::Bin(op, a, b) => {
                let (sym, p) = match op {
                    BinOp::Add => ("+", 1),
                    BinOp::Sub => ("-", 1),
                    BinOp::Mul => ("*", 2),
                    BinOp::Div => ("/", 2),
                    BinOp::Pow => ("^", 4),
                };
                let (lp, rp) = match op {
                    BinOp::Add | BinOp::Mul => (p, p),
                    BinOp::Sub | BinOp::Div => (p, p + 1),
                    BinOp::Pow => (p + 1, 3), // right-assoc, accepts unary on the right
                };
                child(f, a, lp)?;
                write!(f, " {sym} ")?;
                child(f, b, rp)
            }
            ExprKind::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    fmt::Display::fmt(a, f)?;
                }
                write!(f, ")")
            }
        }
    }
}

pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let mut p = Parser { src: src.as_bytes(), pos: 0 };
    p.skip_ws();
    if p.pos == p.src.len() {
        return Err(ParseError { offset: 0, message: "empty expression".into() });
    }
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error(p.pos, "unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, offset: usize, message: &str) -> ParseError {
        ParseError { offset, message: message.into() }
    }

    fn skip_ws(&mut self) {
        while self.src.get(self.pos).is_some_and(|b| b.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let off = {
                self.skip_ws();
                self.pos
            };
            let op = match self.peek() {
                Some(b'+') => BinOp::Add,
                Some(b'-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr { kind: ExprKind::Bin(op, Box::new(lhs), Box::new(rhs)), offset: off };
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let off = {
                self.skip_ws();
                self.pos
            };
            let op = match self.peek() {
                Some(b'*') => BinOp::Mul,
                Some(b'/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.factor()?;
            lhs = Expr { kind: ExprKind::Bin(op, Box::new(lhs), Box::new(rhs)), offset: off };
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        self.skip_ws();
        let off = self.pos;
        if self.eat(b'-') {
            let inner = self.factor()?;
            return Ok(Expr { kind: ExprKind::Neg(Box::new(inner)), offset: off });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        self.skip_ws();
        let off = self.pos;
        if self.eat(b'^') {
            let exp = self.factor()?; // right-associative, admits unary minus
            return Ok(Expr { kind: ExprKind::Bin(BinOp::Pow, Box::new(base), Box::new(exp)), offset: off });
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let c = self.peek().ok_or_else(|| self.error(self.pos, "unexpected end of input"))?;
        let off = self.pos;
        if c == b'(' {
            self.pos += 1;
            let e = self.expr()?;
            if !self.eat(b')') {
                return Err(self.error(self.pos, "expected ')'"));
            }
            return Ok(e);
        }
        if c.is_ascii_digit() || c == b'.' {
            return self.number();
        }
        if c.is_ascii_alphabetic() {
            return self.ident();
        }
        Err(self.error(off, &format!("unexpected character '{}'", c as char)))
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while self.src.get(self.pos).is_some_and(|b| b.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            while self.src.get(self.pos).is_some_and(|b| b.is_ascii_digit()) {
                self.pos += 1;
            }
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if self.src.get(self.pos).is_some_and(|b| b.is_ascii_digit()) {
                while self.src.get(self.pos).is_some_and(|b| b.is_ascii_digit()) {
                    self.pos += 1;
                }
            } else {
                self.pos = mark; // "2e" is "2" followed by identifier, let it fail later
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let n: f64 = text
            .parse()
            .map_err(|_| self.error(start, &format!("invalid number '{text}'")))?;
        Ok(Expr { kind: ExprKind::Num(n), offset: start })
    }

    fn ident(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while self.src.get(self.pos).is_some_and(|b| b.is_ascii_alphanumeric()) {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        if let Some(rest) = name.strip_prefix('x') {
            if !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()) {
                let idx: usize = rest
                    .parse()
                    .map_err(|_| self.error(start, &format!("variable index too large in '{name}'")))?;
                if idx == 0 {
                    return Err(self.error(start, "variables are numbered from x1"));
                }
                return Ok(Expr { kind: ExprKind::Var(idx - 1), offset: start });
            }
        }
        let func = Func::from_name(name)
            .ok_or_else(|| self.error(start, &format!("unknown function '{name}'")))?;
        if !self.eat(b'(') {
            return Err(self.error(self.pos, &format!("expected '(' after '{name}'")));
        }
        let mut args = vec![self.expr()?];
        while self.eat(b',') {
            args.push(self.expr()?);
        }
        if !self.eat(b')') {
            return Err(self.error(self.pos, "expected ')'"));
        }
        if args.len() != func.arity() {
            return Err(self.error(
                start,
                &format!("{name} takes {} argument(s), got {}", func.arity(), args.len()),
            ));
        }
        Ok(Expr { kind: ExprKind::Call(func, args), offset: start })
    }
}
