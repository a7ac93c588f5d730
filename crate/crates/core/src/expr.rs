//! A small expression language for densities and weights.
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := unary (("*" | "/") unary)*
//! unary  := "-" unary | power
//! power  := atom ("^" unary)?          right-associative
//! atom   := number | "z1" | "z2" | "i" | "pi"
//!         | ("log" | "exp" | "re" | "im" | "sqrt") "(" expr ")"
//!         | "(" expr ")" | "|" expr "|"
//! ```
//!
//! Numbers use Rust's `f64` parsing (decimal with optional exponent).
//! Evaluation is in complex arithmetic; `|e|` is the modulus, integer
//! exponents up to 64 in magnitude are evaluated by repeated
//! multiplication and all other powers as `exp(e * log b)` on the principal
//! branch. The value of an expression is the real part of the result.

use num_complex::Complex64;

use crate::error::GeometryError;
use crate::grid::{DomainMask, GridFunction};

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    I,
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Abs(Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Log,
    Exp,
    Re,
    Im,
    Sqrt,
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

fn err(column: usize, message: impl Into<String>) -> GeometryError {
    GeometryError::Expr { column: column + 1, message: message.into() }
}

impl<'a> Parser<'a> {
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

    fn expect(&mut self, c: u8) -> Result<(), GeometryError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(err(self.pos, format!("expected '{}'", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Expr, GeometryError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, GeometryError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat(b'/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, GeometryError> {
        if self.eat(b'-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, GeometryError> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let exp = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, GeometryError> {
        let start = {
            self.skip_ws();
            self.pos
        };
        match self.peek() {
            None => Err(err(start, "unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(b'|') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b'|')?;
                Ok(Expr::Abs(Box::new(e)))
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(start),
            Some(c) if c.is_ascii_alphabetic() => {
                let mut end = start;
                while end < self.src.len() && self.src[end].is_ascii_alphanumeric() {
                    end += 1;
                }
                let word = std::str::from_utf8(&self.src[start..end]).unwrap();
                self.pos = end;
                let func = match word {
                    "z1" => return Ok(Expr::Var(0)),
                    "z2" => return Ok(Expr::Var(1)),
                    "i" => return Ok(Expr::I),
                    "pi" => return Ok(Expr::Num(std::f64::consts::PI)),
                    "log" => Func::Log,
                    "exp" => Func::Exp,
                    "re" => Func::Re,
                    "im" => Func::Im,
                    "sqrt" => Func::Sqrt,
                    _ => return Err(err(start, format!("unknown identifier '{word}'"))),
                };
                self.expect(b'(')?;
                let arg = self.expr()?;
                self.expect(b')')?;
                Ok(Expr::Call(func, Box::new(arg)))
            }
            Some(c) => Err(err(start, format!("unexpected character '{}'", c as char))),
        }
    }

    fn number(&mut self, start: usize) -> Result<Expr, GeometryError> {
        let s = self.src;
        let mut end = start;
        while end < s.len() && (s[end].is_ascii_digit() || s[end] == b'.') {
            end += 1;
        }
        if end < s.len() && (s[end] == b'e' || s[end] == b'E') {
            let mut k = end + 1;
            if k < s.len() && (s[k] == b'+' || s[k] == b'-') {
                k += 1;
            }
            if k < s.len() && s[k].is_ascii_digit() {
                while k < s.len() && s[k].is_ascii_digit() {
                    k += 1;
                }
                end = k;
            }
        }
        let text = std::str::from_utf8(&s[start..end]).unwrap();
        let v: f64 = text.parse().map_err(|_| err(start, format!("invalid number '{text}'")))?;
        self.pos = end;
        Ok(Expr::Num(v))
    }
}

fn powc(b: Complex64, e: Complex64) -> Complex64 {
    if e.im == 0.0 && e.re.fract() == 0.0 && e.re.abs() <= 64.0 {
        let k = e.re as i32;
        let mut acc = Complex64::new(1.0, 0.0);
        for _ in 0..k.unsigned_abs() {
            acc *= b;
        }
        return if k < 0 { Complex64::new(1.0, 0.0) / acc } else { acc };
    }
    if b == Complex64::new(0.0, 0.0) {
        return if e.re > 0.0 { b } else { Complex64::new(f64::INFINITY, 0.0) };
    }
    (e * b.ln()).exp()
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr, GeometryError> {
        let mut p = Parser { src: src.as_bytes(), pos: 0 };
        let e = p.expr()?;
        if p.peek().is_some() {
            return Err(err(p.pos, "trailing input"));
        }
        Ok(e)
    }

    /// Parses and checks that only coordinates z1..zn appear.
    pub fn parse_for_dim(src: &str, n: usize) -> Result<Expr, GeometryError> {
        let e = Expr::parse(src)?;
        if let Some(v) = e.max_var() {
            if v >= n {
                return Err(GeometryError::Expr {
                    column: 1,
                    message: format!("z{} used in complex dimension {n}", v + 1),
                });
            }
        }
        Ok(e)
    }

    fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Num(_) | Expr::I => None,
            Expr::Var(k) => Some(*k),
            Expr::Neg(a) | Expr::Abs(a) | Expr::Call(_, a) => a.max_var(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                match (a.max_var(), b.max_var()) {
                    (Some(x), Some(y)) => Some(x.max(y)),
                    (x, y) => x.or(y),
                }
            }
        }
    }

    pub fn eval_complex(&self, z: &[Complex64]) -> Complex64 {
        match self {
            Expr::Num(v) => Complex64::new(*v, 0.0),
            Expr::I => Complex64::new(0.0, 1.0),
            Expr::Var(k) => z.get(*k).copied().unwrap_or(Complex64::new(f64::NAN, 0.0)),
            Expr::Neg(a) => -a.eval_complex(z),
            Expr::Add(a, b) => a.eval_complex(z) + b.eval_complex(z),
            Expr::Sub(a, b) => a.eval_complex(z) - b.eval_complex(z),
            Expr::Mul(a, b) => a.eval_complex(z) * b.eval_complex(z),
            Expr::Div(a, b) => a.eval_complex(z) / b.eval_complex(z),
            Expr::Pow(a, b) => powc(a.eval_complex(z), b.eval_complex(z)),
            Expr::Abs(a) => Complex64::new(a.eval_complex(z).norm(), 0.0),
            Expr::Call(f, a) => {
                let v = a.eval_complex(z);
                match f {
                    Func::Log => {
                        if v == Complex64::new(0.0, 0.0) {
                            Complex64::new(f64::NEG_INFINITY, 0.0)
                        } else {
                            v.ln()
                        }
                    }
                    Func::Exp => v.exp(),
                    Func::Re => Complex64::new(v.re, 0.0),
                    Func::Im => Complex64::new(v.im, 0.0),
                    Func::Sqrt => v.sqrt(),
                }
            }
        }
    }

    /// Real part of the complex value.
    pub fn eval(&self, z: &[Complex64]) -> f64 {
        self.eval_complex(z).re
    }

    /// Samples the expression on interior and boundary nodes.
    pub fn to_field(&self, mask: &DomainMask) -> Result<GridFunction, GeometryError> {
        Ok(GridFunction::from_fn(mask, |z| self.eval(z))?)
    }
}
