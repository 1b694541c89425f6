//! A small scalar-expression language over the single variable `x`.
//!
//! Grammar (precedence climbing, `^` right-associative and tightest):
//!
//! ```text
//! expr    := term (("+" | "-") term)*
//! term    := unary (("*" | "/") unary)*
//! unary   := "-" unary | power
//! power   := atom ("^" unary)?
//! atom    := number | "x" | "(" expr ")" | func "(" expr ")"
//! func    := "sin" | "cos" | "ln" | "abs"
//! ```
//!
//! Piecewise definitions are expressed at the scenario level (a table of
//! coordinate intervals with one expression each), not inside the grammar.
//! There are no user-defined functions and no recursion: evaluation cost is
//! linear in the size of the parsed tree.

use std::fmt;

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Var,
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Ln(Box<Expr>),
    Abs(Box<Expr>),
}

impl Expr {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Expr::Num(c) => *c,
            Expr::Var => x,
            Expr::Add(a, b) => a.eval(x) + b.eval(x),
            Expr::Sub(a, b) => a.eval(x) - b.eval(x),
            Expr::Mul(a, b) => a.eval(x) * b.eval(x),
            Expr::Div(a, b) => a.eval(x) / b.eval(x),
            Expr::Pow(a, b) => a.eval(x).powf(b.eval(x)),
            Expr::Neg(a) => -a.eval(x),
            Expr::Sin(a) => a.eval(x).sin(),
            Expr::Cos(a) => a.eval(x).cos(),
            Expr::Ln(a) => a.eval(x).ln(),
            Expr::Abs(a) => a.eval(x).abs(),
        }
    }
}

#[derive(Debug)]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "expression error at column {}: {}", self.position + 1, self.message)
    }
}

pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser { src: text.as_bytes(), pos: 0 };
    p.skip_ws();
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, message: &str) -> ParseError {
        ParseError { position: self.pos, message: message.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            self.skip_ws();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
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

    fn term(&mut self) -> Result<Expr, ParseError> {
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

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat(b'-') {
            Ok(Expr::Neg(Box::new(self.unary()?)))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.eat(b'^') {
            // right-associative: x^2^3 = x^(2^3)
            Ok(Expr::Pow(Box::new(base), Box::new(self.unary()?)))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.eat(b'(');
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected ')'"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.word(),
            _ => Err(self.err("expected a number, 'x', a function, or '('")),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() || c == b'.' {
                self.pos += 1;
            } else if (c == b'e' || c == b'E') && self.pos > start {
                self.pos += 1;
                if matches!(self.peek(), Some(b'+') | Some(b'-')) {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let v: f64 = text.parse().map_err(|_| ParseError {
            position: start,
            message: format!("invalid number literal '{text}'"),
        })?;
        self.skip_ws();
        Ok(Expr::Num(v))
    }

    fn word(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_string();
        self.skip_ws();
        if name == "x" {
            return Ok(Expr::Var);
        }
        if name == "pi" {
            return Ok(Expr::Num(std::f64::consts::PI));
        }
        let wrap: fn(Box<Expr>) -> Expr = match name.as_str() {
            "sin" => Expr::Sin,
            "cos" => Expr::Cos,
            "ln" => Expr::Ln,
            "abs" => Expr::Abs,
            _ => {
                return Err(ParseError {
                    position: start,
                    message: format!("unknown identifier '{name}' (only x, pi, sin, cos, ln, abs)"),
                })
            }
        };
        if !self.eat(b'(') {
            return Err(self.err("expected '(' after function name"));
        }
        let arg = self.expr()?;
        if !self.eat(b')') {
            return Err(self.err("expected ')'"));
        }
        Ok(wrap(Box::new(arg)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pow_parses_and_evaluates() {
        let e = parse("x^2").unwrap();
        assert_eq!(e, Expr::Pow(Box::new(Expr::Var), Box::new(Expr::Num(2.0))));
        assert_eq!(e.eval(3.0), 9.0);
    }

    #[test]
    fn precedence_and_unary() {
        let e = parse("-x^2 + 3*x - 1/2").unwrap();
        assert_eq!(e.eval(2.0), -4.0 + 6.0 - 0.5);
        assert_eq!(parse("2*x^3^2").unwrap().eval(1.5), 2.0 * 1.5f64.powi(9));
    }

    #[test]
    fn functions() {
        let e = parse("sin(x) * cos(x) + abs(ln(x))").unwrap();
        let x = 0.37;
        assert_eq!(e.eval(x), x.sin() * x.cos() + x.ln().abs());
    }

    #[test]
    fn errors_report_position() {
        assert!(parse("x +").is_err());
        assert!(parse("foo(x)").is_err());
        assert!(parse("(x").is_err());
        let err = parse("x + $").unwrap_err();
        assert_eq!(err.position, 4);
    }
}
