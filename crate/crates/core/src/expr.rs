//! Lexer, expression trees and the small grammars built on them.
//!
//! One recursive-descent parser serves element expressions, residue
//! constants, Eisenstein polynomials in `z`, rational literals, curve
//! lists and the keyword forms used for fields and extensions.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, ParseError, Result};
use crate::residue::{ResCtx, ResElem};

/// Deepest nesting accepted before the parser bails out.
pub const MAX_DEPTH: usize = 256;
/// Largest accepted exponent magnitude.
pub const MAX_EXPONENT: i64 = 4096;
/// Longest accepted integer literal, in decimal digits.
pub const MAX_LITERAL_DIGITS: usize = 2000;
/// Most tokens accepted in one input; keeps tree depth bounded for evaluation.
pub const MAX_TOKENS: usize = 4096;

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    Int(BigInt),
    Ident(String),
    Str(String),
    Punct(char),
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub pos: usize,
}

pub(crate) fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        if out.len() >= MAX_TOKENS {
            return Err(ParseError::new(i, "input too long"));
        }
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i - start > MAX_LITERAL_DIGITS {
                return Err(ParseError::new(start, "integer literal too long"));
            }
            let n: BigInt = text[start..i].parse().map_err(|_| ParseError::new(start, "bad integer"))?;
            out.push(Token { tok: Tok::Int(n), pos: start });
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Token { tok: Tok::Ident(text[start..i].to_string()), pos: start });
        } else if c == b'"' {
            let start = i;
            i += 1;
            let body = i;
            while i < bytes.len() && bytes[i] != b'"' {
                i += 1;
            }
            if i >= bytes.len() {
                return Err(ParseError::new(start, "unterminated string"));
            }
            out.push(Token { tok: Tok::Str(text[body..i].to_string()), pos: start });
            i += 1;
        } else if b"+-*/^()[],=".contains(&c) {
            out.push(Token { tok: Tok::Punct(c as char), pos: i });
            i += 1;
        } else {
            // Report the char boundary, not a byte inside a multibyte char.
            return Err(ParseError::new(i, format!("unexpected character {:?}", text[i..].chars().next().unwrap_or('?'))));
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Int(BigInt),
    Sym {
        name: String,
        pos: usize,
    },
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>, usize),
    Pow(Box<Expr>, i64),
    /// `O(x)`: zero known only up to the valuation of `x`.
    BigO(Box<Expr>, usize),
}

pub(crate) struct Parser {
    toks: Vec<Token>,
    idx: usize,
    depth: usize,
    end: usize,
}

impl Parser {
    pub fn new(text: &str) -> Result<Self, ParseError> {
        Ok(Parser { toks: lex(text)?, idx: 0, depth: 0, end: text.len() })
    }

    pub fn pos(&self) -> usize {
        self.toks.get(self.idx).map_or(self.end, |t| t.pos)
    }

    pub fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|t| &t.tok)
    }

    pub fn at_punct(&self, c: char) -> bool {
        self.peek() == Some(&Tok::Punct(c))
    }

    pub fn eat_punct(&mut self, c: char) -> bool {
        if self.at_punct(c) {
            self.idx += 1;
            true
        } else {
            false
        }
    }

    pub fn expect_punct(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat_punct(c) {
            Ok(())
        } else {
            Err(ParseError::new(self.pos(), format!("expected '{c}'")))
        }
    }

    pub fn expect_ident(&mut self) -> Result<(String, usize), ParseError> {
        let pos = self.pos();
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.idx += 1;
                Ok((s, pos))
            }
            _ => Err(ParseError::new(pos, "expected identifier")),
        }
    }

    pub fn expect_string(&mut self) -> Result<String, ParseError> {
        let pos = self.pos();
        match self.peek() {
            Some(Tok::Str(s)) => {
                let s = s.clone();
                self.idx += 1;
                Ok(s)
            }
            _ => Err(ParseError::new(pos, "expected string literal")),
        }
    }

    pub fn expect_uint(&mut self) -> Result<u64, ParseError> {
        let pos = self.pos();
        match self.peek() {
            Some(Tok::Int(n)) => {
                let v = n.to_u64().ok_or_else(|| ParseError::new(pos, "integer out of range"))?;
                self.idx += 1;
                Ok(v)
            }
            _ => Err(ParseError::new(pos, "expected integer")),
        }
    }

    pub fn finish(&self) -> Result<(), ParseError> {
        if self.idx == self.toks.len() {
            Ok(())
        } else {
            Err(ParseError::new(self.pos(), "unexpected trailing input"))
        }
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(ParseError::new(self.pos(), "expression nested too deeply"));
        }
        Ok(())
    }

    pub fn expr(&mut self) -> Result<Expr, ParseError> {
        self.enter()?;
        let mut lhs = self.term()?;
        loop {
            if self.eat_punct('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat_punct('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                break;
            }
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat_punct('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.at_punct('/') {
                let pos = self.pos();
                self.idx += 1;
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?), pos);
            } else {
                break;
            }
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat_punct('-') {
            self.enter()?;
            let inner = self.unary()?;
            self.depth -= 1;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.base()?;
        if self.eat_punct('^') {
            let pos = self.pos();
            let paren = self.eat_punct('(');
            let neg = self.eat_punct('-');
            let n = match self.peek() {
                Some(Tok::Int(n)) => n.clone(),
                _ => return Err(ParseError::new(pos, "expected integer exponent")),
            };
            self.idx += 1;
            if paren {
                self.expect_punct(')')?;
            }
            let n = n.to_i64().filter(|n| *n <= MAX_EXPONENT).ok_or_else(|| ParseError::new(pos, "exponent too large"))?;
            return Ok(Expr::Pow(Box::new(base), if neg { -n } else { n }));
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.idx += 1;
                Ok(Expr::Int(n))
            }
            Some(Tok::Ident(name)) => {
                self.idx += 1;
                if name == "O" && self.at_punct('(') {
                    self.idx += 1;
                    let inner = self.expr()?;
                    self.expect_punct(')')?;
                    return Ok(Expr::BigO(Box::new(inner), pos));
                }
                Ok(Expr::Sym { name, pos })
            }
            Some(Tok::Punct('(')) => {
                self.idx += 1;
                let inner = self.expr()?;
                self.expect_punct(')')?;
                Ok(inner)
            }
            _ => Err(ParseError::new(pos, "expected number, symbol or '('")),
        }
    }
}

/// Parses a complete expression.
pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser::new(text)?;
    let e = p.expr()?;
    p.finish()?;
    Ok(e)
}

/// An algebra that expression trees can be evaluated in.
pub trait EvalTarget {
    type Value: Clone;

    fn int(&self, n: &BigInt) -> Result<Self::Value>;
    fn symbol(&self, name: &str, pos: usize) -> Result<Self::Value>;
    fn add(&self, a: &Self::Value, b: &Self::Value) -> Result<Self::Value>;
    fn sub(&self, a: &Self::Value, b: &Self::Value) -> Result<Self::Value>;
    fn mul(&self, a: &Self::Value, b: &Self::Value) -> Result<Self::Value>;
    fn div(&self, a: &Self::Value, b: &Self::Value) -> Result<Self::Value>;
    fn neg(&self, a: &Self::Value) -> Result<Self::Value>;
    fn one(&self) -> Self::Value;
    /// Rough size used to refuse runaway intermediate results.
    fn size(&self, a: &Self::Value) -> usize;

    fn big_o(&self, _arg: &Self::Value, pos: usize) -> Result<Self::Value> {
        Err(ParseError::new(pos, "O(..) is not allowed here").into())
    }
}

/// Size budget for intermediate values.
pub const MAX_VALUE_SIZE: usize = 1 << 16;

pub fn eval<T: EvalTarget>(expr: &Expr, target: &T) -> Result<T::Value> {
    let v = match expr {
        Expr::Int(n) => target.int(n)?,
        Expr::Sym { name, pos } => target.symbol(name, *pos)?,
        Expr::Neg(a) => target.neg(&eval(a, target)?)?,
        Expr::Add(a, b) => target.add(&eval(a, target)?, &eval(b, target)?)?,
        Expr::Sub(a, b) => target.sub(&eval(a, target)?, &eval(b, target)?)?,
        Expr::Mul(a, b) => {
            let (x, y) = (eval(a, target)?, eval(b, target)?);
            if target.size(&x) + target.size(&y) > MAX_VALUE_SIZE {
                return Err(Error::TooLarge);
            }
            target.mul(&x, &y)?
        }
        Expr::Div(a, b, _) => target.div(&eval(a, target)?, &eval(b, target)?)?,
        Expr::Pow(a, n) => pow(target, &eval(a, target)?, *n)?,
        Expr::BigO(a, pos) => target.big_o(&eval(a, target)?, *pos)?,
    };
    if target.size(&v) > MAX_VALUE_SIZE {
        return Err(Error::TooLarge);
    }
    Ok(v)
}

fn pow<T: EvalTarget>(target: &T, base: &T::Value, n: i64) -> Result<T::Value> {
    let mut acc = target.one();
    let mut sq = base.clone();
    let mut e = n.unsigned_abs();
    while e > 0 {
        if e & 1 == 1 {
            if target.size(&acc) + target.size(&sq) > MAX_VALUE_SIZE {
                return Err(Error::TooLarge);
            }
            acc = target.mul(&acc, &sq)?;
        }
        e >>= 1;
        if e > 0 {
            if 2 * target.size(&sq) > MAX_VALUE_SIZE {
                return Err(Error::TooLarge);
            }
            sq = target.mul(&sq, &sq)?;
        }
    }
    if n < 0 {
        acc = target.div(&target.one(), &acc)?;
    }
    Ok(acc)
}

struct ResidueTarget<'a>(&'a ResCtx);

impl EvalTarget for ResidueTarget<'_> {
    type Value = ResElem;

    fn int(&self, n: &BigInt) -> Result<ResElem> {
        Ok(if n.bit(0) { self.0.one() } else { self.0.zero() })
    }
    fn symbol(&self, name: &str, pos: usize) -> Result<ResElem> {
        match name {
            "g" => Ok(self.0.gen()),
            _ => Err(ParseError::new(pos, format!("unknown symbol '{name}'")).into()),
        }
    }
    fn add(&self, a: &ResElem, b: &ResElem) -> Result<ResElem> {
        a.add(b)
    }
    fn sub(&self, a: &ResElem, b: &ResElem) -> Result<ResElem> {
        a.add(b)
    }
    fn mul(&self, a: &ResElem, b: &ResElem) -> Result<ResElem> {
        a.mul(b)
    }
    fn div(&self, a: &ResElem, b: &ResElem) -> Result<ResElem> {
        a.div(b)
    }
    fn neg(&self, a: &ResElem) -> Result<ResElem> {
        Ok(*a)
    }
    fn one(&self) -> ResElem {
        self.0.one()
    }
    fn size(&self, _a: &ResElem) -> usize {
        1
    }
}

pub(crate) fn eval_residue(expr: &Expr, ctx: &ResCtx) -> Result<ResElem> {
    eval(expr, &ResidueTarget(ctx))
}

/// Dense integer polynomial, lowest degree first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntPoly(pub Vec<BigInt>);

impl IntPoly {
    pub fn degree(&self) -> Option<usize> {
        self.0.iter().rposition(|c| !c.is_zero())
    }

    fn trimmed(mut self) -> Self {
        while self.0.last().is_some_and(|c| c.is_zero()) {
            self.0.pop();
        }
        self
    }

    pub fn coeff(&self, i: usize) -> BigInt {
        self.0.get(i).cloned().unwrap_or_default()
    }
}

impl std::fmt::Display for IntPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut first = true;
        for (i, c) in self.0.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { "-" } else { "+" })?;
            }
            first = false;
            let unit = mag == BigInt::from(1);
            match i {
                0 => write!(f, "{mag}")?,
                _ => {
                    if !unit {
                        write!(f, "{mag}*")?;
                    }
                    if i == 1 {
                        f.write_str("z")?;
                    } else {
                        write!(f, "z^{i}")?;
                    }
                }
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

struct PolyTarget;

impl EvalTarget for PolyTarget {
    type Value = IntPoly;

    fn int(&self, n: &BigInt) -> Result<IntPoly> {
        Ok(IntPoly(vec![n.clone()]).trimmed())
    }
    fn symbol(&self, name: &str, pos: usize) -> Result<IntPoly> {
        match name {
            "z" => Ok(IntPoly(vec![BigInt::zero(), BigInt::from(1)])),
            _ => Err(ParseError::new(pos, format!("unknown symbol '{name}' (polynomials use z)")).into()),
        }
    }
    fn add(&self, a: &IntPoly, b: &IntPoly) -> Result<IntPoly> {
        let n = a.0.len().max(b.0.len());
        Ok(IntPoly((0..n).map(|i| a.coeff(i) + b.coeff(i)).collect()).trimmed())
    }
    fn sub(&self, a: &IntPoly, b: &IntPoly) -> Result<IntPoly> {
        let n = a.0.len().max(b.0.len());
        Ok(IntPoly((0..n).map(|i| a.coeff(i) - b.coeff(i)).collect()).trimmed())
    }
    fn mul(&self, a: &IntPoly, b: &IntPoly) -> Result<IntPoly> {
        if a.0.is_empty() || b.0.is_empty() {
            return Ok(IntPoly(vec![]));
        }
        let mut out = vec![BigInt::zero(); a.0.len() + b.0.len() - 1];
        for (i, x) in a.0.iter().enumerate() {
            for (j, y) in b.0.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        Ok(IntPoly(out).trimmed())
    }
    fn div(&self, _a: &IntPoly, _b: &IntPoly) -> Result<IntPoly> {
        Err(Error::InvalidField("division is not allowed in a defining polynomial".into()))
    }
    fn neg(&self, a: &IntPoly) -> Result<IntPoly> {
        Ok(IntPoly(a.0.iter().map(|c| -c).collect()))
    }
    fn one(&self) -> IntPoly {
        IntPoly(vec![BigInt::from(1)])
    }
    fn size(&self, a: &IntPoly) -> usize {
        a.0.iter().map(|c| c.bits() as usize + 1).sum()
    }
}

/// Parses an integer polynomial in `z`.
pub fn parse_int_poly(text: &str) -> Result<IntPoly> {
    let expr = parse_expr(text)?;
    eval(&expr, &PolyTarget)
}

struct RationalTarget;

impl EvalTarget for RationalTarget {
    type Value = num_rational::BigRational;

    fn int(&self, n: &BigInt) -> Result<Self::Value> {
        Ok(Self::Value::from_integer(n.clone()))
    }
    fn symbol(&self, name: &str, pos: usize) -> Result<Self::Value> {
        Err(ParseError::new(pos, format!("unexpected symbol '{name}' in a rational literal")).into())
    }
    fn add(&self, a: &Self::Value, b: &Self::Value) -> Result<Self::Value> {
        Ok(a + b)
    }
    fn sub(&self, a: &Self::Value, b: &Self::Value) -> Result<Self::Value> {
        Ok(a - b)
    }
    fn mul(&self, a: &Self::Value, b: &Self::Value) -> Result<Self::Value> {
        Ok(a * b)
    }
    fn div(&self, a: &Self::Value, b: &Self::Value) -> Result<Self::Value> {
        if b.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(a / b)
    }
    fn neg(&self, a: &Self::Value) -> Result<Self::Value> {
        Ok(-a)
    }
    fn one(&self) -> Self::Value {
        Self::Value::from_integer(BigInt::from(1))
    }
    fn size(&self, a: &Self::Value) -> usize {
        (a.numer().bits() + a.denom().bits()) as usize
    }
}

/// Parses a rational number such as `-7/3` (any constant expression is accepted).
pub fn parse_rational(text: &str) -> Result<num_rational::BigRational> {
    let expr = parse_expr(text)?;
    eval(&expr, &RationalTarget)
}
