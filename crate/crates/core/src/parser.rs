//! Text syntax for fractional polynomials.
//!
//! ```text
//! expr     := ['+' | '-'] term (('+' | '-') term)*
//! term     := power ('*' power)*
//! power    := primary ['^' exponent]
//! primary  := number | 'i' | 't' index | 's' | '(' expr ')'
//! number   := integer | decimal | integer '/' integer, optionally suffixed by 'i'
//! exponent := integer | '(' integer ['/' integer] ')'
//! ```
//!
//! Rational exponents must be parenthesized (`t1^(3/2)`), and only apply to
//! a bare monomial. The auxiliary variable `s` is accepted only by
//! [`parse_extended`]. Formatting prints terms in descending canonical
//! order, and its output always parses back to the same polynomial.

use num_complex::Complex;
use num_rational::Ratio;
use num_traits::{CheckedMul, One, Zero};

use crate::error::{Error, Result};
use crate::frac_poly::{ExponentVector, FracPoly};
use crate::scalar::{Exponent, Scalar};
use crate::theta_kernel::ExtendedPoly;

const MAX_DEPTH: usize = 200;
const MAX_EXPONENT_PART: u64 = 1 << 20;
const MAX_POLY_POWER: u64 = 64;
const MAX_TERMS: usize = 10_000;

pub fn parse_fracpoly<S: Scalar>(text: &str, dim: usize) -> Result<FracPoly<S>> {
    let (value, _) = Parser::<S>::new(text, dim, false).run()?;
    Ok(value
        .into_frac()
        .expect("s is rejected by the lexer when not allowed"))
}

/// Parses an expression in `t1…tn` and the auxiliary variable `s`.
pub fn parse_extended<S: Scalar>(text: &str, dim: usize) -> Result<ExtendedPoly<S>> {
    Parser::<S>::new(text, dim, true).run().map(|(v, _)| v)
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num { text: String, imaginary: bool },
    ImagUnit,
    Var(usize),
    S,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

fn err(offset: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        offset,
        message: message.into(),
    }
}

fn lex(text: &str, dim: usize, allow_s: bool) -> Result<Vec<(Tok, usize)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let start = i;
        let b = bytes[i];
        let tok = match b {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                // decimal exponent: e, optional sign, at least one digit
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text = text[start..i].to_string();
                let imaginary = i < bytes.len() && bytes[i] == b'i';
                if imaginary {
                    i += 1;
                }
                if i < bytes.len() && bytes[i].is_ascii_alphanumeric() {
                    return Err(err(i, "unexpected character after number"));
                }
                out.push((Tok::Num { text, imaginary }, start));
                continue;
            }
            b't' => {
                i += 1;
                let digits = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if digits == i {
                    return Err(err(start, "expected variable index after 't'"));
                }
                let k: usize = text[digits..i].parse().unwrap_or(usize::MAX);
                if k == 0 || k > dim {
                    return Err(err(
                        start,
                        format!("variable index {} out of range 1..{dim}", &text[digits..i]),
                    ));
                }
                out.push((Tok::Var(k - 1), start));
                continue;
            }
            b'i' => Tok::ImagUnit,
            b's' if allow_s => Tok::S,
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(err(start, format!("unexpected character {ch:?}")));
            }
        };
        i += 1;
        if matches!(tok, Tok::ImagUnit | Tok::S)
            && i < bytes.len()
            && bytes[i].is_ascii_alphanumeric()
        {
            return Err(err(i, "unexpected character after identifier"));
        }
        out.push((tok, start));
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser<'a, S> {
    text: &'a str,
    dim: usize,
    allow_s: bool,
    toks: Vec<(Tok, usize)>,
    pos: usize,
    depth: usize,
    _scalar: std::marker::PhantomData<S>,
}

impl<'a, S: Scalar> Parser<'a, S> {
    fn new(text: &'a str, dim: usize, allow_s: bool) -> Self {
        Parser {
            text,
            dim,
            allow_s,
            toks: Vec::new(),
            pos: 0,
            depth: 0,
            _scalar: std::marker::PhantomData,
        }
    }

    fn run(mut self) -> Result<(ExtendedPoly<S>, usize)> {
        self.toks = lex(self.text, self.dim, self.allow_s)?;
        let value = self.expr()?;
        match self.peek() {
            Tok::End => Ok((value, self.pos)),
            _ => Err(err(self.offset(), "unexpected token")),
        }
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(err(self.offset(), format!("expected {what}")))
        }
    }

    fn guard(&self, at: usize, v: ExtendedPoly<S>) -> Result<ExtendedPoly<S>> {
        let mut terms = 0;
        for c in v.coeffs().values() {
            terms += c.num_terms();
            for alpha in c.terms().keys() {
                if alpha
                    .components()
                    .iter()
                    .any(|e| *e.numer() > MAX_EXPONENT_PART || *e.denom() > MAX_EXPONENT_PART)
                {
                    return Err(err(at, "exponent too large"));
                }
            }
        }
        if terms > MAX_TERMS {
            return Err(err(at, "expression expands to too many terms"));
        }
        Ok(v)
    }

    fn lift(&self, at: usize, r: Result<ExtendedPoly<S>>) -> Result<ExtendedPoly<S>> {
        r.map_err(|e| err(at, e.to_string()))
            .and_then(|v| self.guard(at, v))
    }

    fn expr(&mut self) -> Result<ExtendedPoly<S>> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(err(self.offset(), "expression nested too deeply"));
        }
        let negate_first = match self.peek() {
            Tok::Minus => {
                self.bump();
                true
            }
            Tok::Plus => {
                self.bump();
                false
            }
            _ => false,
        };
        let at = self.offset();
        let mut acc = self.term()?;
        if negate_first {
            acc = acc.neg();
        }
        loop {
            let negate = match self.peek() {
                Tok::Plus => false,
                Tok::Minus => true,
                _ => break,
            };
            self.bump();
            let at = self.offset();
            let rhs = self.term()?;
            let rhs = if negate { rhs.neg() } else { rhs };
            acc = self.lift(at, acc.add(&rhs))?;
        }
        self.depth -= 1;
        self.guard(at, acc)
    }

    fn term(&mut self) -> Result<ExtendedPoly<S>> {
        let mut acc = self.power()?;
        while *self.peek() == Tok::Star {
            self.bump();
            let at = self.offset();
            let rhs = self.power()?;
            acc = self.lift(at, acc.mul(&rhs))?;
        }
        Ok(acc)
    }

    fn power(&mut self) -> Result<ExtendedPoly<S>> {
        let at = self.offset();
        let base = self.primary()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let exp_at = self.offset();
        let exp = self.exponent()?;
        if exp.is_integer() {
            let k = exp.to_integer();
            return self.int_power(at, exp_at, base, k);
        }
        let Some(alpha) = base.as_unit_monomial() else {
            return Err(err(
                exp_at,
                "fractional exponent requires a bare monomial base such as t1",
            ));
        };
        let scaled = alpha
            .components()
            .iter()
            .map(|a| a.checked_mul(&exp))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| err(exp_at, "exponent too large"))?;
        let mono = FracPoly::monomial(ExponentVector::new(scaled), Complex::one());
        self.guard(exp_at, ExtendedPoly::from_frac(mono))
    }

    fn int_power(
        &self,
        at: usize,
        exp_at: usize,
        base: ExtendedPoly<S>,
        k: u64,
    ) -> Result<ExtendedPoly<S>> {
        if let Some(alpha) = base.as_unit_monomial() {
            let kk = Exponent::from_integer(k);
            let scaled = alpha
                .components()
                .iter()
                .map(|a| a.checked_mul(&kk))
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| err(exp_at, "exponent too large"))?;
            let mono = FracPoly::monomial(ExponentVector::new(scaled), Complex::one());
            return self.guard(exp_at, ExtendedPoly::from_frac(mono));
        }
        if k > MAX_POLY_POWER {
            return Err(err(
                exp_at,
                format!("integer power above {MAX_POLY_POWER} of a non-monomial"),
            ));
        }
        let mut acc = ExtendedPoly::from_frac(FracPoly::one(self.dim));
        for _ in 0..k {
            acc = self.lift(at, acc.mul(&base))?;
        }
        Ok(acc)
    }

    fn exponent(&mut self) -> Result<Exponent> {
        match self.peek().clone() {
            Tok::Minus => Err(err(self.offset(), "negative exponent")),
            Tok::Num { .. } => self.exponent_integer(),
            Tok::LParen => {
                self.bump();
                if *self.peek() == Tok::Minus {
                    return Err(err(self.offset(), "negative exponent"));
                }
                let num = self.exponent_integer()?;
                let value = if *self.peek() == Tok::Slash {
                    self.bump();
                    let den_at = self.offset();
                    let den = self.exponent_integer()?;
                    if den.is_zero() {
                        return Err(err(den_at, "zero exponent denominator"));
                    }
                    num / den
                } else {
                    num
                };
                self.expect(Tok::RParen, "')' closing the exponent")?;
                Ok(value)
            }
            _ => Err(err(self.offset(), "expected exponent")),
        }
    }

    fn exponent_integer(&mut self) -> Result<Exponent> {
        let (tok, at) = self.bump();
        match tok {
            Tok::Num {
                text,
                imaginary: false,
            } if text.bytes().all(|b| b.is_ascii_digit()) => {
                let v: u64 = text
                    .parse()
                    .ok()
                    .filter(|v| *v <= MAX_EXPONENT_PART)
                    .ok_or_else(|| err(at, "exponent too large"))?;
                Ok(Ratio::from_integer(v))
            }
            Tok::Minus => Err(err(at, "negative exponent")),
            _ => Err(err(at, "exponent must be a non-negative integer")),
        }
    }

    fn primary(&mut self) -> Result<ExtendedPoly<S>> {
        let (tok, at) = self.bump();
        match tok {
            Tok::Num { text, imaginary } => {
                let (text, imaginary) = if *self.peek() == Tok::Slash {
                    self.bump();
                    match self.bump() {
                        (
                            Tok::Num {
                                text: den,
                                imaginary: im,
                            },
                            _,
                        ) if !imaginary => (format!("{text}/{den}"), im),
                        (_, off) => return Err(err(off, "expected denominator")),
                    }
                } else {
                    (text, imaginary)
                };
                let v = S::parse_literal(&text)
                    .ok_or_else(|| err(at, format!("invalid number {text:?}")))?;
                let c = if imaginary {
                    Complex::new(S::zero(), v)
                } else {
                    Complex::new(v, S::zero())
                };
                Ok(ExtendedPoly::from_frac(FracPoly::constant(self.dim, c)))
            }
            Tok::ImagUnit => Ok(ExtendedPoly::from_frac(FracPoly::constant(
                self.dim,
                Complex::i(),
            ))),
            Tok::Var(j) => Ok(ExtendedPoly::from_frac(FracPoly::var(self.dim, j))),
            Tok::S => Ok(ExtendedPoly::s_power(self.dim, 1)),
            Tok::LParen => {
                let v = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(v)
            }
            Tok::End => Err(err(at, "unexpected end of input")),
            _ => Err(err(at, "expected a number, variable or '('")),
        }
    }
}

fn format_exponent(var: &str, e: &Exponent) -> String {
    if e.is_one() {
        var.to_string()
    } else if e.is_integer() {
        format!("{var}^{e}")
    } else {
        format!("{var}^({e})")
    }
}

fn monomial_factors(alpha: &ExponentVector) -> Vec<String> {
    alpha
        .components()
        .iter()
        .enumerate()
        .filter(|(_, e)| !e.is_zero())
        .map(|(j, e)| format_exponent(&format!("t{}", j + 1), e))
        .collect()
}

/// Appends one term; `first` controls whether a leading `+` is omitted.
fn push_term<S: Scalar>(out: &mut String, c: &Complex<S>, factors: &[String], first: bool) {
    let mono = factors.join("*");
    let (negative, magnitude) = if c.im.is_zero() {
        (c.re.is_negative(), c.re.abs().to_string())
    } else if c.re.is_zero() {
        let m = c.im.abs();
        let text = if m.is_one() {
            "i".to_string()
        } else {
            format!("{m}i")
        };
        (c.im.is_negative(), text)
    } else {
        let sign = if c.im.is_negative() { "-" } else { "+" };
        (false, format!("({} {sign} {}i)", c.re, c.im.abs()))
    };
    match (first, negative) {
        (true, true) => out.push('-'),
        (true, false) => {}
        (false, true) => out.push_str(" - "),
        (false, false) => out.push_str(" + "),
    }
    if mono.is_empty() {
        out.push_str(&magnitude);
    } else if magnitude == "1" {
        out.push_str(&mono);
    } else {
        out.push_str(&magnitude);
        out.push('*');
        out.push_str(&mono);
    }
}

/// Canonical text, highest exponent first. The zero polynomial prints as `"0"`.
pub fn format_fracpoly<S: Scalar>(f: &FracPoly<S>) -> String {
    let mut out = String::new();
    for (alpha, c) in f.terms().iter().rev() {
        let first = out.is_empty();
        push_term(&mut out, c, &monomial_factors(alpha), first);
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

pub fn format_extended<S: Scalar>(q: &ExtendedPoly<S>) -> String {
    let mut out = String::new();
    for (&b, coef) in q.coeffs().iter().rev() {
        for (alpha, c) in coef.terms().iter().rev() {
            let mut factors = monomial_factors(alpha);
            if b > 0 {
                factors.push(format_exponent("s", &Exponent::from_integer(b as u64)));
            }
            let first = out.is_empty();
            push_term(&mut out, c, &factors, first);
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}
