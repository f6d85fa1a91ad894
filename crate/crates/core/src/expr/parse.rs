//! Pratt parser for the expression grammar.
//!
//! Literals are exact rationals (`2`, `3/2`; the slash binds only inside a
//! literal). Operators are `+ - * ^` with non-negative integer exponents.
//! Symbols: `u`, `t`, `x1..xn`, jet variables `u_x1x2...`, `u_t`, and the
//! functions `exp(r*u)`, `exp(r*t)`, `exp(r*x_i)`, `sin(r*x_i)`,
//! `cos(r*x_i)`.

use num_traits::{One, Signed, ToPrimitive, Zero};

use super::coeff::{CoeffAtom, TrigKind};
use super::diffexpr::{DiffExpr, MultiIndex};
use super::rational::{parse_rational, Rational};
use super::upoly::{UKey, UPoly};
use super::ExprError;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Vocabulary {
    /// `u` and `exp(r*u)` only.
    UOnly,
    Full,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Rational),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
    End,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(Tok, usize)>, ExprError> {
        let mut lx = Lexer {
            src: src.as_bytes(),
            pos: 0,
        };
        let mut out = Vec::new();
        loop {
            let (tok, at) = lx.next()?;
            let end = tok == Tok::End;
            out.push((tok, at));
            if end {
                return Ok(out);
            }
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn digits(&mut self) -> &'a str {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos]).unwrap()
    }

    fn next(&mut self) -> Result<(Tok, usize), ExprError> {
        while self.peek().is_some_and(|c| c.is_ascii_whitespace()) {
            self.pos += 1;
        }
        let at = self.pos;
        let Some(c) = self.peek() else {
            return Ok((Tok::End, at));
        };
        let tok = match c {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' => {
                let num = self.digits().to_string();
                let mut den = String::from("1");
                if self.peek() == Some(b'.')
                    || self.peek() == Some(b'e')
                    || self.peek() == Some(b'E')
                {
                    return Err(ExprError::NonRational { pos: at });
                }
                if self.peek() == Some(b'/') {
                    self.pos += 1;
                    if !self.peek().is_some_and(|c| c.is_ascii_digit()) {
                        return Err(ExprError::Syntax {
                            pos: self.pos,
                            msg: "expected denominator digits".into(),
                        });
                    }
                    den = self.digits().to_string();
                    if self.peek() == Some(b'.') {
                        return Err(ExprError::NonRational { pos: at });
                    }
                }
                let r = parse_rational(&format!("{num}/{den}")).ok_or(ExprError::Syntax {
                    pos: at,
                    msg: "zero denominator".into(),
                })?;
                return Ok((Tok::Num(r), at));
            }
            b'.' => return Err(ExprError::NonRational { pos: at }),
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self
                    .peek()
                    .is_some_and(|c| c.is_ascii_alphanumeric() || c == b'_')
                {
                    self.pos += 1;
                }
                let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                return Ok((Tok::Ident(s.to_string()), at));
            }
            b'/' => {
                return Err(ExprError::Syntax {
                    pos: at,
                    msg: "'/' is only allowed inside a rational literal".into(),
                })
            }
            other => {
                return Err(ExprError::Syntax {
                    pos: at,
                    msg: format!("unexpected character '{}'", other as char),
                })
            }
        };
        self.pos += 1;
        Ok((tok, at))
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    idx: usize,
    vocab: Vocabulary,
}

const BP_SUM: u8 = 1;
const BP_PRODUCT: u8 = 3;
const BP_UNARY: u8 = 5;
const BP_POWER: u8 = 7;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.idx].0
    }

    fn pos(&self) -> usize {
        self.toks[self.idx].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.idx].clone();
        if self.idx + 1 < self.toks.len() {
            self.idx += 1;
        }
        t
    }

    fn syntax<T>(&self, msg: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError::Syntax {
            pos: self.pos(),
            msg: msg.into(),
        })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ExprError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.syntax(format!("expected {what}"))
        }
    }

    fn expr(&mut self, min_bp: u8) -> Result<DiffExpr, ExprError> {
        let mut lhs = self.prefix()?;
        loop {
            let (lbp, op) = match self.peek() {
                Tok::Plus | Tok::Minus => (BP_SUM, self.peek().clone()),
                Tok::Star => (BP_PRODUCT, Tok::Star),
                Tok::Caret => (BP_POWER, Tok::Caret),
                Tok::End | Tok::RParen => break,
                _ => return self.syntax("expected an operator"),
            };
            if lbp < min_bp {
                break;
            }
            let op_pos = self.pos();
            self.bump();
            lhs = match op {
                Tok::Plus => &lhs + &self.expr(lbp + 1)?,
                Tok::Minus => &lhs - &self.expr(lbp + 1)?,
                Tok::Star => {
                    let rhs = self.expr(lbp + 1)?;
                    lhs.try_mul(&rhs).map_err(|e| e.at(op_pos))?
                }
                Tok::Caret => {
                    let k = self.exponent()?;
                    lhs.try_pow(k).map_err(|e| e.at(op_pos))?
                }
                _ => unreachable!(),
            };
        }
        Ok(lhs)
    }

    fn exponent(&mut self) -> Result<u32, ExprError> {
        let pos = self.pos();
        match self.bump().0 {
            Tok::Num(r) if r.is_integer() && !r.is_negative() => r
                .to_integer()
                .to_u32()
                .ok_or(ExprError::BadExponent { pos }),
            _ => Err(ExprError::BadExponent { pos }),
        }
    }

    fn prefix(&mut self) -> Result<DiffExpr, ExprError> {
        let (tok, pos) = self.bump();
        match tok {
            Tok::Num(r) => Ok(DiffExpr::constant(r)),
            Tok::Minus => Ok(-self.expr(BP_UNARY)?),
            Tok::LParen => {
                let e = self.expr(0)?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if *self.peek() == Tok::LParen {
                    self.bump();
                    let arg_pos = self.pos();
                    let arg = self.expr(0)?;
                    self.expect(Tok::RParen, "')'")?;
                    self.call(&name, &arg, pos, arg_pos)
                } else {
                    self.symbol(&name, pos)
                }
            }
            Tok::End => Err(ExprError::Syntax {
                pos,
                msg: "unexpected end of input".into(),
            }),
            _ => Err(ExprError::Syntax {
                pos,
                msg: "expected a literal, symbol or '('".into(),
            }),
        }
    }

    fn symbol(&self, name: &str, pos: usize) -> Result<DiffExpr, ExprError> {
        let unknown = || ExprError::UnknownSymbol {
            pos,
            name: name.to_string(),
        };
        if name == "u" {
            return Ok(DiffExpr::u());
        }
        if self.vocab == Vocabulary::UOnly {
            return Err(unknown());
        }
        if name == "t" {
            return Ok(DiffExpr::t());
        }
        if name == "u_t" {
            return Ok(DiffExpr::ut());
        }
        if let Some(i) = coord_index(name) {
            return Ok(DiffExpr::x(i));
        }
        if let Some(rest) = name.strip_prefix("u_") {
            let mut coords = Vec::new();
            for part in rest.split('x').skip(1) {
                let i: usize = part.parse().map_err(|_| unknown())?;
                if i == 0 {
                    return Err(unknown());
                }
                coords.push(i - 1);
            }
            if !rest.starts_with('x') || coords.is_empty() {
                return Err(unknown());
            }
            return Ok(DiffExpr::jet(MultiIndex::from_coords(&coords)));
        }
        Err(unknown())
    }

    fn call(
        &self,
        name: &str,
        arg: &DiffExpr,
        pos: usize,
        arg_pos: usize,
    ) -> Result<DiffExpr, ExprError> {
        let bad_arg = |msg: &str| ExprError::Syntax {
            pos: arg_pos,
            msg: msg.to_string(),
        };
        if arg.is_zero() {
            return match name {
                "exp" | "cos" => Ok(DiffExpr::one()),
                "sin" => Ok(DiffExpr::zero()),
                _ => Err(ExprError::UnknownSymbol {
                    pos,
                    name: format!("{name}(...)"),
                }),
            };
        }
        let lin = linear_in(arg)
            .ok_or_else(|| bad_arg("argument must be a rational multiple of one variable"))?;
        match (name, lin) {
            ("exp", Linear::U(k)) => Ok(DiffExpr::from_upoly(&UPoly::term(Rational::one(), 0, k))),
            _ if self.vocab == Vocabulary::UOnly => Err(ExprError::UnknownSymbol {
                pos,
                name: format!("{name}(...)"),
            }),
            ("exp", Linear::T(k)) => Ok(DiffExpr::atom(&CoeffAtom::ExpT(k))),
            ("exp", Linear::X(i, k)) => Ok(DiffExpr::atom(&CoeffAtom::ExpX(i, k))),
            ("sin", Linear::X(i, k)) => Ok(DiffExpr::atom(&CoeffAtom::Trig(i, TrigKind::Sin, k))),
            ("cos", Linear::X(i, k)) => Ok(DiffExpr::atom(&CoeffAtom::Trig(i, TrigKind::Cos, k))),
            ("sin" | "cos", _) => Err(bad_arg("trigonometric argument must be r*x_i")),
            _ => Err(ExprError::UnknownSymbol {
                pos,
                name: format!("{name}(...)"),
            }),
        }
    }
}

fn coord_index(name: &str) -> Option<usize> {
    let digits = name.strip_prefix('x')?;
    let i: usize = digits.parse().ok()?;
    (i >= 1 && !digits.starts_with('0')).then(|| i - 1)
}

enum Linear {
    U(Rational),
    T(Rational),
    X(usize, Rational),
}

/// Recognizes `k*v` for a single variable `v`.
fn linear_in(e: &DiffExpr) -> Option<Linear> {
    if e.len() != 1 {
        return None;
    }
    let (m, c) = e.terms().next()?;
    if !m.jets.is_empty() || m.ut {
        return None;
    }
    let c = c.clone();
    let coeff = &m.coeff;
    let u_linear = m.u == UKey::new(1, Rational::zero());
    let coeff_unit = coeff.is_unit();
    if u_linear && coeff_unit {
        return Some(Linear::U(c));
    }
    if !m.u.is_unit() {
        return None;
    }
    if coeff.t_power == 1 && coeff.exp_t.is_zero() && coeff.x.is_empty() {
        return Some(Linear::T(c));
    }
    if coeff.t_power == 0 && coeff.exp_t.is_zero() && coeff.x.len() == 1 {
        let (i, f) = coeff.x.iter().next()?;
        if f.power == 1 && f.wave.is_none() {
            return Some(Linear::X(*i, c));
        }
    }
    None
}

fn run(src: &str, vocab: Vocabulary) -> Result<DiffExpr, ExprError> {
    let mut p = Parser {
        toks: Lexer::tokens(src)?,
        idx: 0,
        vocab,
    };
    let e = p.expr(0)?;
    match p.peek() {
        Tok::End => Ok(e),
        Tok::RParen => p.syntax("unbalanced ')'"),
        _ => p.syntax("unexpected trailing input"),
    }
}

/// Parses a function of `u` in the exponential-polynomial class.
pub fn parse_upoly(src: &str) -> Result<UPoly, ExprError> {
    let e = run(src, Vocabulary::UOnly)?;
    Ok(UPoly::from_terms(
        e.terms().map(|(m, c)| (c.clone(), m.u.clone())),
    ))
}

/// Parses a general differential function.
pub fn parse_expr(src: &str) -> Result<DiffExpr, ExprError> {
    run(src, Vocabulary::Full)
}
