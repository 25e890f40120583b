//! Coefficients: exact rationals or real expressions that can be evaluated
//! at any precision.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::precision::{self, ExtReal};

#[derive(Clone, Debug)]
pub enum RealExpr {
    Int(i64),
    Decimal(String),
    Pi,
    E,
    Sqrt(Box<RealExpr>),
    Neg(Box<RealExpr>),
    Add(Box<RealExpr>, Box<RealExpr>),
    Sub(Box<RealExpr>, Box<RealExpr>),
    Mul(Box<RealExpr>, Box<RealExpr>),
    Div(Box<RealExpr>, Box<RealExpr>),
    /// A value computed elsewhere; its precision caps the accuracy.
    Value(ExtReal),
}

impl RealExpr {
    pub fn eval(&self, prec: u32) -> Result<ExtReal> {
        Ok(match self {
            RealExpr::Int(k) => ExtReal::from_i64(*k, prec),
            RealExpr::Decimal(s) => ExtReal::parse_decimal(s, prec)?,
            RealExpr::Pi => precision::pi(prec),
            RealExpr::E => precision::euler_e(prec),
            RealExpr::Sqrt(a) => precision::sqrt(&a.eval(prec)?)?,
            RealExpr::Neg(a) => a.eval(prec)?.neg(),
            RealExpr::Add(a, b) => a.eval(prec)?.add(&b.eval(prec)?),
            RealExpr::Sub(a, b) => a.eval(prec)?.sub(&b.eval(prec)?),
            RealExpr::Mul(a, b) => a.eval(prec)?.mul(&b.eval(prec)?),
            RealExpr::Div(a, b) => a.eval(prec)?.div(&b.eval(prec)?)?,
            RealExpr::Value(v) => v.round_to(prec),
        })
    }

    pub fn parse(s: &str) -> Result<RealExpr> {
        let toks = lex(s)?;
        let mut p = Parser { toks: &toks, pos: 0 };
        let e = p.expr()?;
        if p.pos != toks.len() {
            return Err(Error::Input(format!("trailing input in expression {s:?}")));
        }
        Ok(e)
    }

    /// Splits off an integer multiplier: `self = k * base`.
    fn split_int(&self) -> (i64, Option<RealExpr>) {
        match self {
            RealExpr::Int(k) => (*k, None),
            RealExpr::Neg(a) => {
                let (k, b) = a.split_int();
                (-k, b)
            }
            RealExpr::Mul(a, b) => match (a.as_ref(), b.as_ref()) {
                (RealExpr::Int(k), e) | (e, RealExpr::Int(k)) => {
                    let (k2, base) = e.split_int();
                    (k.saturating_mul(k2), base)
                }
                _ => (1, Some(self.clone())),
            },
            _ => (1, Some(self.clone())),
        }
    }
}

struct Parser<'a> {
    toks: &'a [Tok],
    pos: usize,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Op(char),
}

fn lex(s: &str) -> Result<Vec<Tok>> {
    let cs: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let st = i;
            while i < cs.len() && (cs[i].is_ascii_digit() || cs[i] == '.') {
                i += 1;
            }
            if i < cs.len() && (cs[i] == 'e' || cs[i] == 'E') {
                let mut j = i + 1;
                if j < cs.len() && (cs[j] == '-' || cs[j] == '+') {
                    j += 1;
                }
                if j < cs.len() && cs[j].is_ascii_digit() {
                    i = j;
                    while i < cs.len() && cs[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            out.push(Tok::Num(cs[st..i].iter().collect()));
        } else if c.is_ascii_alphabetic() {
            let st = i;
            while i < cs.len() && cs[i].is_ascii_alphanumeric() {
                i += 1;
            }
            out.push(Tok::Ident(cs[st..i].iter().collect::<String>().to_lowercase()));
        } else if "+-*/()".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(Error::Input(format!("unexpected character {c:?} in {s:?}")));
        }
    }
    Ok(out)
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn expr(&mut self) -> Result<RealExpr> {
        let mut e = self.term()?;
        while let Some(Tok::Op(c)) = self.peek() {
            let c = *c;
            if c != '+' && c != '-' {
                break;
            }
            self.pos += 1;
            let r = self.term()?;
            e = if c == '+' { RealExpr::Add(Box::new(e), Box::new(r)) } else { RealExpr::Sub(Box::new(e), Box::new(r)) };
        }
        Ok(e)
    }

    fn term(&mut self) -> Result<RealExpr> {
        let mut e = self.factor()?;
        while let Some(Tok::Op(c)) = self.peek() {
            let c = *c;
            if c != '*' && c != '/' {
                break;
            }
            self.pos += 1;
            let r = self.factor()?;
            e = if c == '*' { RealExpr::Mul(Box::new(e), Box::new(r)) } else { RealExpr::Div(Box::new(e), Box::new(r)) };
        }
        Ok(e)
    }

    fn factor(&mut self) -> Result<RealExpr> {
        let t = self.peek().cloned().ok_or_else(|| Error::Input("unexpected end of expression".into()))?;
        self.pos += 1;
        match t {
            Tok::Op('-') => Ok(RealExpr::Neg(Box::new(self.factor()?))),
            Tok::Op('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Num(s) => {
                if s.chars().all(|c| c.is_ascii_digit()) {
                    if let Ok(k) = s.parse::<i64>() {
                        return Ok(RealExpr::Int(k));
                    }
                }
                ExtReal::parse_decimal(&s, 64)?;
                Ok(RealExpr::Decimal(s))
            }
            Tok::Ident(id) => match id.as_str() {
                "pi" => Ok(RealExpr::Pi),
                "e" => Ok(RealExpr::E),
                "sqrt" => {
                    self.expect('(')?;
                    let e = self.expr()?;
                    self.expect(')')?;
                    Ok(RealExpr::Sqrt(Box::new(e)))
                }
                other => Err(Error::Input(format!("unknown name {other:?} in expression"))),
            },
            Tok::Op(c) => Err(Error::Input(format!("unexpected {c:?} in expression"))),
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        match self.peek() {
            Some(Tok::Op(d)) if *d == c => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(Error::Input(format!("expected {c:?} in expression"))),
        }
    }
}

impl fmt::Display for RealExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RealExpr::Int(k) => write!(f, "{k}"),
            RealExpr::Decimal(s) => write!(f, "{s}"),
            RealExpr::Pi => write!(f, "pi"),
            RealExpr::E => write!(f, "e"),
            RealExpr::Sqrt(a) => write!(f, "sqrt({a})"),
            RealExpr::Neg(a) => write!(f, "-({a})"),
            RealExpr::Add(a, b) => write!(f, "({a}+{b})"),
            RealExpr::Sub(a, b) => write!(f, "({a}-{b})"),
            RealExpr::Mul(a, b) => write!(f, "({a}*{b})"),
            RealExpr::Div(a, b) => write!(f, "({a}/{b})"),
            RealExpr::Value(v) => {
                write!(f, "<{}:{:x}p{}>", if v.is_negative() { "-" } else { "+" }, v.mant(), v.exp())
            }
        }
    }
}

/// A combination coefficient. Rationals stay exact end to end.
#[derive(Clone, Debug)]
pub enum Coefficient {
    Rational(BigRational),
    Real(RealExpr),
}

/// `Coefficient = mult * base` with a small integer multiplier; phases for
/// a shared base are computed once and reused across multipliers.
#[derive(Clone, Debug)]
pub enum Base {
    One,
    InvQ(u64),
    Real(RealExpr),
}

impl Base {
    pub fn key(&self) -> String {
        match self {
            Base::One => "1".into(),
            Base::InvQ(q) => format!("1/{q}"),
            Base::Real(e) => e.to_string(),
        }
    }
}

impl Coefficient {
    pub fn int(k: i64) -> Coefficient {
        Coefficient::Rational(BigRational::from_integer(BigInt::from(k)))
    }

    pub fn ratio(p: i64, q: i64) -> Coefficient {
        Coefficient::Rational(BigRational::new(BigInt::from(p), BigInt::from(q)))
    }

    pub fn real(e: RealExpr) -> Coefficient {
        Coefficient::Real(e)
    }

    /// Integers and `p/q` are rational; anything else is a real expression.
    pub fn parse(s: &str) -> Result<Coefficient> {
        let t = s.trim();
        let is_int = |x: &str| {
            let x = x.strip_prefix('-').unwrap_or(x);
            !x.is_empty() && x.chars().all(|c| c.is_ascii_digit())
        };
        if is_int(t) {
            let n: BigInt = t.parse().map_err(|_| Error::Input(format!("bad integer {t:?}")))?;
            return Ok(Coefficient::Rational(BigRational::from_integer(n)));
        }
        if let Some((p, q)) = t.split_once('/') {
            let (p, q) = (p.trim(), q.trim());
            if is_int(p) && is_int(q) {
                let p: BigInt = p.parse().unwrap();
                let q: BigInt = q.parse().unwrap();
                if q.is_zero() {
                    return Err(Error::Domain(format!("zero denominator in {t:?}")));
                }
                return Ok(Coefficient::Rational(BigRational::new(p, q)));
            }
        }
        Ok(Coefficient::Real(RealExpr::parse(t)?))
    }

    pub fn eval(&self, prec: u32) -> Result<ExtReal> {
        match self {
            Coefficient::Rational(r) => {
                if r.denom().is_one() {
                    Ok(ExtReal::from_bigint(r.numer(), prec))
                } else {
                    ExtReal::from_ratio(r.numer(), r.denom(), prec)
                }
            }
            Coefficient::Real(e) => e.eval(prec),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Coefficient::Rational(r) => r.to_f64().unwrap_or(f64::NAN),
            Coefficient::Real(e) => e.eval(128).map(|v| v.to_f64()).unwrap_or(f64::NAN),
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Coefficient::Rational(r) => Some(r),
            Coefficient::Real(_) => None,
        }
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, Coefficient::Rational(_))
    }

    pub fn is_integer(&self) -> bool {
        matches!(self, Coefficient::Rational(r) if r.is_integer())
    }

    /// Zero check: exact for rationals, certified at 256 bits for reals.
    pub fn is_zero(&self) -> Result<bool> {
        match self {
            Coefficient::Rational(r) => Ok(r.is_zero()),
            Coefficient::Real(e) => {
                let v = e.eval(256)?;
                if v.sign_certain() {
                    Ok(false)
                } else if v.abs_err_log2() < -200.0 {
                    Ok(true)
                } else {
                    Err(Error::Precision("cannot decide whether a coefficient vanishes".into()))
                }
            }
        }
    }

    pub fn scale(&self, k: i64) -> Coefficient {
        match self {
            Coefficient::Rational(r) => Coefficient::Rational(r * BigInt::from(k)),
            Coefficient::Real(e) => {
                if k == 1 {
                    self.clone()
                } else {
                    Coefficient::Real(RealExpr::Mul(Box::new(RealExpr::Int(k)), Box::new(e.clone())))
                }
            }
        }
    }

    fn to_expr(&self) -> RealExpr {
        match self {
            Coefficient::Real(e) => e.clone(),
            Coefficient::Rational(r) => {
                let n = r.numer().to_i64();
                let d = r.denom().to_i64();
                match (n, d) {
                    (Some(n), Some(1)) => RealExpr::Int(n),
                    (Some(n), Some(d)) => RealExpr::Div(Box::new(RealExpr::Int(n)), Box::new(RealExpr::Int(d))),
                    _ => RealExpr::Value(self.eval(1024).expect("rational")),
                }
            }
        }
    }

    pub fn add(&self, o: &Coefficient) -> Coefficient {
        match (self, o) {
            (Coefficient::Rational(a), Coefficient::Rational(b)) => Coefficient::Rational(a + b),
            _ => Coefficient::Real(RealExpr::Add(Box::new(self.to_expr()), Box::new(o.to_expr()))),
        }
    }

    pub fn mul(&self, o: &Coefficient) -> Coefficient {
        match (self, o) {
            (Coefficient::Rational(a), Coefficient::Rational(b)) => Coefficient::Rational(a * b),
            (Coefficient::Rational(a), Coefficient::Real(_)) if a.is_integer() && a.numer().to_i64().is_some() => {
                o.scale(a.numer().to_i64().unwrap())
            }
            (Coefficient::Real(_), Coefficient::Rational(b)) if b.is_integer() && b.numer().to_i64().is_some() => {
                self.scale(b.numer().to_i64().unwrap())
            }
            _ => Coefficient::Real(RealExpr::Mul(Box::new(self.to_expr()), Box::new(o.to_expr()))),
        }
    }

    pub fn neg(&self) -> Coefficient {
        self.scale(-1)
    }

    /// `self = mult * base`, with `mult` a machine integer.
    pub fn factor(&self) -> (i64, Base) {
        match self {
            Coefficient::Rational(r) => {
                let q = r.denom().to_u64();
                let p = r.numer().to_i64();
                match (p, q) {
                    (Some(p), Some(1)) => (p, Base::One),
                    (Some(p), Some(q)) => (p, Base::InvQ(q)),
                    _ => (1, Base::Real(self.to_expr())),
                }
            }
            Coefficient::Real(e) => match e.split_int() {
                (k, None) => (k, Base::One),
                (k, Some(b)) => (k, Base::Real(b)),
            },
        }
    }

    /// Residue class data for rational `p/q`: `(p mod q, q)`.
    pub fn rational_parts(&self) -> Option<(BigInt, BigInt)> {
        self.as_rational().map(|r| (r.numer().mod_floor(r.denom()), r.denom().clone()))
    }

    pub fn abs_f64(&self) -> f64 {
        match self {
            Coefficient::Rational(r) => r.abs().to_f64().unwrap_or(f64::INFINITY),
            Coefficient::Real(_) => self.to_f64().abs(),
        }
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Rational(r) => write!(f, "{r}"),
            Coefficient::Real(e) => write!(f, "{e}"),
        }
    }
}

impl Serialize for Coefficient {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Coefficient {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            S(String),
            I(i64),
            F(f64),
        }
        match Raw::deserialize(d)? {
            Raw::S(s) => Coefficient::parse(&s).map_err(serde::de::Error::custom),
            Raw::I(i) => Ok(Coefficient::int(i)),
            Raw::F(x) => Coefficient::parse(&format!("{x:e}")).map_err(serde::de::Error::custom),
        }
    }
}
