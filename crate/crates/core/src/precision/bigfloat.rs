//! Binary floating point with a mantissa of exactly `prec` bits and a
//! running error bound that every operation updates.
//!
//! A nonzero value carries a relative bound in units of `2^-prec`. A zero
//! produced by cancellation carries an absolute bound in units of `2^exp`,
//! so that subsequent operations still see how inexact it is.

use std::cmp::Ordering;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Smallest and largest working precision accepted at public boundaries.
pub const MIN_PRECISION: u32 = 64;
pub const MAX_PRECISION: u32 = 4096;

/// Exponents beyond this magnitude are treated as overflow.
pub const MAX_EXPONENT: i64 = 1 << 40;

const ERR_CAP: f64 = 1e300;

#[derive(Clone, Debug)]
pub struct ExtReal {
    neg: bool,
    mant: BigUint,
    exp: i64,
    prec: u32,
    err: f64,
}

pub(crate) fn log2_biguint(m: &BigUint) -> f64 {
    let bits = m.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    if bits <= 64 {
        return (m.to_u64().unwrap() as f64).log2();
    }
    let top = (m >> (bits - 64)).to_u64().unwrap() as f64;
    top.log2() + (bits - 64) as f64
}

fn log2_biguint_precise(m: &BigUint) -> f64 {
    let bits = m.bits();
    if bits <= 64 {
        (m.to_u64().unwrap() as f64).log2()
    } else {
        log2_biguint(m)
    }
}

pub(crate) fn ldexp(mut x: f64, mut e: i64) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
        if x.is_infinite() {
            return x;
        }
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
        if x == 0.0 {
            return x;
        }
    }
    x * 2f64.powi(e as i32)
}

fn pow2(e: f64) -> f64 {
    if e > 1020.0 {
        f64::INFINITY
    } else {
        e.exp2()
    }
}

fn cap(e: f64) -> f64 {
    if e.is_nan() || e > ERR_CAP {
        ERR_CAP
    } else {
        e
    }
}

/// Round a magnitude to exactly `prec` bits, nearest with ties away from zero.
fn round_mag(mag: BigUint, exp: i64, prec: u32) -> (BigUint, i64, bool) {
    let bits = mag.bits();
    let p = prec as u64;
    if bits <= p {
        let s = p - bits;
        (mag << s, exp - s as i64, false)
    } else {
        let s = bits - p;
        let inexact = mag.trailing_zeros().is_some_and(|tz| tz < s);
        let half = mag.bit(s - 1);
        let mut m = mag >> s;
        let mut e = exp + s as i64;
        if half {
            m += 1u32;
            if m.bits() > p {
                m >>= 1;
                e += 1;
            }
        }
        (m, e, inexact)
    }
}

impl ExtReal {
    fn make(neg: bool, mag: BigUint, exp: i64, prec: u32, rel: f64) -> ExtReal {
        debug_assert!(!mag.is_zero());
        let (mant, exp, inexact) = round_mag(mag, exp, prec);
        let err = cap(rel + if inexact { 1.0 } else { 0.0 });
        ExtReal { neg, mant, exp, prec, err }
    }

    fn zero_with_abs_log2(prec: u32, abs_log2: f64) -> ExtReal {
        if abs_log2 == f64::NEG_INFINITY {
            return ExtReal::zero(prec);
        }
        let e = abs_log2.floor();
        ExtReal {
            neg: false,
            mant: BigUint::zero(),
            exp: e as i64,
            prec,
            err: cap(pow2(abs_log2 - e)),
        }
    }

    pub fn zero(prec: u32) -> ExtReal {
        ExtReal { neg: false, mant: BigUint::zero(), exp: 0, prec, err: 0.0 }
    }

    pub fn one(prec: u32) -> ExtReal {
        ExtReal::from_u64(1, prec)
    }

    pub fn from_biguint(v: BigUint, prec: u32) -> ExtReal {
        if v.is_zero() {
            return ExtReal::zero(prec);
        }
        ExtReal::make(false, v, 0, prec, 0.0)
    }

    pub fn from_bigint(v: &BigInt, prec: u32) -> ExtReal {
        let neg = v.sign() == Sign::Minus;
        let mut r = ExtReal::from_biguint(v.magnitude().clone(), prec);
        r.neg = neg && !r.is_zero();
        r
    }

    pub fn from_u64(v: u64, prec: u32) -> ExtReal {
        ExtReal::from_biguint(BigUint::from(v), prec)
    }

    pub fn from_i64(v: i64, prec: u32) -> ExtReal {
        ExtReal::from_bigint(&BigInt::from(v), prec)
    }

    /// Exact conversion; f64 values always fit in 64 mantissa bits.
    pub fn from_f64(v: f64, prec: u32) -> Result<ExtReal> {
        if !v.is_finite() {
            return Err(Error::Domain(format!("non-finite value {v}")));
        }
        if v == 0.0 {
            return Ok(ExtReal::zero(prec));
        }
        let bits = v.abs().to_bits();
        let biased = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (m, e) = if biased == 0 { (frac, -1074) } else { (frac | (1u64 << 52), biased - 1075) };
        let mut r = ExtReal::make(false, BigUint::from(m), e, prec, 0.0);
        r.neg = v < 0.0;
        Ok(r)
    }

    /// `p/q` rounded once.
    pub fn from_ratio(p: &BigInt, q: &BigInt, prec: u32) -> Result<ExtReal> {
        let a = ExtReal::from_bigint(p, prec.max(p.bits() as u32 + 1));
        let b = ExtReal::from_bigint(q, prec.max(q.bits() as u32 + 1));
        Ok(a.div(&b)?.round_to(prec))
    }

    /// Parses `[-]digits[.digits][e[-]digits]`.
    pub fn parse_decimal(s: &str, prec: u32) -> Result<ExtReal> {
        let t = s.trim();
        let bad = || Error::Input(format!("not a decimal number: {s:?}"));
        let (body, exp10) = match t.find(['e', 'E']) {
            Some(i) => (&t[..i], t[i + 1..].parse::<i64>().map_err(|_| bad())?),
            None => (t, 0i64),
        };
        let (neg, body) = match body.strip_prefix('-') {
            Some(b) => (true, b),
            None => (false, body.strip_prefix('+').unwrap_or(body)),
        };
        let (ip, fp) = match body.split_once('.') {
            Some((a, b)) => (a, b),
            None => (body, ""),
        };
        if ip.is_empty() && fp.is_empty() {
            return Err(bad());
        }
        if !ip.chars().chain(fp.chars()).all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let digits = format!("{ip}{fp}");
        let mut num: BigInt = digits.parse().map_err(|_| bad())?;
        if neg {
            num = -num;
        }
        let scale = exp10 - fp.len() as i64;
        if scale.abs() > 100_000 {
            return Err(Error::Range(format!("decimal exponent too large in {s:?}")));
        }
        let ten = BigInt::from(10u32);
        if scale >= 0 {
            let v = num * num_traits::pow(ten, scale as usize);
            Ok(ExtReal::from_bigint(&v, prec.max(v.bits() as u32 + 1)).round_to(prec))
        } else {
            let d = num_traits::pow(ten, (-scale) as usize);
            ExtReal::from_ratio(&num, &d, prec)
        }
    }

    /// `(m, e)` with value `m * 2^e`; the error bound is not included.
    pub fn to_parts(&self) -> (BigInt, i64) {
        let m = BigInt::from(self.mant.clone());
        (if self.neg { -m } else { m }, self.exp)
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.neg && !self.is_zero()
    }

    pub fn is_exact(&self) -> bool {
        self.err == 0.0
    }

    /// Relative error bound in units of `2^-prec` (absolute units of `2^exp` for zero).
    pub fn err_ulps(&self) -> f64 {
        self.err
    }

    /// Overrides the error bound; used when an algorithm supplies its own analysis.
    pub fn with_err_ulps(mut self, err: f64) -> ExtReal {
        self.err = cap(err);
        self
    }

    pub(crate) fn mant(&self) -> &BigUint {
        &self.mant
    }

    pub(crate) fn exp(&self) -> i64 {
        self.exp
    }

    /// log2 |v|; `-inf` for zero.
    pub fn log2_abs(&self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            log2_biguint_precise(&self.mant) + self.exp as f64
        }
    }

    /// log2 of the absolute error bound; `-inf` if exact.
    pub fn abs_err_log2(&self) -> f64 {
        if self.err == 0.0 {
            return f64::NEG_INFINITY;
        }
        if self.is_zero() {
            self.err.log2() + self.exp as f64
        } else {
            self.err.log2() - self.prec as f64 + self.log2_abs()
        }
    }

    pub fn abs_err(&self) -> f64 {
        pow2(self.abs_err_log2())
    }

    fn rel_units(&self, p_out: u32) -> f64 {
        if self.err == 0.0 {
            0.0
        } else {
            ldexp(self.err, p_out as i64 - self.prec as i64)
        }
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let bits = self.mant.bits();
        let (top, shift) = if bits > 64 {
            ((&self.mant >> (bits - 64)).to_u64().unwrap(), (bits - 64) as i64)
        } else {
            (self.mant.to_u64().unwrap(), 0)
        };
        let v = ldexp(top as f64, self.exp + shift);
        if self.neg {
            -v
        } else {
            v
        }
    }

    pub fn round_to(&self, prec: u32) -> ExtReal {
        if self.is_zero() {
            let mut z = self.clone();
            z.prec = prec;
            return z;
        }
        let rel = self.rel_units(prec);
        let mut r = ExtReal::make(self.neg, self.mant.clone(), self.exp, prec, rel);
        r.err = r.err.max(rel);
        r
    }

    pub fn neg(&self) -> ExtReal {
        let mut r = self.clone();
        if !r.is_zero() {
            r.neg = !r.neg;
        }
        r
    }

    pub fn abs(&self) -> ExtReal {
        let mut r = self.clone();
        r.neg = false;
        r
    }

    /// Exact multiplication by `2^k`.
    pub fn mul_pow2(&self, k: i64) -> ExtReal {
        let mut r = self.clone();
        r.exp += k;
        r
    }

    /// Compares values, ignoring error bounds.
    pub fn cmp_value(&self, other: &ExtReal) -> Ordering {
        let d = self.sub(other);
        if d.is_zero() {
            Ordering::Equal
        } else if d.neg {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    }

    pub fn signum(&self) -> i32 {
        if self.is_zero() {
            0
        } else if self.neg {
            -1
        } else {
            1
        }
    }

    /// True when the error interval excludes zero.
    pub fn sign_certain(&self) -> bool {
        !self.is_zero() && self.abs_err_log2() < self.log2_abs() - 1.0
    }

    fn add_impl(&self, other: &ExtReal, negate_other: bool) -> ExtReal {
        let prec = self.prec.max(other.prec);
        let bneg = other.neg ^ negate_other;
        let (a, b) = (self, other);
        let abs_a = a.abs_err_log2();
        let abs_b = b.abs_err_log2();
        if a.is_zero() || b.is_zero() {
            let (nz, nz_neg, z_abs) = if a.is_zero() { (b, bneg, abs_a) } else { (a, a.neg, abs_b) };
            if nz.is_zero() {
                return ExtReal::zero_with_abs_log2(prec, log2_sum(abs_a, abs_b));
            }
            let mut r = nz.round_to(prec);
            r.neg = nz_neg;
            if z_abs > f64::NEG_INFINITY {
                r.err = cap(r.err + pow2(z_abs - r.log2_abs() + prec as f64));
            }
            return r;
        }
        let ta = a.exp + a.mant.bits() as i64;
        let tb = b.exp + b.mant.bits() as i64;
        let ra = a.rel_units(prec);
        let rb = b.rel_units(prec);
        let gap = prec as i64 + 4;
        if ta > tb + gap || tb > ta + gap {
            // The smaller operand is below a quarter ulp of the larger.
            let (big, big_neg, rbig, small) = if ta > tb { (a, a.neg, ra, b) } else { (b, bneg, rb, a) };
            let mut r = big.round_to(prec);
            r.neg = big_neg;
            let small_abs = log2_sum(small.log2_abs(), small.abs_err_log2());
            r.err = cap(r.err.max(rbig) + 1.0 + pow2(small_abs - r.log2_abs() + prec as f64));
            return r;
        }
        let e = a.exp.min(b.exp);
        let am = &a.mant << ((a.exp - e) as u64);
        let bm = &b.mant << ((b.exp - e) as u64);
        let (neg, mag) = if a.neg == bneg {
            (a.neg, am + bm)
        } else {
            match am.cmp(&bm) {
                Ordering::Greater => (a.neg, am - bm),
                Ordering::Less => (bneg, bm - am),
                Ordering::Equal => (false, BigUint::zero()),
            }
        };
        if mag.is_zero() {
            return ExtReal::zero_with_abs_log2(prec, log2_sum(abs_a, abs_b));
        }
        let ls = log2_biguint_precise(&mag) + e as f64;
        let la = a.log2_abs();
        let lb = b.log2_abs();
        let mut rel = 0.0;
        if ra > 0.0 {
            rel += ra * pow2(la - ls);
        }
        if rb > 0.0 {
            rel += rb * pow2(lb - ls);
        }
        // Slack for the f64 estimates of the magnitudes.
        rel *= 1.0 + 1e-12;
        let mut r = ExtReal::make(neg, mag, e, prec, rel);
        r.err = cap(r.err.max(ra).max(rb));
        r
    }

    pub fn add(&self, other: &ExtReal) -> ExtReal {
        self.add_impl(other, false)
    }

    pub fn sub(&self, other: &ExtReal) -> ExtReal {
        self.add_impl(other, true)
    }

    pub fn mul(&self, other: &ExtReal) -> ExtReal {
        let prec = self.prec.max(other.prec);
        if self.is_zero() || other.is_zero() {
            let (z, o) = if self.is_zero() { (self, other) } else { (other, self) };
            let abs = if o.is_zero() {
                z.abs_err_log2() + o.abs_err_log2()
            } else {
                z.abs_err_log2() + log2_sum(o.log2_abs(), o.abs_err_log2())
            };
            return ExtReal::zero_with_abs_log2(prec, abs);
        }
        let ra = self.rel_units(prec);
        let rb = other.rel_units(prec);
        let rel = ra + rb + ra * rb * pow2(-(prec as f64));
        let mag = &self.mant * &other.mant;
        let mut r = ExtReal::make(self.neg != other.neg, mag, self.exp + other.exp, prec, rel);
        r.err = cap(r.err.max(ra).max(rb));
        r
    }

    pub fn div(&self, other: &ExtReal) -> Result<ExtReal> {
        if other.is_zero() {
            return Err(Error::Domain("division by zero".into()));
        }
        let prec = self.prec.max(other.prec);
        let rb = other.rel_units(prec);
        let eps = pow2(-(prec as f64));
        if rb * eps >= 0.5 {
            return Err(Error::Precision("divisor indistinguishable from zero".into()));
        }
        if self.is_zero() {
            let abs = self.abs_err_log2() - other.log2_abs() + (1.0 / (1.0 - rb * eps)).log2();
            return Ok(ExtReal::zero_with_abs_log2(prec, abs));
        }
        let ra = self.rel_units(prec);
        let shift = (prec as i64 + 2 + other.mant.bits() as i64 - self.mant.bits() as i64).max(0) as u64;
        let num = &self.mant << shift;
        let (mut q, rem) = num.div_rem(&other.mant);
        let mut e = self.exp - shift as i64 - other.exp;
        if !rem.is_zero() {
            q = (q << 1u32) | BigUint::one();
            e -= 1;
        }
        let rel = (ra + rb + ra * rb * eps) / (1.0 - rb * eps);
        let mut r = ExtReal::make(self.neg != other.neg, q, e, prec, rel);
        r.err = cap(r.err.max(ra).max(rb));
        Ok(r)
    }

    pub fn mul_i64(&self, k: i64) -> ExtReal {
        self.mul(&ExtReal::from_i64(k, self.prec))
    }

    pub fn div_u64(&self, k: u64) -> ExtReal {
        self.div(&ExtReal::from_u64(k, self.prec)).expect("nonzero divisor")
    }

    pub fn square(&self) -> ExtReal {
        self.mul(self)
    }

    /// `floor(v)` of the stored value, ignoring the error bound.
    pub fn floor_bigint(&self) -> BigInt {
        if self.is_zero() {
            return BigInt::zero();
        }
        let mag = if self.exp >= 0 {
            BigInt::from(&self.mant << (self.exp as u64))
        } else {
            let s = (-self.exp) as u64;
            let ip = BigInt::from(&self.mant >> s);
            if self.neg && self.mant.trailing_zeros().is_some_and(|tz| tz < s) {
                return -ip - 1;
            }
            ip
        };
        if self.neg {
            -mag
        } else {
            mag
        }
    }

    /// Fractional bits of the stored value below the binary point, as an
    /// integer `f` with `v mod 1 = f / 2^bits` truncated. Returns the bits
    /// and whether truncation discarded anything.
    pub(crate) fn frac_bits(&self, bits: u32) -> (BigUint, bool) {
        if self.is_zero() || self.exp >= 0 {
            return (BigUint::zero(), false);
        }
        let s = (-self.exp) as u64;
        let mask = (BigUint::one() << s) - 1u32;
        let low = &self.mant & &mask;
        let (mut f, lost) = if s <= bits as u64 {
            (low << (bits as u64 - s), false)
        } else {
            let d = s - bits as u64;
            let lost = low.trailing_zeros().is_some_and(|tz| tz < d);
            (low >> d, lost)
        };
        if self.neg && (!f.is_zero() || lost) {
            // 1 - f, truncated toward the true value from below.
            let full = BigUint::one() << bits;
            f = full - f;
            if lost {
                f -= 1u32;
            }
            if f == BigUint::one() << bits {
                f = BigUint::zero();
            }
        }
        (f, lost)
    }
}

pub(crate) fn log2_sum(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + (pow2(a - m) + pow2(b - m)).log2()
}

impl<'a> Add<&'a ExtReal> for &'a ExtReal {
    type Output = ExtReal;
    fn add(self, rhs: &ExtReal) -> ExtReal {
        ExtReal::add(self, rhs)
    }
}

impl<'a> Sub<&'a ExtReal> for &'a ExtReal {
    type Output = ExtReal;
    fn sub(self, rhs: &ExtReal) -> ExtReal {
        ExtReal::sub(self, rhs)
    }
}

impl<'a> Mul<&'a ExtReal> for &'a ExtReal {
    type Output = ExtReal;
    fn mul(self, rhs: &ExtReal) -> ExtReal {
        ExtReal::mul(self, rhs)
    }
}

impl Neg for &ExtReal {
    type Output = ExtReal;
    fn neg(self) -> ExtReal {
        ExtReal::neg(self)
    }
}

impl std::fmt::Display for ExtReal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:e}", self.to_f64())
    }
}
