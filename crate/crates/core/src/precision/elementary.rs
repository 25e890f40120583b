//! exp, ln, sqrt and the constants they need.
//!
//! Each function works at a guarded internal precision with tracked
//! errors, then rounds once and adds the propagated input error.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

use super::bigfloat::{ldexp, ExtReal};
use crate::error::{Error, Result};

fn cache() -> &'static Mutex<HashMap<(u8, u32), ExtReal>> {
    static C: OnceLock<Mutex<HashMap<(u8, u32), ExtReal>>> = OnceLock::new();
    C.get_or_init(|| Mutex::new(HashMap::new()))
}

fn cached(tag: u8, prec: u32, f: impl FnOnce(u32) -> ExtReal) -> ExtReal {
    if let Some(v) = cache().lock().unwrap().get(&(tag, prec)) {
        return v.clone();
    }
    let v = f(prec);
    cache().lock().unwrap().insert((tag, prec), v.clone());
    v
}

/// Fixed-point sum of `sign^i / ((2i+1) x^(2i+1))` scaled by `2^w`.
fn atan_inv_fixed(x: u64, w: u64) -> BigInt {
    let scale = BigInt::one() << w;
    let x2 = BigInt::from(x * x);
    let mut term = scale / BigInt::from(x);
    let mut sum = BigInt::zero();
    let mut i: u64 = 0;
    while !term.is_zero() {
        let t = &term / BigInt::from(2 * i + 1);
        if i.is_multiple_of(2) {
            sum += t;
        } else {
            sum -= t;
        }
        term /= &x2;
        i += 1;
    }
    sum
}

/// Fixed-point `atanh(1/x)` scaled by `2^w`.
fn atanh_inv_fixed(x: u64, w: u64) -> BigInt {
    let scale = BigInt::one() << w;
    let x2 = BigInt::from(x * x);
    let mut term = scale / BigInt::from(x);
    let mut sum = BigInt::zero();
    let mut i: u64 = 0;
    while !term.is_zero() {
        sum += &term / BigInt::from(2 * i + 1);
        term /= &x2;
        i += 1;
    }
    sum
}

fn from_fixed(v: BigInt, w: u64, prec: u32) -> ExtReal {
    ExtReal::from_bigint(&v, prec.max(v.bits() as u32 + 1))
        .mul_pow2(-(w as i64))
        .round_to(prec)
}

pub fn ln2(prec: u32) -> ExtReal {
    cached(0, prec, |p| {
        let w = p as u64 + 32;
        let v = atanh_inv_fixed(3, w) * 2;
        // Truncation of each series term is below one unit of 2^-w.
        let r = from_fixed(v, w, p);
        let e = r.err_ulps();
        r.with_err_ulps(e + 1e-3)
    })
}

pub fn pi(prec: u32) -> ExtReal {
    cached(1, prec, |p| {
        let w = p as u64 + 32;
        let v = atan_inv_fixed(5, w) * 16 - atan_inv_fixed(239, w) * 4;
        let r = from_fixed(v, w, p);
        let e = r.err_ulps();
        r.with_err_ulps(e + 1e-3)
    })
}

pub fn euler_e(prec: u32) -> ExtReal {
    cached(2, prec, |p| exp(&ExtReal::one(p)).expect("exp(1)"))
}

fn exact_at(x: &ExtReal, w: u32) -> ExtReal {
    x.round_to(w).with_err_ulps(0.0)
}

/// Relative error of `x` as a plain number.
fn rel_of(x: &ExtReal) -> f64 {
    if x.is_zero() {
        x.abs_err()
    } else {
        ldexp(x.err_ulps(), -(x.prec() as i64))
    }
}

pub fn exp(x: &ExtReal) -> Result<ExtReal> {
    let p = x.prec();
    if x.is_zero() {
        let d = x.abs_err();
        return Ok(ExtReal::one(p).with_err_ulps(ldexp(d.exp_m1(), p as i64)));
    }
    let xf = x.to_f64();
    if xf.abs() > (1u64 << 39) as f64 {
        return Err(Error::Range(format!("exp argument {xf:e} overflows the exponent range")));
    }
    let k = (xf / std::f64::consts::LN_2).round() as i64;
    let s = ((p as f64).sqrt() / 2.0).ceil() as u32 + 2;
    let kbits = 64 - k.unsigned_abs().leading_zeros();
    let w = p + 40 + s + kbits;
    let xw = exact_at(x, w);
    let r = xw.sub(&ExtReal::from_i64(k, w).mul(&ln2(w + kbits + 8))).round_to(w);
    let r = r.mul_pow2(-(s as i64));
    let mut sum = ExtReal::one(w);
    let mut term = ExtReal::one(w);
    let mut i = 1u64;
    loop {
        term = term.mul(&r).div_u64(i);
        sum = sum.add(&term);
        if term.is_zero() || term.log2_abs() < -(w as f64) - 4.0 {
            break;
        }
        i += 1;
    }
    // Remaining tail is below |last term| since |r| < 1/2.
    let tail = if term.is_zero() { 0.0 } else { ldexp(1.0, (term.log2_abs() + w as f64 + 1.0).ceil() as i64) };
    let e0 = sum.err_ulps();
    let mut sum = sum.with_err_ulps(e0 + tail);
    for _ in 0..s {
        sum = sum.square();
    }
    let res = sum.mul_pow2(k).round_to(p);
    let d = x.abs_err();
    let prop = if d == 0.0 { 0.0 } else { ldexp(d.exp_m1(), p as i64) * (1.0 + 1e-9) };
    let e = res.err_ulps();
    Ok(res.with_err_ulps((e + prop).max(x.err_ulps())))
}

pub fn ln(x: &ExtReal) -> Result<ExtReal> {
    let p = x.prec();
    if x.is_zero() || x.is_negative() {
        return Err(Error::Domain(format!("ln of non-positive value {}", x.to_f64())));
    }
    if !x.sign_certain() {
        return Err(Error::Precision("ln argument indistinguishable from zero".into()));
    }
    let w = p + 40;
    let xw = exact_at(x, w);
    // x = m * 2^e with m in [1/sqrt2, sqrt2).
    let mbits = xw.mant().bits() as i64;
    let mut e = xw.exp() + mbits - 1;
    let mut m = xw.mul_pow2(-e);
    if m.to_f64() > std::f64::consts::SQRT_2 {
        m = m.mul_pow2(-1);
        e += 1;
    }
    let one = ExtReal::one(w);
    let num = m.sub(&one);
    let res_w = if num.is_zero() {
        ExtReal::zero(w)
    } else {
        let z = num.div(&m.add(&one))?;
        let z2 = z.square();
        let mut sum = z.clone();
        let mut pw = z.clone();
        let mut i = 1u64;
        loop {
            pw = pw.mul(&z2);
            let t = pw.div_u64(2 * i + 1);
            sum = sum.add(&t);
            if t.is_zero() || t.log2_abs() < sum.log2_abs() - w as f64 - 4.0 {
                break;
            }
            i += 1;
        }
        let tail_rel = ldexp(1.0, (pw.log2_abs() - sum.log2_abs() + w as f64 + 1.0).ceil() as i64);
        let er = sum.err_ulps();
        sum.with_err_ulps(er + tail_rel).mul_pow2(1)
    };
    let res_w = if e == 0 { res_w } else { res_w.add(&ExtReal::from_i64(e, w).mul(&ln2(w + 72))) };
    if res_w.is_zero() {
        let d = rel_of(x);
        if d == 0.0 {
            return Ok(ExtReal::zero(p));
        }
        return Ok(zero_abs(p, d * (1.0 + d)));
    }
    let res = res_w.round_to(p);
    let d = rel_of(x);
    let prop = if d == 0.0 {
        0.0
    } else {
        // |ln(1+d)| <= d / (1 - d)
        ldexp(d / (1.0 - d.min(0.5)) / res.to_f64().abs(), p as i64) * (1.0 + 1e-9)
    };
    let er = res.err_ulps();
    Ok(res.with_err_ulps((er + prop).max(x.err_ulps())))
}

fn zero_abs(prec: u32, abs: f64) -> ExtReal {
    // Zero whose absolute error bound is `abs`.
    let e = abs.log2().floor() as i64;
    ExtReal::zero(prec).mul_pow2(e).with_err_ulps(ldexp(abs, -e))
}

pub fn sqrt(x: &ExtReal) -> Result<ExtReal> {
    let p = x.prec();
    if x.is_negative() {
        return Err(Error::Domain(format!("sqrt of negative value {}", x.to_f64())));
    }
    if x.is_zero() {
        let a = x.abs_err();
        return Ok(if a == 0.0 { ExtReal::zero(p) } else { zero_abs(p, a.sqrt()) });
    }
    let want = 2 * p as i64 + 4;
    let bits = x.mant().bits() as i64;
    let mut sh = (want - bits).max(0);
    if (x.exp() - sh).rem_euclid(2) != 0 {
        sh += 1;
    }
    let m: BigUint = x.mant() << (sh as u64);
    let r = m.sqrt();
    let exact = &r * &r == m;
    let e = (x.exp() - sh) / 2;
    let mut v = ExtReal::from_biguint(r, p + 8).mul_pow2(e);
    if !exact {
        v = v.with_err_ulps(1.0);
    }
    let res = v.round_to(p);
    let prop = x.err_ulps() / 2.0 * (1.0 + 1e-9);
    let er = res.err_ulps();
    Ok(res.with_err_ulps((er + prop).max(x.err_ulps())))
}

/// `x^y` for `x > 0`.
pub fn pow(x: &ExtReal, y: &ExtReal) -> Result<ExtReal> {
    exp(&y.mul(&ln(x)?))
}
