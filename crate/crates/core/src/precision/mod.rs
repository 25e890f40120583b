//! Extended precision arithmetic, certified reduction mod 1 and the unit circle.

mod bigfloat;
pub mod circle;
mod elementary;
mod fixed;

pub use bigfloat::{ExtReal, MAX_EXPONENT, MAX_PRECISION, MIN_PRECISION};
pub use circle::{f64_to_turn, turn, turn_f64};
pub use elementary::{euler_e, exp, ln, ln2, pi, pow, sqrt};
pub use fixed::Fixed;

pub(crate) use bigfloat::ldexp;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Phases whose error bound reaches this are not used for anything.
pub const TRUST_LIMIT: f64 = 1.0 / (1u64 << 40) as f64;

/// Name of the environment variable that forces a working precision.
pub const PRECISION_OVERRIDE_ENV: &str = "INTERGROW_PRECISION_OVERRIDE";

/// A fractional part with an absolute error bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseValue {
    pub frac: Fixed,
    pub abs_err: f64,
}

impl PhaseValue {
    pub fn exact(frac: Fixed) -> PhaseValue {
        PhaseValue { frac, abs_err: 0.0 }
    }

    pub fn trusted(&self) -> bool {
        self.abs_err < TRUST_LIMIT
    }

    pub fn frac_f64(&self) -> f64 {
        self.frac.to_f64()
    }

    pub fn add(&self, o: &PhaseValue) -> PhaseValue {
        PhaseValue { frac: self.frac.wrapping_add(o.frac), abs_err: self.abs_err + o.abs_err }
    }
}

/// Fractional part of `v` in `[0,1)` with a certified error bound.
///
/// Inexact inputs get at least `|v| 2^-(P-8)` of error, i.e. 256 ulps.
pub fn reduce_mod1(v: &ExtReal) -> Result<PhaseValue> {
    let l = v.log2_abs();
    if l > MAX_PRECISION as f64 + 64.0 {
        return Err(Error::Range(format!(
            "magnitude 2^{l:.0} exceeds the range for fractional parts"
        )));
    }
    let (bits, lost) = v.frac_bits(Fixed::BITS);
    let frac = Fixed::from_biguint(&bits);
    let trunc = if lost { ldexp(1.0, -(Fixed::BITS as i64)) } else { 0.0 };
    let abs_err = if v.is_exact() {
        trunc
    } else {
        let floor = if v.is_zero() { 0.0 } else { (l - (v.prec() as f64 - 8.0)).exp2() };
        v.abs_err().max(floor) + trunc
    };
    Ok(PhaseValue { frac, abs_err })
}

/// `e(t)` for a trusted phase.
pub fn unit_circle(t: &PhaseValue) -> Result<Complex64> {
    if !t.trusted() {
        return Err(Error::Precision(format!(
            "phase error bound {:e} is not below 2^-40",
            t.abs_err
        )));
    }
    Ok(turn(t.frac.top()))
}

/// Fractional part of `v` and `floor(v) mod q`, refusing when the error
/// interval of `v` contains an integer.
pub fn floor_residue(v: &ExtReal, q: u64) -> Result<(PhaseValue, u64)> {
    if q == 0 {
        return Err(Error::Domain("modulus must be positive".into()));
    }
    let ph = reduce_mod1(v)?;
    let f = ph.frac.to_f64();
    if (ph.abs_err > 0.0 && (f <= ph.abs_err || 1.0 - f <= ph.abs_err)) || !ph.trusted() {
        return Err(Error::Precision(format!(
            "floor of {:e} is ambiguous: fractional part {f:e} within error {:e} of an integer",
            v.to_f64(),
            ph.abs_err
        )));
    }
    let r = v.floor_bigint().mod_floor(&BigInt::from(q));
    Ok((ph, r.to_u64().unwrap()))
}

/// log2 G(N) = ln(N)^(c+1) / ln 2, evaluated at 128 bits.
pub fn log2_growth(n: u64, c: f64) -> Result<f64> {
    if n < 1 {
        return Err(Error::Domain("N must be at least 1".into()));
    }
    if n == 1 {
        return Ok(0.0);
    }
    let p = 128;
    let l = ln(&ExtReal::from_u64(n, p))?;
    let a = ExtReal::from_f64(c + 1.0, p)?;
    let v = pow(&l, &a)?.div(&ln2(p))?;
    Ok(v.to_f64())
}

/// Round a bit count up to a supported width.
pub fn round_precision(bits: u32) -> u32 {
    bits.div_ceil(64).max(1) * 64
}

/// Bits needed to keep fractional parts of quantities of size `2^log2_mag`
/// accurate to 48 bits.
pub fn required_bits_for(log2_mag: f64) -> u32 {
    let need = log2_mag.max(0.0).ceil() as u32 + 48;
    round_precision(need)
}

/// `ceil(log2 G(N)) + 48` rounded up to a multiple of 64.
pub fn required_bits(n: u64, c: f64) -> Result<u32> {
    Ok(required_bits_for(log2_growth(n, c)?))
}

pub fn validate_precision(p: u32) -> Result<u32> {
    if !(MIN_PRECISION..=MAX_PRECISION).contains(&p) || !p.is_multiple_of(64) {
        return Err(Error::Domain(format!(
            "precision {p} unsupported: widths are multiples of 64 in [{MIN_PRECISION}, {MAX_PRECISION}]"
        )));
    }
    Ok(p)
}

/// How a caller asks for a working precision.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum PrecisionChoice {
    #[default]
    Auto,
    Bits(u32),
}

impl std::str::FromStr for PrecisionChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(PrecisionChoice::Auto);
        }
        let b: u32 = s.parse().map_err(|_| Error::Input(format!("bad precision {s:?}")))?;
        Ok(PrecisionChoice::Bits(validate_precision(b)?))
    }
}

impl PrecisionChoice {
    /// Resolve to bits. The override environment variable wins over both
    /// choices and is reported with a warning.
    pub fn resolve(self, auto_bits: u32) -> Result<u32> {
        if let Ok(v) = std::env::var(PRECISION_OVERRIDE_ENV) {
            let b: u32 = v
                .trim()
                .parse()
                .map_err(|_| Error::Input(format!("{PRECISION_OVERRIDE_ENV}={v:?} is not a bit count")))?;
            validate_precision(b)?;
            log::warn!("{PRECISION_OVERRIDE_ENV} forces {b}-bit precision (requested {self:?})");
            return Ok(b);
        }
        match self {
            PrecisionChoice::Auto => validate_precision(auto_bits),
            PrecisionChoice::Bits(b) => validate_precision(b),
        }
    }
}
