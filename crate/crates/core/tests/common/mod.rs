//! Independent references built on astro-float, shared by integration tests.
#![allow(dead_code)]

use astro_float::{BigFloat, Consts, RoundingMode};
use num_complex::Complex64;

pub const P: usize = 512;
pub const RM: RoundingMode = RoundingMode::ToEven;

pub struct Ref {
    pub cc: Consts,
    cache: std::collections::HashMap<(u64, u64), BigFloat>,
}

/// A coefficient the reference can build on its own: `sign * num/den * sqrt(rad)`.
#[derive(Clone, Copy, Debug)]
pub struct RefCoeff {
    pub num: i64,
    pub den: i64,
    pub rad: u64,
}

impl RefCoeff {
    pub fn int(k: i64) -> RefCoeff {
        RefCoeff { num: k, den: 1, rad: 1 }
    }
    pub fn ratio(p: i64, q: i64) -> RefCoeff {
        RefCoeff { num: p, den: q, rad: 1 }
    }
    pub fn sqrt(k: i64, rad: u64) -> RefCoeff {
        RefCoeff { num: k, den: 1, rad }
    }
    pub fn text(&self) -> String {
        let r = if self.den == 1 { format!("{}", self.num) } else { format!("{}/{}", self.num, self.den) };
        if self.rad == 1 {
            r
        } else {
            format!("{r}*sqrt({})", self.rad)
        }
    }
}

pub fn to_f64(x: &BigFloat) -> f64 {
    let s = format!("{x}");
    s.parse::<f64>().unwrap_or_else(|_| panic!("unparsable {s}"))
}

impl Ref {
    pub fn new() -> Ref {
        Ref { cc: Consts::new().unwrap(), cache: Default::default() }
    }

    pub fn int(&self, k: i64) -> BigFloat {
        BigFloat::from_i64(k, P)
    }

    /// `G(m) = exp(ln(m)^(c+1))`, `G(1) = 1`.
    pub fn g(&mut self, m: u64, c: f64) -> BigFloat {
        if m == 1 {
            return BigFloat::from_u64(1, P);
        }
        if let Some(v) = self.cache.get(&(m, c.to_bits())) {
            return v.clone();
        }
        let l = BigFloat::from_u64(m, P).ln(P, RM, &mut self.cc);
        let a = BigFloat::from_f64(c + 1.0, P);
        let v = l.pow(&a, P, RM, &mut self.cc).exp(P, RM, &mut self.cc);
        self.cache.insert((m, c.to_bits()), v.clone());
        v
    }

    /// `G(x)` for real `x >= 1`.
    pub fn g_real(&mut self, x: &BigFloat, c: f64) -> BigFloat {
        let l = x.ln(P, RM, &mut self.cc);
        l.pow(&BigFloat::from_f64(c + 1.0, P), P, RM, &mut self.cc).exp(P, RM, &mut self.cc)
    }

    pub fn coeff(&mut self, a: RefCoeff) -> BigFloat {
        let mut v = BigFloat::from_i64(a.num, P).div(&BigFloat::from_i64(a.den, P), P, RM);
        if a.rad != 1 {
            v = v.mul(&BigFloat::from_u64(a.rad, P).sqrt(P, RM), P, RM);
        }
        v
    }

    /// Fractional part in `[0, 1)` as f64.
    pub fn frac(&self, x: &BigFloat) -> f64 {
        let f = x.sub(&x.floor(), P, RM);
        to_f64(&f)
    }
}

pub fn e(t: f64) -> Complex64 {
    let a = std::f64::consts::TAU * t;
    Complex64::new(a.cos(), a.sin())
}

/// Direct single-threaded sum of `e(sum_j a_j G(n + h_j))` or of its floor
/// variant, with arguments below 1 clamped to 1.
pub fn direct_sum(r: &mut Ref, c: f64, terms: &[(RefCoeff, i64)], floor: bool, n: u64) -> Complex64 {
    let coeffs: Vec<BigFloat> = terms.iter().map(|(a, _)| r.coeff(*a)).collect();
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 1..=n {
        let mut th = BigFloat::from_u64(0, P);
        for ((_, h), a) in terms.iter().zip(&coeffs) {
            let m = (k as i64 + h).max(1) as u64;
            let mut g = r.g(m, c);
            if floor {
                g = g.floor();
            }
            th = th.add(&a.mul(&g, P, RM), P, RM);
        }
        acc += e(r.frac(&th));
    }
    acc
}
