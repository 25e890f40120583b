//! The growth function `G(x) = x^(log^c x) = exp(log^(c+1) x)`, its Taylor
//! jets, shifted combinations and their phases.

mod coeff;

pub use coeff::{Base, Coefficient, RealExpr};

use serde::{Deserialize, Serialize};

use crate::error::{domain, input, Error, Result};
use crate::precision::{self, reduce_mod1, ExtReal, Fixed, PhaseValue};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthParams {
    c: f64,
}

impl GrowthParams {
    /// `c` is taken as its exact binary value.
    pub fn new(c: f64) -> Result<GrowthParams> {
        if !(c > 0.0 && c < 0.5) {
            return domain(format!("c out of (0,1/2): {c}"));
        }
        Ok(GrowthParams { c })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// `lambda(x) = (c+1) log^c x`, the order up to which all derivatives of
    /// `G` are positive at `x`.
    pub fn lambda(&self, x: f64) -> f64 {
        (self.c + 1.0) * x.ln().powf(self.c)
    }
}

/// `F(x) = sum_j alpha_j G(x + h_j)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ShiftedCombination {
    pub params: GrowthParams,
    pub alphas: Vec<Coefficient>,
    pub shifts: Vec<i64>,
}

impl ShiftedCombination {
    pub fn new(params: GrowthParams, alphas: Vec<Coefficient>, shifts: Vec<i64>) -> Result<ShiftedCombination> {
        if alphas.is_empty() {
            return input("a combination needs at least one term");
        }
        if alphas.len() != shifts.len() {
            return input(format!("{} coefficients for {} shifts", alphas.len(), shifts.len()));
        }
        let mut s = shifts.clone();
        s.sort_unstable();
        if s.windows(2).any(|w| w[0] == w[1]) {
            return input(format!("shifts must be distinct: {shifts:?}"));
        }
        let mut any = false;
        for a in &alphas {
            if !a.is_zero()? {
                any = true;
            }
        }
        if !any {
            return input("all coefficients are zero");
        }
        Ok(ShiftedCombination { params, alphas, shifts })
    }

    pub fn len(&self) -> usize {
        self.shifts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shifts.is_empty()
    }

    /// `max |h_j|`.
    pub fn max_shift(&self) -> u64 {
        self.shifts.iter().map(|h| h.unsigned_abs()).max().unwrap_or(0)
    }

    pub fn min_shift(&self) -> i64 {
        *self.shifts.iter().min().unwrap()
    }

    /// `sum |alpha_j|`.
    pub fn coeff_abs_sum(&self) -> f64 {
        self.alphas.iter().map(|a| a.abs_f64()).sum()
    }

    /// Precision needed for the phase of `F` up to `n`.
    pub fn required_bits(&self, n: u64) -> Result<u32> {
        let top = n.saturating_add(self.max_shift());
        let l = precision::log2_growth(top, self.params.c)?;
        let w = self.coeff_abs_sum().max(1.0).log2();
        Ok(precision::required_bits_for(l + w))
    }
}

/// Taylor coefficients `f^(k)(x0) / k!` for `k = 0..=order`.
#[derive(Clone, Debug)]
pub struct TaylorJet {
    pub x0: ExtReal,
    pub coeffs: Vec<ExtReal>,
}

impl TaylorJet {
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `sum c_k t^k`.
    pub fn eval(&self, t: &ExtReal) -> ExtReal {
        let mut acc = self.coeffs.last().unwrap().clone();
        for c in self.coeffs.iter().rev().skip(1) {
            acc = acc.mul(t).add(c);
        }
        acc
    }
}

pub fn eval_g(x: &ExtReal, c: f64) -> Result<ExtReal> {
    let p = x.prec();
    let one = ExtReal::one(p);
    match x.cmp_value(&one) {
        std::cmp::Ordering::Less => domain(format!("G is defined for x >= 1, got {}", x.to_f64())),
        std::cmp::Ordering::Equal if x.is_exact() => Ok(one),
        _ => {
            let w = p + 16;
            let xw = x.round_to(w);
            let ll = precision::ln(&precision::ln(&xw)?)?;
            let a = ExtReal::from_f64(c + 1.0, w)?;
            let v = precision::exp(&precision::exp(&a.mul(&ll))?)?;
            Ok(v.round_to(p))
        }
    }
}

pub fn eval_g_u64(m: u64, c: f64, prec: u32) -> Result<ExtReal> {
    eval_g(&ExtReal::from_u64(m, prec), c)
}

/// `ln(m + t)` as a power series in `t`.
fn log_series(m: &ExtReal, order: usize) -> Result<Vec<ExtReal>> {
    let mut out = Vec::with_capacity(order + 1);
    out.push(precision::ln(m)?);
    let inv = ExtReal::one(m.prec()).div(m)?;
    let mut pw = inv.clone();
    for k in 1..=order {
        let t = pw.div_u64(k as u64);
        out.push(if k % 2 == 1 { t } else { t.neg() });
        pw = pw.mul(&inv);
    }
    Ok(out)
}

/// `v^a` for a series with `v_0 > 0`.
fn pow_series(v: &[ExtReal], a: &ExtReal) -> Result<Vec<ExtReal>> {
    let p = a.prec();
    let mut u = Vec::with_capacity(v.len());
    u.push(precision::pow(&v[0], a)?);
    for k in 1..v.len() {
        let mut s = ExtReal::zero(p);
        for j in 1..=k {
            let coef = a.mul(&ExtReal::from_u64(j as u64, p)).sub(&ExtReal::from_u64((k - j) as u64, p));
            s = s.add(&coef.mul(&v[j]).mul(&u[k - j]));
        }
        u.push(s.div(&v[0].mul(&ExtReal::from_u64(k as u64, p)))?);
    }
    Ok(u)
}

/// `exp(q)` for a series.
fn exp_series(q: &[ExtReal]) -> Result<Vec<ExtReal>> {
    let p = q[0].prec();
    let mut e = Vec::with_capacity(q.len());
    e.push(precision::exp(&q[0])?);
    for k in 1..q.len() {
        let mut s = ExtReal::zero(p);
        for j in 1..=k {
            s = s.add(&q[j].mul(&e[k - j]).mul(&ExtReal::from_u64(j as u64, p)));
        }
        e.push(s.div_u64(k as u64));
    }
    Ok(e)
}

/// Jet of `G` at `x0`. The recurrences cancel heavily at high order, so
/// the working precision grows by 16 bits per order.
pub fn jet_g(x0: &ExtReal, order: usize, c: f64) -> Result<TaylorJet> {
    let p = x0.prec();
    let one = ExtReal::one(p);
    if x0.cmp_value(&one) != std::cmp::Ordering::Greater {
        if order == 0 && x0.cmp_value(&one) == std::cmp::Ordering::Equal {
            return Ok(TaylorJet { x0: x0.clone(), coeffs: vec![one] });
        }
        return domain(format!("jets of G need x0 > 1, got {}", x0.to_f64()));
    }
    let w = p + 24 + 16 * order as u32;
    let xw = x0.round_to(w);
    let l = log_series(&xw, order)?;
    let a = ExtReal::from_f64(c + 1.0, w)?;
    let q = pow_series(&l, &a)?;
    let g = exp_series(&q)?;
    Ok(TaylorJet { x0: x0.clone(), coeffs: g.iter().map(|v| v.round_to(p)).collect() })
}

/// Jet of `F` at `x0`: `sum_j alpha_j * jet_G(x0 + h_j)`.
pub fn jet_combination(comb: &ShiftedCombination, x0: &ExtReal, order: usize) -> Result<TaylorJet> {
    let p = x0.prec();
    let mut acc = vec![ExtReal::zero(p); order + 1];
    for (a, &h) in comb.alphas.iter().zip(&comb.shifts) {
        let av = a.eval(p)?;
        let j = jet_g(&x0.add(&ExtReal::from_i64(h, p)), order, comb.params.c)?;
        for (s, c) in acc.iter_mut().zip(&j.coeffs) {
            *s = s.add(&av.mul(c));
        }
    }
    Ok(TaylorJet { x0: x0.clone(), coeffs: acc })
}

fn checked_arg(n: u64, h: i64) -> Result<u64> {
    let m = n as i128 + h as i128;
    if m < 1 {
        return domain(format!("argument n + h = {m} is below 1"));
    }
    u64::try_from(m).map_err(|_| Error::Range(format!("argument {m} overflows")))
}

/// `sum_j alpha_j G(n + h_j) mod 1`.
pub fn phase_smooth(n: u64, comb: &ShiftedCombination, prec: u32) -> Result<PhaseValue> {
    let mut acc = ExtReal::zero(prec);
    for (a, &h) in comb.alphas.iter().zip(&comb.shifts) {
        let g = eval_g_u64(checked_arg(n, h)?, comb.params.c, prec)?;
        acc = acc.add(&a.eval(prec)?.mul(&g));
    }
    let ph = reduce_mod1(&acc)?;
    if !ph.trusted() {
        return Err(Error::Precision(format!("phase at n={n} is not trusted at {prec} bits")));
    }
    Ok(ph)
}

/// `beta * floor(g) mod 1` with the floor certified.
pub(crate) fn floor_term(g: &ExtReal, beta: &Coefficient, prec: u32) -> Result<PhaseValue> {
    match beta.rational_parts() {
        Some((p, q)) => {
            use num_traits::ToPrimitive;
            let qq = q.to_u64().ok_or_else(|| Error::Unsupported("denominator above 2^64".into()))?;
            let (_, r) = precision::floor_residue(g, qq)?;
            let pr = (num_bigint::BigInt::from(r) * &p) % &q;
            Ok(PhaseValue::exact(if qq == 1 { Fixed::ZERO } else { Fixed::from_ratio(pr.to_u64().unwrap(), qq) }))
        }
        None => {
            precision::floor_residue(g, 1)?;
            let fl = ExtReal::from_bigint(&g.floor_bigint(), prec.max(g.log2_abs().max(0.0) as u32 + 2));
            let v = beta.eval(fl.prec().max(prec))?.mul(&fl);
            reduce_mod1(&v)
        }
    }
}

/// `sum_j alpha_j floor(G(n + h_j)) mod 1`.
pub fn phase_floor(n: u64, comb: &ShiftedCombination, prec: u32) -> Result<PhaseValue> {
    let mut acc = PhaseValue::exact(Fixed::ZERO);
    for (a, &h) in comb.alphas.iter().zip(&comb.shifts) {
        let g = eval_g_u64(checked_arg(n, h)?, comb.params.c, prec)?;
        acc = acc.add(&floor_term(&g, a, prec)?);
    }
    if !acc.trusted() {
        return Err(Error::Precision(format!("floor phase at n={n} is not trusted at {prec} bits")));
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ext(v: f64) -> ExtReal {
        ExtReal::from_f64(v, 192).unwrap()
    }

    #[test]
    fn params_validate_c() {
        assert!(GrowthParams::new(0.3).is_ok());
        for bad in [0.0, 0.5, -0.1, 0.7, f64::NAN] {
            let e = GrowthParams::new(bad).unwrap_err();
            assert!(e.to_string().contains("c out of (0,1/2)"));
        }
    }

    #[test]
    fn g_at_one_and_e() {
        assert_eq!(eval_g(&ExtReal::one(128), 0.3).unwrap().to_f64(), 1.0);
        let e = precision::euler_e(192);
        assert!((eval_g(&e, 0.3).unwrap().to_f64() - std::f64::consts::E).abs() < 1e-15);
        assert!(eval_g(&ext(0.5), 0.3).is_err());
    }

    #[test]
    fn g_matches_f64_formula() {
        for &x in &[2.0, 10.0, 1000.0, 1e6] {
            let v = eval_g(&ext(x), 0.3).unwrap().to_f64();
            let f = (x.ln().powf(1.3)).exp();
            assert!((v / f - 1.0).abs() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn jet_order_zero_at_one() {
        let j = jet_g(&ExtReal::one(64), 0, 0.3).unwrap();
        assert_eq!(j.coeffs[0].to_f64(), 1.0);
        assert!(jet_g(&ExtReal::one(64), 1, 0.3).is_err());
    }

    #[test]
    fn jet_reproduces_nearby_values() {
        let x0 = ext(5000.0);
        let j = jet_g(&x0, 20, 0.3).unwrap();
        let t = ext(7.0);
        let direct = eval_g(&x0.add(&t), 0.3).unwrap();
        let d = j.eval(&t).sub(&direct);
        assert!(d.log2_abs() - direct.log2_abs() < -120.0);
    }

    #[test]
    fn combination_validation() {
        let p = GrowthParams::new(0.3).unwrap();
        let one = Coefficient::int(1);
        assert!(ShiftedCombination::new(p, vec![one.clone(), one.clone()], vec![0, 0]).is_err());
        assert!(ShiftedCombination::new(p, vec![Coefficient::int(0)], vec![0]).is_err());
        assert!(ShiftedCombination::new(p, vec![one.clone()], vec![0, 1]).is_err());
        let c = ShiftedCombination::new(p, vec![one.clone(), Coefficient::int(-1)], vec![1, -3]).unwrap();
        assert_eq!(c.max_shift(), 3);
    }

    #[test]
    fn floor_phase_rational_is_exact() {
        let p = GrowthParams::new(0.3).unwrap();
        let c = ShiftedCombination::new(p, vec![Coefficient::ratio(1, 2)], vec![0]).unwrap();
        let ph = phase_floor(1000, &c, 128).unwrap();
        assert_eq!(ph.abs_err, 0.0);
        let g = eval_g_u64(1000, 0.3, 128).unwrap().floor_bigint();
        let parity = (g % 2u32) == num_bigint::BigInt::from(1u32);
        assert_eq!(ph.frac, if parity { Fixed::from_ratio(1, 2) } else { Fixed::ZERO });
    }
}
