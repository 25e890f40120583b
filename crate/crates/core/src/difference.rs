//! Rewriting a shifted combination as a polynomial in the forward difference
//! operator: `sum_j alpha_j G(x + h_j) = p(Delta) G(x + min h)`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::growth::{eval_g, jet_g, Coefficient, RealExpr, ShiftedCombination};
use crate::precision::ExtReal;

/// Working precision for real coefficients.
const REAL_BITS: u32 = 320;

/// `p(Delta) = sum_i d_i Delta^i`.
#[derive(Clone, Debug, Serialize)]
pub struct DiffPoly {
    pub coeffs: Vec<Coefficient>,
    /// Smallest index with a nonzero coefficient.
    pub tau: usize,
    /// Subtracted from every shift before expanding.
    pub min_shift: i64,
    /// `sum_j alpha_j`, which equals `d_0`.
    pub coeff_sum: Coefficient,
    /// True when `d_tau < 0`, in which case bounds are certified for `-F`.
    pub sign_flip: bool,
    /// True when some real coefficient was declared zero by tolerance
    /// rather than exactly.
    pub tolerance_zero: bool,
}

impl DiffPoly {
    pub fn d_tau(&self) -> &Coefficient {
        &self.coeffs[self.tau]
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }
}

fn binom_row(i: usize) -> Vec<BigInt> {
    let mut row = vec![BigInt::from(1u32)];
    for k in 0..i {
        let next = &row[k] * BigInt::from((i - k) as u64) / BigInt::from((k + 1) as u64);
        row.push(next);
    }
    row
}

/// Back-substitution: peel `d_m (E-1)^m` off the top of `a(E)` repeatedly.
fn solve_rational(a: &[BigRational]) -> Vec<BigRational> {
    let m = a.len() - 1;
    let mut rem = a.to_vec();
    let mut d = vec![BigRational::zero(); m + 1];
    for i in (0..=m).rev() {
        let di = rem[i].clone();
        if !di.is_zero() {
            let row = binom_row(i);
            for (j, b) in row.iter().enumerate() {
                let sign = if (i - j) % 2 == 0 { 1 } else { -1 };
                rem[j] -= &di * BigRational::from_integer(b * sign);
            }
        }
        d[i] = di;
    }
    d
}

fn solve_real(a: &[ExtReal]) -> Vec<ExtReal> {
    let m = a.len() - 1;
    let mut rem = a.to_vec();
    let mut d = vec![ExtReal::zero(REAL_BITS); m + 1];
    for i in (0..=m).rev() {
        let di = rem[i].clone();
        let row = binom_row(i);
        for (j, b) in row.iter().enumerate() {
            let sign = if (i - j) % 2 == 0 { 1 } else { -1 };
            let t = di.mul(&ExtReal::from_bigint(&(b * sign), REAL_BITS));
            rem[j] = rem[j].sub(&t);
        }
        d[i] = di;
    }
    d
}

pub fn change_of_basis(comb: &ShiftedCombination) -> Result<DiffPoly> {
    let h0 = comb.min_shift();
    let ks: Vec<usize> = comb.shifts.iter().map(|h| (h - h0) as usize).collect();
    let m = *ks.iter().max().unwrap();
    if m > 4096 {
        return Err(Error::Unsupported(format!("shift span {m} is too large")));
    }
    if comb.alphas.iter().all(|a| a.is_rational()) {
        let mut a = vec![BigRational::zero(); m + 1];
        for (al, &k) in comb.alphas.iter().zip(&ks) {
            a[k] += al.as_rational().unwrap();
        }
        let d = solve_rational(&a);
        let tau = d.iter().position(|x| !x.is_zero()).expect("nonzero combination");
        let sign_flip = d[tau].is_negative();
        let coeff_sum = Coefficient::Rational(a.iter().sum());
        return Ok(DiffPoly {
            coeffs: d.into_iter().map(Coefficient::Rational).collect(),
            tau,
            min_shift: h0,
            coeff_sum,
            sign_flip,
            tolerance_zero: false,
        });
    }
    let mut a = vec![ExtReal::zero(REAL_BITS); m + 1];
    for (al, &k) in comb.alphas.iter().zip(&ks) {
        a[k] = a[k].add(&al.eval(REAL_BITS)?);
    }
    let d = solve_real(&a);
    let scale = d.iter().map(|x| x.log2_abs()).fold(f64::NEG_INFINITY, f64::max);
    let mut tolerance_zero = false;
    let mut tau = None;
    let mut coeffs = Vec::with_capacity(d.len());
    for (i, x) in d.into_iter().enumerate() {
        let zero = x.is_zero() || x.log2_abs() < scale - 80.0;
        if zero {
            if !x.is_zero() || !x.is_exact() {
                tolerance_zero = true;
            }
            coeffs.push(Coefficient::int(0));
        } else {
            if tau.is_none() {
                tau = Some(i);
            }
            coeffs.push(Coefficient::Real(RealExpr::Value(x)));
        }
    }
    let tau = tau.ok_or_else(|| Error::Domain("all difference coefficients vanish".into()))?;
    if tolerance_zero {
        log::warn!("difference coefficients below 2^-80 of the largest were treated as zero");
    }
    let sign_flip = coeffs[tau].to_f64() < 0.0;
    let coeff_sum = comb.alphas.iter().fold(Coefficient::int(0), |acc, a| acc.add(a));
    Ok(DiffPoly { coeffs, tau, min_shift: h0, coeff_sum, sign_flip, tolerance_zero })
}

/// `sum_j alpha_j C(k_j, i)`: the closed form for each coefficient.
pub fn binomial_coefficients(comb: &ShiftedCombination) -> Result<Vec<Coefficient>> {
    let h0 = comb.min_shift();
    let m = comb.shifts.iter().map(|h| (h - h0) as usize).max().unwrap();
    let mut out = Vec::with_capacity(m + 1);
    for i in 0..=m {
        let mut acc = Coefficient::int(0);
        for (a, &h) in comb.alphas.iter().zip(&comb.shifts) {
            let k = (h - h0) as usize;
            if k >= i {
                let b = binom_row(k)[i].clone();
                acc = acc.add(&a.mul(&Coefficient::Rational(BigRational::from_integer(b))));
            }
        }
        out.push(acc);
    }
    Ok(out)
}

/// `sum_j |alpha_j|`.
pub fn coeff_sum(comb: &ShiftedCombination) -> f64 {
    comb.coeff_abs_sum()
}

/// `Delta^k H(x) = sum_j (-1)^(k-j) C(k,j) H(x+j)`.
pub fn apply_delta<F>(k: usize, h: F, x: &ExtReal) -> Result<ExtReal>
where
    F: Fn(&ExtReal) -> Result<ExtReal>,
{
    let p = x.prec();
    let row = binom_row(k);
    let mut acc = ExtReal::zero(p);
    for (j, b) in row.iter().enumerate() {
        let v = h(&x.add(&ExtReal::from_u64(j as u64, p)))?;
        let t = v.mul(&ExtReal::from_bigint(b, p));
        acc = if (k - j).is_multiple_of(2) { acc.add(&t) } else { acc.sub(&t) };
    }
    Ok(acc)
}

/// `G^(s)(y)`.
fn g_derivative(y: &ExtReal, s: usize, c: f64) -> Result<ExtReal> {
    if s == 0 {
        return eval_g(y, c);
    }
    let j = jet_g(y, s, c)?;
    let mut fact = ExtReal::one(y.prec());
    for k in 2..=s as u64 {
        fact = fact.mul(&ExtReal::from_u64(k, y.prec()));
    }
    Ok(j.coeffs[s].mul(&fact))
}

/// Relative residual `|F^(s)(x) - sum_i d_i Delta^i G^(s)(x + min h)| / |F^(s)(x)|`.
pub fn verify_identity(comb: &ShiftedCombination, poly: &DiffPoly, x: &ExtReal, s: usize) -> Result<f64> {
    let p = x.prec();
    let c = comb.params.c();
    let mut f = ExtReal::zero(p);
    for (a, &h) in comb.alphas.iter().zip(&comb.shifts) {
        f = f.add(&a.eval(p)?.mul(&g_derivative(&x.add(&ExtReal::from_i64(h, p)), s, c)?));
    }
    let base = x.add(&ExtReal::from_i64(poly.min_shift, p));
    let mut rhs = ExtReal::zero(p);
    for (i, d) in poly.coeffs.iter().enumerate() {
        if d.is_rational() && d.as_rational().unwrap().is_zero() {
            continue;
        }
        let di = apply_delta(i, |y| g_derivative(y, s, c), &base)?;
        rhs = rhs.add(&d.eval(p)?.mul(&di));
    }
    let diff = f.sub(&rhs).abs();
    let denom = if f.is_zero() { ExtReal::one(p) } else { f.abs() };
    Ok(diff.to_f64() / denom.to_f64())
}

/// Coefficients by normalized shift `k = h - min h` recovered from
/// `sum_i d_i (E - 1)^i`; the inverse of [`change_of_basis`].
pub fn reexpand(poly: &DiffPoly) -> Vec<Coefficient> {
    let m = poly.degree();
    let mut out = vec![Coefficient::int(0); m + 1];
    for (i, d) in poly.coeffs.iter().enumerate() {
        for (j, b) in binom_row(i).iter().enumerate() {
            let sign = if (i - j) % 2 == 0 { 1 } else { -1 };
            let w = Coefficient::Rational(BigRational::from_integer(b * sign));
            out[j] = out[j].add(&d.mul(&w));
        }
    }
    out
}

/// Exact check that two rational coefficient lists agree.
pub fn same_rational(a: &[Coefficient], b: &[Coefficient]) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|(x, y)| match (x.as_rational(), y.as_rational()) {
            (Some(p), Some(q)) => p == q,
            _ => (x.to_f64() - y.to_f64()).abs() <= 1e-12 * (1.0 + x.to_f64().abs()),
        })
}

pub fn d_tau_sign(poly: &DiffPoly) -> i32 {
    match poly.d_tau() {
        Coefficient::Rational(r) => {
            if r.is_negative() {
                -1
            } else {
                1
            }
        }
        c => {
            if c.to_f64() < 0.0 {
                -1
            } else {
                1
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::growth::GrowthParams;

    fn comb(alphas: &[i64], shifts: &[i64]) -> ShiftedCombination {
        ShiftedCombination::new(
            GrowthParams::new(0.3).unwrap(),
            alphas.iter().map(|&a| Coefficient::int(a)).collect(),
            shifts.to_vec(),
        )
        .unwrap()
    }

    fn ints(p: &DiffPoly) -> Vec<i64> {
        p.coeffs.iter().map(|c| c.to_f64() as i64).collect()
    }

    #[test]
    fn second_difference() {
        let p = change_of_basis(&comb(&[1, -2, 1], &[2, 1, 0])).unwrap();
        assert_eq!(ints(&p), vec![0, 0, 1]);
        assert_eq!(p.tau, 2);
    }

    #[test]
    fn identity_of_single_shift() {
        let p = change_of_basis(&comb(&[1], &[0])).unwrap();
        assert_eq!(ints(&p), vec![1]);
        assert_eq!(p.tau, 0);
    }

    #[test]
    fn three_term_example() {
        let p = change_of_basis(&comb(&[2, -3, 1], &[2, 0, -4])).unwrap();
        assert_eq!(ints(&p), vec![0, 0, 12, 28, 27, 12, 2]);
        assert_eq!(p.tau, 2);
        assert_eq!(p.min_shift, -4);
    }

    #[test]
    fn matches_binomial_form() {
        let c = comb(&[2, -3, 1, 5], &[2, 0, -4, 7]);
        let p = change_of_basis(&c).unwrap();
        assert!(same_rational(&p.coeffs, &binomial_coefficients(&c).unwrap()));
    }

    #[test]
    fn real_coefficients_use_tolerance() {
        let c = ShiftedCombination::new(
            GrowthParams::new(0.3).unwrap(),
            vec![Coefficient::parse("sqrt(2)").unwrap(), Coefficient::parse("-sqrt(2)").unwrap()],
            vec![1, 0],
        )
        .unwrap();
        let p = change_of_basis(&c).unwrap();
        assert_eq!(p.tau, 1);
        assert!((p.d_tau().to_f64() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn identity_holds_numerically() {
        let c = comb(&[2, -3, 1], &[2, 0, -4]);
        let p = change_of_basis(&c).unwrap();
        let x = ExtReal::from_u64(1000, 192);
        assert!(verify_identity(&c, &p, &x, 0).unwrap() < 1e-45);
        let x = ExtReal::from_u64(1000, 192);
        for s in [1, 2, 5] {
            assert!(verify_identity(&c, &p, &x, s).unwrap() < 1e-20, "s={s}");
        }
    }

    #[test]
    fn reexpansion_round_trips() {
        let c = comb(&[2, -3, 1, 5], &[2, 0, -4, 7]);
        let p = change_of_basis(&c).unwrap();
        let back = reexpand(&p);
        let mut want = vec![Coefficient::int(0); back.len()];
        for (a, h) in c.alphas.iter().zip(&c.shifts) {
            want[(h - p.min_shift) as usize] = a.clone();
        }
        assert!(same_rational(&back, &want));
        assert_eq!(p.coeff_sum.to_f64(), 5.0);
        assert!(!p.sign_flip);
        assert!(change_of_basis(&comb(&[-1, 1], &[1, 0])).unwrap().sign_flip);
    }

    #[test]
    fn delta_examples() {
        let x = ExtReal::from_u64(7, 128);
        let id = |y: &ExtReal| Ok(y.clone());
        assert_eq!(apply_delta(0, id, &x).unwrap().to_f64(), 7.0);
        assert_eq!(apply_delta(1, id, &x).unwrap().to_f64(), 1.0);
        assert_eq!(apply_delta(2, |y: &ExtReal| Ok(y.square()), &x).unwrap().to_f64(), 2.0);
    }
}
