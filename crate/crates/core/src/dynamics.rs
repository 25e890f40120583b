//! Model systems (torus rotations, cyclic groups, the skew product on T^2)
//! with character observables, so that projections and norms are exact and
//! the only numerical error sits in the exponential sums.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expsum::{batch_sums, SequenceSpec};
use crate::growth::{Coefficient, GrowthParams, ShiftedCombination};
use crate::precision::{turn, Fixed, PrecisionChoice};

#[derive(Clone, Debug)]
pub enum ModelSystem {
    /// `T_i x = x + beta_i` on `T^d`; `betas[i]` has length `d`. Irrational
    /// entries are presumed rationally independent of each other and of 1.
    Torus { dim: usize, betas: Vec<Vec<Coefficient>> },
    /// `T_i x = x + steps[i]` on `Z/q`.
    Cyclic { q: u64, steps: Vec<u64> },
    /// `S(x, y) = (x + alpha, y + x)` on `T^2`.
    Skew { alpha: Coefficient },
}

impl ModelSystem {
    pub fn torus(betas: Vec<Vec<Coefficient>>) -> Result<ModelSystem> {
        let dim = betas.first().map(|b| b.len()).unwrap_or(0);
        if betas.is_empty() || dim == 0 || betas.iter().any(|b| b.len() != dim) {
            return Err(Error::Input("torus rotations need r >= 1 vectors of a common dimension d >= 1".into()));
        }
        Ok(ModelSystem::Torus { dim, betas })
    }

    pub fn cyclic(q: u64, steps: Vec<u64>) -> Result<ModelSystem> {
        if q < 1 || steps.is_empty() {
            return Err(Error::Input("cyclic system needs q >= 1 and at least one step".into()));
        }
        Ok(ModelSystem::Cyclic { q, steps })
    }

    /// These kinds commute by construction.
    pub fn commuting(&self) -> bool {
        true
    }

    pub fn transformations(&self) -> usize {
        match self {
            ModelSystem::Torus { betas, .. } => betas.len(),
            ModelSystem::Cyclic { steps, .. } => steps.len(),
            ModelSystem::Skew { .. } => 1,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ModelSystem::Torus { dim, .. } => *dim,
            ModelSystem::Cyclic { .. } => 1,
            ModelSystem::Skew { .. } => 2,
        }
    }

    /// Rotation vectors, with a cyclic group seen as `steps / q` on `T`.
    fn rotation_vectors(&self) -> Result<Vec<Vec<Coefficient>>> {
        match self {
            ModelSystem::Torus { betas, .. } => Ok(betas.clone()),
            ModelSystem::Cyclic { q, steps } => {
                Ok(steps.iter().map(|&s| vec![Coefficient::ratio((s % q) as i64, *q as i64)]).collect())
            }
            ModelSystem::Skew { .. } => {
                Err(Error::Unsupported("the skew product does not act diagonally on characters".into()))
            }
        }
    }
}

/// `k . beta`, or `None` if an irrational entry meets a nonzero frequency
/// (then the pairing is irrational).
fn pairing(k: &[i64], beta: &[Coefficient]) -> (Coefficient, bool) {
    let mut acc = Coefficient::int(0);
    let mut rational = true;
    for (&kl, b) in k.iter().zip(beta) {
        if kl == 0 {
            continue;
        }
        rational &= b.is_rational();
        let t = b.scale(kl);
        acc = if acc.as_rational().is_some_and(|r| r.is_zero()) { t } else { acc.add(&t) };
    }
    (acc, rational)
}

fn invariant_under(k: &[i64], betas: &[Vec<Coefficient>]) -> bool {
    betas.iter().all(|b| {
        let (v, rational) = pairing(k, b);
        rational && v.is_integer()
    })
}

/// A trigonometric polynomial `sum_k coef_k e(k . x)` in the character
/// basis.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ObservableSpec {
    pub terms: Vec<(Vec<i64>, Complex64)>,
}

impl ObservableSpec {
    /// Merges repeated frequencies and drops zero coefficients.
    pub fn new(dim: usize, terms: Vec<(Vec<i64>, Complex64)>) -> Result<ObservableSpec> {
        let mut m: BTreeMap<Vec<i64>, Complex64> = BTreeMap::new();
        for (k, a) in terms {
            if k.len() != dim {
                return Err(Error::Input(format!("frequency {k:?} does not have dimension {dim}")));
            }
            if !a.re.is_finite() || !a.im.is_finite() {
                return Err(Error::Input("non-finite coefficient".into()));
            }
            *m.entry(k).or_default() += a;
        }
        Ok(ObservableSpec { terms: m.into_iter().filter(|(_, a)| *a != Complex64::new(0.0, 0.0)).collect() })
    }

    pub fn character(k: Vec<i64>) -> ObservableSpec {
        ObservableSpec { terms: vec![(k, Complex64::new(1.0, 0.0))] }
    }

    pub fn constant(dim: usize) -> ObservableSpec {
        ObservableSpec::character(vec![0; dim])
    }

    pub fn l2_norm(&self) -> f64 {
        self.terms.iter().map(|(_, a)| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn inner(&self, o: &ObservableSpec) -> Complex64 {
        let m: BTreeMap<&Vec<i64>, &Complex64> = o.terms.iter().map(|(k, a)| (k, a)).collect();
        self.terms.iter().filter_map(|(k, a)| m.get(k).map(|b| a * b.conj())).sum()
    }

    fn dim(&self) -> Option<usize> {
        self.terms.first().map(|(k, _)| k.len())
    }
}

fn check_dim(sys: &ModelSystem, f: &ObservableSpec) -> Result<()> {
    match f.dim() {
        Some(d) if d != sys.dim() => Err(Error::Input(format!("observable has dimension {d}, system {}", sys.dim()))),
        _ => Ok(()),
    }
}

/// Projection onto functions invariant under every `T_i`: the characters
/// with `k . beta_i` an integer for all `i`.
pub fn invariant_projection(sys: &ModelSystem, f: &ObservableSpec) -> Result<ObservableSpec> {
    check_dim(sys, f)?;
    let betas = sys.rotation_vectors()?;
    Ok(ObservableSpec { terms: f.terms.iter().filter(|(k, _)| invariant_under(k, &betas)).cloned().collect() })
}

#[derive(Clone, Debug, Serialize)]
pub struct VnResult {
    pub n: u64,
    /// `||A_N f - P f||_2`.
    pub norm: f64,
    /// `(N_j, norm)` at `N_j = floor(N / 2^j)`, ascending.
    pub curve: Vec<(u64, f64)>,
    pub precision_bits: u32,
    /// `(k, average of e(sum_i (k . beta_i) floor G(n + h_i)))` per
    /// non-invariant character.
    pub multipliers: Vec<(Vec<i64>, Complex64)>,
}

/// The floor phase `sum_i (k . beta_i) floor G(n + h_i)` of a character,
/// or `None` when the character is invariant.
pub fn character_phase(
    sys: &ModelSystem,
    k: &[i64],
    params: GrowthParams,
    shifts: &[i64],
) -> Result<Option<SequenceSpec>> {
    let betas = sys.rotation_vectors()?;
    if invariant_under(k, &betas) {
        return Ok(None);
    }
    let (mut al, mut hs) = (Vec::new(), Vec::new());
    for (b, &h) in betas.iter().zip(shifts) {
        let (v, rational) = pairing(k, b);
        if rational && v.is_integer() {
            continue;
        }
        al.push(v);
        hs.push(h);
    }
    Ok(Some(SequenceSpec::floor(&ShiftedCombination::new(params, al, hs)?)))
}

/// `A_N f = (1/N) sum_n T_1^floor G(n+h_1) ... T_r^floor G(n+h_r) f`. For
/// a character `e(k . x)` this is `e(k . x)` times a floor-phase average,
/// so `||A_N f - Pf||^2 = sum_k |coef_k|^2 |avg_k - [k invariant]|^2`.
pub fn vn_average(
    sys: &ModelSystem,
    f: &ObservableSpec,
    shifts: &[i64],
    c: f64,
    n: u64,
    prec: PrecisionChoice,
    threads: Option<usize>,
) -> Result<VnResult> {
    check_dim(sys, f)?;
    if shifts.len() != sys.transformations() {
        return Err(Error::Input(format!("{} shifts for {} transformations", shifts.len(), sys.transformations())));
    }
    let mut s = shifts.to_vec();
    s.sort_unstable();
    s.dedup();
    if s.len() != shifts.len() {
        return Err(Error::Input("shifts must be distinct".into()));
    }
    if n == 0 {
        return Err(Error::Domain("N must be at least 1".into()));
    }
    let params = GrowthParams::new(c)?;
    let mut specs = Vec::new();
    let mut weights = Vec::new();
    for (k, a) in &f.terms {
        if let Some(sp) = character_phase(sys, k, params, shifts)? {
            specs.push(sp);
            weights.push((k.clone(), a.norm_sqr()));
        }
    }
    let mut checkpoints: Vec<u64> = crate::expsum::dyadic_checkpoints(n);
    let mut norms_sq = vec![0.0f64; checkpoints.len()];
    let mut multipliers = Vec::new();
    let mut bits = 0;
    if !specs.is_empty() {
        let b = batch_sums(&specs, n, prec, threads)?;
        bits = b.precision_bits;
        checkpoints = b.checkpoints.clone();
        for ((k, w), sums) in weights.iter().zip(&b.sums) {
            for (j, (&m, z)) in checkpoints.iter().zip(sums).enumerate() {
                norms_sq[j] += w * (z / m as f64).norm_sqr();
            }
            multipliers.push((k.clone(), sums[0] / n as f64));
        }
    }
    let mut curve: Vec<(u64, f64)> = checkpoints.iter().zip(&norms_sq).map(|(&m, v)| (m, v.sqrt())).collect();
    curve.reverse();
    Ok(VnResult { n, norm: norms_sq[0].sqrt(), curve, precision_bits: bits, multipliers })
}

/// Check of `nu_f({0}) = <Pf, f>`: for each character term, `<Pf, f>`
/// against the Cesaro average of `<U_1^(n_1) ... U_r^(n_r) f, f>` over
/// the box `[0, M)^r`, which for a character is
/// `|coef|^2 prod_i (1/M) sum_{n<M} e(n k . beta_i)`.
#[derive(Clone, Debug, Serialize)]
pub struct SpectralMass {
    pub k: Vec<i64>,
    pub pf_f: f64,
    pub cesaro: Vec<(u64, Complex64)>,
}

pub fn spectral_mass_at_zero(sys: &ModelSystem, f: &ObservableSpec, boxes: &[u64]) -> Result<Vec<SpectralMass>> {
    check_dim(sys, f)?;
    let betas = sys.rotation_vectors()?;
    let pf = invariant_projection(sys, f)?;
    let mut out = Vec::new();
    for (k, a) in &f.terms {
        let single = ObservableSpec { terms: vec![(k.clone(), *a)] };
        let proj = ObservableSpec { terms: pf.terms.iter().filter(|(kk, _)| kk == k).cloned().collect() };
        let pf_f = proj.inner(&single).re;
        let mut cesaro = Vec::new();
        for &m in boxes {
            if m == 0 {
                return Err(Error::Input("box side must be positive".into()));
            }
            let mut z = Complex64::new(a.norm_sqr(), 0.0);
            for b in &betas {
                let (v, rational) = pairing(k, b);
                z *= geometric_mean(&v, rational, m)?;
            }
            cesaro.push((m, z));
        }
        out.push(SpectralMass { k: k.clone(), pf_f, cesaro });
    }
    Ok(out)
}

/// `(1/M) sum_{n<M} e(n t)`, exact for rational `t` via residues.
fn geometric_mean(t: &Coefficient, rational: bool, m: u64) -> Result<Complex64> {
    if rational {
        let (p, q) = t.rational_parts().expect("rational");
        if q == BigInt::from(1) {
            return Ok(Complex64::new(1.0, 0.0));
        }
        let q = q.to_u64().ok_or_else(|| Error::Unsupported("denominator above 2^64".into()))?;
        let p = p.to_u64().unwrap();
        // Full periods contribute zero; only the remainder is summed.
        let r = m % q;
        let mut s = Complex64::new(0.0, 0.0);
        for n in 0..r {
            s += turn(Fixed::from_ratio(((n as u128 * p as u128) % q as u128) as u64, q).top());
        }
        return Ok(s / m as f64);
    }
    let x = t.to_f64();
    let (sn, sd) = ((std::f64::consts::PI * m as f64 * x).sin(), (std::f64::consts::PI * x).sin());
    let phase = Complex64::from_polar(1.0, std::f64::consts::PI * (m as f64 - 1.0) * x);
    Ok(phase * (sn / (m as f64 * sd)))
}

/// Sequences correlated against an orbit.
#[derive(Clone, Debug)]
pub enum Weight {
    /// `a(n) = e(G(n))`.
    A,
    /// `b(n) = e(alpha floor G(n))`.
    B(Coefficient),
}

#[derive(Clone, Debug, Serialize)]
pub struct ZeroEntropyResult {
    pub n: u64,
    pub value: Complex64,
    pub modulus: f64,
    pub precision_bits: u32,
}

fn weight_spec(w: &Weight, params: GrowthParams) -> Result<SequenceSpec> {
    Ok(match w {
        Weight::A => SequenceSpec::smooth(&ShiftedCombination::new(params, vec![Coefficient::int(1)], vec![0])?),
        Weight::B(alpha) => SequenceSpec::floor(&ShiftedCombination::new(params, vec![alpha.clone()], vec![0])?),
    })
}

/// Per character `e(k . x)`: its value at the start point and the phase
/// polynomial of `n -> k . T^n x0` minus that value.
fn orbit_phases(sys: &ModelSystem, k: &[i64], x0: &[Coefficient]) -> Result<(Coefficient, Vec<Coefficient>)> {
    let dot0 = k.iter().zip(x0).fold(Coefficient::int(0), |acc, (&kl, x)| acc.add(&x.scale(kl)));
    match sys {
        ModelSystem::Torus { betas, .. } if betas.len() == 1 => {
            let (v, _) = pairing(k, &betas[0]);
            Ok((dot0, vec![Coefficient::int(0), v]))
        }
        ModelSystem::Cyclic { steps, .. } if steps.len() == 1 => {
            let (v, _) = pairing(k, &sys.rotation_vectors()?[0]);
            Ok((dot0, vec![Coefficient::int(0), v]))
        }
        ModelSystem::Skew { alpha } => {
            // S^n(x, y) = (x + n alpha, y + n x + n(n-1) alpha / 2).
            let (k1, k2) = (k[0], k[1]);
            let half = alpha.mul(&Coefficient::ratio(k2, 2));
            let lin = alpha.scale(k1).add(&x0[0].scale(k2)).add(&half.neg());
            Ok((dot0, vec![Coefficient::int(0), lin, half]))
        }
        _ => Err(Error::Unsupported("orbit correlations need a single transformation".into())),
    }
}

fn is_zero_coeff(c: &Coefficient) -> bool {
    c.as_rational().is_some_and(|r| r.is_zero())
}

/// `(1/N) sum_{n<=N} w(n) f(T^n x0)` for a rotation or the skew product.
pub fn zero_entropy_correlation(
    sys: &ModelSystem,
    f: &ObservableSpec,
    x0: &[Coefficient],
    weight: &Weight,
    c: f64,
    n: u64,
    prec: PrecisionChoice,
    threads: Option<usize>,
) -> Result<ZeroEntropyResult> {
    check_dim(sys, f)?;
    if x0.len() != sys.dim() {
        return Err(Error::Input(format!("start point has {} coordinates, system {}", x0.len(), sys.dim())));
    }
    if n == 0 {
        return Err(Error::Domain("N must be at least 1".into()));
    }
    let params = GrowthParams::new(c)?;
    let base = weight_spec(weight, params)?;
    let mut specs = Vec::new();
    let mut factors = Vec::new();
    for (k, a) in &f.terms {
        let (d0, poly) = orbit_phases(sys, k, x0)?;
        let sp = if poly.iter().all(is_zero_coeff) { base.clone() } else { base.plus(&SequenceSpec::polynomial(poly)?)? };
        specs.push(sp);
        let e0 = crate::precision::reduce_mod1(&d0.eval(192)?)?;
        factors.push(a * turn(e0.frac.top()));
    }
    if specs.is_empty() {
        return Ok(ZeroEntropyResult { n, value: Complex64::new(0.0, 0.0), modulus: 0.0, precision_bits: 0 });
    }
    let b = batch_sums(&specs, n, prec, threads)?;
    let value: Complex64 = factors.iter().zip(&b.sums).map(|(fa, s)| fa * s[0] / n as f64).sum();
    Ok(ZeroEntropyResult { n, value, modulus: value.norm(), precision_bits: b.precision_bits })
}

/// Skew orbit of `(x, y)` by direct iteration in exact rationals mod 1.
pub fn skew_orbit_exact(alpha: &BigRational, x: BigRational, y: BigRational, steps: u64) -> Vec<(BigRational, BigRational)> {
    let frac = |v: BigRational| {
        let f = v.floor();
        v - f
    };
    let mut out = Vec::with_capacity(steps as usize + 1);
    let (mut x, mut y) = (frac(x), frac(y));
    out.push((x.clone(), y.clone()));
    for _ in 0..steps {
        let ny = frac(&y + &x);
        x = frac(&x + alpha);
        y = ny;
        out.push((x.clone(), y.clone()));
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct SkewDemo {
    pub n: u64,
    pub time_average: Complex64,
    pub space_average: Complex64,
    pub deviation: f64,
    /// `"lebesgue"` for irrational `alpha`, `"orbit"` for rational.
    pub space: &'static str,
    pub precision_bits: u32,
}

/// Time average of `prod_i g(S^(n + h_i)(0,0))` for `g(x,y) = e(m y)`
/// against the space average of `prod_i g(S^(h_i) .)`: Lebesgue measure on
/// `T^2` for irrational `alpha`, the finite orbit of `(0,0)` otherwise.
pub fn skew_demo(
    alpha: &Coefficient,
    m: i64,
    shifts: &[i64],
    n: u64,
    prec: PrecisionChoice,
    threads: Option<usize>,
) -> Result<SkewDemo> {
    if shifts.is_empty() {
        return Err(Error::Input("at least one shift is needed".into()));
    }
    let mut s = shifts.to_vec();
    s.sort_unstable();
    s.dedup();
    if s.len() != shifts.len() {
        return Err(Error::Input("shifts must be distinct".into()));
    }
    if n == 0 {
        return Err(Error::Domain("N must be at least 1".into()));
    }
    // sum_i (n + h_i)(n + h_i - 1)/2 = (r/2) n^2 + sum_i (h_i - 1/2) n + sum_i h_i(h_i - 1)/2
    let r = shifts.len() as i64;
    let c1: i64 = shifts.iter().map(|h| 2 * h - 1).sum();
    let c0: i64 = shifts.iter().map(|h| h * (h - 1)).sum();
    let ma = alpha.scale(m);
    let poly = vec![
        ma.mul(&Coefficient::ratio(c0, 2)),
        ma.mul(&Coefficient::ratio(c1, 2)),
        ma.mul(&Coefficient::ratio(r, 2)),
    ];
    let b = batch_sums(&[SequenceSpec::polynomial(poly)?], n, prec, threads)?;
    let time_average = b.sums[0][0] / n as f64;
    let (space_average, space) = match alpha.as_rational() {
        None => (Complex64::new(if m == 0 { 1.0 } else { 0.0 }, 0.0), "lebesgue"),
        Some(a) => (orbit_space_average(a, m, shifts), "orbit"),
    };
    Ok(SkewDemo {
        n,
        time_average,
        space_average,
        deviation: (time_average - space_average).norm(),
        space,
        precision_bits: b.precision_bits,
    })
}

/// Orbit period of `(0,0)` under `S` with rational `alpha = p/q`.
pub fn skew_period(alpha: &BigRational) -> u64 {
    let q = alpha.denom().to_u64().expect("small denominator");
    if q.is_odd() {
        q
    } else {
        2 * q
    }
}

/// Mean of `prod_i e(m y(S^(h_i) p))` over the orbit points `p` of `(0,0)`.
fn orbit_space_average(alpha: &BigRational, m: i64, shifts: &[i64]) -> Complex64 {
    let l = skew_period(alpha);
    let zero = BigRational::from_integer(BigInt::from(0));
    let orbit = skew_orbit_exact(alpha, zero.clone(), zero, l - 1);
    let mut acc = Complex64::new(0.0, 0.0);
    for (x, y) in &orbit {
        let mut ph = BigRational::from_integer(BigInt::from(0));
        for &h in shifts {
            let (_, yh) = skew_power(alpha, x, y, h);
            ph += yh * BigInt::from(m);
        }
        acc += rational_turn(&ph);
    }
    acc / l as f64
}

/// `S^h(x, y)` for any integer `h`, exactly.
fn skew_power(alpha: &BigRational, x: &BigRational, y: &BigRational, h: i64) -> (BigRational, BigRational) {
    let hb = BigRational::from_integer(BigInt::from(h));
    let tri = BigRational::from_integer(BigInt::from(h) * BigInt::from(h - 1)) / BigInt::from(2);
    (x + alpha * &hb, y + &hb * x + alpha * tri)
}

fn rational_turn(v: &BigRational) -> Complex64 {
    let f = v - v.floor();
    let q = f.denom().to_u64().expect("small denominator");
    let p = f.numer().to_u64().unwrap();
    turn(Fixed::from_ratio(p, q).top())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn irr(s: &str) -> Coefficient {
        Coefficient::parse(s).unwrap()
    }

    #[test]
    fn projection_examples() {
        let sys = ModelSystem::torus(vec![vec![irr("sqrt(2)")]]).unwrap();
        assert_eq!(invariant_projection(&sys, &ObservableSpec::constant(1)).unwrap(), ObservableSpec::constant(1));
        assert!(invariant_projection(&sys, &ObservableSpec::character(vec![1])).unwrap().terms.is_empty());
        let half = ModelSystem::torus(vec![vec![Coefficient::ratio(1, 2)]]).unwrap();
        let f = ObservableSpec::character(vec![2]);
        assert_eq!(invariant_projection(&half, &f).unwrap(), f);
        assert!(invariant_projection(&ModelSystem::Skew { alpha: irr("sqrt(2)") }, &f).is_err());
    }

    #[test]
    fn cyclic_projection() {
        let sys = ModelSystem::cyclic(6, vec![2, 3]).unwrap();
        let f = ObservableSpec::new(1, (0..6).map(|k| (vec![k], Complex64::new(1.0, 0.0))).collect()).unwrap();
        let p = invariant_projection(&sys, &f).unwrap();
        assert_eq!(p.terms.iter().map(|t| t.0[0]).collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn invariant_character_gives_zero() {
        let sys = ModelSystem::torus(vec![vec![Coefficient::ratio(1, 2)], vec![Coefficient::ratio(1, 3)]]).unwrap();
        let f = ObservableSpec::character(vec![6]);
        let r = vn_average(&sys, &f, &[0, 1], 0.3, 1000, PrecisionChoice::Auto, None).unwrap();
        assert_eq!(r.norm, 0.0);
        assert!(r.curve.iter().all(|p| p.1 == 0.0));
    }

    #[test]
    fn skew_orbit_closed_form() {
        let a = BigRational::new(BigInt::from(2), BigInt::from(7));
        let zero = BigRational::from_integer(BigInt::from(0));
        let orb = skew_orbit_exact(&a, zero.clone(), zero.clone(), 30);
        for (n, (x, y)) in orb.iter().enumerate() {
            let (xp, yp) = skew_power(&a, &zero, &zero, n as i64);
            assert_eq!(x, &(xp.clone() - xp.floor()));
            assert_eq!(y, &(yp.clone() - yp.floor()));
        }
        assert_eq!(skew_period(&a), 7);
        assert_eq!(skew_period(&BigRational::new(BigInt::from(1), BigInt::from(4))), 8);
    }

    #[test]
    fn trivial_skew_demo() {
        let d = skew_demo(&irr("sqrt(2)"), 0, &[0, 3], 100, PrecisionChoice::Auto, None).unwrap();
        assert_eq!(d.time_average, Complex64::new(1.0, 0.0));
        assert_eq!(d.deviation, 0.0);
    }
}
