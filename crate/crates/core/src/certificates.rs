//! Grid certificates for the derivative bounds on `G` and `F`, the
//! difference sandwich, and the parameter bookkeeping of Karacuba's lemma.
//!
//! The constants in these bounds are not effective, so "certified" means
//! checked at every point of an explicit grid, with the worst ratio
//! reported.

use rayon::prelude::*;
use serde::Serialize;

use crate::difference::DiffPoly;
use crate::error::{Error, Result};
use crate::growth::{eval_g_u64, jet_combination, jet_g, GrowthParams, ShiftedCombination};
use crate::precision::{self, ExtReal};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LemmaId {
    GLower,
    GUpper,
    FLower,
    FUpper,
    SandwichDelta,
    CombinedA,
    CombinedB,
}

#[derive(Clone, Debug, Serialize)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundCertificate {
    pub lemma: LemmaId,
    pub n: u64,
    pub grid: GridSpec,
    pub s_range: (u32, u32),
    /// Smallest ratio of the satisfied side to the bound; below 1 means
    /// a violation.
    pub margin: f64,
    pub passed: bool,
    pub checked: usize,
    /// `(x, s)` pairs outside the hypothesis of the bound.
    pub skipped: usize,
    pub violations: usize,
    /// Smallest grid `x` from which the bound holds at every larger grid
    /// point; `None` if it fails at the last one.
    pub x0_empirical: Option<f64>,
}

/// Working precision for certificates at scale `N`.
fn cert_bits(n: u64, c: f64, extra: f64) -> Result<u32> {
    let l = precision::log2_growth(3 * n + 64, c)?;
    Ok(precision::round_precision((l + extra).ceil() as u32 + 128).max(192))
}

/// `lo (hi/lo)^((i+1)/points)` for `i < points`: log-spaced in `(lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    (0..points).map(|i| lo * (hi / lo).powf((i + 1) as f64 / points as f64)).collect()
}

fn ln_f(x: f64) -> f64 {
    x.ln()
}

/// One grid point's outcome: `(ratio, ok)` per checked pair, and skips.
struct PointResult {
    ratios: Vec<f64>,
    skipped: usize,
}

fn assemble(
    lemma: LemmaId,
    n: u64,
    grid: &[f64],
    s_range: (u32, u32),
    pts: Vec<Result<PointResult>>,
) -> Result<BoundCertificate> {
    let mut margin = f64::INFINITY;
    let (mut checked, mut skipped, mut violations) = (0, 0, 0);
    let mut last_bad: Option<usize> = None;
    for (i, p) in pts.into_iter().enumerate() {
        let p = p?;
        skipped += p.skipped;
        for r in p.ratios {
            checked += 1;
            margin = margin.min(r);
            if !(r >= 1.0) {
                violations += 1;
                last_bad = Some(i);
            }
        }
    }
    let x0_empirical = match last_bad {
        None => grid.first().copied(),
        Some(i) if i + 1 < grid.len() => Some(grid[i + 1]),
        Some(_) => None,
    };
    Ok(BoundCertificate {
        lemma,
        n,
        grid: GridSpec { lo: grid[0], hi: *grid.last().unwrap(), points: grid.len() },
        s_range,
        margin,
        passed: violations == 0 && margin >= 1.0,
        checked,
        skipped,
        violations,
        x0_empirical,
    })
}

/// `log2 |v|` with `-inf` for zero; signs are handled by the callers.
fn l2(v: &ExtReal) -> f64 {
    v.log2_abs()
}

/// Ratio `2^(a - b)` in f64 without intermediate overflow.
fn ratio(a: f64, b: f64) -> f64 {
    (a - b).exp2()
}

fn check_args(n: u64, s_max: u32, density: usize) -> Result<()> {
    if n < 10 {
        return Err(Error::Domain(format!("N must be at least 10, got {n}")));
    }
    if density == 0 {
        return Err(Error::Input("grid density must be positive".into()));
    }
    if s_max == 0 || s_max > 64 {
        return Err(Error::Unsupported(format!("derivative order {s_max} outside 1..=64")));
    }
    Ok(())
}

/// `G^(s)(x)/s! >= G(x) / (2 x^s)` where `(c+1) log^c x >= s`, and
/// `|G^(s)(x)/s!| <= 2 (2/N)^s G(3N)`, for `x` on a grid in `(N, 2N]`
/// and `s = 1..=s_max`.
pub fn certify_single(
    params: GrowthParams,
    n: u64,
    s_max: u32,
    density: usize,
) -> Result<(BoundCertificate, BoundCertificate)> {
    check_args(n, s_max, density)?;
    let c = params.c();
    let p = cert_bits(n, c, 0.0)?;
    let grid = log_grid(n as f64, 2.0 * n as f64, density);
    let g3n = l2(&eval_g_u64(3 * n, c, p)?);
    let log2n = (n as f64).log2();
    let res: Vec<Result<(PointResult, PointResult)>> = grid
        .par_iter()
        .map(|&x| {
            let xe = ExtReal::from_f64(x, p)?;
            let jet = jet_g(&xe, s_max as usize, c)?;
            let gx = l2(&jet.coeffs[0]);
            let lam = params.lambda(x);
            let (mut lo, mut up) = (PointResult { ratios: vec![], skipped: 0 }, PointResult { ratios: vec![], skipped: 0 });
            for s in 1..=s_max {
                let v = &jet.coeffs[s as usize];
                let lv = l2(v);
                let bound_up = 1.0 + s as f64 * (1.0 - log2n) + g3n;
                up.ratios.push(ratio(bound_up, lv));
                if lam >= s as f64 {
                    let bound_lo = gx - 1.0 - s as f64 * x.log2();
                    lo.ratios.push(if v.is_negative() { 0.0 } else { ratio(lv, bound_lo) });
                } else {
                    lo.skipped += 1;
                }
            }
            Ok((lo, up))
        })
        .collect();
    let (mut lo, mut up) = (Vec::new(), Vec::new());
    for r in res {
        match r {
            Ok((a, b)) => {
                lo.push(Ok(a));
                up.push(Ok(b));
            }
            Err(e) => return Err(e),
        }
    }
    Ok((
        assemble(LemmaId::GLower, n, &grid, (1, s_max), lo)?,
        assemble(LemmaId::GUpper, n, &grid, (1, s_max), up)?,
    ))
}

/// Grid in `(N + a, 2N - a]`.
fn comb_grid(comb: &ShiftedCombination, n: u64, density: usize) -> Result<Vec<f64>> {
    let a = comb.max_shift() as f64;
    let (lo, hi) = (n as f64 + a, 2.0 * n as f64 - a);
    if hi <= lo || lo - a < 2.0 {
        return Err(Error::Domain(format!("N={n} is too small for shifts up to {a}")));
    }
    Ok(log_grid(lo, hi, density))
}

/// `F^(s)(x)/s! >= (d_tau/4) G(x) / x^(s+tau)` where
/// `(c+1) log^c(x + h_i) >= s` for all `i`, and
/// `|F^(s)(x)/s!| <= C (2/N)^s G(3N)` with `C = sum |alpha_i|`, on a grid
/// in `(N + a, 2N - a]`. A negative `d_tau` is handled by certifying `-F`.
pub fn certify_combination(
    comb: &ShiftedCombination,
    poly: &DiffPoly,
    n: u64,
    s_max: u32,
    density: usize,
) -> Result<(BoundCertificate, BoundCertificate)> {
    check_args(n, s_max, density)?;
    let c = comb.params.c();
    let p = cert_bits(n, c, comb.coeff_abs_sum().max(1.0).log2())?;
    let grid = comb_grid(comb, n, density)?;
    let g3n = l2(&eval_g_u64(3 * n, c, p)?);
    let log2n = (n as f64).log2();
    let lc = comb.coeff_abs_sum().log2();
    let ld = (poly.d_tau().abs_f64() / 4.0).log2();
    let tau = poly.tau as f64;
    let hmin = comb.min_shift() as f64;
    let sign = if poly.sign_flip { -1 } else { 1 };
    let res: Vec<Result<(PointResult, PointResult)>> = grid
        .par_iter()
        .map(|&x| {
            let xe = ExtReal::from_f64(x, p)?;
            let jet = jet_combination(comb, &xe, s_max as usize)?;
            let gx = l2(&eval_g_from_f64(x, c, p)?);
            let lam = comb.params.lambda(x + hmin);
            let (mut lo, mut up) = (PointResult { ratios: vec![], skipped: 0 }, PointResult { ratios: vec![], skipped: 0 });
            for s in 1..=s_max {
                let v = &jet.coeffs[s as usize];
                let lv = l2(v);
                up.ratios.push(ratio(lc + s as f64 * (1.0 - log2n) + g3n, lv));
                if lam >= s as f64 {
                    let positive = v.signum() * sign > 0;
                    let bound = ld + gx - (s as f64 + tau) * x.log2();
                    lo.ratios.push(if positive { ratio(lv, bound) } else { 0.0 });
                } else {
                    lo.skipped += 1;
                }
            }
            Ok((lo, up))
        })
        .collect();
    let (mut lo, mut up) = (Vec::new(), Vec::new());
    for r in res {
        let (a, b) = r?;
        lo.push(Ok(a));
        up.push(Ok(b));
    }
    Ok((
        assemble(LemmaId::FLower, n, &grid, (1, s_max), lo)?,
        assemble(LemmaId::FUpper, n, &grid, (1, s_max), up)?,
    ))
}

fn eval_g_from_f64(x: f64, c: f64, p: u32) -> Result<ExtReal> {
    crate::growth::eval_g(&ExtReal::from_f64(x, p)?, c)
}

fn factorial(k: usize, p: u32) -> ExtReal {
    (2..=k as u64).fold(ExtReal::one(p), |acc, j| acc.mul(&ExtReal::from_u64(j, p)))
}

/// `G^(s+k)(x+k) >= Delta^k G^(s)(x) >= G^(s+k)(x)` on a grid in
/// `(N + k_max, 2N - k_max]`, for all `s <= s_max`, `k <= k_max` with
/// `s + k <= (c+1) log^c x`. Margin is the smaller of the two ratios.
pub fn certify_sandwich(
    params: GrowthParams,
    n: u64,
    s_max: u32,
    k_max: u32,
    density: usize,
) -> Result<BoundCertificate> {
    check_args(n, s_max.max(1), density)?;
    let c = params.c();
    let a = k_max as f64;
    let grid = log_grid(n as f64 + a, 2.0 * n as f64 - a, density);
    // Delta^k cancels about k log2 N bits.
    let p = cert_bits(n, c, (k_max as f64 + 1.0) * (2.0 * n as f64).log2())?;
    let top = (s_max + k_max) as usize;
    let pts: Vec<Result<PointResult>> = grid
        .par_iter()
        .map(|&x| {
            let lam = params.lambda(x);
            // Derivatives G^(m)(x + j) = m! * jet_j[m].
            let mut jets = Vec::with_capacity(k_max as usize + 1);
            for j in 0..=k_max {
                let xe = ExtReal::from_f64(x + j as f64, p)?;
                jets.push(jet_g(&xe, top, c)?.coeffs);
            }
            let der = |m: usize, j: usize| jets[j][m].mul(&factorial(m, p));
            let mut out = PointResult { ratios: vec![], skipped: 0 };
            for s in 0..=s_max as usize {
                for k in 0..=k_max as usize {
                    if (s + k) as f64 > lam {
                        out.skipped += 1;
                        continue;
                    }
                    let mut dk = ExtReal::zero(p);
                    let row = binomials(k);
                    for (j, b) in row.iter().enumerate() {
                        let t = der(s, j).mul(&ExtReal::from_u64(*b, p));
                        dk = if (k - j) % 2 == 0 { dk.add(&t) } else { dk.sub(&t) };
                    }
                    let upper = der(s + k, k);
                    let lower = der(s + k, 0);
                    let r1 = if dk.is_negative() { 0.0 } else { ratio(l2(&upper), l2(&dk)) };
                    let r2 = if dk.is_negative() || lower.is_negative() { 0.0 } else { ratio(l2(&dk), l2(&lower)) };
                    // Exact equality at k = 0 is a pass, not a rounding accident.
                    let fix = |r: f64| if k == 0 { r.max(1.0) } else { r };
                    out.ratios.push(fix(r1).min(fix(r2)));
                }
            }
            Ok(out)
        })
        .collect();
    assemble(LemmaId::SandwichDelta, n, &grid, (0, s_max), pts)
}

fn binomials(k: usize) -> Vec<u64> {
    let mut row = vec![1u64];
    for i in 0..k {
        let next = row[i] * (k - i) as u64 / (i + 1) as u64;
        row.push(next);
    }
    row
}

/// Which slot of the lower-bound inequality is used for the upper end of
/// the admissible set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LowerForm {
    /// `log^c N`, as used when the set of orders is chosen.
    #[default]
    LogC,
    /// `log^(gamma - 1) N`, as displayed in the combined inequality.
    LogGammaMinusOne { gamma: f64 },
}

/// The data of a combination that the admissible set depends on.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CombinationData {
    pub params: GrowthParams,
    /// `d = |d_tau| / 4`.
    pub d: f64,
    pub tau: u32,
    /// `C = sum |alpha_i|`.
    pub c_sum: f64,
}

impl CombinationData {
    pub fn from_poly(comb: &ShiftedCombination, poly: &DiffPoly) -> CombinationData {
        CombinationData {
            params: comb.params,
            d: poly.d_tau().abs_f64() / 4.0,
            tau: poly.tau as u32,
            c_sum: comb.coeff_abs_sum(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SInterval {
    /// Real-valued endpoints before rounding.
    pub lower_real: f64,
    pub upper_real: f64,
    /// `ceil(lower_real)` and `min(floor(upper_real), floor((c+1) log^c N))`.
    pub lower: i64,
    pub upper: i64,
    pub empty: bool,
}

impl SInterval {
    pub fn size(&self) -> u64 {
        if self.empty {
            0
        } else {
            (self.upper - self.lower + 1) as u64
        }
    }

    /// Number of orders also in `1..=k-1`.
    pub fn size_within(&self, k: u64) -> u64 {
        if self.empty {
            return 0;
        }
        let lo = self.lower.max(1);
        let hi = self.upper.min(k as i64 - 1);
        if hi < lo {
            0
        } else {
            (hi - lo + 1) as u64
        }
    }
}

/// Orders `s` with `N^(-theta s) <= |alpha F^(s)/s!| <= N^(-theta s/2)`
/// guaranteed by the two combined inequalities, for `alpha = N^-A`.
/// Evaluated at 128 bits.
pub fn admissible_s_set(data: &CombinationData, n: u64, a: f64, theta: f64, form: LowerForm) -> Result<SInterval> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::Domain(format!("theta must lie in (0,1), got {theta}")));
    }
    if n < 3 {
        return Err(Error::Domain("N must be at least 3".into()));
    }
    if !(data.d > 0.0) || !(data.c_sum > 0.0) {
        return Err(Error::Domain("d and C must be positive".into()));
    }
    let p = 128;
    let f = |v: f64| ExtReal::from_f64(v, p);
    let c = data.params.c();
    let ln_n = precision::ln(&ExtReal::from_u64(n, p))?;
    let ln_3n = precision::ln(&ExtReal::from_u64(3 * n, p))?;
    let a1 = f(c + 1.0)?;
    let one = ExtReal::one(p);
    let ln2 = precision::ln2(p);
    let lc = precision::ln(&f(data.c_sum)?)?;
    let ld = precision::ln(&f(data.d)?)?;
    let ae = f(a)?;
    // lower: (1 - theta/2 - log2/logN)^-1 ((log^(c+1)(3N) + log C)/log N - A)
    let den = one.sub(&f(theta / 2.0)?).sub(&ln2.div(&ln_n)?);
    let num = precision::pow(&ln_3n, &a1)?.add(&lc).div(&ln_n)?.sub(&ae);
    let lower = num.div(&den)?;
    // upper: (1 - theta)^-1 (log^c N - A - tau + log d / log N)
    let slot = match form {
        LowerForm::LogC => precision::pow(&ln_n, &f(c)?)?,
        LowerForm::LogGammaMinusOne { gamma } => precision::pow(&ln_n, &f(gamma - 1.0)?)?,
    };
    let upper = slot
        .sub(&ae)
        .sub(&ExtReal::from_u64(data.tau as u64, p))
        .add(&ld.div(&ln_n)?)
        .div(&one.sub(&f(theta)?))?;
    let cap = a1.mul(&precision::pow(&ln_n, &f(c)?)?);
    let lo_i = ceil_i(&lower);
    let hi_i = floor_i(&upper).min(floor_i(&cap));
    Ok(SInterval { lower_real: lower.to_f64(), upper_real: upper.to_f64(), lower: lo_i, upper: hi_i, empty: hi_i < lo_i })
}

fn floor_i(v: &ExtReal) -> i64 {
    num_traits::ToPrimitive::to_i64(&v.floor_bigint()).unwrap_or(i64::MAX)
}

fn ceil_i(v: &ExtReal) -> i64 {
    -floor_i(&v.neg())
}

/// Exponent for the upper end of the `alpha` range.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "preset", content = "value")]
pub enum AlphaRangePreset {
    /// `alpha <= G(N)^K` with `K < (c+1)(1-theta)`; default `0.999 (c+1)(1-theta)`.
    Proof(Option<f64>),
    /// `alpha <= G(N)^C` with `0 < C < c`; default `0.999 c`.
    Statement(Option<f64>),
}

impl Default for AlphaRangePreset {
    fn default() -> Self {
        AlphaRangePreset::Proof(None)
    }
}

impl AlphaRangePreset {
    pub fn exponent(&self, c: f64, theta: f64) -> Result<f64> {
        match *self {
            AlphaRangePreset::Proof(k) => {
                let cap = (c + 1.0) * (1.0 - theta);
                let k = k.unwrap_or(0.999 * cap);
                if !(k > 0.0 && k < cap) {
                    return Err(Error::Domain(format!("K must lie in (0, {cap}), got {k}")));
                }
                Ok(k)
            }
            AlphaRangePreset::Statement(v) => {
                let v = v.unwrap_or(0.999 * c);
                if !(v > 0.0 && v < c) {
                    return Err(Error::Domain(format!("C must lie in (0, {c}), got {v}")));
                }
                Ok(v)
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct KaracubaParams {
    pub theta: f64,
    /// `theta / 2`.
    pub big_theta: f64,
    /// `3/4`.
    pub theta0: f64,
    pub delta: f64,
    pub k: u64,
    pub alpha_exponent: f64,
    /// `A` in `alpha = N^-A` over the admissible `alpha` range.
    pub a_range: (f64, f64),
    /// Admissible set at the worst sampled `A`.
    pub s_range: SInterval,
    pub s_size: u64,
    pub admissible: bool,
}

/// `A` values are swept on `samples` evenly spaced points including both
/// ends of the range.
#[allow(clippy::too_many_arguments)]
pub fn karacuba_params(
    data: &CombinationData,
    gamma: f64,
    theta: f64,
    n: u64,
    preset: AlphaRangePreset,
    form: LowerForm,
    samples: usize,
) -> Result<KaracubaParams> {
    if !(theta > 0.0 && theta < 1.0 / 3.0) {
        return Err(Error::Domain(format!("theta must lie in (0,1/3), got {theta}")));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::Domain(format!("gamma must lie in (0,1), got {gamma}")));
    }
    let c = data.params.c();
    let delta = (1.0 - gamma) / 20.0 * (1.0 / (1.0 - theta) - 1.0 / (1.0 - theta / 2.0));
    let ln_n = ln_f(n as f64);
    let k = ((9.0 + data.c_sum) * ln_n.powf(c)).floor() as u64 + 1;
    let e = preset.exponent(c, theta)?;
    let a_min = -e * ln_n.powf(c);
    let a_max = gamma * ln_f(2.0 * n as f64).powf(c + 1.0) / ln_n;
    let samples = samples.max(2);
    let mut worst: Option<(u64, SInterval)> = None;
    for i in 0..samples {
        let a = a_min + (a_max - a_min) * i as f64 / (samples - 1) as f64;
        let s = admissible_s_set(data, n, a, theta, form)?;
        let size = s.size_within(k);
        if worst.as_ref().is_none_or(|w| size < w.0) {
            worst = Some((size, s));
        }
    }
    let (s_size, s_range) = worst.unwrap();
    Ok(KaracubaParams {
        theta,
        big_theta: theta / 2.0,
        theta0: 0.75,
        delta,
        k,
        alpha_exponent: e,
        a_range: (a_min, a_max),
        admissible: s_size as f64 >= delta * k as f64,
        s_range,
        s_size,
    })
}

/// `N^(-theta s) <= |alpha F^(s)(x)/s!|` and `|alpha F^(s)(x)/s!| <= N^(-theta s/2)`
/// for every `s` in `orders` and grid `x`, with `alpha = N^-A`.
pub fn certify_orders(
    comb: &ShiftedCombination,
    n: u64,
    a: f64,
    theta: f64,
    orders: &[u32],
    density: usize,
) -> Result<(BoundCertificate, BoundCertificate)> {
    let s_max = orders.iter().copied().max().unwrap_or(1);
    check_args(n, s_max, density)?;
    let c = comb.params.c();
    let p = cert_bits(n, c, comb.coeff_abs_sum().max(1.0).log2())?;
    let grid = comb_grid(comb, n, density)?;
    let log2n = (n as f64).log2();
    let la = -a * log2n;
    let res: Vec<Result<(PointResult, PointResult)>> = grid
        .par_iter()
        .map(|&x| {
            let jet = jet_combination(comb, &ExtReal::from_f64(x, p)?, s_max as usize)?;
            let (mut up, mut lo) = (PointResult { ratios: vec![], skipped: 0 }, PointResult { ratios: vec![], skipped: 0 });
            for &s in orders {
                let lv = la + l2(&jet.coeffs[s as usize]);
                up.ratios.push(ratio(-theta / 2.0 * s as f64 * log2n, lv));
                lo.ratios.push(ratio(lv, -theta * s as f64 * log2n));
            }
            Ok((up, lo))
        })
        .collect();
    let (mut up, mut lo) = (Vec::new(), Vec::new());
    for r in res {
        let (u, l) = r?;
        up.push(Ok(u));
        lo.push(Ok(l));
    }
    let sr = (*orders.iter().min().unwrap_or(&1), s_max);
    Ok((assemble(LemmaId::CombinedA, n, &grid, sr, up)?, assemble(LemmaId::CombinedB, n, &grid, sr, lo)?))
}

/// `floor((c+1) log^c N)`.
pub fn s_max_for(params: GrowthParams, n: u64) -> u32 {
    params.lambda(n as f64).floor().max(1.0) as u32
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::difference::change_of_basis;
    use crate::growth::Coefficient;

    fn p3() -> GrowthParams {
        GrowthParams::new(0.3).unwrap()
    }

    fn comb(al: &[i64], h: &[i64]) -> ShiftedCombination {
        ShiftedCombination::new(p3(), al.iter().map(|&a| Coefficient::int(a)).collect(), h.to_vec()).unwrap()
    }

    #[test]
    fn delta_and_k() {
        let d = CombinationData { params: p3(), d: 0.25, tau: 0, c_sum: 2.0 };
        let k = karacuba_params(&d, 0.5, 0.3, 1_000_000, AlphaRangePreset::default(), LowerForm::LogC, 8).unwrap();
        assert!((k.delta - 0.0063025).abs() < 5e-8);
        assert_eq!(k.k, 25);
        assert_eq!(k.big_theta, 0.15);
        assert_eq!(k.theta0, 0.75);
    }

    #[test]
    fn single_bounds_small_case() {
        let (lo, up) = certify_single(p3(), 10_000, 5, 64).unwrap();
        assert!(up.passed, "{up:?}");
        assert!(lo.passed, "{lo:?}");
        assert!(lo.skipped > 0);
        let (_, up) = certify_single(p3(), 10, 1, 16).unwrap();
        assert!(up.passed);
    }

    #[test]
    fn large_alpha_gives_empty_set() {
        let c = comb(&[1], &[0]);
        let d = CombinationData::from_poly(&c, &change_of_basis(&c).unwrap());
        assert!(admissible_s_set(&d, 1_000_000, 50.0, 0.3, LowerForm::LogC).unwrap().empty);
    }

    #[test]
    fn identity_combination_matches_single() {
        let c = comb(&[1], &[0]);
        let poly = change_of_basis(&c).unwrap();
        let (lo, up) = certify_combination(&c, &poly, 100_000, 2, 32).unwrap();
        assert!(lo.passed && up.passed);
    }

    #[test]
    fn sandwich_holds_in_range() {
        let s = certify_sandwich(p3(), 100_000, 2, 2, 16).unwrap();
        assert!(s.passed, "{s:?}");
    }
}
