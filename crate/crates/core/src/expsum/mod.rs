//! Partial and dyadic exponential sums `sum_{n<=N} e(theta(n))`, Weyl and
//! goodness batteries.

mod compensated;
mod engine;

pub use compensated::CompSum;

use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::growth::{eval_g_u64, Coefficient, GrowthParams, RealExpr, ShiftedCombination};
use crate::precision::{self, f64_to_turn, ExtReal, PrecisionChoice};
use engine::Program;

pub(crate) use engine::dyadic_blocks;

/// One additive piece of a phase `theta(n)`.
#[derive(Clone, Debug)]
pub enum PhaseTerm {
    /// `alpha * G(max(n + shift, 1))`.
    Smooth { alpha: Coefficient, shift: i64 },
    /// `alpha * floor(G(max(n + shift, 1)))`.
    Floor { alpha: Coefficient, shift: i64 },
    /// `sum_k coeffs[k] n^k`.
    Poly { coeffs: Vec<Coefficient> },
    /// `mult * table[max(n + shift, 1) - 1]`, phases as 64-bit turns.
    Table { turns: Arc<[u64]>, shift: i64, mult: i64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpecKind {
    SmoothCombination,
    FloorCombination,
    Linear,
    Polynomial,
    Table,
    Mixed,
}

/// A phase sequence `theta(n)`, `n >= 1`. Arguments of `G` below 1 are
/// clamped to 1.
#[derive(Clone, Debug)]
pub struct SequenceSpec {
    kind: SpecKind,
    params: Option<GrowthParams>,
    terms: Vec<PhaseTerm>,
}

impl SequenceSpec {
    pub fn smooth(comb: &ShiftedCombination) -> SequenceSpec {
        SequenceSpec {
            kind: SpecKind::SmoothCombination,
            params: Some(comb.params),
            terms: comb
                .alphas
                .iter()
                .zip(&comb.shifts)
                .map(|(a, &h)| PhaseTerm::Smooth { alpha: a.clone(), shift: h })
                .collect(),
        }
    }

    pub fn floor(comb: &ShiftedCombination) -> SequenceSpec {
        SequenceSpec {
            kind: SpecKind::FloorCombination,
            params: Some(comb.params),
            terms: comb
                .alphas
                .iter()
                .zip(&comb.shifts)
                .map(|(a, &h)| PhaseTerm::Floor { alpha: a.clone(), shift: h })
                .collect(),
        }
    }

    /// `theta(n) = n beta`.
    pub fn linear(beta: Coefficient) -> SequenceSpec {
        SequenceSpec {
            kind: SpecKind::Linear,
            params: None,
            terms: vec![PhaseTerm::Poly { coeffs: vec![Coefficient::int(0), beta] }],
        }
    }

    pub fn polynomial(coeffs: Vec<Coefficient>) -> Result<SequenceSpec> {
        if coeffs.is_empty() {
            return Err(Error::Input("a polynomial needs at least one coefficient".into()));
        }
        Ok(SequenceSpec { kind: SpecKind::Polynomial, params: None, terms: vec![PhaseTerm::Poly { coeffs }] })
    }

    /// `theta == 0`.
    pub fn zero() -> SequenceSpec {
        SequenceSpec { kind: SpecKind::Polynomial, params: None, terms: vec![] }
    }

    /// Phases `table[n-1]` in turns; each is reduced mod 1 and rounded to
    /// 64 bits.
    pub fn table(phases: &[f64]) -> Result<SequenceSpec> {
        if phases.iter().any(|p| !p.is_finite()) {
            return Err(Error::Input("phase table has non-finite entries".into()));
        }
        let turns: Arc<[u64]> = phases.iter().map(|&p| f64_to_turn(p)).collect();
        Ok(SequenceSpec::from_turns(turns))
    }

    pub fn from_turns(turns: Arc<[u64]>) -> SequenceSpec {
        SequenceSpec { kind: SpecKind::Table, params: None, terms: vec![PhaseTerm::Table { turns, shift: 0, mult: 1 }] }
    }

    pub fn kind(&self) -> SpecKind {
        self.kind
    }

    pub fn params(&self) -> Option<GrowthParams> {
        self.params
    }

    pub fn terms(&self) -> &[PhaseTerm] {
        &self.terms
    }

    /// The same sequence evaluated at `n + h`.
    pub fn shifted(&self, h: i64) -> SequenceSpec {
        let terms = self
            .terms
            .iter()
            .map(|t| match t {
                PhaseTerm::Smooth { alpha, shift } => PhaseTerm::Smooth { alpha: alpha.clone(), shift: shift + h },
                PhaseTerm::Floor { alpha, shift } => PhaseTerm::Floor { alpha: alpha.clone(), shift: shift + h },
                PhaseTerm::Table { turns, shift, mult } => {
                    PhaseTerm::Table { turns: turns.clone(), shift: shift + h, mult: *mult }
                }
                PhaseTerm::Poly { coeffs } => PhaseTerm::Poly { coeffs: shift_poly(coeffs, h) },
            })
            .collect();
        SequenceSpec { kind: self.kind, params: self.params, terms }
    }

    /// `k * theta`. Table phases only admit integer multipliers.
    pub fn scaled(&self, k: &Coefficient) -> Result<SequenceSpec> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            terms.push(match t {
                PhaseTerm::Smooth { alpha, shift } => PhaseTerm::Smooth { alpha: alpha.mul(k), shift: *shift },
                PhaseTerm::Floor { alpha, shift } => PhaseTerm::Floor { alpha: alpha.mul(k), shift: *shift },
                PhaseTerm::Poly { coeffs } => PhaseTerm::Poly { coeffs: coeffs.iter().map(|c| c.mul(k)).collect() },
                PhaseTerm::Table { turns, shift, mult } => {
                    let m = k
                        .as_rational()
                        .filter(|r| r.is_integer())
                        .and_then(|r| num_traits::ToPrimitive::to_i64(r.numer()))
                        .ok_or_else(|| Error::Input("table phases only scale by integers".into()))?;
                    PhaseTerm::Table { turns: turns.clone(), shift: *shift, mult: mult * m }
                }
            });
        }
        Ok(SequenceSpec { kind: self.kind, params: self.params, terms })
    }

    pub fn negated(&self) -> SequenceSpec {
        self.scaled(&Coefficient::int(-1)).expect("integer multiplier")
    }

    /// `theta + other`.
    pub fn plus(&self, other: &SequenceSpec) -> Result<SequenceSpec> {
        let params = match (self.params, other.params) {
            (Some(a), Some(b)) if a.c() != b.c() => return Err(Error::Input("sequences use different c".into())),
            (a, b) => a.or(b),
        };
        let kind = if self.kind == other.kind { self.kind } else { SpecKind::Mixed };
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(SequenceSpec { kind, params, terms })
    }

    /// Largest `|h|` over growth and table terms.
    pub fn max_shift(&self) -> u64 {
        self.terms
            .iter()
            .map(|t| match t {
                PhaseTerm::Smooth { shift, .. } | PhaseTerm::Floor { shift, .. } | PhaseTerm::Table { shift, .. } => {
                    shift.unsigned_abs()
                }
                PhaseTerm::Poly { .. } => 0,
            })
            .max()
            .unwrap_or(0)
    }

    /// Number of `n <= N` at which some growth argument is clamped to 1.
    pub fn clamped_terms(&self, n: u64) -> u64 {
        self.terms
            .iter()
            .map(|t| match t {
                PhaseTerm::Smooth { shift, .. } | PhaseTerm::Floor { shift, .. } | PhaseTerm::Table { shift, .. } => {
                    if *shift < 0 {
                        (shift.unsigned_abs()).min(n)
                    } else {
                        0
                    }
                }
                PhaseTerm::Poly { .. } => 0,
            })
            .max()
            .unwrap_or(0)
    }
}

/// Coefficients of `p(n + h)` from those of `p(n)`.
fn shift_poly(coeffs: &[Coefficient], h: i64) -> Vec<Coefficient> {
    let d = coeffs.len();
    let mut out = vec![Coefficient::int(0); d];
    for (k, ck) in coeffs.iter().enumerate() {
        let mut binom = num_bigint::BigInt::from(1u32);
        let mut hp = num_bigint::BigInt::from(1u32);
        for j in (0..=k).rev() {
            // term C(k, j) h^(k-j) n^j
            let w = Coefficient::Rational(num_rational::BigRational::from_integer(&binom * &hp));
            out[j] = out[j].add(&ck.mul(&w));
            binom = binom * num_bigint::BigInt::from(j as u64) / num_bigint::BigInt::from((k - j + 1) as u64);
            hp *= num_bigint::BigInt::from(h);
        }
    }
    out
}

fn ser_complex<S: serde::Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeStruct;
    let mut st = s.serialize_struct("Complex", 2)?;
    st.serialize_field("re", &z.re)?;
    st.serialize_field("im", &z.im)?;
    st.end()
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpSumResult {
    pub n: u64,
    #[serde(serialize_with = "ser_complex")]
    pub sum: Complex64,
    /// `|sum| / N`.
    pub normalized: f64,
    pub precision_bits: u32,
    pub blocks: usize,
    pub units: u64,
    /// Largest certified phase error of any term.
    pub max_phase_err: f64,
    pub wall_ms: u64,
    /// Terms with a growth argument clamped to 1.
    pub clamped_terms: u64,
    /// Terms at dyadic block edges within `max |h|` of an endpoint, which
    /// shrinking each block to `[K + a, 2K - a]` would drop.
    pub boundary_terms: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DyadicBlock {
    pub k: u32,
    pub lo: u64,
    pub hi: u64,
    #[serde(serialize_with = "ser_complex")]
    pub sum: Complex64,
    /// `|sum| / (hi - lo + 1)`.
    pub normalized: f64,
    #[serde(skip)]
    state: CompSum,
}

#[derive(Clone, Debug, Serialize)]
pub struct DyadicSeries {
    pub n: u64,
    pub precision_bits: u32,
    /// Ordered by `k`, i.e. from the top block `(N/2, N]` down to `[1, 1]`.
    pub blocks: Vec<DyadicBlock>,
}

impl DyadicSeries {
    /// Recombines the blocks in the engine's order, reproducing
    /// `partial_sum(N)` bit for bit.
    pub fn total(&self) -> Complex64 {
        let mut acc = CompSum::default();
        for b in self.blocks.iter().rev() {
            acc.merge(&b.state);
        }
        acc.value()
    }
}

fn boundary_terms(n: u64, a: u64) -> u64 {
    if a == 0 {
        return 0;
    }
    dyadic_blocks(n).iter().map(|(_, lo, hi)| (2 * a).min(hi - lo + 1)).sum()
}

/// Sums for several sequences over the same range, sharing phase streams.
#[derive(Clone, Debug)]
pub struct Batch {
    pub precision_bits: u32,
    /// `floor(N / 2^j)` for `j = 0..=floor(log2 N)`.
    pub checkpoints: Vec<u64>,
    /// `sums[i][j]` for sequence `i` at checkpoint `j`.
    pub sums: Vec<Vec<Complex64>>,
    pub units: u64,
    pub max_phase_err: f64,
    pub wall_ms: u64,
}

/// `floor(N / 2^j)` for `j = 0..=floor(log2 N)`, the checkpoints of a
/// batch.
pub fn dyadic_checkpoints(n: u64) -> Vec<u64> {
    (0..=n.ilog2()).map(|j| n >> j).collect()
}

pub fn batch_sums(specs: &[SequenceSpec], n: u64, prec: PrecisionChoice, threads: Option<usize>) -> Result<Batch> {
    let t0 = Instant::now();
    let prog = Program::compile(specs, n, prec)?;
    let run = prog.run(threads)?;
    let cps = run.checkpoints(prog.outputs());
    let mut sums = vec![Vec::with_capacity(cps.len()); specs.len()];
    for (_, s) in &cps {
        for (i, v) in s.iter().enumerate() {
            sums[i].push(v.value());
        }
    }
    Ok(Batch {
        precision_bits: prog.precision_bits(),
        checkpoints: cps.iter().map(|c| c.0).collect(),
        sums,
        units: run.stats.units,
        max_phase_err: run.stats.max_phase_err,
        wall_ms: t0.elapsed().as_millis() as u64,
    })
}

fn result_at(spec: &SequenceSpec, n: u64, sum: Complex64, bits: u32, units: u64, err: f64, ms: u64) -> ExpSumResult {
    ExpSumResult {
        n,
        sum,
        normalized: sum.norm() / n as f64,
        precision_bits: bits,
        blocks: dyadic_blocks(n).len(),
        units,
        max_phase_err: err,
        wall_ms: ms,
        clamped_terms: spec.clamped_terms(n),
        boundary_terms: boundary_terms(n, spec.max_shift()),
    }
}

/// `sum_{n=1}^{N} e(theta(n))`.
pub fn partial_sum(spec: &SequenceSpec, n: u64, prec: PrecisionChoice, threads: Option<usize>) -> Result<ExpSumResult> {
    let b = batch_sums(std::slice::from_ref(spec), n, prec, threads)?;
    Ok(result_at(spec, n, b.sums[0][0], b.precision_bits, b.units, b.max_phase_err, b.wall_ms))
}

/// Results at `N, N/2, N/4, ..., 1` from one pass, each identical to a
/// separate `partial_sum` call at that `N`.
pub fn partial_sum_checkpoints(
    spec: &SequenceSpec,
    n: u64,
    prec: PrecisionChoice,
    threads: Option<usize>,
) -> Result<Vec<ExpSumResult>> {
    let b = batch_sums(std::slice::from_ref(spec), n, prec, threads)?;
    Ok(b.checkpoints
        .iter()
        .zip(&b.sums[0])
        .map(|(&m, &s)| result_at(spec, m, s, b.precision_bits, b.units, b.max_phase_err, b.wall_ms))
        .collect())
}

pub fn dyadic_series(spec: &SequenceSpec, n: u64, prec: PrecisionChoice, threads: Option<usize>) -> Result<DyadicSeries> {
    let prog = Program::compile(std::slice::from_ref(spec), n, prec)?;
    let run = prog.run(threads)?;
    let blocks = run
        .blocks
        .iter()
        .map(|b| {
            let s = b.sums[0].value();
            DyadicBlock { k: b.k, lo: b.lo, hi: b.hi, sum: s, normalized: s.norm() / (b.hi - b.lo + 1) as f64, state: b.sums[0] }
        })
        .collect();
    Ok(DyadicSeries { n, precision_bits: prog.precision_bits(), blocks })
}

/// Weyl sum for `(G(n + h_1), ..., G(n + h_r))` at frequency `k`, or in
/// floor mode for `(alpha floor G(n + h_j))_j`.
pub fn weyl_spec(params: GrowthParams, shifts: &[i64], kvec: &[i64], floor_alpha: Option<&Coefficient>) -> Result<SequenceSpec> {
    if shifts.len() != kvec.len() {
        return Err(Error::Input(format!("{} frequencies for {} shifts", kvec.len(), shifts.len())));
    }
    if kvec.iter().all(|&k| k == 0) {
        return Err(Error::Input("frequency vector must be nonzero".into()));
    }
    let (mut al, mut hs) = (Vec::new(), Vec::new());
    for (&k, &h) in kvec.iter().zip(shifts) {
        if k != 0 {
            let a = Coefficient::int(k);
            al.push(match floor_alpha {
                Some(alpha) => alpha.mul(&a),
                None => a,
            });
            hs.push(h);
        }
    }
    let comb = ShiftedCombination::new(params, al, hs)?;
    Ok(match floor_alpha {
        Some(_) => SequenceSpec::floor(&comb),
        None => SequenceSpec::smooth(&comb),
    })
}

pub fn weyl_vector_test(
    params: GrowthParams,
    shifts: &[i64],
    kvec: &[i64],
    n: u64,
    prec: PrecisionChoice,
    threads: Option<usize>,
    floor_alpha: Option<&Coefficient>,
) -> Result<ExpSumResult> {
    partial_sum(&weyl_spec(params, shifts, kvec, floor_alpha)?, n, prec, threads)
}

/// `G(2N)^(-gamma)` and `G(N)^C`, at `bits` of precision.
pub fn alpha_endpoints(params: GrowthParams, n: u64, gamma: f64, big_c: f64, bits: u32) -> Result<(ExtReal, ExtReal)> {
    let g2 = eval_g_u64(2 * n, params.c(), bits)?;
    let g1 = eval_g_u64(n, params.c(), bits)?;
    let lo = precision::pow(&g2, &ExtReal::from_f64(-gamma, bits)?)?;
    let hi = precision::pow(&g1, &ExtReal::from_f64(big_c, bits)?)?;
    Ok((lo, hi))
}

#[derive(Clone, Debug, Serialize)]
pub struct AlphaGrid {
    pub gamma: f64,
    pub big_c: f64,
    /// Log-spaced magnitudes between the endpoints, endpoints included;
    /// each is used with both signs.
    pub count: usize,
    pub threshold: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GoodnessEntry {
    pub alpha: f64,
    pub result: Option<ExpSumResult>,
    pub error: Option<String>,
    pub flagged: bool,
}

/// An exact-grid list of `alpha` values: log-spaced magnitudes, both signs.
pub fn alpha_values(params: GrowthParams, n: u64, grid: &AlphaGrid) -> Result<Vec<Coefficient>> {
    if grid.count < 2 {
        return Err(Error::Input("the alpha grid needs at least its two endpoints".into()));
    }
    let bits = 512;
    let (lo, hi) = alpha_endpoints(params, n, grid.gamma, grid.big_c, bits)?;
    if lo.is_zero() || hi.is_zero() {
        return Err(Error::Domain("alpha grid endpoint is zero".into()));
    }
    let llo = precision::ln(&lo)?;
    let lhi = precision::ln(&hi)?;
    let mut out = Vec::with_capacity(2 * grid.count);
    for i in 0..grid.count {
        let v = if i == 0 {
            lo.clone()
        } else if i + 1 == grid.count {
            hi.clone()
        } else {
            let t = ExtReal::from_u64(i as u64, bits).div(&ExtReal::from_u64((grid.count - 1) as u64, bits))?;
            precision::exp(&llo.add(&lhi.sub(&llo).mul(&t)))?
        };
        let a = Coefficient::real(RealExpr::Value(v));
        out.push(a.neg());
        out.push(a);
    }
    Ok(out)
}

/// `alpha F` for each grid `alpha`; failures become per-entry errors.
pub fn goodness_scan(
    comb: &ShiftedCombination,
    grid: &AlphaGrid,
    n: u64,
    prec: PrecisionChoice,
    threads: Option<usize>,
) -> Result<Vec<GoodnessEntry>> {
    let base = SequenceSpec::smooth(comb);
    let mut out = Vec::new();
    for a in alpha_values(comb.params, n, grid)? {
        let alpha = a.to_f64();
        let r = base.scaled(&a).and_then(|s| partial_sum(&s, n, prec, threads));
        out.push(match r {
            Ok(r) => GoodnessEntry { alpha, flagged: r.normalized > grid.threshold, result: Some(r), error: None },
            Err(e) => GoodnessEntry { alpha, result: None, error: Some(e.to_string()), flagged: true },
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> GrowthParams {
        GrowthParams::new(0.3).unwrap()
    }

    #[test]
    fn trivial_phase_sums_to_n() {
        let r = partial_sum(&SequenceSpec::zero(), 1000, PrecisionChoice::Auto, Some(1)).unwrap();
        assert_eq!(r.sum, Complex64::new(1000.0, 0.0));
    }

    #[test]
    fn quarter_turns_cancel() {
        let s = SequenceSpec::linear(Coefficient::ratio(1, 4));
        let r = partial_sum(&s, 4, PrecisionChoice::Auto, Some(1)).unwrap();
        assert_eq!(r.sum, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn dyadic_sizes_and_total() {
        let d = dyadic_series(&SequenceSpec::zero(), 8, PrecisionChoice::Auto, Some(1)).unwrap();
        let sizes: Vec<u64> = d.blocks.iter().map(|b| b.hi - b.lo + 1).collect();
        assert_eq!(sizes, vec![4, 2, 1, 1]);
        assert_eq!(d.total(), Complex64::new(8.0, 0.0));
    }

    #[test]
    fn shifted_polynomial() {
        let cs = vec![Coefficient::int(1), Coefficient::int(2), Coefficient::int(3)];
        let s = shift_poly(&cs, -2);
        // 3(n-2)^2 + 2(n-2) + 1 = 3n^2 - 10n + 9
        let v: Vec<f64> = s.iter().map(|c| c.to_f64()).collect();
        assert_eq!(v, vec![9.0, -10.0, 3.0]);
    }

    #[test]
    fn checkpoints_equal_separate_runs() {
        let comb = ShiftedCombination::new(params(), vec![Coefficient::int(1), Coefficient::int(-1)], vec![1, 0]).unwrap();
        let s = SequenceSpec::smooth(&comb);
        let p = PrecisionChoice::Bits(128);
        let cps = partial_sum_checkpoints(&s, 5000, p, Some(1)).unwrap();
        for r in cps.iter().step_by(3) {
            let one = partial_sum(&s, r.n, p, Some(1)).unwrap();
            assert_eq!(one.sum, r.sum, "N={}", r.n);
        }
    }

    #[test]
    fn zero_frequency_rejected() {
        assert!(weyl_spec(params(), &[0, 1], &[0, 0], None).is_err());
    }
}
