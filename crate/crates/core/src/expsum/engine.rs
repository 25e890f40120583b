//! Phase providers, Taylor blocks and the fixed reduction tree.
//!
//! Every output phase is an integer combination of provider phases. A
//! provider is one of: `base * G(n + h) mod 1`, the floor analogue, a
//! polynomial in `n`, or a lookup table. Providers are shared across
//! outputs, so a battery of related sums pays for each stream once.
//!
//! Index blocks are the dyadic ranges `(N/2^(k+1), N/2^k]`, cut into units
//! that depend only on the block endpoints. Inside a unit with large enough
//! arguments, `G(m0 + t)` is a Taylor polynomial in `t` whose truncation
//! tail is bounded by Cauchy's estimate on the disc `|z - m0| <= m0/2`;
//! the polynomial is then stepped exactly by forward differences in
//! 256-bit fixed point. Everything downstream of the jets is exact mod 1.

use std::collections::HashMap;
use std::f64::consts::{LN_2, PI};
use std::sync::Arc;

use num_complex::Complex64;
use num_traits::ToPrimitive;

use super::compensated::CompSum;
use super::{PhaseTerm, SequenceSpec};
use crate::error::{Error, Result};
use crate::growth::{eval_g_u64, jet_g, Base, GrowthParams, RealExpr};
use crate::precision::{
    self, floor_residue, reduce_mod1, turn, ExtReal, Fixed, PhaseValue, PrecisionChoice, PRECISION_OVERRIDE_ENV,
    TRUST_LIMIT,
};

const TAYLOR_MIN_ARG: u64 = 512;
const TAYLOR_MIN_LEN: usize = 16;
const DIRECT_LIMIT: u64 = 1024;
const DIRECT_UNIT: u64 = 256;
const MAX_UNIT: u64 = 4096;
const TAIL_LOG2: f64 = -72.0;
const MAX_ORDER: usize = 40;
const RESIDUE_TABLE_MAX: u64 = 1 << 12;

fn pow2_floor(x: u64) -> u64 {
    1u64 << (63 - x.leading_zeros())
}

/// `(k, lo, hi)` for `k = 0..=floor(log2 N)`.
pub(crate) fn dyadic_blocks(n: u64) -> Vec<(u32, u64, u64)> {
    let kmax = 63 - n.leading_zeros();
    (0..=kmax).map(|k| (k, (n >> (k + 1)) + 1, n >> k)).collect()
}

/// Units of a block; a function of `(lo, hi)` alone.
fn units_for(lo: u64, hi: u64) -> Vec<(u64, usize)> {
    let mut out = Vec::new();
    let mut n = lo;
    while n <= hi {
        let len = if n < DIRECT_LIMIT {
            (DIRECT_UNIT - (n - 1) % DIRECT_UNIT).min(hi - n + 1)
        } else {
            pow2_floor((n / 256).min(MAX_UNIT)).min(hi - n + 1)
        };
        out.push((n, len as usize));
        n += len;
    }
    out
}

#[derive(Clone, Debug)]
enum BaseVal {
    One,
    InvQ(u64),
    Real { expr: RealExpr, value: ExtReal, int: i64, frac: PhaseValue, abs: f64 },
}

impl BaseVal {
    fn new(b: &Base, prec: u32) -> Result<BaseVal> {
        Ok(match b {
            Base::One => BaseVal::One,
            Base::InvQ(q) => BaseVal::InvQ(*q),
            Base::Real(e) => {
                let value = e.eval(prec)?;
                let int = value
                    .floor_bigint()
                    .to_i64()
                    .ok_or_else(|| Error::Unsupported("coefficient integer part exceeds 2^63".into()))?;
                let frac = reduce_mod1(&value)?;
                BaseVal::Real { expr: e.clone(), abs: value.to_f64().abs(), value, int, frac }
            }
        })
    }

    fn log2_abs(&self) -> f64 {
        match self {
            BaseVal::One => 0.0,
            BaseVal::InvQ(q) => -(*q as f64).log2(),
            BaseVal::Real { abs, .. } => abs.log2(),
        }
    }

    fn scale(&self, v: &ExtReal) -> ExtReal {
        match self {
            BaseVal::One => v.clone(),
            BaseVal::InvQ(q) => v.div_u64(*q),
            BaseVal::Real { value, .. } => value.round_to(v.prec()).mul(v),
        }
    }
}

#[derive(Clone, Debug)]
enum Provider {
    Growth { shift: i64, base: BaseVal, floor: bool },
    Poly { coeffs: Vec<PhaseValue> },
    Table { turns: Arc<[u64]>, shift: i64 },
}

#[derive(Clone, Debug, Default)]
struct Output {
    terms: Vec<(usize, u64)>,
    /// Indices into `Program::columns`, one per term.
    cols: Vec<usize>,
}

#[derive(Clone, Debug)]
struct Block {
    k: u32,
    lo: u64,
    hi: u64,
    units: Vec<(u64, usize)>,
}

#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Stats {
    pub units: u64,
    pub taylor_streams: u64,
    pub direct_streams: u64,
    pub floor_fallbacks: u64,
    pub max_phase_err: f64,
}

impl Stats {
    fn merge(&mut self, o: &Stats) {
        self.units += o.units;
        self.taylor_streams += o.taylor_streams;
        self.direct_streams += o.direct_streams;
        self.floor_fallbacks += o.floor_fallbacks;
        self.max_phase_err = self.max_phase_err.max(o.max_phase_err);
    }
}

struct Acc {
    sums: Vec<CompSum>,
    stats: Stats,
}

impl Acc {
    fn merge(mut self, o: Acc) -> Acc {
        for (a, b) in self.sums.iter_mut().zip(&o.sums) {
            a.merge(b);
        }
        self.stats.merge(&o.stats);
        self
    }
}

pub(crate) struct BlockSums {
    pub k: u32,
    pub lo: u64,
    pub hi: u64,
    pub sums: Vec<CompSum>,
}

pub(crate) struct RunOutput {
    /// Ordered by `k` ascending, i.e. the top block first.
    pub blocks: Vec<BlockSums>,
    pub stats: Stats,
}

impl RunOutput {
    /// Running sums `S(floor(N/2^j))` for every output, folded from the
    /// smallest block up; `j` ascending.
    pub fn checkpoints(&self, outputs: usize) -> Vec<(u64, Vec<CompSum>)> {
        let mut acc = vec![CompSum::default(); outputs];
        let mut out = Vec::with_capacity(self.blocks.len());
        for b in self.blocks.iter().rev() {
            for (a, s) in acc.iter_mut().zip(&b.sums) {
                a.merge(s);
            }
            out.push((b.hi, acc.clone()));
        }
        out.reverse();
        out
    }
}

pub(crate) struct Program {
    c: f64,
    prec: u32,
    n: u64,
    providers: Vec<Provider>,
    outputs: Vec<Output>,
    /// Distinct `(provider, multiplier)` pairs; each becomes a column of
    /// unit vectors `e(m u_p(n))` per unit.
    columns: Vec<(usize, u64)>,
    residue_tables: HashMap<u64, Vec<u64>>,
}

fn base_key(b: &Base) -> String {
    b.key()
}

fn residue_turn(r: u64, q: u64) -> u64 {
    if r == 0 {
        0
    } else {
        Fixed::from_ratio(r, q).top()
    }
}

impl Program {
    pub fn compile(specs: &[SequenceSpec], n: u64, choice: PrecisionChoice) -> Result<Program> {
        if n < 1 {
            return Err(Error::Domain("N must be at least 1".into()));
        }
        let mut params: Option<GrowthParams> = None;
        for s in specs {
            if let Some(p) = s.params() {
                match params {
                    None => params = Some(p),
                    Some(q) if q.c() == p.c() => {}
                    Some(_) => return Err(Error::Input("all sequences of one run must share c".into())),
                }
            }
        }
        // Layout pass: provider keys and integer multipliers, no arithmetic.
        enum Slot {
            Growth(i64, Base, bool),
            Poly(Vec<crate::growth::Coefficient>),
            Table(Arc<[u64]>, i64),
        }
        let mut keys: HashMap<String, usize> = HashMap::new();
        let mut slots: Vec<Slot> = Vec::new();
        let mut raw: Vec<Vec<(usize, i128)>> = Vec::with_capacity(specs.len());
        for s in specs {
            let mut terms: Vec<(usize, i128)> = Vec::new();
            let mut push = |key: String, slot: Slot, mult: i128, terms: &mut Vec<(usize, i128)>| {
                let idx = *keys.entry(key).or_insert_with(|| {
                    slots.push(slot);
                    slots.len() - 1
                });
                match terms.iter_mut().find(|(i, _)| *i == idx) {
                    Some(t) => t.1 += mult,
                    None => terms.push((idx, mult)),
                }
            };
            for t in s.terms() {
                match t {
                    PhaseTerm::Smooth { alpha, shift } => {
                        let (m, b) = alpha.factor();
                        push(format!("s:{shift}:{}", base_key(&b)), Slot::Growth(*shift, b, false), m as i128, &mut terms);
                    }
                    PhaseTerm::Floor { alpha, shift } => {
                        let (m, b) = alpha.factor();
                        if matches!(b, Base::One) {
                            continue;
                        }
                        push(format!("f:{shift}:{}", base_key(&b)), Slot::Growth(*shift, b, true), m as i128, &mut terms);
                    }
                    PhaseTerm::Poly { coeffs } => {
                        let key = coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",");
                        push(format!("p:{key}"), Slot::Poly(coeffs.clone()), 1, &mut terms);
                    }
                    PhaseTerm::Table { turns, shift, mult } => {
                        if (n as i128 + *shift as i128) > turns.len() as i128 {
                            return Err(Error::Input(format!(
                                "phase table of length {} is too short for N={n} with shift {shift}",
                                turns.len()
                            )));
                        }
                        let key = format!("t:{:p}:{shift}", Arc::as_ptr(turns) as *const u64);
                        push(key, Slot::Table(turns.clone(), *shift), *mult as i128, &mut terms);
                    }
                }
            }
            terms.retain(|t| t.1 != 0);
            raw.push(terms);
        }

        // Precision: magnitude of the largest quantity reduced mod 1.
        let c = params.map(|p| p.c()).unwrap_or(0.3);
        let mut mags = vec![0.0f64; slots.len()];
        let mut growth = false;
        let base_log2 = |b: &Base| -> Result<f64> {
            Ok(match b {
                Base::One => 0.0,
                Base::InvQ(q) => -(*q as f64).log2(),
                Base::Real(e) => e.eval(128)?.log2_abs().max(0.0),
            })
        };
        for (i, s) in slots.iter().enumerate() {
            mags[i] = match s {
                Slot::Growth(h, b, floor) => {
                    growth = true;
                    let top = (n as i128 + *h as i128).max(1) as u64;
                    let lg = precision::log2_growth(top, c)?;
                    let lb = base_log2(b)?;
                    if *floor {
                        lg + lb.max(0.0)
                    } else {
                        lg + lb
                    }
                }
                Slot::Poly(cs) => {
                    let mut m: f64 = 0.0;
                    for (k, cf) in cs.iter().enumerate() {
                        if !cf.is_integer() {
                            m = m.max(k as f64 * (n as f64).log2() + cf.abs_f64().max(1.0).log2());
                        }
                    }
                    m
                }
                Slot::Table(..) => 0.0,
            };
        }
        let mut need = 0.0f64;
        for terms in &raw {
            let w: f64 = terms.iter().map(|t| (t.1 as f64).abs()).sum::<f64>().max(1.0);
            for t in terms {
                need = need.max(mags[t.0] + w.log2() + 1.0);
            }
        }
        let auto = precision::required_bits_for(need);
        let prec = choice.resolve(auto)?;
        if growth && std::env::var(PRECISION_OVERRIDE_ENV).is_err() {
            let floor_bits = precision::required_bits(n.max(2), c)?;
            if prec < floor_bits {
                return Err(Error::Precision(format!(
                    "{prec} bits is below the {floor_bits} bits required for N={n}, c={c}"
                )));
            }
        }

        let mut providers = Vec::with_capacity(slots.len());
        let mut residue_tables = HashMap::new();
        for s in slots {
            providers.push(match s {
                Slot::Growth(shift, b, floor) => {
                    let base = BaseVal::new(&b, prec)?;
                    if let (true, BaseVal::InvQ(q)) = (floor, &base) {
                        if *q <= RESIDUE_TABLE_MAX {
                            residue_tables.entry(*q).or_insert_with(|| (0..*q).map(|r| residue_turn(r, *q)).collect());
                        }
                    }
                    Provider::Growth { shift, base, floor }
                }
                Slot::Poly(cs) => {
                    let mut coeffs = Vec::with_capacity(cs.len());
                    for cf in &cs {
                        coeffs.push(reduce_mod1(&cf.eval(prec)?)?);
                    }
                    Provider::Poly { coeffs }
                }
                Slot::Table(turns, shift) => Provider::Table { turns, shift },
            });
        }
        let mut columns: Vec<(usize, u64)> = Vec::new();
        let mut col_index: HashMap<(usize, u64), usize> = HashMap::new();
        let outputs = raw
            .into_iter()
            .map(|terms| {
                let terms: Vec<(usize, u64)> = terms.into_iter().map(|(i, m)| (i, m as i64 as u64)).collect();
                let cols = terms
                    .iter()
                    .map(|t| {
                        *col_index.entry(*t).or_insert_with(|| {
                            columns.push(*t);
                            columns.len() - 1
                        })
                    })
                    .collect();
                Output { terms, cols }
            })
            .collect();
        Ok(Program { c, prec, n, providers, outputs, columns, residue_tables })
    }

    pub fn precision_bits(&self) -> u32 {
        self.prec
    }

    pub fn outputs(&self) -> usize {
        self.outputs.len()
    }

    fn blocks(&self) -> Vec<Block> {
        dyadic_blocks(self.n)
            .into_iter()
            .map(|(k, lo, hi)| Block { k, lo, hi, units: units_for(lo, hi) })
            .collect()
    }

    pub fn run(&self, threads: Option<usize>) -> Result<RunOutput> {
        let blocks = self.blocks();
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(t) = threads {
            b = b.num_threads(t.max(1));
        }
        let pool = b.build().map_err(|e| Error::Unsupported(format!("thread pool: {e}")))?;
        let results: Vec<Result<Acc>> = pool.install(|| {
            use rayon::prelude::*;
            blocks.par_iter().map(|b| self.reduce(&b.units)).collect()
        });
        let mut stats = Stats::default();
        let mut out = Vec::with_capacity(blocks.len());
        for (b, r) in blocks.iter().zip(results) {
            let acc = r?;
            stats.merge(&acc.stats);
            out.push(BlockSums { k: b.k, lo: b.lo, hi: b.hi, sums: acc.sums });
        }
        Ok(RunOutput { blocks: out, stats })
    }

    fn reduce(&self, units: &[(u64, usize)]) -> Result<Acc> {
        if units.len() == 1 {
            return self.eval_unit(units[0].0, units[0].1);
        }
        let mid = units.len() / 2;
        let (a, b) = rayon::join(|| self.reduce(&units[..mid]), || self.reduce(&units[mid..]));
        Ok(a?.merge(b?))
    }

    fn eval_unit(&self, start: u64, len: usize) -> Result<Acc> {
        let mut stats = Stats { units: 1, ..Stats::default() };
        let np = self.providers.len();
        let mut phases: Vec<Vec<u64>> = vec![Vec::new(); np];
        let mut errs = vec![0.0f64; np];

        // Decide Taylor versus direct per provider, from its own data only.
        // All Taylor streams of a unit expand around the unit start, so one
        // jet serves every shift; a stream takes the prefix it needs.
        let mut orders: Vec<Option<(usize, f64)>> = vec![None; np];
        let mut jet_order: Option<usize> = None;
        let mut direct_shifts: Vec<i64> = Vec::new();
        for (i, p) in self.providers.iter().enumerate() {
            if let Provider::Growth { shift, base, floor } = p {
                let plan = if start >= TAYLOR_MIN_ARG && len >= TAYLOR_MIN_LEN {
                    let w = if *floor { base.log2_abs().max(0.0) } else { base.log2_abs() };
                    taylor_order(start, stream_span(*shift, len), self.c, w)
                } else {
                    None
                };
                match plan {
                    Some((k, _)) => {
                        jet_order = Some(jet_order.unwrap_or(0).max(k));
                        stats.taylor_streams += 1;
                    }
                    None => {
                        if !direct_shifts.contains(shift) {
                            direct_shifts.push(*shift);
                        }
                        stats.direct_streams += 1;
                    }
                }
                orders[i] = plan;
            }
        }
        let jet = match jet_order {
            Some(k) => jet_g(&ExtReal::from_u64(start, self.prec), k, self.c)?.coeffs,
            None => Vec::new(),
        };
        let mut gvals: HashMap<i64, Vec<ExtReal>> = HashMap::new();
        for &h in &direct_shifts {
            let mut v = Vec::with_capacity(len);
            for t in 0..len {
                v.push(eval_g_u64(clamp_arg(start + t as u64, h), self.c, self.prec)?);
            }
            gvals.insert(h, v);
        }

        for (i, p) in self.providers.iter().enumerate() {
            let (ph, e) = match p {
                Provider::Growth { shift, base, floor } => match orders[i] {
                    Some((k, tail)) => {
                        self.taylor_stream(&jet[..=k], tail, base, *floor, start, *shift, len, &mut stats)?
                    }
                    None => self.direct_stream(&gvals[shift], base, *floor, start, *shift, &mut stats)?,
                },
                Provider::Poly { coeffs } => poly_stream(coeffs, start, len),
                Provider::Table { turns, shift } => {
                    let v = (0..len)
                        .map(|t| turns[(clamp_arg(start + t as u64, *shift) - 1) as usize])
                        .collect();
                    (v, 0.0)
                }
            };
            phases[i] = ph;
            errs[i] = e;
        }

        let mut sums = vec![CompSum::default(); self.outputs.len()];
        for o in &self.outputs {
            let err: f64 = o.terms.iter().map(|&(p, m)| (m as i64 as f64).abs() * (errs[p] + 2f64.powi(-64))).sum();
            if err >= TRUST_LIMIT {
                return Err(Error::Precision(format!(
                    "phase error bound {err:e} at n in [{start}, {}] is not below 2^-40 at {} bits",
                    start + len as u64 - 1,
                    self.prec
                )));
            }
            stats.max_phase_err = stats.max_phase_err.max(err);
        }
        let cols: Vec<(Vec<f64>, Vec<f64>)> = self
            .columns
            .iter()
            .map(|&(p, m)| phases[p][..len].iter().map(|&u| turn(m.wrapping_mul(u))).map(|z| (z.re, z.im)).unzip())
            .collect();
        accumulate(&self.outputs, &cols, len, &mut sums);
        Ok(Acc { sums, stats })
    }

    #[allow(clippy::too_many_arguments)]
    fn taylor_stream(
        &self,
        jet: &[ExtReal],
        tail: f64,
        base: &BaseVal,
        floor: bool,
        start: u64,
        shift: i64,
        len: usize,
        stats: &mut Stats,
    ) -> Result<(Vec<u64>, f64)> {
        let span = stream_span(shift, len) as f64;
        let series = |b: &BaseVal| -> Result<(Vec<Fixed>, f64)> {
            let mut fs = Vec::with_capacity(jet.len());
            let mut e = tail;
            for (k, ck) in jet.iter().enumerate() {
                let pv = reduce_mod1(&b.scale(ck))?;
                fs.push(pv.frac);
                e += pv.abs_err * span.powi(k as i32);
            }
            Ok((forward_values(&fs, shift, len), e))
        };
        if !floor {
            let (ys, e) = series(base)?;
            return Ok((ys.into_iter().map(Fixed::top).collect(), e));
        }
        match base {
            BaseVal::InvQ(q) => {
                let (ys, e) = series(base)?;
                let slack = *q as f64 * e + 2f64.powi(-200);
                let mut out = Vec::with_capacity(len);
                for (t, y) in ys.into_iter().enumerate() {
                    let (r, f) = y.mul_u64(*q);
                    if f.dist_to_integer() <= slack {
                        stats.floor_fallbacks += 1;
                        out.push(self.floor_fallback(start + t as u64, shift, base)?);
                    } else {
                        out.push(self.residue(r, *q));
                    }
                }
                Ok((out, 0.0))
            }
            BaseVal::Real { int, frac, abs, .. } => {
                let (phi, ephi) = series(&BaseVal::One)?;
                let (psi, epsi) = series(base)?;
                let mut out = Vec::with_capacity(len);
                for (t, (f, s)) in phi.into_iter().zip(psi).enumerate() {
                    if f.dist_to_integer() <= ephi + 2f64.powi(-200) {
                        stats.floor_fallbacks += 1;
                        out.push(self.floor_fallback(start + t as u64, shift, base)?);
                    } else {
                        let bphi = f.mul_i64(*int).wrapping_add(f.mul(frac.frac));
                        out.push(s.wrapping_sub(bphi).top());
                    }
                }
                Ok((out, epsi + abs * ephi + frac.abs_err + 2f64.powi(-254)))
            }
            BaseVal::One => unreachable!("integer floor phases are dropped at compile time"),
        }
    }

    fn direct_stream(
        &self,
        gs: &[ExtReal],
        base: &BaseVal,
        floor: bool,
        start: u64,
        shift: i64,
        stats: &mut Stats,
    ) -> Result<(Vec<u64>, f64)> {
        let mut out = Vec::with_capacity(gs.len());
        let mut err: f64 = 0.0;
        for (t, g) in gs.iter().enumerate() {
            if !floor {
                let pv = reduce_mod1(&base.scale(g))?;
                err = err.max(pv.abs_err);
                out.push(pv.frac.top());
                continue;
            }
            match floor_value(g, base, self.prec) {
                Ok(pv) => {
                    err = err.max(pv.abs_err);
                    out.push(pv.frac.top());
                }
                Err(Error::Precision(_)) => {
                    stats.floor_fallbacks += 1;
                    out.push(self.floor_fallback(start + t as u64, shift, base)?);
                }
                Err(e) => return Err(e),
            }
        }
        Ok((out, err))
    }

    fn residue(&self, r: u64, q: u64) -> u64 {
        match self.residue_tables.get(&q) {
            Some(t) => t[r as usize],
            None => residue_turn(r, q),
        }
    }

    /// Floor phase at doubled precision; the error budget of the fallback
    /// is tighter than the provider's, so it never raises the provider bound.
    fn floor_fallback(&self, n: u64, shift: i64, base: &BaseVal) -> Result<u64> {
        let p2 = (self.prec * 2).min(precision::MAX_PRECISION);
        let g = eval_g_u64(clamp_arg(n, shift), self.c, p2)?;
        let b2 = match base {
            BaseVal::Real { expr, .. } => BaseVal::new(&Base::Real(expr.clone()), p2)?,
            b => b.clone(),
        };
        let pv = floor_value(&g, &b2, p2).map_err(|e| match e {
            Error::Precision(m) => Error::Precision(format!("floor phase at n={n}: {m}")),
            e => e,
        })?;
        Ok(pv.frac.top())
    }
}

fn clamp_arg(n: u64, h: i64) -> u64 {
    (n as i128 + h as i128).max(1) as u64
}

/// `base * floor(g) mod 1`; a precision error if the floor is ambiguous.
fn floor_value(g: &ExtReal, base: &BaseVal, prec: u32) -> Result<PhaseValue> {
    match base {
        BaseVal::InvQ(q) => {
            let (_, r) = floor_residue(g, *q)?;
            Ok(PhaseValue::exact(if r == 0 { Fixed::ZERO } else { Fixed::from_ratio(r, *q) }))
        }
        BaseVal::Real { value, .. } => {
            floor_residue(g, 1)?;
            let fl = g.floor_bigint();
            let v = value.mul(&ExtReal::from_bigint(&fl, prec));
            reduce_mod1(&v)
        }
        BaseVal::One => Ok(PhaseValue::exact(Fixed::ZERO)),
    }
}

/// Largest `|t|` for a stream `t = h, ..., h + len - 1` around the unit start.
fn stream_span(h: i64, len: usize) -> u64 {
    h.unsigned_abs().max((h + len as i64 - 1).unsigned_abs())
}

/// Taylor order at `x0` for `|t| <= span` weighted by `2^log2_w`, with the
/// Cauchy tail bound it achieves.
fn taylor_order(x0: u64, span: u64, c: f64, log2_w: f64) -> Option<(usize, f64)> {
    let mf = x0 as f64;
    let q = 2.0 * span as f64 / mf;
    if q > 1.0 / 64.0 {
        return None;
    }
    // |Log z| <= sqrt(ln^2(1.5 x0) + (pi/6)^2) on the disc; one spare bit.
    let lm = (1.5 * mf).ln();
    let log2m = (lm * lm + (PI / 6.0).powi(2)).powf((c + 1.0) / 2.0) / LN_2 + log2_w + 1.0;
    let lq = q.log2();
    let den = -(1.0 - q).log2();
    (0..=MAX_ORDER).find_map(|k| {
        let t = log2m + (k + 1) as f64 * lq + den;
        (t <= TAIL_LOG2).then(|| (k, t.exp2()))
    })
}

fn horner(fs: &[Fixed], t: i64) -> Fixed {
    let mut acc = *fs.last().unwrap();
    for f in fs.iter().rev().skip(1) {
        acc = acc.mul_i64(t).wrapping_add(*f);
    }
    acc
}

/// `sum_k f_k t^k mod 1` for `t = t0..t0+len`, by exact forward differences.
fn forward_values(fs: &[Fixed], t0: i64, len: usize) -> Vec<Fixed> {
    let k = fs.len() - 1;
    let mut d: Vec<Fixed> = (0..=k as i64).map(|t| horner(fs, t0 + t)).collect();
    for level in 1..=k {
        for i in (level..=k).rev() {
            d[i] = d[i].wrapping_sub(d[i - 1]);
        }
    }
    let mut out = Vec::with_capacity(len);
    out.push(d[0]);
    for _ in 1..len {
        for j in 0..k {
            d[j] = d[j].wrapping_add(d[j + 1]);
        }
        out.push(d[0]);
    }
    out
}

fn horner_u(fs: &[Fixed], n: u64) -> Fixed {
    let mut acc = *fs.last().unwrap();
    for f in fs.iter().rev().skip(1) {
        acc = acc.mul_u64(n).1.wrapping_add(*f);
    }
    acc
}

fn poly_stream(coeffs: &[PhaseValue], start: u64, len: usize) -> (Vec<u64>, f64) {
    let fs: Vec<Fixed> = coeffs.iter().map(|c| c.frac).collect();
    let mut out = Vec::with_capacity(len);
    for t in 0..len as u64 {
        out.push(horner_u(&fs, start + t).top());
    }
    let last = (start + len as u64 - 1) as f64;
    let err = coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| (c.abs_err + 2f64.powi(-255)) * last.powi(k as i32))
        .sum();
    (out, err)
}

const CHUNK: usize = 256;

/// Each output's terms are products of its columns, added in index order,
/// so the chunking does not change any sum.
fn accumulate(outputs: &[Output], cols: &[(Vec<f64>, Vec<f64>)], len: usize, sums: &mut [CompSum]) {
    let mut pr = [0f64; CHUNK];
    let mut pi = [0f64; CHUNK];
    for c0 in (0..len).step_by(CHUNK) {
        let w = CHUNK.min(len - c0);
        for (o, acc) in outputs.iter().zip(sums.iter_mut()) {
            let Some((&first, rest)) = o.cols.split_first() else {
                for _ in 0..w {
                    acc.add(Complex64::new(1.0, 0.0));
                }
                continue;
            };
            pr[..w].copy_from_slice(&cols[first].0[c0..c0 + w]);
            pi[..w].copy_from_slice(&cols[first].1[c0..c0 + w]);
            for &b in rest {
                let (yr, yi) = (&cols[b].0[c0..c0 + w], &cols[b].1[c0..c0 + w]);
                for i in 0..w {
                    let (xr, xi) = (pr[i], pi[i]);
                    pr[i] = xr * yr[i] - xi * yi[i];
                    pi[i] = xr * yi[i] + xi * yr[i];
                }
            }
            for i in 0..w {
                acc.add(Complex64::new(pr[i], pi[i]));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blocks_tile_the_range() {
        let b = dyadic_blocks(8);
        let sizes: Vec<u64> = b.iter().map(|(_, lo, hi)| hi - lo + 1).collect();
        assert_eq!(sizes, vec![4, 2, 1, 1]);
        for n in [1u64, 2, 3, 7, 1000, 123_457] {
            let b = dyadic_blocks(n);
            assert_eq!(b.last().unwrap().1, 1);
            assert_eq!(b[0].2, n);
            for w in b.windows(2) {
                assert_eq!(w[1].2 + 1, w[0].1);
            }
        }
    }

    #[test]
    fn units_tile_blocks() {
        for (lo, hi) in [(1u64, 1u64), (513, 1024), (1025, 2048), (500_001, 1_000_000)] {
            let u = units_for(lo, hi);
            assert_eq!(u[0].0, lo);
            let end = u.last().unwrap();
            assert_eq!(end.0 + end.1 as u64 - 1, hi);
            for w in u.windows(2) {
                assert_eq!(w[0].0 + w[0].1 as u64, w[1].0);
            }
        }
    }

    #[test]
    fn forward_differences_match_horner() {
        let fs = vec![Fixed::from_ratio(1, 3), Fixed::from_ratio(2, 7), Fixed::from_ratio(5, 11), Fixed([7, 1, 2, 3])];
        for t0 in [0i64, -7, 5] {
            let v = forward_values(&fs, t0, 300);
            for (t, y) in v.iter().enumerate() {
                assert_eq!(*y, horner(&fs, t0 + t as i64));
            }
        }
    }

    #[test]
    fn taylor_order_reasonable() {
        let (k, tail) = taylor_order(1 << 20, 4095, 0.3, 0.0).unwrap();
        assert!((10..=20).contains(&k), "k={k}");
        assert!(tail <= 2f64.powi(-72));
        assert!(taylor_order(600, 4095, 0.3, 0.0).is_none());
        assert_eq!(stream_span(-3, 10), 6);
        assert_eq!(stream_span(-30, 10), 30);
    }
}
