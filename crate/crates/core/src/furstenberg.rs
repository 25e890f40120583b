//! Correlation averages `E_n prod_j a^(eps_j)(n + h_j)` and the Bernoulli
//! fingerprint built from them.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expsum::{batch_sums, SequenceSpec};
use crate::growth::{Coefficient, GrowthParams, ShiftedCombination};
use crate::precision::PrecisionChoice;

/// Largest number of queries a fingerprint may request.
pub const DEFAULT_QUERY_CAP: usize = 10_000;

/// Unit-modulus sequences whose correlations can be queried.
#[derive(Clone, Debug)]
pub enum Sequence {
    /// `a(n) = e(G(n))`.
    A { params: GrowthParams },
    /// `b(n) = e(alpha floor G(n))`, `alpha` not an integer.
    B { params: GrowthParams, alpha: Coefficient },
    /// `a(n) == 1`.
    Constant,
    /// `e(n beta)`.
    Rotation { beta: Coefficient },
    /// Independent uniform phases from a seeded generator, tabulated for
    /// `n <= len`.
    Iid { seed: u64, turns: Arc<[u64]> },
}

impl Sequence {
    pub fn b(params: GrowthParams, alpha: Coefficient) -> Result<Sequence> {
        if alpha.as_rational().is_some_and(|r| r.is_integer()) {
            return Err(Error::Domain("alpha must not be an integer".into()));
        }
        Ok(Sequence::B { params, alpha })
    }

    /// Phases for `n = 1..=len` drawn from ChaCha8 seeded with `seed`.
    pub fn iid(seed: u64, len: usize) -> Sequence {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let turns: Arc<[u64]> = (0..len).map(|_| rng.gen::<u64>()).collect();
        Sequence::Iid { seed, turns }
    }

    pub fn label(&self) -> String {
        match self {
            Sequence::A { params } => format!("a(c={})", params.c()),
            Sequence::B { params, alpha } => format!("b(c={}, alpha={})", params.c(), alpha),
            Sequence::Constant => "constant".into(),
            Sequence::Rotation { beta } => format!("rotation(beta={beta})"),
            Sequence::Iid { seed, turns } => format!("iid(seed={seed}, len={})", turns.len()),
        }
    }

    fn base(&self) -> Result<SequenceSpec> {
        Ok(match self {
            Sequence::A { params } => {
                SequenceSpec::smooth(&ShiftedCombination::new(*params, vec![Coefficient::int(1)], vec![0])?)
            }
            Sequence::B { params, alpha } => {
                SequenceSpec::floor(&ShiftedCombination::new(*params, vec![alpha.clone()], vec![0])?)
            }
            Sequence::Constant => SequenceSpec::zero(),
            Sequence::Rotation { beta } => SequenceSpec::linear(beta.clone()),
            Sequence::Iid { turns, .. } => SequenceSpec::from_turns(turns.clone()),
        })
    }

    /// Exponent bound `q - 1` for rational `alpha = p/q`.
    fn exponent_cap(&self) -> Option<i64> {
        match self {
            Sequence::B { alpha, .. } => alpha
                .as_rational()
                .and_then(|r| num_traits::ToPrimitive::to_i64(r.denom()))
                .map(|q| q - 1),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CorrelationQuery {
    pub shifts: Vec<i64>,
    pub exponents: Vec<i64>,
}

impl CorrelationQuery {
    pub fn new(shifts: Vec<i64>, exponents: Vec<i64>) -> Result<CorrelationQuery> {
        if shifts.is_empty() || shifts.len() != exponents.len() {
            return Err(Error::Input(format!("{} shifts with {} exponents", shifts.len(), exponents.len())));
        }
        let mut s = shifts.clone();
        s.sort_unstable();
        s.dedup();
        if s.len() != shifts.len() {
            return Err(Error::Input("shifts must be distinct".into()));
        }
        if exponents.iter().all(|&e| e == 0) {
            return Err(Error::Input("exponent vector is zero; that average is 1".into()));
        }
        Ok(CorrelationQuery { shifts, exponents })
    }

    pub fn conjugate(&self) -> CorrelationQuery {
        CorrelationQuery { shifts: self.shifts.clone(), exponents: self.exponents.iter().map(|e| -e).collect() }
    }

    /// The phase `sum_j eps_j theta(n + h_j)`.
    fn spec(&self, base: &SequenceSpec) -> Result<SequenceSpec> {
        let mut acc: Option<SequenceSpec> = None;
        for (&h, &e) in self.shifts.iter().zip(&self.exponents) {
            if e == 0 {
                continue;
            }
            let t = base.shifted(h).scaled(&Coefficient::int(e))?;
            acc = Some(match acc {
                None => t,
                Some(a) => a.plus(&t)?,
            });
        }
        Ok(acc.expect("nonzero exponent"))
    }
}

fn check_table(seq: &Sequence, queries: &[CorrelationQuery], n: u64) -> Result<()> {
    if let Sequence::Iid { turns, .. } = seq {
        let top = queries.iter().flat_map(|q| q.shifts.iter()).copied().max().unwrap_or(0);
        if (n as i64 + top) as usize > turns.len() {
            return Err(Error::Domain(format!("phase table of length {} is shorter than N + {top}", turns.len())));
        }
    }
    Ok(())
}

/// Averages over `n <= N` for several queries from one engine pass; the
/// second vector holds the averages at `floor(N/2)`.
pub fn correlations(
    seq: &Sequence,
    queries: &[CorrelationQuery],
    n: u64,
    prec: PrecisionChoice,
    threads: Option<usize>,
) -> Result<(u32, Vec<Complex64>, Vec<Complex64>)> {
    if n == 0 {
        return Err(Error::Domain("N must be at least 1".into()));
    }
    check_table(seq, queries, n)?;
    let base = seq.base()?;
    let specs = queries.iter().map(|q| q.spec(&base)).collect::<Result<Vec<_>>>()?;
    let b = batch_sums(&specs, n, prec, threads)?;
    let half = b.checkpoints.get(1).copied();
    let full = b.sums.iter().map(|s| s[0] / n as f64).collect();
    let halves = b
        .sums
        .iter()
        .map(|s| match half {
            Some(m) => s[1] / m as f64,
            None => s[0] / n as f64,
        })
        .collect();
    Ok((b.precision_bits, full, halves))
}

/// `(1/N) sum_{n<=N} prod_j a^(eps_j)(n + h_j)`.
pub fn correlation(
    seq: &Sequence,
    query: &CorrelationQuery,
    n: u64,
    prec: PrecisionChoice,
    threads: Option<usize>,
) -> Result<Complex64> {
    Ok(correlations(seq, std::slice::from_ref(query), n, prec, threads)?.1[0])
}

/// All exponent assignments on the shifts `-H..=H`, one of each conjugate
/// pair (first nonzero exponent positive). Zero exponents drop the shift.
fn enumerate_queries(h: i64, exps: &[i64]) -> Vec<CorrelationQuery> {
    let slots: Vec<i64> = (-h..=h).collect();
    let mut choice: Vec<i64> = std::iter::once(0).chain(exps.iter().copied()).collect();
    choice.sort_unstable();
    let mut out = Vec::new();
    let mut idx = vec![0usize; slots.len()];
    loop {
        let eps: Vec<i64> = idx.iter().map(|&i| choice[i]).collect();
        if let Some(&first) = eps.iter().find(|&&e| e != 0) {
            if first > 0 {
                let (sh, ex): (Vec<i64>, Vec<i64>) =
                    slots.iter().zip(&eps).filter(|(_, &e)| e != 0).map(|(&s, &e)| (s, e)).unzip();
                out.push(CorrelationQuery { shifts: sh, exponents: ex });
            }
        }
        let mut j = 0;
        loop {
            if j == idx.len() {
                return out;
            }
            idx[j] += 1;
            if idx[j] < choice.len() {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TensorEntry {
    pub shifts: Vec<i64>,
    pub exponents: Vec<i64>,
    pub re: f64,
    pub im: f64,
    pub modulus: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CorrelationTensor {
    pub sequence: String,
    pub n: u64,
    pub h: i64,
    /// Allowed exponent magnitudes after clipping.
    pub exponents: Vec<i64>,
    pub precision_bits: u32,
    pub entries: Vec<TensorEntry>,
    pub max_modulus: f64,
    /// Query attaining `max_modulus`.
    pub argmax: Option<CorrelationQuery>,
    /// `max |avg_N - avg_(N/2)|` over all entries.
    pub half_n_deviation: f64,
    pub threshold: f64,
    pub consistent_with_bernoulli: bool,
}

impl CorrelationTensor {
    pub fn entry(&self, q: &CorrelationQuery) -> Option<&TensorEntry> {
        self.entries.iter().find(|e| e.shifts == q.shifts && e.exponents == q.exponents)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct FingerprintOptions {
    pub threshold: f64,
    pub cap: usize,
    pub prec: PrecisionChoice,
    pub threads: Option<usize>,
}

impl Default for FingerprintOptions {
    fn default() -> Self {
        FingerprintOptions { threshold: 0.05, cap: DEFAULT_QUERY_CAP, prec: PrecisionChoice::Auto, threads: None }
    }
}

/// Number of nonzero exponent vectors on `2H + 1` shifts with the given
/// exponent alphabet size (zero excluded).
pub fn query_count(h: i64, alphabet: usize) -> Option<usize> {
    (alphabet + 1).checked_pow((2 * h + 1) as u32).map(|v| v - 1)
}

/// Correlations for every query on shifts in `[-H, H]` with
/// `0 < |eps_j| <= E` (and `|eps_j| <= q - 1` for `b` with `alpha = p/q`).
/// Half the queries are computed; their conjugates are filled in exactly.
pub fn bernoulli_fingerprint(seq: &Sequence, h: i64, e: i64, n: u64, opts: FingerprintOptions) -> Result<CorrelationTensor> {
    if h < 1 || e < 1 {
        return Err(Error::Input(format!("H and E must be at least 1, got H={h}, E={e}")));
    }
    let emax = seq.exponent_cap().map_or(e, |q1| e.min(q1));
    let mags: Vec<i64> = (1..=emax).collect();
    let exps: Vec<i64> = mags.iter().flat_map(|&m| [m, -m]).collect();
    let count = query_count(h, exps.len()).unwrap_or(usize::MAX);
    if count > opts.cap {
        return Err(Error::Budget { count, cap: opts.cap });
    }
    let half = enumerate_queries(h, &exps);
    let (bits, full, halves) = correlations(seq, &half, n, opts.prec, opts.threads)?;
    let mut map: BTreeMap<CorrelationQuery, (Complex64, Complex64)> = BTreeMap::new();
    for (q, (z, w)) in half.iter().zip(full.iter().zip(&halves)) {
        map.insert(q.clone(), (*z, *w));
        map.insert(q.conjugate(), (z.conj(), w.conj()));
    }
    let mut max_modulus = 0.0f64;
    let mut argmax = None;
    let mut dev = 0.0f64;
    let entries = map
        .iter()
        .map(|(q, (z, w))| {
            let m = z.norm();
            if m > max_modulus {
                max_modulus = m;
                argmax = Some(q.clone());
            }
            dev = dev.max((z - w).norm());
            TensorEntry { shifts: q.shifts.clone(), exponents: q.exponents.clone(), re: z.re, im: z.im, modulus: m }
        })
        .collect();
    Ok(CorrelationTensor {
        sequence: seq.label(),
        n,
        h,
        exponents: mags,
        precision_bits: bits,
        entries,
        max_modulus,
        argmax,
        half_n_deviation: dev,
        threshold: opts.threshold,
        consistent_with_bernoulli: max_modulus < opts.threshold,
    })
}
