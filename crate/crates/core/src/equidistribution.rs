//! Equidistribution diagnostics: 1-D star discrepancy, residue histograms
//! of `floor G(n + h) mod q`, and Weyl batteries over frequency boxes.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expsum::{batch_sums, SequenceSpec};
use crate::growth::{eval_g_u64, Coefficient, GrowthParams, ShiftedCombination};
use crate::precision::{self, reduce_mod1, ExtReal, PrecisionChoice};

/// `D*_N = max_i max(i/N - x_(i), x_(i) - (i-1)/N)` over the sorted points.
pub fn star_discrepancy_1d(points: &[f64]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::Input("star discrepancy of an empty point set".into()));
    }
    if let Some(p) = points.iter().find(|p| !(**p >= 0.0 && **p < 1.0)) {
        return Err(Error::Domain(format!("point {p} outside [0,1)")));
    }
    let mut xs = points.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    Ok(xs
        .iter()
        .enumerate()
        .map(|(i, &x)| ((i + 1) as f64 / n - x).max(x - i as f64 / n))
        .fold(0.0, f64::max))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ResidueHistogram {
    pub q: u64,
    pub counts: Vec<u64>,
    pub n: u64,
}

impl ResidueHistogram {
    pub fn freqs(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64 / self.n as f64).collect()
    }

    /// `max_r |count_r / N - 1/q|`.
    pub fn max_deviation(&self) -> f64 {
        let u = 1.0 / self.q as f64;
        self.freqs().iter().map(|f| (f - u).abs()).fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("residue,count,freq\n");
        for (r, (&c, f)) in self.counts.iter().zip(self.freqs()).enumerate() {
            s.push_str(&format!("{r},{c},{f}\n"));
        }
        s
    }
}

/// Below this many terms histograms are counted one `floor_residue` at a
/// time; above it they are recovered from character sums.
pub const DIRECT_RESIDUE_LIMIT: u64 = 4096;

fn check_q(q: u64) -> Result<()> {
    if q < 2 {
        return Err(Error::Domain(format!("modulus must be at least 2, got {q}")));
    }
    Ok(())
}

/// Counts of `floor G(max(n + h, 1)) mod q` for `n <= N`.
pub fn residue_frequencies(
    params: GrowthParams,
    h: i64,
    q: u64,
    n: u64,
    prec: PrecisionChoice,
    threads: Option<usize>,
) -> Result<ResidueHistogram> {
    check_q(q)?;
    if n == 0 {
        return Err(Error::Domain("N must be at least 1".into()));
    }
    if n <= DIRECT_RESIDUE_LIMIT {
        residue_frequencies_direct(params, h, q, n, prec)
    } else {
        residue_frequencies_fourier(params, h, q, n, prec, threads)
    }
}

fn arg(n: u64, h: i64) -> u64 {
    (n as i64 + h).max(1) as u64
}

/// One certified floor per term.
pub fn residue_frequencies_direct(
    params: GrowthParams,
    h: i64,
    q: u64,
    n: u64,
    prec: PrecisionChoice,
) -> Result<ResidueHistogram> {
    check_q(q)?;
    let top = arg(n, h);
    let p = prec.resolve(precision::required_bits(top.max(2), params.c())?)?;
    let rs: Vec<Result<u64>> = (1..=n)
        .into_par_iter()
        .map(|m| {
            let g = eval_g_u64(arg(m, h), params.c(), p)?;
            Ok(precision::floor_residue(&g, q)?.1)
        })
        .collect();
    let mut counts = vec![0u64; q as usize];
    for r in rs {
        counts[r? as usize] += 1;
    }
    Ok(ResidueHistogram { q, counts, n })
}

/// `count_r = (1/q) sum_j e(-jr/q) S_j` with `S_j = sum_n e(j floor G / q)`.
/// The character sums use exact residue phases, so the inversion lands
/// within rounding of an integer; anything else is refused.
pub fn residue_frequencies_fourier(
    params: GrowthParams,
    h: i64,
    q: u64,
    n: u64,
    prec: PrecisionChoice,
    threads: Option<usize>,
) -> Result<ResidueHistogram> {
    check_q(q)?;
    let q_i = i64::try_from(q).map_err(|_| Error::Range(format!("modulus {q} too large")))?;
    let specs = (1..q_i)
        .map(|j| {
            let comb = ShiftedCombination::new(params, vec![Coefficient::ratio(j, q_i)], vec![h])?;
            Ok(SequenceSpec::floor(&comb))
        })
        .collect::<Result<Vec<_>>>()?;
    let b = batch_sums(&specs, n, prec, threads)?;
    let mut s = vec![Complex64::new(n as f64, 0.0)];
    s.extend(b.sums.iter().map(|v| v[0]));
    let mut counts = Vec::with_capacity(q as usize);
    for r in 0..q {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, sj) in s.iter().enumerate() {
            let t = ((j as u64 * r) % q) as f64 / q as f64;
            acc += sj * Complex64::from_polar(1.0, -TAU * t);
        }
        let v = acc.re / q as f64;
        let k = v.round();
        if (v - k).abs() > 0.01 || acc.im.abs() / q as f64 > 0.01 || k < 0.0 {
            return Err(Error::Precision(format!("residue {r} count {v} is not within rounding of an integer")));
        }
        counts.push(k as u64);
    }
    let total: u64 = counts.iter().sum();
    if total != n {
        return Err(Error::Precision(format!("recovered counts sum to {total}, not {n}")));
    }
    Ok(ResidueHistogram { q, counts, n })
}

/// Nonzero `k` with `|k|_inf <= kmax` in `r` coordinates, one of each pair
/// `{k, -k}` (the first nonzero entry positive).
pub fn frequency_box(r: usize, kmax: i64) -> Vec<Vec<i64>> {
    let side = (2 * kmax + 1) as usize;
    let total = side.pow(r as u32);
    let mut out = Vec::new();
    for idx in 0..total {
        let mut k = Vec::with_capacity(r);
        let mut t = idx;
        for _ in 0..r {
            k.push((t % side) as i64 - kmax);
            t /= side;
        }
        k.reverse();
        if let Some(&first) = k.iter().find(|&&v| v != 0) {
            if first > 0 {
                out.push(k);
            }
        }
    }
    out
}

/// The sequence an equidistribution report is about.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EquiSource {
    /// `(G(n + h_1), ..., G(n + h_r))`.
    Growth { c: f64, shifts: Vec<i64> },
    /// `n beta`.
    Rotation { beta: String },
    /// `theta == 0`.
    Zero,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EquiConfig {
    pub source: EquiSource,
    pub n: u64,
    #[serde(default = "default_kmax")]
    pub kmax: i64,
    /// Points materialized for the discrepancy series.
    #[serde(default = "default_disc_points")]
    pub discrepancy_points: u64,
    #[serde(default)]
    pub moduli: Vec<u64>,
    #[serde(default = "default_weyl_threshold")]
    pub weyl_threshold: f64,
    #[serde(default = "default_disc_threshold")]
    pub discrepancy_threshold: f64,
    #[serde(default = "default_residue_tolerance")]
    pub residue_tolerance: f64,
    #[serde(default)]
    pub precision: PrecisionChoice,
    #[serde(default)]
    pub threads: Option<usize>,
}

fn default_kmax() -> i64 {
    3
}
fn default_disc_points() -> u64 {
    4096
}
fn default_weyl_threshold() -> f64 {
    0.05
}
fn default_disc_threshold() -> f64 {
    0.05
}
fn default_residue_tolerance() -> f64 {
    0.01
}

impl EquiConfig {
    pub fn new(source: EquiSource, n: u64) -> EquiConfig {
        EquiConfig {
            source,
            n,
            kmax: default_kmax(),
            discrepancy_points: default_disc_points(),
            moduli: Vec::new(),
            weyl_threshold: default_weyl_threshold(),
            discrepancy_threshold: default_disc_threshold(),
            residue_tolerance: default_residue_tolerance(),
            precision: PrecisionChoice::Auto,
            threads: None,
        }
    }

    fn dims(&self) -> usize {
        match &self.source {
            EquiSource::Growth { shifts, .. } => shifts.len(),
            _ => 1,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct WeylEntry {
    pub k: Vec<i64>,
    pub re: f64,
    pub im: f64,
    pub normalized: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DiscrepancySeries {
    /// Coordinate of the projection.
    pub coordinate: usize,
    /// `(N, D*_N)` at powers of two and at the last point.
    pub points: Vec<(u64, f64)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EquiReport {
    pub config: EquiConfig,
    pub precision_bits: u32,
    pub weyl: Vec<WeylEntry>,
    pub max_weyl: f64,
    pub discrepancy: Vec<DiscrepancySeries>,
    pub max_final_discrepancy: f64,
    pub histograms: Vec<(i64, ResidueHistogram)>,
    pub max_residue_deviation: f64,
    pub weyl_pass: bool,
    pub discrepancy_pass: bool,
    pub residue_pass: bool,
    pub passed: bool,
}

fn spec_for(src: &EquiSource, k: &[i64]) -> Result<SequenceSpec> {
    match src {
        EquiSource::Growth { c, shifts } => crate::expsum::weyl_spec(GrowthParams::new(*c)?, shifts, k, None),
        EquiSource::Rotation { beta } => Ok(SequenceSpec::linear(Coefficient::parse(beta)?.scale(k[0]))),
        EquiSource::Zero => Ok(SequenceSpec::zero()),
    }
}

/// Fractional parts of coordinate `j` for `n = 1..=m`.
fn materialize(src: &EquiSource, j: usize, m: u64, prec: PrecisionChoice) -> Result<Vec<f64>> {
    match src {
        EquiSource::Zero => Ok(vec![0.0; m as usize]),
        EquiSource::Rotation { beta } => {
            let b = Coefficient::parse(beta)?;
            let p = prec.resolve(192)?;
            let bv = b.eval(p)?;
            (1..=m).map(|n| Ok(reduce_mod1(&bv.mul(&ExtReal::from_u64(n, p)))?.frac_f64())).collect()
        }
        EquiSource::Growth { c, shifts } => {
            let h = shifts[j];
            let p = prec.resolve(precision::required_bits(arg(m, h).max(2), *c)?)?;
            (1..=m)
                .into_par_iter()
                .map(|n| {
                    let v = reduce_mod1(&eval_g_u64(arg(n, h), *c, p)?)?;
                    if !v.trusted() {
                        return Err(Error::Precision(format!("fractional part at n={n} not trusted")));
                    }
                    Ok(v.frac_f64())
                })
                .collect()
        }
    }
}

fn discrepancy_series(xs: &[f64]) -> Result<Vec<(u64, f64)>> {
    let mut out = Vec::new();
    let mut m = 1usize;
    while m < xs.len() {
        out.push((m as u64, star_discrepancy_1d(&xs[..m])?));
        m *= 2;
    }
    out.push((xs.len() as u64, star_discrepancy_1d(xs)?));
    Ok(out)
}

/// Weyl battery over `|k|_inf <= kmax`, star discrepancy of each 1-D
/// projection, and residue histograms for each shift and modulus.
pub fn equi_report(config: &EquiConfig) -> Result<EquiReport> {
    if config.n == 0 {
        return Err(Error::Domain("N must be at least 1".into()));
    }
    if config.kmax < 1 {
        return Err(Error::Input("kmax must be at least 1".into()));
    }
    if let EquiSource::Growth { shifts, .. } = &config.source {
        if shifts.is_empty() {
            return Err(Error::Input("at least one shift is needed".into()));
        }
        let mut s = shifts.clone();
        s.sort_unstable();
        s.dedup();
        if s.len() != shifts.len() {
            return Err(Error::Input("shifts must be distinct".into()));
        }
    }
    let r = config.dims();
    let ks = frequency_box(r, config.kmax);
    let specs = ks.iter().map(|k| spec_for(&config.source, k)).collect::<Result<Vec<_>>>()?;
    let b = batch_sums(&specs, config.n, config.precision, config.threads)?;
    let weyl: Vec<WeylEntry> = ks
        .iter()
        .zip(&b.sums)
        .map(|(k, s)| WeylEntry { k: k.clone(), re: s[0].re, im: s[0].im, normalized: s[0].norm() / config.n as f64 })
        .collect();
    let max_weyl = weyl.iter().map(|w| w.normalized).fold(0.0, f64::max);

    let m = config.discrepancy_points.min(config.n).max(1);
    let mut discrepancy = Vec::new();
    for j in 0..r {
        let xs = materialize(&config.source, j, m, config.precision)?;
        discrepancy.push(DiscrepancySeries { coordinate: j, points: discrepancy_series(&xs)? });
    }
    let max_final_discrepancy = discrepancy.iter().map(|d| d.points.last().unwrap().1).fold(0.0, f64::max);

    let mut histograms = Vec::new();
    if let EquiSource::Growth { c, shifts } = &config.source {
        let params = GrowthParams::new(*c)?;
        for &h in shifts {
            for &q in &config.moduli {
                histograms.push((h, residue_frequencies(params, h, q, config.n, config.precision, config.threads)?));
            }
        }
    }
    let max_residue_deviation = histograms.iter().map(|(_, h)| h.max_deviation()).fold(0.0, f64::max);
    let weyl_pass = max_weyl < config.weyl_threshold;
    let discrepancy_pass = max_final_discrepancy < config.discrepancy_threshold;
    let residue_pass = max_residue_deviation <= config.residue_tolerance;
    Ok(EquiReport {
        config: config.clone(),
        precision_bits: b.precision_bits,
        weyl,
        max_weyl,
        discrepancy,
        max_final_discrepancy,
        histograms,
        max_residue_deviation,
        weyl_pass,
        discrepancy_pass,
        residue_pass,
        passed: weyl_pass && discrepancy_pass && residue_pass,
    })
}
