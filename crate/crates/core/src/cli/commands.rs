use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use super::{Command, ExperimentConfig, Outcome};
use crate::certificates::{self, AlphaRangePreset, CombinationData, LowerForm};
use crate::difference::{change_of_basis, verify_identity};
use crate::dynamics::{self, ModelSystem, ObservableSpec, Weight};
use crate::equidistribution::{equi_report, EquiConfig, EquiSource};
use crate::error::{Error, Result};
use crate::expsum::{self, batch_sums, AlphaGrid, SequenceSpec};
use crate::furstenberg::{self, FingerprintOptions, Sequence};
use crate::growth::{Coefficient, GrowthParams, ShiftedCombination};
use crate::precision::{ExtReal, PrecisionChoice};
use crate::report::{fit_decay, read_series, Csv};

pub(super) fn dispatch(cmd: &Command, cfg: &ExperimentConfig) -> Result<Outcome> {
    match cmd {
        Command::Expsum(_) => expsum_cmd(cfg),
        Command::Weyl(_) => weyl_cmd(cfg),
        Command::Goodness(_) => goodness_cmd(cfg),
        Command::Equi(_) => equi_cmd(cfg),
        Command::Decompose(_) => decompose_cmd(cfg),
        Command::Certify(_) => certify_cmd(cfg),
        Command::Fingerprint(_) => fingerprint_cmd(cfg),
        Command::Vn(_) => vn_cmd(cfg),
        Command::Zeroentropy(_) => zeroentropy_cmd(cfg),
        Command::Skewdemo(_) => skewdemo_cmd(cfg),
        Command::Fitdecay(_) => fitdecay_cmd(cfg),
    }
}

fn req<T: Clone>(v: &Option<T>, flag: &str) -> Result<T> {
    v.clone().ok_or_else(|| Error::Input(format!("missing --{flag}")))
}

fn params(cfg: &ExperimentConfig) -> Result<GrowthParams> {
    GrowthParams::new(req(&cfg.c, "c")?)
}

fn prec(cfg: &ExperimentConfig) -> Result<PrecisionChoice> {
    match &cfg.precision {
        None => Ok(PrecisionChoice::Auto),
        Some(s) => PrecisionChoice::from_str(s),
    }
}

fn coeffs(list: &[String]) -> Result<Vec<Coefficient>> {
    list.iter().map(|s| Coefficient::parse(s)).collect()
}

fn comb(cfg: &ExperimentConfig) -> Result<ShiftedCombination> {
    let shifts = req(&cfg.shifts, "shifts")?;
    let alphas = coeffs(&req(&cfg.alphas, "alphas")?)?;
    ShiftedCombination::new(params(cfg)?, alphas, shifts)
}

fn format(cfg: &ExperimentConfig, default: &str) -> Result<String> {
    let f = cfg.format.clone().unwrap_or_else(|| default.to_string());
    match f.as_str() {
        "csv" | "json" => Ok(f),
        _ => Err(Error::Input(format!("unknown format {f:?}; use csv or json"))),
    }
}

fn ms(cfg: &ExperimentConfig, v: u64) -> u64 {
    if cfg.no_timing == Some(true) {
        0
    } else {
        v
    }
}

/// `(N for the run, N values to report)`.
fn n_plan(cfg: &ExperimentConfig) -> Result<(u64, Vec<u64>)> {
    if let Some(d) = &cfg.dyadic {
        let (a, b) = d.split_once("..").ok_or_else(|| Error::Input(format!("--dyadic expects k1..k2, got {d:?}")))?;
        let k1: u32 = a.trim().parse().map_err(|_| Error::Input(format!("bad --dyadic {d:?}")))?;
        let k2: u32 = b.trim().parse().map_err(|_| Error::Input(format!("bad --dyadic {d:?}")))?;
        if k1 > k2 || k2 > 62 {
            return Err(Error::Input(format!("bad --dyadic range {d:?}")));
        }
        return Ok((1u64 << k2, (k1..=k2).map(|k| 1u64 << k).collect()));
    }
    let n = req(&cfg.n, "N")?;
    if n == 0 {
        return Err(Error::Domain("N must be at least 1".into()));
    }
    Ok((n, vec![n]))
}

#[derive(Serialize)]
struct Row {
    #[serde(rename = "N")]
    n: u64,
    re: f64,
    im: f64,
    #[serde(rename = "modulus_over_N")]
    modulus_over_n: f64,
    precision_bits: u32,
    wall_ms: u64,
}

/// Rows at the requested checkpoints of one batch run of a single spec.
fn sum_rows(cfg: &ExperimentConfig, spec: &SequenceSpec) -> Result<Vec<Row>> {
    let (n, wanted) = n_plan(cfg)?;
    let b = batch_sums(std::slice::from_ref(spec), n, prec(cfg)?, cfg.threads)?;
    let mut rows = Vec::new();
    for m in wanted {
        let j = b
            .checkpoints
            .iter()
            .position(|&x| x == m)
            .ok_or_else(|| Error::Input(format!("N={m} is not a checkpoint of the run")))?;
        let s = b.sums[0][j];
        rows.push(Row {
            n: m,
            re: s.re,
            im: s.im,
            modulus_over_n: s.norm() / m as f64,
            precision_bits: b.precision_bits,
            wall_ms: ms(cfg, b.wall_ms),
        });
    }
    Ok(rows)
}

fn rows_outcome(cfg: &ExperimentConfig, rows: Vec<Row>) -> Result<Outcome> {
    let last = rows.last().map(|r| r.modulus_over_n).unwrap_or(0.0);
    let passed = cfg.threshold.is_none_or(|t| last < t);
    let body = if format(cfg, "csv")? == "csv" {
        let mut c = Csv::new(&["N", "re", "im", "modulus_over_N", "precision_bits", "wall_ms"]);
        for r in &rows {
            c.row(&[
                r.n.to_string(),
                r.re.to_string(),
                r.im.to_string(),
                r.modulus_over_n.to_string(),
                r.precision_bits.to_string(),
                r.wall_ms.to_string(),
            ]);
        }
        c.finish()
    } else {
        json_doc(cfg, &rows)?
    };
    let n = rows.last().map(|r| r.n).unwrap_or(0);
    Ok(Outcome { body, extra: vec![], summary: format!("N={n} |S|/N={last:.6e}"), passed })
}

fn json_doc<T: Serialize>(cfg: &ExperimentConfig, result: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&json!({ "config": cfg, "result": result }))?;
    s.push('\n');
    Ok(s)
}

fn expsum_cmd(cfg: &ExperimentConfig) -> Result<Outcome> {
    let c = comb(cfg)?;
    let spec = if cfg.floor == Some(true) { SequenceSpec::floor(&c) } else { SequenceSpec::smooth(&c) };
    rows_outcome(cfg, sum_rows(cfg, &spec)?)
}

fn weyl_cmd(cfg: &ExperimentConfig) -> Result<Outcome> {
    let shifts = req(&cfg.shifts, "shifts")?;
    let k = req(&cfg.k, "k")?;
    let fa = cfg.floor_alpha.as_deref().map(Coefficient::parse).transpose()?;
    let spec = expsum::weyl_spec(params(cfg)?, &shifts, &k, fa.as_ref())?;
    rows_outcome(cfg, sum_rows(cfg, &spec)?)
}

fn goodness_cmd(cfg: &ExperimentConfig) -> Result<Outcome> {
    let c = comb(cfg)?;
    let n = req(&cfg.n, "N")?;
    let grid = AlphaGrid {
        gamma: cfg.gamma.unwrap_or(0.5),
        big_c: cfg.big_c.unwrap_or(0.999 * c.params.c()),
        count: cfg.count.unwrap_or(8),
        threshold: cfg.threshold.unwrap_or(0.05),
    };
    let entries = expsum::goodness_scan(&c, &grid, n, prec(cfg)?, cfg.threads)?;
    let flagged = entries.iter().filter(|e| e.flagged).count();
    let body = if format(cfg, "csv")? == "csv" {
        let mut t = Csv::new(&["alpha", "N", "re", "im", "modulus_over_N", "precision_bits", "wall_ms", "flagged", "error"]);
        for e in &entries {
            let (re, im, m, b, w) = match &e.result {
                Some(r) => (r.sum.re.to_string(), r.sum.im.to_string(), r.normalized.to_string(), r.precision_bits.to_string(), ms(cfg, r.wall_ms).to_string()),
                None => Default::default(),
            };
            let err = e.error.clone().unwrap_or_default().replace(',', ";");
            t.row(&[e.alpha.to_string(), n.to_string(), re, im, m, b, w, e.flagged.to_string(), err]);
        }
        t.finish()
    } else {
        json_doc(cfg, &entries)?
    };
    Ok(Outcome {
        body,
        extra: vec![],
        summary: format!("{} alphas, {flagged} flagged", entries.len()),
        passed: flagged == 0,
    })
}

fn equi_cmd(cfg: &ExperimentConfig) -> Result<Outcome> {
    let source = match cfg.source.as_deref().unwrap_or("growth") {
        "growth" => EquiSource::Growth { c: req(&cfg.c, "c")?, shifts: req(&cfg.shifts, "shifts")? },
        "rotation" => EquiSource::Rotation { beta: req(&cfg.beta, "beta")? },
        "zero" => EquiSource::Zero,
        s => return Err(Error::Input(format!("unknown --source {s:?}"))),
    };
    let mut ec = EquiConfig::new(source, req(&cfg.n, "N")?);
    if let Some(k) = cfg.kmax {
        ec.kmax = k;
    }
    if let Some(p) = cfg.points {
        ec.discrepancy_points = p;
    }
    if let Some(m) = &cfg.moduli {
        ec.moduli = m.clone();
    }
    if let Some(t) = cfg.threshold {
        ec.weyl_threshold = t;
    }
    if let Some(t) = cfg.dstar_threshold {
        ec.discrepancy_threshold = t;
    }
    if let Some(t) = cfg.tolerance {
        ec.residue_tolerance = t;
    }
    ec.precision = prec(cfg)?;
    ec.threads = cfg.threads;
    let r = equi_report(&ec)?;
    let summary = format!(
        "max Weyl {:.3e}, D* {:.3e}, residue deviation {:.3e}",
        r.max_weyl, r.max_final_discrepancy, r.max_residue_deviation
    );
    let (body, extra) = if format(cfg, "json")? == "json" {
        (json_doc(cfg, &r)?, vec![])
    } else {
        let mut d = Csv::new(&["N", "Dstar"]);
        for &(n, v) in &r.discrepancy[0].points {
            d.row(&[n.to_string(), v.to_string()]);
        }
        let extra = r.histograms.iter().map(|(h, hist)| (format!(".residues_q{}_h{h}.csv", hist.q), hist.to_csv())).collect();
        (d.finish(), extra)
    };
    Ok(Outcome { body, extra, summary, passed: r.passed })
}

fn decompose_cmd(cfg: &ExperimentConfig) -> Result<Outcome> {
    let c = comb(cfg)?;
    let poly = change_of_basis(&c)?;
    let x = cfg.n.unwrap_or(1000);
    let p = match prec(cfg)? {
        PrecisionChoice::Bits(b) => b,
        PrecisionChoice::Auto => 192,
    };
    let xe = ExtReal::from_u64(x, p);
    let residuals = (0..=cfg.s_max.unwrap_or(2) as usize)
        .map(|s| Ok((s, verify_identity(&c, &poly, &xe, s)?)))
        .collect::<Result<Vec<_>>>()?;
    let worst = residuals.iter().map(|r| r.1).fold(0.0, f64::max);
    let doc = json!({
        "coefficients": poly.coeffs.iter().map(|d| d.to_string()).collect::<Vec<_>>(),
        "tau": poly.tau,
        "d_tau": poly.d_tau().to_string(),
        "min_shift": poly.min_shift,
        "coeff_sum": poly.coeff_sum.to_string(),
        "sign_flip": poly.sign_flip,
        "tolerance_zero": poly.tolerance_zero,
        "identity_x": x,
        "identity_residuals": residuals,
    });
    let passed = cfg.threshold.is_none_or(|t| worst < t);
    Ok(Outcome { body: json_doc(cfg, &doc)?, extra: vec![], summary: format!("tau={} d_tau={}", poly.tau, poly.d_tau()), passed })
}

fn certify_cmd(cfg: &ExperimentConfig) -> Result<Outcome> {
    let c = comb(cfg)?;
    let poly = change_of_basis(&c)?;
    let n = req(&cfg.n, "N")?;
    let s_max = cfg.s_max.unwrap_or_else(|| certificates::s_max_for(c.params, n));
    let density = cfg.density.unwrap_or(256);
    let single = certificates::certify_single(c.params, n, s_max, density)?;
    let combination = certificates::certify_combination(&c, &poly, n, s_max, density)?;
    let sandwich = certificates::certify_sandwich(c.params, n, s_max, 2, density.min(64))?;
    let data = CombinationData::from_poly(&c, &poly);
    let theta = cfg.theta.unwrap_or(0.3);
    let gamma = cfg.gamma.unwrap_or(0.5);
    let form = if cfg.gamma_variant == Some(true) { LowerForm::LogGammaMinusOne { gamma } } else { LowerForm::LogC };
    let preset = match cfg.preset.as_deref().unwrap_or("proof") {
        "proof" => AlphaRangePreset::Proof(cfg.big_c),
        "statement" => AlphaRangePreset::Statement(cfg.big_c),
        s => return Err(Error::Input(format!("unknown --preset {s:?}"))),
    };
    let kar = certificates::karacuba_params(&data, gamma, theta, n, preset, form, 64)?;
    let admissible = certificates::admissible_s_set(&data, n, cfg.a.unwrap_or(0.0), theta, form)?;
    let certs = [&single.0, &single.1, &combination.0, &combination.1, &sandwich];
    let failed: Vec<String> = certs.iter().filter(|c| !c.passed).map(|c| format!("{:?}", c.lemma)).collect();
    let doc = json!({
        "certificates": certs,
        "karacuba": kar,
        "admissible": admissible,
    });
    Ok(Outcome {
        body: json_doc(cfg, &doc)?,
        extra: vec![],
        summary: if failed.is_empty() { "all certificates hold".into() } else { format!("failed: {}", failed.join(", ")) },
        passed: failed.is_empty(),
    })
}

fn sequence(cfg: &ExperimentConfig, n: u64, h: i64) -> Result<Sequence> {
    Ok(match cfg.seq.as_deref().unwrap_or("a") {
        "a" => Sequence::A { params: params(cfg)? },
        "b" => Sequence::b(params(cfg)?, Coefficient::parse(&req(&cfg.alpha, "alpha")?)?)?,
        "rotation" => Sequence::Rotation { beta: Coefficient::parse(&req(&cfg.beta, "beta")?)? },
        "constant" => Sequence::Constant,
        "iid" => Sequence::iid(cfg.seed.unwrap_or(0), (n as i64 + h) as usize),
        s => return Err(Error::Input(format!("unknown --seq {s:?}"))),
    })
}

fn fingerprint_cmd(cfg: &ExperimentConfig) -> Result<Outcome> {
    let n = req(&cfg.n, "N")?;
    let h = cfg.h.unwrap_or(2);
    let e = cfg.e.unwrap_or(2);
    let seq = sequence(cfg, n, h)?;
    let opts = FingerprintOptions {
        threshold: cfg.threshold.unwrap_or(0.05),
        cap: cfg.cap.unwrap_or(furstenberg::DEFAULT_QUERY_CAP),
        prec: prec(cfg)?,
        threads: cfg.threads,
    };
    let t = furstenberg::bernoulli_fingerprint(&seq, h, e, n, opts)?;
    let summary = format!(
        "{} entries, max modulus {:.3e}, N/2 deviation {:.3e}, {}",
        t.entries.len(),
        t.max_modulus,
        t.half_n_deviation,
        if t.consistent_with_bernoulli { "consistent with Bernoulli" } else { "not Bernoulli" }
    );
    let passed = t.consistent_with_bernoulli;
    Ok(Outcome { body: json_doc(cfg, &t)?, extra: vec![], summary, passed })
}

fn split_vectors(s: &str) -> Vec<Vec<String>> {
    s.split(';').map(|v| v.split(',').map(|x| x.trim().to_string()).collect()).collect()
}

fn observable(cfg: &ExperimentConfig, default: &str) -> Result<ObservableSpec> {
    let f = cfg.freq.clone().unwrap_or_else(|| default.to_string());
    let ks = split_vectors(&f)
        .into_iter()
        .map(|v| {
            v.iter().map(|x| x.parse::<i64>().map_err(|_| Error::Input(format!("bad frequency {x:?}")))).collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let dim = ks[0].len();
    ObservableSpec::new(dim, ks.into_iter().map(|k| (k, Complex64::new(1.0, 0.0))).collect())
}

fn curve_csv(points: &[(u64, f64)]) -> String {
    let mut c = Csv::new(&["N", "norm_or_modulus"]);
    for (n, v) in points {
        c.row(&[n.to_string(), v.to_string()]);
    }
    c.finish()
}

fn vn_cmd(cfg: &ExperimentConfig) -> Result<Outcome> {
    let betas = split_vectors(&req(&cfg.betas, "betas")?)
        .iter()
        .map(|v| coeffs(v))
        .collect::<Result<Vec<_>>>()?;
    let sys = ModelSystem::torus(betas)?;
    let f = observable(cfg, &vec!["1"; sys.dim()].join(","))?;
    let shifts = req(&cfg.shifts, "shifts")?;
    let r = dynamics::vn_average(&sys, &f, &shifts, req(&cfg.c, "c")?, req(&cfg.n, "N")?, prec(cfg)?, cfg.threads)?;
    let passed = cfg.threshold.is_none_or(|t| r.norm <= t);
    let body = if format(cfg, "csv")? == "csv" { curve_csv(&r.curve) } else { json_doc(cfg, &r)? };
    Ok(Outcome { body, extra: vec![], summary: format!("N={} norm={:.6e}", r.n, r.norm), passed })
}

fn zeroentropy_cmd(cfg: &ExperimentConfig) -> Result<Outcome> {
    let system = cfg.system.as_deref().unwrap_or("rotation");
    let sys = match system {
        "rotation" => ModelSystem::torus(vec![vec![Coefficient::parse(&req(&cfg.beta, "beta")?)?]])?,
        "skew" => ModelSystem::Skew { alpha: Coefficient::parse(&req(&cfg.alpha, "alpha")?)? },
        s => return Err(Error::Input(format!("unknown --system {s:?}"))),
    };
    let f = observable(cfg, if system == "skew" { "0,1" } else { "1" })?;
    let x0 = match &cfg.x0 {
        Some(v) => coeffs(v)?,
        None => vec![Coefficient::int(0); sys.dim()],
    };
    let weight = match cfg.seq.as_deref().unwrap_or("a") {
        "a" => Weight::A,
        "b" => Weight::B(Coefficient::parse(&req(&cfg.floor_alpha, "floor-alpha")?)?),
        s => return Err(Error::Input(format!("unknown --seq {s:?}"))),
    };
    let n = req(&cfg.n, "N")?;
    let r = dynamics::zero_entropy_correlation(&sys, &f, &x0, &weight, req(&cfg.c, "c")?, n, prec(cfg)?, cfg.threads)?;
    let passed = cfg.threshold.is_none_or(|t| r.modulus < t);
    let body = if format(cfg, "csv")? == "csv" { curve_csv(&[(n, r.modulus)]) } else { json_doc(cfg, &r)? };
    Ok(Outcome { body, extra: vec![], summary: format!("N={n} modulus={:.6e}", r.modulus), passed })
}

fn skewdemo_cmd(cfg: &ExperimentConfig) -> Result<Outcome> {
    let alpha = Coefficient::parse(&req(&cfg.alpha, "alpha")?)?;
    let shifts = cfg.shifts.clone().unwrap_or_else(|| vec![0]);
    let d = dynamics::skew_demo(&alpha, cfg.m.unwrap_or(1), &shifts, req(&cfg.n, "N")?, prec(cfg)?, cfg.threads)?;
    let passed = cfg.threshold.is_none_or(|t| d.deviation < t);
    Ok(Outcome {
        body: json_doc(cfg, &d)?,
        extra: vec![],
        summary: format!("time {:.4e} space {:.4e} deviation {:.3e}", d.time_average, d.space_average, d.deviation),
        passed,
    })
}

fn fitdecay_cmd(cfg: &ExperimentConfig) -> Result<Outcome> {
    let path = req(&cfg.input, "input")?;
    let series = read_series(&std::fs::read_to_string(&path)?)?;
    let fit = fit_decay(&series, req(&cfg.c, "c")?)?;
    let passed = cfg.threshold.is_none_or(|t| fit.residual < t);
    Ok(Outcome {
        body: json_doc(cfg, &fit)?,
        extra: vec![],
        summary: format!("kappa_hat={:.6} residual={:.3e}", fit.kappa_hat, fit.residual),
        passed,
    })
}
