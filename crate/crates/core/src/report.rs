//! Decay-law fitting and output plumbing shared by the command line and
//! the C interface.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

/// `ln m(N) ~ intercept - kappa log^(1-2c) N`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayFit {
    pub kappa_hat: f64,
    pub intercept: f64,
    /// RMS of the misfit in `ln m`.
    pub residual: f64,
    pub exponent: f64,
    pub points: usize,
    pub dropped: usize,
}

/// Least squares of `ln(modulus)` against `-log^(1-2c) N`. Nonpositive
/// moduli are dropped with a warning; at least four points must remain.
pub fn fit_decay(series: &[(u64, f64)], c: f64) -> Result<DecayFit> {
    if !(c > 0.0 && c < 0.5) {
        return Err(Error::Domain(format!("c out of (0,1/2): {c}")));
    }
    let exponent = 1.0 - 2.0 * c;
    let mut pts = Vec::with_capacity(series.len());
    let mut dropped = 0;
    for &(n, m) in series {
        if m > 0.0 && m.is_finite() && n >= 2 {
            pts.push((-(n as f64).ln().powf(exponent), m.ln()));
        } else {
            log::warn!("dropping point N={n}, modulus={m}");
            dropped += 1;
        }
    }
    if pts.len() < 4 {
        return Err(Error::Input(format!("a decay fit needs at least 4 usable points, got {}", pts.len())));
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Input("all points share one N".into()));
    }
    let kappa_hat = sxy / sxx;
    let intercept = my - kappa_hat * mx;
    let residual = (pts.iter().map(|p| (p.1 - intercept - kappa_hat * p.0).powi(2)).sum::<f64>() / k).sqrt();
    Ok(DecayFit { kappa_hat, intercept, residual, exponent, points: pts.len(), dropped })
}

/// Write via a temporary file in the target directory and rename it into
/// place, so readers never see a partial file.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// A CSV document with a fixed header; values are written with Rust's
/// shortest round-trip float formatting.
#[derive(Clone, Debug, Default)]
pub struct Csv {
    text: String,
    width: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Csv {
        Csv { text: format!("{}\n", header.join(",")), width: header.len() }
    }

    pub fn row(&mut self, cells: &[String]) {
        debug_assert_eq!(cells.len(), self.width);
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn finish(self) -> String {
        self.text
    }
}

/// `(N, value)` pairs from CSV text whose header names an `N` column and
/// one of `modulus_over_N`, `norm_or_modulus`, `modulus` (else the second
/// column).
pub fn read_series(text: &str) -> Result<Vec<(u64, f64)>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<&str> = lines.next().ok_or_else(|| Error::Input("empty series".into()))?.split(',').map(str::trim).collect();
    let ni = header.iter().position(|h| *h == "N").unwrap_or(0);
    let vi = ["modulus_over_N", "norm_or_modulus", "modulus", "Dstar"]
        .iter()
        .find_map(|name| header.iter().position(|h| h == name))
        .unwrap_or(1);
    let mut out = Vec::new();
    for (i, l) in lines.enumerate() {
        let cells: Vec<&str> = l.split(',').map(str::trim).collect();
        let get = |j: usize| cells.get(j).copied().ok_or_else(|| Error::Input(format!("row {} is short", i + 2)));
        let n: u64 = get(ni)?.parse().map_err(|_| Error::Input(format!("bad N in row {}", i + 2)))?;
        let v: f64 = get(vi)?.parse().map_err(|_| Error::Input(format!("bad value in row {}", i + 2)))?;
        out.push((n, v));
    }
    Ok(out)
}
