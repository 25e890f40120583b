//! One-time high-precision runs whose outputs are frozen as test fixtures.
//!
//!     cargo run --release --example pilot -- [out.json]
//!
//! Writes `tests/fixtures/golden.json` by default. Slow: tens of minutes on
//! one core.

use std::time::Instant;

use intergrow::dynamics::{vn_average, ModelSystem, ObservableSpec};
use intergrow::equidistribution::residue_frequencies;
use intergrow::expsum::{batch_sums, SequenceSpec};
use intergrow::furstenberg::{bernoulli_fingerprint, FingerprintOptions, Sequence};
use intergrow::growth::{Coefficient, GrowthParams, ShiftedCombination};
use intergrow::precision::PrecisionChoice;
use num_complex::Complex64;
use serde_json::json;

const PILOT_BITS: u32 = 256;

fn main() {
    let out = std::env::args().nth(1).unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/golden.json").into());
    let prec = PrecisionChoice::Bits(PILOT_BITS);
    let p = GrowthParams::new(0.3).unwrap();

    let t = Instant::now();
    let comb = ShiftedCombination::new(p, vec![Coefficient::int(1), Coefficient::int(-1)], vec![1, 0]).unwrap();
    let b = batch_sums(&[SequenceSpec::smooth(&comb)], 1 << 24, prec, None).unwrap();
    let decay: Vec<(u64, f64)> = b.checkpoints.iter().zip(&b.sums[0]).filter(|(n, _)| **n >= 1 << 14).map(|(&n, s)| (n, s.norm() / n as f64)).rev().collect();
    eprintln!("decay {:?}", t.elapsed());

    let t = Instant::now();
    let z = Coefficient::int(0);
    let sys = ModelSystem::torus(vec![
        vec![Coefficient::parse("sqrt(2)-1").unwrap(), z.clone()],
        vec![z, Coefficient::parse("sqrt(3)-1").unwrap()],
    ])
    .unwrap();
    let f = ObservableSpec::new(2, vec![(vec![1, 1], Complex64::new(1.0, 0.0))]).unwrap();
    let vn = vn_average(&sys, &f, &[0, 1], 0.3, 10_000_000, prec, None).unwrap();
    eprintln!("vn {} ({:?})", vn.norm, t.elapsed());

    let t = Instant::now();
    let hist = residue_frequencies(p, 0, 5, 1_000_000, prec, None).unwrap();
    eprintln!("residues {:?} ({:?})", hist.counts, t.elapsed());

    let mut fingerprints = serde_json::Map::new();
    let seqs = [
        ("a", Sequence::A { params: p }),
        ("b_sqrt2_minus_1", Sequence::b(p, Coefficient::parse("sqrt(2)-1").unwrap()).unwrap()),
        ("b_half", Sequence::b(p, Coefficient::ratio(1, 2)).unwrap()),
        ("rotation", Sequence::Rotation { beta: Coefficient::parse("sqrt(2)-1").unwrap() }),
    ];
    for (name, seq) in seqs {
        let t = Instant::now();
        let opts = FingerprintOptions { prec, ..Default::default() };
        let f = bernoulli_fingerprint(&seq, 2, 2, 10_000_000, opts).unwrap();
        eprintln!("fingerprint {name}: max {} at {:?} ({:?})", f.max_modulus, f.argmax, t.elapsed());
        fingerprints.insert(
            name.into(),
            json!({ "max_modulus": f.max_modulus, "argmax": f.argmax, "half_n_deviation": f.half_n_deviation, "entries": f.entries.len() }),
        );
    }

    let doc = json!({
        "precision_bits": PILOT_BITS,
        "decay": { "c": 0.3, "series": decay },
        "fingerprint": fingerprints,
        "vn": { "norm": vn.norm, "curve": vn.curve },
        "residues": { "q": 5, "n": 1_000_000, "counts": hist.counts, "max_deviation": hist.max_deviation() },
    });
    std::fs::write(&out, serde_json::to_string_pretty(&doc).unwrap() + "\n").unwrap();
    eprintln!("wrote {out}");
}
