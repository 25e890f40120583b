mod common;

use astro_float::BigFloat;
use common::{Ref, P, RM};
use intergrow::growth::{eval_g_u64, phase_floor, phase_smooth, Coefficient, GrowthParams, ShiftedCombination};
use intergrow::precision::{self, reduce_mod1, required_bits, ExtReal};

fn big(x: &ExtReal) -> BigFloat {
    let (m, e) = x.to_parts();
    let mut v = BigFloat::parse(&m.to_string(), astro_float::Radix::Dec, P, RM, &mut astro_float::Consts::new().unwrap());
    let two = BigFloat::from_u64(2, P);
    let scale = two.powi(e.unsigned_abs() as usize, P, RM);
    v = if e >= 0 { v.mul(&scale, P, RM) } else { v.div(&scale, P, RM) };
    v
}

#[test]
fn fractional_parts_of_g_match_reference() {
    let mut r = Ref::new();
    for c in [0.05, 0.3, 0.49] {
        for m in [2u64, 3, 17, 1000, 65_537, 10_000_000, 123_456_789] {
            let p = required_bits(m, c).unwrap();
            let v = reduce_mod1(&eval_g_u64(m, c, p).unwrap()).unwrap();
            assert!(v.trusted());
            let g = r.g(m, c);
            let want = r.frac(&g);
            let d = (v.frac_f64() - want).abs();
            assert!(d.min(1.0 - d) < 1e-12, "c={c} m={m}: {} vs {want}", v.frac_f64());
        }
    }
}

#[test]
fn phases_match_reference() {
    let mut r = Ref::new();
    let cb = ShiftedCombination::new(
        GrowthParams::new(0.3).unwrap(),
        vec![Coefficient::parse("sqrt(2)").unwrap(), Coefficient::ratio(-2, 3)],
        vec![0, 3],
    )
    .unwrap();
    let s2 = BigFloat::from_u64(2, P).sqrt(P, RM);
    let q = BigFloat::from_i64(-2, P).div(&BigFloat::from_u64(3, P), P, RM);
    for n in [1u64, 50, 4000, 999_999] {
        let smooth = phase_smooth(n, &cb, 256).unwrap().frac_f64();
        let floor = phase_floor(n, &cb, 256).unwrap().frac_f64();
        let (g0, g3) = (r.g(n, 0.3), r.g(n + 3, 0.3));
        let ws = r.frac(&s2.mul(&g0, P, RM).add(&q.mul(&g3, P, RM), P, RM));
        let wf = r.frac(&s2.mul(&g0.floor(), P, RM).add(&q.mul(&g3.floor(), P, RM), P, RM));
        for (got, want) in [(smooth, ws), (floor, wf)] {
            let d = (got - want).abs();
            assert!(d.min(1.0 - d) < 1e-12, "n={n}: {got} vs {want}");
        }
    }
}

#[test]
fn elementary_functions_match_reference() {
    let mut cc = astro_float::Consts::new().unwrap();
    for v in [1e-30, 0.5, 1.0, 2.75, 1e5, 3.3e40] {
        let x = ExtReal::from_f64(v, 256).unwrap();
        let xb = BigFloat::from_f64(v, P);
        let got = precision::ln(&x).unwrap();
        let want = xb.ln(P, RM, &mut cc);
        let err = big(&got).sub(&want, P, RM).abs();
        assert!(common::to_f64(&err) < 1e-70 * common::to_f64(&want).abs().max(1.0), "ln {v}");
        let y = ExtReal::from_f64(v.ln(), 256).unwrap();
        let got = precision::exp(&y).unwrap();
        let want = BigFloat::from_f64(v.ln(), P).exp(P, RM, &mut cc);
        let rel = common::to_f64(&big(&got).sub(&want, P, RM).div(&want, P, RM).abs());
        assert!(rel < 1e-70, "exp {}", v.ln());
    }
}
