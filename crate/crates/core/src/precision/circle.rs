//! `e(t) = exp(2 pi i t)` from a 64-bit turn fraction.
//!
//! A 4096-entry table built from plain f64 arithmetic (no libm, so the
//! table is identical on every platform) times a short Taylor correction.
//! Negative turns are folded onto positive ones and conjugated, which
//! makes `e(-t)` the exact conjugate of `e(t)`.

use std::sync::OnceLock;

use num_complex::Complex64;

const TABLE_BITS: u32 = 12;
const TABLE_LEN: usize = 1 << TABLE_BITS;
const TWO_PI: f64 = std::f64::consts::TAU;

fn taylor_sin_cos(x: f64) -> (f64, f64) {
    let x2 = x * x;
    let mut s = 0.0;
    let mut c = 0.0;
    let mut ts = x;
    let mut tc = 1.0;
    for k in 0..14 {
        s += ts;
        c += tc;
        let a = (2 * k + 2) as f64;
        let b = (2 * k + 3) as f64;
        ts = -ts * x2 / (a * b);
        tc = -tc * x2 / ((a - 1.0) * a);
    }
    (s, c)
}

fn table() -> &'static [(f64, f64)] {
    static T: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    T.get_or_init(|| {
        let q = TABLE_LEN / 4;
        let o = TABLE_LEN / 8;
        let mut oct = vec![(0.0, 1.0); o + 1];
        for (j, slot) in oct.iter_mut().enumerate() {
            let x = TWO_PI * j as f64 / TABLE_LEN as f64;
            let (s, c) = taylor_sin_cos(x);
            *slot = (c, s);
        }
        oct[0] = (1.0, 0.0);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        oct[o] = (h, h);
        let mut t = vec![(0.0, 0.0); TABLE_LEN / 2 + 1];
        for j in 0..=q {
            t[j] = if j <= o { oct[j] } else { (oct[q - j].1, oct[q - j].0) };
        }
        for j in q + 1..=TABLE_LEN / 2 {
            let (c, s) = t[TABLE_LEN / 2 - j];
            t[j] = (-c, s);
        }
        t
    })
}

/// `e(u / 2^64)`.
#[inline]
pub fn turn(u: u64) -> Complex64 {
    // Selects rather than branches: phases are effectively random.
    let neg = u > 1u64 << 63;
    let v = if neg { u.wrapping_neg() } else { u };
    let shift = 64 - TABLE_BITS;
    let j = ((v >> (shift - 1)) + 1) >> 1;
    let rem = v.wrapping_sub(j << shift) as i64;
    let (c0, s0) = table()[j as usize];
    let phi = TWO_PI * (rem as f64 * 2f64.powi(-64));
    let p2 = phi * phi;
    // |phi| <= pi/4096, so three terms of each series are exact to an ulp.
    let sp = phi * (1.0 - p2 * (1.0 / 6.0) * (1.0 - p2 * (1.0 / 20.0)));
    let cp = 1.0 - p2 * 0.5 * (1.0 - p2 * (1.0 / 12.0) * (1.0 - p2 * (1.0 / 30.0)));
    let im = s0 * cp + c0 * sp;
    Complex64::new(c0 * cp - s0 * sp, if neg { -im } else { im })
}

/// `e(t)` for a real `t`, reduced mod 1.
pub fn turn_f64(t: f64) -> Complex64 {
    turn(f64_to_turn(t))
}

pub fn f64_to_turn(t: f64) -> u64 {
    let f = t - t.floor();
    let v = (f * 2f64.powi(64)).round();
    if v >= 2f64.powi(64) {
        0
    } else {
        v as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_quarter_points() {
        assert_eq!(turn(0), Complex64::new(1.0, 0.0));
        assert_eq!(turn(1 << 62), Complex64::new(0.0, 1.0));
        assert_eq!(turn(1 << 63), Complex64::new(-1.0, 0.0));
        assert_eq!(turn(3 << 62), Complex64::new(0.0, -1.0));
    }

    #[test]
    fn conjugate_symmetry_is_exact() {
        for &u in &[1u64, 12345, 1 << 40, 0x1234_5678_9abc_def0, (1 << 63) - 7] {
            assert_eq!(turn(u.wrapping_neg()), turn(u).conj());
        }
    }

    #[test]
    fn accuracy_against_libm() {
        let mut worst: f64 = 0.0;
        let mut u: u64 = 0x9e37_79b9_7f4a_7c15;
        for _ in 0..20000 {
            u = u.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let t = u as f64 * 2f64.powi(-64);
            let z = turn(u);
            let w = Complex64::new((TWO_PI * t).cos(), (TWO_PI * t).sin());
            worst = worst.max((z - w).norm());
        }
        assert!(worst < 2e-15, "worst {worst:e}");
    }
}
