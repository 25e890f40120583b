//! Fractions of a turn as 256-bit fixed point. All arithmetic wraps mod 1,
//! so sums of phases never lose their low bits to the integer part.

use num_bigint::BigUint;
use num_traits::ToPrimitive;

/// `limbs[0]` is the most significant word; the value is
/// `sum limbs[i] * 2^(-64 (i + 1))`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fixed(pub [u64; 4]);

impl Fixed {
    pub const ZERO: Fixed = Fixed([0; 4]);
    pub const BITS: u32 = 256;

    pub fn from_top(u: u64) -> Fixed {
        Fixed([u, 0, 0, 0])
    }

    #[inline]
    pub fn top(self) -> u64 {
        self.0[0]
    }

    pub fn is_zero(self) -> bool {
        self.0 == [0; 4]
    }

    #[inline]
    pub fn wrapping_add(self, o: Fixed) -> Fixed {
        let (l3, c3) = self.0[3].overflowing_add(o.0[3]);
        let (l2, c2a) = self.0[2].overflowing_add(o.0[2]);
        let (l2, c2b) = l2.overflowing_add(c3 as u64);
        let (l1, c1a) = self.0[1].overflowing_add(o.0[1]);
        let (l1, c1b) = l1.overflowing_add((c2a | c2b) as u64);
        let l0 = self.0[0].wrapping_add(o.0[0]).wrapping_add((c1a | c1b) as u64);
        Fixed([l0, l1, l2, l3])
    }

    #[inline]
    pub fn wrapping_neg(self) -> Fixed {
        let inv = Fixed([!self.0[0], !self.0[1], !self.0[2], !self.0[3]]);
        inv.wrapping_add(Fixed([0, 0, 0, 1]))
    }

    #[inline]
    pub fn wrapping_sub(self, o: Fixed) -> Fixed {
        self.wrapping_add(o.wrapping_neg())
    }

    /// `k * self = carry + frac` with `carry` the integer part.
    pub fn mul_u64(self, k: u64) -> (u64, Fixed) {
        let mut out = [0u64; 4];
        let mut carry: u128 = 0;
        for i in (0..4).rev() {
            let t = self.0[i] as u128 * k as u128 + carry;
            out[i] = t as u64;
            carry = t >> 64;
        }
        (carry as u64, Fixed(out))
    }

    /// `k * self mod 1`.
    pub fn mul_i64(self, k: i64) -> Fixed {
        let (_, f) = self.mul_u64(k.unsigned_abs());
        if k < 0 {
            f.wrapping_neg()
        } else {
            f
        }
    }

    /// Truncated product of two fractions.
    pub fn mul(self, o: Fixed) -> Fixed {
        let mut acc = [0u64; 8];
        for i in 0..4 {
            let mut carry: u128 = 0;
            for j in (0..4).rev() {
                let k = i + j + 1;
                let t = self.0[i] as u128 * o.0[j] as u128 + acc[k] as u128 + carry;
                acc[k] = t as u64;
                carry = t >> 64;
            }
            let mut k = i;
            while carry != 0 {
                let t = acc[k] as u128 + carry;
                acc[k] = t as u64;
                carry = t >> 64;
                if k == 0 {
                    break;
                }
                k -= 1;
            }
        }
        Fixed([acc[0], acc[1], acc[2], acc[3]])
    }

    /// `floor(p * 2^256 / q) / 2^256` for `p < q`.
    pub fn from_ratio(p: u64, q: u64) -> Fixed {
        assert!(q > 0 && p < q, "ratio must lie in [0,1)");
        let mut out = [0u64; 4];
        let mut r = p as u128;
        for limb in out.iter_mut() {
            let num = r << 64;
            *limb = (num / q as u128) as u64;
            r = num % q as u128;
        }
        Fixed(out)
    }

    pub fn from_biguint(v: &BigUint) -> Fixed {
        let mut out = [0u64; 4];
        for (i, limb) in out.iter_mut().enumerate() {
            let shift = 64 * (3 - i) as u64;
            *limb = ((v >> shift) & BigUint::from(u64::MAX)).to_u64().unwrap();
        }
        Fixed(out)
    }

    pub fn to_biguint(self) -> BigUint {
        let mut v = BigUint::from(0u32);
        for limb in self.0 {
            v = (v << 64u32) + BigUint::from(limb);
        }
        v
    }

    pub fn to_f64(self) -> f64 {
        self.0[0] as f64 * 2f64.powi(-64) + self.0[1] as f64 * 2f64.powi(-128)
    }

    /// Distance to the nearest integer, as a fraction of a turn.
    pub fn dist_to_integer(self) -> f64 {
        let f = self.to_f64();
        f.min(1.0 - f)
    }
}
