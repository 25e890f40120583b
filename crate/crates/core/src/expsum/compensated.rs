//! Neumaier compensated summation for complex values.

use num_complex::Complex64;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
struct Neumaier {
    s: f64,
    c: f64,
}

impl Neumaier {
    #[inline]
    fn add(&mut self, x: f64) {
        let t = self.s + x;
        let (big, small) = if self.s.abs() >= x.abs() { (self.s, x) } else { (x, self.s) };
        self.c += (big - t) + small;
        self.s = t;
    }

    #[inline]
    fn merge(&mut self, o: &Neumaier) {
        self.add(o.s);
        self.c += o.c;
    }

    fn value(&self) -> f64 {
        self.s + self.c
    }
}

/// Complex accumulator; merging is deterministic given the merge order.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CompSum {
    re: Neumaier,
    im: Neumaier,
}

impl CompSum {
    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn merge(&mut self, o: &CompSum) {
        self.re.merge(&o.re);
        self.im.merge(&o.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}
