//! Compensated (Kahan-Neumaier) summation for long kernel sums.

use super::Real;
use num_complex::Complex;

/// Neumaier variant of Kahan summation: tracks a running compensation so
/// that sums of `~1e5` terms with mixed magnitudes keep near-full precision.
#[derive(Clone, Copy, Debug)]
pub struct KahanSum<R: Real> {
    sum: R,
    comp: R,
}

impl<R: Real> Default for KahanSum<R> {
    fn default() -> Self {
        KahanSum {
            sum: R::zero(),
            comp: R::zero(),
        }
    }
}

impl<R: Real> KahanSum<R> {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: R) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp = self.comp + ((self.sum - t) + x);
        } else {
            self.comp = self.comp + ((x - t) + self.sum);
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> R {
        self.sum + self.comp
    }
}

/// Componentwise compensated sum of complex terms.
#[derive(Clone, Copy, Debug)]
pub struct KahanSumC<R: Real> {
    re: KahanSum<R>,
    im: KahanSum<R>,
}

impl<R: Real> Default for KahanSumC<R> {
    fn default() -> Self {
        KahanSumC {
            re: KahanSum::default(),
            im: KahanSum::default(),
        }
    }
}

impl<R: Real> KahanSumC<R> {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: Complex<R>) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    #[inline]
    pub fn value(&self) -> Complex<R> {
        Complex::new(self.re.value(), self.im.value())
    }
}
