//! Floating-point tolerance and compensated complex summation.

use num_complex::Complex64;

/// Relative tolerance for every closed-form comparison.
pub const EPS: f64 = 1e-9;

/// `|a - b| / (1 + max(|a|, |b|))`; a comparison passes when this is at most
/// [`EPS`].
pub fn rel_dev(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / (1.0 + a.norm().max(b.norm()))
}

pub fn close(a: Complex64, b: Complex64) -> bool {
    rel_dev(a, b) <= EPS
}

pub fn close_real(a: f64, b: f64) -> bool {
    rel_dev(Complex64::new(a, 0.0), Complex64::new(b, 0.0)) <= EPS
}

/// Neumaier-compensated complex accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct Accum {
    re: f64,
    re_c: f64,
    im: f64,
    im_c: f64,
}

#[inline]
fn neumaier(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}

impl Accum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: Complex64) {
        neumaier(&mut self.re, &mut self.re_c, z.re);
        neumaier(&mut self.im, &mut self.im_c, z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re + self.re_c, self.im + self.im_c)
    }
}

impl Extend<Complex64> for Accum {
    fn extend<I: IntoIterator<Item = Complex64>>(&mut self, iter: I) {
        for z in iter {
            self.add(z);
        }
    }
}

/// Compensated sum of an iterator of complex values.
pub fn csum<I: IntoIterator<Item = Complex64>>(iter: I) -> Complex64 {
    let mut acc = Accum::new();
    acc.extend(iter);
    acc.value()
}

/// Running maximum of relative deviations with a sample count.
#[derive(Clone, Copy, Debug, Default)]
pub struct DevTracker {
    pub max_dev: f64,
    pub samples: u64,
}

impl DevTracker {
    pub fn observe(&mut self, a: Complex64, b: Complex64) {
        // NaN must register as a failure.
        self.observe_dev(rel_dev(a, b));
    }

    pub fn observe_dev(&mut self, d: f64) {
        if d.is_nan() {
            self.max_dev = f64::INFINITY;
        } else if d > self.max_dev {
            self.max_dev = d;
        }
        self.samples += 1;
    }

    pub fn merge(&mut self, other: DevTracker) {
        self.max_dev = self.max_dev.max(other.max_dev);
        self.samples += other.samples;
    }

    pub fn pass(&self) -> bool {
        self.max_dev <= EPS
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensation_recovers_cancelled_terms() {
        let xs = [1e16, 1.0, -1e16, 1.0].map(|x| Complex64::new(x, -x));
        assert_eq!(csum(xs), Complex64::new(2.0, -2.0));
    }

    #[test]
    fn tolerance_is_relative_above_one() {
        assert!(close(
            Complex64::new(1e6, 0.0),
            Complex64::new(1e6 + 1e-4, 0.0)
        ));
        assert!(!close(
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0 + 1e-8, 0.0)
        ));
    }

    #[test]
    fn nan_fails_tracker() {
        let mut t = DevTracker::default();
        t.observe(Complex64::new(f64::NAN, 0.0), Complex64::new(0.0, 0.0));
        assert!(!t.pass());
    }
}
