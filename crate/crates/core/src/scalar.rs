use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, NumAssign};

/// Floating-point scalar used throughout the numerical modules.
pub trait Real:
    Float + FromPrimitive + NumAssign + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal; lossy for `f32`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Kahan–Babuška (Neumaier) compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum<F> {
    sum: F,
    comp: F,
}

impl<F: Real> KahanSum<F> {
    pub fn new() -> Self {
        Self { sum: F::zero(), comp: F::zero() }
    }

    #[inline]
    pub fn add(&mut self, x: F) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> F {
        self.sum + self.comp
    }
}

impl<F: Real> FromIterator<F> for KahanSum<F> {
    fn from_iter<I: IntoIterator<Item = F>>(iter: I) -> Self {
        let mut acc = Self::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// `ln(n!)` by direct summation; exact enough for the factorial ratios used
/// in kernel scaling (n up to a few million).
pub fn ln_factorial(n: u64) -> f64 {
    let mut acc = KahanSum::<f64>::new();
    for i in 2..=n {
        acc.add((i as f64).ln());
    }
    acc.value()
}

/// `ln(n! / (n-r)!)`, the log of a falling factorial.
pub fn ln_falling_factorial(n: u64, r: u64) -> f64 {
    assert!(r <= n);
    let mut acc = KahanSum::<f64>::new();
    for i in (n - r + 1)..=n {
        acc.add((i as f64).ln());
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_recovers_small_terms() {
        let mut acc = KahanSum::<f64>::new();
        acc.add(1.0);
        for _ in 0..10_000 {
            acc.add(1e-16);
        }
        assert!((acc.value() - (1.0 + 1e-12)).abs() < 1e-15);
    }

    #[test]
    fn factorial_logs() {
        assert_eq!(ln_factorial(0), 0.0);
        assert!((ln_factorial(10) - 3_628_800f64.ln()).abs() < 1e-12);
        assert!((ln_falling_factorial(7, 3) - 210f64.ln()).abs() < 1e-12);
    }
}
