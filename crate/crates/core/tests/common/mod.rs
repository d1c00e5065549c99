//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use smoothsieve::dde::PanelSolution;
use smoothsieve::quadrature::GaussLegendre;

pub fn is_squarefree(mut n: u64) -> bool {
    let mut p = 2;
    while p * p <= n {
        if n % (p * p) == 0 {
            return false;
        }
        if n % p == 0 {
            n /= p;
        }
        p += 1;
    }
    true
}

pub fn largest_prime_factor(mut n: u64) -> u64 {
    let mut best = 1;
    let mut p = 2;
    while p * p <= n {
        while n % p == 0 {
            best = p;
            n /= p;
        }
        p += 1;
    }
    if n > 1 {
        n
    } else {
        best
    }
}

/// `sum_{n <= x, n squarefree} 1/n` by trial division.
pub fn harmonic_squarefree(x: u64) -> BigRational {
    (1..=x)
        .filter(|&n| is_squarefree(n))
        .fold(BigRational::from_integer(BigInt::from(0)), |acc, n| {
            acc + BigRational::new(BigInt::from(1), BigInt::from(n))
        })
}

pub fn ln_factorial(n: u64) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

/// `ln I_s(1, 1)` for `f = 1`: `(m!)^2 (2m-2s)! / ((m-s)!^2 (2m-s)!)`, from
/// the Beta integral `int_0^1 (1-x)^{s-1} x^{2(m-s)} dx`.
pub fn ln_beta_base(s: u64, m: u64) -> f64 {
    2.0 * ln_factorial(m) + ln_factorial(2 * (m - s)) - 2.0 * ln_factorial(m - s) - ln_factorial(2 * m - s)
}

/// Unsmoothed threshold `2 I_k / (k I_{k-1})` from the Beta form.
pub fn beta_threshold(k: u64, m: u64) -> f64 {
    2.0 / k as f64 * (ln_beta_base(k, m) - ln_beta_base(k - 1, m)).exp()
}

/// `f(u; k, m)` on `[1, 2]` by integrating `f' = -k (v-1)^{k+m} v^{-k-m-1}`
/// with high-order composite quadrature.
pub fn f_on_first_panel(k: i64, m: i64, u: f64) -> f64 {
    if u <= 1.0 {
        return 1.0;
    }
    let n = k + m;
    let gl = GaussLegendre::<f64>::new(30);
    1.0 - k as f64 * gl.composite(1.0, u, 16, |v| (v - 1.0).powi(n as i32) / v.powi((n + 1) as i32))
}

/// `I_s(t, v)` by direct recursive quadrature: no tables, no interpolation.
pub struct NestedOracle<'a> {
    pub s: u32,
    pub m: u32,
    pub u: f64,
    pub f: &'a PanelSolution<f64>,
    gl: GaussLegendre<f64>,
    outer: GaussLegendre<f64>,
}

impl<'a> NestedOracle<'a> {
    pub fn new(s: u32, m: u32, u: f64, f: &'a PanelSolution<f64>) -> Self {
        Self { s, m, u, f, gl: GaussLegendre::new(20), outer: GaussLegendre::new(16) }
    }

    pub fn base(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let s = self.s as i32;
        let l = (self.m - self.s) as i32;
        let pref = (ln_factorial(self.m as u64) - ln_factorial((self.m - self.s) as u64)).exp();
        let fact = ln_factorial(self.s as u64 - 1).exp();
        let mut breaks = vec![0.0];
        let ut = self.u * t;
        let mut j = 1.0;
        while j < ut {
            breaks.push(j / ut);
            j += 1.0;
        }
        breaks.push(1.0);
        let mut total = 0.0;
        for w in breaks.windows(2) {
            total += self.gl.composite(w[0], w[1], 8, |x| {
                let f = self.f.eval(self.u * x * t).unwrap();
                let p = pref * (x * t).powi(l);
                (1.0 - x).powi(s - 1) / fact * (f * p).powi(2)
            });
        }
        total
    }

    pub fn eval(&self, t: f64, v: f64) -> f64 {
        if v <= 1.0 {
            return self.base(t);
        }
        let s = self.s as f64;
        let mut breaks = vec![1.0];
        let mut j = 2.0;
        while j < v {
            breaks.push(j);
            j += 1.0;
        }
        breaks.push(v);
        let mut integral = 0.0;
        for w in breaks.windows(2) {
            integral += self.outer.composite(w[0], w[1], 4, |x| {
                let shrink = 1.0 - 1.0 / x;
                self.eval(shrink * t, x - 1.0) * shrink.powf(s) / x
            });
        }
        self.base(t) - s * integral
    }
}
