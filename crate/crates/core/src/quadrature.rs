//! Gauss–Legendre rules: fixed, composite and adaptive.

use crate::scalar::{KahanSum, Real};

/// An `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre<F> {
    nodes: Vec<F>,
    weights: Vec<F>,
}

impl<F: Real> GaussLegendre<F> {
    /// Nodes by Newton iteration on `P_n`, computed in `f64` and cast.
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "Gauss–Legendre rule needs at least one node");
        let mut nodes = vec![0.0f64; n];
        let mut weights = vec![0.0f64; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self {
            nodes: nodes.into_iter().map(F::lit).collect(),
            weights: weights.into_iter().map(F::lit).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[F] {
        &self.nodes
    }

    pub fn weights(&self) -> &[F] {
        &self.weights
    }

    /// Abscissae and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: F, b: F) -> impl Iterator<Item = (F, F)> + '_ {
        let half = (b - a) / F::lit(2.0);
        let mid = (a + b) / F::lit(2.0);
        self.nodes.iter().zip(&self.weights).map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate(&self, a: F, b: F, mut f: impl FnMut(F) -> F) -> F {
        self.mapped(a, b).map(|(x, w)| w * f(x)).collect::<KahanSum<F>>().value()
    }

    /// Sum of the rule over consecutive panels `[b_i, b_{i+1}]`.
    pub fn integrate_panels(&self, breaks: &[F], mut f: impl FnMut(F) -> F) -> F {
        let mut acc = KahanSum::new();
        for w in breaks.windows(2) {
            if w[1] > w[0] {
                acc.add(self.integrate(w[0], w[1], &mut f));
            }
        }
        acc.value()
    }

    /// `panels` equal panels on `[a, b]`.
    pub fn composite(&self, a: F, b: F, panels: usize, f: impl FnMut(F) -> F) -> F {
        let breaks = uniform_breaks(a, b, panels);
        self.integrate_panels(&breaks, f)
    }

    /// Recursive bisection until one-panel and two-panel estimates agree
    /// within `abs_tol` (halved at each level) or within a few ulps of the
    /// panel value.
    pub fn adaptive(&self, a: F, b: F, abs_tol: F, max_depth: u32, mut f: impl FnMut(F) -> F) -> F {
        let whole = self.integrate(a, b, &mut f);
        self.adaptive_step(a, b, whole, abs_tol, max_depth, &mut f)
    }

    fn adaptive_step(&self, a: F, b: F, whole: F, tol: F, depth: u32, f: &mut impl FnMut(F) -> F) -> F {
        let mid = (a + b) / F::lit(2.0);
        let left = self.integrate(a, mid, &mut *f);
        let right = self.integrate(mid, b, &mut *f);
        let split = left + right;
        let floor = F::epsilon() * F::lit(16.0) * split.abs();
        if depth == 0 || (split - whole).abs() <= tol.max(floor) {
            return split;
        }
        let half = tol / F::lit(2.0);
        self.adaptive_step(a, mid, left, half, depth - 1, f)
            + self.adaptive_step(mid, b, right, half, depth - 1, f)
    }
}

pub fn uniform_breaks<F: Real>(a: F, b: F, panels: usize) -> Vec<F> {
    let panels = panels.max(1);
    let step = (b - a) / F::from_usize_lossy(panels);
    (0..=panels)
        .map(|i| if i == panels { b } else { a + step * F::from_usize_lossy(i) })
        .collect()
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
