//! Chebyshev series and barycentric interpolation on Chebyshev–Lobatto
//! points `x_j = mid - half * cos(pi j / N)`, listed in increasing order.

use crate::scalar::Real;

pub fn lobatto_points<F: Real>(n: usize, a: F, b: F) -> Vec<F> {
    assert!(n >= 2, "need at least two Lobatto points");
    let nn = (n - 1) as f64;
    let mid = (a + b) / F::lit(2.0);
    let half = (b - a) / F::lit(2.0);
    (0..n)
        .map(|j| {
            if j == 0 {
                a
            } else if j == n - 1 {
                b
            } else {
                mid - half * F::lit((std::f64::consts::PI * j as f64 / nn).cos())
            }
        })
        .collect()
}

/// Truncated Chebyshev expansion `sum c_k T_k(y)` on `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebSeries<F> {
    a: F,
    b: F,
    coeffs: Vec<F>,
}

impl<F: Real> ChebSeries<F> {
    pub fn constant(a: F, b: F, c: F) -> Self {
        Self { a, b, coeffs: vec![c] }
    }

    pub fn from_coeffs(a: F, b: F, coeffs: Vec<F>) -> Self {
        assert!(!coeffs.is_empty());
        Self { a, b, coeffs }
    }

    /// Interpolant through values at [`lobatto_points`]`(values.len(), a, b)`.
    pub fn from_lobatto_values(a: F, b: F, values: &[F]) -> Self {
        let n = values.len();
        assert!(n >= 2);
        let nn = n - 1;
        // y_j = cos(pi (N - j) / N), so T_k(y_j) = cos(pi k (N - j) / N)
        let table: Vec<f64> =
            (0..2 * nn).map(|i| (std::f64::consts::PI * i as f64 / nn as f64).cos()).collect();
        let two_over_n = F::lit(2.0 / nn as f64);
        let coeffs = (0..n)
            .map(|k| {
                let mut acc = F::zero();
                for (j, &v) in values.iter().enumerate() {
                    let t = F::lit(table[(k * (nn - j)) % (2 * nn)]);
                    let term = v * t;
                    acc += if j == 0 || j == nn { term / F::lit(2.0) } else { term };
                }
                let c = acc * two_over_n;
                if k == 0 || k == nn {
                    c / F::lit(2.0)
                } else {
                    c
                }
            })
            .collect();
        Self { a, b, coeffs }
    }

    pub fn interval(&self) -> (F, F) {
        (self.a, self.b)
    }

    pub fn coeffs(&self) -> &[F] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Clenshaw recurrence.
    pub fn eval(&self, x: F) -> F {
        let y = (x + x - self.a - self.b) / (self.b - self.a);
        let y2 = y + y;
        let mut b1 = F::zero();
        let mut b2 = F::zero();
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = c + y2 * b1 - b2;
            b2 = b1;
            b1 = b0;
        }
        self.coeffs[0] + y * b1 - b2
    }

    pub fn derivative(&self) -> Self {
        let n = self.coeffs.len();
        if n == 1 {
            return Self::constant(self.a, self.b, F::zero());
        }
        let mut d = vec![F::zero(); n];
        for k in (0..n - 1).rev() {
            let next = if k + 2 < n { d[k + 2] } else { F::zero() };
            d[k] = next + F::lit(2.0 * (k + 1) as f64) * self.coeffs[k + 1];
        }
        d[0] /= F::lit(2.0);
        d.pop();
        let scale = F::lit(2.0) / (self.b - self.a);
        Self { a: self.a, b: self.b, coeffs: d.into_iter().map(|c| c * scale).collect() }
    }

    /// Magnitude of the trailing coefficients, a cheap truncation indicator.
    pub fn tail_magnitude(&self) -> F {
        let n = self.coeffs.len();
        let start = n.saturating_sub(3);
        self.coeffs[start..].iter().fold(F::zero(), |m, c| m.max(c.abs()))
    }
}

/// Barycentric interpolation on Chebyshev–Lobatto nodes.
#[derive(Debug, Clone)]
pub struct Barycentric<F> {
    nodes: Vec<F>,
    weights: Vec<F>,
}

impl<F: Real> Barycentric<F> {
    pub fn lobatto(n: usize, a: F, b: F) -> Self {
        let nodes = lobatto_points(n, a, b);
        let weights = (0..n)
            .map(|j| {
                let s = if j % 2 == 0 { F::one() } else { -F::one() };
                if j == 0 || j == n - 1 {
                    s / F::lit(2.0)
                } else {
                    s
                }
            })
            .collect();
        Self { nodes, weights }
    }

    pub fn nodes(&self) -> &[F] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Lagrange basis values `l_j(x)`; exact unit vector at a node.
    pub fn basis(&self, x: F) -> Vec<F> {
        let mut out = vec![F::zero(); self.nodes.len()];
        if let Some(j) = self.nodes.iter().position(|&xj| xj == x) {
            out[j] = F::one();
            return out;
        }
        let mut denom = F::zero();
        for (j, (&xj, &wj)) in self.nodes.iter().zip(&self.weights).enumerate() {
            let t = wj / (x - xj);
            out[j] = t;
            denom += t;
        }
        for v in &mut out {
            *v /= denom;
        }
        out
    }

    pub fn eval(&self, values: &[F], x: F) -> F {
        debug_assert_eq!(values.len(), self.nodes.len());
        let mut num = F::zero();
        let mut den = F::zero();
        for ((&xj, &wj), &vj) in self.nodes.iter().zip(&self.weights).zip(values) {
            let d = x - xj;
            if d == F::zero() {
                return vj;
            }
            let t = wj / d;
            num += t * vj;
            den += t;
        }
        num / den
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn interpolates_smooth_function() {
        let pts = lobatto_points(25, 1.0, 2.0);
        let vals: Vec<f64> = pts.iter().map(|x: &f64| x.exp()).collect();
        let s = ChebSeries::from_lobatto_values(1.0, 2.0, &vals);
        for x in [1.0, 1.13, 1.5, 1.999, 2.0] {
            assert_relative_eq!(s.eval(x), f64::exp(x), max_relative = 1e-14);
            assert_relative_eq!(s.derivative().eval(x), f64::exp(x), max_relative = 1e-12);
        }
        let b = Barycentric::lobatto(25, 1.0, 2.0);
        assert_relative_eq!(b.eval(&vals, 1.37), 1.37f64.exp(), max_relative = 1e-14);
        let basis = b.basis(1.37);
        let via: f64 = basis.iter().zip(&vals).map(|(l, v)| l * v).sum();
        assert_relative_eq!(via, 1.37f64.exp(), max_relative = 1e-14);
    }

    #[test]
    fn reproduces_polynomial_coefficients() {
        // 3 T_0 - T_1 + 0.5 T_3 on [-1, 1]
        let f = |y: f64| 3.0 - y + 0.5 * (4.0 * y * y * y - 3.0 * y);
        let pts = lobatto_points(6, -1.0, 1.0);
        let vals: Vec<f64> = pts.iter().map(|&y| f(y)).collect();
        let s = ChebSeries::from_lobatto_values(-1.0, 1.0, &vals);
        let want = [3.0, -1.0, 0.0, 0.5, 0.0, 0.0];
        for (c, w) in s.coeffs().iter().zip(want) {
            assert!((c - w).abs() < 1e-14);
        }
    }

    #[test]
    fn endpoints_are_exact_nodes() {
        let p = lobatto_points::<f64>(9, 2.0, 3.0);
        assert_eq!(p[0], 2.0);
        assert_eq!(p[8], 3.0);
        assert!(p.windows(2).all(|w| w[0] < w[1]));
    }
}
