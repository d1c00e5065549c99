//! The delay-differential function `f(u; k, m)`:
//!
//! ```text
//! u^{k+m+1} f'(u) = -k (u-1)^{k+m} f(u-1),   f(u) = 1 on (0, 1],
//! ```
//!
//! solved panel by panel on unit intervals `(r-1, r]` through the integral
//! form `f(u) = f(r-1) - k ∫_{r-1}^u f(v-1) (v-1)^{k+m} v^{-k-m-1} dv`.
//! Each panel is a Chebyshev series whose node values come from cumulative
//! Gauss–Legendre quadrature against the previous panel.

use crate::chebyshev::{lobatto_points, ChebSeries};
use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use crate::scalar::Real;

/// Solver knobs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DdeConfig {
    /// Starting Chebyshev degree per panel.
    pub degree: usize,
    /// Gauss–Legendre nodes between consecutive Chebyshev nodes.
    pub gap_nodes: usize,
    /// The degree is doubled up to this bound when the residual check fails.
    pub max_degree: usize,
    /// Residual probes per panel, at midpoints of a Chebyshev grid.
    pub probes: usize,
}

impl Default for DdeConfig {
    fn default() -> Self {
        Self { degree: 32, gap_nodes: 8, max_degree: 256, probes: 64 }
    }
}

/// Piecewise Chebyshev representation of `f(·; k, m)` on `(0, U]`.
#[derive(Debug, Clone)]
pub struct PanelSolution<F> {
    k: i64,
    m: i64,
    u_max: F,
    tol: F,
    /// `panels[r - 1]` covers `(r - 1, r]`; panel 0 is the constant 1.
    panels: Vec<ChebSeries<F>>,
    derivatives: Vec<ChebSeries<F>>,
    achieved_residual: F,
}

/// `(v-1)^n v^{-n-1}` in log space; `n >= 1`.
#[inline]
pub fn delay_weight<F: Real>(v: F, n: i64) -> F {
    let one = F::one();
    if v <= one {
        return F::zero();
    }
    let nf = F::lit(n as f64);
    (nf * (v - one).ln() - (nf + one) * v.ln()).exp()
}

pub fn solve_f<F: Real>(k: i64, m: i64, u_max: F, tol: F) -> Result<PanelSolution<F>> {
    solve_f_with(k, m, u_max, tol, DdeConfig::default())
}

pub fn solve_f_with<F: Real>(
    k: i64,
    m: i64,
    u_max: F,
    tol: F,
    config: DdeConfig,
) -> Result<PanelSolution<F>> {
    if m < 1 || m <= -k {
        return Err(Error::param(format!("need m >= 1 and m > -k, got k = {k}, m = {m}")));
    }
    if !(u_max >= F::one()) || !u_max.is_finite() {
        return Err(Error::param(format!("coverage bound U must be >= 1, got {u_max}")));
    }
    if !(tol > F::zero()) {
        return Err(Error::param("tolerance must be positive"));
    }
    if config.degree < 2 || config.gap_nodes == 0 {
        return Err(Error::param("degree must be >= 2 and gap_nodes >= 1"));
    }
    let n = k + m;
    let kf = F::lit(k as f64);
    let panel_count = u_max.ceil().to_usize().expect("finite coverage");
    let gl = GaussLegendre::<F>::new(config.gap_nodes);

    let mut panels = vec![ChebSeries::constant(F::zero(), F::one(), F::one())];
    let mut derivatives = vec![ChebSeries::constant(F::zero(), F::one(), F::zero())];
    let mut worst = F::zero();

    for r in 2..=panel_count {
        let a = F::from_usize_lossy(r - 1);
        let b = F::from_usize_lossy(r);
        let prev = &panels[r - 2];
        let start = prev.eval(a);
        let mut degree = config.degree;
        loop {
            let nodes = lobatto_points(degree + 1, a, b);
            let mut values = Vec::with_capacity(nodes.len());
            let mut cumulative = F::zero();
            values.push(start);
            for pair in nodes.windows(2) {
                cumulative += gl.integrate(pair[0], pair[1], |v| {
                    prev.eval(v - F::one()) * delay_weight(v, n)
                });
                values.push(start - kf * cumulative);
            }
            let series = ChebSeries::from_lobatto_values(a, b, &values);
            // interpolate f' from the equation rather than differentiating the
            // value series, which amplifies node errors by ~degree^2 at the ends
            let slopes: Vec<F> =
                nodes.iter().map(|&u| -kf * delay_weight(u, n) * prev.eval(u - F::one())).collect();
            let deriv = ChebSeries::from_lobatto_values(a, b, &slopes);
            let residual = panel_residual(&series, &deriv, prev, k, n, a, config.probes);
            if residual <= tol {
                worst = worst.max(residual);
                panels.push(series);
                derivatives.push(deriv);
                break;
            }
            if degree * 2 > config.max_degree {
                return Err(Error::TolUnreachable {
                    context: format!("f(u; {k}, {m}) on panel ({}, {r}]", r - 1),
                    requested: tol.to_f64_lossy(),
                    achieved: residual.to_f64_lossy(),
                });
            }
            degree *= 2;
        }
    }

    Ok(PanelSolution { k, m, u_max, tol, panels, derivatives, achieved_residual: worst })
}

/// Max of `|f'(u) + k w(u) f(u-1)| / (1 + |f(u)|)` at midpoints between
/// Chebyshev points, which cluster toward the panel ends.
fn panel_residual<F: Real>(
    series: &ChebSeries<F>,
    deriv: &ChebSeries<F>,
    prev: &ChebSeries<F>,
    k: i64,
    n: i64,
    a: F,
    probes: usize,
) -> F {
    let kf = F::lit(k as f64);
    let grid = lobatto_points(probes + 1, a, a + F::one());
    grid.windows(2)
        .map(|w| {
            let u = (w[0] + w[1]) / F::lit(2.0);
            let lhs = deriv.eval(u) + kf * delay_weight(u, n) * prev.eval(u - F::one());
            lhs.abs() / (F::one() + series.eval(u).abs())
        })
        .fold(F::zero(), F::max)
}

impl<F: Real> PanelSolution<F> {
    pub fn k(&self) -> i64 {
        self.k
    }

    pub fn m(&self) -> i64 {
        self.m
    }

    pub fn u_max(&self) -> F {
        self.u_max
    }

    pub fn tol(&self) -> F {
        self.tol
    }

    /// Largest normalized residual observed while solving.
    pub fn achieved_residual(&self) -> F {
        self.achieved_residual
    }

    pub fn panels(&self) -> &[ChebSeries<F>] {
        &self.panels
    }

    fn panel_index(&self, u: F) -> Result<usize> {
        if u < F::zero() || u > self.u_max || u.is_nan() {
            return Err(Error::OutOfCoverage { value: u.to_f64_lossy(), limit: self.u_max.to_f64_lossy() });
        }
        if u <= F::one() {
            return Ok(0);
        }
        Ok(u.ceil().to_usize().expect("finite") - 1)
    }

    /// `f(u)` for `0 <= u <= U`; `f(0) = 1` by continuity.
    pub fn eval(&self, u: F) -> Result<F> {
        let i = self.panel_index(u)?;
        Ok(if i == 0 { F::one() } else { self.panels[i].eval(u) })
    }

    /// `f'(u)` from the panel series; one-sided (left) at integer knots.
    pub fn derivative(&self, u: F) -> Result<F> {
        let i = self.panel_index(u)?;
        Ok(if i == 0 { F::zero() } else { self.derivatives[i].eval(u) })
    }

    /// `u^{k+m+1} f'(u) + k (u-1)^{k+m} f(u-1)` for `u > 1`.
    pub fn dde_residual(&self, u: F) -> Result<F> {
        if u <= F::one() {
            return Ok(F::zero());
        }
        let n = (self.k + self.m) as i32;
        let lhs = u.powi(n + 1) * self.derivative(u)?;
        let rhs = F::lit(self.k as f64) * (u - F::one()).powi(n) * self.eval(u - F::one())?;
        Ok(lhs + rhs)
    }

    /// Largest jump `|f(r^-) - f(r^+)|` across interior integer knots.
    pub fn knot_jump(&self) -> F {
        (1..self.panels.len())
            .map(|i| {
                let knot = F::from_usize_lossy(i);
                let left = if i == 1 { F::one() } else { self.panels[i - 1].eval(knot) };
                (left - self.panels[i].eval(knot)).abs()
            })
            .fold(F::zero(), F::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// `1 - k ∫_1^u (v-1)^n v^{-n-1} dv` by binomial expansion.
    fn first_panel_closed_form(k: i64, m: i64, u: f64) -> f64 {
        let n = k + m;
        let mut integral = 0.0;
        let mut binom = 1.0;
        for j in 0..=n {
            if j > 0 {
                binom = binom * (n - j + 1) as f64 / j as f64;
            }
            let sign = if (n - j) % 2 == 0 { 1.0 } else { -1.0 };
            let e = j - n; // integrand term v^{j-n-1}
            let piece = if e == 0 { u.ln() } else { (u.powi(e as i32) - 1.0) / e as f64 };
            integral += sign * binom * piece;
        }
        1.0 - k as f64 * integral
    }

    #[test]
    fn initial_segment_is_one() {
        let f = solve_f::<f64>(3, 5, 4.0, 1e-10).unwrap();
        assert_eq!(f.eval(0.7).unwrap(), 1.0);
        assert_eq!(f.eval(1.0).unwrap(), 1.0);
        assert_eq!(f.eval(0.0).unwrap(), 1.0);
        assert_abs_diff_eq!(f.eval(1.0 + 1e-12).unwrap(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn closed_forms_on_second_panel() {
        let f = solve_f::<f64>(1, 1, 3.0, 1e-10).unwrap();
        assert_abs_diff_eq!(f.eval(2.0).unwrap(), 1.625 - 2f64.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(
            f.eval(1.5).unwrap(),
            2.5 - 1.5f64.ln() - 4.0 / 3.0 + 2.0 / 9.0,
            epsilon = 1e-12
        );
        let g = solve_f::<f64>(-1, 2, 2.0, 1e-10).unwrap();
        assert_abs_diff_eq!(g.eval(2.0).unwrap(), 2f64.ln() + 0.5, epsilon = 1e-12);
        for (k, m) in [(1, 1), (1, 2), (-1, 2), (2, 3), (-2, 4)] {
            let f = solve_f::<f64>(k, m, 2.0, 1e-10).unwrap();
            for i in 0..=20 {
                let u = 1.0 + i as f64 / 20.0;
                assert_abs_diff_eq!(f.eval(u).unwrap(), first_panel_closed_form(k, m, u), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn parameter_checks() {
        assert!(solve_f::<f64>(-2, 2, 3.0, 1e-8).is_err());
        assert!(solve_f::<f64>(1, 0, 3.0, 1e-8).is_err());
        assert!(solve_f::<f64>(1, 1, 0.5, 1e-8).is_err());
        assert!(solve_f::<f64>(1, 1, 2.0, 0.0).is_err());
        let f = solve_f::<f64>(1, 1, 2.5, 1e-8).unwrap();
        assert!(matches!(f.eval(2.6), Err(Error::OutOfCoverage { .. })));
        assert!(f.eval(-0.1).is_err());
    }

    #[test]
    fn continuity_and_sign_of_derivative() {
        for (k, m) in [(1, 1), (3, 2), (-2, 4), (-5, 9)] {
            let f = solve_f::<f64>(k, m, 6.0, 1e-10).unwrap();
            assert!(f.knot_jump() < 1e-10, "({k},{m}) jump {}", f.knot_jump());
            for i in 1..500 {
                let u = 1.0 + i as f64 * 0.01;
                if f.eval(u - 1.0).unwrap() >= 0.0 {
                    let d = f.derivative(u).unwrap();
                    assert!(if k > 0 { d <= 1e-12 } else { d >= -1e-12 });
                }
            }
        }
    }

    #[test]
    fn large_exponent_in_log_space() {
        let f = solve_f::<f64>(-50, 60, 5.0, 1e-9).unwrap();
        assert!(f.eval(5.0).unwrap().is_finite());
        assert!(f.eval(5.0).unwrap() > 1.0);
        let g = solve_f::<f64>(400, 30, 3.0, 1e-9).unwrap();
        assert!(g.eval(3.0).unwrap().is_finite());
    }

    #[test]
    fn single_precision() {
        let f = solve_f::<f32>(1, 1, 2.0, 1e-4).unwrap();
        assert!((f.eval(2.0).unwrap() - (1.625 - std::f32::consts::LN_2)).abs() < 1e-5);
    }

    #[test]
    fn zero_k_is_constant() {
        let f = solve_f::<f64>(0, 3, 4.0, 1e-10).unwrap();
        assert_abs_diff_eq!(f.eval(3.7).unwrap(), 1.0, epsilon = 1e-14);
    }
}
