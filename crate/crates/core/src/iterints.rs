//! Iterated sieve integrals
//!
//! ```text
//! I_s(t, v) = ∫_0^1 (1-x)^{s-1}/(s-1)! [f(u x t; -s, m) P^{(s)}(x t)]^2 dx,    0 < v <= 1
//! I_s(t, v) = I_s(t, 1) - s ∫_1^v I_s((1 - 1/x) t, x - 1) (1 - 1/x)^s dx / x,  v > 1
//! ```
//!
//! with `P(y) = y^m`, so `P^{(s)}(y) = m!/(m-s)! y^{m-s}`. The global `u`
//! stays fixed inside `f` while `v` varies.
//!
//! Values are stored scaled by `e^{-L}`, where `L` collects the factorial
//! prefactor and the peak of `(1-x)^{s-1} x^{2(m-s)}`, so large `s` and `m`
//! stay in range. Table tolerances are relative to `I_s(1, 1)`.

use std::sync::Arc;

use rayon::prelude::*;

use crate::chebyshev::Barycentric;
use crate::dde::{solve_f, PanelSolution};
use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use crate::scalar::{ln_factorial, ln_falling_factorial, KahanSum, Real};

/// The integrand data shared by `I_s(t, ·)` for one `(s, m, u)`.
#[derive(Debug, Clone)]
pub struct SieveKernel<F> {
    s: u32,
    m: u32,
    u: F,
    f: Arc<PanelSolution<F>>,
    log_scale: f64,
    ln_peak: F,
    peak_x: F,
    peak_width: F,
    quad: GaussLegendre<F>,
}

impl<F: Real> SieveKernel<F> {
    /// Solves `f(·; -s, m)` on `(0, max(u, 1)]` to `tol`.
    pub fn new(s: u32, m: u32, u: F, tol: F) -> Result<Self> {
        if s == 0 || m <= s {
            return Err(Error::param(format!("kernel needs 1 <= s < m, got s = {s}, m = {m}")));
        }
        if !(u > F::zero()) || !u.is_finite() {
            return Err(Error::param(format!("u must be positive, got {u}")));
        }
        let f = solve_f(-(s as i64), m as i64, u.max(F::one()), tol)?;
        Self::with_solution(s, m, u, Arc::new(f))
    }

    pub fn with_solution(s: u32, m: u32, u: F, f: Arc<PanelSolution<F>>) -> Result<Self> {
        if s == 0 || m <= s {
            return Err(Error::param(format!("kernel needs 1 <= s < m, got s = {s}, m = {m}")));
        }
        if f.k() != -(s as i64) || f.m() != m as i64 || f.u_max() < u {
            return Err(Error::param("f solution does not match (-s, m) or does not cover u"));
        }
        let l2 = 2.0 * (m - s) as f64;
        let sm1 = (s - 1) as f64;
        let (peak_x, ln_peak) = if s == 1 {
            (1.0, 0.0)
        } else {
            let x = l2 / (sm1 + l2);
            (x, sm1 * (-x).ln_1p() + l2 * x.ln())
        };
        let peak_width = (peak_x * (1.0 - peak_x) / (sm1 + l2 + 1.0)).sqrt().max(1e-300);
        let log_scale =
            2.0 * ln_falling_factorial(m as u64, s as u64) - ln_factorial(s as u64 - 1) + ln_peak;
        Ok(Self {
            s,
            m,
            u,
            f,
            log_scale,
            ln_peak: F::lit(ln_peak),
            peak_x: F::lit(peak_x),
            peak_width: F::lit(peak_width),
            quad: GaussLegendre::new(16),
        })
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn u(&self) -> F {
        self.u
    }

    pub fn f_solution(&self) -> &PanelSolution<F> {
        &self.f
    }

    /// `L` with `I = scaled * e^L`.
    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    fn integrand(&self, x: F, t: F) -> F {
        let one = F::one();
        if x <= F::zero() || x >= one && self.s > 1 {
            return F::zero();
        }
        let l2 = F::lit(2.0 * (self.m - self.s) as f64);
        let mut log = l2 * (x * t).ln() - self.ln_peak;
        if self.s > 1 {
            log += F::lit((self.s - 1) as f64) * (-x).ln_1p();
        }
        let fv = self.f.eval(self.u * x * t).expect("argument within coverage");
        log.exp() * fv * fv
    }

    /// Breakpoints: kinks of `f(u x t)` at integer arguments and a ladder
    /// around the peak of the polynomial factor.
    fn breakpoints(&self, t: F) -> Vec<F> {
        let one = F::one();
        let mut b = vec![F::zero(), one];
        let ut = self.u * t;
        let mut j = 1usize;
        while F::from_usize_lossy(j) < ut {
            b.push(F::from_usize_lossy(j) / ut);
            j += 1;
        }
        for c in [0.0, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0] {
            for sign in [-1.0, 1.0] {
                let p = self.peak_x + F::lit(sign * c) * self.peak_width;
                if p > F::zero() && p < one {
                    b.push(p);
                }
            }
        }
        for i in 1..8 {
            b.push(F::lit(i as f64 / 8.0));
        }
        b.sort_by(|a, c| a.partial_cmp(c).expect("finite breakpoints"));
        b.dedup();
        b
    }

    /// `I_s(t, 1) e^{-L}`.
    pub fn i_base_scaled(&self, t: F) -> F {
        if t <= F::zero() {
            return F::zero();
        }
        let breaks = self.breakpoints(t);
        let rough = self.quad.integrate_panels(&breaks, |x| self.integrand(x, t));
        if rough == F::zero() {
            return F::zero();
        }
        let tol = rough.abs() * F::lit(1e-13).max(F::epsilon() * F::lit(16.0));
        let mut acc = KahanSum::new();
        for w in breaks.windows(2) {
            let share = tol * (w[1] - w[0]);
            acc.add(self.quad.adaptive(w[0], w[1], share, 16, |x| self.integrand(x, t)));
        }
        acc.value()
    }

    /// `ln I_s(t, 1)`; finite even when `I` itself over- or underflows.
    pub fn ln_i_base(&self, t: F) -> f64 {
        self.i_base_scaled(t).to_f64_lossy().ln() + self.log_scale
    }
}

/// `I_s(t, 1)`, the base integral (equal to `I_s(t, v)` for all `0 < v <= 1`).
pub fn i_base<F: Real>(kernel: &SieveKernel<F>, t: F) -> F {
    kernel.i_base_scaled(t) * F::lit(kernel.log_scale.exp())
}

/// Grid sizes for [`build_table`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TableConfig {
    /// Chebyshev–Lobatto points in `t`; use `2^j + 1` so grids nest.
    pub n_t: usize,
    /// Chebyshev–Lobatto points in `v` per unit panel.
    pub n_v: usize,
    /// Gauss–Legendre nodes between consecutive `v` points.
    pub gap_nodes: usize,
    /// Refinement stops once `n_t` would exceed this.
    pub max_n_t: usize,
}

impl Default for TableConfig {
    fn default() -> Self {
        Self { n_t: 33, n_v: 17, gap_nodes: 8, max_n_t: 257 }
    }
}

#[derive(Debug, Clone)]
struct VPanel<F> {
    interp: Barycentric<F>,
    /// `values[j][i] = I(t_i, v_j) e^{-L}`.
    values: Vec<Vec<F>>,
}

#[derive(Debug, Clone)]
struct Grid<F> {
    n_t: usize,
    n_v: usize,
    t_interp: Barycentric<F>,
    base: Vec<F>,
    panels: Vec<VPanel<F>>,
}

/// Tabulated `I_s(t, v)` on `[0, 1] x (0, v_max]`, built by marching `v` one
/// unit panel at a time.
#[derive(Debug, Clone)]
pub struct ITable<F> {
    kernel: SieveKernel<F>,
    v_max: F,
    grid: Grid<F>,
    error_estimate: F,
    tol: F,
}

/// Builds the table, refining `n_t` (and `n_v`) until the nested
/// coarse/fine comparison is below `tol` relative to `I_s(1, 1)`.
pub fn build_table<F: Real>(kernel: &SieveKernel<F>, v_max: F, n_t: usize, tol: F) -> Result<ITable<F>> {
    build_table_with(kernel, v_max, tol, TableConfig { n_t, ..TableConfig::default() })
}

pub fn build_table_with<F: Real>(
    kernel: &SieveKernel<F>,
    v_max: F,
    tol: F,
    config: TableConfig,
) -> Result<ITable<F>> {
    if !(v_max >= F::one()) || !v_max.is_finite() {
        return Err(Error::param(format!("v_max must be >= 1, got {v_max}")));
    }
    if !(tol > F::zero()) {
        return Err(Error::param("tolerance must be positive"));
    }
    if config.n_t < 3 || config.n_v < 3 || config.gap_nodes == 0 {
        return Err(Error::param("table needs n_t >= 3, n_v >= 3, gap_nodes >= 1"));
    }
    let coarse_n = |n: usize| (n - 1) / 2 + 1;
    let mut coarse = build_grid(kernel, v_max, coarse_n(config.n_t), coarse_n(config.n_v), config.gap_nodes);
    let mut n_t = config.n_t;
    let mut n_v = config.n_v;
    loop {
        let fine = build_grid(kernel, v_max, n_t, n_v, config.gap_nodes);
        let estimate = compare_grids(&coarse, &fine);
        if estimate <= tol {
            return Ok(ITable { kernel: kernel.clone(), v_max, grid: fine, error_estimate: estimate, tol });
        }
        if 2 * (n_t - 1) + 1 > config.max_n_t {
            return Err(Error::TolUnreachable {
                context: format!("I_{} table (m = {}, u = {}) at n_t = {n_t}", kernel.s, kernel.m, kernel.u),
                requested: tol.to_f64_lossy(),
                achieved: estimate.to_f64_lossy(),
            });
        }
        coarse = fine;
        n_t = 2 * (n_t - 1) + 1;
        n_v = 2 * (n_v - 1) + 1;
    }
}

fn panel_count<F: Real>(v_max: F) -> usize {
    v_max.ceil().to_usize().expect("finite v_max").saturating_sub(1)
}

fn build_grid<F: Real>(kernel: &SieveKernel<F>, v_max: F, n_t: usize, n_v: usize, gap_nodes: usize) -> Grid<F> {
    let one = F::one();
    let t_interp = Barycentric::lobatto(n_t, F::zero(), one);
    let base: Vec<F> = t_interp.nodes().par_iter().map(|&t| kernel.i_base_scaled(t)).collect();
    let gl = GaussLegendre::<F>::new(gap_nodes);
    let s = F::lit(kernel.s as f64);
    let mut panels: Vec<VPanel<F>> = Vec::new();

    for r in 1..=panel_count(v_max) {
        let lo = F::from_usize_lossy(r);
        let interp = Barycentric::lobatto(n_v, lo, lo + one);
        let start = match panels.last() {
            None => base.clone(),
            Some(prev) => prev.values.last().expect("panel values").clone(),
        };
        // inner columns I(t_grid, x - 1) at every quadrature abscissa
        let mut abscissae: Vec<Vec<(F, F)>> = Vec::with_capacity(n_v - 1);
        let mut columns: Vec<Vec<Vec<F>>> = Vec::with_capacity(n_v - 1);
        for pair in interp.nodes().windows(2) {
            let pts: Vec<(F, F)> = gl.mapped(pair[0], pair[1]).collect();
            let cols = pts
                .iter()
                .map(|&(x, _)| match panels.last() {
                    None => base.clone(),
                    Some(prev) => {
                        let basis = prev.interp.basis(x - one);
                        (0..n_t)
                            .map(|i| {
                                basis
                                    .iter()
                                    .zip(&prev.values)
                                    .fold(F::zero(), |acc, (&b, row)| acc + b * row[i])
                            })
                            .collect()
                    }
                })
                .collect();
            abscissae.push(pts);
            columns.push(cols);
        }
        let t_nodes = t_interp.nodes();
        let per_t: Vec<Vec<F>> = (0..n_t)
            .into_par_iter()
            .map(|i| {
                let t = t_nodes[i];
                let mut out = Vec::with_capacity(n_v);
                out.push(start[i]);
                let mut acc = KahanSum::<F>::new();
                for (pts, cols) in abscissae.iter().zip(&columns) {
                    for (&(x, w), col) in pts.iter().zip(cols) {
                        let shrink = one - one / x;
                        let inner = t_interp.eval(col, shrink * t);
                        acc.add(w * inner * shrink.powi(kernel.s as i32) / x);
                    }
                    out.push(start[i] - s * acc.value());
                }
                out
            })
            .collect();
        let values = (0..n_v).map(|j| (0..n_t).map(|i| per_t[i][j]).collect()).collect();
        panels.push(VPanel { interp, values });
    }
    Grid { n_t, n_v, t_interp, base, panels }
}

/// Max deviation of the coarse interpolant from the fine node values,
/// relative to the largest base value.
fn compare_grids<F: Real>(coarse: &Grid<F>, fine: &Grid<F>) -> F {
    let scale = fine.base.iter().fold(F::zero(), |m, v| m.max(v.abs()));
    if scale == F::zero() {
        return F::zero();
    }
    let mut worst = F::zero();
    for (i, &t) in fine.t_interp.nodes().iter().enumerate() {
        let c = coarse.t_interp.eval(&coarse.base, t);
        worst = worst.max((c - fine.base[i]).abs());
    }
    for (cp, fp) in coarse.panels.iter().zip(&fine.panels) {
        for (j, &v) in fp.interp.nodes().iter().enumerate() {
            let basis = cp.interp.basis(v);
            let col: Vec<F> = (0..coarse.n_t)
                .map(|i| basis.iter().zip(&cp.values).fold(F::zero(), |a, (&b, row)| a + b * row[i]))
                .collect();
            for (i, &t) in fine.t_interp.nodes().iter().enumerate() {
                let c = coarse.t_interp.eval(&col, t);
                worst = worst.max((c - fp.values[j][i]).abs());
            }
        }
    }
    worst / scale
}

impl<F: Real> ITable<F> {
    pub fn kernel(&self) -> &SieveKernel<F> {
        &self.kernel
    }

    pub fn v_max(&self) -> F {
        self.v_max
    }

    pub fn n_t(&self) -> usize {
        self.grid.n_t
    }

    pub fn n_v(&self) -> usize {
        self.grid.n_v
    }

    pub fn tol(&self) -> F {
        self.tol
    }

    /// Coarse-vs-fine discrepancy relative to `I_s(1, 1)`.
    pub fn error_estimate(&self) -> F {
        self.error_estimate
    }

    /// Tabulated `(t_i, v_j, I e^{-L})`, base regime first (`v = 1`).
    pub fn nodes(&self) -> Vec<(F, F, F)> {
        let t = self.grid.t_interp.nodes();
        let mut out: Vec<(F, F, F)> = t.iter().zip(&self.grid.base).map(|(&t, &b)| (t, F::one(), b)).collect();
        for p in &self.grid.panels {
            for (j, &v) in p.interp.nodes().iter().enumerate().skip(1) {
                out.extend(t.iter().zip(&p.values[j]).map(|(&t, &val)| (t, v, val)));
            }
        }
        out
    }

    /// `I_s(t, v) e^{-L}`; exact base quadrature for `v <= 1`.
    pub fn eval_scaled(&self, t: F, v: F) -> Result<F> {
        if !(t >= F::zero() && t <= F::one()) {
            return Err(Error::OutOfCoverage { value: t.to_f64_lossy(), limit: 1.0 });
        }
        if !(v > F::zero() && v <= self.v_max) {
            return Err(Error::OutOfCoverage { value: v.to_f64_lossy(), limit: self.v_max.to_f64_lossy() });
        }
        if v <= F::one() {
            return Ok(self.kernel.i_base_scaled(t));
        }
        let r = v.ceil().to_usize().expect("finite v") - 1;
        let panel = &self.grid.panels[r - 1];
        let basis = panel.interp.basis(v);
        let col: Vec<F> = (0..self.grid.n_t)
            .map(|i| basis.iter().zip(&panel.values).fold(F::zero(), |a, (&b, row)| a + b * row[i]))
            .collect();
        Ok(self.grid.t_interp.eval(&col, t))
    }

    /// `I_s(t, v)`; may overflow for very large `s`, see [`ITable::ln_eval`].
    pub fn eval(&self, t: F, v: F) -> Result<F> {
        Ok(self.eval_scaled(t, v)? * F::lit(self.kernel.log_scale.exp()))
    }

    /// `ln I_s(t, v)`; `-inf` where the tabulated value is not positive.
    pub fn ln_eval(&self, t: F, v: F) -> Result<f64> {
        let scaled = self.eval_scaled(t, v)?.to_f64_lossy();
        Ok(if scaled > 0.0 { scaled.ln() + self.kernel.log_scale } else { f64::NEG_INFINITY })
    }
}

/// `I_s(t, v)` from a built table.
pub fn i_eval<F: Real>(table: &ITable<F>, t: F, v: F) -> Result<F> {
    table.eval(t, v)
}
