//! Admissible tuples and the asymptotic coefficient of the smoothed GPY sieve
//!
//! ```text
//! C(k, m, θ, δ) = (kθ/2) I_{k-1}(1, u) - I_k(1, u),    u = θ / (2δ)
//! ```
//!
//! Positive `C` means the weighted sum detects two primes in the tuple,
//! conditional on the level-of-distribution hypothesis EH(θ, δ). That
//! hypothesis is only recorded as a label on reports.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::iterints::{build_table, SieveKernel};
use crate::multfun::{a_normalization, EulerProduct, MultFuncSpec};
use crate::primes::{generate_primes, is_prime_u64};
use crate::scalar::ln_factorial;

/// Label attached to every coefficient report.
pub const ASSUMPTION: &str = "EH(theta,delta)";

/// Reports with `k` above this are flagged experimental.
pub const DESK_SCALE_K: u32 = 100;

/// Offsets `h_1 < h_2 < ... < h_k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TupleSpec {
    offsets: Vec<i64>,
}

impl TupleSpec {
    pub fn new(offsets: Vec<i64>) -> Result<Self> {
        if offsets.is_empty() {
            return Err(Error::param("tuple needs at least one offset"));
        }
        if offsets.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::param("tuple offsets must be strictly increasing"));
        }
        Ok(Self { offsets })
    }

    pub fn offsets(&self) -> &[i64] {
        &self.offsets
    }

    pub fn k(&self) -> usize {
        self.offsets.len()
    }

    pub fn diameter(&self) -> u64 {
        (self.offsets[self.offsets.len() - 1] - self.offsets[0]) as u64
    }

    pub fn offsets_csv(&self) -> String {
        self.offsets.iter().map(|h| h.to_string()).collect::<Vec<_>>().join(",")
    }

    /// Number of distinct residues `-h_i mod p`.
    pub fn nu_p(&self, p: u64) -> usize {
        let pi = p as i64;
        let mut r: Vec<i64> = self.offsets.iter().map(|h| (-h).rem_euclid(pi)).collect();
        r.sort_unstable();
        r.dedup();
        r.len()
    }
}

/// `nu_p < p` for every prime `p <= k`.
pub fn is_admissible(tuple: &TupleSpec) -> bool {
    let k = tuple.k() as u64;
    generate_primes(k).primes().iter().all(|&p| (tuple.nu_p(p) as u64) < p)
}

/// The first `k` primes greater than `k`, shifted to start at 0.
pub fn first_k_tuple(k: usize) -> Result<TupleSpec> {
    if k == 0 {
        return Err(Error::param("k must be at least 1"));
    }
    let mut primes = Vec::with_capacity(k);
    let mut n = k as u64 + 1;
    while primes.len() < k {
        if is_prime_u64(n) {
            primes.push(n as i64);
        }
        n += 1;
    }
    let first = primes[0];
    let tuple = TupleSpec::new(primes.into_iter().map(|p| p - first).collect())?;
    debug_assert!(is_admissible(&tuple));
    Ok(tuple)
}

/// `prod_p (1 - nu_p/p)(1 - 1/p)^{-k}`; exactly 0 for inadmissible tuples.
pub fn tuple_singular_series(tuple: &TupleSpec, tol: f64) -> Result<EulerProduct> {
    a_normalization(&MultFuncSpec::nu_over_p(tuple), tol)
}

/// Sieve parameters `(k, m, θ, δ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SieveParams {
    pub k: u32,
    pub m: u32,
    pub theta: f64,
    pub delta: f64,
}

impl SieveParams {
    /// Requires `2 <= k < m`, `θ` in `(0, 1]` and `δ > 0`. `δ > θ/2` is
    /// accepted and gives `u < 1`, where the smoothing is inactive.
    pub fn new(k: u32, m: u32, theta: f64, delta: f64) -> Result<Self> {
        if k < 2 {
            return Err(Error::param(format!("k must be at least 2, got {k}")));
        }
        if m <= k {
            return Err(Error::param(format!("m must exceed k, got k = {k}, m = {m}")));
        }
        if !(theta > 0.0 && theta <= 1.0) {
            return Err(Error::param(format!("theta must lie in (0, 1], got {theta}")));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::param(format!("delta must be positive, got {delta}")));
        }
        Ok(Self { k, m, theta, delta })
    }

    /// Parameters with `u` held fixed: `δ = θ / (2u)`.
    pub fn with_u(k: u32, m: u32, theta: f64, u: f64) -> Result<Self> {
        if !(u > 0.0 && u.is_finite()) {
            return Err(Error::param(format!("u must be positive, got {u}")));
        }
        Self::new(k, m, theta, theta / (2.0 * u))
    }

    pub fn u(&self) -> f64 {
        self.theta / (2.0 * self.delta)
    }

    pub fn l(&self) -> u32 {
        self.m - self.k
    }
}

/// Both summands of the coefficient with cancellation diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZhangReport {
    pub params: SieveParams,
    pub u: f64,
    /// `I_k(1, u)`; may be infinite for very large `k`, see `ln_i_k`.
    pub i_k: f64,
    pub i_km1: f64,
    pub ln_i_k: f64,
    pub ln_i_km1: f64,
    /// `(kθ/2) I_{k-1}(1, u)`.
    pub first_term: f64,
    pub coefficient: f64,
    /// `C / I_k(1, u)`, computed from the log ratio.
    pub margin: f64,
    /// `|C| / max(first_term, I_k)`; small values mean the difference lost digits.
    pub cancellation: f64,
    /// Worst table error estimate, relative to each table's scale.
    pub table_error: f64,
    pub experimental: bool,
    pub assumption: &'static str,
}

impl ZhangReport {
    pub fn sign(&self) -> i8 {
        if self.margin > 0.0 {
            1
        } else if self.margin < 0.0 {
            -1
        } else {
            0
        }
    }
}

/// `ln I_s(1, u)` with its table error estimate.
fn ln_i_at_one(s: u32, m: u32, u: f64, tol: f64) -> Result<(f64, f64)> {
    let dde_tol = (tol * 1e-2).max(1e-13);
    let kernel = SieveKernel::<f64>::new(s, m, u, dde_tol)?;
    if u <= 1.0 {
        return Ok((kernel.ln_i_base(1.0), 0.0));
    }
    let table = build_table(&kernel, u, 33, tol)?;
    Ok((table.ln_eval(1.0, u)?, table.error_estimate()))
}

fn assemble(params: SieveParams, (ln_i_k, err_k): (f64, f64), (ln_i_km1, err_km1): (f64, f64)) -> ZhangReport {
    let ln_first = (params.k as f64 * params.theta / 2.0).ln() + ln_i_km1;
    let r = ln_first - ln_i_k;
    let margin = r.exp_m1();
    let i_k = ln_i_k.exp();
    let first_term = ln_first.exp();
    ZhangReport {
        params,
        u: params.u(),
        i_k,
        i_km1: ln_i_km1.exp(),
        ln_i_k,
        ln_i_km1,
        first_term,
        coefficient: i_k * margin,
        margin,
        cancellation: margin.abs() / r.exp().max(1.0),
        table_error: err_k.max(err_km1),
        experimental: params.k > DESK_SCALE_K,
        assumption: ASSUMPTION,
    }
}

/// `C = (kθ/2) I_{k-1}(1, u) - I_k(1, u)`, both kernels sharing `u`.
pub fn zhang_coefficient(params: &SieveParams, tol: f64) -> Result<ZhangReport> {
    if !(tol > 0.0) {
        return Err(Error::param("tolerance must be positive"));
    }
    let u = params.u();
    let (a, b) = rayon::join(
        || ln_i_at_one(params.k, params.m, u, tol),
        || ln_i_at_one(params.k - 1, params.m, u, tol),
    );
    Ok(assemble(*params, a?, b?))
}

/// Outcome of one `(k, m)` scan cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ScanCell {
    Ok { k: u32, m: u32, report: ZhangReport },
    Rejected { k: u32, m: u32, reason: String },
    Failed { k: u32, m: u32, reason: String },
}

impl ScanCell {
    pub fn km(&self) -> (u32, u32) {
        match self {
            ScanCell::Ok { k, m, .. } | ScanCell::Rejected { k, m, .. } | ScanCell::Failed { k, m, .. } => (*k, *m),
        }
    }
}

/// Every `(k, m)` cell in row-major order. Cells with `m <= k` (or `k < 2`)
/// are rejected; tolerance failures are recorded per cell.
pub fn scan(
    k_range: std::ops::RangeInclusive<u32>,
    m_range: std::ops::RangeInclusive<u32>,
    theta: f64,
    delta: f64,
    tol: f64,
) -> Result<Vec<ScanCell>> {
    if !(tol > 0.0) {
        return Err(Error::param("tolerance must be positive"));
    }
    SieveParams::new(2, 3, theta, delta)?;
    let u = theta / (2.0 * delta);
    let cells: Vec<(u32, u32)> =
        k_range.clone().flat_map(|k| m_range.clone().map(move |m| (k, m))).collect();

    // tables for (s, m) are shared between cells (s, m) and (s + 1, m)
    let mut needed: BTreeMap<(u32, u32), ()> = BTreeMap::new();
    for &(k, m) in &cells {
        if k >= 2 && m > k {
            needed.insert((k, m), ());
            needed.insert((k - 1, m), ());
        }
    }
    let keys: Vec<(u32, u32)> = needed.into_keys().collect();
    let values: Vec<std::result::Result<(f64, f64), Arc<Error>>> =
        keys.par_iter().map(|&(s, m)| ln_i_at_one(s, m, u, tol).map_err(Arc::new)).collect();
    let computed: BTreeMap<(u32, u32), _> = keys.into_iter().zip(values).collect();

    Ok(cells
        .into_iter()
        .map(|(k, m)| {
            let params = match SieveParams::new(k, m, theta, delta) {
                Ok(p) => p,
                Err(e) => return ScanCell::Rejected { k, m, reason: e.to_string() },
            };
            match (&computed[&(k, m)], &computed[&(k - 1, m)]) {
                (Ok(a), Ok(b)) => ScanCell::Ok { k, m, report: assemble(params, *a, *b) },
                (Err(e), _) | (_, Err(e)) => ScanCell::Failed { k, m, reason: e.to_string() },
            }
        })
        .collect())
}

/// Unsmoothed (`u <= 1`) threshold: `C > 0` iff `θ` exceeds
/// `(l+1)(2l+k+1) / (k(2l+1))` with `l = m - k`.
pub fn gpy_threshold(k: u32, l: u32) -> f64 {
    let (k, l) = (k as f64, l as f64);
    (l + 1.0) * (2.0 * l + k + 1.0) / (k * (2.0 * l + 1.0))
}

/// The same threshold as `2 I_k(1,1) / (k I_{k-1}(1,1))`, by quadrature.
pub fn gpy_threshold_numeric(k: u32, m: u32) -> Result<f64> {
    if k < 2 || m <= k {
        return Err(Error::param(format!("need 2 <= k < m, got k = {k}, m = {m}")));
    }
    let a = SieveKernel::<f64>::new(k, m, 1.0, 1e-12)?.ln_i_base(1.0);
    let b = SieveKernel::<f64>::new(k - 1, m, 1.0, 1e-12)?.ln_i_base(1.0);
    Ok(2.0 / k as f64 * (a - b).exp())
}

/// `min_l gpy_threshold(k, l)` over `l >= 1`, with the minimizing `l`.
pub fn min_gpy_threshold(k: u32) -> (u32, f64) {
    let mut best = (1, gpy_threshold(k, 1));
    let mut l = 2;
    loop {
        let t = gpy_threshold(k, l);
        if t >= best.1 {
            return best;
        }
        best = (l, t);
        l += 1;
    }
}

/// `ln` of the unsmoothed closed form `(m!)^2 (2m-2s)! / ((m-s)!^2 (2m-s)!)`.
pub fn ln_i_base_closed_form(s: u32, m: u32) -> f64 {
    let lf = |n: u32| ln_factorial(n as u64);
    2.0 * lf(m) + lf(2 * (m - s)) - 2.0 * lf(m - s) - lf(2 * m - s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn t(v: &[i64]) -> TupleSpec {
        TupleSpec::new(v.to_vec()).unwrap()
    }

    #[test]
    fn nu_p_examples() {
        assert_eq!(t(&[0, 2]).nu_p(2), 1);
        assert_eq!(t(&[0, 2, 6]).nu_p(5), 3);
        assert_eq!(t(&[0, 2, 6]).nu_p(7), 3);
    }

    #[test]
    fn admissibility() {
        assert!(is_admissible(&t(&[0, 2, 6])));
        assert!(!is_admissible(&t(&[0, 2, 4])));
        assert!(is_admissible(&t(&[0])));
        assert!(TupleSpec::new(vec![]).is_err());
        assert!(TupleSpec::new(vec![0, 0]).is_err());
    }

    #[test]
    fn first_k_examples() {
        assert_eq!(first_k_tuple(1).unwrap().offsets(), &[0]);
        assert_eq!(first_k_tuple(2).unwrap().offsets(), &[0, 2]);
        assert_eq!(first_k_tuple(3).unwrap().offsets(), &[0, 2, 6]);
        let five = first_k_tuple(5).unwrap();
        assert_eq!(five.offsets(), &[0, 4, 6, 10, 12]);
        assert!(is_admissible(&five));
        for k in 1..60 {
            assert!(is_admissible(&first_k_tuple(k).unwrap()));
        }
    }

    #[test]
    fn tuple_series_examples() {
        assert_relative_eq!(tuple_singular_series(&t(&[0, 2]), 1e-9).unwrap().value, 1.320323631693739, max_relative = 1e-7);
        assert_eq!(tuple_singular_series(&t(&[0, 2, 4]), 1e-9).unwrap().value, 0.0);
        assert_relative_eq!(tuple_singular_series(&t(&[0]), 1e-9).unwrap().value, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn params_validation() {
        assert!(SieveParams::new(1, 3, 0.5, 0.1).is_err());
        assert!(SieveParams::new(3, 3, 0.5, 0.1).is_err());
        assert!(SieveParams::new(3, 4, 0.0, 0.1).is_err());
        assert!(SieveParams::new(3, 4, 1.1, 0.1).is_err());
        assert!(SieveParams::new(3, 4, 0.5, 0.0).is_err());
        assert_relative_eq!(SieveParams::new(10, 14, 0.95, 0.05).unwrap().u(), 9.5, max_relative = 1e-15);
    }

    #[test]
    fn unsmoothed_threshold_matches_quadrature() {
        for (k, l) in [(2, 1), (6, 1), (10, 2), (20, 3)] {
            assert_relative_eq!(gpy_threshold_numeric(k, k + l).unwrap(), gpy_threshold(k, l), max_relative = 1e-11);
        }
        let (l, th) = min_gpy_threshold(10_000);
        assert!(th < 0.55 && th > 0.5, "{l} {th}");
    }

    #[test]
    fn coefficient_sign_small_theta() {
        let r = zhang_coefficient(&SieveParams::with_u(3, 5, 1e-3, 1.0).unwrap(), 1e-8).unwrap();
        assert!(r.coefficient < 0.0);
        assert_eq!(r.assumption, ASSUMPTION);
        assert!(!r.experimental);
    }

    #[test]
    fn scan_rejects_low_m() {
        let cells = scan(2..=3, 2..=4, 0.9, 0.45, 1e-6).unwrap();
        let km: Vec<_> = cells.iter().map(|c| c.km()).collect();
        assert_eq!(km, vec![(2, 2), (2, 3), (2, 4), (3, 2), (3, 3), (3, 4)]);
        assert!(matches!(cells[0], ScanCell::Rejected { .. }));
        assert!(matches!(cells[1], ScanCell::Ok { .. }));
        assert!(matches!(cells[4], ScanCell::Rejected { .. }));
    }
}
