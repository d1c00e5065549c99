//! Multiplicative functions supported on squarefree integers, the weighted
//! sums `M_g(x, m, q)` and `M_g(x, m, q, z)`, and their Euler products.

use std::fmt;
use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::primes::{self, generate_primes, PrimeTable, SmoothEnumerator};
use crate::scalar::{KahanSum, Real};
use crate::zhang::TupleSpec;
use crate::Rational;

/// Range over which built-in tail bounds are checked at construction.
pub const TAIL_CHECK_LIMIT: u64 = 100_000;

/// Euler products stop doubling past this truncation point.
pub const MAX_EULER_TRUNCATION: u64 = 1 << 31;

fn check_primes() -> &'static PrimeTable {
    static TABLE: OnceLock<PrimeTable> = OnceLock::new();
    TABLE.get_or_init(|| generate_primes(TAIL_CHECK_LIMIT))
}

type PrimeFn = Arc<dyn Fn(u64) -> f64 + Send + Sync>;

/// How `g(p)` is computed.
#[derive(Clone)]
pub enum PrimeRule {
    KOverP(i64),
    OneOverN,
    OneOverPhi,
    TwoOmegaOverN,
    NuOverP(TupleSpec),
    NuMinus1OverPhi(TupleSpec),
    /// `p -> -g(p)`, the `mu(n) g(n)` twist.
    SignedMu(Box<PrimeRule>),
    Custom(PrimeFn),
}

impl fmt::Debug for PrimeRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PrimeRule::KOverP(k) => write!(f, "KOverP({k})"),
            PrimeRule::OneOverN => write!(f, "OneOverN"),
            PrimeRule::OneOverPhi => write!(f, "OneOverPhi"),
            PrimeRule::TwoOmegaOverN => write!(f, "TwoOmegaOverN"),
            PrimeRule::NuOverP(t) => write!(f, "NuOverP({:?})", t.offsets()),
            PrimeRule::NuMinus1OverPhi(t) => write!(f, "NuMinus1OverPhi({:?})", t.offsets()),
            PrimeRule::SignedMu(b) => write!(f, "SignedMu({b:?})"),
            PrimeRule::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl PrimeRule {
    /// `g(p)` as a reduced fraction, when rational.
    pub fn ratio(&self, p: u64) -> Option<(i64, u64)> {
        let (num, den): (i64, u64) = match self {
            PrimeRule::KOverP(k) => (*k, p),
            PrimeRule::OneOverN => (1, p),
            PrimeRule::OneOverPhi => (1, p - 1),
            PrimeRule::TwoOmegaOverN => (2, p),
            PrimeRule::NuOverP(t) => (t.nu_p(p) as i64, p),
            PrimeRule::NuMinus1OverPhi(t) => (t.nu_p(p) as i64 - 1, p - 1),
            PrimeRule::SignedMu(base) => {
                let (a, b) = base.ratio(p)?;
                (-a, b)
            }
            PrimeRule::Custom(_) => return None,
        };
        let g = num.unsigned_abs().gcd(&den).max(1);
        Some((num / g as i64, den / g))
    }

    pub fn value(&self, p: u64) -> f64 {
        match self {
            PrimeRule::Custom(f) => f(p),
            PrimeRule::SignedMu(base) => -base.value(p),
            _ => {
                let (a, b) = self.ratio(p).expect("built-in rules are rational");
                a as f64 / b as f64
            }
        }
    }
}

/// A multiplicative function supported on squarefree integers together with
/// the data describing `g(p) = k/p + O(p^{-1-theta})`.
#[derive(Debug, Clone)]
pub struct MultFuncSpec {
    name: String,
    rule: PrimeRule,
    dimension_k: i64,
    tail_theta: f64,
    tail_bound: Option<f64>,
    tail_cutoff: u64,
}

impl MultFuncSpec {
    fn checked(
        name: String,
        rule: PrimeRule,
        dimension_k: i64,
        tail_theta: f64,
        tail_bound: Option<f64>,
        tail_cutoff: u64,
    ) -> Result<Self> {
        let spec = Self { name, rule, dimension_k, tail_theta, tail_bound, tail_cutoff };
        if spec.tail_bound.is_some() {
            spec.verify_tail_bound()?;
        }
        Ok(spec)
    }

    /// User-supplied prime values. `tail` is `(c, cutoff)` meaning
    /// `|g(p) - k/p| <= c p^{-1-theta}` for `p > cutoff`; without it the
    /// Euler product cannot be certified.
    pub fn custom(
        name: impl Into<String>,
        dimension_k: i64,
        tail_theta: f64,
        tail: Option<(f64, u64)>,
        prime_value: impl Fn(u64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(tail_theta > 0.0) {
            return Err(Error::param("tail exponent theta must be positive"));
        }
        let (bound, cutoff) = match tail {
            Some((c, cut)) => (Some(c), cut),
            None => (None, 0),
        };
        Self::checked(
            name.into(),
            PrimeRule::Custom(Arc::new(prime_value)),
            dimension_k,
            tail_theta,
            bound,
            cutoff,
        )
    }

    pub fn k_over_p(k: i64) -> Self {
        Self::checked(format!("k_over_p({k})"), PrimeRule::KOverP(k), k, 1.0, Some(0.0), 0)
            .expect("exact k/p")
    }

    pub fn one_over_n() -> Self {
        Self::checked("one_over_n".into(), PrimeRule::OneOverN, 1, 1.0, Some(0.0), 0)
            .expect("exact 1/p")
    }

    pub fn one_over_phi() -> Self {
        // 1/(p-1) - 1/p = 1/(p(p-1)) <= 2/p^2
        Self::checked("one_over_phi".into(), PrimeRule::OneOverPhi, 1, 1.0, Some(2.0), 0)
            .expect("1/(p-1) bound")
    }

    pub fn two_omega_over_n() -> Self {
        Self::checked("two_omega_over_n".into(), PrimeRule::TwoOmegaOverN, 2, 1.0, Some(0.0), 0)
            .expect("exact 2/p")
    }

    /// `g(p) = nu_p / p`; equals `k/p` once `p` exceeds the tuple diameter.
    pub fn nu_over_p(tuple: &TupleSpec) -> Self {
        Self::checked(
            format!("nu_over_p({})", tuple.offsets_csv()),
            PrimeRule::NuOverP(tuple.clone()),
            tuple.k() as i64,
            1.0,
            Some(0.0),
            tuple.diameter(),
        )
        .expect("nu_p = k beyond the diameter")
    }

    /// `g(p) = (nu_p - 1) / (p - 1)`, dimension `k - 1`.
    pub fn nu_minus1_over_phi(tuple: &TupleSpec) -> Self {
        let k1 = tuple.k() as i64 - 1;
        Self::checked(
            format!("nu_minus1_over_phi({})", tuple.offsets_csv()),
            PrimeRule::NuMinus1OverPhi(tuple.clone()),
            k1,
            1.0,
            Some(2.0 * k1 as f64),
            tuple.diameter(),
        )
        .expect("(k-1)/(p-1) bound")
    }

    /// `p -> -g(p)`; dimension and tail data carry over with `k -> -k`.
    pub fn signed_mu_times(base: &MultFuncSpec) -> Self {
        Self {
            name: format!("signed_mu_times({})", base.name),
            rule: PrimeRule::SignedMu(Box::new(base.rule.clone())),
            dimension_k: -base.dimension_k,
            tail_theta: base.tail_theta,
            tail_bound: base.tail_bound,
            tail_cutoff: base.tail_cutoff,
        }
    }

    /// Parses `name` or `name(args)`: `one_over_n`, `one_over_phi`,
    /// `two_omega_over_n`, `k_over_p(2)`, `nu_over_p(0,2,6)`,
    /// `nu_minus1_over_phi(0,2)`, `signed_mu_times(one_over_n)`.
    pub fn builtin(text: &str) -> Result<Self> {
        let text = text.trim();
        let (name, args) = match text.find('(') {
            Some(i) if text.ends_with(')') => (&text[..i], Some(&text[i + 1..text.len() - 1])),
            Some(_) => return Err(Error::UnknownSpec(text.into())),
            None => (text, None),
        };
        let tuple_arg = |args: Option<&str>| -> Result<TupleSpec> {
            let args = args.ok_or_else(|| Error::param(format!("{name} needs offsets")))?;
            let offsets = args
                .split(',')
                .map(|s| s.trim().parse::<i64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::param(format!("bad offset in {text}: {e}")))?;
            TupleSpec::new(offsets)
        };
        match (name.trim(), args) {
            ("one_over_n", None) => Ok(Self::one_over_n()),
            ("one_over_phi", None) => Ok(Self::one_over_phi()),
            ("two_omega_over_n", None) => Ok(Self::two_omega_over_n()),
            ("k_over_p", Some(a)) => {
                let k = a.trim().parse().map_err(|_| Error::param(format!("bad k in {text}")))?;
                Ok(Self::k_over_p(k))
            }
            ("nu_over_p", a) => Ok(Self::nu_over_p(&tuple_arg(a)?)),
            ("nu_minus1_over_phi", a) => Ok(Self::nu_minus1_over_phi(&tuple_arg(a)?)),
            ("signed_mu_times", Some(inner)) => Ok(Self::signed_mu_times(&Self::builtin(inner)?)),
            _ => Err(Error::UnknownSpec(text.into())),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn rule(&self) -> &PrimeRule {
        &self.rule
    }

    pub fn dimension_k(&self) -> i64 {
        self.dimension_k
    }

    pub fn tail_theta(&self) -> f64 {
        self.tail_theta
    }

    pub fn tail_bound(&self) -> Option<f64> {
        self.tail_bound
    }

    pub fn tail_cutoff(&self) -> u64 {
        self.tail_cutoff
    }

    #[inline]
    pub fn prime_value(&self, p: u64) -> f64 {
        self.rule.value(p)
    }

    pub fn prime_ratio(&self, p: u64) -> Option<(i64, u64)> {
        self.rule.ratio(p)
    }

    pub fn is_rational(&self) -> bool {
        self.rule.ratio(2).is_some()
    }

    /// `g(n)` for squarefree `n` given its prime factors.
    pub fn value_at(&self, n: &primes::FactoredInt) -> f64 {
        n.factors().iter().map(|&p| self.prime_value(p)).product()
    }

    fn verify_tail_bound(&self) -> Result<()> {
        let Some(c) = self.tail_bound else { return Ok(()) };
        let k = self.dimension_k as f64;
        for &p in check_primes().primes() {
            if p <= self.tail_cutoff {
                continue;
            }
            let pf = p as f64;
            let dev = (self.prime_value(p) - k / pf).abs();
            let allowed = c * pf.powf(-1.0 - self.tail_theta);
            if dev > allowed * (1.0 + 1e-9) + 1e-300 + 4.0 * f64::EPSILON * (k.abs() / pf) {
                return Err(Error::TailBoundViolated { name: self.name.clone(), prime: p });
            }
        }
        Ok(())
    }
}

/// Value of a weighted sum, with the exact rational when requested.
#[derive(Debug, Clone, PartialEq)]
pub struct SumResult<F> {
    pub value: F,
    pub exact_value: Option<Rational>,
    pub terms: u64,
}

fn table_for(x: f64, z: f64) -> Result<PrimeTable> {
    let bound = primes::floor_bound(x)?;
    let limit = if z.is_finite() && z < bound as f64 { z.ceil() as u64 } else { bound };
    Ok(generate_primes(limit))
}

/// `M_g(x, m, q) = sum_{n <= x, (n, q) = 1} g(n) (log x/n)^m` over squarefree `n`.
pub fn m_sum<F: Real>(spec: &MultFuncSpec, x: f64, m: u32, q: u64) -> Result<SumResult<F>> {
    m_sum_smooth(spec, x, m, q, f64::INFINITY)
}

/// `M_g(x, m, q, z)`: as [`m_sum`] restricted to `n` with all prime factors `< z`.
pub fn m_sum_smooth<F: Real>(
    spec: &MultFuncSpec,
    x: f64,
    m: u32,
    q: u64,
    z: f64,
) -> Result<SumResult<F>> {
    let table = table_for(x, z)?;
    m_sum_smooth_in(&table, spec, x, m, q, z)
}

/// As [`m_sum_smooth`] using a caller-provided prime table.
pub fn m_sum_smooth_in<F: Real>(
    table: &PrimeTable,
    spec: &MultFuncSpec,
    x: f64,
    m: u32,
    q: u64,
    z: f64,
) -> Result<SumResult<F>> {
    let en = SmoothEnumerator::new(table, x, z, q)?;
    Ok(sum_over(&en, spec, x, m))
}

fn sum_over<F: Real>(en: &SmoothEnumerator, spec: &MultFuncSpec, x: f64, m: u32) -> SumResult<F> {
    let xf = F::lit(x);
    let weights: Vec<F> = en.primes().iter().map(|&p| F::lit(spec.prime_value(p))).collect();
    let mut acc = KahanSum::<F>::new();
    let mut terms = 0u64;
    en.fold(
        F::one(),
        &|g: &F, i: usize| *g * weights[i],
        &mut |n, g| {
            terms += 1;
            let w = if m == 0 {
                F::one()
            } else {
                (xf / F::from_u64(n).expect("u64 to float")).ln().powi(m as i32)
            };
            acc.add(*g * w);
        },
    );
    SumResult { value: acc.value(), exact_value: None, terms }
}

/// `M_g(x, 0, q, z)` in exact rational arithmetic, alongside the float value.
///
/// All prime weights are put over the common denominator `D = prod b_p`;
/// the depth-first walk then carries the integer `D g(n)`, so each node
/// costs one big-by-small division and multiplication.
pub fn m_sum_exact(spec: &MultFuncSpec, x: f64, q: u64, z: f64) -> Result<SumResult<f64>> {
    let table = table_for(x, z)?;
    let en = SmoothEnumerator::new(&table, x, z, q)?;
    let ratios = en
        .primes()
        .iter()
        .map(|&p| {
            spec.prime_ratio(p)
                .ok_or_else(|| Error::param(format!("spec `{}` is not rational-valued", spec.name())))
        })
        .collect::<Result<Vec<_>>>()?;
    let denom: BigInt = ratios.iter().fold(BigInt::from(1u32), |d, &(_, b)| d * b);
    let mut total = BigInt::zero();
    en.fold(
        denom.clone(),
        &|scaled: &BigInt, i: usize| {
            let (a, b) = ratios[i];
            if a == 0 || scaled.is_zero() {
                BigInt::zero()
            } else {
                (scaled / b) * a
            }
        },
        &mut |_, scaled| total += scaled,
    );
    let exact = Rational::new(total, denom);
    let float = sum_over::<f64>(&en, spec, x, 0);
    Ok(SumResult { value: float.value, exact_value: Some(exact), terms: float.terms })
}

/// Lossless-as-possible conversion of an exact sum to `f64`.
pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Which Euler product to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EulerVariant {
    /// `prod_{p∤q} (1 + g(p))(1 - 1/p)^k prod_{p|q} (1 - 1/p)^k`
    SingularSeries,
    /// `prod_p (1 - g(p))(1 - 1/p)^{-k}`
    ANormalization,
}

/// A truncated Euler product with a rigorous bound on the neglected tail.
#[derive(Debug, Clone, PartialEq)]
pub struct EulerProduct {
    pub value: f64,
    /// Primes `<= truncation` were multiplied in explicitly.
    pub truncation: u64,
    /// Bound on `|true - value|` from the tail estimate.
    pub error_bound: f64,
    pub variant: EulerVariant,
}

pub fn singular_series(spec: &MultFuncSpec, q: u64, tol: f64) -> Result<EulerProduct> {
    euler_product(spec, q, tol, EulerVariant::SingularSeries)
}

pub fn a_normalization(spec: &MultFuncSpec, tol: f64) -> Result<EulerProduct> {
    euler_product(spec, 1, tol, EulerVariant::ANormalization)
}

/// Bound on `sum_{p > P} p^{-1-alpha}`: the integral comparison over all
/// integers, or partial summation with `pi(t) < 1.25506 t / ln t`.
fn prime_tail_sum(p: u64, alpha: f64) -> f64 {
    let pf = p as f64;
    let integers = pf.powf(-alpha) / alpha;
    let rosser = 1.25506 * (1.0 + alpha) * pf.powf(-alpha) / (alpha * pf.ln());
    integers.min(rosser)
}

/// Doubles the truncation point until the tail bound and the last change are
/// both below `tol / 2`.
pub fn euler_product(
    spec: &MultFuncSpec,
    q: u64,
    tol: f64,
    variant: EulerVariant,
) -> Result<EulerProduct> {
    if !(tol > 0.0) {
        return Err(Error::param("tolerance must be positive"));
    }
    if q == 0 {
        return Err(Error::param("q must be positive"));
    }
    let c = spec.tail_bound().ok_or_else(|| Error::NonConvergent(spec.name().into()))?;
    let k = spec.dimension_k() as f64;
    let alpha = spec.tail_theta().min(1.0);
    // |log factor| <= c' p^{-1-alpha} once |g(p)| <= 1/2
    let c_prime = c + (k.abs() + c).powi(2) + k.abs();
    let start = spec.tail_cutoff().max((2.0 * (k.abs() + c)).ceil() as u64).max(1 << 12);
    let q_primes = if variant == EulerVariant::SingularSeries {
        primes::prime_divisors(q)
    } else {
        Vec::new()
    };

    let log_factor = |p: u64| -> (f64, bool) {
        let pf = p as f64;
        let g = spec.prime_value(p);
        let base = (-1.0 / pf).ln_1p();
        let (factor_log, negative) = match variant {
            EulerVariant::SingularSeries if q % p == 0 => (k * base, false),
            EulerVariant::SingularSeries => {
                let one_plus = 1.0 + g;
                if one_plus == 0.0 {
                    return (f64::NEG_INFINITY, false);
                }
                let l = if g.abs() < 0.5 { g.ln_1p() } else { one_plus.abs().ln() };
                (l + k * base, one_plus < 0.0)
            }
            EulerVariant::ANormalization => {
                let one_minus = 1.0 - g;
                if one_minus == 0.0 {
                    return (f64::NEG_INFINITY, false);
                }
                let l = if g.abs() < 0.5 { (-g).ln_1p() } else { one_minus.abs().ln() };
                (l - k * base, one_minus < 0.0)
            }
        };
        (factor_log, negative)
    };

    let mut log_sum = KahanSum::<f64>::new();
    let mut negative = false;
    let mut lo = 0u64;
    let mut hi = start;
    let mut previous: Option<f64> = None;
    loop {
        let mut zero = false;
        primes::for_each_prime_in(lo, hi + 1, |p| {
            let (l, neg) = log_factor(p);
            if l == f64::NEG_INFINITY {
                zero = true;
            } else {
                log_sum.add(l);
                negative ^= neg;
            }
        });
        if zero {
            return Ok(EulerProduct { value: 0.0, truncation: hi, error_bound: 0.0, variant });
        }
        lo = hi + 1;
        // primes of q beyond the truncation point are exact, finite factors
        let extra: f64 = q_primes.iter().filter(|&&p| p > hi).map(|&p| k * (-1.0 / p as f64).ln_1p()).sum();
        let magnitude = (log_sum.value() + extra).exp();
        let value = if negative { -magnitude } else { magnitude };
        let eps = c_prime * prime_tail_sum(hi, alpha);
        let error_bound = magnitude * eps.exp_m1();
        let settled = previous.is_some_and(|prev| (value - prev).abs() < tol / 2.0);
        if error_bound < tol / 2.0 && settled {
            return Ok(EulerProduct { value, truncation: hi, error_bound, variant });
        }
        if hi >= MAX_EULER_TRUNCATION {
            return Err(Error::TolUnreachable {
                context: format!("Euler product for {}", spec.name()),
                requested: tol,
                achieved: error_bound,
            });
        }
        previous = Some(value);
        hi *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn builtin_values() {
        assert_eq!(MultFuncSpec::builtin("one_over_n").unwrap().prime_value(5), 0.2);
        let twin = MultFuncSpec::builtin("nu_over_p(0,2)").unwrap();
        assert_eq!(twin.prime_value(2), 0.5);
        assert_eq!(twin.dimension_k(), 2);
        let g1 = MultFuncSpec::builtin("nu_minus1_over_phi(0,2)").unwrap();
        assert_eq!(g1.prime_value(5), 0.25);
        assert_eq!(g1.prime_ratio(2), Some((0, 1)));
        let tw = MultFuncSpec::builtin("signed_mu_times(one_over_n)").unwrap();
        assert_eq!(tw.prime_value(3), -1.0 / 3.0);
        assert_eq!(tw.dimension_k(), -1);
        assert_eq!(MultFuncSpec::builtin("k_over_p(3)").unwrap().prime_ratio(7), Some((3, 7)));
        assert_eq!(MultFuncSpec::builtin(" two_omega_over_n ").unwrap().prime_value(2), 1.0);
        assert!(matches!(MultFuncSpec::builtin("tau_over_n"), Err(Error::UnknownSpec(_))));
        assert!(MultFuncSpec::builtin("nu_over_p(2,0)").is_err());
    }

    #[test]
    fn custom_tail_bound_is_checked() {
        let bad = MultFuncSpec::custom("loose", 1, 1.0, Some((0.5, 0)), |p| 1.0 / p as f64 + 1.0 / (p as f64).powi(2));
        assert!(matches!(bad, Err(Error::TailBoundViolated { .. })));
        let ok = MultFuncSpec::custom("tight", 1, 1.0, Some((1.0, 0)), |p| 1.0 / p as f64 + 1.0 / (p as f64).powi(2));
        assert!(ok.is_ok());
        let unbounded = MultFuncSpec::custom("free", 1, 1.0, None, |p| 1.0 / p as f64).unwrap();
        assert!(matches!(singular_series(&unbounded, 1, 1e-6), Err(Error::NonConvergent(_))));
    }

    #[test]
    fn sum_examples() {
        let g = MultFuncSpec::one_over_n();
        let s = m_sum::<f64>(&g, 10.0, 0, 1).unwrap();
        assert_relative_eq!(s.value, 171.0 / 70.0, max_relative = 1e-15);
        assert_eq!(s.terms, 7);
        assert_eq!(m_sum_exact(&g, 10.0, 1, f64::INFINITY).unwrap().exact_value, Some(r(171, 70)));
        assert_eq!(m_sum_exact(&g, 10.0, 6, f64::INFINITY).unwrap().exact_value, Some(r(47, 35)));
        assert_eq!(m_sum_exact(&g, 10.0, 1, 3.0).unwrap().exact_value, Some(r(3, 2)));
        for spec in ["one_over_phi", "k_over_p(-3)", "two_omega_over_n"] {
            let s = m_sum::<f64>(&MultFuncSpec::builtin(spec).unwrap(), 1.0, 0, 1).unwrap();
            assert_eq!(s.value, 1.0);
        }
        let z_big = m_sum_smooth::<f64>(&g, 50.0, 2, 1, 1000.0).unwrap();
        assert_eq!(z_big.value, m_sum::<f64>(&g, 50.0, 2, 1).unwrap().value);
    }

    #[test]
    fn smooth_sum_matches_trial_division_loop() {
        let g = MultFuncSpec::one_over_n();
        let got = m_sum_smooth::<f64>(&g, 100.0, 1, 1, 10.0).unwrap().value;
        let mut want = 0.0;
        'n: for n in 1u64..=100 {
            let mut rest = n;
            let mut gn = 1.0;
            for d in 2..=n {
                if rest % d == 0 {
                    rest /= d;
                    if rest % d == 0 || d >= 10 {
                        continue 'n;
                    }
                    gn /= d as f64;
                }
            }
            want += gn * (100.0 / n as f64).ln();
        }
        assert_relative_eq!(got, want, max_relative = 1e-13);
    }

    #[test]
    fn single_precision_sum() {
        let s = m_sum::<f32>(&MultFuncSpec::one_over_n(), 1000.0, 1, 1).unwrap();
        let d = m_sum::<f64>(&MultFuncSpec::one_over_n(), 1000.0, 1, 1).unwrap();
        assert!((s.value as f64 - d.value).abs() / d.value < 1e-5);
    }

    #[test]
    fn exact_path_agrees_with_float() {
        for spec in ["one_over_n", "one_over_phi", "nu_minus1_over_phi(0,2,6)", "signed_mu_times(two_omega_over_n)"] {
            let g = MultFuncSpec::builtin(spec).unwrap();
            for (x, q, z) in [(1000.0, 1, f64::INFINITY), (20_000.0, 30, 200.0), (100_000.0, 1, f64::INFINITY)] {
                let s = m_sum_exact(&g, x, q, z).unwrap();
                let exact = rational_to_f64(s.exact_value.as_ref().unwrap());
                assert!((exact - s.value).abs() <= 1e-12 * exact.abs().max(1e-300), "{spec} {x}");
            }
        }
    }

    #[test]
    fn exact_requires_rational_spec() {
        let g = MultFuncSpec::custom("c", 1, 1.0, None, |p| 1.0 / p as f64).unwrap();
        assert!(m_sum_exact(&g, 10.0, 1, f64::INFINITY).is_err());
    }

    #[test]
    fn sums_monotone_in_q_support() {
        let g = MultFuncSpec::one_over_n();
        let a = m_sum_smooth::<f64>(&g, 5000.0, 1, 1, 50.0).unwrap().value;
        let b = m_sum_smooth::<f64>(&g, 5000.0, 1, 6, 50.0).unwrap().value;
        let c = m_sum_smooth::<f64>(&g, 5000.0, 1, 30, 50.0).unwrap().value;
        assert!(a >= b && b >= c);
    }

    #[test]
    fn zeta_two_product() {
        let s = singular_series(&MultFuncSpec::one_over_n(), 1, 1e-8).unwrap();
        assert!((s.value - 6.0 / (PI * PI)).abs() < 1e-8);
        assert!(s.error_bound < 5e-9);
        let s2 = singular_series(&MultFuncSpec::k_over_p(1), 2, 1e-8).unwrap();
        assert!((s2.value - 4.0 / (PI * PI)).abs() < 1e-8);
    }

    #[test]
    fn twin_prime_constant() {
        let t = TupleSpec::new(vec![0, 2]).unwrap();
        let a = a_normalization(&MultFuncSpec::nu_over_p(&t), 1e-7).unwrap();
        // 2 * C_2, C_2 = 0.6601618158468695...
        assert!((a.value - 1.320_323_631_693_739).abs() < 1e-7);
    }

    #[test]
    fn product_of_q_primes_beyond_truncation() {
        // q = 2 * (large prime): its factor (1 - 1/P) must still appear
        let big = 1_000_000_007u64;
        let g = MultFuncSpec::one_over_n();
        let with = singular_series(&g, 2 * big, 1e-8).unwrap().value;
        let without = singular_series(&g, 2, 1e-8).unwrap().value;
        let expect = without * (1.0 - 1.0 / big as f64) / (1.0 - 1.0 / (big as f64).powi(2));
        assert!((with - expect).abs() < 2e-8);
    }

    #[test]
    fn zero_factor_short_circuits() {
        let t = TupleSpec::new(vec![0, 2, 4]).unwrap();
        let a = a_normalization(&MultFuncSpec::nu_over_p(&t), 1e-6).unwrap();
        assert_eq!(a.value, 0.0);
    }
}
