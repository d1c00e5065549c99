//! Prime generation and depth-first enumeration of squarefree smooth integers.
//!
//! The enumerator walks factorizations `p1 < p2 < ... < pr` in lexicographic
//! order, carrying the running product. A branch is cut as soon as
//! `value * p > x`, checked by division so the product never overflows.

use crate::error::{Error, Result};

/// Largest accepted summation bound.
pub const MAX_X: u64 = 1 << 62;

/// All primes up to `limit`, sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeTable {
    limit: u64,
    primes: Vec<u64>,
}

impl PrimeTable {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    /// Primality for `n <= limit` by binary search.
    pub fn contains(&self, n: u64) -> bool {
        n <= self.limit && self.primes.binary_search(&n).is_ok()
    }
}

/// Sieve of Eratosthenes over odd numbers.
pub fn generate_primes(limit: u64) -> PrimeTable {
    let mut primes = Vec::new();
    if limit >= 2 {
        primes.push(2);
    }
    if limit >= 3 {
        // index i represents 2i + 1
        let n = ((limit - 1) / 2 + 1) as usize;
        let mut composite = vec![false; n];
        let mut i = 1usize;
        while (2 * i + 1) * (2 * i + 1) <= limit as usize {
            if !composite[i] {
                let p = 2 * i + 1;
                let mut j = (p * p) / 2;
                while j < n {
                    composite[j] = true;
                    j += p;
                }
            }
            i += 1;
        }
        primes.extend(
            composite
                .iter()
                .enumerate()
                .skip(1)
                .filter(|(_, &c)| !c)
                .map(|(i, _)| 2 * i as u64 + 1),
        );
    }
    PrimeTable { limit, primes }
}

/// Calls `visit` for every prime in `[lo, hi)` in increasing order, sieving
/// in fixed-size segments so `hi` may be far beyond what fits in memory.
pub fn for_each_prime_in(lo: u64, hi: u64, mut visit: impl FnMut(u64)) {
    if hi <= lo {
        return;
    }
    const SEGMENT: u64 = 1 << 20;
    let root = isqrt(hi - 1);
    let base = generate_primes(root);
    let mut seg_lo = lo.max(2);
    let mut flags = vec![false; SEGMENT as usize];
    while seg_lo < hi {
        let seg_hi = (seg_lo + SEGMENT).min(hi);
        let len = (seg_hi - seg_lo) as usize;
        flags[..len].iter_mut().for_each(|f| *f = true);
        for &p in base.primes() {
            if p * p >= seg_hi {
                break;
            }
            let mut start = (seg_lo.div_ceil(p) * p).max(p * p);
            while start < seg_hi {
                flags[(start - seg_lo) as usize] = false;
                start += p;
            }
        }
        for (i, &f) in flags[..len].iter().enumerate() {
            if f {
                visit(seg_lo + i as u64);
            }
        }
        seg_lo = seg_hi;
    }
}

pub fn isqrt(n: u64) -> u64 {
    if n < 2 {
        return n;
    }
    let mut r = (n as f64).sqrt() as u64;
    while r.checked_mul(r).is_none_or(|sq| sq > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|sq| sq <= n) {
        r += 1;
    }
    r
}

/// A squarefree positive integer together with its prime factorization.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FactoredInt {
    value: u64,
    factors: Vec<u64>,
}

impl Default for FactoredInt {
    fn default() -> Self {
        Self::one()
    }
}

impl FactoredInt {
    pub fn one() -> Self {
        Self { value: 1, factors: Vec::new() }
    }

    /// Builds from strictly increasing primes; fails on unsorted, repeated,
    /// non-prime factors or overflow.
    pub fn from_factors(factors: Vec<u64>) -> Result<Self> {
        let mut value = 1u64;
        for (i, &p) in factors.iter().enumerate() {
            if i > 0 && factors[i - 1] >= p {
                return Err(Error::param("factors must be strictly increasing"));
            }
            if !is_prime_u64(p) {
                return Err(Error::param(format!("{p} is not prime")));
            }
            value = value
                .checked_mul(p)
                .ok_or_else(|| Error::Range("factored product exceeds u64".into()))?;
        }
        Ok(Self { value, factors })
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn factors(&self) -> &[u64] {
        &self.factors
    }

    pub fn omega(&self) -> usize {
        self.factors.len()
    }

    fn push(&mut self, p: u64) {
        self.value *= p;
        self.factors.push(p);
    }

    fn pop(&mut self) {
        let p = self.factors.pop().expect("pop on 1");
        self.value /= p;
    }
}

/// The filtered prime list for one `(x, z, q)` enumeration.
#[derive(Debug, Clone)]
pub struct SmoothEnumerator {
    bound: u64,
    primes: Vec<u64>,
}

impl SmoothEnumerator {
    /// Restricts `table` to primes `p <= floor(x)`, `p < z`, `p ∤ q`.
    ///
    /// `table` must cover `min(floor(x), z)`.
    pub fn new(table: &PrimeTable, x: f64, z: f64, q: u64) -> Result<Self> {
        let bound = floor_bound(x)?;
        if q == 0 {
            return Err(Error::param("q must be positive"));
        }
        let needed = if z.is_finite() && z < bound as f64 { z.ceil() as u64 } else { bound };
        if table.limit() < needed {
            return Err(Error::param(format!(
                "prime table covers {} but enumeration needs {needed}",
                table.limit()
            )));
        }
        let primes = table
            .primes()
            .iter()
            .copied()
            .take_while(|&p| p <= bound && (p as f64) < z)
            .filter(|&p| q % p != 0)
            .collect();
        Ok(Self { bound, primes })
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// Visits every admissible `n`, starting with `n = 1`.
    pub fn for_each(&self, mut visit: impl FnMut(&FactoredInt)) {
        let mut n = FactoredInt::one();
        visit(&n);
        self.walk(0, &mut n, &mut visit);
    }

    fn walk(&self, start: usize, n: &mut FactoredInt, visit: &mut impl FnMut(&FactoredInt)) {
        let room = self.bound / n.value;
        for i in start..self.primes.len() {
            let p = self.primes[i];
            if p > room {
                break;
            }
            n.push(p);
            visit(n);
            self.walk(i + 1, n, visit);
            n.pop();
        }
    }

    /// Depth-first fold: each node's state is derived from its parent's by
    /// `extend(parent_state, i)` where `primes()[i]` is the new factor, so
    /// per-node products cost one multiply.
    pub fn fold<S>(&self, root: S, extend: &impl Fn(&S, usize) -> S, visit: &mut impl FnMut(u64, &S)) {
        visit(1, &root);
        self.fold_walk(0, 1, &root, extend, visit);
    }

    fn fold_walk<S>(
        &self,
        start: usize,
        value: u64,
        state: &S,
        extend: &impl Fn(&S, usize) -> S,
        visit: &mut impl FnMut(u64, &S),
    ) {
        let room = self.bound / value;
        for i in start..self.primes.len() {
            let p = self.primes[i];
            if p > room {
                break;
            }
            let child = extend(state, i);
            let v = value * p;
            visit(v, &child);
            self.fold_walk(i + 1, v, &child, extend, visit);
        }
    }
}

/// `floor(x)` as an enumeration bound, rejecting bounds past [`MAX_X`].
pub fn floor_bound(x: f64) -> Result<u64> {
    if !(x >= 1.0) {
        return Err(Error::param(format!("x must be at least 1, got {x}")));
    }
    if x > MAX_X as f64 {
        return Err(Error::Range(format!("x = {x} exceeds 2^62")));
    }
    Ok(x.floor() as u64)
}

/// Visits each squarefree `n <= x` with all prime factors `< z` and
/// `gcd(n, q) = 1`, in depth-first lexicographic order.
pub fn enumerate_squarefree_smooth(
    x: f64,
    z: f64,
    q: u64,
    visit: impl FnMut(&FactoredInt),
) -> Result<()> {
    let bound = floor_bound(x)?;
    let limit = if z.is_finite() && z < bound as f64 { z.ceil() as u64 } else { bound };
    let table = generate_primes(limit);
    SmoothEnumerator::new(&table, x, z, q)?.for_each(visit);
    Ok(())
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller–Rabin for 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Brent's variant of Pollard's rho; `n` must be an odd composite.
fn rho(n: u64) -> u64 {
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut g) = (2u64, 2u64, 1u64);
        let mut r = 1u64;
        let mut q = 1u64;
        let mut ys = 0u64;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..(r - k).min(128) {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = num_integer::gcd(q, n);
                k += 128;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys);
                g = num_integer::gcd(x.abs_diff(ys), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
        c += 1;
    }
}

/// Distinct prime divisors of `q`, sorted: trial division by small primes,
/// then Pollard rho on what remains.
pub fn prime_divisors(q: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut rest = q;
    for p in generate_primes(1000).primes() {
        if rest % p == 0 {
            out.push(*p);
            while rest % p == 0 {
                rest /= p;
            }
        }
    }
    let mut stack = vec![rest];
    while let Some(n) = stack.pop() {
        if n == 1 {
            continue;
        }
        if is_prime_u64(n) {
            out.push(n);
            continue;
        }
        let d = rho(n);
        stack.push(d);
        stack.push(n / d);
    }
    out.sort_unstable();
    out.dedup();
    out
}
