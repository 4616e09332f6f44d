//! Exact integer primitives: factorization, valuations, Möbius, and the
//! real zeta function with Euler factors removed.

use std::sync::OnceLock;

use num_integer::Integer;

use crate::error::{domain, Result};

/// Trial-division bound used by [`factor`] before falling back to Pollard rho.
pub const DEFAULT_TRIAL_BOUND: u64 = 1_000_000;

static PRIME_TABLE: OnceLock<Vec<u64>> = OnceLock::new();

/// Primes up to [`DEFAULT_TRIAL_BOUND`], computed once.
pub fn prime_table() -> &'static [u64] {
    PRIME_TABLE.get_or_init(|| primes_up_to(DEFAULT_TRIAL_BOUND))
}

/// Sieve of Eratosthenes.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if composite[i] {
            continue;
        }
        out.push(i as u64);
        let mut j = i * i;
        while j <= n {
            composite[j] = true;
            j += i;
        }
    }
    out
}

/// Smallest-prime-factor sieve on `0..=n`; entry 0 and 1 are 0.
pub fn smallest_prime_factors(n: usize) -> Vec<u32> {
    let mut spf = vec![0u32; n + 1];
    for i in 2..=n {
        if spf[i] != 0 {
            continue;
        }
        let mut j = i;
        while j <= n {
            if spf[j] == 0 {
                spf[j] = i as u32;
            }
            j += i;
        }
    }
    spf
}

/// A nonzero integer together with the factorization of its absolute value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactoredInteger {
    value: i128,
    factors: Vec<(u128, u32)>,
}

impl FactoredInteger {
    pub fn value(&self) -> i128 {
        self.value
    }

    /// `(prime, exponent)` pairs with strictly increasing primes.
    pub fn factors(&self) -> &[(u128, u32)] {
        &self.factors
    }

    pub fn primes(&self) -> impl Iterator<Item = u128> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    pub fn exponent_of(&self, p: u128) -> u32 {
        self.factors
            .iter()
            .find(|&&(q, _)| q == p)
            .map_or(0, |&(_, e)| e)
    }

    /// Multiplies the factorization back out, keeping the sign.
    pub fn recompose(&self) -> i128 {
        let mag: i128 = self
            .factors
            .iter()
            .map(|&(p, e)| (p as i128).pow(e))
            .product();
        if self.value < 0 {
            -mag
        } else {
            mag
        }
    }
}

/// Canonical factorization of `n`. Trial division by the prime table, then
/// Pollard rho on whatever cofactor is left.
pub fn factor(n: i128) -> Result<FactoredInteger> {
    if n == 0 {
        return domain("cannot factor 0");
    }
    let mut rest = n.unsigned_abs();
    let mut factors: Vec<(u128, u32)> = Vec::new();
    for &p in prime_table() {
        let p = p as u128;
        if p * p > rest {
            break;
        }
        if rest % p == 0 {
            let mut e = 0;
            while rest % p == 0 {
                rest /= p;
                e += 1;
            }
            factors.push((p, e));
        }
    }
    if rest > 1 {
        let bound = DEFAULT_TRIAL_BOUND as u128;
        if rest < bound * bound {
            factors.push((rest, 1));
        } else {
            let mut big = Vec::new();
            split_large(rest, &mut big);
            big.sort_unstable();
            for p in big {
                match factors.last_mut() {
                    Some((q, e)) if *q == p => *e += 1,
                    _ => factors.push((p, 1)),
                }
            }
        }
    }
    Ok(FactoredInteger { value: n, factors })
}

fn split_large(n: u128, out: &mut Vec<u128>) {
    if n == 1 {
        return;
    }
    if is_prime(n) {
        out.push(n);
        return;
    }
    let d = pollard_brent(n);
    split_large(d, out);
    split_large(n / d, out);
}

fn mul_mod(a: u128, b: u128, m: u128) -> u128 {
    if a < (1 << 64) && b < (1 << 64) {
        return (a * b) % m;
    }
    // double-and-add; only reached for moduli above 2^64
    let (mut a, mut b, mut acc) = (a % m, b % m, 0u128);
    while b > 0 {
        if b & 1 == 1 {
            acc = add_mod(acc, a, m);
        }
        a = add_mod(a, a, m);
        b >>= 1;
    }
    acc
}

fn add_mod(a: u128, b: u128, m: u128) -> u128 {
    let (s, overflow) = a.overflowing_add(b);
    if overflow || s >= m {
        s.wrapping_sub(m)
    } else {
        s
    }
}

fn pow_mod(mut base: u128, mut exp: u128, m: u128) -> u128 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Miller–Rabin with the first 13 prime bases: deterministic below 3.3·10²⁴.
pub fn is_prime(n: u128) -> bool {
    const BASES: [u128; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];
    if n < 2 {
        return false;
    }
    for p in BASES {
        if n % p == 0 {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in BASES {
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

fn pollard_brent(n: u128) -> u128 {
    if n % 2 == 0 {
        return 2;
    }
    for c in 1u128.. {
        let f = |x: u128| add_mod(mul_mod(x, x, n), c, n);
        let (mut x, mut y, mut g) = (2u128, 2u128, 1u128);
        let mut q = 1u128;
        let mut ys = y;
        let mut r = 1u64;
        const BATCH: u64 = 128;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..BATCH.min(r - k) {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = q.gcd(&n);
                k += BATCH;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys);
                g = x.abs_diff(ys).gcd(&n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
    }
    unreachable!()
}

fn check_prime_arg(p: u64) -> Result<()> {
    if is_prime(p as u128) {
        Ok(())
    } else {
        domain(format!("{p} is not prime"))
    }
}

/// Largest `k` with `p^k | n`.
pub fn valuation(n: i128, p: u64) -> Result<u32> {
    if n == 0 {
        return domain("valuation of 0 is undefined");
    }
    check_prime_arg(p)?;
    Ok(val_unchecked(n, p))
}

/// `v_p(n)` without argument checks; `n = 0` returns `u32::MAX`.
pub(crate) fn val_unchecked(n: i128, p: u64) -> u32 {
    if n == 0 {
        return u32::MAX;
    }
    let p = p as i128;
    let mut n = n;
    let mut k = 0;
    while n % p == 0 {
        n /= p;
        k += 1;
    }
    k
}

/// `gcd(|n|, p^∞) = p^{v_p(n)}`.
pub fn p_part(n: i128, p: u64) -> Result<u128> {
    let k = valuation(n, p)?;
    Ok((p as u128).pow(k))
}

pub fn moebius(d: u64) -> Result<i8> {
    if d == 0 {
        return domain("moebius(0) is undefined");
    }
    let f = factor(d as i128)?;
    if f.factors().iter().any(|&(_, e)| e > 1) {
        return Ok(0);
    }
    Ok(if f.factors().len() % 2 == 0 { 1 } else { -1 })
}

// B_2, B_4, ..., B_16
const BERNOULLI_EVEN: [f64; 8] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
];

/// Riemann zeta for real `s > 1`, with absolute error below `tol`
/// (down to the f64 floor of a few ulps).
pub fn zeta(s: f64, tol: f64) -> Result<f64> {
    if !(s > 1.0) {
        return domain(format!("zeta needs s > 1, got {s}"));
    }
    if !(tol > 0.0) {
        return domain("tolerance must be positive");
    }
    let mut n_terms = 16usize;
    loop {
        let (value, remainder) = zeta_euler_maclaurin(s, n_terms);
        if remainder < tol || n_terms >= 1 << 20 {
            return Ok(value);
        }
        n_terms *= 2;
    }
}

/// Head sum to `n - 1`, integral tail, and Euler–Maclaurin corrections. The
/// returned bound is the magnitude of the first omitted correction.
fn zeta_euler_maclaurin(s: f64, n: usize) -> (f64, f64) {
    let nf = n as f64;
    let mut head = 0.0;
    // small terms first
    for k in (1..n).rev() {
        head += (k as f64).powf(-s);
    }
    let mut total = head + nf.powf(1.0 - s) / (s - 1.0) + 0.5 * nf.powf(-s);
    // rising factorial s (s+1) ... (s+2k-2) / (2k)!
    let mut coeff = s / 2.0;
    let mut power = nf.powf(-s - 1.0);
    let mut omitted = 0.0;
    for (k, b) in BERNOULLI_EVEN.iter().enumerate() {
        let term = b * coeff * power;
        if k + 1 == BERNOULLI_EVEN.len() {
            omitted = term.abs();
            break;
        }
        total += term;
        let j = 2.0 * (k as f64 + 1.0);
        coeff *= (s + j - 1.0) * (s + j) / ((j + 1.0) * (j + 2.0));
        power /= nf * nf;
    }
    (total, omitted)
}

/// `ζ(s) · ∏_{p | m} (1 − p^{−s})`.
pub fn zeta_primes_removed(s: f64, m: u64, tol: f64) -> Result<f64> {
    if m == 0 {
        return domain("m must be positive");
    }
    let z = zeta(s, tol)?;
    let f = factor(m as i128)?;
    Ok(f.primes()
        .fold(z, |acc, p| acc * (1.0 - (p as f64).powf(-s))))
}
