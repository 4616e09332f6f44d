//! Local factors `ρ(p, m)`, depending only on `gcd(m, p^∞)`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::arith::{factor, val_unchecked};
use crate::error::Result;

fn frac(n: i64, d: &BigInt) -> BigRational {
    BigRational::new(BigInt::from(n), d.clone())
}

/// `ρ(p, pⁿ)` as an exact rational.
pub fn rho_prime_power(p: u64, n: u32) -> BigRational {
    match p {
        2 => match n {
            0 => frac(1, &BigInt::from(2)),
            1 | 2 => frac(1, &BigInt::from(4)),
            _ => BigRational::zero(),
        },
        3 => {
            if n == 0 {
                BigRational::one()
            } else {
                BigRational::zero()
            }
        }
        _ => {
            let pb = BigInt::from(p);
            let one = BigRational::one();
            let inv = frac(1, &pb);
            let unit = &one - &inv; // 1 − 1/p
            let scale = |k: u32| frac(1, &pb.pow(k));
            let lin = |c: i64, d: i64| BigRational::from_integer(BigInt::from(c)) - &inv * BigInt::from(d);
            match n {
                0 => &one - scale(2),
                1 => scale(2) * &unit,
                2 => scale(3) * &unit,
                3 => scale(4) * &unit * &unit,
                4 => scale(5) * &unit * lin(2, 1),
                5 => scale(6) * &unit * lin(2, 2),
                6..=8 => scale(n + 1) * &unit * lin(3, 2),
                _ => scale(n + 1) * &unit * lin(2, 2),
            }
        }
    }
}

/// `ρ(p, pⁿ)` in floating point, for the sieves.
pub fn rho_prime_power_f64(p: u64, n: u32) -> f64 {
    let pf = p as f64;
    let unit = 1.0 - 1.0 / pf;
    let scale = |k: u32| pf.powi(-(k as i32));
    match (p, n) {
        (2, 0) => 0.5,
        (2, 1 | 2) => 0.25,
        (2, _) => 0.0,
        (3, 0) => 1.0,
        (3, _) => 0.0,
        (_, 0) => 1.0 - scale(2),
        (_, 1) => scale(2) * unit,
        (_, 2) => scale(3) * unit,
        (_, 3) => scale(4) * unit * unit,
        (_, 4) => scale(5) * unit * (2.0 - 1.0 / pf),
        (_, 5) => scale(6) * unit * (2.0 - 2.0 / pf),
        (_, 6..=8) => scale(n + 1) * unit * (3.0 - 2.0 / pf),
        _ => scale(n + 1) * unit * (2.0 - 2.0 / pf),
    }
}

/// `ρ(p, m)`, looked up through `gcd(m, p^∞)`.
pub fn rho(p: u64, m: u64) -> BigRational {
    rho_prime_power(p, val_unchecked(m as i128, p))
}

/// Exact `Σ_{n ≥ 0} ρ(p, pⁿ)`: 1 at `p ∈ {2, 3}`, `1 − p^{−10}` for `p ≥ 5`
/// (the geometric tail from `n = 9` on is summed in closed form).
pub fn rho_row_sum(p: u64) -> BigRational {
    let head: BigRational = (0..9).map(|n| rho_prime_power(p, n)).sum();
    if p < 5 {
        return head + rho_prime_power(p, 9);
    }
    // Σ_{n≥9} p^{−n−1}(1−1/p)(2−2/p) = p^{−10}(2−2/p)
    let pb = BigInt::from(p);
    let tail = BigRational::new(BigInt::from(2) * (&pb - 1), pb.pow(11));
    head + tail
}

/// Table of `ρ` values with the composite evaluation `m ↦ ∏_{p | 6m} ρ(p, m)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct RhoTable;

impl RhoTable {
    pub fn lookup(&self, p: u64, n: u32) -> BigRational {
        rho_prime_power(p, n)
    }

    /// `ρ(2, m) ρ(3, m) ∏_{p ≥ 5, p | m} ρ(p, m)`. The factors at `p ∤ 6m`
    /// are `1 − p^{−2}` and are left to the zeta quotient.
    pub fn bad_part(&self, m: u64) -> Result<BigRational> {
        let mut acc = rho(2, m) * rho(3, m);
        for (p, e) in factor(m as i128)?.factors() {
            let p = *p as u64;
            if p >= 5 {
                acc *= rho_prime_power(p, *e);
            }
        }
        Ok(acc)
    }

    /// The coefficient `ρ(2,m)ρ(3,m) ∏_{p ≥ 5, p | m} ρ(p,m)/(1 − p^{−2})`
    /// exactly as it appears in the limiting distribution.
    pub fn coefficient(&self, m: u64) -> Result<BigRational> {
        let mut acc = rho(2, m) * rho(3, m);
        for (p, e) in factor(m as i128)?.factors() {
            let p = *p as u64;
            if p >= 5 {
                let pb = BigInt::from(p);
                let euler = BigRational::new(&pb * &pb - 1, &pb * &pb);
                acc *= rho_prime_power(p, *e) / euler;
            }
        }
        Ok(acc)
    }
}
