//! Euler-product identities used as numeric cross-checks.

use crate::arith::{primes_up_to, smallest_prime_factors, zeta};
use crate::error::{domain, Result};

/// Both sides of `Σ_m m^{−s} ∏_{p|m} 3/p = ∏_p (1 + 3/(p(pˢ − 1)))`, each
/// truncated, with certified bounds on what the truncation leaves out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadEuler {
    pub lhs: f64,
    pub lhs_tail: f64,
    pub rhs: f64,
    pub rhs_tail: f64,
}

impl RadEuler {
    /// Both truncations sit below their limits, so they must agree within
    /// the larger tail.
    pub fn budget(&self) -> f64 {
        self.lhs_tail.max(self.rhs_tail) + 1e-12 * self.lhs.abs().max(1.0)
    }

    pub fn agrees(&self) -> bool {
        (self.lhs - self.rhs).abs() <= self.budget()
    }
}

/// `s > 1` only: the identity holds for `s > 0`, but the crude tails used
/// here need a convergent `Σ m^{−s}`.
pub fn identity_rad_euler(s: f64, big_m: usize, big_p: u64) -> Result<RadEuler> {
    if !(s > 1.0) {
        return domain(format!("desk check needs s > 1, got {s}"));
    }
    if big_m == 0 || big_p < 2 {
        return domain("truncation points must be positive");
    }
    // g(m) = m^{−s} ∏_{p|m} 3/p, multiplicative in the radical
    let spf = smallest_prime_factors(big_m);
    let mut rad_factor = vec![1.0f64; big_m + 1];
    for m in 2..=big_m {
        let p = spf[m] as usize;
        let mut rest = m / p;
        while rest % p == 0 {
            rest /= p;
        }
        rad_factor[m] = rad_factor[rest] * 3.0 / p as f64;
    }
    let lhs: f64 = (1..=big_m).rev().map(|m| (m as f64).powf(-s) * rad_factor[m]).sum();
    // ∏_{p|m} 3/p ≤ 3/2, so the tail is at most 1.5 Σ_{m>M} m^{−s}
    let lhs_tail = 1.5 * (big_m as f64).powf(1.0 - s) / (s - 1.0);
    let mut log_rhs = 0.0;
    for p in primes_up_to(big_p) {
        let pf = p as f64;
        log_rhs += (3.0 / (pf * (pf.powf(s) - 1.0))).ln_1p();
    }
    let rhs = log_rhs.exp();
    // 3/(n(nˢ − 1)) ≤ 6 n^{−s−1} for n ≥ 2, and Σ_{n>P} n^{−s−1} ≤ P^{−s}/s
    let log_tail = 6.0 * (big_p as f64).powf(-s) / s;
    let rhs_tail = rhs * log_tail.exp_m1();
    Ok(RadEuler { lhs, lhs_tail, rhs, rhs_tail })
}

/// `∏_{5≤p<q} (1 − p^{−2})/(1 − p^{−10})` divided by its limit
/// `(1−2^{−10})(1−3^{−10})/((1−2^{−2})(1−3^{−2})) · ζ(10)/ζ(2)`.
pub fn euler_ratio_check(q: u64) -> Result<f64> {
    if q <= 5 {
        return domain(format!("q must exceed 5, got {q}"));
    }
    let mut log_prod = 0.0;
    for p in primes_up_to(q - 1).into_iter().filter(|&p| p >= 5) {
        let pf = p as f64;
        log_prod += (-pf.powi(-2)).ln_1p() - (-pf.powi(-10)).ln_1p();
    }
    let limit = (1.0 - 2f64.powi(-10)) * (1.0 - 3f64.powi(-10)) / ((1.0 - 0.25) * (1.0 - 1.0 / 9.0))
        * zeta(10.0, 1e-15)?
        / zeta(2.0, 1e-15)?;
    Ok(log_prod.exp() / limit)
}

/// The finite product alone.
pub fn euler_product_5_to_q(q: u64) -> f64 {
    primes_up_to(q.saturating_sub(1))
        .into_iter()
        .filter(|&p| p >= 5)
        .map(|p| {
            let pf = p as f64;
            (1.0 - pf.powi(-2)) / (1.0 - pf.powi(-10))
        })
        .product()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rad_euler_agrees() {
        let r = identity_rad_euler(2.0, 100_000, 100_000).unwrap();
        assert!(r.agrees(), "{r:?}");
        assert!(r.budget() < 1e-3);
        let r = identity_rad_euler(10.0, 1000, 1000).unwrap();
        assert!((r.lhs - r.rhs).abs() < 1e-9, "{r:?}");
    }

    #[test]
    fn rad_euler_first_terms() {
        let r = identity_rad_euler(2.0, 1, 2).unwrap();
        assert_eq!(r.lhs, 1.0);
        // the product over p ≤ 2 is 1 + 3/(2·3)
        assert_eq!(r.rhs, 1.5);
        assert!(identity_rad_euler(1.0, 10, 10).is_err());
    }

    #[test]
    fn ratio_single_factor() {
        let exact = (1.0 - 1.0 / 25.0) / (1.0 - 5f64.powi(-10));
        assert_eq!(euler_product_5_to_q(7), exact);
    }

    #[test]
    fn ratio_tends_to_one() {
        let mut prev = f64::INFINITY;
        for q in [100u64, 1000, 10_000] {
            let dev = (euler_ratio_check(q).unwrap() - 1.0).abs();
            assert!(dev < 10.0 / q as f64, "q = {q}: {dev}");
            assert!(dev * q as f64 <= prev);
            prev = dev * q as f64;
        }
    }
}
