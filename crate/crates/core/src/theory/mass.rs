//! The mass function `w(m) = ζ^{(6)}(10) ∏_p ρ(p, m)`: the limiting
//! proportion of curves with `|Δ|/N = m`.

use std::sync::{Arc, Mutex, OnceLock};

use num_traits::ToPrimitive;

use crate::arith::{primes_up_to, smallest_prime_factors, zeta_primes_removed};
use crate::error::{domain, Result};
use crate::theory::rho::{rho_prime_power_f64, RhoTable};

/// Tolerance for the zeta values behind every mass.
const ZETA_TOL: f64 = 1e-15;

/// Largest sieve the mass table will build.
pub const MAX_TABLE: usize = 50_000_000;

/// `ζ^{(6)}(10)` and `ζ^{(6)}(2)`.
pub fn zeta6_pair() -> (f64, f64) {
    static PAIR: OnceLock<(f64, f64)> = OnceLock::new();
    *PAIR.get_or_init(|| {
        (
            zeta_primes_removed(10.0, 6, ZETA_TOL).expect("s > 1"),
            zeta_primes_removed(2.0, 6, ZETA_TOL).expect("s > 1"),
        )
    })
}

/// `w(1) = ζ^{(6)}(10) / (2 ζ^{(6)}(2))`.
pub fn mass_one() -> f64 {
    let (z10, z2) = zeta6_pair();
    z10 / (2.0 * z2)
}

/// `w(m) = ζ^{(6)}(10) / ζ^{(6m)}(2) · ρ(2,m) ρ(3,m) ∏_{p ≥ 5, p | m} ρ(p,m)`.
pub fn mass(m: u64, tol: f64) -> Result<f64> {
    if m == 0 {
        return domain("m must be positive");
    }
    let bad = RhoTable.bad_part(m)?;
    if bad == num_traits::Zero::zero() {
        return Ok(0.0);
    }
    let z10 = zeta_primes_removed(10.0, 6, tol.min(ZETA_TOL))?;
    let z2m = zeta_primes_removed(2.0, 6 * m, tol.min(ZETA_TOL))?;
    Ok(z10 / z2m * bad.to_f64().unwrap_or(0.0))
}

/// The same mass through the coefficient form
/// `(ζ^{(6)}(10)/ζ^{(6)}(2)) · ρ(2,m)ρ(3,m) ∏_{p ≥ 5, p | m} ρ(p,m)/(1 − p^{−2})`.
pub fn mass_via_coefficient(m: u64) -> Result<f64> {
    if m == 0 {
        return domain("m must be positive");
    }
    let (z10, z2) = zeta6_pair();
    Ok(z10 / z2 * RhoTable.coefficient(m)?.to_f64().unwrap_or(0.0))
}

/// `h(pᵏ) = w(pᵏ)/w(1)`; `h` is multiplicative.
pub fn h_prime_power(p: u64, k: u32) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let rho = rho_prime_power_f64(p, k);
    match p {
        2 => 2.0 * rho,
        3 => rho,
        _ => rho / (1.0 - (p as f64).powi(-2)),
    }
}

/// `w(m)` for every `m ≤ limit`, from a smallest-prime-factor sieve.
#[derive(Debug, Clone)]
pub struct MassTable {
    weights: Vec<f64>,
}

impl MassTable {
    pub fn new(limit: usize) -> Result<Self> {
        if limit > MAX_TABLE {
            return domain(format!("mass table limit {limit} exceeds {MAX_TABLE}"));
        }
        let spf = smallest_prime_factors(limit);
        let w1 = mass_one();
        let mut h = vec![0.0f64; limit + 1];
        if limit >= 1 {
            h[1] = 1.0;
        }
        let mut cache: std::collections::HashMap<(u64, u32), f64> = Default::default();
        for m in 2..=limit {
            let p = spf[m] as usize;
            let (mut rest, mut k) = (m, 0u32);
            while rest % p == 0 {
                rest /= p;
                k += 1;
            }
            let hp = if p >= 5 && p * p > limit {
                // only k = 1 occurs, and h(p) = 1/(p(p+1))
                1.0 / (p as f64 * (p as f64 + 1.0))
            } else {
                *cache.entry((p as u64, k)).or_insert_with(|| h_prime_power(p as u64, k))
            };
            h[m] = h[rest] * hp;
        }
        let weights = h.into_iter().map(|x| x * w1).collect::<Vec<_>>();
        Ok(Self { weights })
    }

    pub fn limit(&self) -> usize {
        self.weights.len().saturating_sub(1)
    }

    pub fn weight(&self, m: usize) -> f64 {
        self.weights[m]
    }

    /// `Σ_{m ≤ upto} w(m)`, summed from small terms up.
    pub fn partial_sum(&self, upto: usize) -> f64 {
        self.weights[1..=upto.min(self.limit())].iter().rev().sum()
    }
}

/// Shared table holding at least `limit` weights.
pub fn shared_table(limit: usize) -> Result<Arc<MassTable>> {
    static CACHE: OnceLock<Mutex<Option<Arc<MassTable>>>> = OnceLock::new();
    let cell = CACHE.get_or_init(|| Mutex::new(None));
    let mut guard = cell.lock().expect("mass table lock");
    if let Some(t) = guard.as_ref() {
        if t.limit() >= limit {
            return Ok(t.clone());
        }
    }
    let t = Arc::new(MassTable::new(limit.max(1_000_000))?);
    *guard = Some(t.clone());
    Ok(t)
}

/// Certified bound on `Σ_{m > M} w(m)` by Rankin's trick:
/// `Σ_{m>M} h(m) ≤ M^{−σ} ∏_p Σ_k h(pᵏ) p^{kσ}` for `0 < σ < 1`. Euler
/// factors for `p ≤ P` are summed exactly; for `p > P`, `h(pᵏ) ≤ 3.125 p^{−k−1}`
/// gives `log ∏_{p>P} ≤ c P^{σ−1}/(1−σ)` with `c = 3.125/(1 − 5^{σ−1})`.
pub fn mass_tail_bound(big_m: u64) -> f64 {
    const P: u64 = 100_000;
    let heads: Vec<(u64, [f64; 9])> = primes_up_to(P)
        .into_iter()
        .map(|p| (p, std::array::from_fn(|k| h_prime_power(p, k as u32))))
        .collect();
    let mut best = f64::INFINITY;
    for i in 1..100 {
        let sigma = i as f64 / 100.0;
        let mut log_prod: f64 = heads.iter().map(|(p, h)| euler_factor(*p, h, sigma).ln()).sum();
        let c = 3.125 / (1.0 - 5f64.powf(sigma - 1.0));
        log_prod += c * (P as f64).powf(sigma - 1.0) / (1.0 - sigma);
        let bound = (log_prod - sigma * (big_m as f64).ln()).exp();
        best = best.min(bound);
    }
    mass_one() * best
}

/// `Σ_k h(pᵏ) p^{kσ}`, with the geometric tail of `p ≥ 5` summed in closed form.
fn euler_factor(p: u64, head: &[f64; 9], sigma: f64) -> f64 {
    let pf = p as f64;
    let x = pf.powf(sigma);
    let mut total = 0.0;
    for (k, h) in head.iter().enumerate() {
        total += h * x.powi(k as i32);
    }
    if p >= 5 {
        // h(pᵏ) = 2(p−1)² p^{−k−3}/(1 − p^{−2}) for k ≥ 9
        let r = pf.powf(sigma - 1.0);
        let lead = 2.0 * (pf - 1.0).powi(2) / pf.powi(3) / (1.0 - pf.powi(-2));
        total += lead * r.powi(9) / (1.0 - r);
    }
    total
}
