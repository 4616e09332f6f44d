//! Residue-class sets mod `Q`, the sets `S_{Q,m}` that sort `(a, b) mod Q` by
//! `gcd(|Δ|/N, C)`, and exhaustive class scans that check local densities.

use std::collections::{BTreeMap, HashSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::arith::{primes_up_to, val_unchecked};
use crate::error::{domain, Error, Result};
use crate::family::{discriminant, FamilySpec};
use crate::local::{reduction_at_2, reduction_at_p, tate_oracle, ReductionType, TypeDensity};
use crate::theory::rho::rho_prime_power;

/// A subset of `(ℤ/Qℤ)²`.
#[derive(Debug, Clone)]
pub struct ResidueSet {
    modulus: u64,
    repr: Repr,
}

#[derive(Debug, Clone)]
enum Repr {
    All,
    Explicit(HashSet<(u64, u64)>),
    /// CRT product of sets with pairwise coprime moduli.
    Product(Vec<ResidueSet>),
}

impl ResidueSet {
    pub fn all(modulus: u64) -> Self {
        Self { modulus: modulus.max(1), repr: Repr::All }
    }

    pub fn from_pairs(modulus: u64, pairs: impl IntoIterator<Item = (u64, u64)>) -> Self {
        let m = modulus.max(1);
        let members = pairs.into_iter().map(|(a, b)| (a % m, b % m)).collect();
        Self { modulus: m, repr: Repr::Explicit(members) }
    }

    /// Scans all of `(ℤ/Qℤ)²`.
    pub fn from_predicate(modulus: u64, pred: impl Fn(u64, u64) -> bool + Sync) -> Self {
        let members: HashSet<(u64, u64)> = (0..modulus)
            .into_par_iter()
            .flat_map_iter(|a| {
                let pred = &pred;
                (0..modulus).filter(move |&b| pred(a, b)).map(move |b| (a, b))
            })
            .collect();
        Self { modulus, repr: Repr::Explicit(members) }
    }

    pub fn product(factors: Vec<ResidueSet>) -> Result<Self> {
        let mut modulus: u64 = 1;
        for f in &factors {
            if modulus.gcd(&f.modulus) != 1 {
                return domain("product factors must have pairwise coprime moduli");
            }
            modulus = modulus
                .checked_mul(f.modulus)
                .ok_or_else(|| Error::Domain("product modulus overflows u64".into()))?;
        }
        Ok(Self { modulus, repr: Repr::Product(factors) })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn contains(&self, a: u64, b: u64) -> bool {
        let (a, b) = (a % self.modulus, b % self.modulus);
        match &self.repr {
            Repr::All => true,
            Repr::Explicit(s) => s.contains(&(a, b)),
            Repr::Product(fs) => fs.iter().all(|f| f.contains(a, b)),
        }
    }

    pub fn cardinality(&self) -> u128 {
        match &self.repr {
            Repr::All => (self.modulus as u128).pow(2),
            Repr::Explicit(s) => s.len() as u128,
            Repr::Product(fs) => fs.iter().map(ResidueSet::cardinality).product(),
        }
    }

    /// All members, expanded through the CRT where needed. Only sensible for
    /// small sets.
    pub fn members(&self) -> Vec<(u64, u64)> {
        let mut out: Vec<(u64, u64)> = match &self.repr {
            Repr::All => (0..self.modulus)
                .flat_map(|a| (0..self.modulus).map(move |b| (a, b)))
                .collect(),
            Repr::Explicit(s) => s.iter().copied().collect(),
            Repr::Product(fs) => {
                let mut acc: Vec<(u64, u64)> = vec![(0, 0)];
                let mut m_acc: u64 = 1;
                for f in fs {
                    let fm = f.members();
                    let mut next = Vec::with_capacity(acc.len() * fm.len());
                    for &(a0, b0) in &acc {
                        for &(a1, b1) in &fm {
                            next.push((crt(a0, m_acc, a1, f.modulus), crt(b0, m_acc, b1, f.modulus)));
                        }
                    }
                    acc = next;
                    m_acc *= f.modulus;
                }
                acc
            }
        };
        out.sort_unstable();
        out
    }

    fn factors(&self) -> Vec<&ResidueSet> {
        match &self.repr {
            Repr::Product(fs) => fs.iter().flat_map(|f| f.factors()).collect(),
            _ => vec![self],
        }
    }
}

fn crt(r1: u64, m1: u64, r2: u64, m2: u64) -> u64 {
    // x ≡ r1 (m1), x ≡ r2 (m2), gcd(m1, m2) = 1
    let g = (m1 as i128).extended_gcd(&(m2 as i128));
    let m = m1 as i128 * m2 as i128;
    let x = r1 as i128 * m2 as i128 * g.y + r2 as i128 * m1 as i128 * g.x;
    x.rem_euclid(m) as u64
}

/// `q`, and the moduli `Q = 12 ∏_{5≤p<q} p^{e_p+2}`, `C = 4 ∏_{5≤p<q} p^{e_p}`
/// with `e_p = ⌊log q / log p⌋`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QCPlan {
    pub q: u64,
    pub big_q: u64,
    pub c: u64,
    /// `(p, e_p)` for `5 ≤ p < q`.
    pub local: Vec<(u64, u32)>,
}

/// Largest scan-friendly `q`.
pub const MAX_EXHAUSTIVE_Q: u64 = 13;

pub fn build_plan(q: u64) -> Result<QCPlan> {
    if q <= 5 {
        return domain(format!("q must exceed 5, got {q}"));
    }
    let mut big_q: u64 = 12;
    let mut c: u64 = 4;
    let mut local = Vec::new();
    for p in primes_up_to(q - 1).into_iter().filter(|&p| p >= 5) {
        // ⌊log q / log p⌋ as an exact integer
        let mut e = 0u32;
        while p.pow(e + 1) <= q {
            e += 1;
        }
        let overflow = || Error::Domain(format!("Q overflows u64 at q = {q}"));
        big_q = big_q.checked_mul(p.checked_pow(e + 2).ok_or_else(overflow)?).ok_or_else(overflow)?;
        c *= p.pow(e);
        local.push((p, e));
    }
    Ok(QCPlan { q, big_q, c, local })
}

impl QCPlan {
    pub fn divisors_of_c(&self) -> Vec<u64> {
        let mut divs: Vec<u64> = (1..=self.c).filter(|d| self.c % d == 0).collect();
        divs.sort_unstable();
        divs
    }

    /// `(p, v_p(C))` including `p = 2` (and 3 with exponent 0).
    fn c_primes(&self) -> Vec<(u64, u32)> {
        let mut out = vec![(2, 2), (3, 0)];
        out.extend(self.local.iter().copied());
        out
    }

    fn check_divisor(&self, m: u64) -> Result<()> {
        if m == 0 || self.c % m != 0 {
            return domain(format!("m = {m} does not divide C = {}", self.c));
        }
        Ok(())
    }

    fn check_scan_size(&self) -> Result<()> {
        if self.q > MAX_EXHAUSTIVE_Q {
            return domain(format!("q = {} exceeds the exhaustive-scan limit {MAX_EXHAUSTIVE_Q}", self.q));
        }
        Ok(())
    }
}

const LIFT_ATTEMPTS: usize = 64;

/// Random lift of a class mod `modulus`, resampled until `accept` holds.
fn lift(
    rng: &mut ChaCha8Rng,
    (x, y): (u64, u64),
    modulus: u64,
    accept: impl Fn(i64, i64) -> bool,
) -> Result<(i64, i64)> {
    let spread = (1_i64 << 20) / modulus.max(1) as i64 + 8;
    for _ in 0..LIFT_ATTEMPTS {
        let a = x as i64 + modulus as i64 * rng.gen_range(-spread..spread);
        let b = y as i64 + modulus as i64 * rng.gen_range(-spread..spread);
        if discriminant(a, b) != 0 && accept(a, b) {
            return Ok((a, b));
        }
    }
    Err(Error::Consistency(format!("no admissible lift of ({x}, {y}) mod {modulus}")))
}

fn minimal_at(p: u64) -> impl Fn(i64, i64) -> bool {
    move |a, b| {
        let (p4, p6) = (p.pow(4) as i64, p.pow(6) as i64);
        !(a % p4 == 0 && b % p6 == 0)
    }
}

/// `min(v_p(|Δ|/N), cap)` for a single lift, `p = 2` or `p ≥ 5`.
fn capped_ratio_valuation(a: i64, b: i64, p: u64, cap: u32, spec: &FamilySpec) -> Result<u32> {
    let local = if p == 2 { reduction_at_2(a, b, spec)? } else { reduction_at_p(a, b, p)? };
    Ok(local.v_ratio.min(cap))
}

/// Value shared by two random lifts; disagreement means the class does not
/// determine the quantity.
fn agreed<T: PartialEq + std::fmt::Debug>(
    rng: &mut ChaCha8Rng,
    class: (u64, u64),
    modulus: u64,
    accept: impl Fn(i64, i64) -> bool,
    eval: impl Fn(i64, i64) -> Result<T>,
) -> Result<T> {
    let (a1, b1) = lift(rng, class, modulus, &accept)?;
    let (a2, b2) = lift(rng, class, modulus, &accept)?;
    let (x, y) = (eval(a1, b1)?, eval(a2, b2)?);
    if x != y {
        return Err(Error::Consistency(format!(
            "class {class:?} mod {modulus}: lifts ({a1}, {b1}) and ({a2}, {b2}) give {x:?} vs {y:?}"
        )));
    }
    Ok(x)
}

fn class_seed(seed: u64, salt: u64, x: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ x.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

/// `S_{Q,m}`, built as a CRT product of one factor mod 12 and one factor mod
/// `p^{e_p + 2}` for each `5 ≤ p < q`.
pub fn build_sqm(plan: &QCPlan, spec: &FamilySpec, m: u64, seed: u64) -> Result<ResidueSet> {
    plan.check_divisor(m)?;
    plan.check_scan_size()?;
    let v2 = val_unchecked(m as i128, 2);
    // factor at 2 and 3: congruences mod 6 and the 2-part of gcd(|Δ|/N, C)
    let mut mod12 = Vec::new();
    for x in 0..12u64 {
        for y in 0..12u64 {
            if x % 6 != spec.r() as u64 || y % 6 != spec.t() as u64 {
                continue;
            }
            let mut rng = class_seed(seed, 12, x * 12 + y);
            let v = agreed(&mut rng, (x, y), 12, |_, _| true, |a, b| capped_ratio_valuation(a, b, 2, 2, spec))?;
            if v == v2 {
                mod12.push((x, y));
            }
        }
    }
    let mut factors = vec![ResidueSet::from_pairs(12, mod12)];
    for &(p, e) in &plan.local {
        let pm = p.pow(e + 2);
        let target = val_unchecked(m as i128, p);
        let impose_minimal = e + 2 >= 6;
        let set = ResidueSet::from_predicate(pm, |x, y| {
            if impose_minimal && x % p.pow(4) == 0 && y % p.pow(6) == 0 {
                return false;
            }
            let mut rng = class_seed(seed, pm, x * pm + y);
            let v = agreed(&mut rng, (x, y), pm, minimal_at(p), |a, b| {
                capped_ratio_valuation(a, b, p, e, spec)
            })
            .expect("class determinacy");
            v == target
        });
        factors.push(set);
    }
    ResidueSet::product(factors)
}

/// Scans every pair of `(ℤ/Qℤ)²`, applies the congruences mod 6 and the
/// minimality condition at primes with `p⁶ | Q`, and sorts survivors by
/// `gcd(|Δ|/N, C)` of a random lift (two lifts, asserted equal).
pub fn scan_sqm_exhaustive(plan: &QCPlan, spec: &FamilySpec, seed: u64) -> Result<BTreeMap<u64, ResidueSet>> {
    plan.check_scan_size()?;
    let q = plan.big_q;
    let c_primes: Vec<(u64, u32)> = plan.c_primes().into_iter().filter(|&(_, e)| e > 0).collect();
    let minimal_primes: Vec<u64> = plan
        .local
        .iter()
        .filter(|&&(_, e)| e + 2 >= 6)
        .map(|&(p, _)| p)
        .collect();
    let accept = |a: i64, b: i64| c_primes.iter().all(|&(p, _)| p == 2 || minimal_at(p)(a, b));
    let tagged: Vec<(u64, (u64, u64))> = (0..q)
        .into_par_iter()
        .filter(|a| a % 6 == spec.r() as u64)
        .map(|a| -> Result<Vec<(u64, (u64, u64))>> {
            let mut out = Vec::new();
            for b in 0..q {
                if b % 6 != spec.t() as u64 {
                    continue;
                }
                if minimal_primes.iter().any(|&p| a % p.pow(4) == 0 && b % p.pow(6) == 0) {
                    continue;
                }
                let mut rng = class_seed(seed, q, a * q + b);
                let g = agreed(&mut rng, (a, b), q, accept, |x, y| {
                    c_primes.iter().try_fold(1u64, |acc, &(p, e)| {
                        Ok(acc * p.pow(capped_ratio_valuation(x, y, p, e, spec)?))
                    })
                })?;
                out.push((g, (a, b)));
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let mut by_m: BTreeMap<u64, Vec<(u64, u64)>> = plan.divisors_of_c().into_iter().map(|d| (d, Vec::new())).collect();
    for (g, pair) in tagged {
        by_m.get_mut(&g)
            .ok_or_else(|| Error::Consistency(format!("gcd {g} does not divide C")))?
            .push(pair);
    }
    Ok(by_m.into_iter().map(|(m, v)| (m, ResidueSet::from_pairs(q, v))).collect())
}

/// True iff no member admits `d` with `gcd(d, Q) > 1`, `gcd(d⁴, Q) | gcd(a, Q)`
/// and `gcd(d⁶, Q) | gcd(b, Q)`. Any such `d` has a prime factor `p | Q`, and
/// `d = p` is then a witness too, so only primes need checking.
pub fn verify_no_d_property(set: &ResidueSet) -> Result<bool> {
    for factor in set.factors() {
        let q = factor.modulus();
        let primes: Vec<(u64, u32)> = crate::arith::factor(q as i128)?
            .factors()
            .iter()
            .map(|&(p, e)| (p as u64, e))
            .collect();
        let witness = |a: u64, b: u64| {
            primes.iter().any(|&(p, e)| {
                let (d4, d6) = (p.pow(e.min(4)), p.pow(e.min(6)));
                a % d4 == 0 && b % d6 == 0
            })
        };
        let ok = match &factor.repr {
            Repr::All => q == 1,
            Repr::Explicit(s) => !s.par_iter().any(|&(a, b)| witness(a, b)),
            Repr::Product(_) => unreachable!("factors() flattens products"),
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `#S_{Q,m} / Q²` predicted from the local densities:
/// `(1/36) ∏_{p<q} d_p(m)` with `d_p(m) = ρ(p, p^{v_p(m)})` below the cap
/// `v_p(C)` and, at the cap, the mass of all classes with `v_p(|Δ|/N) ≥ v_p(C)`.
pub fn predicted_density(plan: &QCPlan, m: u64) -> Result<BigRational> {
    plan.check_divisor(m)?;
    let mut acc = BigRational::new(BigInt::one(), BigInt::from(36));
    for (p, cap) in plan.c_primes() {
        let v = val_unchecked(m as i128, p);
        let d = if v < cap {
            rho_prime_power(p, v)
        } else {
            // classes with v_p(|Δ|/N) ≥ cap: everything minus lower rows
            let below: BigRational = (0..cap).map(|n| rho_prime_power(p, n)).sum();
            let mut total = BigRational::one();
            let minimality_imposed = plan.local.iter().any(|&(q, e)| q == p && e + 2 >= 6);
            if p >= 5 && minimality_imposed {
                total -= BigRational::new(BigInt::one(), BigInt::from(p).pow(10));
            }
            total - below
        };
        acc *= d;
    }
    Ok(acc)
}

/// Number of classes in `(ℤ/p^η)²` on which every lift has type `T`, for each
/// type whose deciding modulus is exactly `p^η`. Types come from Tate's
/// algorithm on two random minimal lifts per class.
pub fn count_type_classes(p: u64, eta: u32, seed: u64) -> Result<BTreeMap<ReductionType, u128>> {
    if p < 5 {
        return domain("type class counts are tabulated for p ≥ 5");
    }
    let modulus = p.pow(eta);
    let counts = (0..modulus)
        .into_par_iter()
        .map(|x| -> Result<BTreeMap<ReductionType, u128>> {
            let mut local = BTreeMap::new();
            for y in 0..modulus {
                let mut rng = class_seed(seed, modulus, x * modulus + y);
                let (a1, b1) = lift(&mut rng, (x, y), modulus, minimal_at(p))?;
                let (a2, b2) = lift(&mut rng, (x, y), modulus, minimal_at(p))?;
                let t1 = tate_oracle(a1, b1, p)?.kind;
                let t2 = tate_oracle(a2, b2, p)?.kind;
                let decided = |t: ReductionType| TypeDensity::of(t).eta == eta;
                match (decided(t1), decided(t2)) {
                    (true, true) if t1 == t2 => *local.entry(t1).or_insert(0) += 1,
                    (false, false) => {}
                    _ if t1 == t2 => {}
                    _ => {
                        if decided(t1) || decided(t2) {
                            return Err(Error::Consistency(format!(
                                "class ({x}, {y}) mod {p}^{eta}: lifts have types {t1} and {t2}"
                            )));
                        }
                    }
                }
            }
            Ok(local)
        })
        .try_reduce(BTreeMap::new, |mut acc, part| {
            for (k, v) in part {
                *acc.entry(k).or_insert(0) += v;
            }
            Ok(acc)
        })?;
    Ok(counts)
}

/// `#S / Q²` as an exact rational.
pub fn density_of(set: &ResidueSet) -> BigRational {
    let q = BigInt::from(set.modulus());
    BigRational::new(BigInt::from(set.cardinality()), &q * &q)
}

pub fn is_zero_density(set: &ResidueSet) -> bool {
    set.cardinality().is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec11() -> FamilySpec {
        FamilySpec::new(1e6, 1, 1).unwrap()
    }

    #[test]
    fn plan_examples() {
        let p = build_plan(7).unwrap();
        assert_eq!((p.big_q, p.c), (1500, 20));
        let p = build_plan(6).unwrap();
        assert_eq!((p.big_q, p.c), (1500, 20));
        let p = build_plan(11).unwrap();
        assert_eq!((p.big_q, p.c), (12 * 125 * 343, 4 * 5 * 7));
        let p = build_plan(13).unwrap();
        assert_eq!((p.big_q, p.c), (12 * 125 * 343 * 1331, 4 * 5 * 7 * 11));
        assert!(build_plan(30).is_err());
        assert!(build_plan(5).is_err());
    }

    #[test]
    fn crt_round_trip() {
        for a in 0..12u64 {
            for b in 0..125u64 {
                let x = crt(a, 12, b, 125);
                assert_eq!((x % 12, x % 125), (a, b));
            }
        }
    }

    #[test]
    fn product_membership_and_cardinality() {
        let f1 = ResidueSet::from_pairs(4, [(1, 1), (3, 1)]);
        let f2 = ResidueSet::from_pairs(9, [(2, 5)]);
        let s = ResidueSet::product(vec![f1, f2]).unwrap();
        assert_eq!(s.modulus(), 36);
        assert_eq!(s.cardinality(), 2);
        let members = s.members();
        assert_eq!(members.len(), 2);
        for (a, b) in members {
            assert!(s.contains(a, b));
            assert!(a % 4 == 1 || a % 4 == 3);
            assert_eq!((a % 9, b % 9, b % 4), (2, 5, 1));
        }
        assert!(ResidueSet::product(vec![ResidueSet::all(4), ResidueSet::all(6)]).is_err());
    }

    #[test]
    fn non_divisor_rejected() {
        let plan = build_plan(7).unwrap();
        assert!(matches!(build_sqm(&plan, &spec11(), 3, 1), Err(Error::Domain(_))));
        assert!(predicted_density(&plan, 3).is_err());
    }

    #[test]
    fn no_d_witnesses() {
        let s = ResidueSet::from_pairs(1500, [(0, 0)]);
        assert!(!verify_no_d_property(&s).unwrap());
        let s = ResidueSet::from_pairs(1500, [(125, 250)]);
        assert!(!verify_no_d_property(&s).unwrap());
        let s = ResidueSet::from_pairs(1500, [(1, 1), (7, 13)]);
        assert!(verify_no_d_property(&s).unwrap());
        assert!(!verify_no_d_property(&ResidueSet::all(6)).unwrap());
    }

    #[test]
    fn s_q_1_at_q7() {
        let plan = build_plan(7).unwrap();
        let s = build_sqm(&plan, &spec11(), 1, 42).unwrap();
        assert_eq!(s.cardinality(), 30000);
        assert!(verify_no_d_property(&s).unwrap());
        assert_eq!(density_of(&s), predicted_density(&plan, 1).unwrap());
    }

    #[test]
    fn lemma_6_5_at_q11_all_divisors() {
        let plan = build_plan(11).unwrap();
        let spec = FamilySpec::new(1e6, 2, 5).unwrap();
        let mut total = 0u128;
        for m in plan.divisors_of_c() {
            let s = build_sqm(&plan, &spec, m, 9).unwrap();
            // the capped bucket v_p(m) = v_p(C) at p ≥ 5 holds (0, 0) mod p³
            let capped = plan.local.iter().any(|&(p, e)| m % p.pow(e) == 0);
            assert_eq!(verify_no_d_property(&s).unwrap(), !capped, "m = {m}");
            assert_eq!(density_of(&s), predicted_density(&plan, m).unwrap(), "m = {m}");
            total += s.cardinality();
        }
        let q = plan.big_q as u128;
        assert_eq!(total, q * q / 36);
    }

    #[test]
    fn type_counts_mod_5_squared() {
        let counts = count_type_classes(5, 2, 3).unwrap();
        use ReductionType::*;
        assert_eq!(counts.get(&I(1)), Some(&80));
        assert_eq!(counts.get(&II), Some(&20));
        assert_eq!(counts.get(&III), Some(&4));
    }
}
