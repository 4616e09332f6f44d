//! The height-ordered family `y² = x³ + ax + b` with `a ≡ r`, `b ≡ t (mod 6)`,
//! `|a| ≤ H^{1/3}`, `|b| ≤ H^{1/2}` and no prime with `p⁴ | a` and `p⁶ | b`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{moebius, prime_table};
use crate::congruence::ResidueSet;
use crate::error::{domain, Result};

/// Height bound plus the residues `r` (`3 ∤ r`) and `t` (`2 ∤ t`) mod 6.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    height: f64,
    r: u8,
    t: u8,
}

impl FamilySpec {
    pub fn new(height: f64, r: i64, t: i64) -> Result<Self> {
        if !(height > 0.0) || !height.is_finite() {
            return domain(format!("height must be positive and finite, got {height}"));
        }
        let (r, t) = (r.rem_euclid(6) as u8, t.rem_euclid(6) as u8);
        if r % 3 == 0 {
            return domain(format!("r must not be divisible by 3 (r = {r} mod 6)"));
        }
        if t % 2 == 0 {
            return domain(format!("t must be odd (t = {t} mod 6)"));
        }
        Ok(Self { height, r, t })
    }

    /// The twelve admissible `(r, t)` residue pairs.
    pub fn all_residue_pairs() -> impl Iterator<Item = (u8, u8)> {
        [1u8, 2, 4, 5]
            .into_iter()
            .flat_map(|r| [1u8, 3, 5].into_iter().map(move |t| (r, t)))
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn r(&self) -> u8 {
        self.r
    }

    pub fn t(&self) -> u8 {
        self.t
    }

    pub fn with_height(&self, height: f64) -> Result<Self> {
        Self::new(height, self.r as i64, self.t as i64)
    }

    /// `⌊H^{1/3}⌋`, computed as an exact integer root of `⌊H⌋`.
    pub fn a_bound(&self) -> i64 {
        icbrt(self.height.floor() as u64) as i64
    }

    /// `⌊H^{1/2}⌋`, computed as an exact integer root of `⌊H⌋`.
    pub fn b_bound(&self) -> i64 {
        isqrt(self.height.floor() as u64) as i64
    }

    fn congruent(&self, a: i64, b: i64) -> bool {
        a.rem_euclid(6) == self.r as i64 && b.rem_euclid(6) == self.t as i64
    }
}

/// A member `E_{a,b}` of the family, with the family it was drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveParams {
    pub a: i64,
    pub b: i64,
    pub spec: FamilySpec,
}

impl CurveParams {
    pub fn discriminant(&self) -> i128 {
        discriminant(self.a, self.b)
    }
}

/// `−16(4a³ + 27b²)`.
pub fn discriminant(a: i64, b: i64) -> i128 {
    let (a, b) = (a as i128, b as i128);
    -16 * (4 * a * a * a + 27 * b * b)
}

pub fn isqrt(n: u64) -> u64 {
    let mut x = (n as f64).sqrt() as u64;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

pub fn icbrt(n: u64) -> u64 {
    let mut x = (n as f64).cbrt() as u64;
    let cube = |v: u64| (v as u128).pow(3);
    while x > 0 && cube(x) > n as u128 {
        x -= 1;
    }
    while cube(x + 1) <= n as u128 {
        x += 1;
    }
    x
}

/// No prime `p` has `p⁴ | a` and `p⁶ | b`. With `a = 0` this reads "b is
/// sixth-power free"; with `b = 0`, "a is fourth-power free".
pub fn is_minimal_pair(a: i64, b: i64) -> bool {
    let (a, b) = (a.unsigned_abs(), b.unsigned_abs());
    if a == 0 && b == 0 {
        return false;
    }
    for &p in prime_table() {
        let p4 = p.pow(4);
        // a prime with p⁴ | a needs p⁴ ≤ a unless a = 0, likewise p⁶ ≤ b
        let a_possible = a == 0 || p4 <= a;
        let b_possible = b == 0 || p.checked_pow(6).is_some_and(|p6| p6 <= b);
        if !a_possible || !b_possible {
            break;
        }
        if a % p4 == 0 && b % p.pow(6) == 0 {
            return false;
        }
    }
    true
}

pub fn is_member(spec: &FamilySpec, a: i64, b: i64) -> bool {
    a.abs() <= spec.a_bound()
        && b.abs() <= spec.b_bound()
        && spec.congruent(a, b)
        && is_minimal_pair(a, b)
        && discriminant(a, b) != 0
}

/// Smallest value `≥ lo` congruent to `residue` mod 6.
fn first_congruent(lo: i64, residue: u8) -> i64 {
    lo + (residue as i64 - lo).rem_euclid(6)
}

/// Contiguous b-ranges covering the family's b-values.
#[derive(Debug, Clone)]
pub struct ShardPlan {
    pub shards: Vec<(i64, i64)>,
}

impl ShardPlan {
    pub fn new(spec: &FamilySpec, shard_count: usize) -> Self {
        let bb = spec.b_bound();
        let first = first_congruent(-bb, spec.t);
        let n_b = if first > bb { 0 } else { (bb - first) / 6 + 1 };
        let shard_count = shard_count.max(1) as i64;
        let per = (n_b + shard_count - 1) / shard_count.max(1);
        let mut shards = Vec::new();
        let mut i = 0;
        while i < n_b {
            let j = (i + per.max(1)).min(n_b);
            shards.push((first + 6 * i, first + 6 * (j - 1)));
            i = j;
        }
        Self { shards }
    }

    pub fn default_for(spec: &FamilySpec) -> Self {
        Self::new(spec, rayon::current_num_threads() * 8)
    }
}

fn visit_shard(spec: &FamilySpec, (b_lo, b_hi): (i64, i64), mut visit: impl FnMut(CurveParams)) -> u64 {
    let ab = spec.a_bound();
    let a_first = first_congruent(-ab, spec.r);
    let mut count = 0;
    let mut b = b_lo;
    while b <= b_hi {
        let mut a = a_first;
        while a <= ab {
            if is_minimal_pair(a, b) && discriminant(a, b) != 0 {
                visit(CurveParams { a, b, spec: *spec });
                count += 1;
            }
            a += 6;
        }
        b += 6;
    }
    count
}

/// Visits every member once, in `(b, a)` lexicographic order, on the calling
/// thread. This is the golden path.
pub fn enumerate_sequential(spec: &FamilySpec, mut visitor: impl FnMut(CurveParams)) -> u64 {
    ShardPlan::new(spec, 1)
        .shards
        .iter()
        .map(|&s| visit_shard(spec, s, &mut visitor))
        .sum()
}

/// Visits every member once; shards run concurrently, so `visitor` may be
/// called from several threads at once.
pub fn enumerate(spec: &FamilySpec, visitor: impl Fn(CurveParams) + Sync) -> u64 {
    ShardPlan::default_for(spec)
        .shards
        .par_iter()
        .map(|&s| visit_shard(spec, s, &visitor))
        .sum()
}

/// Shard-parallel fold. Each shard folds its curves in order, then shard
/// results are combined with `reduce`, which must be associative and
/// commutative for the result to be independent of scheduling.
pub fn fold_family<T, Id, F, R>(spec: &FamilySpec, plan: &ShardPlan, identity: Id, fold: F, reduce: R) -> T
where
    T: Send,
    Id: Fn() -> T + Sync + Send,
    F: Fn(&mut T, CurveParams) + Sync + Send,
    R: Fn(T, T) -> T + Sync + Send,
{
    plan.shards
        .par_iter()
        .map(|&s| {
            let mut acc = identity();
            visit_shard(spec, s, |c| fold(&mut acc, c));
            acc
        })
        .reduce(&identity, &reduce)
}

pub fn family_size(spec: &FamilySpec) -> u64 {
    enumerate(spec, |_| {})
}

/// Integers in `[-bound, bound]` congruent to `c` mod 6.
fn count_in_symmetric_range(bound: i64, c: i64) -> u64 {
    if bound < 0 {
        return 0;
    }
    let first = first_congruent(-bound, c.rem_euclid(6) as u8);
    if first > bound {
        0
    } else {
        ((bound - first) / 6 + 1) as u64
    }
}

/// `#F(H)` by the Möbius sieve
/// `Σ_d μ(d) #{(α, β) : |αd⁴| ≤ A, |βd⁶| ≤ B, αd⁴ ≡ r, βd⁶ ≡ t (mod 6)}`.
/// Independent of the enumerator; only `d` coprime to 6 contribute.
pub fn moebius_family_count(spec: &FamilySpec) -> Result<u64> {
    let (ab, bb) = (spec.a_bound(), spec.b_bound());
    let mut total: i64 = 0;
    let mut d: i64 = 1;
    while d.pow(4) <= ab.max(1) && d.pow(6) <= bb.max(1) {
        let mu = moebius(d as u64)? as i64;
        if mu != 0 && d % 2 != 0 && d % 3 != 0 {
            let (d4, d6) = (d.pow(4), d.pow(6));
            // d is a unit mod 6, and every unit of Z/6 is its own inverse
            let alpha_res = (spec.r as i64 * d4) % 6;
            let beta_res = (spec.t as i64 * d6) % 6;
            let n_alpha = count_in_symmetric_range(ab / d4, alpha_res);
            let n_beta = count_in_symmetric_range(bb / d6, beta_res);
            total += mu * (n_alpha * n_beta) as i64;
        }
        d += 1;
    }
    Ok(total as u64)
}

/// Exact count of pairs with `|a| < H^{1/3}`, `|b| < H^{1/2}`, residues in
/// `set`, and `λ₀ < −16(4a³ + 27b²)/H < λ₁`, by direct enumeration.
pub fn count_disc_window(height: f64, set: &ResidueSet, lambda0: f64, lambda1: f64) -> Result<u64> {
    if !(lambda0 < lambda1) {
        return domain("window needs lambda0 < lambda1");
    }
    if !(height > 0.0) {
        return domain("height must be positive");
    }
    // |a|³ < H  ⟺  |a|³ ≤ ⌈H⌉ − 1
    let below = (height.ceil() as u64).saturating_sub(1);
    let (amax, bmax) = (icbrt(below) as i64, isqrt(below) as i64);
    let q = set.modulus() as i64;
    let (lo, hi) = (lambda0 * height, lambda1 * height);
    let mut count = 0;
    for b in -bmax..=bmax {
        let br = b.rem_euclid(q) as u64;
        for a in -amax..=amax {
            if !set.contains(a.rem_euclid(q) as u64, br) {
                continue;
            }
            let d = discriminant(a, b) as f64;
            if lo < d && d < hi {
                count += 1;
            }
        }
    }
    Ok(count)
}
