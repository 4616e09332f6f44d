//! Reduction types and conductor exponents of family members.
//!
//! The fast path reads the type at 2 off a table keyed by `(a, b) mod 12`,
//! knows reduction at 3 is always good, and classifies `p ≥ 5` from
//! `(v_p(a), v_p(Δ))`. [`tate`] is the independent slow path.

pub mod tate;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::arith::{factor, is_prime, val_unchecked, FactoredInteger};
use crate::error::{domain, Error, Result};
use crate::family::{discriminant, CurveParams, FamilySpec};

pub use tate::{tate_local, tate_oracle, Weierstrass};

/// Kodaira symbol of the special fiber.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ReductionType {
    /// `I_n`; `I_0` is good reduction.
    I(u32),
    II,
    III,
    IV,
    /// `I_n*`.
    IStar(u32),
    IVStar,
    IIIStar,
    IIStar,
}

impl ReductionType {
    /// Number of irreducible components of the special fiber.
    pub fn components(self) -> u32 {
        use ReductionType::*;
        match self {
            I(0) => 1,
            I(n) => n,
            II => 1,
            III => 2,
            IV => 3,
            IStar(n) => 5 + n,
            IVStar => 7,
            IIIStar => 8,
            IIStar => 9,
        }
    }

    pub fn is_additive(self) -> bool {
        !matches!(self, ReductionType::I(_))
    }
}

impl fmt::Display for ReductionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ReductionType::*;
        match self {
            I(n) => write!(f, "I{n}"),
            II => f.write_str("II"),
            III => f.write_str("III"),
            IV => f.write_str("IV"),
            IStar(n) => write!(f, "I{n}*"),
            IVStar => f.write_str("IV*"),
            IIIStar => f.write_str("III*"),
            IIStar => f.write_str("II*"),
        }
    }
}

/// Local data at one prime. `v_ratio = v_p(Δ/N) = v_delta − f`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalInvariants {
    pub p: u64,
    pub kind: ReductionType,
    pub v_delta: u32,
    pub f: u32,
    pub v_ratio: u32,
}

impl LocalInvariants {
    fn new(p: u64, kind: ReductionType, v_delta: u32, f: u32) -> Result<Self> {
        let v_ratio = v_delta.checked_sub(f).ok_or_else(|| {
            Error::Consistency(format!("conductor exponent {f} exceeds v(Δ) = {v_delta} at p = {p}"))
        })?;
        Ok(Self { p, kind, v_delta, f, v_ratio })
    }

    /// The triple both classification paths must agree on.
    pub fn signature(&self) -> (ReductionType, u32, u32) {
        (self.kind, self.f, self.v_ratio)
    }
}

/// Discriminant, conductor, and local data at every prime dividing `Δ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurveInvariants {
    pub delta: FactoredInteger,
    pub conductor: u128,
    pub locals: Vec<LocalInvariants>,
}

impl CurveInvariants {
    /// `|Δ| / N`.
    pub fn ratio(&self) -> u128 {
        self.delta.value().unsigned_abs() / self.conductor
    }
}

use ReductionType::{II, III, IV};

// (r, a mod 12, b mod 12, type) for r ∈ {1, 2}; r = 5 and r = 4 reuse these
// rows with a shifted by 4 and 8.
const REDUCTION_AT_2: [(u8, u8, u8, ReductionType); 24] = [
    (1, 1, 1, II),
    (1, 1, 7, III),
    (1, 7, 1, IV),
    (1, 7, 7, II),
    (1, 1, 3, III),
    (1, 1, 9, II),
    (1, 7, 3, II),
    (1, 7, 9, IV),
    (1, 1, 5, II),
    (1, 1, 11, III),
    (1, 7, 5, IV),
    (1, 7, 11, II),
    (2, 2, 1, III),
    (2, 2, 7, II),
    (2, 8, 1, IV),
    (2, 8, 7, II),
    (2, 2, 3, II),
    (2, 2, 9, III),
    (2, 8, 3, II),
    (2, 8, 9, IV),
    (2, 2, 5, III),
    (2, 2, 11, II),
    (2, 8, 5, IV),
    (2, 8, 11, II),
];

/// Type at 2 from the `(a, b) mod 12` table. Within the family `v₂(Δ) = 4`,
/// and Ogg's formula turns types II, III, IV into `f = 4, 3, 2`.
pub fn reduction_at_2(a: i64, b: i64, spec: &FamilySpec) -> Result<LocalInvariants> {
    if a.rem_euclid(6) != spec.r() as i64 || b.rem_euclid(6) != spec.t() as i64 {
        return domain(format!(
            "(a, b) = ({a}, {b}) is not ≡ ({}, {}) mod 6",
            spec.r(),
            spec.t()
        ));
    }
    let (block, shift) = match spec.r() {
        1 => (1, 0),
        5 => (1, 4),
        2 => (2, 0),
        4 => (2, 8),
        r => return domain(format!("r = {r} is not admissible")),
    };
    let a12 = (a - shift).rem_euclid(12) as u8;
    let b12 = b.rem_euclid(12) as u8;
    let kind = REDUCTION_AT_2
        .iter()
        .find(|&&(r, x, y, _)| r == block && x == a12 && y == b12)
        .map(|&(.., k)| k)
        .ok_or_else(|| Error::Consistency(format!("no table entry for a ≡ {a12}, b ≡ {b12} (mod 12)")))?;
    let f = match kind {
        II => 4,
        III => 3,
        IV => 2,
        _ => unreachable!(),
    };
    LocalInvariants::new(2, kind, 4, f)
}

/// Family members have good reduction at 3.
pub fn reduction_at_3(a: i64, b: i64, _spec: &FamilySpec) -> Result<LocalInvariants> {
    if a % 3 == 0 {
        return domain(format!("3 | a = {a}: outside the family"));
    }
    let v = val_unchecked(discriminant(a, b), 3);
    if v != 0 {
        return Err(Error::Consistency(format!("3 | Δ for (a, b) = ({a}, {b})")));
    }
    LocalInvariants::new(3, ReductionType::I(0), 0, 0)
}

/// Classification at `p ≥ 5` from `(v_p(a), v_p(Δ))`, checked against the
/// table of types admissible for each `p`-part of `Δ/N`.
pub fn reduction_at_p(a: i64, b: i64, p: u64) -> Result<LocalInvariants> {
    if p < 5 || !is_prime(p as u128) {
        return domain(format!("reduction_at_p needs a prime p ≥ 5, got {p}"));
    }
    let disc = discriminant(a, b);
    if disc == 0 {
        return domain("singular curve");
    }
    let vd = val_unchecked(disc, p);
    let local = classify_large_prime(val_unchecked(a as i128, p), vd, p)?;
    if !table3_row(local.v_ratio).contains(&local.kind) {
        return Err(Error::Consistency(format!(
            "type {} with p-part p^{} of Δ/N is not admissible (p = {p}, a = {a}, b = {b})",
            local.kind, local.v_ratio
        )));
    }
    Ok(local)
}

fn classify_large_prime(va: u32, vd: u32, p: u64) -> Result<LocalInvariants> {
    use ReductionType::*;
    if vd == 0 {
        return LocalInvariants::new(p, I(0), 0, 0);
    }
    if va == 0 {
        return LocalInvariants::new(p, I(vd), vd, 1);
    }
    let kind = match (va, vd) {
        (_, 2) => II,
        (_, 3) => III,
        (_, 4) => IV,
        (2, n) if n >= 6 => IStar(n - 6),
        (_, 6) => IStar(0),
        (_, 8) => IVStar,
        (_, 9) => IIIStar,
        (_, 10) => IIStar,
        _ => return Err(Error::NonMinimal { p }),
    };
    LocalInvariants::new(p, kind, vd, 2)
}

/// Types at `p ≥ 5` whose `p`-part of `Δ/N` is `p^n`.
pub fn table3_row(n: u32) -> Vec<ReductionType> {
    use ReductionType::*;
    match n {
        0 => vec![I(0), I(1), II],
        1 => vec![I(2), III],
        2 => vec![I(3), IV],
        3 => vec![I(4)],
        4 => vec![I(5), IStar(0)],
        5 => vec![I(6), IStar(1)],
        6 => vec![I(7), IStar(2), IVStar],
        7 => vec![I(8), IStar(3), IIIStar],
        8 => vec![I(9), IStar(4), IIStar],
        n => vec![I(n + 1), IStar(n - 4)],
    }
}

/// Least modulus `p^η` deciding a type at `p ≥ 5`, and the proportion of
/// residue classes mod `p^η` with that type, as
/// `(η, numerator exponent of (p − 1), denominator exponent of p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TypeDensity {
    pub kind: ReductionType,
    pub eta: u32,
    pub unit_power: u32,
    pub p_power: u32,
}

impl TypeDensity {
    pub fn of(kind: ReductionType) -> Self {
        use ReductionType::*;
        let (eta, unit_power, p_power) = match kind {
            I(0) => (1, 1, 1),
            I(n) => (n + 1, 2, n + 2),
            II => (2, 1, 3),
            III => (2, 1, 4),
            IV => (3, 1, 5),
            IStar(0) => (4, 1, 6),
            IStar(n) => (n + 4, 2, n + 7),
            IVStar => (5, 1, 8),
            IIIStar => (5, 1, 9),
            IIStar => (6, 1, 10),
        };
        Self { kind, eta, unit_power, p_power }
    }

    /// Expected number of classes in `(ℤ/p^η)²` with this type.
    pub fn expected_count(&self, p: u64) -> u128 {
        let p = p as u128;
        (p - 1).pow(self.unit_power) * p.pow(2 * self.eta) / p.pow(self.p_power)
    }
}

/// Factors `Δ` and assembles `N = ∏ p^{f_p}` through the fast path.
pub fn conductor(params: &CurveParams) -> Result<CurveInvariants> {
    let (a, b) = (params.a, params.b);
    let delta = factor(discriminant(a, b))?;
    let mut locals = Vec::with_capacity(delta.factors().len());
    for &(p, e) in delta.factors() {
        let p = p as u64;
        let local = match p {
            2 => reduction_at_2(a, b, &params.spec)?,
            3 => reduction_at_3(a, b, &params.spec)?,
            _ => reduction_at_p(a, b, p)?,
        };
        if local.v_delta != e {
            return Err(Error::Consistency(format!(
                "v_{p}(Δ) = {e} but the local classifier saw {}",
                local.v_delta
            )));
        }
        locals.push(local);
    }
    Ok(assemble(delta, locals))
}

/// Same as [`conductor`] but every prime goes through Tate's algorithm.
pub fn conductor_via_oracle(a: i64, b: i64) -> Result<CurveInvariants> {
    let delta = factor(discriminant(a, b))?;
    let locals = delta
        .primes()
        .map(|p| tate_oracle(a, b, p as u64))
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(delta, locals))
}

/// Primes where the fast classifier and Tate's algorithm disagree on
/// `(type, f, v_p(Δ/N))`, with both signatures.
pub fn oracle_mismatches(params: &CurveParams) -> Result<Vec<Mismatch>> {
    let fast = conductor(params)?;
    let slow = conductor_via_oracle(params.a, params.b)?;
    Ok(fast
        .locals
        .iter()
        .zip(&slow.locals)
        .filter(|(x, y)| x.signature() != y.signature())
        .map(|(x, y)| Mismatch { a: params.a, b: params.b, p: x.p, fast: x.signature(), oracle: y.signature() })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    pub a: i64,
    pub b: i64,
    pub p: u64,
    pub fast: (ReductionType, u32, u32),
    pub oracle: (ReductionType, u32, u32),
}

fn assemble(delta: FactoredInteger, locals: Vec<LocalInvariants>) -> CurveInvariants {
    let conductor = locals
        .iter()
        .map(|l| (l.p as u128).pow(l.f))
        .product();
    CurveInvariants { delta, conductor, locals }
}
