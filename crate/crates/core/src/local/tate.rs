//! Tate's algorithm over ℤ for a long Weierstrass model at a single prime.
//!
//! This is the slow reference path. It works for every prime including 2 and
//! 3, and reads the conductor exponent off Ogg's formula
//! `f = v(Δ) − m + 1`, `m` the number of components of the special fiber.

use super::{LocalInvariants, ReductionType};
use crate::arith::{is_prime, val_unchecked};
use crate::error::{domain, Error, Result};

/// `[a1, a2, a3, a4, a6]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Weierstrass {
    pub a1: i128,
    pub a2: i128,
    pub a3: i128,
    pub a4: i128,
    pub a6: i128,
}

impl Weierstrass {
    pub fn short(a: i128, b: i128) -> Self {
        Self { a1: 0, a2: 0, a3: 0, a4: a, a6: b }
    }

    fn b2(&self) -> i128 {
        self.a1 * self.a1 + 4 * self.a2
    }

    fn b4(&self) -> i128 {
        2 * self.a4 + self.a1 * self.a3
    }

    fn b6(&self) -> i128 {
        self.a3 * self.a3 + 4 * self.a6
    }

    fn b8(&self) -> i128 {
        let Self { a1, a2, a3, a4, a6 } = *self;
        a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
    }

    pub fn c4(&self) -> i128 {
        let b2 = self.b2();
        b2 * b2 - 24 * self.b4()
    }

    pub fn discriminant(&self) -> i128 {
        let (b2, b4, b6, b8) = (self.b2(), self.b4(), self.b6(), self.b8());
        -b2 * b2 * b8 - 8 * b4 * b4 * b4 - 27 * b6 * b6 + 9 * b2 * b4 * b6
    }

    /// `x = x' + r`, `y = y' + s x' + t` (the `u = 1` coordinate change).
    fn rst(&self, r: i128, s: i128, t: i128) -> Self {
        let Self { a1, a2, a3, a4, a6 } = *self;
        Self {
            a1: a1 + 2 * s,
            a2: a2 - s * a1 + 3 * r - s * s,
            a3: a3 + r * a1 + 2 * t,
            a4: a4 - s * a3 + 2 * r * a2 - (t + r * s) * a1 + 3 * r * r - 2 * s * t,
            a6: a6 + r * a4 + r * r * a2 + r * r * r - t * a3 - t * t - r * t * a1,
        }
    }
}

fn v(n: i128, p: i128) -> u32 {
    val_unchecked(n, p as u64)
}

fn divisible(n: i128, p: i128) -> bool {
    n % p == 0
}

fn reduce(n: i128, p: i128) -> i128 {
    n.rem_euclid(p)
}

fn inverse_mod(n: i128, p: i128) -> i128 {
    // p is prime and small; Fermat
    let mut base = reduce(n, p);
    let mut exp = p - 2;
    let mut acc = 1;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        exp >>= 1;
    }
    acc
}

/// Runs Tate's algorithm on `y² = x³ + ax + b` at `p`.
pub fn tate_oracle(a: i64, b: i64, p: u64) -> Result<LocalInvariants> {
    tate_local(&Weierstrass::short(a as i128, b as i128), p)
}

/// Runs Tate's algorithm on an arbitrary integral model at `p`. The model must
/// be minimal at `p`; reaching the non-minimal branch is an error.
pub fn tate_local(curve: &Weierstrass, p: u64) -> Result<LocalInvariants> {
    if !is_prime(p as u128) {
        return domain(format!("{p} is not prime"));
    }
    let disc = curve.discriminant();
    if disc == 0 {
        return domain("singular model");
    }
    let n = v(disc, p as i128);
    let done = |kind: ReductionType| -> Result<LocalInvariants> {
        let m = kind.components();
        let f = (n + 1).checked_sub(m).ok_or_else(|| {
            Error::Consistency(format!("{kind} has {m} components but v(Δ) = {n} at p = {p}"))
        })?;
        Ok(LocalInvariants { p, kind, v_delta: n, f, v_ratio: n - f })
    };
    if n == 0 {
        return done(ReductionType::I(0));
    }
    let pi = p as i128;
    // multiplicative reduction is detected by p ∤ c4 in every characteristic
    if !divisible(curve.c4(), pi) {
        return done(ReductionType::I(n));
    }

    // Move the singular point to (0, 0): afterwards p | a3, a4, a6.
    let mut c = *curve;
    let (b2, b4, b6) = (c.b2(), c.b4(), c.b6());
    let (r, t) = match p {
        2 => {
            if divisible(b2, 2) {
                let r = reduce(c.a4, 2);
                (r, reduce(r * (1 + c.a2 + c.a4) + c.a6, 2))
            } else {
                let r = reduce(c.a3, 2);
                (r, reduce(r + c.a4, 2))
            }
        }
        3 => {
            let r = if divisible(b2, 3) { reduce(-b6, 3) } else { reduce(-b2 * b4, 3) };
            (r, reduce(c.a1 * r + c.a3, 3))
        }
        _ => {
            let r = reduce(-b2 * inverse_mod(12, pi), pi);
            let t = reduce(-(c.a1 * r + c.a3) * inverse_mod(2, pi), pi);
            (r, t)
        }
    };
    c = c.rst(r, 0, t);
    debug_assert!(divisible(c.a3, pi) && divisible(c.a4, pi) && divisible(c.a6, pi));

    if v(c.a6, pi) < 2 {
        return done(ReductionType::II);
    }
    if v(c.b8(), pi) < 3 {
        return done(ReductionType::III);
    }
    if v(c.b6(), pi) < 3 {
        return done(ReductionType::IV);
    }

    // Now p | a1, a2; p² | a3, a4; p³ | a6.
    let half = (pi + 1) / 2;
    let (s, t) = if p == 2 {
        (reduce(c.a2, 2), 2 * reduce(c.a6 / 4, 2))
    } else {
        (-c.a1 * half, -c.a3 * half)
    };
    c = c.rst(0, s, t);
    let p2 = pi * pi;
    let p3 = p2 * pi;
    debug_assert!(divisible(c.a1, pi) && divisible(c.a2, pi));
    debug_assert!(divisible(c.a3, p2) && divisible(c.a4, p2) && divisible(c.a6, p3));

    // P(T) = T³ + a2/p T² + a4/p² T + a6/p³
    let (pb, pc, pd) = (c.a2 / pi, c.a4 / p2, c.a6 / p3);
    let w = 27 * pd * pd - pb * pb * pc * pc + 4 * pb * pb * pb * pd - 18 * pb * pc * pd
        + 4 * pc * pc * pc;
    let x = 3 * pc - pb * pb;

    if !divisible(w, pi) {
        return done(ReductionType::IStar(0));
    }

    if !divisible(x, pi) {
        // double root: move it to 0 and run the I_n* subprocedure
        let root = match p {
            2 => pc,
            3 => pb * pc,
            _ => (pb * pc - 9 * pd) * inverse_mod(2 * x, pi),
        };
        c = c.rst(pi * reduce(root, pi), 0, 0);
        let (mut ix, mut iy) = (3u32, 3u32);
        let (mut mx, mut my) = (p2, p2);
        loop {
            let a3t = c.a3 / my;
            let a6t = c.a6 / (mx * my);
            if !divisible(a3t * a3t + 4 * a6t, pi) {
                break;
            }
            let t = if p == 2 { my * a6t } else { my * reduce(-a3t * half, pi) };
            c = c.rst(0, 0, t);
            my *= pi;
            iy += 1;
            let a2t = c.a2 / pi;
            let a4t = c.a4 / pi / mx;
            let a6t = c.a6 / (mx * my);
            if !divisible(a4t * a4t - 4 * a6t * a2t, pi) {
                break;
            }
            let r = if p == 2 {
                mx * reduce(a6t * a2t, 2)
            } else {
                mx * reduce(-a4t * inverse_mod(2 * a2t, pi), pi)
            };
            c = c.rst(r, 0, 0);
            mx *= pi;
            ix += 1;
        }
        return done(ReductionType::IStar(ix + iy - 5));
    }

    // triple root: move it to 0
    let root = match p {
        2 => pb,
        3 => -pd,
        _ => -pb * inverse_mod(3, pi),
    };
    c = c.rst(pi * reduce(root, pi), 0, 0);
    let a3t = c.a3 / p2;
    let a6t = c.a6 / (p2 * p2);
    if !divisible(a3t * a3t + 4 * a6t, pi) {
        return done(ReductionType::IVStar);
    }
    let t = if p == 2 { -p2 * a6t } else { p2 * reduce(-a3t * half, pi) };
    c = c.rst(0, 0, t);
    if v(c.a4, pi) < 4 {
        return done(ReductionType::IIIStar);
    }
    if v(c.a6, pi) < 6 {
        return done(ReductionType::IIStar);
    }
    Err(Error::NonMinimal { p })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ReductionType::*;

    fn kind(a: i64, b: i64, p: u64) -> (ReductionType, u32) {
        let l = tate_oracle(a, b, p).unwrap();
        assert_eq!(l.f + l.v_ratio, l.v_delta);
        (l.kind, l.f)
    }

    #[test]
    fn known_curves() {
        assert_eq!(kind(1, 1, 2), (II, 4));
        assert_eq!(kind(1, 1, 31), (I(1), 1));
        assert_eq!(kind(-1, 1, 2), (IV, 2));
        assert_eq!(kind(-1, 1, 23), (I(1), 1));
        assert_eq!(kind(5, 5, 5), (II, 2));
    }

    /// Short models `y² = x³ + p^i u x + p^j w` realise the whole p ≥ 5 Kodaira
    /// table; the expected type is read off `(v(a), v(b))` by hand.
    #[test]
    fn short_models_at_large_primes() {
        let p: i64 = 7;
        let cases: &[(u32, u32, ReductionType, u32)] = &[
            (1, 1, II, 2),
            (1, 2, III, 3),
            (2, 2, IV, 4),
            (2, 3, IStar(0), 6),
            (3, 4, IVStar, 8),
            (3, 5, IIIStar, 9),
            (4, 5, IIStar, 10),
        ];
        for &(i, j, expected, vd) in cases {
            let (a, b) = (p.pow(i) * 3, p.pow(j) * 2);
            let l = tate_oracle(a, b, p as u64).unwrap();
            assert_eq!((l.kind, l.v_delta), (expected, vd), "v(a)={i} v(b)={j}");
            assert_eq!(l.f, 2);
        }
        assert!(matches!(
            tate_oracle(p.pow(4), p.pow(6), 7),
            Err(Error::NonMinimal { p: 7 })
        ));
    }

    #[test]
    fn i_n_star_family() {
        // a = −3p², b = 2p³ + p^{3+k} makes 4a³ + 27b² ≡ 0 to extra order
        let p: i64 = 5;
        for k in 1..4u32 {
            let a = -3 * p * p;
            let b = 2 * p.pow(3) + p.pow(3 + k);
            let l = tate_oracle(a, b, 5).unwrap();
            assert_eq!(l.kind, IStar(l.v_delta - 6), "k={k}");
            assert!(l.v_delta > 6);
            assert_eq!(l.f, 2);
        }
    }

    #[test]
    fn multiplicative() {
        // x³ − 3x + 2 = (x − 1)²(x + 2): node, Δ = 0 exactly, so perturb b
        let l = tate_oracle(-3, 2 + 5 * 5 * 5, 5).unwrap();
        assert_eq!(l.kind, I(l.v_delta));
        assert_eq!(l.f, 1);
    }

    #[test]
    fn long_model_conductor_11() {
        // 11a1: y² + y = x³ − x² − 10x − 20, Δ = −11⁵
        let e = Weierstrass { a1: 0, a2: -1, a3: 1, a4: -10, a6: -20 };
        assert_eq!(e.discriminant(), -161051);
        let l = tate_local(&e, 11).unwrap();
        assert_eq!((l.kind, l.f), (I(5), 1));
        assert_eq!(tate_local(&e, 2).unwrap().kind, I(0));
    }

    #[test]
    fn long_models_with_additive_reduction_at_2_and_3() {
        // 27a1: y² + y = x³ − 7, Δ = −3⁹, type IV*, f = 3
        let e = Weierstrass { a1: 0, a2: 0, a3: 1, a4: 0, a6: -7 };
        let l = tate_local(&e, 3).unwrap();
        assert_eq!((l.kind, l.v_delta, l.f), (IVStar, 9, 3));
        // 32a1: y² = x³ + 4x, Δ = −2¹², conductor 32
        let l = tate_local(&Weierstrass::short(4, 0), 2).unwrap();
        assert_eq!((l.v_delta, l.f), (12, 5));
        // 64a1: y² = x³ − 4x, Δ = 2¹², conductor 64
        let l = tate_local(&Weierstrass::short(-4, 0), 2).unwrap();
        assert_eq!((l.v_delta, l.f), (12, 6));
    }
}
