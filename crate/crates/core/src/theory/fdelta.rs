//! `F_Δ(λ)`: the fraction of the box `[−1, 1]²` where `−16(4α³ + 27β²) < λ`.

/// Default absolute quadrature tolerance.
pub const F_DELTA_TOL: f64 = 1e-10;

/// `F_Δ(λ)` to absolute error about [`F_DELTA_TOL`].
pub fn f_delta(lambda: f64) -> f64 {
    f_delta_tol(lambda, F_DELTA_TOL)
}

/// For each `β` the condition reads `α > cbrt(−(λ + 432β²)/64)`, so
/// `F_Δ(λ) = ½ ∫₀¹ (1 − clamp(cbrt(−(λ + 432β²)/64), −1, 1)) dβ`.
pub fn f_delta_tol(lambda: f64, tol: f64) -> f64 {
    if lambda >= 64.0 {
        return 1.0;
    }
    if lambda <= -496.0 {
        return 0.0;
    }
    let g = |beta: f64| {
        let t = (-(lambda + 432.0 * beta * beta) / 64.0).cbrt();
        1.0 - t.clamp(-1.0, 1.0)
    };
    // kinks where the threshold leaves [−1, 1], and the vertical tangent of
    // the cube root where its argument vanishes
    let mut cuts = vec![0.0, 1.0];
    for c in [(64.0 - lambda) / 432.0, (-64.0 - lambda) / 432.0, -lambda / 432.0] {
        if c > 0.0 && c < 1.0 {
            cuts.push(c.sqrt());
        }
    }
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup();
    let pieces = (cuts.len() - 1) as f64;
    let total: f64 = cuts
        .windows(2)
        .map(|w| adaptive_simpson(&g, w[0], w[1], tol / pieces))
        .sum();
    (0.5 * total).clamp(0.0, 1.0)
}

fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 60)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn saturation() {
        assert_eq!(f_delta(64.0), 1.0);
        assert_eq!(f_delta(-496.0), 0.0);
        assert!((f_delta(63.999) - 1.0).abs() < 1e-3);
        assert!(f_delta(-495.9) < 1e-3);
    }

    #[test]
    fn value_at_zero() {
        let closed = 1.0 - 2.0 / (15.0 * 3f64.sqrt());
        assert!((f_delta(0.0) - closed).abs() < 1e-9);
    }

    #[test]
    fn monte_carlo_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let lambdas = [-300.0, -40.0, -1.0, 0.0, 5.0, 40.0];
        let n = 400_000;
        let mut hits = [0u32; 6];
        for _ in 0..n {
            let (al, be): (f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let d = -16.0 * (4.0 * al.powi(3) + 27.0 * be * be);
            for (h, l) in hits.iter_mut().zip(lambdas) {
                if d < l {
                    *h += 1;
                }
            }
        }
        for (h, l) in hits.iter().zip(lambdas) {
            let mc = *h as f64 / n as f64;
            // ~4 standard deviations
            assert!((mc - f_delta(l)).abs() < 4.0 * (0.25 / n as f64).sqrt(), "λ = {l}");
        }
    }

    #[test]
    fn nondecreasing() {
        let mut prev = 0.0;
        for i in 0..=2000 {
            let l = -500.0 + 0.282 * i as f64;
            let v = f_delta(l);
            assert!(v + 1e-12 >= prev, "λ = {l}");
            prev = v;
        }
    }
}
