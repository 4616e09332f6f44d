//! Limiting distribution of `N/H`: the series over `m`, CDF grids and a
//! finite-difference density.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::theory::fdelta::{f_delta_tol, F_DELTA_TOL};
use crate::theory::mass::{mass_tail_bound, shared_table};

/// `|Δ| ≤ 496 H` on the whole box.
pub const DELTA_SPAN: f64 = 496.0;

/// Limiting proportion of curves with `λ₀ < N/H < λ₁`.
///
/// For `λ₀ > 0` the sum runs over `m < 496/λ₀`; later terms vanish. For
/// `λ₀ = 0` it is evaluated as `1 − Σ_{mλ₁ < 496} w(m)(1 − F_Δ(mλ₁) + F_Δ(−mλ₁))`,
/// which uses `Σ w(m) = 1` and has finite support.
pub fn main_term(lambda0: f64, lambda1: f64, tol: f64) -> Result<f64> {
    if !(lambda0 >= 0.0) || !(lambda1 > lambda0) || !lambda1.is_finite() {
        return domain(format!("need 0 ≤ λ0 < λ1, got ({lambda0}, {lambda1})"));
    }
    if !(tol > 0.0) {
        return domain("tolerance must be positive");
    }
    let qtol = tol.min(F_DELTA_TOL);
    let f = |x: f64| f_delta_tol(x, qtol);
    if lambda0 == 0.0 {
        let terms = support(lambda1)?;
        let table = shared_table(terms)?;
        let missing: f64 = (1..=terms)
            .rev()
            .map(|m| {
                let x = m as f64 * lambda1;
                table.weight(m) * (1.0 - f(x) + f(-x))
            })
            .sum();
        return Ok((1.0 - missing).clamp(0.0, 1.0));
    }
    let terms = support(lambda0)?;
    let table = shared_table(terms)?;
    let total: f64 = (1..=terms)
        .rev()
        .map(|m| {
            let (x0, x1) = (m as f64 * lambda0, m as f64 * lambda1);
            table.weight(m) * (f(x1) - f(x0) + f(-x0) - f(-x1))
        })
        .sum();
    Ok(total.clamp(0.0, 1.0))
}

/// Number of `m` with `mλ < 496`.
fn support(lambda: f64) -> Result<usize> {
    let n = (DELTA_SPAN / lambda).ceil() - 1.0;
    if n > crate::theory::mass::MAX_TABLE as f64 {
        return domain(format!("λ = {lambda} needs more than {} terms", crate::theory::mass::MAX_TABLE));
    }
    Ok(n.max(0.0) as usize)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridSource {
    Theory,
    Empirical,
}

/// A CDF sampled on an increasing grid of `λ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionGrid {
    pub lambdas: Vec<f64>,
    pub cdf: Vec<f64>,
    pub source: GridSource,
    pub meta: GridMeta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GridMeta {
    /// Series evaluation tolerance and the certified mass left outside
    /// `m ≤ 10⁶`.
    Theory { tol: f64, mass_tail_bound: f64 },
    /// Height and family size.
    Empirical { height: f64, family_size: u64 },
}

impl DistributionGrid {
    pub fn new(lambdas: Vec<f64>, cdf: Vec<f64>, source: GridSource, meta: GridMeta) -> Result<Self> {
        if lambdas.len() != cdf.len() {
            return domain("lambdas and cdf differ in length");
        }
        if lambdas.windows(2).any(|w| !(w[0] < w[1])) {
            return domain("lambdas must be strictly increasing");
        }
        Ok(Self { lambdas, cdf, source, meta })
    }

    pub fn is_monotone(&self) -> bool {
        self.cdf.windows(2).all(|w| w[0] <= w[1]) && self.cdf.iter().all(|&c| (0.0..=1.0).contains(&c))
    }
}

/// `lambda[i] = start + i·step` for `start ≤ lambda ≤ stop` (inclusive up to
/// rounding).
pub fn linear_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
        return domain(format!("invalid grid {start}:{stop}:{step}"));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + i as f64 * step).collect())
}

/// Theory CDF on `lambdas`; points with `λ ≤ 0` take the value 0.
pub fn theory_grid(lambdas: &[f64], tol: f64) -> Result<DistributionGrid> {
    let cdf = lambdas
        .par_iter()
        .map(|&l| if l <= 0.0 { Ok(0.0) } else { main_term(0.0, l, tol) })
        .collect::<Result<Vec<_>>>()?;
    DistributionGrid::new(
        lambdas.to_vec(),
        cdf,
        GridSource::Theory,
        GridMeta::Theory { tol, mass_tail_bound: mass_tail_bound(1_000_000) },
    )
}

/// Central differences `(CDF(λ+Δλ) − CDF(λ−Δλ))/(2Δλ)`, one-sided at the ends.
/// The grid must be uniform with `Δλ` a whole multiple of its spacing.
pub fn pdf_numeric(grid: &DistributionGrid, dlambda: f64) -> Result<Vec<(f64, f64)>> {
    let n = grid.lambdas.len();
    if n < 2 {
        return domain("grid needs at least two points");
    }
    let h = grid.lambdas[1] - grid.lambdas[0];
    let uniform = grid
        .lambdas
        .windows(2)
        .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.abs().max(1.0));
    if !uniform {
        return domain("grid spacing is not uniform");
    }
    let k = (dlambda / h).round();
    if k < 1.0 || (k * h - dlambda).abs() > 1e-9 * dlambda.max(1.0) {
        return domain(format!("grid too coarse for Δλ = {dlambda} (spacing {h})"));
    }
    let k = k as usize;
    if k >= n {
        return domain("Δλ exceeds the grid span");
    }
    let c = &grid.cdf;
    Ok((0..n)
        .map(|i| {
            let d = if i < k {
                (c[i + k] - c[i]) / dlambda
            } else if i + k >= n {
                (c[i] - c[i - k]) / dlambda
            } else {
                (c[i + k] - c[i - k]) / (2.0 * dlambda)
            };
            (grid.lambdas[i], d)
        })
        .collect())
}
