//! Frozen comparison tolerances. The limiting statements only give orders of
//! magnitude; these bounds were measured once against exact enumeration and
//! then fixed.

/// `|main_term(0, λ) − (λ/496)^{5/6}|` at the figure's reference point.
pub const FIGURE_REFERENCE: f64 = 0.05;
/// Largest admissible `1 − Σ_{m ≤ 10⁶} w(m)`.
pub const MASS_TAIL: f64 = 1e-3;
/// Bounds on `(F_Δ(λ) − F_Δ(−λ))/λ^{5/6}` for `λ ∈ [10⁻⁶, 64]`.
pub const SCALING_RATIO: (f64, f64) = (0.01, 10.0);
/// Sup distance between empirical and limiting CDFs at `H = 10⁷`.
pub const SUP_DISTANCE: f64 = 0.03;
/// Empirical frequency of `|Δ|/N = 1` versus `w(1)` at `H = 10⁷`.
pub const MASS_ONE: f64 = 0.01;
/// Admissible log-log slope of `λ ↦ #{N < λH}/#F(H)`.
pub const SLOPE: (f64, f64) = (0.78, 0.89);
/// Constant in the lattice window error `C (H^{1/2} #S/Q + #S)`.
pub const WINDOW_CONSTANT: f64 = 10.0;
/// Family-size ratio band around 1.
pub const FAMILY_SIZE: f64 = 0.02;
/// `|ratio − 1| ≤ EULER_RATIO / q` for the truncated Euler product.
pub const EULER_RATIO: f64 = 10.0;
/// Agreement budget for the radical Euler identity at `s = 2`.
pub const RAD_EULER: f64 = 1e-3;
/// Normalization `main_term(0, 496) = 1`.
pub const NORMALIZATION: f64 = 1e-6;
/// `ζ^{(6)}(10)/ζ^{(6)}(2)` against its closed form.
pub const ZETA_RATIO: f64 = 1e-12;
/// `F_Δ` saturation and closed-form checks.
pub const F_DELTA: f64 = 1e-9;
