//! Analytic side: `F_Δ`, the local factors `ρ`, the mass function and the
//! limiting conductor distribution.

pub mod distribution;
pub mod fdelta;
pub mod identities;
pub mod mass;
pub mod rho;

pub use distribution::{linear_grid, main_term, pdf_numeric, theory_grid, DistributionGrid, GridMeta, GridSource};
pub use fdelta::{f_delta, f_delta_tol};
pub use identities::{euler_ratio_check, identity_rad_euler, RadEuler};
pub use mass::{mass, mass_one, mass_tail_bound, MassTable};
pub use rho::{rho, rho_prime_power, RhoTable};

/// `ζ^{(6)}(10)/ζ^{(6)}(2)`, expected to equal `228811π⁸/2380855680`.
pub fn zeta6_ratio() -> f64 {
    let (z10, z2) = mass::zeta6_pair();
    z10 / z2
}

/// `228811π⁸/2380855680`.
pub fn zeta6_ratio_closed_form() -> f64 {
    228811.0 * std::f64::consts::PI.powi(8) / 2380855680.0
}
