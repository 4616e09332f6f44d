//! Conductors of the height-ordered family `y² = x³ + ax + b`: enumeration,
//! local reduction, the limiting conductor distribution and its comparison
//! with exact counts.

pub mod arith;
pub mod congruence;
pub mod empirics;
pub mod error;
pub mod family;
pub mod local;
pub mod theory;
pub mod tolerances;

pub use error::{Error, Result};
pub use family::{CurveParams, FamilySpec};
