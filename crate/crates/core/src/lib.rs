//! Numerical workbench for Reeb dynamics on star-shaped hypersurfaces in ℝ⁴.
//!
//! The crate computes, at desk scale, the invariants attached to a closed
//! Reeb orbit on the boundary Σ of a star-shaped domain: the orbit itself
//! (closed-form where available, shooting otherwise), its Maslov/rotation
//! index in the canonical trivialization of the contact structure, its
//! self-linking number as a transverse knot in S³, curvature pinching of the
//! surface, and symplectic disc fillings with their intersection and
//! complex-point counts — tying together the identity
//! `lk(γ) = 2·tan(f) − 1` between linking and fillings.
//!
//! Modules mirror that pipeline:
//! - [`vec4`]: ℝ⁴ = ℂ² linear algebra, ω₀, λ₀, stereographic projection;
//! - [`surface`]: star-shaped surfaces, curvature, Reeb field, contact frame;
//! - [`dynamics`]: flow integration, periodic orbits, linearized flow;
//! - [`maslov`]: rotation numbers and the (possibly degenerate) Maslov index;
//! - [`knot`]: transverse knots and the self-linking number;
//! - [`filling`]: immersed disc fillings, intersection and complex points.

pub mod dynamics;
pub mod error;
pub mod filling;
pub mod knot;
pub mod maslov;
pub mod numerics;
pub mod par;
pub mod surface;
pub mod vec4;

pub use error::{Error, Result};
pub use vec4::{lambda0, omega0, Vec4};
