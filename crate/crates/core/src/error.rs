//! Error type shared by every module of the workbench.
//!
//! Numerical routines fail for structural reasons (a surface that is not
//! star-shaped, a section that degenerates) or for accuracy reasons (an
//! integrator that cannot meet its tolerance, a quadrature whose refinement
//! check fails). Each failure carries the quantities needed to diagnose it.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("radial projection is undefined at the origin")]
    OriginProjection,

    #[error("stereographic projection undefined at the pole (point within {distance:.3e} of it)")]
    StereographicPole { distance: f64 },

    #[error("radial projection did not converge (residual {residual:.3e} after {iters} iterations)")]
    ProjectionDiverged { residual: f64, iters: usize },

    #[error("gradient norm {norm:.3e} too small at a surface point; surface is not regular there")]
    DegenerateGradient { norm: f64 },

    #[error("star-shape condition fails: <p, grad F> = {value:.3e} at a surface point")]
    NotStarShaped { value: f64 },

    #[error("vector is not in the contact plane (lambda residual {lambda:.3e}, normal residual {normal:.3e})")]
    NotInContactPlane { lambda: f64, normal: f64 },

    #[error("integrator step size underflowed at t = {t:.6e} (step {step:.3e})")]
    StepUnderflow { t: f64, step: f64 },

    #[error("orbit shooting did not converge: residual {residual:.3e} after {iters} iterations")]
    ShootingDiverged { residual: f64, iters: usize },

    #[error("shooting Jacobian is singular (condition estimate {cond:.3e})")]
    SectionDegenerate { cond: f64 },

    #[error("linearized flow lost the symplectic determinant: drift {drift:.3e} exceeds {limit:.3e}")]
    DetDrift { drift: f64, limit: f64 },

    #[error("rotation sampling too coarse: adjacent frames turn by {max_step:.3e} rad (limit {limit:.3e})")]
    RotationSampling { max_step: f64, limit: f64 },

    #[error("direction-dependent rotations spread over {spread:.6} rad, exceeding pi")]
    SpreadBound { spread: f64 },

    #[error("path endpoint is numerically degenerate (determinant {det:.3e})")]
    DegeneratePath { det: f64 },

    #[error("quadrature failed its refinement check: coarse {coarse:.6e} vs fine {fine:.6e}")]
    QuadratureUnstable { coarse: f64, fine: f64 },

    #[error("no stereographic pole clears the curves (best clearance {best:.3e}, need {need:.3e})")]
    NoPole { best: f64, need: f64 },

    #[error("pushoff collides with the knot: min distance {min_dist:.3e} at offset {offset:.3e}")]
    PushoffCollision { min_dist: f64, offset: f64 },

    #[error("linking integral residual {residual:.3e} from nearest integer exceeds {limit:.3e}")]
    LinkingResidual { residual: f64, limit: f64 },

    #[error("integrals at offsets eps and eps/2 disagree: {coarse} vs {fine}")]
    LinkingUnstable { coarse: i64, fine: i64 },

    #[error("height function is not monotone on the curve segment [{lo:.4}, {hi:.4}]")]
    HeightNotMonotone { lo: f64, hi: f64 },

    #[error("no splitting direction achieves a two-arc height decomposition (best score {best:.3e})")]
    NoFillingDirection { best: f64 },

    #[error("curve does not split into exactly two monotone arcs ({arcs} found)")]
    DegenerateSplit { arcs: usize },

    #[error("disc grid point ({i}, {j}) failed to evaluate: {reason}")]
    DiscEvaluation { i: usize, j: usize, reason: String },

    #[error("injectivity scan found distinct parameters mapping within {dist:.3e} of each other")]
    InjectivityScan { dist: f64 },

    #[error("self-intersection at parameters ({r1:.4}, {t1:.4}) / ({r2:.4}, {t2:.4}) is not transverse (normalized det {det:.3e})")]
    NonTransverseIntersection { r1: f64, t1: f64, r2: f64, t2: f64, det: f64 },

    #[error("intersection refinement did not converge (residual {residual:.3e})")]
    IntersectionRefinement { residual: f64 },

    #[error("matrix solve failed: {context}")]
    RankDeficient { context: String },

    #[error("curve is not transverse to the contact structure: min |lambda(c')| = {min_value:.3e}")]
    NotTransverse { min_value: f64 },

    #[error("height plateau of {width} samples (limit {limit}) makes the critical-point count unreliable")]
    DegeneratePlateau { width: usize, limit: usize },

    #[error("invalid parameter: {reason}")]
    InvalidParameter { reason: String },

    #[error("verification failed: {context}")]
    VerificationFailed { context: String },
}
