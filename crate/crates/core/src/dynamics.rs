//! Reeb flow integration, periodic-orbit search, and the linearized flow on
//! the contact planes expressed through the trivialization, producing paths
//! in SL(2, ℝ).
//!
//! The flow integrates the global extension X̃(q) = 2·J∇F/⟨q, ∇F⟩, which is
//! tangent to every level set of F and restricts to the Reeb field on Σ;
//! every accepted step is radially re-projected onto Σ, so the trajectory
//! never drifts off the surface. Periodic orbits on the builtin quadrics
//! come from the closed form z_k(t) = e^{iω_k t}·z_k(0) with ω_k = 2/r_k²;
//! on generic surfaces a Poincaré-section shooting method does the work.

use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, Result};
use crate::surface::{from_na, to_na, StarShapedSurface};
use crate::vec4::{lambda0, orthonormal_complement, Vec4};

/// Default number of uniform samples stored along a closed orbit.
pub const DEFAULT_ORBIT_SAMPLES: usize = 2048;

/// A closed Reeb trajectory: uniform samples (γ(tᵢ), X(γ(tᵢ))) over one
/// period at tᵢ = i·T/n (no duplicated endpoint), plus the endpoint-closure
/// residual of the underlying computation.
#[derive(Clone, Debug)]
pub struct PeriodicOrbit {
    pub surface: StarShapedSurface,
    pub p0: Vec4,
    pub period: f64,
    pub points: Vec<Vec4>,
    pub velocities: Vec<Vec4>,
    pub closure_residual: f64,
}

impl PeriodicOrbit {
    pub fn n_samples(&self) -> usize {
        self.points.len()
    }

    /// Sample time of the k-th stored point.
    pub fn time_of(&self, k: usize) -> f64 {
        self.period * k as f64 / self.points.len() as f64
    }

    /// Largest |F − 1| over the stored samples.
    pub fn max_f_drift(&self) -> f64 {
        self.points.iter().map(|&p| (self.surface.f(p) - 1.0).abs()).fold(0.0, f64::max)
    }

    /// Position at arbitrary time by periodic cubic interpolation.
    pub fn eval(&self, t: f64) -> Vec4 {
        crate::numerics::catmull_rom_periodic(&self.points, self.period, t)
    }

    /// Velocity at arbitrary time by periodic cubic interpolation of the
    /// stored analytic velocities.
    pub fn eval_velocity(&self, t: f64) -> Vec4 {
        crate::numerics::catmull_rom_periodic(&self.velocities, self.period, t)
    }
}

/// Sampled path Φ(tᵢ) ∈ SL(2, ℝ) with Φ(0) = Id.
#[derive(Clone, Debug)]
pub struct SL2Path {
    pub times: Vec<f64>,
    pub matrices: Vec<Matrix2<f64>>,
}

impl SL2Path {
    /// Largest Frobenius gap between consecutive matrices — the sampling-
    /// adequacy measure backing the rotation tracker.
    pub fn max_consecutive_gap(&self) -> f64 {
        self.matrices.windows(2).map(|w| (w[1] - w[0]).norm()).fold(0.0, f64::max)
    }

    pub fn endpoint(&self) -> Matrix2<f64> {
        *self.matrices.last().expect("path has at least one sample")
    }
}

/// Linearized Reeb flow along an orbit: the SL(2, ℝ) path in the
/// trivialization, the recorded determinant drift before renormalization,
/// and the transported contact-plane vectors themselves (v1 from πM, v2
/// from πJM) for use as ambient-frame oracles.
#[derive(Clone, Debug)]
pub struct LinearizedFlow {
    pub path: SL2Path,
    pub det_drift: f64,
    pub v1: Vec<Vec4>,
    pub v2: Vec<Vec4>,
}

fn reeb_extension(surface: &StarShapedSurface, q: Vec4) -> Result<Vec4> {
    let g = surface.grad_f(q);
    let s = q.dot(g);
    if s <= 1e-12 {
        return Err(Error::NotStarShaped { value: s });
    }
    Ok(g.jmul() * (2.0 / s))
}

// Dormand–Prince 5(4) coefficients. The stage nodes c_i are not needed:
// the field is autonomous.
const DP_A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// Difference between the 5th-order and the embedded 4th-order weights.
const DP_E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// One Dormand–Prince step attempt from y with signed step h.
/// Returns (y_new, scaled error estimate); accept when the estimate ≤ 1.
fn dp_step(surface: &StarShapedSurface, y: Vec4, h: f64, tol: f64) -> Result<(Vec4, f64)> {
    let mut k = [Vec4::ZERO; 7];
    k[0] = reeb_extension(surface, y)?;
    for stage in 0..6 {
        let mut arg = y;
        for (j, kj) in k.iter().enumerate().take(stage + 1) {
            let a = DP_A[stage][j];
            if a != 0.0 {
                arg = arg + *kj * (a * h);
            }
        }
        k[stage + 1] = reeb_extension(surface, arg)?;
    }
    let mut ynew = y;
    for (j, kj) in k.iter().enumerate().take(6) {
        let b = DP_A[5][j];
        if b != 0.0 {
            ynew = ynew + *kj * (b * h);
        }
    }
    let mut err = Vec4::ZERO;
    for (j, kj) in k.iter().enumerate() {
        if DP_E[j] != 0.0 {
            err = err + *kj * (DP_E[j] * h);
        }
    }
    let scale = tol + tol * y.norm().max(ynew.norm());
    Ok((ynew, err.norm() / scale))
}

/// Flow the Reeb field from a point for time `t` (either sign) with adaptive
/// Dormand–Prince 5(4) steps and radial re-projection after every accepted
/// step. `tol` serves as both absolute and relative tolerance.
pub fn flow(surface: &StarShapedSurface, p0: Vec4, t: f64, tol: f64) -> Result<Vec4> {
    if t == 0.0 {
        return Ok(p0);
    }
    let dir = t.signum();
    let t_end = t.abs();
    let mut y = surface.project_radial(p0)?;
    let mut s = 0.0;
    let mut h = (t_end / 100.0).min(0.05).max(1e-6);
    let mut steps = 0usize;
    while s < t_end {
        steps += 1;
        if steps > 2_000_000 {
            return Err(Error::StepUnderflow { t: dir * s, step: h });
        }
        h = h.min(t_end - s);
        if h < 1e-14 * t_end.max(1.0) {
            return Err(Error::StepUnderflow { t: dir * s, step: h });
        }
        let (ynew, err) = dp_step(surface, y, dir * h, tol)?;
        if err <= 1.0 {
            y = surface.project_radial(ynew)?;
            s += h;
            h *= (0.9 * err.max(1e-10).powf(-0.2)).min(5.0);
        } else {
            h *= (0.9 * err.powf(-0.2)).max(0.2);
        }
    }
    Ok(y)
}

/// One classical RK4 step of the base point alone, re-projected onto Σ.
fn rk4_point_step(surface: &StarShapedSurface, p: Vec4, h: f64) -> Result<Vec4> {
    let k1 = reeb_extension(surface, p)?;
    let k2 = reeb_extension(surface, p + k1 * (h / 2.0))?;
    let k3 = reeb_extension(surface, p + k2 * (h / 2.0))?;
    let k4 = reeb_extension(surface, p + k3 * h)?;
    surface.project_radial(p + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0))
}

/// One classical RK4 step of the coupled system (p, v1, v2) where p follows
/// the Reeb extension and v1, v2 follow the variational equation
/// v̇ = dX̃(p)·v; the base point is radially re-projected afterwards.
fn rk4_var_step(
    surface: &StarShapedSurface,
    p: Vec4,
    v1: Vec4,
    v2: Vec4,
    h: f64,
) -> Result<(Vec4, Vec4, Vec4)> {
    let eval = |q: Vec4, w1: Vec4, w2: Vec4| -> Result<(Vec4, Vec4, Vec4)> {
        let x = reeb_extension(surface, q)?;
        let jac = surface.reeb_jacobian(q)?;
        Ok((x, from_na(jac * to_na(w1)), from_na(jac * to_na(w2))))
    };
    let (k1p, k1a, k1b) = eval(p, v1, v2)?;
    let (k2p, k2a, k2b) = eval(p + k1p * (h / 2.0), v1 + k1a * (h / 2.0), v2 + k1b * (h / 2.0))?;
    let (k3p, k3a, k3b) = eval(p + k2p * (h / 2.0), v1 + k2a * (h / 2.0), v2 + k2b * (h / 2.0))?;
    let (k4p, k4a, k4b) = eval(p + k3p * h, v1 + k3a * h, v2 + k3b * h)?;
    let pn = p + (k1p + k2p * 2.0 + k3p * 2.0 + k4p) * (h / 6.0);
    let v1n = v1 + (k1a + k2a * 2.0 + k3a * 2.0 + k4a) * (h / 6.0);
    let v2n = v2 + (k1b + k2b * 2.0 + k3b * 2.0 + k4b) * (h / 6.0);
    Ok((surface.project_radial(pn)?, v1n, v2n))
}

/// Number of RK4 substeps per stored sample keeping the step below ~2e-3.
fn substeps_for(period: f64, n_samples: usize) -> usize {
    ((period / n_samples as f64) / 2e-3).ceil().max(1.0) as usize
}

/// Fixed-step RK4 resampling of one period from a converged starting point:
/// positions, analytic velocities, and the closure residual.
fn resample_orbit(
    surface: &StarShapedSurface,
    p0: Vec4,
    period: f64,
    n_samples: usize,
) -> Result<(Vec<Vec4>, Vec<Vec4>, f64)> {
    let sub = substeps_for(period, n_samples);
    let h = period / (n_samples * sub) as f64;
    let mut points = Vec::with_capacity(n_samples);
    let mut velocities = Vec::with_capacity(n_samples);
    let mut p = surface.project_radial(p0)?;
    for _ in 0..n_samples {
        points.push(p);
        velocities.push(reeb_extension(surface, p)?);
        for _ in 0..sub {
            p = rk4_point_step(surface, p, h)?;
        }
    }
    let residual = (p - points[0]).norm();
    Ok((points, velocities, residual))
}

/// Closed-form periodic orbit on a builtin quadric through a surface point:
/// the flow is z_k(t) = e^{iω_k t} z_k(0) with ω_k = 2/r_k², so the orbit
/// closes iff one component vanishes (leaving a circle) or ω₁/ω₂ is
/// rational.
fn quadric_orbit(
    surface: &StarShapedSurface,
    r1: f64,
    r2: f64,
    p0: Vec4,
    n_samples: usize,
) -> Result<PeriodicOrbit> {
    let p0 = surface.project_radial(p0)?;
    let (w1, w2) = (2.0 / (r1 * r1), 2.0 / (r2 * r2));
    let (a, b) = (p0.z1().norm(), p0.z2().norm());
    let period = if b < 1e-12 {
        2.0 * std::f64::consts::PI / w1
    } else if a < 1e-12 {
        2.0 * std::f64::consts::PI / w2
    } else {
        let ratio = w1 / w2;
        let (num, _den) = rational_approx(ratio, 4096, 1e-9).ok_or(Error::InvalidParameter {
            reason: format!(
                "orbit through a point with both components nonzero is periodic only for \
                 rational frequency ratio; ω1/ω2 = {ratio} has no small rational approximation"
            ),
        })?;
        2.0 * std::f64::consts::PI * num as f64 / w1
    };
    let n = n_samples;
    let mut points = Vec::with_capacity(n);
    let mut velocities = Vec::with_capacity(n);
    for k in 0..n {
        let t = period * k as f64 / n as f64;
        let z1 = p0.z1() * num_complex::Complex64::from_polar(1.0, w1 * t);
        let z2 = p0.z2() * num_complex::Complex64::from_polar(1.0, w2 * t);
        let p = Vec4::from_complex(z1, z2);
        points.push(p);
        velocities.push(reeb_extension(surface, p)?);
    }
    // Closure error of the closed form is pure trigonometric roundoff.
    let pt = Vec4::from_complex(
        p0.z1() * num_complex::Complex64::from_polar(1.0, w1 * period),
        p0.z2() * num_complex::Complex64::from_polar(1.0, w2 * period),
    );
    Ok(PeriodicOrbit {
        surface: surface.clone(),
        p0,
        period,
        points,
        velocities,
        closure_residual: (pt - p0).norm(),
    })
}

/// Best rational approximation p/q (lowest terms, q ≤ max_den) of x within
/// tol, via continued fractions.
fn rational_approx(x: f64, max_den: u64, tol: f64) -> Option<(u64, u64)> {
    if !(x > 0.0) || !x.is_finite() {
        return None;
    }
    let (mut h0, mut h1, mut k0, mut k1) = (1u64, x.floor() as u64, 0u64, 1u64);
    let mut frac = x - x.floor();
    for _ in 0..64 {
        if (x - h1 as f64 / k1 as f64).abs() < tol {
            return Some((h1, k1));
        }
        if frac.abs() < 1e-15 {
            break;
        }
        let r = 1.0 / frac;
        let a = r.floor();
        frac = r - a;
        let h2 = a as u64 * h1 + h0;
        let k2 = a as u64 * k1 + k0;
        if k2 > max_den {
            break;
        }
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
    }
    if (x - h1 as f64 / k1 as f64).abs() < tol {
        Some((h1, k1))
    } else {
        None
    }
}

/// Point of the section S = Σ ∩ {⟨x − p_ref, s⟩ = 0} with in-plane
/// coordinates u in the (e1, e2) chart: the offset along s is solved so the
/// radially projected point lands back on the hyperplane. Without this
/// correction the radial projection would push chart points off the section
/// by O(|u|²), putting a hard floor under the shooting residual.
fn section_point(
    surface: &StarShapedSurface,
    p_ref: Vec4,
    s: Vec4,
    e1: Vec4,
    e2: Vec4,
    u: Vector2<f64>,
) -> Result<Vec4> {
    let base = p_ref + e1 * u[0] + e2 * u[1];
    let mut w = 0.0_f64;
    let mut last = 0.0;
    for _ in 0..60 {
        let q = surface.project_radial(base + s * w)?;
        let g = (q - p_ref).dot(s);
        last = g.abs();
        if last < 5e-13 {
            return Ok(q);
        }
        let dw = 1e-7;
        let q2 = surface.project_radial(base + s * (w + dw))?;
        let dg = ((q2 - p_ref).dot(s) - g) / dw;
        if dg.abs() < 1e-6 {
            return Err(Error::SectionDegenerate { cond: dg.abs() });
        }
        w -= g / dg;
    }
    Err(Error::ProjectionDiverged { residual: last, iters: 60 })
}

/// Integrate from a section point until the trajectory next crosses the
/// hyperplane {⟨x − p_ref, s⟩ = 0} in the +s direction inside the window
/// (t_min, t_max]. Returns the crossing time and point.
fn flow_to_section(
    surface: &StarShapedSurface,
    q: Vec4,
    p_ref: Vec4,
    s: Vec4,
    t_min: f64,
    t_max: f64,
    tol: f64,
) -> Result<(f64, Vec4)> {
    let g = |p: Vec4| (p - p_ref).dot(s);
    let mut t = 0.0;
    let mut y = q;
    let mut g_prev = g(y);
    let mut h = 1e-3_f64;
    let mut steps = 0usize;
    while t < t_max {
        steps += 1;
        if steps > 2_000_000 {
            return Err(Error::StepUnderflow { t, step: h });
        }
        h = h.min(t_max - t).max(1e-13);
        let (ycand, err) = dp_step(surface, y, h, tol)?;
        if err > 1.0 {
            h *= (0.9 * err.powf(-0.2)).max(0.2);
            continue;
        }
        let ynew = surface.project_radial(ycand)?;
        let tnew = t + h;
        let gnew = g(ynew);
        if tnew > t_min && g_prev < 0.0 && gnew >= 0.0 {
            // Crossing bracketed inside this step: bisect the substep time,
            // re-integrating short fixed RK4 legs from the step's start.
            let base = y;
            let reach = |dt: f64| -> Result<Vec4> {
                let n_sub = 32;
                let hh = dt / n_sub as f64;
                let mut p = base;
                for _ in 0..n_sub {
                    p = rk4_point_step(surface, p, hh)?;
                }
                Ok(p)
            };
            let (mut lo, mut hi) = (0.0_f64, h);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if g(reach(mid)?) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo < 1e-16 {
                    break;
                }
            }
            return Ok((t + hi, reach(hi)?));
        }
        y = ynew;
        t = tnew;
        g_prev = gnew;
        h = (h * (0.9 * err.max(1e-10).powf(-0.2)).min(5.0)).min(0.02);
    }
    Err(Error::ShootingDiverged { residual: g(y).abs(), iters: 0 })
}

/// Find a closed Reeb orbit near the guess with the default sample count.
/// Builtin quadrics use the closed form; generic surfaces run Newton
/// shooting on a Poincaré section through the (projected) guess.
pub fn find_periodic_orbit(
    surface: &StarShapedSurface,
    p0_guess: Vec4,
    t0_guess: f64,
    tol: f64,
) -> Result<PeriodicOrbit> {
    find_periodic_orbit_sampled(surface, p0_guess, t0_guess, tol, DEFAULT_ORBIT_SAMPLES)
}

pub fn find_periodic_orbit_sampled(
    surface: &StarShapedSurface,
    p0_guess: Vec4,
    t0_guess: f64,
    tol: f64,
    n_samples: usize,
) -> Result<PeriodicOrbit> {
    if n_samples < 16 {
        return Err(Error::InvalidParameter {
            reason: format!("n_samples = {n_samples} too small; need at least 16"),
        });
    }
    if let Some((r1, r2)) = surface.quadric_radii() {
        return quadric_orbit(surface, r1, r2, p0_guess, n_samples);
    }
    if !(t0_guess > 0.0) {
        return Err(Error::InvalidParameter {
            reason: format!("period guess must be positive, got {t0_guess}"),
        });
    }

    let flow_tol = (tol * 1e-2).clamp(1e-13, 1e-9);
    let p_ref = surface.project_radial(p0_guess)?;
    let x0 = surface.reeb_field(p_ref)?;
    let s = x0.normalized();
    let n_ref = surface.normal(p_ref)?;
    // Orthonormal pair spanning the section's tangent plane at p_ref: the
    // normal is orthogonal to s = X/|X| (X is tangent), so projecting out
    // n_ref keeps the candidates inside s-perp.
    let mut section_basis: Vec<Vec4> = Vec::with_capacity(2);
    for cand in orthonormal_complement(s) {
        let mut v = cand - n_ref * cand.dot(n_ref);
        for b in &section_basis {
            v = v - *b * v.dot(*b);
        }
        if v.norm() > 1e-3 {
            section_basis.push(v.normalized());
        }
        if section_basis.len() == 2 {
            break;
        }
    }
    if section_basis.len() != 2 {
        return Err(Error::SectionDegenerate { cond: 0.0 });
    }
    let (e1, e2) = (section_basis[0], section_basis[1]);

    // Return-map displacement in section coordinates, plus the return time
    // and the full displacement norm.
    let map = |u: Vector2<f64>| -> Result<(Vector2<f64>, f64, f64)> {
        let q = section_point(surface, p_ref, s, e1, e2, u)?;
        let (tau, ret) =
            flow_to_section(surface, q, p_ref, s, 0.5 * t0_guess, 2.0 * t0_guess, flow_tol)?;
        let d = ret - q;
        Ok((Vector2::new(d.dot(e1), d.dot(e2)), tau, d.norm()))
    };

    let mut u = Vector2::zeros();
    let fd = 1e-6;
    for iter in 0..50 {
        let (gval, tau, full_residual) = map(u)?;
        if full_residual < tol {
            let q = section_point(surface, p_ref, s, e1, e2, u)?;
            let (points, velocities, closure_residual) =
                resample_orbit(surface, q, tau, n_samples)?;
            if closure_residual > 1e-8 {
                return Err(Error::ShootingDiverged { residual: closure_residual, iters: iter });
            }
            return Ok(PeriodicOrbit {
                surface: surface.clone(),
                p0: q,
                period: tau,
                points,
                velocities,
                closure_residual,
            });
        }
        let (g1, _, _) = map(u + Vector2::new(fd, 0.0))?;
        let (g2, _, _) = map(u + Vector2::new(0.0, fd))?;
        let jac = Matrix2::from_columns(&[(g1 - gval) / fd, (g2 - gval) / fd]);
        let det = jac.determinant();
        if det.abs() < 1e-12 {
            return Err(Error::SectionDegenerate { cond: det.abs() });
        }
        let step = jac.lu().solve(&gval).ok_or(Error::SectionDegenerate { cond: det.abs() })?;
        u -= step;
        if u.norm() > 1.0 {
            return Err(Error::ShootingDiverged { residual: gval.norm(), iters: iter });
        }
    }
    let (gval, _, _) = map(u)?;
    Err(Error::ShootingDiverged { residual: gval.norm(), iters: 50 })
}

/// Period and the quadrature of the contact form along the orbit. The two
/// agree identically in exact arithmetic because λ(X) = 1; a gap beyond
/// 1e−6 means the orbit data is inconsistent and is reported as an error.
pub fn action(orbit: &PeriodicOrbit) -> Result<(f64, f64)> {
    let n = orbit.points.len();
    let mean: f64 = orbit
        .points
        .iter()
        .zip(orbit.velocities.iter())
        .map(|(&p, &v)| lambda0(p, v))
        .sum::<f64>()
        / n as f64;
    let integral = mean * orbit.period;
    if (integral - orbit.period).abs() > 1e-6 {
        return Err(Error::QuadratureUnstable { coarse: orbit.period, fine: integral });
    }
    Ok((orbit.period, integral))
}

/// Integrate the linearized flow of the contact-plane frame (πM, πJM) along
/// the orbit and express it in the trivialization at every sample, giving a
/// path in SL(2, ℝ) with Φ(0) = Id. The raw determinant drift is recorded
/// and each stored matrix is renormalized to determinant one. The closing
/// sample reuses the starting frame, so the endpoint is the monodromy in the
/// periodic trivialization.
pub fn linearized_path(
    surface: &StarShapedSurface,
    orbit: &PeriodicOrbit,
) -> Result<LinearizedFlow> {
    let n = orbit.points.len();
    let sub = substeps_for(orbit.period, n);
    let h = orbit.period / (n * sub) as f64;

    let frame0 = surface.contact_frame(orbit.points[0])?;
    let mut p = orbit.points[0];
    let mut v1 = frame0.pi_m;
    let mut v2 = frame0.pi_jm;

    let mut times = Vec::with_capacity(n + 1);
    let mut matrices = Vec::with_capacity(n + 1);
    let mut tv1 = Vec::with_capacity(n + 1);
    let mut tv2 = Vec::with_capacity(n + 1);
    let mut det_drift: f64 = 0.0;

    for k in 0..=n {
        let frame = if k == 0 || k == n {
            frame0.clone()
        } else {
            surface.contact_frame(orbit.points[k])?
        };
        let w1 = frame.project_to_xi(v1);
        let w2 = frame.project_to_xi(v2);
        let (a1, b1) = frame.trivialize(w1)?;
        let (a2, b2) = frame.trivialize(w2)?;
        let raw = Matrix2::new(a1, a2, b1, b2);
        let det = raw.determinant();
        if !(det > 0.0) || (det - 1.0).abs() > 1e-4 {
            return Err(Error::DetDrift { drift: (det - 1.0).abs(), limit: 1e-4 });
        }
        det_drift = det_drift.max((det - 1.0).abs());
        matrices.push(raw / det.sqrt());
        times.push(orbit.period * k as f64 / n as f64);
        tv1.push(w1);
        tv2.push(w2);

        if k < n {
            for _ in 0..sub {
                let (pn, a, b) = rk4_var_step(surface, p, v1, v2, h)?;
                p = pn;
                v1 = a;
                v2 = b;
            }
        }
    }

    let path = SL2Path { times, matrices };
    let gap = path.max_consecutive_gap();
    if gap >= 0.5 {
        return Err(Error::RotationSampling { max_step: gap, limit: 0.5 });
    }
    Ok(LinearizedFlow { path, det_drift, v1: tv1, v2: tv2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sphere() -> StarShapedSurface {
        StarShapedSurface::sphere()
    }

    fn ellipsoid_12() -> StarShapedSurface {
        StarShapedSurface::ellipsoid(1.0, 2.0_f64.sqrt()).unwrap()
    }

    fn perturbed() -> StarShapedSurface {
        StarShapedSurface::perturbed_ellipsoid(1.0, 2.0_f64.sqrt(), 0.15).unwrap()
    }

    #[test]
    fn flow_zero_time_is_identity() {
        let p = Vec4::new(1.0, 0.0, 0.0, 0.0);
        assert_eq!(flow(&sphere(), p, 0.0, 1e-10).unwrap(), p);
    }

    #[test]
    fn flow_on_sphere_matches_closed_form() {
        let p = Vec4::new(1.0, 0.0, 0.0, 0.0);
        let q = flow(&sphere(), p, PI / 2.0, 1e-10).unwrap();
        assert!((q - Vec4::new(-1.0, 0.0, 0.0, 0.0)).norm() < 1e-9);

        let p = Vec4::new(0.5, 0.1, -0.3, 0.7).normalized();
        for &t in &[0.3, 1.1, 2.9] {
            let q = flow(&sphere(), p, t, 1e-11).unwrap();
            let expect = Vec4::from_complex(
                p.z1() * num_complex::Complex64::from_polar(1.0, 2.0 * t),
                p.z2() * num_complex::Complex64::from_polar(1.0, 2.0 * t),
            );
            assert!((q - expect).norm() < 1e-9);
        }
    }

    #[test]
    fn flow_on_ellipsoid_matches_closed_form() {
        use rand::{Rng, SeedableRng};
        let e = ellipsoid_12();
        let (w1, w2) = (2.0, 1.0);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        for _ in 0..20 {
            let raw = Vec4::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            if raw.norm() < 0.1 {
                continue;
            }
            let p = e.project_radial(raw).unwrap();
            let t = rng.random_range(0.2..3.0);
            let q = flow(&e, p, t, 1e-11).unwrap();
            let expect = Vec4::from_complex(
                p.z1() * num_complex::Complex64::from_polar(1.0, w1 * t),
                p.z2() * num_complex::Complex64::from_polar(1.0, w2 * t),
            );
            assert!((q - expect).norm() < 1e-8, "error {}", (q - expect).norm());
        }
    }

    #[test]
    fn flow_stays_on_surface_and_composes() {
        let surf = perturbed();
        let p = surf.project_radial(Vec4::new(0.9, 0.2, 0.3, -0.4)).unwrap();
        let (s, t) = (0.7, 1.3);
        let a = flow(&surf, p, s + t, 1e-11).unwrap();
        let b = flow(&surf, flow(&surf, p, s, 1e-11).unwrap(), t, 1e-11).unwrap();
        assert!((a - b).norm() < 1e-8);
        for &tt in &[0.3, 0.9, 2.1] {
            let q = flow(&surf, p, tt, 1e-11).unwrap();
            assert!((surf.f(q) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn sphere_orbit_period_and_action() {
        let orbit =
            find_periodic_orbit(&sphere(), Vec4::new(1.0, 0.0, 0.0, 0.0), 3.0, 1e-10).unwrap();
        assert!((orbit.period - PI).abs() < 1e-12);
        assert!(orbit.closure_residual < 1e-12);
        assert!(orbit.max_f_drift() < 1e-12);
        let (t, integral) = action(&orbit).unwrap();
        assert!((t - PI).abs() < 1e-12);
        assert!((integral - PI).abs() < 1e-12);
    }

    #[test]
    fn ellipsoid_coordinate_orbit_periods() {
        let e = ellipsoid_12();
        let short = find_periodic_orbit(&e, Vec4::new(1.0, 0.0, 0.0, 0.0), 3.0, 1e-10).unwrap();
        assert!((short.period - PI).abs() < 1e-12);
        let long =
            find_periodic_orbit(&e, Vec4::new(0.0, 0.0, 2.0_f64.sqrt(), 0.0), 6.0, 1e-10).unwrap();
        assert!((long.period - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn torus_orbit_closes_with_rational_frequencies() {
        // ω1:ω2 = 2:3 requires r2² = (2/3)·r1²; the orbit through a generic
        // point winds twice in z1 and three times in z2.
        let e = StarShapedSurface::ellipsoid(1.0, (2.0f64 / 3.0).sqrt()).unwrap();
        let p0 = e.project_radial(Vec4::new(0.8, 0.0, 0.55, 0.1)).unwrap();
        let orbit = find_periodic_orbit(&e, p0, 6.0, 1e-10).unwrap();
        assert!((orbit.period - 2.0 * PI).abs() < 1e-10);
        assert!(orbit.closure_residual < 1e-9);
    }

    #[test]
    fn shooting_finds_circle_orbit_on_perturbed_ellipsoid() {
        // The x1²x2² perturbation vanishes on the z1-circle, which therefore
        // remains a Reeb orbit with the unperturbed period π.
        let surf = perturbed();
        let guess = surf.project_radial(Vec4::new(1.0, 0.0, 0.06, -0.04)).unwrap();
        let orbit = find_periodic_orbit(&surf, guess, 3.2, 1e-10).unwrap();
        assert!((orbit.period - PI).abs() < 1e-8, "period {}", orbit.period);
        assert!(orbit.closure_residual < 1e-8);
        for p in &orbit.points {
            assert!(p.z2().norm() < 1e-7, "orbit strayed off the circle: {:?}", p);
        }
    }

    #[test]
    fn linearized_path_on_sphere_is_rigid_rotation() {
        let orbit =
            find_periodic_orbit(&sphere(), Vec4::new(1.0, 0.0, 0.0, 0.0), 3.0, 1e-10).unwrap();
        let lin = linearized_path(&sphere(), &orbit).unwrap();
        let n = orbit.n_samples();
        // Φ(t) is the rotation by 4t; check quarter-period, half-period,
        // and the full monodromy.
        for (idx, angle) in [(n / 4, PI), (n / 2, 2.0 * PI), (n, 4.0 * PI)] {
            let t = orbit.period * idx as f64 / n as f64;
            assert!((4.0 * t - angle).abs() < 1e-12);
            let expect = Matrix2::new(angle.cos(), -angle.sin(), angle.sin(), angle.cos());
            assert!((lin.path.matrices[idx] - expect).norm() < 1e-6);
        }
        assert!(lin.det_drift < 1e-9);
    }

    #[test]
    fn linearized_path_on_ellipsoid_rotates_at_combined_frequency() {
        let e = ellipsoid_12();
        let orbit = find_periodic_orbit(&e, Vec4::new(1.0, 0.0, 0.0, 0.0), 3.0, 1e-10).unwrap();
        let lin = linearized_path(&e, &orbit).unwrap();
        let n = orbit.n_samples();
        for idx in [n / 8, n / 3, (5 * n) / 7, n] {
            let t = orbit.period * idx as f64 / n as f64;
            let angle = 3.0 * t; // ω1 + ω2 = 2 + 1
            let expect = Matrix2::new(angle.cos(), -angle.sin(), angle.sin(), angle.cos());
            assert!(
                (lin.path.matrices[idx] - expect).norm() < 1e-6,
                "at sample {idx}: {:?}",
                lin.path.matrices[idx]
            );
        }
    }

    #[test]
    fn linearized_path_det_stays_near_one_generically() {
        let surf = perturbed();
        let guess = surf.project_radial(Vec4::new(1.0, 0.0, 0.05, -0.03)).unwrap();
        let orbit = find_periodic_orbit(&surf, guess, 3.2, 1e-10).unwrap();
        let lin = linearized_path(&surf, &orbit).unwrap();
        assert!(lin.det_drift < 1e-6, "drift {}", lin.det_drift);
        for m in &lin.path.matrices {
            assert!((m.determinant() - 1.0).abs() < 1e-12);
        }
        assert!(lin.path.max_consecutive_gap() < 0.5);
    }

    #[test]
    fn rational_approx_finds_small_fractions() {
        assert_eq!(rational_approx(2.0, 100, 1e-12), Some((2, 1)));
        assert_eq!(rational_approx(2.0 / 3.0, 100, 1e-12), Some((2, 3)));
        assert_eq!(rational_approx(1.7, 100, 1e-9), Some((17, 10)));
        assert_eq!(rational_approx(std::f64::consts::SQRT_2, 50, 1e-12), None);
    }
}
