//! Disc fillings of transverse knots.
//!
//! A filling is an immersed disc in the closed domain bounded by the
//! star-shaped surface whose boundary traverses the knot once positively.
//! Discs are stored as a polar sample grid together with first partials, so
//! downstream quantities (symplectic area density, complex-point defects,
//! self-intersections) are evaluated from the same data the constructors
//! validated.
//!
//! Two constructors build fillings by the chord method: every disc point is
//! a convex combination of two boundary points at matched parameters, so for
//! a convex domain the whole disc automatically stays inside. The [`linear_filling`]
//! pairs points by arc length; [`embedded_filling`] pairs points of equal
//! height along a direction for which the height function on the knot has a
//! single minimum and a single maximum, which makes the level chords disjoint
//! and the disc embedded.
//!
//! The signed count of transverse double points ([`tangential_index`]) and
//! the self-linking number of the boundary are tied together, for fillings
//! with positive symplectic area density and no anti-holomorphic complex
//! points, by the identity sl(γ) = 2·Int(f) − 1 checked in
//! [`verify_theorem1`].

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix4, Vector4};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::knot::{self, TransverseKnot, DEFAULT_LINK_QUAD, DEFAULT_PUSHOFF};
use crate::par;
use crate::vec4::{omega0, Vec4};

/// Default number of radial cells of the polar grid.
pub const DEFAULT_GRID_R: usize = 96;
/// Default number of angular cells of the polar grid (must stay even).
pub const DEFAULT_GRID_THETA: usize = 384;
/// Default transversality tolerance for the normalized double-point
/// determinant in [`tangential_index`].
pub const DEFAULT_TRANSVERSE_TOL: f64 = 1e-6;

/// Chord-chart parameter clamp: the latitude parameter t = arccos x is kept
/// in [T_EPS, π − T_EPS] so the 1/sin t factors in the partials stay finite;
/// the two pole grid points themselves get exact boundary values.
const T_EPS: f64 = 1e-7;

/// A converged double point must reproduce itself to this residual.
const ACCEPT_RESIDUAL: f64 = 1e-9;
/// Candidate cell pairs whose best Newton residual stays above this (times
/// the ambient scale) are near misses, not intersections.
const NEAR_MISS: f64 = 1e-6;

// ---------------------------------------------------------------------------
// Disc storage
// ---------------------------------------------------------------------------

/// An immersed disc sampled on the polar grid r_i = i/n_r (rows 0..=n_r),
/// θ_j = 2πj/n_theta (columns 0..n_theta, wrapping), row-major, together
/// with the first partials ∂f/∂x, ∂f/∂y in the Cartesian disc frame.
#[derive(Clone, Debug)]
pub struct ImmersedDisc {
    n_r: usize,
    n_theta: usize,
    points: Vec<Vec4>,
    tangent_x: Vec<Vec4>,
    tangent_y: Vec<Vec4>,
}

fn check_grid(n_r: usize, n_theta: usize) -> Result<()> {
    if n_r < 4 || n_theta < 8 || n_theta % 2 != 0 {
        return Err(Error::InvalidParameter {
            reason: format!(
                "disc grid must have n_r >= 4 and even n_theta >= 8, got {n_r} x {n_theta}"
            ),
        });
    }
    Ok(())
}

impl ImmersedDisc {
    /// Number of radial cells (rows run 0..=n_r).
    pub fn n_r(&self) -> usize {
        self.n_r
    }

    /// Number of angular cells (columns run 0..n_theta and wrap).
    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i <= self.n_r);
        i * self.n_theta + (j % self.n_theta)
    }

    /// Radial coordinate of row i.
    pub fn r_of(&self, i: usize) -> f64 {
        i as f64 / self.n_r as f64
    }

    /// Angular coordinate of column j.
    pub fn theta_of(&self, j: usize) -> f64 {
        TAU * (j % self.n_theta) as f64 / self.n_theta as f64
    }

    /// Grid point at row i, column j (j wraps).
    pub fn point(&self, i: usize, j: usize) -> Vec4 {
        self.points[self.idx(i, j)]
    }

    /// ∂f/∂x at row i, column j.
    pub fn tangent_x(&self, i: usize, j: usize) -> Vec4 {
        self.tangent_x[self.idx(i, j)]
    }

    /// ∂f/∂y at row i, column j.
    pub fn tangent_y(&self, i: usize, j: usize) -> Vec4 {
        self.tangent_y[self.idx(i, j)]
    }

    /// Radial partial ∂f/∂r at row i, column j.
    pub fn tangent_r(&self, i: usize, j: usize) -> Vec4 {
        let th = self.theta_of(j);
        self.tangent_x(i, j) * th.cos() + self.tangent_y(i, j) * th.sin()
    }

    /// Angular partial ∂f/∂θ at row i, column j.
    pub fn tangent_theta(&self, i: usize, j: usize) -> Vec4 {
        let th = self.theta_of(j);
        (self.tangent_y(i, j) * th.cos() - self.tangent_x(i, j) * th.sin()) * self.r_of(i)
    }

    /// Largest coordinate magnitude over the grid; the ambient scale used to
    /// make tolerances dimension-free.
    pub fn ambient_scale(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p.norm())
            .fold(0.0_f64, f64::max)
    }

    /// Build a disc by sampling a Cartesian map of the closed unit disc;
    /// partials are taken by central differences (step 1e-5), so the map
    /// must be evaluable slightly beyond the closed disc.
    pub fn from_map<F>(map: F, n_r: usize, n_theta: usize) -> Result<ImmersedDisc>
    where
        F: Fn(f64, f64) -> Vec4 + Sync,
    {
        let h = 1e-5;
        Self::from_map_with_tangents(
            &map,
            |x: f64, y: f64| {
                let fx = (map(x + h, y) - map(x - h, y)) * (0.5 / h);
                let fy = (map(x, y + h) - map(x, y - h)) * (0.5 / h);
                (fx, fy)
            },
            n_r,
            n_theta,
        )
    }

    /// Build a disc from a Cartesian map and its analytic partials
    /// (x, y) ↦ (∂f/∂x, ∂f/∂y).
    pub fn from_map_with_tangents<F, G>(
        map: F,
        tangents: G,
        n_r: usize,
        n_theta: usize,
    ) -> Result<ImmersedDisc>
    where
        F: Fn(f64, f64) -> Vec4 + Sync,
        G: Fn(f64, f64) -> (Vec4, Vec4) + Sync,
    {
        check_grid(n_r, n_theta)?;
        let rows = par::map_range(n_r + 1, |i| {
            let r = i as f64 / n_r as f64;
            let mut row = Vec::with_capacity(n_theta);
            for j in 0..n_theta {
                let th = TAU * j as f64 / n_theta as f64;
                let (x, y) = (r * th.cos(), r * th.sin());
                let f = map(x, y);
                let (fx, fy) = tangents(x, y);
                row.push((f, fx, fy));
            }
            row
        });
        Ok(Self::from_rows(rows, n_r, n_theta))
    }

    fn from_rows(rows: Vec<Vec<(Vec4, Vec4, Vec4)>>, n_r: usize, n_theta: usize) -> ImmersedDisc {
        let n = (n_r + 1) * n_theta;
        let mut points = Vec::with_capacity(n);
        let mut tangent_x = Vec::with_capacity(n);
        let mut tangent_y = Vec::with_capacity(n);
        for row in rows {
            for (f, fx, fy) in row {
                points.push(f);
                tangent_x.push(fx);
                tangent_y.push(fy);
            }
        }
        ImmersedDisc {
            n_r,
            n_theta,
            points,
            tangent_x,
            tangent_y,
        }
    }

    /// The same disc with the opposite orientation: (x, y) ↦ f(x, −y).
    pub fn reversed(&self) -> ImmersedDisc {
        let mut points = Vec::with_capacity(self.points.len());
        let mut tangent_x = Vec::with_capacity(self.points.len());
        let mut tangent_y = Vec::with_capacity(self.points.len());
        for i in 0..=self.n_r {
            for j in 0..self.n_theta {
                let jm = (self.n_theta - j) % self.n_theta;
                points.push(self.point(i, jm));
                tangent_x.push(self.tangent_x(i, jm));
                tangent_y.push(self.tangent_y(i, jm) * -1.0);
            }
        }
        ImmersedDisc {
            n_r: self.n_r,
            n_theta: self.n_theta,
            points,
            tangent_x,
            tangent_y,
        }
    }

    /// Minimum over the grid (excluding the center row, where ∂f/∂θ vanishes
    /// identically) of the normalized symplectic area density
    /// ω₀(f_r, f_θ)/(‖f_r‖‖f_θ‖). Positive means the disc is symplectic with
    /// the orientation induced by the parametrization.
    pub fn symplectic_check(&self) -> f64 {
        let mins = par::map_range(self.n_r, |k| {
            let i = k + 1;
            let mut min = f64::INFINITY;
            for j in 0..self.n_theta {
                let th = self.theta_of(j);
                let fr = self.tangent_x(i, j) * th.cos() + self.tangent_y(i, j) * th.sin();
                let et = self.tangent_y(i, j) * th.cos() - self.tangent_x(i, j) * th.sin();
                let denom = fr.norm() * et.norm();
                if denom > 0.0 {
                    min = min.min(omega0(fr, et) / denom);
                }
            }
            min
        });
        mins.into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Bilinearly interpolated position and partials with respect to the
    /// continuous polar parameters (ρ ∈ [0, 1], τ ∈ ℝ mod 2π).
    fn interp(&self, rho: f64, tau: f64) -> (Vec4, Vec4, Vec4) {
        let a = (rho * self.n_r as f64).clamp(0.0, self.n_r as f64);
        let i0 = (a.floor() as usize).min(self.n_r - 1);
        let u = a - i0 as f64;
        let dth = TAU / self.n_theta as f64;
        let b = (tau / dth).rem_euclid(self.n_theta as f64);
        let j0 = (b.floor() as usize).min(self.n_theta - 1);
        let v = b - j0 as f64;
        let p00 = self.point(i0, j0);
        let p10 = self.point(i0 + 1, j0);
        let p01 = self.point(i0, j0 + 1);
        let p11 = self.point(i0 + 1, j0 + 1);
        let f = p00 * ((1.0 - u) * (1.0 - v))
            + p10 * (u * (1.0 - v))
            + p01 * ((1.0 - u) * v)
            + p11 * (u * v);
        let frho = ((p10 - p00) * (1.0 - v) + (p11 - p01) * v) * self.n_r as f64;
        let ftau = ((p01 - p00) * (1.0 - u) + (p11 - p10) * u) * (1.0 / dth);
        (f, frho, ftau)
    }

    /// Bilinearly interpolated Cartesian partials at (ρ, τ).
    fn interp_tangents(&self, rho: f64, tau: f64) -> (Vec4, Vec4) {
        let a = (rho * self.n_r as f64).clamp(0.0, self.n_r as f64);
        let i0 = (a.floor() as usize).min(self.n_r - 1);
        let u = a - i0 as f64;
        let dth = TAU / self.n_theta as f64;
        let b = (tau / dth).rem_euclid(self.n_theta as f64);
        let j0 = (b.floor() as usize).min(self.n_theta - 1);
        let v = b - j0 as f64;
        let blend = |g: &[Vec4]| {
            let q = |i: usize, j: usize| g[i * self.n_theta + (j % self.n_theta)];
            q(i0, j0) * ((1.0 - u) * (1.0 - v))
                + q(i0 + 1, j0) * (u * (1.0 - v))
                + q(i0, j0 + 1) * ((1.0 - u) * v)
                + q(i0 + 1, j0 + 1) * (u * v)
        };
        (blend(&self.tangent_x), blend(&self.tangent_y))
    }

    /// Checks that the disc is an immersed filling of the knot:
    /// the boundary row lies on the knot (distance < 1e−8 × scale), the
    /// partials have full rank away from the two-cell boundary collar
    /// (σ_min > 1e−6), and the grid away from the collar stays strictly
    /// inside the domain bounded by the knot's surface.
    pub fn validate(&self, knot: &TransverseKnot) -> Result<()> {
        let scale = 1.0 + self.ambient_scale();
        for j in 0..self.n_theta {
            let d = distance_to_curve(knot, self.point(self.n_r, j));
            if d > 1e-8 * scale {
                return Err(Error::DiscEvaluation {
                    i: self.n_r,
                    j,
                    reason: format!("boundary point is {d:.3e} away from the knot"),
                });
            }
        }
        let i_max = self.n_r - 3;
        for i in 0..=i_max {
            for j in 0..self.n_theta {
                let fx = self.tangent_x(i, j);
                let fy = self.tangent_y(i, j);
                let smin = sigma_min(fx, fy);
                if smin <= 1e-6 {
                    return Err(Error::RankDeficient {
                        context: format!(
                            "disc partials have sigma_min = {smin:.3e} at grid ({i}, {j})"
                        ),
                    });
                }
            }
        }
        for i in 0..self.n_r {
            for j in 0..self.n_theta {
                let value = knot.surface.f(self.point(i, j));
                if i <= i_max && value >= 1.0 - 1e-8 {
                    return Err(Error::DiscEvaluation {
                        i,
                        j,
                        reason: format!(
                            "interior point reaches the bounding surface (F = {value:.12})"
                        ),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Squared-gram smallest singular value of the 4×2 matrix [u v].
fn sigma_min(u: Vec4, v: Vec4) -> f64 {
    let a = u.norm_squared();
    let b = u.dot(v);
    let c = v.norm_squared();
    let disc = ((a - c) * (a - c) + 4.0 * b * b).sqrt();
    (0.5 * (a + c - disc)).max(0.0).sqrt()
}

/// Distance from p to the knot: coarse scan over the sample points followed
/// by two rounds of three-point parabolic refinement in the curve parameter.
fn distance_to_curve(knot: &TransverseKnot, p: Vec4) -> f64 {
    let n = knot.n_samples();
    let mut best_k = 0;
    let mut best = f64::INFINITY;
    for (k, &q) in knot.points.iter().enumerate() {
        let d = (p - q).norm_squared();
        if d < best {
            best = d;
            best_k = k;
        }
    }
    let mut s0 = TAU * best_k as f64 / n as f64;
    let mut h = TAU / n as f64;
    let d2 = |s: f64| (p - knot.eval(s)).norm_squared();
    let mut d0 = best;
    for _ in 0..2 {
        let dm = d2(s0 - h);
        let dp = d2(s0 + h);
        let denom = dm - 2.0 * d0 + dp;
        let mut s_new = s0;
        if denom > 0.0 {
            let delta = (0.5 * (dm - dp) / denom).clamp(-1.0, 1.0);
            s_new = s0 + delta * h;
        }
        let d_new = d2(s_new);
        if d_new < d0 {
            s0 = s_new;
            d0 = d_new;
        }
        h *= 0.5;
    }
    d0.sqrt()
}

// ---------------------------------------------------------------------------
// Chord construction
// ---------------------------------------------------------------------------

/// Evaluate the chord chart at Cartesian (x, y) in the closed unit disc.
///
/// With t = arccos x and s = sin t, the chord weight is w = (y + s)/(2s) and
/// f = w·A(t) + (1 − w)·B(t), where A and B are the two boundary arcs and
/// both return (value, d/dt). On the upper boundary semicircle w = 1 (so the
/// boundary runs through A forwards), on the lower w = 0 (B backwards), and
/// the chart is smooth across the equator chord.
fn chord_eval<FU, FD>(x: f64, y: f64, up: &FU, down: &FD) -> (Vec4, Vec4, Vec4)
where
    FU: Fn(f64) -> (Vec4, Vec4),
    FD: Fn(f64) -> (Vec4, Vec4),
{
    let t = x.clamp(-1.0, 1.0).acos().clamp(T_EPS, PI - T_EPS);
    let s = t.sin();
    let (a, da) = up(t);
    let (b, db) = down(t);
    let w = (y + s) / (2.0 * s);
    let f = a * w + b * (1.0 - w);
    let w_x = t.cos() * y / (2.0 * s * s * s);
    let dmix = da * w + db * (1.0 - w);
    let fx = (a - b) * w_x - dmix * (1.0 / s);
    let fy = (a - b) * (1.0 / (2.0 * s));
    (f, fx, fy)
}

/// Sample the chord chart over the polar grid. The two pole grid points
/// (r = 1, θ ∈ {0, π}) take the exact arc endpoint values.
fn chord_grid<FU, FD>(
    up: &FU,
    down: &FD,
    pole_a: Vec4,
    pole_b: Vec4,
    n_r: usize,
    n_theta: usize,
) -> ImmersedDisc
where
    FU: Fn(f64) -> (Vec4, Vec4) + Sync,
    FD: Fn(f64) -> (Vec4, Vec4) + Sync,
{
    let rows = par::map_range(n_r + 1, |i| {
        let r = i as f64 / n_r as f64;
        let mut row = Vec::with_capacity(n_theta);
        for j in 0..n_theta {
            let th = TAU * j as f64 / n_theta as f64;
            let (x, y) = (r * th.cos(), r * th.sin());
            let (mut f, fx, fy) = chord_eval(x, y, up, down);
            if i == n_r && j == 0 {
                f = pole_a;
            } else if i == n_r && 2 * j == n_theta {
                f = pole_b;
            }
            row.push((f, fx, fy));
        }
        row
    });
    let mut disc = ImmersedDisc::from_rows(rows, n_r, n_theta);
    // At the two pole grid points the 1/sin t factors of the chart amplify
    // the rounding of the arc inversions, so evaluate the tangents a small
    // parameter away along the pole ray and extrapolate to the pole: the
    // chart is even in t there (x = cos t), making the t² Richardson step
    // fourth-order accurate.
    let t0: f64 = 1e-3;
    for (j, sign) in [(0_usize, 1.0_f64), (n_theta / 2, -1.0)] {
        let (_, fx1, fy1) = chord_eval(sign * t0.cos(), 0.0, up, down);
        let (_, fx2, fy2) = chord_eval(sign * (2.0 * t0).cos(), 0.0, up, down);
        let idx = n_r * n_theta + j;
        disc.tangent_x[idx] = (fx1 * 4.0 - fx2) * (1.0 / 3.0);
        disc.tangent_y[idx] = (fy1 * 4.0 - fy2) * (1.0 / 3.0);
    }
    disc
}

/// Cumulative arc length of the knot from s_a over m uniform parameter
/// steps spanning one period (trapezoid rule).
struct ArcLengthTable {
    s_a: f64,
    h: f64,
    cum: Vec<f64>,
}

impl ArcLengthTable {
    fn build(knot: &TransverseKnot, s_a: f64, m: usize) -> ArcLengthTable {
        let h = TAU / m as f64;
        let speeds: Vec<f64> = (0..=m)
            .map(|k| knot.eval_derivative(s_a + h * k as f64).norm())
            .collect();
        let mut cum = Vec::with_capacity(m + 1);
        let mut acc = 0.0;
        cum.push(0.0);
        for k in 0..m {
            acc += 0.5 * (speeds[k] + speeds[k + 1]) * h;
            cum.push(acc);
        }
        ArcLengthTable { s_a, h, cum }
    }

    fn total(&self) -> f64 {
        *self.cum.last().unwrap()
    }

    /// Arc length accumulated at parameter s ∈ [s_a, s_a + 2π].
    fn at(&self, s: f64) -> f64 {
        let x = ((s - self.s_a) / self.h).clamp(0.0, (self.cum.len() - 1) as f64);
        let k = (x.floor() as usize).min(self.cum.len() - 2);
        let u = x - k as f64;
        self.cum[k] * (1.0 - u) + self.cum[k + 1] * u
    }

    /// Parameter s ∈ [s_a, s_a + 2π] at accumulated arc length ℓ
    /// (piecewise-linear inverse of the monotone table).
    fn inverse(&self, ell: f64) -> f64 {
        let ell = ell.clamp(0.0, self.total());
        let mut lo = 0;
        let mut hi = self.cum.len() - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.cum[mid] <= ell {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let seg = self.cum[hi] - self.cum[lo];
        let u = if seg > 0.0 { (ell - self.cum[lo]) / seg } else { 0.0 };
        self.s_a + (lo as f64 + u) * self.h
    }
}

/// Shared tail of the two chord constructors: build the grid, validate it
/// against the knot, and on a rank failure rebuild once at doubled
/// resolution before giving up.
fn build_validated<F>(knot: &TransverseKnot, n_r: usize, n_theta: usize, make: F) -> Result<ImmersedDisc>
where
    F: Fn(usize, usize) -> ImmersedDisc,
{
    let disc = make(n_r, n_theta);
    match disc.validate(knot) {
        Ok(()) => Ok(disc),
        Err(Error::RankDeficient { .. }) => {
            let fine = make(2 * n_r, 2 * n_theta);
            fine.validate(knot)?;
            Ok(fine)
        }
        Err(e) => Err(e),
    }
}

/// Filling by arc-length-matched chords.
///
/// The knot is split at the two parameters in `split` (default (0, π)); the
/// boundary circle of the disc runs through the first arc on the upper
/// semicircle and the second arc on the lower one, traversing the knot once
/// positively. Points are paired by proportional arc length with a smooth
/// rate warp that equalizes the two arcs' approach speeds at the split
/// points, which keeps the chart an immersion at the poles even when the
/// arcs have different lengths. Arcs with length ratio above 20 are
/// rejected.
pub fn linear_filling(
    knot: &TransverseKnot,
    split: Option<(f64, f64)>,
    n_r: usize,
    n_theta: usize,
) -> Result<ImmersedDisc> {
    check_grid(n_r, n_theta)?;
    let (s_a, s_b_raw) = split.unwrap_or((0.0, PI));
    let span = (s_b_raw - s_a).rem_euclid(TAU);
    if !(1e-6..=TAU - 1e-6).contains(&span) {
        return Err(Error::InvalidParameter {
            reason: format!("split parameters coincide on the knot (arc span {span:.3e})"),
        });
    }
    let table = ArcLengthTable::build(knot, s_a, 8192);
    let ell_up = table.at(s_a + span);
    let ell_down = table.total() - ell_up;
    let ratio = ell_up.max(ell_down) / ell_up.min(ell_down);
    if !ratio.is_finite() || ratio > 20.0 {
        return Err(Error::InvalidParameter {
            reason: format!("arc length ratio {ratio:.2} exceeds 20; choose a more balanced split"),
        });
    }

    // Rate profile g(t) = r_e + β(1 − cos 2t)/2 integrates to the arc length
    // over [0, π] and equals the common end rate r_e at t = 0, π.
    let r_e = ell_up.min(ell_down) / PI;
    let beta_up = 2.0 * (ell_up - r_e * PI) / PI;
    let beta_down = 2.0 * (ell_down - r_e * PI) / PI;
    let profile = |t: f64, beta: f64| {
        let pos = r_e * t + beta * (2.0 * t - (2.0 * t).sin()) / 4.0;
        let rate = r_e + beta * (1.0 - (2.0 * t).cos()) / 2.0;
        (pos, rate)
    };

    let up = |t: f64| {
        let (pos, rate) = profile(t, beta_up);
        let s = table.inverse(pos);
        let d = knot.eval_derivative(s);
        (knot.eval(s), d * (rate / d.norm()))
    };
    let down = |t: f64| {
        let (pos, rate) = profile(t, beta_down);
        let s = table.inverse(ell_up + (ell_down - pos));
        let d = knot.eval_derivative(s);
        (knot.eval(s), d * (-rate / d.norm()))
    };
    let pole_a = knot.eval(s_a);
    let pole_b = knot.eval(s_a + span);
    build_validated(knot, n_r, n_theta, |nr, nt| {
        chord_grid(&up, &down, pole_a, pole_b, nr, nt)
    })
}

/// Embedded filling by level chords of a height function.
///
/// `v` must be a direction along which the height s ↦ ⟨γ(s), v⟩ has exactly
/// one local minimum and one local maximum (see
/// [`knot::find_filling_direction`]). The knot then splits into two arcs on
/// which the height is strictly monotone; the disc chords join the unique
/// pair of equal-height points at each level of a cosine level profile, so
/// distinct chords live at distinct heights and the disc is embedded — which
/// is verified by a spatial-hash injectivity scan over the grid.
pub fn embedded_filling(
    knot: &TransverseKnot,
    v: Vec4,
    n_r: usize,
    n_theta: usize,
) -> Result<ImmersedDisc> {
    check_grid(n_r, n_theta)?;
    let v = v.normalized();
    let n = knot.n_samples();
    let g: Vec<f64> = knot.derivatives.iter().map(|d| d.dot(v)).collect();
    let mut ups = Vec::new();
    let mut downs = Vec::new();
    for k in 0..n {
        let (gk, gk1) = (g[k], g[(k + 1) % n]);
        if gk < 0.0 && gk1 >= 0.0 {
            ups.push(k);
        }
        if gk > 0.0 && gk1 <= 0.0 {
            downs.push(k);
        }
    }
    if ups.len() != 1 || downs.len() != 1 {
        return Err(Error::DegenerateSplit {
            arcs: ups.len() + downs.len(),
        });
    }
    let h_step = TAU / n as f64;
    let refine = |k: usize, flip: f64| {
        let lo = h_step * k as f64;
        crate::numerics::bisect(lo, lo + h_step, 1e-13, |s| flip * knot.eval_derivative(s).dot(v))
    };
    let s_min = refine(ups[0], 1.0);
    let mut s_max = refine(downs[0], -1.0);
    if s_max <= s_min {
        s_max += TAU;
    }
    let h_lo = knot.eval(s_min).dot(v);
    let h_hi = knot.eval(s_max).dot(v);
    if h_hi - h_lo <= 1e-10 {
        return Err(Error::HeightNotMonotone { lo: h_lo, hi: h_hi });
    }

    // Monotonicity audit along both arcs at a resolution finer than the
    // sample grid, so a plateau that slipped past the crossing count fails
    // loudly instead of corrupting the level inversion.
    for (a, b, sign) in [(s_min, s_max, 1.0), (s_max, s_min + TAU, -1.0)] {
        let m = 2 * n;
        let mut prev = knot.eval(a).dot(v);
        for k in 1..=m {
            let s = a + (b - a) * k as f64 / m as f64;
            let h = knot.eval(s).dot(v);
            if sign * (h - prev) < -1e-9 * (h_hi - h_lo) {
                return Err(Error::HeightNotMonotone { lo: prev, hi: h });
            }
            prev = h;
        }
    }

    let dh = h_hi - h_lo;
    let level = move |t: f64| (h_lo + dh * (1.0 - t.cos()) / 2.0, dh * t.sin() / 2.0);
    let up = move |t: f64| {
        let (l, dl) = level(t);
        let s = crate::numerics::bisect(s_min, s_max, 1e-13, |s| knot.eval(s).dot(v) - l);
        let dv = knot.eval_derivative(s);
        (knot.eval(s), dv * (dl / dv.dot(v)))
    };
    let down = move |t: f64| {
        let (l, dl) = level(t);
        let s = crate::numerics::bisect(s_max, s_min + TAU, 1e-13, |s| l - knot.eval(s).dot(v));
        let dv = knot.eval_derivative(s);
        (knot.eval(s), dv * (dl / dv.dot(v)))
    };
    let pole_a = knot.eval(s_min);
    let pole_b = knot.eval(s_max);
    let disc = build_validated(knot, n_r, n_theta, |nr, nt| {
        chord_grid(&up, &down, pole_a, pole_b, nr, nt)
    })?;
    injectivity_scan(&disc)?;
    Ok(disc)
}

/// Spatial-hash scan for grid points that are far apart on the parameter
/// disc yet closer than 1e−5 × scale in the ambient space.
fn injectivity_scan(disc: &ImmersedDisc) -> Result<()> {
    let tau = 1e-5 * (1.0 + disc.ambient_scale());
    let mut buckets: HashMap<[i64; 4], Vec<(usize, usize)>> = HashMap::new();
    let key = |p: Vec4| {
        let a = p.to_array();
        [
            (a[0] / tau).floor() as i64,
            (a[1] / tau).floor() as i64,
            (a[2] / tau).floor() as i64,
            (a[3] / tau).floor() as i64,
        ]
    };
    let adjacent = |i1: usize, j1: usize, i2: usize, j2: usize| {
        if i1 == 0 && i2 == 0 {
            return true;
        }
        let dj = (j1 as i64 - j2 as i64).rem_euclid(disc.n_theta as i64);
        let dj = dj.min(disc.n_theta as i64 - dj);
        (i1 as i64 - i2 as i64).abs() <= 1 && dj <= 1
    };
    for i in 0..=disc.n_r {
        for j in 0..disc.n_theta {
            let p = disc.point(i, j);
            let k0 = key(p);
            for d0 in -1..=1_i64 {
                for d1 in -1..=1_i64 {
                    for d2 in -1..=1_i64 {
                        for d3 in -1..=1_i64 {
                            let k = [k0[0] + d0, k0[1] + d1, k0[2] + d2, k0[3] + d3];
                            if let Some(list) = buckets.get(&k) {
                                for &(i2, j2) in list {
                                    if adjacent(i, j, i2, j2) {
                                        continue;
                                    }
                                    let dist = (p - disc.point(i2, j2)).norm();
                                    if dist < tau {
                                        return Err(Error::InjectivityScan { dist });
                                    }
                                }
                            }
                        }
                    }
                }
            }
            buckets.entry(k0).or_default().push((i, j));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Complex points
// ---------------------------------------------------------------------------

/// A point of the disc where the tangent plane is a complex line, detected
/// as a local minimum of the defect d = ‖(1 − ⟨J u, e₂⟩²)‖^{1/2} built from
/// an orthonormal tangent frame (u, e₂); d vanishes exactly on complex
/// tangencies. `holomorphic` records the sign of ω₀ on the tangent plane.
#[derive(Clone, Debug, Serialize)]
pub struct ComplexPoint {
    pub r: f64,
    pub theta: f64,
    pub defect: f64,
    pub holomorphic: bool,
    /// True when the defect vanishes on more than half the scanned grid, in
    /// which case a single record describes the whole disc.
    pub whole_disc: bool,
}

/// Complex-tangency defect and orientation sign of the plane span(fx, fy).
/// Returns d = 2 when the frame is too degenerate to classify.
fn complex_defect(fx: Vec4, fy: Vec4) -> (f64, f64) {
    let nu = fx.norm();
    if nu < 1e-12 {
        return (2.0, 0.0);
    }
    let u = fx * (1.0 / nu);
    let e2 = fy - u * fy.dot(u);
    let ne = e2.norm();
    if ne < 1e-12 {
        return (2.0, 0.0);
    }
    let c = u.jmul().dot(e2 * (1.0 / ne));
    ((1.0 - c * c).max(0.0).sqrt(), omega0(fx, fy))
}

impl ImmersedDisc {
    /// Locate complex tangencies of the disc, excluding the three-row
    /// boundary collar. Grid minima of the defect below 0.05 are refined by
    /// nested 5×5 sub-grid descent on the bilinearly interpolated tangents
    /// and kept when the refined defect drops below 1e−3 (the defect is
    /// conical around a simple complex point, so the refined value scales
    /// with the cell size rather than its square).
    pub fn complex_points(&self) -> Vec<ComplexPoint> {
        let i_max = self.n_r.saturating_sub(3);
        let dth = TAU / self.n_theta as f64;
        let rows: Vec<Vec<(f64, f64)>> = par::map_range(i_max + 1, |i| {
            (0..self.n_theta)
                .map(|j| complex_defect(self.tangent_x(i, j), self.tangent_y(i, j)))
                .collect()
        });
        let scanned = (i_max + 1) * self.n_theta;
        let flat: Vec<f64> = rows.iter().flatten().map(|&(d, _)| d).collect();
        let n_zero = flat.iter().filter(|&&d| d < 1e-6).count();
        if 2 * n_zero > scanned {
            let worst = flat.iter().cloned().fold(0.0_f64, f64::max);
            let n_hol = rows
                .iter()
                .flatten()
                .filter(|&&(_, s)| s > 0.0)
                .count();
            return vec![ComplexPoint {
                r: 0.0,
                theta: 0.0,
                defect: worst,
                holomorphic: 2 * n_hol > scanned,
                whole_disc: true,
            }];
        }

        let mut found: Vec<ComplexPoint> = Vec::new();
        for i in 1..i_max {
            for j in 0..self.n_theta {
                let d = rows[i][j];
                if d.0 >= 0.05 {
                    continue;
                }
                let mut strict_min = true;
                for di in -1..=1_i64 {
                    for dj in -1..=1_i64 {
                        if di == 0 && dj == 0 {
                            continue;
                        }
                        let ii = (i as i64 + di) as usize;
                        let jj = (j as i64 + dj).rem_euclid(self.n_theta as i64) as usize;
                        if rows[ii][jj].0 <= d.0 {
                            strict_min = false;
                        }
                    }
                }
                if !strict_min {
                    continue;
                }
                // Nested sub-grid descent on the interpolated tangents.
                let mut rho = self.r_of(i);
                let mut tau = self.theta_of(j);
                let mut best = d.0;
                let mut sig = d.1;
                let mut w_r = 1.0 / self.n_r as f64;
                let mut w_t = dth;
                for _ in 0..4 {
                    for a in -2..=2_i64 {
                        for b in -2..=2_i64 {
                            let rr = (rho + w_r * a as f64 / 2.0).clamp(0.0, 1.0);
                            let tt = tau + w_t * b as f64 / 2.0;
                            let (fx, fy) = self.interp_tangents(rr, tt);
                            let (dd, ss) = complex_defect(fx, fy);
                            if dd < best {
                                best = dd;
                                sig = ss;
                                rho = rr;
                                tau = tt;
                            }
                        }
                    }
                    w_r *= 0.25;
                    w_t *= 0.25;
                }
                if best < 1e-3 {
                    found.push(ComplexPoint {
                        r: rho,
                        theta: tau.rem_euclid(TAU),
                        defect: best,
                        holomorphic: sig > 0.0,
                        whole_disc: false,
                    });
                }
            }
        }
        found.sort_by(|a, b| (a.r, a.theta).partial_cmp(&(b.r, b.theta)).unwrap());
        // Adjacent grid minima that refined into the same point collapse to
        // the record with the smallest defect.
        let mut dedup: Vec<ComplexPoint> = Vec::new();
        for c in found {
            if let Some(last) = dedup.last_mut() {
                let dt = (c.theta - last.theta).rem_euclid(TAU);
                let dt = dt.min(TAU - dt);
                if (c.r - last.r).abs() < 1e-3 && dt < 1e-2 {
                    if c.defect < last.defect {
                        *last = c;
                    }
                    continue;
                }
            }
            dedup.push(c);
        }
        dedup
    }
}

// ---------------------------------------------------------------------------
// Tangential index (signed self-intersections)
// ---------------------------------------------------------------------------

/// One transverse double point of the disc.
#[derive(Clone, Debug, Serialize)]
pub struct IntersectionRecord {
    /// Polar parameters (r, θ) of the two sheets, ordered lexicographically.
    pub params: [[f64; 2]; 2],
    /// Ambient intersection point (midpoint of the two sheet evaluations).
    pub point: [f64; 4],
    /// Orientation sign of the frame (f_x, f_y at sheet 1, f_x, f_y at
    /// sheet 2); independent of the disc's own orientation.
    pub sign: i64,
    /// Final Newton residual ‖f(p₁) − f(p₂)‖.
    pub residual: f64,
}

struct CellGeom {
    i: usize,
    j: usize,
    center: Vec4,
    radius: f64,
}

/// Signed count of transverse self-intersections of the disc, with one
/// record per double point. Non-adjacent grid cell pairs whose bounding
/// balls overlap are candidates; a damped Newton iteration on the bilinear
/// interpolant refines each candidate, and converged double points must be
/// transverse: the normalized determinant of the two tangent frames must
/// exceed `tol` in magnitude or the computation aborts with
/// [`Error::NonTransverseIntersection`].
pub fn tangential_index(disc: &ImmersedDisc, tol: f64) -> Result<(i64, Vec<IntersectionRecord>)> {
    let n_r = disc.n_r;
    let n_t = disc.n_theta;
    let scale = 1.0 + disc.ambient_scale();

    let mut cells = Vec::with_capacity(n_r * n_t);
    let mut r_max = 0.0_f64;
    for i in 0..n_r {
        for j in 0..n_t {
            let corners = [
                disc.point(i, j),
                disc.point(i + 1, j),
                disc.point(i, j + 1),
                disc.point(i + 1, j + 1),
            ];
            let center = (corners[0] + corners[1] + corners[2] + corners[3]) * 0.25;
            let radius = corners
                .iter()
                .map(|&c| (c - center).norm())
                .fold(0.0_f64, f64::max);
            r_max = r_max.max(radius);
            cells.push(CellGeom { i, j, center, radius });
        }
    }
    let bucket = 2.0 * r_max + 1e-12;
    let key = |p: Vec4| {
        let a = p.to_array();
        [
            (a[0] / bucket).floor() as i64,
            (a[1] / bucket).floor() as i64,
            (a[2] / bucket).floor() as i64,
            (a[3] / bucket).floor() as i64,
        ]
    };
    let adjacent = |c1: &CellGeom, c2: &CellGeom| {
        if c1.i == 0 && c2.i == 0 {
            return true;
        }
        let dj = (c1.j as i64 - c2.j as i64).rem_euclid(n_t as i64);
        let dj = dj.min(n_t as i64 - dj);
        (c1.i as i64 - c2.i as i64).abs() <= 1 && dj <= 1
    };

    let mut buckets: HashMap<[i64; 4], Vec<usize>> = HashMap::new();
    for (idx, cell) in cells.iter().enumerate() {
        buckets.entry(key(cell.center)).or_default().push(idx);
    }
    let mut candidates: Vec<(usize, usize)> = Vec::new();
    for (idx, cell) in cells.iter().enumerate() {
        let k0 = key(cell.center);
        for d0 in -1..=1_i64 {
            for d1 in -1..=1_i64 {
                for d2 in -1..=1_i64 {
                    for d3 in -1..=1_i64 {
                        let k = [k0[0] + d0, k0[1] + d1, k0[2] + d2, k0[3] + d3];
                        if let Some(list) = buckets.get(&k) {
                            for &other in list {
                                if other <= idx {
                                    continue;
                                }
                                let oc = &cells[other];
                                if adjacent(cell, oc) {
                                    continue;
                                }
                                if (cell.center - oc.center).norm() <= cell.radius + oc.radius {
                                    candidates.push((idx, other));
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    // Newton refinement of every candidate pair, in parallel but collected
    // in deterministic order.
    let results = par::map_range(candidates.len(), |c| {
        let (p, q) = candidates[c];
        refine_candidate(disc, &cells[p], &cells[q], tol, scale)
    });

    let mut hits: Vec<IntersectionRecord> = Vec::new();
    for res in results {
        if let Some(hit) = res? {
            hits.push(hit);
        }
    }
    hits.sort_by(|a, b| a.params.partial_cmp(&b.params).unwrap());
    // A double point sitting on a grid line is found once per bilinear
    // patch, each version displaced by the per-cell interpolation error, so
    // the merge radius is a multiple of the cell size (double points closer
    // than that are unresolvable at this grid anyway); the sheets of the
    // same crossing may also come out in either canonical order.
    let merge_r = 1.5 / n_r as f64;
    let merge_t = 1.5 * TAU / n_t as f64;
    let mut dedup: Vec<IntersectionRecord> = Vec::new();
    for h in hits {
        let close = |a: &[f64; 2], b: &[f64; 2]| {
            let dt = (a[1] - b[1]).rem_euclid(TAU);
            let dt = dt.min(TAU - dt);
            (a[0] - b[0]).abs() < merge_r && dt < merge_t
        };
        let same = |a: &IntersectionRecord, b: &IntersectionRecord| {
            (close(&a.params[0], &b.params[0]) && close(&a.params[1], &b.params[1]))
                || (close(&a.params[0], &b.params[1]) && close(&a.params[1], &b.params[0]))
        };
        if let Some(prev) = dedup.iter_mut().find(|p| same(p, &h)) {
            if prev.sign != h.sign {
                return Err(Error::IntersectionRefinement {
                    residual: prev.residual.max(h.residual),
                });
            }
            if h.residual < prev.residual {
                *prev = h;
            }
            continue;
        }
        dedup.push(h);
    }
    let index = dedup.iter().map(|h| h.sign).sum();
    Ok((index, dedup))
}

fn refine_candidate(
    disc: &ImmersedDisc,
    cp: &CellGeom,
    cq: &CellGeom,
    tol: f64,
    scale: f64,
) -> Result<Option<IntersectionRecord>> {
    let n_r = disc.n_r as f64;
    let dth = TAU / disc.n_theta as f64;
    let mut z = [
        (cp.i as f64 + 0.5) / n_r,
        (cp.j as f64 + 0.5) * dth,
        (cq.i as f64 + 0.5) / n_r,
        (cq.j as f64 + 0.5) * dth,
    ];
    let eval = |z: &[f64; 4]| {
        let (f1, f1r, f1t) = disc.interp(z[0], z[1]);
        let (f2, f2r, f2t) = disc.interp(z[2], z[3]);
        (f1 - f2, f1, f2, f1r, f1t, f2r, f2t)
    };
    let (mut resid, mut f1, mut f2, mut f1r, mut f1t, mut f2r, mut f2t) = eval(&z);
    let mut best = resid.norm();
    for _ in 0..50 {
        if best < ACCEPT_RESIDUAL * 1e-2 {
            break;
        }
        let jac = Matrix4::from_columns(&[
            Vector4::from(f1r.to_array()),
            Vector4::from(f1t.to_array()),
            -Vector4::from(f2r.to_array()),
            -Vector4::from(f2t.to_array()),
        ]);
        let rhs = -Vector4::from(resid.to_array());
        let Some(step) = jac.lu().solve(&rhs) else {
            break;
        };
        // One grid cell per coordinate per step keeps the iteration inside
        // the region whose interpolant seeded it.
        let lim = [1.0 / n_r, dth, 1.0 / n_r, dth];
        let mut improved = false;
        let mut damp = 1.0;
        for _ in 0..7 {
            let mut zn = z;
            for k in 0..4 {
                zn[k] += (damp * step[k]).clamp(-lim[k], lim[k]);
            }
            zn[0] = zn[0].clamp(0.0, 1.0);
            zn[2] = zn[2].clamp(0.0, 1.0);
            let out = eval(&zn);
            if out.0.norm() < best {
                z = zn;
                (resid, f1, f2, f1r, f1t, f2r, f2t) = out;
                best = resid.norm();
                improved = true;
                break;
            }
            damp *= 0.5;
        }
        if !improved {
            break;
        }
    }
    // Reject artifacts before judging the residual: both sheets at the
    // shared disc center, a sheet pinned to the boundary circle, or the two
    // sheets converging to the same parameter point (where the Jacobian is
    // structurally singular and the iteration may stall at any residual).
    let two_cells_r = 2.0 / n_r;
    if z[0] < two_cells_r && z[2] < two_cells_r {
        return Ok(None);
    }
    if z[0] > 1.0 - 1e-6 || z[2] > 1.0 - 1e-6 {
        return Ok(None);
    }
    let dtau = (z[1] - z[3]).rem_euclid(TAU);
    let dtau = dtau.min(TAU - dtau);
    if (z[0] - z[2]).abs() < two_cells_r && dtau < 2.0 * dth {
        return Ok(None);
    }
    if best > ACCEPT_RESIDUAL * scale {
        if best > NEAR_MISS * scale {
            return Ok(None);
        }
        return Err(Error::IntersectionRefinement { residual: best });
    }
    let (fx1, fy1) = disc.interp_tangents(z[0], z[1]);
    let (fx2, fy2) = disc.interp_tangents(z[2], z[3]);
    let det = Matrix4::from_columns(&[
        Vector4::from(fx1.to_array()),
        Vector4::from(fy1.to_array()),
        Vector4::from(fx2.to_array()),
        Vector4::from(fy2.to_array()),
    ])
    .determinant();
    let denom = fx1.norm() * fy1.norm() * fx2.norm() * fy2.norm();
    let ndet = if denom > 0.0 { det / denom } else { 0.0 };
    if ndet.abs() <= tol {
        return Err(Error::NonTransverseIntersection {
            r1: z[0],
            t1: z[1].rem_euclid(TAU),
            r2: z[2],
            t2: z[3].rem_euclid(TAU),
            det: ndet,
        });
    }
    let mut sheets = [
        [z[0], z[1].rem_euclid(TAU)],
        [z[2], z[3].rem_euclid(TAU)],
    ];
    // The frame determinant is invariant under swapping the sheets (an even
    // column permutation), so the canonical parameter order is free.
    if sheets[1] < sheets[0] {
        sheets.swap(0, 1);
    }
    Ok(Some(IntersectionRecord {
        params: sheets,
        point: ((f1 + f2) * 0.5).to_array(),
        sign: if ndet > 0.0 { 1 } else { -1 },
        residual: best,
    }))
}

// ---------------------------------------------------------------------------
// The filling identity
// ---------------------------------------------------------------------------

/// Outcome of checking the identity sl(γ) = 2·Int(f) − 1 on one filling.
#[derive(Clone, Debug, Serialize)]
pub struct TheoremOneReport {
    pub self_linking: i64,
    pub tangential_index: i64,
    /// Minimum normalized symplectic area density over the grid.
    pub symplectic_min: f64,
    pub anti_holomorphic_points: usize,
    pub complex_points: Vec<ComplexPoint>,
    pub intersections: Vec<IntersectionRecord>,
    /// True when the disc is symplectic, free of anti-holomorphic points,
    /// and the identity holds.
    pub identity_holds: bool,
}

/// Check the self-linking identity on a filling: compute sl(γ) by the Gauss
/// integral, the tangential index of the disc, the symplectic area density,
/// and the complex-point classification, and test
/// sl(γ) = 2·Int(f) − 1 under the hypotheses (symplectic disc, no
/// anti-holomorphic points) that make the identity valid.
pub fn verify_theorem1(
    knot: &TransverseKnot,
    disc: &ImmersedDisc,
    epsilon: f64,
    n_quad: usize,
    tol: f64,
) -> Result<TheoremOneReport> {
    let sl = knot::self_linking(knot, epsilon, n_quad)?;
    let (index, intersections) = tangential_index(disc, tol)?;
    let symplectic_min = disc.symplectic_check();
    let complex_points = disc.complex_points();
    let anti = complex_points.iter().filter(|c| !c.holomorphic).count();
    let identity_holds = symplectic_min > 0.0 && anti == 0 && sl == 2 * index - 1;
    Ok(TheoremOneReport {
        self_linking: sl,
        tangential_index: index,
        symplectic_min,
        anti_holomorphic_points: anti,
        complex_points,
        intersections,
        identity_holds,
    })
}

/// Self-intersection number sl(γ) + 1 = 2·Int(f) of any symplectic filling
/// of the knot, derived from the boundary invariant alone. When a disc is
/// supplied, twice its tangential index is cross-checked against the
/// boundary value; a mismatch is reported as a verification failure.
pub fn self_intersection_number(
    knot: &TransverseKnot,
    disc: Option<&ImmersedDisc>,
) -> Result<i64> {
    let sl = knot::self_linking(knot, DEFAULT_PUSHOFF, DEFAULT_LINK_QUAD)?;
    if sl % 2 == 0 {
        return Err(Error::VerificationFailed {
            context: format!("self-linking {sl} is even; it must be odd for a filled knot"),
        });
    }
    let n = sl + 1;
    if let Some(d) = disc {
        let (index, _) = tangential_index(d, DEFAULT_TRANSVERSE_TOL)?;
        if 2 * index != n {
            return Err(Error::VerificationFailed {
                context: format!(
                    "twice the tangential index ({}) disagrees with sl + 1 = {n} from the boundary",
                    2 * index
                ),
            });
        }
    }
    Ok(n)
}

// ---------------------------------------------------------------------------
