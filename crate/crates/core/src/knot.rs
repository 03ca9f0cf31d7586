//! Transverse-knot invariants on star-shaped surfaces.
//!
//! A closed curve on the surface, everywhere positively transverse to the
//! contact plane field, carries three computable invariants here: the
//! self-linking number (via a pushoff along the global section πM of the
//! contact planes and a Gauss linking integral), the total curvature, and
//! the crookedness (the minimal number of local minima of a linear height
//! function). The linking computation transports the pair of curves to the
//! round unit sphere by radial projection — an ambient isotopy — and then
//! to ℝ³ by an orientation-preserving stereographic chart, so the Gauss
//! integral evaluates the linking number with its sign intact.

use crate::dynamics::{find_periodic_orbit, PeriodicOrbit};
use crate::error::{Error, Result};
use crate::numerics::{catmull_rom_periodic, central_diff_periodic_4th, s3_lattice};
use crate::par::map_range;
use crate::surface::StarShapedSurface;
use crate::vec4::{lambda0, stereographic, Vec4};

use serde::Serialize;
use std::f64::consts::{PI, TAU};

/// Default pushoff size for the self-linking computation.
pub const DEFAULT_PUSHOFF: f64 = 1e-2;
/// Default trapezoid nodes per factor of the Gauss double integral. The
/// near-diagonal band of the integrand has width comparable to the pushoff
/// size, so the node spacing must stay well below it; 1536 nodes resolve
/// the default pushoff on curves of modest speed with residuals below 1e−2.
pub const DEFAULT_LINK_QUAD: usize = 1536;
/// Number of candidate stereographic poles scanned.
const POLE_CANDIDATES: usize = 32;
/// Minimal chordal clearance a pole must keep from both curves.
const POLE_CLEARANCE: f64 = 0.3;
/// A height plateau of this many samples or more makes critical-point
/// counting unreliable.
const PLATEAU_LIMIT: usize = 5;

/// A closed curve γ: [0, 2π] → Σ stored as uniform samples (no duplicated
/// endpoint) together with derivative samples dγ/ds. Canonical orientation
/// means λ(γ′) > 0 along the curve; that is reported by [`check_transverse`]
/// as a verdict rather than enforced, so reversed curves can be built and
/// diagnosed. Embeddedness (no near-collision between parameter-separated
/// samples) is enforced at construction.
#[derive(Clone, Debug)]
pub struct TransverseKnot {
    pub surface: StarShapedSurface,
    pub points: Vec<Vec4>,
    pub derivatives: Vec<Vec4>,
}

impl TransverseKnot {
    /// Reparametrize a closed Reeb orbit to [0, 2π]: γ(s) = orbit point at
    /// t = T·s/2π, so derivatives pick up the factor T/2π.
    pub fn from_orbit(orbit: &PeriodicOrbit) -> Result<TransverseKnot> {
        let scale = orbit.period / TAU;
        let knot = TransverseKnot {
            surface: orbit.surface.clone(),
            points: orbit.points.clone(),
            derivatives: orbit.velocities.iter().map(|&v| v * scale).collect(),
        };
        knot.check_embedded()?;
        Ok(knot)
    }

    /// The closed characteristic of the round sphere through (1, 0, 0, 0):
    /// the unit circle in the first coordinate plane, traversed once.
    pub fn hopf() -> Result<TransverseKnot> {
        let sphere = StarShapedSurface::sphere();
        let orbit = find_periodic_orbit(&sphere, Vec4::new(1.0, 0.0, 0.0, 0.0), PI, 1e-10)?;
        TransverseKnot::from_orbit(&orbit)
    }

    /// The (p, q) torus orbit: on the ellipsoid with radii (r1, r1·√(p/q))
    /// the two coordinate angular speeds are in ratio p : q, and the orbit
    /// through a point with both components nonzero winds p and q times
    /// around the respective coordinate circles.
    pub fn torus_orbit(p: u64, q: u64, r1: f64) -> Result<TransverseKnot> {
        if p == 0 || q == 0 || gcd(p, q) != 1 {
            return Err(Error::InvalidParameter {
                reason: format!("torus orbit needs coprime positive (p, q), got ({p}, {q})"),
            });
        }
        let r2 = r1 * (p as f64 / q as f64).sqrt();
        let surface = StarShapedSurface::ellipsoid(r1, r2)?;
        let start = Vec4::new(r1 / 2f64.sqrt(), 0.0, r2 / 2f64.sqrt(), 0.0);
        let omega1 = 2.0 / (r1 * r1);
        let orbit = find_periodic_orbit(&surface, start, TAU * p as f64 / omega1, 1e-10)?;
        TransverseKnot::from_orbit(&orbit)
    }

    /// Build a knot from raw position samples at uniform parameters on
    /// [0, 2π]. Points are radially projected onto the surface; derivatives
    /// come from fourth-order periodic central differences.
    pub fn from_samples(surface: &StarShapedSurface, points: &[Vec4]) -> Result<TransverseKnot> {
        if points.len() < 16 {
            return Err(Error::InvalidParameter {
                reason: format!("knot needs at least 16 samples, got {}", points.len()),
            });
        }
        let projected: Vec<Vec4> =
            points.iter().map(|&p| surface.project_radial(p)).collect::<Result<_>>()?;
        let derivatives = central_diff_periodic_4th(&projected, TAU);
        let knot = TransverseKnot {
            surface: surface.clone(),
            points: projected,
            derivatives,
        };
        knot.check_embedded()?;
        Ok(knot)
    }

    pub fn n_samples(&self) -> usize {
        self.points.len()
    }

    /// Position at an arbitrary parameter by periodic cubic interpolation.
    pub fn eval(&self, s: f64) -> Vec4 {
        catmull_rom_periodic(&self.points, TAU, s)
    }

    /// Derivative dγ/ds at an arbitrary parameter.
    pub fn eval_derivative(&self, s: f64) -> Vec4 {
        catmull_rom_periodic(&self.derivatives, TAU, s)
    }

    /// The same curve with reversed orientation: γ̃(s) = γ(2π − s).
    pub fn reversed(&self) -> TransverseKnot {
        let n = self.points.len();
        let points = (0..n).map(|k| self.points[(n - k) % n]).collect();
        let derivatives = (0..n).map(|k| -self.derivatives[(n - k) % n]).collect();
        TransverseKnot {
            surface: self.surface.clone(),
            points,
            derivatives,
        }
    }

    /// Smallest distance between samples whose circular parameter
    /// separation exceeds 0.1 rad.
    pub fn embeddedness_margin(&self) -> f64 {
        let n = self.points.len();
        let sep = ((0.1 / TAU) * n as f64).ceil() as usize;
        let pts = &self.points;
        let mins = map_range(n, |i| {
            let mut best = f64::INFINITY;
            for j in 0..n {
                let d = i.abs_diff(j).min(n - i.abs_diff(j));
                if d > sep {
                    best = best.min((pts[i] - pts[j]).norm());
                }
            }
            best
        });
        mins.into_iter().fold(f64::INFINITY, f64::min)
    }

    fn check_embedded(&self) -> Result<()> {
        let margin = self.embeddedness_margin();
        if margin <= 1e-4 {
            return Err(Error::InjectivityScan { dist: margin });
        }
        Ok(())
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Minimum over samples of λ(γ′)/‖γ′‖. Positive iff the knot is positively
/// transverse to the contact planes everywhere (canonical orientation);
/// a negative value is a verdict, not an error.
pub fn check_transverse(knot: &TransverseKnot) -> f64 {
    knot.points
        .iter()
        .zip(knot.derivatives.iter())
        .map(|(&p, &d)| lambda0(p, d) / d.norm())
        .fold(f64::INFINITY, f64::min)
}

/// Record of one Gauss-integral linking evaluation.
#[derive(Clone, Debug, Serialize)]
pub struct LinkingComputation {
    /// Pushoff size of the primary run.
    pub epsilon: f64,
    /// Trapezoid nodes per curve in the primary run.
    pub n_quad: usize,
    /// Stereographic pole used by the primary run.
    pub pole: Vec4,
    /// Raw value of the Gauss double integral.
    pub raw: f64,
    /// Nearest integer.
    pub rounded: i64,
    /// |raw − rounded|.
    pub residual: f64,
    /// (raw, rounded) of the stability run at ε/2 with doubled quadrature,
    /// when one was performed.
    pub halved: Option<(f64, i64)>,
}

/// Self-linking number of a transverse knot: linking of the knot with its
/// pushoff along the global section πM of the contact planes, evaluated by
/// the Gauss integral after radial transport to the unit sphere and an
/// orientation-preserving stereographic chart. Includes the ε → ε/2
/// stability check (with doubled quadrature, keeping the near-diagonal
/// resolution ratio fixed).
pub fn self_linking(knot: &TransverseKnot, epsilon: f64, n_quad: usize) -> Result<i64> {
    Ok(self_linking_detailed(knot, epsilon, n_quad)?.rounded)
}

/// As [`self_linking`], returning the full computation record.
pub fn self_linking_detailed(
    knot: &TransverseKnot,
    epsilon: f64,
    n_quad: usize,
) -> Result<LinkingComputation> {
    let mut primary = self_linking_opts(knot, epsilon, n_quad, 0)?;
    let halved = self_linking_opts(knot, 0.5 * epsilon, 2 * n_quad, 0)?;
    if halved.rounded != primary.rounded {
        return Err(Error::LinkingUnstable {
            coarse: primary.rounded,
            fine: halved.rounded,
        });
    }
    primary.halved = Some((halved.raw, halved.rounded));
    Ok(primary)
}

/// Single linking evaluation with an explicit pole rank: rank 0 picks the
/// candidate pole with the largest clearance from both curves, rank 1 the
/// second largest, and so on. No stability run is performed. Exposed so the
/// pole-change invariance of the result can be exercised directly.
pub fn self_linking_opts(
    knot: &TransverseKnot,
    epsilon: f64,
    n_quad: usize,
    pole_rank: usize,
) -> Result<LinkingComputation> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter {
            reason: format!("pushoff size must be positive, got {epsilon}"),
        });
    }
    if n_quad < 16 {
        return Err(Error::InvalidParameter {
            reason: format!("n_quad = {n_quad} too small; need at least 16"),
        });
    }
    let push = pushoff(knot, epsilon)?;

    // Collision guard: the pushoff must stay clear of every strand of the
    // knot, not only of its own base point.
    let n = knot.points.len();
    let pts = &knot.points;
    let mins = map_range(n, |i| {
        let mut best = f64::INFINITY;
        for p in pts.iter() {
            best = best.min((push[i] - *p).norm());
        }
        best
    });
    let min_dist = mins.into_iter().fold(f64::INFINITY, f64::min);
    if min_dist < epsilon / 10.0 {
        return Err(Error::PushoffCollision {
            min_dist,
            offset: epsilon,
        });
    }

    let u1 = s3_resample(&knot.points, n_quad);
    let u2 = s3_resample(&push, n_quad);
    let pole = select_pole(&u1, &u2, pole_rank)?;
    let raw = gauss_on_s3(&u1, &u2, pole)?;
    let rounded = raw.round() as i64;
    let residual = (raw - rounded as f64).abs();
    if residual >= 0.1 {
        return Err(Error::LinkingResidual {
            residual,
            limit: 0.1,
        });
    }
    Ok(LinkingComputation {
        epsilon,
        n_quad,
        pole,
        raw,
        rounded,
        residual,
        halved: None,
    })
}

/// Pushoff of the knot along πM, radially re-projected onto the surface.
fn pushoff(knot: &TransverseKnot, epsilon: f64) -> Result<Vec<Vec4>> {
    let pts = &knot.points;
    let surface = &knot.surface;
    map_range(pts.len(), |k| -> Result<Vec4> {
        let frame = surface.contact_frame(pts[k])?;
        surface.project_radial(pts[k] + frame.pi_m * epsilon)
    })
    .into_iter()
    .collect()
}

/// Radially normalize surface samples to the unit sphere and resample to
/// `n_quad` uniform parameters.
fn s3_resample(points: &[Vec4], n_quad: usize) -> Vec<Vec4> {
    let unit: Vec<Vec4> = points.iter().map(|p| p.normalized()).collect();
    if n_quad == unit.len() {
        return unit;
    }
    (0..n_quad)
        .map(|j| catmull_rom_periodic(&unit, TAU, TAU * j as f64 / n_quad as f64).normalized())
        .collect()
}

/// Deterministic pole selection: scan a fixed low-discrepancy set of
/// candidates and rank them by chordal clearance from both curves.
pub(crate) fn select_pole(u1: &[Vec4], u2: &[Vec4], rank: usize) -> Result<Vec4> {
    let candidates = s3_lattice(POLE_CANDIDATES);
    let mut scored: Vec<(f64, usize)> = candidates
        .iter()
        .enumerate()
        .map(|(i, &pole)| {
            let mut d = f64::INFINITY;
            for p in u1.iter().chain(u2.iter()) {
                d = d.min((pole - *p).norm());
            }
            (d, i)
        })
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let (clearance, idx) = scored[rank.min(scored.len() - 1)];
    if clearance <= POLE_CLEARANCE {
        return Err(Error::NoPole {
            best: clearance,
            need: POLE_CLEARANCE,
        });
    }
    Ok(candidates[idx])
}

/// Gauss linking double integral of two disjoint closed curves on the unit
/// sphere, through the oriented stereographic chart at `pole`. Inputs are
/// uniform samples on [0, 2π]; tangents come from fourth-order periodic
/// central differences of the chart images, and the periodic trapezoid rule
/// is exact to spectral accuracy for the smooth integrand.
pub(crate) fn gauss_on_s3(u1: &[Vec4], u2: &[Vec4], pole: Vec4) -> Result<f64> {
    let chart = |pts: &[Vec4]| -> Result<Vec<Vec4>> {
        pts.iter()
            .map(|&p| stereographic(p, pole).map(|x| Vec4::new(x[0], x[1], x[2], 0.0)))
            .collect()
    };
    let r1 = chart(u1)?;
    let r2 = chart(u2)?;
    let d1 = central_diff_periodic_4th(&r1, TAU);
    let d2 = central_diff_periodic_4th(&r2, TAU);
    let (n1, n2) = (r1.len(), r2.len());
    let rows = map_range(n1, |i| {
        let (a, da) = (r1[i], d1[i]);
        let mut acc = 0.0;
        for j in 0..n2 {
            let sep = a - r2[j];
            let dist2 = sep.x1 * sep.x1 + sep.y1 * sep.y1 + sep.x2 * sep.x2;
            let db = d2[j];
            let cx = da.y1 * db.x2 - da.x2 * db.y1;
            let cy = da.x2 * db.x1 - da.x1 * db.x2;
            let cz = da.x1 * db.y1 - da.y1 * db.x1;
            acc += (cx * sep.x1 + cy * sep.y1 + cz * sep.x2) / (dist2 * dist2.sqrt());
        }
        acc
    });
    let h1 = TAU / n1 as f64;
    let h2 = TAU / n2 as f64;
    Ok(rows.into_iter().sum::<f64>() * h1 * h2 / (4.0 * PI))
}

/// Total curvature ∫‖T′(s)‖ ds of the knot, T = γ′/‖γ′‖, by the periodic
/// trapezoid rule, with a half-resolution refinement check.
pub fn total_curvature(knot: &TransverseKnot) -> Result<f64> {
    let n = knot.points.len();
    let second = central_diff_periodic_4th(&knot.derivatives, TAU);
    let integrand: Vec<f64> = (0..n)
        .map(|k| {
            let d = knot.derivatives[k];
            let speed = d.norm();
            let t = d / speed;
            let tp = (second[k] - t * t.dot(second[k])) / speed;
            tp.norm()
        })
        .collect();
    let fine = TAU * integrand.iter().sum::<f64>() / n as f64;
    if n % 2 == 0 {
        let coarse = TAU * integrand.iter().step_by(2).sum::<f64>() / (n / 2) as f64;
        if (fine - coarse).abs() > 1e-6 * fine.abs().max(1.0) {
            return Err(Error::QuadratureUnstable { coarse, fine });
        }
    }
    Ok(fine)
}

/// Crookedness: the number of strict local minima of the height function
/// s ↦ ⟨γ(s), v⟩ over the stored samples. Runs of equal heights shorter
/// than [`PLATEAU_LIMIT`] samples collapse to one critical point; a longer
/// plateau makes the count unreliable and is reported as an error.
pub fn crookedness(knot: &TransverseKnot, v: Vec4) -> Result<usize> {
    let len = v.norm();
    if len < 1e-12 {
        return Err(Error::InvalidParameter {
            reason: "height direction must be a nonzero vector".into(),
        });
    }
    let v = v / len;
    let heights: Vec<f64> = knot.points.iter().map(|p| p.dot(v)).collect();
    let runs = collapse_runs(&heights)?;
    Ok(count_minima(&runs))
}

/// A maximal circular run of (near-)equal consecutive heights.
struct Run {
    value: f64,
    width: usize,
}

fn collapse_runs(heights: &[f64]) -> Result<Vec<Run>> {
    let n = heights.len();
    let scale = heights.iter().fold(0.0_f64, |m, h| m.max(h.abs()));
    let tol = 1e-12 * scale.max(1.0);
    let mut runs: Vec<Run> = Vec::new();
    for &h in heights {
        match runs.last_mut() {
            Some(run) if (h - run.value).abs() <= tol => run.width += 1,
            _ => runs.push(Run { value: h, width: 1 }),
        }
    }
    // Circular closure: the first and last runs may be one run.
    if runs.len() > 1 {
        let first = runs.first().unwrap().value;
        let last = runs.last().unwrap().value;
        if (first - last).abs() <= tol {
            let tail = runs.pop().unwrap();
            runs.first_mut().unwrap().width += tail.width;
        }
    }
    if runs.len() < 2 {
        return Err(Error::DegeneratePlateau {
            width: n,
            limit: PLATEAU_LIMIT,
        });
    }
    for run in &runs {
        if run.width >= PLATEAU_LIMIT {
            return Err(Error::DegeneratePlateau {
                width: run.width,
                limit: PLATEAU_LIMIT,
            });
        }
    }
    Ok(runs)
}

fn count_minima(runs: &[Run]) -> usize {
    let m = runs.len();
    (0..m)
        .filter(|&i| {
            let prev = runs[(i + m - 1) % m].value;
            let next = runs[(i + 1) % m].value;
            runs[i].value < prev && runs[i].value < next
        })
        .count()
}

/// Scan low-discrepancy directions for one whose height function on the
/// knot has exactly one nondegenerate minimum and one nondegenerate maximum
/// (second difference above 1e−6 in magnitude at the critical samples).
/// Returns the first such direction in scan order; if none qualifies, the
/// error reports the best candidate's defect score.
pub fn find_filling_direction(knot: &TransverseKnot, n_dirs: usize) -> Result<Vec4> {
    if n_dirs == 0 {
        return Err(Error::InvalidParameter {
            reason: "need at least one direction to scan".into(),
        });
    }
    let dirs = s3_lattice(n_dirs);
    let verdicts = map_range(n_dirs, |i| direction_defect(knot, dirs[i]));
    for (i, defect) in verdicts.iter().enumerate() {
        if *defect == 0.0 {
            return Ok(dirs[i]);
        }
    }
    let best = verdicts.into_iter().fold(f64::INFINITY, f64::min);
    Err(Error::NoFillingDirection { best })
}

/// Defect of a candidate height direction: 0 when the height has exactly
/// one nondegenerate minimum and maximum; otherwise a positive score that
/// grows with the deviation (extra critical points count 1 each, degenerate
/// critical points 1/2 each, unusable plateaus worst).
fn direction_defect(knot: &TransverseKnot, v: Vec4) -> f64 {
    let heights: Vec<f64> = knot.points.iter().map(|p| p.dot(v)).collect();
    let runs = match collapse_runs(&heights) {
        Ok(runs) => runs,
        Err(_) => return f64::INFINITY,
    };
    let m = runs.len();
    let mut n_min = 0usize;
    let mut n_max = 0usize;
    let mut degenerate = 0usize;
    for i in 0..m {
        let prev = runs[(i + m - 1) % m].value;
        let next = runs[(i + 1) % m].value;
        let here = runs[i].value;
        let is_min = here < prev && here < next;
        let is_max = here > prev && here > next;
        if is_min || is_max {
            if is_min {
                n_min += 1;
            } else {
                n_max += 1;
            }
            let d2 = prev + next - 2.0 * here;
            if d2.abs() <= 1e-6 {
                degenerate += 1;
            }
        }
    }
    (n_min.abs_diff(1) + n_max.abs_diff(1)) as f64 + 0.5 * degenerate as f64
}
