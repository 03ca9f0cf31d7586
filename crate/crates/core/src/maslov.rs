//! Rotation numbers and the Maslov-type index of paths in SL(2, ℝ),
//! including the degenerate extension (even branch) and the curvature-
//! integral rotation oracle.
//!
//! For a path Φ with Φ(0) = Id and a nonzero direction X, rot(Φ, X) is the
//! total winding of t ↦ Φ(t)X/‖Φ(t)X‖. Over all directions the rotations
//! fill an interval of length < π. When that interval touches 2πℤ — some
//! direction winds by an even multiple of π — the index is that even
//! integer 2p; otherwise the whole interval sits inside (2pπ, 2(p+1)π) and
//! the index is the odd integer 2p + 1.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Vector2};
use serde::Serialize;

use crate::dynamics::{LinearizedFlow, PeriodicOrbit, SL2Path};
use crate::error::{Error, Result};
use crate::numerics::lift_angles;
use crate::surface::StarShapedSurface;

/// Rotations of one path over a set of sampled directions. Directions are
/// recorded by their angle in [0, π) — X and −X wind identically, so the
/// direction space is a half-turn of the circle.
#[derive(Clone, Debug, Serialize)]
pub struct RotationReport {
    pub rot_min: f64,
    pub rot_max: f64,
    /// (direction angle, rotation) per sampled direction.
    pub directions: Vec<(f64, f64)>,
    pub spread: f64,
}

/// How the index branch was decided.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum MaslovWitness {
    /// Every rotation lies strictly inside (2pπ, 2(p+1)π).
    Interval { p: i64 },
    /// A sampled direction winds by (nearly) 2pπ, or the rotation interval
    /// straddles 2pπ. `odd_candidate` records what the odd branch would
    /// have produced, for near-threshold diagnostics.
    EvenContact { angle: f64, rotation: f64, p: i64, odd_candidate: i64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct MaslovResult {
    pub index: i64,
    /// Set exactly when the even branch fires; even index ⇔ degenerate.
    pub degenerate: bool,
    pub rot_min: f64,
    pub rot_max: f64,
    pub witness: MaslovWitness,
}

/// Total winding angle of t ↦ Φ(t)X/‖Φ(t)X‖ along the sampled path.
/// Errors if consecutive samples jump by π/2 or more (path too coarse).
pub fn rotation(path: &SL2Path, x: Vector2<f64>) -> Result<f64> {
    let samples: Vec<(f64, f64)> = path
        .matrices
        .iter()
        .map(|m| {
            let y = m * x;
            (y[0], y[1])
        })
        .collect();
    let lifted = lift_angles(&samples, PI / 2.0)?;
    Ok(lifted[lifted.len() - 1] - lifted[0])
}

/// Rotations over `n_dirs` equispaced directions (angles πj/n_dirs), with
/// the spread invariant checked: rotations of one path over all directions
/// differ by less than π.
pub fn rotation_report(path: &SL2Path, n_dirs: usize) -> Result<RotationReport> {
    if n_dirs == 0 {
        return Err(Error::InvalidParameter { reason: "n_dirs must be positive".into() });
    }
    let rows = crate::par::map_range(n_dirs, |j| {
        let angle = PI * j as f64 / n_dirs as f64;
        rotation(path, Vector2::new(angle.cos(), angle.sin())).map(|r| (angle, r))
    });
    let mut directions = Vec::with_capacity(n_dirs);
    for row in rows {
        directions.push(row?);
    }
    let rot_min = directions.iter().map(|d| d.1).fold(f64::INFINITY, f64::min);
    let rot_max = directions.iter().map(|d| d.1).fold(f64::NEG_INFINITY, f64::max);
    let spread = rot_max - rot_min;
    if spread >= PI + 1e-6 {
        return Err(Error::SpreadBound { spread });
    }
    Ok(RotationReport { rot_min, rot_max, directions, spread })
}

/// The path's Maslov-type index, decided from the rotation interval.
///
/// Directions are refined (n_dirs doubling) until rot_min and rot_max
/// stabilize within 1e−6. The even branch fires when some sampled rotation
/// is within `tol` of an even multiple of π or the interval [rot_min,
/// rot_max] contains one; otherwise the interval sits inside (2pπ, 2(p+1)π)
/// and the odd branch returns 2p + 1.
pub fn maslov_index(path: &SL2Path, n_dirs: usize, tol: f64) -> Result<MaslovResult> {
    let n0 = n_dirs.max(4);
    let mut n = n0;
    let mut report = rotation_report(path, n)?;
    loop {
        let finer = rotation_report(path, 2 * n)?;
        let stable = (finer.rot_min - report.rot_min).abs() < 1e-6
            && (finer.rot_max - report.rot_max).abs() < 1e-6;
        report = finer;
        n *= 2;
        if stable {
            break;
        }
        if n > 16384 {
            return Err(Error::QuadratureUnstable {
                coarse: report.rot_min,
                fine: report.rot_max,
            });
        }
    }
    Ok(classify(&report, tol))
}

fn classify(report: &RotationReport, tol: f64) -> MaslovResult {
    let odd_candidate = 2 * (report.rot_min / (2.0 * PI)).floor() as i64 + 1;

    // A sampled direction winding by (nearly) an even multiple of π is the
    // sharpest witness; prefer it over plain interval membership.
    for &(angle, rot) in &report.directions {
        let p = (rot / (2.0 * PI)).round() as i64;
        if (rot - 2.0 * PI * p as f64).abs() <= tol {
            return MaslovResult {
                index: 2 * p,
                degenerate: true,
                rot_min: report.rot_min,
                rot_max: report.rot_max,
                witness: MaslovWitness::EvenContact { angle, rotation: rot, p, odd_candidate },
            };
        }
    }
    // Interval membership: spread < π, so at most one even multiple fits.
    let p_lo = (report.rot_min / (2.0 * PI)).ceil() as i64;
    if 2.0 * PI * p_lo as f64 >= report.rot_min && 2.0 * PI * p_lo as f64 <= report.rot_max {
        return MaslovResult {
            index: 2 * p_lo,
            degenerate: true,
            rot_min: report.rot_min,
            rot_max: report.rot_max,
            witness: MaslovWitness::EvenContact {
                angle: f64::NAN,
                rotation: 2.0 * PI * p_lo as f64,
                p: p_lo,
                odd_candidate,
            },
        };
    }
    let p = (report.rot_min / (2.0 * PI)).floor() as i64;
    MaslovResult {
        index: 2 * p + 1,
        degenerate: false,
        rot_min: report.rot_min,
        rot_max: report.rot_max,
        witness: MaslovWitness::Interval { p },
    }
}

/// Sampled path t ↦ exp(t·J·S) on [0, 1] for a symmetric S with operator
/// norm below 2π. J·S is traceless, so (JS)² = −det(S)·Id and the
/// exponential has a closed form in the three det(S) sign cases.
pub fn exp_js_path(s: Matrix2<f64>, n_steps: usize) -> Result<SL2Path> {
    if (s[(0, 1)] - s[(1, 0)]).abs() > 1e-12 {
        return Err(Error::InvalidParameter {
            reason: format!("matrix must be symmetric, got off-diagonal gap {}", s[(0, 1)] - s[(1, 0)]),
        });
    }
    let mean = (s[(0, 0)] + s[(1, 1)]) / 2.0;
    let radius = (((s[(0, 0)] - s[(1, 1)]) / 2.0).powi(2) + s[(0, 1)].powi(2)).sqrt();
    let op_norm = (mean.abs() + radius).max((mean - radius).abs());
    if op_norm >= 2.0 * PI {
        return Err(Error::InvalidParameter {
            reason: format!("operator norm {op_norm} must be below 2π"),
        });
    }
    if n_steps < 2 {
        return Err(Error::InvalidParameter { reason: "need at least 2 steps".into() });
    }
    let j = Matrix2::new(0.0, -1.0, 1.0, 0.0);
    let a = j * s;
    let d = s.determinant();
    let id = Matrix2::identity();
    let exp_at = |t: f64| -> Matrix2<f64> {
        if d > 1e-14 {
            let w = d.sqrt();
            id * (w * t).cos() + a * ((w * t).sin() / w)
        } else if d < -1e-14 {
            let w = (-d).sqrt();
            id * (w * t).cosh() + a * ((w * t).sinh() / w)
        } else {
            id + a * t
        }
    };
    let times: Vec<f64> = (0..=n_steps).map(|k| k as f64 / n_steps as f64).collect();
    let matrices: Vec<Matrix2<f64>> = times.iter().map(|&t| exp_at(t)).collect();
    Ok(SL2Path { times, matrices })
}

/// The path multiplied pointwise by the degree-k loop t ↦ R(2πk·t/T).
/// The product is homotopic with fixed endpoints to the concatenation of
/// the loop and the path, so it realizes "prepending k full turns": every
/// direction's rotation shifts by exactly 2πk.
pub fn prepend_loops(path: &SL2Path, k: i64) -> SL2Path {
    let t_end = *path.times.last().expect("nonempty path");
    let matrices = path
        .times
        .iter()
        .zip(&path.matrices)
        .map(|(&t, m)| {
            let ang = 2.0 * PI * k as f64 * t / t_end;
            Matrix2::new(ang.cos(), -ang.sin(), ang.sin(), ang.cos()) * m
        })
        .collect();
    SL2Path { times: path.times.clone(), matrices }
}

/// The reversed-and-inverted path t ↦ Φ(T − t)·Φ(T)⁻¹ on the same time
/// grid. Starts at Id; its index is the exact negation of the original's.
pub fn reversed_inverted(path: &SL2Path) -> SL2Path {
    let n = path.matrices.len();
    let end = path.endpoint();
    // SL(2) inverse: adjugate.
    let inv = Matrix2::new(end[(1, 1)], -end[(0, 1)], -end[(1, 0)], end[(0, 0)]);
    let matrices = (0..n).map(|j| path.matrices[n - 1 - j] * inv).collect();
    SL2Path { times: path.times.clone(), matrices }
}

/// Independent rotation oracle along a closed orbit: the quadrature of
/// ‖γ′‖·(Π(JN, JN) + Π(M̃, M̃)) over one period, where Π is the second
/// fundamental form and M̃(t) the normalized transported πM from the
/// linearized flow. Equals rot(Φ, first basis direction) of the
/// trivialized path up to discretization error, but shares none of the
/// angle-lifting machinery.
pub fn rotation_via_curvature(
    surface: &StarShapedSurface,
    orbit: &PeriodicOrbit,
    lin: &LinearizedFlow,
) -> Result<f64> {
    let n = orbit.points.len();
    if lin.v1.len() != n + 1 {
        return Err(Error::InvalidParameter {
            reason: format!(
                "linearized flow has {} samples, orbit needs {}",
                lin.v1.len(),
                n + 1
            ),
        });
    }
    let mut integrand = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let p = orbit.points[k % n];
        let speed = orbit.velocities[k % n].norm();
        let nvec = surface.normal(p)?;
        let jn = nvec.jmul();
        let m_tilde = lin.v1[k].normalized();
        let val = speed
            * (surface.second_fundamental_form(p, jn, jn)?
                + surface.second_fundamental_form(p, m_tilde, m_tilde)?);
        integrand.push(val);
    }
    let h = orbit.period / n as f64;
    let fine = simpson_tabulated(&integrand, h);
    let coarse_samples: Vec<f64> = integrand.iter().step_by(2).copied().collect();
    let coarse = simpson_tabulated(&coarse_samples, 2.0 * h);
    if (fine - coarse).abs() > 1e-4 {
        return Err(Error::QuadratureUnstable { coarse, fine });
    }
    Ok(fine)
}

/// Composite Simpson over uniformly tabulated values (even interval count
/// required; n = len − 1).
fn simpson_tabulated(values: &[f64], h: f64) -> f64 {
    let n = values.len() - 1;
    assert!(n >= 2 && n % 2 == 0, "need an even, positive interval count");
    let mut acc = values[0] + values[n];
    for (k, v) in values.iter().enumerate().take(n).skip(1) {
        acc += if k % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    acc * h / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{find_periodic_orbit, linearized_path};
    use crate::vec4::Vec4;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rigid_rotation_path(omega: f64, n: usize) -> SL2Path {
        let times: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
        let matrices = times
            .iter()
            .map(|&t| {
                let a = omega * t;
                Matrix2::new(a.cos(), -a.sin(), a.sin(), a.cos())
            })
            .collect();
        SL2Path { times, matrices }
    }

    fn hyperbolic_path(s: f64, n: usize) -> SL2Path {
        let times: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
        let matrices =
            times.iter().map(|&t| Matrix2::new((s * t).exp(), 0.0, 0.0, (-s * t).exp())).collect();
        SL2Path { times, matrices }
    }

    fn random_symmetric(rng: &mut ChaCha8Rng) -> Matrix2<f64> {
        // Eigenvalues bounded away from 0 and 2π by 0.1, random frame.
        let l1 = rng.random_range(0.1..(2.0 * PI - 0.1)) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let l2 = rng.random_range(0.1..(2.0 * PI - 0.1)) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let a = rng.random_range(0.0..PI);
        let q = Matrix2::new(a.cos(), -a.sin(), a.sin(), a.cos());
        q * Matrix2::new(l1, 0.0, 0.0, l2) * q.transpose()
    }

    fn signature(s: &Matrix2<f64>) -> i64 {
        let tr = s[(0, 0)] + s[(1, 1)];
        let det = s.determinant();
        if det > 0.0 {
            if tr > 0.0 {
                2
            } else {
                -2
            }
        } else if det < 0.0 {
            0
        } else {
            panic!("degenerate test matrix");
        }
    }

    #[test]
    fn rotation_of_rigid_rotation_is_omega() {
        for &omega in &[0.3, 2.0, 4.0 * PI - 0.2, -1.7] {
            let path = rigid_rotation_path(omega, 2048);
            for &alpha in &[0.0_f64, 0.4, 1.2, 2.8] {
                let x = Vector2::new(alpha.cos(), alpha.sin());
                let rot = rotation(&path, x).unwrap();
                assert!((rot - omega).abs() < 1e-9, "omega {omega}, got {rot}");
            }
        }
    }

    #[test]
    fn rotation_fixes_hyperbolic_eigendirections() {
        let path = hyperbolic_path(1.3, 512);
        assert!(rotation(&path, Vector2::new(1.0, 0.0)).unwrap().abs() < 1e-12);
        assert!(rotation(&path, Vector2::new(0.0, 1.0)).unwrap().abs() < 1e-12);
    }

    #[test]
    fn rotation_rejects_coarse_sampling() {
        let path = rigid_rotation_path(3.3, 2);
        let err = rotation(&path, Vector2::new(1.0, 0.0)).unwrap_err();
        assert!(matches!(err, Error::RotationSampling { .. }), "got {err:?}");
    }

    #[test]
    fn maslov_small_positive_rotation_is_one() {
        // S = diag(2, 1/2): elliptic with direction-dependent speed; all
        // rotations stay inside (0, 2π) ⇒ odd branch, index 1 = ½·sig(S).
        let path = exp_js_path(Matrix2::new(2.0, 0.0, 0.0, 0.5), 1024).unwrap();
        let res = maslov_index(&path, 64, 1e-5).unwrap();
        assert_eq!(res.index, 1);
        assert!(!res.degenerate);
        assert!(res.spread_ok());
        assert!(matches!(res.witness, MaslovWitness::Interval { p: 0 }));
    }

    #[test]
    fn maslov_hyperbolic_signature_zero() {
        let path = exp_js_path(Matrix2::new(1.0, 0.0, 0.0, -1.0), 1024).unwrap();
        let res = maslov_index(&path, 64, 1e-5).unwrap();
        assert_eq!(res.index, 0);
        assert!(res.degenerate);
        assert!(matches!(res.witness, MaslovWitness::EvenContact { p: 0, .. }));
    }

    #[test]
    fn maslov_identity_path_is_zero() {
        let path = exp_js_path(Matrix2::zeros(), 64).unwrap();
        let res = maslov_index(&path, 64, 1e-5).unwrap();
        assert_eq!(res.index, 0);
        assert!(res.degenerate);
    }

    #[test]
    fn maslov_negative_definite_is_minus_one() {
        let path = exp_js_path(Matrix2::new(-1.0, 0.0, 0.0, -1.0), 1024).unwrap();
        let res = maslov_index(&path, 64, 1e-5).unwrap();
        assert_eq!(res.index, -1);
        assert!(!res.degenerate);
    }

    #[test]
    fn exp_js_rejects_large_norm_and_asymmetry() {
        assert!(exp_js_path(Matrix2::new(7.0, 0.0, 0.0, 0.1), 64).is_err());
        assert!(exp_js_path(Matrix2::new(1.0, 0.3, -0.3, 1.0), 64).is_err());
    }

    #[test]
    fn signature_axiom_on_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..50 {
            let s = random_symmetric(&mut rng);
            if s.determinant().abs() < 1e-3 {
                continue;
            }
            let path = exp_js_path(s, 1024).unwrap();
            let res = maslov_index(&path, 64, 1e-5).unwrap();
            assert_eq!(res.index, signature(&s) / 2, "S = {s:?}");
        }
    }

    #[test]
    fn loop_axiom_shifts_by_two_per_turn() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut paths = vec![
            rigid_rotation_path(1.1, 1024),
            exp_js_path(Matrix2::new(1.0, 0.0, 0.0, -1.0), 1024).unwrap(),
        ];
        for _ in 0..4 {
            paths.push(exp_js_path(random_symmetric(&mut rng), 1024).unwrap());
        }
        for path in &paths {
            let base = maslov_index(path, 64, 1e-5).unwrap();
            for k in -2..=2 {
                let shifted = prepend_loops(path, k);
                let res = maslov_index(&shifted, 64, 1e-5).unwrap();
                assert_eq!(res.index, base.index + 2 * k, "k = {k}");
                assert_eq!(res.degenerate, base.degenerate);
            }
        }
    }

    #[test]
    fn reversal_axiom_negates_index() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let mut checked = 0;
        while checked < 20 {
            let s = random_symmetric(&mut rng);
            if s.determinant().abs() < 1e-3 {
                continue;
            }
            let path = exp_js_path(s, 1024).unwrap();
            let res = maslov_index(&path, 64, 1e-5).unwrap();
            let rev = reversed_inverted(&path);
            let res_rev = maslov_index(&rev, 64, 1e-5).unwrap();
            assert_eq!(res_rev.index, -res.index, "S = {s:?}");
            checked += 1;
        }
    }

    #[test]
    fn upper_bound_rot_below_index_plus_one_pi() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        for _ in 0..10 {
            let s = random_symmetric(&mut rng);
            if s.determinant().abs() < 1e-3 {
                continue;
            }
            let path = exp_js_path(s, 1024).unwrap();
            let res = maslov_index(&path, 64, 1e-5).unwrap();
            let report = rotation_report(&path, 64).unwrap();
            for &(_, rot) in &report.directions {
                assert!(
                    rot < (res.index + 1) as f64 * PI + 1e-9,
                    "rot {rot} vs bound {}",
                    (res.index + 1) as f64 * PI
                );
            }
            assert!(report.spread < PI);
        }
    }

    #[test]
    fn index_stable_under_resampling_and_perturbation() {
        let mut rng = ChaCha8Rng::seed_from_u64(45);
        let path = exp_js_path(random_symmetric(&mut rng), 4096).unwrap();
        let base = maslov_index(&path, 64, 1e-5).unwrap();

        for stride in [2usize, 4] {
            let times: Vec<f64> = path.times.iter().copied().step_by(stride).collect();
            let matrices: Vec<Matrix2<f64>> =
                path.matrices.iter().copied().step_by(stride).collect();
            assert_eq!((path.matrices.len() - 1) % stride, 0);
            let coarse = SL2Path { times, matrices };
            assert_eq!(maslov_index(&coarse, 64, 1e-5).unwrap().index, base.index);
        }

        let mut perturbed = path.clone();
        let n = perturbed.matrices.len();
        for m in &mut perturbed.matrices[1..n - 1] {
            for i in 0..2 {
                for j in 0..2 {
                    m[(i, j)] += rng.random_range(-1e-6..1e-6);
                }
            }
        }
        assert_eq!(maslov_index(&perturbed, 64, 1e-5).unwrap().index, base.index);
    }

    #[test]
    fn sphere_path_rotations_and_index() {
        let sphere = StarShapedSurface::sphere();
        let orbit =
            find_periodic_orbit(&sphere, Vec4::new(1.0, 0.0, 0.0, 0.0), 3.0, 1e-10).unwrap();
        let lin = linearized_path(&sphere, &orbit).unwrap();
        let report = rotation_report(&lin.path, 64).unwrap();
        for &(_, rot) in &report.directions {
            assert!((rot - 4.0 * PI).abs() < 1e-6, "rot {rot}");
        }
        let res = maslov_index(&lin.path, 64, 1e-5).unwrap();
        assert_eq!(res.index, 4);
        assert!(res.degenerate);

        let oracle = rotation_via_curvature(&sphere, &orbit, &lin).unwrap();
        assert!((oracle - 4.0 * PI).abs() < 1e-8, "oracle {oracle}");
    }

    #[test]
    fn ellipsoid_short_orbit_index_three_by_both_methods() {
        let e = StarShapedSurface::ellipsoid(1.0, 2.0_f64.sqrt()).unwrap();
        let orbit = find_periodic_orbit(&e, Vec4::new(1.0, 0.0, 0.0, 0.0), 3.0, 1e-10).unwrap();
        let lin = linearized_path(&e, &orbit).unwrap();

        let rot = rotation(&lin.path, Vector2::new(1.0, 0.0)).unwrap();
        assert!((rot - 3.0 * PI).abs() < 1e-6, "rot {rot}");

        let res = maslov_index(&lin.path, 64, 1e-5).unwrap();
        assert_eq!(res.index, 3);
        assert!(!res.degenerate);

        let oracle = rotation_via_curvature(&e, &orbit, &lin).unwrap();
        assert!((oracle - 3.0 * PI).abs() < 1e-5, "oracle {oracle}");
        assert!((oracle - rot).abs() < 1e-5);
    }

    #[test]
    fn ratio_07_ellipsoid_rotations_and_index() {
        // r1²/r2² = 0.7 ⇒ every direction rotates by 2π(1 + 0.7) = 3.4π.
        let r2 = (1.0f64 / 0.7).sqrt();
        let e = StarShapedSurface::ellipsoid(1.0, r2).unwrap();
        let orbit = find_periodic_orbit(&e, Vec4::new(1.0, 0.0, 0.0, 0.0), 3.0, 1e-10).unwrap();
        let lin = linearized_path(&e, &orbit).unwrap();
        let report = rotation_report(&lin.path, 64).unwrap();
        for &(_, rot) in &report.directions {
            assert!((rot - 3.4 * PI).abs() < 1e-5, "rot {rot}");
        }
        let res = maslov_index(&lin.path, 64, 1e-5).unwrap();
        assert_eq!(res.index, 3);
        assert!(!res.degenerate);
    }

    #[test]
    fn curvature_oracle_matches_rotation_on_perturbed_ellipsoid() {
        let surf = StarShapedSurface::perturbed_ellipsoid(1.0, 2.0_f64.sqrt(), 0.15).unwrap();
        let guess = surf.project_radial(Vec4::new(1.0, 0.0, 0.05, -0.03)).unwrap();
        let orbit = find_periodic_orbit(&surf, guess, 3.2, 1e-10).unwrap();
        let lin = linearized_path(&surf, &orbit).unwrap();
        let rot = rotation(&lin.path, Vector2::new(1.0, 0.0)).unwrap();
        let oracle = rotation_via_curvature(&surf, &orbit, &lin).unwrap();
        assert!((oracle - rot).abs() < 1e-4, "oracle {oracle} vs rotation {rot}");
        // Theorem 2 regime: the short orbit keeps index 3 after perturbation.
        let res = maslov_index(&lin.path, 64, 1e-5).unwrap();
        assert_eq!(res.index, 3);
    }
}

impl MaslovResult {
    /// The spread invariant the report was checked against.
    pub fn spread_ok(&self) -> bool {
        self.rot_max - self.rot_min < PI + 1e-6
    }
}
