//! Small numerical utilities: quadrature, periodic interpolation and
//! differentiation, angle lifting, and a low-discrepancy lattice on S³.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::vec4::Vec4;

/// Composite Simpson rule over [a, b] with n subintervals (n rounded up to
/// even). The integrand is sampled at n + 1 equally spaced nodes.
pub fn composite_simpson(a: f64, b: f64, n: usize, mut f: impl FnMut(f64) -> f64) -> f64 {
    let n = if n % 2 == 0 { n.max(2) } else { n + 1 };
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + h * k as f64);
    }
    acc * h / 3.0
}

/// Composite Simpson with a half-step refinement check: returns the fine
/// value and errs if the two estimates disagree beyond `tol` (absolute,
/// relative to scale max(1, |fine|)).
pub fn simpson_checked(
    a: f64,
    b: f64,
    n: usize,
    tol: f64,
    mut f: impl FnMut(f64) -> f64,
) -> Result<f64> {
    let coarse = composite_simpson(a, b, n, &mut f);
    let fine = composite_simpson(a, b, 2 * n, &mut f);
    let scale = fine.abs().max(1.0);
    if (coarse - fine).abs() > tol * scale {
        return Err(Error::QuadratureUnstable { coarse, fine });
    }
    Ok(fine)
}

/// Continuous angle lift: given samples of a nonvanishing planar curve
/// (x(t), y(t)), produce angles θ(t) with θ(0) = atan2(y0, x0) and no jumps.
/// Fails if two consecutive samples turn by `max_step` or more, which means
/// the sampling cannot distinguish the winding.
pub fn lift_angles(xy: &[(f64, f64)], max_step: f64) -> Result<Vec<f64>> {
    assert!(!xy.is_empty());
    let mut out = Vec::with_capacity(xy.len());
    let mut prev = xy[0].1.atan2(xy[0].0);
    out.push(prev);
    for &(x, y) in &xy[1..] {
        let raw = y.atan2(x);
        let mut delta = raw - (prev - (prev / (2.0 * PI)).floor() * 2.0 * PI);
        // Reduce to (-π, π].
        while delta > PI {
            delta -= 2.0 * PI;
        }
        while delta <= -PI {
            delta += 2.0 * PI;
        }
        if delta.abs() >= max_step {
            return Err(Error::RotationSampling { max_step: delta.abs(), limit: max_step });
        }
        prev += delta;
        out.push(prev);
    }
    Ok(out)
}

/// Periodic Catmull-Rom interpolation of uniformly spaced samples over a
/// period `period`. `samples[k]` sits at t = k·period/n; the curve closes up.
pub fn catmull_rom_periodic(samples: &[Vec4], period: f64, t: f64) -> Vec4 {
    let n = samples.len();
    assert!(n >= 4, "need at least 4 samples for cubic interpolation");
    let h = period / n as f64;
    let s = (t / h).rem_euclid(n as f64);
    let i = (s.floor() as usize) % n;
    let u = s - s.floor();

    let pm1 = samples[(i + n - 1) % n];
    let p0 = samples[i];
    let p1 = samples[(i + 1) % n];
    let p2 = samples[(i + 2) % n];

    // Uniform Catmull-Rom basis.
    let u2 = u * u;
    let u3 = u2 * u;
    pm1 * (-0.5 * u3 + u2 - 0.5 * u)
        + p0 * (1.5 * u3 - 2.5 * u2 + 1.0)
        + p1 * (-1.5 * u3 + 2.0 * u2 + 0.5 * u)
        + p2 * (0.5 * u3 - 0.5 * u2)
}

/// Derivative of the periodic Catmull-Rom interpolant at parameter t.
pub fn catmull_rom_periodic_derivative(samples: &[Vec4], period: f64, t: f64) -> Vec4 {
    let n = samples.len();
    assert!(n >= 4);
    let h = period / n as f64;
    let s = (t / h).rem_euclid(n as f64);
    let i = (s.floor() as usize) % n;
    let u = s - s.floor();

    let pm1 = samples[(i + n - 1) % n];
    let p0 = samples[i];
    let p1 = samples[(i + 1) % n];
    let p2 = samples[(i + 2) % n];

    let u2 = u * u;
    let d = pm1 * (-1.5 * u2 + 2.0 * u - 0.5)
        + p0 * (4.5 * u2 - 5.0 * u)
        + p1 * (-4.5 * u2 + 4.0 * u + 0.5)
        + p2 * (1.5 * u2 - u);
    d / h
}

/// Fourth-order periodic central difference of uniformly spaced samples:
/// f'(kh) ≈ (−f₂ + 8f₁ − 8f₋₁ + f₋₂) / 12h with periodic wraparound.
pub fn central_diff_periodic_4th(samples: &[Vec4], period: f64) -> Vec<Vec4> {
    let n = samples.len();
    assert!(n >= 5);
    let h = period / n as f64;
    (0..n)
        .map(|k| {
            let f1 = samples[(k + 1) % n];
            let f2 = samples[(k + 2) % n];
            let fm1 = samples[(k + n - 1) % n];
            let fm2 = samples[(k + n - 2) % n];
            (fm2 - f2 + (f1 - fm1) * 8.0) / (12.0 * h)
        })
        .collect()
}

/// Kronecker low-discrepancy sequence in [0,1)³: α_i = ρ^{-i} with ρ the
/// real root of x⁴ = x + 1 (degree 4, so 1, ρ⁻¹, ρ⁻², ρ⁻³ are rationally
/// independent and the three coordinates never collapse onto a lattice
/// hyperplane); point k is frac(0.5 + k·α).
pub fn r3_sequence(n: usize) -> Vec<[f64; 3]> {
    // Newton's method pins the root to machine precision.
    let mut rho: f64 = 1.22;
    for _ in 0..32 {
        rho -= (rho.powi(4) - rho - 1.0) / (4.0 * rho.powi(3) - 1.0);
    }
    let alpha = [1.0 / rho, 1.0 / (rho * rho), 1.0 / (rho * rho * rho)];
    (0..n)
        .map(|k| {
            let kf = k as f64;
            [
                (0.5 + kf * alpha[0]).fract(),
                (0.5 + kf * alpha[1]).fract(),
                (0.5 + kf * alpha[2]).fract(),
            ]
        })
        .collect()
}

/// Low-discrepancy lattice of n points on the unit 3-sphere, via Hopf-like
/// coordinates: u ∈ [0,1)³ maps to
///   η = asin(√u₃) ∈ [0, π/2],  ξ₁ = 2πu₁,  ξ₂ = 2πu₂,
///   p = (cos η · e^{iξ₁}, sin η · e^{iξ₂}),
/// which is measure-preserving for the round metric.
pub fn s3_lattice(n: usize) -> Vec<Vec4> {
    r3_sequence(n)
        .into_iter()
        .map(|u| {
            let eta = u[2].sqrt().asin();
            let (xi1, xi2) = (2.0 * PI * u[0], 2.0 * PI * u[1]);
            Vec4::new(
                eta.cos() * xi1.cos(),
                eta.cos() * xi1.sin(),
                eta.sin() * xi2.cos(),
                eta.sin() * xi2.sin(),
            )
        })
        .collect()
}

/// Scalar bisection for g monotone on [lo, hi] with g(lo), g(hi) of opposite
/// sign; returns the root to absolute tolerance `tol` on the argument.
pub fn bisect(mut lo: f64, mut hi: f64, tol: f64, mut g: impl FnMut(f64) -> f64) -> f64 {
    let (mut glo, ghi) = (g(lo), g(hi));
    debug_assert!(glo * ghi <= 0.0, "bisection needs a sign change");
    if glo == 0.0 {
        return lo;
    }
    if ghi == 0.0 {
        return hi;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let gm = g(mid);
        if gm == 0.0 {
            return mid;
        }
        if glo * gm < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            glo = gm;
        }
    }
    0.5 * (lo + hi)
}
