//! Star-shaped hypersurfaces Σ = F⁻¹(1) ⊂ ℝ⁴ with their pointwise geometry:
//! outer normal, shape operator and principal curvatures, the pinching test
//! a ≤ b + c, the contact plane ξ = ker λ ∩ TΣ, the Reeb field X = φ·JN,
//! and the symplectic trivialization of ξ by the frame (πM, πJM).
//!
//! Surfaces are implicit: the builtin sphere and ellipsoid carry exact
//! gradients and Hessians, and generic surfaces are degree-≤4 polynomials
//! in (x1, y1, x2, y2) differentiated analytically, so no geometric quantity
//! here relies on finite differences.

use std::fmt;

use nalgebra::{Matrix3, Matrix4, Vector4};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::s3_lattice;
use crate::par::map_range;
use crate::vec4::{lambda0, orthonormal_complement, Vec4};

pub(crate) fn to_na(v: Vec4) -> Vector4<f64> {
    Vector4::new(v.x1, v.y1, v.x2, v.y2)
}

pub(crate) fn from_na(v: Vector4<f64>) -> Vec4 {
    Vec4::new(v[0], v[1], v[2], v[3])
}

/// Sparse polynomial in the four ambient coordinates; a term is a
/// coefficient together with the exponents of (x1, y1, x2, y2).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Polynomial4 {
    pub terms: Vec<(f64, [u8; 4])>,
}

impl Polynomial4 {
    pub fn new(terms: Vec<(f64, [u8; 4])>) -> Self {
        Polynomial4 { terms }
    }

    pub fn eval(&self, p: Vec4) -> f64 {
        let x = p.to_array();
        self.terms
            .iter()
            .map(|&(c, pw)| c * x.iter().zip(pw.iter()).map(|(xi, &e)| xi.powi(e as i32)).product::<f64>())
            .sum()
    }

    pub fn grad(&self, p: Vec4) -> Vec4 {
        let x = p.to_array();
        let mut g = [0.0; 4];
        for &(c, pw) in &self.terms {
            for k in 0..4 {
                if pw[k] == 0 {
                    continue;
                }
                let mut t = c * pw[k] as f64;
                for i in 0..4 {
                    let e = if i == k { pw[i] - 1 } else { pw[i] };
                    t *= x[i].powi(e as i32);
                }
                g[k] += t;
            }
        }
        Vec4::from_array(g)
    }

    pub fn hess(&self, p: Vec4) -> Matrix4<f64> {
        let x = p.to_array();
        let mut h = Matrix4::zeros();
        for &(c, pw) in &self.terms {
            for k in 0..4 {
                for l in k..4 {
                    let factor = if k == l {
                        if pw[k] < 2 {
                            continue;
                        }
                        (pw[k] as f64) * (pw[k] as f64 - 1.0)
                    } else {
                        if pw[k] == 0 || pw[l] == 0 {
                            continue;
                        }
                        (pw[k] as f64) * (pw[l] as f64)
                    };
                    let mut t = c * factor;
                    for i in 0..4 {
                        let mut e = pw[i];
                        if i == k {
                            e -= 1;
                        }
                        if i == l {
                            e -= 1;
                        }
                        t *= x[i].powi(e as i32);
                    }
                    h[(k, l)] += t;
                    if k != l {
                        h[(l, k)] += t;
                    }
                }
            }
        }
        h
    }
}

/// Implicit star-shaped hypersurface Σ = F⁻¹(1).
///
/// The ellipsoid is F(z) = |z₁|²/r₁² + |z₂|²/r₂²; the sphere is the unit
/// round sphere; `Implicit` carries an arbitrary polynomial F that must be
/// star-shaped with respect to the origin on its unit level set (checked at
/// every query through ⟨p, ∇F⟩ > 0, not assumed).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum StarShapedSurface {
    Sphere,
    Ellipsoid { r1: f64, r2: f64 },
    Implicit(Polynomial4),
}

impl fmt::Display for StarShapedSurface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StarShapedSurface::Sphere => write!(f, "sphere"),
            StarShapedSurface::Ellipsoid { r1, r2 } => write!(f, "ellipsoid({r1}, {r2})"),
            StarShapedSurface::Implicit(p) => write!(f, "implicit-polynomial({} terms)", p.terms.len()),
        }
    }
}

/// Curvature data at a surface point: principal curvatures sorted a ≥ b ≥ c,
/// their orthonormal tangent directions, and the pinching margin b + c − a.
#[derive(Clone, Debug, Serialize)]
pub struct CurvatureData {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub directions: [Vec4; 3],
    pub margin: f64,
}

/// Result of scanning the pinching margin over the whole surface.
#[derive(Clone, Debug, Serialize)]
pub struct PinchingReport {
    pub min_margin: f64,
    pub argmin: Vec4,
    pub pass: bool,
    pub n_samples: usize,
}

/// The adapted frame at p ∈ Σ: the orthonormal quadruple (N, JN, M, JM)
/// with M = M̂N, the contact-plane basis (πM, πJM) where π inverts the
/// orthogonal projection ξ → L = span{M, JM}, and the Reeb factor
/// φ = 2/⟨p, N⟩.
#[derive(Clone, Debug)]
pub struct ContactFrame {
    pub p: Vec4,
    pub n: Vec4,
    pub jn: Vec4,
    pub m: Vec4,
    pub jm: Vec4,
    pub pi_m: Vec4,
    pub pi_jm: Vec4,
    pub phi: f64,
}

impl ContactFrame {
    /// Coordinates of v ∈ ξ_p in the basis (πM, πJM). Because π inverts the
    /// orthogonal projection onto L, these are just (⟨v, M⟩, ⟨v, JM⟩); the
    /// resulting linear map is area-preserving from (ξ, ω₀) to (ℝ², dx∧dy).
    pub fn trivialize(&self, v: Vec4) -> Result<(f64, f64)> {
        let scale = v.norm().max(1.0);
        let lam = lambda0(self.p, v);
        let nor = v.dot(self.n);
        if lam.abs() > 1e-8 * scale || nor.abs() > 1e-8 * scale {
            return Err(Error::NotInContactPlane { lambda: lam, normal: nor });
        }
        Ok((v.dot(self.m), v.dot(self.jm)))
    }

    /// Projection of an arbitrary ambient vector onto ξ_p along N and the
    /// Reeb direction: first remove the normal component, then the Reeb
    /// component as measured by λ (exact because λ(X) = 1).
    pub fn project_to_xi(&self, v: Vec4) -> Vec4 {
        let w = v - self.n * v.dot(self.n);
        let x = self.jn * self.phi;
        w - x * lambda0(self.p, w)
    }
}

impl StarShapedSurface {
    pub fn sphere() -> Self {
        StarShapedSurface::Sphere
    }

    pub fn ellipsoid(r1: f64, r2: f64) -> Result<Self> {
        if !(r1 > 0.0) || !(r2 > 0.0) || !r1.is_finite() || !r2.is_finite() {
            return Err(Error::InvalidParameter {
                reason: format!("ellipsoid radii must be positive and finite, got ({r1}, {r2})"),
            });
        }
        Ok(StarShapedSurface::Ellipsoid { r1, r2 })
    }

    pub fn implicit(poly: Polynomial4) -> Self {
        StarShapedSurface::Implicit(poly)
    }

    /// Ellipsoid with an x₁²x₂² perturbation. The perturbing term vanishes
    /// to second order on the z₁-coordinate circle, so that circle stays a
    /// Reeb orbit with its unperturbed period while the surface (and the
    /// linearized flow around the orbit) genuinely changes.
    pub fn perturbed_ellipsoid(r1: f64, r2: f64, eps: f64) -> Result<Self> {
        if !(r1 > 0.0) || !(r2 > 0.0) {
            return Err(Error::InvalidParameter {
                reason: format!("ellipsoid radii must be positive, got ({r1}, {r2})"),
            });
        }
        let a = 1.0 / (r1 * r1);
        let b = 1.0 / (r2 * r2);
        Ok(StarShapedSurface::Implicit(Polynomial4::new(vec![
            (a, [2, 0, 0, 0]),
            (a, [0, 2, 0, 0]),
            (b, [0, 0, 2, 0]),
            (b, [0, 0, 0, 2]),
            (eps, [2, 0, 2, 0]),
        ])))
    }

    /// Radii (r1, r2) if the surface is a builtin quadric (sphere counts as
    /// (1, 1)); used by the closed-form orbit fast path.
    pub fn quadric_radii(&self) -> Option<(f64, f64)> {
        match *self {
            StarShapedSurface::Sphere => Some((1.0, 1.0)),
            StarShapedSurface::Ellipsoid { r1, r2 } => Some((r1, r2)),
            StarShapedSurface::Implicit(_) => None,
        }
    }

    pub fn f(&self, p: Vec4) -> f64 {
        match self {
            StarShapedSurface::Sphere => p.norm_squared(),
            StarShapedSurface::Ellipsoid { r1, r2 } => {
                (p.x1 * p.x1 + p.y1 * p.y1) / (r1 * r1) + (p.x2 * p.x2 + p.y2 * p.y2) / (r2 * r2)
            }
            StarShapedSurface::Implicit(poly) => poly.eval(p),
        }
    }

    pub fn grad_f(&self, p: Vec4) -> Vec4 {
        match self {
            StarShapedSurface::Sphere => p * 2.0,
            StarShapedSurface::Ellipsoid { r1, r2 } => {
                let (a, b) = (2.0 / (r1 * r1), 2.0 / (r2 * r2));
                Vec4::new(a * p.x1, a * p.y1, b * p.x2, b * p.y2)
            }
            StarShapedSurface::Implicit(poly) => poly.grad(p),
        }
    }

    pub fn hess_f(&self, p: Vec4) -> Matrix4<f64> {
        match self {
            StarShapedSurface::Sphere => Matrix4::identity() * 2.0,
            StarShapedSurface::Ellipsoid { r1, r2 } => {
                let (a, b) = (2.0 / (r1 * r1), 2.0 / (r2 * r2));
                Matrix4::from_diagonal(&Vector4::new(a, a, b, b))
            }
            StarShapedSurface::Implicit(poly) => poly.hess(p),
        }
    }

    pub fn contains(&self, p: Vec4, tol: f64) -> bool {
        (self.f(p) - 1.0).abs() < tol
    }

    /// Radial projection: the unique t > 0 with F(t·p) = 1, found by Newton
    /// iteration on the ray (with the exact answer as the starting point for
    /// quadrics, where F is homogeneous).
    pub fn project_radial(&self, p: Vec4) -> Result<Vec4> {
        if p.norm() < 1e-14 {
            return Err(Error::OriginProjection);
        }
        let f0 = self.f(p);
        let mut t = if f0 > 1e-300 { 1.0 / f0.sqrt() } else { 1.0 };
        for _ in 0..100 {
            let q = p * t;
            let g = self.f(q) - 1.0;
            if g.abs() < 1e-13 {
                return Ok(q);
            }
            let dg = self.grad_f(q).dot(p);
            if dg.abs() < 1e-14 {
                // Flat spot along the ray: nudge toward the level set.
                t *= if g > 0.0 { 0.9 } else { 1.1 };
                continue;
            }
            t -= g / dg;
            if t <= 0.0 {
                t = 1e-6;
            }
        }
        Err(Error::ProjectionDiverged { residual: (self.f(p * t) - 1.0).abs(), iters: 100 })
    }

    /// Unit outer normal N = ∇F/‖∇F‖.
    pub fn normal(&self, p: Vec4) -> Result<Vec4> {
        let g = self.grad_f(p);
        let n = g.norm();
        if n < 1e-12 {
            return Err(Error::DegenerateGradient { norm: n });
        }
        Ok(g / n)
    }

    /// Deterministic orthonormal basis of the tangent space T_pΣ = N⊥.
    pub fn tangent_basis(&self, p: Vec4) -> Result<[Vec4; 3]> {
        Ok(orthonormal_complement(self.normal(p)?))
    }

    /// Second fundamental form Π(u, v) = ⟨HessF·u, v⟩ / ‖∇F‖ for tangent
    /// u, v (the tangential projection of HessF drops against tangent
    /// arguments).
    pub fn second_fundamental_form(&self, p: Vec4, u: Vec4, v: Vec4) -> Result<f64> {
        let g = self.grad_f(p);
        let gn = g.norm();
        if gn < 1e-12 {
            return Err(Error::DegenerateGradient { norm: gn });
        }
        let hu = from_na(self.hess_f(p) * to_na(u));
        Ok(hu.dot(v) / gn)
    }

    /// Shape operator A = dN restricted to T_pΣ, expressed in the
    /// deterministic orthonormal tangent basis; returns (matrix, basis).
    pub fn shape_operator(&self, p: Vec4) -> Result<(Matrix3<f64>, [Vec4; 3])> {
        let basis = self.tangent_basis(p)?;
        let g = self.grad_f(p);
        let gn = g.norm();
        let h = self.hess_f(p);
        let mut a = Matrix3::zeros();
        for j in 0..3 {
            let hej = from_na(h * to_na(basis[j]));
            for i in 0..3 {
                a[(i, j)] = basis[i].dot(hej) / gn;
            }
        }
        // Symmetrize away the last bits of floating-point asymmetry.
        let a = (a + a.transpose()) * 0.5;
        Ok((a, basis))
    }

    /// Principal curvatures a ≥ b ≥ c with orthonormal tangent directions
    /// and the pinching margin b + c − a.
    pub fn principal_curvatures(&self, p: Vec4) -> Result<CurvatureData> {
        let (a, basis) = self.shape_operator(p)?;
        let eig = a.symmetric_eigen();
        let mut idx = [0usize, 1, 2];
        idx.sort_by(|&i, &j| eig.eigenvalues[j].partial_cmp(&eig.eigenvalues[i]).unwrap().then(i.cmp(&j)));
        let vals = [eig.eigenvalues[idx[0]], eig.eigenvalues[idx[1]], eig.eigenvalues[idx[2]]];
        let mut dirs = [Vec4::ZERO; 3];
        for (k, &col) in idx.iter().enumerate() {
            let v = eig.eigenvectors.column(col);
            dirs[k] = basis[0] * v[0] + basis[1] * v[1] + basis[2] * v[2];
        }
        Ok(CurvatureData {
            a: vals[0],
            b: vals[1],
            c: vals[2],
            directions: dirs,
            margin: vals[1] + vals[2] - vals[0],
        })
    }

    /// Scan the pinching margin b + c − a over a low-discrepancy lattice of
    /// n_samples directions (radially projected onto Σ), then polish the
    /// worst point by a compass search on the direction sphere. The surface
    /// passes when the minimal margin is ≥ −1e−9.
    pub fn pinching_scan(&self, n_samples: usize) -> Result<PinchingReport> {
        if n_samples < 10 {
            return Err(Error::InvalidParameter {
                reason: format!("pinching scan needs at least 10 samples, got {n_samples}"),
            });
        }
        let dirs = s3_lattice(n_samples);
        let margins: Vec<Result<(f64, Vec4)>> = map_range(n_samples, |i| {
            let p = self.project_radial(dirs[i])?;
            Ok((self.principal_curvatures(p)?.margin, p))
        });
        let mut best: Option<(f64, Vec4)> = None;
        for r in margins {
            let (m, p) = r?;
            if best.is_none() || m < best.unwrap().0 {
                best = Some((m, p));
            }
        }
        let (coarse_min, coarse_argmin) = best.unwrap();
        let (min_margin, argmin) = self.refine_margin_min(coarse_argmin, coarse_min)?;
        Ok(PinchingReport { min_margin, argmin, pass: min_margin >= -1e-9, n_samples })
    }

    /// Compass search over the direction sphere, descending the margin from
    /// an initial surface point. A move must beat the current value by the
    /// forcing term 0.01·h² — plain improvement is not enough, because along
    /// a degenerate valley (an ellipsoid's circle of minima) sliding moves
    /// improve by O(value·h²) forever and the step would never shrink. Step
    /// halving down to 1e−7 leaves a value error quadratically smaller,
    /// comfortably inside 1e−6.
    fn refine_margin_min(&self, start: Vec4, start_margin: f64) -> Result<(f64, Vec4)> {
        let mut u = start.normalized();
        let mut point = start;
        let mut value = start_margin;
        let mut h = 0.05;
        let mut evals = 0usize;
        while h > 1e-7 && evals < 4000 {
            let frame = orthonormal_complement(u);
            let mut cand: Option<(f64, Vec4, Vec4)> = None;
            for e in &frame {
                for s in [-1.0, 1.0] {
                    let v = (u + *e * (s * h)).normalized();
                    let q = self.project_radial(v)?;
                    let m = self.principal_curvatures(q)?.margin;
                    evals += 1;
                    if cand.is_none() || m < cand.unwrap().0 {
                        cand = Some((m, v, q));
                    }
                }
            }
            let (m, v, q) = cand.unwrap();
            if m < value - 0.01 * h * h {
                value = m;
                u = v;
                point = q;
            } else {
                h *= 0.5;
            }
        }
        Ok((value, point))
    }

    /// Reeb vector field X = φ·JN with φ = 2/⟨p, N⟩; satisfies λ(X) = 1 by
    /// construction, and dλ(X, ·) vanishes on ξ.
    pub fn reeb_field(&self, p: Vec4) -> Result<Vec4> {
        let n = self.normal(p)?;
        let pn = p.dot(n);
        if pn <= 1e-12 {
            return Err(Error::NotStarShaped { value: pn });
        }
        Ok(n.jmul() * (2.0 / pn))
    }

    /// Ambient Jacobian of the global Reeb extension X̃(q) = 2·J∇F/⟨q, ∇F⟩
    /// (which restricts to X on Σ and keeps λ(X̃) = 1 on every level set):
    /// dX̃ = (2/s)·J·H − (2/s²)·(J∇F)(∇F + H·q)ᵀ with s = ⟨q, ∇F⟩.
    pub fn reeb_jacobian(&self, p: Vec4) -> Result<Matrix4<f64>> {
        let g = self.grad_f(p);
        let s = p.dot(g);
        if s <= 1e-12 {
            return Err(Error::NotStarShaped { value: s });
        }
        let h = self.hess_f(p);
        // J as a 4×4 matrix acting on (x1, y1, x2, y2).
        let jm = Matrix4::new(
            0.0, -1.0, 0.0, 0.0, //
            1.0, 0.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, -1.0, //
            0.0, 0.0, 1.0, 0.0,
        );
        let jg = to_na(g.jmul());
        let w = to_na(g) + h * to_na(p);
        Ok(jm * h * (2.0 / s) - jg * w.transpose() * (2.0 / (s * s)))
    }

    /// Adapted frame and trivialization data at p. πM = M + β·JN with
    /// β = −⟨Jp, M⟩/⟨p, N⟩ is the unique lift of M into ξ (and likewise for
    /// JM); ω₀(πM, πJM) = ω₀(M, JM) = 1, so the frame is symplectic.
    pub fn contact_frame(&self, p: Vec4) -> Result<ContactFrame> {
        let n = self.normal(p)?;
        let pn = p.dot(n);
        if pn <= 1e-12 {
            return Err(Error::NotStarShaped { value: pn });
        }
        let jn = n.jmul();
        let m = n.mhat();
        let jm = m.jmul();
        let jp = p.jmul();
        let beta_m = -jp.dot(m) / pn;
        let beta_jm = -jp.dot(jm) / pn;
        Ok(ContactFrame {
            p,
            n,
            jn,
            m,
            jm,
            pi_m: m + jn * beta_m,
            pi_jm: jm + jn * beta_jm,
            phi: 2.0 / pn,
        })
    }
}
