//! Task execution: build the configured objects, run the computation, fill
//! the verdict, and write the dense dumps.
//!
//! Exit-code discipline lives here as well: a verdict that comes back with
//! `pass = false` means the mathematics said no (exit 3), while an `Err`
//! from a task distinguishes invalid input (exit 2) from numerical
//! non-convergence (exit 1) by the error variant.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::config::{
    FillDirection, FillMode, KnotKind, RunConfig, SurfaceKind, Task,
};
use crate::verdict::{vec4_value, Verdict};
use reeb_lab_core::dynamics::{self, LinearizedFlow, PeriodicOrbit};
use reeb_lab_core::filling::{self, ImmersedDisc, IntersectionRecord};
use reeb_lab_core::knot::{self, TransverseKnot};
use reeb_lab_core::maslov::{self, MaslovResult, RotationReport};
use reeb_lab_core::numerics::s3_lattice;
use reeb_lab_core::surface::StarShapedSurface;
use reeb_lab_core::{Error as CoreError, Vec4};

/// Where (and whether) to write the dense sample dumps.
#[derive(Debug, Clone, Default)]
pub struct DumpPlan {
    pub dir: Option<PathBuf>,
    pub json_only: bool,
}

impl DumpPlan {
    /// Resolve the target path for one artifact: an explicit [output] name
    /// lands in the dump directory (or the working directory without one);
    /// otherwise a dump directory gets the default name; otherwise nothing
    /// is written. `--json-only` suppresses everything.
    fn target(&self, explicit: &Option<String>, default_name: &str) -> Option<PathBuf> {
        if self.json_only {
            return None;
        }
        match (explicit, &self.dir) {
            (Some(name), Some(dir)) => Some(dir.join(name)),
            (Some(name), None) => Some(PathBuf::from(name)),
            (None, Some(dir)) => Some(dir.join(default_name)),
            (None, None) => None,
        }
    }
}

#[derive(Debug)]
pub enum RunError {
    Core(CoreError),
    Io { path: PathBuf, source: std::io::Error },
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Core(e) => write!(f, "{e}"),
            RunError::Io { path, source } => {
                write!(f, "writing {}: {source}", path.display())
            }
        }
    }
}

impl std::error::Error for RunError {}

impl From<CoreError> for RunError {
    fn from(e: CoreError) -> Self {
        RunError::Core(e)
    }
}

impl RunError {
    /// 1 — numerical non-convergence; 2 — invalid input; 3 — a verified
    /// mathematical statement came back false.
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Core(CoreError::InvalidParameter { .. })
            | RunError::Core(CoreError::NotStarShaped { .. })
            | RunError::Core(CoreError::OriginProjection) => 2,
            RunError::Core(CoreError::VerificationFailed { .. }) => 3,
            RunError::Core(_) => 1,
            RunError::Io { .. } => 2,
        }
    }
}

type RunResult<T> = Result<T, RunError>;

// ---------------------------------------------------------------------------
// Shared builders
// ---------------------------------------------------------------------------

fn build_surface(cfg: &RunConfig) -> RunResult<StarShapedSurface> {
    Ok(match cfg.surface.kind {
        SurfaceKind::Sphere => StarShapedSurface::sphere(),
        SurfaceKind::Ellipsoid => StarShapedSurface::ellipsoid(cfg.surface.r1, cfg.surface.r2)?,
        SurfaceKind::PerturbedEllipsoid => StarShapedSurface::perturbed_ellipsoid(
            cfg.surface.r1,
            cfg.surface.r2,
            cfg.surface.eps.expect("validated at parse time"),
        )?,
    })
}

/// Default period guess: the short coordinate orbit for builtin quadrics.
fn period_guess(cfg: &RunConfig, surface: &StarShapedSurface) -> f64 {
    cfg.orbit.t0.unwrap_or_else(|| match surface.quadric_radii() {
        Some((r1, _)) => PI * r1 * r1,
        None => PI,
    })
}

fn build_orbit(cfg: &RunConfig, surface: &StarShapedSurface) -> RunResult<PeriodicOrbit> {
    let [x1, y1, x2, y2] = cfg.orbit.x0;
    let orbit = dynamics::find_periodic_orbit_sampled(
        surface,
        Vec4::new(x1, y1, x2, y2),
        period_guess(cfg, surface),
        cfg.orbit.tol,
        cfg.orbit.n_samples,
    )?;
    Ok(orbit)
}

fn orbit_provenance(cfg: &RunConfig, v: &mut Verdict, orbit: &PeriodicOrbit) {
    v.provenance("orbit.tol", cfg.orbit.tol);
    v.provenance("orbit.n_samples", cfg.orbit.n_samples);
    v.provenance("orbit.closure_residual", orbit.closure_residual);
    v.provenance("orbit.max_f_drift", orbit.max_f_drift());
}

/// The configured knot, plus the orbit it came from when it is an orbit.
fn build_knot(
    cfg: &RunConfig,
    surface: &StarShapedSurface,
) -> RunResult<(TransverseKnot, Option<PeriodicOrbit>)> {
    match cfg.knot.kind {
        KnotKind::Hopf => Ok((TransverseKnot::hopf()?, None)),
        KnotKind::Torus => Ok((
            TransverseKnot::torus_orbit(cfg.knot.p, cfg.knot.q, cfg.knot.r1)?,
            None,
        )),
        KnotKind::Orbit => {
            let orbit = build_orbit(cfg, surface)?;
            let knot = TransverseKnot::from_orbit(&orbit)?;
            Ok((knot, Some(orbit)))
        }
    }
}

fn build_disc(cfg: &RunConfig, knot: &TransverseKnot, v: &mut Verdict) -> RunResult<ImmersedDisc> {
    v.provenance("filling.n_r", cfg.filling.n_r);
    v.provenance("filling.n_theta", cfg.filling.n_theta);
    match cfg.filling.mode {
        FillMode::Linear => {
            v.provenance("filling.split", Value::from(vec![cfg.filling.split.0, cfg.filling.split.1]));
            Ok(filling::linear_filling(
                knot,
                Some(cfg.filling.split),
                cfg.filling.n_r,
                cfg.filling.n_theta,
            )?)
        }
        FillMode::Embedded => {
            let dir = filling_direction(cfg, knot)?;
            v.result("direction", vec4_value(dir));
            Ok(filling::embedded_filling(
                knot,
                dir,
                cfg.filling.n_r,
                cfg.filling.n_theta,
            )?)
        }
    }
}

fn filling_direction(cfg: &RunConfig, knot: &TransverseKnot) -> RunResult<Vec4> {
    Ok(match cfg.filling.direction {
        FillDirection::Auto => knot::find_filling_direction(knot, cfg.filling.n_dirs)?,
        FillDirection::Fixed([x1, y1, x2, y2]) => Vec4::new(x1, y1, x2, y2).normalized(),
    })
}

/// Complex-point census of a disc: (total, anti-holomorphic, whole-disc flag).
fn complex_census(disc: &ImmersedDisc) -> (usize, usize, bool) {
    let pts = disc.complex_points();
    let anti = pts.iter().filter(|c| !c.holomorphic).count();
    let whole = pts.iter().any(|c| c.whole_disc);
    (pts.len(), anti, whole)
}

// ---------------------------------------------------------------------------
// Dumps
// ---------------------------------------------------------------------------

fn open_target(path: &Path) -> RunResult<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|source| RunError::Io { path: path.to_path_buf(), source })?;
        }
    }
    Ok(BufWriter::new(File::create(path).map_err(|source| RunError::Io {
        path: path.to_path_buf(),
        source,
    })?))
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io { path: path.to_path_buf(), source }
}

fn dump_orbit(plan: &DumpPlan, cfg: &RunConfig, orbit: &PeriodicOrbit) -> RunResult<()> {
    let Some(path) = plan.target(&cfg.output.orbit_csv, "orbit.csv") else {
        return Ok(());
    };
    let mut w = open_target(&path)?;
    writeln!(w, "t,x1,y1,x2,y2").map_err(io_err(&path))?;
    for (k, p) in orbit.points.iter().enumerate() {
        writeln!(w, "{},{},{},{},{}", orbit.time_of(k), p.x1, p.y1, p.x2, p.y2)
            .map_err(io_err(&path))?;
    }
    w.flush().map_err(io_err(&path))
}

fn dump_knot(plan: &DumpPlan, cfg: &RunConfig, knot: &TransverseKnot) -> RunResult<()> {
    let Some(path) = plan.target(&cfg.output.knot_csv, "knot.csv") else {
        return Ok(());
    };
    let mut w = open_target(&path)?;
    writeln!(w, "s,x1,y1,x2,y2").map_err(io_err(&path))?;
    let n = knot.n_samples();
    for k in 0..n {
        let s = TAU * k as f64 / n as f64;
        let p = knot.eval(s);
        writeln!(w, "{},{},{},{},{}", s, p.x1, p.y1, p.x2, p.y2).map_err(io_err(&path))?;
    }
    w.flush().map_err(io_err(&path))
}

fn dump_disc(plan: &DumpPlan, cfg: &RunConfig, disc: &ImmersedDisc) -> RunResult<()> {
    let Some(path) = plan.target(&cfg.output.disc_csv, "disc.csv") else {
        return Ok(());
    };
    let mut w = open_target(&path)?;
    writeln!(w, "r,theta,x1,y1,x2,y2").map_err(io_err(&path))?;
    for i in 0..=disc.n_r() {
        for j in 0..disc.n_theta() {
            let p = disc.point(i, j);
            writeln!(
                w,
                "{},{},{},{},{},{}",
                disc.r_of(i),
                disc.theta_of(j),
                p.x1,
                p.y1,
                p.x2,
                p.y2
            )
            .map_err(io_err(&path))?;
        }
    }
    w.flush().map_err(io_err(&path))
}

fn dump_pinching(
    plan: &DumpPlan,
    cfg: &RunConfig,
    surface: &StarShapedSurface,
) -> RunResult<()> {
    let Some(path) = plan.target(&cfg.output.pinching_csv, "pinching.csv") else {
        return Ok(());
    };
    let mut w = open_target(&path)?;
    writeln!(w, "x1,y1,x2,y2,a,b,c,margin").map_err(io_err(&path))?;
    for dir in s3_lattice(cfg.pinching.n_samples) {
        let p = surface.project_radial(dir)?;
        let cd = surface.principal_curvatures(p)?;
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            p.x1, p.y1, p.x2, p.y2, cd.a, cd.b, cd.c, cd.margin
        )
        .map_err(io_err(&path))?;
    }
    w.flush().map_err(io_err(&path))
}

fn dump_intersections(
    plan: &DumpPlan,
    cfg: &RunConfig,
    records: &[IntersectionRecord],
) -> RunResult<()> {
    let Some(path) = plan.target(&cfg.output.intersections_json, "intersections.json") else {
        return Ok(());
    };
    let mut w = open_target(&path)?;
    let text = serde_json::to_string_pretty(records).expect("records serialize");
    writeln!(w, "{text}").map_err(io_err(&path))?;
    w.flush().map_err(io_err(&path))
}

// ---------------------------------------------------------------------------
// Tasks
// ---------------------------------------------------------------------------

/// Run the configured task, returning the filled verdict. Dumps are written
/// along the way per the plan.
pub fn run_task(cfg: &RunConfig, plan: &DumpPlan) -> RunResult<Verdict> {
    let mut v = Verdict::new(cfg);
    match cfg.task {
        Task::SurfacePinching => surface_pinching(cfg, plan, &mut v)?,
        Task::OrbitFind => orbit_find(cfg, plan, &mut v)?,
        Task::OrbitMaslov => orbit_maslov(cfg, plan, &mut v)?,
        Task::KnotSl => knot_sl(cfg, plan, &mut v)?,
        Task::KnotCurvature => knot_curvature(cfg, plan, &mut v)?,
        Task::FillLinear | Task::FillEmbedded => fill(cfg, plan, &mut v)?,
        Task::VerifyThm1 => verify_thm1(cfg, plan, &mut v)?,
        Task::VerifyThm2 => verify_thm2(cfg, plan, &mut v)?,
        Task::MaslovAxioms => maslov_axioms(cfg, &mut v)?,
    }
    Ok(v)
}

fn surface_pinching(cfg: &RunConfig, plan: &DumpPlan, v: &mut Verdict) -> RunResult<()> {
    let surface = build_surface(cfg)?;
    let report = surface.pinching_scan(cfg.pinching.n_samples)?;
    v.result("pinching", report.pass);
    v.result("margin_min", report.min_margin);
    v.result("argmin", vec4_value(report.argmin));
    v.provenance("pinching.n_samples", report.n_samples);
    v.pass = report.pass;
    dump_pinching(plan, cfg, &surface)
}

fn orbit_find(cfg: &RunConfig, plan: &DumpPlan, v: &mut Verdict) -> RunResult<()> {
    let surface = build_surface(cfg)?;
    let orbit = build_orbit(cfg, &surface)?;
    let (period, integral) = dynamics::action(&orbit)?;
    v.result("period", period);
    v.result("action", integral);
    v.result("p0", vec4_value(orbit.p0));
    orbit_provenance(cfg, v, &orbit);
    v.provenance("orbit.t0_guess", period_guess(cfg, &surface));
    v.provenance("delta.action", (integral - period).abs());
    v.pass = true;
    dump_orbit(plan, cfg, &orbit)
}

/// Orbit, linearized flow, rotations and Maslov index in one sweep; shared
/// by `orbit-maslov` and `verify-thm2`.
fn maslov_chain(
    cfg: &RunConfig,
    surface: &StarShapedSurface,
) -> RunResult<(PeriodicOrbit, LinearizedFlow, RotationReport, MaslovResult, f64)> {
    let orbit = build_orbit(cfg, surface)?;
    let lin = dynamics::linearized_path(surface, &orbit)?;
    let report = maslov::rotation_report(&lin.path, cfg.maslov.n_dirs)?;
    let result = maslov::maslov_index(&lin.path, cfg.maslov.n_dirs, cfg.maslov.tol)?;
    let rot_curv = maslov::rotation_via_curvature(surface, &orbit, &lin)?;
    Ok((orbit, lin, report, result, rot_curv))
}

fn orbit_maslov(cfg: &RunConfig, plan: &DumpPlan, v: &mut Verdict) -> RunResult<()> {
    let surface = build_surface(cfg)?;
    let (orbit, _lin, report, result, rot_curv) = maslov_chain(cfg, &surface)?;
    v.result("maslov", result.index);
    v.result("degenerate", result.degenerate);
    v.result("period", orbit.period);
    v.result("rot_min", result.rot_min);
    v.result("rot_max", result.rot_max);
    v.result("spread", report.spread);
    v.result("rotation_curvature", rot_curv);
    orbit_provenance(cfg, v, &orbit);
    v.provenance("maslov.n_dirs", cfg.maslov.n_dirs);
    v.provenance("maslov.tol", cfg.maslov.tol);
    // The first sampled direction is the first trivialization axis; the
    // curvature quadrature is an independent oracle for its rotation.
    v.provenance("delta.rotation_oracle", (report.directions[0].1 - rot_curv).abs());
    v.pass = true;
    dump_orbit(plan, cfg, &orbit)
}

fn knot_sl(cfg: &RunConfig, plan: &DumpPlan, v: &mut Verdict) -> RunResult<()> {
    let surface = build_surface(cfg)?;
    let (knot, orbit) = build_knot(cfg, &surface)?;
    let lc = knot::self_linking_detailed(&knot, cfg.linking.epsilon, cfg.linking.n_quad)?;
    v.result("sl", lc.rounded);
    v.result("raw", lc.raw);
    v.result("residual", lc.residual);
    v.result("odd", lc.rounded.rem_euclid(2) == 1);
    v.provenance("linking.epsilon", lc.epsilon);
    v.provenance("linking.n_quad", lc.n_quad);
    v.provenance("linking.pole", vec4_value(lc.pole));
    if let Some((raw_halved, _)) = lc.halved {
        v.provenance("delta.linking_halved", (raw_halved - lc.raw).abs());
    }
    if let Some(orbit) = &orbit {
        orbit_provenance(cfg, v, orbit);
    }
    v.pass = true;
    dump_knot(plan, cfg, &knot)
}

fn knot_curvature(cfg: &RunConfig, plan: &DumpPlan, v: &mut Verdict) -> RunResult<()> {
    let surface = build_surface(cfg)?;
    let (knot, orbit) = build_knot(cfg, &surface)?;
    let kappa = knot::total_curvature(&knot)?;
    // Crookedness is the minimum over directions; directions on which the
    // height degenerates (plateaus) are skipped, and at least one direction
    // must survive.
    let mut crook: Option<usize> = None;
    let mut last_err: Option<CoreError> = None;
    for dir in s3_lattice(cfg.knot.scan_dirs) {
        match knot::crookedness(&knot, dir) {
            Ok(c) => crook = Some(crook.map_or(c, |b| b.min(c))),
            Err(e) => last_err = Some(e),
        }
    }
    let crook = match (crook, last_err) {
        (Some(c), _) => c,
        (None, Some(e)) => return Err(e.into()),
        (None, None) => unreachable!("scan_dirs >= 1 by config validation"),
    };
    v.result("kappa", kappa);
    v.result("kappa_over_2pi", kappa / TAU);
    v.result("crookedness", crook as u64);
    // Milnor: total curvature is at least 2π times the crookedness.
    v.result("milnor_ok", kappa >= TAU * crook as f64 - 1e-9);
    v.provenance("knot.scan_dirs", cfg.knot.scan_dirs);
    if let Some(orbit) = &orbit {
        orbit_provenance(cfg, v, orbit);
    }
    v.pass = true;
    dump_knot(plan, cfg, &knot)
}

fn fill(cfg: &RunConfig, plan: &DumpPlan, v: &mut Verdict) -> RunResult<()> {
    let surface = build_surface(cfg)?;
    let (knot, orbit) = build_knot(cfg, &surface)?;
    let disc = build_disc(cfg, &knot, v)?;
    let symplectic_min = disc.symplectic_check();
    let (n_complex, anti, whole) = complex_census(&disc);
    v.result("symplectic_min", symplectic_min);
    v.result("symplectic", symplectic_min > 0.0);
    v.result("complex_points", n_complex as u64);
    v.result("anti_holomorphic", anti as u64);
    v.result("whole_disc_holomorphic", whole);
    if cfg.task == Task::FillEmbedded {
        // The constructor's injectivity scan has passed by this point.
        v.result("embedded", true);
        v.provenance("filling.n_dirs", cfg.filling.n_dirs);
    }
    if let Some(orbit) = &orbit {
        orbit_provenance(cfg, v, orbit);
    }
    v.pass = symplectic_min > 0.0 && anti == 0;
    dump_knot(plan, cfg, &knot)?;
    dump_disc(plan, cfg, &disc)
}

fn verify_thm1(cfg: &RunConfig, plan: &DumpPlan, v: &mut Verdict) -> RunResult<()> {
    let surface = build_surface(cfg)?;
    let (knot, orbit) = build_knot(cfg, &surface)?;
    let disc = build_disc(cfg, &knot, v)?;
    let report = filling::verify_theorem1(
        &knot,
        &disc,
        cfg.linking.epsilon,
        cfg.linking.n_quad,
        cfg.filling.transverse_tol,
    )?;
    v.result("sl", report.self_linking);
    v.result("tan", report.tangential_index);
    v.result("int", report.self_linking + 1);
    v.result("double_points", report.intersections.len() as u64);
    v.result("symplectic_min", report.symplectic_min);
    v.result("anti_holomorphic", report.anti_holomorphic_points as u64);
    v.result("identity", report.identity_holds);
    v.provenance("linking.epsilon", cfg.linking.epsilon);
    v.provenance("linking.n_quad", cfg.linking.n_quad);
    v.provenance("filling.transverse_tol", cfg.filling.transverse_tol);
    v.provenance(
        "delta.int_cross_check",
        (2 * report.tangential_index - (report.self_linking + 1)).unsigned_abs(),
    );
    if let Some(orbit) = &orbit {
        orbit_provenance(cfg, v, orbit);
    }
    v.pass = report.identity_holds;
    dump_knot(plan, cfg, &knot)?;
    dump_disc(plan, cfg, &disc)?;
    dump_intersections(plan, cfg, &report.intersections)
}

fn verify_thm2(cfg: &RunConfig, plan: &DumpPlan, v: &mut Verdict) -> RunResult<()> {
    let surface = build_surface(cfg)?;

    // Hypothesis: the pinching condition a ≤ b + c holds pointwise. A
    // failed scan stops the chain — the remaining stages would verify
    // nothing about the theorem.
    let pinch = surface.pinching_scan(cfg.pinching.n_samples)?;
    v.result("pinching", pinch.pass);
    v.result("pinching_margin", pinch.min_margin);
    v.provenance("pinching.n_samples", pinch.n_samples);
    dump_pinching(plan, cfg, &surface)?;
    if !pinch.pass {
        v.pass = false;
        return Ok(());
    }

    // Hypothesis: the orbit has Maslov index 3.
    let (orbit, _lin, report, result, rot_curv) = maslov_chain(cfg, &surface)?;
    v.result("maslov", result.index);
    v.result("degenerate", result.degenerate);
    v.result("period", orbit.period);
    orbit_provenance(cfg, v, &orbit);
    v.provenance("maslov.n_dirs", cfg.maslov.n_dirs);
    v.provenance("maslov.tol", cfg.maslov.tol);
    v.provenance("delta.rotation_oracle", (report.directions[0].1 - rot_curv).abs());
    dump_orbit(plan, cfg, &orbit)?;

    // Conclusion: the orbit bounds an embedded symplectic disc, hence has
    // self-linking number −1; pinching also caps its total curvature at 4π.
    let knot = TransverseKnot::from_orbit(&orbit)?;
    let dir = filling_direction(cfg, &knot)?;
    v.result("direction", vec4_value(dir));
    let disc = filling::embedded_filling(&knot, dir, cfg.filling.n_r, cfg.filling.n_theta)?;
    let symplectic_min = disc.symplectic_check();
    v.result("embedded", true);
    v.result("symplectic_min", symplectic_min);
    v.provenance("filling.n_r", cfg.filling.n_r);
    v.provenance("filling.n_theta", cfg.filling.n_theta);
    v.provenance("filling.n_dirs", cfg.filling.n_dirs);

    let lc = knot::self_linking_detailed(&knot, cfg.linking.epsilon, cfg.linking.n_quad)?;
    v.result("sl", lc.rounded);
    v.provenance("linking.epsilon", lc.epsilon);
    v.provenance("linking.n_quad", lc.n_quad);
    v.provenance("linking.residual", lc.residual);

    let kappa = knot::total_curvature(&knot)?;
    v.result("kappa", kappa);
    v.result("kappa_margin", 4.0 * PI - kappa);

    v.pass = result.index == 3
        && !result.degenerate
        && symplectic_min > 0.0
        && lc.rounded == -1
        && kappa < 4.0 * PI;
    dump_knot(plan, cfg, &knot)?;
    dump_disc(plan, cfg, &disc)
}

// ---------------------------------------------------------------------------
// Maslov axiom suite
// ---------------------------------------------------------------------------

/// Deterministic family of generic symmetric 2×2 matrices: eigenvalues in
/// ±[0.2, 5.0] on low-discrepancy (golden ratio / √2) sequences, eigenframe
/// angle swept over [0, π). Signs alternate on two different periods so all
/// three signatures appear.
fn generic_symmetric(k: usize) -> nalgebra::Matrix2<f64> {
    let fract = |x: f64| x - x.floor();
    let l1 = (0.2 + 4.8 * fract(0.618_033_988_749_894_9 * (k as f64 + 1.0)))
        * if k % 2 == 0 { 1.0 } else { -1.0 };
    let l2 = (0.2 + 4.8 * fract(std::f64::consts::SQRT_2 * (k as f64 + 1.0)))
        * if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
    let a = PI * fract(0.414_213_562_373_095_1 * (k as f64 + 1.0));
    let (c, s) = (a.cos(), a.sin());
    // R diag(l1, l2) Rᵀ for the rotation R by angle a.
    nalgebra::Matrix2::new(
        l1 * c * c + l2 * s * s,
        (l1 - l2) * c * s,
        (l1 - l2) * c * s,
        l1 * s * s + l2 * c * c,
    )
}

/// Signature of a symmetric 2×2 matrix with eigenvalues bounded away from 0.
fn signature2(s: &nalgebra::Matrix2<f64>) -> i64 {
    let det = s[(0, 0)] * s[(1, 1)] - s[(0, 1)] * s[(1, 0)];
    let tr = s[(0, 0)] + s[(1, 1)];
    if det < 0.0 {
        0
    } else if tr > 0.0 {
        2
    } else {
        -2
    }
}

fn maslov_axioms(cfg: &RunConfig, v: &mut Verdict) -> RunResult<()> {
    let n_dirs = cfg.maslov.n_dirs;
    let tol = cfg.maslov.tol;
    let index = |path: &dynamics::SL2Path| -> RunResult<MaslovResult> {
        Ok(maslov::maslov_index(path, n_dirs, tol)?)
    };

    let mut spread_ok = true;
    let mut upper_ok = true;
    let mut audit = |path: &dynamics::SL2Path| -> RunResult<MaslovResult> {
        let m = index(path)?;
        spread_ok &= m.rot_max - m.rot_min < PI;
        upper_ok &= m.rot_max < (m.index + 1) as f64 * PI;
        Ok(m)
    };

    // Loop axiom: prepending k full turns shifts the index by exactly 2k.
    let base = maslov::exp_js_path(generic_symmetric(0), 1024)?;
    let mu0 = audit(&base)?.index;
    let mut loop_ok = true;
    for k in -2..=2_i64 {
        let shifted = maslov::prepend_loops(&base, k);
        loop_ok &= audit(&shifted)?.index == mu0 + 2 * k;
    }

    // Reversal axiom: μ(path⁻¹) = −μ(path).
    let mut reversal_ok = true;
    for k in 0..cfg.maslov.n_paths {
        let path = maslov::exp_js_path(generic_symmetric(k), 1024)?;
        let mu = audit(&path)?.index;
        reversal_ok &= audit(&maslov::reversed_inverted(&path))?.index == -mu;
    }

    // Signature axiom: μ(t ↦ exp(tJS)) = ½ signature(S).
    let mut signature_ok = true;
    for k in 0..cfg.maslov.n_matrices {
        let s = generic_symmetric(k);
        let path = maslov::exp_js_path(s, 1024)?;
        signature_ok &= audit(&path)?.index == signature2(&s) / 2;
    }

    v.result("loop_shift", loop_ok);
    v.result("reversal", reversal_ok);
    v.result("signature", signature_ok);
    v.result("spread", spread_ok);
    v.result("upper_bound", upper_ok);
    v.result("n_paths", cfg.maslov.n_paths as u64);
    v.result("n_matrices", cfg.maslov.n_matrices as u64);
    v.provenance("maslov.n_dirs", n_dirs);
    v.provenance("maslov.tol", tol);
    v.pass = loop_ok && reversal_ok && signature_ok && spread_ok && upper_ok;
    Ok(())
}
