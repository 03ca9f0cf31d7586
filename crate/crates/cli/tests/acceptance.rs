//! Acceptance suite: nine end-to-end criteria covering orbit dynamics,
//! rotation and index computations, index axioms, self-linking, disc
//! fillings, the full verification pipelines of the binary, and refinement
//! invariance. Each test prints one `ACCEPTANCE n: PASS/FAIL` line (visible
//! under `--nocapture`) and then asserts every check it made.

use std::f64::consts::PI;
use std::process::{Command, Output};

use nalgebra::Matrix2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use tempfile::TempDir;

use reeb_lab_core::dynamics::{action, find_periodic_orbit, linearized_path};
use reeb_lab_core::filling::{
    embedded_filling, linear_filling, self_intersection_number, tangential_index, verify_theorem1,
};
use reeb_lab_core::knot::{
    self, find_filling_direction, TransverseKnot, DEFAULT_LINK_QUAD, DEFAULT_PUSHOFF,
};
use reeb_lab_core::maslov::{
    exp_js_path, maslov_index, prepend_loops, reversed_inverted, rotation_report,
    rotation_via_curvature,
};
use reeb_lab_core::surface::StarShapedSurface;
use reeb_lab_core::Vec4;

type Checks = Vec<(String, bool)>;

fn check(checks: &mut Checks, name: impl Into<String>, ok: bool) {
    checks.push((name.into(), ok));
}

fn conclude(n: usize, checks: &Checks) {
    let failing: Vec<&str> = checks
        .iter()
        .filter(|(_, ok)| !ok)
        .map(|(name, _)| name.as_str())
        .collect();
    if failing.is_empty() {
        println!("ACCEPTANCE {n}: PASS — {} checks", checks.len());
    } else {
        println!("ACCEPTANCE {n}: FAIL — {}", failing.join("; "));
        panic!("criterion {n} failed: {}", failing.join("; "));
    }
}

fn run_binary(cfg_text: &str) -> Output {
    let dir = TempDir::new().expect("tempdir");
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, cfg_text).expect("write config");
    Command::new(env!("CARGO_BIN_EXE_reeb-lab"))
        .arg(&cfg)
        .arg("--json-only")
        .output()
        .expect("run binary")
}

fn verdict(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not a JSON verdict ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

fn near(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

// -- Criterion 1: round sphere --------------------------------------------

#[test]
fn acceptance_1_sphere_orbit_rotation_and_index() {
    let mut c = Checks::new();
    let s = StarShapedSurface::sphere();
    let orbit = find_periodic_orbit(&s, Vec4::new(1.0, 0.0, 0.0, 0.0), PI, 1e-10).unwrap();
    let (period, integral) = action(&orbit).unwrap();
    check(&mut c, format!("period {period} ≈ π"), near(period, PI, 1e-8));
    check(&mut c, format!("action {integral} ≈ π"), near(integral, PI, 1e-8));

    let lin = linearized_path(&s, &orbit).unwrap();
    let report = rotation_report(&lin.path, 64).unwrap();
    let all_4pi = report
        .directions
        .iter()
        .all(|&(_, rot)| near(rot, 4.0 * PI, 1e-6));
    check(
        &mut c,
        format!("all 64 rotations ≈ 4π (min {}, max {})", report.rot_min, report.rot_max),
        all_4pi,
    );
    let curv = rotation_via_curvature(&s, &orbit, &lin).unwrap();
    check(&mut c, format!("curvature rotation {curv} ≈ 4π"), near(curv, 4.0 * PI, 1e-8));

    let res = maslov_index(&lin.path, 64, 1e-5).unwrap();
    check(&mut c, format!("index {} = 4", res.index), res.index == 4);
    check(&mut c, "degenerate branch", res.degenerate);
    conclude(1, &c);
}

// -- Criterion 2: borderline pinched ellipsoid ----------------------------

#[test]
fn acceptance_2_borderline_ellipsoid_orbits_index_and_pinching() {
    let mut c = Checks::new();
    let r2 = 2.0_f64.sqrt();
    let e = StarShapedSurface::ellipsoid(1.0, r2).unwrap();

    let short = find_periodic_orbit(&e, Vec4::new(1.0, 0.0, 0.0, 0.0), 3.0, 1e-10).unwrap();
    check(&mut c, format!("short period {} ≈ π", short.period), near(short.period, PI, 1e-8));
    let long = find_periodic_orbit(&e, Vec4::new(0.0, 0.0, r2, 0.0), 6.0, 1e-10).unwrap();
    check(
        &mut c,
        format!("long period {} ≈ 2π", long.period),
        near(long.period, 2.0 * PI, 1e-8),
    );

    let lin = linearized_path(&e, &short).unwrap();
    let report = rotation_report(&lin.path, 64).unwrap();
    let all_3pi = report
        .directions
        .iter()
        .all(|&(_, rot)| near(rot, 3.0 * PI, 1e-5));
    check(
        &mut c,
        format!("all rotations ≈ 3π (min {}, max {})", report.rot_min, report.rot_max),
        all_3pi,
    );
    let curv = rotation_via_curvature(&e, &short, &lin).unwrap();
    check(&mut c, format!("curvature rotation {curv} ≈ 3π"), near(curv, 3.0 * PI, 1e-5));

    let res = maslov_index(&lin.path, 64, 1e-5).unwrap();
    check(&mut c, format!("index {} = 3", res.index), res.index == 3);
    check(&mut c, "nondegenerate", !res.degenerate);

    let pinch = e.pinching_scan(1000).unwrap();
    check(
        &mut c,
        format!("borderline margin {} ≈ 0", pinch.min_margin),
        pinch.min_margin.abs() <= 1e-6,
    );
    check(&mut c, "pinching passes at the borderline", pinch.pass);
    conclude(2, &c);
}

// -- Criterion 3: strictly pinched ellipsoid ------------------------------

#[test]
fn acceptance_3_strictly_pinched_ellipsoid_rotation() {
    let mut c = Checks::new();
    let e = StarShapedSurface::ellipsoid(1.0, (1.0_f64 / 0.7).sqrt()).unwrap();
    let orbit = find_periodic_orbit(&e, Vec4::new(1.0, 0.0, 0.0, 0.0), 3.0, 1e-10).unwrap();
    let lin = linearized_path(&e, &orbit).unwrap();
    let report = rotation_report(&lin.path, 64).unwrap();
    let target = 3.4 * PI;
    let all_close = report
        .directions
        .iter()
        .all(|&(_, rot)| near(rot, target, 1e-5));
    check(
        &mut c,
        format!("all rotations ≈ 3.4π (min {}, max {})", report.rot_min, report.rot_max),
        all_close,
    );
    let res = maslov_index(&lin.path, 64, 1e-5).unwrap();
    check(&mut c, format!("index {} = 3", res.index), res.index == 3);
    check(&mut c, "nondegenerate", !res.degenerate);
    conclude(3, &c);
}

// -- Criterion 4: index axioms on seeded random generators ----------------

fn random_symmetric(rng: &mut ChaCha8Rng) -> Matrix2<f64> {
    let l1 = rng.random_range(0.1..(2.0 * PI - 0.1)) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let l2 = rng.random_range(0.1..(2.0 * PI - 0.1)) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let a = rng.random_range(0.0..PI);
    let q = Matrix2::new(a.cos(), -a.sin(), a.sin(), a.cos());
    q * Matrix2::new(l1, 0.0, 0.0, l2) * q.transpose()
}

fn signature2(s: &Matrix2<f64>) -> i64 {
    let tr = s[(0, 0)] + s[(1, 1)];
    if s.determinant() > 0.0 {
        if tr > 0.0 {
            2
        } else {
            -2
        }
    } else {
        0
    }
}

#[test]
fn acceptance_4_maslov_axioms_on_seeded_families() {
    let mut c = Checks::new();
    let mut audited = 0usize;
    let mut spread_ok = true;
    let mut bound_ok = true;
    let mut audit = |path: &reeb_lab_core::dynamics::SL2Path, index: i64| {
        let report = rotation_report(path, 64).unwrap();
        spread_ok &= report.spread < PI;
        bound_ok &= report
            .directions
            .iter()
            .all(|&(_, rot)| rot < (index + 1) as f64 * PI + 1e-9);
        audited += 1;
    };

    // Loop axiom: prepending k full turns shifts the index by 2k.
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    let mut paths = vec![
        exp_js_path(Matrix2::new(1.1, 0.0, 0.0, 1.1), 1024).unwrap(),
        exp_js_path(Matrix2::new(1.0, 0.0, 0.0, -1.0), 1024).unwrap(),
    ];
    for _ in 0..4 {
        paths.push(exp_js_path(random_symmetric(&mut rng), 1024).unwrap());
    }
    let mut loop_ok = true;
    for path in &paths {
        let base = maslov_index(path, 64, 1e-5).unwrap();
        audit(path, base.index);
        for k in -2..=2 {
            let shifted = prepend_loops(path, k);
            let res = maslov_index(&shifted, 64, 1e-5).unwrap();
            loop_ok &= res.index == base.index + 2 * k && res.degenerate == base.degenerate;
        }
    }
    check(&mut c, "loop axiom shifts the index by 2 per turn", loop_ok);

    // Reversal axiom: the reversed-inverted path has the opposite index.
    let mut rng = ChaCha8Rng::seed_from_u64(1002);
    let mut reversal_ok = true;
    let mut checked = 0;
    while checked < 20 {
        let s = random_symmetric(&mut rng);
        if s.determinant().abs() < 1e-3 {
            continue;
        }
        let path = exp_js_path(s, 1024).unwrap();
        let res = maslov_index(&path, 64, 1e-5).unwrap();
        audit(&path, res.index);
        let rev = reversed_inverted(&path);
        let res_rev = maslov_index(&rev, 64, 1e-5).unwrap();
        audit(&rev, res_rev.index);
        reversal_ok &= res_rev.index == -res.index;
        checked += 1;
    }
    check(&mut c, "reversal axiom negates the index (20 paths)", reversal_ok);

    // Signature axiom: μ(exp(tJS)) = sig(S)/2 for nondegenerate S.
    let mut rng = ChaCha8Rng::seed_from_u64(1003);
    let mut signature_ok = true;
    let mut drawn = 0;
    while drawn < 50 {
        let s = random_symmetric(&mut rng);
        if s.determinant().abs() < 1e-3 {
            continue;
        }
        let path = exp_js_path(s, 1024).unwrap();
        let res = maslov_index(&path, 64, 1e-5).unwrap();
        audit(&path, res.index);
        signature_ok &= res.index == signature2(&s) / 2;
        drawn += 1;
    }
    check(&mut c, "signature axiom on 50 matrices", signature_ok);

    check(&mut c, format!("direction spread < π on all {audited} paths"), spread_ok);
    check(&mut c, "every rotation < (μ+1)π", bound_ok);
    conclude(4, &c);
}

// -- Criterion 5: self-linking numbers ------------------------------------

#[test]
fn acceptance_5_self_linking_values_and_invariance() {
    let mut c = Checks::new();
    let hopf = TransverseKnot::hopf().unwrap();
    let primary = knot::self_linking_detailed(&hopf, 1e-2, 512).unwrap();
    check(&mut c, format!("hopf sl {} = −1", primary.rounded), primary.rounded == -1);
    check(
        &mut c,
        format!("hopf residual {} < 0.05", primary.residual),
        primary.residual < 0.05,
    );

    let tight = knot::self_linking_opts(&hopf, 5e-3, 1024, 0).unwrap();
    check(&mut c, "sl invariant under ε → ε/2 with finer quadrature", tight.rounded == -1);
    let other_pole = knot::self_linking_opts(&hopf, 1e-2, 512, 1).unwrap();
    check(&mut c, "sl invariant under a stereographic pole change", other_pole.rounded == -1);

    let torus = TransverseKnot::torus_orbit(2, 3, 1.0).unwrap();
    let torus_sl = knot::self_linking_detailed(&torus, DEFAULT_PUSHOFF, DEFAULT_LINK_QUAD).unwrap();
    check(&mut c, format!("(2,3) torus orbit sl {} = +1", torus_sl.rounded), torus_sl.rounded == 1);

    let all_odd = [primary.rounded, tight.rounded, other_pole.rounded, torus_sl.rounded]
        .iter()
        .all(|sl| sl.rem_euclid(2) == 1);
    check(&mut c, "every self-linking number is odd", all_odd);
    conclude(5, &c);
}

// -- Criterion 6: the identity sl = 2·Int − 1 on three fillings -----------

#[test]
fn acceptance_6_identity_on_three_fillings() {
    let mut c = Checks::new();

    let hopf = TransverseKnot::hopf().unwrap();
    let flat = linear_filling(&hopf, None, 96, 384).unwrap();
    let rep = verify_theorem1(&hopf, &flat, 1e-2, 512, 1e-6).unwrap();
    check(&mut c, format!("hopf sl {} = −1", rep.self_linking), rep.self_linking == -1);
    check(&mut c, format!("hopf flat-disc index {} = 0", rep.tangential_index), rep.tangential_index == 0);
    check(&mut c, "hopf identity holds", rep.identity_holds);
    let n = self_intersection_number(&hopf, Some(&flat)).unwrap();
    check(&mut c, format!("hopf self-intersection number {n} = 0"), n == 0);

    let torus = TransverseKnot::torus_orbit(2, 3, 1.0).unwrap();
    let disc = linear_filling(&torus, None, 96, 384).unwrap();
    let rep = verify_theorem1(&torus, &disc, DEFAULT_PUSHOFF, 1536, 1e-6).unwrap();
    check(&mut c, format!("torus sl {} = +1", rep.self_linking), rep.self_linking == 1);
    check(&mut c, format!("torus disc index {} = 1", rep.tangential_index), rep.tangential_index == 1);
    check(&mut c, "torus identity holds", rep.identity_holds);
    let n = self_intersection_number(&torus, Some(&disc)).unwrap();
    check(&mut c, format!("torus self-intersection number {n} = 2"), n == 2);

    let e = StarShapedSurface::ellipsoid(1.0, 1.2).unwrap();
    let orbit = find_periodic_orbit(&e, Vec4::new(1.0, 0.0, 0.0, 0.0), 3.0, 1e-10).unwrap();
    let k = TransverseKnot::from_orbit(&orbit).unwrap();
    let v = find_filling_direction(&k, 64).unwrap();
    let emb = embedded_filling(&k, v, 48, 192).unwrap();
    let rep = verify_theorem1(&k, &emb, 1e-2, 512, 1e-6).unwrap();
    check(&mut c, format!("orbit sl {} = −1", rep.self_linking), rep.self_linking == -1);
    check(&mut c, format!("embedded-disc index {} = 0", rep.tangential_index), rep.tangential_index == 0);
    check(&mut c, "embedded disc is symplectic", rep.symplectic_min > 0.0);
    check(&mut c, "orbit identity holds", rep.identity_holds);
    conclude(6, &c);
}

// -- Criterion 7: pinched family sweep through the binary ------------------

#[test]
fn acceptance_7_pinched_family_sweep() {
    let mut c = Checks::new();
    for ratio in [1.0_f64, 1.2, 1.4] {
        // Pinching ratio (b+c)/a at the tight pole equals 2r₁²/r₂², so the
        // family member at `ratio` is the ellipsoid with r₂ = √(2/ratio).
        let r2 = (2.0 / ratio).sqrt();
        let out = run_binary(&format!(
            "[surface] kind=ellipsoid r1=1 r2={r2}\n[task] name=verify-thm2\n"
        ));
        let code = out.status.code();
        check(&mut c, format!("ratio {ratio}: exit code {code:?} = 0"), code == Some(0));
        let v = verdict(&out);
        check(&mut c, format!("ratio {ratio}: pinching passes"), v["results"]["pinching"] == Value::from(true));
        check(
            &mut c,
            format!("ratio {ratio}: index {} = 3", v["results"]["maslov"]),
            v["results"]["maslov"] == Value::from(3),
        );
        check(&mut c, format!("ratio {ratio}: embedded disc"), v["results"]["embedded"] == Value::from(true));
        check(
            &mut c,
            format!("ratio {ratio}: sl {} = −1", v["results"]["sl"]),
            v["results"]["sl"] == Value::from(-1),
        );
        let kappa_margin = v["results"]["kappa_margin"].as_f64().unwrap_or(-1.0);
        check(
            &mut c,
            format!("ratio {ratio}: total curvature below 4π (margin {kappa_margin})"),
            kappa_margin > 0.0,
        );
        check(&mut c, format!("ratio {ratio}: verdict passes"), v["pass"] == Value::from(true));
    }
    conclude(7, &c);
}

// -- Criterion 8: the unpinched ellipsoid fails cleanly ---------------------

#[test]
fn acceptance_8_unpinched_ellipsoid_fails() {
    let mut c = Checks::new();
    let e = StarShapedSurface::ellipsoid(1.0, 3.0).unwrap();
    let data = e.principal_curvatures(Vec4::new(1.0, 0.0, 0.0, 0.0)).unwrap();
    check(
        &mut c,
        format!("pole margin {} = −7/9", data.margin),
        near(data.margin, -7.0 / 9.0, 1e-6),
    );
    let scan = e.pinching_scan(512).unwrap();
    check(&mut c, "pinching scan fails", !scan.pass);
    check(
        &mut c,
        format!("scan minimum {} < −0.9", scan.min_margin),
        scan.min_margin < -0.9,
    );

    let out = run_binary("[surface] kind=ellipsoid r1=1 r2=3\n[task] name=verify-thm2\n");
    check(&mut c, format!("exit code {:?} = 3", out.status.code()), out.status.code() == Some(3));
    let v = verdict(&out);
    check(&mut c, "verdict reports the pinching failure", v["results"]["pinching"] == Value::from(false));
    check(&mut c, "verdict does not pass", v["pass"] == Value::from(false));
    conclude(8, &c);
}

// -- Criterion 9: refinement invariance -------------------------------------

#[test]
fn acceptance_9_refinement_invariance() {
    let mut c = Checks::new();

    let hopf = TransverseKnot::hopf().unwrap();
    let coarse = knot::self_linking(&hopf, 1e-2, 512).unwrap();
    let fine = knot::self_linking(&hopf, 1e-2, 1024).unwrap();
    check(&mut c, format!("hopf sl {coarse} = {fine} under 2× quadrature"), coarse == fine);
    let d1 = linear_filling(&hopf, None, 96, 384).unwrap();
    let d2 = linear_filling(&hopf, None, 192, 768).unwrap();
    let (i1, _) = tangential_index(&d1, 1e-6).unwrap();
    let (i2, _) = tangential_index(&d2, 1e-6).unwrap();
    check(&mut c, format!("hopf disc index {i1} = {i2} under 2× grid"), i1 == i2);

    let torus = TransverseKnot::torus_orbit(2, 3, 1.0).unwrap();
    let coarse = knot::self_linking(&torus, DEFAULT_PUSHOFF, 1536).unwrap();
    let fine = knot::self_linking(&torus, DEFAULT_PUSHOFF, 3072).unwrap();
    check(&mut c, format!("torus sl {coarse} = {fine} under 2× quadrature"), coarse == fine);
    let d1 = linear_filling(&torus, None, 96, 384).unwrap();
    let d2 = linear_filling(&torus, None, 192, 768).unwrap();
    let (i1, _) = tangential_index(&d1, 1e-6).unwrap();
    let (i2, _) = tangential_index(&d2, 1e-6).unwrap();
    check(&mut c, format!("torus disc index {i1} = {i2} under 2× grid"), i1 == i2);

    let e = StarShapedSurface::ellipsoid(1.0, 1.2).unwrap();
    let orbit = find_periodic_orbit(&e, Vec4::new(1.0, 0.0, 0.0, 0.0), 3.0, 1e-10).unwrap();
    let k = TransverseKnot::from_orbit(&orbit).unwrap();
    let coarse = knot::self_linking(&k, 1e-2, 512).unwrap();
    let fine = knot::self_linking(&k, 1e-2, 1024).unwrap();
    check(&mut c, format!("orbit sl {coarse} = {fine} under 2× quadrature"), coarse == fine);
    let v = find_filling_direction(&k, 64).unwrap();
    let d1 = embedded_filling(&k, v, 48, 192).unwrap();
    let d2 = embedded_filling(&k, v, 96, 384).unwrap();
    let (i1, _) = tangential_index(&d1, 1e-6).unwrap();
    let (i2, _) = tangential_index(&d2, 1e-6).unwrap();
    check(&mut c, format!("orbit disc index {i1} = {i2} under 2× grid"), i1 == i2);
    conclude(9, &c);
}
