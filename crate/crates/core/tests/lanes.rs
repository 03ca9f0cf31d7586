//! The data-parallel lane must be bit-identical to the sequential one: every
//! parallel reduction in the crate maps an index range in order and folds
//! sequentially, so switching lanes may change timing but never results.
//!
//! This comparison lives in its own integration binary because
//! `force_sequential` is process-global: nothing else may run concurrently.

use reeb_lab_core::filling::tangential_index;
use reeb_lab_core::knot::{self, TransverseKnot};
use reeb_lab_core::par;
use reeb_lab_core::surface::StarShapedSurface;
use reeb_lab_core::filling::ImmersedDisc;
use reeb_lab_core::Vec4;

fn whitney_disc() -> ImmersedDisc {
    let half = 0.5 * std::f64::consts::PI;
    ImmersedDisc::from_map_with_tangents(
        move |x: f64, y: f64| {
            Vec4::new(
                x * x - 0.25,
                x * x * x - 0.25 * x,
                y * (half * x).cos(),
                y * (half * x).sin(),
            )
        },
        move |x: f64, y: f64| {
            (
                Vec4::new(
                    2.0 * x,
                    3.0 * x * x - 0.25,
                    -half * y * (half * x).sin(),
                    half * y * (half * x).cos(),
                ),
                Vec4::new(0.0, 0.0, (half * x).cos(), (half * x).sin()),
            )
        },
        32,
        128,
    )
    .expect("whitney disc")
}

struct Snapshot {
    pinching_margin: u64,
    linking_raw: u64,
    curvature: u64,
    index: i64,
    double_point: [u64; 4],
}

fn snapshot() -> Snapshot {
    let surface = StarShapedSurface::ellipsoid(1.0, 1.3).expect("ellipsoid");
    let pinch = surface.pinching_scan(512).expect("pinching");
    let hopf = TransverseKnot::hopf().expect("hopf");
    let link = knot::self_linking_detailed(&hopf, 1e-2, 512).expect("linking");
    let torus = TransverseKnot::torus_orbit(2, 3, 1.0).expect("torus");
    let kappa = knot::total_curvature(&torus).expect("curvature");
    let (index, records) = tangential_index(&whitney_disc(), 1e-6).expect("index");
    assert_eq!(records.len(), 1);
    let p = records[0].point;
    Snapshot {
        pinching_margin: pinch.min_margin.to_bits(),
        linking_raw: link.raw.to_bits(),
        curvature: kappa.to_bits(),
        index,
        double_point: [
            p[0].to_bits(),
            p[1].to_bits(),
            p[2].to_bits(),
            p[3].to_bits(),
        ],
    }
}

#[test]
fn parallel_and_sequential_lanes_agree_bitwise() {
    par::force_sequential(false);
    let fast = snapshot();
    par::force_sequential(true);
    let slow = snapshot();
    par::force_sequential(false);

    assert_eq!(fast.pinching_margin, slow.pinching_margin);
    assert_eq!(fast.linking_raw, slow.linking_raw);
    assert_eq!(fast.curvature, slow.curvature);
    assert_eq!(fast.index, slow.index);
    assert_eq!(fast.double_point, slow.double_point);
}
