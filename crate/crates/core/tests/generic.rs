//! Identities on metrics with no special structure, where every term of
//! every identity is nonzero.

use std::sync::Arc;

use bismut_core::catalog::generic_hermitian;
use bismut_core::classify::classify;
use bismut_core::identities::{full_suite, verify_dim4, verify_lck, verify_tri2, Tolerances};
use bismut_core::sampling::sample_points;
use bismut_core::tensor::{frame_max_abs, tensor_norm_sq};
use bismut_core::{conformal_rescale, get_manifold, curvature_pack, Geometry, GeometryError, Point};

fn points(geo: &Geometry, n: usize) -> Vec<Point> {
    sample_points(geo.manifold().domain(), n, 11, 0.05)
}

#[test]
fn full_suite_on_generic_metrics() {
    let tol = Tolerances::default();
    for (dim, amplitude) in [(4, 0.2), (6, 0.15)] {
        let m = generic_hermitian(dim, amplitude, 5).unwrap();
        let geo = Geometry::new(&m, 1e-4).unwrap();
        let pts = points(&geo, 6);
        let entries = full_suite(&geo, &pts, &tol).unwrap();
        for e in &entries {
            assert!(e.pass, "generic_{dim} {}: {:.3e}", e.identity_name, e.max_residual);
        }
        if dim == 4 {
            assert!(entries.iter().any(|e| e.identity_name == "weyl_trace"));
        }
    }
}

#[test]
fn generic_metric_is_not_special() {
    let m = generic_hermitian(6, 0.15, 5).unwrap();
    let geo = Geometry::new(&m, 1e-4).unwrap();
    let pts = points(&geo, 4);
    let f = classify(&geo, &pts, 1e-5).unwrap();
    for flag in [f.kahler, f.strong_kt, f.almost_strong_kt, f.balanced, f.lck, f.su_holonomy_indicator] {
        assert!(!flag.value && flag.max_residual > 1e-2, "{f:?}");
    }
    assert!(matches!(verify_lck(&geo, &pts, &Tolerances::default()), Err(GeometryError::Precondition(_))));
    assert!(matches!(
        verify_dim4(&geo, &pts, &Tolerances::default()),
        Err(GeometryError::UnsupportedDimension(6))
    ));
}

#[test]
fn conformal_trace_with_non_balanced_parent() {
    // a parent with θ_G ≠ 0 tells the coefficient of <θ_G, dF> apart
    let parent = generic_hermitian(6, 0.15, 2).unwrap();
    let m = conformal_rescale(&parent, "generic_6_rescaled", Arc::new(|x: &[f64]| 0.2 * (x[1] + 0.5 * x[4]).cos()));
    let geo = Geometry::new(&m, 1e-4).unwrap();
    let pts = points(&geo, 6);
    let parent_geo = Geometry::new(&parent, 1e-4).unwrap();
    let theta_g = pts
        .iter()
        .map(|p| frame_max_abs(&parent_geo.lee_form(p).unwrap(), &parent_geo.frame(p).unwrap()))
        .fold(0.0, f64::max);
    assert!(theta_g > 0.05);
    let e = verify_tri2(&geo, &pts, &Tolerances::default()).unwrap();
    assert!(e.pass, "{e:?}");
}

#[test]
fn hopf_and_su2xu1_share_scalar_invariants() {
    // both are ℝ × S³(1) with the Bismut-flat structure
    let hopf = Geometry::new(&get_manifold("hopf_standard").unwrap(), 1e-4).unwrap();
    let group = Geometry::new(&get_manifold("su2xu1").unwrap(), 1e-4).unwrap();
    let invariants = |geo: &Geometry, p: &Point| {
        let frame = geo.frame(p).unwrap();
        let pack = curvature_pack(geo, p).unwrap();
        [
            tensor_norm_sq(&geo.torsion(p).unwrap(), &frame),
            tensor_norm_sq(&geo.lee_form(p).unwrap(), &frame),
            tensor_norm_sq(&geo.chern_torsion(p).unwrap(), &frame),
            pack.ricg.trace_pair(0, 1, &geo.inverse_metric(p).unwrap()).value(),
            pack.b,
            pack.u,
        ]
    };
    let reference = invariants(&hopf, &points(&hopf, 1)[0]);
    // |T|² = 24 (T = 2 vol), |θ|² = 4, Scal^g = 6
    assert!((reference[0] - 24.0).abs() < 1e-6, "{reference:?}");
    assert!((reference[1] - 4.0).abs() < 1e-6);
    assert!((reference[3] - 6.0).abs() < 1e-5);
    for geo in [&hopf, &group] {
        for p in points(geo, 4) {
            let v = invariants(geo, &p);
            for (a, b) in v.iter().zip(&reference) {
                assert!((a - b).abs() < 1e-5, "{}: {v:?} vs {reference:?}", geo.manifold().name());
            }
        }
    }
}
