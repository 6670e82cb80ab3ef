use bismut_core::catalog::{generic_hermitian, standard_j};
use bismut_core::tensor::{
    exterior_derivative, hodge_star, j_trace, orthonormal_frame, tensor_norm_sq, Frame, Orientation,
};
use bismut_core::{ChartDomain, Flavor, Geometry, Point, PointTensor, TensorField};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn spd(dim: usize, entries: &[f64]) -> DMatrix<f64> {
    let a = DMatrix::from_iterator(dim, dim, entries.iter().cloned());
    a.transpose() * &a + DMatrix::identity(dim, dim) * 0.5
}

fn hermitian(dim: usize, entries: &[f64]) -> DMatrix<f64> {
    let h = spd(dim, entries);
    let j = standard_j(dim);
    &h + j.transpose() * &h * &j
}

fn random_form(dim: usize, degree: usize, entries: &[f64]) -> PointTensor {
    let raw = PointTensor::from_components(dim, degree, entries[..dim.pow(degree as u32)].to_vec());
    raw.antisymmetrized().into_form()
}

fn orthogonal(dim: usize, entries: &[f64]) -> DMatrix<f64> {
    DMatrix::from_iterator(dim, dim, entries.iter().cloned()).qr().q()
}

fn coords(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..std::f64::consts::TAU, dim)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn d_squared_vanishes(c in prop::collection::vec(-1.0f64..1.0, 16), x in coords(4)) {
        // a trigonometric one-form with random coefficients
        let field = TensorField::new("alpha", 1, true, ChartDomain::torus(4), move |p| {
            let x = &p.coords;
            Ok(PointTensor::from_fn(4, 1, |i| {
                (0..4).map(|k| c[4 * i[0] + k] * (x[k] + 0.3 * x[(k + i[0]) % 4]).sin()).sum()
            }))
        });
        let d_alpha = {
            let field = field.clone();
            TensorField::new("d_alpha", 2, true, ChartDomain::torus(4), move |p| exterior_derivative(&field, p, 1e-4))
        };
        let dd = exterior_derivative(&d_alpha, &Point::new(x), 1e-4).unwrap();
        prop_assert!(dd.max_abs() < 1e-6, "{}", dd.max_abs());
    }

    #[test]
    fn frame_is_orthonormal(entries in prop::collection::vec(-1.0f64..1.0, 36)) {
        let g = spd(6, &entries);
        let frame = orthonormal_frame(&g, &Point::new(vec![0.0; 6])).unwrap();
        let gram = frame.gram(&g);
        prop_assert!((gram - DMatrix::<f64>::identity(6, 6)).amax() < 1e-12);
    }

    #[test]
    fn hodge_star_squares_to_sign(
        entries in prop::collection::vec(-1.0f64..1.0, 16),
        form in prop::collection::vec(-1.0f64..1.0, 64),
        degree in 1usize..4,
    ) {
        let g = spd(4, &entries);
        let p = Point::new(vec![0.0; 4]);
        let alpha = random_form(4, degree, &form);
        let star = hodge_star(&alpha, &g, Orientation::Coordinate, &p).unwrap();
        let twice = hodge_star(&star, &g, Orientation::Coordinate, &p).unwrap();
        let sign = if (degree * (4 - degree)) % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert!(twice.max_abs_diff(&alpha.scaled(sign)) < 1e-9);
        // * is an isometry; the full-index norm carries p! and (4−p)!
        let frame = orthonormal_frame(&g, &p).unwrap();
        prop_assume!(tensor_norm_sq(&alpha, &frame) > 1e-6);
        let ratio = tensor_norm_sq(&star, &frame) / tensor_norm_sq(&alpha, &frame);
        let expected = (1..=4 - degree).product::<usize>() as f64 / (1..=degree).product::<usize>() as f64;
        prop_assert!((ratio - expected).abs() < 1e-9 * expected.max(1.0));
    }

    #[test]
    fn j_trace_is_frame_independent(
        entries in prop::collection::vec(-1.0f64..1.0, 36),
        rotation in prop::collection::vec(-1.0f64..1.0, 36),
        form in prop::collection::vec(-1.0f64..1.0, 36),
    ) {
        let g = hermitian(6, &entries);
        let j = standard_j(6);
        let p = Point::new(vec![0.0; 6]);
        let frame = orthonormal_frame(&g, &p).unwrap();
        let q = orthogonal(6, &rotation);
        let rotated = Frame {
            vectors: (0..6)
                .map(|i| (0..6).map(|a| (0..6).map(|k| frame.vectors[k][a] * q[(k, i)]).sum()).collect())
                .collect(),
        };
        prop_assert!((rotated.gram(&g) - DMatrix::<f64>::identity(6, 6)).amax() < 1e-10);
        let alpha = PointTensor::from_components(6, 2, form);
        let a = j_trace(&alpha, &j, &frame).unwrap();
        let b = j_trace(&alpha, &j, &rotated).unwrap();
        prop_assert!((a - b).abs() < 1e-10 * (1.0 + a.abs()));
        prop_assert!((tensor_norm_sq(&alpha, &frame) - tensor_norm_sq(&alpha, &rotated)).abs() < 1e-9);
    }

    #[test]
    fn torsions_have_the_right_type(seed in any::<u64>(), x in coords(6)) {
        let m = generic_hermitian(6, 0.15, seed).unwrap();
        let geo = Geometry::new(&m, 1e-4).unwrap();
        let p = Point::new(x);
        let j = geo.j(&p).unwrap();
        let frame = geo.frame(&p).unwrap();
        let norm = |t: &PointTensor| bismut_core::tensor::frame_max_abs(t, &frame);
        // T is a 3-form of type (2,1)+(1,2)
        let t = geo.torsion(&p).unwrap();
        prop_assert!(t.antisymmetry_defect() < 1e-12);
        let jj_ = t.transform_slot(0, &j).transform_slot(1, &j);
        let j_j = t.transform_slot(0, &j).transform_slot(2, &j);
        let _jj = t.transform_slot(1, &j).transform_slot(2, &j);
        prop_assert!(norm(&(&(&(&jj_ + &j_j) + &_jj) - &t)) < 1e-9);
        // C(JX, Y) = J C(X, Y)
        let c = geo.chern_torsion(&p).unwrap();
        prop_assert!(norm(&(&c.transform_slot(0, &j) + &c.transform_slot(2, &j))) < 1e-9);
        // both Hermitian connections preserve g and J
        for flavor in [Flavor::Bismut, Flavor::Chern] {
            let ng = geo.covariant_derivative(flavor, &geo.metric_field(), &p).unwrap();
            let nw = geo.covariant_derivative(flavor, &geo.kahler_field(), &p).unwrap();
            prop_assert!(norm(&ng) < 1e-7 && norm(&nw) < 1e-7);
        }
    }
}
