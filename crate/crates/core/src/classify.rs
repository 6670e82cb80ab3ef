//! Structure-class flags, hypercomplex checks and the pointwise
//! hypotheses of the vanishing theorems.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use crate::catalog::HermitianManifold;
use crate::connections::{Flavor, Geometry};
use crate::curvature::{d_torsion, lambda_omega, riemann};
use crate::error::{GeometryError, Result};
use crate::identities::{kappa, max_over, ricci_form, torsion_square};
use crate::report::real;
use crate::tensor::{frame_max_abs, j_conjugate, j_trace, tensor_norm_sq, wedge, Point, PointTensor};

/// A boolean verdict with the quantity it was decided on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Flag {
    pub value: bool,
    #[serde(serialize_with = "real")]
    pub max_residual: f64,
}

impl Flag {
    fn below(max_residual: f64, tol: f64) -> Self {
        Flag {
            value: max_residual < tol,
            max_residual,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HktFlags {
    pub hkt: bool,
    #[serde(serialize_with = "real")]
    pub quaternion_residual: f64,
    /// `max ‖T_a − T_b‖`, the torsions `d_a^cΩ_a` of the three structures
    #[serde(serialize_with = "real")]
    pub common_torsion_residual: f64,
    #[serde(serialize_with = "real")]
    pub lee_form_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureFlags {
    #[serde(serialize_with = "real")]
    pub tolerance: f64,
    /// `T = 0`
    pub kahler: Flag,
    /// `dT = 0`
    pub strong_kt: Flag,
    /// `λ^Ω = 0`
    pub almost_strong_kt: Flag,
    /// `θ = 0`
    pub balanced: Flag,
    /// `T = (1/(n−1)) Jθ∧Ω`
    pub lck: Flag,
    /// `ρ = 0` and every `R(X,Y)` commutes with `J`; necessary for
    /// restricted holonomy in `SU(n)`, not sufficient
    pub su_holonomy_indicator: Flag,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hkt: Option<HktFlags>,
}

struct PointFlags {
    torsion: f64,
    d_torsion: f64,
    lambda: f64,
    lee: f64,
    lck: f64,
    rho: f64,
    commutator: f64,
}

fn point_flags(geo: &Geometry, p: &Point) -> Result<PointFlags> {
    let frame = geo.frame(p)?;
    let j = geo.j(p)?;
    let t = geo.torsion(p)?;
    let n = geo.manifold().n() as f64;
    let lck_form = wedge(&geo.j_lee_form(p)?, &geo.kahler_form(p)?).scaled(1.0 / (n - 1.0));
    let r = riemann(geo, Flavor::Bismut, p)?;
    let rj = r.transform_slot(2, &j).transform_slot(3, &j);
    Ok(PointFlags {
        torsion: frame_max_abs(&t, &frame),
        d_torsion: frame_max_abs(&d_torsion(geo, p)?, &frame),
        lambda: frame_max_abs(&lambda_omega(geo, p)?.0, &frame),
        lee: frame_max_abs(&geo.lee_form_unchecked(p)?, &frame),
        lck: frame_max_abs(&(&t - &lck_form), &frame),
        rho: frame_max_abs(&ricci_form(geo, Flavor::Bismut, p)?, &frame),
        commutator: frame_max_abs(&(&rj - &r), &frame),
    })
}

/// Classify the structure from its values at the sampled points.
pub fn classify(geo: &Geometry, points: &[Point], tol: f64) -> Result<StructureFlags> {
    if points.is_empty() {
        return Err(GeometryError::Precondition("classification needs at least one point".into()));
    }
    let name = geo.manifold().name().to_string();
    let per_point: Vec<Result<PointFlags>> = points
        .par_iter()
        .map(|p| point_flags(geo, p).map_err(|e| e.in_check(&name, "classify", &p.coords)))
        .collect();
    let mut worst = [0.0f64; 7];
    for f in per_point {
        let f = f?;
        let vals = [f.torsion, f.d_torsion, f.lambda, f.lee, f.lck, f.rho, f.commutator];
        for (w, v) in worst.iter_mut().zip(vals) {
            if v.is_nan() {
                return Err(GeometryError::numeric(&[], format!("NaN while classifying `{name}`")));
            }
            *w = w.max(v);
        }
    }
    let hkt = if geo.manifold().has_hypercomplex() {
        Some(check_hkt(geo.manifold(), points, geo.step(), tol)?)
    } else {
        None
    };
    Ok(StructureFlags {
        tolerance: tol,
        kahler: Flag::below(worst[0], tol),
        strong_kt: Flag::below(worst[1], tol),
        almost_strong_kt: Flag::below(worst[2], tol),
        balanced: Flag::below(worst[3], tol),
        lck: Flag::below(worst[4], tol),
        su_holonomy_indicator: Flag::below(worst[5].max(worst[6]), tol),
        hkt,
    })
}

/// Quaternion relations, common torsion and equal Lee forms of a
/// hypercomplex triple.
pub fn check_hkt(m: &HermitianManifold, points: &[Point], step: f64, tol: f64) -> Result<HktFlags> {
    if !m.has_hypercomplex() {
        return Err(GeometryError::Precondition(format!(
            "`{}` carries no hypercomplex triple",
            m.name()
        )));
    }
    let members = [m.with_member(1)?, m.with_member(2)?, m.with_member(3)?];
    let geos: Vec<Geometry> = members
        .iter()
        .map(|mm| Geometry::new(mm, step))
        .collect::<Result<_>>()?;
    let (quaternion_residual, _) = max_over(points, |p| {
        Ok(m.check_invariants(p, step)?.quaternion.unwrap_or(0.0))
    })?;
    let pairwise = |f: &(dyn Fn(&Geometry, &Point) -> Result<PointTensor> + Sync)| {
        max_over(points, |p| {
            let frame = geos[0].frame(p)?;
            let vals: Vec<PointTensor> = geos.iter().map(|g| f(g, p)).collect::<Result<_>>()?;
            let mut worst: f64 = 0.0;
            for a in 0..3 {
                for b in a + 1..3 {
                    worst = worst.max(frame_max_abs(&(&vals[a] - &vals[b]), &frame));
                }
            }
            Ok(worst)
        })
        .map(|(v, _)| v)
    };
    let common_torsion_residual = pairwise(&|g, p| g.torsion(p))?;
    let lee_form_residual = pairwise(&|g, p| g.lee_form(p))?;
    Ok(HktFlags {
        hkt: quaternion_residual < tol && common_torsion_residual < tol && lee_form_residual < tol,
        quaternion_residual,
        common_torsion_residual,
        lee_form_residual,
    })
}

/// Pointwise quantities in the hypotheses of the vanishing theorems.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VanishingHypotheses {
    /// `min (b + |C|² − ½h)`
    #[serde(serialize_with = "real")]
    pub plurigenera_margin: f64,
    /// smallest eigenvalue of `<<X,Y>>` over all points
    #[serde(serialize_with = "real")]
    pub quad_form_min_eig: f64,
    /// `min 2u`, equal to the margin by the Chern trace identity
    #[serde(serialize_with = "real")]
    pub chern_trace_min: f64,
}

/// `<<X,Y>> = ρ^{1,1}(JX,Y) + <i_XC,i_YC> − ¼λ^Ω(JX,Y)` in an orthonormal frame,
/// symmetrized.
pub fn quadratic_form(geo: &Geometry, p: &Point) -> Result<DMatrix<f64>> {
    let j = geo.j(p)?;
    let ginv = geo.inverse_metric(p)?;
    let rho = ricci_form(geo, Flavor::Bismut, p)?;
    let rho11 = (&rho + &j_conjugate(&rho, &j)).scaled(0.5);
    let (lambda, _) = lambda_omega(geo, p)?;
    let q = &(&rho11.transform_slot(0, &j) + &torsion_square(&geo.chern_torsion(p)?, &ginv))
        - &lambda.transform_slot(0, &j).scaled(0.25);
    let qf = geo.frame(p)?.components_of(&q).to_matrix();
    Ok((&qf + qf.transpose()) * 0.5)
}

pub fn vanishing_hypotheses(geo: &Geometry, points: &[Point]) -> Result<VanishingHypotheses> {
    let name = geo.manifold().name().to_string();
    let per_point: Vec<Result<(f64, f64, f64)>> = points
        .par_iter()
        .map(|p| {
            let run = || -> Result<(f64, f64, f64)> {
                let j = geo.j(p)?;
                let frame = geo.frame(p)?;
                let b = j_trace(&ricci_form(geo, Flavor::Bismut, p)?, &j, &frame)?;
                let c2 = tensor_norm_sq(&geo.chern_torsion(p)?, &frame);
                let (_, h) = lambda_omega(geo, p)?;
                let two_u = j_trace(&kappa(geo, p)?, &j, &frame)?;
                let eig = SymmetricEigen::new(quadratic_form(geo, p)?).eigenvalues.min();
                Ok((b + c2 - 0.5 * h, eig, two_u))
            };
            run().map_err(|e| e.in_check(&name, "vanishing_hypotheses", &p.coords))
        })
        .collect();
    if per_point.is_empty() {
        return Err(GeometryError::Precondition("empty point set".into()));
    }
    let mut out = VanishingHypotheses {
        plurigenera_margin: f64::INFINITY,
        quad_form_min_eig: f64::INFINITY,
        chern_trace_min: f64::INFINITY,
    };
    for v in per_point {
        let (margin, eig, two_u) = v?;
        out.plurigenera_margin = out.plurigenera_margin.min(margin);
        out.quad_form_min_eig = out.quad_form_min_eig.min(eig);
        out.chern_trace_min = out.chern_trace_min.min(two_u);
    }
    Ok(out)
}

/// Small-loop transport around a coordinate plaquette.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlaquetteHolonomy {
    /// `‖HJ − JH‖∞` for the loop holonomy `H`
    #[serde(serialize_with = "real")]
    pub j_commutator: f64,
    /// `ρ(∂_a, ∂_b)` read off `(Id − H)/side²`
    #[serde(serialize_with = "real")]
    pub rho_estimate: f64,
    /// `ρ(∂_a, ∂_b)` from the curvature tensor
    #[serde(serialize_with = "real")]
    pub rho: f64,
}

/// Transport the coordinate basis with the Bismut connection around the
/// square `p → p+s∂_a → p+s∂_a+s∂_b → p+s∂_b → p` and compare the
/// holonomy with `J` and with the Ricci form.
pub fn plaquette_holonomy(geo: &Geometry, p: &Point, a: usize, b: usize, side: f64) -> Result<PlaquetteHolonomy> {
    let dim = geo.dim();
    const STEPS: usize = 16;
    let mut frame = DMatrix::<f64>::identity(dim, dim);
    let corners = [(0.0, 0.0), (side, 0.0), (side, side), (0.0, side), (0.0, 0.0)];
    let at = |s: f64, t: f64| {
        let mut x = p.coords.clone();
        x[a] += s;
        x[b] += t;
        Point::new(x)
    };
    // dV^k/dt = −Γ^k_ij ẋ^i V^j
    let rhs = |q: &Point, vel: &[f64], v: &DMatrix<f64>| -> Result<DMatrix<f64>> {
        let gamma = geo.coefficients(Flavor::Bismut, q)?;
        Ok(DMatrix::from_fn(dim, dim, |k, col| {
            let mut acc = 0.0;
            for i in 0..dim {
                if vel[i] == 0.0 {
                    continue;
                }
                for jj in 0..dim {
                    acc -= gamma.get(k, i, jj) * vel[i] * v[(jj, col)];
                }
            }
            acc
        }))
    };
    for w in corners.windows(2) {
        let (s0, t0) = w[0];
        let (s1, t1) = w[1];
        let mut vel = vec![0.0; dim];
        vel[a] = s1 - s0;
        vel[b] = t1 - t0;
        let dt = 1.0 / STEPS as f64;
        for k in 0..STEPS {
            let t = k as f64 * dt;
            let pos = |u: f64| at(s0 + u * (s1 - s0), t0 + u * (t1 - t0));
            let k1 = rhs(&pos(t), &vel, &frame)?;
            let k2 = rhs(&pos(t + 0.5 * dt), &vel, &(&frame + &k1 * (0.5 * dt)))?;
            let k3 = rhs(&pos(t + 0.5 * dt), &vel, &(&frame + &k2 * (0.5 * dt)))?;
            let k4 = rhs(&pos(t + dt), &vel, &(&frame + &k3 * dt))?;
            frame += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
        }
    }
    let j = geo.j(p)?;
    let g = geo.metric(p)?;
    let ginv = geo.inverse_metric(p)?;
    let j_commutator = (&frame * &j - &j * &frame).amax();
    // R(∂_a,∂_b) ≈ (Id − H)/side² as an endomorphism
    let endo = (DMatrix::identity(dim, dim) - &frame) / (side * side);
    // ρ(X,Y) = ½ Σ g(R(X,Y)e_i, Je_i) = ½ tr(Rᵀ g J g⁻¹)
    let rho_estimate = 0.5 * (endo.transpose() * &g * &j * &ginv).trace();
    let rho = ricci_form(geo, Flavor::Bismut, p)?.get(&[a, b]);
    Ok(PlaquetteHolonomy {
        j_commutator,
        rho_estimate,
        rho,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{conf_torus, flat_torus, hopf_standard, quaternionic_pair};
    use crate::sampling::sample_points;
    use std::sync::Arc;

    #[test]
    fn flat_torus_is_everything() {
        let m = flat_torus(4).unwrap();
        let geo = Geometry::new(&m, 1e-4).unwrap();
        let pts = sample_points(m.domain(), 4, 0, 0.05);
        let f = classify(&geo, &pts, 1e-5).unwrap();
        for flag in [f.kahler, f.strong_kt, f.almost_strong_kt, f.balanced, f.lck, f.su_holonomy_indicator] {
            assert!(flag.value);
        }
    }

    #[test]
    fn empty_point_set_is_rejected() {
        let geo = Geometry::new(&flat_torus(4).unwrap(), 1e-4).unwrap();
        assert!(matches!(classify(&geo, &[], 1e-5), Err(GeometryError::Precondition(_))));
    }

    #[test]
    fn flat_quaternionic_torus_is_hkt() {
        let (j2, j3) = quaternionic_pair();
        let m = flat_torus(4)
            .unwrap()
            .with_hypercomplex(Arc::new(move |_| j2.clone()), Arc::new(move |_| j3.clone()));
        let pts = sample_points(m.domain(), 4, 0, 0.05);
        let h = check_hkt(&m, &pts, 1e-4, 1e-5).unwrap();
        assert!(h.hkt);
    }

    #[test]
    fn hkt_needs_triple() {
        let m = hopf_standard();
        let pts = sample_points(m.domain(), 2, 0, 0.05);
        assert!(matches!(check_hkt(&m, &pts, 1e-4, 1e-5), Err(GeometryError::Precondition(_))));
    }

    #[test]
    fn plaquette_on_flat_torus_is_trivial() {
        let geo = Geometry::new(&flat_torus(4).unwrap(), 1e-4).unwrap();
        let p = Point::new(vec![0.3, 0.4, 0.5, 0.6]);
        let h = plaquette_holonomy(&geo, &p, 0, 2, 1e-2).unwrap();
        assert_eq!(h.j_commutator, 0.0);
        assert_eq!(h.rho_estimate, 0.0);
    }

    #[test]
    fn plaquette_ricci_form_matches_curvature() {
        let geo = Geometry::new(&conf_torus(6).unwrap(), 1e-4).unwrap();
        let p = Point::new(vec![0.7, 0.3, -0.2, 0.5, 0.1, 0.9]);
        let mut best: f64 = 0.0;
        for (a, b) in [(0, 1), (0, 2), (2, 3), (1, 4)] {
            let h = plaquette_holonomy(&geo, &p, a, b, 1e-2).unwrap();
            assert!(h.j_commutator < 1e-8, "{h:?}");
            assert!((h.rho_estimate - h.rho).abs() < 2e-2 * (1.0 + h.rho.abs()), "{a}{b} {h:?}");
            best = best.max(h.rho.abs());
        }
        assert!(best > 1e-2, "test needs a plane with nonzero ρ");
    }
}
