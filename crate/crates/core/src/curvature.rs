//! Curvature of the three connections and the traces built from it.

use nalgebra::DMatrix;

use crate::connections::{Flavor, Geometry};
use crate::error::{GeometryError, Result};
use crate::tensor::{exterior_derivative, hodge_star, j_trace, Coefficients, Orientation, Point, PointTensor};

/// `R(X,Y,Z,V) = g(R(X,Y)Z, V)` with `R(X,Y) = [∇_X,∇_Y] − ∇_{[X,Y]}`.
pub fn riemann(geo: &Geometry, flavor: Flavor, point: &Point) -> Result<PointTensor> {
    let dim = geo.dim();
    let gamma = geo.coefficients(flavor, point)?;
    // d_gamma[a, m, b, c] = ∂_a Γ^m_bc
    let d_gamma = geo.gradient(|q| Ok(geo.coefficients(flavor, q)?.as_array()), point)?;
    let g = geo.metric(point)?;
    let up = upper_riemann(&gamma, &d_gamma, dim);
    Ok(PointTensor::from_fn(dim, 4, |i| {
        let (a, b, c, d) = (i[0], i[1], i[2], i[3]);
        (0..dim).map(|m| g[(m, d)] * up[((m * dim + a) * dim + b) * dim + c]).sum()
    }))
}

/// `R^m_{abc} = ∂_aΓ^m_bc − ∂_bΓ^m_ac + Γ^m_ak Γ^k_bc − Γ^m_bk Γ^k_ac`, flat `[m,a,b,c]`.
fn upper_riemann(gamma: &Coefficients, d_gamma: &PointTensor, dim: usize) -> Vec<f64> {
    let mut out = vec![0.0; dim.pow(4)];
    for m in 0..dim {
        for a in 0..dim {
            for b in 0..dim {
                for c in 0..dim {
                    let mut v = d_gamma.get(&[a, m, b, c]) - d_gamma.get(&[b, m, a, c]);
                    for k in 0..dim {
                        v += gamma.get(m, a, k) * gamma.get(k, b, c) - gamma.get(m, b, k) * gamma.get(k, a, c);
                    }
                    out[((m * dim + a) * dim + b) * dim + c] = v;
                }
            }
        }
    }
    out
}

/// `Ric(X,Y) = Σ R(e_i, X, Y, e_i)`.
pub fn ricci(r: &PointTensor, inverse_metric: &DMatrix<f64>) -> PointTensor {
    r.trace_pair(0, 3, inverse_metric)
}

/// `dT` by central differences of the torsion field.
pub fn d_torsion(geo: &Geometry, point: &Point) -> Result<PointTensor> {
    exterior_derivative(&geo.torsion_field(), point, geo.step())
}

/// `λ^Ω(X,Y) = Σ dT(X,Y,e_i,Je_i)` and `h` with `2h = Σ λ^Ω(Je_i, e_i)`.
pub fn lambda_omega(geo: &Geometry, point: &Point) -> Result<(PointTensor, f64)> {
    let frame = geo.frame(point)?;
    let j = geo.j(point)?;
    let lambda = d_torsion(geo, point)?.trace_pair(2, 3, &frame.j_pairing(&j));
    let h = 0.5 * j_trace(&lambda, &j, &frame)?;
    Ok((lambda, h))
}

/// Everything curvature-derived at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvaturePack {
    /// Bismut curvature.
    pub r: PointTensor,
    /// Chern curvature.
    pub k: PointTensor,
    /// Levi-Civita curvature.
    pub rg: PointTensor,
    pub ric: PointTensor,
    pub ricg: PointTensor,
    pub rho: PointTensor,
    pub rho_d: PointTensor,
    pub kappa: PointTensor,
    /// `b = Σ ρ(Je_i, e_i)`
    pub b: f64,
    /// `u`, with `2u = Σ ρ^D(Je_i, e_i)`
    pub u: f64,
    pub scal_nabla: f64,
    pub lambda_omega: PointTensor,
    pub h: f64,
}

pub fn curvature_pack(geo: &Geometry, point: &Point) -> Result<CurvaturePack> {
    let ginv = geo.inverse_metric(point)?;
    let j = geo.j(point)?;
    let frame = geo.frame(point)?;
    let pairing = frame.j_pairing(&j);
    let r = riemann(geo, Flavor::Bismut, point)?;
    let k = riemann(geo, Flavor::Chern, point)?;
    let rg = riemann(geo, Flavor::LeviCivita, point)?;
    let ric = ricci(&r, &ginv);
    let ricg = ricci(&rg, &ginv);
    let rho = r.trace_pair(2, 3, &pairing).scaled(0.5).into_form();
    let rho_d = k.trace_pair(2, 3, &pairing).scaled(0.5).into_form();
    let kappa = k.trace_pair(0, 1, &pairing).scaled(0.5).into_form();
    let b = j_trace(&rho, &j, &frame)?;
    let u = 0.5 * j_trace(&rho_d, &j, &frame)?;
    let scal_nabla = ric.trace_pair(0, 1, &ginv).value();
    let (lambda_omega, h) = lambda_omega(geo, point)?;
    Ok(CurvaturePack {
        r,
        k,
        rg,
        ric,
        ricg,
        rho,
        rho_d,
        kappa,
        b,
        u,
        scal_nabla,
        lambda_omega,
        h,
    })
}

/// `(h⊙g)_{abcd} = h_ad g_bc + h_bc g_ad − h_ac g_bd − h_bd g_ac`.
fn kulkarni_nomizu(h: &PointTensor, g: &DMatrix<f64>) -> PointTensor {
    PointTensor::from_fn(h.dim(), 4, |i| {
        let (a, b, c, d) = (i[0], i[1], i[2], i[3]);
        h.get(&[a, d]) * g[(b, c)] + h.get(&[b, c]) * g[(a, d)]
            - h.get(&[a, c]) * g[(b, d)]
            - h.get(&[b, d]) * g[(a, c)]
    })
}

/// Weyl tensor of the Levi-Civita curvature.
pub fn weyl(geo: &Geometry, point: &Point) -> Result<PointTensor> {
    let m = geo.dim() as f64;
    let g = geo.metric(point)?;
    let ginv = geo.inverse_metric(point)?;
    let rg = riemann(geo, Flavor::LeviCivita, point)?;
    let ric = ricci(&rg, &ginv);
    let s = ric.trace_pair(0, 1, &ginv).value();
    let gt = PointTensor::from_matrix(&g);
    let w = &rg - &kulkarni_nomizu(&ric, &g).scaled(1.0 / (m - 2.0));
    Ok(&w + &kulkarni_nomizu(&gt, &g).scaled(s / (2.0 * (m - 1.0) * (m - 2.0))))
}

/// Hodge star applied to the slot pair starting at `first` of a (0,4)-tensor.
fn star_pair(t: &PointTensor, first: usize, g: &DMatrix<f64>, point: &Point) -> Result<PointTensor> {
    let dim = t.dim();
    let mut out = PointTensor::zeros(dim, 4);
    for x in 0..dim {
        for y in 0..dim {
            let slice = PointTensor::from_fn(dim, 2, |i| {
                if first == 0 {
                    t.get(&[i[0], i[1], x, y])
                } else {
                    t.get(&[x, y, i[0], i[1]])
                }
            });
            let s = hodge_star(&slice, g, Orientation::Coordinate, point)?;
            for a in 0..dim {
                for b in 0..dim {
                    let idx = if first == 0 { [a, b, x, y] } else { [x, y, a, b] };
                    out.set(&idx, s.get(&[a, b]));
                }
            }
        }
    }
    Ok(out)
}

/// `α ↦ ½(α + *α)` on 2-forms.
pub fn self_dual_part(alpha: &PointTensor, g: &DMatrix<f64>, point: &Point) -> Result<PointTensor> {
    let s = hodge_star(alpha, g, Orientation::Coordinate, point)?;
    Ok((alpha + &s).scaled(0.5).into_form())
}

/// Self-dual Weyl tensor `W⁺` (both pairs projected) and
/// `k = 3⟨W⁺(Ω), Ω⟩`, with `W(α)_ab = ½ W_abdc α^{cd}` and
/// `⟨α,β⟩ = ½ α_ab β^{ab}`. Dimension 4 only.
pub fn weyl_selfdual(geo: &Geometry, point: &Point) -> Result<(PointTensor, f64)> {
    if geo.dim() != 4 {
        return Err(GeometryError::UnsupportedDimension(geo.dim()));
    }
    let g = geo.metric(point)?;
    let ginv = geo.inverse_metric(point)?;
    let w = weyl(geo, point)?;
    let sw = star_pair(&w, 0, &g, point)?;
    let ws = star_pair(&w, 2, &g, point)?;
    let sws = star_pair(&sw, 2, &g, point)?;
    let w_plus = (&(&(&w + &sw) + &ws) + &sws).scaled(0.25);
    let omega = geo.kahler_form(point)?;
    let mut raised = omega.transform_slot(0, &ginv).transform_slot(1, &ginv);
    // W(Ω)_ab = ½ W_abdc Ω^{cd} = −½ W_abcd Ω^{cd}
    raised = raised.scaled(-0.5);
    let mut w_omega = PointTensor::zeros(4, 2);
    for a in 0..4 {
        for b in 0..4 {
            let mut acc = 0.0;
            for c in 0..4 {
                for d in 0..4 {
                    acc += w_plus.get(&[a, b, c, d]) * raised.get(&[c, d]);
                }
            }
            w_omega.set(&[a, b], acc);
        }
    }
    let inner = 0.5 * w_omega.inner_with(&omega, &ginv);
    Ok((w_plus, 3.0 * inner))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{flat_torus, hopf_standard, su2xu1};
    use crate::tensor::frame_max_abs;

    const H: f64 = 1e-4;

    #[test]
    fn flat_torus_is_flat_for_every_flavor() {
        let geo = Geometry::new(&flat_torus(4).unwrap(), H).unwrap();
        let p = Point::new(vec![0.3, 1.2, 2.0, 4.0]);
        for flavor in Flavor::ALL {
            assert_eq!(riemann(&geo, flavor, &p).unwrap().max_abs(), 0.0);
        }
        let (w_plus, k) = weyl_selfdual(&geo, &p).unwrap();
        assert_eq!(w_plus.max_abs(), 0.0);
        assert_eq!(k, 0.0);
    }

    #[test]
    fn su2xu1_bismut_connection_is_flat() {
        let geo = Geometry::new(&su2xu1(), H).unwrap();
        let p = Point::new(vec![1.0, 0.4, 2.0, 0.3]);
        let r = riemann(&geo, Flavor::Bismut, &p).unwrap();
        assert!(frame_max_abs(&r, &geo.frame(&p).unwrap()) < 1e-4);
    }

    #[test]
    fn hopf_levi_civita_is_product_of_line_and_unit_sphere() {
        // On ℝ × S³(1): sectional curvature 1 on planes tangent to the sphere, 0 with the radial line.
        let geo = Geometry::new(&hopf_standard(), H).unwrap();
        let p = Point::new(vec![1.0, 0.0, 0.0, 0.0]);
        let rg = riemann(&geo, Flavor::LeviCivita, &p).unwrap();
        let frame = geo.frame(&p).unwrap();
        let rf = frame.components_of(&rg);
        // frame e_0 is radial at this point; sectional curvature K(X,Y) = R(X,Y,Y,X)
        for a in 1..4 {
            assert!(rf.get(&[0, a, a, 0]).abs() < 1e-6);
            for b in 1..4 {
                if a != b {
                    assert!((rf.get(&[a, b, b, a]) - 1.0).abs() < 1e-6, "{a}{b}");
                }
            }
        }
    }

    #[test]
    fn pair_antisymmetries_and_bismut_j_invariance() {
        let geo = Geometry::new(&crate::catalog::conf_torus(4).unwrap(), H).unwrap();
        let p = Point::new(vec![0.7, 0.3, -0.2, 0.5]);
        let r = riemann(&geo, Flavor::Bismut, &p).unwrap();
        assert!(r.max_abs_diff(&r.permuted(&[1, 0, 2, 3]).scaled(-1.0)) < 1e-6);
        assert!(r.max_abs_diff(&r.permuted(&[0, 1, 3, 2]).scaled(-1.0)) < 1e-6);
        let j = geo.j(&p).unwrap();
        let rj = r.transform_slot(2, &j).transform_slot(3, &j);
        assert!(r.max_abs_diff(&rj) < 1e-6);
    }

    #[test]
    fn weyl_rejects_dimension_six() {
        let geo = Geometry::new(&flat_torus(6).unwrap(), H).unwrap();
        let p = Point::new(vec![0.1; 6]);
        assert_eq!(weyl_selfdual(&geo, &p).unwrap_err(), GeometryError::UnsupportedDimension(6));
    }
}
