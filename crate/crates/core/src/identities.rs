//! Pointwise curvature and torsion identities, each evaluated as
//! `max ‖lhs − rhs‖` over sampled points in orthonormal-frame components.
//!
//! Every residual function recomputes both sides from `g` and `J`; no tensor
//! is shared between the two sides.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::connections::{Flavor, Geometry};
use crate::curvature::{lambda_omega, ricci, riemann, self_dual_part, weyl_selfdual};
use crate::error::{GeometryError, Result};
use crate::report::real;
use crate::tensor::{
    cyclic_sum, frame_max_abs, hodge_star, j_conjugate, j_trace, tensor_norm_sq, wedge, Frame,
    Orientation, Point, PointTensor, TensorField,
};

/// Pass thresholds by derivative depth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// identities that need second derivatives of `g` or `J`
    #[serde(serialize_with = "real")]
    pub second_order: f64,
    /// identities that need only first derivatives
    #[serde(serialize_with = "real")]
    pub first_order: f64,
    /// structure-class thresholds
    #[serde(serialize_with = "real")]
    pub classify: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            second_order: 1e-4,
            first_order: 1e-6,
            classify: 1e-5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Order {
    First,
    Second,
}

impl Order {
    pub fn tolerance(self, tol: &Tolerances) -> f64 {
        match self {
            Order::First => tol.first_order,
            Order::Second => tol.second_order,
        }
    }
}

/// Outcome of one identity over a point set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualEntry {
    pub identity_name: String,
    pub relation: String,
    pub order: Order,
    #[serde(serialize_with = "real")]
    pub max_residual: f64,
    #[serde(serialize_with = "real")]
    pub tolerance: f64,
    pub pass: bool,
    #[serde(serialize_with = "crate::report::reals")]
    pub worst_point: Vec<f64>,
    /// false when the entry's hypotheses do not hold; such entries are
    /// reported but never counted as failures
    pub hypothesis_ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl ResidualEntry {
    /// Counts against the overall verdict.
    pub fn failed(&self) -> bool {
        self.hypothesis_ok && !self.pass
    }
}

pub type ResidualFn = fn(&Geometry, &Point) -> Result<f64>;

/// A named identity and its residual.
#[derive(Clone, Copy)]
pub struct Identity {
    pub name: &'static str,
    pub relation: &'static str,
    pub order: Order,
    pub note: Option<&'static str>,
    pub residual: ResidualFn,
}

/// Largest value of `f` over the points and the index attaining it.
/// Per-point work runs in parallel; the reduction is sequential and ordered.
pub fn max_over<F>(points: &[Point], f: F) -> Result<(f64, usize)>
where
    F: Fn(&Point) -> Result<f64> + Sync,
{
    if points.is_empty() {
        return Err(GeometryError::Precondition("empty point set".into()));
    }
    let values: Vec<Result<f64>> = points.par_iter().map(&f).collect();
    let mut best = (f64::NEG_INFINITY, 0);
    for (i, v) in values.into_iter().enumerate() {
        let v = v?;
        if v.is_nan() {
            return Err(GeometryError::numeric(&points[i].coords, "residual is NaN"));
        }
        if v > best.0 {
            best = (v, i);
        }
    }
    Ok(best)
}

/// Evaluate one identity over the points.
pub fn evaluate(geo: &Geometry, identity: &Identity, points: &[Point], tol: &Tolerances) -> Result<ResidualEntry> {
    let name = geo.manifold().name().to_string();
    let (max_residual, worst) = max_over(points, |p| {
        (identity.residual)(geo, p).map_err(|e| e.in_check(&name, identity.name, &p.coords))
    })?;
    let tolerance = identity.order.tolerance(tol);
    Ok(ResidualEntry {
        identity_name: identity.name.to_string(),
        relation: identity.relation.to_string(),
        order: identity.order,
        max_residual,
        tolerance,
        pass: max_residual <= tolerance,
        worst_point: points[worst].coords.clone(),
        hypothesis_ok: true,
        note: identity.note.map(str::to_string),
    })
}

pub fn evaluate_all(geo: &Geometry, identities: &[Identity], points: &[Point], tol: &Tolerances) -> Result<Vec<ResidualEntry>> {
    identities.iter().map(|id| evaluate(geo, id, points, tol)).collect()
}

// ---------------------------------------------------------------- helpers

fn diff(geo: &Geometry, p: &Point, lhs: &PointTensor, rhs: &PointTensor) -> Result<f64> {
    Ok(frame_max_abs(&(lhs - rhs), &geo.frame(p)?))
}

/// `(A∘A)(X,Y) = Σ A(X,e_i,e_j) A(Y,e_i,e_j)`.
pub fn torsion_square(t: &PointTensor, ginv: &DMatrix<f64>) -> PointTensor {
    let raised = t.transform_slot(1, ginv).transform_slot(2, ginv);
    let dim = t.dim();
    PointTensor::from_fn(dim, 2, |i| {
        let mut acc = 0.0;
        for a in 0..dim {
            for m in 0..dim {
                acc += t.get(&[i[0], a, m]) * raised.get(&[i[1], a, m]);
            }
        }
        acc
    })
}

/// `g(T(X,Y), T(Z,U))`.
pub fn torsion_pairing(t: &PointTensor, ginv: &DMatrix<f64>) -> PointTensor {
    let raised = t.transform_slot(2, ginv);
    let dim = t.dim();
    PointTensor::from_fn(dim, 4, |i| {
        (0..dim)
            .map(|m| t.get(&[i[0], i[1], m]) * raised.get(&[i[2], i[3], m]))
            .sum()
    })
}

fn bismut_ricci(geo: &Geometry, p: &Point) -> Result<PointTensor> {
    Ok(ricci(&riemann(geo, Flavor::Bismut, p)?, &geo.inverse_metric(p)?))
}

/// `½ Σ R(X,Y,e_i,Je_i)` for the Bismut (`ρ`) or Chern (`ρ^D`) curvature.
pub fn ricci_form(geo: &Geometry, flavor: Flavor, p: &Point) -> Result<PointTensor> {
    let pairing = geo.frame(p)?.j_pairing(&geo.j(p)?);
    Ok(riemann(geo, flavor, p)?.trace_pair(2, 3, &pairing).scaled(0.5).into_form())
}

/// `κ(X,Y) = ½ Σ K(e_i,Je_i,X,Y)`.
pub fn kappa(geo: &Geometry, p: &Point) -> Result<PointTensor> {
    let pairing = geo.frame(p)?.j_pairing(&geo.j(p)?);
    Ok(riemann(geo, Flavor::Chern, p)?.trace_pair(0, 1, &pairing).scaled(0.5).into_form())
}

fn nabla_lee(geo: &Geometry, flavor: Flavor, p: &Point) -> Result<PointTensor> {
    geo.covariant_derivative(flavor, &geo.lee_field(), p)
}

fn nabla_torsion(geo: &Geometry, flavor: Flavor, p: &Point) -> Result<PointTensor> {
    geo.covariant_derivative(flavor, &geo.torsion_field(), p)
}

fn codiff_torsion(geo: &Geometry, p: &Point) -> Result<PointTensor> {
    geo.codifferential_of(&geo.torsion_field(), p)
}

fn codiff_lee(geo: &Geometry, p: &Point) -> Result<f64> {
    Ok(geo.codifferential_of(&geo.lee_field(), p)?.value())
}

fn d_torsion(geo: &Geometry, p: &Point) -> Result<PointTensor> {
    crate::curvature::d_torsion(geo, p)
}

fn norms(geo: &Geometry, p: &Point) -> Result<(Frame, f64, f64)> {
    let frame = geo.frame(p)?;
    let theta = tensor_norm_sq(&geo.lee_form_unchecked(p)?, &frame);
    let t = tensor_norm_sq(&geo.torsion(p)?, &frame);
    Ok((frame, theta, t))
}

/// `(∇_U T)(X,Y,Z)` rearranged to slot order `(X,Y,Z,U)`.
fn last_slot_derivative(nt: &PointTensor) -> PointTensor {
    nt.permuted(&[3, 0, 1, 2])
}

fn transpose(t: &PointTensor) -> PointTensor {
    t.permuted(&[1, 0])
}

/// `α(JX, Y)`.
fn j_first(t: &PointTensor, j: &DMatrix<f64>) -> PointTensor {
    t.transform_slot(0, j)
}

/// `(θ∧Jθ)` and `Jθ∧Ω` share the wedge with this crate's normalization.
fn lee_wedge_kahler(geo: &Geometry, p: &Point) -> Result<PointTensor> {
    Ok(wedge(&geo.j_lee_form(p)?, &geo.kahler_form(p)?))
}

// ------------------------------------------------ Ricci-type identities

fn ricci_levi_civita_bismut(geo: &Geometry, p: &Point) -> Result<f64> {
    let ginv = geo.inverse_metric(p)?;
    let lhs = ricci(&riemann(geo, Flavor::LeviCivita, p)?, &ginv);
    let rhs = &(&bismut_ricci(geo, p)? + &codiff_torsion(geo, p)?.scaled(0.5))
        + &torsion_square(&geo.torsion(p)?, &ginv).scaled(0.25);
    diff(geo, p, &lhs, &rhs)
}

fn ricci_form_expansion(geo: &Geometry, p: &Point) -> Result<f64> {
    let j = geo.j(p)?;
    let lhs = ricci_form(geo, Flavor::Bismut, p)?;
    let (lambda, _) = lambda_omega(geo, p)?;
    let rhs = &(&bismut_ricci(geo, p)?.transform_slot(1, &j) + &nabla_lee(geo, Flavor::Bismut, p)?.transform_slot(1, &j))
        + &lambda.scaled(0.25);
    diff(geo, p, &lhs, &rhs)
}

fn scalar_trace(geo: &Geometry, p: &Point) -> Result<f64> {
    let j = geo.j(p)?;
    let frame = geo.frame(p)?;
    let b = j_trace(&ricci_form(geo, Flavor::Bismut, p)?, &j, &frame)?;
    let scal = bismut_ricci(geo, p)?.trace_pair(0, 1, &geo.inverse_metric(p)?).value();
    let (_, theta2, t2) = norms(geo, p)?;
    let rhs = scal - 3.0 * codiff_lee(geo, p)? - 2.0 * theta2 + t2 / 3.0;
    Ok((b - rhs).abs())
}

fn ricci_antisymmetry(geo: &Geometry, p: &Point) -> Result<f64> {
    let ric = bismut_ricci(geo, p)?;
    let lhs = &ric - &transpose(&ric);
    let rhs = codiff_torsion(geo, p)?.scaled(-1.0);
    diff(geo, p, &lhs, &rhs)
}

fn ricci_j_invariance(geo: &Geometry, p: &Point) -> Result<f64> {
    let j = geo.j(p)?;
    let ric = bismut_ricci(geo, p)?;
    let lhs = &j_conjugate(&ric, &j) - &transpose(&ric);
    let nth = nabla_lee(geo, Flavor::Bismut, p)?;
    let rhs = &transpose(&nth) - &j_conjugate(&nth, &j);
    diff(geo, p, &lhs, &rhs)
}

fn ricci_form_j_invariance(geo: &Geometry, p: &Point) -> Result<f64> {
    let j = geo.j(p)?;
    let rho = ricci_form(geo, Flavor::Bismut, p)?;
    let lhs = &j_conjugate(&rho, &j) - &rho;
    let nth = nabla_lee(geo, Flavor::Bismut, p)?;
    let d_nabla = &nth - &transpose(&nth);
    let rhs = &j_first(&codiff_torsion(geo, p)?, &j) - &j_first(&d_nabla, &j);
    diff(geo, p, &lhs, &rhs)
}

// ------------------------------------------------- Chern-side identities

fn chern_kappa(geo: &Geometry, p: &Point) -> Result<f64> {
    let j = geo.j(p)?;
    let ginv = geo.inverse_metric(p)?;
    let lhs = j_first(&kappa(geo, p)?, &j);
    let rho = ricci_form(geo, Flavor::Bismut, p)?;
    let rho11 = (&rho + &j_conjugate(&rho, &j)).scaled(0.5);
    let (lambda, _) = lambda_omega(geo, p)?;
    let rhs = &(&j_first(&rho11, &j) + &torsion_square(&geo.chern_torsion(p)?, &ginv))
        - &j_first(&lambda, &j).scaled(0.25);
    diff(geo, p, &lhs, &rhs)
}

fn ricci_form_chern(geo: &Geometry, p: &Point) -> Result<f64> {
    let lhs = ricci_form(geo, Flavor::Chern, p)?;
    let rhs = &ricci_form(geo, Flavor::Bismut, p)? + &geo.exterior_derivative_of(&geo.j_lee_field(), p)?;
    diff(geo, p, &lhs, &rhs)
}

fn lambda_trace(geo: &Geometry, p: &Point) -> Result<f64> {
    let j = geo.j(p)?;
    let (lambda, _) = lambda_omega(geo, p)?;
    let (frame, theta2, t2) = norms(geo, p)?;
    // Σ λ(e_i, Je_i) is the negative of the Jtrace orientation
    let lhs = -j_trace(&lambda, &j, &frame)?;
    let rhs = 8.0 * theta2 + 8.0 * codiff_lee(geo, p)? - 4.0 / 3.0 * t2;
    Ok((lhs - rhs).abs())
}

fn chern_trace(geo: &Geometry, p: &Point) -> Result<f64> {
    let j = geo.j(p)?;
    let frame = geo.frame(p)?;
    let two_u = j_trace(&ricci_form(geo, Flavor::Chern, p)?, &j, &frame)?;
    let b = j_trace(&ricci_form(geo, Flavor::Bismut, p)?, &j, &frame)?;
    let c2 = tensor_norm_sq(&geo.chern_torsion(p)?, &frame);
    let (_, h) = lambda_omega(geo, p)?;
    Ok((two_u - (b + c2 - 0.5 * h)).abs())
}

fn chern_traces_agree(geo: &Geometry, p: &Point) -> Result<f64> {
    let j = geo.j(p)?;
    let frame = geo.frame(p)?;
    let a = j_trace(&ricci_form(geo, Flavor::Chern, p)?, &j, &frame)?;
    let b = j_trace(&kappa(geo, p)?, &j, &frame)?;
    Ok((a - b).abs())
}

// ------------------------------------------------------ torsion identities

fn levi_civita_torsion_derivative(geo: &Geometry, p: &Point) -> Result<f64> {
    let ginv = geo.inverse_metric(p)?;
    let lhs = nabla_torsion(geo, Flavor::LeviCivita, p)?;
    let pairing = torsion_pairing(&geo.torsion(p)?, &ginv);
    let rhs = &nabla_torsion(geo, Flavor::Bismut, p)? + &cyclic_sum(&pairing).scaled(0.5);
    diff(geo, p, &lhs, &rhs)
}

fn torsion_exterior_derivative(geo: &Geometry, p: &Point) -> Result<f64> {
    let ginv = geo.inverse_metric(p)?;
    let lhs = d_torsion(geo, p)?;
    let nt = nabla_torsion(geo, Flavor::Bismut, p)?;
    let pairing = torsion_pairing(&geo.torsion(p)?, &ginv);
    let rhs = &cyclic_sum(&(&nt + &pairing.scaled(2.0))) - &last_slot_derivative(&nt);
    diff(geo, p, &lhs, &rhs)
}

fn first_bianchi(geo: &Geometry, p: &Point) -> Result<f64> {
    let ginv = geo.inverse_metric(p)?;
    let lhs = cyclic_sum(&riemann(geo, Flavor::Bismut, p)?);
    let nt = nabla_torsion(geo, Flavor::Bismut, p)?;
    let pairing = torsion_pairing(&geo.torsion(p)?, &ginv);
    let rhs = &(&d_torsion(geo, p)? + &last_slot_derivative(&nt)) - &cyclic_sum(&pairing);
    diff(geo, p, &lhs, &rhs)
}

fn curvature_relation(geo: &Geometry, p: &Point) -> Result<f64> {
    let ginv = geo.inverse_metric(p)?;
    let lhs = riemann(geo, Flavor::LeviCivita, p)?;
    let nt = nabla_torsion(geo, Flavor::Bismut, p)?;
    let tt = torsion_pairing(&geo.torsion(p)?, &ginv);
    let mut rhs = &riemann(geo, Flavor::Bismut, p)? - &nt.scaled(0.5);
    rhs = &rhs + &nt.permuted(&[1, 0, 2, 3]).scaled(0.5);
    rhs = &rhs - &tt.scaled(0.5);
    rhs = &rhs - &tt.permuted(&[1, 2, 0, 3]).scaled(0.25);
    rhs = &rhs - &tt.permuted(&[2, 0, 1, 3]).scaled(0.25);
    diff(geo, p, &lhs, &rhs)
}

// ----------------------------------------------------- structural checks

fn lee_form_routes(geo: &Geometry, p: &Point) -> Result<f64> {
    Ok(geo.lee_form_routes(p)?.disagreement(&geo.frame(p)?))
}

fn torsion_type(geo: &Geometry, p: &Point) -> Result<f64> {
    let j = geo.j(p)?;
    let t = geo.torsion(p)?;
    let jj_ = t.transform_slot(0, &j).transform_slot(1, &j);
    let j_j = t.transform_slot(0, &j).transform_slot(2, &j);
    let _jj = t.transform_slot(1, &j).transform_slot(2, &j);
    let lhs = &(&jj_ + &j_j) + &_jj;
    diff(geo, p, &lhs, &t)
}

fn hermitian_connection(geo: &Geometry, p: &Point, flavor: Flavor) -> Result<f64> {
    let frame = geo.frame(p)?;
    let ng = geo.covariant_derivative(flavor, &geo.metric_field(), p)?;
    let nw = geo.covariant_derivative(flavor, &geo.kahler_field(), p)?;
    Ok(frame_max_abs(&ng, &frame).max(frame_max_abs(&nw, &frame)))
}

fn bismut_hermitian(geo: &Geometry, p: &Point) -> Result<f64> {
    hermitian_connection(geo, p, Flavor::Bismut)
}

fn chern_hermitian(geo: &Geometry, p: &Point) -> Result<f64> {
    hermitian_connection(geo, p, Flavor::Chern)
}

fn levi_civita_metric(geo: &Geometry, p: &Point) -> Result<f64> {
    let frame = geo.frame(p)?;
    let ng = geo.covariant_derivative(Flavor::LeviCivita, &geo.metric_field(), p)?;
    let torsion = geo.connection(Flavor::LeviCivita).torsion_tensor(p)?;
    Ok(frame_max_abs(&ng, &frame).max(frame_max_abs(&torsion, &frame)))
}

fn bismut_torsion(geo: &Geometry, p: &Point) -> Result<f64> {
    let from_coefficients = geo.connection(Flavor::Bismut).torsion_tensor(p)?;
    // independent route: −dΩ(J·,J·,J·) from a fresh exterior derivative
    let j = geo.j(p)?;
    let d = geo.exterior_derivative_of(&geo.kahler_field(), p)?;
    let dc = d.transform_slot(0, &j).transform_slot(1, &j).transform_slot(2, &j).scaled(-1.0);
    diff(geo, p, &from_coefficients, &dc)
}

fn chern_torsion_type(geo: &Geometry, p: &Point) -> Result<f64> {
    let j = geo.j(p)?;
    let c = geo.connection(Flavor::Chern).torsion_tensor(p)?;
    // C(JX,Y) = J C(X,Y), i.e. C(JX,Y,Z) = −C(X,Y,JZ)
    let lhs = c.transform_slot(0, &j);
    let rhs = c.transform_slot(2, &j).scaled(-1.0);
    let d = geo.d_kahler(p)?;
    let formula = (&d.transform_slot(0, &j) + &d.transform_slot(1, &j)).scaled(0.5);
    Ok(diff(geo, p, &lhs, &rhs)?.max(diff(geo, p, &c, &formula)?))
}

// -------------------------------------------------------- dimension four

fn hodge_lee(geo: &Geometry, p: &Point) -> Result<PointTensor> {
    Ok(hodge_star(&geo.lee_form_unchecked(p)?, &geo.metric(p)?, Orientation::Coordinate, p)?.scaled(-1.0))
}

fn four_hodge(geo: &Geometry, p: &Point) -> Result<f64> {
    diff(geo, p, &geo.torsion(p)?, &hodge_lee(geo, p)?)
}

fn four_wedge(geo: &Geometry, p: &Point) -> Result<f64> {
    diff(geo, p, &geo.torsion(p)?, &lee_wedge_kahler(geo, p)?)
}

fn four_chain(geo: &Geometry, p: &Point) -> Result<f64> {
    diff(geo, p, &hodge_lee(geo, p)?, &lee_wedge_kahler(geo, p)?)
}

fn ricci_form_anti_invariant_part(geo: &Geometry, p: &Point) -> Result<f64> {
    let j = geo.j(p)?;
    let g = geo.metric(p)?;
    let rho = ricci_form(geo, Flavor::Bismut, p)?;
    let rho20 = (&rho - &j_conjugate(&rho, &j)).scaled(0.5);
    let d_theta = geo.exterior_derivative_of(&geo.lee_field(), p)?;
    let plus = self_dual_part(&d_theta, &g, p)?;
    let plus20 = (&plus - &j_conjugate(&plus, &j)).scaled(0.5);
    diff(geo, p, &rho20, &j_first(&plus20, &j))
}

fn weyl_trace(geo: &Geometry, p: &Point) -> Result<f64> {
    let j = geo.j(p)?;
    let frame = geo.frame(p)?;
    let b = j_trace(&ricci_form(geo, Flavor::Bismut, p)?, &j, &frame)?;
    let (_, k) = weyl_selfdual(geo, p)?;
    Ok((b - k).abs())
}

// ---------------------------------------------------------------- LCK

fn lck_torsion(geo: &Geometry, p: &Point) -> Result<f64> {
    let n = geo.manifold().n() as f64;
    diff(geo, p, &geo.torsion(p)?, &lee_wedge_kahler(geo, p)?.scaled(1.0 / (n - 1.0)))
}

fn lck_lambda(geo: &Geometry, p: &Point) -> Result<f64> {
    let n = geo.manifold().n() as f64;
    let (lambda, _) = lambda_omega(geo, p)?;
    let lhs = lambda.scaled(n - 1.0);
    let theta = geo.lee_form_unchecked(p)?;
    let j_theta = geo.j_lee_form(p)?;
    let omega = geo.kahler_form(p)?;
    let theta2 = tensor_norm_sq(&theta, &geo.frame(p)?);
    let djt = geo.exterior_derivative_of(&geo.j_lee_field(), p)?;
    let quad = (&wedge(&theta, &j_theta) + &omega.scaled(theta2)).scaled(1.0 / (n - 1.0));
    let rhs = &(&djt + &quad).scaled(4.0 - 2.0 * n) - &omega.scaled(2.0 * codiff_lee(geo, p)?);
    diff(geo, p, &lhs, &rhs)
}

// ------------------------------------------------------------- catalogs

pub const PROP1: [Identity; 3] = [
    Identity {
        name: "ricci_levi_civita_bismut",
        relation: "Ric^g = Ric + ½d†T + ¼Σg(T(X,e_i),T(Y,e_i))",
        order: Order::Second,
        note: None,
        residual: ricci_levi_civita_bismut,
    },
    Identity {
        name: "ricci_form_expansion",
        relation: "ρ(X,Y) = Ric(X,JY) + (∇_Xθ)JY + ¼λ^Ω(X,Y)",
        order: Order::Second,
        note: None,
        residual: ricci_form_expansion,
    },
    Identity {
        name: "scalar_trace",
        relation: "b = Scal^∇ − 3d†θ − 2|θ|² + ⅓|T|²",
        order: Order::Second,
        note: None,
        residual: scalar_trace,
    },
];

pub const COROLLARY1: [Identity; 3] = [
    Identity {
        name: "ricci_antisymmetry",
        relation: "Ric(X,Y) − Ric(Y,X) = −d†T(X,Y)",
        order: Order::Second,
        note: None,
        residual: ricci_antisymmetry,
    },
    Identity {
        name: "ricci_j_invariance",
        relation: "Ric(JX,JY) − Ric(Y,X) = −(∇_{JX}θ)JY + (∇_Yθ)X",
        order: Order::Second,
        note: Some("tested verbatim"),
        residual: ricci_j_invariance,
    },
    Identity {
        name: "ricci_form_j_invariance",
        relation: "ρ(JX,JY) − ρ(X,Y) = d†T(JX,Y) − d^∇θ(JX,Y)",
        order: Order::Second,
        note: None,
        residual: ricci_form_j_invariance,
    },
];

pub const PROP2: [Identity; 5] = [
    Identity {
        name: "chern_kappa",
        relation: "κ(JX,Y) = ρ^{1,1}(JX,Y) + <i_XC,i_YC> − ¼λ^Ω(JX,Y)",
        order: Order::Second,
        note: None,
        residual: chern_kappa,
    },
    Identity {
        name: "ricci_form_chern",
        relation: "ρ^D = ρ + d(Jθ)",
        order: Order::Second,
        note: None,
        residual: ricci_form_chern,
    },
    Identity {
        name: "lambda_trace",
        relation: "Σλ^Ω(e_i,Je_i) = 8|θ|² + 8d†θ − (4/3)|T|²",
        order: Order::Second,
        note: None,
        residual: lambda_trace,
    },
    Identity {
        name: "chern_trace",
        relation: "2u = b + |C|² − ½h",
        order: Order::Second,
        note: None,
        residual: chern_trace,
    },
    Identity {
        name: "chern_traces_agree",
        relation: "Σρ^D(Je_i,e_i) = Σκ(Je_i,e_i)",
        order: Order::Second,
        note: None,
        residual: chern_traces_agree,
    },
];

pub const TORSION: [Identity; 4] = [
    Identity {
        name: "levi_civita_torsion_derivative",
        relation: "(∇^g_XT)(Y,Z,U) = (∇_XT)(Y,Z,U) + ½σ_XYZ g(T(X,Y),T(Z,U))",
        order: Order::Second,
        note: None,
        residual: levi_civita_torsion_derivative,
    },
    Identity {
        name: "torsion_exterior_derivative",
        relation: "dT(X,Y,Z,U) = σ_XYZ{(∇_XT)(Y,Z,U) + 2g(T(X,Y),T(Z,U))} − (∇_UT)(X,Y,Z)",
        order: Order::Second,
        note: None,
        residual: torsion_exterior_derivative,
    },
    Identity {
        name: "first_bianchi",
        relation: "σ_XYZ R(X,Y,Z,U) = dT(X,Y,Z,U) + (∇_UT)(X,Y,Z) − σ_XYZ g(T(X,Y),T(Z,U))",
        order: Order::Second,
        note: None,
        residual: first_bianchi,
    },
    Identity {
        name: "curvature_relation",
        relation: "R^g(X,Y,Z,U) = R(X,Y,Z,U) − ½(∇_XT)(Y,Z,U) + ½(∇_YT)(X,Z,U) − ½g(T(X,Y),T(Z,U)) − ¼g(T(Y,Z),T(X,U)) − ¼g(T(Z,X),T(Y,U))",
        order: Order::Second,
        note: None,
        residual: curvature_relation,
    },
];

pub const STRUCTURE: [Identity; 7] = [
    Identity {
        name: "lee_form_routes",
        relation: "d†Ω(JX) = −½ΣT(JX,e_i,Je_i) = ΣC(JX,e_i,Je_i)",
        order: Order::First,
        note: Some("Chern route carries factor 1"),
        residual: lee_form_routes,
    },
    Identity {
        name: "torsion_type",
        relation: "T(JX,JY,Z) + T(JX,Y,JZ) + T(X,JY,JZ) = T(X,Y,Z)",
        order: Order::First,
        note: None,
        residual: torsion_type,
    },
    Identity {
        name: "levi_civita_metric",
        relation: "∇^g g = 0, torsion-free",
        order: Order::First,
        note: None,
        residual: levi_civita_metric,
    },
    Identity {
        name: "bismut_hermitian",
        relation: "∇g = 0, ∇J = 0",
        order: Order::First,
        note: None,
        residual: bismut_hermitian,
    },
    Identity {
        name: "chern_hermitian",
        relation: "Dg = 0, DJ = 0",
        order: Order::First,
        note: None,
        residual: chern_hermitian,
    },
    Identity {
        name: "bismut_torsion",
        relation: "T^∇ = d^cΩ",
        order: Order::First,
        note: None,
        residual: bismut_torsion,
    },
    Identity {
        name: "chern_torsion",
        relation: "2C(X,Y,Z) = dΩ(JX,Y,Z) + dΩ(X,JY,Z), C(JX,Y) = JC(X,Y)",
        order: Order::First,
        note: None,
        residual: chern_torsion_type,
    },
];

pub const DIM4: [Identity; 5] = [
    Identity {
        name: "torsion_hodge_lee",
        relation: "T = −*θ",
        order: Order::First,
        note: None,
        residual: four_hodge,
    },
    Identity {
        name: "torsion_lee_wedge",
        relation: "T = Jθ∧Ω",
        order: Order::First,
        note: None,
        residual: four_wedge,
    },
    Identity {
        name: "hodge_lee_wedge",
        relation: "−*θ = Jθ∧Ω",
        order: Order::First,
        note: None,
        residual: four_chain,
    },
    Identity {
        name: "ricci_form_anti_invariant",
        relation: "ρ^{(2,0)+(0,2)}(X,Y) = (dθ₊)^{(2,0)+(0,2)}(JX,Y)",
        order: Order::Second,
        note: Some("variant: the J-twisted form of ρ^{(2,0)+(0,2)} = −dθ₊"),
        residual: ricci_form_anti_invariant_part,
    },
    Identity {
        name: "weyl_trace",
        relation: "b = k = 3<W⁺(Ω),Ω>",
        order: Order::Second,
        note: None,
        residual: weyl_trace,
    },
];

pub const LCK: [Identity; 2] = [
    Identity {
        name: "lck_torsion",
        relation: "T = (1/(n−1)) Jθ∧Ω",
        order: Order::First,
        note: None,
        residual: lck_torsion,
    },
    Identity {
        name: "lck_lambda",
        relation: "(n−1)λ^Ω = (4−2n)(dJθ + (θ∧Jθ + |θ|²Ω)/(n−1)) − 2d†θΩ",
        order: Order::Second,
        note: Some("variant: quadratic terms carry 1/(n−1); reduces to the printed form for n = 2"),
        residual: lck_lambda,
    },
];

pub fn verify_prop1(geo: &Geometry, points: &[Point], tol: &Tolerances) -> Result<Vec<ResidualEntry>> {
    evaluate_all(geo, &PROP1, points, tol)
}

pub fn verify_corollary1(geo: &Geometry, points: &[Point], tol: &Tolerances) -> Result<Vec<ResidualEntry>> {
    evaluate_all(geo, &COROLLARY1, points, tol)
}

pub fn verify_prop2(geo: &Geometry, points: &[Point], tol: &Tolerances) -> Result<Vec<ResidualEntry>> {
    evaluate_all(geo, &PROP2, points, tol)
}

pub fn verify_torsion_identities(geo: &Geometry, points: &[Point], tol: &Tolerances) -> Result<Vec<ResidualEntry>> {
    evaluate_all(geo, &TORSION, points, tol)
}

pub fn verify_structure(geo: &Geometry, points: &[Point], tol: &Tolerances) -> Result<Vec<ResidualEntry>> {
    evaluate_all(geo, &STRUCTURE, points, tol)
}

/// Dimension-four relations; fails on other dimensions.
pub fn verify_dim4(geo: &Geometry, points: &[Point], tol: &Tolerances) -> Result<Vec<ResidualEntry>> {
    if geo.dim() != 4 {
        return Err(GeometryError::UnsupportedDimension(geo.dim()));
    }
    evaluate_all(geo, &DIM4, points, tol)
}

/// Relations of locally conformally Kähler structures; needs the
/// manifold's LCK declaration.
pub fn verify_lck(geo: &Geometry, points: &[Point], tol: &Tolerances) -> Result<Vec<ResidualEntry>> {
    if !geo.manifold().is_lck() {
        return Err(GeometryError::Precondition(format!(
            "`{}` is not declared locally conformally Kähler",
            geo.manifold().name()
        )));
    }
    evaluate_all(geo, &LCK, points, tol)
}

/// Twice the Chern trace `2u = Σρ^D(Je_i,e_i)`.
fn two_u(geo: &Geometry, p: &Point) -> Result<f64> {
    j_trace(&ricci_form(geo, Flavor::Chern, p)?, &geo.j(p)?, &geo.frame(p)?)
}

/// Conformal change of `u` under `g = e^F g_G` (here `F = 2f`):
/// `2e^F u = 2u_G + n<θ_G,dF>_G + nΔ_G F`, `Δ = d†d`.
pub fn verify_tri2(geo: &Geometry, points: &[Point], tol: &Tolerances) -> Result<ResidualEntry> {
    let m = geo.manifold();
    let parent = m.conformal_parent().ok_or_else(|| {
        GeometryError::Precondition(format!("`{}` has no conformal parent", m.name()))
    })?;
    let parent_geo = Geometry::new(&parent.parent, geo.step())?;
    let factor = parent.factor.clone();
    let n = m.n() as f64;
    let big_f = {
        let factor = factor.clone();
        TensorField::new("F", 0, true, m.domain().clone(), move |p| {
            Ok(PointTensor::scalar(p.dim(), 2.0 * factor(&p.coords)))
        })
    };
    let step = geo.step();
    let d_f = {
        let big_f = big_f.clone();
        TensorField::new("dF", 1, true, m.domain().clone(), move |p| {
            crate::tensor::exterior_derivative(&big_f, p, step)
        })
    };
    let name = m.name().to_string();
    let (max_residual, worst) = max_over(points, |p| {
        let run = || -> Result<f64> {
            let lhs = (2.0 * factor(&p.coords)).exp() * two_u(geo, p)?;
            let ginv = parent_geo.inverse_metric(p)?;
            let df = d_f.evaluate(p)?;
            let theta_g = parent_geo.lee_form_unchecked(p)?;
            let inner = theta_g.inner_with(&df, &ginv);
            let laplacian = parent_geo.codifferential_of(&d_f, p)?.value();
            let rhs = two_u(&parent_geo, p)? + n * inner + n * laplacian;
            Ok((lhs - rhs).abs())
        };
        run().map_err(|e| e.in_check(&name, "conformal_chern_trace", &p.coords))
    })?;
    Ok(ResidualEntry {
        identity_name: "conformal_chern_trace".into(),
        relation: "2e^F u = 2u_G + n<θ_G,dF>_G + nΔ_G F, g = e^F g_G".into(),
        order: Order::Second,
        max_residual,
        tolerance: tol.second_order,
        pass: max_residual <= tol.second_order,
        worst_point: points[worst].coords.clone(),
        hypothesis_ok: true,
        note: Some(format!(
            "parent `{}`; the <θ_G,dF> coefficient is n (the printed n(n−1) agrees when n = 2 or θ_G = 0)",
            parent.parent.name()
        )),
    })
}

/// Every identity that applies to the manifold, in report order.
pub fn full_suite(geo: &Geometry, points: &[Point], tol: &Tolerances) -> Result<Vec<ResidualEntry>> {
    let mut out = verify_structure(geo, points, tol)?;
    out.extend(verify_prop1(geo, points, tol)?);
    out.extend(verify_corollary1(geo, points, tol)?);
    out.extend(verify_prop2(geo, points, tol)?);
    out.extend(verify_torsion_identities(geo, points, tol)?);
    if geo.dim() == 4 {
        out.extend(verify_dim4(geo, points, tol)?);
    }
    if geo.manifold().is_lck() {
        out.extend(verify_lck(geo, points, tol)?);
    }
    if geo.manifold().conformal_parent().is_some() {
        out.push(verify_tri2(geo, points, tol)?);
    }
    Ok(out)
}
