//! Levi-Civita, Bismut and Chern connections of a Hermitian chart, their
//! torsions, the Lee form and covariant derivatives.
//!
//! Nothing is cached: every quantity is recomputed from `g` and `J` on
//! demand, so two sides of an identity never share an intermediate tensor.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::catalog::HermitianManifold;
use crate::error::{GeometryError, Result};
use crate::tensor::{
    antisymmetrized_gradient, christoffel_lowered, codifferential, covariant_from_gradient,
    exterior_derivative, frame_max_abs, invert_spd, j_one_form, orthonormal_frame,
    partial_derivatives, Coefficients, Frame, Point, PointTensor, TensorField,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Flavor {
    LeviCivita,
    Bismut,
    Chern,
}

impl Flavor {
    pub const ALL: [Flavor; 3] = [Flavor::LeviCivita, Flavor::Bismut, Flavor::Chern];
}

/// Base scale for the Lee-form agreement check at the default step.
const LEE_AGREEMENT: f64 = 1e-5;

/// Differential-geometric evaluator for one manifold at one difference step.
#[derive(Debug, Clone)]
pub struct Geometry {
    manifold: HermitianManifold,
    step: f64,
}

/// The three expressions of the Lee form at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct LeeRoutes {
    /// `θ = d†Ω ∘ J`
    pub codifferential: PointTensor,
    /// `θ(X) = −½ Σ T(JX, e_i, Je_i)`
    pub torsion_trace: PointTensor,
    /// `θ(X) = Σ C(JX, e_i, Je_i)`
    pub chern_trace: PointTensor,
}

impl LeeRoutes {
    /// Largest pairwise disagreement, in orthonormal-frame components.
    pub fn disagreement(&self, frame: &Frame) -> f64 {
        let a = frame_max_abs(&(&self.codifferential - &self.torsion_trace), frame);
        let b = frame_max_abs(&(&self.codifferential - &self.chern_trace), frame);
        let c = frame_max_abs(&(&self.torsion_trace - &self.chern_trace), frame);
        a.max(b).max(c)
    }
}

impl Geometry {
    pub fn new(manifold: &HermitianManifold, step: f64) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(GeometryError::Contract(format!("difference step must be positive, got {step}")));
        }
        Ok(Geometry {
            manifold: manifold.clone(),
            step,
        })
    }

    pub fn manifold(&self) -> &HermitianManifold {
        &self.manifold
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn dim(&self) -> usize {
        self.manifold.dim()
    }

    /// Wrap a pointwise quantity of this geometry as a tensor field.
    pub fn field<F>(&self, name: &str, valence: usize, form: bool, f: F) -> TensorField
    where
        F: Fn(&Geometry, &Point) -> Result<PointTensor> + Send + Sync + 'static,
    {
        let geo = self.clone();
        TensorField::new(
            format!("{}:{}", self.manifold.name(), name),
            valence,
            form,
            self.manifold.domain().clone(),
            move |p| f(&geo, p),
        )
    }

    /// Central-difference gradient of a pointwise quantity (slot 0 = direction).
    pub fn gradient<F>(&self, f: F, point: &Point) -> Result<PointTensor>
    where
        F: Fn(&Point) -> Result<PointTensor>,
    {
        partial_derivatives(f, point, self.step, self.manifold.domain(), self.manifold.name())
    }

    pub fn metric(&self, point: &Point) -> Result<DMatrix<f64>> {
        self.manifold.metric_at(point)
    }

    pub fn inverse_metric(&self, point: &Point) -> Result<DMatrix<f64>> {
        invert_spd(&self.metric(point)?, point)
    }

    pub fn j(&self, point: &Point) -> Result<DMatrix<f64>> {
        self.manifold.complex_structure_at(point)
    }

    pub fn frame(&self, point: &Point) -> Result<Frame> {
        orthonormal_frame(&self.metric(point)?, point)
    }

    pub fn metric_field(&self) -> TensorField {
        self.field("metric", 2, false, |geo, p| Ok(PointTensor::from_matrix(&geo.metric(p)?)))
    }

    /// `Ω(X,Y) = g(X, JY)`.
    pub fn kahler_form(&self, point: &Point) -> Result<PointTensor> {
        let g = self.metric(point)?;
        let j = self.j(point)?;
        Ok(PointTensor::from_matrix(&(g * j)).antisymmetrized())
    }

    pub fn kahler_field(&self) -> TensorField {
        self.field("kahler_form", 2, true, |geo, p| geo.kahler_form(p))
    }

    pub fn d_kahler(&self, point: &Point) -> Result<PointTensor> {
        Ok(antisymmetrized_gradient(&self.gradient(|q| self.kahler_form(q), point)?))
    }

    /// Bismut torsion `T = d^cΩ`, `T(X,Y,Z) = −dΩ(JX,JY,JZ)`.
    pub fn torsion(&self, point: &Point) -> Result<PointTensor> {
        let j = self.j(point)?;
        let d = self.d_kahler(point)?;
        Ok(d.transform_slot(0, &j)
            .transform_slot(1, &j)
            .transform_slot(2, &j)
            .scaled(-1.0)
            .antisymmetrized())
    }

    pub fn torsion_field(&self) -> TensorField {
        self.field("torsion", 3, true, |geo, p| geo.torsion(p))
    }

    /// Chern torsion `C(X,Y,Z) = ½(dΩ(JX,Y,Z) + dΩ(X,JY,Z))`.
    pub fn chern_torsion(&self, point: &Point) -> Result<PointTensor> {
        let j = self.j(point)?;
        let d = self.d_kahler(point)?;
        Ok((&d.transform_slot(0, &j) + &d.transform_slot(1, &j))
            .scaled(0.5)
            .with_form_flag(false))
    }

    /// `Γ_{abc} = g(∇^g_{∂_a} ∂_b, ∂_c)`.
    pub fn christoffel_lowered(&self, point: &Point) -> Result<PointTensor> {
        let dg = self.gradient(|q| Ok(PointTensor::from_matrix(&self.metric(q)?)), point)?;
        Ok(christoffel_lowered(&dg))
    }

    /// `g(∇_{∂_a} ∂_b, ∂_c)` for the requested connection.
    pub fn lowered_coefficients(&self, flavor: Flavor, point: &Point) -> Result<PointTensor> {
        let lc = self.christoffel_lowered(point)?;
        Ok(match flavor {
            Flavor::LeviCivita => lc,
            Flavor::Bismut => &lc + &self.torsion(point)?.scaled(0.5),
            Flavor::Chern => {
                let j = self.j(point)?;
                &lc + &self.d_kahler(point)?.transform_slot(0, &j).scaled(0.5)
            }
        })
    }

    pub fn coefficients(&self, flavor: Flavor, point: &Point) -> Result<Coefficients> {
        Ok(Coefficients::from_lowered(
            &self.lowered_coefficients(flavor, point)?,
            &self.inverse_metric(point)?,
        ))
    }

    pub fn connection(&self, flavor: Flavor) -> ConnectionField {
        ConnectionField {
            flavor,
            geometry: self.clone(),
        }
    }

    /// All three expressions of the Lee form, without comparing them.
    pub fn lee_form_routes(&self, point: &Point) -> Result<LeeRoutes> {
        let j = self.j(point)?;
        let frame = self.frame(point)?;
        let pairing = frame.j_pairing(&j);
        let torsion_trace = self
            .torsion(point)?
            .transform_slot(0, &j)
            .trace_pair(1, 2, &pairing)
            .scaled(-0.5)
            .into_form();
        let chern_trace = self
            .chern_torsion(point)?
            .transform_slot(0, &j)
            .trace_pair(1, 2, &pairing)
            .into_form();
        Ok(LeeRoutes {
            codifferential: self.lee_form_unchecked(point)?,
            torsion_trace,
            chern_trace,
        })
    }

    /// `θ = d†Ω ∘ J`, without the agreement check.
    pub fn lee_form_unchecked(&self, point: &Point) -> Result<PointTensor> {
        let j = self.j(point)?;
        let d_omega = codifferential(&self.kahler_field(), point, &self.metric_field(), self.step)?;
        Ok(d_omega.transform_slot(0, &j).into_form())
    }

    /// Threshold beyond which the Lee-form routes are a convention fault.
    pub fn lee_agreement_threshold(&self) -> f64 {
        LEE_AGREEMENT * (self.step / 1e-4).powi(2).max(1.0)
    }

    /// The Lee form, after checking that all three routes agree.
    pub fn lee_form(&self, point: &Point) -> Result<PointTensor> {
        let routes = self.lee_form_routes(point)?;
        let frame = self.frame(point)?;
        if routes.disagreement(&frame) > self.lee_agreement_threshold() {
            return Err(GeometryError::ConventionFault {
                point: point.coords.clone(),
                codifferential: routes.codifferential.components().to_vec(),
                torsion_trace: routes.torsion_trace.components().to_vec(),
                chern_trace: routes.chern_trace.components().to_vec(),
            });
        }
        Ok(routes.codifferential)
    }

    pub fn lee_field(&self) -> TensorField {
        self.field("lee_form", 1, true, |geo, p| geo.lee_form_unchecked(p))
    }

    /// `Jθ = −θ∘J`.
    pub fn j_lee_form(&self, point: &Point) -> Result<PointTensor> {
        Ok(j_one_form(&self.lee_form_unchecked(point)?, &self.j(point)?))
    }

    pub fn j_lee_field(&self) -> TensorField {
        self.field("j_lee_form", 1, true, |geo, p| geo.j_lee_form(p))
    }

    /// `(∇_a t)_{b..}` for the chosen connection.
    pub fn covariant_derivative(&self, flavor: Flavor, field: &TensorField, point: &Point) -> Result<PointTensor> {
        if field.valence() > 4 {
            return Err(GeometryError::Contract(format!(
                "covariant derivative supports valence ≤ 4, got {}",
                field.valence()
            )));
        }
        let gamma = self.coefficients(flavor, point)?;
        let value = field.evaluate(point)?;
        let grad = self.gradient(|q| field.evaluate(q), point)?;
        Ok(covariant_from_gradient(&grad, &value, &gamma))
    }

    pub fn codifferential_of(&self, field: &TensorField, point: &Point) -> Result<PointTensor> {
        codifferential(field, point, &self.metric_field(), self.step)
    }

    pub fn exterior_derivative_of(&self, field: &TensorField, point: &Point) -> Result<PointTensor> {
        exterior_derivative(field, point, self.step)
    }
}

/// One of the three connections of a geometry, as a coefficient map.
#[derive(Debug, Clone)]
pub struct ConnectionField {
    pub flavor: Flavor,
    geometry: Geometry,
}

impl ConnectionField {
    pub fn coefficients(&self, point: &Point) -> Result<Coefficients> {
        self.geometry.coefficients(self.flavor, point)
    }

    pub fn covariant_derivative(&self, field: &TensorField, point: &Point) -> Result<PointTensor> {
        self.geometry.covariant_derivative(self.flavor, field, point)
    }

    /// `g(T^∇(∂_a,∂_b), ∂_c)` of this connection.
    pub fn torsion_tensor(&self, point: &Point) -> Result<PointTensor> {
        let low = self.geometry.lowered_coefficients(self.flavor, point)?;
        Ok(&low - &low.permuted(&[1, 0, 2]))
    }
}
