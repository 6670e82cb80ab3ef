//! Pointwise multilinear algebra and exterior calculus on a coordinate chart.
//!
//! Every tensor is stored fully covariant in the coordinate basis, row-major
//! with the first slot most significant. Index raising is always explicit.
//! Forms use the convention in which `dx ∧ dy (∂x, ∂y) = 1` and
//! `(dα)(X₀..X_p) = Σ (−1)^i ∂_{X_i} α(..X̂_i..)` on coordinate fields.
//!
//! Derivatives of fields are taken with central differences; quantities that
//! need second derivatives nest two central stencils.

use std::fmt;
use std::ops::{Add, Sub};
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{GeometryError, Result};

/// A point of the chart, given by its coordinates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Point {
    pub coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// The point moved by `delta` along coordinate axis `axis`.
    pub fn shifted(&self, axis: usize, delta: f64) -> Point {
        let mut coords = self.coords.clone();
        coords[axis] += delta;
        Point { coords }
    }
}

impl From<Vec<f64>> for Point {
    fn from(coords: Vec<f64>) -> Self {
        Point { coords }
    }
}

/// One coordinate axis of a box chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    /// Periodic axes have no boundary; sampling covers `[lo, hi)`.
    pub periodic: bool,
}

impl Axis {
    pub fn bounded(lo: f64, hi: f64) -> Self {
        Axis {
            lo,
            hi,
            periodic: false,
        }
    }

    pub fn periodic(lo: f64, hi: f64) -> Self {
        Axis {
            lo,
            hi,
            periodic: true,
        }
    }
}

/// Region of coordinate space on which a manifold's fields are smooth.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChartDomain {
    Box { axes: Vec<Axis> },
    /// `inner ≤ |x| ≤ outer` in ℝ^dim.
    Annulus { dim: usize, inner: f64, outer: f64 },
}

impl ChartDomain {
    pub fn torus(dim: usize) -> Self {
        ChartDomain::Box {
            axes: vec![Axis::periodic(0.0, 2.0 * std::f64::consts::PI); dim],
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ChartDomain::Box { axes } => axes.len(),
            ChartDomain::Annulus { dim, .. } => *dim,
        }
    }

    /// Distance (in coordinates) from the point to the chart boundary;
    /// negative outside the chart, infinite when no axis is bounded.
    pub fn margin(&self, point: &Point) -> f64 {
        match self {
            ChartDomain::Box { axes } => axes
                .iter()
                .zip(&point.coords)
                .filter(|(axis, _)| !axis.periodic)
                .map(|(axis, &x)| (x - axis.lo).min(axis.hi - x))
                .fold(f64::INFINITY, f64::min),
            ChartDomain::Annulus { inner, outer, .. } => {
                let r = point.coords.iter().map(|x| x * x).sum::<f64>().sqrt();
                (r - inner).min(outer - r)
            }
        }
    }

    pub fn contains(&self, point: &Point) -> bool {
        point.dim() == self.dim() && self.margin(point) >= 0.0
    }

    /// Fails unless every point within `reach` of `point` lies in the chart.
    pub fn require_margin(&self, point: &Point, reach: f64, chart: &str) -> Result<()> {
        if point.dim() != self.dim() {
            return Err(GeometryError::Contract(format!(
                "point of dimension {} on a chart of dimension {}",
                point.dim(),
                self.dim()
            )));
        }
        let margin = self.margin(point);
        if margin < reach || !margin.is_finite() && margin.is_nan() {
            return Err(GeometryError::Domain {
                chart: chart.to_string(),
                point: point.coords.clone(),
                margin,
                reach,
            });
        }
        Ok(())
    }
}

/// Components of a covariant tensor at a single point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointTensor {
    dim: usize,
    valence: usize,
    components: Vec<f64>,
    form: bool,
}

impl PointTensor {
    pub fn zeros(dim: usize, valence: usize) -> Self {
        PointTensor {
            dim,
            valence,
            components: vec![0.0; dim.pow(valence as u32)],
            form: false,
        }
    }

    pub fn scalar(dim: usize, value: f64) -> Self {
        PointTensor {
            dim,
            valence: 0,
            components: vec![value],
            form: false,
        }
    }

    pub fn from_components(dim: usize, valence: usize, components: Vec<f64>) -> Self {
        assert_eq!(
            components.len(),
            dim.pow(valence as u32),
            "component count does not match dim^valence"
        );
        PointTensor {
            dim,
            valence,
            components,
            form: false,
        }
    }

    pub fn from_vector(v: &[f64]) -> Self {
        Self::from_components(v.len(), 1, v.to_vec())
    }

    pub fn from_matrix(m: &DMatrix<f64>) -> Self {
        let dim = m.nrows();
        let mut t = Self::zeros(dim, 2);
        for a in 0..dim {
            for b in 0..dim {
                t.components[a * dim + b] = m[(a, b)];
            }
        }
        t
    }

    /// Build a tensor by evaluating `f` on every multi-index.
    pub fn from_fn(dim: usize, valence: usize, mut f: impl FnMut(&[usize]) -> f64) -> Self {
        let mut t = Self::zeros(dim, valence);
        let mut idx = vec![0usize; valence];
        for flat in 0..t.components.len() {
            decode_index(flat, dim, &mut idx);
            t.components[flat] = f(&idx);
        }
        t
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        assert_eq!(self.valence, 2, "to_matrix needs a (0,2)-tensor");
        DMatrix::from_fn(self.dim, self.dim, |a, b| self.components[a * self.dim + b])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn valence(&self) -> usize {
        self.valence
    }

    pub fn is_form(&self) -> bool {
        self.form
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn into_form(mut self) -> Self {
        self.form = true;
        self
    }

    pub fn with_form_flag(mut self, form: bool) -> Self {
        self.form = form;
        self
    }

    fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.valence);
        idx.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.components[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], value: f64) {
        let o = self.offset(idx);
        self.components[o] = value;
    }

    /// The value of a valence-0 tensor.
    pub fn value(&self) -> f64 {
        assert_eq!(self.valence, 0);
        self.components[0]
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn max_abs_diff(&self, other: &PointTensor) -> f64 {
        assert_eq!(self.components.len(), other.components.len());
        self.components
            .iter()
            .zip(&other.components)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn scaled(&self, s: f64) -> PointTensor {
        PointTensor {
            components: self.components.iter().map(|c| c * s).collect(),
            ..self.clone()
        }
    }

    /// `result(X₀..X_{p−1}) = self(X_{perm[0]}, .., X_{perm[p−1]})`.
    pub fn permuted(&self, perm: &[usize]) -> PointTensor {
        assert_eq!(perm.len(), self.valence);
        let mut src = vec![0usize; self.valence];
        PointTensor::from_fn(self.dim, self.valence, |idx| {
            for (s, &p) in src.iter_mut().zip(perm) {
                *s = idx[p];
            }
            self.get(&src)
        })
        .with_form_flag(self.form)
    }

    /// Projection onto totally antisymmetric tensors, marked as a form.
    pub fn antisymmetrized(&self) -> PointTensor {
        let perms = signed_permutations(self.valence);
        let norm = perms.len() as f64;
        let mut src = vec![0usize; self.valence];
        PointTensor::from_fn(self.dim, self.valence, |idx| {
            let mut acc = 0.0;
            for (perm, sign) in &perms {
                for (s, &p) in src.iter_mut().zip(perm) {
                    *s = idx[p];
                }
                acc += sign * self.get(&src);
            }
            acc / norm
        })
        .into_form()
    }

    /// Largest violation of total antisymmetry, relative to the largest component.
    pub fn antisymmetry_defect(&self) -> f64 {
        if self.valence < 2 {
            return 0.0;
        }
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        let mut worst: f64 = 0.0;
        for s in 0..self.valence - 1 {
            let mut perm: Vec<usize> = (0..self.valence).collect();
            perm.swap(s, s + 1);
            let swapped = self.permuted(&perm);
            for (a, b) in self.components.iter().zip(&swapped.components) {
                worst = worst.max((a + b).abs());
            }
        }
        worst / scale
    }

    /// Transform slot `slot` by a matrix: `out[..i..] = Σ_a self[..a..] m[a, i]`.
    pub fn transform_slot(&self, slot: usize, m: &DMatrix<f64>) -> PointTensor {
        let dim = self.dim;
        let mut src = vec![0usize; self.valence];
        PointTensor::from_fn(dim, self.valence, |idx| {
            src.copy_from_slice(idx);
            let mut acc = 0.0;
            for a in 0..dim {
                src[slot] = a;
                acc += self.get(&src) * m[(a, idx[slot])];
            }
            acc
        })
        .with_form_flag(self.form)
    }

    /// Contract the slot pair `(s1, s2)` against `m`:
    /// `Σ_{a,b} self[..a@s1..b@s2..] m[a, b]`, removing both slots.
    pub fn trace_pair(&self, s1: usize, s2: usize, m: &DMatrix<f64>) -> PointTensor {
        assert!(s1 != s2 && s1 < self.valence && s2 < self.valence);
        let dim = self.dim;
        let rest: Vec<usize> = (0..self.valence).filter(|&s| s != s1 && s != s2).collect();
        let mut full = vec![0usize; self.valence];
        PointTensor::from_fn(dim, rest.len(), |idx| {
            for (k, &s) in rest.iter().enumerate() {
                full[s] = idx[k];
            }
            let mut acc = 0.0;
            for a in 0..dim {
                full[s1] = a;
                for b in 0..dim {
                    let w = m[(a, b)];
                    if w != 0.0 {
                        full[s2] = b;
                        acc += self.get(&full) * w;
                    }
                }
            }
            acc
        })
    }

    /// Full contraction `Σ self[i..] other[j..] Π m[i_k, j_k]`.
    pub fn inner_with(&self, other: &PointTensor, m: &DMatrix<f64>) -> f64 {
        assert_eq!(self.valence, other.valence);
        let mut raised = other.clone();
        for s in 0..other.valence {
            raised = raised.transform_slot(s, &m.transpose());
        }
        self.components
            .iter()
            .zip(&raised.components)
            .map(|(a, b)| a * b)
            .sum()
    }
}

impl Add for &PointTensor {
    type Output = PointTensor;
    fn add(self, rhs: &PointTensor) -> PointTensor {
        assert_eq!(self.components.len(), rhs.components.len());
        PointTensor {
            components: self
                .components
                .iter()
                .zip(&rhs.components)
                .map(|(a, b)| a + b)
                .collect(),
            form: self.form && rhs.form,
            ..*self
        }
    }
}

impl Sub for &PointTensor {
    type Output = PointTensor;
    fn sub(self, rhs: &PointTensor) -> PointTensor {
        assert_eq!(self.components.len(), rhs.components.len());
        PointTensor {
            components: self
                .components
                .iter()
                .zip(&rhs.components)
                .map(|(a, b)| a - b)
                .collect(),
            form: self.form && rhs.form,
            ..*self
        }
    }
}

impl fmt::Display for PointTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "tensor(dim={}, valence={}) {:?}", self.dim, self.valence, self.components)
    }
}

pub(crate) fn decode_index(mut flat: usize, dim: usize, idx: &mut [usize]) {
    for slot in idx.iter_mut().rev() {
        *slot = flat % dim;
        flat /= dim;
    }
}

/// All permutations of `0..n` with their signs.
pub fn signed_permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
    fn heap(k: usize, perm: &mut Vec<usize>, sign: &mut f64, out: &mut Vec<(Vec<usize>, f64)>) {
        if k <= 1 {
            out.push((perm.clone(), *sign));
            return;
        }
        for i in 0..k - 1 {
            heap(k - 1, perm, sign, out);
            if k % 2 == 0 {
                perm.swap(i, k - 1);
            } else {
                perm.swap(0, k - 1);
            }
            *sign = -*sign;
        }
        heap(k - 1, perm, sign, out);
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut sign = 1.0;
    let mut out = Vec::new();
    heap(n, &mut perm, &mut sign, &mut out);
    out
}

/// Central-difference gradient of a tensor-valued map.
///
/// The result has one more slot than `f`'s value; slot 0 is the
/// differentiation direction: `out[k, i..] ≈ ∂_k f_{i..}`.
pub fn partial_derivatives<F>(
    f: F,
    point: &Point,
    step: f64,
    domain: &ChartDomain,
    chart: &str,
) -> Result<PointTensor>
where
    F: Fn(&Point) -> Result<PointTensor>,
{
    domain.require_margin(point, step, chart)?;
    let dim = point.dim();
    let mut out: Option<PointTensor> = None;
    for k in 0..dim {
        let plus = f(&point.shifted(k, step))?;
        let minus = f(&point.shifted(k, -step))?;
        let block = plus.components.len();
        let o = out.get_or_insert_with(|| PointTensor::zeros(dim, plus.valence + 1));
        for (i, (a, b)) in plus.components.iter().zip(&minus.components).enumerate() {
            o.components[k * block + i] = (a - b) / (2.0 * step);
        }
    }
    out.ok_or_else(|| GeometryError::Contract("zero-dimensional chart".into()))
}

/// Exterior derivative assembled from a gradient whose slot 0 is the
/// differentiation direction: `(dα)_{i₀..i_p} = Σ_k (−1)^k ∂_{i_k} α_{..î_k..}`.
pub fn antisymmetrized_gradient(grad: &PointTensor) -> PointTensor {
    let q = grad.valence;
    let mut src = vec![0usize; q];
    PointTensor::from_fn(grad.dim, q, |idx| {
        let mut acc = 0.0;
        for k in 0..q {
            src[0] = idx[k];
            let mut pos = 1;
            for (j, &i) in idx.iter().enumerate() {
                if j != k {
                    src[pos] = i;
                    pos += 1;
                }
            }
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * grad.get(&src);
        }
        acc
    })
    .into_form()
}

/// Connection coefficients `Γ^k_{ab}` with `∇_{∂_a} ∂_b = Γ^k_{ab} ∂_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficients {
    dim: usize,
    data: Vec<f64>,
}

impl Coefficients {
    pub fn zeros(dim: usize) -> Self {
        Coefficients {
            dim,
            data: vec![0.0; dim * dim * dim],
        }
    }

    /// Raise the last slot of `lowered[a,b,c] = g(∇_a ∂_b, ∂_c)`.
    pub fn from_lowered(lowered: &PointTensor, inverse_metric: &DMatrix<f64>) -> Self {
        let dim = lowered.dim;
        let mut out = Self::zeros(dim);
        for k in 0..dim {
            for a in 0..dim {
                for b in 0..dim {
                    let mut acc = 0.0;
                    for c in 0..dim {
                        acc += inverse_metric[(k, c)] * lowered.get(&[a, b, c]);
                    }
                    out.data[(k * dim + a) * dim + b] = acc;
                }
            }
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, k: usize, a: usize, b: usize) -> f64 {
        self.data[(k * self.dim + a) * self.dim + b]
    }

    /// Storage as a three-slot array `[k, a, b]`, for differencing.
    pub fn as_array(&self) -> PointTensor {
        PointTensor::from_components(self.dim, 3, self.data.clone())
    }

    pub fn from_array(t: &PointTensor) -> Self {
        assert_eq!(t.valence, 3);
        Coefficients {
            dim: t.dim,
            data: t.components.clone(),
        }
    }

    pub fn max_abs_diff(&self, other: &Coefficients) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// `(∇_a t)_{b..} = ∂_a t_{b..} − Σ_slots Γ^m_{a b_s} t_{..m..}`, given the
/// central-difference gradient of `t` (slot 0 = direction).
pub fn covariant_from_gradient(
    grad: &PointTensor,
    value: &PointTensor,
    gamma: &Coefficients,
) -> PointTensor {
    let dim = value.dim;
    let p = value.valence;
    let mut src = vec![0usize; p];
    PointTensor::from_fn(dim, p + 1, |idx| {
        let a = idx[0];
        let mut acc = grad.get(idx);
        for s in 0..p {
            src.copy_from_slice(&idx[1..]);
            let b = idx[1 + s];
            for m in 0..dim {
                let g = gamma.get(m, a, b);
                if g != 0.0 {
                    src[s] = m;
                    acc -= g * value.get(&src);
                }
            }
        }
        acc
    })
}

/// Christoffel symbols of the first kind from the metric gradient
/// `dg[k,a,b] = ∂_k g_ab`: `Γ_{abc} = ½(∂_a g_bc + ∂_b g_ac − ∂_c g_ab)`.
pub fn christoffel_lowered(dg: &PointTensor) -> PointTensor {
    PointTensor::from_fn(dg.dim, 3, |i| {
        let (a, b, c) = (i[0], i[1], i[2]);
        0.5 * (dg.get(&[a, b, c]) + dg.get(&[b, a, c]) - dg.get(&[c, a, b]))
    })
}

/// Pointwise evaluation map shared by every tensor field.
pub type FieldFn = dyn Fn(&Point) -> Result<PointTensor> + Send + Sync;

/// A tensor field on a chart: an evaluation map plus its declared shape.
#[derive(Clone)]
pub struct TensorField {
    valence: usize,
    form: bool,
    domain: ChartDomain,
    name: String,
    eval: Arc<FieldFn>,
}

impl fmt::Debug for TensorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TensorField")
            .field("name", &self.name)
            .field("valence", &self.valence)
            .field("form", &self.form)
            .finish()
    }
}

impl TensorField {
    pub fn new<F>(name: impl Into<String>, valence: usize, form: bool, domain: ChartDomain, f: F) -> Self
    where
        F: Fn(&Point) -> Result<PointTensor> + Send + Sync + 'static,
    {
        TensorField {
            valence,
            form,
            domain,
            name: name.into(),
            eval: Arc::new(f),
        }
    }

    pub fn valence(&self) -> usize {
        self.valence
    }

    pub fn is_form(&self) -> bool {
        self.form
    }

    pub fn domain(&self) -> &ChartDomain {
        &self.domain
    }

    pub fn evaluate(&self, point: &Point) -> Result<PointTensor> {
        self.domain.require_margin(point, 0.0, &self.name)?;
        let t = (self.eval)(point)?;
        if t.valence != self.valence || t.dim != point.dim() {
            return Err(GeometryError::Contract(format!(
                "field `{}` declared valence {} but produced valence {}",
                self.name, self.valence, t.valence
            )));
        }
        Ok(t.with_form_flag(self.form))
    }

    fn gradient(&self, point: &Point, step: f64) -> Result<PointTensor> {
        partial_derivatives(|q| self.evaluate(q), point, step, &self.domain, &self.name)
    }
}

/// `dα` at a point, by central differences of step `step`.
pub fn exterior_derivative(field: &TensorField, point: &Point, step: f64) -> Result<PointTensor> {
    if !field.form {
        return Err(GeometryError::Contract(
            "exterior derivative of a field that is not a form".into(),
        ));
    }
    Ok(antisymmetrized_gradient(&field.gradient(point, step)?))
}

/// Levi-Civita coefficients of a metric field at a point.
pub fn levi_civita_of(metric: &TensorField, point: &Point, step: f64) -> Result<Coefficients> {
    let g = metric.evaluate(point)?.to_matrix();
    let ginv = invert_spd(&g, point)?;
    let dg = metric.gradient(point, step)?;
    Ok(Coefficients::from_lowered(&christoffel_lowered(&dg), &ginv))
}

/// `(d†α)(X₁..X_{p−1}) = −Σ_i (∇^g_{e_i} α)(e_i, X₁..X_{p−1})`.
pub fn codifferential(
    field: &TensorField,
    point: &Point,
    metric: &TensorField,
    step: f64,
) -> Result<PointTensor> {
    if !field.form || field.valence == 0 {
        return Err(GeometryError::Contract(
            "codifferential needs a form of degree ≥ 1".into(),
        ));
    }
    let gamma = levi_civita_of(metric, point, step)?;
    let g = metric.evaluate(point)?.to_matrix();
    let ginv = invert_spd(&g, point)?;
    let nabla = covariant_from_gradient(&field.gradient(point, step)?, &field.evaluate(point)?, &gamma);
    Ok(nabla.trace_pair(0, 1, &ginv).scaled(-1.0).with_form_flag(true))
}

/// Inverse of a symmetric positive definite matrix, or a numeric error.
pub fn invert_spd(g: &DMatrix<f64>, point: &Point) -> Result<DMatrix<f64>> {
    if g.iter().any(|x| !x.is_finite()) {
        return Err(GeometryError::numeric(&point.coords, "metric has non-finite entries"));
    }
    let asym = (g - g.transpose()).amax();
    if asym > 1e-10 * g.amax().max(1.0) {
        return Err(GeometryError::numeric(
            &point.coords,
            format!("metric is not symmetric (defect {asym:.3e})"),
        ));
    }
    g.clone()
        .cholesky()
        .map(|c| c.inverse())
        .ok_or_else(|| GeometryError::numeric(&point.coords, "metric is not positive definite"))
}

/// Orientation used by the Hodge star and the self-dual split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// `dx¹ ∧ .. ∧ dx^{2n}` is positive.
    Coordinate,
    Reversed,
}

impl Orientation {
    fn sign(self) -> f64 {
        match self {
            Orientation::Coordinate => 1.0,
            Orientation::Reversed => -1.0,
        }
    }
}

/// Hodge star `(*α)_{j..} = (1/p!) √det g α^{i..} ε_{i.. j..}`.
pub fn hodge_star(
    form: &PointTensor,
    metric: &DMatrix<f64>,
    orientation: Orientation,
    point: &Point,
) -> Result<PointTensor> {
    let m = form.dim;
    let p = form.valence;
    let ginv = invert_spd(metric, point)?;
    let det = metric.determinant();
    let mut raised = form.clone();
    for s in 0..p {
        raised = raised.transform_slot(s, &ginv);
    }
    let scale = orientation.sign() * det.sqrt() / factorial(p);
    let mut out = PointTensor::zeros(m, m - p);
    let mut src = vec![0usize; p];
    let mut dst = vec![0usize; m - p];
    for (perm, sign) in signed_permutations(m) {
        src.copy_from_slice(&perm[..p]);
        dst.copy_from_slice(&perm[p..]);
        let o = out.offset(&dst);
        out.components[o] += sign * scale * raised.get(&src);
    }
    Ok(out.into_form())
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `(α∧β)(X₁..X_{p+q}) = 1/(p!q!) Σ_σ sgn σ α(X_σ..) β(X_σ..)`.
pub fn wedge(alpha: &PointTensor, beta: &PointTensor) -> PointTensor {
    let dim = alpha.dim;
    let (p, q) = (alpha.valence, beta.valence);
    let perms = signed_permutations(p + q);
    let norm = factorial(p) * factorial(q);
    let mut a_idx = vec![0usize; p];
    let mut b_idx = vec![0usize; q];
    PointTensor::from_fn(dim, p + q, |idx| {
        let mut acc = 0.0;
        for (perm, sign) in &perms {
            for k in 0..p {
                a_idx[k] = idx[perm[k]];
            }
            for k in 0..q {
                b_idx[k] = idx[perm[p + k]];
            }
            acc += sign * alpha.get(&a_idx) * beta.get(&b_idx);
        }
        acc / norm
    })
    .into_form()
}

/// Interior product `(i_v α)(X..) = α(v, X..)` for a vector `v`.
pub fn interior(v: &[f64], alpha: &PointTensor) -> PointTensor {
    let dim = alpha.dim;
    let mut full = vec![0usize; alpha.valence];
    PointTensor::from_fn(dim, alpha.valence - 1, |idx| {
        full[1..].copy_from_slice(idx);
        (0..dim)
            .map(|a| {
                full[0] = a;
                v[a] * alpha.get(&full)
            })
            .sum()
    })
    .with_form_flag(alpha.form)
}

/// An orthonormal frame at a point, vectors given by contravariant components.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub vectors: Vec<Vec<f64>>,
}

impl Frame {
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    /// Matrix whose columns are the frame vectors.
    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |a, i| self.vectors[i][a])
    }

    pub fn gram(&self, metric: &DMatrix<f64>) -> DMatrix<f64> {
        let e = self.matrix();
        e.transpose() * metric * e
    }

    /// `Σ_i e_i ⊗ e_i`, equal to the inverse metric.
    pub fn sum_outer(&self) -> DMatrix<f64> {
        let e = self.matrix();
        &e * e.transpose()
    }

    /// `Σ_i e_i ⊗ J e_i`; contracting slots against it evaluates
    /// `Σ_i t(.., e_i, .., J e_i, ..)`.
    pub fn j_pairing(&self, j: &DMatrix<f64>) -> DMatrix<f64> {
        let e = self.matrix();
        &e * (j * &e).transpose()
    }

    /// Components `t(e_{i₁}, .., e_{i_p})` in this frame.
    pub fn components_of(&self, t: &PointTensor) -> PointTensor {
        let e = self.matrix();
        let mut out = t.clone();
        for s in 0..t.valence {
            out = out.transform_slot(s, &e);
        }
        out
    }
}

/// Gram–Schmidt on the coordinate basis, in index order, with respect to `g`.
pub fn orthonormal_frame(metric: &DMatrix<f64>, point: &Point) -> Result<Frame> {
    invert_spd(metric, point)?;
    let n = metric.nrows();
    let inner = |u: &[f64], v: &[f64]| -> f64 {
        let mut acc = 0.0;
        for a in 0..n {
            for b in 0..n {
                acc += u[a] * metric[(a, b)] * v[b];
            }
        }
        acc
    };
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(n);
    for k in 0..n {
        let mut v = vec![0.0; n];
        v[k] = 1.0;
        // two passes keep the Gram defect at roundoff for badly scaled charts
        for _ in 0..2 {
            for e in &vectors {
                let c = inner(&v, e);
                for a in 0..n {
                    v[a] -= c * e[a];
                }
            }
        }
        let norm2 = inner(&v, &v);
        if norm2 <= 0.0 || !norm2.is_finite() {
            return Err(GeometryError::numeric(&point.coords, "metric is not positive definite"));
        }
        let s = norm2.sqrt();
        vectors.push(v.into_iter().map(|x| x / s).collect());
    }
    Ok(Frame { vectors })
}

/// `Σ_i α(J e_i, e_i)` for a (0,2)-tensor.
///
/// Traces written `Σ α(e_i, J e_i)` are the negative of this value.
pub fn j_trace(two_form: &PointTensor, j: &DMatrix<f64>, frame: &Frame) -> Result<f64> {
    if two_form.valence != 2 || two_form.dim != frame.dim() {
        return Err(GeometryError::Contract(format!(
            "j_trace needs a (0,2)-tensor of dimension {}, got valence {} dimension {}",
            frame.dim(),
            two_form.valence,
            two_form.dim
        )));
    }
    Ok(two_form.trace_pair(1, 0, &frame.j_pairing(j)).value())
}

/// Full-index squared norm `Σ t(e_{i₁},..,e_{i_p})²`, no combinatorial factor.
pub fn tensor_norm_sq(t: &PointTensor, frame: &Frame) -> f64 {
    frame.components_of(t).components.iter().map(|c| c * c).sum()
}

/// Largest component of `t` in an orthonormal frame.
pub fn frame_max_abs(t: &PointTensor, frame: &Frame) -> f64 {
    frame.components_of(t).max_abs()
}

/// The cyclic sum `σ_{XYZ} t(X,Y,Z,..)` over the first three slots.
pub fn cyclic_sum(t: &PointTensor) -> PointTensor {
    assert!(t.valence >= 3);
    let mut yzx: Vec<usize> = (0..t.valence).collect();
    yzx[..3].copy_from_slice(&[1, 2, 0]);
    let mut zxy: Vec<usize> = (0..t.valence).collect();
    zxy[..3].copy_from_slice(&[2, 0, 1]);
    let a = t.permuted(&yzx);
    let b = t.permuted(&zxy);
    &(t + &a) + &b
}

/// `Jα = −α∘J` for a one-form.
pub fn j_one_form(alpha: &PointTensor, j: &DMatrix<f64>) -> PointTensor {
    let dim = alpha.dim;
    PointTensor::from_fn(dim, 1, |i| -(0..dim).map(|b| alpha.get(&[b]) * j[(b, i[0])]).sum::<f64>())
        .into_form()
}

/// `α(J·, J·)` for a (0,2)-tensor.
pub fn j_conjugate(alpha: &PointTensor, j: &DMatrix<f64>) -> PointTensor {
    alpha.transform_slot(0, j).transform_slot(1, j)
}

/// Raise a one-form to a vector with the inverse metric.
pub fn sharp(alpha: &PointTensor, inverse_metric: &DMatrix<f64>) -> Vec<f64> {
    let dim = alpha.dim;
    (0..dim)
        .map(|a| (0..dim).map(|b| inverse_metric[(a, b)] * alpha.get(&[b])).sum())
        .collect()
}
