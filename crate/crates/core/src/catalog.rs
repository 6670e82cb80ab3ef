//! Chart descriptions of the example geometries and the conformal-rescaling
//! constructor.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{GeometryError, Result};
use crate::tensor::{invert_spd, partial_derivatives, Axis, ChartDomain, Point, PointTensor};

/// Matrix-valued field on a chart (metric `g_ab` or endomorphism `J^a_b`).
pub type MatrixFn = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;
/// Scalar field on a chart.
pub type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Names accepted by [`get_manifold`], in catalog order.
pub const CATALOG: [&str; 7] = [
    "flat_torus_4",
    "flat_torus_6",
    "hopf_standard",
    "su2xu1",
    "hopf_hkt",
    "conf_torus_4",
    "conf_torus_6",
];

/// The manifold a rescaled manifold was built from, and the exponent `f`
/// in `g = e^{2f} g_parent`.
#[derive(Clone)]
pub struct ConformalParent {
    pub parent: Arc<HermitianManifold>,
    pub factor: ScalarFn,
}

/// A Hermitian structure `(g, J)` given in a single chart.
///
/// `J` is stored as the matrix of the endomorphism: `(JX)^a = J[a,b] X^b`.
#[derive(Clone)]
pub struct HermitianManifold {
    name: String,
    dim: usize,
    domain: ChartDomain,
    metric: MatrixFn,
    complex_structure: MatrixFn,
    dilaton: Option<ScalarFn>,
    hypercomplex: Option<(MatrixFn, MatrixFn)>,
    conformal_parent: Option<ConformalParent>,
    lck: bool,
}

impl fmt::Debug for HermitianManifold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HermitianManifold")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("domain", &self.domain)
            .field("dilaton", &self.dilaton.is_some())
            .field("hypercomplex", &self.hypercomplex.is_some())
            .field(
                "conformal_parent",
                &self.conformal_parent.as_ref().map(|p| p.parent.name.clone()),
            )
            .field("lck", &self.lck)
            .finish()
    }
}

impl HermitianManifold {
    /// A custom Hermitian manifold. Only the shapes are checked here; the
    /// geometric invariants are checked by [`HermitianManifold::check_invariants`].
    pub fn new(
        name: impl Into<String>,
        domain: ChartDomain,
        metric: MatrixFn,
        complex_structure: MatrixFn,
    ) -> Result<Self> {
        let dim = domain.dim();
        if dim < 4 || dim % 2 != 0 {
            return Err(GeometryError::Contract(format!(
                "Hermitian manifolds need even dimension ≥ 4, got {dim}"
            )));
        }
        Ok(HermitianManifold {
            name: name.into(),
            dim,
            domain,
            metric,
            complex_structure,
            dilaton: None,
            hypercomplex: None,
            conformal_parent: None,
            lck: false,
        })
    }

    pub fn with_dilaton(mut self, phi: ScalarFn) -> Self {
        self.dilaton = Some(phi);
        self
    }

    /// Attach `J₂, J₃` completing `J₁ = J` to a hypercomplex triple.
    pub fn with_hypercomplex(mut self, j2: MatrixFn, j3: MatrixFn) -> Self {
        self.hypercomplex = Some((j2, j3));
        self
    }

    /// Declare the structure locally conformally Kähler.
    pub fn declare_lck(mut self) -> Self {
        self.lck = true;
        self
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Complex dimension `n`.
    pub fn n(&self) -> usize {
        self.dim / 2
    }

    pub fn domain(&self) -> &ChartDomain {
        &self.domain
    }

    pub fn is_lck(&self) -> bool {
        self.lck
    }

    pub fn dilaton(&self) -> Option<&ScalarFn> {
        self.dilaton.as_ref()
    }

    pub fn conformal_parent(&self) -> Option<&ConformalParent> {
        self.conformal_parent.as_ref()
    }

    pub fn has_hypercomplex(&self) -> bool {
        self.hypercomplex.is_some()
    }

    fn check_point(&self, point: &Point) -> Result<()> {
        self.domain.require_margin(point, 0.0, &self.name)
    }

    pub fn metric_at(&self, point: &Point) -> Result<DMatrix<f64>> {
        self.check_point(point)?;
        Ok((self.metric)(&point.coords))
    }

    pub fn complex_structure_at(&self, point: &Point) -> Result<DMatrix<f64>> {
        self.check_point(point)?;
        Ok((self.complex_structure)(&point.coords))
    }

    pub fn dilaton_at(&self, point: &Point) -> Result<Option<f64>> {
        self.check_point(point)?;
        Ok(self.dilaton.as_ref().map(|phi| phi(&point.coords)))
    }

    /// The same metric with `J` replaced by member `index ∈ {1,2,3}` of the
    /// hypercomplex triple.
    pub fn with_member(&self, index: usize) -> Result<HermitianManifold> {
        let (j2, j3) = self.hypercomplex.as_ref().ok_or_else(|| {
            GeometryError::Precondition(format!("`{}` carries no hypercomplex triple", self.name))
        })?;
        let j = match index {
            1 => self.complex_structure.clone(),
            2 => j2.clone(),
            3 => j3.clone(),
            _ => {
                return Err(GeometryError::Contract(format!(
                    "hypercomplex member {index} out of range 1..=3"
                )))
            }
        };
        let mut out = self.clone();
        out.name = format!("{}[J{index}]", self.name);
        out.complex_structure = j;
        out.hypercomplex = None;
        Ok(out)
    }

    /// Pointwise checks of the structural invariants.
    pub fn check_invariants(&self, point: &Point, step: f64) -> Result<InvariantResiduals> {
        let g = self.metric_at(point)?;
        let j = self.complex_structure_at(point)?;
        let n = self.dim;
        let id = DMatrix::<f64>::identity(n, n);
        invert_spd(&g, point)?;
        let j_square = (&j * &j + &id).amax();
        let compatibility = (j.transpose() * &g * &j - &g).amax();
        let nijenhuis_max = nijenhuis(&self.complex_structure, point, step, &self.domain, &self.name)?.max_abs();
        let quaternion = match &self.hypercomplex {
            None => None,
            Some((j2f, j3f)) => {
                let j2 = j2f(&point.coords);
                let j3 = j3f(&point.coords);
                let js = [j.clone(), j2, j3];
                let mut worst: f64 = 0.0;
                for a in 0..3 {
                    // J_a is also g-orthogonal and integrable
                    worst = worst.max((js[a].transpose() * &g * &js[a] - &g).amax());
                    for b in 0..3 {
                        let mut expected = if a == b { -id.clone() } else { DMatrix::zeros(n, n) };
                        if a != b {
                            let c = 3 - a - b;
                            let eps = if (b + 3 - a) % 3 == 1 { 1.0 } else { -1.0 };
                            expected += &js[c] * eps;
                        }
                        worst = worst.max((&js[a] * &js[b] - expected).amax());
                    }
                }
                let (j2f, j3f) = self.hypercomplex.as_ref().expect("checked above");
                for jf in [j2f, j3f] {
                    worst = worst.max(nijenhuis(jf, point, step, &self.domain, &self.name)?.max_abs());
                }
                Some(worst)
            }
        };
        Ok(InvariantResiduals {
            j_square,
            compatibility,
            nijenhuis: nijenhuis_max,
            quaternion,
        })
    }
}

/// Residuals of the defining properties of a Hermitian structure at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InvariantResiduals {
    /// `‖J² + Id‖∞`
    pub j_square: f64,
    /// `‖JᵀgJ − g‖∞`
    pub compatibility: f64,
    /// `‖N_J‖∞`, by central differences
    pub nijenhuis: f64,
    /// quaternion relations, orthogonality and integrability of `J₂, J₃`
    pub quaternion: Option<f64>,
}

impl InvariantResiduals {
    pub fn within(&self, algebraic: f64, differential: f64) -> bool {
        self.j_square <= algebraic
            && self.compatibility <= algebraic
            && self.nijenhuis <= differential
            && self.quaternion.map_or(true, |q| q <= differential)
    }
}

/// Nijenhuis tensor `N(X,Y) = [JX,JY] − J[JX,Y] − J[X,JY] − [X,Y]`, as
/// `out[i,j,k] = N(∂_i, ∂_j)^k`.
fn nijenhuis(j: &MatrixFn, point: &Point, step: f64, domain: &ChartDomain, chart: &str) -> Result<PointTensor> {
    let n = point.dim();
    let jm = j(&point.coords);
    let dj = partial_derivatives(
        |q| Ok(PointTensor::from_matrix(&j(&q.coords))),
        point,
        step,
        domain,
        chart,
    )?;
    // dj[a, k, b] = ∂_a J^k_b
    Ok(PointTensor::from_fn(n, 3, |idx| {
        let (i, jj, k) = (idx[0], idx[1], idx[2]);
        let mut acc = 0.0;
        for a in 0..n {
            acc += jm[(a, i)] * dj.get(&[a, k, jj]) - jm[(a, jj)] * dj.get(&[a, k, i]);
            acc -= jm[(k, a)] * (dj.get(&[i, a, jj]) - dj.get(&[jj, a, i]));
        }
        acc
    }))
}

/// Standard complex structure `J∂_{x_k} = ∂_{y_k}` in coordinates `(x₁,y₁,x₂,y₂,..)`.
pub fn standard_j(dim: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(dim, dim);
    for k in 0..dim / 2 {
        j[(2 * k + 1, 2 * k)] = 1.0;
        j[(2 * k, 2 * k + 1)] = -1.0;
    }
    j
}

fn constant(m: DMatrix<f64>) -> MatrixFn {
    Arc::new(move |_| m.clone())
}

/// `g = e^{2f} g_m` with the same complex structure; the result records `m`
/// as its conformal parent and inherits the LCK declaration.
pub fn conformal_rescale(m: &HermitianManifold, name: impl Into<String>, f: ScalarFn) -> HermitianManifold {
    let metric = m.metric.clone();
    let factor = f.clone();
    let rescaled: MatrixFn = Arc::new(move |x| metric(x) * (2.0 * factor(x)).exp());
    HermitianManifold {
        name: name.into(),
        dim: m.dim,
        domain: m.domain.clone(),
        metric: rescaled,
        complex_structure: m.complex_structure.clone(),
        dilaton: None,
        hypercomplex: m.hypercomplex.clone(),
        conformal_parent: Some(ConformalParent {
            parent: Arc::new(m.clone()),
            factor: f,
        }),
        lck: m.lck,
    }
}

/// Flat metric and standard `J` on the torus `ℝ^dim / 2πℤ^dim`.
pub fn flat_torus(dim: usize) -> Result<HermitianManifold> {
    Ok(HermitianManifold::new(
        format!("flat_torus_{dim}"),
        ChartDomain::torus(dim),
        constant(DMatrix::identity(dim, dim)),
        constant(standard_j(dim)),
    )?
    .declare_lck())
}

/// Flat `ℂ² ∖ {0}` restricted to the annulus `0.5 ≤ r ≤ 2`.
pub fn flat_annulus() -> HermitianManifold {
    HermitianManifold::new(
        "flat_annulus_4",
        ChartDomain::Annulus {
            dim: 4,
            inner: 0.5,
            outer: 2.0,
        },
        constant(DMatrix::identity(4, 4)),
        constant(standard_j(4)),
    )
    .expect("dimension 4")
    .declare_lck()
}

fn log_radius(x: &[f64]) -> f64 {
    0.5 * x.iter().map(|c| c * c).sum::<f64>().ln()
}

/// `g = δ/r²` on the annulus, standard `J`, dilaton `φ = −ln r`.
pub fn hopf_standard() -> HermitianManifold {
    let f: ScalarFn = Arc::new(|x| -log_radius(x));
    conformal_rescale(&flat_annulus(), "hopf_standard", f.clone()).with_dilaton(f)
}

/// Left multiplication by `j` and `k` on `ℍ = ℂ ⊕ ℂj` in coordinates `(x₁,y₁,x₂,y₂)`.
pub fn quaternionic_pair() -> (DMatrix<f64>, DMatrix<f64>) {
    #[rustfmt::skip]
    let j2 = DMatrix::from_row_slice(4, 4, &[
        0.0, 0.0, -1.0, 0.0,
        0.0, 0.0, 0.0, 1.0,
        1.0, 0.0, 0.0, 0.0,
        0.0, -1.0, 0.0, 0.0,
    ]);
    let j3 = standard_j(4) * &j2;
    (j2, j3)
}

/// Hopf metric with the quaternionic triple.
pub fn hopf_hkt() -> HermitianManifold {
    let (j2, j3) = quaternionic_pair();
    hopf_standard()
        .renamed("hopf_hkt")
        .with_hypercomplex(constant(j2), constant(j3))
}

/// The unit-sphere left-invariant coframe `(σ₁, σ₂, σ₃, dt)` in Euler angles
/// `(θ, φ, ψ, t)`, as rows.
pub fn su2xu1_coframe(x: &[f64]) -> DMatrix<f64> {
    let (th, psi) = (x[0], x[2]);
    let (st, ct) = th.sin_cos();
    let (sp, cp) = psi.sin_cos();
    #[rustfmt::skip]
    let s = DMatrix::from_row_slice(4, 4, &[
        0.5 * sp, -0.5 * st * cp, 0.0, 0.0,
        0.5 * cp,  0.5 * st * sp, 0.0, 0.0,
        0.0,       0.5 * ct,      0.5, 0.0,
        0.0,       0.0,           0.0, 1.0,
    ]);
    s
}

/// `SU(2) × U(1)` with the bi-invariant metric `σ₁²+σ₂²+σ₃²+dt²` and
/// `Jσ₁ = σ₂`, `Jσ₃ = dt`.
pub fn su2xu1() -> HermitianManifold {
    let domain = ChartDomain::Box {
        axes: vec![
            Axis::bounded(0.2, PI - 0.2),
            Axis::periodic(0.0, 2.0 * PI),
            Axis::periodic(0.0, 4.0 * PI),
            Axis::periodic(0.0, 2.0 * PI),
        ],
    };
    let metric: MatrixFn = Arc::new(|x| {
        let s = su2xu1_coframe(x);
        s.transpose() * s
    });
    let jf = standard_j(4);
    let j: MatrixFn = Arc::new(move |x| {
        let s = su2xu1_coframe(x);
        let s_inv = s.clone().try_inverse().expect("coframe invertible away from the poles");
        s_inv * &jf * s
    });
    HermitianManifold::new("su2xu1", domain, metric, j)
        .expect("dimension 4")
        .declare_lck()
}

/// `f = 0.3 sin(x₁) cos(x₂)`, the conformal exponent of the rescaled tori.
pub fn torus_factor() -> ScalarFn {
    Arc::new(|x| 0.3 * x[0].sin() * x[2].cos())
}

pub fn conf_torus(dim: usize) -> Result<HermitianManifold> {
    Ok(conformal_rescale(
        &flat_torus(dim)?,
        format!("conf_torus_{dim}"),
        torus_factor(),
    ))
}

/// A seeded Hermitian metric on the torus with standard `J` and no special
/// structure: `g = h + Jᵀ h J` with `h = I + amplitude·M(x)`, each entry of
/// the symmetric `M` a single Fourier mode. `h` stays positive definite for
/// `amplitude < 1/dim`.
pub fn generic_hermitian(dim: usize, amplitude: f64, seed: u64) -> Result<HermitianManifold> {
    if !(amplitude >= 0.0 && amplitude * (dim as f64) < 1.0) {
        return Err(GeometryError::Contract(format!(
            "amplitude must lie in [0, 1/{dim}), got {amplitude}"
        )));
    }
    let mut state = seed;
    let mut draw = || {
        state = crate::sampling::splitmix64(state);
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    // (coefficient, integer wave vector, phase) for each a ≤ b
    let mut modes = Vec::new();
    for _ in 0..dim * (dim + 1) / 2 {
        let c = 2.0 * draw() - 1.0;
        let k: Vec<f64> = (0..dim).map(|_| (3.0 * draw()).floor() - 1.0).collect();
        modes.push((c, k, 2.0 * PI * draw()));
    }
    let jf = standard_j(dim);
    let metric: MatrixFn = Arc::new(move |x| {
        let mut h = DMatrix::identity(dim, dim);
        let mut m = 0;
        for a in 0..dim {
            for b in a..dim {
                let (c, k, phase) = &modes[m];
                let arg: f64 = k.iter().zip(x).map(|(k, x)| k * x).sum::<f64>() + phase;
                let v = amplitude * c * arg.sin();
                h[(a, b)] += v;
                if a != b {
                    h[(b, a)] += v;
                }
                m += 1;
            }
        }
        &h + jf.transpose() * &h * &jf
    });
    HermitianManifold::new(format!("generic_{dim}"), ChartDomain::torus(dim), metric, constant(standard_j(dim)))
}

/// Look up a catalog manifold by name.
pub fn get_manifold(name: &str) -> Result<HermitianManifold> {
    match name {
        "flat_torus_4" => flat_torus(4),
        "flat_torus_6" => flat_torus(6),
        "hopf_standard" => Ok(hopf_standard()),
        "su2xu1" => Ok(su2xu1()),
        "hopf_hkt" => Ok(hopf_hkt()),
        "conf_torus_4" => conf_torus(4),
        "conf_torus_6" => conf_torus(6),
        _ => Err(GeometryError::UnknownManifold {
            name: name.to_string(),
            catalog: CATALOG.iter().map(|s| s.to_string()).collect(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generic_metric_is_hermitian() {
        let m = generic_hermitian(6, 0.15, 9).unwrap();
        let p = Point::new(vec![0.1, 0.7, 1.9, -0.4, 2.2, 0.3]);
        let r = m.check_invariants(&p, 1e-4).unwrap();
        assert!(r.within(1e-12, 1e-8), "{r:?}");
        assert!(generic_hermitian(4, 0.3, 0).is_err());
    }

    #[test]
    fn every_entry_resolves() {
        for name in CATALOG {
            let m = get_manifold(name).unwrap();
            assert_eq!(m.name(), name);
        }
    }

    #[test]
    fn unknown_name_lists_catalog() {
        match get_manifold("k3") {
            Err(GeometryError::UnknownManifold { catalog, .. }) => assert_eq!(catalog.len(), CATALOG.len()),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn zero_rescale_is_identity() {
        let base = flat_torus(4).unwrap();
        let same = conformal_rescale(&base, "same", Arc::new(|_| 0.0));
        let p = Point::new(vec![0.1, 0.2, 0.3, 0.4]);
        assert_eq!(same.metric_at(&p).unwrap(), base.metric_at(&p).unwrap());
    }

    #[test]
    fn hopf_metric_is_inverse_square_radius() {
        let m = hopf_standard();
        let p = Point::new(vec![1.0, 0.0, 1.0, 0.0]);
        let g = m.metric_at(&p).unwrap();
        assert!((g[(0, 0)] - 0.5).abs() < 1e-15);
        assert_eq!(g[(0, 1)], 0.0);
    }

    #[test]
    fn quaternionic_triple_relations() {
        let m = hopf_hkt();
        let p = Point::new(vec![0.7, 0.2, -0.4, 0.3]);
        let r = m.check_invariants(&p, 1e-4).unwrap();
        assert!(r.quaternion.unwrap() < 1e-12);
    }

    #[test]
    fn su2xu1_structure_is_hermitian_and_integrable() {
        let m = su2xu1();
        let p = Point::new(vec![1.0, 0.4, 2.0, 0.3]);
        let r = m.check_invariants(&p, 1e-4).unwrap();
        assert!(r.within(1e-10, 1e-6), "{r:?}");
    }

    #[test]
    fn non_integrable_structure_detected() {
        let domain = ChartDomain::torus(4);
        let j: MatrixFn = Arc::new(|x| {
            // rotate the standard structure by a point-dependent angle mixing the two planes
            let (s, c) = (0.5 * x[0]).sin_cos();
            let r = DMatrix::from_row_slice(
                4,
                4,
                &[c, 0.0, -s, 0.0, 0.0, 1.0, 0.0, 0.0, s, 0.0, c, 0.0, 0.0, 0.0, 0.0, 1.0],
            );
            r.transpose() * standard_j(4) * r
        });
        let m = HermitianManifold::new("twisted", domain, constant(DMatrix::identity(4, 4)), j).unwrap();
        let r = m.check_invariants(&Point::new(vec![0.3, 0.1, 0.2, 0.5]), 1e-4).unwrap();
        assert!(r.j_square < 1e-12 && r.compatibility < 1e-12);
        assert!(r.nijenhuis > 1e-3, "{r:?}");
    }

    #[test]
    fn odd_dimension_rejected() {
        let err = HermitianManifold::new(
            "odd",
            ChartDomain::torus(5),
            constant(DMatrix::identity(5, 5)),
            constant(DMatrix::identity(5, 5)),
        )
        .unwrap_err();
        assert!(matches!(err, GeometryError::Contract(_)));
    }
}
