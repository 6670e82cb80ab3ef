//! String equations with `H = T`, for a constant or prescribed dilaton,
//! and their rewritten forms in terms of `θ` and `η = θ − 2dφ`.
//!
//! The third (dilaton) equation is not evaluated.

use rayon::prelude::*;
use serde::Serialize;

use crate::catalog::{HermitianManifold, ScalarFn};
use crate::classify::StructureFlags;
use crate::connections::{Flavor, Geometry};
use crate::curvature::{lambda_omega, ricci, riemann};
use crate::error::{GeometryError, Result};
use crate::identities::{ricci_form, torsion_square, Order, ResidualEntry, Tolerances};
use crate::report::{real, reals};
use crate::tensor::{exterior_derivative, frame_max_abs, interior, sharp, Point, PointTensor, TensorField};

#[derive(Clone)]
pub enum Dilaton {
    Constant,
    Field(ScalarFn),
}

impl std::fmt::Debug for Dilaton {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl Dilaton {
    /// The manifold's declared dilaton, if any.
    pub fn declared(m: &HermitianManifold) -> Option<Dilaton> {
        m.dilaton().cloned().map(Dilaton::Field)
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Dilaton::Constant)
    }

    pub fn label(&self) -> &'static str {
        match self {
            Dilaton::Constant => "constant",
            Dilaton::Field(_) => "declared",
        }
    }
}

struct DilatonFields {
    phi: TensorField,
    dphi: TensorField,
    eta: TensorField,
}

fn dilaton_fields(geo: &Geometry, dilaton: &Dilaton) -> DilatonFields {
    let domain = geo.manifold().domain().clone();
    let phi = match dilaton.clone() {
        Dilaton::Constant => TensorField::new("phi", 0, true, domain.clone(), |p| Ok(PointTensor::scalar(p.dim(), 0.0))),
        Dilaton::Field(f) => TensorField::new("phi", 0, true, domain.clone(), move |p| {
            Ok(PointTensor::scalar(p.dim(), f(&p.coords)))
        }),
    };
    let step = geo.step();
    let dphi = {
        let phi = phi.clone();
        TensorField::new("dphi", 1, true, domain.clone(), move |p| exterior_derivative(&phi, p, step))
    };
    let eta = {
        let dphi = dphi.clone();
        let geo = geo.clone();
        TensorField::new("eta", 1, true, domain, move |p| {
            Ok(&geo.lee_form_unchecked(p)? - &dphi.evaluate(p)?.scaled(2.0))
        })
    };
    DilatonFields { phi, dphi, eta }
}

/// Every pointwise quantity of the string checks, in frame sup-norm.
struct Sample {
    einstein: f64,
    flux: f64,
    flux_divergence: f64,
    susy: f64,
    eta_parallel: f64,
    stef: f64,
    ster: f64,
    cnew: f64,
    four2: Option<f64>,
    ric: f64,
    scal: f64,
    st1prime: f64,
    nabla_theta: f64,
    ns1: f64,
    killing: f64,
    rho: f64,
    eta: Vec<f64>,
}

fn transpose(t: &PointTensor) -> PointTensor {
    t.permuted(&[1, 0])
}

/// `(L_V g)_ab = V^c ∂_c g_ab + g_cb ∂_a V^c + g_ac ∂_b V^c` for `V = θ^#`.
fn lie_lee_metric(geo: &Geometry, p: &Point) -> Result<PointTensor> {
    let dim = geo.dim();
    let lee_vector = |q: &Point| -> Result<PointTensor> {
        Ok(PointTensor::from_vector(&sharp(&geo.lee_form_unchecked(q)?, &geo.inverse_metric(q)?)))
    };
    let v = lee_vector(p)?;
    let dv = geo.gradient(lee_vector, p)?;
    let dg = geo.gradient(|q| Ok(PointTensor::from_matrix(&geo.metric(q)?)), p)?;
    let g = geo.metric(p)?;
    Ok(PointTensor::from_fn(dim, 2, |i| {
        let (a, b) = (i[0], i[1]);
        (0..dim)
            .map(|c| v.get(&[c]) * dg.get(&[c, a, b]) + g[(c, b)] * dv.get(&[a, c]) + g[(a, c)] * dv.get(&[b, c]))
            .sum()
    }))
}

fn sample(geo: &Geometry, fields: &DilatonFields, p: &Point) -> Result<Sample> {
    let frame = geo.frame(p)?;
    let norm = |t: &PointTensor| frame_max_abs(t, &frame);
    let g = geo.metric(p)?;
    let ginv = geo.inverse_metric(p)?;
    let j = geo.j(p)?;
    let t = geo.torsion(p)?;
    let theta = geo.lee_form_unchecked(p)?;

    let ric_g = ricci(&riemann(geo, Flavor::LeviCivita, p)?, &ginv);
    let hess_phi = geo.covariant_derivative(Flavor::LeviCivita, &fields.dphi, p)?;
    let einstein = &(&ric_g - &torsion_square(&t, &ginv).scaled(0.25)) + &hess_phi.scaled(2.0);

    let dphi = fields.dphi.evaluate(p)?;
    let codiff_t = geo.codifferential_of(&geo.torsion_field(), p)?;
    let flux = &codiff_t + &interior(&sharp(&dphi, &ginv), &t).scaled(2.0);
    let weighted = {
        let phi = fields.phi.clone();
        geo.field("weighted_torsion", 3, true, move |geo, q| {
            Ok(geo.torsion(q)?.scaled((-2.0 * phi.evaluate(q)?.value()).exp()))
        })
    };
    let weight = (-2.0 * fields.phi.evaluate(p)?.value()).exp();
    let flux_divergence = &geo.codifferential_of(&weighted, p)? - &flux.scaled(weight);

    let eta = fields.eta.evaluate(p)?;
    let nabla_eta = geo.covariant_derivative(Flavor::Bismut, &fields.eta, p)?;
    let (lambda, _) = lambda_omega(geo, p)?;
    // λ^Ω(X, JY)
    let lambda_j = lambda.transform_slot(1, &j);
    let stef = &nabla_eta - &lambda_j.scaled(0.25);
    let ster = &nabla_eta - &transpose(&nabla_eta);
    let cnew = &(&nabla_eta + &transpose(&nabla_eta)) - &lambda_j.scaled(0.5);
    let four2 = if geo.dim() == 4 {
        let codiff_theta = geo.codifferential_of(&geo.lee_field(), p)?.value();
        Some(norm(&(&nabla_eta - &PointTensor::from_matrix(&g).scaled(0.5 * codiff_theta))))
    } else {
        None
    };

    let ric = ricci(&riemann(geo, Flavor::Bismut, p)?, &ginv);
    let nabla_theta = geo.covariant_derivative(Flavor::Bismut, &geo.lee_field(), p)?;
    let d_theta = geo.exterior_derivative_of(&geo.lee_field(), p)?;
    let ns1 = &codiff_t - &(&d_theta - &interior(&sharp(&theta, &ginv), &t));

    Ok(Sample {
        einstein: norm(&einstein),
        flux: norm(&flux),
        flux_divergence: norm(&flux_divergence),
        susy: norm(&eta),
        eta_parallel: norm(&nabla_eta),
        stef: norm(&stef),
        ster: norm(&ster),
        cnew: norm(&cnew),
        four2,
        ric: norm(&ric),
        scal: ric.trace_pair(0, 1, &ginv).value().abs(),
        st1prime: norm(&(&nabla_theta - &lambda_j.scaled(0.25))),
        nabla_theta: norm(&nabla_theta),
        ns1: norm(&ns1),
        killing: norm(&lie_lee_metric(geo, p)?),
        rho: norm(&ricci_form(geo, Flavor::Bismut, p)?),
        eta: eta.components().to_vec(),
    })
}

fn samples(geo: &Geometry, dilaton: &Dilaton, points: &[Point], check: &str) -> Result<Vec<Sample>> {
    if points.is_empty() {
        return Err(GeometryError::Precondition("empty point set".into()));
    }
    let fields = dilaton_fields(geo, dilaton);
    let name = geo.manifold().name().to_string();
    let out: Vec<Result<Sample>> = points
        .par_iter()
        .map(|p| sample(geo, &fields, p).map_err(|e| e.in_check(&name, check, &p.coords)))
        .collect();
    let out: Vec<Sample> = out.into_iter().collect::<Result<_>>()?;
    for (s, p) in out.iter().zip(points) {
        if s.einstein.is_nan() || s.flux.is_nan() || s.ric.is_nan() || s.stef.is_nan() {
            return Err(GeometryError::numeric(&p.coords, format!("NaN in {check} on `{name}`")));
        }
    }
    Ok(out)
}

/// Largest value and the index attaining it, first index on ties.
fn argmax(values: impl Iterator<Item = f64>) -> (f64, usize) {
    values
        .enumerate()
        .fold((f64::NEG_INFINITY, 0), |best, (i, v)| if v > best.0 { (v, i) } else { best })
}

/// The pair decided by the `Scal^∇ = 0 ⇔ Ric = 0` equivalence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Th1Consistency {
    /// strong KT and the SU(n) indicator hold
    pub hypothesis_ok: bool,
    pub scal_zero: bool,
    pub ric_zero: bool,
    /// meaningful only when `hypothesis_ok`
    pub agree: bool,
    #[serde(serialize_with = "real")]
    pub max_scal: f64,
    #[serde(serialize_with = "real")]
    pub max_ric: f64,
}

impl Th1Consistency {
    pub fn label(&self) -> &'static str {
        match (self.hypothesis_ok, self.agree) {
            (false, _) => "hypothesis_failed",
            (true, true) => "consistent",
            (true, false) => "inconsistent",
        }
    }

    pub fn failed(&self) -> bool {
        self.hypothesis_ok && !self.agree
    }
}

fn th1_from(samples: &[Sample], tol: &Tolerances, flags: &StructureFlags) -> Th1Consistency {
    let max_scal = samples.iter().map(|s| s.scal).fold(0.0, f64::max);
    let max_ric = samples.iter().map(|s| s.ric).fold(0.0, f64::max);
    let scal_zero = max_scal < tol.second_order;
    let ric_zero = max_ric < tol.second_order;
    Th1Consistency {
        hypothesis_ok: flags.strong_kt.value && flags.su_holonomy_indicator.value,
        scal_zero,
        ric_zero,
        agree: scal_zero == ric_zero,
        max_scal,
        max_ric,
    }
}

pub fn verify_th1(geo: &Geometry, points: &[Point], tol: &Tolerances, flags: &StructureFlags) -> Result<Th1Consistency> {
    Ok(th1_from(&samples(geo, &Dilaton::Constant, points, "th1")?, tol, flags))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantDilatonForms {
    /// `‖Ric‖` of the Bismut connection
    #[serde(serialize_with = "real")]
    pub ric_residual: f64,
    /// `‖(∇_Xθ)Y − ¼λ^Ω(X,JY)‖`
    #[serde(serialize_with = "real")]
    pub st1prime_residual: f64,
    #[serde(serialize_with = "real")]
    pub rho_max: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

fn rho_warning(rho_max: f64, tol: f64) -> Option<String> {
    (rho_max >= tol).then(|| {
        format!("Bismut Ricci form is not ≈ 0 (max {rho_max:.3e}); the θ-form equivalence does not apply")
    })
}

pub fn constant_dilaton_forms(geo: &Geometry, points: &[Point], tol: &Tolerances) -> Result<ConstantDilatonForms> {
    let s = samples(geo, &Dilaton::Constant, points, "constant_dilaton_forms")?;
    let rho_max = s.iter().map(|x| x.rho).fold(0.0, f64::max);
    Ok(ConstantDilatonForms {
        ric_residual: s.iter().map(|x| x.ric).fold(0.0, f64::max),
        st1prime_residual: s.iter().map(|x| x.st1prime).fold(0.0, f64::max),
        rho_max,
        warning: rho_warning(rho_max, tol.classify),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EtaForms {
    #[serde(serialize_with = "real")]
    pub stef_residual: f64,
    #[serde(serialize_with = "real")]
    pub ster_residual: f64,
    #[serde(serialize_with = "real")]
    pub cnew_residual: f64,
    /// dimension four only
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "opt_real")]
    pub four2_residual: Option<f64>,
    #[serde(serialize_with = "real")]
    pub susy_theta_residual: f64,
}

fn opt_real<S: serde::Serializer>(x: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match x {
        Some(v) => real(v, s),
        None => s.serialize_none(),
    }
}

fn eta_forms_from(s: &[Sample]) -> EtaForms {
    let max = |f: fn(&Sample) -> f64| s.iter().map(f).fold(0.0, f64::max);
    EtaForms {
        stef_residual: max(|x| x.stef),
        ster_residual: max(|x| x.ster),
        cnew_residual: max(|x| x.cnew),
        four2_residual: s
            .iter()
            .map(|x| x.four2)
            .try_fold(0.0, |acc: f64, v| v.map(|v| acc.max(v))),
        susy_theta_residual: max(|x| x.susy),
    }
}

pub fn eta_forms(geo: &Geometry, dilaton: &Dilaton, points: &[Point]) -> Result<EtaForms> {
    Ok(eta_forms_from(&samples(geo, dilaton, points, "eta_forms")?))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StringReport {
    pub dilaton: &'static str,
    pub constant_dilaton: bool,
    #[serde(serialize_with = "real")]
    pub einstein_residual: f64,
    #[serde(serialize_with = "real")]
    pub flux_residual: f64,
    #[serde(serialize_with = "real")]
    pub eta_parallel_residual: f64,
    #[serde(serialize_with = "real")]
    pub susy_theta_residual: f64,
    pub th1_consistency: Th1Consistency,
    pub th1_label: &'static str,
    /// `η = θ − 2dφ` at each point, coordinate components
    #[serde(serialize_with = "nested_reals")]
    pub eta: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constant_dilaton_forms: Option<ConstantDilatonForms>,
    pub eta_forms: EtaForms,
    pub entries: Vec<ResidualEntry>,
}

fn nested_reals<S: serde::Serializer>(xs: &[Vec<f64>], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    struct Row<'a>(&'a [f64]);
    impl Serialize for Row<'_> {
        fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
            reals(self.0, s)
        }
    }
    let mut seq = s.serialize_seq(Some(xs.len()))?;
    for row in xs {
        seq.serialize_element(&Row(row))?;
    }
    seq.end()
}

impl StringReport {
    pub fn failed(&self) -> bool {
        self.entries.iter().any(ResidualEntry::failed) || self.th1_consistency.failed()
    }
}

/// Evaluate the string equations and their rewritten forms.
///
/// With a constant dilaton the equations are only expected to hold on
/// strong KT structures with `ρ = 0` and vanishing Bismut scalar curvature;
/// elsewhere the entries are reported with `hypothesis_ok = false`. A
/// declared dilaton is taken as a claimed solution with `θ = 2dφ`.
pub fn string_residual(
    geo: &Geometry,
    dilaton: &Dilaton,
    points: &[Point],
    tol: &Tolerances,
    flags: &StructureFlags,
) -> Result<StringReport> {
    let s = samples(geo, dilaton, points, "string_residual")?;
    let constant = dilaton.is_constant();
    let th1 = th1_from(&s, tol, flags);
    let rho_max = s.iter().map(|x| x.rho).fold(0.0, f64::max);
    let rho_zero = rho_max < tol.classify;
    let solution = !constant || (th1.hypothesis_ok && th1.scal_zero);
    let parallel_lee = s.iter().map(|x| x.nabla_theta).fold(0.0, f64::max) < tol.classify;

    let entry = |name: &str, relation: &str, pick: &dyn Fn(&Sample) -> f64, hypothesis: bool, note: Option<&str>| {
        let (max_residual, worst) = argmax(s.iter().map(pick));
        ResidualEntry {
            identity_name: name.to_string(),
            relation: relation.to_string(),
            order: Order::Second,
            max_residual,
            tolerance: tol.second_order,
            pass: max_residual <= tol.second_order,
            worst_point: points[worst].coords.clone(),
            hypothesis_ok: hypothesis,
            note: note.map(str::to_string),
        }
    };
    let mut entries = vec![
        entry("string_einstein", "Ric^g − ¼T∘T + 2∇^g dφ = 0", &|x| x.einstein, solution, None),
        entry("string_flux", "d†T + 2i_{dφ#}T = 0", &|x| x.flux, solution, None),
        entry(
            "flux_divergence_form",
            "d†(e^{−2φ}T) = e^{−2φ}(d†T + 2i_{dφ#}T)",
            &|x| x.flux_divergence,
            true,
            None,
        ),
        entry(
            "eta_parallel",
            "∇η = 0",
            &|x| x.eta_parallel,
            if constant { solution && flags.almost_strong_kt.value } else { true },
            None,
        ),
        entry(
            "susy_lee_dilaton",
            "θ = 2dφ",
            &|x| x.susy,
            if constant { flags.balanced.value } else { true },
            None,
        ),
        entry("eta_stef", "(∇_Xη)Y = ¼λ^Ω(X,JY)", &|x| x.stef, solution && rho_zero, None),
        entry("eta_ster", "(∇_Xη)Y − (∇_Yη)X = 0", &|x| x.ster, solution && rho_zero, None),
        entry("eta_cnew", "(∇_Xη)Y + (∇_Yη)X = ½λ^Ω(X,JY)", &|x| x.cnew, solution && rho_zero, None),
    ];
    if geo.dim() == 4 {
        entries.push(entry(
            "eta_four",
            "∇η = ½(d†θ) g",
            &|x| x.four2.unwrap_or(f64::NAN),
            solution && rho_zero,
            None,
        ));
    }
    if constant {
        entries.push(entry("ricci_flat", "Ric = 0", &|x| x.ric, solution, None));
        entries.push(entry(
            "lee_st1_prime",
            "(∇_Xθ)Y = ¼λ^Ω(X,JY)",
            &|x| x.st1prime,
            solution && rho_zero,
            None,
        ));
    }
    entries.push(entry("torsion_codifferential_lee", "d†T = dθ − i_{θ#}T", &|x| x.ns1, rho_zero, None));
    entries.push(entry(
        "lee_killing",
        "L_{θ#} g = 0",
        &|x| x.killing,
        parallel_lee,
        Some("applies when θ is parallel for the Bismut connection"),
    ));

    let constant_forms = constant.then(|| ConstantDilatonForms {
        ric_residual: s.iter().map(|x| x.ric).fold(0.0, f64::max),
        st1prime_residual: s.iter().map(|x| x.st1prime).fold(0.0, f64::max),
        rho_max,
        warning: rho_warning(rho_max, tol.classify),
    });
    let eta_forms = eta_forms_from(&s);
    Ok(StringReport {
        dilaton: dilaton.label(),
        constant_dilaton: constant,
        einstein_residual: entries[0].max_residual,
        flux_residual: entries[1].max_residual,
        eta_parallel_residual: entries[3].max_residual,
        susy_theta_residual: eta_forms.susy_theta_residual,
        th1_label: th1.label(),
        th1_consistency: th1,
        eta: s.iter().map(|x| x.eta.clone()).collect(),
        constant_dilaton_forms: constant_forms,
        eta_forms,
        entries,
    })
}

/// Constant-dilaton report, plus the declared-dilaton report when the
/// manifold carries one.
pub fn string_reports(
    geo: &Geometry,
    points: &[Point],
    tol: &Tolerances,
    flags: &StructureFlags,
) -> Result<Vec<StringReport>> {
    let mut out = vec![string_residual(geo, &Dilaton::Constant, points, tol, flags)?];
    if let Some(d) = Dilaton::declared(geo.manifold()) {
        out.push(string_residual(geo, &d, points, tol, flags)?);
    }
    Ok(out)
}
