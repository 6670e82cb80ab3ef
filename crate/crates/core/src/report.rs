//! Run configuration, the JSON run report and float formatting.

use serde::Serializer;
use serde_json::value::RawValue;
use rayon::prelude::*;
use serde::Serialize;

/// Floats as JSON numbers with 17 significant digits; non-finite as `null`.
pub fn real<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_finite() {
        let raw = RawValue::from_string(format!("{x:.16e}")).map_err(serde::ser::Error::custom)?;
        s.serialize_some(&raw)
    } else {
        s.serialize_none()
    }
}

pub fn reals<S: Serializer>(xs: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    struct R(f64);
    impl serde::Serialize for R {
        fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
            real(&self.0, s)
        }
    }
    let mut seq = s.serialize_seq(Some(xs.len()))?;
    for &x in xs {
        seq.serialize_element(&R(x))?;
    }
    seq.end()
}

// ------------------------------------------------------------- run report

use crate::catalog::{get_manifold, CATALOG};
use crate::classify::{classify, vanishing_hypotheses, StructureFlags, VanishingHypotheses};
use crate::connections::Geometry;
use crate::error::{GeometryError, Result};
use crate::identities::{
    verify_corollary1, verify_dim4, verify_lck, verify_prop1, verify_prop2, verify_structure,
    verify_torsion_identities, verify_tri2, ResidualEntry, Tolerances,
};
use crate::sampling::{sample_points, stencil_inset};
use crate::string_eq::{string_reports, StringReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Suites {
    pub identities: bool,
    pub classify: bool,
    pub string: bool,
    pub dim4: bool,
}

impl Suites {
    pub const ALL: Suites = Suites {
        identities: true,
        classify: true,
        string: true,
        dim4: true,
    };

    pub const NONE: Suites = Suites {
        identities: false,
        classify: false,
        string: false,
        dim4: false,
    };
}

impl Default for Suites {
    fn default() -> Self {
        Suites::ALL
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    /// catalog names; `all` expands to the whole catalog
    pub manifolds: Vec<String>,
    pub points: usize,
    pub seed: u64,
    #[serde(serialize_with = "real")]
    pub step: f64,
    pub tolerances: Tolerances,
    pub suites: Suites,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            manifolds: vec!["all".into()],
            points: 32,
            seed: 0,
            step: 1e-4,
            tolerances: Tolerances::default(),
            suites: Suites::ALL,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.points == 0 {
            return Err(GeometryError::Contract("point count must be at least 1".into()));
        }
        if !(self.step > 1e-8 && self.step < 1e-1) {
            return Err(GeometryError::Contract(format!(
                "difference step must lie in (1e-8, 1e-1), got {}",
                self.step
            )));
        }
        let t = &self.tolerances;
        for (name, v) in [("second_order", t.second_order), ("first_order", t.first_order), ("classify", t.classify)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(GeometryError::Contract(format!("tolerance {name} must be positive, got {v}")));
            }
        }
        if self.manifolds.is_empty() {
            return Err(GeometryError::Contract("no manifold selected".into()));
        }
        Ok(())
    }

    /// Selected names in order, `all` expanded, duplicates dropped.
    pub fn manifold_names(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for name in &self.manifolds {
            let expanded: Vec<String> = if name == "all" {
                CATALOG.iter().map(|s| s.to_string()).collect()
            } else {
                vec![name.clone()]
            };
            for n in expanded {
                if !out.contains(&n) {
                    out.push(n);
                }
            }
        }
        out
    }
}

/// Conventions every number in the report depends on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Conventions {
    pub kahler_form: &'static str,
    pub torsion: &'static str,
    pub curvature: &'static str,
    pub exterior_derivative: &'static str,
    pub wedge: &'static str,
    pub codifferential: &'static str,
    pub trace_orientation: &'static str,
    pub norm: &'static str,
    pub projector_11: &'static str,
    pub orientation: &'static str,
    pub components: &'static str,
}

pub const CONVENTIONS: Conventions = Conventions {
    kahler_form: "Ω(X,Y) = g(X,JY)",
    torsion: "T(X,Y,Z) = −dΩ(JX,JY,JZ); Bismut g(∇_XY,Z) = g(∇^g_XY,Z) + ½T(X,Y,Z)",
    curvature: "R(X,Y,Z,W) = g(R(X,Y)Z,W), R(X,Y) = [∇_X,∇_Y] − ∇_[X,Y]",
    exterior_derivative: "(dα)(X_0..X_p) = Σ_k (−1)^k ∂_{X_k} α(..X̂_k..) in coordinates",
    wedge: "(α∧β) = (1/(p!q!)) Σ_σ sgn σ α⊗β∘σ",
    codifferential: "d†α = −Σ_i (∇^g_{e_i}α)(e_i, ..)",
    trace_orientation: "Jtrace(α) = Σ_i α(Je_i, e_i)",
    norm: "full index sum |α|² = Σ α(e_{i_1},..,e_{i_p})², no 1/p!",
    projector_11: "α^{1,1} = ½(α + α(J·,J·))",
    orientation: "dx^1∧..∧dx^{2n} positive",
    components: "residuals are sup-norms of orthonormal-frame components",
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManifoldReport {
    pub name: String,
    pub dim: usize,
    pub conventions: Conventions,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flags: Option<StructureFlags>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vanishing: Option<VanishingHypotheses>,
    pub identities: Vec<ResidualEntry>,
    pub string: Vec<StringReport>,
    pub pass: bool,
}

impl ManifoldReport {
    /// Entries counted against the verdict that failed.
    pub fn failures(&self) -> Vec<&ResidualEntry> {
        self.identities
            .iter()
            .chain(self.string.iter().flat_map(|s| s.entries.iter()))
            .filter(|e| e.failed())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub manifolds: Vec<ManifoldReport>,
    pub pass: bool,
}

impl RunReport {
    /// Pretty JSON with the struct field order as key order.
    pub fn exit_status(&self) -> u8 {
        if self.pass {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Exit status of a failed run: 2 for a bad selection or configuration,
/// 3 for a failure while evaluating.
pub fn error_exit_status(e: &GeometryError) -> u8 {
    match e {
        GeometryError::UnknownManifold { .. } | GeometryError::Contract(_) => 2,
        _ => 3,
    }
}

fn run_manifold(name: &str, config: &RunConfig) -> Result<ManifoldReport> {
    let m = get_manifold(name)?;
    let geo = Geometry::new(&m, config.step)?;
    let points = sample_points(m.domain(), config.points, config.seed, stencil_inset(config.step));
    let tol = &config.tolerances;
    let suites = config.suites;

    let mut identities = Vec::new();
    if suites.identities {
        identities.extend(verify_structure(&geo, &points, tol)?);
        identities.extend(verify_prop1(&geo, &points, tol)?);
        identities.extend(verify_corollary1(&geo, &points, tol)?);
        identities.extend(verify_prop2(&geo, &points, tol)?);
        identities.extend(verify_torsion_identities(&geo, &points, tol)?);
        if m.is_lck() {
            identities.extend(verify_lck(&geo, &points, tol)?);
        }
        if m.conformal_parent().is_some() {
            identities.push(verify_tri2(&geo, &points, tol)?);
        }
    }
    if suites.dim4 && m.dim() == 4 {
        identities.extend(verify_dim4(&geo, &points, tol)?);
    }
    let flags = if suites.classify || suites.string {
        Some(classify(&geo, &points, tol.classify)?)
    } else {
        None
    };
    let vanishing = if suites.classify {
        Some(vanishing_hypotheses(&geo, &points)?)
    } else {
        None
    };
    let string = match (&flags, suites.string) {
        (Some(f), true) => string_reports(&geo, &points, tol, f)?,
        _ => Vec::new(),
    };
    let pass = !identities.iter().any(ResidualEntry::failed) && !string.iter().any(StringReport::failed);
    Ok(ManifoldReport {
        name: m.name().to_string(),
        dim: m.dim(),
        conventions: CONVENTIONS,
        flags: if suites.classify { flags } else { None },
        vanishing,
        identities,
        string,
        pass,
    })
}

/// Evaluate every selected suite on every selected manifold.
///
/// Names are resolved before any evaluation, so an unknown name fails
/// fast. Manifolds run in parallel and are reported in selection order.
pub fn run(config: &RunConfig) -> Result<RunReport> {
    config.validate()?;
    let names = config.manifold_names();
    for name in &names {
        get_manifold(name)?;
    }
    let results: Vec<Result<ManifoldReport>> = names.par_iter().map(|n| run_manifold(n, config)).collect();
    let manifolds: Vec<ManifoldReport> = results.into_iter().collect::<Result<_>>()?;
    Ok(RunReport {
        config: config.clone(),
        pass: manifolds.iter().all(|m| m.pass),
        manifolds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(name: &str, points: usize) -> RunConfig {
        RunConfig {
            manifolds: vec![name.into()],
            points,
            ..RunConfig::default()
        }
    }

    #[test]
    fn floats_keep_seventeen_digits() {
        #[derive(Serialize)]
        struct W(#[serde(serialize_with = "real")] f64);
        assert_eq!(serde_json::to_string(&W(0.1)).unwrap(), "1.0000000000000001e-1");
        assert_eq!(serde_json::to_string(&W(f64::NAN)).unwrap(), "null");
        let back: f64 = serde_json::from_str(&serde_json::to_string(&W(1.0 / 3.0)).unwrap()).unwrap();
        assert_eq!(back, 1.0 / 3.0);
    }

    #[test]
    fn config_bounds() {
        assert!(matches!(config("flat_torus_4", 0).validate(), Err(GeometryError::Contract(_))));
        let mut c = config("flat_torus_4", 1);
        c.step = 0.5;
        assert!(c.validate().is_err());
        c.step = 1e-9;
        assert!(c.validate().is_err());
    }

    #[test]
    fn unknown_name_fails_before_work() {
        let c = RunConfig {
            manifolds: vec!["flat_torus_4".into(), "klein_bottle".into()],
            ..RunConfig::default()
        };
        assert!(matches!(run(&c), Err(GeometryError::UnknownManifold { .. })));
    }

    #[test]
    fn all_expands_in_catalog_order() {
        let c = RunConfig {
            manifolds: vec!["hopf_standard".into(), "all".into()],
            ..RunConfig::default()
        };
        let names = c.manifold_names();
        assert_eq!(names.len(), CATALOG.len());
        assert_eq!(names[0], "hopf_standard");
    }

    #[test]
    fn flat_torus_report_passes_and_is_reproducible() {
        let c = config("flat_torus_4", 4);
        let a = run(&c).unwrap();
        assert!(a.pass);
        for e in &a.manifolds[0].identities {
            assert!(e.max_residual < 1e-8, "{}", e.identity_name);
        }
        assert_eq!(a.to_json(), run(&c).unwrap().to_json());
    }

    #[test]
    fn exit_statuses() {
        assert_eq!(error_exit_status(&get_manifold("nope").unwrap_err()), 2);
        assert_eq!(error_exit_status(&config("flat_torus_4", 0).validate().unwrap_err()), 2);
        let numeric = GeometryError::numeric(&[0.0; 4], "metric is not positive definite");
        assert_eq!(error_exit_status(&numeric.in_check("flat_torus_4", "ricci_flat", &[0.0; 4])), 3);
    }

    #[test]
    fn suite_selection() {
        let mut c = config("flat_torus_4", 2);
        c.suites = Suites {
            classify: true,
            ..Suites::NONE
        };
        let r = run(&c).unwrap();
        let m = &r.manifolds[0];
        assert!(m.identities.is_empty() && m.string.is_empty());
        assert!(m.flags.is_some() && m.vanishing.is_some());
    }
}
