use thiserror::Error;

/// Failures raised while evaluating geometric quantities on a chart.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("point {point:?} is {margin:.3e} from the boundary of chart `{chart}`, stencil needs {reach:.3e}")]
    Domain {
        chart: String,
        point: Vec<f64>,
        margin: f64,
        reach: f64,
    },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("numeric failure at {point:?}: {detail}")]
    Numeric { point: Vec<f64>, detail: String },

    #[error("unknown manifold `{name}`; catalog: {}", catalog.join(", "))]
    UnknownManifold { name: String, catalog: Vec<String> },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("operation requires dimension 4, manifold has dimension {0}")]
    UnsupportedDimension(usize),

    #[error(
        "Lee form routes disagree at {point:?}: codifferential {codifferential:?}, \
         torsion trace {torsion_trace:?}, Chern trace {chern_trace:?}"
    )]
    ConventionFault {
        point: Vec<f64>,
        codifferential: Vec<f64>,
        torsion_trace: Vec<f64>,
        chern_trace: Vec<f64>,
    },

    #[error("{check} on `{manifold}` at {point:?}: {source}")]
    Evaluation {
        manifold: String,
        check: String,
        point: Vec<f64>,
        #[source]
        source: Box<GeometryError>,
    },
}

impl GeometryError {
    pub(crate) fn numeric(point: &[f64], detail: impl Into<String>) -> Self {
        GeometryError::Numeric {
            point: point.to_vec(),
            detail: detail.into(),
        }
    }

    /// Attach the manifold, check name and point to an error.
    pub fn in_check(self, manifold: &str, check: &str, point: &[f64]) -> Self {
        match self {
            already @ GeometryError::Evaluation { .. } => already,
            other => GeometryError::Evaluation {
                manifold: manifold.to_string(),
                check: check.to_string(),
                point: point.to_vec(),
                source: Box::new(other),
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, GeometryError>;
