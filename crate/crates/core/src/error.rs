use std::fmt;

use crate::expr::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by the geometric and fluid operators.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("metric is singular at {point}: |det g| = {det:e}")]
    SingularMetric { det: f64, point: PointDisplay },

    #[error("non-finite value in {what} at {point}")]
    NonFinite { what: String, point: PointDisplay },

    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: String,
        expected: usize,
        found: usize,
    },

    #[error("two-form is not antisymmetric at {point}: |F + F^T| = {defect:e}")]
    NotAntisymmetric { defect: f64, point: PointDisplay },

    #[error("time direction is degenerate at {point}: |g^tt| = {value:e}")]
    DegenerateTimeDirection { value: f64, point: PointDisplay },

    #[error("velocity is null (|2T| = {two_t:e}), relativistic correction undefined")]
    NullVelocity { two_t: f64 },

    #[error("density vanishes at {point}")]
    ZeroDensity { point: PointDisplay },

    #[error("scale factor vanishes at t = {t}")]
    ZeroScaleFactor { t: f64 },

    #[error("field is not time-like at {point}: g(u,u) = {norm_sq}")]
    NotTimelike { norm_sq: f64, point: PointDisplay },

    #[error("enthalpy mu + P vanishes at {point}")]
    ZeroEnthalpy { point: PointDisplay },

    #[error("unknown variable `{name}` (chart has {dim} coordinates)")]
    UnknownVariable { name: String, dim: usize },

    #[error("domain error: {message} at {point}")]
    Domain { message: String, point: PointDisplay },

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("invalid scenario: {0}")]
    Validation(String),
}

impl Error {
    pub(crate) fn non_finite(what: impl Into<String>, point: &[f64]) -> Self {
        Error::NonFinite {
            what: what.into(),
            point: PointDisplay::from(point),
        }
    }

    pub(crate) fn mismatch(what: impl Into<String>, expected: usize, found: usize) -> Self {
        Error::DimensionMismatch {
            what: what.into(),
            expected,
            found,
        }
    }
}

/// Coordinates carried inside an error for diagnostics.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointDisplay(pub Vec<f64>);

impl From<&[f64]> for PointDisplay {
    fn from(p: &[f64]) -> Self {
        PointDisplay(p.to_vec())
    }
}

impl fmt::Display for PointDisplay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

pub(crate) fn ensure_finite(what: &str, point: &[f64], values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::non_finite(what, point))
    }
}
