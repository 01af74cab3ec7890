//! Scalar transforms applied to positive polar factors.
//!
//! Each kind carries its admissible domain on the nonnegative real line:
//! powers extend continuously with `f(0) = 0`, while `log` and inverse
//! powers reject zero, mirroring the invertibility hypotheses of the
//! workflows that use them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A scalar function `f` on (a subinterval of) the nonnegative reals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScalarFunction {
    Identity,
    /// `t^exponent` with a positive exponent; continuous at 0 with value 0.
    Power { exponent: f64 },
    /// `t^exponent` used as the inverse of a power map; rejects 0.
    InversePower { exponent: f64 },
    Log,
    Exp,
    /// `c_0 + c_1 t + c_2 t^2 + ...` on the nonnegative reals.
    Polynomial { coefficients: Vec<f64> },
}

impl ScalarFunction {
    pub fn power(exponent: f64) -> Self {
        ScalarFunction::Power { exponent }
    }

    pub fn inverse_power(exponent: f64) -> Self {
        ScalarFunction::InversePower { exponent }
    }

    pub fn polynomial(coefficients: Vec<f64>) -> Self {
        ScalarFunction::Polynomial { coefficients }
    }

    /// Validates the function's own parameters.
    pub fn validate(&self) -> Result<()> {
        match self {
            ScalarFunction::Power { exponent } | ScalarFunction::InversePower { exponent } => {
                if !exponent.is_finite() || *exponent <= 0.0 {
                    return Err(Error::Spec(format!(
                        "power exponent must be a positive real, got {exponent}"
                    )));
                }
            }
            ScalarFunction::Polynomial { coefficients } => {
                if coefficients.is_empty() {
                    return Err(Error::Spec("polynomial needs at least one coefficient".into()));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// True when the whole workflow must reject non-invertible operators.
    pub fn requires_invertible(&self) -> bool {
        matches!(self, ScalarFunction::Log | ScalarFunction::InversePower { .. })
    }

    /// Whether `r >= 0` lies in the admissible domain.
    pub fn admits(&self, r: f64) -> bool {
        if r < 0.0 {
            return false;
        }
        match self {
            ScalarFunction::Log | ScalarFunction::InversePower { .. } => r > 0.0,
            _ => true,
        }
    }

    /// Evaluates `f(r)`; out-of-domain arguments are domain errors.
    pub fn apply(&self, r: f64) -> Result<f64> {
        if !self.admits(r) {
            return Err(Error::Domain(format!("{} is undefined at {r}", self.describe())));
        }
        Ok(match self {
            ScalarFunction::Identity => r,
            ScalarFunction::Power { exponent } => {
                if r == 0.0 {
                    0.0
                } else {
                    r.powf(*exponent)
                }
            }
            ScalarFunction::InversePower { exponent } => r.powf(*exponent),
            ScalarFunction::Log => r.ln(),
            ScalarFunction::Exp => r.exp(),
            ScalarFunction::Polynomial { coefficients } => coefficients
                .iter()
                .rev()
                .fold(0.0, |acc, &c| acc * r + c),
        })
    }

    /// The radial inverse, where one exists in this family.
    pub fn inverse(&self) -> Option<ScalarFunction> {
        match self {
            ScalarFunction::Identity => Some(ScalarFunction::Identity),
            ScalarFunction::Power { exponent } => Some(ScalarFunction::InversePower {
                exponent: 1.0 / exponent,
            }),
            ScalarFunction::InversePower { exponent } => Some(ScalarFunction::Power {
                exponent: 1.0 / exponent,
            }),
            ScalarFunction::Log => Some(ScalarFunction::Exp),
            ScalarFunction::Exp => Some(ScalarFunction::Log),
            ScalarFunction::Polynomial { .. } => None,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            ScalarFunction::Identity => "identity".into(),
            ScalarFunction::Power { exponent } => format!("t^{exponent}"),
            ScalarFunction::InversePower { exponent } => format!("t^{exponent} (inverse power)"),
            ScalarFunction::Log => "log t".into(),
            ScalarFunction::Exp => "exp t".into(),
            ScalarFunction::Polynomial { coefficients } => format!("poly{coefficients:?}"),
        }
    }
}
