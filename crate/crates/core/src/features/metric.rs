use super::{FeatureError, FeatureVector};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Distance between feature vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    #[default]
    Euclidean,
    Cityblock,
    /// Square root of the base-2 Jensen-Shannon divergence of the
    /// sum-normalized vectors.
    SqrtJs,
}

impl Metric {
    pub fn as_str(&self) -> &'static str {
        match self {
            Metric::Euclidean => "euclidean",
            Metric::Cityblock => "cityblock",
            Metric::SqrtJs => "sqrt_js",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = FeatureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "euclidean" | "l2" => Ok(Metric::Euclidean),
            "cityblock" | "l1" => Ok(Metric::Cityblock),
            "sqrt_js" | "sqrtjs" => Ok(Metric::SqrtJs),
            other => Err(FeatureError::UnknownMetric(other.to_string())),
        }
    }
}

pub fn distance(a: &FeatureVector, b: &FeatureVector, metric: Metric) -> Result<f64, FeatureError> {
    Ok(squared_distance(a, b, metric)?.sqrt())
}

/// Squared distance. For the Euclidean metric this skips the square root so
/// the value is exact up to summation rounding. Non-Euclidean metrics give
/// matrices that need not embed in any Euclidean space, so simplex contents
/// built from them can clamp to zero.
pub fn squared_distance(
    a: &FeatureVector,
    b: &FeatureVector,
    metric: Metric,
) -> Result<f64, FeatureError> {
    if a.dim() != b.dim() {
        return Err(FeatureError::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    let (x, y) = (&a.components, &b.components);
    Ok(match metric {
        Metric::Euclidean => x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum(),
        Metric::Cityblock => {
            let l1: f64 = x.iter().zip(y).map(|(p, q)| (p - q).abs()).sum();
            l1 * l1
        }
        Metric::SqrtJs => {
            let p = normalized(a)?;
            let q = normalized(b)?;
            js_divergence(&p, &q)
        }
    })
}

fn normalized(v: &FeatureVector) -> Result<Vec<f64>, FeatureError> {
    if let Some(neg) = v.components.iter().find(|c| **c < 0.0 || !c.is_finite()) {
        return Err(FeatureError::NotNormalizable {
            id: v.id.clone(),
            reason: format!("component {neg} is negative or not finite"),
        });
    }
    let total: f64 = v.components.iter().sum();
    if total <= 0.0 {
        return Err(FeatureError::NotNormalizable {
            id: v.id.clone(),
            reason: "components sum to zero".into(),
        });
    }
    Ok(v.components.iter().map(|c| c / total).collect())
}

/// Base-2 Jensen-Shannon divergence; lies in [0, 1].
fn js_divergence(p: &[f64], q: &[f64]) -> f64 {
    let mut js = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        let m = 0.5 * (pi + qi);
        if pi > 0.0 {
            js += 0.5 * pi * (pi / m).log2();
        }
        if qi > 0.0 {
            js += 0.5 * qi * (qi / m).log2();
        }
    }
    js.clamp(0.0, 1.0)
}
