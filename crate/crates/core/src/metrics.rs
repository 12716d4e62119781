//! Goodness-of-fit measures: Pearson r, Willmott index, Nash-Sutcliffe.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `Standard` is the classical definition; `PaperPrinted` follows the
/// displayed formulas literally (no `1 -` in WI, predicted-variance NS).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricVariant {
    #[default]
    Standard,
    PaperPrinted,
}

impl std::str::FromStr for MetricVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(MetricVariant::Standard),
            "paper-printed" | "paper_printed" => Ok(MetricVariant::PaperPrinted),
            other => Err(Error::InvalidConfig(format!("unknown metric variant '{other}'"))),
        }
    }
}

impl std::fmt::Display for MetricVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MetricVariant::Standard => "standard",
            MetricVariant::PaperPrinted => "paper_printed",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitMetrics {
    pub r: f64,
    pub wi: f64,
    pub ns: f64,
    pub variant: MetricVariant,
}

fn check(y: &[f64], y_hat: &[f64]) -> Result<()> {
    if y.len() != y_hat.len() {
        return Err(Error::LengthMismatch { left: y.len(), right: y_hat.len() });
    }
    if y.len() < 2 {
        return Err(Error::SampleTooSmall { min: 2, got: y.len() });
    }
    if let Some(i) = y.iter().chain(y_hat).position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i % y.len()));
    }
    Ok(())
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn sse(y: &[f64], y_hat: &[f64]) -> f64 {
    y.iter().zip(y_hat).map(|(a, b)| (a - b).powi(2)).sum()
}

pub fn pearson_r(y: &[f64], y_hat: &[f64]) -> Result<f64> {
    check(y, y_hat)?;
    let (my, mh) = (mean(y), mean(y_hat));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in y.iter().zip(y_hat) {
        let (da, db) = (a - my, b - mh);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 {
        return Err(Error::ZeroVariance("y"));
    }
    if syy == 0.0 {
        return Err(Error::ZeroVariance("y_hat"));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

pub fn willmott_index(y: &[f64], y_hat: &[f64], variant: MetricVariant) -> Result<f64> {
    check(y, y_hat)?;
    let my = mean(y);
    let centre_hat = match variant {
        MetricVariant::Standard => my,
        MetricVariant::PaperPrinted => mean(y_hat),
    };
    let denom: f64 = y.iter().zip(y_hat).map(|(a, b)| ((a - my).abs() + (b - centre_hat).abs()).powi(2)).sum();
    if denom == 0.0 {
        return Err(Error::ZeroDenominator("Willmott index"));
    }
    let ratio = sse(y, y_hat) / denom;
    Ok(match variant {
        MetricVariant::Standard => 1.0 - ratio,
        MetricVariant::PaperPrinted => ratio,
    })
}

pub fn nash_sutcliffe(y: &[f64], y_hat: &[f64], variant: MetricVariant) -> Result<f64> {
    check(y, y_hat)?;
    let (reference, name) = match variant {
        MetricVariant::Standard => (y, "y"),
        MetricVariant::PaperPrinted => (y_hat, "y_hat"),
    };
    let m = mean(reference);
    let var: f64 = reference.iter().map(|v| (v - m).powi(2)).sum();
    if var == 0.0 {
        return Err(Error::ZeroVariance(name));
    }
    Ok(1.0 - sse(y, y_hat) / var)
}

/// All three measures; a failing measure is reported by name.
pub fn evaluate(y: &[f64], y_hat: &[f64], variant: MetricVariant) -> Result<FitMetrics> {
    let tag = |metric| move |e| Error::Metric { metric, source: Box::new(e) };
    Ok(FitMetrics {
        r: pearson_r(y, y_hat).map_err(tag("r"))?,
        wi: willmott_index(y, y_hat, variant).map_err(tag("WI"))?,
        ns: nash_sutcliffe(y, y_hat, variant).map_err(tag("NS"))?,
        variant,
    })
}
