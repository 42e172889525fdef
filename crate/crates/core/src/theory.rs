// Copyright 2026 The hijack-impact Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Closed-form error of the naive estimator, for a fixed impact and
//! integrated over an empirical impact distribution.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Empirical draws from an impact distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpactSamples {
    label: String,
    values: Vec<f64>,
}

impl ImpactSamples {
    pub fn new(label: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::arg("impact sample set is empty"));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::arg(format!("impact {v} outside [0, 1]")));
        }
        Ok(ImpactSamples {
            label: label.into(),
            values,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    fn expect(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.values.iter().map(|&i| f(i)).sum::<f64>() / self.values.len() as f64
    }
}

fn check_impact(i: f64) -> Result<()> {
    if (0.0..=1.0).contains(&i) {
        Ok(())
    } else {
        Err(Error::arg(format!("impact {i} outside [0, 1]")))
    }
}

fn check_p(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::arg(format!("failure probability {p} outside [0, 1]")))
    }
}

fn check_m(m: u64) -> Result<()> {
    if m == 0 {
        return Err(Error::arg("at least one monitor is required"));
    }
    Ok(())
}

/// RMSE of the naive estimator with `m` independent monitors when the
/// true impact is `i`.
pub fn rmse_point(i: f64, m: u64) -> Result<f64> {
    check_impact(i)?;
    check_m(m)?;
    Ok((i * (1.0 - i) / m as f64).sqrt())
}

/// `E[sqrt(I (1 - I))]`.
pub fn c_i(samples: &ImpactSamples) -> f64 {
    samples.expect(|i| (i * (1.0 - i)).sqrt())
}

/// `1 - E[I]`, the bias multiplier under measurement failures.
pub fn c_i_prime(samples: &ImpactSamples) -> f64 {
    1.0 - samples.mean()
}

/// Integrated RMSE with `m` random monitors: `c_I / sqrt(m)`.
pub fn rmse_nie_random(m: u64, samples: &ImpactSamples) -> Result<f64> {
    check_m(m)?;
    Ok(c_i(samples) / (m as f64).sqrt())
}

/// Variance and squared-bias terms of the RMSE at a fixed impact when
/// uninfected monitors read as infected with probability `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FailureRmseTerms {
    pub a: f64,
    pub b: f64,
}

impl FailureRmseTerms {
    pub fn new(i: f64, p: f64) -> Result<Self> {
        check_impact(i)?;
        check_p(p)?;
        Ok(FailureRmseTerms {
            a: (i + (1.0 - i) * p) * (1.0 - i) * (1.0 - p),
            b: (1.0 - i).powi(2) * p * p,
        })
    }

    pub fn rmse(&self, m: u64) -> f64 {
        (self.a / m as f64 + self.b).sqrt()
    }
}

/// Integrated bias under failures: `(1 - E[I]) p`.
pub fn bias_with_failures(p: f64, samples: &ImpactSamples) -> Result<f64> {
    check_p(p)?;
    Ok(c_i_prime(samples) * p)
}

/// Integrated RMSE under failures: `E[sqrt(A/m + B)]`.
pub fn rmse_with_failures(m: u64, p: f64, samples: &ImpactSamples) -> Result<f64> {
    check_m(m)?;
    check_p(p)?;
    Ok(samples.expect(|i| FailureRmseTerms::new(i, p).map(|t| t.rmse(m)).unwrap_or(f64::NAN)))
}

/// Limit of [`rmse_with_failures`] as `m` grows without bound.
pub fn rmse_floor(p: f64, samples: &ImpactSamples) -> Result<f64> {
    bias_with_failures(p, samples)
}

/// One row of a theory curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    #[serde(rename = "M")]
    pub m: u64,
    pub p: f64,
    pub bias: f64,
    pub rmse: f64,
    pub floor: f64,
}

/// Bias and RMSE over the grid `ms × ps`, `ms` varying fastest.
pub fn theory_curve(ms: &[u64], ps: &[f64], samples: &ImpactSamples) -> Result<Vec<CurvePoint>> {
    let mut out = Vec::with_capacity(ms.len() * ps.len());
    for &p in ps {
        for &m in ms {
            out.push(CurvePoint {
                m,
                p,
                bias: bias_with_failures(p, samples)?,
                rmse: rmse_with_failures(m, p, samples)?,
                floor: rmse_floor(p, samples)?,
            });
        }
    }
    Ok(out)
}
