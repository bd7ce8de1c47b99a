//! Ridge-stabilised least squares on standardised features, solved through
//! the normal equations with a Cholesky factorisation.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{CreditError, Result};

pub const DEFAULT_RIDGE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    feature_names: Vec<String>,
    means: Vec<f64>,
    /// Standard deviations; 0 marks a constant column, which is ignored.
    scales: Vec<f64>,
    /// Coefficients on the standardised features.
    coef: Vec<f64>,
    intercept: f64,
}

/// Solves `A x = b` for symmetric positive definite `A` (row-major, `k × k`).
pub(crate) fn cholesky_solve(a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let k = b.len();
    let mut l = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..=i {
            let mut s = a[i * k + j];
            for p in 0..j {
                s -= l[i * k + p] * l[j * k + p];
            }
            if i == j {
                if s.is_nan() || s <= 0.0 {
                    return Err(CreditError::SingularSystem);
                }
                l[i * k + i] = s.sqrt();
            } else {
                l[i * k + j] = s / l[j * k + j];
            }
        }
    }
    let mut y = vec![0.0; k];
    for i in 0..k {
        let mut s = b[i];
        for p in 0..i {
            s -= l[i * k + p] * y[p];
        }
        y[i] = s / l[i * k + i];
    }
    let mut x = vec![0.0; k];
    for i in (0..k).rev() {
        let mut s = y[i];
        for p in i + 1..k {
            s -= l[p * k + i] * x[p];
        }
        x[i] = s / l[i * k + i];
    }
    Ok(x)
}

fn column_stats(col: &[f64]) -> (f64, f64) {
    let n = col.len() as f64;
    let mean = col.iter().sum::<f64>() / n;
    let (lo, hi) = col.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if lo == hi {
        return (mean, 0.0);
    }
    let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn fit_linear(d: &Dataset, ridge_lambda: f64) -> Result<LinearModel> {
    if d.is_empty() {
        return Err(CreditError::InvalidParameter("cannot fit on an empty dataset".into()));
    }
    if !(ridge_lambda >= 0.0 && ridge_lambda.is_finite()) {
        return Err(CreditError::InvalidParameter(format!("ridge_lambda must be non-negative, got {ridge_lambda}")));
    }
    let m = d.n_cols();
    let (means, scales): (Vec<f64>, Vec<f64>) = d.columns().iter().map(|c| column_stats(c)).unzip();
    let z: Vec<Vec<f64>> = d
        .columns()
        .iter()
        .enumerate()
        .map(|(j, c)| {
            if scales[j] == 0.0 {
                vec![0.0; c.len()]
            } else {
                c.iter().map(|v| (v - means[j]) / scales[j]).collect()
            }
        })
        .collect();
    let y = d.target();
    let y_mean = y.iter().sum::<f64>() / y.len() as f64;

    // Centred features make the unpenalised intercept exactly the target mean.
    let mut a = vec![0.0; m * m];
    let mut b = vec![0.0; m];
    for i in 0..m {
        for j in 0..=i {
            let s: f64 = z[i].iter().zip(&z[j]).map(|(p, q)| p * q).sum();
            a[i * m + j] = s;
            a[j * m + i] = s;
        }
        a[i * m + i] += ridge_lambda;
        b[i] = z[i].iter().zip(y).map(|(p, t)| p * (t - y_mean)).sum();
    }
    // A constant column has a zero row and column; pin its coefficient to 0.
    for i in 0..m {
        if scales[i] == 0.0 {
            a[i * m + i] = 1.0;
        }
    }
    let coef = cholesky_solve(&a, &b)?;
    Ok(LinearModel {
        feature_names: d.schema().names(),
        means,
        scales,
        coef,
        intercept: y_mean,
    })
}

impl LinearModel {
    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    /// Coefficients on standardised features; constant columns have 0.
    pub fn standardized_coefficients(&self) -> &[f64] {
        &self.coef
    }

    /// Coefficients and intercept on the original feature scale.
    pub fn raw_coefficients(&self) -> (Vec<f64>, f64) {
        let mut intercept = self.intercept;
        let coef = self
            .coef
            .iter()
            .zip(self.means.iter().zip(&self.scales))
            .map(|(&c, (&mu, &s))| {
                if s == 0.0 {
                    0.0
                } else {
                    intercept -= c * mu / s;
                    c / s
                }
            })
            .collect();
        (coef, intercept)
    }

    pub fn predict(&self, d: &Dataset) -> Result<Vec<f64>> {
        d.check_columns(&self.feature_names)?;
        let mut out = vec![self.intercept; d.n_rows()];
        for (j, col) in d.columns().iter().enumerate() {
            if self.scales[j] == 0.0 {
                continue;
            }
            let (c, mu, s) = (self.coef[j], self.means[j], self.scales[j]);
            for (o, v) in out.iter_mut().zip(col) {
                *o += c * ((v - mu) / s);
            }
        }
        Ok(out)
    }

    /// A model with fixed standardised coefficients and intercept over
    /// unscaled inputs (mean 0, scale 1).
    pub fn from_coefficients(feature_names: Vec<String>, coef: Vec<f64>, intercept: f64) -> Result<Self> {
        if feature_names.len() != coef.len() {
            return Err(CreditError::Dimension(format!(
                "{} names vs {} coefficients",
                feature_names.len(),
                coef.len()
            )));
        }
        let m = coef.len();
        Ok(LinearModel {
            feature_names,
            means: vec![0.0; m],
            scales: vec![1.0; m],
            coef,
            intercept,
        })
    }
}
