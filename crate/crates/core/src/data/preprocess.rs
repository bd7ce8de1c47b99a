//! Median imputation, flag coercion and optional percentile clipping, split
//! into fit (statistics from training rows) and transform (apply anywhere).

use super::{ColumnKind, Dataset};
use crate::error::{CreditError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PreprocessConfig {
    /// Clip numeric columns to their [p1, p99] training percentiles.
    pub clip_outliers: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PreprocessSummary {
    pub n_imputed: usize,
    pub n_clipped: usize,
    pub n_flags_coerced: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Preprocessor {
    names: Vec<String>,
    kinds: Vec<ColumnKind>,
    medians: Vec<f64>,
    bounds: Vec<Option<(f64, f64)>>,
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Nearest-rank percentile: an actual sample value, so clipping to it is
/// idempotent.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let k = (q * (sorted.len() - 1) as f64).round() as usize;
    sorted[k]
}

impl Preprocessor {
    pub fn fit(d: &Dataset, config: &PreprocessConfig) -> Result<Self> {
        let mut medians = Vec::with_capacity(d.n_cols());
        let mut bounds = Vec::with_capacity(d.n_cols());
        for (spec, col) in d.schema().columns().iter().zip(d.columns()) {
            let mut finite: Vec<f64> = col.iter().copied().filter(|v| v.is_finite()).collect();
            if finite.is_empty() {
                return Err(CreditError::ImputationImpossible(spec.name.clone()));
            }
            finite.sort_by(f64::total_cmp);
            let m = median(&finite);
            medians.push(m);
            if config.clip_outliers && spec.kind == ColumnKind::Numeric {
                // Bounds come from the imputed column, as transform will see it.
                let mut filled: Vec<f64> = col.iter().map(|&v| if v.is_finite() { v } else { m }).collect();
                filled.sort_by(f64::total_cmp);
                bounds.push(Some((percentile(&filled, 0.01), percentile(&filled, 0.99))));
            } else {
                bounds.push(None);
            }
        }
        Ok(Preprocessor {
            names: d.schema().names(),
            kinds: d.schema().columns().iter().map(|c| c.kind).collect(),
            medians,
            bounds,
        })
    }

    pub fn medians(&self) -> &[f64] {
        &self.medians
    }

    pub fn clip_bounds(&self) -> &[Option<(f64, f64)>] {
        &self.bounds
    }

    pub fn transform(&self, d: &Dataset) -> Result<(Dataset, PreprocessSummary)> {
        d.check_columns(&self.names)?;
        if let Some(row) = d.target().iter().position(|v| !v.is_finite()) {
            return Err(CreditError::MissingTarget { row: row + 1 });
        }
        let mut summary = PreprocessSummary::default();
        let (schema, mut columns, target, ids) = d.clone().into_parts();
        for (j, col) in columns.iter_mut().enumerate() {
            for v in col.iter_mut() {
                if !v.is_finite() {
                    *v = self.medians[j];
                    summary.n_imputed += 1;
                }
                if let Some((lo, hi)) = self.bounds[j] {
                    let c = v.clamp(lo, hi);
                    if c != *v {
                        *v = c;
                        summary.n_clipped += 1;
                    }
                }
                if self.kinds[j] == ColumnKind::Flag && *v != 0.0 && *v != 1.0 {
                    *v = 1.0;
                    summary.n_flags_coerced += 1;
                }
            }
        }
        Ok((Dataset::new(schema, columns, target, ids)?, summary))
    }
}

/// Fit and transform on the same rows.
pub fn preprocess(d: &Dataset, config: &PreprocessConfig) -> Result<Dataset> {
    Ok(Preprocessor::fit(d, config)?.transform(d)?.0)
}
