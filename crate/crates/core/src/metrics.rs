//! MAE, MAPE, MSE, RMSE and R², plus the report table.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{CreditError, Result};

/// Targets with `|y|` at or below this are left out of MAPE.
pub const MAPE_ZERO_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub mae: f64,
    /// A ratio, not a percentage. NaN when every row was excluded.
    pub mape: f64,
    pub mse: f64,
    pub rmse: f64,
    /// `−∞` when the target is constant and the prediction is not exact.
    pub r2: f64,
    pub n: usize,
    pub n_excluded_mape: usize,
}

impl MetricsReport {
    /// False when R² is the constant-target sentinel.
    pub fn r2_defined(&self) -> bool {
        self.r2.is_finite()
    }
}

pub fn evaluate(target: &[f64], prediction: &[f64]) -> Result<MetricsReport> {
    if target.len() != prediction.len() {
        return Err(CreditError::Dimension(format!(
            "{} targets vs {} predictions",
            target.len(),
            prediction.len()
        )));
    }
    if target.is_empty() {
        return Err(CreditError::InvalidParameter("cannot evaluate zero rows".into()));
    }
    let n = target.len() as f64;
    let (mut abs, mut sq, mut pct) = (0.0, 0.0, 0.0);
    let mut n_excluded_mape = 0;
    for (&y, &p) in target.iter().zip(prediction) {
        let e = p - y;
        abs += e.abs();
        sq += e * e;
        if y.abs() > MAPE_ZERO_THRESHOLD {
            pct += e.abs() / y.abs();
        } else {
            n_excluded_mape += 1;
        }
    }
    let n_mape = target.len() - n_excluded_mape;
    let mape = if n_mape == 0 { f64::NAN } else { pct / n_mape as f64 };
    let mean = target.iter().sum::<f64>() / n;
    let ss_tot: f64 = target.iter().map(|y| (y - mean) * (y - mean)).sum();
    let constant = target.iter().all(|&y| y == target[0]);
    let r2 = if constant {
        if sq == 0.0 {
            1.0
        } else {
            f64::NEG_INFINITY
        }
    } else {
        1.0 - sq / ss_tot
    };
    let mse = sq / n;
    Ok(MetricsReport {
        mae: abs / n,
        mape,
        mse,
        rmse: mse.sqrt(),
        r2,
        n: target.len(),
        n_excluded_mape,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub dataset: String,
    pub method: String,
    pub metrics: MetricsReport,
}

impl ReportRow {
    pub fn new(dataset: impl Into<String>, method: impl Into<String>, metrics: MetricsReport) -> Self {
        ReportRow {
            dataset: dataset.into(),
            method: method.into(),
            metrics,
        }
    }
}

pub const REPORT_HEADER: [&str; 7] = ["Dataset", "Method", "MAE", "MAPE", "MSE", "RMSE", "R²"];

/// Four decimals; undefined values render as `n/a`.
pub fn format_value(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.4}")
    } else {
        "n/a".to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReportTable {
    rows: Vec<ReportRow>,
}

pub fn build_report_table(rows: Vec<ReportRow>) -> ReportTable {
    ReportTable { rows }
}

impl ReportTable {
    pub fn rows(&self) -> &[ReportRow] {
        &self.rows
    }

    fn cells(&self) -> Vec<[String; 7]> {
        self.rows
            .iter()
            .map(|r| {
                let m = &r.metrics;
                [
                    r.dataset.clone(),
                    r.method.clone(),
                    format_value(m.mae),
                    format_value(m.mape),
                    format_value(m.mse),
                    format_value(m.rmse),
                    format_value(m.r2),
                ]
            })
            .collect()
    }

    /// Space-aligned text: text columns left-aligned, numbers right-aligned.
    pub fn to_text(&self) -> String {
        let cells = self.cells();
        let mut widths: Vec<usize> = REPORT_HEADER.iter().map(|h| h.chars().count()).collect();
        for row in &cells {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.chars().count());
            }
        }
        let mut out = String::new();
        let line = |out: &mut String, row: &[&str]| {
            let parts: Vec<String> = row
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let pad = widths[i] - c.chars().count();
                    if i < 2 {
                        format!("{c}{}", " ".repeat(pad))
                    } else {
                        format!("{}{c}", " ".repeat(pad))
                    }
                })
                .collect();
            let _ = writeln!(out, "{}", parts.join("  ").trim_end());
        };
        line(&mut out, &REPORT_HEADER);
        for row in &cells {
            line(&mut out, &row.iter().map(String::as_str).collect::<Vec<_>>());
        }
        out
    }

    /// Comma-separated with the same columns and formatting.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(REPORT_HEADER).expect("writing to memory");
        for row in self.cells() {
            w.write_record(&row).expect("writing to memory");
        }
        String::from_utf8(w.into_inner().expect("writing to memory")).expect("csv output is utf-8")
    }
}
