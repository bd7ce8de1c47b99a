//! Per-feature gradient histograms and the parent − sibling subtraction.

use crate::binning::{BinColumn, BinnedDataset};
use crate::error::{CreditError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HistBin {
    pub grad: f64,
    pub hess: f64,
    pub count: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    bins: Vec<HistBin>,
}

impl Histogram {
    pub fn zeros(n_bins: usize) -> Self {
        Histogram {
            bins: vec![HistBin::default(); n_bins],
        }
    }

    pub fn bins(&self) -> &[HistBin] {
        &self.bins
    }

    pub fn n_bins(&self) -> usize {
        self.bins.len()
    }

    pub fn total_count(&self) -> usize {
        self.bins.iter().map(|b| b.count as usize).sum()
    }

    pub fn total_grad(&self) -> f64 {
        self.bins.iter().map(|b| b.grad).sum()
    }

    pub fn total_hess(&self) -> f64 {
        self.bins.iter().map(|b| b.hess).sum()
    }
}

fn accumulate<B: Copy + Into<usize>>(bins: &mut [HistBin], idx: &[B], rows: &[u32], grad: &[f64], hess: &[f64]) {
    for &r in rows {
        let r = r as usize;
        let b = &mut bins[idx[r].into()];
        b.grad += grad[r];
        b.hess += hess[r];
        b.count += 1;
    }
}

/// Accumulates `(Σgrad, Σhess, count)` per bin over exactly `rows`.
pub fn build_histogram(bd: &BinnedDataset, rows: &[u32], feature: usize, grad: &[f64], hess: &[f64]) -> Histogram {
    let mut h = Histogram::zeros(bd.mapper().n_bins(feature));
    match bd.column(feature) {
        BinColumn::Narrow(idx) => accumulate(&mut h.bins, idx, rows, grad, hess),
        BinColumn::Wide(idx) => accumulate(&mut h.bins, idx, rows, grad, hess),
    }
    h
}

/// Element-wise `parent − sibling`.
pub fn subtract_histogram(parent: &Histogram, sibling: &Histogram) -> Result<Histogram> {
    if parent.n_bins() != sibling.n_bins() {
        return Err(CreditError::HistogramInconsistent(format!(
            "bin count mismatch: {} vs {}",
            parent.n_bins(),
            sibling.n_bins()
        )));
    }
    let bins = parent
        .bins
        .iter()
        .zip(&sibling.bins)
        .enumerate()
        .map(|(i, (p, s))| {
            let count = p.count.checked_sub(s.count).ok_or_else(|| {
                CreditError::HistogramInconsistent(format!("negative count in bin {i}: {} − {}", p.count, s.count))
            })?;
            Ok(HistBin {
                grad: p.grad - s.grad,
                hess: p.hess - s.hess,
                count,
            })
        })
        .collect::<Result<_>>()?;
    Ok(Histogram { bins })
}
