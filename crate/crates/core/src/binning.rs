//! Quantile discretisation of continuous features.
//!
//! Each feature gets an ordered list of *upper* bin edges. Bin `i` covers
//! `(edge[i-1], edge[i]]`, bin 0 covers everything up to `edge[0]`, and values
//! above the last edge fall into the last bin. A value equal to an edge lands
//! in the lower bin.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{CreditError, Result};

pub const DEFAULT_MAX_BIN: usize = 255;
const MAX_SUPPORTED_BINS: usize = u16::MAX as usize + 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinMapper {
    max_bin: usize,
    upper_edges: Vec<Vec<f64>>,
}

/// Equal-frequency cuts over the distinct values of one column. With at most
/// `max_bin` distinct values every value gets its own bin.
fn feature_edges(column: &[f64], max_bin: usize) -> Vec<f64> {
    let mut sorted: Vec<f64> = column.iter().copied().filter(|v| !v.is_nan()).collect();
    if sorted.is_empty() {
        return vec![0.0];
    }
    sorted.sort_by(f64::total_cmp);
    let mut distinct: Vec<(f64, usize)> = Vec::new();
    for v in sorted {
        match distinct.last_mut() {
            Some((last, count)) if *last == v => *count += 1,
            _ => distinct.push((v, 1)),
        }
    }
    if distinct.len() <= max_bin {
        return distinct.into_iter().map(|(v, _)| v).collect();
    }

    let mut edges = Vec::with_capacity(max_bin);
    let mut rest: usize = distinct.iter().map(|&(_, c)| c).sum();
    let mut acc = 0usize;
    let last = distinct.len() - 1;
    for (i, &(v, c)) in distinct.iter().enumerate() {
        acc += c;
        if i == last {
            edges.push(v);
            break;
        }
        let bins_left = max_bin - edges.len();
        if bins_left > 1 && acc as f64 >= rest as f64 / bins_left as f64 {
            edges.push(v);
            rest -= acc;
            acc = 0;
        }
    }
    edges
}

impl BinMapper {
    pub fn fit_columns(columns: &[Vec<f64>], max_bin: usize) -> Result<Self> {
        if !(2..=MAX_SUPPORTED_BINS).contains(&max_bin) {
            return Err(CreditError::InvalidParameter(format!(
                "max_bin must lie in [2, {MAX_SUPPORTED_BINS}], got {max_bin}"
            )));
        }
        if columns.first().is_none_or(|c| c.is_empty()) {
            return Err(CreditError::InvalidParameter("cannot fit bins on an empty dataset".into()));
        }
        let upper_edges = columns.par_iter().map(|c| feature_edges(c, max_bin)).collect();
        Ok(BinMapper { max_bin, upper_edges })
    }

    pub fn max_bin(&self) -> usize {
        self.max_bin
    }

    pub fn n_features(&self) -> usize {
        self.upper_edges.len()
    }

    pub fn n_bins(&self, feature: usize) -> usize {
        self.upper_edges[feature].len()
    }

    pub fn upper_edges(&self, feature: usize) -> &[f64] {
        &self.upper_edges[feature]
    }

    /// Inclusive upper bound of `bin`.
    pub fn bin_upper(&self, feature: usize, bin: usize) -> f64 {
        self.upper_edges[feature][bin]
    }

    pub fn bin(&self, feature: usize, value: f64) -> usize {
        let edges = &self.upper_edges[feature];
        edges.partition_point(|&e| e < value).min(edges.len() - 1)
    }

    fn is_narrow(&self) -> bool {
        self.max_bin <= 256
    }
}

pub fn fit_bins(d: &Dataset, max_bin: usize) -> Result<BinMapper> {
    BinMapper::fit_columns(d.columns(), max_bin)
}

/// Bin indices of one feature; 8-bit storage whenever `max_bin ≤ 256`.
#[derive(Debug, Clone, PartialEq)]
pub enum BinColumn {
    Narrow(Vec<u8>),
    Wide(Vec<u16>),
}

impl BinColumn {
    #[inline]
    pub fn get(&self, row: usize) -> usize {
        match self {
            BinColumn::Narrow(v) => v[row] as usize,
            BinColumn::Wide(v) => v[row] as usize,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            BinColumn::Narrow(v) => v.len(),
            BinColumn::Wide(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinnedDataset {
    columns: Vec<BinColumn>,
    mapper: BinMapper,
    target: Vec<f64>,
    n_rows: usize,
}

impl BinnedDataset {
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, feature: usize) -> &BinColumn {
        &self.columns[feature]
    }

    pub fn bin(&self, row: usize, feature: usize) -> usize {
        self.columns[feature].get(row)
    }

    pub fn mapper(&self) -> &BinMapper {
        &self.mapper
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }
}

pub fn apply_bins(d: &Dataset, m: &BinMapper) -> Result<BinnedDataset> {
    if d.n_cols() != m.n_features() {
        return Err(CreditError::Dimension(format!(
            "dataset has {} columns, bin mapper expects {}",
            d.n_cols(),
            m.n_features()
        )));
    }
    let columns = d
        .columns()
        .par_iter()
        .enumerate()
        .map(|(f, col)| {
            if m.is_narrow() {
                BinColumn::Narrow(col.iter().map(|&v| m.bin(f, v) as u8).collect())
            } else {
                BinColumn::Wide(col.iter().map(|&v| m.bin(f, v) as u16).collect())
            }
        })
        .collect();
    Ok(BinnedDataset {
        columns,
        mapper: m.clone(),
        target: d.target().to_vec(),
        n_rows: d.n_rows(),
    })
}
