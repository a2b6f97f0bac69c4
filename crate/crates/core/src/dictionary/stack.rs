use nalgebra::{DMatrix, DVector};

use super::MultiscaleDictionary;
use crate::error::{Error, Result};

/// One region's rows of Φ^j: `vectors` is n_k × n_k with columns following
/// `members`; its rows occupy positions `offset..offset + n_k` of Φ^j.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub offset: usize,
    pub members: Vec<usize>,
    pub vectors: DMatrix<f64>,
}

/// The J+1 finest levels of a dictionary as per-scale orthonormal operators.
///
/// Row r of Φ^j is paired with simplex `leaf_order[r]`, so the coefficients
/// of region k land on the members of region k. This makes |Φ^j f| a signal
/// on C_k again, which is what the scattering cascade feeds forward.
#[derive(Debug, Clone)]
pub struct ScaleStack {
    pub j_max: usize,
    pub p_max: usize,
    pub n: usize,
    leaf_order: Vec<usize>,
    scales: Vec<Vec<Block>>,
}

impl ScaleStack {
    pub(super) fn new(d: &MultiscaleDictionary, j_max: usize) -> Result<Self> {
        let p_max = d.p_max();
        if j_max > p_max {
            return Err(Error::ScaleOutOfRange { requested: j_max, p_max });
        }
        let scales = (0..=j_max)
            .map(|j| {
                let p = p_max - j;
                d.level(p)
                    .iter()
                    .zip(d.tree().offsets(p))
                    .map(|(b, offset)| Block { offset, members: b.members.clone(), vectors: b.vectors.clone() })
                    .collect()
            })
            .collect();
        Ok(ScaleStack { j_max, p_max, n: d.n, leaf_order: d.tree().leaf_order(), scales })
    }

    pub fn leaf_order(&self) -> &[usize] {
        &self.leaf_order
    }

    pub fn blocks(&self, j: usize) -> &[Block] {
        &self.scales[j]
    }

    /// Number of regions K^j at scale j.
    pub fn region_count(&self, j: usize) -> usize {
        self.scales[j].len()
    }

    /// Region member lists at scale j.
    pub fn regions(&self, j: usize) -> impl Iterator<Item = &[usize]> {
        self.scales[j].iter().map(|b| b.members.as_slice())
    }

    /// Φ^j as a dense matrix with rows in (k, l) order.
    pub fn matrix(&self, j: usize) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for b in &self.scales[j] {
            for l in 0..b.members.len() {
                for (c, &s) in b.members.iter().enumerate() {
                    m[(b.offset + l, s)] = b.vectors[(l, c)];
                }
            }
        }
        m
    }

    /// Φ^j f in row order.
    pub fn coefficients(&self, j: usize, f: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for b in &self.scales[j] {
            let local = DVector::from_iterator(b.members.len(), b.members.iter().map(|&s| f[s]));
            let c = &b.vectors * local;
            out[b.offset..b.offset + c.len()].copy_from_slice(c.as_slice());
        }
        out
    }

    /// Φ^j f with row r placed on simplex `leaf_order[r]`.
    pub fn transform(&self, j: usize, f: &[f64]) -> Vec<f64> {
        let rows = self.coefficients(j, f);
        let mut out = vec![0.0; self.n];
        for (r, &s) in self.leaf_order.iter().enumerate() {
            out[s] = rows[r];
        }
        out
    }
}
