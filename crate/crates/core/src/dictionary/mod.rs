//! Multiscale basis dictionaries over a bipartition tree.
//!
//! Both dictionaries attach an orthonormal basis of R^{|C^p_k|} to every
//! region (p, k) of the tree, zero-extended to R^n. The union over k of the
//! bases at one level is an orthonormal basis of R^n.
//!
//! - HGLET: eigenvectors of each region's Laplacian, by nondecreasing
//!   eigenvalue.
//! - GHWT: piecewise-constant scaling, Haar and Walsh vectors built bottom-up
//!   from the singleton indicators.

mod oracles;
mod stack;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complex::{LaplacianVariant, Restriction, SimplicialComplex};
use crate::error::{Error, Result};
use crate::linalg::{normalize_sign, rotate_to_lead, sym_eigen};
use crate::partition::BipartitionTree;

pub use oracles::{best_m_term, holder_seminorm, verify_decay_bound, verify_m_term, DecayReport, DecayViolation, MTermReport, MTermViolation};
pub use stack::{Block, ScaleStack};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DictionaryKind {
    Hglet,
    Ghwt,
}

impl std::str::FromStr for DictionaryKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hglet" => Ok(Self::Hglet),
            "ghwt" => Ok(Self::Ghwt),
            other => Err(Error::InvalidConfig(format!("unknown dictionary '{other}'"))),
        }
    }
}

impl std::fmt::Display for DictionaryKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Hglet => "hglet",
            Self::Ghwt => "ghwt",
        })
    }
}

/// Basis of one region. Row `l` of `vectors` is the l-th basis vector
/// restricted to `members` (columns follow `members`).
#[derive(Debug, Clone, PartialEq)]
pub struct RegionBasis {
    pub members: Vec<usize>,
    pub vectors: DMatrix<f64>,
    pub tags: Vec<usize>,
    pub eigenvalues: Option<Vec<f64>>,
}

impl RegionBasis {
    fn singleton(member: usize) -> Self {
        RegionBasis { members: vec![member], vectors: DMatrix::from_element(1, 1, 1.0), tags: vec![0], eigenvalues: None }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct MultiscaleDictionary {
    pub kind: DictionaryKind,
    pub n: usize,
    tree: BipartitionTree,
    levels: Vec<Vec<RegionBasis>>,
}

/// Expansion coefficients indexed `[p][k][l]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficients {
    pub levels: Vec<Vec<Vec<f64>>>,
}

impl Coefficients {
    pub fn get(&self, p: usize, k: usize, l: usize) -> f64 {
        self.levels[p][k][l]
    }

    /// Sum of squared coefficients at one level.
    pub fn energy(&self, p: usize) -> f64 {
        self.levels[p].iter().flatten().map(|c| c * c).sum()
    }
}

impl MultiscaleDictionary {
    /// κ-HGLET with induced-subcomplex region Laplacians.
    pub fn hglet(c: &SimplicialComplex, tree: &BipartitionTree, variant: LaplacianVariant) -> Result<Self> {
        Self::hglet_with(c, tree, variant, Restriction::default())
    }

    pub fn hglet_with(
        c: &SimplicialComplex,
        tree: &BipartitionTree,
        variant: LaplacianVariant,
        restriction: Restriction,
    ) -> Result<Self> {
        let kappa = tree.kappa;
        if c.count(kappa) != tree.n {
            return Err(Error::LengthMismatch { expected: tree.n, got: c.count(kappa) });
        }
        let levels = tree
            .levels()
            .iter()
            .map(|regions| {
                regions
                    .par_iter()
                    .map(|r| {
                        if r.size() == 1 {
                            let lap = c.restricted_laplacian(kappa, &r.members, variant, restriction)?;
                            let mut b = RegionBasis::singleton(r.members[0]);
                            b.eigenvalues = Some(vec![lap.matrix[(0, 0)]]);
                            return Ok(b);
                        }
                        let lap = c.restricted_laplacian(kappa, &r.members, variant, restriction)?;
                        Ok(eigen_basis(&r.members, &lap.matrix))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(MultiscaleDictionary { kind: DictionaryKind::Hglet, n: tree.n, tree: tree.clone(), levels })
    }

    /// κ-GHWT, computed bottom-up from the leaf indicators.
    pub fn ghwt(tree: &BipartitionTree) -> Self {
        let p_max = tree.p_max();
        let mut levels: Vec<Vec<RegionBasis>> = vec![Vec::new(); p_max + 1];
        levels[p_max] = tree.regions_at(p_max).iter().map(|r| RegionBasis::singleton(r.members[0])).collect();
        for p in (0..p_max).rev() {
            let below = &levels[p + 1];
            let built: Vec<RegionBasis> = tree
                .regions_at(p)
                .iter()
                .map(|r| match r.children.as_slice() {
                    [only] => below[*only].clone(),
                    [a, b] => ghwt_merge(&r.members, &below[*a], &below[*b]),
                    other => unreachable!("region with {} children", other.len()),
                })
                .collect();
            levels[p] = built;
        }
        MultiscaleDictionary { kind: DictionaryKind::Ghwt, n: tree.n, tree: tree.clone(), levels }
    }

    pub fn build(
        kind: DictionaryKind,
        c: &SimplicialComplex,
        tree: &BipartitionTree,
        variant: LaplacianVariant,
    ) -> Result<Self> {
        match kind {
            DictionaryKind::Hglet => Self::hglet(c, tree, variant),
            DictionaryKind::Ghwt => Ok(Self::ghwt(tree)),
        }
    }

    pub fn tree(&self) -> &BipartitionTree {
        &self.tree
    }

    pub fn p_max(&self) -> usize {
        self.tree.p_max()
    }

    pub fn level(&self, p: usize) -> &[RegionBasis] {
        &self.levels[p]
    }

    /// Basis vector (p, k, l) zero-extended to length n.
    pub fn vector(&self, p: usize, k: usize, l: usize) -> DVector<f64> {
        let b = &self.levels[p][k];
        let mut v = DVector::zeros(self.n);
        for (c, &s) in b.members.iter().enumerate() {
            v[s] = b.vectors[(l, c)];
        }
        v
    }

    /// All basis vectors of level p as rows, in (k, l) order.
    pub fn level_matrix(&self, p: usize) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        let mut row = 0;
        for b in &self.levels[p] {
            for l in 0..b.len() {
                for (c, &s) in b.members.iter().enumerate() {
                    m[(row, s)] = b.vectors[(l, c)];
                }
                row += 1;
            }
        }
        m
    }

    /// Per-scale orthonormal matrices for scales j = 0..=J (level p_max - j).
    pub fn scale_stack(&self, j_max: usize) -> Result<ScaleStack> {
        ScaleStack::new(self, j_max)
    }

    pub fn analyze(&self, f: &[f64]) -> Result<Coefficients> {
        if f.len() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, got: f.len() });
        }
        let levels = self
            .levels
            .iter()
            .map(|regions| {
                regions
                    .iter()
                    .map(|b| {
                        let local = DVector::from_iterator(b.len(), b.members.iter().map(|&s| f[s]));
                        (&b.vectors * local).iter().copied().collect()
                    })
                    .collect()
            })
            .collect();
        Ok(Coefficients { levels })
    }

    /// Relabels simplices by `xi` (`xi[old] = new`): every basis vector v
    /// becomes v∘xi⁻¹ and the tree is relabelled the same way.
    pub fn permuted(&self, xi: &[usize]) -> Self {
        let levels = self
            .levels
            .iter()
            .map(|regions| {
                regions
                    .iter()
                    .map(|b| RegionBasis { members: b.members.iter().map(|&s| xi[s]).collect(), ..b.clone() })
                    .collect()
            })
            .collect();
        MultiscaleDictionary { kind: self.kind, n: self.n, tree: self.tree.permuted(xi), levels }
    }

    /// Text table `p,k,l,tag,x_0..x_{n-1}` with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("p,k,l,tag");
        for i in 0..self.n {
            out.push_str(&format!(",x{i}"));
        }
        out.push('\n');
        for (p, regions) in self.levels.iter().enumerate() {
            for (k, b) in regions.iter().enumerate() {
                for l in 0..b.len() {
                    out.push_str(&format!("{p},{k},{l},{}", b.tags[l]));
                    let v = self.vector(p, k, l);
                    for x in v.iter() {
                        out.push_str(&format!(",{x:.16e}"));
                    }
                    out.push('\n');
                }
            }
        }
        out
    }
}

/// Eigenvectors of a region Laplacian as rows. When the region's constant
/// vector lies in the null space it is placed first, so that the remaining
/// vectors have zero mean on the region.
fn eigen_basis(members: &[usize], lap: &DMatrix<f64>) -> RegionBasis {
    let r = members.len();
    let eig = sym_eigen(lap);
    let mut vectors = eig.vectors.clone();
    let scale = lap.abs().max().max(1.0);
    let constant = DVector::from_element(r, 1.0 / (r as f64).sqrt());
    if (lap * &constant).norm() <= 1e-9 * scale {
        let null = eig.values.iter().take_while(|&&v| v.abs() <= 1e-9 * scale).count();
        if null > 0 {
            if let Some(rot) = rotate_to_lead(&eig.vectors.columns(0, null).into_owned(), &constant) {
                vectors.columns_mut(0, null).copy_from(&rot);
            }
        }
    }
    let mut rows = vectors.transpose();
    for mut row in rows.row_iter_mut() {
        let mut v: Vec<f64> = row.iter().copied().collect();
        normalize_sign(&mut v);
        row.copy_from_slice(&v);
    }
    RegionBasis { members: members.to_vec(), vectors: rows, tags: (0..r).collect(), eigenvalues: Some(eig.values) }
}

/// Parent basis from two child bases: scaling, Haar from the children's
/// scaling vectors, and Walsh vectors (ψ_A ± ψ_B)/√2 for tags present in
/// both children. A tag present in one child only is carried up as 2·tag.
fn ghwt_merge(members: &[usize], a: &RegionBasis, b: &RegionBasis) -> RegionBasis {
    let n = members.len();
    let pos: std::collections::HashMap<usize, usize> = members.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let lift = |child: &RegionBasis, row: usize| -> Vec<f64> {
        let mut v = vec![0.0; n];
        for (c, s) in child.members.iter().enumerate() {
            v[pos[s]] = child.vectors[(row, c)];
        }
        v
    };
    let (na, nb, nf) = (a.len() as f64, b.len() as f64, n as f64);
    let mut rows: Vec<(usize, Vec<f64>)> = Vec::with_capacity(n);
    rows.push((0, vec![1.0 / nf.sqrt(); n]));
    let mut haar = vec![0.0; n];
    for s in &a.members {
        haar[pos[s]] = (nb / (na * nf)).sqrt();
    }
    for s in &b.members {
        haar[pos[s]] = -(na / (nb * nf)).sqrt();
    }
    rows.push((1, haar));

    let row_of = |basis: &RegionBasis, tag: usize| basis.tags.iter().position(|&t| t == tag);
    let mut tags: Vec<usize> = a.tags.iter().chain(&b.tags).copied().filter(|&t| t >= 1).collect();
    tags.sort_unstable();
    tags.dedup();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for t in tags {
        match (row_of(a, t), row_of(b, t)) {
            (Some(ra), Some(rb)) => {
                let (va, vb) = (lift(a, ra), lift(b, rb));
                rows.push((2 * t, va.iter().zip(&vb).map(|(x, y)| h * (x + y)).collect()));
                rows.push((2 * t + 1, va.iter().zip(&vb).map(|(x, y)| h * (x - y)).collect()));
            }
            (Some(ra), None) => rows.push((2 * t, lift(a, ra))),
            (None, Some(rb)) => rows.push((2 * t, lift(b, rb))),
            (None, None) => unreachable!(),
        }
    }
    rows.sort_by_key(|(t, _)| *t);
    let mut vectors = DMatrix::zeros(n, n);
    let mut tags = Vec::with_capacity(n);
    for (i, (t, mut v)) in rows.into_iter().enumerate() {
        normalize_sign(&mut v);
        vectors.row_mut(i).copy_from_slice(&v);
        tags.push(t);
    }
    RegionBasis { members: members.to_vec(), vectors, tags, eigenvalues: None }
}
