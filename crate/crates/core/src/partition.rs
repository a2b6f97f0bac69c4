//! Hierarchical bipartition of C_k by recursive Fiedler splits.
//!
//! Level 0 holds the whole of C_k, the deepest level holds singletons, and
//! every region with two or more simplices splits into exactly two children
//! on the next level. Singleton regions are carried down unchanged so each
//! level covers C_k. Within a level the children of region k precede the
//! children of region k+1, so every region occupies a contiguous block of
//! the leaf order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complex::{HodgeLaplacian, LaplacianVariant, Restriction, SimplicialComplex};
use crate::error::{Error, Result};
use crate::linalg::sym_eigen;

/// Fiedler entries at or below this magnitude count as zero (negative side).
pub const ZERO_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    pub level: usize,
    pub index: usize,
    pub members: Vec<usize>,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
}

impl Region {
    pub fn size(&self) -> usize {
        self.members.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BipartitionTree {
    pub kappa: usize,
    pub n: usize,
    levels: Vec<Vec<Region>>,
    #[serde(skip)]
    assignment: Vec<Vec<usize>>,
}

/// Two sides of a split region.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bipartition {
    pub negative: Vec<usize>,
    pub positive: Vec<usize>,
}

/// Options controlling how regions are split.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TreeOptions {
    pub variant: LaplacianVariant,
    pub restriction: Restriction,
}

impl BipartitionTree {
    pub fn build(c: &SimplicialComplex, kappa: usize, variant: LaplacianVariant) -> Result<Self> {
        Self::build_with(c, kappa, TreeOptions { variant, restriction: Restriction::default() })
    }

    pub fn build_with(c: &SimplicialComplex, kappa: usize, opts: TreeOptions) -> Result<Self> {
        let n = c.count(kappa);
        if n == 0 {
            return Err(if c.is_empty() { Error::EmptyComplex } else { Error::EmptyDimension(kappa) });
        }
        let mut levels = vec![vec![Region { level: 0, index: 0, members: (0..n).collect(), parent: None, children: vec![] }]];
        while levels.last().unwrap().iter().any(|r| r.size() > 1) {
            let current = levels.last().unwrap();
            let splits: Vec<Vec<Vec<usize>>> = current
                .par_iter()
                .map(|r| {
                    if r.size() == 1 {
                        Ok(vec![r.members.clone()])
                    } else {
                        split_region(c, kappa, &r.members, opts).map(|(a, b)| vec![a, b])
                    }
                })
                .collect::<Result<_>>()?;
            let level = levels.len();
            let mut next = Vec::new();
            let parents = levels.last_mut().unwrap();
            for (k, parts) in splits.into_iter().enumerate() {
                for members in parts {
                    parents[k].children.push(next.len());
                    next.push(Region { level, index: next.len(), members, parent: Some(k), children: vec![] });
                }
            }
            levels.push(next);
        }
        Ok(Self::from_levels(kappa, n, levels))
    }

    fn from_levels(kappa: usize, n: usize, levels: Vec<Vec<Region>>) -> Self {
        let assignment = levels
            .iter()
            .map(|regions| {
                let mut a = vec![usize::MAX; n];
                for r in regions {
                    for &s in &r.members {
                        a[s] = r.index;
                    }
                }
                a
            })
            .collect();
        BipartitionTree { kappa, n, levels, assignment }
    }

    /// Restores lookup tables after deserialization.
    pub fn reindexed(self) -> Self {
        Self::from_levels(self.kappa, self.n, self.levels)
    }

    pub fn p_max(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn levels(&self) -> &[Vec<Region>] {
        &self.levels
    }

    pub fn regions_at(&self, p: usize) -> &[Region] {
        &self.levels[p]
    }

    /// Number of regions at scale j = p_max - p.
    pub fn regions_at_scale(&self, j: usize) -> &[Region] {
        &self.levels[self.p_max() - j]
    }

    pub fn region_of(&self, p: usize, simplex: usize) -> usize {
        self.assignment[p][simplex]
    }

    /// Simplices in leaf order: the singleton regions of the deepest level by k.
    pub fn leaf_order(&self) -> Vec<usize> {
        self.levels[self.p_max()].iter().map(|r| r.members[0]).collect()
    }

    /// First leaf position of each region at level p.
    pub fn offsets(&self, p: usize) -> Vec<usize> {
        let mut acc = 0;
        self.levels[p]
            .iter()
            .map(|r| {
                let o = acc;
                acc += r.size();
                o
            })
            .collect()
    }

    /// Size of the smallest region containing both simplices.
    pub fn distance(&self, sigma: usize, tau: usize) -> usize {
        (0..=self.p_max())
            .rev()
            .find(|&p| self.assignment[p][sigma] == self.assignment[p][tau])
            .map(|p| self.levels[p][self.assignment[p][sigma]].size())
            .unwrap()
    }

    /// Relabels simplices by `xi` (`xi[old] = new`), keeping the tree shape.
    pub fn permuted(&self, xi: &[usize]) -> Self {
        assert_eq!(xi.len(), self.n);
        let levels = self
            .levels
            .iter()
            .map(|regions| {
                regions
                    .iter()
                    .map(|r| Region { members: r.members.iter().map(|&s| xi[s]).collect(), ..r.clone() })
                    .collect()
            })
            .collect();
        Self::from_levels(self.kappa, self.n, levels)
    }

    /// Checks the structural requirements; returns the first violation.
    pub fn validate(&self) -> std::result::Result<(), String> {
        let root = &self.levels[0];
        if root.len() != 1 || sorted(&root[0].members) != (0..self.n).collect::<Vec<_>>() {
            return Err("root is not the whole of C_k".into());
        }
        let leaves = &self.levels[self.p_max()];
        if leaves.len() != self.n || leaves.iter().any(|r| r.size() != 1) {
            return Err("deepest level is not all singletons".into());
        }
        for (p, regions) in self.levels.iter().enumerate() {
            let mut all: Vec<usize> = regions.iter().flat_map(|r| r.members.iter().copied()).collect();
            all.sort_unstable();
            if all != (0..self.n).collect::<Vec<_>>() {
                return Err(format!("level {p} is not a partition of C_k"));
            }
            if p == self.p_max() {
                continue;
            }
            let mut expected_child = 0;
            for r in regions {
                let want = if r.size() > 1 { 2 } else { 1 };
                if r.children.len() != want {
                    return Err(format!("region ({p},{}) has {} children", r.index, r.children.len()));
                }
                let mut union = Vec::new();
                for &ch in &r.children {
                    if ch != expected_child {
                        return Err(format!("children at level {} out of order", p + 1));
                    }
                    expected_child += 1;
                    let child = &self.levels[p + 1][ch];
                    if child.members.is_empty() || child.parent != Some(r.index) {
                        return Err(format!("bad child link at ({p},{})", r.index));
                    }
                    union.extend(child.members.iter().copied());
                }
                if sorted(&union) != sorted(&r.members) {
                    return Err(format!("children of ({p},{}) do not cover it", r.index));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Export<'a> {
            kappa: usize,
            n: usize,
            p_max: usize,
            levels: &'a [Vec<Region>],
        }
        Ok(serde_json::to_string_pretty(&Export { kappa: self.kappa, n: self.n, p_max: self.p_max(), levels: &self.levels })?)
    }
}

fn sorted(v: &[usize]) -> Vec<usize> {
    let mut v = v.to_vec();
    v.sort_unstable();
    v
}

/// Splits a region of two or more simplices. Disconnected regions are split
/// into their largest component and the rest; connected ones by the sign of
/// the Fiedler vector. The part holding the smallest simplex comes first.
pub fn split_region(
    c: &SimplicialComplex,
    kappa: usize,
    region: &[usize],
    opts: TreeOptions,
) -> Result<(Vec<usize>, Vec<usize>)> {
    debug_assert!(region.len() >= 2);
    let comps = c.region_components(kappa, region);
    let (a, b) = if comps.len() > 1 {
        // largest component; ties go to the one with the smaller first member
        let big = comps.iter().enumerate().max_by(|x, y| x.1.len().cmp(&y.1.len()).then(y.0.cmp(&x.0))).unwrap().0;
        let rest: Vec<usize> = comps.iter().enumerate().filter(|&(i, _)| i != big).flat_map(|(_, g)| g.iter().copied()).collect();
        (comps[big].clone(), rest)
    } else {
        let lap = c.restricted_laplacian(kappa, region, opts.variant, opts.restriction)?;
        let Bipartition { negative, positive } = fiedler_split(&lap);
        (negative, positive)
    };
    let (mut a, mut b) = (sorted(&a), sorted(&b));
    if b[0] < a[0] {
        std::mem::swap(&mut a, &mut b);
    }
    Ok((a, b))
}

/// Sign split of a region by the eigenvector of the second smallest
/// eigenvalue of its Laplacian. Zero entries go to the negative side; a
/// one-signed vector falls back to a median split with ties broken by
/// simplex index.
pub fn fiedler_split(lap: &HodgeLaplacian) -> Bipartition {
    let region = &lap.region;
    assert!(region.len() >= 2, "cannot split a region of size {}", region.len());
    let eig = sym_eigen(&lap.matrix);
    let fiedler: Vec<f64> = eig.vectors.column(1).iter().copied().collect();
    let (mut negative, mut positive) = (Vec::new(), Vec::new());
    for (p, &x) in fiedler.iter().enumerate() {
        if x > ZERO_TOL {
            positive.push(region[p]);
        } else {
            negative.push(region[p]);
        }
    }
    if negative.is_empty() || positive.is_empty() {
        let mut order: Vec<usize> = (0..region.len()).collect();
        order.sort_by(|&a, &b| fiedler[a].total_cmp(&fiedler[b]).then(region[a].cmp(&region[b])));
        let half = region.len() / 2;
        negative = order[..half].iter().map(|&p| region[p]).collect();
        positive = order[half..].iter().map(|&p| region[p]).collect();
    }
    Bipartition { negative, positive }
}
