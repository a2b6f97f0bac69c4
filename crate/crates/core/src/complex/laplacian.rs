use std::collections::{BTreeMap, BTreeSet, HashMap};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{natural_parity, SimplicialComplex};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LaplacianVariant {
    /// L_k = B_{k-1}^T B_{k-1} + B_k B_k^T
    #[default]
    Combinatorial,
    /// Degree-weighted, symmetrically normalized boundaries.
    Normalized,
}

impl std::str::FromStr for LaplacianVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "combinatorial" => Ok(Self::Combinatorial),
            "normalized" => Ok(Self::Normalized),
            other => Err(Error::InvalidConfig(format!("unknown Laplacian variant '{other}'"))),
        }
    }
}

impl std::fmt::Display for LaplacianVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Combinatorial => "combinatorial",
            Self::Normalized => "normalized",
        })
    }
}

/// How a Laplacian is restricted to a region of C_k.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Restriction {
    /// Laplacian of the subcomplex spanned by the region: the down-term keeps
    /// every face of the region, the up-term keeps only cofaces whose faces
    /// all lie in the region. Degree weights are recomputed on that
    /// subcomplex.
    #[default]
    Induced,
    /// Rows and columns of the region cut out of the global Laplacian.
    PrincipalSubmatrix,
}

/// Diagonals of D_{k-1}, D_k and D_{k+1}.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrices {
    pub lower: Vec<f64>,
    pub current: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct HodgeLaplacian {
    pub kappa: usize,
    pub variant: LaplacianVariant,
    /// Simplex indices (into C_k) labelling rows and columns.
    pub region: Vec<usize>,
    pub matrix: DMatrix<f64>,
}

impl HodgeLaplacian {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

// zero degrees (no cofaces) are replaced by one
fn nonzero(w: f64) -> f64 {
    if w == 0.0 {
        1.0
    } else {
        w
    }
}

impl SimplicialComplex {
    fn check_dim(&self, kappa: usize) -> Result<()> {
        if kappa as isize > self.kappa_max() {
            if self.is_empty() {
                return Err(Error::EmptyComplex);
            }
            return Err(Error::DimensionOutOfRange { kappa, max_dim: self.kappa_max() });
        }
        Ok(())
    }

    /// Degree weights anchored at D_{k+1} = I.
    pub fn weight_matrices(&self, kappa: usize) -> Result<WeightMatrices> {
        self.check_dim(kappa)?;
        let upper = vec![1.0; self.count(kappa + 1)];
        let current: Vec<f64> = (0..self.count(kappa)).map(|i| nonzero(self.cofaces(kappa, i).len() as f64)).collect();
        let lower = if kappa == 0 {
            Vec::new()
        } else {
            (0..self.count(kappa - 1))
                .map(|a| nonzero(self.cofaces(kappa - 1, a).iter().map(|&s| current[s]).sum()))
                .collect()
        };
        Ok(WeightMatrices { lower, current, upper })
    }

    pub fn hodge_laplacian(&self, kappa: usize, variant: LaplacianVariant) -> Result<HodgeLaplacian> {
        self.check_dim(kappa)?;
        let region: Vec<usize> = (0..self.count(kappa)).collect();
        let matrix = self.assemble(kappa, &region, variant);
        Ok(HodgeLaplacian { kappa, variant, region, matrix })
    }

    /// Laplacian of a region (indices into C_k, rows follow the given order).
    pub fn restricted_laplacian(
        &self,
        kappa: usize,
        region: &[usize],
        variant: LaplacianVariant,
        restriction: Restriction,
    ) -> Result<HodgeLaplacian> {
        self.check_dim(kappa)?;
        if region.is_empty() {
            return Err(Error::EmptyRegion);
        }
        let n = self.count(kappa);
        let mut seen = BTreeSet::new();
        for &s in region {
            if s >= n || !seen.insert(s) {
                return Err(Error::InvalidConfig(format!("bad region member {s}")));
            }
        }
        let matrix = match restriction {
            Restriction::Induced => self.assemble(kappa, region, variant),
            Restriction::PrincipalSubmatrix => {
                let all: Vec<usize> = (0..n).collect();
                let full = self.assemble(kappa, &all, variant);
                DMatrix::from_fn(region.len(), region.len(), |i, j| full[(region[i], region[j])])
            }
        };
        Ok(HodgeLaplacian { kappa, variant, region: region.to_vec(), matrix })
    }

    /// Induced-subcomplex Laplacian on `region`. With the whole of C_k this
    /// is the global Laplacian.
    fn assemble(&self, kappa: usize, region: &[usize], variant: LaplacianVariant) -> DMatrix<f64> {
        let r = region.len();
        let local: HashMap<usize, usize> = region.iter().enumerate().map(|(p, &s)| (s, p)).collect();
        let mut m = DMatrix::zeros(r, r);

        // up-term: cofaces with every face inside the region
        let mut up: BTreeSet<usize> = BTreeSet::new();
        for &s in region {
            for &t in self.cofaces(kappa, s) {
                if self.faces(kappa + 1, t).iter().all(|f| local.contains_key(f)) {
                    up.insert(t);
                }
            }
        }
        let mut degree = vec![0.0; r];
        for &t in &up {
            for &f in self.faces(kappa + 1, t) {
                degree[local[&f]] += 1.0;
            }
        }
        let weight: Vec<f64> = match variant {
            LaplacianVariant::Combinatorial => vec![1.0; r],
            LaplacianVariant::Normalized => degree.iter().map(|&d| nonzero(d)).collect(),
        };
        for &t in &up {
            let entries: Vec<(usize, f64)> = self
                .faces(kappa + 1, t)
                .iter()
                .enumerate()
                .map(|(l, f)| (local[f], natural_parity(l) as f64))
                .collect();
            for &(a, sa) in &entries {
                for &(b, sb) in &entries {
                    m[(a, b)] += sa * sb / (weight[a] * weight[b]).sqrt();
                }
            }
        }

        // down-term: every face of the region
        if kappa > 0 {
            let mut by_face: BTreeMap<usize, Vec<(usize, f64)>> = BTreeMap::new();
            for (p, &s) in region.iter().enumerate() {
                for (l, &f) in self.faces(kappa, s).iter().enumerate() {
                    by_face.entry(f).or_default().push((p, natural_parity(l) as f64));
                }
            }
            for entries in by_face.values() {
                let face_weight = match variant {
                    LaplacianVariant::Combinatorial => 1.0,
                    LaplacianVariant::Normalized => nonzero(entries.iter().map(|&(p, _)| weight[p]).sum()),
                };
                for &(a, sa) in entries {
                    for &(b, sb) in entries {
                        m[(a, b)] += sa * sb * (weight[a] * weight[b]).sqrt() / face_weight;
                    }
                }
            }
        }
        m
    }
}
