//! Self-describing JSON bundle holding a complex and where it came from.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::complex::SimplicialComplex;
use crate::error::{Error, Result};

pub const FORMAT: &str = "mhsn-complex";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bundle {
    pub format: String,
    pub version: u32,
    pub provenance: BTreeMap<String, String>,
    pub vertex_count: usize,
    pub counts: Vec<usize>,
    /// Vertex ids present in C_0.
    pub vertices: Vec<usize>,
    /// Simplices of dimension 1 and up, one list per dimension.
    pub simplices: Vec<Vec<Vec<usize>>>,
}

impl Bundle {
    pub fn new(c: &SimplicialComplex, provenance: BTreeMap<String, String>) -> Self {
        let top = (c.kappa_max() + 1) as usize;
        Bundle {
            format: FORMAT.into(),
            version: VERSION,
            provenance,
            vertex_count: c.vertex_count(),
            counts: c.counts(),
            vertices: c.simplices(0).iter().map(|s| s[0]).collect(),
            simplices: (1..top).map(|k| c.simplices(k).to_vec()).collect(),
        }
    }

    /// Rebuilds the complex and checks it against the recorded counts.
    pub fn complex(&self) -> Result<SimplicialComplex> {
        if self.format != FORMAT || self.version != VERSION {
            return Err(Error::InvalidConfig(format!("unsupported bundle {} v{}", self.format, self.version)));
        }
        let mut all: Vec<Vec<usize>> = self.vertices.iter().map(|&v| vec![v]).collect();
        all.extend(self.simplices.iter().flatten().cloned());
        let c = SimplicialComplex::from_simplices(self.simplices.len(), &all)?;
        if c.counts() != self.counts {
            return Err(Error::InvalidConfig(format!("bundle counts {:?} do not match its simplices {:?}", self.counts, c.counts())));
        }
        Ok(c)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}
