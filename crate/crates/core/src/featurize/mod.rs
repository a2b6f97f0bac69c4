//! Input signals: lifted node signals, topological descriptors of graphs and
//! geometric descriptors of point clouds.

pub mod io;

use nalgebra::Matrix5;
use rayon::prelude::*;

use crate::complex::{LaplacianVariant, SimplicialComplex};
use crate::dictionary::{DictionaryKind, MultiscaleDictionary};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::partition::BipartitionTree;
use crate::scattering::{feature_layout, scatter, Pooling, ScatterConfig};

/// A batch of signals on C_κ, one per row.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalSet {
    pub kappa: usize,
    pub n: usize,
    pub signals: Vec<Vec<f64>>,
}

impl SignalSet {
    pub fn new(kappa: usize, n: usize, signals: Vec<Vec<f64>>) -> Result<Self> {
        if let Some(bad) = signals.iter().find(|s| s.len() != n) {
            return Err(Error::LengthMismatch { expected: n, got: bad.len() });
        }
        Ok(SignalSet { kappa, n, signals })
    }

    pub fn len(&self) -> usize {
        self.signals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signals.is_empty()
    }
}

/// Averages a vertex signal over the vertices of each simplex, for every
/// dimension of the complex.
pub fn lift_signal(c: &SimplicialComplex, f0: &[f64]) -> Result<Vec<Vec<f64>>> {
    if f0.len() != c.vertex_count() {
        return Err(Error::LengthMismatch { expected: c.vertex_count(), got: f0.len() });
    }
    let top = (c.kappa_max() + 1) as usize;
    Ok((0..top)
        .map(|k| c.simplices(k).iter().map(|s| s.iter().map(|&v| f0[v]).sum::<f64>() / s.len() as f64).collect())
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeFeatures {
    pub eccentricity: Vec<usize>,
    pub clustering: Vec<f64>,
}

/// Eccentricity within each node's connected component, and the local
/// clustering coefficient.
pub fn node_features(g: &Graph) -> NodeFeatures {
    let n = g.vertex_count();
    let eccentricity = (0..n)
        .into_par_iter()
        .map(|v| g.bfs(v).into_iter().flatten().max().unwrap_or(0))
        .collect();
    let clustering = (0..n)
        .map(|v| {
            let nb = g.neighbors(v);
            let d = nb.len();
            if d < 2 {
                return 0.0;
            }
            let mut tri = 0usize;
            for (i, &a) in nb.iter().enumerate() {
                tri += nb[i + 1..].iter().filter(|&&b| g.has_edge(a, b)).count();
            }
            2.0 * tri as f64 / (d * (d - 1)) as f64
        })
        .collect();
    NodeFeatures { eccentricity, clustering }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeFeatures {
    pub mean_eccentricity: Vec<f64>,
    /// Nonzero off-diagonal entries in the edge's row of the combinatorial
    /// 1-Laplacian, i.e. the number of 1-adjacent edges.
    pub one_adjacency: Vec<usize>,
}

pub fn edge_features(c: &SimplicialComplex) -> Result<EdgeFeatures> {
    if c.kappa_max() < 1 {
        return Err(Error::EmptyDimension(1));
    }
    let nodes = node_features(&c.skeleton());
    let mean_eccentricity = c
        .simplices(1)
        .iter()
        .map(|e| (nodes.eccentricity[e[0]] + nodes.eccentricity[e[1]]) as f64 / 2.0)
        .collect();
    let lap = c.hodge_laplacian(1, LaplacianVariant::Combinatorial)?.matrix;
    let one_adjacency = (0..lap.nrows())
        .map(|i| (0..lap.ncols()).filter(|&j| j != i && lap[(i, j)].abs() > 0.5).count())
        .collect();
    Ok(EdgeFeatures { mean_eccentricity, one_adjacency })
}

/// Settings for per-graph topological scattering features.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TopologicalConfig {
    pub kind: DictionaryKind,
    pub variant: LaplacianVariant,
    pub scatter: ScatterConfig,
}

/// Globally pooled scattering features of the node channels (eccentricity,
/// clustering) followed by the edge channels (mean endpoint eccentricity,
/// 1-adjacency count). Scale paths beyond a graph's tree depth and channels
/// on graphs without edges are zero.
pub fn topological_features(g: &Graph, cfg: &TopologicalConfig) -> Result<Vec<f64>> {
    if cfg.scatter.pooling != Pooling::Global {
        return Err(Error::InvalidConfig("topological features use global pooling".into()));
    }
    let c = SimplicialComplex::clique_complex(g, 2);
    let nodes = node_features(g);
    let mut out = Vec::new();
    let node_channels = [nodes.eccentricity.iter().map(|&e| e as f64).collect::<Vec<_>>(), nodes.clustering];
    padded_global(&c, 0, &node_channels, cfg, &mut out)?;
    if c.kappa_max() >= 1 {
        let e = edge_features(&c)?;
        let edge_channels = [e.mean_eccentricity, e.one_adjacency.iter().map(|&a| a as f64).collect()];
        padded_global(&c, 1, &edge_channels, cfg, &mut out)?;
    } else {
        out.extend(std::iter::repeat_n(0.0, 2 * topological_width(&cfg.scatter)));
    }
    Ok(out)
}

/// Length of one channel's block in [`topological_features`].
pub fn topological_width(cfg: &ScatterConfig) -> usize {
    feature_layout(cfg, 1, &vec![1; cfg.j_max + 1]).len()
}

fn padded_global(
    c: &SimplicialComplex,
    kappa: usize,
    channels: &[Vec<f64>],
    cfg: &TopologicalConfig,
    out: &mut Vec<f64>,
) -> Result<()> {
    let width = topological_width(&cfg.scatter);
    if c.count(kappa) == 0 {
        out.extend(std::iter::repeat_n(0.0, channels.len() * width));
        return Ok(());
    }
    let tree = BipartitionTree::build(c, kappa, cfg.variant)?;
    let d = MultiscaleDictionary::build(cfg.kind, c, &tree, cfg.variant)?;
    let j_eff = cfg.scatter.j_max.min(tree.p_max());
    let stack = d.scale_stack(j_eff)?;
    let small = ScatterConfig { j_max: j_eff, ..cfg.scatter };
    let full = feature_layout(&cfg.scatter, 1, &vec![1; cfg.scatter.j_max + 1]);
    for f in channels {
        let s = scatter(&stack, f, &small)?;
        let mut values = s.keys.iter().zip(&s.values);
        let mut next = values.next();
        for key in &full {
            match next {
                Some((k, &v)) if k == key => {
                    out.push(v);
                    next = values.next();
                }
                _ => out.push(0.0),
            }
        }
    }
    Ok(())
}

/// Points in R^3.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    pub points: Vec<[f64; 3]>,
}

impl PointCloud {
    pub fn new(points: Vec<[f64; 3]>) -> Result<Self> {
        if points.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidConfig("point coordinates must be finite".into()));
        }
        Ok(PointCloud { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn distance(&self, a: usize, b: usize) -> f64 {
        dist(&self.points[a], &self.points[b])
    }

    pub fn distance_matrix(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|a| (0..self.len()).map(|b| self.distance(a, b)).collect()).collect()
    }

    /// Pointwise mean of several snapshots of the same points.
    pub fn mean(snapshots: &[PointCloud]) -> Result<PointCloud> {
        let first = snapshots.first().ok_or(Error::EmptyComplex)?;
        let mut points = vec![[0.0; 3]; first.len()];
        for s in snapshots {
            if s.len() != first.len() {
                return Err(Error::LengthMismatch { expected: first.len(), got: s.len() });
            }
            for (acc, p) in points.iter_mut().zip(&s.points) {
                for d in 0..3 {
                    acc[d] += p[d];
                }
            }
        }
        for p in &mut points {
            for x in p.iter_mut() {
                *x /= snapshots.len() as f64;
            }
        }
        Ok(PointCloud { points })
    }
}

fn dist(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Clique complex of the symmetrized k-nearest-neighbour graph. Distance ties
/// go to the smaller index.
pub fn knn_complex(pc: &PointCloud, k: usize, max_dim: usize) -> Result<SimplicialComplex> {
    let n = pc.len();
    if k == 0 || k >= n {
        return Err(Error::InvalidConfig(format!("k = {k} must lie in 1..{n}")));
    }
    let edges: Vec<(usize, usize)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|a| {
            let mut others: Vec<(f64, usize)> = (0..n).filter(|&b| b != a).map(|b| (pc.distance(a, b), b)).collect();
            others.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
            others.into_iter().take(k).map(move |(_, b)| (a, b))
        })
        .collect();
    Ok(SimplicialComplex::clique_complex(&Graph::from_edges(n, &edges), max_dim))
}

/// Area of a triangle from its side lengths (Heron, in the cancellation-safe
/// ordering).
pub fn heron_area(a: f64, b: f64, c: f64) -> f64 {
    let mut s = [a, b, c];
    s.sort_by(|x, y| y.total_cmp(x));
    let [a, b, c] = s;
    let p = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c));
    0.25 * p.max(0.0).sqrt()
}

/// Volume of a tetrahedron from its six squared edge lengths via the
/// Cayley-Menger determinant. `d2[i][j]` is the squared distance.
pub fn cayley_menger_volume(d2: &[[f64; 4]; 4]) -> f64 {
    let mut m = Matrix5::from_element(1.0);
    m[(0, 0)] = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            m[(i + 1, j + 1)] = d2[i][j];
        }
    }
    (m.determinant() / 288.0).max(0.0).sqrt()
}

/// Length, area or volume of every κ-simplex for κ in 1..=3.
pub fn simplex_measures(c: &SimplicialComplex, pc: &PointCloud, kappa: usize) -> Result<Vec<f64>> {
    if c.vertex_count() > pc.len() {
        return Err(Error::LengthMismatch { expected: c.vertex_count(), got: pc.len() });
    }
    let measure = |s: &[usize]| -> f64 {
        match s.len() {
            2 => pc.distance(s[0], s[1]),
            3 => heron_area(pc.distance(s[0], s[1]), pc.distance(s[1], s[2]), pc.distance(s[0], s[2])),
            _ => {
                let mut d2 = [[0.0; 4]; 4];
                for i in 0..4 {
                    for j in 0..4 {
                        d2[i][j] = pc.distance(s[i], s[j]).powi(2);
                    }
                }
                cayley_menger_volume(&d2)
            }
        }
    };
    match kappa {
        1..=3 => Ok(c.simplices(kappa).iter().map(|s| measure(s)).collect()),
        _ => Err(Error::DimensionOutOfRange { kappa, max_dim: 3 }),
    }
}

/// Geometric channels per dimension κ = 0..=min(3, κ_max): distance-matrix
/// columns on vertices, and measure-scaled indicators (columns of the
/// diagonal measure matrix) on edges, triangles and tetrahedra.
pub fn geometric_signals(c: &SimplicialComplex, pc: &PointCloud) -> Result<Vec<SignalSet>> {
    if c.vertex_count() != pc.len() {
        return Err(Error::LengthMismatch { expected: c.vertex_count(), got: pc.len() });
    }
    let top = (c.kappa_max().min(3) + 1) as usize;
    let mut out = Vec::new();
    for kappa in 0..top {
        let n = c.count(kappa);
        let signals = if kappa == 0 {
            let dm = pc.distance_matrix();
            (0..n).map(|i| (0..n).map(|r| dm[r][i]).collect()).collect()
        } else {
            let m = simplex_measures(c, pc, kappa)?;
            (0..n)
                .map(|i| {
                    let mut col = vec![0.0; n];
                    col[i] = m[i];
                    col
                })
                .collect()
        };
        out.push(SignalSet::new(kappa, n, signals)?);
    }
    Ok(out)
}
