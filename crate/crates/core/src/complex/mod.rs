//! Oriented simplicial complexes, boundary operators and Hodge Laplacians.
//!
//! Every simplex is stored as a strictly increasing vertex tuple in natural
//! orientation. Simplices of each dimension are kept in lexicographic order,
//! and that order is the coordinate order of every signal, boundary matrix
//! and Laplacian built from the complex.

pub mod io;
mod laplacian;

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::graph::Graph;

pub use laplacian::{HodgeLaplacian, LaplacianVariant, Restriction, WeightMatrices};

pub type Simplex = Vec<usize>;

/// Relation between two simplices of the same dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Adjacency {
    /// Share a face and their hull belongs to the complex.
    Strong,
    /// Share a face but the hull is missing.
    KappaAdjacent,
    None,
}

impl Adjacency {
    /// Weak adjacency: any shared face.
    pub fn is_weak(self) -> bool {
        !matches!(self, Adjacency::None)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimplicialComplex {
    vertex_count: usize,
    simplices: Vec<Vec<Simplex>>,
    index: Vec<HashMap<Simplex, usize>>,
    // faces[k][i][l]: the face of simplex i in C_k obtained by deleting its
    // (l+1)-th smallest vertex. Empty for k = 0.
    faces: Vec<Vec<Vec<usize>>>,
    cofaces: Vec<Vec<Vec<usize>>>,
}

impl SimplicialComplex {
    /// Closure of `simplices`, truncated to dimension `max_dim`.
    pub fn from_simplices(max_dim: usize, simplices: &[Vec<usize>]) -> Result<Self> {
        let mut levels: Vec<BTreeSet<Simplex>> = vec![BTreeSet::new(); max_dim + 1];
        let mut vertex_count = 0;
        for raw in simplices {
            let mut s = raw.clone();
            s.sort_unstable();
            if s.is_empty() || s.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::MalformedSimplex(raw.clone()));
            }
            vertex_count = vertex_count.max(s[s.len() - 1] + 1);
            let width = s.len().min(max_dim + 1);
            for size in 1..=width {
                for_each_subset(&s, size, |sub| {
                    levels[size - 1].insert(sub.to_vec());
                });
            }
        }
        Ok(Self::from_levels(vertex_count, levels))
    }

    /// Clique complex of `graph`: every (k+1)-clique is a k-simplex, for
    /// k up to `max_dim`. Isolated vertices appear in C_0.
    pub fn clique_complex(graph: &Graph, max_dim: usize) -> Self {
        let n = graph.vertex_count();
        let mut levels: Vec<BTreeSet<Simplex>> = Vec::with_capacity(max_dim + 1);
        levels.push((0..n).map(|v| vec![v]).collect());
        for k in 1..=max_dim {
            let mut next = BTreeSet::new();
            for s in &levels[k - 1] {
                let last = s[s.len() - 1];
                for &c in graph.neighbors(last).iter().filter(|&&c| c > last) {
                    if s.iter().all(|&v| graph.has_edge(v, c)) {
                        let mut t = s.clone();
                        t.push(c);
                        next.insert(t);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            levels.push(next);
        }
        Self::from_levels(n, levels)
    }

    fn from_levels(vertex_count: usize, mut levels: Vec<BTreeSet<Simplex>>) -> Self {
        while levels.last().is_some_and(BTreeSet::is_empty) {
            levels.pop();
        }
        let simplices: Vec<Vec<Simplex>> = levels.into_iter().map(|l| l.into_iter().collect()).collect();
        let index: Vec<HashMap<Simplex, usize>> = simplices
            .iter()
            .map(|list| list.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect())
            .collect();
        let mut faces = vec![Vec::new(); simplices.len()];
        let mut cofaces: Vec<Vec<Vec<usize>>> = simplices.iter().map(|l| vec![Vec::new(); l.len()]).collect();
        for k in 1..simplices.len() {
            faces[k] = simplices[k]
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    (0..s.len())
                        .map(|drop| {
                            let face: Simplex = s.iter().enumerate().filter(|&(p, _)| p != drop).map(|(_, &v)| v).collect();
                            let f = index[k - 1][&face];
                            cofaces[k - 1][f].push(i);
                            f
                        })
                        .collect()
                })
                .collect();
        }
        SimplicialComplex { vertex_count, simplices, index, faces, cofaces }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    /// Largest dimension with a simplex, or -1 for the empty complex.
    pub fn kappa_max(&self) -> isize {
        self.simplices.len() as isize - 1
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    /// |C_k|, zero above the top dimension.
    pub fn count(&self, kappa: usize) -> usize {
        self.simplices.get(kappa).map_or(0, Vec::len)
    }

    pub fn counts(&self) -> Vec<usize> {
        self.simplices.iter().map(Vec::len).collect()
    }

    pub fn simplices(&self, kappa: usize) -> &[Simplex] {
        self.simplices.get(kappa).map_or(&[], Vec::as_slice)
    }

    pub fn simplex(&self, kappa: usize, i: usize) -> &[usize] {
        &self.simplices[kappa][i]
    }

    /// Index of a simplex (any vertex order) within its dimension.
    pub fn index_of(&self, vertices: &[usize]) -> Option<usize> {
        let mut s = vertices.to_vec();
        s.sort_unstable();
        let k = s.len().checked_sub(1)?;
        self.index.get(k)?.get(&s).copied()
    }

    pub fn contains(&self, vertices: &[usize]) -> bool {
        self.index_of(vertices).is_some()
    }

    /// Faces of simplex `i` in C_k, ordered by the position of the deleted vertex.
    pub fn faces(&self, kappa: usize, i: usize) -> &[usize] {
        &self.faces[kappa][i]
    }

    /// Cofaces of simplex `i` in C_k, ascending.
    pub fn cofaces(&self, kappa: usize, i: usize) -> &[usize] {
        self.cofaces.get(kappa).map_or(&[], |c| c[i].as_slice())
    }

    /// 1-skeleton as a graph on `0..vertex_count`.
    pub fn skeleton(&self) -> Graph {
        let edges: Vec<(usize, usize)> = self.simplices(1).iter().map(|e| (e[0], e[1])).collect();
        Graph::from_edges(self.vertex_count, &edges)
    }

    /// Adjacency relation between two distinct simplices of the same
    /// dimension k >= 1.
    pub fn adjacency(&self, sigma: &[usize], tau: &[usize]) -> Result<Adjacency> {
        if sigma.len() != tau.len() {
            return Err(Error::DimensionMismatch(format!(
                "{}-simplex vs {}-simplex",
                sigma.len() as isize - 1,
                tau.len() as isize - 1
            )));
        }
        if sigma.len() < 2 {
            return Err(Error::DimensionMismatch("adjacency requires dimension >= 1".into()));
        }
        for s in [sigma, tau] {
            if !self.contains(s) {
                return Err(Error::InvalidConfig(format!("simplex {s:?} is not in the complex")));
            }
        }
        let a: BTreeSet<usize> = sigma.iter().copied().collect();
        let b: BTreeSet<usize> = tau.iter().copied().collect();
        if a == b {
            return Err(Error::InvalidConfig("adjacency of a simplex with itself".into()));
        }
        if a.intersection(&b).count() + 1 != sigma.len() {
            return Ok(Adjacency::None);
        }
        let hull: Vec<usize> = a.union(&b).copied().collect();
        Ok(if self.contains(&hull) { Adjacency::Strong } else { Adjacency::KappaAdjacent })
    }

    /// Signed incidence matrix B_k from C_{k+1} to C_k, for 0 <= k < kappa_max.
    pub fn boundary_matrix(&self, kappa: usize) -> Result<BoundaryMatrix> {
        if kappa as isize >= self.kappa_max() {
            return Err(Error::DimensionOutOfRange { kappa, max_dim: self.kappa_max() });
        }
        let columns = self.faces[kappa + 1]
            .iter()
            .map(|fs| fs.iter().enumerate().map(|(l, &f)| (f, natural_parity(l))).collect())
            .collect();
        Ok(BoundaryMatrix { kappa, rows: self.count(kappa), columns })
    }

    /// Connected components of `region` (indices into C_k). Two k-simplices
    /// are connected when they share a face (k >= 1) or an edge (k = 0).
    /// Components are returned in order of their smallest member.
    pub fn region_components(&self, kappa: usize, region: &[usize]) -> Vec<Vec<usize>> {
        let local: HashMap<usize, usize> = region.iter().enumerate().map(|(p, &s)| (s, p)).collect();
        let mut parent: Vec<usize> = (0..region.len()).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        let mut union = |a: usize, b: usize| {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        };
        if kappa == 0 {
            for (p, &v) in region.iter().enumerate() {
                for &e in self.cofaces(0, v) {
                    let other = self.faces[1][e].iter().copied().find(|&u| u != v).unwrap();
                    if let Some(&q) = local.get(&other) {
                        union(p, q);
                    }
                }
            }
        } else {
            let mut by_face: HashMap<usize, usize> = HashMap::new();
            for (p, &s) in region.iter().enumerate() {
                for &f in &self.faces[kappa][s] {
                    match by_face.get(&f) {
                        Some(&q) => union(p, q),
                        None => {
                            by_face.insert(f, p);
                        }
                    }
                }
            }
        }
        let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
        for (p, &s) in region.iter().enumerate() {
            let r = find(&mut parent, p);
            groups.entry(r).or_default().push(s);
        }
        let mut out: Vec<Vec<usize>> = groups.into_values().collect();
        for g in &mut out {
            g.sort_unstable();
        }
        out.sort_by_key(|g| g[0]);
        out
    }
}

/// nat(sigma, alpha) = (-1)^(l*+1) where l* is the 1-based position of the
/// deleted vertex; `pos` is 0-based.
fn natural_parity(pos: usize) -> i8 {
    if pos.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

fn for_each_subset(items: &[usize], size: usize, mut f: impl FnMut(&[usize])) {
    fn rec(items: &[usize], size: usize, start: usize, buf: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if buf.len() == size {
            f(buf);
            return;
        }
        for i in start..items.len() {
            if items.len() - i < size - buf.len() {
                break;
            }
            buf.push(items[i]);
            rec(items, size, i + 1, buf, f);
            buf.pop();
        }
    }
    rec(items, size, 0, &mut Vec::with_capacity(size), &mut f);
}

/// Sparse signed boundary matrix, stored by column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryMatrix {
    pub kappa: usize,
    pub rows: usize,
    /// One entry list per (k+1)-simplex: `(row, sign)`.
    pub columns: Vec<Vec<(usize, i8)>>,
}

impl BoundaryMatrix {
    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    pub fn get(&self, row: usize, col: usize) -> i8 {
        self.columns[col].iter().find(|&&(r, _)| r == row).map_or(0, |&(_, s)| s)
    }

    pub fn to_dense(&self) -> Vec<Vec<i64>> {
        let mut m = vec![vec![0i64; self.cols()]; self.rows];
        for (c, col) in self.columns.iter().enumerate() {
            for &(r, s) in col {
                m[r][c] = s as i64;
            }
        }
        m
    }

    /// Exact integer product `self * rhs`.
    pub fn compose(&self, rhs: &BoundaryMatrix) -> Result<Vec<Vec<i64>>> {
        if self.cols() != rhs.rows {
            return Err(Error::DimensionMismatch(format!("{}x{} * {}x{}", self.rows, self.cols(), rhs.rows, rhs.cols())));
        }
        let mut out = vec![vec![0i64; rhs.cols()]; self.rows];
        for (c, col) in rhs.columns.iter().enumerate() {
            for &(mid, s) in col {
                for &(r, t) in &self.columns[mid] {
                    out[r][c] += (s as i64) * (t as i64);
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// Two triangles {v1,v2,v3}, {v2,v3,v4} glued along {v2,v3} (0-based).
    pub(crate) fn two_triangles() -> SimplicialComplex {
        SimplicialComplex::from_simplices(2, &[vec![0, 1, 2], vec![1, 2, 3]]).unwrap()
    }

    #[test]
    fn closure_of_one_triangle() {
        let c = SimplicialComplex::from_simplices(2, &[vec![2, 0, 1]]).unwrap();
        assert_eq!(c.counts(), vec![3, 3, 1]);
    }

    #[test]
    fn two_triangle_counts() {
        let c = two_triangles();
        assert_eq!(c.counts(), vec![4, 5, 2]);
        assert_eq!(c.simplices(1), &[vec![0, 1], vec![0, 2], vec![1, 2], vec![1, 3], vec![2, 3]]);
        assert_eq!(c.kappa_max(), 2);
    }

    #[test]
    fn empty_input() {
        let c = SimplicialComplex::from_simplices(3, &[]).unwrap();
        assert!(c.is_empty());
        assert_eq!(c.kappa_max(), -1);
    }

    #[test]
    fn repeated_vertex_rejected() {
        let err = SimplicialComplex::from_simplices(2, &[vec![1, 1, 2]]).unwrap_err();
        assert!(matches!(err, Error::MalformedSimplex(_)));
    }

    #[test]
    fn truncation_to_max_dim() {
        let c = SimplicialComplex::from_simplices(1, &[vec![0, 1, 2, 3]]).unwrap();
        assert_eq!(c.counts(), vec![4, 6]);
    }

    #[test]
    fn clique_complexes() {
        let cycle = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        assert_eq!(SimplicialComplex::clique_complex(&cycle, 2).counts(), vec![4, 4]);

        let k4: Vec<(usize, usize)> = (0..4).flat_map(|a| (a + 1..4).map(move |b| (a, b))).collect();
        let g = Graph::from_edges(4, &k4);
        assert_eq!(SimplicialComplex::clique_complex(&g, 3).counts(), vec![4, 6, 4, 1]);

        let fig = Graph::from_edges(4, &[(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)]);
        assert_eq!(SimplicialComplex::clique_complex(&fig, 2), two_triangles());
    }

    #[test]
    fn isolated_vertices_kept() {
        let g = Graph::from_edges(5, &[(0, 1)]);
        let c = SimplicialComplex::clique_complex(&g, 2);
        assert_eq!(c.counts(), vec![5, 1]);
    }

    #[test]
    fn adjacency_relations() {
        let c = two_triangles();
        let e = |i: usize| c.simplex(1, i).to_vec();
        assert_eq!(c.adjacency(&e(0), &e(1)).unwrap(), Adjacency::Strong);
        assert_eq!(c.adjacency(&e(0), &e(3)).unwrap(), Adjacency::KappaAdjacent);
        assert_eq!(c.adjacency(&e(0), &e(4)).unwrap(), Adjacency::None);
        assert_eq!(c.adjacency(&[0, 1, 2], &[1, 2, 3]).unwrap(), Adjacency::KappaAdjacent);
        assert!(c.adjacency(&[0, 1], &[0, 1, 2]).is_err());
        assert!(c.adjacency(&[0], &[1]).is_err());
    }

    #[test]
    fn boundary_columns() {
        let c = two_triangles();
        let b1 = c.boundary_matrix(1).unwrap();
        // t1 = {v1,v2,v3}: +e1, -e2, +e3
        let col: Vec<i8> = (0..5).map(|r| b1.get(r, 0)).collect();
        assert_eq!(col, vec![1, -1, 1, 0, 0]);
        let b0 = c.boundary_matrix(0).unwrap();
        assert_eq!((0..4).map(|r| b0.get(r, 0)).collect::<Vec<_>>(), vec![-1, 1, 0, 0]);
        let prod = b0.compose(&b1).unwrap();
        assert!(prod.iter().flatten().all(|&x| x == 0));
        assert!(c.boundary_matrix(2).is_err());
    }

    #[test]
    fn components_by_shared_face() {
        let c = SimplicialComplex::from_simplices(1, &[vec![0, 1], vec![1, 2], vec![3, 4]]).unwrap();
        assert_eq!(c.region_components(1, &[0, 1, 2]), vec![vec![0, 1], vec![2]]);
        assert_eq!(c.region_components(0, &[0, 1, 3, 4]), vec![vec![0, 1], vec![3, 4]]);
        assert_eq!(c.region_components(0, &[0, 2]), vec![vec![0], vec![2]]);
    }
}
