//! Dense symmetric eigendecomposition with a deterministic output layout.

use nalgebra::{DMatrix, DVector};

/// Entries below this magnitude are treated as zero when fixing signs.
pub const SIGN_EPS: f64 = 1e-10;

/// Eigenpairs sorted by ascending eigenvalue. Column `i` of `vectors` belongs
/// to `values[i]`.
#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

/// Symmetric eigendecomposition. Eigenpairs are ordered by (eigenvalue,
/// position in the solver output) and every eigenvector has its first
/// non-negligible entry positive.
pub fn sym_eigen(matrix: &DMatrix<f64>) -> EigenPairs {
    let n = matrix.nrows();
    assert_eq!(n, matrix.ncols(), "eigendecomposition of a non-square matrix");
    if n == 0 {
        return EigenPairs { values: vec![], vectors: DMatrix::zeros(0, 0) };
    }
    if n == 1 {
        return EigenPairs { values: vec![matrix[(0, 0)]], vectors: DMatrix::from_element(1, 1, 1.0) };
    }
    let eig = matrix.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));

    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(src).into_owned();
        normalize_sign(col.as_mut_slice());
        vectors.set_column(dst, &col);
    }
    EigenPairs { values, vectors }
}

/// Flip `v` so that its first entry with `|x| > SIGN_EPS` is positive.
pub fn normalize_sign(v: &mut [f64]) {
    if let Some(first) = v.iter().find(|x| x.abs() > SIGN_EPS) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Weighted norm `sqrt(sum_i w_i f_i^2)`.
pub fn weighted_norm(f: &[f64], w: &[f64]) -> f64 {
    f.iter().zip(w).map(|(x, wi)| wi * x * x).sum::<f64>().sqrt()
}

/// Largest absolute entry of `A - A^T`.
pub fn asymmetry(a: &DMatrix<f64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..a.nrows() {
        for j in 0..i {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    worst
}

/// Largest absolute entry of `Q Q^T - I`.
pub fn orthogonality_defect(q: &DMatrix<f64>) -> f64 {
    let g = q * q.transpose();
    let mut worst = 0.0f64;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - target).abs());
        }
    }
    worst
}

/// Re-orthonormalizes `basis` (columns) so that `lead` becomes its first
/// column, provided `lead` lies in the span. Returns `None` otherwise.
pub(crate) fn rotate_to_lead(basis: &DMatrix<f64>, lead: &DVector<f64>) -> Option<DMatrix<f64>> {
    let proj = basis.transpose() * lead;
    if (proj.norm() - lead.norm()).abs() > 1e-8 * lead.norm().max(1.0) {
        return None;
    }
    let (n, d) = basis.shape();
    let mut out: Vec<DVector<f64>> = Vec::with_capacity(d);
    out.push(lead.normalize());
    for c in 0..d {
        if out.len() == d {
            break;
        }
        let mut v = basis.column(c).into_owned();
        // two passes of Gram-Schmidt
        for _ in 0..2 {
            for u in &out {
                let a = u.dot(&v);
                v.axpy(-a, u, 1.0);
            }
        }
        let nv = v.norm();
        if nv > 1e-6 {
            out.push(v / nv);
        }
    }
    if out.len() != d {
        return None;
    }
    let mut m = DMatrix::zeros(n, d);
    for (c, v) in out.into_iter().enumerate() {
        m.set_column(c, &v);
    }
    Some(m)
}
