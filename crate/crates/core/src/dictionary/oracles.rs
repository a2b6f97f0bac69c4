//! Checks of the coefficient decay and m-term approximation bounds.

use nalgebra::{DMatrix, DVector};

use super::MultiscaleDictionary;
use crate::error::{Error, Result};
use crate::partition::BipartitionTree;

/// Hölder seminorm C_H(f) = max_{σ≠τ} |f_σ − f_τ| / d(σ,τ)^α, where d is
/// the size of the smallest tree region holding both simplices.
///
/// Evaluated region by region: the worst pair whose smallest common region
/// is R is bounded by the value range on R, and that range is attained by a
/// pair at distance at most |R|.
pub fn holder_seminorm(tree: &BipartitionTree, f: &[f64], alpha: f64) -> Result<f64> {
    if f.len() != tree.n {
        return Err(Error::LengthMismatch { expected: tree.n, got: f.len() });
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidConfig(format!("Hölder exponent {alpha} outside (0, 1]")));
    }
    let mut best = 0.0f64;
    for regions in tree.levels() {
        for r in regions.iter().filter(|r| r.size() > 1) {
            let (lo, hi) = r.members.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &s| (lo.min(f[s]), hi.max(f[s])));
            best = best.max((hi - lo) / (r.size() as f64).powf(alpha));
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayViolation {
    pub p: usize,
    pub k: usize,
    pub l: usize,
    pub coefficient: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    pub holder: f64,
    pub checked: usize,
    /// Smallest `bound - |coefficient|` over all checked coefficients.
    pub min_slack: f64,
    pub violations: Vec<DecayViolation>,
}

/// Checks |coef(p,k,l)| <= C_H(f) (n^p_k)^(α + 1/2) for every l >= 1.
pub fn verify_decay_bound(d: &MultiscaleDictionary, f: &[f64], alpha: f64) -> Result<DecayReport> {
    let holder = holder_seminorm(d.tree(), f, alpha)?;
    let coef = d.analyze(f)?;
    let mut report = DecayReport { holder, checked: 0, min_slack: f64::INFINITY, violations: Vec::new() };
    for (p, regions) in coef.levels.iter().enumerate() {
        for (k, cs) in regions.iter().enumerate() {
            let bound = holder * (cs.len() as f64).powf(alpha + 0.5);
            for (l, &c) in cs.iter().enumerate().skip(1) {
                report.checked += 1;
                let slack = bound - c.abs();
                report.min_slack = report.min_slack.min(slack);
                // relative rounding allowance for coefficients that vanish in exact arithmetic
                if slack < -1e-12 * bound.max(1.0) {
                    report.violations.push(DecayViolation { p, k, l, coefficient: c, bound });
                }
            }
        }
    }
    Ok(report)
}

/// Best m-term approximation of `f` in the orthonormal basis given by the
/// rows of `basis`: keeps the m largest coefficients (ties by row index).
/// Returns the approximation and its l2 error.
pub fn best_m_term(basis: &DMatrix<f64>, f: &[f64], m: usize) -> Result<(Vec<f64>, f64)> {
    let n = basis.ncols();
    if f.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: f.len() });
    }
    if m == 0 || m > basis.nrows() {
        return Err(Error::InvalidConfig(format!("m = {m} outside 1..={}", basis.nrows())));
    }
    let fv = DVector::from_column_slice(f);
    let coef = basis * &fv;
    let mut order: Vec<usize> = (0..coef.len()).collect();
    order.sort_by(|&a, &b| coef[b].abs().total_cmp(&coef[a].abs()).then(a.cmp(&b)));
    let mut approx = DVector::zeros(n);
    for &r in &order[..m] {
        approx += basis.row(r).transpose() * coef[r];
    }
    let err = (&fv - &approx).norm();
    Ok((approx.iter().copied().collect(), err))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MTermViolation {
    pub rho: f64,
    pub m: usize,
    pub error: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MTermReport {
    pub checked: usize,
    pub violations: Vec<MTermViolation>,
}

/// Checks ‖f − P_m f‖ <= |f|_ρ / m^β, β = 1/ρ − 1/2, for all m and every ρ
/// in `rhos`, in the orthonormal basis of dictionary level `p`.
pub fn verify_m_term(d: &MultiscaleDictionary, p: usize, f: &[f64], rhos: &[f64], tol: f64) -> Result<MTermReport> {
    let basis = d.level_matrix(p);
    let coef = &basis * DVector::from_column_slice(f);
    let mut report = MTermReport { checked: 0, violations: Vec::new() };
    for &rho in rhos {
        if !(rho > 0.0 && rho < 2.0) {
            return Err(Error::InvalidConfig(format!("rho {rho} outside (0, 2)")));
        }
        let beta = 1.0 / rho - 0.5;
        let quasi = coef.iter().map(|c| c.abs().powf(rho)).sum::<f64>().powf(1.0 / rho);
        for m in 1..=d.n {
            let (_, error) = best_m_term(&basis, f, m)?;
            let bound = quasi / (m as f64).powf(beta);
            report.checked += 1;
            if error > bound + tol {
                report.violations.push(MTermViolation { rho, m, error, bound });
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{LaplacianVariant, SimplicialComplex};

    fn path_tree(n: usize) -> (SimplicialComplex, BipartitionTree) {
        let edges: Vec<Vec<usize>> = (0..n - 1).map(|i| vec![i, i + 1]).collect();
        let c = SimplicialComplex::from_simplices(1, &edges).unwrap();
        let t = BipartitionTree::build(&c, 0, LaplacianVariant::Combinatorial).unwrap();
        (c, t)
    }

    /// Exhaustive pair scan.
    fn holder_brute(t: &BipartitionTree, f: &[f64], alpha: f64) -> f64 {
        let mut best = 0.0f64;
        for s in 0..f.len() {
            for u in s + 1..f.len() {
                best = best.max((f[s] - f[u]).abs() / (t.distance(s, u) as f64).powf(alpha));
            }
        }
        best
    }

    #[test]
    fn holder_constant_is_zero() {
        let (_, t) = path_tree(5);
        assert_eq!(holder_seminorm(&t, &[2.0; 5], 0.5).unwrap(), 0.0);
    }

    #[test]
    fn holder_matches_pair_scan_on_eight_points() {
        let (_, t) = path_tree(8);
        let f = [0.3, -1.2, 0.8, 0.05, 2.2, -0.7, 1.1, 0.4];
        for alpha in [0.25, 0.5, 1.0] {
            let fast = holder_seminorm(&t, &f, alpha).unwrap();
            assert!((fast - holder_brute(&t, &f, alpha)).abs() < 1e-14);
        }
        assert_eq!(t.distance(0, 1), 2);
        assert!(holder_seminorm(&t, &f, 0.0).is_err());
    }

    #[test]
    fn decay_constant_signal_ghwt() {
        let (_, t) = path_tree(6);
        let d = MultiscaleDictionary::ghwt(&t);
        let r = verify_decay_bound(&d, &[1.5; 6], 0.7).unwrap();
        assert!(r.violations.is_empty());
        let coef = d.analyze(&[1.5; 6]).unwrap();
        assert!(coef.levels.iter().flatten().flat_map(|c| c.iter().skip(1)).all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn decay_spike() {
        let (c, t) = path_tree(8);
        let mut f = vec![0.0; 8];
        f[3] = 1.0;
        for d in [MultiscaleDictionary::ghwt(&t), MultiscaleDictionary::hglet(&c, &t, LaplacianVariant::Combinatorial).unwrap()] {
            let r = verify_decay_bound(&d, &f, 1.0).unwrap();
            assert!(r.violations.is_empty(), "{:?}", r.violations);
            assert!((r.holder - holder_brute(&t, &f, 1.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn m_term_edge_cases() {
        let (_, t) = path_tree(6);
        let d = MultiscaleDictionary::ghwt(&t);
        let basis = d.level_matrix(1);
        let f = [0.1, 0.4, -0.3, 0.9, 0.0, 1.0];
        let (_, err) = best_m_term(&basis, &f, 6).unwrap();
        assert!(err < 1e-12);
        let v: Vec<f64> = d.vector(1, 0, 1).iter().copied().collect();
        let (_, err) = best_m_term(&basis, &v, 1).unwrap();
        assert!(err < 1e-12);
        assert!(best_m_term(&basis, &f, 0).is_err());
        let r = verify_m_term(&d, 0, &f, &[1.0, 1.5], 1e-10).unwrap();
        assert!(r.violations.is_empty());
        assert_eq!(r.checked, 12);
    }
}
