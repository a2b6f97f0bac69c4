//! Property suite run against a concrete complex: tree structure,
//! orthonormality, tight frame, coefficient decay, m-term approximation,
//! non-expansiveness and permutation invariance.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::complex::{LaplacianVariant, SimplicialComplex};
use crate::dictionary::{verify_decay_bound, verify_m_term, DictionaryKind, MultiscaleDictionary};
use crate::error::Result;
use crate::linalg::{norm2, orthogonality_defect};
use crate::partition::BipartitionTree;
use crate::scattering::{scatter, Pooling, ScatterConfig};

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Pass,
    Fail,
    /// The check's hypothesis does not hold for this input.
    Skip,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub outcome: Outcome,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, ok: bool, detail: String) -> Self {
        Check { name: name.into(), outcome: if ok { Outcome::Pass } else { Outcome::Fail }, detail }
    }
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = match self.outcome {
            Outcome::Pass => "PASS",
            Outcome::Fail => "FAIL",
            Outcome::Skip => "SKIP",
        };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SuiteConfig {
    pub kappa: usize,
    pub variant: LaplacianVariant,
    pub j_max: usize,
    pub samples: usize,
}

fn random_signal<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// True when every basis vector with l >= 1 sums to zero on its region.
pub fn mean_free(d: &MultiscaleDictionary) -> bool {
    (0..=d.p_max()).all(|p| {
        d.level(p).iter().all(|b| {
            (1..b.len()).all(|l| b.vectors.row(l).sum().abs() <= 1e-9 * (b.len() as f64).sqrt())
        })
    })
}

pub fn run_suite<R: Rng>(c: &SimplicialComplex, kinds: &[DictionaryKind], cfg: &SuiteConfig, rng: &mut R) -> Result<Vec<Check>> {
    let tree = BipartitionTree::build(c, cfg.kappa, cfg.variant)?;
    let n = tree.n;
    let mut out = vec![match tree.validate() {
        Ok(()) => Check::new("tree", true, format!("n={n} p_max={}", tree.p_max())),
        Err(e) => Check::new("tree", false, e),
    }];
    let j_max = cfg.j_max.min(tree.p_max());
    for &kind in kinds {
        let d = MultiscaleDictionary::build(kind, c, &tree, cfg.variant)?;
        let defect = (0..=d.p_max()).map(|p| orthogonality_defect(&d.level_matrix(p))).fold(0.0, f64::max);
        out.push(Check::new(format!("{kind} orthonormal levels"), defect <= 1e-10, format!("max |ΦΦᵀ-I| = {defect:.2e}")));

        let stack = d.scale_stack(j_max)?;
        let mut worst = 0.0f64;
        for _ in 0..cfg.samples {
            let f = random_signal(rng, n);
            let energy: f64 = (0..=j_max).map(|j| norm2(&stack.coefficients(j, &f)).powi(2)).sum();
            let expect = (j_max + 1) as f64 * norm2(&f).powi(2);
            worst = worst.max((energy - expect).abs() / expect);
        }
        out.push(Check::new(format!("{kind} tight frame"), worst <= 1e-10, format!("max relative error {worst:.2e} (J={j_max})")));

        if mean_free(&d) {
            let mut violations = 0;
            let mut checked = 0;
            for _ in 0..cfg.samples {
                let f = random_signal(rng, n);
                let alpha = rng.random_range(0.05..=1.0);
                let r = verify_decay_bound(&d, &f, alpha)?;
                violations += r.violations.len();
                checked += r.checked;
            }
            out.push(Check::new(format!("{kind} decay bound"), violations == 0, format!("{violations} violations in {checked} coefficients")));
        } else {
            out.push(Check {
                name: format!("{kind} decay bound"),
                outcome: Outcome::Skip,
                detail: "some basis vectors with l >= 1 are not mean-free on their region".into(),
            });
        }

        let mut violations = 0;
        let mut checked = 0;
        for p in 0..=d.p_max() {
            for _ in 0..cfg.samples {
                let r = verify_m_term(&d, p, &random_signal(rng, n), &[1.0, 1.5], 1e-10)?;
                violations += r.violations.len();
                checked += r.checked;
            }
        }
        out.push(Check::new(format!("{kind} m-term bound"), violations == 0, format!("{violations} violations in {checked} cases")));

        out.push(non_expansive(&stack, j_max, cfg.samples, rng, &format!("{kind} non-expansive"))?);
        out.push(permutation_invariant(&d, j_max, cfg.samples, rng, &format!("{kind} permutation invariance"))?);
    }
    Ok(out)
}

/// Largest ratio, over random pairs and scale paths, of the l2 norm of the
/// pooled feature difference of one path to ‖f1 - f2‖, for q = 1, M = 2,
/// global and per-path local pooling.
pub fn expansion_ratio<R: Rng>(stack: &crate::dictionary::ScaleStack, j_max: usize, samples: usize, rng: &mut R) -> Result<f64> {
    let mut worst = 0.0f64;
    for pooling in [Pooling::Global, Pooling::Local { scale: None }] {
        let cfg = ScatterConfig::new(j_max, 2, 1, pooling);
        for _ in 0..samples {
            let f1 = random_signal(rng, stack.n);
            let f2 = random_signal(rng, stack.n);
            let a = scatter(stack, &f1, &cfg)?;
            let b = scatter(stack, &f2, &cfg)?;
            let diff: Vec<f64> = f1.iter().zip(&f2).map(|(x, y)| x - y).collect();
            let dn = norm2(&diff);
            let mut groups: std::collections::BTreeMap<&[usize], f64> = std::collections::BTreeMap::new();
            for (k, (x, y)) in a.keys.iter().zip(a.values.iter().zip(&b.values)) {
                *groups.entry(&k.path).or_default() += (x - y).powi(2);
            }
            for (_, s) in groups {
                worst = worst.max((s.sqrt() - 1e-12) / dn);
            }
        }
    }
    Ok(worst)
}

fn non_expansive<R: Rng>(stack: &crate::dictionary::ScaleStack, j_max: usize, samples: usize, rng: &mut R, name: &str) -> Result<Check> {
    let worst = expansion_ratio(stack, j_max, samples, rng)?;
    Ok(Check::new(name, worst <= 1.0, format!("max per-path ratio {worst:.4}")))
}

fn permutation_invariant<R: Rng>(d: &MultiscaleDictionary, j_max: usize, samples: usize, rng: &mut R, name: &str) -> Result<Check> {
    let n = d.n;
    let stack = d.scale_stack(j_max)?;
    let global = ScatterConfig::new(j_max, 2, 3, Pooling::Global);
    let none = ScatterConfig::new(j_max, 2, 3, Pooling::None);
    let mut worst = 0.0f64;
    for _ in 0..samples.max(1) {
        let mut xi: Vec<usize> = (0..n).collect();
        xi.shuffle(rng);
        let pd = d.permuted(&xi);
        let ps = pd.scale_stack(j_max)?;
        let f = random_signal(rng, n);
        let mut g = vec![0.0; n];
        for s in 0..n {
            g[xi[s]] = f[s];
        }
        let a = scatter(&stack, &f, &global)?;
        let b = scatter(&ps, &g, &global)?;
        worst = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).fold(worst, f64::max);
        let a = scatter(&stack, &f, &none)?;
        let b = scatter(&ps, &g, &none)?;
        for (i, k) in a.keys.iter().enumerate() {
            let block = i - k.k;
            worst = worst.max((a.values[i] - b.values[block + xi[k.k]]).abs());
        }
    }
    Ok(Check::new(name, worst <= 1e-9, format!("max deviation {worst:.2e}")))
}
