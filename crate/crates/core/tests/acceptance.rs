//! Acceptance suite: one PASS/FAIL line per criterion. Oracles here are
//! computed independently of the library wherever that is practical.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use hodge_scatter::complex::{Adjacency, LaplacianVariant, SimplicialComplex};
use hodge_scatter::dictionary::{DictionaryKind, MultiscaleDictionary};
use hodge_scatter::learn::{self, kfold_evaluate, ModelSpec, Target};
use hodge_scatter::partition::BipartitionTree;
use hodge_scatter::scattering::{feature_count, scatter, scatter_batch, Pooling, ScatterConfig};
use hodge_scatter::synth::{localized_signals, random_clique_complex};
use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn uniform(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Random clique complex with at least `min` κ-simplices.
fn complex_with(rng: &mut ChaCha8Rng, kappa: usize, min: usize, n: std::ops::RangeInclusive<usize>) -> SimplicialComplex {
    loop {
        let nv = rng.random_range(n.clone());
        let p = rng.random_range(0.3..0.7);
        let c = random_clique_complex(rng, nv, p, kappa + 1);
        if c.kappa_max() >= kappa as isize && c.count(kappa) >= min {
            return c;
        }
    }
}

fn variant(i: usize) -> LaplacianVariant {
    if i.is_multiple_of(2) {
        LaplacianVariant::Combinatorial
    } else {
        LaplacianVariant::Normalized
    }
}

/// Dense boundary B_k (rows C_k, columns C_{k+1}) from the sign rule: the
/// face missing the l-th smallest vertex (l from 0) gets (-1)^l.
fn dense_boundary(c: &SimplicialComplex, k: usize) -> Vec<Vec<i64>> {
    let rows = c.simplices(k);
    let pos: BTreeMap<&[usize], usize> = rows.iter().enumerate().map(|(i, s)| (s.as_slice(), i)).collect();
    let cols = c.simplices(k + 1);
    let mut b = vec![vec![0i64; cols.len()]; rows.len()];
    for (j, s) in cols.iter().enumerate() {
        for l in 0..s.len() {
            let face: Vec<usize> = s.iter().enumerate().filter(|&(i, _)| i != l).map(|(_, &v)| v).collect();
            b[pos[face.as_slice()]][j] = if l % 2 == 0 { 1 } else { -1 };
        }
    }
    b
}

fn matmul(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter().map(|r| (0..cols).map(|j| (0..inner).map(|t| r[t] * b[t][j]).sum()).collect()).collect()
}

fn c1_boundary_squared() -> Outcome {
    let start = Instant::now();
    let mut r = rng(1);
    let mut products = 0;
    for _ in 0..100 {
        let nv = r.random_range(6..=12);
        let p = r.random_range(0.4..0.9);
        let c = random_clique_complex(&mut r, nv, p, 4);
        for kappa in 1..=3usize {
            if (kappa as isize) + 1 > c.kappa_max() {
                break;
            }
            let lo = c.boundary_matrix(kappa - 1).map_err(|e| e.to_string())?;
            let hi = c.boundary_matrix(kappa).map_err(|e| e.to_string())?;
            if lo.to_dense() != dense_boundary(&c, kappa - 1) || hi.to_dense() != dense_boundary(&c, kappa) {
                return Err(format!("boundary matrix differs from the sign rule at κ={kappa}"));
            }
            let prod = lo.compose(&hi).map_err(|e| e.to_string())?;
            if prod.iter().flatten().any(|&v| v != 0) || matmul(&lo.to_dense(), &hi.to_dense()) != prod {
                return Err(format!("B_{}B_{} is not zero", kappa - 1, kappa));
            }
            products += 1;
        }
    }
    let t = start.elapsed();
    if t > Duration::from_secs(10) {
        return Err(format!("took {t:.2?}"));
    }
    Ok(format!("{products} products exactly zero in {t:.2?}"))
}

fn c2_figure_one() -> Outcome {
    let c = SimplicialComplex::from_simplices(2, &[vec![0, 1, 2], vec![1, 2, 3]]).map_err(|e| e.to_string())?;
    if c.counts() != vec![4, 5, 2] {
        return Err(format!("counts {:?}", c.counts()));
    }
    let e = |i: usize| c.simplex(1, i).to_vec();
    let t = |i: usize| c.simplex(2, i).to_vec();
    let adj = |a: &[usize], b: &[usize]| c.adjacency(a, b).unwrap();
    // e1..e5 = {v1v2, v1v3, v2v3, v2v4, v3v4}
    let relations = [
        (adj(&e(0), &e(3)).is_weak(), "e1 ~ e4"),
        (adj(&e(0), &e(1)).is_weak(), "e1 ~ e2"),
        (adj(&e(0), &e(1)) == Adjacency::Strong, "e1 ≃ e2"),
        (adj(&e(0), &e(3)) == Adjacency::KappaAdjacent, "e1 1-adjacent e4"),
        (adj(&t(0), &t(1)).is_weak(), "t1 ~ t2"),
        (adj(&t(0), &t(1)) == Adjacency::KappaAdjacent, "t1 2-adjacent t2"),
        (adj(&e(0), &e(4)) == Adjacency::None, "e1 and e5 not adjacent"),
    ];
    if let Some((_, name)) = relations.iter().find(|(ok, _)| !ok) {
        return Err(format!("relation {name} fails"));
    }
    let b0 = vec![
        vec![-1, -1, 0, 0, 0],
        vec![1, 0, -1, -1, 0],
        vec![0, 1, 1, 0, -1],
        vec![0, 0, 0, 1, 1],
    ];
    let b1 = vec![vec![1, 0], vec![-1, 0], vec![1, 1], vec![0, -1], vec![0, 1]];
    if c.boundary_matrix(0).unwrap().to_dense() != b0 || c.boundary_matrix(1).unwrap().to_dense() != b1 {
        return Err("B0 or B1 differs from the hand-derived matrix".into());
    }
    let l1 = c.hodge_laplacian(1, LaplacianVariant::Combinatorial).map_err(|e| e.to_string())?;
    let diag: Vec<f64> = (0..5).map(|i| l1.matrix[(i, i)]).collect();
    if diag != [3.0, 3.0, 4.0, 3.0, 3.0] {
        return Err(format!("L1 diagonal {diag:?}"));
    }
    Ok("7 adjacency relations, B0, B1 and diag(L1) = (3,3,4,3,3) exact".into())
}

fn c3_orthonormal_bases() -> Outcome {
    let mut r = rng(3);
    let mut worst = 0.0f64;
    let mut levels = 0;
    for kappa in 0..=2 {
        for i in 0..50 {
            let c = complex_with(&mut r, kappa, 4, 7..=12);
            let v = variant(i);
            let tree = BipartitionTree::build(&c, kappa, v).map_err(|e| e.to_string())?;
            let h = MultiscaleDictionary::hglet(&c, &tree, v).map_err(|e| e.to_string())?;
            let g = MultiscaleDictionary::ghwt(&tree);
            for p in 0..=tree.p_max() {
                for d in [&h, &g] {
                    let m = d.level_matrix(p);
                    let defect = (&m * m.transpose() - DMatrix::identity(tree.n, tree.n)).abs().max();
                    worst = worst.max(defect);
                    for (k, b) in d.level(p).iter().enumerate() {
                        for l in 0..b.len() {
                            let v = d.vector(p, k, l);
                            if (0..tree.n).any(|s| v[s] != 0.0 && !b.members.contains(&s)) {
                                return Err(format!("{} vector ({p},{k},{l}) leaks outside its region (κ={kappa})", d.kind));
                            }
                        }
                        if b.members != tree.regions_at(p)[k].members {
                            return Err(format!("{} region ({p},{k}) differs from the tree region", d.kind));
                        }
                    }
                }
                for (a, b) in h.level(p).iter().zip(g.level(p)) {
                    if a.members != b.members {
                        return Err(format!("HGLET and GHWT supports differ at level {p}"));
                    }
                }
                for region in tree.regions_at(p) {
                    if let Some(parent) = region.parent {
                        let up = &tree.regions_at(p - 1)[parent].members;
                        if !region.members.iter().all(|s| up.contains(s)) {
                            return Err(format!("region ({p},{}) not inside its parent", region.index));
                        }
                    }
                }
                levels += 1;
            }
        }
    }
    if worst > 1e-10 {
        return Err(format!("max |ΦΦᵀ - I| = {worst:.2e}"));
    }
    Ok(format!("{levels} levels x 2 dictionaries, max |ΦΦᵀ - I| = {worst:.1e}, supports contained and equal"))
}

fn c4_tight_frame() -> Outcome {
    let mut r = rng(4);
    let mut worst = 0.0f64;
    for i in 0..10 {
        let kappa = i % 3;
        let c = complex_with(&mut r, kappa, 8, 8..=14);
        let tree = BipartitionTree::build(&c, kappa, variant(i)).map_err(|e| e.to_string())?;
        let kind = if i % 2 == 0 { DictionaryKind::Hglet } else { DictionaryKind::Ghwt };
        let d = MultiscaleDictionary::build(kind, &c, &tree, variant(i)).map_err(|e| e.to_string())?;
        let j_max = tree.p_max();
        let stack = d.scale_stack(j_max).map_err(|e| e.to_string())?;
        let mats: Vec<DMatrix<f64>> = (0..=j_max).map(|j| stack.matrix(j)).collect();
        for _ in 0..10 {
            let f = DVector::from_vec(uniform(&mut r, tree.n));
            let energy: f64 = mats.iter().map(|m| (m * &f).norm_squared()).sum();
            let expect = (j_max + 1) as f64 * f.norm_squared();
            worst = worst.max((energy - expect).abs() / expect);
        }
    }
    if worst > 1e-10 {
        return Err(format!("max relative error {worst:.2e}"));
    }
    Ok(format!("100 signals, max relative error {worst:.1e}"))
}

/// Largest excess of ‖Sf₁ − Sf₂‖ over ‖f₁ − f₂‖ (q = 1, M = 2). Global
/// pooling is measured on the whole feature vector and on each order; local
/// pooling on each scale path, the block the theorem bounds for a pooling
/// scale. The whole local vector is reported but not bounded: with f₂ = 0
/// the finest path alone already reaches ‖f₁‖.
fn c5_non_expansive() -> Outcome {
    let mut r = rng(5);
    let mut global = f64::NEG_INFINITY;
    let mut local = f64::NEG_INFINITY;
    let mut local_order: BTreeMap<usize, f64> = BTreeMap::new();
    let mut pairs = 0;
    for i in 0..10 {
        let kappa = i % 2;
        let c = complex_with(&mut r, kappa, 20, 20..=24);
        let tree = BipartitionTree::build(&c, kappa, variant(i)).map_err(|e| e.to_string())?;
        let kind = if i % 2 == 0 { DictionaryKind::Ghwt } else { DictionaryKind::Hglet };
        let d = MultiscaleDictionary::build(kind, &c, &tree, variant(i)).map_err(|e| e.to_string())?;
        let j_max = tree.p_max().min(4);
        let stack = d.scale_stack(j_max).map_err(|e| e.to_string())?;
        for _ in 0..10 {
            pairs += 1;
            let f1 = uniform(&mut r, tree.n);
            let f2 = uniform(&mut r, tree.n);
            let dn = norm(&f1.iter().zip(&f2).map(|(a, b)| a - b).collect::<Vec<_>>());
            for pooling in [Pooling::Global, Pooling::Local { scale: None }] {
                let cfg = ScatterConfig::new(j_max, 2, 1, pooling);
                let a = scatter(&stack, &f1, &cfg).map_err(|e| e.to_string())?;
                let b = scatter(&stack, &f2, &cfg).map_err(|e| e.to_string())?;
                let mut paths: BTreeMap<&[usize], f64> = BTreeMap::new();
                let mut orders: BTreeMap<usize, f64> = BTreeMap::new();
                for (k, (x, y)) in a.keys.iter().zip(a.values.iter().zip(&b.values)) {
                    *paths.entry(&k.path).or_default() += (x - y).powi(2);
                    *orders.entry(k.m).or_default() += (x - y).powi(2);
                }
                if pooling == Pooling::Global {
                    let whole: f64 = orders.values().sum();
                    global = orders.values().chain([&whole]).fold(global, |w, s| w.max(s.sqrt() - dn));
                } else {
                    local = paths.values().fold(local, |w, s| w.max(s.sqrt() - dn));
                    for (m, s) in orders {
                        let e = local_order.entry(m).or_insert(f64::NEG_INFINITY);
                        *e = e.max(s.sqrt() - dn);
                    }
                }
            }
        }
    }
    let orders: Vec<String> = local_order.iter().map(|(m, v)| format!("m={m} {v:+.2}")).collect();
    let detail = format!(
        "{pairs} pairs, max excess: global vector {global:+.2e}, local per path {local:+.2e} (whole local order {})",
        orders.join(", ")
    );
    if global > 1e-12 || local > 1e-12 {
        return Err(detail);
    }
    Ok(detail)
}

fn c6_permutation_invariance() -> Outcome {
    let mut r = rng(6);
    let c = complex_with(&mut r, 1, 30, 12..=14);
    let mut worst = 0.0f64;
    for (i, kind) in [DictionaryKind::Ghwt, DictionaryKind::Hglet].into_iter().enumerate() {
        let tree = BipartitionTree::build(&c, 1, variant(i)).map_err(|e| e.to_string())?;
        let d = MultiscaleDictionary::build(kind, &c, &tree, variant(i)).map_err(|e| e.to_string())?;
        let n = tree.n;
        let j_max = tree.p_max().min(4);
        let stack = d.scale_stack(j_max).map_err(|e| e.to_string())?;
        for _ in 0..10 {
            let mut xi: Vec<usize> = (0..n).collect();
            xi.shuffle(&mut r);
            let ps = d.permuted(&xi).scale_stack(j_max).map_err(|e| e.to_string())?;
            let f = uniform(&mut r, n);
            let mut g = vec![0.0; n];
            for s in 0..n {
                g[xi[s]] = f[s];
            }
            for pooling in [Pooling::Global, Pooling::Local { scale: None }] {
                let cfg = ScatterConfig::new(j_max, 2, 3, pooling);
                let a = scatter(&stack, &f, &cfg).map_err(|e| e.to_string())?;
                let b = scatter(&ps, &g, &cfg).map_err(|e| e.to_string())?;
                worst = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).fold(worst, f64::max);
            }
            let cfg = ScatterConfig::new(j_max, 2, 3, Pooling::None);
            let a = scatter(&stack, &f, &cfg).map_err(|e| e.to_string())?;
            let b = scatter(&ps, &g, &cfg).map_err(|e| e.to_string())?;
            for (idx, key) in a.keys.iter().enumerate() {
                let moved = idx - key.k + xi[key.k];
                worst = worst.max((a.values[idx] - b.values[moved]).abs());
            }
        }
    }
    if worst > 1e-9 {
        return Err(format!("max deviation {worst:.2e}"));
    }
    Ok(format!("20 permutations, global/local/none, max deviation {worst:.1e}"))
}

fn choose(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let mut v = 1usize;
    for i in 0..k {
        v = v * (n - i) / (i + 1);
    }
    v
}

/// Counts by enumerating every scale subset of size <= M as a bit mask.
fn enumerated_count(j_max: usize, m_max: usize, q: usize, pooling: Pooling, n: usize, k: &[usize]) -> usize {
    let mut per_q = 0;
    for mask in 0u32..(1 << (j_max + 1)) {
        let size = mask.count_ones() as usize;
        if size > m_max {
            continue;
        }
        per_q += match (pooling, size) {
            (Pooling::Global, _) => 1,
            (Pooling::None, _) => n,
            (_, 0) => 1,
            (Pooling::Local { scale: None }, _) => k[31 - mask.leading_zeros() as usize],
            (Pooling::Local { scale: Some(s) }, _) => k[s],
        };
    }
    q * per_q
}

fn c7_feature_counts() -> Outcome {
    let mut r = rng(7);
    let c = complex_with(&mut r, 0, 40, 40..=40);
    let tree = BipartitionTree::build(&c, 0, LaplacianVariant::Combinatorial).map_err(|e| e.to_string())?;
    let stack = MultiscaleDictionary::ghwt(&tree).scale_stack(4).map_err(|e| e.to_string())?;
    let cfg = ScatterConfig::new(4, 2, 4, Pooling::Global);
    let got = scatter(&stack, &vec![1.0; tree.n], &cfg).map_err(|e| e.to_string())?.len();
    if got != 64 || feature_count(&cfg, tree.n, &[1; 5]) != 64 {
        return Err(format!("(4,2,4) global gives {got} features"));
    }
    for trial in 0..20 {
        let kappa = trial % 2;
        let c = complex_with(&mut r, kappa, 6, 6..=12);
        let tree = BipartitionTree::build(&c, kappa, variant(trial)).map_err(|e| e.to_string())?;
        let j_max = r.random_range(0..=tree.p_max());
        let m_max = r.random_range(0..=j_max + 1);
        let q = r.random_range(1..=4);
        let pooling = match trial % 3 {
            0 => Pooling::None,
            1 => Pooling::Local { scale: None },
            _ => Pooling::Local { scale: Some(r.random_range(0..=j_max)) },
        };
        let stack = MultiscaleDictionary::ghwt(&tree).scale_stack(j_max).map_err(|e| e.to_string())?;
        let k: Vec<usize> = (0..=j_max).map(|j| tree.regions_at(tree.p_max() - j).len()).collect();
        let cfg = ScatterConfig::new(j_max, m_max, q, pooling);
        let oracle = enumerated_count(j_max, m_max, q, pooling, tree.n, &k);
        let closed = match pooling {
            Pooling::None => q * tree.n * (0..=m_max).map(|m| choose(j_max + 1, m)).sum::<usize>(),
            Pooling::Local { scale: None } => q * (1 + (0..=j_max).map(|j| (0..m_max).map(|m| choose(j, m)).sum::<usize>() * k[j]).sum::<usize>()),
            _ => oracle,
        };
        let library = feature_count(&cfg, tree.n, &k);
        let produced = scatter(&stack, &uniform(&mut r, tree.n), &cfg).map_err(|e| e.to_string())?.len();
        if oracle != closed || library != oracle || produced != oracle {
            return Err(format!("{cfg:?}: enumerated {oracle}, closed form {closed}, library {library}, produced {produced}"));
        }
    }
    Ok("(4,2,4) global = 64; 20 random local/none configurations match".into())
}

/// Brute-force Hölder seminorm over all pairs.
fn holder(tree: &BipartitionTree, f: &[f64], alpha: f64) -> f64 {
    let mut best = 0.0f64;
    for s in 0..f.len() {
        for t in s + 1..f.len() {
            best = best.max((f[s] - f[t]).abs() / (tree.distance(s, t) as f64).powf(alpha));
        }
    }
    best
}

fn c8_decay_bound() -> Outcome {
    let mut r = rng(8);
    let mut checked = 0;
    let mut detail = Vec::new();
    for kind in [DictionaryKind::Ghwt, DictionaryKind::Hglet] {
        let mut violations = 0;
        for i in 0..50 {
            // HGLET vectors with l >= 1 are mean-free only for the
            // combinatorial graph Laplacian, which the bound needs
            let kappa = if kind == DictionaryKind::Hglet { 0 } else { i % 3 };
            let v = if kind == DictionaryKind::Hglet { LaplacianVariant::Combinatorial } else { variant(i) };
            let c = complex_with(&mut r, kappa, 6, 7..=12);
            let tree = BipartitionTree::build(&c, kappa, v).map_err(|e| e.to_string())?;
            let d = MultiscaleDictionary::build(kind, &c, &tree, v).map_err(|e| e.to_string())?;
            let f = uniform(&mut r, tree.n);
            let alpha = r.random_range(0.05..=1.0);
            let ch = holder(&tree, &f, alpha);
            let fv = DVector::from_column_slice(&f);
            for p in 0..=tree.p_max() {
                let coef = d.level_matrix(p) * &fv;
                let mut row = 0;
                for b in d.level(p) {
                    let bound = ch * (b.len() as f64).powf(alpha + 0.5);
                    for l in 0..b.len() {
                        if l >= 1 {
                            checked += 1;
                            if coef[row].abs() > bound * (1.0 + 1e-12) + 1e-14 {
                                violations += 1;
                            }
                        }
                        row += 1;
                    }
                }
            }
        }
        detail.push(format!("{kind}: {violations} violations"));
        if violations > 0 {
            return Err(detail.join(", "));
        }
    }
    Ok(format!("{} in {checked} coefficients", detail.join(", ")))
}

fn c9_m_term() -> Outcome {
    let mut r = rng(9);
    let mut checked = 0;
    let mut worst = f64::NEG_INFINITY;
    for (i, kind) in [DictionaryKind::Ghwt, DictionaryKind::Hglet, DictionaryKind::Ghwt, DictionaryKind::Hglet].into_iter().enumerate() {
        let kappa = i % 3;
        let c = if kappa == 0 { complex_with(&mut r, 0, 16, 16..=24) } else { complex_with(&mut r, kappa, 16, 8..=10) };
        let tree = BipartitionTree::build(&c, kappa, variant(i)).map_err(|e| e.to_string())?;
        let d = MultiscaleDictionary::build(kind, &c, &tree, variant(i)).map_err(|e| e.to_string())?;
        let n = tree.n;
        for p in 0..=tree.p_max() {
            let basis = d.level_matrix(p);
            for _ in 0..50 {
                let f = DVector::from_vec(uniform(&mut r, n));
                let coef = &basis * &f;
                let mut mags: Vec<f64> = coef.iter().map(|c| c.abs()).collect();
                mags.sort_by(|a, b| b.total_cmp(a));
                for rho in [1.0, 1.5] {
                    let beta = 1.0 / rho - 0.5;
                    let quasi = mags.iter().map(|c| c.powf(rho)).sum::<f64>().powf(1.0 / rho);
                    for m in 1..=n {
                        let err = mags[m..].iter().map(|c| c * c).sum::<f64>().sqrt();
                        let bound = quasi / (m as f64).powf(beta);
                        worst = worst.max(err - bound);
                        checked += 1;
                    }
                }
            }
            // the library's check agrees with the oracle
            let f = uniform(&mut r, n);
            let report = hodge_scatter::dictionary::verify_m_term(&d, p, &f, &[1.0, 1.5], 1e-10).map_err(|e| e.to_string())?;
            if !report.violations.is_empty() {
                return Err(format!("library reports {} violations", report.violations.len()));
            }
        }
    }
    if worst > 1e-10 {
        return Err(format!("max excess {worst:.2e}"));
    }
    Ok(format!("{checked} (f, ρ, m) cases, max excess over the bound {worst:.2e}"))
}

fn softmax_loss(x: &[Vec<f64>], y: &[usize], w: &[Vec<f64>], b: &[f64], lambda: f64) -> f64 {
    let mut loss = 0.0;
    for (r, &c) in x.iter().zip(y) {
        let z: Vec<f64> = w.iter().zip(b).map(|(wr, bb)| bb + wr.iter().zip(r).map(|(a, v)| a * v).sum::<f64>()).collect();
        let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + z.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        loss += lse - z[c];
    }
    loss / x.len() as f64 + 0.5 * lambda * w.iter().flatten().map(|v| v * v).sum::<f64>()
}

fn c10_learning_heads() -> Outcome {
    let mut r = rng(10);
    // gradient against central differences of an independent loss
    let (n, d, classes, lambda) = (30, 4, 3, 0.1);
    let x: Vec<Vec<f64>> = (0..n).map(|_| uniform(&mut r, d)).collect();
    let y: Vec<usize> = (0..n).map(|i| i % classes).collect();
    let w: Vec<Vec<f64>> = (0..classes).map(|_| uniform(&mut r, d)).collect();
    let b = uniform(&mut r, classes);
    let wm = DMatrix::from_fn(classes, d, |i, j| w[i][j]);
    let xm = DMatrix::from_fn(n, d, |i, j| x[i][j]);
    let (loss, gw, gb) = learn::logistic_loss_grad(&xm, &y, &wm, &DVector::from_column_slice(&b), lambda);
    if (loss - softmax_loss(&x, &y, &w, &b, lambda)).abs() > 1e-12 {
        return Err("loss differs from the reference".into());
    }
    let h = 1e-6;
    let mut grad_err = 0.0f64;
    for i in 0..classes {
        for j in 0..=d {
            let (mut wp, mut wn, mut bp, mut bn) = (w.clone(), w.clone(), b.clone(), b.clone());
            let analytic = if j < d {
                wp[i][j] += h;
                wn[i][j] -= h;
                gw[(i, j)]
            } else {
                bp[i] += h;
                bn[i] -= h;
                gb[i]
            };
            let numeric = (softmax_loss(&x, &y, &wp, &bp, lambda) - softmax_loss(&x, &y, &wn, &bn, lambda)) / (2.0 * h);
            grad_err = grad_err.max((analytic - numeric).abs() / numeric.abs().max(1e-3));
        }
    }
    if grad_err > 1e-5 {
        return Err(format!("gradient relative error {grad_err:.2e}"));
    }
    // kernel ridge residual
    let xk: Vec<Vec<f64>> = (0..60).map(|_| uniform(&mut r, 3)).collect();
    let yk: Vec<f64> = xk.iter().map(|p| (3.0 * p[0]).sin() + p[1] * p[2]).collect();
    let (lam, gamma) = (1e-3, 0.7);
    let model = learn::train_kernel_ridge(&xk, &yk, lam, gamma).map_err(|e| e.to_string())?;
    let mut res = 0.0;
    for i in 0..xk.len() {
        let mut s = lam * model.alpha[i];
        for j in 0..xk.len() {
            let d2: f64 = xk[i].iter().zip(&xk[j]).map(|(a, b)| (a - b).powi(2)).sum();
            s += (-gamma * d2).exp() * model.alpha[j];
        }
        res += (s - yk[i]).powi(2);
    }
    let rel = res.sqrt() / norm(&yk);
    if rel > 1e-8 {
        return Err(format!("kernel ridge residual {rel:.2e}"));
    }
    // separable classification
    let start = Instant::now();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let dir = uniform(&mut r, 10);
    while xs.len() < 200 {
        let p = uniform(&mut r, 10);
        let s: f64 = p.iter().zip(&dir).map(|(a, b)| a * b).sum();
        if s.abs() > 0.1 {
            ys.push(usize::from(s > 0.0));
            xs.push(p);
        }
    }
    let rep = kfold_evaluate(&xs, &Target::Classes(ys), &ModelSpec::logistic(1e-3), 5, 10).map_err(|e| e.to_string())?;
    let acc = rep.score().unwrap_or(0.0);
    let t = start.elapsed();
    if acc < 0.95 || t > Duration::from_secs(60) {
        return Err(format!("separable 5-fold accuracy {acc:.3} in {t:.2?}"));
    }
    Ok(format!("gradient rel. error {grad_err:.1e}, ridge residual {rel:.1e}, separable 5-fold accuracy {acc:.3} in {t:.2?}"))
}

/// Triangulated w x h grid: vertices (i, j), edges right/down/diagonal.
fn grid_complex(w: usize, h: usize) -> SimplicialComplex {
    let id = |i: usize, j: usize| i * h + j;
    let mut tris = Vec::new();
    for i in 0..w - 1 {
        for j in 0..h - 1 {
            tris.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            tris.push(vec![id(i, j), id(i, j + 1), id(i + 1, j + 1)]);
        }
    }
    SimplicialComplex::from_simplices(2, &tris).unwrap()
}

fn c11_localized_signals() -> Outcome {
    let start = Instant::now();
    let c = grid_complex(8, 8);
    let tree = BipartitionTree::build(&c, 1, LaplacianVariant::Combinatorial).map_err(|e| e.to_string())?;
    let (x, y) = localized_signals(&tree, 2, 200, 0.1, &mut rng(11));
    let stack = MultiscaleDictionary::ghwt(&tree).scale_stack(4.min(tree.p_max())).map_err(|e| e.to_string())?;
    let mut accs = Vec::new();
    for pooling in [Pooling::Local { scale: None }, Pooling::Global] {
        let cfg = ScatterConfig::new(stack.j_max, 2, 2, pooling);
        let feats = scatter_batch(&stack, &x, &cfg).map_err(|e| e.to_string())?;
        let rep = kfold_evaluate(&feats, &Target::Classes(y.clone()), &ModelSpec::logistic(1e-3), 5, 11).map_err(|e| e.to_string())?;
        accs.push(rep.score().unwrap_or(0.0));
    }
    let t = start.elapsed();
    let detail = format!("n={} edges, local-pooled 5-fold accuracy {:.3} (global {:.3}) in {t:.2?}", tree.n, accs[0], accs[1]);
    if accs[0] < 0.9 || t > Duration::from_secs(120) {
        return Err(detail);
    }
    Ok(detail)
}

fn run(dir: &Path, threads: usize, args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_mhsn"))
        .current_dir(dir)
        .args(["--seed", "12", "--threads", &threads.to_string()])
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("mhsn {}: {}", args.join(" "), String::from_utf8_lossy(&out.stderr)));
    }
    Ok(out.stdout)
}

/// Runs the whole pipeline in `dir` and returns every output file and
/// stdout, keyed by name.
fn pipeline(dir: &Path, threads: usize) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let mut tris = String::new();
    for i in 0..7 {
        for j in 0..7 {
            let v = |a: usize, b: usize| a * 8 + b;
            tris += &format!("{} {} {}\n{} {} {}\n", v(i, j), v(i + 1, j), v(i + 1, j + 1), v(i, j), v(i, j + 1), v(i + 1, j + 1));
        }
    }
    std::fs::write(dir.join("grid.txt"), tris).unwrap();
    let mut pts = String::new();
    let mut snap = String::new();
    for i in 0..12 {
        let t = i as f64 * 0.5;
        pts += &format!("{},{},{}\n", t.cos(), t.sin(), 0.1 * t);
        snap += &format!("{},{},{}\n", 1.01 * t.cos(), t.sin(), 0.1 * t);
    }
    std::fs::write(dir.join("p1.csv"), pts).unwrap();
    std::fs::write(dir.join("p2.csv"), snap).unwrap();
    // two small graphs in TU layout
    std::fs::write(dir.join("T_A.txt"), "1,2\n2,1\n2,3\n3,2\n1,3\n3,1\n3,4\n4,3\n5,6\n6,5\n6,7\n7,6\n7,8\n8,7\n8,5\n5,8\n").unwrap();
    std::fs::write(dir.join("T_graph_indicator.txt"), "1\n1\n1\n1\n2\n2\n2\n2\n").unwrap();
    std::fs::write(dir.join("T_graph_labels.txt"), "1\n2\n").unwrap();

    let steps: Vec<(&str, Vec<&str>)> = vec![
        ("build", vec!["build", "--simplices", "grid.txt", "--max-dim", "2", "-o", "g.json"]),
        ("tree", vec!["tree", "--bundle", "g.json", "--kappa", "1", "-o", "tree.json"]),
        ("dict", vec!["dict", "--bundle", "g.json", "--kappa", "1", "--dict", "hglet", "-o", "dict.csv"]),
        ("localized", vec!["features", "localized", "--bundle", "g.json", "--kappa", "1", "--samples", "60", "-o", "sig.csv", "--labels-out", "labels.csv"]),
        ("scatter", vec!["scatter", "--bundle", "g.json", "--kappa", "1", "--signals", "sig.csv", "--pooling", "local", "-Q", "2", "-o", "feat.csv"]),
        ("geometric", vec!["features", "geometric", "--points", "p1.csv", "p2.csv", "-J", "1", "-o", "geo.csv"]),
        ("topological", vec!["features", "topological", "--tu", ".", "--name", "T", "-J", "1", "-o", "topo.csv", "--labels-out", "topo_labels.csv"]),
        ("train", vec!["train", "--features", "feat.csv", "--labels", "labels.csv", "-o", "model.json", "--report", "train_report.csv"]),
        ("eval", vec!["eval", "--features", "feat.csv", "--labels", "labels.csv", "--report", "eval_report.csv"]),
        ("eval-model", vec!["eval", "--features", "feat.csv", "--labels", "labels.csv", "--model-file", "model.json"]),
        ("verify", vec!["verify", "--bundle", "g.json", "--kappa", "1", "--samples", "3"]),
    ];
    let mut out = BTreeMap::new();
    for (name, args) in steps {
        out.insert(format!("{name}:stdout"), run(dir, threads, &args)?);
    }
    for f in ["g.json", "tree.json", "dict.csv", "sig.csv", "labels.csv", "feat.csv", "geo.csv", "topo.csv", "topo_labels.csv", "model.json", "train_report.csv", "eval_report.csv"] {
        out.insert(f.to_string(), std::fs::read(dir.join(f)).map_err(|e| format!("{f}: {e}"))?);
    }
    Ok(out)
}

fn c12_determinism() -> Outcome {
    let runs: Vec<(usize, BTreeMap<String, Vec<u8>>)> = [1, 1, 4, 3]
        .into_iter()
        .map(|t| {
            let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
            Ok((t, pipeline(dir.path(), t)?))
        })
        .collect::<Result<_, String>>()?;
    let (_, first) = &runs[0];
    for (t, other) in &runs[1..] {
        for (name, bytes) in first {
            if other.get(name) != Some(bytes) {
                return Err(format!("{name} differs with --threads {t}"));
            }
        }
    }
    Ok(format!("{} outputs byte-identical across 4 runs (--threads 1, 1, 4, 3)", first.len()))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 12] = [
        ("boundary of boundary is zero", c1_boundary_squared),
        ("two-triangle golden values", c2_figure_one),
        ("orthonormal bases and supports", c3_orthonormal_bases),
        ("tight frame", c4_tight_frame),
        ("non-expansiveness", c5_non_expansive),
        ("permutation invariance", c6_permutation_invariance),
        ("feature counts", c7_feature_counts),
        ("coefficient decay bound", c8_decay_bound),
        ("m-term approximation bound", c9_m_term),
        ("learning heads", c10_learning_heads),
        ("localized-signal classification", c11_localized_signals),
        ("determinism", c12_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
