//! Learning heads and cross-validation: multinomial logistic regression,
//! Gaussian-kernel ridge regression, k-fold evaluation and a small grid
//! search.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn to_matrix(x: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let d = x.first().map_or(0, Vec::len);
    if let Some(bad) = x.iter().find(|r| r.len() != d) {
        return Err(Error::LengthMismatch { expected: d, got: bad.len() });
    }
    Ok(DMatrix::from_fn(x.len(), d, |i, j| x[i][j]))
}

/// Per-column affine map to zero mean and unit (population) standard
/// deviation. Constant columns map to zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &[Vec<f64>]) -> Self {
        let d = x.first().map_or(0, Vec::len);
        let n = x.len().max(1) as f64;
        let mean: Vec<f64> = (0..d).map(|j| x.iter().map(|r| r[j]).sum::<f64>() / n).collect();
        let std = (0..d)
            .map(|j| {
                let var = x.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n;
                let s = var.sqrt();
                if s > 1e-12 * mean[j].abs().max(1.0) {
                    s
                } else {
                    0.0
                }
            })
            .collect();
        Standardizer { mean, std }
    }

    pub fn transform_row(&self, r: &[f64]) -> Vec<f64> {
        r.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(&v, (&m, &s))| if s == 0.0 { 0.0 } else { (v - m) / s })
            .collect()
    }

    pub fn transform(&self, x: &[Vec<f64>]) -> Vec<Vec<f64>> {
        x.iter().map(|r| self.transform_row(r)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    /// Class ids, in the order of the weight rows.
    pub classes: Vec<usize>,
    /// One row of feature weights per class.
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    pub lambda: f64,
    pub iterations: usize,
    pub grad_norm: f64,
}

/// Mean multinomial cross-entropy plus (λ/2)‖W‖² and its gradient with
/// respect to W and the (unpenalized) bias. `y` holds row indices into W.
pub fn logistic_loss_grad(
    x: &DMatrix<f64>,
    y: &[usize],
    w: &DMatrix<f64>,
    b: &DVector<f64>,
    lambda: f64,
) -> (f64, DMatrix<f64>, DVector<f64>) {
    let n = x.nrows() as f64;
    let mut z = x * w.transpose();
    let mut loss = 0.0;
    for (i, mut row) in z.row_iter_mut().enumerate() {
        row += b.transpose();
        let max = row.max();
        let lse = max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        loss -= row[y[i]] - lse;
        row.apply(|v| *v = (*v - lse).exp());
        row[y[i]] -= 1.0;
    }
    // z now holds P - Y
    let gw = z.transpose() * x / n + w * lambda;
    let gb = DVector::from_iterator(w.nrows(), z.column_iter().map(|c| c.sum() / n));
    (loss / n + 0.5 * lambda * w.norm_squared(), gw, gb)
}

/// L-BFGS (memory 10) with backtracking Armijo line search; stops when the
/// gradient norm reaches `tol` or after `max_iter` iterations.
pub fn train_logistic(x: &[Vec<f64>], y: &[usize], lambda: f64, max_iter: usize, tol: f64) -> Result<LogisticModel> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { expected: x.len(), got: y.len() });
    }
    let mut classes: Vec<usize> = y.to_vec();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() < 2 {
        return Err(Error::SingleClass(classes.first().copied().unwrap_or(0)));
    }
    let xm = to_matrix(x)?;
    let yi: Vec<usize> = y.iter().map(|c| classes.binary_search(c).unwrap()).collect();
    let (c, d) = (classes.len(), xm.ncols());
    // θ = [vec(W) column-major, b]
    let unpack = |t: &DVector<f64>| (DMatrix::from_column_slice(c, d, &t.as_slice()[..c * d]), t.rows(c * d, c).into_owned());
    let pack = |gw: &DMatrix<f64>, gb: &DVector<f64>| DVector::from_iterator(c * d + c, gw.iter().chain(gb.iter()).copied());
    let eval = |t: &DVector<f64>| {
        let (w, b) = unpack(t);
        let (l, gw, gb) = logistic_loss_grad(&xm, &yi, &w, &b, lambda);
        (l, pack(&gw, &gb))
    };
    let mut theta = DVector::zeros(c * d + c);
    let (mut loss, mut g) = eval(&theta);
    let mut hist: std::collections::VecDeque<(DVector<f64>, DVector<f64>, f64)> = std::collections::VecDeque::new();
    let mut iterations = 0;
    let mut gnorm = g.norm();
    while iterations < max_iter && gnorm > tol {
        iterations += 1;
        let mut q = g.clone();
        let mut alphas = Vec::with_capacity(hist.len());
        for (s, yv, rho) in hist.iter().rev() {
            let a = rho * s.dot(&q);
            q.axpy(-a, yv, 1.0);
            alphas.push(a);
        }
        if let Some((s, yv, _)) = hist.back() {
            q *= s.dot(yv) / yv.norm_squared();
        }
        for ((s, yv, rho), a) in hist.iter().zip(alphas.iter().rev()) {
            let bcoef = rho * yv.dot(&q);
            q.axpy(a - bcoef, s, 1.0);
        }
        let mut dir = -q;
        let mut slope = g.dot(&dir);
        if slope >= 0.0 {
            hist.clear();
            dir = -g.clone();
            slope = -g.norm_squared();
        }
        let mut step = if hist.is_empty() { 1.0 / gnorm.max(1.0) } else { 1.0 };
        let accepted = loop {
            let t_new = &theta + &dir * step;
            let (l_new, g_new) = eval(&t_new);
            if l_new <= loss + 1e-4 * step * slope {
                break Some((t_new, l_new, g_new));
            }
            step *= 0.5;
            if step < 1e-16 {
                break None;
            }
        };
        let Some((t_new, l_new, g_new)) = accepted else { break };
        let s = &t_new - &theta;
        let yv = &g_new - &g;
        let sy = s.dot(&yv);
        if sy > 1e-12 * s.norm() * yv.norm() {
            if hist.len() == 10 {
                hist.pop_front();
            }
            hist.push_back((s, yv, 1.0 / sy));
        }
        (theta, loss, g) = (t_new, l_new, g_new);
        gnorm = g.norm();
    }
    let (w, b) = unpack(&theta);
    Ok(LogisticModel {
        classes,
        weights: w.row_iter().map(|r| r.iter().copied().collect()).collect(),
        bias: b.iter().copied().collect(),
        lambda,
        iterations,
        grad_norm: gnorm,
    })
}

impl LogisticModel {
    pub fn probabilities(&self, r: &[f64]) -> Vec<f64> {
        let z: Vec<f64> = self.weights.iter().zip(&self.bias).map(|(w, b)| b + w.iter().zip(r).map(|(a, x)| a * x).sum::<f64>()).collect();
        let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = z.iter().map(|v| (v - max).exp()).collect();
        let s: f64 = e.iter().sum();
        e.into_iter().map(|v| v / s).collect()
    }

    /// Most probable class; ties go to the smaller class id.
    pub fn predict(&self, r: &[f64]) -> usize {
        let p = self.probabilities(r);
        let best = (0..p.len()).fold(0, |best, i| if p[i] > p[best] { i } else { best });
        self.classes[best]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelRidgeModel {
    pub support: Vec<Vec<f64>>,
    pub alpha: Vec<f64>,
    pub gamma: f64,
    pub lambda: f64,
}

pub fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    (-gamma * a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>()).exp()
}

pub fn kernel_matrix(x: &[Vec<f64>], gamma: f64) -> DMatrix<f64> {
    let n = x.len();
    DMatrix::from_fn(n, n, |i, j| rbf(&x[i], &x[j], gamma))
}

/// Solves (K + λI) α = y by Cholesky with one refinement step.
pub fn train_kernel_ridge(x: &[Vec<f64>], y: &[f64], lambda: f64, gamma: f64) -> Result<KernelRidgeModel> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { expected: x.len(), got: y.len() });
    }
    if x.is_empty() {
        return Err(Error::InvalidConfig("kernel ridge needs at least one sample".into()));
    }
    to_matrix(x)?;
    let mut a = kernel_matrix(x, gamma);
    for i in 0..a.nrows() {
        a[(i, i)] += lambda;
    }
    let chol = a.clone().cholesky().ok_or_else(|| Error::Singular("K + λI is not positive definite".into()))?;
    let l = chol.l_dirty();
    let max_diag = a.diagonal().max();
    let min_pivot = (0..a.nrows()).map(|i| l[(i, i)] * l[(i, i)]).fold(f64::INFINITY, f64::min);
    if min_pivot <= 1e-13 * max_diag * a.nrows() as f64 {
        return Err(Error::Singular(format!("K + λI is numerically singular (pivot {min_pivot:.3e})")));
    }
    let yv = DVector::from_column_slice(y);
    let mut alpha = chol.solve(&yv);
    let r = &yv - &a * &alpha;
    alpha += chol.solve(&r);
    Ok(KernelRidgeModel { support: x.to_vec(), alpha: alpha.iter().copied().collect(), gamma, lambda })
}

impl KernelRidgeModel {
    pub fn predict(&self, r: &[f64]) -> f64 {
        self.support.iter().zip(&self.alpha).map(|(s, a)| a * rbf(s, r, self.gamma)).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum ModelSpec {
    Logistic { lambda: f64, max_iter: usize, tol: f64 },
    /// `gamma: None` means 1 / number of features.
    KernelRidge { lambda: f64, gamma: Option<f64> },
}

impl ModelSpec {
    pub fn logistic(lambda: f64) -> Self {
        ModelSpec::Logistic { lambda, max_iter: 2000, tol: 1e-6 }
    }

    pub fn kernel_ridge(lambda: f64, gamma: Option<f64>) -> Self {
        ModelSpec::KernelRidge { lambda, gamma }
    }

    pub fn is_classifier(&self) -> bool {
        matches!(self, ModelSpec::Logistic { .. })
    }
}

/// Targets: class ids or real values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    Classes(Vec<usize>),
    Values(Vec<f64>),
}

impl Target {
    pub fn len(&self) -> usize {
        match self {
            Target::Classes(c) => c.len(),
            Target::Values(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn subset(&self, idx: &[usize]) -> Target {
        match self {
            Target::Classes(c) => Target::Classes(idx.iter().map(|&i| c[i]).collect()),
            Target::Values(v) => Target::Values(idx.iter().map(|&i| v[i]).collect()),
        }
    }

    /// Maps label strings to class ids 0.. in sorted order (numeric order when
    /// every label is a number). Returns the ids and the class names.
    pub fn classes_from_labels(labels: &[String]) -> (Target, Vec<String>) {
        let mut names: Vec<String> = labels.to_vec();
        if names.iter().all(|s| s.parse::<f64>().is_ok()) {
            names.sort_by(|a, b| a.parse::<f64>().unwrap().total_cmp(&b.parse::<f64>().unwrap()));
        } else {
            names.sort();
        }
        names.dedup();
        let ids = labels.iter().map(|l| names.iter().position(|n| n == l).unwrap()).collect();
        (Target::Classes(ids), names)
    }

    pub fn values_from_labels(labels: &[String]) -> Result<Target> {
        labels
            .iter()
            .map(|l| l.parse::<f64>().map_err(|_| Error::InvalidConfig(format!("regression target '{l}' is not a number"))))
            .collect::<Result<Vec<_>>>()
            .map(Target::Values)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Head {
    Logistic(LogisticModel),
    KernelRidge(KernelRidgeModel),
}

/// A head together with the standardization it was trained under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub standardizer: Standardizer,
    pub head: Head,
}

/// Prediction: a class id or a real value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Prediction {
    Class(usize),
    Value(f64),
}

impl std::fmt::Display for Prediction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Prediction::Class(c) => write!(f, "{c}"),
            Prediction::Value(v) => write!(f, "{v}"),
        }
    }
}

pub fn train(x: &[Vec<f64>], y: &Target, spec: &ModelSpec) -> Result<TrainedModel> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { expected: x.len(), got: y.len() });
    }
    let standardizer = Standardizer::fit(x);
    let xs = standardizer.transform(x);
    let head = match (spec, y) {
        (ModelSpec::Logistic { lambda, max_iter, tol }, Target::Classes(c)) => Head::Logistic(train_logistic(&xs, c, *lambda, *max_iter, *tol)?),
        (ModelSpec::KernelRidge { lambda, gamma }, Target::Values(v)) => {
            let d = xs.first().map_or(1, Vec::len).max(1);
            Head::KernelRidge(train_kernel_ridge(&xs, v, *lambda, gamma.unwrap_or(1.0 / d as f64))?)
        }
        (ModelSpec::Logistic { .. }, Target::Values(_)) => return Err(Error::InvalidConfig("logistic regression needs class labels".into())),
        (ModelSpec::KernelRidge { .. }, Target::Classes(_)) => return Err(Error::InvalidConfig("kernel ridge needs real-valued targets".into())),
    };
    Ok(TrainedModel { standardizer, head })
}

impl TrainedModel {
    pub fn predict(&self, r: &[f64]) -> Prediction {
        let z = self.standardizer.transform_row(r);
        match &self.head {
            Head::Logistic(m) => Prediction::Class(m.predict(&z)),
            Head::KernelRidge(m) => Prediction::Value(m.predict(&z)),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Metric {
    Accuracy(f64),
    Regression { mae: f64, rmse: f64 },
}

pub fn evaluate(model: &TrainedModel, x: &[Vec<f64>], y: &Target) -> Metric {
    match y {
        Target::Classes(c) => {
            let hits = x.iter().zip(c).filter(|(r, &c)| model.predict(r) == Prediction::Class(c)).count();
            Metric::Accuracy(hits as f64 / x.len().max(1) as f64)
        }
        Target::Values(v) => {
            let errs: Vec<f64> = x
                .iter()
                .zip(v)
                .map(|(r, &t)| match model.predict(r) {
                    Prediction::Value(p) => p - t,
                    Prediction::Class(p) => p as f64 - t,
                })
                .collect();
            let n = errs.len().max(1) as f64;
            Metric::Regression {
                mae: errs.iter().map(|e| e.abs()).sum::<f64>() / n,
                rmse: (errs.iter().map(|e| e * e).sum::<f64>() / n).sqrt(),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldResult {
    pub fold: usize,
    pub train: usize,
    pub test: usize,
    pub metric: Metric,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvReport {
    pub folds: Vec<FoldResult>,
    pub skipped: Vec<usize>,
}

impl CvReport {
    /// Mean and population standard deviation of accuracy (classification)
    /// or of (MAE, RMSE) (regression) over the evaluated folds.
    pub fn summary(&self) -> Vec<(&'static str, f64, f64)> {
        let stats = |v: Vec<f64>| {
            let n = v.len().max(1) as f64;
            let m = v.iter().sum::<f64>() / n;
            (m, (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n).sqrt())
        };
        match self.folds.first().map(|f| f.metric) {
            Some(Metric::Accuracy(_)) => {
                let (m, s) = stats(self.folds.iter().map(|f| if let Metric::Accuracy(a) = f.metric { a } else { 0.0 }).collect());
                vec![("accuracy", m, s)]
            }
            Some(Metric::Regression { .. }) => {
                let pick = |k: usize| {
                    self.folds
                        .iter()
                        .map(|f| match f.metric {
                            Metric::Regression { mae, rmse } => [mae, rmse][k],
                            Metric::Accuracy(_) => 0.0,
                        })
                        .collect::<Vec<_>>()
                };
                let (m1, s1) = stats(pick(0));
                let (m2, s2) = stats(pick(1));
                vec![("mae", m1, s1), ("rmse", m2, s2)]
            }
            None => Vec::new(),
        }
    }

    /// Headline score: accuracy, or RMSE for regression.
    pub fn score(&self) -> Option<f64> {
        self.summary().last().map(|s| s.1)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        match self.folds.first().map(|f| f.metric) {
            Some(Metric::Regression { .. }) => out.push_str("fold,train,test,mae,rmse\n"),
            _ => out.push_str("fold,train,test,accuracy\n"),
        }
        for f in &self.folds {
            match f.metric {
                Metric::Accuracy(a) => out.push_str(&format!("{},{},{},{a}\n", f.fold, f.train, f.test)),
                Metric::Regression { mae, rmse } => out.push_str(&format!("{},{},{},{mae},{rmse}\n", f.fold, f.train, f.test)),
            }
        }
        for (name, m, s) in self.summary() {
            out.push_str(&format!("# {name} mean={m} std={s}\n"));
        }
        out
    }
}

/// Shuffled fold assignment: the permutation drawn from `seed` is cut into
/// k nearly equal consecutive parts.
pub fn fold_indices(n: usize, k: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    (0..k).map(|f| idx[f * n / k..(f + 1) * n / k].to_vec()).collect()
}

pub fn kfold_evaluate(x: &[Vec<f64>], y: &Target, spec: &ModelSpec, k: usize, seed: u64) -> Result<CvReport> {
    if k < 2 || k > x.len() {
        return Err(Error::InvalidConfig(format!("k = {k} folds needs 2 <= k <= {}", x.len())));
    }
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { expected: x.len(), got: y.len() });
    }
    let folds = fold_indices(x.len(), k, seed);
    let results: Vec<Result<Option<FoldResult>>> = folds
        .par_iter()
        .enumerate()
        .map(|(f, test)| {
            let mut in_test = vec![false; x.len()];
            test.iter().for_each(|&i| in_test[i] = true);
            let train_idx: Vec<usize> = (0..x.len()).filter(|&i| !in_test[i]).collect();
            let ytr = y.subset(&train_idx);
            if let (Target::Classes(all), Target::Classes(tr)) = (y, &ytr) {
                let missing = all.iter().any(|c| !tr.contains(c));
                if missing {
                    log::warn!("fold {f}: a class is absent from the training part; fold skipped");
                    return Ok(None);
                }
            }
            let xtr: Vec<Vec<f64>> = train_idx.iter().map(|&i| x[i].clone()).collect();
            let xte: Vec<Vec<f64>> = test.iter().map(|&i| x[i].clone()).collect();
            let model = train(&xtr, &ytr, spec)?;
            let metric = evaluate(&model, &xte, &y.subset(test));
            Ok(Some(FoldResult { fold: f, train: train_idx.len(), test: test.len(), metric }))
        })
        .collect();
    let mut report = CvReport { folds: Vec::new(), skipped: Vec::new() };
    for (f, r) in results.into_iter().enumerate() {
        match r? {
            Some(fr) => report.folds.push(fr),
            None => report.skipped.push(f),
        }
    }
    Ok(report)
}

/// Candidate specs: λ over decades 1e-4..=1e1, and for kernel ridge γ in
/// {0.1γ₀, γ₀, 10γ₀} with γ₀ = 1 / number of features.
pub fn grid(base: &ModelSpec, num_features: usize) -> Vec<ModelSpec> {
    let lambdas = [1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0];
    let g0 = 1.0 / num_features.max(1) as f64;
    let mut out = Vec::new();
    for &l in &lambdas {
        match *base {
            ModelSpec::Logistic { max_iter, tol, .. } => out.push(ModelSpec::Logistic { lambda: l, max_iter, tol }),
            ModelSpec::KernelRidge { .. } => {
                out.extend([0.1 * g0, g0, 10.0 * g0].iter().map(|&g| ModelSpec::KernelRidge { lambda: l, gamma: Some(g) }))
            }
        }
    }
    out
}

/// Picks the grid point with the best cross-validated score (highest
/// accuracy or lowest RMSE; earlier candidates win ties).
pub fn grid_search(x: &[Vec<f64>], y: &Target, base: &ModelSpec, k: usize, seed: u64) -> Result<(ModelSpec, CvReport)> {
    let d = x.first().map_or(0, Vec::len);
    let mut best: Option<(ModelSpec, CvReport, f64)> = None;
    for spec in grid(base, d) {
        let rep = match kfold_evaluate(x, y, &spec, k, seed) {
            Ok(r) => r,
            Err(Error::Singular(msg)) => {
                log::warn!("grid point {spec:?} skipped: {msg}");
                continue;
            }
            Err(e) => return Err(e),
        };
        let Some(s) = rep.score() else { continue };
        let s = if base.is_classifier() { s } else { -s };
        if best.as_ref().is_none_or(|b| s > b.2) {
            best = Some((spec, rep, s));
        }
    }
    best.map(|(s, r, _)| (s, r)).ok_or_else(|| Error::InvalidConfig("no grid point produced a score".into()))
}
