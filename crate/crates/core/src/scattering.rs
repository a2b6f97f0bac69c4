//! Multiscale Hodge scattering transform.
//!
//! A feature of order m >= 1 is a pooled q-th moment of the cascade
//! |Φ^{j_m} |... |Φ^{j_1} f|...|| over a strictly increasing scale path.
//! Order 0 is the signed moment of f itself.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dictionary::ScaleStack;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum Pooling {
    /// Mean over all simplices.
    Global,
    /// One value per simplex.
    None,
    /// Mean over each tree region. With `scale: None` every path is pooled
    /// over the regions of its last scale; otherwise over a fixed scale.
    Local { scale: Option<usize> },
}

impl std::str::FromStr for Pooling {
    type Err = Error;

    /// `global`, `none`, `local` or `local:<scale>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.to_ascii_lowercase();
        match s.as_str() {
            "global" => Ok(Pooling::Global),
            "none" => Ok(Pooling::None),
            "local" => Ok(Pooling::Local { scale: None }),
            _ => match s.strip_prefix("local:").map(str::parse::<usize>) {
                Some(Ok(j)) => Ok(Pooling::Local { scale: Some(j) }),
                _ => Err(Error::InvalidConfig(format!("unknown pooling '{s}'"))),
            },
        }
    }
}

impl std::fmt::Display for Pooling {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Pooling::Global => f.write_str("global"),
            Pooling::None => f.write_str("none"),
            Pooling::Local { scale: None } => f.write_str("local"),
            Pooling::Local { scale: Some(j) } => write!(f, "local:{j}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScatterConfig {
    pub j_max: usize,
    pub max_order: usize,
    pub max_moment: usize,
    pub pooling: Pooling,
}

impl ScatterConfig {
    pub fn new(j_max: usize, max_order: usize, max_moment: usize, pooling: Pooling) -> Self {
        ScatterConfig { j_max, max_order, max_moment, pooling }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_moment == 0 {
            return Err(Error::InvalidConfig("max moment Q must be at least 1".into()));
        }
        if let Pooling::Local { scale: Some(j) } = self.pooling {
            if j > self.j_max {
                return Err(Error::InvalidConfig(format!("pool scale {j} exceeds J={}", self.j_max)));
            }
        }
        Ok(())
    }
}

/// Position of one feature: order, moment, scale path and pool index (a
/// region index under local pooling, a simplex index under no pooling).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeatureKey {
    pub m: usize,
    pub q: usize,
    pub path: Vec<usize>,
    pub k: usize,
}

impl FeatureKey {
    pub fn name(&self) -> String {
        let path: Vec<String> = self.path.iter().map(usize::to_string).collect();
        format!("m{}_q{}_j{}_k{}", self.m, self.q, path.join("-"), self.k)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringFeatures {
    pub keys: Vec<FeatureKey>,
    pub values: Vec<f64>,
}

impl ScatteringFeatures {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn names(&self) -> Vec<String> {
        self.keys.iter().map(FeatureKey::name).collect()
    }

    /// Values whose key satisfies `pred`, in layout order.
    pub fn select(&self, pred: impl Fn(&FeatureKey) -> bool) -> Vec<f64> {
        self.keys.iter().zip(&self.values).filter(|(k, _)| pred(k)).map(|(_, &v)| v).collect()
    }
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Closed-form feature count. `region_counts[j]` is K^j for j = 0..=J.
pub fn feature_count(cfg: &ScatterConfig, n: usize, region_counts: &[usize]) -> usize {
    let (jj, mm, q) = (cfg.j_max, cfg.max_order, cfg.max_moment);
    let paths: usize = (0..=mm).map(|m| binomial(jj + 1, m)).sum();
    match cfg.pooling {
        Pooling::Global => q * paths,
        Pooling::None => q * n * paths,
        Pooling::Local { scale: None } => {
            let body: usize = (0..=jj).map(|j| (0..mm).map(|m| binomial(j, m)).sum::<usize>() * region_counts[j]).sum();
            q * (1 + body)
        }
        Pooling::Local { scale: Some(s) } => q * (1 + region_counts[s] * (paths - 1)),
    }
}

/// Strictly increasing scale paths of length m over 0..=J, lexicographic.
pub fn scale_paths(j_max: usize, m: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, j_max: usize, m: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for j in start..=j_max {
            if j_max + 1 - j < m - cur.len() {
                break;
            }
            cur.push(j);
            rec(j + 1, j_max, m, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, j_max, m, &mut Vec::new(), &mut out);
    out
}

/// Feature layout: ascending (m, q, path, k). Depends only on the config,
/// n and the region counts.
pub fn feature_layout(cfg: &ScatterConfig, n: usize, region_counts: &[usize]) -> Vec<FeatureKey> {
    let mut keys = Vec::new();
    for m in 0..=cfg.max_order {
        let paths = scale_paths(cfg.j_max, m);
        for q in 1..=cfg.max_moment {
            for path in &paths {
                let pools = match cfg.pooling {
                    Pooling::Global => 1,
                    Pooling::None => n,
                    _ if m == 0 => 1,
                    Pooling::Local { scale: None } => region_counts[*path.last().unwrap()],
                    Pooling::Local { scale: Some(s) } => region_counts[s],
                };
                keys.extend((0..pools).map(|k| FeatureKey { m, q, path: path.clone(), k }));
            }
        }
    }
    keys
}

/// Layer operator |Φ^j g|^q, entrywise, on simplex indices.
pub fn layer(stack: &ScaleStack, j: usize, q: usize, g: &[f64]) -> Vec<f64> {
    stack.transform(j, g).into_iter().map(|x| x.abs().powi(q as i32)).collect()
}

fn check(stack: &ScaleStack, f: &[f64], cfg: &ScatterConfig) -> Result<()> {
    cfg.validate()?;
    if cfg.j_max > stack.p_max {
        return Err(Error::ScaleOutOfRange { requested: cfg.j_max, p_max: stack.p_max });
    }
    if cfg.j_max > stack.j_max {
        return Err(Error::InvalidConfig(format!("J={} but the scale stack holds scales 0..={}", cfg.j_max, stack.j_max)));
    }
    if f.len() != stack.n {
        return Err(Error::LengthMismatch { expected: stack.n, got: f.len() });
    }
    Ok(())
}

fn pool(stack: &ScaleStack, pooling: Pooling, scale: usize, g: &[f64], out: &mut Vec<f64>) {
    match pooling {
        Pooling::Global => out.push(g.iter().sum::<f64>() / g.len() as f64),
        Pooling::None => out.extend_from_slice(g),
        Pooling::Local { .. } => {
            for members in stack.regions(scale) {
                out.push(members.iter().map(|&s| g[s]).sum::<f64>() / members.len() as f64);
            }
        }
    }
}

pub fn scatter(stack: &ScaleStack, f: &[f64], cfg: &ScatterConfig) -> Result<ScatteringFeatures> {
    check(stack, f, cfg)?;
    let counts: Vec<usize> = (0..=cfg.j_max).map(|j| stack.region_count(j)).collect();
    let keys = feature_layout(cfg, stack.n, &counts);
    Ok(ScatteringFeatures { values: scatter_values(stack, f, cfg), keys })
}

/// Feature values of many signals; rows come back in input order.
pub fn scatter_batch(stack: &ScaleStack, signals: &[Vec<f64>], cfg: &ScatterConfig) -> Result<Vec<Vec<f64>>> {
    for f in signals {
        check(stack, f, cfg)?;
    }
    Ok(signals.par_iter().map(|f| scatter_values(stack, f, cfg)).collect())
}

pub fn feature_names(stack: &ScaleStack, cfg: &ScatterConfig) -> Vec<String> {
    let counts: Vec<usize> = (0..=cfg.j_max).map(|j| stack.region_count(j)).collect();
    feature_layout(cfg, stack.n, &counts).iter().map(FeatureKey::name).collect()
}

fn scatter_values(stack: &ScaleStack, f: &[f64], cfg: &ScatterConfig) -> Vec<f64> {
    let mut out = Vec::new();
    let s0_pooling = match cfg.pooling {
        Pooling::None => Pooling::None,
        _ => Pooling::Global,
    };
    for q in 1..=cfg.max_moment {
        let g: Vec<f64> = f.iter().map(|x| x.powi(q as i32)).collect();
        pool(stack, s0_pooling, 0, &g, &mut out);
    }
    // signals of the previous order, keyed by path in lexicographic order
    let mut previous: Vec<(Vec<usize>, Vec<f64>)> = vec![(Vec::new(), f.to_vec())];
    for _m in 1..=cfg.max_order {
        let mut current = Vec::new();
        for (path, g) in &previous {
            let start = path.last().map_or(0, |&j| j + 1);
            for j in start..=cfg.j_max {
                let mut p = path.clone();
                p.push(j);
                current.push((p, layer(stack, j, 1, g)));
            }
        }
        current.sort_by(|a, b| a.0.cmp(&b.0));
        for q in 1..=cfg.max_moment {
            for (path, g) in &current {
                let gq: Vec<f64> = g.iter().map(|x| x.powi(q as i32)).collect();
                let scale = match cfg.pooling {
                    Pooling::Local { scale: Some(s) } => s,
                    _ => *path.last().unwrap(),
                };
                pool(stack, cfg.pooling, scale, &gq, &mut out);
            }
        }
        previous = current;
    }
    out
}
