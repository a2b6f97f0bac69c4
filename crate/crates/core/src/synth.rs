//! Seeded synthetic inputs: random clique complexes and localized signals.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::complex::SimplicialComplex;
use crate::graph::Graph;
use crate::partition::BipartitionTree;

/// Clique complex of an Erdős–Rényi graph G(n, p), truncated at `max_dim`.
pub fn random_clique_complex<R: Rng>(rng: &mut R, n: usize, p: f64, max_dim: usize) -> SimplicialComplex {
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.random_bool(p) {
                edges.push((a, b));
            }
        }
    }
    SimplicialComplex::clique_complex(&Graph::from_edges(n, &edges), max_dim)
}

/// Two-class localized signals on C_κ. A class-c sample is the indicator of
/// one region at `level`, drawn uniformly from the regions inside root child
/// c, plus Gaussian noise of standard deviation `noise`. Samples alternate
/// between the classes.
///
/// Panics if the root is not split.
pub fn localized_signals<R: Rng>(
    tree: &BipartitionTree,
    level: usize,
    samples: usize,
    noise: f64,
    rng: &mut R,
) -> (Vec<Vec<f64>>, Vec<usize>) {
    assert!(tree.p_max() >= 1, "the root region must be split");
    let level = level.clamp(1, tree.p_max());
    let pools: Vec<Vec<&[usize]>> = (0..2)
        .map(|c| {
            let side = &tree.regions_at(1)[c].members;
            tree.regions_at(level)
                .iter()
                .filter(|r| side.binary_search(&r.members[0]).is_ok())
                .map(|r| r.members.as_slice())
                .collect()
        })
        .collect();
    let gauss = Normal::new(0.0, noise.max(0.0)).unwrap();
    let mut x = Vec::with_capacity(samples);
    let mut y = Vec::with_capacity(samples);
    for i in 0..samples {
        let c = i % 2;
        let region = pools[c][rng.random_range(0..pools[c].len())];
        let mut f: Vec<f64> = (0..tree.n).map(|_| gauss.sample(rng)).collect();
        for &s in region {
            f[s] += 1.0;
        }
        x.push(f);
        y.push(c);
    }
    (x, y)
}
