use hodge_scatter::complex::{LaplacianVariant, SimplicialComplex};
use hodge_scatter::dictionary::MultiscaleDictionary;
use hodge_scatter::featurize::{geometric_signals, knn_complex, lift_signal, node_features, PointCloud};
use hodge_scatter::graph::Graph;
use hodge_scatter::learn::{train_kernel_ridge, Standardizer};
use hodge_scatter::partition::BipartitionTree;
use hodge_scatter::scattering::{scatter, Pooling, ScatterConfig};
use hodge_scatter::synth::random_clique_complex;
use nalgebra::{Rotation3, Vector3};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn complex(seed: u64, n: usize, p: f64, max_dim: usize) -> SimplicialComplex {
    random_clique_complex(&mut ChaCha8Rng::seed_from_u64(seed), n, p, max_dim)
}

fn variants() -> [LaplacianVariant; 2] {
    [LaplacianVariant::Combinatorial, LaplacianVariant::Normalized]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn boundary_of_boundary_vanishes(seed in any::<u64>(), n in 3usize..10, p in 0.2f64..0.9) {
        let c = complex(seed, n, p, 4);
        for k in 1..c.kappa_max().max(1) as usize {
            let prod = c.boundary_matrix(k - 1).unwrap().compose(&c.boundary_matrix(k).unwrap()).unwrap();
            prop_assert!(prod.iter().flatten().all(|&v| v == 0));
        }
    }

    #[test]
    fn laplacians_are_symmetric_psd(seed in any::<u64>(), n in 3usize..9, p in 0.3f64..0.9) {
        let c = complex(seed, n, p, 3);
        for k in 0..=c.kappa_max() as usize {
            for v in variants() {
                let l = c.hodge_laplacian(k, v).unwrap().matrix;
                prop_assert!((&l - l.transpose()).abs().max() <= 1e-12);
                let min = l.clone().symmetric_eigen().eigenvalues.min();
                prop_assert!(min >= -1e-10, "κ={} {:?}: min eigenvalue {}", k, v, min);
            }
        }
    }

    #[test]
    fn adjacency_is_symmetric(seed in any::<u64>(), n in 3usize..9, p in 0.3f64..0.9) {
        let c = complex(seed, n, p, 3);
        for k in 1..=c.kappa_max() as usize {
            let s = c.simplices(k);
            for a in 0..s.len() {
                for b in a + 1..s.len() {
                    prop_assert_eq!(c.adjacency(&s[a], &s[b]).unwrap(), c.adjacency(&s[b], &s[a]).unwrap());
                }
            }
        }
    }

    #[test]
    fn simplex_lists_are_closed(list in prop::collection::vec(prop::collection::btree_set(0usize..12, 1..5), 1..8), max_dim in 0usize..4) {
        let raw: Vec<Vec<usize>> = list.iter().map(|s| s.iter().rev().copied().collect()).collect();
        let c = SimplicialComplex::from_simplices(max_dim, &raw).unwrap();
        for k in 1..=c.kappa_max().max(0) as usize {
            for s in c.simplices(k) {
                prop_assert!(s.windows(2).all(|w| w[0] < w[1]));
                for drop in 0..s.len() {
                    let mut face = s.clone();
                    face.remove(drop);
                    prop_assert!(c.contains(&face));
                }
            }
            prop_assert!(c.simplices(k).windows(2).all(|w| w[0] < w[1]));
        }
        for s in &raw {
            let mut t = s.clone();
            t.sort_unstable();
            t.truncate(max_dim + 1);
            prop_assert!(c.contains(&t));
        }
    }

    #[test]
    fn trees_meet_requirements(seed in any::<u64>(), n in 3usize..11, p in 0.3f64..0.9) {
        let c = complex(seed, n, p, 3);
        for k in 0..=c.kappa_max() as usize {
            for v in variants() {
                let t = BipartitionTree::build(&c, k, v).unwrap();
                prop_assert_eq!(t.validate(), Ok(()));
                prop_assert!(t.p_max() < t.n.max(2));
                prop_assert_eq!(&t, &BipartitionTree::build(&c, k, v).unwrap());
                let g = MultiscaleDictionary::ghwt(&t);
                if t.p_max() >= 1 {
                    prop_assert!(g.level(t.p_max() - 1).iter().all(|b| b.members.len() <= 2));
                }
            }
        }
    }

    #[test]
    fn scattering_is_reproducible(seed in any::<u64>(), q in 1usize..4, m in 0usize..4, pool in 0usize..3) {
        let c = complex(seed, 14, 0.4, 2);
        let t = BipartitionTree::build(&c, 0, LaplacianVariant::Combinatorial).unwrap();
        let stack = MultiscaleDictionary::ghwt(&t).scale_stack(t.p_max().min(3)).unwrap();
        let pooling = [Pooling::Global, Pooling::None, Pooling::Local { scale: None }][pool];
        let cfg = ScatterConfig::new(stack.j_max, m, q, pooling);
        let f: Vec<f64> = (0..t.n).map(|i| ((i as u64 ^ seed) % 17) as f64 - 8.0).collect();
        let a = scatter(&stack, &f, &cfg).unwrap();
        let b = scatter(&stack, &f, &cfg).unwrap();
        prop_assert_eq!(&a.keys, &b.keys);
        prop_assert!(a.values.iter().zip(&b.values).all(|(x, y)| x.to_bits() == y.to_bits()));
        let energy: f64 = (0..=stack.j_max).map(|j| stack.coefficients(j, &f).iter().map(|x| x * x).sum::<f64>()).sum();
        let expect = (stack.j_max + 1) as f64 * f.iter().map(|x| x * x).sum::<f64>();
        prop_assert!((energy - expect).abs() <= 1e-10 * expect.max(1.0));
    }

    #[test]
    fn lifting_commutes_with_relabeling(seed in any::<u64>(), perm in Just((0..9usize).collect::<Vec<_>>()).prop_shuffle()) {
        let c = complex(seed, 9, 0.5, 3);
        let f0: Vec<f64> = (0..9).map(|i| (i * i) as f64 * 0.25 - 3.0).collect();
        let lifted = lift_signal(&c, &f0).unwrap();
        let mut all: Vec<Vec<usize>> = Vec::new();
        for k in 0..=c.kappa_max() as usize {
            all.extend(c.simplices(k).iter().map(|s| s.iter().map(|&v| perm[v]).collect::<Vec<_>>()));
        }
        let relabeled = SimplicialComplex::from_simplices(3, &all).unwrap();
        let mut g0 = vec![0.0; 9];
        for v in 0..9 {
            g0[perm[v]] = f0[v];
        }
        let lifted2 = lift_signal(&relabeled, &g0).unwrap();
        for k in 0..lifted.len() {
            for (i, s) in c.simplices(k).iter().enumerate() {
                let mut image: Vec<usize> = s.iter().map(|&v| perm[v]).collect();
                image.sort_unstable();
                let j = relabeled.index_of(&image).unwrap();
                prop_assert!((lifted[k][i] - lifted2[k][j]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn geometry_ignores_rigid_motion(
        pts in prop::collection::vec(prop::array::uniform3(-2.0f64..2.0), 8..14),
        axis in prop::array::uniform3(-1.0f64..1.0),
        angle in -3.1f64..3.1,
        shift in prop::array::uniform3(-5.0f64..5.0),
    ) {
        let pc = PointCloud::new(pts.clone()).unwrap();
        let c = knn_complex(&pc, 4, 3).unwrap();
        let axis = Vector3::from(axis);
        let axis = if axis.norm() < 1e-3 { Vector3::z() } else { axis.normalize() };
        let rot = Rotation3::new(axis * angle);
        let moved: Vec<[f64; 3]> = pts
            .iter()
            .map(|p| {
                let q = rot * Vector3::from(*p) + Vector3::from(shift);
                [q.x, q.y, q.z]
            })
            .collect();
        let a = geometric_signals(&c, &pc).unwrap();
        let b = geometric_signals(&c, &PointCloud::new(moved).unwrap()).unwrap();
        prop_assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            for (r, s) in x.signals.iter().zip(&y.signals) {
                prop_assert!(r.iter().zip(s).all(|(u, v)| (u - v).abs() <= 1e-9 * u.abs().max(1.0)));
            }
        }
    }

    #[test]
    fn node_feature_ranges(seed in any::<u64>(), n in 2usize..14, p in 0.2f64..0.9) {
        let c = complex(seed, n, p, 1);
        let g = c.skeleton();
        let nf = node_features(&g);
        prop_assert!(nf.clustering.iter().all(|&x| (0.0..=1.0).contains(&x)));
        if (0..n).all(|v| g.bfs(0)[v].is_some()) {
            let radius = *nf.eccentricity.iter().min().unwrap();
            prop_assert!(nf.eccentricity.iter().all(|&e| e >= radius));
            prop_assert!(nf.eccentricity.iter().all(|&e| e < n));
        }
    }

    #[test]
    fn standardized_columns(rows in prop::collection::vec(prop::collection::vec(-50.0f64..50.0, 4), 3..30)) {
        let s = Standardizer::fit(&rows);
        let z = s.transform(&rows);
        let n = rows.len() as f64;
        for j in 0..4 {
            let mean = z.iter().map(|r| r[j]).sum::<f64>() / n;
            let var = z.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n;
            prop_assert!(mean.abs() <= 1e-9);
            if s.std[j] > 0.0 {
                prop_assert!((var - 1.0).abs() <= 1e-9);
            } else {
                prop_assert!(var == 0.0);
            }
        }
    }

    #[test]
    fn kernel_ridge_solves_its_system(xs in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 2), 2..25), lambda in 1e-3f64..1.0, gamma in 0.1f64..5.0) {
        let y: Vec<f64> = xs.iter().map(|p| p[0] - 2.0 * p[1] * p[1]).collect();
        let m = train_kernel_ridge(&xs, &y, lambda, gamma).unwrap();
        let mut res = 0.0;
        for i in 0..xs.len() {
            let mut s = lambda * m.alpha[i];
            for j in 0..xs.len() {
                let d2: f64 = xs[i].iter().zip(&xs[j]).map(|(a, b)| (a - b).powi(2)).sum();
                s += (-gamma * d2).exp() * m.alpha[j];
            }
            res += (s - y[i]).powi(2);
        }
        let scale = y.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
        prop_assert!(res.sqrt() / scale <= 1e-8);
    }
}

#[test]
fn graph_from_edges_is_simple() {
    let g = Graph::from_edges(4, &[(0, 1), (1, 0), (2, 3)]);
    assert_eq!(g.edge_count(), 2);
}
