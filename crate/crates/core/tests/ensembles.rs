use erline::ensembles::*;
use erline::entropy::entropy_derivative;
use erline::graphon::finite_graph_to_graphon;
use erline::{Error, MultiplierPair};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Naive enumeration: every labelled graph on `n` vertices as an adjacency
/// matrix, with edge and triangle counts from triple loops.
fn brute_force(n: usize) -> Vec<(Vec<Vec<bool>>, u64, u64)> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
    (0u64..1 << pairs.len())
        .map(|mask| {
            let mut a = vec![vec![false; n]; n];
            for (k, &(i, j)) in pairs.iter().enumerate() {
                if mask >> k & 1 == 1 {
                    a[i][j] = true;
                    a[j][i] = true;
                }
            }
            let e = pairs.iter().filter(|&&(i, j)| a[i][j]).count() as u64;
            let mut t = 0;
            for i in 0..n {
                for j in (i + 1)..n {
                    for k in (j + 1)..n {
                        if a[i][j] && a[j][k] && a[i][k] {
                            t += 1;
                        }
                    }
                }
            }
            (a, e, t)
        })
        .collect()
}

/// ln P_can for every graph from the naive enumeration.
fn brute_log_probs(n: usize, theta: MultiplierPair) -> Vec<(u64, u64, f64)> {
    let nf = n as f64;
    let g = brute_force(n);
    let h: Vec<f64> =
        g.iter().map(|(_, e, t)| 2.0 * theta.theta1 * *e as f64 + 6.0 * theta.theta2 * *t as f64 / nf).collect();
    let max = h.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lz = max + h.iter().map(|x| (x - max).exp()).sum::<f64>().ln();
    g.iter().zip(&h).map(|((_, e, t), x)| (*e, *t, x - lz)).collect()
}

fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> DenseGraph {
    let mut g = DenseGraph::empty(n).unwrap();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random::<f64>() < p {
                g.set_edge(i, j, true);
            }
        }
    }
    g
}

#[test]
fn subgraph_count_examples() {
    let tri = DenseGraph::complete(3).unwrap();
    assert_eq!(subgraph_counts(&tri), SubgraphCounts { edges: 3, wedges: 3, triangles: 1 });
    assert_eq!(DenseGraph::empty(6).unwrap().subgraph_counts(), SubgraphCounts::default());
    assert_eq!(DenseGraph::complete(4).unwrap().subgraph_counts(), SubgraphCounts { edges: 6, wedges: 12, triangles: 4 });
}

#[test]
fn counts_match_naive_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in [5usize, 9, 40, 70, 130] {
        let g = random_graph(&mut rng, n, 0.4);
        let mut e = 0;
        let mut w = 0;
        let mut t = 0;
        for i in 0..n {
            let d = (0..n).filter(|&j| g.has_edge(i, j)).count() as u64;
            w += d * d.saturating_sub(1) / 2;
            for j in (i + 1)..n {
                if g.has_edge(i, j) {
                    e += 1;
                    for k in (j + 1)..n {
                        if g.has_edge(j, k) && g.has_edge(i, k) {
                            t += 1;
                        }
                    }
                }
            }
        }
        assert_eq!(g.subgraph_counts(), SubgraphCounts { edges: e, wedges: w, triangles: t });
    }
}

#[test]
fn hom_density_examples() {
    let tri = DenseGraph::complete(3).unwrap();
    assert!((hom_density(Motif::Edge, &tri) - 2.0 * 3.0 / 9.0).abs() < 1e-15);
    assert!((hom_density(Motif::Triangle, &tri) - 6.0 / 27.0).abs() < 1e-15);
    let empty = DenseGraph::empty(4).unwrap();
    for m in [Motif::Edge, Motif::Wedge, Motif::Triangle] {
        assert_eq!(hom_density(m, &empty), 0.0);
    }
}

#[test]
fn omega_examples() {
    assert_eq!(count_constrained(3, 3, 1).unwrap(), 1);
    assert_eq!(count_constrained(4, 3, 0).unwrap(), 16);
    assert_eq!(count_constrained(3, 3, 0).unwrap(), 0);
    assert!(matches!(count_constrained(9, 3, 0), Err(Error::Capacity { .. })));
}

#[test]
fn census_matches_naive_enumeration() {
    for n in 1..=6 {
        let c = census(n).unwrap();
        let g = brute_force(n);
        assert_eq!(c.total(), g.len() as u64);
        let mut hist = std::collections::HashMap::new();
        for (_, e, t) in &g {
            *hist.entry((*e, *t)).or_insert(0u64) += 1;
        }
        for (e, t, m) in c.support() {
            assert_eq!(hist.get(&(e, t)), Some(&m), "n = {n}, ({e}, {t})");
        }
        assert_eq!(c.support().count(), hist.len());
        assert_eq!(all_graphs(n).unwrap().len(), g.len());
    }
    assert_eq!(census(7).unwrap().total(), 1 << 21);
    assert!(all_graphs(7).is_err());
}

#[test]
fn uniform_partition_at_three() {
    let m = partition_exact(3, MultiplierPair::default()).unwrap();
    assert!((m.psi_n - 8f64.ln() / 9.0).abs() < 1e-15);
    assert!((m.mean_t[0] - 1.0 / 3.0).abs() < 1e-15);
    for n in 2..=7usize {
        let m = partition_exact(n, MultiplierPair::default()).unwrap();
        let nf = n as f64;
        let pairs = nf * (nf - 1.0) / 2.0;
        assert!((m.psi_n - pairs * 2f64.ln() / (nf * nf)).abs() < 1e-14);
        assert!((m.mean_t[0] - pairs / (nf * nf)).abs() < 1e-14);
    }
}

#[test]
fn independent_edges_when_theta2_vanishes() {
    for n in 3..=7usize {
        let nf = n as f64;
        for &t1 in &[-1.2, -0.3, 0.4, 1.5] {
            let m = partition_exact(n, MultiplierPair::new(t1, 0.0)).unwrap();
            let p = 1.0 / (1.0 + (-2.0 * t1).exp());
            let pairs = nf * (nf - 1.0) / 2.0;
            let trip = nf * (nf - 1.0) * (nf - 2.0) / 6.0;
            assert!((m.psi_n - pairs * (1.0 + (2.0 * t1).exp()).ln() / (nf * nf)).abs() < 1e-13);
            assert!((m.mean_t[0] - 2.0 * pairs * p / (nf * nf)).abs() < 1e-13);
            assert!((m.mean_t[1] - 6.0 * trip * p.powi(3) / nf.powi(3)).abs() < 1e-13);
        }
    }
}

#[test]
fn partition_matches_naive_sum() {
    for n in 3..=6usize {
        for theta in [MultiplierPair::new(0.3, -0.8), MultiplierPair::new(-0.5, 1.7)] {
            let lp = brute_log_probs(n, theta);
            let nf = n as f64;
            let mean1: f64 = lp.iter().map(|(e, _, l)| l.exp() * 2.0 * *e as f64 / (nf * nf)).sum();
            let mean3: f64 = lp.iter().map(|(_, t, l)| l.exp() * 6.0 * *t as f64 / nf.powi(3)).sum();
            let m = partition_exact(n, theta).unwrap();
            assert!((m.mean_t[0] - mean1).abs() < 1e-13);
            assert!((m.mean_t[1] - mean3).abs() < 1e-13);
            let h0 = hamiltonian(n, theta, 0.0, 0.0);
            assert!((m.psi_n - (h0 - lp[0].2) / (nf * nf)).abs() < 1e-13);
        }
    }
}

#[test]
fn triangle_mean_is_monotone_in_theta2() {
    let mut last = f64::INFINITY;
    for k in 0..40 {
        let th2 = 2.0 - 0.25 * k as f64;
        let m = partition_exact(6, MultiplierPair::new(0.2, th2)).unwrap();
        assert!(m.mean_t[1] < last);
        last = m.mean_t[1];
    }
    assert!(partition_exact(8, MultiplierPair::default()).is_err());
}

#[test]
fn calibration_fixed_point() {
    for n in 3..=7 {
        let m = partition_exact(n, MultiplierPair::default()).unwrap();
        let th = calibrate_theta_exact(n, m.mean_t).unwrap();
        assert!(th.theta1.abs() < 1e-8 && th.theta2.abs() < 1e-8, "n = {n}: {th:?}");
    }
}

#[test]
fn calibration_boundary_diverges() {
    let target = densities_of_counts(5, 4, 0);
    assert!(matches!(calibrate_theta_exact(5, target), Err(Error::NonConvergence(_))));
    let target = densities_of_counts(5, 10, 10);
    assert!(matches!(calibrate_theta_exact(5, target), Err(Error::NonConvergence(_))));
}

#[test]
fn calibration_interior_target_at_four() {
    let target = [2.0 * 3.0 / 16.0, 6.0 * 0.5 / 64.0];
    let rep = calibrate_theta_exact_report(4, target).unwrap();
    assert!(rep.residual[0].hypot(rep.residual[1]) < 1e-10);
    let m = partition_exact(4, rep.theta).unwrap();
    assert!((m.mean_t[0] - target[0]).abs() < 1e-10);
    assert!((m.mean_t[1] - target[1]).abs() < 1e-10);
    // Three of six edges and half a triangle are exactly the uniform means.
    assert!(rep.theta.theta1.abs() < 1e-9 && rep.theta.theta2.abs() < 1e-9);
    let skewed = [2.0 * 3.0 / 16.0, 6.0 * 0.8 / 64.0];
    let th = calibrate_theta_exact(4, skewed).unwrap();
    assert!(th.theta2 > 0.0);
    let m = partition_exact(4, th).unwrap();
    assert!((m.mean_t[0] - skewed[0]).abs() < 1e-10 && (m.mean_t[1] - skewed[1]).abs() < 1e-10);
}

#[test]
fn calibration_starts_from_er_guess() {
    let n = 6;
    let nf = n as f64;
    let p: f64 = 0.35;
    let th = MultiplierPair::new(entropy_derivative(p, 1).unwrap(), 0.0);
    let m = partition_exact(n, th).unwrap();
    let back = calibrate_theta_exact(n, m.mean_t).unwrap();
    assert!((back.theta1 - th.theta1).abs() < 1e-8 && back.theta2.abs() < 1e-8);
    assert!((m.mean_t[0] * nf / (nf - 1.0) - p).abs() < 1e-12);
}

fn interior_cells(n: usize) -> Vec<(u64, u64)> {
    let c = census(n).unwrap();
    c.support().filter(|&(e, t, _)| c.strictly_interior(e as f64, t as f64, 1e-9)).map(|(e, t, _)| (e, t)).collect()
}

#[test]
fn relative_entropy_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut checked = 0;
    for n in 4..=7usize {
        let cells = interior_cells(n);
        assert!(!cells.is_empty());
        for _ in 0..13 {
            let (e, t) = cells[rng.random_range(0..cells.len())];
            let s = match relative_entropy_exact(n, e, t) {
                Ok(s) => s,
                Err(Error::NonConvergence(_)) => continue,
                Err(other) => panic!("n = {n}, ({e}, {t}): {other}"),
            };
            assert!(s.s_n >= -1e-12);
            assert!((s.s_n - s.s_n_full_sum).abs() < 1e-12, "n = {n}, ({e}, {t})");
            assert_eq!(s.omega, count_constrained(n, e, t).unwrap());
            if n <= 6 {
                let lp = brute_log_probs(n, s.theta);
                let inside: Vec<f64> = lp.iter().filter(|x| x.0 == e && x.1 == t).map(|x| x.2).collect();
                let pm = 1.0 / inside.len() as f64;
                let oracle: f64 = inside.iter().map(|l| pm * (pm.ln() - l)).sum();
                assert!((s.s_n - oracle).abs() < 1e-10, "n = {n}: {} vs {oracle}", s.s_n);
            }
            checked += 1;
        }
    }
    assert!(checked >= 50, "only {checked} constraints checked");
}

#[test]
fn relative_entropy_errors() {
    assert!(matches!(relative_entropy_exact(3, 3, 0), Err(Error::NonGraphical { .. })));
    assert!(matches!(relative_entropy_exact(4, 0, 0), Err(Error::BoundaryConstraint { .. })));
    assert!(matches!(relative_entropy_exact(4, 6, 4), Err(Error::BoundaryConstraint { .. })));
    assert!(matches!(relative_entropy_exact(8, 14, 10), Err(Error::Capacity { .. })));
}

#[test]
fn isomorphism_invariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let theta = MultiplierPair::new(0.37, -1.3);
    for n in [5usize, 12, 33] {
        let g = random_graph(&mut rng, n, 0.5);
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        let h = g.relabel(&perm).unwrap();
        let (a, b) = (g.subgraph_counts(), h.subgraph_counts());
        assert_eq!(a, b);
        assert_eq!(
            hamiltonian(n, theta, a.edges as f64, a.triangles as f64).to_bits(),
            hamiltonian(n, theta, b.edges as f64, b.triangles as f64).to_bits()
        );
    }
}

#[test]
fn maximum_entropy_kkt() {
    // ln P_can must lie in span{1, t(F1), t(F3)}: any flow preserving the
    // normalisation and both means is then entropy-stationary.
    // n = 3 has no interior count pair.
    assert!(interior_cells(3).is_empty());
    for n in 4..=5usize {
        let cells = interior_cells(n);
        let (e, t) = cells[cells.len() / 2];
        let theta = calibrate_theta_exact(n, densities_of_counts(n, e, t)).unwrap();
        let lp = brute_log_probs(n, theta);
        let nf = n as f64;
        let rows: Vec<[f64; 4]> =
            lp.iter().map(|&(e, t, l)| [1.0, 2.0 * e as f64 / (nf * nf), 6.0 * t as f64 / nf.powi(3), l]).collect();
        let mut ata = [[0.0; 3]; 3];
        let mut atb = [0.0; 3];
        for r in &rows {
            for a in 0..3 {
                atb[a] += r[a] * r[3];
                for b in 0..3 {
                    ata[a][b] += r[a] * r[b];
                }
            }
        }
        let x = solve3(ata, atb);
        let worst = rows.iter().map(|r| (x[0] + x[1] * r[1] + x[2] * r[2] - r[3]).abs()).fold(0.0, f64::max);
        assert!(worst < 1e-8, "n = {n}: {worst:e}");
    }
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> [f64; 3] {
    for c in 0..3 {
        let p = (c..3).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, p);
        b.swap(c, p);
        for r in (c + 1)..3 {
            let f = a[r][c] / a[c][c];
            for k in c..3 {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = [0.0; 3];
    for c in (0..3).rev() {
        x[c] = (b[c] - (c + 1..3).map(|k| a[c][k] * x[k]).sum::<f64>()) / a[c][c];
    }
    x
}

#[test]
fn graphon_consistency() {
    for n in 1..=5 {
        for g in all_graphs(n).unwrap() {
            let h = finite_graph_to_graphon(&g);
            assert!((hom_density(Motif::Edge, &g) - h.edge_density()).abs() < 1e-15);
            assert!((hom_density(Motif::Triangle, &g) - h.triangle_density()).abs() < 1e-15);
        }
    }
}

#[test]
fn microcanonical_uniformity() {
    let n = 5;
    let theta = MultiplierPair::new(0.4, -0.9);
    let lp = brute_log_probs(n, theta);
    for (e, t, _) in census(n).unwrap().support() {
        let inside: Vec<f64> = lp.iter().filter(|x| x.0 == e && x.1 == t).map(|x| x.2).collect();
        let z: f64 = inside.iter().map(|l| l.exp()).sum();
        for l in &inside {
            assert!((l.exp() / z - 1.0 / inside.len() as f64).abs() < 1e-12);
        }
    }
}

#[test]
fn graph_text_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for n in [1usize, 2, 7, 64, 65, 100] {
        let g = random_graph(&mut rng, n, 0.3);
        let back: DenseGraph = g.to_string().parse().unwrap();
        assert_eq!(g, back);
    }
    assert!("3\n12\n0\n".parse::<DenseGraph>().is_err());
    assert!("x".parse::<DenseGraph>().is_err());
}
