use erline::ensembles::*;
use erline::entropy::entropy_derivative;
use erline::{Error, MultiplierPair};

fn er_means(n: usize, p: f64) -> [f64; 2] {
    let nf = n as f64;
    let pairs = nf * (nf - 1.0) / 2.0;
    let trip = nf * (nf - 1.0) * (nf - 2.0) / 6.0;
    [2.0 * pairs * p / (nf * nf), 6.0 * trip * p.powi(3) / nf.powi(3)]
}

#[test]
fn deterministic_given_seed() {
    let theta = MultiplierPair::new(0.1, -0.4);
    let mut cfg = McmcConfig::new(20, theta, 50_000, 42);
    let a = mcmc_sample(&cfg).unwrap();
    let b = mcmc_sample(&cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.mean_t1.to_bits(), b.mean_t1.to_bits());
    cfg.chains = 4;
    let c = mcmc_sample(&cfg).unwrap();
    assert_eq!(c, mcmc_sample(&cfg).unwrap());
    cfg.seed = 43;
    assert_ne!(c.mean_t1, mcmc_sample(&cfg).unwrap().mean_t1);
}

#[test]
fn independent_edges_at_large_n() {
    let theta = MultiplierPair::new(0.5, 0.0);
    let s = mcmc_sample(&McmcConfig::new(100, theta, 2_000_000, 1)).unwrap();
    let p = 1f64.exp() / (1.0 + 1f64.exp());
    assert!((p - 0.7310586).abs() < 5e-8);
    assert!(
        (s.mean_edge_density - p).abs() <= 4.0 * s.se_edge_density,
        "{} vs {p}, se {}",
        s.mean_edge_density,
        s.se_edge_density
    );
    assert!((s.mean_t1 - s.mean_edge_density * 99.0 / 100.0).abs() < 1e-15);
}

#[test]
fn uniform_graph_means() {
    let n = 30;
    let mut cfg = McmcConfig::new(n, MultiplierPair::default(), 1_000_000, 5);
    cfg.chains = 2;
    let s = mcmc_sample(&cfg).unwrap();
    let m = er_means(n, 0.5);
    assert!((s.mean_edge_density - 0.5).abs() <= 4.0 * s.se_edge_density);
    assert!((s.mean_t3 - m[1]).abs() <= 4.0 * s.se_t3, "{} vs {}", s.mean_t3, m[1]);
    assert!((s.acceptance_rate - 1.0).abs() < 1e-12);
}

#[test]
fn config_errors() {
    let theta = MultiplierPair::default();
    assert!(mcmc_sample(&McmcConfig::new(2, theta, 100, 0)).is_err());
    assert!(mcmc_sample(&McmcConfig::new(5, theta, 0, 0)).is_err());
    assert!(mcmc_sample(&McmcConfig::new(5, theta, 10, 0)).is_err());
    assert!(EdgeFlipChain::new(5, MultiplierPair::new(f64::NAN, 0.0), 0, 0).is_err());
    assert_eq!(McmcConfig::new(7, theta, 1, 0).burn_in_steps(), 490);
}

/// Each of the eight labelled graphs on three vertices, visited by a long
/// chain, against its exact canonical probability. Errors use batch means
/// of the state indicators so autocorrelation is accounted for.
#[test]
fn stationary_distribution_on_three_vertices() {
    let theta = MultiplierPair::new(-0.3, 0.8);
    let states = all_graphs(3).unwrap();
    let h: Vec<f64> = states
        .iter()
        .map(|g| {
            let c = g.subgraph_counts();
            hamiltonian(3, theta, c.edges as f64, c.triangles as f64)
        })
        .collect();
    let z: f64 = h.iter().map(|x| x.exp()).sum();
    let exact: Vec<f64> = h.iter().map(|x| x.exp() / z).collect();

    let index = |g: &DenseGraph| {
        (g.has_edge(0, 1) as usize) | (g.has_edge(0, 2) as usize) << 1 | (g.has_edge(1, 2) as usize) << 2
    };
    let mut by_index = [0.0; 8];
    for (g, p) in states.iter().zip(&exact) {
        by_index[index(g)] = *p;
    }

    let mut chain = EdgeFlipChain::new(3, theta, 99, 0).unwrap();
    let steps = 10_000_000u64;
    let batches = 100u64;
    let per = steps / batches;
    let mut batch_freq = vec![[0.0f64; 8]; batches as usize];
    for b in 0..batches as usize {
        for _ in 0..per {
            chain.step();
            batch_freq[b][index(chain.graph())] += 1.0 / per as f64;
        }
    }
    for s in 0..8 {
        let xs: Vec<f64> = batch_freq.iter().map(|f| f[s]).collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
        let se = (var / xs.len() as f64).sqrt();
        assert!((mean - by_index[s]).abs() <= 4.0 * se + 1e-12, "state {s}: {mean} vs {}, se {se}", by_index[s]);
    }
}

#[test]
fn rm_recovers_er_fixed_point() {
    let n = 30;
    let p = 0.4;
    let cal = mcmc_calibrate_with(n, er_means(n, p), 3, &RobbinsMonro::default()).unwrap();
    let th1 = entropy_derivative(p, 1).unwrap();
    assert!(cal.residual[0].abs() <= 5e-3 && cal.residual[1].abs() <= 5e-3);
    assert!((cal.theta.theta1 - th1).abs() < 0.05, "{:?}", cal.theta);
    assert!(cal.theta.theta2.abs() < 0.15, "{:?}", cal.theta);
    assert!(cal.se_theta.iter().all(|s| s.is_finite() && *s > 0.0));
}

#[test]
fn rm_agrees_with_exact_at_seven() {
    let n = 7;
    let truth = MultiplierPair::new(0.2, -0.5);
    let target = partition_exact(n, truth).unwrap().mean_t;
    let exact = calibrate_theta_exact(n, target).unwrap();
    assert!((exact.theta1 - truth.theta1).abs() < 1e-8 && (exact.theta2 - truth.theta2).abs() < 1e-8);
    let opts = RobbinsMonro { sweep_steps: Some(20_000), final_steps: Some(4_000_000), ..RobbinsMonro::default() };
    let cal = mcmc_calibrate_with(n, target, 11, &opts).unwrap();
    for k in 0..2 {
        let (got, want) = if k == 0 { (cal.theta.theta1, exact.theta1) } else { (cal.theta.theta2, exact.theta2) };
        assert!((got - want).abs() <= 3.0 * cal.se_theta[k], "component {k}: {got} vs {want}, se {}", cal.se_theta[k]);
    }
}

#[test]
fn rm_on_er_line_at_hundred() {
    let n = 100;
    let cal = mcmc_calibrate_with(n, er_means(n, 0.6), 8, &RobbinsMonro::default()).unwrap();
    assert!(cal.residual[0].abs() <= 5e-3 && cal.residual[1].abs() <= 5e-3);
    assert!(cal.theta.theta2.abs() <= 4.0 * cal.se_theta[1] + 0.02, "{:?} se {:?}", cal.theta, cal.se_theta);
}

#[test]
fn rm_rejects_bad_targets() {
    assert!(matches!(mcmc_calibrate(10, [1.5, 0.1], 0), Err(Error::Domain(_))));
}
