//! Metropolis edge-flip sampling of the canonical ensemble and
//! Robbins–Monro calibration of its multipliers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::exact::{densities_of_counts, hamiltonian};
use super::graph::DenseGraph;
use crate::entropy::ent_d1;
use crate::error::{Error, Result};
use crate::scaling::MultiplierPair;

/// A single Metropolis chain over labelled graphs on `n` vertices.
///
/// Proposals pick a uniformly random vertex pair and flip it; the triangle
/// count changes by the size of the pair's common neighbourhood.
#[derive(Debug, Clone)]
pub struct EdgeFlipChain {
    graph: DenseGraph,
    edges: u64,
    triangles: u64,
    theta: MultiplierPair,
    rng: ChaCha8Rng,
    accepted: u64,
    proposed: u64,
}

fn chain_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

impl EdgeFlipChain {
    /// Start from an Erdős–Rényi graph at the edge probability that `θ1`
    /// alone would select. `stream` separates chains sharing a seed.
    pub fn new(n: usize, theta: MultiplierPair, seed: u64, stream: u64) -> Result<Self> {
        if n < 3 {
            return Err(Error::domain(format!("sampling needs n >= 3, got {n}")));
        }
        if !(theta.theta1.is_finite() && theta.theta2.is_finite()) {
            return Err(Error::domain("multipliers must be finite"));
        }
        let mut rng = chain_rng(seed, stream);
        let p = 1.0 / (1.0 + (-2.0 * theta.theta1).exp());
        let mut graph = DenseGraph::empty(n)?;
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.random::<f64>() < p {
                    graph.set_edge(i, j, true);
                }
            }
        }
        Ok(Self::from_graph(graph, theta, rng))
    }

    fn from_graph(graph: DenseGraph, theta: MultiplierPair, rng: ChaCha8Rng) -> Self {
        let c = graph.subgraph_counts();
        Self { edges: c.edges, triangles: c.triangles, graph, theta, rng, accepted: 0, proposed: 0 }
    }

    /// Start from a given graph.
    pub fn with_graph(graph: DenseGraph, theta: MultiplierPair, seed: u64, stream: u64) -> Result<Self> {
        if graph.n() < 3 {
            return Err(Error::domain("sampling needs n >= 3"));
        }
        Ok(Self::from_graph(graph, theta, chain_rng(seed, stream)))
    }

    pub fn graph(&self) -> &DenseGraph {
        &self.graph
    }

    pub fn counts(&self) -> (u64, u64) {
        (self.edges, self.triangles)
    }

    pub fn theta(&self) -> MultiplierPair {
        self.theta
    }

    pub fn set_theta(&mut self, theta: MultiplierPair) {
        self.theta = theta;
    }

    pub fn acceptance_rate(&self) -> f64 {
        self.accepted as f64 / self.proposed.max(1) as f64
    }

    /// One proposal; returns whether it was accepted.
    #[inline]
    pub fn step(&mut self) -> bool {
        let n = self.graph.n();
        let i = self.rng.random_range(0..n);
        let mut j = self.rng.random_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let common = self.graph.common_neighbours(i, j);
        let sign = if self.graph.has_edge(i, j) { -1.0 } else { 1.0 };
        let dh = sign * hamiltonian(n, self.theta, 1.0, common as f64);
        self.proposed += 1;
        let accept = dh >= 0.0 || self.rng.random::<f64>() < dh.exp();
        if accept {
            self.graph.toggle_edge(i, j);
            if sign > 0.0 {
                self.edges += 1;
                self.triangles += common;
            } else {
                self.edges -= 1;
                self.triangles -= common;
            }
            self.accepted += 1;
        }
        accept
    }

    /// Current hom densities `(t(F1), t(F3))`.
    pub fn densities(&self) -> [f64; 2] {
        densities_of_counts(self.graph.n(), self.edges, self.triangles)
    }
}

/// Sampler settings. `steps` counts proposals per chain after burn-in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McmcConfig {
    pub n: usize,
    pub theta: MultiplierPair,
    pub steps: u64,
    pub seed: u64,
    /// Defaults to `10·n²` proposals.
    pub burn_in: Option<u64>,
    pub batches: usize,
    pub chains: usize,
}

impl McmcConfig {
    pub fn new(n: usize, theta: MultiplierPair, steps: u64, seed: u64) -> Self {
        Self { n, theta, steps, seed, burn_in: None, batches: 32, chains: 1 }
    }

    pub fn burn_in_steps(&self) -> u64 {
        self.burn_in.unwrap_or(10 * (self.n * self.n) as u64)
    }
}

/// Means and batch-means standard errors of a sampling run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McmcSummary {
    pub theta: MultiplierPair,
    pub n: usize,
    pub steps: u64,
    pub seed: u64,
    pub mean_t1: f64,
    pub se_t1: f64,
    pub mean_t3: f64,
    pub se_t3: f64,
    /// Mean of `edges / C(n, 2)`.
    pub mean_edge_density: f64,
    pub se_edge_density: f64,
    pub acceptance_rate: f64,
    /// Per-sample covariance of `(t(F1), t(F3))`.
    pub cov_t: [[f64; 2]; 2],
    /// Estimated covariance of the two means, from batch means.
    pub cov_mean: [[f64; 2]; 2],
}

struct ChainRun {
    batch_means: Vec<[f64; 2]>,
    batch_sizes: Vec<u64>,
    moments: [f64; 5],
    acceptance: f64,
}

fn run_chain(cfg: &McmcConfig, stream: u64) -> Result<ChainRun> {
    let mut chain = EdgeFlipChain::new(cfg.n, cfg.theta, cfg.seed, stream)?;
    for _ in 0..cfg.burn_in_steps() {
        chain.step();
    }
    let b = cfg.batches as u64;
    let per = cfg.steps / b;
    let mut batch_means = Vec::with_capacity(cfg.batches);
    let mut batch_sizes = Vec::with_capacity(cfg.batches);
    // Running sums of t1, t3, t1², t1·t3, t3² for the per-sample covariance.
    let mut mom = [0.0f64; 5];
    for k in 0..b {
        let len = if k + 1 == b { cfg.steps - per * (b - 1) } else { per };
        let mut s = [0.0f64; 2];
        for _ in 0..len {
            chain.step();
            let d = chain.densities();
            s[0] += d[0];
            s[1] += d[1];
            mom[0] += d[0];
            mom[1] += d[1];
            mom[2] += d[0] * d[0];
            mom[3] += d[0] * d[1];
            mom[4] += d[1] * d[1];
        }
        let l = len.max(1) as f64;
        batch_means.push([s[0] / l, s[1] / l]);
        batch_sizes.push(len);
    }
    Ok(ChainRun { batch_means, batch_sizes, moments: mom, acceptance: chain.acceptance_rate() })
}

/// Sample the canonical ensemble at `cfg.theta`.
///
/// Independent chains run in parallel with streams derived from
/// `(seed, chain index)`; their batches are pooled in chain order, so the
/// summary is a deterministic function of the configuration.
pub fn mcmc_sample(cfg: &McmcConfig) -> Result<McmcSummary> {
    if cfg.steps == 0 || cfg.batches < 2 || cfg.chains == 0 {
        return Err(Error::domain("need steps >= 1, at least two batches and one chain"));
    }
    if cfg.steps < cfg.batches as u64 {
        return Err(Error::domain(format!("steps = {} is fewer than the {} batches", cfg.steps, cfg.batches)));
    }
    let runs: Vec<ChainRun> = (0..cfg.chains as u64)
        .into_par_iter()
        .map(|c| run_chain(cfg, c))
        .collect::<Result<_>>()?;

    let means: Vec<[f64; 2]> = runs.iter().flat_map(|r| r.batch_means.iter().copied()).collect();
    let sizes: Vec<f64> = runs.iter().flat_map(|r| r.batch_sizes.iter().map(|&s| s as f64)).collect();
    let total: f64 = sizes.iter().sum();
    let mut grand = [0.0; 2];
    for (m, w) in means.iter().zip(&sizes) {
        grand[0] += w * m[0];
        grand[1] += w * m[1];
    }
    grand = [grand[0] / total, grand[1] / total];

    let nb = means.len() as f64;
    let mut cov_mean = [[0.0; 2]; 2];
    for m in &means {
        let d = [m[0] - grand[0], m[1] - grand[1]];
        for a in 0..2 {
            for b in 0..2 {
                cov_mean[a][b] += d[a] * d[b] / ((nb - 1.0) * nb);
            }
        }
    }

    let mut mom = [0.0; 5];
    for r in &runs {
        for k in 0..5 {
            mom[k] += r.moments[k];
        }
    }
    let (e1, e3) = (mom[0] / total, mom[1] / total);
    let cov_t = [
        [mom[2] / total - e1 * e1, mom[3] / total - e1 * e3],
        [mom[3] / total - e1 * e3, mom[4] / total - e3 * e3],
    ];

    // t(F1) = 2e/n² and e/C(n,2) differ by the constant factor n/(n−1).
    let nf = cfg.n as f64;
    let to_edge = nf / (nf - 1.0);
    Ok(McmcSummary {
        theta: cfg.theta,
        n: cfg.n,
        steps: cfg.steps,
        seed: cfg.seed,
        mean_t1: grand[0],
        se_t1: cov_mean[0][0].sqrt(),
        mean_t3: grand[1],
        se_t3: cov_mean[1][1].sqrt(),
        mean_edge_density: grand[0] * to_edge,
        se_edge_density: cov_mean[0][0].sqrt() * to_edge,
        acceptance_rate: runs.iter().map(|r| r.acceptance).sum::<f64>() / runs.len() as f64,
        cov_t,
        cov_mean,
    })
}

/// Robbins–Monro settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobbinsMonro {
    /// Gain numerator `a0` in `a_k = a0/(k + k0)`.
    pub a0: f64,
    pub k0: f64,
    pub iterations: usize,
    /// Proposals per iteration; defaults to `max(2000, 2·C(n,2))`.
    pub sweep_steps: Option<u64>,
    /// Proposals in the verification run; defaults to 50 sweeps.
    pub final_steps: Option<u64>,
    /// Accepted residual per mean component.
    pub tol: [f64; 2],
    /// Newton corrections allowed after averaging, each on a fresh
    /// verification run.
    pub polish_rounds: usize,
}

impl Default for RobbinsMonro {
    fn default() -> Self {
        Self { a0: 1.0, k0: 1.0, iterations: 400, sweep_steps: None, final_steps: None, tol: [5e-3, 5e-3], polish_rounds: 3 }
    }
}

/// Outcome of [`mcmc_calibrate_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McmcCalibration {
    pub theta: MultiplierPair,
    /// Verification-run means minus the target.
    pub residual: [f64; 2],
    /// Delta-method standard errors of `theta`.
    pub se_theta: [f64; 2],
    pub iterations: usize,
    /// Newton corrections applied after averaging.
    pub polish_steps: usize,
    pub verification: McmcSummary,
}

fn solve2(j: [[f64; 2]; 2], r: [f64; 2]) -> Option<[f64; 2]> {
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    if !(det.abs() > 1e-300) || !det.is_finite() {
        return None;
    }
    Some([(j[1][1] * r[0] - j[0][1] * r[1]) / det, (j[0][0] * r[1] - j[1][0] * r[0]) / det])
}

/// Calibrate with default settings and return only the multipliers.
pub fn mcmc_calibrate(n: usize, t_target: [f64; 2], seed: u64) -> Result<MultiplierPair> {
    mcmc_calibrate_with(n, t_target, seed, &RobbinsMonro::default()).map(|c| c.theta)
}

/// Stochastic approximation `θ_{k+1} = θ_k − a_k·P_k(⟨t⟩_k − t_target)`.
///
/// `⟨t⟩_k` is the mean over one sweep of a persistent chain and `P_k` is the
/// inverse of `n²·Cov(t)` estimated from all sweeps so far; the edge and
/// triangle densities are strongly correlated, and without this
/// preconditioning the triangle multiplier barely moves. The returned
/// multiplier is the Polyak average over the second half of the iterations,
/// checked by an independent run and, if the check fails, corrected by up
/// to `polish_rounds` Newton steps on further runs.
///
/// Near the region where equivalence breaks the chain can be metastable; a
/// failed verification is reported as [`Error::NonConvergence`] with the
/// diagnostics rather than retried.
pub fn mcmc_calibrate_with(n: usize, t_target: [f64; 2], seed: u64, opts: &RobbinsMonro) -> Result<McmcCalibration> {
    if !(t_target[0] > 0.0 && t_target[0] < 1.0 && t_target[1] >= 0.0 && t_target[1] < 1.0) {
        return Err(Error::domain(format!("target {t_target:?} is outside the unit square")));
    }
    let nf = n as f64;
    let pairs = (n * n.saturating_sub(1) / 2) as u64;
    let sweep = opts.sweep_steps.unwrap_or((2 * pairs).max(2000));
    let p0 = (t_target[0] * nf / (nf - 1.0)).clamp(1e-6, 1.0 - 1e-6);
    let mut theta = MultiplierPair { theta1: ent_d1(p0), theta2: 0.0 };
    let mut chain = EdgeFlipChain::new(n, theta, seed, 0)?;
    for _ in 0..10 * n * n {
        chain.step();
    }

    let n2 = nf * nf;
    let mut mom = [0.0f64; 5];
    let mut count = 0.0;
    let mut avg = [0.0f64; 2];
    let mut avg_count = 0.0;
    let half = opts.iterations / 2;
    for k in 0..opts.iterations {
        chain.set_theta(theta);
        let mut s = [0.0f64; 2];
        for _ in 0..sweep {
            chain.step();
            let d = chain.densities();
            s[0] += d[0];
            s[1] += d[1];
            mom[0] += d[0];
            mom[1] += d[1];
            mom[2] += d[0] * d[0];
            mom[3] += d[0] * d[1];
            mom[4] += d[1] * d[1];
        }
        count += sweep as f64;
        let est = [s[0] / sweep as f64, s[1] / sweep as f64];
        let (e1, e3) = (mom[0] / count, mom[1] / count);
        let ridge = 1e-12;
        let j = [
            [n2 * (mom[2] / count - e1 * e1) + ridge, n2 * (mom[3] / count - e1 * e3)],
            [n2 * (mom[3] / count - e1 * e3), n2 * (mom[4] / count - e3 * e3) + ridge],
        ];
        let r = [est[0] - t_target[0], est[1] - t_target[1]];
        let dir = solve2(j, r).unwrap_or(r);
        let a = opts.a0 / (k as f64 + opts.k0);
        theta = MultiplierPair { theta1: theta.theta1 - a * dir[0], theta2: theta.theta2 - a * dir[1] };
        if !(theta.theta1.is_finite() && theta.theta2.is_finite()) || theta.theta1.abs().max(theta.theta2.abs()) > 1e3 {
            return Err(Error::NonConvergence(format!(
                "multipliers diverged to ({}, {}) after {} iterations",
                theta.theta1, theta.theta2, k + 1
            )));
        }
        if k >= half {
            avg[0] += theta.theta1;
            avg[1] += theta.theta2;
            avg_count += 1.0;
        }
    }
    let mut theta = MultiplierPair { theta1: avg[0] / avg_count, theta2: avg[1] / avg_count };

    // Newton polish on long runs: the average can lag along the weakly
    // identified direction, where small mean residuals need large moves.
    let mut round = 0u64;
    let (ver, residual) = loop {
        let mut cfg = McmcConfig::new(n, theta, opts.final_steps.unwrap_or(50 * sweep), seed);
        cfg.seed = seed.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_add(round);
        let ver = mcmc_sample(&cfg)?;
        let residual = [ver.mean_t1 - t_target[0], ver.mean_t3 - t_target[1]];
        let done = residual[0].abs() <= opts.tol[0] && residual[1].abs() <= opts.tol[1];
        if done || round as usize >= opts.polish_rounds {
            break (ver, residual);
        }
        let j = [[n2 * ver.cov_t[0][0], n2 * ver.cov_t[0][1]], [n2 * ver.cov_t[1][0], n2 * ver.cov_t[1][1]]];
        let Some(step) = solve2(j, residual) else { break (ver, residual) };
        theta = MultiplierPair { theta1: theta.theta1 - step[0], theta2: theta.theta2 - step[1] };
        round += 1;
    };

    let j = [[n2 * ver.cov_t[0][0], n2 * ver.cov_t[0][1]], [n2 * ver.cov_t[1][0], n2 * ver.cov_t[1][1]]];
    let se_theta = inverse(j)
        .map(|ji| {
            let c = ver.cov_mean;
            let v = |a: usize| {
                let mut s = 0.0;
                for p in 0..2 {
                    for q in 0..2 {
                        s += ji[a][p] * c[p][q] * ji[a][q];
                    }
                }
                s.max(0.0).sqrt()
            };
            [v(0), v(1)]
        })
        .unwrap_or([f64::INFINITY; 2]);

    let out = McmcCalibration {
        theta,
        residual,
        se_theta,
        iterations: opts.iterations,
        polish_steps: round as usize,
        verification: ver,
    };
    if residual[0].abs() > opts.tol[0] || residual[1].abs() > opts.tol[1] {
        return Err(Error::NonConvergence(format!(
            "Robbins-Monro calibration ended at theta = ({}, {}) with mean residuals ({:e}, {:e}) \
             (standard errors {:e}, {:e}); the chain may be metastable",
            theta.theta1, theta.theta2, residual[0], residual[1], ver.se_t1, ver.se_t3
        )));
    }
    Ok(out)
}

fn inverse(j: [[f64; 2]; 2]) -> Option<[[f64; 2]; 2]> {
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    if !(det.abs() > 1e-300) || !det.is_finite() {
        return None;
    }
    Some([[j[1][1] / det, -j[0][1] / det], [-j[1][0] / det, j[0][0] / det]])
}
