//! Exact canonical and microcanonical ensembles by enumeration.

use super::census::{census, check_capacity, enumerate, Census, WEIGHTED_CAPACITY};
use super::graph::{density_from_count, Motif};
use crate::entropy::ent_d1;
use crate::error::{Error, Result};
use crate::scaling::MultiplierPair;

/// Hom densities `(t(F1), t(F3))` of an `(edges, triangles)` pair.
pub fn densities_of_counts(n: usize, edges: u64, triangles: u64) -> [f64; 2] {
    [density_from_count(Motif::Edge, edges, n), density_from_count(Motif::Triangle, triangles, n)]
}

/// `H = n²(θ1 t(F1) + θ2 t(F3)) = 2θ1·edges + 6θ2·triangles/n`.
pub fn hamiltonian(n: usize, theta: MultiplierPair, edges: f64, triangles: f64) -> f64 {
    2.0 * theta.theta1 * edges + 6.0 * theta.theta2 * triangles / n as f64
}

/// Exact canonical quantities at a given multiplier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicalMoments {
    /// `n⁻² ln Z`.
    pub psi_n: f64,
    /// `(⟨t(F1)⟩, ⟨t(F3)⟩)`.
    pub mean_t: [f64; 2],
    /// Covariance matrix of `(t(F1), t(F3))`.
    pub cov_t: [[f64; 2]; 2],
}

fn moments_from_census(c: &Census, theta: MultiplierPair) -> CanonicalMoments {
    let n = c.n();
    let logw: Vec<(f64, [f64; 2])> = c
        .support()
        .map(|(e, t, mult)| {
            let w = (mult as f64).ln() + hamiltonian(n, theta, e as f64, t as f64);
            (w, densities_of_counts(n, e, t))
        })
        .collect();
    let max = logw.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let mut z = 0.0;
    let mut m = [0.0; 2];
    for (w, d) in &logw {
        let p = (w - max).exp();
        z += p;
        m[0] += p * d[0];
        m[1] += p * d[1];
    }
    let mean = [m[0] / z, m[1] / z];
    let mut cov = [[0.0; 2]; 2];
    for (w, d) in &logw {
        let p = (w - max).exp() / z;
        let dv = [d[0] - mean[0], d[1] - mean[1]];
        for a in 0..2 {
            for b in 0..2 {
                cov[a][b] += p * dv[a] * dv[b];
            }
        }
    }
    let n2 = (n * n) as f64;
    CanonicalMoments { psi_n: (max + z.ln()) / n2, mean_t: mean, cov_t: cov }
}

/// `ψ_n` and the canonical means by exhaustive summation, `n ≤ 7`.
pub fn partition_exact(n: usize, theta: MultiplierPair) -> Result<CanonicalMoments> {
    check_capacity(n, WEIGHTED_CAPACITY, "exact partition functions")?;
    check_theta(theta)?;
    Ok(moments_from_census(census(n)?, theta))
}

fn check_theta(theta: MultiplierPair) -> Result<()> {
    if theta.theta1.is_finite() && theta.theta2.is_finite() {
        Ok(())
    } else {
        Err(Error::domain("multipliers must be finite"))
    }
}

/// Outcome of [`calibrate_theta_exact_report`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactCalibration {
    pub theta: MultiplierPair,
    pub residual: [f64; 2],
    pub iterations: usize,
}

const NEWTON_TOL: f64 = 1e-10;
const NEWTON_MAX_ITER: usize = 200;
const THETA_BOUND: f64 = 1e3;

/// Multipliers whose exact canonical means equal `t_target`.
pub fn calibrate_theta_exact(n: usize, t_target: [f64; 2]) -> Result<MultiplierPair> {
    calibrate_theta_exact_report(n, t_target).map(|c| c.theta)
}

/// Damped Newton on the moment map `θ ↦ ⟨t⟩_θ`, whose Jacobian is
/// `n²·Cov(t)`. Each step is halved until the residual norm drops.
///
/// Targets on or outside the boundary of the convex hull of achievable
/// densities have no finite solution; they are reported as divergence.
pub fn calibrate_theta_exact_report(n: usize, t_target: [f64; 2]) -> Result<ExactCalibration> {
    check_capacity(n, WEIGHTED_CAPACITY, "exact calibration")?;
    let c = census(n)?;
    let nf = n as f64;
    let (e_star, t_star) = (t_target[0] * nf * nf / 2.0, t_target[1] * nf * nf * nf / 6.0);
    if !c.strictly_interior(e_star, t_star, 1e-9) {
        return Err(Error::NonConvergence(format!(
            "target densities ({}, {}) are not interior to the mean region for n = {n}; theta diverges",
            t_target[0], t_target[1]
        )));
    }
    let p0 = (t_target[0] * nf / (nf - 1.0)).clamp(1e-6, 1.0 - 1e-6);
    let mut theta = MultiplierPair { theta1: ent_d1(p0), theta2: 0.0 };
    let resid = |m: &CanonicalMoments| [m.mean_t[0] - t_target[0], m.mean_t[1] - t_target[1]];
    let norm = |r: [f64; 2]| r[0].hypot(r[1]);
    let mut mom = moments_from_census(c, theta);
    let mut r = resid(&mom);
    for it in 0..NEWTON_MAX_ITER {
        if norm(r) <= 1e-3 * NEWTON_TOL {
            return Ok(ExactCalibration { theta, residual: r, iterations: it });
        }
        let n2 = nf * nf;
        let j = [[n2 * mom.cov_t[0][0], n2 * mom.cov_t[0][1]], [n2 * mom.cov_t[1][0], n2 * mom.cov_t[1][1]]];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if !(det.abs() > 0.0) {
            return Err(Error::NonConvergence(format!("singular moment Jacobian at theta = {theta:?}")));
        }
        let step = [(j[1][1] * r[0] - j[0][1] * r[1]) / det, (j[0][0] * r[1] - j[1][0] * r[0]) / det];
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let cand = MultiplierPair { theta1: theta.theta1 - scale * step[0], theta2: theta.theta2 - scale * step[1] };
            let m = moments_from_census(c, cand);
            let rc = resid(&m);
            if norm(rc) < norm(r) {
                theta = cand;
                mom = m;
                r = rc;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if theta.theta1.abs() > THETA_BOUND || theta.theta2.abs() > THETA_BOUND {
            return Err(Error::NonConvergence(format!("multipliers diverged to {theta:?}")));
        }
        if !accepted {
            // No descent possible: at the resolution limit.
            break;
        }
    }
    if norm(r) <= NEWTON_TOL {
        Ok(ExactCalibration { theta, residual: r, iterations: NEWTON_MAX_ITER })
    } else {
        Err(Error::NonConvergence(format!(
            "Newton calibration stalled at theta = ({}, {}) with residual ({:e}, {:e})",
            theta.theta1, theta.theta2, r[0], r[1]
        )))
    }
}

/// Exact microcanonical/canonical comparison at a hard count constraint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleSolution {
    pub n: usize,
    pub edges: u64,
    pub triangles: u64,
    pub theta: MultiplierPair,
    pub psi_n: f64,
    pub mean_t: [f64; 2],
    /// `S_n(P_mic | P_can)` from the single-graph identity.
    pub s_n: f64,
    /// The same quantity summed over every graph meeting the constraint.
    pub s_n_full_sum: f64,
    pub omega: u64,
}

impl EnsembleSolution {
    /// `n⁻² S_n`.
    pub fn s_n_scaled(&self) -> f64 {
        self.s_n / (self.n * self.n) as f64
    }
}

/// Compensated summation.
#[derive(Debug, Clone, Copy, Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum + self.comp
    }
}

/// Relative entropy of the microcanonical ensemble with respect to the
/// canonical ensemble calibrated to the same (scaled) constraint.
///
/// Hard constraints are integer count pairs. The canonical multipliers are
/// fitted so that the mean densities equal the constraint's densities.
pub fn relative_entropy_exact(n: usize, edges: u64, triangles: u64) -> Result<EnsembleSolution> {
    check_capacity(n, WEIGHTED_CAPACITY, "exact relative entropy")?;
    let c = census(n)?;
    let omega = c.count(edges, triangles);
    if omega == 0 {
        return Err(Error::NonGraphical { n, edges, triangles });
    }
    if !c.strictly_interior(edges as f64, triangles as f64, 1e-9) {
        return Err(Error::BoundaryConstraint { n, edges, triangles });
    }
    let target = densities_of_counts(n, edges, triangles);
    let theta = calibrate_theta_exact(n, target)?;
    let mom = moments_from_census(c, theta);
    let n2 = (n * n) as f64;
    let ln_omega = (omega as f64).ln();

    let h_star = hamiltonian(n, theta, edges as f64, triangles as f64);
    let s_n = -ln_omega - (h_star - n2 * mom.psi_n);

    let p_mic = 1.0 / omega as f64;
    let parts = enumerate(n, Neumaier::default, |acc, e, t, _| {
        if u64::from(e) == edges && u64::from(t) == triangles {
            let ln_can = hamiltonian(n, theta, f64::from(e), f64::from(t)) - n2 * mom.psi_n;
            acc.add(p_mic * (-ln_omega - ln_can));
        }
    });
    let mut total = Neumaier::default();
    for p in parts {
        total.add(p.sum);
        total.add(p.comp);
    }

    Ok(EnsembleSolution {
        n,
        edges,
        triangles,
        theta,
        psi_n: mom.psi_n,
        mean_t: mom.mean_t,
        s_n,
        s_n_full_sum: total.value(),
        omega,
    })
}
