use erline::ensembles::{
    calibrate_theta_exact_report, census, densities_of_counts, mcmc_calibrate_with, mcmc_sample, partition_exact,
    relative_entropy_exact, McmcConfig, RobbinsMonro, WEIGHTED_CAPACITY,
};
use erline::entropy::{bernoulli_entropy, entropy_derivative, f_quotient, f_quotient_min};
use erline::perturb::solve_microcanonical;
use erline::scaling::{curve_sweep, region_classify};
use erline::{ConstraintPair, Error, MultiplierPair, Side, SolveMode};

use crate::args::*;
use crate::output::Table;
use crate::CliError;

/// A command's records and the tolerances it ran with.
pub struct Outcome {
    pub table: Table,
    pub tolerances: String,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Lib(Error::Domain(msg.into()))
}

pub fn entropy(a: &EntropyArgs) -> Result<Outcome, CliError> {
    let wants_u = !a.u.is_empty();
    let wants_t1 = !a.t1.is_empty();
    if wants_u == wants_t1 {
        return Err(usage("give either --u or --t1"));
    }
    if wants_u {
        if a.fmin || !a.x.is_empty() {
            return Err(usage("--fmin and --x go with --t1, not --u"));
        }
        let mut table = Table::new(&["u", "k", "value"]);
        for &u in &a.u {
            for &k in &a.k {
                let v = if k == 0 { bernoulli_entropy(u)? } else { entropy_derivative(u, k)? };
                table.push(vec![u.into(), k.into(), v.into()]);
            }
        }
        return Ok(Outcome { table, tolerances: "closed_form".into() });
    }
    if a.fmin == !a.x.is_empty() {
        return Err(usage("with --t1 give exactly one of --x or --fmin"));
    }
    if a.fmin {
        let mut table = Table::new(&["t1", "y_star", "value", "grid_unique"]);
        for &t1 in &a.t1 {
            let m = f_quotient_min(t1)?;
            table.push(vec![t1.into(), m.y_star.into(), m.value.into(), m.grid_unique.into()]);
        }
        return Ok(Outcome { table, tolerances: "golden_section+bisection".into() });
    }
    let mut table = Table::new(&["t1", "x", "f_quotient"]);
    for &t1 in &a.t1 {
        for &x in &a.x {
            table.push(vec![t1.into(), x.into(), f_quotient(t1, x)?.into()]);
        }
    }
    Ok(Outcome { table, tolerances: "closed_form".into() })
}

pub fn default_eps_grid() -> Vec<f64> {
    (0..7).map(|k| 10f64.powf(-6.0 + 0.5 * k as f64)).collect()
}

pub fn curve(a: &CurveArgs) -> Result<Outcome, CliError> {
    let side: Side = a.side.into();
    let t1 = if a.t1.is_empty() {
        match side {
            Side::Below => vec![0.5, 0.6, 0.7, 0.8],
            Side::Above => vec![0.55, 0.6, 0.7, 0.8],
        }
    } else {
        a.t1.clone()
    };
    let eps = if a.eps.is_empty() { default_eps_grid() } else { a.eps.clone() };
    if let Some(bad) = eps.iter().find(|e| !(**e > 0.0 && **e <= 0.1)) {
        return Err(usage(format!("eps = {bad} must lie in (0, 0.1]")));
    }
    let rows = curve_sweep(&t1, &eps, side)?;
    let mut table = Table::new(&["t1", "eps", "side", "pred", "numeric", "rel_err", "exponent", "lower_bound"]);
    for r in rows {
        table.push(vec![
            r.t1.into(),
            r.eps.into(),
            r.side.to_string().into(),
            r.pred.into(),
            r.numeric.into(),
            r.rel_err.into(),
            r.exponent.into(),
            r.lower_bound.into(),
        ]);
    }
    Ok(Outcome { table, tolerances: "constraint_residual=1e-10".into() })
}

pub fn solve(a: &SolveArgs) -> Result<Outcome, CliError> {
    let mode = match a.mode {
        ModeArg::Exact => SolveMode::ExactConstraints,
        ModeArg::Reduced => SolveMode::Reduced,
        ModeArg::Auto if a.t2 < a.t1.powi(3) => SolveMode::Reduced,
        ModeArg::Auto => SolveMode::ExactConstraints,
    };
    let r = solve_microcanonical(a.t1, a.t2, mode)?;
    let mut table = Table::new(&[
        "t1",
        "t2_target",
        "eps",
        "mode",
        "lambda",
        "g11",
        "g12",
        "g22",
        "entropy",
        "entropy_excess",
        "k1",
        "k2",
        "k3",
        "case",
        "iterations",
    ]);
    let mode_name = match r.mode {
        SolveMode::ExactConstraints => "exact",
        SolveMode::Reduced => "reduced",
    };
    table.push(vec![
        r.t1.into(),
        r.t2_target.into(),
        r.eps().into(),
        mode_name.into(),
        r.ansatz.lambda.into(),
        r.ansatz.g11.into(),
        r.ansatz.g12.into(),
        r.ansatz.g22.into(),
        r.entropy.into(),
        r.entropy_excess.into(),
        r.residuals.k1.into(),
        r.residuals.k2.into(),
        r.residuals.k3.into(),
        r.case_label.to_string().into(),
        r.iterations.into(),
    ]);
    Ok(Outcome { table, tolerances: "constraint_residual=1e-10".into() })
}

pub fn exact(a: &ExactArgs) -> Result<Outcome, CliError> {
    if let (Some(theta1), Some(theta2)) = (a.theta1, a.theta2) {
        let m = partition_exact(a.n, MultiplierPair::new(theta1, theta2))?;
        let mut table = Table::new(&["n", "theta1", "theta2", "psi_n", "mean_t1", "mean_t3", "var_t1", "cov_t1_t3", "var_t3"]);
        table.push(vec![
            a.n.into(),
            theta1.into(),
            theta2.into(),
            m.psi_n.into(),
            m.mean_t[0].into(),
            m.mean_t[1].into(),
            m.cov_t[0][0].into(),
            m.cov_t[0][1].into(),
            m.cov_t[1][1].into(),
        ]);
        return Ok(Outcome { table, tolerances: "none".into() });
    }
    if let (Some(edges), Some(triangles)) = (a.edges, a.triangles) {
        // n = 8 can be counted but not calibrated, so only omega is reported.
        if a.n > WEIGHTED_CAPACITY {
            let omega = census(a.n)?.count(edges, triangles);
            if omega == 0 {
                return Err(Error::NonGraphical { n: a.n, edges, triangles }.into());
            }
            let mut table = Table::new(&["n", "edges", "triangles", "omega"]);
            table.push(vec![a.n.into(), edges.into(), triangles.into(), omega.into()]);
            return Ok(Outcome { table, tolerances: "none".into() });
        }
        let mut table = Table::new(&[
            "n",
            "edges",
            "triangles",
            "omega",
            "status",
            "theta1",
            "theta2",
            "psi_n",
            "mean_t1",
            "mean_t3",
            "s_n",
            "s_n_full_sum",
            "s_n_scaled",
        ]);
        match relative_entropy_exact(a.n, edges, triangles) {
            Ok(s) => table.push(vec![
                s.n.into(),
                s.edges.into(),
                s.triangles.into(),
                s.omega.into(),
                "interior".into(),
                s.theta.theta1.into(),
                s.theta.theta2.into(),
                s.psi_n.into(),
                s.mean_t[0].into(),
                s.mean_t[1].into(),
                s.s_n.into(),
                s.s_n_full_sum.into(),
                s.s_n_scaled().into(),
            ]),
            // The count is still meaningful when the multipliers diverge.
            Err(Error::BoundaryConstraint { .. }) => {
                let omega = census(a.n)?.count(edges, triangles);
                let mut row = vec![a.n.into(), edges.into(), triangles.into(), omega.into(), "boundary".into()];
                row.extend(std::iter::repeat_n(f64::NAN.into(), 8));
                table.push(row);
            }
            Err(e) => return Err(e.into()),
        }
        return Ok(Outcome { table, tolerances: "newton=1e-10".into() });
    }
    let c = census(a.n)?;
    let mut table = Table::new(&["n", "edges", "triangles", "omega", "interior"]);
    for (e, t, count) in c.support() {
        table.push(vec![a.n.into(), e.into(), t.into(), count.into(), c.strictly_interior(e as f64, t as f64, 1e-9).into()]);
    }
    Ok(Outcome { table, tolerances: "hull=1e-9".into() })
}

pub fn mcmc(a: &McmcArgs) -> Result<Outcome, CliError> {
    let mut cfg = McmcConfig::new(a.n, MultiplierPair::new(a.theta1, a.theta2), a.steps, a.seed);
    cfg.burn_in = a.burn_in;
    cfg.batches = a.batches;
    cfg.chains = a.chains;
    let s = mcmc_sample(&cfg)?;
    let mut table = Table::new(&[
        "theta1",
        "theta2",
        "n",
        "steps",
        "seed",
        "mean_t1",
        "se_t1",
        "mean_t3",
        "se_t3",
        "mean_edge_density",
        "se_edge_density",
        "acceptance_rate",
    ]);
    table.push(vec![
        s.theta.theta1.into(),
        s.theta.theta2.into(),
        s.n.into(),
        s.steps.into(),
        s.seed.into(),
        s.mean_t1.into(),
        s.se_t1.into(),
        s.mean_t3.into(),
        s.se_t3.into(),
        s.mean_edge_density.into(),
        s.se_edge_density.into(),
        s.acceptance_rate.into(),
    ]);
    Ok(Outcome { table, tolerances: format!("batches={},burn_in={}", cfg.batches, cfg.burn_in_steps()) })
}

const CALIBRATE_COLUMNS: [&str; 13] = [
    "n",
    "method",
    "target_t1",
    "target_t3",
    "theta1",
    "theta2",
    "se_theta1",
    "se_theta2",
    "residual_t1",
    "residual_t3",
    "iterations",
    "polish_steps",
    "seed",
];

pub fn calibrate(a: &CalibrateArgs) -> Result<Outcome, CliError> {
    let target = match (a.t1, a.t3, a.edges, a.triangles) {
        (Some(t1), Some(t3), _, _) => [t1, t3],
        (_, _, Some(e), Some(t)) => densities_of_counts(a.n, e, t),
        _ => return Err(usage("give --t1/--t3 or --edges/--triangles")),
    };
    let use_exact = match a.method {
        MethodArg::Exact => true,
        MethodArg::Mcmc => false,
        MethodArg::Auto => a.n <= WEIGHTED_CAPACITY,
    };
    let mut table = Table::new(&CALIBRATE_COLUMNS);
    if use_exact {
        let c = calibrate_theta_exact_report(a.n, target)?;
        table.push(vec![
            a.n.into(),
            "exact".into(),
            target[0].into(),
            target[1].into(),
            c.theta.theta1.into(),
            c.theta.theta2.into(),
            0.0.into(),
            0.0.into(),
            c.residual[0].into(),
            c.residual[1].into(),
            c.iterations.into(),
            0usize.into(),
            "".into(),
        ]);
        return Ok(Outcome { table, tolerances: "newton=1e-10".into() });
    }
    let seed = a.seed.ok_or_else(|| usage("sampling-based calibration needs an explicit --seed"))?;
    if !(a.tol > 0.0) {
        return Err(usage("--tol must be positive"));
    }
    let opts = RobbinsMonro {
        iterations: a.iterations,
        sweep_steps: a.sweep_steps,
        final_steps: a.final_steps,
        tol: [a.tol, a.tol],
        ..RobbinsMonro::default()
    };
    let c = mcmc_calibrate_with(a.n, target, seed, &opts)?;
    table.push(vec![
        a.n.into(),
        "mcmc".into(),
        target[0].into(),
        target[1].into(),
        c.theta.theta1.into(),
        c.theta.theta2.into(),
        c.se_theta[0].into(),
        c.se_theta[1].into(),
        c.residual[0].into(),
        c.residual[1].into(),
        c.iterations.into(),
        c.polish_steps.into(),
        seed.into(),
    ]);
    Ok(Outcome { table, tolerances: format!("residual={:e}", a.tol) })
}

pub fn classify(a: &ClassifyArgs) -> Result<Outcome, CliError> {
    if !(a.tol >= 0.0) {
        return Err(usage("--tol must be non-negative"));
    }
    let pairs: Vec<(f64, f64)> = match a.grid {
        Some(0) => return Err(usage("--grid must be at least 1")),
        Some(g) => (0..=g)
            .flat_map(|i| (0..=g).map(move |j| (i as f64 / g as f64, j as f64 / g as f64)))
            .collect(),
        None => {
            if a.t1.is_empty() || a.t1.len() != a.t2.len() {
                return Err(usage("--t1 and --t2 must be non-empty lists of equal length"));
            }
            a.t1.iter().copied().zip(a.t2.iter().copied()).collect()
        }
    };
    let mut table = Table::new(&["t1", "t2", "verdict", "admissible", "on_er_line"]);
    for (t1, t2) in pairs {
        let c = ConstraintPair::with_tol(t1, t2, a.tol);
        let verdict = region_classify(&c, a.tol);
        table.push(vec![t1.into(), t2.into(), verdict.to_string().into(), c.admissible.into(), c.on_er_line.into()]);
    }
    Ok(Outcome { table, tolerances: format!("line={:e}", a.tol) })
}
