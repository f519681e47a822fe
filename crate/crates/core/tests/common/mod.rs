//! Oracles shared by the integration tests. Each one is written
//! independently of the library code it checks.
#![allow(dead_code)]

/// Entropy written from scratch, `0 ln 0 = 0`.
pub fn entropy_oracle(u: f64) -> f64 {
    let xlogx = |x: f64| if x == 0.0 { 0.0 } else { x * x.ln() };
    0.5 * (xlogx(u) + xlogx(1.0 - u))
}

/// Central difference stencils for the first three derivatives.
fn stencil(f: &dyn Fn(f64) -> f64, x: f64, h: f64, k: u32) -> f64 {
    match k {
        1 => (f(x + h) - f(x - h)) / (2.0 * h),
        2 => (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h),
        3 => (f(x + 2.0 * h) - 2.0 * f(x + h) + 2.0 * f(x - h) - f(x - 2.0 * h)) / (2.0 * h * h * h),
        _ => unreachable!(),
    }
}

/// Ridders–Richardson extrapolation of central differences: the stencil is
/// evaluated on a shrinking step sequence and extrapolated to `h → 0` in
/// powers of `h²`; the entry with the smallest error estimate wins.
pub fn ridders(f: &dyn Fn(f64) -> f64, x: f64, h0: f64, k: u32) -> f64 {
    const CON: f64 = 1.4;
    const CON2: f64 = CON * CON;
    const NTAB: usize = 12;
    let mut a = [[0.0f64; NTAB]; NTAB];
    let mut h = h0;
    a[0][0] = stencil(f, x, h, k);
    let mut best = a[0][0];
    let mut err = f64::INFINITY;
    for i in 1..NTAB {
        h /= CON;
        a[0][i] = stencil(f, x, h, k);
        let mut fac = CON2;
        for j in 1..=i {
            a[j][i] = (a[j - 1][i] * fac - a[j - 1][i - 1]) / (fac - 1.0);
            fac *= CON2;
            let e = (a[j][i] - a[j - 1][i]).abs().max((a[j][i] - a[j - 1][i - 1]).abs());
            if e <= err {
                err = e;
                best = a[j][i];
            }
        }
        if (a[i][i] - a[i - 1][i - 1]).abs() >= 2.0 * err {
            break;
        }
    }
    best
}

/// `T1`, `T2` and entropy of a step graphon via explicit matrix products:
/// with `M = D^{1/2} H D^{1/2}`, `T1 = 1ᵀ D H D 1` and `T2 = tr(M³)`.
pub fn block_oracle(measures: &[f64], values: &[Vec<f64>]) -> (f64, f64, f64) {
    let k = measures.len();
    let m: Vec<Vec<f64>> = (0..k)
        .map(|i| (0..k).map(|j| measures[i].sqrt() * values[i][j] * measures[j].sqrt()).collect())
        .collect();
    let mut m2 = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..k {
            m2[i][j] = (0..k).map(|l| m[i][l] * m[l][j]).sum();
        }
    }
    let tr3: f64 = (0..k).map(|i| (0..k).map(|l| m2[i][l] * m[l][i]).sum::<f64>()).sum();
    let t1: f64 = (0..k).map(|i| (0..k).map(|j| measures[i] * values[i][j] * measures[j]).sum::<f64>()).sum();
    let ent: f64 = (0..k)
        .map(|i| (0..k).map(|j| measures[i] * measures[j] * entropy_oracle(values[i][j])).sum::<f64>())
        .sum();
    (t1, tr3, ent)
}

/// Log-log least-squares slope.
pub fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.abs().ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// `n` log-spaced points from `a` to `b` inclusive.
pub fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a * (b / a).powf(i as f64 / (n - 1) as f64)).collect()
}

/// Closed-form minimiser of the quotient function for `t > ½`: the
/// stationarity condition holds at `y = 1 − 2t` because `I(1−t) = I(t)`.
pub fn quotient_min_oracle(t: f64) -> (f64, f64) {
    let y = 1.0 - 2.0 * t;
    (y, t * t * (t / (1.0 - t)).ln() / (2.0 * (2.0 * t - 1.0)))
}
