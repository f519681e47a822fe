//! The Bernoulli entropy `I(u) = ½u ln u + ½(1−u) ln(1−u)` and the quotient
//! functions built from it.
//!
//! Two different functions share the letter `f` in the literature this crate
//! follows. Here they are [`f_quotient`] (a scaled second-order Taylor
//! remainder) and [`f_lemma`]; they are linked by
//! `f_lemma(t, x) = f_quotient(t, −t/x)` for `x > 1`.

use crate::error::{Error, Result};

/// Largest derivative order accepted by [`entropy_derivative`]. Beyond this
/// `(k−2)!` overflows `f64`.
pub const MAX_DERIVATIVE_ORDER: u32 = 170;

/// Below this ratio `|x| / min(t, 1−t)` the Taylor gap is summed as a series
/// instead of evaluated by subtraction.
const SERIES_RATIO: f64 = 0.1;

/// Half-open bracket offset used by [`f_quotient_min`].
const MIN_BRACKET_DELTA: f64 = 1e-9;
const MIN_GRID_STEP: f64 = 1e-4;
const MIN_X_TOL: f64 = 1e-10;

/// `I(u)` without argument checks. Endpoints return exactly zero.
#[inline]
pub(crate) fn ent(u: f64) -> f64 {
    if u <= 0.0 || u >= 1.0 {
        0.0
    } else {
        0.5 * (u * u.ln() + (1.0 - u) * (1.0 - u).ln())
    }
}

/// `I′(u)` without argument checks.
#[inline]
pub(crate) fn ent_d1(u: f64) -> f64 {
    0.5 * (u / (1.0 - u)).ln()
}

/// `I″(u)` without argument checks.
#[inline]
pub(crate) fn ent_d2(u: f64) -> f64 {
    0.5 / (u * (1.0 - u))
}

/// `I‴(u)` without argument checks.
#[inline]
pub(crate) fn ent_d3(u: f64) -> f64 {
    0.5 * (1.0 / ((1.0 - u) * (1.0 - u)) - 1.0 / (u * u))
}

fn check_unit_closed(u: f64, name: &str) -> Result<()> {
    if (0.0..=1.0).contains(&u) {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} = {u} is outside [0, 1]")))
    }
}

fn check_unit_open(u: f64, name: &str) -> Result<()> {
    if u > 0.0 && u < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} = {u} is outside (0, 1)")))
    }
}

/// Entropy of a Bernoulli variable in the halved convention, in nats.
///
/// Non-positive on `[0, 1]`, zero at both endpoints.
pub fn bernoulli_entropy(u: f64) -> Result<f64> {
    check_unit_closed(u, "u")?;
    Ok(ent(u))
}

/// The `k`-th derivative `I^(k)(u)` for `k ≥ 1`.
///
/// For `k ≥ 2` this is `((k−2)!/2)·((−1)^k/u^(k−1) + 1/(1−u)^(k−1))`.
pub fn entropy_derivative(u: f64, k: u32) -> Result<f64> {
    check_unit_open(u, "u")?;
    match k {
        0 => Err(Error::domain("derivative order must be at least 1")),
        1 => Ok(ent_d1(u)),
        k if k > MAX_DERIVATIVE_ORDER => Err(Error::domain(format!(
            "derivative order {k} overflows; the maximum is {MAX_DERIVATIVE_ORDER}"
        ))),
        k => {
            let fact: f64 = (2..=(k - 2)).map(f64::from).product();
            let p = (k - 1) as i32;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            Ok(0.5 * fact * (sign / u.powi(p) + 1.0 / (1.0 - u).powi(p)))
        }
    }
}

/// `I(t+x) − I(t) − I′(t)x`, accurate for small `|x|`.
///
/// Near zero the direct difference cancels catastrophically, so there the
/// Taylor series is summed; its `k`-th term is
/// `(t(−x/t)^k + (1−t)(x/(1−t))^k) / (2k(k−1))`.
pub(crate) fn taylor_gap(t: f64, x: f64) -> f64 {
    let m = t.min(1.0 - t);
    if x.abs() <= SERIES_RATIO * m {
        let a = -x / t;
        let b = x / (1.0 - t);
        let (mut pa, mut pb) = (a, b);
        let mut sum = 0.0;
        for k in 2..200u32 {
            pa *= a;
            pb *= b;
            let kf = f64::from(k);
            let denom = 2.0 * kf * (kf - 1.0);
            sum += (t * pa + (1.0 - t) * pb) / denom;
            // The two halves can cancel, so bound the term by magnitudes.
            if (t * pa.abs() + (1.0 - t) * pb.abs()) / denom <= 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        ent(t + x) - ent(t) - ent_d1(t) * x
    }
}

/// `t²·(I(t+x) − I(t) − I′(t)x)/x²` for `−t < x < 0`.
///
/// Strictly positive by convexity of `I`. The `x → 0` limit is
/// [`f_quotient_limit`].
pub fn f_quotient(t1: f64, x: f64) -> Result<f64> {
    check_unit_open(t1, "t1")?;
    if x == 0.0 {
        return Err(Error::domain("x = 0; use f_quotient_limit"));
    }
    if !(x > -t1 && x < 0.0) {
        return Err(Error::domain(format!("x = {x} is outside (-t1, 0) = ({}, 0)", -t1)));
    }
    Ok(quotient_unchecked(t1, x))
}

#[inline]
fn quotient_unchecked(t: f64, x: f64) -> f64 {
    t * t * taylor_gap(t, x) / (x * x)
}

/// `lim_{x→0} f_quotient(t1, x) = ½t1²I″(t1) = t1/(4(1−t1))`.
pub fn f_quotient_limit(t1: f64) -> Result<f64> {
    check_unit_open(t1, "t1")?;
    Ok(t1 / (4.0 * (1.0 - t1)))
}

/// Result of [`f_quotient_min`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuotientMin {
    pub t1: f64,
    pub y_star: f64,
    pub value: f64,
    /// Whether the verification grid found exactly one local minimum.
    pub grid_unique: bool,
}

/// Interior global minimiser of `x ↦ f_quotient(t1, x)` on `(−t1, 0)`.
///
/// Exists only for `t1 > ½`; for smaller `t1` the infimum is the `x → 0`
/// limit and [`Error::NoInteriorMinimum`] is returned. A grid scan at step
/// `1e−4` locates the basin and checks there is a single one, golden-section
/// search narrows it, and bisection on the sign of the derivative resolves
/// the abscissa to `1e−10`.
pub fn f_quotient_min(t1: f64) -> Result<QuotientMin> {
    check_unit_open(t1, "t1")?;
    if t1 <= 0.5 {
        return Err(Error::NoInteriorMinimum { t1 });
    }
    let lo = -t1 + MIN_BRACKET_DELTA;
    let hi = -MIN_BRACKET_DELTA;
    let f = |x: f64| quotient_unchecked(t1, x);

    let steps = ((hi - lo) / MIN_GRID_STEP).ceil() as usize;
    let xs: Vec<f64> = (0..=steps)
        .map(|i| if i == steps { hi } else { lo + i as f64 * MIN_GRID_STEP })
        .collect();
    let fs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let best = fs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("grid is non-empty");
    let local_minima = (1..fs.len() - 1)
        .filter(|&i| fs[i] < fs[i - 1] && fs[i] <= fs[i + 1])
        .count();

    let a = xs[best.saturating_sub(1)];
    let b = xs[(best + 1).min(xs.len() - 1)];
    let (ga, gb) = crate::optim::golden_section(f, a, b, 1e-7 * (b - a).abs().max(1e-12));
    let (mut a, mut b) = (ga.min(gb), ga.max(gb));
    // Widen slightly so the bracket straddles the stationary point.
    a = (a - 1e-6).max(lo);
    b = (b + 1e-6).min(hi);

    let slope = |x: f64| quotient_slope_sign(t1, x);
    let (sa, sb) = (slope(a), slope(b));
    let y = if sa < 0.0 && sb > 0.0 {
        crate::optim::bisect(slope, a, b, MIN_X_TOL)
    } else {
        0.5 * (a + b)
    };
    let value = f(y);
    let limit = t1 / (4.0 * (1.0 - t1));
    if value >= limit || y >= hi {
        return Err(Error::NoInteriorMinimum { t1 });
    }
    Ok(QuotientMin { t1, y_star: y, value, grid_unique: local_minima <= 1 })
}

/// Sign-carrying proxy for `d/dx f_quotient(t, x)` on `x < 0`.
///
/// With `N(x)` the Taylor gap, `f′ = t²(xN′ − 2N)/x³`; for `x < 0` the sign
/// of `f′` is the sign of `2N − xN′`.
fn quotient_slope_sign(t: f64, x: f64) -> f64 {
    let n = taylor_gap(t, x);
    let dn = ent_d1(t + x) - ent_d1(t);
    2.0 * n - x * dn
}

/// `x²(I(t1 − t1/x) − I(t1)) + x·t1·I′(t1)` for `x > 0`.
///
/// The inner argument must lie in `[0, 1]`, which for `x > 0` means `x ≥ 1`.
pub fn f_lemma(t1: f64, x: f64) -> Result<f64> {
    check_unit_open(t1, "t1")?;
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("x = {x} must be positive and finite")));
    }
    let inner = t1 - t1 / x;
    if !(0.0..=1.0).contains(&inner) {
        return Err(Error::domain(format!(
            "inner argument t1 - t1/x = {inner} is outside [0, 1]"
        )));
    }
    // x²·gap(t1, −t1/x) expands to the defining expression exactly.
    Ok(x * x * taylor_gap(t1, -t1 / x))
}

/// `I(t−y) − I(t) + yI′(t) − ½y²I″(t)`, the third-order Taylor remainder.
pub fn f_check(t1: f64, y: f64) -> Result<f64> {
    check_unit_open(t1, "t1")?;
    let inner = t1 - y;
    if !(0.0..=1.0).contains(&inner) {
        return Err(Error::domain(format!("t1 - y = {inner} is outside [0, 1]")));
    }
    Ok(taylor_gap(t1, -y) - 0.5 * y * y * ent_d2(t1))
}
