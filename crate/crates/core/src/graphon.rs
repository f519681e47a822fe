//! Step graphons: symmetric block-constant functions on the unit square.

use std::fmt;
use std::str::FromStr;

use crate::entropy::{ent, ent_d1, f_quotient_min};
use crate::ensembles::DenseGraph;
use crate::error::{Error, Result};

const MEASURE_SUM_TOL: f64 = 1e-12;
/// Values within this distance outside `[0, 1]` are rounding and get clamped.
const VALUE_SLACK: f64 = 1e-14;

/// A symmetric piecewise-constant graphon.
///
/// Block `i` has Lebesgue measure `measures[i]`; the graphon takes the value
/// `value(i, j)` on block `i` × block `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepGraphon {
    measures: Vec<f64>,
    values: Vec<f64>,
}

/// Edge and triangle densities `(T1, T2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityPair {
    pub t1: f64,
    pub t2: f64,
}

fn unit_value(v: f64, what: &str) -> Result<f64> {
    if v.is_nan() || !(-VALUE_SLACK..=1.0 + VALUE_SLACK).contains(&v) {
        Err(Error::domain(format!("{what} = {v} is outside [0, 1]")))
    } else {
        Ok(v.clamp(0.0, 1.0))
    }
}

impl StepGraphon {
    /// Build from block measures and a square value matrix.
    pub fn new(measures: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        let k = measures.len();
        if k == 0 {
            return Err(Error::domain("a step graphon needs at least one block"));
        }
        if values.len() != k || values.iter().any(|r| r.len() != k) {
            return Err(Error::domain(format!("value matrix must be {k} x {k}")));
        }
        let flat: Vec<f64> = values.into_iter().flatten().collect();
        Self::from_flat(measures, flat)
    }

    /// Build from measures and a row-major value matrix.
    pub fn from_flat(measures: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let k = measures.len();
        if k == 0 || values.len() != k * k {
            return Err(Error::domain("measures and values have inconsistent sizes"));
        }
        if measures.iter().any(|&m| !(m > 0.0) || !m.is_finite()) {
            return Err(Error::domain("block measures must be positive"));
        }
        let total: f64 = measures.iter().sum();
        if (total - 1.0).abs() > MEASURE_SUM_TOL {
            return Err(Error::domain(format!("block measures sum to {total}, not 1")));
        }
        let mut values = values;
        for i in 0..k {
            for j in 0..k {
                let v = unit_value(values[i * k + j], "graphon value")?;
                values[i * k + j] = v;
            }
        }
        for i in 0..k {
            for j in (i + 1)..k {
                if values[i * k + j] != values[j * k + i] {
                    return Err(Error::domain(format!("value matrix is not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self { measures, values })
    }

    /// The constant graphon `u`.
    pub fn constant(u: f64) -> Result<Self> {
        Self::from_flat(vec![1.0], vec![unit_value(u, "u")?])
    }

    pub fn blocks(&self) -> usize {
        self.measures.len()
    }

    pub fn measures(&self) -> &[f64] {
        &self.measures
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.blocks() + j]
    }

    /// Value matrix as rows.
    pub fn values(&self) -> Vec<Vec<f64>> {
        self.values.chunks(self.blocks()).map(<[f64]>::to_vec).collect()
    }

    /// Evaluate `h(x, y)` for `x, y ∈ [0, 1]`.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.value(self.block_of(x), self.block_of(y))
    }

    fn block_of(&self, x: f64) -> usize {
        let mut acc = 0.0;
        for (i, &m) in self.measures.iter().enumerate() {
            acc += m;
            if x < acc {
                return i;
            }
        }
        self.blocks() - 1
    }

    /// `T1 = Σ λiλj hij`.
    pub fn edge_density(&self) -> f64 {
        let k = self.blocks();
        let mut s = 0.0;
        for i in 0..k {
            for j in 0..k {
                s += self.measures[i] * self.measures[j] * self.values[i * k + j];
            }
        }
        s
    }

    /// `T2 = Σ λiλjλk hij hjk hki`.
    pub fn triangle_density(&self) -> f64 {
        let k = self.blocks();
        let (m, h) = (&self.measures, &self.values);
        let mut s = 0.0;
        for i in 0..k {
            for j in 0..k {
                let hij = h[i * k + j];
                if hij == 0.0 {
                    continue;
                }
                let mut inner = 0.0;
                for l in 0..k {
                    inner += m[l] * h[j * k + l] * h[l * k + i];
                }
                s += m[i] * m[j] * hij * inner;
            }
        }
        s
    }

    pub fn densities(&self) -> DensityPair {
        DensityPair { t1: self.edge_density(), t2: self.triangle_density() }
    }

    /// `Σ λiλj I(hij)`, the integral of `I ∘ h`.
    pub fn entropy_functional(&self) -> f64 {
        let k = self.blocks();
        let mut s = 0.0;
        for i in 0..k {
            for j in 0..k {
                s += self.measures[i] * self.measures[j] * ent(self.values[i * k + j]);
            }
        }
        s
    }

    /// Split block `block` into two pieces with fractions `frac`, `1 − frac`.
    ///
    /// The result represents the same graphon.
    pub fn refine(&self, block: usize, frac: f64) -> Result<Self> {
        let k = self.blocks();
        if block >= k || !(frac > 0.0 && frac < 1.0) {
            return Err(Error::domain("refine needs a valid block and a fraction in (0, 1)"));
        }
        let src: Vec<usize> = (0..k).flat_map(|i| if i == block { vec![i, i] } else { vec![i] }).collect();
        let mut measures = Vec::with_capacity(k + 1);
        for (pos, &i) in src.iter().enumerate() {
            let m = self.measures[i];
            measures.push(if i != block {
                m
            } else if pos == block {
                m * frac
            } else {
                m * (1.0 - frac)
            });
        }
        let values = src.iter().flat_map(|&i| src.iter().map(move |&j| (i, j))).map(|(i, j)| self.value(i, j)).collect();
        Ok(Self { measures, values })
    }

    /// Relabel blocks: new block `p` is old block `perm[p]`.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        let k = self.blocks();
        let mut seen = vec![false; k];
        if perm.len() != k || perm.iter().any(|&p| p >= k || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::domain("not a permutation of the blocks"));
        }
        let measures = perm.iter().map(|&p| self.measures[p]).collect();
        let values = perm.iter().flat_map(|&i| perm.iter().map(move |&j| (i, j))).map(|(i, j)| self.value(i, j)).collect();
        Ok(Self { measures, values })
    }
}

/// Text form: block measures on the first line, then one line per matrix
/// row, whitespace separated, each number with 17 significant digits.
impl fmt::Display for StepGraphon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let row = |xs: &[f64]| xs.iter().map(|x| format!("{x:.16e}")).collect::<Vec<_>>().join(" ");
        writeln!(f, "{}", row(&self.measures))?;
        for r in self.values.chunks(self.blocks()) {
            writeln!(f, "{}", row(r))?;
        }
        Ok(())
    }
}

impl FromStr for StepGraphon {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parse_row = |line: &str| -> Result<Vec<f64>> {
            line.split(|c: char| c.is_whitespace() || c == ',')
                .filter(|w| !w.is_empty())
                .map(|w| w.parse::<f64>().map_err(|e| Error::Parse(format!("{w:?}: {e}"))))
                .collect()
        };
        let mut lines = s.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let measures = parse_row(lines.next().ok_or_else(|| Error::Parse("empty graphon text".into()))?)?;
        let rows = lines.map(parse_row).collect::<Result<Vec<_>>>()?;
        Self::new(measures, rows)
    }
}

pub fn edge_density(h: &StepGraphon) -> f64 {
    h.edge_density()
}

pub fn triangle_density(h: &StepGraphon) -> f64 {
    h.triangle_density()
}

pub fn entropy_functional(h: &StepGraphon) -> f64 {
    h.entropy_functional()
}

/// A point on the lower boundary piece indexed by `ell`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScallopPoint {
    pub ell: u32,
    pub t1: f64,
    pub c: f64,
    pub p: f64,
}

fn scallop_check(ell: u32, t1: f64) -> Result<()> {
    if ell < 2 {
        return Err(Error::domain(format!("ell = {ell} must be at least 2")));
    }
    let l = f64::from(ell);
    let (lo, hi) = ((l - 1.0) / l, l / (l + 1.0));
    if t1 > lo && t1 <= hi {
        Ok(())
    } else {
        Err(Error::domain(format!("t1 = {t1} is outside the piece ({lo}, {hi}] for ell = {ell}")))
    }
}

/// `c_ℓ = (1 + √(1 − ((ℓ+1)/ℓ)t1)) / (ℓ+1)`.
pub fn scallop_c(ell: u32, t1: f64) -> Result<f64> {
    scallop_check(ell, t1)?;
    let l = f64::from(ell);
    let disc = (1.0 - (l + 1.0) / l * t1).max(0.0);
    Ok((1.0 + disc.sqrt()) / (l + 1.0))
}

/// `p_ℓ = 4c(1 − ℓc)/(1 − (ℓ−1)c)²` with `c = c_ℓ`.
pub fn scallop_p(ell: u32, t1: f64) -> Result<f64> {
    let c = scallop_c(ell, t1)?;
    let l = f64::from(ell);
    let d = 1.0 - (l - 1.0) * c;
    Ok((4.0 * c * (1.0 - l * c) / (d * d)).min(1.0))
}

pub fn scallop_point(ell: u32, t1: f64) -> Result<ScallopPoint> {
    Ok(ScallopPoint { ell, t1, c: scallop_c(ell, t1)?, p: scallop_p(ell, t1)? })
}

/// The `(ℓ+1)`-block graphon on the lower boundary: `ℓ−1` blocks of measure
/// `c_ℓ` joined completely to everything else, and two equal halves of the
/// remaining mass joined to each other with density `p_ℓ`.
pub fn scallop_graphon(ell: u32, t1: f64) -> Result<StepGraphon> {
    let ScallopPoint { c, p, .. } = scallop_point(ell, t1)?;
    let k = ell as usize + 1;
    let rest = 0.5 * (1.0 - (f64::from(ell) - 1.0) * c);
    let mut measures = vec![c; k - 2];
    measures.extend([rest, rest]);
    let mut values = vec![1.0; k * k];
    for i in 0..k {
        values[i * k + i] = 0.0;
    }
    values[(k - 2) * k + (k - 1)] = p;
    values[(k - 1) * k + (k - 2)] = p;
    // Renormalise against rounding in the measure sum.
    let total: f64 = measures.iter().sum();
    measures.iter_mut().for_each(|m| *m /= total);
    StepGraphon::from_flat(measures, values)
}

/// Solve `I′(h) = target` on `(0, 1)` by bisection.
fn inverse_entropy_slope(target: f64) -> f64 {
    crate::optim::bisect(|h| ent_d1(h) - target, 1e-300, 1.0 - f64::EPSILON / 2.0, 1e-12)
}

/// Parameters of the above-line optimiser at `t1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AboveParams {
    pub lambda: f64,
    pub h11: f64,
    pub h1: f64,
    pub h2: f64,
}

pub fn prop_above_params(t1: f64) -> Result<AboveParams> {
    if !(t1 > 0.0 && t1 < 1.0) || t1 == 0.5 {
        return Err(Error::domain(format!("t1 = {t1} must lie in (0, 1) and differ from 1/2")));
    }
    let d = 1.0 - 2.0 * t1;
    Ok(AboveParams {
        lambda: 1.0 / (d * d),
        h11: inverse_entropy_slope(3.0 * ent_d1(1.0 - t1)),
        h1: -1.0 / d,
        h2: -2.0 / d,
    })
}

/// Two-block graphon raising the triangle density to `t1³ + 3t1ε` at fixed
/// edge density (to first order): a corner of measure `λε` at value `h11`,
/// strips at `1 − t1 + h1ε` and the bulk at `t1 + h2ε`.
pub fn prop_above_graphon(t1: f64, eps: f64) -> Result<StepGraphon> {
    let p = prop_above_params(t1)?;
    check_eps(eps)?;
    let m = p.lambda * eps;
    if !(m < 1.0) {
        return Err(Error::EpsTooLarge(format!("corner measure lambda*eps = {m} is not below 1")));
    }
    let strip = 1.0 - t1 + p.h1 * eps;
    let bulk = t1 + p.h2 * eps;
    two_block(m, p.h11, strip, bulk)
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("eps = {eps} must be positive")))
    }
}

fn two_block(m: f64, a: f64, b: f64, c: f64) -> Result<StepGraphon> {
    for (v, name) in [(a, "corner"), (b, "off-diagonal"), (c, "bulk")] {
        if v.is_nan() || !(-VALUE_SLACK..=1.0 + VALUE_SLACK).contains(&v) {
            return Err(Error::EpsTooLarge(format!("{name} value {v} is outside [0, 1]")));
        }
    }
    if !(m > 0.0 && m < 1.0) {
        return Err(Error::EpsTooLarge(format!("block measure {m} is outside (0, 1)")));
    }
    StepGraphon::from_flat(vec![m, 1.0 - m], vec![a, b, b, c])
}

/// Symmetric two-block perturbation below the line for `t1 ≤ ½`: diagonal
/// blocks at `t1(1 − ε^{1/3})`, off-diagonal at `t1(1 + ε^{1/3})`.
pub fn prop_below_global_graphon(t1: f64, eps: f64) -> Result<StepGraphon> {
    if !(t1 > 0.0 && t1 <= 0.5) {
        return Err(Error::domain(format!("t1 = {t1} must lie in (0, 1/2]")));
    }
    check_eps(eps)?;
    let s = t1 * eps.cbrt();
    if s >= t1.min(1.0 - t1) {
        return Err(Error::EpsTooLarge(format!("t1*eps^(1/3) = {s} reaches the value bounds")));
    }
    StepGraphon::from_flat(vec![0.5, 0.5], vec![t1 - s, t1 + s, t1 + s, t1 - s])
}

/// Localised two-block perturbation below the line for `t1 > ½`: a block of
/// measure `δ = (t1/|y*|)ε^{1/3}` at value `t1 + y*`, where `y*` minimises
/// [`crate::entropy::f_quotient`].
pub fn prop_below_local_graphon(t1: f64, eps: f64) -> Result<StepGraphon> {
    if !(t1 > 0.5 && t1 < 1.0) {
        return Err(Error::domain(format!("t1 = {t1} must lie in (1/2, 1)")));
    }
    check_eps(eps)?;
    let y = f_quotient_min(t1)?.y_star;
    let e13 = eps.cbrt();
    let delta = t1 / y.abs() * e13;
    if !(delta < 1.0) {
        return Err(Error::EpsTooLarge(format!("block measure delta = {delta} is not below 1")));
    }
    let core = t1 + t1 * t1 / y * e13 * e13;
    let off = t1 + t1 * e13;
    two_block(1.0 - delta, core, off, t1 + y)
}

/// Graphon of a finite graph: `n` blocks of measure `1/n`, adjacency values,
/// zero diagonal.
pub fn finite_graph_to_graphon(g: &DenseGraph) -> StepGraphon {
    let n = g.n();
    let measures = vec![1.0 / n as f64; n];
    let values = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| if g.has_edge(i, j) { 1.0 } else { 0.0 })
        .collect();
    StepGraphon { measures, values }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn refine_keeps_functionals() {
        let h = StepGraphon::new(vec![0.3, 0.7], vec![vec![0.2, 0.9], vec![0.9, 0.4]]).unwrap();
        let r = h.refine(1, 0.25).unwrap();
        assert_eq!(r.blocks(), 3);
        assert!((h.edge_density() - r.edge_density()).abs() < 1e-15);
        assert!((h.triangle_density() - r.triangle_density()).abs() < 1e-15);
    }

    #[test]
    fn rejects_asymmetric_and_bad_measures() {
        assert!(StepGraphon::new(vec![0.5, 0.5], vec![vec![0.1, 0.2], vec![0.3, 0.1]]).is_err());
        assert!(StepGraphon::new(vec![0.5, 0.6], vec![vec![0.1, 0.2], vec![0.2, 0.1]]).is_err());
        assert!(StepGraphon::new(vec![1.0], vec![vec![1.5]]).is_err());
    }

    #[test]
    fn eval_picks_blocks() {
        let h = StepGraphon::new(vec![0.25, 0.75], vec![vec![0.1, 0.2], vec![0.2, 0.3]]).unwrap();
        assert_eq!(h.eval(0.1, 0.9), 0.2);
        assert_eq!(h.eval(0.9, 0.9), 0.3);
        assert_eq!(h.eval(1.0, 0.0), 0.2);
    }
}
