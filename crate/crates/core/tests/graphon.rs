mod common;

use approx::assert_relative_eq;
use common::{block_oracle, entropy_oracle, slope};
use erline::ensembles::DenseGraph;
use erline::entropy::entropy_derivative;
use erline::graphon::*;
use erline::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn two_equal(values: [[f64; 2]; 2]) -> StepGraphon {
    StepGraphon::new(vec![0.5, 0.5], values.iter().map(|r| r.to_vec()).collect()).unwrap()
}

fn oracle(h: &StepGraphon) -> (f64, f64, f64) {
    block_oracle(h.measures(), &h.values())
}

#[test]
fn density_examples() {
    let c = StepGraphon::constant(0.4).unwrap();
    assert_relative_eq!(c.edge_density(), 0.4, max_relative = 1e-15);
    assert_relative_eq!(c.triangle_density(), 0.064, max_relative = 1e-14);
    let d = two_equal([[1.0, 0.0], [0.0, 1.0]]);
    assert!((d.edge_density() - 0.5).abs() < 1e-15);
    assert!((d.triangle_density() - 0.25).abs() < 1e-15);
    assert!((oracle(&d).1 - 0.25).abs() < 1e-15);
    assert_eq!(StepGraphon::constant(1.0).unwrap().triangle_density(), 1.0);
    assert!((scallop_graphon(2, 0.6).unwrap().edge_density() - 0.6).abs() < 1e-10);
}

#[test]
fn entropy_examples() {
    assert_relative_eq!(
        StepGraphon::constant(0.5).unwrap().entropy_functional(),
        -std::f64::consts::LN_2 / 2.0,
        max_relative = 1e-15
    );
    assert_eq!(two_equal([[0.0, 1.0], [1.0, 0.0]]).entropy_functional(), 0.0);
    let h = two_equal([[0.3, 0.7], [0.7, 0.3]]);
    assert!((h.entropy_functional() - entropy_oracle(0.3)).abs() < 1e-15);
    assert!((h.entropy_functional() - (-0.305_432_151_027_446_7)).abs() < 1e-15);
}

#[test]
fn scallop_examples() {
    assert!((scallop_c(2, 2.0 / 3.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    assert!((scallop_c(2, 0.6).unwrap() - 0.4387426).abs() < 5e-8);
    let c3 = scallop_c(3, 0.7).unwrap();
    assert!((0.25..1.0 / 3.0).contains(&c3));
    // Direct evaluation gives 0.682550; the quoted four digits sit one unit off.
    assert!((scallop_p(2, 0.6).unwrap() - 0.6826).abs() < 1e-4);
    assert!((scallop_p(2, 0.6).unwrap() - 0.682_549_6).abs() < 1e-7);
    assert!((scallop_p(2, 2.0 / 3.0).unwrap() - 1.0).abs() < 1e-15);
    assert!(scallop_c(2, 0.5).is_err());
    assert!(scallop_c(2, 0.7).is_err());
    assert!(scallop_c(1, 0.3).is_err());
    for ell in 2..7u32 {
        let l = f64::from(ell);
        for i in 1..=20 {
            let t = (l - 1.0) / l + (1.0 / l - 1.0 / (l + 1.0)) * i as f64 / 20.0;
            let pt = scallop_point(ell, t.min(l / (l + 1.0))).unwrap();
            assert!(pt.c >= 1.0 / (l + 1.0) - 1e-15 && pt.c < 1.0 / l);
            assert!(pt.p > 0.0 && pt.p <= 1.0);
        }
    }
}

#[test]
fn scallop_graphons_hit_their_edge_density() {
    for ell in 2..6u32 {
        let l = f64::from(ell);
        for i in 1..=10 {
            let t = (l - 1.0) / l + (l / (l + 1.0) - (l - 1.0) / l) * i as f64 / 10.0;
            let h = scallop_graphon(ell, t).unwrap();
            let (t1, t2, _) = oracle(&h);
            assert!((t1 - t).abs() < 1e-10, "ell = {ell}, t = {t}: {t1}");
            assert!((h.triangle_density() - t2).abs() < 1e-14);
            assert!(t2 > 0.0 && t2 <= t1.powf(1.5) + 1e-12);
            let k = h.blocks();
            let m = h.measures();
            let mut inside = 0.0;
            for a in [k - 2, k - 1] {
                for b in [k - 2, k - 1] {
                    for c in [k - 2, k - 1] {
                        inside += m[a] * m[b] * m[c] * h.value(a, b) * h.value(b, c) * h.value(c, a);
                    }
                }
            }
            assert_eq!(inside, 0.0);
            assert_eq!(h.value(k - 1, k - 1), 0.0);
            assert_eq!(h.value(k - 2, k - 2), 0.0);
        }
    }
}

#[test]
fn scallop_pieces_join_continuously() {
    let right = scallop_graphon(2, 2.0 / 3.0).unwrap();
    assert!((right.value(1, 2) - 1.0).abs() < 1e-15);
    for &d in &[1e-4, 1e-6, 1e-8] {
        let left = scallop_graphon(3, 2.0 / 3.0 + d).unwrap();
        assert!((left.edge_density() - right.edge_density()).abs() < 2.0 * d);
        assert!((left.triangle_density() - right.triangle_density()).abs() < 10.0 * d.sqrt());
    }
}

#[test]
fn prop_above_parameters_at_03() {
    let p = prop_above_params(0.3).unwrap();
    assert_relative_eq!(p.lambda, 6.25, max_relative = 1e-14);
    assert_relative_eq!(p.h2, -5.0, max_relative = 1e-14);
    assert_relative_eq!(p.h1, -2.5, max_relative = 1e-14);
    assert!((p.h11 - 0.9270).abs() < 5e-5);
    // I′(h) = 3I′(0.7) = 1.5 ln(7/3) has the root h = 7³/(7³ + 3³).
    assert!((p.h11 - 343.0 / 370.0).abs() < 1e-11);
    assert!((3.0 * entropy_derivative(0.7, 1).unwrap() - 1.2709468).abs() < 5e-8);
    assert!(prop_above_params(0.5).is_err());
}

#[test]
fn prop_above_constraints() {
    for &t in &[0.3, 0.7, 0.2, 0.85] {
        let eps: Vec<f64> = vec![1e-5, 3e-5, 1e-4, 3e-4, 1e-3];
        let mut t2err = Vec::new();
        for &e in &eps {
            let h = prop_above_graphon(t, e).unwrap();
            let (t1, t2, _) = oracle(&h);
            assert!((t1 - t).abs() <= 10.0 * e, "edge density off by {}", t1 - t);
            t2err.push(t2 - (t.powi(3) + 3.0 * t * e));
        }
        let s = slope(&eps, &t2err);
        assert!(s > 1.5, "t = {t}: triangle error slope {s}");
    }
    assert!(matches!(prop_above_graphon(0.3, 0.2), Err(Error::EpsTooLarge(_))));
    assert!(prop_above_graphon(0.3, -1.0).is_err());
}

#[test]
fn prop_below_global_exact() {
    let h = prop_below_global_graphon(0.3, 1e-3).unwrap();
    assert!((h.value(0, 0) - 0.27).abs() < 1e-15);
    assert!((h.value(0, 1) - 0.33).abs() < 1e-15);
    for &t in &[0.1, 0.3, 0.5] {
        for &e in &[1e-9, 1e-6, 1e-3, 0.05] {
            let h = prop_below_global_graphon(t, e).unwrap();
            let (t1, t2, _) = oracle(&h);
            assert!((t1 - t).abs() < 1e-15);
            assert!((t2 - t.powi(3) * (1.0 - e)).abs() < 1e-15);
            assert!((h.triangle_density() - t.powi(3) * (1.0 - e)).abs() < 1e-15);
        }
    }
    assert!(matches!(prop_below_global_graphon(0.3, 1.0), Err(Error::EpsTooLarge(_))));
    assert!(prop_below_global_graphon(0.6, 1e-3).is_err());
}

#[test]
fn prop_below_local_scaling() {
    for &t in &[0.6, 0.7, 0.8] {
        let eps: Vec<f64> = vec![1e-9, 1e-8, 1e-7, 1e-6];
        let mut e1 = Vec::new();
        let mut e2 = Vec::new();
        for &e in &eps {
            let h = prop_below_local_graphon(t, e).unwrap();
            let (t1, t2, _) = oracle(&h);
            e1.push(t1 - t);
            e2.push(t2 - t.powi(3) * (1.0 - e));
        }
        let s1 = slope(&eps, &e1);
        assert!((s1 - 4.0 / 3.0).abs() < 0.02, "t = {t}: edge error slope {s1}");
        let s2 = slope(&eps, &e2);
        assert!(s2 > 1.1, "t = {t}: triangle error slope {s2}");
        let tiny = prop_below_local_graphon(t, 1e-15).unwrap();
        let m = tiny.measures();
        let l1: f64 = (0..2).flat_map(|i| (0..2).map(move |j| (i, j))).map(|(i, j)| m[i] * m[j] * (tiny.value(i, j) - t).abs()).sum();
        assert!(l1 < 1e-4);
    }
    assert!(prop_below_local_graphon(0.4, 1e-3).is_err());
    assert!(matches!(prop_below_local_graphon(0.7, 0.5), Err(Error::EpsTooLarge(_))));
}

#[test]
fn finite_graph_graphons() {
    let tri = DenseGraph::complete(3).unwrap();
    let h = finite_graph_to_graphon(&tri);
    assert!((h.edge_density() - 2.0 / 3.0).abs() < 1e-15);
    assert!((h.triangle_density() - 6.0 / 27.0).abs() < 1e-15);
    let e = finite_graph_to_graphon(&DenseGraph::empty(5).unwrap());
    assert_eq!((e.edge_density(), e.triangle_density()), (0.0, 0.0));
    for n in 2..9usize {
        let k = finite_graph_to_graphon(&DenseGraph::complete(n).unwrap());
        let nf = n as f64;
        assert!((k.edge_density() - (nf - 1.0) / nf).abs() < 1e-14);
        assert!((k.triangle_density() - (nf - 1.0) * (nf - 2.0) / (nf * nf)).abs() < 1e-14);
    }
}

#[test]
fn constant_identity() {
    for i in 0..=100 {
        let u = i as f64 / 100.0;
        assert!((StepGraphon::constant(u).unwrap().triangle_density() - u.powi(3)).abs() < 1e-14);
    }
}

fn random_graphon(rng: &mut ChaCha8Rng, k: usize) -> StepGraphon {
    let raw: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 0.05).collect();
    let total: f64 = raw.iter().sum();
    let measures: Vec<f64> = raw.iter().map(|r| r / total).collect();
    let mut values = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in i..k {
            let v = rng.random::<f64>();
            values[i][j] = v;
            values[j][i] = v;
        }
    }
    StepGraphon::new(measures, values).unwrap()
}

#[test]
fn monte_carlo_agreement() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for k in [1usize, 2, 3, 5] {
        let h = random_graphon(&mut rng, k);
        let n = 1_000_000;
        let (mut s1, mut q1, mut s2, mut q2) = (0.0, 0.0, 0.0, 0.0);
        for _ in 0..n {
            let (x, y, z) = (rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>());
            let a = h.eval(x, y);
            let b = a * h.eval(y, z) * h.eval(z, x);
            s1 += a;
            q1 += a * a;
            s2 += b;
            q2 += b * b;
        }
        let nf = n as f64;
        let (m1, m2) = (s1 / nf, s2 / nf);
        let se1 = ((q1 / nf - m1 * m1) / nf).sqrt();
        let se2 = ((q2 / nf - m2 * m2) / nf).sqrt();
        assert!((m1 - h.edge_density()).abs() <= 4.0 * se1.max(1e-15), "k = {k}");
        assert!((m2 - h.triangle_density()).abs() <= 4.0 * se2.max(1e-15), "k = {k}");
    }
}

#[test]
fn text_round_trip_is_bit_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for k in 1..6 {
        let h = random_graphon(&mut rng, k);
        let back: StepGraphon = h.to_string().parse().unwrap();
        assert_eq!(h, back);
    }
    assert!("".parse::<StepGraphon>().is_err());
    assert!("0.5 0.5\n0.1 0.2\n0.3 0.1\n".parse::<StepGraphon>().is_err());
}

proptest! {
    #[test]
    fn functionals_match_oracle_and_bounds(seed in any::<u64>(), k in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_graphon(&mut rng, k);
        let (t1, t2, ent) = oracle(&h);
        prop_assert!((h.edge_density() - t1).abs() < 1e-14);
        prop_assert!((h.triangle_density() - t2).abs() < 1e-14);
        prop_assert!((h.entropy_functional() - ent).abs() < 1e-14);
        prop_assert!((0.0..=1.0).contains(&t1) && (0.0..=1.0).contains(&t2));
        prop_assert!(h.triangle_density() <= h.edge_density().powf(1.5) + 1e-12);
    }

    #[test]
    fn refinement_invariance(seed in any::<u64>(), k in 1usize..5, frac in 0.01f64..0.99) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_graphon(&mut rng, k);
        let r = h.refine(rng.random_range(0..k), frac).unwrap();
        prop_assert!((h.edge_density() - r.edge_density()).abs() < 1e-12);
        prop_assert!((h.triangle_density() - r.triangle_density()).abs() < 1e-12);
        prop_assert!((h.entropy_functional() - r.entropy_functional()).abs() < 1e-12);
    }

    #[test]
    fn permutation_invariance(seed in any::<u64>(), k in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_graphon(&mut rng, k);
        let mut perm: Vec<usize> = (0..k).collect();
        for i in (1..k).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        let p = h.permute(&perm).unwrap();
        prop_assert!((h.edge_density() - p.edge_density()).abs() < 1e-14);
        prop_assert!((h.triangle_density() - p.triangle_density()).abs() < 1e-14);
        prop_assert!((h.entropy_functional() - p.entropy_functional()).abs() < 1e-14);
    }

    #[test]
    fn constructed_graphons_are_admissible(t in 0.05f64..0.95, le in -8.0f64..-3.0) {
        let e = 10f64.powf(le);
        let mut hs = Vec::new();
        if (t - 0.5).abs() > 0.02 { hs.push(prop_above_graphon(t, e)); }
        if t <= 0.5 { hs.push(prop_below_global_graphon(t, e)); } else { hs.push(prop_below_local_graphon(t, e)); }
        for h in hs.into_iter().flatten() {
            let d = h.densities();
            prop_assert!(d.t1 >= 0.0 && d.t1 <= 1.0 && d.t2 >= 0.0 && d.t2 <= 1.0);
            prop_assert!(d.t2 <= d.t1.powf(1.5) + 1e-12);
        }
    }
}
