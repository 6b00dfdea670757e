// SPDX-License-Identifier: MIT OR Apache-2.0

mod common;

use common::*;
use w2cpd::empirical::{w2t_statistic, wasserstein2, wasserstein2_squared, EmpiricalDist};
use w2cpd::numeric::{assignment_cost, eigh_symmetric, hungarian, kmeans};
use w2cpd::simgen::SampleStream;

#[test]
fn wasserstein_matches_transport_lp() {
    let mut rng = SampleStream::new(11, 0);
    for _ in 0..300 {
        let (a, pa) = random_measure(&mut rng, 8);
        let (b, pb) = random_measure(&mut rng, 8);
        let lp = transport_lp(&a, &pa, &b, &pb);
        let da = EmpiricalDist::new(&a, Some(&pa)).unwrap();
        let db = EmpiricalDist::new(&b, Some(&pb)).unwrap();
        let fast = wasserstein2_squared(&da, &db);
        assert!((fast - lp).abs() <= 1e-9 * lp.max(1e-300), "{fast} vs {lp}");
        assert_eq!(wasserstein2(&da, &db), fast.sqrt());
    }
}

#[test]
fn wasserstein_with_ties_matches_lp() {
    let a = [0.0, 0.0, 1.0, 1.0, 1.0];
    let pa = [1.0, 2.0, 1.0, 1.0, 3.0];
    let b = [0.5, 0.5, 2.0];
    let pb = [1.0, 1.0, 1.0];
    let lp = transport_lp(&a, &pa, &b, &pb);
    let fast = wasserstein2_squared(
        &EmpiricalDist::new(&a, Some(&pa)).unwrap(),
        &EmpiricalDist::new(&b, Some(&pb)).unwrap(),
    );
    assert!((fast - lp).abs() <= 1e-12);
}

/// `mn/(m+n) ∫ (P_m(Q_n⁻¹(u)) − u)² du` by midpoint quadrature on a grid
/// aligned with the quantile breakpoints of `q`.
fn w2t_quadrature(p: &[f64], q: &[f64]) -> f64 {
    let mut q = q.to_vec();
    q.sort_by(f64::total_cmp);
    let m = p.len() as f64;
    let n = q.len() as f64;
    let per_piece = 400;
    let mut integral = 0.0;
    for (j, &y) in q.iter().enumerate() {
        let below = p.iter().filter(|&&x| x <= y).count() as f64 / m;
        for s in 0..per_piece {
            let u = (j as f64 + (s as f64 + 0.5) / per_piece as f64) / n;
            integral += (below - u).powi(2);
        }
    }
    integral /= n * per_piece as f64;
    m * n / (m + n) * integral
}

#[test]
fn two_sample_statistic_matches_quadrature() {
    let mut rng = SampleStream::new(5, 3);
    for case in 0..40 {
        let m = 1 + case % 13;
        let n = 1 + (case * 7) % 11;
        let p: Vec<f64> = (0..m)
            .map(|_| (rng.standard_normal() * 4.0).round() / 4.0)
            .collect();
        let q: Vec<f64> = (0..n)
            .map(|_| (rng.standard_normal() * 4.0).round() / 4.0)
            .collect();
        let exact = w2t_statistic(
            &EmpiricalDist::new(&p, None).unwrap(),
            &EmpiricalDist::new(&q, None).unwrap(),
        )
        .unwrap();
        let approx = w2t_quadrature(&p, &q);
        assert!(
            (exact - approx).abs() < 1e-5,
            "case {case}: {exact} vs {approx}"
        );
    }
}

#[test]
fn hungarian_matches_brute_force() {
    let mut rng = SampleStream::new(21, 0);
    for case in 0..200 {
        let n = 1 + case % 6;
        let mut cost = random_matrix(&mut rng, n, n, 10.0);
        if case % 4 == 0 {
            // integer costs create many ties
            cost.iter_mut().flatten().for_each(|c| *c = c.round().abs());
        }
        let perm = hungarian(&cost).unwrap();
        let mut seen = perm.clone();
        seen.sort();
        assert_eq!(seen, (0..n).collect::<Vec<_>>());
        let best = brute_force_assignment(&cost);
        assert!((assignment_cost(&cost, &perm) - best).abs() <= 1e-9 * (1.0 + best.abs()));
    }
}

#[test]
fn hungarian_returns_smallest_optimal_permutation() {
    let mut rng = SampleStream::new(22, 0);
    for case in 0..100 {
        let n = 2 + case % 4;
        let cost: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..n).map(|_| (rng.unit() * 3.0).floor()).collect())
            .collect();
        let best = brute_force_assignment(&cost);
        let first_optimal = permutations(n)
            .into_iter()
            .find(|p| (assignment_cost(&cost, p) - best).abs() < 1e-12)
            .unwrap();
        assert_eq!(hungarian(&cost).unwrap(), first_optimal);
    }
}

#[test]
fn eigh_reconstructs_random_matrices() {
    let mut rng = SampleStream::new(31, 0);
    for case in 0..100 {
        let n = 1 + case % 20;
        let m = random_symmetric(&mut rng, n);
        let e = eigh_symmetric(&m).unwrap();
        assert!(reconstruction_error(&m, &e) <= 1e-8);
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        for a in 0..n {
            for b in 0..n {
                let dot: f64 = (0..n).map(|i| e.vectors[a][i] * e.vectors[b][i]).sum();
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn kmeans_inertia_is_never_worse_than_any_restart() {
    let mut rng = SampleStream::new(41, 0);
    let pts: Vec<Vec<f64>> = (0..80)
        .map(|i| {
            vec![
                rng.standard_normal() + (i % 4) as f64 * 3.0,
                rng.standard_normal(),
            ]
        })
        .collect();
    let all = kmeans(&pts, 4, 8, 10).unwrap();
    for r in 1..=10 {
        assert!(all.inertia <= kmeans(&pts, 4, 8, r).unwrap().inertia);
    }
}
