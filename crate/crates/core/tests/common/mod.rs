// SPDX-License-Identifier: MIT OR Apache-2.0

//! Independent reference implementations used to check the library.

#![allow(dead_code)]

use w2cpd::numeric::{Eigen, SymmetricMatrix};
use w2cpd::simgen::SampleStream;

/// Optimal transport cost `Σ π_ij (a_i − b_j)²` between two discrete
/// measures, solved as a min-cost flow by successive shortest paths with
/// Bellman–Ford. Masses are normalized first.
pub fn transport_lp(a: &[f64], pa: &[f64], b: &[f64], pb: &[f64]) -> f64 {
    let ta: f64 = pa.iter().sum();
    let tb: f64 = pb.iter().sum();
    let n = a.len();
    let m = b.len();
    // nodes: source, a atoms, b atoms, sink
    let source = 0;
    let sink = n + m + 1;
    let nodes = n + m + 2;
    let mut edges: Vec<(usize, usize, f64, f64)> = Vec::new(); // to, rev, cap, cost
    let mut graph: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    let mut add =
        |edges: &mut Vec<(usize, usize, f64, f64)>, u: usize, v: usize, cap: f64, cost: f64| {
            graph[u].push(edges.len());
            edges.push((v, edges.len() + 1, cap, cost));
            graph[v].push(edges.len());
            edges.push((u, edges.len() - 1, 0.0, -cost));
        };
    for i in 0..n {
        add(&mut edges, source, 1 + i, pa[i] / ta, 0.0);
        for (j, &bj) in b.iter().enumerate() {
            add(
                &mut edges,
                1 + i,
                1 + n + j,
                f64::INFINITY,
                (a[i] - bj).powi(2),
            );
        }
    }
    for (j, &w) in pb.iter().enumerate() {
        add(&mut edges, 1 + n + j, sink, w / tb, 0.0);
    }
    let from: Vec<usize> = {
        let mut f = vec![0; edges.len()];
        for (u, list) in graph.iter().enumerate() {
            for &e in list {
                f[e] = u;
            }
        }
        f
    };

    let mut remaining = 1.0f64;
    let mut total = 0.0;
    let eps = 1e-15;
    // relaxations below a relative 1e-12 are ignored so rounding cannot
    // create negative residual cycles
    for _ in 0..10 * nodes * nodes {
        if remaining <= 1e-13 {
            break;
        }
        let mut dist = vec![f64::INFINITY; nodes];
        let mut via = vec![usize::MAX; nodes];
        dist[source] = 0.0;
        for _ in 0..nodes {
            let mut changed = false;
            for (e, &(v, _, cap, cost)) in edges.iter().enumerate() {
                let u = from[e];
                if cap <= eps || !dist[u].is_finite() {
                    continue;
                }
                let candidate = dist[u] + cost;
                if !dist[v].is_finite() || candidate < dist[v] - 1e-12 * (1.0 + dist[v].abs()) {
                    dist[v] = candidate;
                    via[v] = e;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        if !dist[sink].is_finite() {
            break;
        }
        let mut push = remaining;
        let mut v = sink;
        while v != source {
            let e = via[v];
            push = push.min(edges[e].2);
            v = from[e];
        }
        let mut v = sink;
        while v != source {
            let e = via[v];
            edges[e].2 -= push;
            let rev = edges[e].1;
            edges[rev].2 += push;
            total += push * edges[e].3;
            v = from[e];
        }
        remaining -= push;
    }
    total
}

/// Every permutation of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(n);
    let mut used = vec![false; n];
    fn walk(n: usize, current: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if current.len() == n {
            out.push(current.clone());
            return;
        }
        for j in 0..n {
            if !used[j] {
                used[j] = true;
                current.push(j);
                walk(n, current, used, out);
                current.pop();
                used[j] = false;
            }
        }
    }
    walk(n, &mut current, &mut used, &mut out);
    out
}

/// Exhaustive minimum assignment cost.
pub fn brute_force_assignment(cost: &[Vec<f64>]) -> f64 {
    permutations(cost.len())
        .iter()
        .map(|p| p.iter().enumerate().map(|(i, &j)| cost[i][j]).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
}

pub fn random_matrix(
    rng: &mut SampleStream,
    rows: usize,
    cols: usize,
    scale: f64,
) -> Vec<Vec<f64>> {
    (0..rows)
        .map(|_| {
            (0..cols)
                .map(|_| scale * (2.0 * rng.unit() - 1.0))
                .collect()
        })
        .collect()
}

pub fn random_symmetric(rng: &mut SampleStream, n: usize) -> SymmetricMatrix {
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = rng.standard_normal();
            data[i * n + j] = v;
            data[j * n + i] = v;
        }
    }
    SymmetricMatrix::from_row_major(n, data).unwrap()
}

/// `‖Q Λ Qᵀ − M‖_F`.
pub fn reconstruction_error(m: &SymmetricMatrix, e: &Eigen) -> f64 {
    let n = m.size();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            let r: f64 = (0..n)
                .map(|k| e.values[k] * e.vectors[k][i] * e.vectors[k][j])
                .sum();
            sum += (r - m.get(i, j)).powi(2);
        }
    }
    sum.sqrt()
}

/// Random weighted measure with `1..=max_atoms` atoms.
pub fn random_measure(rng: &mut SampleStream, max_atoms: usize) -> (Vec<f64>, Vec<f64>) {
    let n = 1 + ((rng.unit() * max_atoms as f64) as usize).min(max_atoms - 1);
    let atoms = (0..n).map(|_| 4.0 * rng.standard_normal()).collect();
    let weights = (0..n).map(|_| 0.05 + rng.unit()).collect();
    (atoms, weights)
}
