// SPDX-License-Identifier: MIT OR Apache-2.0

use crate::error::{Error, Result};
use crate::simgen::SampleStream;

const MAX_ITERATIONS: usize = 300;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub labels: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    /// Within-cluster sum of squared distances.
    pub inertia: f64,
    /// Restart that produced this result.
    pub restart: usize,
}

/// Seeded k-means: k-means++ initialization and Lloyd iterations until the
/// assignment stops changing (at most 300 rounds), repeated `restarts` times.
///
/// Restart `r` draws from stream `r` of `seed`. The lowest inertia wins, and
/// ties go to the earlier restart.
pub fn kmeans(points: &[Vec<f64>], k: usize, seed: u64, restarts: usize) -> Result<KMeansResult> {
    let n = points.len();
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    if k > n {
        return Err(Error::TooManyClusters { k, n });
    }
    let dim = points[0].len();
    if let Some(bad) = points.iter().find(|p| p.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: bad.len(),
        });
    }
    let mut best: Option<KMeansResult> = None;
    for restart in 0..restarts.max(1) {
        let mut rng = SampleStream::new(seed, restart as u64);
        let centroids = plus_plus(points, k, &mut rng);
        let mut run = lloyd(points, centroids);
        run.restart = restart;
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn plus_plus(points: &[Vec<f64>], k: usize, rng: &mut SampleStream) -> Vec<Vec<f64>> {
    let n = points.len();
    let first = ((rng.unit() * n as f64) as usize).min(n - 1);
    let mut centroids = vec![points[first].clone()];
    let mut nearest: Vec<f64> = points
        .iter()
        .map(|p| squared_distance(p, &centroids[0]))
        .collect();
    while centroids.len() < k {
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.unit() * total;
            let mut acc = 0.0;
            let mut chosen = None;
            for (i, &d) in nearest.iter().enumerate() {
                acc += d;
                if d > 0.0 && acc > target {
                    chosen = Some(i);
                    break;
                }
            }
            // rounding can leave the target past the last positive weight
            chosen.unwrap_or_else(|| nearest.iter().rposition(|&d| d > 0.0).unwrap_or(0))
        } else {
            ((rng.unit() * n as f64) as usize).min(n - 1)
        };
        centroids.push(points[pick].clone());
        let c = centroids.last().unwrap();
        for (d, p) in nearest.iter_mut().zip(points) {
            *d = d.min(squared_distance(p, c));
        }
    }
    centroids
}

fn assign(points: &[Vec<f64>], centroids: &[Vec<f64>]) -> (Vec<usize>, f64) {
    let mut inertia = 0.0;
    let labels = points
        .iter()
        .map(|p| {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (j, c) in centroids.iter().enumerate() {
                let d = squared_distance(p, c);
                if d < best_d {
                    best_d = d;
                    best = j;
                }
            }
            inertia += best_d;
            best
        })
        .collect();
    (labels, inertia)
}

fn lloyd(points: &[Vec<f64>], mut centroids: Vec<Vec<f64>>) -> KMeansResult {
    let dim = points[0].len();
    let (mut labels, mut inertia) = assign(points, &centroids);
    for _ in 0..MAX_ITERATIONS {
        let mut sums = vec![vec![0.0; dim]; centroids.len()];
        let mut counts = vec![0usize; centroids.len()];
        for (p, &l) in points.iter().zip(&labels) {
            counts[l] += 1;
            for (s, x) in sums[l].iter_mut().zip(p) {
                *s += x;
            }
        }
        for (j, c) in centroids.iter_mut().enumerate() {
            // empty clusters keep their previous centroid
            if counts[j] > 0 {
                for (cx, s) in c.iter_mut().zip(&sums[j]) {
                    *cx = s / counts[j] as f64;
                }
            }
        }
        let (next, next_inertia) = assign(points, &centroids);
        inertia = next_inertia;
        if next == labels {
            break;
        }
        labels = next;
    }
    KMeansResult {
        labels,
        centroids,
        inertia,
        restart: 0,
    }
}
