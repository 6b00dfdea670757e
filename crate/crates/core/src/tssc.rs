// SPDX-License-Identifier: MIT OR Apache-2.0

//! Segment clustering: tapered per-segment distributions, an `exp(−W2)`
//! affinity between segments, and normalized spectral clustering.

use std::f64::consts::TAU;

use rayon::prelude::*;

use crate::empirical::{wasserstein2, EmpiricalDist};
use crate::error::{Error, Result};
use crate::numeric::{eigh_symmetric, kmeans, SymmetricMatrix};
use crate::series::{segment_bounds, validate_change_points, TimeSeries};

/// k-means restarts used on the spectral embedding.
pub const KMEANS_RESTARTS: usize = 10;

/// Samples `[start, end)` of a series summarized per dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub start: usize,
    pub end: usize,
    pub dists: Vec<EmpiricalDist>,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn dim(&self) -> usize {
        self.dists.len()
    }
}

/// Value `n` of the symmetric Hamming window of length `2β`.
fn hamming(n: usize, beta: usize) -> f64 {
    let denom = (2 * beta - 1) as f64;
    0.54 - 0.46 * (TAU * n as f64 / denom).cos()
}

/// Unnormalized sample weights for a segment of `len` samples.
///
/// A sample `d` steps from the start and `e` steps from the end gets the
/// Hamming value at `min(d, e)` when that is below `β` (rising half near the
/// start, mirrored falling half near the end) and weight 1 otherwise.
pub fn boundary_weights(len: usize, beta: usize) -> Vec<f64> {
    (0..len)
        .map(|j| {
            let edge = j.min(len - 1 - j);
            if beta > 0 && edge < beta {
                hamming(edge, beta)
            } else {
                1.0
            }
        })
        .collect()
}

/// Weighted empirical distributions of `series[start..end]`, one per
/// dimension, with [`boundary_weights`] tapering.
pub fn segment_distribution(
    series: &TimeSeries,
    start: usize,
    end: usize,
    beta: usize,
) -> Result<Segment> {
    if end <= start {
        return Err(Error::EmptySegment { start, end });
    }
    if end > series.len() {
        return Err(Error::InvalidParameter(format!(
            "segment end {end} beyond series length {}",
            series.len()
        )));
    }
    let weights = boundary_weights(end - start, beta);
    let dists = (0..series.dim())
        .map(|d| {
            let values: Vec<f64> = series.samples()[start..end].iter().map(|x| x[d]).collect();
            EmpiricalDist::new(&values, Some(&weights))
        })
        .collect::<Result<_>>()?;
    Ok(Segment { start, end, dists })
}

/// Pairwise segment similarities `exp(−W2 / scale)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinityMatrix(SymmetricMatrix);

impl AffinityMatrix {
    /// Wraps a precomputed similarity matrix, checking entries lie in (0, 1]
    /// with a unit diagonal.
    pub fn new(matrix: SymmetricMatrix) -> Result<Self> {
        let n = matrix.size();
        for i in 0..n {
            if matrix.get(i, i) != 1.0 {
                return Err(Error::InvalidParameter(format!(
                    "affinity diagonal entry {i} is {}, expected 1",
                    matrix.get(i, i)
                )));
            }
            for j in 0..n {
                let v = matrix.get(i, j);
                if !(v > 0.0 && v <= 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "affinity entry ({i}, {j}) = {v} outside (0, 1]"
                    )));
                }
            }
        }
        Ok(Self(matrix))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(SymmetricMatrix::from_rows(rows)?)
    }

    pub fn size(&self) -> usize {
        self.0.size()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0.get(i, j)
    }

    pub fn matrix(&self) -> &SymmetricMatrix {
        &self.0
    }
}

/// Mean over dimensions of the per-dimension 2-Wasserstein distance.
pub fn segment_distance(a: &Segment, b: &Segment) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    let total: f64 = a
        .dists
        .iter()
        .zip(&b.dists)
        .map(|(x, y)| wasserstein2(x, y))
        .sum();
    Ok(total / a.dim() as f64)
}

/// `A[i][j] = exp(−W2(i, j))` with an exact unit diagonal.
pub fn affinity_matrix(segments: &[Segment]) -> Result<AffinityMatrix> {
    affinity_matrix_scaled(segments, 1.0)
}

/// [`affinity_matrix`] with distances divided by `scale` before
/// exponentiating. Entries that would underflow are floored at the smallest
/// positive normal float.
pub fn affinity_matrix_scaled(segments: &[Segment], scale: f64) -> Result<AffinityMatrix> {
    let n = segments.len();
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "affinity needs at least 2 segments, got {n}"
        )));
    }
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "affinity scale must be positive, got {scale}"
        )));
    }
    let dim = segments[0].dim();
    if let Some(bad) = segments.iter().find(|s| s.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: bad.dim(),
        });
    }
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let values: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| {
            segment_distance(&segments[i], &segments[j])
                .map(|d| (-d / scale).exp().max(f64::MIN_POSITIVE))
        })
        .collect::<Result<_>>()?;
    let mut data = vec![1.0; n * n];
    for (&(i, j), &v) in pairs.iter().zip(&values) {
        data[i * n + j] = v;
        data[j * n + i] = v;
    }
    AffinityMatrix::new(SymmetricMatrix::from_row_major(n, data)?)
}

/// Normalized spectral clustering of an affinity matrix into `k` groups.
///
/// Uses the `k` eigenvectors of `I − D^{−1/2} A D^{−1/2}` with the smallest
/// eigenvalues, scales each embedding row to unit length and runs seeded
/// k-means. Labels are renumbered in order of first appearance.
pub fn spectral_cluster(affinity: &AffinityMatrix, k: usize, seed: u64) -> Result<Vec<usize>> {
    let n = affinity.size();
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    if k > n {
        return Err(Error::TooManyClusters { k, n });
    }
    let inv_sqrt_degree: Vec<f64> = (0..n)
        .map(|i| 1.0 / affinity.matrix().row(i).iter().sum::<f64>().sqrt())
        .collect();
    let mut laplacian = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let normalized = affinity.get(i, j) * (inv_sqrt_degree[i] * inv_sqrt_degree[j]);
            laplacian[i * n + j] = if i == j {
                1.0 - normalized
            } else {
                -normalized
            };
        }
    }
    let eigen = eigh_symmetric(&SymmetricMatrix::from_row_major(n, laplacian)?)?;

    let embedding: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row: Vec<f64> = eigen.vectors[..k].iter().map(|v| v[i]).collect();
            let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                row.iter_mut().for_each(|x| *x /= norm);
            }
            row
        })
        .collect();
    let result = kmeans(&embedding, k, seed, KMEANS_RESTARTS)?;
    Ok(relabel_by_first_appearance(&result.labels))
}

fn relabel_by_first_appearance(labels: &[usize]) -> Vec<usize> {
    let mut mapping: Vec<Option<usize>> = Vec::new();
    let mut next = 0;
    labels
        .iter()
        .map(|&l| {
            if l >= mapping.len() {
                mapping.resize(l + 1, None);
            }
            *mapping[l].get_or_insert_with(|| {
                next += 1;
                next - 1
            })
        })
        .collect()
}

/// Change points with one cluster label per induced segment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentLabeling {
    change_points: Vec<usize>,
    labels: Vec<usize>,
    k: usize,
    len: usize,
}

impl SegmentLabeling {
    pub fn new(
        change_points: Vec<usize>,
        labels: Vec<usize>,
        k: usize,
        len: usize,
    ) -> Result<Self> {
        validate_change_points(&change_points, len)?;
        if labels.len() != change_points.len() + 1 {
            return Err(Error::LengthMismatch {
                what: "segment labels",
                got: labels.len(),
                expected: change_points.len() + 1,
            });
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= k) {
            return Err(Error::InvalidParameter(format!(
                "label {bad} not below k={k}"
            )));
        }
        Ok(Self {
            change_points,
            labels,
            k,
            len,
        })
    }

    pub fn change_points(&self) -> &[usize] {
        &self.change_points
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Length of the labelled series.
    pub fn series_len(&self) -> usize {
        self.len
    }

    /// `[start, end)` of each segment.
    pub fn segments(&self) -> Vec<(usize, usize)> {
        segment_bounds(&self.change_points, self.len)
    }

    /// One label per sample.
    pub fn per_sample(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.len);
        for ((start, end), &label) in self.segments().into_iter().zip(&self.labels) {
            out.extend(std::iter::repeat_n(label, end - start));
        }
        out
    }
}

/// Clusters the segments induced by `change_points` into `k` classes.
pub fn cluster_segments(
    series: &TimeSeries,
    change_points: &[usize],
    k: usize,
    beta: usize,
    seed: u64,
) -> Result<SegmentLabeling> {
    validate_change_points(change_points, series.len())?;
    let bounds = segment_bounds(change_points, series.len());
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    if k > bounds.len() {
        return Err(Error::TooManyClusters { k, n: bounds.len() });
    }
    let labels = if bounds.len() == 1 {
        vec![0]
    } else {
        let segments = bounds
            .iter()
            .map(|&(s, e)| segment_distribution(series, s, e, beta))
            .collect::<Result<Vec<_>>>()?;
        spectral_cluster(&affinity_matrix(&segments)?, k, seed)?
    };
    SegmentLabeling::new(change_points.to_vec(), labels, k, series.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simgen::{generate, DistSpec, SeriesSpec};

    fn same_partition(a: &[usize], b: &[usize]) -> bool {
        a.len() == b.len()
            && (0..a.len()).all(|i| (0..a.len()).all(|j| (a[i] == a[j]) == (b[i] == b[j])))
    }

    #[test]
    fn weights_follow_half_hamming() {
        let w = boundary_weights(100, 10);
        assert!((w[0] - 0.08).abs() < 1e-15);
        assert!((w[99] - 0.08).abs() < 1e-15);
        assert!(w[10..90].iter().all(|&x| x == 1.0));
        assert!(w[..10].windows(2).all(|p| p[0] < p[1]));
        assert!(w.iter().all(|&x| x > 0.0 && x <= 1.0));
        for j in 0..10 {
            assert_eq!(w[j], w[99 - j]);
        }
        // short segment: pointwise minimum of the two halves
        let w = boundary_weights(5, 10);
        assert_eq!(w[0], w[4]);
        assert_eq!(w[1], w[3]);
        assert!(w[2] > w[1]);
        assert!(w[2] < 1.0);
    }

    #[test]
    fn single_sample_segment() {
        let s = TimeSeries::univariate(&[1.0, 2.0, 3.0]).unwrap();
        let seg = segment_distribution(&s, 1, 2, 5).unwrap();
        assert_eq!(seg.dists[0].support(), &[2.0]);
        assert_eq!(seg.dists[0].weights(), &[1.0]);
        assert!(matches!(
            segment_distribution(&s, 2, 2, 5),
            Err(Error::EmptySegment { .. })
        ));
    }

    #[test]
    fn affinity_examples() {
        let s = TimeSeries::univariate(&[0.0, 0.0, 1.0, 1.0]).unwrap();
        let a = segment_distribution(&s, 0, 1, 2).unwrap();
        let b = segment_distribution(&s, 2, 3, 2).unwrap();
        let m = affinity_matrix(&[a.clone(), a.clone()]).unwrap();
        assert_eq!(m.get(0, 1), 1.0);
        let m = affinity_matrix(&[a.clone(), b]).unwrap();
        assert!((m.get(0, 1) - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(m.get(0, 0), 1.0);
        assert_eq!(m.get(0, 1), m.get(1, 0));
        assert!(affinity_matrix(&[a]).is_err());
    }

    #[test]
    fn affinity_dimension_mismatch() {
        let s1 = TimeSeries::univariate(&[0.0, 1.0]).unwrap();
        let s2 = TimeSeries::new(vec![vec![0.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let a = segment_distribution(&s1, 0, 2, 1).unwrap();
        let b = segment_distribution(&s2, 0, 2, 1).unwrap();
        assert!(matches!(
            affinity_matrix(&[a, b]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn planted_blocks_are_recovered() {
        let groups = [0usize, 1, 2, 0, 1, 2, 2, 0, 1];
        let far = (-5.0f64).exp();
        let rows: Vec<Vec<f64>> = groups
            .iter()
            .map(|&g| {
                groups
                    .iter()
                    .map(|&h| if g == h { 1.0 } else { far })
                    .collect()
            })
            .collect();
        let a = AffinityMatrix::from_rows(&rows).unwrap();
        let labels = spectral_cluster(&a, 3, 11).unwrap();
        assert!(same_partition(&labels, &groups));
        assert_eq!(labels[0], 0);
    }

    #[test]
    fn k_extremes() {
        let rows = vec![
            vec![1.0, 0.5, 0.2, 0.1],
            vec![0.5, 1.0, 0.3, 0.2],
            vec![0.2, 0.3, 1.0, 0.6],
            vec![0.1, 0.2, 0.6, 1.0],
        ];
        let a = AffinityMatrix::from_rows(&rows).unwrap();
        assert_eq!(spectral_cluster(&a, 1, 0).unwrap(), vec![0, 0, 0, 0]);
        assert_eq!(spectral_cluster(&a, 4, 0).unwrap(), vec![0, 1, 2, 3]);
        assert!(matches!(
            spectral_cluster(&a, 5, 0),
            Err(Error::TooManyClusters { .. })
        ));
    }

    #[test]
    fn spectral_is_deterministic() {
        let rows = vec![
            vec![1.0, 0.9, 0.1, 0.1, 0.2],
            vec![0.9, 1.0, 0.1, 0.2, 0.1],
            vec![0.1, 0.1, 1.0, 0.8, 0.7],
            vec![0.1, 0.2, 0.8, 1.0, 0.9],
            vec![0.2, 0.1, 0.7, 0.9, 1.0],
        ];
        let a = AffinityMatrix::from_rows(&rows).unwrap();
        let x = spectral_cluster(&a, 2, 5).unwrap();
        assert_eq!(x, spectral_cluster(&a, 2, 5).unwrap());
        assert_eq!(x, vec![0, 0, 1, 1, 1]);
    }

    #[test]
    fn cluster_segments_cases() {
        let a = DistSpec::normal(0.0, 1.0);
        let b = DistSpec::normal(6.0, 1.0);
        let s = generate(&SeriesSpec::new(vec![(a, 80), (a, 80)], 1, 2)).unwrap();
        let l = cluster_segments(&s, &[80], 1, 10, 0).unwrap();
        assert_eq!(l.labels(), &[0, 0]);

        let s = generate(&SeriesSpec::new(vec![(a, 80), (b, 80)], 1, 2)).unwrap();
        let l = cluster_segments(&s, &[80], 2, 10, 0).unwrap();
        assert_ne!(l.labels()[0], l.labels()[1]);
        assert_eq!(l.per_sample().len(), 160);

        assert!(matches!(
            cluster_segments(&s, &[], 2, 10, 0),
            Err(Error::TooManyClusters { .. })
        ));
        assert_eq!(cluster_segments(&s, &[], 1, 10, 0).unwrap().labels(), &[0]);
    }

    #[test]
    fn labeling_validation() {
        assert!(SegmentLabeling::new(vec![5], vec![0, 1], 2, 10).is_ok());
        assert!(SegmentLabeling::new(vec![5], vec![0], 2, 10).is_err());
        assert!(SegmentLabeling::new(vec![5], vec![0, 2], 2, 10).is_err());
        let l = SegmentLabeling::new(vec![2, 3], vec![1, 0, 1], 2, 5).unwrap();
        assert_eq!(l.per_sample(), vec![1, 1, 0, 1, 1]);
    }
}
