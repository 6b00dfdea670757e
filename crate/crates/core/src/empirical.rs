// SPDX-License-Identifier: MIT OR Apache-2.0

//! Weighted one-dimensional empirical distributions, the Wasserstein
//! two-sample statistic and the exact 1-D 2-Wasserstein distance.

use crate::error::{Error, Result};

/// Mean of the limiting null distribution of the two-sample statistic.
pub const NULL_MEAN: f64 = 0.166;
/// 0.95 quantile of the limiting null distribution.
pub const REJECT_THRESHOLD: f64 = 0.462;

const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

/// Constants of the statistic's limiting null law (the integrated squared
/// Brownian bridge).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NullConstants {
    null_mean: f64,
    reject_threshold_05: f64,
    alpha: f64,
}

impl NullConstants {
    pub const DEFAULT: NullConstants = NullConstants {
        null_mean: NULL_MEAN,
        reject_threshold_05: REJECT_THRESHOLD,
        alpha: 0.05,
    };

    pub fn null_mean(&self) -> f64 {
        self.null_mean
    }

    /// Rejection threshold at level [`alpha`](Self::alpha).
    pub fn reject_threshold_05(&self) -> f64 {
        self.reject_threshold_05
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

impl Default for NullConstants {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// A finite, weighted point-mass distribution on the real line.
///
/// Atoms are kept sorted and duplicates are stored individually, so the
/// sample count of a uniform distribution is simply [`len`](Self::len).
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDist {
    support: Vec<f64>,
    weights: Vec<f64>,
    cumulative: Vec<f64>,
}

impl EmpiricalDist {
    /// Builds a distribution from samples and optional nonnegative weights.
    ///
    /// Missing weights mean uniform mass `1/n`. Weights are normalized to sum
    /// to one and permuted alongside the sorted support.
    pub fn new(values: &[f64], weights: Option<&[f64]>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyDistribution);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteSample);
        }
        let raw: Vec<f64> = match weights {
            None => vec![1.0; values.len()],
            Some(w) => {
                if w.len() != values.len() {
                    return Err(Error::LengthMismatch {
                        what: "weights",
                        got: w.len(),
                        expected: values.len(),
                    });
                }
                if w.iter().any(|x| !x.is_finite()) {
                    return Err(Error::NonFiniteSample);
                }
                if w.iter().any(|&x| x < 0.0) {
                    return Err(Error::NegativeWeight);
                }
                w.to_vec()
            }
        };
        let total: f64 = raw.iter().sum();
        if total <= 0.0 {
            return Err(Error::ZeroTotalWeight);
        }

        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let support: Vec<f64> = order.iter().map(|&i| values[i]).collect();
        let weights: Vec<f64> = order.iter().map(|&i| raw[i] / total).collect();
        Ok(Self::from_parts(support, weights))
    }

    /// Uniform distribution over samples that are already sorted.
    pub fn from_sorted(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyDistribution);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteSample);
        }
        if values.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidParameter("support must be sorted".into()));
        }
        let n = values.len();
        Ok(Self::from_parts(values, vec![1.0 / n as f64; n]))
    }

    fn from_parts(support: Vec<f64>, weights: Vec<f64>) -> Self {
        let mut cumulative = Vec::with_capacity(weights.len());
        let mut acc = 0.0;
        for w in &weights {
            acc += w;
            cumulative.push(acc);
        }
        debug_assert!((acc - 1.0).abs() <= WEIGHT_SUM_TOLERANCE * weights.len() as f64);
        // pin the final breakpoint so quantile(1) always reaches the last atom
        if let Some(last) = cumulative.last_mut() {
            *last = 1.0;
        }
        Self {
            support,
            weights,
            cumulative,
        }
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// True when every atom carries the same mass.
    pub fn is_uniform(&self) -> bool {
        let first = self.weights[0];
        self.weights
            .iter()
            .all(|w| (w - first).abs() <= WEIGHT_SUM_TOLERANCE)
    }

    /// Right-continuous CDF: total mass of atoms `<= x`.
    pub fn ecdf(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::NonFiniteSample);
        }
        let count = self.support.partition_point(|&s| s <= x);
        Ok(if count == 0 {
            0.0
        } else {
            self.cumulative[count - 1]
        })
    }

    /// Generalized inverse CDF: the smallest atom whose cumulative mass
    /// reaches `u`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u <= 1.0) {
            return Err(Error::QuantileOutOfRange(u));
        }
        let idx = self.cumulative.partition_point(|&c| c < u);
        Ok(self.support[idx.min(self.support.len() - 1)])
    }

    pub fn mean(&self) -> f64 {
        self.support
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| x * w)
            .sum()
    }
}

/// Wasserstein two-sample statistic between two uniform-weighted samples.
///
/// `mn/(m+n) * ∫₀¹ (P_m(Q_n⁻¹(u)) − u)² du`, where `p` supplies `P_m` and `q`
/// supplies the quantile function. Evaluated exactly, piece by piece.
pub fn w2t_statistic(p: &EmpiricalDist, q: &EmpiricalDist) -> Result<f64> {
    if !p.is_uniform() || !q.is_uniform() {
        return Err(Error::NonUniformSamples);
    }
    Ok(w2t_sorted(p.support(), q.support()))
}

/// [`w2t_statistic`] on raw sorted sample slices.
///
/// Both slices must be non-empty and sorted ascending. On the interval
/// `((j−1)/n, j/n]` the quantile of `q` is its `j`-th order statistic `y_j`
/// and the CDF of `p` there is `c_j/m` with `c_j = #{x <= y_j}`, so each
/// piece integrates to `[(k−a)³ − (k−b)³]/3` with `k = c_j/m`.
pub fn w2t_sorted(p: &[f64], q: &[f64]) -> f64 {
    debug_assert!(!p.is_empty() && !q.is_empty());
    let m = p.len();
    let n = q.len();
    let mf = m as f64;
    let nf = n as f64;
    let h = 1.0 / nf;
    let mut count = 0usize;
    let mut total = 0.0;
    for (j, &y) in q.iter().enumerate() {
        while count < m && p[count] <= y {
            count += 1;
        }
        let k = count as f64 / mf;
        let lo = k - j as f64 / nf;
        let hi = k - (j + 1) as f64 / nf;
        // (lo³ − hi³)/3 factored as (lo − hi)(lo² + lo·hi + hi²)/3
        total += h * (lo * lo + lo * hi + hi * hi) / 3.0;
    }
    total * (mf * nf) / (mf + nf)
}

/// Exact 1-D 2-Wasserstein distance between weighted distributions.
///
/// Walks the merged cumulative-mass breakpoints of both quantile functions,
/// accumulating `Δu · (x_i − y_j)²`, and returns the square root.
pub fn wasserstein2(a: &EmpiricalDist, b: &EmpiricalDist) -> f64 {
    wasserstein2_squared(a, b).sqrt()
}

/// Optimal squared-Euclidean transport cost (the square of [`wasserstein2`]).
pub fn wasserstein2_squared(a: &EmpiricalDist, b: &EmpiricalDist) -> f64 {
    let (xs, wa) = (a.support(), a.weights());
    let (ys, wb) = (b.support(), b.weights());
    let (mut i, mut j) = (0usize, 0usize);
    let (mut left_a, mut left_b) = (wa[0], wb[0]);
    let mut cost = 0.0;
    loop {
        let d = xs[i] - ys[j];
        if left_a <= left_b {
            cost += left_a * d * d;
            left_b -= left_a;
            i += 1;
            if i == xs.len() {
                break;
            }
            left_a = wa[i];
        } else {
            cost += left_b * d * d;
            left_a -= left_b;
            j += 1;
            if j == ys.len() {
                break;
            }
            left_b = wb[j];
        }
    }
    cost.max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(values: &[f64]) -> EmpiricalDist {
        EmpiricalDist::new(values, None).unwrap()
    }

    #[test]
    fn build_sorts_and_normalizes() {
        let d = uniform(&[3.0, 1.0, 2.0]);
        assert_eq!(d.support(), &[1.0, 2.0, 3.0]);
        for w in d.weights() {
            assert!((w - 1.0 / 3.0).abs() < 1e-15);
        }

        let d = EmpiricalDist::new(&[0.0], Some(&[5.0])).unwrap();
        assert_eq!(d.support(), &[0.0]);
        assert_eq!(d.weights(), &[1.0]);

        let d = EmpiricalDist::new(&[1.0, 1.0, 2.0], Some(&[1.0, 1.0, 2.0])).unwrap();
        assert_eq!(d.support(), &[1.0, 1.0, 2.0]);
        assert_eq!(d.weights(), &[0.25, 0.25, 0.5]);
    }

    #[test]
    fn weights_follow_their_atoms() {
        let d = EmpiricalDist::new(&[2.0, 0.0, 1.0], Some(&[3.0, 1.0, 0.0])).unwrap();
        assert_eq!(d.support(), &[0.0, 1.0, 2.0]);
        assert_eq!(d.weights(), &[0.25, 0.0, 0.75]);
    }

    #[test]
    fn build_errors() {
        assert_eq!(EmpiricalDist::new(&[], None), Err(Error::EmptyDistribution));
        assert_eq!(
            EmpiricalDist::new(&[1.0, 2.0], Some(&[1.0, -0.5])),
            Err(Error::NegativeWeight)
        );
        assert_eq!(
            EmpiricalDist::new(&[1.0, f64::NAN], None),
            Err(Error::NonFiniteSample)
        );
        assert_eq!(
            EmpiricalDist::new(&[1.0, 2.0], Some(&[0.0, 0.0])),
            Err(Error::ZeroTotalWeight)
        );
        assert!(matches!(
            EmpiricalDist::new(&[1.0, 2.0], Some(&[1.0])),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(EmpiricalDist::new(&[1.0, f64::INFINITY], None)
            .unwrap_err()
            .to_string()
            .contains("non-finite sample"));
    }

    #[test]
    fn ecdf_values() {
        let d = uniform(&[1.0, 2.0, 3.0]);
        assert!((d.ecdf(2.0).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(d.ecdf(0.5).unwrap(), 0.0);
        assert_eq!(d.ecdf(3.0).unwrap(), 1.0);
        assert_eq!(d.ecdf(1e9).unwrap(), 1.0);
        assert!(d.ecdf(f64::NAN).is_err());
    }

    #[test]
    fn quantile_values() {
        let d = uniform(&[1.0, 2.0, 3.0]);
        assert_eq!(d.quantile(0.5).unwrap(), 2.0);
        assert_eq!(d.quantile(1.0).unwrap(), 3.0);
        assert_eq!(d.quantile(1e-9).unwrap(), 1.0);
        assert_eq!(d.quantile(1.0 / 3.0).unwrap(), 1.0);
        assert!(matches!(d.quantile(0.0), Err(Error::QuantileOutOfRange(_))));
        assert!(d.quantile(1.5).is_err());
        assert!(d.quantile(f64::NAN).is_err());
    }

    #[test]
    fn w2t_single_atoms() {
        // k = 1 on (0, 1]: (1/2)·∫(1 − u)² du = 1/6
        let v = w2t_statistic(&uniform(&[0.0]), &uniform(&[1.0])).unwrap();
        assert!((v - 1.0 / 6.0).abs() < 1e-15);
        // k = 0: (1/2)·∫u² du = 1/6 as well
        let v = w2t_statistic(&uniform(&[1.0]), &uniform(&[0.0])).unwrap();
        assert!((v - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn w2t_identical_samples_leave_only_the_discretization_residual() {
        // distinct identical samples: k = j/n on each piece, leaving n·h³/3,
        // scaled by n/2 → 1/(6n)
        for n in [1usize, 2, 5, 40] {
            let xs: Vec<f64> = (0..n).map(|i| i as f64 * 0.7 - 3.0).collect();
            let v = w2t_statistic(&uniform(&xs), &uniform(&xs)).unwrap();
            assert!((v - 1.0 / (6.0 * n as f64)).abs() < 1e-14, "n={n}: {v}");
        }
        // all-tied samples: every count includes the whole of p, k = 1
        let tied = vec![2.5; 10];
        let v = w2t_statistic(&uniform(&tied), &uniform(&tied)).unwrap();
        assert!((v - 5.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn w2t_rejects_weighted_input() {
        let p = EmpiricalDist::new(&[0.0, 1.0], Some(&[1.0, 2.0])).unwrap();
        let q = uniform(&[0.5, 1.5]);
        let err = w2t_statistic(&p, &q).unwrap_err();
        assert_eq!(
            err.to_string(),
            "two-sample statistic requires uniform samples"
        );
    }

    #[test]
    fn w2t_matches_fine_quadrature() {
        let p = uniform(&[0.1, 0.4, 0.4, 2.0, -1.0]);
        let q = uniform(&[0.0, 0.3, 0.5]);
        let exact = w2t_statistic(&p, &q).unwrap();
        let steps = 300_000;
        let mut acc = 0.0;
        for s in 0..steps {
            let u = (s as f64 + 0.5) / steps as f64;
            let f = p.ecdf(q.quantile(u).unwrap()).unwrap() - u;
            acc += f * f;
        }
        let approx = acc / steps as f64 * (5.0 * 3.0) / 8.0;
        assert!((exact - approx).abs() < 1e-6, "{exact} vs {approx}");
    }

    #[test]
    fn wasserstein_examples() {
        let a = uniform(&[0.0, 2.0]);
        assert_eq!(wasserstein2(&a, &a), 0.0);
        assert_eq!(wasserstein2(&uniform(&[0.0]), &uniform(&[1.0])), 1.0);
        assert!((wasserstein2(&a, &uniform(&[1.0, 3.0])) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn wasserstein_weighted_split_mass() {
        // atom at 0 against {−1: 1/2, 1: 1/2}: every unit moves distance 1
        let a = uniform(&[0.0]);
        let b = uniform(&[-1.0, 1.0]);
        assert!((wasserstein2(&a, &b) - 1.0).abs() < 1e-15);
        // {0: 3/4, 4: 1/4} vs atom at 1: 3/4·1 + 1/4·9 = 3
        let c = EmpiricalDist::new(&[0.0, 4.0], Some(&[3.0, 1.0])).unwrap();
        assert!((wasserstein2_squared(&c, &uniform(&[1.0])) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn null_constants_are_ordered() {
        let c = NullConstants::default();
        assert!(c.null_mean() < c.reject_threshold_05());
        assert_eq!(c.alpha(), 0.05);
    }
}
