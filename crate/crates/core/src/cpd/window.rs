// SPDX-License-Identifier: MIT OR Apache-2.0

use crate::empirical::w2t_sorted;

/// A multiset of reals kept in ascending order.
#[derive(Debug, Clone, Default, PartialEq)]
pub(crate) struct SortedWindow {
    values: Vec<f64>,
}

impl SortedWindow {
    pub(crate) fn with_capacity(capacity: usize) -> Self {
        Self {
            values: Vec::with_capacity(capacity),
        }
    }

    pub(crate) fn insert(&mut self, v: f64) {
        let at = self.values.partition_point(|&x| x < v);
        self.values.insert(at, v);
    }

    pub(crate) fn remove(&mut self, v: f64) {
        let at = self.values.partition_point(|&x| x < v);
        debug_assert!(at < self.values.len() && self.values[at] == v);
        self.values.remove(at);
    }

    pub(crate) fn as_slice(&self) -> &[f64] {
        &self.values
    }
}

/// The before/after windows around the current time index, one pair per
/// dimension.
///
/// For index `t` the before window holds `X[t−β..t)` and the after window
/// `X(t..t+β]`; the sample at `t` belongs to neither. Offline and streaming
/// detection both drive this type with the same sequence of updates, which
/// keeps their statistics bit-identical.
#[derive(Debug, Clone)]
pub(crate) struct WindowPair {
    before: Vec<SortedWindow>,
    after: Vec<SortedWindow>,
}

impl WindowPair {
    /// Windows for `t = β`, given samples `X[0..=2β]`.
    pub(crate) fn init<'a, I>(samples: I, beta: usize, dim: usize) -> Self
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let mut before = vec![SortedWindow::with_capacity(beta + 1); dim];
        let mut after = vec![SortedWindow::with_capacity(beta + 1); dim];
        for (i, x) in samples.into_iter().enumerate() {
            let side = match i.cmp(&beta) {
                std::cmp::Ordering::Less => &mut before,
                std::cmp::Ordering::Equal => continue,
                std::cmp::Ordering::Greater => &mut after,
            };
            for (w, &v) in side.iter_mut().zip(x) {
                w.insert(v);
            }
        }
        Self { before, after }
    }

    /// Moves from `t − 1` to `t`.
    ///
    /// `leaving_before = X[t−1−β]`, `centre_prev = X[t−1]`, `centre = X[t]`
    /// and `entering_after = X[t+β]`.
    pub(crate) fn advance(
        &mut self,
        leaving_before: &[f64],
        centre_prev: &[f64],
        centre: &[f64],
        entering_after: &[f64],
    ) {
        for d in 0..self.before.len() {
            self.before[d].remove(leaving_before[d]);
            self.before[d].insert(centre_prev[d]);
            self.after[d].remove(centre[d]);
            self.after[d].insert(entering_after[d]);
        }
    }

    /// Mean over dimensions of the two-sample statistic, summed in
    /// dimension order.
    pub(crate) fn statistic(&self) -> f64 {
        let mut sum = 0.0;
        for (b, a) in self.before.iter().zip(&self.after) {
            sum += w2t_sorted(b.as_slice(), a.as_slice());
        }
        sum / self.before.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorted_window_keeps_duplicates() {
        let mut w = SortedWindow::default();
        for v in [3.0, 1.0, 2.0, 1.0] {
            w.insert(v);
        }
        assert_eq!(w.as_slice(), &[1.0, 1.0, 2.0, 3.0]);
        w.remove(1.0);
        assert_eq!(w.as_slice(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn advance_matches_fresh_windows() {
        let xs: Vec<Vec<f64>> = (0..20).map(|i| vec![((i * 7) % 11) as f64]).collect();
        let beta = 3;
        let mut pair = WindowPair::init(xs[..=2 * beta].iter().map(Vec::as_slice), beta, 1);
        for t in beta + 1..xs.len() - beta {
            pair.advance(&xs[t - 1 - beta], &xs[t - 1], &xs[t], &xs[t + beta]);
            let fresh =
                WindowPair::init(xs[t - beta..=t + beta].iter().map(Vec::as_slice), beta, 1);
            assert_eq!(pair.before[0], fresh.before[0]);
            assert_eq!(pair.after[0], fresh.after[0]);
        }
    }
}
