//! Component-size order statistics, susceptibility, and cross-run aggregation.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::Partition;

/// Sorted component sizes of one graph state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentStats {
    n: usize,
    sizes: Vec<usize>,
    special_sizes: Vec<usize>,
}

impl ComponentStats {
    /// From `(size, special_count)` pairs in any order.
    pub fn from_sizes(components: &[(usize, usize)]) -> Self {
        let mut sizes: Vec<usize> = components.iter().map(|c| c.0).collect();
        let mut special_sizes: Vec<usize> =
            components.iter().filter(|c| c.1 > 0).map(|c| c.0).collect();
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        special_sizes.sort_unstable_by(|a, b| b.cmp(a));
        ComponentStats { n: sizes.iter().sum(), sizes, special_sizes }
    }

    pub fn from_partition(p: &Partition) -> Self {
        Self::from_sizes(&p.component_sizes())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn special_sizes(&self) -> &[usize] {
        &self.special_sizes
    }

    /// Lᵢ, the i-th largest component size (1-based); 0 past the component count.
    pub fn l(&self, i: usize) -> Result<usize> {
        order_statistic(&self.sizes, i)
    }

    /// L̂ᵢ, the i-th largest special component size (1-based); 0 past the count.
    pub fn l_hat(&self, i: usize) -> Result<usize> {
        order_statistic(&self.special_sizes, i)
    }

    pub fn chi(&self) -> f64 {
        susceptibility(&self.sizes)
    }

    pub fn summary(&self) -> SnapshotStats {
        let lhat_sum: usize = self.special_sizes.iter().sum();
        let lhat1 = self.special_sizes.first().copied().unwrap_or(0);
        SnapshotStats {
            components: self.sizes.len(),
            l1: self.sizes.first().copied().unwrap_or(0),
            l2: self.sizes.get(1).copied().unwrap_or(0),
            lhat1,
            lhat_sum,
            lhat_rest_sum: lhat_sum - lhat1,
            chi: self.chi(),
        }
    }
}

fn order_statistic(sorted: &[usize], i: usize) -> Result<usize> {
    if i == 0 {
        return Err(Error::ZeroIndex);
    }
    Ok(sorted.get(i - 1).copied().unwrap_or(0))
}

/// χ = n⁻¹ Σ sᵢ², with n = Σ sᵢ.
pub fn susceptibility(sizes: &[usize]) -> f64 {
    let n: usize = sizes.iter().sum();
    let sq: f64 = sizes.iter().map(|&s| (s as f64) * (s as f64)).sum();
    sq / n as f64
}

/// Compact per-state record kept in snapshots and event captures.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotStats {
    pub components: usize,
    pub l1: usize,
    pub l2: usize,
    pub lhat1: usize,
    /// Σ L̂ᵢ over all special components.
    pub lhat_sum: usize,
    /// Σ L̂ᵢ for i ≥ 2.
    pub lhat_rest_sum: usize,
    pub chi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunAggregate {
    pub count: usize,
    pub mean: f64,
    /// Standard error of the mean; 0 for a single run.
    pub stderr: f64,
    pub median: f64,
    pub p01: f64,
    pub p99: f64,
    pub min: f64,
    pub max: f64,
    pub seeds: Vec<u64>,
}

/// Nearest-rank percentile of ascending `sorted`, `q` in [0, 100].
pub fn nearest_rank(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let rank = ((q / 100.0) * n as f64).ceil() as usize;
    sorted[rank.clamp(1, n) - 1]
}

impl RunAggregate {
    pub fn from_values(values: &[f64], seeds: &[u64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyAggregate);
        }
        let count = values.len();
        let mean = values.iter().sum::<f64>() / count as f64;
        let stderr = if count > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64;
            (var / count as f64).sqrt()
        } else {
            0.0
        };
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(RunAggregate {
            count,
            mean,
            stderr,
            median: nearest_rank(&sorted, 50.0),
            p01: nearest_rank(&sorted, 1.0),
            p99: nearest_rank(&sorted, 99.0),
            min: sorted[0],
            max: sorted[count - 1],
            seeds: seeds.to_vec(),
        })
    }
}

pub type MetricSelector<'a, R> = (&'a str, &'a dyn Fn(&R) -> f64);

/// One [`RunAggregate`] per named metric over `reports`.
pub fn aggregate<R>(
    reports: &[R],
    seeds: &[u64],
    selectors: &[MetricSelector<'_, R>],
) -> Result<BTreeMap<String, RunAggregate>> {
    if reports.is_empty() {
        return Err(Error::EmptyAggregate);
    }
    selectors
        .iter()
        .map(|(name, f)| {
            let values: Vec<f64> = reports.iter().map(f).collect();
            Ok((name.to_string(), RunAggregate::from_values(&values, seeds)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn susceptibility_examples() {
        assert_eq!(susceptibility(&[2, 1, 1]), 1.5);
        assert_eq!(susceptibility(&[1; 7]), 1.0);
        assert_eq!(susceptibility(&[9]), 9.0);
    }

    #[test]
    fn order_statistics() {
        let s = ComponentStats::from_sizes(&[(1, 0), (5, 1), (3, 0)]);
        assert_eq!(s.l(1), Ok(5));
        assert_eq!(s.l(2), Ok(3));
        assert_eq!(s.l(4), Ok(0));
        assert_eq!(s.l(0), Err(Error::ZeroIndex));
        assert_eq!(s.l_hat(1), Ok(5));
        assert_eq!(s.l_hat(2), Ok(0));
    }

    #[test]
    fn summary_fields() {
        let s = ComponentStats::from_sizes(&[(4, 1), (3, 0), (2, 1), (1, 2)]);
        let sum = s.summary();
        assert_eq!((sum.components, sum.l1, sum.l2), (4, 4, 3));
        assert_eq!((sum.lhat1, sum.lhat_sum, sum.lhat_rest_sum), (4, 7, 3));
        assert_eq!(sum.chi, 30.0 / 10.0);
    }

    #[test]
    fn aggregate_conventions() {
        let one = RunAggregate::from_values(&[3.5], &[1]).unwrap();
        assert_eq!((one.mean, one.stderr, one.median), (3.5, 0.0, 3.5));
        let two = RunAggregate::from_values(&[2.0, 2.0], &[1, 2]).unwrap();
        assert_eq!(two.stderr, 0.0);
        assert_eq!(RunAggregate::from_values(&[], &[]), Err(Error::EmptyAggregate));
    }

    #[test]
    fn nearest_rank_percentiles() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(nearest_rank(&v, 1.0), 1.0);
        assert_eq!(nearest_rank(&v, 50.0), 50.0);
        assert_eq!(nearest_rank(&v, 99.0), 99.0);
        assert_eq!(nearest_rank(&[7.0, 9.0], 0.0), 7.0);
    }

    #[test]
    fn aggregate_by_selector() {
        let reports = vec![(1.0, 10.0), (3.0, 30.0)];
        let first = |r: &(f64, f64)| r.0;
        let second = |r: &(f64, f64)| r.1;
        let out = aggregate(&reports, &[5, 6], &[("a", &first), ("b", &second)]).unwrap();
        assert_eq!(out["a"].mean, 2.0);
        assert_eq!(out["b"].mean, 20.0);
        assert_eq!(out["b"].seeds, vec![5, 6]);
    }

    proptest! {
        #[test]
        fn chi_bounds(sizes in prop::collection::vec(1usize..50, 1..40)) {
            let comps: Vec<(usize, usize)> = sizes.iter().map(|&s| (s, 0)).collect();
            let st = ComponentStats::from_sizes(&comps);
            let n = st.n() as f64;
            let chi = st.chi();
            prop_assert!(chi >= 1.0);
            prop_assert_eq!(chi == 1.0, sizes.iter().all(|&s| s == 1));
            let l1 = st.l(1).unwrap() as f64;
            prop_assert!(chi >= l1 * l1 / n - 1e-9);
        }

        #[test]
        fn percentiles_monotone(values in prop::collection::vec(-1e6f64..1e6, 1..200)) {
            let agg = RunAggregate::from_values(&values, &[]).unwrap();
            prop_assert!(agg.min <= agg.p01 && agg.p01 <= agg.median);
            prop_assert!(agg.median <= agg.p99 && agg.p99 <= agg.max);
        }
    }
}
