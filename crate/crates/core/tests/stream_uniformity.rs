//! Goodness-of-fit of the pair streams against the uniform law.

use std::collections::HashMap;

use fusionproc::edge_stream::{EdgeStream, StreamMode};
use statrs::distribution::{ChiSquared, ContinuousCDF};

const SAMPLES: u64 = 100_000;

/// Upper-tail p-value of Pearson's statistic for equiprobable cells.
fn chi_square_p(counts: &HashMap<Vec<(usize, usize)>, u64>, cells: usize) -> f64 {
    assert!(counts.len() <= cells);
    let expected = SAMPLES as f64 / cells as f64;
    let observed: f64 = counts.values().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    // empty cells contribute `expected` each
    let stat = observed + (cells - counts.len()) as f64 * expected;
    1.0 - ChiSquared::new((cells - 1) as f64).unwrap().cdf(stat)
}

fn tally(n: usize, take: usize, mode: StreamMode) -> HashMap<Vec<(usize, usize)>, u64> {
    let mut counts = HashMap::new();
    for seed in 0..SAMPLES {
        let prefix: Vec<_> = EdgeStream::new(n, seed, mode).unwrap().take(take).collect();
        *counts.entry(prefix).or_insert(0) += 1;
    }
    counts
}

#[test]
fn first_pair_uniform() {
    for mode in [StreamMode::Lazy, StreamMode::FullShuffle] {
        let counts = tally(4, 1, mode);
        assert_eq!(counts.len(), 6);
        let p = chi_square_p(&counts, 6);
        assert!(p > 1e-3, "{mode:?}: p = {p}");
    }
}

#[test]
fn whole_order_uniform_n3() {
    for mode in [StreamMode::Lazy, StreamMode::FullShuffle] {
        let counts = tally(3, 3, mode);
        assert_eq!(counts.len(), 6);
        let p = chi_square_p(&counts, 6);
        assert!(p > 1e-3, "{mode:?}: p = {p}");
    }
}

#[test]
fn whole_order_uniform_n4() {
    // 6! orders; the lazy stream changes strategy half way through
    for mode in [StreamMode::Lazy, StreamMode::FullShuffle] {
        let counts = tally(4, 6, mode);
        let p = chi_square_p(&counts, 720);
        assert!(p > 1e-3, "{mode:?}: p = {p}");
    }
}

#[test]
fn leading_triple_uniform_n5() {
    // 10! full orders are too many cells for 10^5 samples; the first three
    // pairs range over 10·9·8 equally likely ordered triples
    for mode in [StreamMode::Lazy, StreamMode::FullShuffle] {
        let counts = tally(5, 3, mode);
        let p = chi_square_p(&counts, 720);
        assert!(p > 1e-3, "{mode:?}: p = {p}");
    }
}
