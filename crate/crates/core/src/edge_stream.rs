//! Seeded uniform-without-replacement pair sequences over the `C(n,2)` vertex pairs.
//!
//! Pairs are identified through the colexicographic index
//! `index(u, v) = v(v-1)/2 + u` for `u < v`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::{FxHashMap, FxHashSet};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Name of the pseudorandom generator behind every stream; written into output metadata.
pub const GENERATOR: &str = "ChaCha8Rng (rand_chacha 0.3) seeded with SeedableRng::seed_from_u64";

/// Largest `n` for which the shuffle-based mode is offered.
pub const FULL_SHUFFLE_MAX_N: usize = 1 << 16;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn num_pairs(n: usize) -> u64 {
    let n = n as u64;
    n * n.saturating_sub(1) / 2
}

pub fn pair_index(u: usize, v: usize) -> u64 {
    debug_assert!(u < v);
    let v = v as u64;
    v * (v - 1) / 2 + u as u64
}

pub fn pair_from_index(idx: u64) -> (usize, usize) {
    let mut v = ((1.0 + (1.0 + 8.0 * idx as f64).sqrt()) / 2.0) as u64;
    while v * (v - 1) / 2 > idx {
        v -= 1;
    }
    while (v + 1) * v / 2 <= idx {
        v += 1;
    }
    ((idx - v * (v - 1) / 2) as usize, v as usize)
}

/// Anything that feeds pairs to the process engine.
pub trait PairSource {
    fn n(&self) -> usize;
    fn next_pair(&mut self) -> Result<(usize, usize)>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StreamMode {
    /// Rejection sampling against a seen-set; memory grows with pairs emitted.
    Lazy,
    /// A seeded Fisher–Yates shuffle of all pairs, drawn incrementally.
    FullShuffle,
}

#[derive(Clone, Debug)]
enum Sampler {
    Lazy { seen: FxHashSet<u64> },
    /// Remaining pairs held explicitly; each draw swap-removes a uniform slot.
    Remaining { pairs: Vec<u64> },
    /// Forward Fisher–Yates over the virtual array `[0, total)`; only displaced slots are stored.
    Shuffle { displaced: FxHashMap<u64, u64> },
}

#[derive(Clone, Debug)]
pub struct EdgeStream {
    n: usize,
    seed: u64,
    mode: StreamMode,
    total: u64,
    emitted: u64,
    rng: ChaCha8Rng,
    sampler: Sampler,
}

impl EdgeStream {
    pub fn lazy(n: usize, seed: u64) -> Self {
        EdgeStream {
            n,
            seed,
            mode: StreamMode::Lazy,
            total: num_pairs(n),
            emitted: 0,
            rng: rng_from_seed(seed),
            sampler: Sampler::Lazy { seen: FxHashSet::default() },
        }
    }

    pub fn full_shuffle(n: usize, seed: u64) -> Result<Self> {
        if n > FULL_SHUFFLE_MAX_N {
            return Err(Error::TooLarge { what: "full-shuffle mode", n, limit: FULL_SHUFFLE_MAX_N });
        }
        Ok(EdgeStream {
            n,
            seed,
            mode: StreamMode::FullShuffle,
            total: num_pairs(n),
            emitted: 0,
            rng: rng_from_seed(seed),
            sampler: Sampler::Shuffle { displaced: FxHashMap::default() },
        })
    }

    pub fn new(n: usize, seed: u64, mode: StreamMode) -> Result<Self> {
        match mode {
            StreamMode::Lazy => Ok(Self::lazy(n, seed)),
            StreamMode::FullShuffle => Self::full_shuffle(n, seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn mode(&self) -> StreamMode {
        self.mode
    }

    pub fn emitted(&self) -> u64 {
        self.emitted
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    fn next_index(&mut self) -> Result<u64> {
        if self.emitted >= self.total {
            return Err(Error::Exhausted { total: self.total });
        }
        let idx = match &mut self.sampler {
            Sampler::Lazy { seen } => {
                if self.emitted > self.total / 2 && self.n <= FULL_SHUFFLE_MAX_N {
                    let pairs: Vec<u64> = (0..self.total).filter(|i| !seen.contains(i)).collect();
                    self.sampler = Sampler::Remaining { pairs };
                    return self.next_index();
                }
                loop {
                    let i = self.rng.gen_range(0..self.total);
                    if seen.insert(i) {
                        break i;
                    }
                }
            }
            Sampler::Remaining { pairs } => {
                let j = self.rng.gen_range(0..pairs.len());
                pairs.swap_remove(j)
            }
            Sampler::Shuffle { displaced } => {
                let pos = self.emitted;
                let j = self.rng.gen_range(pos..self.total);
                let at_j = displaced.remove(&j).unwrap_or(j);
                if j != pos {
                    let at_pos = displaced.remove(&pos).unwrap_or(pos);
                    displaced.insert(j, at_pos);
                }
                at_j
            }
        };
        self.emitted += 1;
        Ok(idx)
    }
}

impl PairSource for EdgeStream {
    fn n(&self) -> usize {
        self.n
    }

    fn next_pair(&mut self) -> Result<(usize, usize)> {
        self.next_index().map(pair_from_index)
    }
}

impl Iterator for EdgeStream {
    type Item = (usize, usize);

    fn next(&mut self) -> Option<(usize, usize)> {
        self.next_pair().ok()
    }
}

/// Replays a fixed pair order; used to couple the engine with externally ordered edges.
#[derive(Clone, Debug)]
pub struct ReplayStream {
    n: usize,
    pairs: Vec<(usize, usize)>,
    pos: usize,
}

impl ReplayStream {
    /// Pairs are normalized to `u < v`; self-pairs and out-of-range vertices are rejected.
    pub fn new(n: usize, pairs: Vec<(usize, usize)>) -> Result<Self> {
        let mut out = Vec::with_capacity(pairs.len());
        let mut seen = FxHashSet::default();
        for (a, b) in pairs {
            let (u, v) = if a < b { (a, b) } else { (b, a) };
            if v >= n {
                return Err(Error::VertexOutOfRange { vertex: v, n });
            }
            if u == v || !seen.insert(pair_index(u, v)) {
                return Err(Error::InvalidConfig(format!("pair ({a}, {b}) is a self-pair or repeated")));
            }
            out.push((u, v));
        }
        Ok(ReplayStream { n, pairs: out, pos: 0 })
    }
}

impl PairSource for ReplayStream {
    fn n(&self) -> usize {
        self.n
    }

    fn next_pair(&mut self) -> Result<(usize, usize)> {
        let p = *self
            .pairs
            .get(self.pos)
            .ok_or(Error::Exhausted { total: self.pairs.len() as u64 })?;
        self.pos += 1;
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_bijection_small() {
        let mut i = 0;
        for v in 1..60 {
            for u in 0..v {
                assert_eq!(pair_index(u, v), i);
                assert_eq!(pair_from_index(i), (u, v));
                i += 1;
            }
        }
    }

    #[test]
    fn index_bijection_large() {
        for &(u, v) in &[(0usize, 999_999usize), (999_998, 999_999), (123_456, 654_321)] {
            assert_eq!(pair_from_index(pair_index(u, v)), (u, v));
        }
    }

    #[test]
    fn three_vertices_exhaust() {
        for mode in [StreamMode::Lazy, StreamMode::FullShuffle] {
            let mut s = EdgeStream::new(3, 5, mode).unwrap();
            let mut got: Vec<_> = (0..3).map(|_| s.next_pair().unwrap()).collect();
            got.sort();
            assert_eq!(got, vec![(0, 1), (0, 2), (1, 2)]);
            assert_eq!(s.next_pair(), Err(Error::Exhausted { total: 3 }));
        }
    }

    #[test]
    fn two_vertices_single_pair() {
        let mut s = EdgeStream::full_shuffle(2, 99).unwrap();
        assert_eq!(s.next_pair(), Ok((0, 1)));
        assert!(s.next_pair().is_err());
    }

    #[test]
    fn deterministic_for_seed() {
        let a: Vec<_> = EdgeStream::lazy(100, 7).take(500).collect();
        let b: Vec<_> = EdgeStream::lazy(100, 7).take(500).collect();
        assert_eq!(a, b);
        let c: Vec<_> = EdgeStream::lazy(100, 8).take(500).collect();
        assert_ne!(a, c);
    }

    #[test]
    fn full_shuffle_too_large() {
        assert!(matches!(
            EdgeStream::full_shuffle(FULL_SHUFFLE_MAX_N + 1, 0),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn lazy_switches_and_still_covers_every_pair() {
        for seed in 0..20 {
            let mut s = EdgeStream::lazy(40, seed);
            let mut seen = FxHashSet::default();
            while let Ok((u, v)) = s.next_pair() {
                assert!(u < v && v < 40);
                assert!(seen.insert((u, v)));
            }
            assert_eq!(seen.len() as u64, num_pairs(40));
        }
    }

    #[test]
    fn lazy_memory_tracks_emitted() {
        let mut s = EdgeStream::lazy(1_000_000, 3);
        for _ in 0..1000 {
            s.next_pair().unwrap();
        }
        match &s.sampler {
            Sampler::Lazy { seen } => assert_eq!(seen.len(), 1000),
            _ => panic!("lazy stream left rejection sampling early"),
        }
    }

    #[test]
    fn replay_rejects_repeats() {
        assert!(ReplayStream::new(3, vec![(0, 1), (1, 0)]).is_err());
        assert!(ReplayStream::new(3, vec![(2, 2)]).is_err());
        let mut r = ReplayStream::new(3, vec![(2, 0)]).unwrap();
        assert_eq!(r.next_pair(), Ok((0, 2)));
        assert!(r.next_pair().is_err());
    }
}
