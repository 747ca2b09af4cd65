//! Locate k* where the mean final L₁/n of the k-process crosses 1/2.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::process::{run_kprocess, ProcessConfig};
use crate::stats::RunAggregate;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub k: usize,
    pub mean: f64,
    pub stderr: f64,
    pub runs: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "kebab-case")]
pub enum PhaseEstimate {
    Crossing {
        k_star: f64,
        k_star_over_cuberoot: f64,
        /// Delta-method standard error of ln k*.
        ln_k_star_stderr: f64,
        bracket: (usize, usize),
        points: Vec<PhasePoint>,
    },
    NoCrossing {
        points: Vec<PhasePoint>,
    },
}

impl PhaseEstimate {
    pub fn k_star(&self) -> Option<f64> {
        match self {
            PhaseEstimate::Crossing { k_star, .. } => Some(*k_star),
            PhaseEstimate::NoCrossing { .. } => None,
        }
    }
}

/// Interpolate linearly in (ln k, mean) between the first bracketing pair of
/// points, `points` sorted by k.
pub fn interpolate_crossing(n: usize, points: Vec<PhasePoint>) -> PhaseEstimate {
    let found = points.windows(2).find(|w| w[0].mean >= 0.5 && w[1].mean < 0.5).map(|w| (w[0].clone(), w[1].clone()));
    let Some((a, b)) = found else {
        return PhaseEstimate::NoCrossing { points };
    };
    let (la, lb) = ((a.k as f64).ln(), (b.k as f64).ln());
    let dy = b.mean - a.mean;
    let ln_k = la + (0.5 - a.mean) / dy * (lb - la);
    let d_ya = (lb - la) * (0.5 - b.mean) / (dy * dy);
    let d_yb = -(lb - la) * (0.5 - a.mean) / (dy * dy);
    let ln_k_star_stderr = ((d_ya * a.stderr).powi(2) + (d_yb * b.stderr).powi(2)).sqrt();
    let k_star = ln_k.exp();
    PhaseEstimate::Crossing {
        k_star,
        k_star_over_cuberoot: k_star / (n as f64).cbrt(),
        ln_k_star_stderr,
        bracket: (a.k, b.k),
        points,
    }
}

/// Mean final L₁/n per k over `reps` seeds `base_seed + i·reps + r`, then the crossing.
pub fn phase_estimate(
    n: usize,
    ks: &[usize],
    reps: usize,
    base_seed: u64,
    workers: Option<usize>,
) -> Result<PhaseEstimate> {
    if reps == 0 || ks.is_empty() {
        return Err(Error::InvalidConfig("need at least one k and one repetition".into()));
    }
    let mut ks = ks.to_vec();
    ks.sort_unstable();
    ks.dedup();
    let mut points = Vec::with_capacity(ks.len());
    for (i, &k) in ks.iter().enumerate() {
        let seeds: Vec<u64> = (0..reps as u64).map(|r| base_seed.wrapping_add(i as u64 * reps as u64 + r)).collect();
        let fracs = par::map(&seeds, workers, |&s| {
            run_kprocess(&ProcessConfig::kprocess(n, k, s)).map(|r| r.largest() as f64 / n as f64)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        let agg = RunAggregate::from_values(&fracs, &seeds)?;
        points.push(PhasePoint { k, mean: agg.mean, stderr: agg.stderr, runs: reps });
    }
    Ok(interpolate_crossing(n, points))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(k: usize, mean: f64, stderr: f64) -> PhasePoint {
        PhasePoint { k, mean, stderr, runs: 10 }
    }

    #[test]
    fn interpolation_midpoint() {
        let est = interpolate_crossing(1000, vec![pt(10, 0.9, 0.0), pt(1000, 0.1, 0.0)]);
        let k = est.k_star().unwrap();
        assert!((k - 100.0).abs() < 1e-9);
        match est {
            PhaseEstimate::Crossing { bracket, ln_k_star_stderr, k_star_over_cuberoot, .. } => {
                assert_eq!(bracket, (10, 1000));
                assert_eq!(ln_k_star_stderr, 0.0);
                assert!((k_star_over_cuberoot - 10.0).abs() < 1e-9);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn no_crossing() {
        let est = interpolate_crossing(1000, vec![pt(1, 0.99, 0.0), pt(2, 0.98, 0.0)]);
        assert_eq!(est.k_star(), None);
    }

    #[test]
    fn small_grid_in_regime_a() {
        let est = phase_estimate(2000, &[1, 2], 3, 0, None).unwrap();
        assert!(matches!(est, PhaseEstimate::NoCrossing { .. }));
    }
}
