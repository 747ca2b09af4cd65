//! (n, k) sweeps of the k-process.
//!
//! Points are visited in ascending `(n, k)` order and run `r` of the `i`-th
//! point uses seed `base_seed + i·reps + r`, so no seed repeats within a sweep
//! and the row order never depends on the worker count.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::milestones::{Milestones, Omega};
use crate::edge_stream::num_pairs;
use crate::error::{Error, Result};
use crate::par;
use crate::process::{run_kprocess, EventKind, EventSpec, ProcessConfig};
use crate::stats::RunAggregate;

/// An absolute k, or `alpha·n^beta` rounded and clamped to `[1, n]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum KSpec {
    Abs(usize),
    Power { alpha: f64, beta: f64 },
}

impl KSpec {
    pub fn resolve(&self, n: usize) -> usize {
        match *self {
            KSpec::Abs(k) => k,
            KSpec::Power { alpha, beta } => ((alpha * (n as f64).powf(beta)).round() as usize).clamp(1, n),
        }
    }
}

impl fmt::Display for KSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KSpec::Abs(k) => write!(f, "{k}"),
            KSpec::Power { alpha, beta } => write!(f, "{alpha}*n^{beta}"),
        }
    }
}

impl FromStr for KSpec {
    type Err = Error;

    /// `"100"`, or `"2*n^0.333"` / `"n^0.5"`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Ok(k) = s.parse::<usize>() {
            return Ok(KSpec::Abs(k));
        }
        let bad = || Error::InvalidConfig(format!("k must be an integer or alpha*n^beta, got {s:?}"));
        let (alpha, rest) = match s.split_once('*') {
            Some((a, r)) => (a.trim().parse::<f64>().map_err(|_| bad())?, r.trim()),
            None => (1.0, s),
        };
        let beta = rest.strip_prefix("n^").ok_or_else(bad)?.parse::<f64>().map_err(|_| bad())?;
        Ok(KSpec::Power { alpha, beta })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub ns: Vec<usize>,
    pub ks: Vec<KSpec>,
    pub reps: usize,
    pub base_seed: u64,
    pub omega: Omega,
    pub workers: Option<usize>,
}

impl SweepSpec {
    /// Distinct `(n, k)` points in ascending order.
    pub fn points(&self) -> Result<Vec<(usize, usize)>> {
        if self.reps == 0 {
            return Err(Error::InvalidConfig("repetitions must be at least 1".into()));
        }
        let mut pts = Vec::new();
        for &n in &self.ns {
            for ks in &self.ks {
                let k = ks.resolve(n);
                if k == 0 || k > n {
                    return Err(Error::InvalidConfig(format!("k = {k} outside [1, n] for n = {n}")));
                }
                pts.push((n, k));
            }
        }
        pts.sort_unstable();
        pts.dedup();
        Ok(pts)
    }
}

pub const M2_EVENT: &str = "m2";
pub const CHI_SNAPSHOT: &str = "m3";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    #[serde(rename = "M")]
    pub m: u64,
    #[serde(rename = "M_hat")]
    pub m_hat: u64,
    pub collisions: u64,
    #[serde(rename = "L1")]
    pub l1: usize,
    #[serde(rename = "L1_over_n")]
    pub l1_over_n: f64,
    /// Σ_{i≥2} L̂ᵢ at the m₂ event, if it fired.
    #[serde(rename = "Lhat2_sum")]
    pub lhat2_sum: Option<usize>,
    pub chi_at_m3: f64,
    pub m2_step: Option<u64>,
    pub runtime_ms: u64,
}

impl SweepRow {
    pub const HEADER: [&'static str; 12] = [
        "n", "k", "seed", "M", "M_hat", "collisions", "L1", "L1_over_n", "Lhat2_sum", "chi_at_m3", "m2_step",
        "runtime_ms",
    ];

    pub fn record(&self) -> Vec<String> {
        let opt = |o: Option<u64>| o.map(|v| v.to_string()).unwrap_or_default();
        vec![
            self.n.to_string(),
            self.k.to_string(),
            self.seed.to_string(),
            self.m.to_string(),
            self.m_hat.to_string(),
            self.collisions.to_string(),
            self.l1.to_string(),
            self.l1_over_n.to_string(),
            opt(self.lhat2_sum.map(|v| v as u64)),
            self.chi_at_m3.to_string(),
            opt(self.m2_step),
            self.runtime_ms.to_string(),
        ]
    }

    pub fn m_over_pairs(&self) -> f64 {
        self.m as f64 / num_pairs(self.n) as f64
    }
}

/// One k-process run to M̂ with the m₃ snapshot and the m₂ event registered.
pub fn run_point(n: usize, k: usize, seed: u64, omega: Omega) -> Result<SweepRow> {
    let ms = Milestones::new(n, k, omega);
    let start = Instant::now();
    let cfg = ProcessConfig::kprocess(n, k, seed)
        .snapshots(vec![ms.m3])
        .register_event(EventSpec::new(M2_EVENT, EventKind::LargestComponentSpecial { after: ms.m1 }))?;
    let rep = run_kprocess(&cfg)?;
    let runtime_ms = start.elapsed().as_millis() as u64;
    let m2 = rep.events.iter().find(|e| e.name == M2_EVENT);
    let l1 = rep.largest();
    Ok(SweepRow {
        n,
        k,
        seed,
        m: rep.m,
        m_hat: rep.m_hat.expect("k-process stopped at k components"),
        collisions: rep.collisions,
        l1,
        l1_over_n: l1 as f64 / n as f64,
        lhat2_sum: m2.map(|e| e.stats.lhat_rest_sum),
        chi_at_m3: rep.snapshot_at(ms.m3).map_or(f64::NAN, |s| s.chi),
        m2_step: m2.map(|e| e.step),
        runtime_ms,
    })
}

/// Run every point of `spec`; `on_point` sees each point's rows (in seed
/// order) as soon as they are complete, so callers can flush incrementally.
pub fn sweep(spec: &SweepSpec, mut on_point: impl FnMut(&[SweepRow]) -> Result<()>) -> Result<Vec<SweepRow>> {
    let points = spec.points()?;
    let mut all = Vec::with_capacity(points.len() * spec.reps);
    for (i, &(n, k)) in points.iter().enumerate() {
        let seeds: Vec<u64> =
            (0..spec.reps as u64).map(|r| spec.base_seed.wrapping_add(i as u64 * spec.reps as u64 + r)).collect();
        let rows = par::map(&seeds, spec.workers, |&s| run_point(n, k, s, spec.omega))
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        on_point(&rows)?;
        all.extend(rows);
    }
    Ok(all)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub n: usize,
    pub k: usize,
    pub metrics: BTreeMap<String, RunAggregate>,
}

impl AggregateRow {
    pub const METRICS: [&'static str; 5] = ["L1_over_n", "M_over_pairs", "M_hat", "collisions", "chi_at_m3"];

    pub fn header() -> Vec<String> {
        let mut h = vec!["n".to_string(), "k".to_string(), "runs".to_string()];
        for m in Self::METRICS {
            for s in ["mean", "stderr", "median", "p01", "p99"] {
                h.push(format!("{m}_{s}"));
            }
        }
        h
    }

    pub fn record(&self) -> Vec<String> {
        let runs = self.metrics.values().next().map_or(0, |a| a.count);
        let mut r = vec![self.n.to_string(), self.k.to_string(), runs.to_string()];
        for m in Self::METRICS {
            let a = &self.metrics[m];
            for v in [a.mean, a.stderr, a.median, a.p01, a.p99] {
                r.push(v.to_string());
            }
        }
        r
    }

    pub fn mean(&self, metric: &str) -> f64 {
        self.metrics[metric].mean
    }
}

/// Per-(n, k) aggregates of sweep rows, in ascending (n, k) order.
pub fn aggregate_rows(rows: &[SweepRow]) -> Result<Vec<AggregateRow>> {
    let mut groups: BTreeMap<(usize, usize), Vec<&SweepRow>> = BTreeMap::new();
    for r in rows {
        groups.entry((r.n, r.k)).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((n, k), rs)| {
            let seeds: Vec<u64> = rs.iter().map(|r| r.seed).collect();
            let selectors: [(&str, fn(&SweepRow) -> f64); 5] = [
                ("L1_over_n", |r| r.l1_over_n),
                ("M_over_pairs", |r| r.m_over_pairs()),
                ("M_hat", |r| r.m_hat as f64),
                ("collisions", |r| r.collisions as f64),
                ("chi_at_m3", |r| r.chi_at_m3),
            ];
            let mut metrics = BTreeMap::new();
            for (name, f) in selectors {
                let values: Vec<f64> = rs.iter().map(|r| f(r)).collect();
                metrics.insert(name.to_string(), RunAggregate::from_values(&values, &seeds)?);
            }
            Ok(AggregateRow { n, k, metrics })
        })
        .collect()
}
