//! The (C,x,y)-process: an urn where the q-th increment `c_q` goes to X with
//! probability `X/(X+Y)` and to Y otherwise. `X/(X+Y)` is a martingale.
//!
//! Each step consumes exactly one uniform variate in `[0, 1)`, so runs fed the
//! same variates are coupled.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::edge_stream::rng_from_seed;
use crate::error::{Error, Result};
use crate::par;
use crate::stats::RunAggregate;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CxyConfig {
    pub increments: Vec<u64>,
    pub x: u64,
    pub y: u64,
    pub seed: u64,
}

impl CxyConfig {
    pub fn new(increments: Vec<u64>, x: u64, y: u64, seed: u64) -> Result<Self> {
        if x == 0 || y == 0 {
            return Err(Error::InvalidConfig("x and y must be positive".into()));
        }
        if increments.contains(&0) {
            return Err(Error::InvalidConfig("every increment must be positive".into()));
        }
        Ok(CxyConfig { increments, x, y, seed })
    }

    /// c = max cᵢ (0 for an empty sequence).
    pub fn c_max(&self) -> u64 {
        self.increments.iter().copied().max().unwrap_or(0)
    }

    pub fn increment_sum(&self) -> u64 {
        self.increments.iter().sum()
    }

    /// t_r = x + y + Σ cᵢ.
    pub fn t_final(&self) -> u64 {
        self.x + self.y + self.increment_sum()
    }

    fn with_seed(&self, seed: u64) -> CxyConfig {
        CxyConfig { seed, ..self.clone() }
    }
}

/// Parse an increment list: `"5x1000"` (1000 copies of 5), a comma-separated
/// list, or a mix such as `"1x3,7"`.
pub fn parse_increments(spec: &str) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for (i, part) in spec.split(',').map(str::trim).filter(|p| !p.is_empty()).enumerate() {
        let bad = || Error::Parse { line: 1, msg: format!("increment item #{} {part:?} is not `c` or `cxN`", i + 1) };
        match part.split_once('x') {
            Some((c, reps)) => {
                let c: u64 = c.trim().parse().map_err(|_| bad())?;
                let reps: usize = reps.trim().parse().map_err(|_| bad())?;
                out.extend(std::iter::repeat_n(c, reps));
            }
            None => out.push(part.parse().map_err(|_| bad())?),
        }
    }
    Ok(out)
}

/// One positive integer per line; blank lines and `#` comments are skipped.
pub fn parse_increment_file(text: &str) -> Result<Vec<u64>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, l)| {
            l.trim()
                .parse()
                .map_err(|_| Error::Parse { line: i + 1, msg: format!("expected a positive integer, found {:?}", l.trim()) })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CxyTrajectory {
    /// t₀..t_r
    pub t: Vec<u64>,
    pub x: Vec<u64>,
    pub y: Vec<u64>,
    /// p₁..p_r, the probabilities used at each step.
    pub p: Vec<f64>,
}

impl CxyTrajectory {
    pub fn final_x(&self) -> u64 {
        *self.x.last().expect("trajectory always holds t0")
    }

    pub fn final_t(&self) -> u64 {
        *self.t.last().expect("trajectory always holds t0")
    }
}

/// Run with an explicit source of uniform variates.
pub fn run_cxy_with(increments: &[u64], x0: u64, y0: u64, mut uniform: impl FnMut() -> f64) -> CxyTrajectory {
    let r = increments.len();
    let mut traj = CxyTrajectory {
        t: Vec::with_capacity(r + 1),
        x: Vec::with_capacity(r + 1),
        y: Vec::with_capacity(r + 1),
        p: Vec::with_capacity(r),
    };
    let (mut x, mut y) = (x0, y0);
    traj.t.push(x + y);
    traj.x.push(x);
    traj.y.push(y);
    for &c in increments {
        let p = x as f64 / (x + y) as f64;
        if uniform() < p {
            x += c;
        } else {
            y += c;
        }
        traj.p.push(p);
        traj.t.push(x + y);
        traj.x.push(x);
        traj.y.push(y);
    }
    traj
}

pub fn run_cxy(cfg: &CxyConfig) -> CxyTrajectory {
    let mut rng = rng_from_seed(cfg.seed);
    run_cxy_with(&cfg.increments, cfg.x, cfg.y, || rng.gen::<f64>())
}

/// X(t_r) alone, without storing the trajectory. Same draws as [`run_cxy`].
pub fn final_x(cfg: &CxyConfig) -> u64 {
    let mut rng = rng_from_seed(cfg.seed);
    let (mut x, mut y) = (cfg.x, cfg.y);
    for &c in &cfg.increments {
        if rng.gen::<f64>() < x as f64 / (x + y) as f64 {
            x += c;
        } else {
            y += c;
        }
    }
    x
}

fn final_ratios(cfg: &CxyConfig, runs: usize) -> Vec<f64> {
    let seeds: Vec<u64> = (0..runs as u64).map(|i| cfg.seed.wrapping_add(i)).collect();
    let t = cfg.t_final() as f64;
    par::map(&seeds, None, |&s| final_x(&cfg.with_seed(s)) as f64 / t)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MartingaleCheck {
    /// x / (x + y)
    pub target: f64,
    pub mean: f64,
    pub stderr: f64,
    pub runs: usize,
}

/// Monte Carlo mean of X(t_r)/t_r over seeds `cfg.seed + i`.
pub fn check_martingale(cfg: &CxyConfig, runs: usize) -> Result<MartingaleCheck> {
    let ratios = final_ratios(cfg, runs);
    let agg = RunAggregate::from_values(&ratios, &[])?;
    Ok(MartingaleCheck { target: cfg.x as f64 / (cfg.x + cfg.y) as f64, mean: agg.mean, stderr: agg.stderr, runs })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChernoffBounds {
    pub mu: f64,
    pub c: u64,
    /// exp(−t²/(2c(μ+t/3))) for P(max_j (S_j − μ_j) ≥ t)
    pub upper: f64,
    /// exp(−t²/(2cμ)) for P(max_j (μ_j − S_j) ≥ t)
    pub lower: f64,
    /// 2exp(−ε²μ/(3c)) with ε = t/μ for P(max_j |S_j − μ_j| ≥ εμ); only stated for ε ≤ 3/2.
    pub two_sided: Option<f64>,
}

/// Tail bounds for weighted Bernoulli(p) partial sums with weights `increments`.
pub fn chernoff_bounds(increments: &[u64], p: f64, t: f64) -> Result<ChernoffBounds> {
    if increments.is_empty() || !(p > 0.0 && p < 1.0) || !(t >= 0.0) {
        return Err(Error::InvalidConfig(format!("need nonempty C, 0 < p < 1, t >= 0 (p = {p}, t = {t})")));
    }
    let c = *increments.iter().max().unwrap();
    let cf = c as f64;
    let mu = p * increments.iter().sum::<u64>() as f64;
    let eps = t / mu;
    Ok(ChernoffBounds {
        mu,
        c,
        upper: (-t * t / (2.0 * cf * (mu + t / 3.0))).exp(),
        lower: (-t * t / (2.0 * cf * mu)).exp(),
        two_sided: (eps <= 1.5).then(|| 2.0 * (-eps * eps * mu / (3.0 * cf)).exp()),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub t: f64,
    pub upper: f64,
    pub lower: f64,
    pub two_sided: f64,
    pub runs: usize,
}

impl TailEstimate {
    /// Binomial standard error of an estimated probability.
    pub fn sigma(&self, prob: f64) -> f64 {
        (prob * (1.0 - prob) / self.runs as f64).sqrt()
    }
}

/// Monte Carlo estimates of the three maximal-deviation tails on a grid of `t`.
pub fn empirical_tails(increments: &[u64], p: f64, ts: &[f64], runs: usize, seed: u64) -> Vec<TailEstimate> {
    let seeds: Vec<u64> = (0..runs as u64).map(|i| seed.wrapping_add(i)).collect();
    let devs = par::map(&seeds, None, |&s| {
        let mut rng = rng_from_seed(s);
        let (mut sum, mut mean) = (0.0f64, 0.0f64);
        let (mut up, mut down) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for &c in increments {
            if rng.gen::<f64>() < p {
                sum += c as f64;
            }
            mean += p * c as f64;
            up = up.max(sum - mean);
            down = down.max(mean - sum);
        }
        (up, down)
    });
    ts.iter()
        .map(|&t| {
            let frac = |f: &dyn Fn(&(f64, f64)) -> bool| devs.iter().filter(|d| f(d)).count() as f64 / runs as f64;
            TailEstimate {
                t,
                upper: frac(&|d| d.0 >= t),
                lower: frac(&|d| d.1 >= t),
                two_sided: frac(&|d| d.0.max(d.1) >= t),
                runs,
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KeyLemmaCheck {
    /// x·t_r/(x+y) + x/w
    pub threshold: f64,
    pub empirical: f64,
    pub stderr: f64,
    /// exp(−x/(12cw²))
    pub bound: f64,
    pub runs: usize,
}

impl KeyLemmaCheck {
    /// `empirical ≤ min(1, bound) + 3σ`
    pub fn holds(&self) -> bool {
        self.empirical <= self.bound.min(1.0) + 3.0 * self.stderr
    }
}

/// Estimate P(X(t_r) > x·t_r/(x+y) + x/w) against exp(−x/(12cw²)).
/// Requires Σcᵢ < (x+y)/2 and w ≥ 1.
pub fn check_key_lemma(cfg: &CxyConfig, w: f64, runs: usize) -> Result<KeyLemmaCheck> {
    if 2 * cfg.increment_sum() >= cfg.x + cfg.y {
        return Err(Error::HypothesisViolated(format!(
            "sum of increments {} is not below (x+y)/2 = {}",
            cfg.increment_sum(),
            (cfg.x + cfg.y) as f64 / 2.0
        )));
    }
    if !(w >= 1.0) {
        return Err(Error::HypothesisViolated(format!("w = {w} must be at least 1")));
    }
    if cfg.increments.is_empty() {
        return Err(Error::InvalidConfig("empty increment sequence".into()));
    }
    let (x, y, t) = (cfg.x as f64, cfg.y as f64, cfg.t_final() as f64);
    let threshold = x * t / (x + y) + x / w;
    let ratios = final_ratios(cfg, runs);
    let hits = ratios.iter().filter(|&&r| r * t > threshold).count() as f64;
    let empirical = hits / runs as f64;
    Ok(KeyLemmaCheck {
        threshold,
        empirical,
        stderr: (empirical * (1.0 - empirical) / runs as f64).sqrt(),
        bound: (-x / (12.0 * cfg.c_max() as f64 * w * w)).exp(),
        runs,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CxyLemmaReport {
    /// Distribution of X(t_r)·y/(x·t_r) across runs.
    pub scaled: RunAggregate,
    pub p90: f64,
    /// Median of X(t_r)/t_r.
    pub median_fraction: f64,
    /// exp(−x/(20c)), the stated failure probability.
    pub bound_prob: f64,
}

/// Distribution of X(t_r)·y/(x·t_r). Requires c ≤ y/100 and x ≤ y/100.
pub fn check_cxy_lemma(cfg: &CxyConfig, runs: usize) -> Result<CxyLemmaReport> {
    let c = cfg.c_max();
    if 100 * c > cfg.y || 100 * cfg.x > cfg.y {
        return Err(Error::HypothesisViolated(format!(
            "need c <= y/100 and x <= y/100 (c = {c}, x = {}, y = {})",
            cfg.x, cfg.y
        )));
    }
    if cfg.increments.is_empty() {
        return Err(Error::InvalidConfig("empty increment sequence".into()));
    }
    let fractions = final_ratios(cfg, runs);
    let scale = cfg.y as f64 / cfg.x as f64;
    let scaled: Vec<f64> = fractions.iter().map(|f| f * scale).collect();
    let agg = RunAggregate::from_values(&scaled, &[])?;
    let mut sorted = scaled;
    sorted.sort_by(f64::total_cmp);
    Ok(CxyLemmaReport {
        p90: crate::stats::nearest_rank(&sorted, 90.0),
        median_fraction: agg.median / scale,
        scaled: agg,
        bound_prob: (-(cfg.x as f64) / (20.0 * c as f64)).exp(),
    })
}
