use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::edge_stream::num_pairs;
use crate::error::Error;

/// The slowly growing function ω(n). Logs are natural.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub enum Omega {
    #[default]
    LogLog,
    Log,
    Const(f64),
}

impl Omega {
    pub fn value(&self, n: usize) -> f64 {
        let n = n as f64;
        match *self {
            Omega::LogLog => n.ln().ln(),
            Omega::Log => n.ln(),
            Omega::Const(c) => c,
        }
    }
}

impl fmt::Display for Omega {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Omega::LogLog => f.write_str("loglog"),
            Omega::Log => f.write_str("log"),
            Omega::Const(c) => write!(f, "const:{c}"),
        }
    }
}

impl FromStr for Omega {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "loglog" => Ok(Omega::LogLog),
            "log" => Ok(Omega::Log),
            _ => s
                .strip_prefix("const:")
                .and_then(|c| c.parse::<f64>().ok())
                .filter(|c| *c > 0.0)
                .map(Omega::Const)
                .ok_or_else(|| Error::InvalidConfig(format!("omega must be loglog, log or const:<c > 0>, got {s:?}"))),
        }
    }
}

/// Milestone steps for an (n, k) pair. Steps index considered pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Milestones {
    pub n: usize,
    pub k: usize,
    pub omega: String,
    pub omega_value: f64,
    /// n^{1/3}/(kω)
    pub lambda1: f64,
    /// ⌊(n/2)(1 + λ₁n^{−1/3})⌋
    pub m1: u64,
    /// n^{1/3}ω/k
    pub lambda2: f64,
    /// ⌊(n/2)(1 + λ₂n^{−1/3})⌋, the step by which the largest component is expected to turn special
    pub m2_upper: u64,
    /// (k·log(k/n^{1/3})/n^{1/3})^{1/2}, with the log clamped below at 1
    pub lambda3: f64,
    /// ⌊(n/2)(1 − λ₃n^{−1/3})⌋, floored at 0
    pub m3: u64,
    pub lambda3_clamped: bool,
}

fn step_at(n: usize, lambda: f64) -> u64 {
    let n_f = n as f64;
    let m = (n_f / 2.0) * (1.0 + lambda / n_f.cbrt());
    (m.floor().max(0.0) as u64).min(num_pairs(n))
}

impl Milestones {
    pub fn new(n: usize, k: usize, omega: Omega) -> Self {
        let w = omega.value(n);
        let cube = (n as f64).cbrt();
        let k_f = k as f64;
        let lambda1 = cube / (k_f * w);
        let lambda2 = cube * w / k_f;
        let raw_log = (k_f / cube).ln();
        let lambda3_clamped = raw_log < 1.0;
        let lambda3 = (k_f / cube * raw_log.max(1.0)).sqrt();
        Milestones {
            n,
            k,
            omega: omega.to_string(),
            omega_value: w,
            lambda1,
            m1: step_at(n, lambda1),
            lambda2,
            m2_upper: step_at(n, lambda2),
            lambda3,
            m3: step_at(n, -lambda3),
            lambda3_clamped,
        }
    }
}
