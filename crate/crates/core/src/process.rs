//! Runs G(n,m), the k-process (as the Ĝ_k(n,m) coupling) and the CDF-process
//! over a pair stream and a [`Partition`].
//!
//! Step indices count considered pairs, accepted or rejected. Snapshots and
//! events are evaluated after the pair at that step has been processed; step 0
//! is the empty graph.
//!
//! In [`StopRule::AtKComponents`] mode a k-process stops at M̂, the first step
//! with k components. From then on every component holds exactly one special
//! vertex, so each remaining pair is either internal (accepted) or a collision,
//! and the final report follows from the frozen component sizes:
//! `M = Σ C(sᵢ, 2)` and `collisions = C(n, 2) − M`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::edge_stream::{num_pairs, EdgeStream, PairSource, StreamMode};
use crate::error::{Error, Result};
use crate::partition::{MergeOutcome, Partition};
use crate::stats::{ComponentStats, SnapshotStats};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Constraint {
    /// Plain random graph process: every pair is added.
    Unconstrained,
    /// k-process rule over these special vertices.
    Specials(Vec<usize>),
    /// CDF-process rule over this forbidden-set family.
    Family(Vec<Vec<usize>>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopRule {
    AtKComponents,
    AtStep(u64),
    Exhaustive,
}

pub type EventPredicate = Arc<dyn Fn(u64, &Partition) -> bool + Send + Sync>;

#[derive(Clone)]
pub enum EventKind {
    /// The unique largest component contains a special vertex, at some step after `after`.
    LargestComponentSpecial { after: u64 },
    /// The component count has dropped to (at most) the given value.
    ComponentCountReaches(usize),
    /// Arbitrary predicate. Under early stopping it is not re-evaluated past the stop step.
    Custom(EventPredicate),
}

impl fmt::Debug for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EventKind::LargestComponentSpecial { after } => {
                f.debug_struct("LargestComponentSpecial").field("after", after).finish()
            }
            EventKind::ComponentCountReaches(c) => f.debug_tuple("ComponentCountReaches").field(c).finish(),
            EventKind::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl EventKind {
    fn holds(&self, step: u64, p: &Partition) -> bool {
        match self {
            EventKind::LargestComponentSpecial { after } => step > *after && p.unique_largest_is_special(),
            EventKind::ComponentCountReaches(c) => p.num_components() <= *c,
            EventKind::Custom(pred) => pred(step, p),
        }
    }
}

#[derive(Clone, Debug)]
pub struct EventSpec {
    pub name: String,
    pub kind: EventKind,
}

impl EventSpec {
    pub fn new(name: impl Into<String>, kind: EventKind) -> Self {
        EventSpec { name: name.into(), kind }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub name: String,
    pub step: u64,
    /// Component statistics at the trigger step.
    pub stats: SnapshotStats,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub step: u64,
    pub stats: SnapshotStats,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub u: usize,
    pub v: usize,
    pub outcome: MergeOutcome,
}

#[derive(Clone, Debug)]
pub struct ProcessConfig {
    pub n: usize,
    pub constraint: Constraint,
    pub seed: u64,
    pub stream: StreamMode,
    pub snapshot_steps: Vec<u64>,
    pub stop: StopRule,
    pub record_trace: bool,
    events: Vec<EventSpec>,
}

impl ProcessConfig {
    fn base(n: usize, constraint: Constraint, seed: u64, stop: StopRule) -> Self {
        ProcessConfig {
            n,
            constraint,
            seed,
            stream: StreamMode::Lazy,
            snapshot_steps: Vec::new(),
            stop,
            record_trace: false,
            events: Vec::new(),
        }
    }

    /// k-process with specials `0..k`, stopping at M̂.
    ///
    /// The pair stream is uniform and independent of the special set, so which
    /// k vertices are special does not affect the law of the process.
    pub fn kprocess(n: usize, k: usize, seed: u64) -> Self {
        Self::base(n, Constraint::Specials((0..k).collect()), seed, StopRule::AtKComponents)
    }

    pub fn with_specials(n: usize, specials: Vec<usize>, seed: u64) -> Self {
        Self::base(n, Constraint::Specials(specials), seed, StopRule::AtKComponents)
    }

    pub fn cdf(n: usize, family: Vec<Vec<usize>>, seed: u64) -> Self {
        Self::base(n, Constraint::Family(family), seed, StopRule::Exhaustive)
    }

    pub fn gnm(n: usize, m: u64, seed: u64) -> Self {
        Self::base(n, Constraint::Unconstrained, seed, StopRule::AtStep(m))
    }

    pub fn stop(mut self, stop: StopRule) -> Self {
        self.stop = stop;
        self
    }

    pub fn stream(mut self, mode: StreamMode) -> Self {
        self.stream = mode;
        self
    }

    pub fn snapshots(mut self, steps: Vec<u64>) -> Self {
        self.snapshot_steps = steps;
        self
    }

    pub fn trace(mut self, on: bool) -> Self {
        self.record_trace = on;
        self
    }

    pub fn register_event(mut self, spec: EventSpec) -> Result<Self> {
        if self.events.iter().any(|e| e.name == spec.name) {
            return Err(Error::DuplicateEvent(spec.name));
        }
        self.events.push(spec);
        Ok(self)
    }

    pub fn events(&self) -> &[EventSpec] {
        &self.events
    }

    /// Number of special vertices (0 unless the constraint is [`Constraint::Specials`]).
    pub fn k(&self) -> usize {
        match &self.constraint {
            Constraint::Specials(s) => s.len(),
            _ => 0,
        }
    }

    fn validate(&self) -> Result<()> {
        let total = num_pairs(self.n);
        if self.snapshot_steps.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig("snapshot steps must be strictly increasing".into()));
        }
        let limit = match self.stop {
            StopRule::AtStep(m) => {
                if m > total {
                    return Err(Error::InvalidConfig(format!("m = {m} exceeds C(n,2) = {total}")));
                }
                m
            }
            _ => total,
        };
        if let Some(&last) = self.snapshot_steps.last() {
            if last > limit {
                return Err(Error::InvalidConfig(format!(
                    "snapshot step {last} lies beyond the last step {limit}"
                )));
            }
        }
        match (&self.constraint, self.stop) {
            (Constraint::Specials(s), StopRule::AtKComponents) if s.is_empty() => Err(
                Error::InvalidConfig("stopping at k components needs at least one special vertex".into()),
            ),
            (Constraint::Specials(_), _) => Ok(()),
            (_, StopRule::AtKComponents) => Err(Error::InvalidConfig(
                "stopping at k components is only defined for the k-process".into(),
            )),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProcessReport {
    pub n: usize,
    pub k: usize,
    /// `(size, special_count)` per final component, largest first.
    pub final_sizes: Vec<(usize, usize)>,
    /// Accepted pairs (edges of the final graph).
    pub m: u64,
    /// k-process: first step with k components. Exhaustive runs of other
    /// processes: step of the last accepted merge, after which the component
    /// structure never changes.
    pub m_hat: Option<u64>,
    pub collisions: u64,
    pub snapshots: Vec<Snapshot>,
    pub events: Vec<EventRecord>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trace: Option<Vec<TraceEntry>>,
}

impl ProcessReport {
    pub fn largest(&self) -> usize {
        self.final_sizes.first().map_or(0, |c| c.0)
    }

    pub fn event_step(&self, name: &str) -> Option<u64> {
        self.events.iter().find(|e| e.name == name).map(|e| e.step)
    }

    pub fn snapshot_at(&self, step: u64) -> Option<&SnapshotStats> {
        self.snapshots.iter().find(|s| s.step == step).map(|s| &s.stats)
    }

    pub fn stats(&self) -> ComponentStats {
        ComponentStats::from_sizes(&self.final_sizes)
    }
}

/// Σ C(sᵢ, 2) over component sizes.
pub fn internal_pairs(sizes: &[(usize, usize)]) -> u64 {
    sizes.iter().map(|&(s, _)| num_pairs(s)).sum()
}

struct Recorder<'a> {
    cfg: &'a ProcessConfig,
    next_snapshot: usize,
    snapshots: Vec<Snapshot>,
    fired: Vec<Option<EventRecord>>,
}

impl<'a> Recorder<'a> {
    fn new(cfg: &'a ProcessConfig) -> Self {
        Recorder { cfg, next_snapshot: 0, snapshots: Vec::new(), fired: vec![None; cfg.events.len()] }
    }

    fn observe(&mut self, step: u64, p: &Partition) {
        let mut cached: Option<SnapshotStats> = None;
        let mut summary = |p: &Partition| cached.get_or_insert_with(|| ComponentStats::from_partition(p).summary()).clone();
        while self.cfg.snapshot_steps.get(self.next_snapshot) == Some(&step) {
            self.snapshots.push(Snapshot { step, stats: summary(p) });
            self.next_snapshot += 1;
        }
        for (spec, slot) in self.cfg.events.iter().zip(self.fired.iter_mut()) {
            if slot.is_none() && spec.kind.holds(step, p) {
                *slot = Some(EventRecord { name: spec.name.clone(), step, stats: summary(p) });
            }
        }
    }

    /// Fill in what a frozen structure would produce for every later step.
    fn freeze(&mut self, stop_step: u64, total: u64, p: &Partition) {
        let stats = ComponentStats::from_partition(p).summary();
        for &step in &self.cfg.snapshot_steps[self.next_snapshot..] {
            self.snapshots.push(Snapshot { step, stats: stats.clone() });
        }
        self.next_snapshot = self.cfg.snapshot_steps.len();
        for (spec, slot) in self.cfg.events.iter().zip(self.fired.iter_mut()) {
            if slot.is_some() {
                continue;
            }
            if let EventKind::LargestComponentSpecial { after } = spec.kind {
                let step = stop_step.max(after + 1);
                if step <= total && p.unique_largest_is_special() {
                    *slot = Some(EventRecord { name: spec.name.clone(), step, stats: stats.clone() });
                }
            }
        }
    }

    fn finish(self) -> (Vec<Snapshot>, Vec<EventRecord>) {
        (self.snapshots, self.fired.into_iter().flatten().collect())
    }
}

enum Rule {
    Unconstrained,
    KProcess,
    Cdf,
}

/// Run `cfg` over an explicit pair source.
pub fn run_with_source<S: PairSource>(cfg: &ProcessConfig, source: &mut S) -> Result<ProcessReport> {
    cfg.validate()?;
    if source.n() != cfg.n {
        return Err(Error::InvalidConfig(format!("pair source has n = {}, config n = {}", source.n(), cfg.n)));
    }
    let n = cfg.n;
    let total = num_pairs(n);
    let (mut part, rule) = match &cfg.constraint {
        Constraint::Unconstrained => (Partition::new(n, &[])?, Rule::Unconstrained),
        Constraint::Specials(s) => (Partition::new(n, s)?, Rule::KProcess),
        Constraint::Family(f) => (Partition::with_family(n, &[], f)?, Rule::Cdf),
    };
    let k = cfg.k();
    let limit = match cfg.stop {
        StopRule::AtStep(m) => m,
        _ => total,
    };

    let mut rec = Recorder::new(cfg);
    let mut trace = cfg.record_trace.then(Vec::new);
    let (mut accepted, mut collisions, mut last_merge) = (0u64, 0u64, 0u64);
    let reached_k = |p: &Partition| matches!(rule, Rule::KProcess) && p.num_components() == k;
    let mut m_hat = reached_k(&part).then_some(0);
    rec.observe(0, &part);

    let mut step = 0u64;
    let early = cfg.stop == StopRule::AtKComponents;
    while step < limit && !(early && m_hat.is_some()) {
        let (u, v) = source.next_pair()?;
        step += 1;
        let outcome = match rule {
            Rule::Unconstrained => part.union_unconstrained(u, v),
            Rule::KProcess => part.try_union_kprocess(u, v),
            Rule::Cdf => part.try_union_cdf(u, v),
        };
        match outcome {
            MergeOutcome::Merged => {
                accepted += 1;
                last_merge = step;
            }
            MergeOutcome::SameComponent => accepted += 1,
            MergeOutcome::Collision => collisions += 1,
        }
        if let Some(t) = trace.as_mut() {
            t.push(TraceEntry { u, v, outcome });
        }
        if m_hat.is_none() && reached_k(&part) {
            m_hat = Some(step);
        }
        rec.observe(step, &part);
    }

    let final_sizes = part.component_sizes();
    let (m, collisions) = if early {
        rec.freeze(step, total, &part);
        let m = internal_pairs(&final_sizes);
        (m, total - m)
    } else {
        (accepted, collisions)
    };
    if m_hat.is_none() && cfg.stop == StopRule::Exhaustive && !matches!(rule, Rule::KProcess) {
        m_hat = Some(last_merge);
    }
    let (snapshots, events) = rec.finish();
    Ok(ProcessReport { n, k, final_sizes, m, m_hat, collisions, snapshots, events, trace })
}

/// Run `cfg` over the seeded edge stream it names.
pub fn run(cfg: &ProcessConfig) -> Result<ProcessReport> {
    let mut stream = EdgeStream::new(cfg.n, cfg.seed, cfg.stream)?;
    run_with_source(cfg, &mut stream)
}

/// G(n, m): the first `m` pairs of the stream, all added.
pub fn run_gnm(n: usize, m: u64, seed: u64) -> Result<ProcessReport> {
    run(&ProcessConfig::gnm(n, m, seed).snapshots(vec![m]))
}

pub fn run_kprocess(cfg: &ProcessConfig) -> Result<ProcessReport> {
    match &cfg.constraint {
        Constraint::Specials(s) if !s.is_empty() && s.len() <= cfg.n => run(cfg),
        _ => Err(Error::InvalidConfig("the k-process needs 1 <= k <= n special vertices".into())),
    }
}

pub fn run_cdf(cfg: &ProcessConfig) -> Result<ProcessReport> {
    match &cfg.constraint {
        Constraint::Family(_) => run(cfg),
        _ => Err(Error::InvalidConfig("the CDF-process needs a forbidden family".into())),
    }
}

/// Two k-processes on one pair sequence, specials `0..k1` nested inside `0..k2`.
pub fn run_coupled_monotonicity(
    n: usize,
    k1: usize,
    k2: usize,
    seed: u64,
    snapshot_steps: Vec<u64>,
) -> Result<(ProcessReport, ProcessReport)> {
    if !(1 <= k1 && k1 <= k2 && k2 <= n) {
        return Err(Error::InvalidConfig(format!("need 1 <= k1 <= k2 <= n, got k1 = {k1}, k2 = {k2}, n = {n}")));
    }
    let a = run_kprocess(&ProcessConfig::kprocess(n, k1, seed).snapshots(snapshot_steps.clone()))?;
    let b = run_kprocess(&ProcessConfig::kprocess(n, k2, seed).snapshots(snapshot_steps))?;
    Ok((a, b))
}
