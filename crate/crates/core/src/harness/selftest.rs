//! Fast deterministic checks run by `fusionproc selftest`.

use serde::Serialize;

use crate::cxy::{chernoff_bounds, run_cxy, CxyConfig};
use crate::edge_stream::{num_pairs, EdgeStream, PairSource};
use crate::greedy_cut::{brute_force_multiway_cut, build_example_graph, edge_first_greedy, WeightedGraph};
use crate::partition::{MergeOutcome, Partition};
use crate::process::{internal_pairs, run_cdf, run_gnm, run_kprocess, ProcessConfig, StopRule};
use crate::stats::{susceptibility, ComponentStats};

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type CheckFn = fn() -> Result<(), String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn partition_examples() -> Result<(), String> {
    let mut p = Partition::new(5, &[0, 1]).map_err(|e| e.to_string())?;
    ensure(p.try_union_kprocess(0, 1) == MergeOutcome::Collision, "special singletons must collide")?;
    ensure(p.try_union_kprocess(2, 3) == MergeOutcome::Merged, "(2,3) should merge")?;
    ensure(p.try_union_kprocess(2, 3) == MergeOutcome::SameComponent, "repeat should be same-component")?;
    let mut q = Partition::with_family(4, &[], &[vec![0, 1, 2]]).map_err(|e| e.to_string())?;
    q.try_union_cdf(0, 1);
    q.try_union_cdf(2, 3);
    ensure(q.try_union_cdf(1, 2) == MergeOutcome::Collision, "merge completing {0,1,2} must be rejected")
}

fn stream_exhaustion() -> Result<(), String> {
    let mut s = EdgeStream::lazy(3, 1);
    let mut got: Vec<_> = (0..3).filter_map(|_| s.next_pair().ok()).collect();
    got.sort();
    ensure(got == vec![(0, 1), (0, 2), (1, 2)], format!("n = 3 stream gave {got:?}"))?;
    ensure(s.next_pair().is_err(), "fourth pair should be Exhausted")?;
    let a: Vec<_> = EdgeStream::lazy(100, 7).take(300).collect();
    let b: Vec<_> = EdgeStream::lazy(100, 7).take(300).collect();
    ensure(a == b, "same seed must give the same sequence")
}

fn process_examples() -> Result<(), String> {
    let r = run_gnm(4, 6, 1).map_err(|e| e.to_string())?;
    ensure(r.final_sizes == vec![(4, 0)], "G(4,6) is K4")?;
    let r = run_kprocess(&ProcessConfig::kprocess(50, 50, 1)).map_err(|e| e.to_string())?;
    ensure(r.m == 0 && r.m_hat == Some(0), "k = n gives M = M_hat = 0")?;
    let r = run_kprocess(&ProcessConfig::kprocess(4, 1, 1).stop(StopRule::Exhaustive)).map_err(|e| e.to_string())?;
    ensure(r.m == 6, "k = 1, n = 4 gives M = 6")?;
    let r = run_cdf(&ProcessConfig::cdf(8, vec![], 3)).map_err(|e| e.to_string())?;
    ensure(r.m == num_pairs(8) && r.final_sizes.len() == 1, "empty family connects everything")
}

fn kprocess_invariants() -> Result<(), String> {
    for seed in 0..50 {
        let early = ProcessConfig::kprocess(12, 3, seed);
        let ex = early.clone().stop(StopRule::Exhaustive);
        let (a, b) = (run_kprocess(&early).map_err(|e| e.to_string())?, run_kprocess(&ex).map_err(|e| e.to_string())?);
        ensure(a == b, format!("seed {seed}: early stop differs from exhaustive"))?;
        ensure(b.m + b.collisions == num_pairs(12), "M + collisions = C(n,2)")?;
        ensure(b.m == internal_pairs(&b.final_sizes), "M = sum C(s_i,2)")?;
        ensure(b.m <= num_pairs(12 - 3 + 1), "M <= C(n-k+1,2)")?;
        ensure(b.final_sizes.len() == 3 && b.final_sizes.iter().all(|c| c.1 == 1), "k components, one special each")?;
    }
    Ok(())
}

fn greedy_examples() -> Result<(), String> {
    let g = WeightedGraph::new(2, vec![(0, 1, 3.0)]).map_err(|e| e.to_string())?;
    let r = edge_first_greedy(&g, &[0, 1], 0).map_err(|e| e.to_string())?;
    ensure(r.removed_weight == 3.0, "single terminal edge is cut")?;
    let (g, t) = build_example_graph(3, 0.5).map_err(|e| e.to_string())?;
    ensure(g.total_weight() == 40.5, format!("example total weight {}", g.total_weight()))?;
    let r = edge_first_greedy(&g, &t, 0).map_err(|e| e.to_string())?;
    ensure(r.retained_weight == 13.5, format!("example retained weight {}", r.retained_weight))?;
    let g = WeightedGraph::new(3, vec![(0, 1, 5.0), (1, 2, 3.0)]).map_err(|e| e.to_string())?;
    let opt = brute_force_multiway_cut(&g, &[0, 2]).map_err(|e| e.to_string())?;
    ensure(opt.removed_weight == 3.0, "path optimum is 3")
}

fn stats_examples() -> Result<(), String> {
    ensure(susceptibility(&[2, 1, 1]) == 1.5, "chi(2,1,1) = 1.5")?;
    ensure(susceptibility(&[1; 5]) == 1.0, "chi of isolated vertices is 1")?;
    ensure(susceptibility(&[7]) == 7.0, "chi of one component is n")?;
    let s = ComponentStats::from_sizes(&[(5, 0), (3, 0), (1, 0)]);
    ensure(s.l(2) == Ok(3) && s.l(9) == Ok(0), "order statistics")
}

fn cxy_examples() -> Result<(), String> {
    let cfg = CxyConfig::new(vec![], 2, 3, 0).map_err(|e| e.to_string())?;
    let tr = run_cxy(&cfg);
    ensure(tr.x == vec![2] && tr.y == vec![3], "empty C leaves (x, y)")?;
    let cfg = CxyConfig::new(vec![3; 40], 2, 5, 9).map_err(|e| e.to_string())?;
    let tr = run_cxy(&cfg);
    ensure((0..tr.t.len()).all(|q| tr.x[q] + tr.y[q] == tr.t[q]), "X + Y = t at every step")?;
    let b = chernoff_bounds(&[1; 100], 0.5, 0.0).map_err(|e| e.to_string())?;
    ensure(b.upper == 1.0 && b.lower == 1.0, "t = 0 bounds are 1")
}

const CHECKS: [(&str, CheckFn); 7] = [
    ("partition examples", partition_examples),
    ("edge stream exhaustion and determinism", stream_exhaustion),
    ("process examples", process_examples),
    ("k-process invariants", kprocess_invariants),
    ("greedy cut examples", greedy_examples),
    ("stats examples", stats_examples),
    ("rich-get-richer examples", cxy_examples),
];

pub fn run_all() -> Vec<Check> {
    CHECKS
        .iter()
        .map(|&(name, f)| match f() {
            Ok(()) => Check { name, passed: true, detail: String::new() },
            Err(detail) => Check { name, passed: false, detail },
        })
        .collect()
}
