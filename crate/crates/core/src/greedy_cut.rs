//! Edge-first greedy multiway cut, an exact labeling oracle for small
//! instances, and the clique family on which the greedy is a factor `n` off.

use rand::seq::SliceRandom;
use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use crate::edge_stream::{pair_index, rng_from_seed};
use crate::error::{Error, Result};
use crate::partition::{MergeOutcome, Partition};

/// Labelings the exact oracle is willing to enumerate.
pub const ORACLE_LIMIT: u128 = 10_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
}

impl WeightedGraph {
    /// Endpoints are normalized to `u < v`. Self-loops, repeated pairs and
    /// negative or non-finite weights are rejected.
    pub fn new(n: usize, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        let mut seen = FxHashSet::default();
        let mut out = Vec::with_capacity(edges.len());
        for (a, b, w) in edges {
            let (u, v) = if a < b { (a, b) } else { (b, a) };
            if v >= n {
                return Err(Error::VertexOutOfRange { vertex: v, n });
            }
            if u == v {
                return Err(Error::InvalidConfig(format!("self-loop at vertex {u}")));
            }
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidConfig(format!("edge ({a}, {b}) has weight {w}; weights must be finite and >= 0")));
            }
            if !seen.insert(pair_index(u, v)) {
                return Err(Error::InvalidConfig(format!("edge ({u}, {v}) listed twice")));
            }
            out.push((u, v, w));
        }
        Ok(WeightedGraph { n, edges: out })
    }

    /// Parse the text format: a header line `n m`, then `m` lines `u v w`.
    /// Blank lines and lines starting with `#` are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "missing header `n m`".into() })?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let [n, m] = fields[..] else {
            return Err(Error::Parse { line: hline, msg: format!("expected `n m`, found {header:?}") });
        };
        let parse_usize = |s: &str, line: usize, what: &str| {
            s.parse::<usize>().map_err(|_| Error::Parse { line, msg: format!("invalid {what} {s:?}") })
        };
        let n = parse_usize(n, hline, "vertex count")?;
        let m = parse_usize(m, hline, "edge count")?;

        let mut edges = Vec::with_capacity(m);
        for (line, l) in lines {
            let f: Vec<&str> = l.split_whitespace().collect();
            let [u, v, w] = f[..] else {
                return Err(Error::Parse { line, msg: format!("expected `u v w`, found {l:?}") });
            };
            let u = parse_usize(u, line, "vertex")?;
            let v = parse_usize(v, line, "vertex")?;
            let w: f64 = w.parse().map_err(|_| Error::Parse { line, msg: format!("invalid weight {w:?}") })?;
            if u >= n || v >= n || u == v || !w.is_finite() || w < 0.0 {
                return Err(Error::Parse { line, msg: format!("edge ({u}, {v}, {w}) is invalid for n = {n}") });
            }
            edges.push((u, v, w));
        }
        if edges.len() != m {
            return Err(Error::Parse {
                line: text.lines().count(),
                msg: format!("header promises {m} edges, found {}", edges.len()),
            });
        }
        Self::new(n, edges)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.n, self.edges.len());
        for &(u, v, w) in &self.edges {
            s.push_str(&format!("{u} {v} {w}\n"));
        }
        s
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.2).sum()
    }

    fn check_terminals(&self, terminals: &[usize]) -> Result<()> {
        if terminals.len() < 2 {
            return Err(Error::InvalidConfig("a multiway cut needs at least two terminals".into()));
        }
        if let Some(&t) = terminals.iter().find(|&&t| t >= self.n) {
            return Err(Error::VertexOutOfRange { vertex: t, n: self.n });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutResult {
    /// Indices into [`WeightedGraph::edges`].
    pub retained: Vec<usize>,
    /// The cut R.
    pub removed: Vec<usize>,
    pub retained_weight: f64,
    pub removed_weight: f64,
    /// Component label per vertex (smallest vertex of its component).
    pub labels: Vec<usize>,
}

/// Edge indices by decreasing weight; ties in a seeded uniform order.
pub fn greedy_order(g: &WeightedGraph, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..g.edges.len()).collect();
    order.shuffle(&mut rng_from_seed(seed));
    order.sort_by(|&a, &b| g.edges[b].2.total_cmp(&g.edges[a].2));
    order
}

/// Keep each edge, heaviest first, unless it would connect two terminals.
pub fn edge_first_greedy(g: &WeightedGraph, terminals: &[usize], seed: u64) -> Result<CutResult> {
    g.check_terminals(terminals)?;
    let mut part = Partition::new(g.n, terminals)?;
    let (mut retained, mut removed) = (Vec::new(), Vec::new());
    let (mut retained_weight, mut removed_weight) = (0.0, 0.0);
    for i in greedy_order(g, seed) {
        let (u, v, w) = g.edges[i];
        if part.try_union_kprocess(u, v) == MergeOutcome::Collision {
            removed.push(i);
            removed_weight += w;
        } else {
            retained.push(i);
            retained_weight += w;
        }
    }
    Ok(CutResult { retained, removed, retained_weight, removed_weight, labels: part.labels() })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactCut {
    pub removed_weight: f64,
    pub removed: Vec<usize>,
    /// Terminal index assigned to each vertex.
    pub labels: Vec<usize>,
}

/// Optimal multiway cut by enumerating every assignment of non-terminal
/// vertices to terminals. A valid cut induces such an assignment (label each
/// component by its terminal, arbitrarily if it has none) and the cross-label
/// edges of any assignment form a valid cut, so the minimum over assignments
/// is the optimum.
pub fn brute_force_multiway_cut(g: &WeightedGraph, terminals: &[usize]) -> Result<ExactCut> {
    g.check_terminals(terminals)?;
    let k = terminals.len();
    let mut fixed = vec![None; g.n];
    for (label, &t) in terminals.iter().enumerate() {
        if fixed[t].replace(label).is_some() {
            return Err(Error::DuplicateSpecial(t));
        }
    }
    let free: Vec<usize> = (0..g.n).filter(|&v| fixed[v].is_none()).collect();
    let count = (k as u128).checked_pow(free.len() as u32).unwrap_or(u128::MAX);
    if count > ORACLE_LIMIT {
        return Err(Error::InstanceTooLarge(count));
    }

    let mut labels: Vec<usize> = fixed.iter().map(|l| l.unwrap_or(0)).collect();
    let cost = |labels: &[usize]| -> f64 {
        g.edges.iter().filter(|e| labels[e.0] != labels[e.1]).map(|e| e.2).sum()
    };
    let mut best = (cost(&labels), labels.clone());
    // odometer over the free vertices
    'outer: loop {
        for &v in &free {
            labels[v] += 1;
            if labels[v] < k {
                let c = cost(&labels);
                if c < best.0 {
                    best = (c, labels.clone());
                }
                continue 'outer;
            }
            labels[v] = 0;
        }
        break;
    }
    let (removed_weight, labels) = best;
    let removed = (0..g.edges.len()).filter(|&i| labels[g.edges[i].0] != labels[g.edges[i].1]).collect();
    Ok(ExactCut { removed_weight, removed, labels })
}

/// `K_{n²}` on vertices `v(i,j) = i·n + j`; weight `1+ε` when the column
/// indices agree, 1 otherwise. Terminals are the first row.
pub fn build_example_graph(n: usize, eps: f64) -> Result<(WeightedGraph, Vec<usize>)> {
    if n < 2 || !(eps > 0.0) {
        return Err(Error::InvalidConfig(format!("example needs n >= 2 and eps > 0, got n = {n}, eps = {eps}")));
    }
    let size = n * n;
    let mut edges = Vec::with_capacity(size * (size - 1) / 2);
    for a in 0..size {
        for b in a + 1..size {
            let w = if a % n == b % n { 1.0 + eps } else { 1.0 };
            edges.push((a, b, w));
        }
    }
    Ok((WeightedGraph::new(size, edges)?, (0..n).collect()))
}
