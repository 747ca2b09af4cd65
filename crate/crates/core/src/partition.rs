//! Disjoint-set forest with special-vertex and forbidden-set bookkeeping.
//!
//! Every root carries its component size, the number of special vertices in
//! the component, and (for the CDF-process) a sparse map from forbidden-set id
//! to the number of that set's members inside the component. A merge is
//! rejected as a [`MergeOutcome::Collision`] when it would join two special
//! components (k-process rule) or complete a forbidden set (CDF rule).
//!
//! Rejections never write to the forest: roots are located with a read-only
//! walk and paths are compressed only once the merge is known to go ahead.

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MergeOutcome {
    Merged,
    SameComponent,
    Collision,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct ForbiddenFamily {
    set_len: Vec<u32>,
    /// Per vertex index; only entries at roots are meaningful, the rest are empty.
    counters: Vec<FxHashMap<u32, u32>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    parent: Vec<u32>,
    size: Vec<u32>,
    special: Vec<u32>,
    family: Option<ForbiddenFamily>,
    num_components: usize,
    k: usize,
    largest: u32,
    largest_count: u32,
    largest_special: u32,
    sum_sq: u64,
}

impl Partition {
    /// `n` singletons, with `specials` marked.
    pub fn new(n: usize, specials: &[usize]) -> Result<Self> {
        Self::build(n, specials, None)
    }

    /// `n` singletons with a forbidden-set family for [`Partition::try_union_cdf`].
    pub fn with_family(n: usize, specials: &[usize], family: &[Vec<usize>]) -> Result<Self> {
        Self::build(n, specials, Some(family))
    }

    fn build(n: usize, specials: &[usize], family: Option<&[Vec<usize>]>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig("a partition needs at least one vertex".into()));
        }
        if n > u32::MAX as usize {
            return Err(Error::TooLarge { what: "a partition", n, limit: u32::MAX as usize });
        }
        let mut special = vec![0u32; n];
        for &s in specials {
            if s >= n {
                return Err(Error::VertexOutOfRange { vertex: s, n });
            }
            if special[s] != 0 {
                return Err(Error::DuplicateSpecial(s));
            }
            special[s] = 1;
        }

        let family = match family {
            None => None,
            Some(sets) => {
                let mut counters = vec![FxHashMap::default(); n];
                let mut set_len = Vec::with_capacity(sets.len());
                for (id, set) in sets.iter().enumerate() {
                    if set.len() < 2 {
                        return Err(Error::ForbiddenSetTooSmall { set: id, len: set.len() });
                    }
                    for &v in set {
                        if v >= n {
                            return Err(Error::VertexOutOfRange { vertex: v, n });
                        }
                        let slot = counters[v].entry(id as u32).or_insert(0);
                        if *slot != 0 {
                            return Err(Error::DuplicateInForbiddenSet { set: id, vertex: v });
                        }
                        *slot = 1;
                    }
                    set_len.push(set.len() as u32);
                }
                Some(ForbiddenFamily { set_len, counters })
            }
        };

        let k = specials.len();
        Ok(Partition {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
            special,
            family,
            num_components: n,
            k,
            largest: 1,
            largest_count: n as u32,
            largest_special: u32::from(k > 0),
            sum_sq: n as u64,
        })
    }

    pub fn n(&self) -> usize {
        self.parent.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn num_components(&self) -> usize {
        self.num_components
    }

    /// Size of the largest component (L₁).
    pub fn largest(&self) -> usize {
        self.largest as usize
    }

    /// Size of the largest special component (L̂₁), 0 without specials.
    pub fn largest_special(&self) -> usize {
        self.largest_special as usize
    }

    /// True when exactly one component has the maximum size and it holds a special vertex.
    pub fn unique_largest_is_special(&self) -> bool {
        self.largest_count == 1 && self.largest_special == self.largest
    }

    /// Σ sᵢ² over all components.
    pub fn sum_of_squares(&self) -> u64 {
        self.sum_sq
    }

    pub fn is_special(&self, v: usize) -> bool {
        self.special[self.root(v)] > 0
    }

    /// Root of `v` without touching the forest.
    pub fn root(&self, mut v: usize) -> usize {
        while self.parent[v] as usize != v {
            v = self.parent[v] as usize;
        }
        v
    }

    /// Root of `v`, compressing the path on the way.
    pub fn find(&mut self, v: usize) -> usize {
        let root = self.root(v);
        self.compress(v, root);
        root
    }

    fn compress(&mut self, mut v: usize, root: usize) {
        while self.parent[v] as usize != root && v != root {
            let next = self.parent[v] as usize;
            self.parent[v] = root as u32;
            v = next;
        }
    }

    pub fn component_size(&self, v: usize) -> usize {
        self.size[self.root(v)] as usize
    }

    pub fn special_count(&self, v: usize) -> usize {
        self.special[self.root(v)] as usize
    }

    fn check_pair(&self, u: usize, v: usize) {
        let n = self.n();
        assert!(u < n && v < n, "pair ({u}, {v}) out of range for n = {n}");
        assert_ne!(u, v, "self-pair ({u}, {u}) is never a valid merge request");
    }

    /// Merge regardless of specials or forbidden sets (plain random graph process).
    pub fn union_unconstrained(&mut self, u: usize, v: usize) -> MergeOutcome {
        self.check_pair(u, v);
        let (ru, rv) = (self.root(u), self.root(v));
        if ru == rv {
            self.compress(u, ru);
            self.compress(v, rv);
            return MergeOutcome::SameComponent;
        }
        self.commit(u, ru, v, rv);
        MergeOutcome::Merged
    }

    /// Merge unless both components already contain a special vertex.
    pub fn try_union_kprocess(&mut self, u: usize, v: usize) -> MergeOutcome {
        self.check_pair(u, v);
        let (ru, rv) = (self.root(u), self.root(v));
        if ru == rv {
            self.compress(u, ru);
            self.compress(v, rv);
            return MergeOutcome::SameComponent;
        }
        if self.special[ru] > 0 && self.special[rv] > 0 {
            return MergeOutcome::Collision;
        }
        self.commit(u, ru, v, rv);
        MergeOutcome::Merged
    }

    /// Merge unless the union would contain some forbidden set in full.
    ///
    /// A partition built without a family behaves as if the family were empty.
    pub fn try_union_cdf(&mut self, u: usize, v: usize) -> MergeOutcome {
        self.check_pair(u, v);
        let (ru, rv) = (self.root(u), self.root(v));
        if ru == rv {
            self.compress(u, ru);
            self.compress(v, rv);
            return MergeOutcome::SameComponent;
        }
        if let Some(fam) = &self.family {
            let (a, b) = (&fam.counters[ru], &fam.counters[rv]);
            let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
            let completes = small.iter().any(|(set, &c)| {
                let other = large.get(set).copied().unwrap_or(0);
                c + other >= fam.set_len[*set as usize]
            });
            if completes {
                return MergeOutcome::Collision;
            }
        }
        self.commit(u, ru, v, rv);
        MergeOutcome::Merged
    }

    fn commit(&mut self, u: usize, ru: usize, v: usize, rv: usize) {
        self.compress(u, ru);
        self.compress(v, rv);
        let (su, sv) = (self.size[ru], self.size[rv]);
        // union by size; equal sizes keep the lower index as root
        let (winner, loser) = if su > sv || (su == sv && ru < rv) { (ru, rv) } else { (rv, ru) };
        self.parent[loser] = winner as u32;

        let merged = su + sv;
        self.size[winner] = merged;
        self.special[winner] += self.special[loser];
        self.num_components -= 1;
        self.sum_sq = self.sum_sq - u64::from(su) * u64::from(su) - u64::from(sv) * u64::from(sv)
            + u64::from(merged) * u64::from(merged);

        if merged > self.largest {
            self.largest = merged;
            self.largest_count = 1;
        } else if merged == self.largest {
            self.largest_count += 1;
        }
        if self.special[winner] > 0 && merged > self.largest_special {
            self.largest_special = merged;
        }

        if let Some(fam) = &mut self.family {
            let mut moved = std::mem::take(&mut fam.counters[loser]);
            let mut kept = std::mem::take(&mut fam.counters[winner]);
            if moved.len() > kept.len() {
                std::mem::swap(&mut moved, &mut kept);
            }
            for (set, c) in moved {
                *kept.entry(set).or_insert(0) += c;
            }
            fam.counters[winner] = kept;
        }
    }

    /// Current roots in increasing index order.
    pub fn roots(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n()).filter(move |&v| self.parent[v] as usize == v)
    }

    /// `(size, special_count)` per component, largest first.
    pub fn component_sizes(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> =
            self.roots().map(|r| (self.size[r] as usize, self.special[r] as usize)).collect();
        out.sort_unstable_by(|a, b| b.cmp(a));
        out
    }

    /// Component label per vertex: the smallest vertex index in its component.
    pub fn labels(&self) -> Vec<usize> {
        let n = self.n();
        let mut first = vec![usize::MAX; n];
        let mut out = vec![0; n];
        for v in 0..n {
            let r = self.root(v);
            if first[r] == usize::MAX {
                first[r] = v;
            }
            out[v] = first[r];
        }
        out
    }

    /// Count of `set`'s members inside the component of `v` (CDF bookkeeping).
    pub fn forbidden_count(&self, v: usize, set: usize) -> usize {
        self.family
            .as_ref()
            .and_then(|f| f.counters[self.root(v)].get(&(set as u32)).copied())
            .unwrap_or(0) as usize
    }

    pub fn forbidden_set_len(&self, set: usize) -> Option<usize> {
        self.family.as_ref().and_then(|f| f.set_len.get(set).map(|&l| l as usize))
    }

    pub fn forbidden_family_len(&self) -> usize {
        self.family.as_ref().map_or(0, |f| f.set_len.len())
    }
}
