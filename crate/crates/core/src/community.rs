//! Partitions, modularity and move gains.
//!
//! Modularity of a partition `C` over a graph with total weight `m` is
//!
//! ```text
//! Q = ( sum_i e(i -> C(i))  -  sum_C a_C^2 / 2m ) / 2m
//! ```
//!
//! where `e(i -> C)` is the weight from `i` into `C` and `a_C` the summed
//! weighted degree of `C`. A self-loop of weight `w` contributes `2w` to
//! `e(i -> C(i))`, consistent with it contributing `2w` to the degree; this
//! is what makes coarsening modularity-preserving.
//!
//! The gain of moving `i` from `A = C(i)` to `B` is the exact change in `Q`:
//!
//! ```text
//! dQ = (e(i -> B) - e(i -> A\{i})) / m  +  d(i) * (a_{A\{i}} - a_B) / 2m^2
//! ```
//!
//! and is defined as 0 when `B == A`.

use crate::error::{Error, Result};
use crate::graph::{DynamicGraph, VertexId};

/// Community label. Labels need not be dense until [`Partition::compact`].
pub type CommunityId = usize;

/// Vertex-to-community assignment plus per-community aggregates.
#[derive(Clone, Debug, PartialEq)]
pub struct Partition {
    assignment: Vec<CommunityId>,
    total_degree: Vec<f64>,
    size: Vec<usize>,
}

impl Partition {
    /// Every vertex in its own community, labelled by its vertex id.
    pub fn singletons(graph: &DynamicGraph) -> Self {
        let n = graph.num_vertices();
        Partition {
            assignment: (0..n).collect(),
            total_degree: graph.weighted_degrees().to_vec(),
            size: vec![1; n],
        }
    }

    /// Partition with the given labels; aggregates are computed from `graph`.
    pub fn from_labels(graph: &DynamicGraph, labels: Vec<CommunityId>) -> Result<Self> {
        if labels.len() != graph.num_vertices() {
            return Err(Error::PartitionSize {
                partition: labels.len(),
                graph: graph.num_vertices(),
            });
        }
        let capacity = labels.iter().map(|&c| c + 1).max().unwrap_or(0);
        let mut part = Partition {
            assignment: labels,
            total_degree: vec![0.0; capacity],
            size: vec![0; capacity],
        };
        part.rebuild_aggregates(graph);
        Ok(part)
    }

    pub fn num_vertices(&self) -> usize {
        self.assignment.len()
    }

    #[inline]
    pub fn community_of(&self, v: VertexId) -> CommunityId {
        self.assignment[v]
    }

    pub fn labels(&self) -> &[CommunityId] {
        &self.assignment
    }

    pub fn into_labels(self) -> Vec<CommunityId> {
        self.assignment
    }

    /// One past the largest label that has ever been allocated.
    pub fn label_capacity(&self) -> usize {
        self.size.len()
    }

    /// `a_C`. Retired (empty) labels report 0.
    #[inline]
    pub fn total_degree(&self, c: CommunityId) -> f64 {
        self.total_degree[c]
    }

    #[inline]
    pub fn size(&self, c: CommunityId) -> usize {
        self.size[c]
    }

    /// Number of non-empty communities.
    pub fn num_communities(&self) -> usize {
        self.size.iter().filter(|&&s| s > 0).count()
    }

    /// Allocates an unused label and returns it.
    pub fn fresh_label(&mut self) -> CommunityId {
        self.total_degree.push(0.0);
        self.size.push(0);
        self.size.len() - 1
    }

    /// Extends the partition to cover vertices the graph gained since it was
    /// built, each in a fresh singleton community, and refreshes all
    /// aggregates against the grown graph's degrees.
    pub fn extend_to(&mut self, graph: &DynamicGraph) {
        let old_n = self.assignment.len();
        for _ in old_n..graph.num_vertices() {
            let c = self.fresh_label();
            self.assignment.push(c);
        }
        self.rebuild_aggregates(graph);
    }

    /// Recomputes `a_C` and sizes from scratch.
    pub fn rebuild_aggregates(&mut self, graph: &DynamicGraph) {
        self.total_degree.iter_mut().for_each(|a| *a = 0.0);
        self.size.iter_mut().for_each(|s| *s = 0);
        for (v, &c) in self.assignment.iter().enumerate() {
            self.total_degree[c] += graph.weighted_degree(v);
            self.size[c] += 1;
        }
    }

    /// Moves `i` into `target`, updating aggregates on both sides. `target`
    /// may be any allocated label, including an empty one, or exactly
    /// `label_capacity()` to open a new community.
    pub fn move_vertex(&mut self, graph: &DynamicGraph, i: VertexId, target: CommunityId) {
        let source = self.assignment[i];
        if source == target {
            return;
        }
        if target == self.size.len() {
            self.fresh_label();
        }
        let d = graph.weighted_degree(i);
        self.total_degree[source] -= d;
        self.size[source] -= 1;
        if self.size[source] == 0 {
            // keep retired communities at exactly zero
            self.total_degree[source] = 0.0;
        }
        self.total_degree[target] += d;
        self.size[target] += 1;
        self.assignment[i] = target;
    }

    /// Renumbers labels densely in order of first appearance over vertex ids,
    /// retiring empty communities. Returns the old-to-new map indexed by old
    /// label (`None` for labels that had no members).
    pub fn compact(&mut self) -> Vec<Option<CommunityId>> {
        let mut map: Vec<Option<CommunityId>> = vec![None; self.size.len()];
        let mut next = 0;
        for c in self.assignment.iter_mut() {
            let new = *map[*c].get_or_insert_with(|| {
                next += 1;
                next - 1
            });
            *c = new;
        }
        let mut total_degree = vec![0.0; next];
        let mut size = vec![0; next];
        for (old, new) in map.iter().enumerate() {
            if let Some(new) = *new {
                total_degree[new] = self.total_degree[old];
                size[new] = self.size[old];
            }
        }
        self.total_degree = total_degree;
        self.size = size;
        map
    }

    /// Members of each label, indexed by label. Retired labels are empty.
    pub fn members(&self) -> Vec<Vec<VertexId>> {
        let mut out = vec![Vec::new(); self.size.len()];
        for (v, &c) in self.assignment.iter().enumerate() {
            out[c].push(v);
        }
        out
    }
}

/// `e(i -> C)` for every community adjacent to a fixed vertex `i`, plus
/// `i`'s own community (possibly with weight 0). Self-loops are excluded.
#[derive(Clone, Debug, PartialEq)]
pub struct GainTable {
    vertex: VertexId,
    own: CommunityId,
    entries: Vec<(CommunityId, f64)>,
}

impl GainTable {
    pub fn vertex(&self) -> VertexId {
        self.vertex
    }

    /// Community of the vertex when the table was built.
    pub fn own_community(&self) -> CommunityId {
        self.own
    }

    /// Weight into `c`; 0 for non-adjacent communities.
    pub fn weight_to(&self, c: CommunityId) -> f64 {
        self.entries
            .binary_search_by_key(&c, |&(x, _)| x)
            .map(|k| self.entries[k].1)
            .unwrap_or(0.0)
    }

    /// Entries sorted by community id.
    pub fn entries(&self) -> &[(CommunityId, f64)] {
        &self.entries
    }
}

/// Materializes the [`GainTable`] of `i` under `part`.
pub fn gain_table(graph: &DynamicGraph, part: &Partition, i: VertexId) -> GainTable {
    let own = part.community_of(i);
    let mut entries: Vec<(CommunityId, f64)> = vec![(own, 0.0)];
    for &(j, w) in graph.adjacency(i) {
        if j != i {
            entries.push((part.community_of(j), w));
        }
    }
    entries.sort_by_key(|&(c, _)| c);
    entries.dedup_by(|next, acc| {
        if next.0 == acc.0 {
            acc.1 += next.1;
            true
        } else {
            false
        }
    });
    GainTable {
        vertex: i,
        own,
        entries,
    }
}

/// Gain formula on raw aggregates.
///
/// `to_target` and `to_own` are `e(i -> B)` and `e(i -> A\{i})`,
/// `own_without_i` is `a_A - d(i)`, `target_total` is `a_B`.
#[inline]
pub fn move_gain(
    to_target: f64,
    to_own: f64,
    degree: f64,
    own_without_i: f64,
    target_total: f64,
    m: f64,
) -> f64 {
    // one rounding at the end: with integer weights, equal gains compare equal
    let two_m = 2.0 * m;
    ((to_target - to_own) * two_m + degree * (own_without_i - target_total)) / (two_m * m)
}

/// Modularity change from moving `i` into `target`.
pub fn gain(
    graph: &DynamicGraph,
    part: &Partition,
    i: VertexId,
    target: CommunityId,
    gains: &GainTable,
) -> Result<f64> {
    if target >= part.label_capacity() {
        return Err(Error::UnknownCommunity(target));
    }
    let own = part.community_of(i);
    if target == own {
        return Ok(0.0);
    }
    let d = graph.weighted_degree(i);
    Ok(move_gain(
        gains.weight_to(target),
        gains.weight_to(own),
        d,
        part.total_degree(own) - d,
        part.total_degree(target),
        graph.total_weight(),
    ))
}

/// Modularity of `part` over `graph`, evaluated from scratch.
pub fn modularity(graph: &DynamicGraph, part: &Partition) -> Result<f64> {
    let n = graph.num_vertices();
    if part.num_vertices() != n {
        return Err(Error::PartitionSize {
            partition: part.num_vertices(),
            graph: n,
        });
    }
    let m = graph.total_weight();
    if m <= 0.0 {
        return Err(Error::UndefinedModularity);
    }
    let mut internal = 0.0;
    let mut totals = vec![0.0; part.label_capacity()];
    for i in 0..n {
        let ci = part.community_of(i);
        totals[ci] += graph.weighted_degree(i);
        for &(j, w) in graph.adjacency(i) {
            if j == i {
                internal += 2.0 * w;
            } else if part.community_of(j) == ci {
                internal += w;
            }
        }
    }
    let squares: f64 = totals.iter().map(|a| a * a).sum();
    Ok((internal - squares / (2.0 * m)) / (2.0 * m))
}
