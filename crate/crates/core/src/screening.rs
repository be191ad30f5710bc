//! Delta-screening: choosing which vertices to re-evaluate after a batch of
//! edge insertions.
//!
//! Sources of the batch are visited in ascending order. For a source `i` the
//! sink `j*` whose community offers `i` the largest gain is picked. If that
//! gain is positive and at least the gain `j*` would get from joining `i`'s
//! community, then `i`, `j*`, all neighbors of `i` and every member of
//! `j*`'s community are selected. Otherwise the decision is left to `j*`
//! when it is visited as a source. The previous partition is never mutated.

use std::fmt;
use std::io::Write;

use crate::community::{move_gain, CommunityId, Partition};
use crate::error::{Error, Result};
use crate::graph::{DeltaBatch, DynamicGraph, VertexId};

/// Why a vertex was selected. A vertex may carry several reasons.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ScreenReason {
    Source,
    ChosenSink,
    NeighborOfSource,
    SinkCommunityMember,
}

impl ScreenReason {
    pub const ALL: [ScreenReason; 4] = [
        ScreenReason::Source,
        ScreenReason::ChosenSink,
        ScreenReason::NeighborOfSource,
        ScreenReason::SinkCommunityMember,
    ];

    fn bit(self) -> u8 {
        match self {
            ScreenReason::Source => 1,
            ScreenReason::ChosenSink => 2,
            ScreenReason::NeighborOfSource => 4,
            ScreenReason::SinkCommunityMember => 8,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ScreenReason::Source => "source",
            ScreenReason::ChosenSink => "chosen-sink",
            ScreenReason::NeighborOfSource => "neighbor-of-source",
            ScreenReason::SinkCommunityMember => "sink-community-member",
        }
    }
}

impl fmt::Display for ScreenReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Outcome of examining one source vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct SourceDecision {
    pub source: VertexId,
    pub chosen_sink: VertexId,
    /// Gain of the source joining the chosen sink's community.
    pub gain_source: f64,
    /// Gain of the chosen sink joining the source's community.
    pub gain_sink: f64,
    pub triggered: bool,
}

/// The re-evaluation set, with per-member provenance.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScreenSet {
    member: Vec<bool>,
    reasons: Vec<u8>,
    len: usize,
    decisions: Vec<SourceDecision>,
}

impl ScreenSet {
    pub fn empty(n: usize) -> Self {
        ScreenSet {
            member: vec![false; n],
            reasons: vec![0; n],
            len: 0,
            decisions: Vec::new(),
        }
    }

    /// Every vertex, with no provenance.
    pub fn all(n: usize) -> Self {
        ScreenSet {
            member: vec![true; n],
            reasons: vec![0; n],
            len: n,
            decisions: Vec::new(),
        }
    }

    fn insert(&mut self, v: VertexId, reason: ScreenReason) {
        if !self.member[v] {
            self.member[v] = true;
            self.len += 1;
        }
        self.reasons[v] |= reason.bit();
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.member.get(v).copied().unwrap_or(false)
    }

    /// Members in ascending order.
    pub fn members(&self) -> Vec<VertexId> {
        self.member
            .iter()
            .enumerate()
            .filter_map(|(v, &m)| m.then_some(v))
            .collect()
    }

    pub fn reasons(&self, v: VertexId) -> Vec<ScreenReason> {
        let bits = self.reasons.get(v).copied().unwrap_or(0);
        ScreenReason::ALL
            .into_iter()
            .filter(|r| bits & r.bit() != 0)
            .collect()
    }

    pub fn has_reason(&self, v: VertexId, reason: ScreenReason) -> bool {
        self.reasons.get(v).is_some_and(|b| b & reason.bit() != 0)
    }

    /// Per-source decisions in visiting order.
    pub fn decisions(&self) -> &[SourceDecision] {
        &self.decisions
    }

    /// Writes one `vertex reason` line per member and reason.
    pub fn write_dump<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for v in self.members() {
            for r in self.reasons(v) {
                writeln!(out, "{v} {r}")?;
            }
        }
        Ok(())
    }
}

/// Dense `e(v -> C)` accumulator for one vertex at a time.
struct Weights {
    weight: Vec<f64>,
    touched: Vec<CommunityId>,
}

impl Weights {
    fn new(capacity: usize) -> Self {
        Weights {
            weight: vec![0.0; capacity],
            touched: Vec::new(),
        }
    }

    fn load(&mut self, graph: &DynamicGraph, part: &Partition, v: VertexId) {
        for &c in &self.touched {
            self.weight[c] = 0.0;
        }
        self.touched.clear();
        for &(u, w) in graph.adjacency(v) {
            if u != v {
                let c = part.community_of(u);
                self.weight[c] += w;
                self.touched.push(c);
            }
        }
    }

    /// Gain of moving the loaded vertex `v` into `target`; 0 for its own community.
    fn gain(
        &self,
        graph: &DynamicGraph,
        part: &Partition,
        v: VertexId,
        target: CommunityId,
    ) -> f64 {
        let own = part.community_of(v);
        if target == own {
            return 0.0;
        }
        let d = graph.weighted_degree(v);
        move_gain(
            self.weight[target],
            self.weight[own],
            d,
            part.total_degree(own) - d,
            part.total_degree(target),
            graph.total_weight(),
        )
    }
}

/// Computes the re-evaluation set for `batch`.
///
/// `graph` must already contain the batch, and `prev` must label every
/// vertex of `graph`, with vertices new at this step in fresh singletons.
pub fn screen(graph: &DynamicGraph, prev: &Partition, batch: &DeltaBatch) -> Result<ScreenSet> {
    let n = graph.num_vertices();
    if batch.vertex_bound() > n {
        return Err(Error::VertexOutOfRange {
            vertex: batch.vertex_bound() - 1,
            n,
        });
    }
    if prev.num_vertices() != n {
        return Err(Error::PartitionSize {
            partition: prev.num_vertices(),
            graph: n,
        });
    }
    let mut set = ScreenSet::empty(n);
    if graph.total_weight() <= 0.0 {
        return Ok(set);
    }
    let mut members: Option<Vec<Vec<VertexId>>> = None;
    let mut community_added = vec![false; prev.label_capacity()];
    let mut weights = Weights::new(prev.label_capacity());

    for (i, pairs) in batch.by_source() {
        weights.load(graph, prev, i);
        let mut best: Option<(f64, CommunityId, VertexId)> = None;
        for &(_, j, _) in pairs {
            let c = prev.community_of(j);
            let g = weights.gain(graph, prev, i, c);
            best = match best {
                Some((bg, bc, bj)) if bg > g || (bg == g && bc <= c) => Some((bg, bc, bj)),
                _ => Some((g, c, j)),
            };
        }
        let Some((gain_source, target, j_star)) = best else {
            continue;
        };
        weights.load(graph, prev, j_star);
        let gain_sink = weights.gain(graph, prev, j_star, prev.community_of(i));
        let triggered = gain_source >= gain_sink && gain_source > 0.0;
        set.decisions.push(SourceDecision {
            source: i,
            chosen_sink: j_star,
            gain_source,
            gain_sink,
            triggered,
        });
        if !triggered {
            continue;
        }
        set.insert(i, ScreenReason::Source);
        set.insert(j_star, ScreenReason::ChosenSink);
        for &(k, _) in graph.adjacency(i) {
            set.insert(k, ScreenReason::NeighborOfSource);
        }
        if !community_added[target] {
            community_added[target] = true;
            let members = members.get_or_insert_with(|| prev.members());
            for &k in &members[target] {
                set.insert(k, ScreenReason::SinkCommunityMember);
            }
        }
    }
    Ok(set)
}
