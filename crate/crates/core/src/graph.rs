//! Growing weighted undirected graph and the edge batches that extend it.

use crate::error::{Error, Result};

/// Dense internal vertex index, contiguous in `0..n`.
pub type VertexId = usize;

/// Weighted undirected graph that only grows.
///
/// Each vertex keeps its neighbors sorted by ascending id. A self-loop is
/// stored once in the owner's list and counts twice towards its weighted
/// degree, so `sum(degree) == 2 * total_weight` always holds. Self-loops only
/// appear in coarsened graphs; [`DynamicGraph::apply_batch`] rejects them.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DynamicGraph {
    adj: Vec<Vec<(VertexId, f64)>>,
    degree: Vec<f64>,
    total_weight: f64,
    edge_count: usize,
}

impl DynamicGraph {
    /// Graph with `n` isolated vertices.
    pub fn new(n: usize) -> Self {
        DynamicGraph {
            adj: vec![Vec::new(); n],
            degree: vec![0.0; n],
            total_weight: 0.0,
            edge_count: 0,
        }
    }

    /// Builds a graph directly from undirected edges. Self-loops are allowed
    /// here; repeated edges are an error.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (VertexId, VertexId, f64)>,
    {
        let mut adj: Vec<Vec<(VertexId, f64)>> = vec![Vec::new(); n];
        for (u, v, w) in edges {
            check_weight(u, v, w)?;
            for x in [u, v] {
                if x >= n {
                    return Err(Error::VertexOutOfRange { vertex: x, n });
                }
            }
            adj[u].push((v, w));
            if u != v {
                adj[v].push((u, w));
            }
        }
        for (u, list) in adj.iter_mut().enumerate() {
            list.sort_by_key(|&(v, _)| v);
            if let Some(pair) = list.windows(2).find(|p| p[0].0 == p[1].0) {
                return Err(Error::DuplicateEdge(u.min(pair[0].0), u.max(pair[0].0)));
            }
        }
        Ok(Self::from_sorted_adjacency(adj))
    }

    /// Takes ownership of per-vertex neighbor lists that are already sorted,
    /// symmetric and duplicate-free, and derives degrees and totals.
    pub(crate) fn from_sorted_adjacency(adj: Vec<Vec<(VertexId, f64)>>) -> Self {
        let mut degree = vec![0.0; adj.len()];
        let mut total_weight = 0.0;
        let mut edge_count = 0;
        for (u, list) in adj.iter().enumerate() {
            for &(v, w) in list {
                if v == u {
                    degree[u] += 2.0 * w;
                    total_weight += w;
                    edge_count += 1;
                } else {
                    degree[u] += w;
                    if u < v {
                        total_weight += w;
                        edge_count += 1;
                    }
                }
            }
        }
        DynamicGraph {
            adj,
            degree,
            total_weight,
            edge_count,
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.adj.len()
    }

    /// Number of distinct undirected edges, self-loops included.
    pub fn num_edges(&self) -> usize {
        self.edge_count
    }

    /// `m`: the sum of all distinct edge weights.
    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    pub fn weighted_degree(&self, v: VertexId) -> f64 {
        self.degree[v]
    }

    pub fn weighted_degrees(&self) -> &[f64] {
        &self.degree
    }

    /// Neighbors of `v` in ascending id order, with weights.
    pub fn neighbors(&self, v: VertexId) -> Result<&[(VertexId, f64)]> {
        self.adj
            .get(v)
            .map(Vec::as_slice)
            .ok_or(Error::VertexOutOfRange {
                vertex: v,
                n: self.adj.len(),
            })
    }

    /// Unchecked variant of [`neighbors`](Self::neighbors) for hot loops.
    #[inline]
    pub fn adjacency(&self, v: VertexId) -> &[(VertexId, f64)] {
        &self.adj[v]
    }

    /// Weight of the self-loop on `v`, or 0.
    pub fn self_loop(&self, v: VertexId) -> f64 {
        self.edge_weight(v, v).unwrap_or(0.0)
    }

    pub fn edge_weight(&self, u: VertexId, v: VertexId) -> Option<f64> {
        let list = self.adj.get(u)?;
        list.binary_search_by_key(&v, |&(x, _)| x)
            .ok()
            .map(|k| list[k].1)
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.edge_weight(u, v).is_some()
    }

    /// Distinct undirected edges as `(u, v, w)` with `u <= v`.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId, f64)> + '_ {
        self.adj.iter().enumerate().flat_map(|(u, list)| {
            list.iter()
                .filter(move |&&(v, _)| u <= v)
                .map(move |&(v, w)| (u, v, w))
        })
    }

    /// Appends `count` isolated vertices.
    pub fn add_vertices(&mut self, count: usize) {
        let n = self.adj.len() + count;
        self.adj.resize_with(n, Vec::new);
        self.degree.resize(n, 0.0);
    }

    /// Adds `new_vertex_count` vertices and then every edge of `batch`.
    ///
    /// The batch is validated in full before anything is modified, so on error
    /// the graph is left untouched.
    pub fn apply_batch(&mut self, batch: &DeltaBatch, new_vertex_count: usize) -> Result<()> {
        let old_n = self.adj.len();
        let n = old_n + new_vertex_count;
        let pairs = batch.pairs();
        for (k, &(i, j, w)) in pairs.iter().enumerate() {
            for x in [i, j] {
                if x >= n {
                    return Err(Error::VertexOutOfRange { vertex: x, n });
                }
            }
            if i == j {
                return Err(Error::SelfLoop(i));
            }
            check_weight(i, j, w)?;
            if k > 0 && pairs[k - 1].0 == i && pairs[k - 1].1 == j {
                return Err(Error::DuplicateEdge(i.min(j), i.max(j)));
            }
            if i < old_n && self.has_edge(i, j) {
                return Err(Error::DuplicateEdge(i.min(j), i.max(j)));
            }
        }

        self.add_vertices(new_vertex_count);
        for (source, group) in batch.by_source() {
            let list = &mut self.adj[source];
            let before = list.len();
            for &(_, sink, w) in group {
                list.push((sink, w));
                self.degree[source] += w;
                if source < sink {
                    self.total_weight += w;
                    self.edge_count += 1;
                }
            }
            if before > 0 {
                list.sort_by_key(|&(v, _)| v);
            }
        }
        Ok(())
    }
}

fn check_weight(u: VertexId, v: VertexId, w: f64) -> Result<()> {
    if w > 0.0 && w.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveWeight { u, v, weight: w })
    }
}

/// One ordered `(source, sink, weight)` entry of a batch.
pub type OrderedPair = (VertexId, VertexId, f64);

/// The set of edges new at a time step, stored as ordered pairs.
///
/// Every undirected edge `{i, j}` is held twice, as `(i, j)` and `(j, i)`.
/// Pairs are kept sorted by source and then sink, so the grouping into
/// sources and their sinks is a linear scan and the input order never
/// matters.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DeltaBatch {
    pairs: Vec<OrderedPair>,
}

impl DeltaBatch {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a batch from undirected edges, emitting both ordered pairs of
    /// each.
    pub fn from_edges<I>(edges: I) -> Self
    where
        I: IntoIterator<Item = (VertexId, VertexId, f64)>,
    {
        let mut pairs = Vec::new();
        for (u, v, w) in edges {
            pairs.push((u, v, w));
            pairs.push((v, u, w));
        }
        Self::sorted(pairs)
    }

    /// Builds a batch from ordered pairs, checking that each has its reverse.
    pub fn from_ordered_pairs(pairs: Vec<OrderedPair>) -> Result<Self> {
        let batch = Self::sorted(pairs);
        for &(i, j, w) in &batch.pairs {
            let found = batch
                .pairs
                .binary_search_by(|&(a, b, _)| (a, b).cmp(&(j, i)))
                .map(|k| batch.pairs[k].2 == w)
                .unwrap_or(false);
            if !found {
                return Err(Error::AsymmetricBatch(i, j));
            }
        }
        Ok(batch)
    }

    fn sorted(mut pairs: Vec<OrderedPair>) -> Self {
        pairs.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)).then(a.2.total_cmp(&b.2)));
        DeltaBatch { pairs }
    }

    pub fn pairs(&self) -> &[OrderedPair] {
        &self.pairs
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Number of undirected edges.
    pub fn num_edges(&self) -> usize {
        self.pairs.len() / 2
    }

    /// Undirected edges as `(u, v, w)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId, f64)> + '_ {
        self.pairs.iter().copied().filter(|&(u, v, _)| u < v)
    }

    /// Groups pairs by source vertex in ascending order: each item is a source
    /// `i` together with its pairs, whose sinks form `T(i)`.
    pub fn by_source(&self) -> impl Iterator<Item = (VertexId, &[OrderedPair])> + '_ {
        self.pairs
            .chunk_by(|a, b| a.0 == b.0)
            .map(|group| (group[0].0, group))
    }

    /// Distinct source vertices, ascending.
    pub fn sources(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.by_source().map(|(i, _)| i)
    }

    /// One past the largest vertex id referenced, or 0 when empty.
    pub fn vertex_bound(&self) -> usize {
        self.pairs
            .iter()
            .map(|&(i, j, _)| i.max(j) + 1)
            .max()
            .unwrap_or(0)
    }
}
