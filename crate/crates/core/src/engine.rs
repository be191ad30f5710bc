//! Multi-level local-moving modularity optimizer.
//!
//! A level sweeps its vertices, moving each to the adjacent community with
//! the largest strictly positive gain, until a sweep's net gain drops below
//! `tau`. The graph is then collapsed into one supervertex per community and
//! the next level starts from singletons on the collapsed graph. The first
//! level can be restricted to a subset of vertices; collapsed levels always
//! evaluate every supervertex.

use std::borrow::Cow;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::community::{modularity, move_gain, CommunityId, Partition};
use crate::error::{Error, Result};
use crate::graph::{DynamicGraph, VertexId};

/// Order in which a sweep visits vertices.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "seed")]
pub enum VisitOrder {
    /// Ascending vertex id.
    #[default]
    Ascending,
    /// Reshuffled before every sweep from a generator seeded once per run.
    Shuffled(u64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    /// Convergence threshold on net modularity gain, used both within a level
    /// and between levels.
    pub tau: f64,
    pub max_iterations_per_level: usize,
    pub max_levels: usize,
    pub visit_order: VisitOrder,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            tau: 1e-6,
            max_iterations_per_level: 100,
            max_levels: 20,
            visit_order: VisitOrder::Ascending,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::Config(format!(
                "tau must be positive, got {}",
                self.tau
            )));
        }
        if self.max_iterations_per_level == 0 || self.max_levels == 0 {
            return Err(Error::Config(
                "iteration and level limits must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Which vertices the first level evaluates.
#[derive(Clone, Copy, Debug)]
pub enum EvalSet<'a> {
    All,
    /// Ascending, duplicate-free vertex ids.
    Only(&'a [VertexId]),
}

/// Statistics of one level.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LevelStats {
    pub num_vertices: usize,
    pub iterations: usize,
    pub iteration_times: Vec<Duration>,
    /// Vertices visited in each sweep.
    pub evaluated: Vec<usize>,
    /// Moves applied in each sweep.
    pub moves: Vec<usize>,
    /// Sum of applied gains in each sweep.
    pub net_gain: Vec<f64>,
    /// Modularity once the level's sweeps have finished.
    pub modularity: f64,
}

impl LevelStats {
    pub fn total_moves(&self) -> usize {
        self.moves.iter().sum()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LevelTrace {
    pub levels: Vec<LevelStats>,
}

impl LevelTrace {
    pub fn iterations_per_level(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.iterations).collect()
    }

    pub fn total_iterations(&self) -> usize {
        self.levels.iter().map(|l| l.iterations).sum()
    }

    /// Mean wall time over every sweep of every level.
    pub fn mean_iteration_time(&self) -> Duration {
        let count = self.total_iterations();
        if count == 0 {
            return Duration::ZERO;
        }
        let total: Duration = self
            .levels
            .iter()
            .flat_map(|l| l.iteration_times.iter())
            .sum();
        total / count as u32
    }
}

/// Reusable per-sweep buffers for accumulating `e(i -> C)`.
struct Scratch {
    weight: Vec<f64>,
    seen: Vec<bool>,
    touched: Vec<CommunityId>,
}

impl Scratch {
    fn new(capacity: usize) -> Self {
        Scratch {
            weight: vec![0.0; capacity],
            seen: vec![false; capacity],
            touched: Vec::new(),
        }
    }

    fn clear(&mut self) {
        for &c in &self.touched {
            self.weight[c] = 0.0;
            self.seen[c] = false;
        }
        self.touched.clear();
    }
}

/// Best move for `i`: the adjacent community with the largest strictly
/// positive gain, smallest id on ties. `None` means stay.
fn best_move(
    graph: &DynamicGraph,
    part: &Partition,
    i: VertexId,
    scratch: &mut Scratch,
) -> Option<(CommunityId, f64)> {
    let own = part.community_of(i);
    for &(j, w) in graph.adjacency(i) {
        if j == i {
            continue;
        }
        let c = part.community_of(j);
        if !scratch.seen[c] {
            scratch.seen[c] = true;
            scratch.touched.push(c);
        }
        scratch.weight[c] += w;
    }
    let m = graph.total_weight();
    let d = graph.weighted_degree(i);
    let to_own = scratch.weight[own];
    let own_without = part.total_degree(own) - d;
    let mut best: Option<(CommunityId, f64)> = None;
    for &c in &scratch.touched {
        if c == own {
            continue;
        }
        let g = move_gain(
            scratch.weight[c],
            to_own,
            d,
            own_without,
            part.total_degree(c),
            m,
        );
        if g <= 0.0 {
            continue;
        }
        best = match best {
            Some((bc, bg)) if bg > g || (bg == g && bc < c) => Some((bc, bg)),
            _ => Some((c, g)),
        };
    }
    scratch.clear();
    best
}

fn make_rng(config: &EngineConfig) -> Option<ChaCha8Rng> {
    match config.visit_order {
        VisitOrder::Ascending => None,
        VisitOrder::Shuffled(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
    }
}

/// Runs local-moving sweeps over `eval` until convergence, mutating `part`.
pub fn local_move_phase(
    graph: &DynamicGraph,
    part: &mut Partition,
    eval: EvalSet<'_>,
    config: &EngineConfig,
) -> LevelStats {
    let mut rng = make_rng(config);
    local_move_with_rng(graph, part, eval, config, rng.as_mut())
}

fn local_move_with_rng(
    graph: &DynamicGraph,
    part: &mut Partition,
    eval: EvalSet<'_>,
    config: &EngineConfig,
    mut rng: Option<&mut ChaCha8Rng>,
) -> LevelStats {
    let mut order: Vec<VertexId> = match eval {
        EvalSet::All => (0..graph.num_vertices()).collect(),
        EvalSet::Only(members) => members.to_vec(),
    };
    // gains are undefined without edges
    if graph.total_weight() <= 0.0 {
        order.clear();
    }
    let mut stats = LevelStats {
        num_vertices: graph.num_vertices(),
        ..LevelStats::default()
    };
    let mut scratch = Scratch::new(part.label_capacity());
    for _ in 0..config.max_iterations_per_level {
        if let Some(rng) = rng.as_deref_mut() {
            order.shuffle(rng);
        }
        let start = Instant::now();
        let mut net = 0.0;
        let mut moves = 0;
        for &i in &order {
            if let Some((target, g)) = best_move(graph, part, i, &mut scratch) {
                part.move_vertex(graph, i, target);
                net += g;
                moves += 1;
            }
        }
        stats.iterations += 1;
        stats.iteration_times.push(start.elapsed());
        stats.evaluated.push(order.len());
        stats.moves.push(moves);
        stats.net_gain.push(net);
        if moves == 0 || net < config.tau {
            break;
        }
    }
    stats.modularity = modularity(graph, part).unwrap_or(0.0);
    stats
}

/// Collapses each non-empty community of `part` into one supervertex.
///
/// Supervertices are numbered by first appearance over vertex ids. Edges
/// between two communities merge into one edge carrying their summed weight;
/// edges inside a community become a self-loop carrying the summed internal
/// weight. Returns the collapsed graph and the vertex-to-supervertex map.
pub fn coarsen(graph: &DynamicGraph, part: &Partition) -> (DynamicGraph, Vec<VertexId>) {
    let mut label_to_super: Vec<Option<VertexId>> = vec![None; part.label_capacity()];
    let mut count = 0;
    let super_of: Vec<VertexId> = part
        .labels()
        .iter()
        .map(|&c| {
            *label_to_super[c].get_or_insert_with(|| {
                count += 1;
                count - 1
            })
        })
        .collect();

    let mut members: Vec<Vec<VertexId>> = vec![Vec::new(); count];
    for (v, &s) in super_of.iter().enumerate() {
        members[s].push(v);
    }

    let mut adj: Vec<Vec<(VertexId, f64)>> = vec![Vec::new(); count];
    let mut weight = vec![0.0; count];
    let mut touched = Vec::new();
    for s in 0..count {
        let mut internal = 0.0;
        for &u in &members[s] {
            for &(v, w) in graph.adjacency(u) {
                let t = super_of[v];
                if t == s {
                    if u <= v {
                        internal += w;
                    }
                } else if t > s {
                    if weight[t] == 0.0 {
                        touched.push(t);
                    }
                    weight[t] += w;
                }
            }
        }
        if internal > 0.0 {
            adj[s].push((s, internal));
        }
        touched.sort_unstable();
        for &t in &touched {
            adj[s].push((t, weight[t]));
            adj[t].push((s, weight[t]));
            weight[t] = 0.0;
        }
        touched.clear();
    }
    for list in adj.iter_mut() {
        list.sort_by_key(|&(v, _)| v);
    }
    (DynamicGraph::from_sorted_adjacency(adj), super_of)
}

/// Full multi-level run starting from `initial`.
///
/// The first level evaluates only `first_level` and keeps the labels of
/// `initial`; every vertex outside it keeps its label through that level.
/// The returned partition uses labels drawn from `initial`'s label space.
pub fn run_multilevel(
    graph: &DynamicGraph,
    initial: Partition,
    first_level: EvalSet<'_>,
    config: &EngineConfig,
) -> (Partition, LevelTrace) {
    let mut rng = make_rng(config);
    let mut part = initial;
    part.rebuild_aggregates(graph);
    let mut trace = LevelTrace::default();

    let q_start = modularity(graph, &part).unwrap_or(0.0);
    let level0 = local_move_with_rng(graph, &mut part, first_level, config, rng.as_mut());
    let mut q_prev = level0.modularity;
    let mut level_gain = level0.modularity - q_start;
    trace.levels.push(level0);
    if graph.total_weight() <= 0.0 {
        return (part, trace);
    }

    let mut final_labels: Vec<CommunityId> = part.labels().to_vec();
    // current level's vertex for each original vertex
    let mut to_level: Vec<VertexId> = (0..graph.num_vertices()).collect();
    // original-space label carried by each community id of the current level
    let mut label_of: Vec<CommunityId> = (0..part.label_capacity()).collect();
    let mut level_graph: Cow<'_, DynamicGraph> = Cow::Borrowed(graph);
    let mut level_part = part;

    while trace.levels.len() < config.max_levels && level_gain >= config.tau {
        let (coarse, super_of) = coarsen(&level_graph, &level_part);
        if coarse.num_vertices() == level_graph.num_vertices() {
            break;
        }
        let mut super_label = vec![0; coarse.num_vertices()];
        for (v, &s) in super_of.iter().enumerate() {
            super_label[s] = label_of[level_part.community_of(v)];
        }
        for lv in to_level.iter_mut() {
            *lv = super_of[*lv];
        }

        let mut coarse_part = Partition::singletons(&coarse);
        let stats = local_move_with_rng(
            &coarse,
            &mut coarse_part,
            EvalSet::All,
            config,
            rng.as_mut(),
        );
        level_gain = stats.modularity - q_prev;
        q_prev = stats.modularity;
        let moved = stats.total_moves() > 0;
        trace.levels.push(stats);
        if moved {
            for (v, label) in final_labels.iter_mut().enumerate() {
                *label = super_label[coarse_part.community_of(to_level[v])];
            }
        }
        label_of = super_label;
        level_graph = Cow::Owned(coarse);
        level_part = coarse_part;
    }

    let result = Partition::from_labels(graph, final_labels)
        .expect("labels cover every vertex of the graph");
    (result, trace)
}
