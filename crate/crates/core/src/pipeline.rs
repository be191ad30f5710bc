//! Per-step processing of a growing graph in static, baseline or delta mode.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::community::{modularity, CommunityId, Partition};
use crate::engine::{run_multilevel, EngineConfig, EvalSet, LevelTrace};
use crate::error::{Error, Result};
use crate::graph::{DeltaBatch, DynamicGraph};
use crate::screening::{screen, ScreenSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Re-cluster from singletons at every step.
    Static,
    /// Carry the previous partition forward and evaluate every vertex.
    Baseline,
    /// Carry the previous partition forward and evaluate the screened set.
    Delta,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Static, Mode::Baseline, Mode::Delta];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Static => "static",
            Mode::Baseline => "baseline",
            Mode::Delta => "delta",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "static" => Ok(Mode::Static),
            "baseline" => Ok(Mode::Baseline),
            "delta" => Ok(Mode::Delta),
            other => Err(Error::Config(format!("unknown mode {other:?}"))),
        }
    }
}

/// One time step of a stream: vertices first seen at this step (they take
/// the next contiguous ids) and the new edges.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StepInput {
    pub new_vertices: usize,
    pub batch: DeltaBatch,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimestepReport {
    /// 1-based step index.
    pub t: usize,
    pub n: usize,
    /// Total edge weight.
    pub m: f64,
    /// New undirected edges at this step.
    pub delta_edges: usize,
    /// Vertices evaluated at the first level.
    pub r_size: usize,
    pub r_fraction: f64,
    pub q: f64,
    pub levels: usize,
    pub iterations_per_level: Vec<usize>,
    pub total_ms: f64,
    pub iter_mean_ms: f64,
}

impl TimestepReport {
    pub const CSV_HEADER: &'static str =
        "t,n,m,delta_edges,r_size,r_fraction,q,levels,iters,total_ms,iter_mean_ms";

    pub fn iterations(&self) -> usize {
        self.iterations_per_level.iter().sum()
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{:.3},{:.6}",
            self.t,
            self.n,
            self.m,
            self.delta_edges,
            self.r_size,
            self.r_fraction,
            self.q,
            self.levels,
            self.iterations(),
            self.total_ms,
            self.iter_mean_ms
        )
    }
}

pub fn write_reports_csv<W: Write>(reports: &[TimestepReport], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{}", TimestepReport::CSV_HEADER)?;
    for r in reports {
        writeln!(out, "{}", r.csv_row())?;
    }
    Ok(())
}

pub fn write_reports_jsonl<W: Write>(reports: &[TimestepReport], mut out: W) -> Result<()> {
    for r in reports {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n").map_err(|e| Error::io("<jsonl>", e))?;
    }
    Ok(())
}

/// Everything produced by processing one step.
#[derive(Clone, Debug)]
pub struct StepOutput {
    pub report: TimestepReport,
    /// Dense labels after compaction.
    pub labels: Vec<CommunityId>,
    /// `(label before compaction, label after)` for every surviving community.
    pub label_map: Vec<(CommunityId, CommunityId)>,
    pub trace: LevelTrace,
    /// The screened set, in delta mode after the first step.
    pub screen_set: Option<ScreenSet>,
}

type Screener<'a> =
    Box<dyn FnMut(&DynamicGraph, &Partition, &DeltaBatch) -> Result<ScreenSet> + 'a>;

/// Stateful driver holding the growing graph and the current partition.
pub struct Pipeline<'a> {
    mode: Mode,
    config: EngineConfig,
    graph: DynamicGraph,
    partition: Option<Partition>,
    t: usize,
    screener: Screener<'a>,
}

impl<'a> Pipeline<'a> {
    pub fn new(mode: Mode, config: EngineConfig) -> Result<Self> {
        Self::with_screener(mode, config, screen)
    }

    /// Uses `screener` in place of delta-screening in delta mode.
    pub fn with_screener<F>(mode: Mode, config: EngineConfig, screener: F) -> Result<Self>
    where
        F: FnMut(&DynamicGraph, &Partition, &DeltaBatch) -> Result<ScreenSet> + 'a,
    {
        config.validate()?;
        Ok(Pipeline {
            mode,
            config,
            graph: DynamicGraph::new(0),
            partition: None,
            t: 0,
            screener: Box::new(screener),
        })
    }

    pub fn graph(&self) -> &DynamicGraph {
        &self.graph
    }

    pub fn partition(&self) -> Option<&Partition> {
        self.partition.as_ref()
    }

    pub fn step(&mut self, input: &StepInput) -> Result<StepOutput> {
        self.graph.apply_batch(&input.batch, input.new_vertices)?;
        self.t += 1;
        let n = self.graph.num_vertices();

        let start = Instant::now();
        let carried = match (self.mode, self.partition.take()) {
            (Mode::Static, _) | (_, None) => None,
            (_, Some(mut prev)) => {
                prev.extend_to(&self.graph);
                Some(prev)
            }
        };
        let (initial, screen_set) = match carried {
            None => (Partition::singletons(&self.graph), None),
            Some(prev) if self.mode == Mode::Delta => {
                let set = (self.screener)(&self.graph, &prev, &input.batch)?;
                (prev, Some(set))
            }
            Some(prev) => (prev, None),
        };
        let members = screen_set.as_ref().map(ScreenSet::members);
        let eval = match &members {
            Some(m) => EvalSet::Only(m),
            None => EvalSet::All,
        };
        let r_size = members.as_ref().map_or(n, Vec::len);
        let (mut part, trace) = run_multilevel(&self.graph, initial, eval, &self.config);
        let elapsed = start.elapsed();

        let map = part.compact();
        let label_map = map
            .iter()
            .enumerate()
            .filter_map(|(old, new)| new.map(|new| (old, new)))
            .collect();
        let q = modularity(&self.graph, &part).unwrap_or(0.0);
        let report = TimestepReport {
            t: self.t,
            n,
            m: self.graph.total_weight(),
            delta_edges: input.batch.num_edges(),
            r_size,
            r_fraction: if n == 0 {
                0.0
            } else {
                r_size as f64 / n as f64
            },
            q,
            levels: trace.levels.len(),
            iterations_per_level: trace.iterations_per_level(),
            total_ms: elapsed.as_secs_f64() * 1e3,
            iter_mean_ms: trace.mean_iteration_time().as_secs_f64() * 1e3,
        };
        let labels = part.labels().to_vec();
        self.partition = Some(part);
        Ok(StepOutput {
            report,
            labels,
            label_map,
            trace,
            screen_set,
        })
    }
}

/// Labels and reports for a whole stream.
#[derive(Clone, Debug, Default)]
pub struct StreamRun {
    pub labels: Vec<Vec<CommunityId>>,
    pub label_maps: Vec<Vec<(CommunityId, CommunityId)>>,
    pub reports: Vec<TimestepReport>,
    pub traces: Vec<LevelTrace>,
    pub screen_sets: Vec<Option<ScreenSet>>,
}

impl StreamRun {
    fn push(&mut self, out: StepOutput) {
        self.labels.push(out.labels);
        self.label_maps.push(out.label_map);
        self.reports.push(out.report);
        self.traces.push(out.trace);
        self.screen_sets.push(out.screen_set);
    }
}

pub fn run_stream(steps: &[StepInput], mode: Mode, config: &EngineConfig) -> Result<StreamRun> {
    drive(Pipeline::new(mode, *config)?, steps)
}

/// Like [`run_stream`] with a custom screening function for delta mode.
pub fn run_stream_with_screener<'a, F>(
    steps: &[StepInput],
    mode: Mode,
    config: &EngineConfig,
    screener: F,
) -> Result<StreamRun>
where
    F: FnMut(&DynamicGraph, &Partition, &DeltaBatch) -> Result<ScreenSet> + 'a,
{
    drive(Pipeline::with_screener(mode, *config, screener)?, steps)
}

fn drive(mut pipeline: Pipeline<'_>, steps: &[StepInput]) -> Result<StreamRun> {
    let mut run = StreamRun::default();
    for step in steps {
        run.push(pipeline.step(step)?);
    }
    Ok(run)
}

/// Per-step comparison of run `a` against run `b`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub t: usize,
    /// `q_a - q_b`.
    pub delta_q: f64,
    /// `total_b / total_a`.
    pub speedup_total: f64,
    /// `iter_mean_b / iter_mean_a`.
    pub speedup_iteration: f64,
    pub r_fraction_a: f64,
    pub r_fraction_b: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ModeComparison {
    pub rows: Vec<ComparisonRow>,
}

impl ModeComparison {
    pub fn mean_r_fraction_a(&self) -> f64 {
        mean(self.rows.iter().map(|r| r.r_fraction_a))
    }

    pub fn max_abs_delta_q(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.delta_q.abs())
            .fold(0.0, f64::max)
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if num == den {
        1.0
    } else {
        num / den
    }
}

/// Compares two report sequences step by step.
pub fn compare_modes(a: &[TimestepReport], b: &[TimestepReport]) -> Result<ModeComparison> {
    if a.len() != b.len() {
        return Err(Error::SizeMismatch(a.len(), b.len()));
    }
    let rows = a
        .iter()
        .zip(b)
        .map(|(ra, rb)| ComparisonRow {
            t: ra.t,
            delta_q: ra.q - rb.q,
            speedup_total: ratio(rb.total_ms, ra.total_ms),
            speedup_iteration: ratio(rb.iter_mean_ms, ra.iter_mean_ms),
            r_fraction_a: ra.r_fraction,
            r_fraction_b: rb.r_fraction,
        })
        .collect();
    Ok(ModeComparison { rows })
}
