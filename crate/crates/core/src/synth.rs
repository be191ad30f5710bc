//! Planted-partition edge streams.
//!
//! `n` vertices are split into `k` contiguous, near-equal blocks. Each pair
//! is an edge with probability `p_in` inside a block and `p_out` across. The
//! sampled edges are then revealed over `steps` batches, either in a uniform
//! random order or block by block.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::DeltaBatch;
use crate::pipeline::StepInput;
use crate::stream_io::TemporalEdgeRecord;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeOrder {
    /// Uniformly shuffled, cut into equal-size batches.
    #[default]
    Random,
    /// Edges grouped by the higher block of their endpoints; each step reveals
    /// a contiguous window of blocks.
    Localized,
}

impl FromStr for EdgeOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(EdgeOrder::Random),
            "localized" => Ok(EdgeOrder::Localized),
            other => Err(Error::Config(format!("unknown edge order {other:?}"))),
        }
    }
}

impl fmt::Display for EdgeOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EdgeOrder::Random => "random",
            EdgeOrder::Localized => "localized",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n: usize,
    pub k: usize,
    pub p_in: f64,
    pub p_out: f64,
    pub steps: usize,
    pub order: EdgeOrder,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            n: 1000,
            k: 10,
            p_in: 0.1,
            p_out: 0.005,
            steps: 10,
            order: EdgeOrder::Random,
            seed: 0,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.k == 0 || self.k > self.n {
            return fail(format!("need 1 <= k <= n, got k={} n={}", self.k, self.n));
        }
        if self.steps == 0 {
            return fail("steps must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.p_in) || !(0.0..=1.0).contains(&self.p_out) {
            return fail("probabilities must lie in [0, 1]".into());
        }
        if self.p_out >= self.p_in {
            return fail(format!(
                "need p_out < p_in, got p_in={} p_out={}",
                self.p_in, self.p_out
            ));
        }
        Ok(())
    }

    /// Block of generator vertex `v`.
    pub fn block_of(&self, v: usize) -> usize {
        v * self.k / self.n
    }
}

impl FromStr for SynthSpec {
    type Err = Error;

    /// Parses `key=value` pairs separated by commas, e.g.
    /// `n=200,k=4,p_in=0.3,p_out=0.01,order=localized`. Missing keys keep
    /// their defaults.
    fn from_str(s: &str) -> Result<Self> {
        let mut spec = SynthSpec::default();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("expected key=value, got {part:?}")))?;
            let bad = || Error::Config(format!("bad value for {key}: {value:?}"));
            match key.trim() {
                "n" => spec.n = value.parse().map_err(|_| bad())?,
                "k" => spec.k = value.parse().map_err(|_| bad())?,
                "p_in" => spec.p_in = value.parse().map_err(|_| bad())?,
                "p_out" => spec.p_out = value.parse().map_err(|_| bad())?,
                "steps" | "t" | "T" => spec.steps = value.parse().map_err(|_| bad())?,
                "order" => spec.order = value.parse()?,
                "seed" => spec.seed = value.parse().map_err(|_| bad())?,
                other => return Err(Error::Config(format!("unknown synth key {other:?}"))),
            }
        }
        Ok(spec)
    }
}

/// A generated stream. Internal ids follow first appearance in the reveal
/// order, so vertices without edges never appear.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthStream {
    pub spec: SynthSpec,
    pub steps: Vec<StepInput>,
    /// Planted block of each internal vertex.
    pub ground_truth: Vec<usize>,
    /// Generator vertex id of each internal vertex.
    pub original_ids: Vec<usize>,
    /// All edges in reveal order, as generator vertex ids.
    pub revealed: Vec<(usize, usize)>,
}

impl SynthStream {
    pub fn num_edges(&self) -> usize {
        self.revealed.len()
    }

    /// The reveal order as timestamped records (timestamp = position), for
    /// re-binning at other resolutions.
    pub fn records(&self) -> Vec<TemporalEdgeRecord> {
        self.revealed
            .iter()
            .enumerate()
            .map(|(pos, &(u, v))| TemporalEdgeRecord {
                src: u.to_string(),
                dst: v.to_string(),
                timestamp: pos as i64,
                weight: 1.0,
            })
            .collect()
    }

    /// Blocks of every generator vertex, `vertex block` per line.
    pub fn write_ground_truth<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        for v in 0..self.spec.n {
            writeln!(out, "{} {}", v, self.spec.block_of(v))?;
        }
        Ok(())
    }
}

pub fn generate(spec: &SynthSpec) -> Result<SynthStream> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut edges = Vec::new();
    for u in 0..spec.n {
        let bu = spec.block_of(u);
        for v in u + 1..spec.n {
            let p = if spec.block_of(v) == bu {
                spec.p_in
            } else {
                spec.p_out
            };
            if rng.gen::<f64>() < p {
                edges.push((u, v));
            }
        }
    }

    let t = spec.steps;
    // [start, end) into the reveal order for each step
    let mut bounds = Vec::with_capacity(t);
    match spec.order {
        EdgeOrder::Random => {
            edges.shuffle(&mut rng);
            let e = edges.len();
            for b in 0..t {
                bounds.push((b * e / t, (b + 1) * e / t));
            }
        }
        EdgeOrder::Localized => {
            // v > u, so block_of(v) is the higher block
            let mut by_block: Vec<Vec<(usize, usize)>> = vec![Vec::new(); spec.k];
            for &(u, v) in &edges {
                by_block[spec.block_of(v)].push((u, v));
            }
            edges.clear();
            let mut block_start = Vec::with_capacity(spec.k + 1);
            for mut group in by_block {
                group.shuffle(&mut rng);
                block_start.push(edges.len());
                edges.extend(group);
            }
            block_start.push(edges.len());
            for b in 0..t {
                let lo = b * spec.k / t;
                let hi = (b + 1) * spec.k / t;
                bounds.push((block_start[lo], block_start[hi]));
            }
        }
    }

    let mut internal: Vec<Option<usize>> = vec![None; spec.n];
    let mut original_ids = Vec::new();
    let mut steps = Vec::with_capacity(t);
    for &(lo, hi) in &bounds {
        let before = original_ids.len();
        let mut batch = Vec::with_capacity(hi - lo);
        for &(u, v) in &edges[lo..hi] {
            let mut id = |x: usize| {
                *internal[x].get_or_insert_with(|| {
                    original_ids.push(x);
                    original_ids.len() - 1
                })
            };
            let (iu, iv) = (id(u), id(v));
            batch.push((iu, iv, 1.0));
        }
        steps.push(StepInput {
            new_vertices: original_ids.len() - before,
            batch: DeltaBatch::from_edges(batch),
        });
    }
    let ground_truth = original_ids.iter().map(|&v| spec.block_of(v)).collect();
    Ok(SynthStream {
        spec: *spec,
        steps,
        ground_truth,
        original_ids,
        revealed: edges,
    })
}
