//! Temporal edge-list ingestion and time binning.
//!
//! Input lines are `SRC DST [TIMESTAMP] [WEIGHT]`, whitespace separated, with
//! `#` comment lines. Labels are opaque strings. Edges are undirected: only
//! the earliest instance of each unordered pair is kept. A missing timestamp
//! defaults to the line number. Files starting with the gzip magic bytes are
//! decompressed transparently.

use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use flate2::read::GzDecoder;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::DeltaBatch;
use crate::pipeline::StepInput;

#[derive(Clone, Debug, PartialEq)]
pub struct TemporalEdgeRecord {
    pub src: String,
    pub dst: String,
    pub timestamp: i64,
    pub weight: f64,
}

/// Lines dropped or merged during ingestion and dedup.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct DropReport {
    /// `(source, line)` of every self-interaction that was dropped.
    pub self_loops: Vec<(String, usize)>,
    /// Repeated instances of an unordered pair that were merged away.
    pub duplicates: usize,
}

impl DropReport {
    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "self_loops {}", self.self_loops.len())?;
        writeln!(out, "duplicates {}", self.duplicates)?;
        for (source, line) in &self.self_loops {
            writeln!(out, "self-loop {source}:{line}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Ingested {
    pub records: Vec<TemporalEdgeRecord>,
    pub drops: DropReport,
}

/// Parses an edge list from any reader. `name` is used in error messages.
pub fn parse_edge_list<R: BufRead>(reader: R, name: &str) -> Result<Ingested> {
    let mut out = Ingested::default();
    for (k, line) in reader.lines().enumerate() {
        let lineno = k + 1;
        let line = line.map_err(|e| Error::io(name, e))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_err = |msg: String| Error::Parse {
            path: name.to_string(),
            line: lineno,
            msg,
        };
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() < 2 {
            return Err(parse_err(format!(
                "expected at least 2 columns, got {line:?}"
            )));
        }
        if tokens.len() > 4 {
            return Err(parse_err(format!(
                "expected at most 4 columns, got {}",
                tokens.len()
            )));
        }
        let timestamp = match tokens.get(2) {
            Some(tok) => tok
                .parse::<i64>()
                .map_err(|_| parse_err(format!("bad timestamp {tok:?}")))?,
            None => lineno as i64,
        };
        let weight = match tokens.get(3) {
            Some(tok) => {
                let w: f64 = tok
                    .parse()
                    .map_err(|_| parse_err(format!("bad weight {tok:?}")))?;
                if !(w > 0.0 && w.is_finite()) {
                    return Err(parse_err(format!("weight must be positive, got {w}")));
                }
                w
            }
            None => 1.0,
        };
        if tokens[0] == tokens[1] {
            out.drops.self_loops.push((name.to_string(), lineno));
            continue;
        }
        out.records.push(TemporalEdgeRecord {
            src: tokens[0].to_string(),
            dst: tokens[1].to_string(),
            timestamp,
            weight,
        });
    }
    Ok(out)
}

fn open_maybe_gz(path: &Path) -> Result<Box<dyn BufRead>> {
    let mut file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut magic = [0u8; 2];
    let read = file.read(&mut magic).map_err(|e| Error::io(path, e))?;
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    if read == 2 && magic == [0x1f, 0x8b] {
        Ok(Box::new(BufReader::new(GzDecoder::new(file))))
    } else {
        Ok(Box::new(BufReader::new(file)))
    }
}

/// Reads an edge-list file, gzip-compressed or plain.
pub fn ingest(path: &Path) -> Result<Ingested> {
    let name = path.display().to_string();
    let ingested = parse_edge_list(open_maybe_gz(path)?, &name)?;
    if ingested.records.is_empty() {
        return Err(Error::EmptyInput(name));
    }
    Ok(ingested)
}

/// One distinct undirected edge, as first seen.
#[derive(Clone, Debug, PartialEq)]
pub struct DedupEdge {
    pub src: String,
    pub dst: String,
    pub timestamp: i64,
    pub weight: f64,
}

/// Distinct undirected edges in stream order (timestamp, then input order).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DedupedEdges {
    pub edges: Vec<DedupEdge>,
    pub duplicates: usize,
}

impl DedupedEdges {
    pub fn to_records(&self) -> Vec<TemporalEdgeRecord> {
        self.edges
            .iter()
            .map(|e| TemporalEdgeRecord {
                src: e.src.clone(),
                dst: e.dst.clone(),
                timestamp: e.timestamp,
                weight: e.weight,
            })
            .collect()
    }
}

/// Keeps the earliest instance of every unordered pair; among equal
/// timestamps the first in input order wins.
pub fn dedup(records: &[TemporalEdgeRecord]) -> DedupedEdges {
    let mut index: HashMap<(&str, &str), usize> = HashMap::with_capacity(records.len());
    let mut kept: Vec<usize> = Vec::new();
    let mut duplicates = 0;
    for (k, r) in records.iter().enumerate() {
        let key = if r.src <= r.dst {
            (r.src.as_str(), r.dst.as_str())
        } else {
            (r.dst.as_str(), r.src.as_str())
        };
        match index.get(&key) {
            Some(&slot) => {
                duplicates += 1;
                if r.timestamp < records[kept[slot]].timestamp {
                    kept[slot] = k;
                }
            }
            None => {
                index.insert(key, kept.len());
                kept.push(k);
            }
        }
    }
    kept.sort_by_key(|&k| (records[k].timestamp, k));
    let edges = kept
        .into_iter()
        .map(|k| {
            let r = &records[k];
            DedupEdge {
                src: r.src.clone(),
                dst: r.dst.clone(),
                timestamp: r.timestamp,
                weight: r.weight,
            }
        })
        .collect();
    DedupedEdges { edges, duplicates }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BinningStrategy {
    /// Equal-width slices of `[min_ts, max_ts + 1)`.
    #[default]
    EqualTime,
    /// Equal numbers of edges per bin, in stream order.
    EqualCount,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinningSpec {
    pub bins: usize,
    pub strategy: BinningStrategy,
}

/// Bidirectional map between external labels and dense internal ids.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct IdMap {
    external: Vec<String>,
    index: HashMap<String, usize>,
}

impl IdMap {
    pub fn get_or_insert(&mut self, label: &str) -> usize {
        if let Some(&id) = self.index.get(label) {
            return id;
        }
        let id = self.external.len();
        self.external.push(label.to_string());
        self.index.insert(label.to_string(), id);
        id
    }

    pub fn internal(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn external(&self, id: usize) -> &str {
        &self.external[id]
    }

    pub fn len(&self) -> usize {
        self.external.len()
    }

    pub fn is_empty(&self) -> bool {
        self.external.is_empty()
    }

    /// One `internal external` line per vertex.
    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (id, label) in self.external.iter().enumerate() {
            writeln!(out, "{id} {label}")?;
        }
        Ok(())
    }
}

/// A stream cut into time steps, ready for the pipeline.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BinnedStream {
    pub steps: Vec<StepInput>,
    pub id_map: IdMap,
    /// Cumulative number of distinct edges at the end of each step.
    pub cumulative_edges: Vec<usize>,
    pub drops: DropReport,
}

impl BinnedStream {
    pub fn num_edges(&self) -> usize {
        self.cumulative_edges.last().copied().unwrap_or(0)
    }

    /// Every edge revealed up to and including step `t` (1-based), as sorted
    /// pairs of external labels.
    pub fn cumulative_edge_set(&self, t: usize) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = self.steps[..t]
            .iter()
            .flat_map(|s| s.batch.edges())
            .map(|(u, v, _)| {
                let (a, b) = (self.id_map.external(u), self.id_map.external(v));
                if a <= b {
                    (a.to_string(), b.to_string())
                } else {
                    (b.to_string(), a.to_string())
                }
            })
            .collect();
        out.sort();
        out
    }
}

/// Assigns each deduped edge (in stream order) to a bin via `bin_of`, which
/// must be non-decreasing, then builds the per-step batches.
fn build_stream(
    deduped: &DedupedEdges,
    bins: usize,
    bin_of: impl Fn(usize) -> usize,
) -> BinnedStream {
    let mut id_map = IdMap::default();
    let mut grouped: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); bins];
    let mut new_vertices = vec![0; bins];
    for (k, e) in deduped.edges.iter().enumerate() {
        let b = bin_of(k);
        let before = id_map.len();
        let u = id_map.get_or_insert(&e.src);
        let v = id_map.get_or_insert(&e.dst);
        new_vertices[b] += id_map.len() - before;
        grouped[b].push((u, v, e.weight));
    }
    let mut cumulative = 0;
    let mut cumulative_edges = Vec::with_capacity(bins);
    let steps = grouped
        .into_iter()
        .zip(new_vertices)
        .map(|(edges, new_vertices)| {
            cumulative += edges.len();
            cumulative_edges.push(cumulative);
            StepInput {
                new_vertices,
                batch: DeltaBatch::from_edges(edges),
            }
        })
        .collect();
    BinnedStream {
        steps,
        id_map,
        cumulative_edges,
        drops: DropReport {
            self_loops: Vec::new(),
            duplicates: deduped.duplicates,
        },
    }
}

/// Cuts deduped edges into `spec.bins` steps.
pub fn bin(deduped: &DedupedEdges, spec: BinningSpec) -> Result<BinnedStream> {
    let t = spec.bins;
    let e = deduped.edges.len();
    if t == 0 {
        return Err(Error::Binning("number of bins must be at least 1".into()));
    }
    if e == 0 {
        return Err(Error::EmptyInput("no edges to bin".into()));
    }
    match spec.strategy {
        BinningStrategy::EqualTime => {
            let min = deduped.edges[0].timestamp;
            let max = deduped.edges[e - 1].timestamp;
            if min == max && t > 1 {
                return Err(Error::Binning(format!(
                    "all timestamps equal ({min}); cannot cut into {t} equal-time bins"
                )));
            }
            let span = (max as i128) - (min as i128) + 1;
            Ok(build_stream(deduped, t, |k| {
                let offset = deduped.edges[k].timestamp as i128 - min as i128;
                (offset * t as i128 / span) as usize
            }))
        }
        BinningStrategy::EqualCount => {
            if t > e {
                return Err(Error::Binning(format!(
                    "{t} equal-count bins requested but only {e} distinct edges"
                )));
            }
            // edge k lies in bin b iff floor(b*e/t) <= k < floor((b+1)*e/t)
            Ok(build_stream(deduped, t, |k| ((k + 1) * t - 1) / e))
        }
    }
}

/// Dedup followed by binning.
pub fn normalize_and_bin(
    records: &[TemporalEdgeRecord],
    spec: BinningSpec,
) -> Result<BinnedStream> {
    if records.is_empty() {
        return Err(Error::EmptyInput("no records".into()));
    }
    bin(&dedup(records), spec)
}

/// Bins the same records at several resolutions, deduplicating once.
pub fn resolution_sweep_prepare(
    records: &[TemporalEdgeRecord],
    resolutions: &[usize],
    strategy: BinningStrategy,
) -> Result<Vec<(usize, BinnedStream)>> {
    if records.is_empty() {
        return Err(Error::EmptyInput("no records".into()));
    }
    let deduped = dedup(records);
    resolutions
        .iter()
        .map(|&bins| Ok((bins, bin(&deduped, BinningSpec { bins, strategy })?)))
        .collect()
}

/// Step files `step_<k>.txt` (or `.txt.gz`) in `dir`, ordered by `k`.
pub fn list_step_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<(u64, PathBuf)> = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let Some(name) = path.file_name().and_then(|s| s.to_str()) else {
            continue;
        };
        let stem = name
            .strip_suffix(".txt.gz")
            .or_else(|| name.strip_suffix(".txt"));
        if let Some(k) = stem
            .and_then(|s| s.strip_prefix("step_"))
            .and_then(|k| k.parse::<u64>().ok())
        {
            files.push((k, path));
        }
    }
    if files.is_empty() {
        return Err(Error::EmptyInput(format!(
            "no step_<k>.txt files in {}",
            dir.display()
        )));
    }
    files.sort();
    Ok(files.into_iter().map(|(_, p)| p).collect())
}

/// Reads a directory of per-step edge lists; one file is one step. Any
/// timestamp column is ignored. Edges repeated in a later file are dropped.
pub fn read_steps_dir(dir: &Path) -> Result<BinnedStream> {
    let files = list_step_files(dir)?;
    let mut records = Vec::new();
    let mut drops = DropReport::default();
    for (k, path) in files.iter().enumerate() {
        let name = path.display().to_string();
        let mut ingested = parse_edge_list(open_maybe_gz(path)?, &name)?;
        for r in ingested.records.iter_mut() {
            r.timestamp = k as i64;
        }
        records.extend(ingested.records);
        drops.self_loops.extend(ingested.drops.self_loops);
    }
    if records.is_empty() {
        return Err(Error::EmptyInput(dir.display().to_string()));
    }
    let deduped = dedup(&records);
    let mut stream = build_stream(&deduped, files.len(), |k| {
        deduped.edges[k].timestamp as usize
    });
    drops.duplicates = deduped.duplicates;
    stream.drops = drops;
    Ok(stream)
}

/// Writes `steps` as `step_<k>.txt` files (k from 1) using external labels.
/// Unit-weight edges are written as `SRC DST`, others as `SRC DST k WEIGHT`.
pub fn write_steps_dir<F>(dir: &Path, steps: &[StepInput], label: F) -> Result<Vec<PathBuf>>
where
    F: Fn(usize) -> String,
{
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths = Vec::with_capacity(steps.len());
    for (k, step) in steps.iter().enumerate() {
        let path = dir.join(format!("step_{}.txt", k + 1));
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut out = BufWriter::new(file);
        for (u, v, w) in step.batch.edges() {
            let line = if w == 1.0 {
                format!("{} {}\n", label(u), label(v))
            } else {
                format!("{} {} {} {}\n", label(u), label(v), k + 1, w)
            };
            out.write_all(line.as_bytes())
                .map_err(|e| Error::io(&path, e))?;
        }
        out.flush().map_err(|e| Error::io(&path, e))?;
        paths.push(path);
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(src: &str, dst: &str, ts: i64) -> TemporalEdgeRecord {
        TemporalEdgeRecord {
            src: src.into(),
            dst: dst.into(),
            timestamp: ts,
            weight: 1.0,
        }
    }

    #[test]
    fn parse_lines() {
        let text = "# comment\n101 202 1388534400\n\n5 5 10\n7 8\n1 2 3 2.5\n";
        let got = parse_edge_list(text.as_bytes(), "mem").unwrap();
        assert_eq!(got.records.len(), 3);
        assert_eq!(got.records[0], rec("101", "202", 1388534400));
        assert_eq!(got.records[1], rec("7", "8", 5));
        assert_eq!(got.records[2].weight, 2.5);
        assert_eq!(got.drops.self_loops, vec![("mem".to_string(), 4)]);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        for (text, line) in [
            ("1 2\n3\n", 2),
            ("1 2 x\n", 1),
            ("1 2 3 -1\n", 1),
            ("1 2 3 0\n", 1),
            ("1 2 3 1 9\n", 1),
        ] {
            match parse_edge_list(text.as_bytes(), "mem") {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn first_instance_wins() {
        let d = dedup(&[rec("a", "b", 9), rec("c", "d", 5), rec("b", "a", 1)]);
        assert_eq!(d.duplicates, 1);
        assert_eq!(d.edges.len(), 2);
        assert_eq!((d.edges[0].src.as_str(), d.edges[0].timestamp), ("b", 1));

        let s = normalize_and_bin(
            &[rec("a", "b", 1), rec("x", "y", 9), rec("b", "a", 9)],
            BinningSpec {
                bins: 2,
                strategy: BinningStrategy::EqualTime,
            },
        )
        .unwrap();
        assert_eq!(s.steps[0].batch.num_edges(), 1);
        assert_eq!(s.steps[1].batch.num_edges(), 1);
        assert_eq!(s.cumulative_edge_set(1), vec![("a".into(), "b".into())]);
    }

    #[test]
    fn equal_time_bin_edges() {
        let records: Vec<_> = (0..100).map(|t| rec(&format!("u{t}"), "hub", t)).collect();
        let s = normalize_and_bin(
            &records,
            BinningSpec {
                bins: 4,
                strategy: BinningStrategy::EqualTime,
            },
        )
        .unwrap();
        assert_eq!(s.cumulative_edges, vec![25, 50, 75, 100]);
        assert_eq!(s.steps[0].new_vertices, 26);
        assert_eq!(s.steps[1].new_vertices, 25);
    }

    #[test]
    fn equal_count_bins() {
        let records: Vec<_> = (0..10).map(|k| rec(&k.to_string(), "z", 0)).collect();
        let s = normalize_and_bin(
            &records,
            BinningSpec {
                bins: 5,
                strategy: BinningStrategy::EqualCount,
            },
        )
        .unwrap();
        assert_eq!(s.cumulative_edges, vec![2, 4, 6, 8, 10]);
        // ties broken by file order
        assert_eq!(
            s.cumulative_edge_set(1),
            vec![("0".into(), "z".into()), ("1".into(), "z".into())]
        );
    }

    #[test]
    fn binning_errors() {
        let same: Vec<_> = (0..4).map(|k| rec(&k.to_string(), "z", 7)).collect();
        let time = |bins| BinningSpec {
            bins,
            strategy: BinningStrategy::EqualTime,
        };
        assert!(matches!(
            normalize_and_bin(&same, time(2)),
            Err(Error::Binning(_))
        ));
        assert_eq!(normalize_and_bin(&same, time(1)).unwrap().steps.len(), 1);
        assert!(normalize_and_bin(&same, time(0)).is_err());
        let count = BinningSpec {
            bins: 5,
            strategy: BinningStrategy::EqualCount,
        };
        assert!(matches!(
            normalize_and_bin(&same, count),
            Err(Error::Binning(_))
        ));
        assert!(matches!(
            normalize_and_bin(&[], time(1)),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn single_resolution_is_whole_edge_set() {
        let records = vec![rec("a", "b", 3), rec("b", "c", 1), rec("c", "a", 2)];
        let sweep = resolution_sweep_prepare(&records, &[1], BinningStrategy::EqualTime).unwrap();
        assert_eq!(sweep.len(), 1);
        assert_eq!(sweep[0].1.steps.len(), 1);
        assert_eq!(sweep[0].1.num_edges(), 3);
        assert_eq!(sweep[0].1.steps[0].new_vertices, 3);
    }

    #[test]
    fn steps_dir_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let steps = vec![
            StepInput {
                new_vertices: 2,
                batch: DeltaBatch::from_edges([(0, 1, 1.0)]),
            },
            StepInput {
                new_vertices: 1,
                batch: DeltaBatch::from_edges([(1, 2, 2.0), (0, 2, 1.0)]),
            },
        ];
        let labels = ["x", "y", "z"];
        write_steps_dir(dir.path(), &steps, |v| labels[v].to_string()).unwrap();
        let back = read_steps_dir(dir.path()).unwrap();
        assert_eq!(back.steps, steps);
        assert_eq!(back.id_map.external(2), "z");
        assert_eq!(back.id_map.internal("y"), Some(1));
    }

    #[test]
    fn gzip_input() {
        use flate2::write::GzEncoder;
        use flate2::Compression;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("edges.txt.gz");
        let mut enc = GzEncoder::new(File::create(&path).unwrap(), Compression::default());
        enc.write_all(b"1 2 10\n2 3 20\n").unwrap();
        enc.finish().unwrap();
        let got = ingest(&path).unwrap();
        assert_eq!(got.records.len(), 2);

        let empty = dir.path().join("empty.txt");
        fs::write(&empty, "# nothing\n").unwrap();
        assert!(matches!(ingest(&empty), Err(Error::EmptyInput(_))));
    }
}
