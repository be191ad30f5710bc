//! Command-line front end: `run`, `sweep` and `gen`.
//!
//! Exit codes: 0 on success, 2 for configuration errors (including bad
//! flags), 3 for input errors.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::engine::{EngineConfig, VisitOrder};
use crate::error::{Error, Result};
use crate::metrics::{average_modularity, percent_saving, total_ms};
use crate::pipeline::{
    run_stream, write_reports_csv, write_reports_jsonl, Mode, Pipeline, StreamRun,
};
use crate::stream_io::{
    ingest, normalize_and_bin, read_steps_dir, resolution_sweep_prepare, write_steps_dir,
    BinnedStream, BinningSpec, BinningStrategy, IdMap, TemporalEdgeRecord,
};
use crate::synth::{generate, SynthSpec, SynthStream};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "deltascreen",
    version,
    about = "Incremental community detection on growing graphs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Cluster every time step of one stream.
    Run(RunArgs),
    /// Run several temporal resolutions and modes and summarize them.
    Sweep(SweepArgs),
    /// Write a synthetic stream as per-step edge files.
    Gen(GenArgs),
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
pub struct InputArgs {
    /// Temporal edge list `SRC DST [TIMESTAMP] [WEIGHT]`, optionally gzipped.
    #[arg(long, value_name = "PATH")]
    pub input: Option<PathBuf>,
    /// Directory of `step_<k>.txt` files, one per time step.
    #[arg(long, value_name = "PATH")]
    pub steps_dir: Option<PathBuf>,
    /// Synthetic stream, e.g. `n=200,k=4,p_in=0.3,p_out=0.01,order=localized`.
    #[arg(long, value_name = "SPEC")]
    pub synth: Option<String>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModeArg {
    Static,
    Baseline,
    Delta,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Static => Mode::Static,
            ModeArg::Baseline => Mode::Baseline,
            ModeArg::Delta => Mode::Delta,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
pub enum BinningArg {
    #[default]
    Time,
    Count,
}

impl From<BinningArg> for BinningStrategy {
    fn from(b: BinningArg) -> Self {
        match b {
            BinningArg::Time => BinningStrategy::EqualTime,
            BinningArg::Count => BinningStrategy::EqualCount,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
pub enum OrderArg {
    #[default]
    Ascending,
    Shuffled,
}

#[derive(Args, Debug)]
pub struct EngineArgs {
    /// Convergence threshold on modularity gain.
    #[arg(long, default_value_t = 1e-6)]
    pub tau: f64,
    /// Seed for synthetic generation and shuffled visiting.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = OrderArg::Ascending)]
    pub visit_order: OrderArg,
    #[arg(long, default_value_t = 20)]
    pub max_levels: usize,
    #[arg(long, default_value_t = 100)]
    pub max_iterations: usize,
}

impl EngineArgs {
    fn config(&self) -> EngineConfig {
        EngineConfig {
            tau: self.tau,
            max_iterations_per_level: self.max_iterations,
            max_levels: self.max_levels,
            visit_order: match self.visit_order {
                OrderArg::Ascending => VisitOrder::Ascending,
                OrderArg::Shuffled => VisitOrder::Shuffled(self.seed.unwrap_or(0)),
            },
        }
    }
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value_t = ModeArg::Delta)]
    pub mode: ModeArg,
    /// Number of time steps (ignored for --steps-dir).
    #[arg(long)]
    pub bins: Option<usize>,
    #[arg(long, value_enum, default_value_t = BinningArg::Time)]
    pub binning: BinningArg,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Write the screened set of every delta step with provenance.
    #[arg(long)]
    pub dump_screenset: bool,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// Timestamped edge list.
    #[arg(
        long,
        value_name = "PATH",
        conflicts_with = "synth",
        required_unless_present = "synth"
    )]
    pub input: Option<PathBuf>,
    #[arg(long, value_name = "SPEC")]
    pub synth: Option<String>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![2usize, 4, 8, 12, 16, 20, 24, 28])]
    pub resolutions: Vec<usize>,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = vec![ModeArg::Baseline, ModeArg::Delta])]
    pub modes: Vec<ModeArg>,
    #[arg(long, value_enum, default_value_t = BinningArg::Time)]
    pub binning: BinningArg,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long, value_name = "SPEC")]
    pub synth: String,
    /// Number of steps; overrides `steps=` in the spec.
    #[arg(long)]
    pub bins: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

/// Where a run's edges come from.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputSource {
    File(PathBuf),
    StepsDir(PathBuf),
    Synth(SynthSpec),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub input: InputSource,
    pub mode: Mode,
    pub bins: Option<usize>,
    pub binning: BinningStrategy,
    pub engine: EngineConfig,
    pub seed: Option<u64>,
    pub out: PathBuf,
    pub dump_screenset: bool,
}

fn synth_spec(text: &str, bins: Option<usize>, seed: Option<u64>) -> Result<SynthSpec> {
    let mut spec: SynthSpec = text.parse()?;
    if let Some(b) = bins {
        spec.steps = b;
    }
    if let Some(s) = seed {
        spec.seed = s;
    }
    spec.validate()?;
    Ok(spec)
}

impl RunArgs {
    pub fn to_config(&self) -> Result<RunConfig> {
        let input = match (&self.input.input, &self.input.steps_dir, &self.input.synth) {
            (Some(p), None, None) => InputSource::File(p.clone()),
            (None, Some(p), None) => InputSource::StepsDir(p.clone()),
            (None, None, Some(s)) => {
                InputSource::Synth(synth_spec(s, self.bins, self.engine.seed)?)
            }
            _ => return Err(Error::Config("exactly one input source is required".into())),
        };
        let engine = self.engine.config();
        engine.validate()?;
        Ok(RunConfig {
            input,
            mode: self.mode.into(),
            bins: self.bins,
            binning: self.binning.into(),
            engine,
            seed: self.engine.seed,
            out: self.out.clone(),
            dump_screenset: self.dump_screenset,
        })
    }
}

fn synth_to_stream(s: &SynthStream) -> BinnedStream {
    let mut id_map = IdMap::default();
    for &v in &s.original_ids {
        id_map.get_or_insert(&v.to_string());
    }
    let mut cumulative = 0;
    let cumulative_edges = s
        .steps
        .iter()
        .map(|st| {
            cumulative += st.batch.num_edges();
            cumulative
        })
        .collect();
    BinnedStream {
        steps: s.steps.clone(),
        id_map,
        cumulative_edges,
        drops: Default::default(),
    }
}

/// Loads the stream a run config points at.
pub fn load_stream(config: &RunConfig) -> Result<(BinnedStream, Option<SynthStream>)> {
    match &config.input {
        InputSource::File(path) => {
            let ingested = ingest(path)?;
            let spec = BinningSpec {
                bins: config.bins.unwrap_or(1),
                strategy: config.binning,
            };
            let mut stream = normalize_and_bin(&ingested.records, spec)?;
            stream.drops.self_loops = ingested.drops.self_loops;
            Ok((stream, None))
        }
        InputSource::StepsDir(dir) => Ok((read_steps_dir(dir)?, None)),
        InputSource::Synth(spec) => {
            let synth = generate(spec)?;
            Ok((synth_to_stream(&synth), Some(synth)))
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    Ok(BufWriter::new(
        File::create(path).map_err(|e| Error::io(path, e))?,
    ))
}

fn write_file(
    path: &Path,
    f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> Result<()> {
    let mut out = create(path)?;
    f(&mut out)
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    config: &'a RunConfig,
    steps: usize,
    vertices: usize,
    edges: usize,
}

/// Everything a completed run produced.
pub struct RunOutcome {
    pub stream: BinnedStream,
    pub run: StreamRun,
}

/// Runs one stream end to end and writes all artifacts under `config.out`.
pub fn execute_run(config: &RunConfig) -> Result<RunOutcome> {
    let (stream, synth) = load_stream(config)?;
    let mut pipeline = Pipeline::new(config.mode, config.engine)?;
    let mut run = StreamRun::default();
    for step in &stream.steps {
        let out = pipeline.step(step)?;
        run.labels.push(out.labels);
        run.label_maps.push(out.label_map);
        run.reports.push(out.report);
        run.traces.push(out.trace);
        run.screen_sets.push(out.screen_set);
    }

    let out = &config.out;
    write_file(&out.join("reports.csv"), |w| {
        write_reports_csv(&run.reports, w)
    })?;
    let jsonl = out.join("reports.jsonl");
    let mut w = create(&jsonl)?;
    write_reports_jsonl(&run.reports, &mut w)?;
    w.flush().map_err(|e| Error::io(&jsonl, e))?;

    for (k, labels) in run.labels.iter().enumerate() {
        let t = k + 1;
        write_file(&out.join("labels").join(format!("step_{t}.txt")), |w| {
            for (v, c) in labels.iter().enumerate() {
                writeln!(w, "{} {}", stream.id_map.external(v), c)?;
            }
            Ok(())
        })?;
        write_file(&out.join("label_maps").join(format!("step_{t}.txt")), |w| {
            for (old, new) in &run.label_maps[k] {
                writeln!(w, "{old} {new}")?;
            }
            Ok(())
        })?;
        if config.dump_screenset {
            if let Some(set) = &run.screen_sets[k] {
                write_file(&out.join("screenset").join(format!("step_{t}.txt")), |w| {
                    set.write_dump(w)
                })?;
            }
        }
    }
    write_file(&out.join("id_map.txt"), |w| stream.id_map.write_to(w))?;
    write_file(&out.join("drop_report.txt"), |w| stream.drops.write_to(w))?;
    if let Some(synth) = &synth {
        write_file(&out.join("ground_truth.txt"), |w| {
            synth.write_ground_truth(w)
        })?;
    }
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: "run",
        config,
        steps: stream.steps.len(),
        vertices: stream.id_map.len(),
        edges: stream.num_edges(),
    };
    write_file(&out.join("manifest.json"), |w| {
        serde_json::to_writer_pretty(&mut *w, &manifest).map_err(std::io::Error::other)?;
        writeln!(w)
    })?;
    Ok(RunOutcome { stream, run })
}

/// One (resolution, mode) row of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub bins: usize,
    pub mode: Mode,
    pub steps: usize,
    pub avg_q: f64,
    pub final_q: f64,
    pub total_ms: f64,
    /// Delta-vs-baseline time saving at this resolution; present only when
    /// both modes were run.
    pub pct_time_saving: Option<f64>,
}

pub const SWEEP_HEADER: &str = "bins,mode,steps,avg_q,final_q,total_ms,pct_time_saving";

impl SweepRow {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{:.3},{}",
            self.bins,
            self.mode,
            self.steps,
            self.avg_q,
            self.final_q,
            self.total_ms,
            self.pct_time_saving
                .map(|p| format!("{p:.3}"))
                .unwrap_or_default()
        )
    }
}

/// Runs every resolution in every mode over `records` and writes
/// `summary.csv` plus per-run reports under `out`.
pub fn run_sweep(
    records: &[TemporalEdgeRecord],
    resolutions: &[usize],
    modes: &[Mode],
    binning: BinningStrategy,
    engine: &EngineConfig,
    out: &Path,
) -> Result<Vec<SweepRow>> {
    if resolutions.is_empty() || modes.is_empty() {
        return Err(Error::Config(
            "need at least one resolution and one mode".into(),
        ));
    }
    let streams = resolution_sweep_prepare(records, resolutions, binning)?;
    let mut rows = Vec::new();
    for (bins, stream) in &streams {
        let first = rows.len();
        let mut totals = (None, None);
        for &mode in modes {
            let run = run_stream(&stream.steps, mode, engine)?;
            write_file(
                &out.join(format!("T{bins}_{mode}")).join("reports.csv"),
                |w| write_reports_csv(&run.reports, w),
            )?;
            let total = total_ms(&run.reports);
            match mode {
                Mode::Baseline => totals.0 = Some(total),
                Mode::Delta => totals.1 = Some(total),
                Mode::Static => {}
            }
            rows.push(SweepRow {
                bins: *bins,
                mode,
                steps: run.reports.len(),
                avg_q: average_modularity(&run.reports),
                final_q: run.reports.last().map_or(0.0, |r| r.q),
                total_ms: total,
                pct_time_saving: None,
            });
        }
        if let (Some(base), Some(delta)) = totals {
            let saving = percent_saving(delta, base);
            for row in &mut rows[first..] {
                row.pct_time_saving = Some(saving);
            }
        }
    }
    write_file(&out.join("summary.csv"), |w| {
        writeln!(w, "{SWEEP_HEADER}")?;
        for row in &rows {
            writeln!(w, "{}", row.csv_row())?;
        }
        Ok(())
    })?;
    Ok(rows)
}

fn cmd_sweep(args: &SweepArgs) -> Result<Vec<SweepRow>> {
    let engine = args.engine.config();
    engine.validate()?;
    let records = match (&args.input, &args.synth) {
        (Some(path), None) => ingest(path)?.records,
        (None, Some(spec)) => generate(&synth_spec(spec, None, args.engine.seed)?)?.records(),
        _ => {
            return Err(Error::Config(
                "exactly one of --input or --synth is required".into(),
            ))
        }
    };
    let modes: Vec<Mode> = args.modes.iter().map(|&m| m.into()).collect();
    run_sweep(
        &records,
        &args.resolutions,
        &modes,
        args.binning.into(),
        &engine,
        &args.out,
    )
}

/// Generates a synthetic stream into `out` as step files plus ground truth.
pub fn cmd_gen(args: &GenArgs) -> Result<Vec<PathBuf>> {
    let spec = synth_spec(&args.synth, args.bins, args.seed)?;
    let synth = generate(&spec)?;
    let mut paths = write_steps_dir(&args.out, &synth.steps, |v| {
        synth.original_ids[v].to_string()
    })?;
    let truth = args.out.join("ground_truth.txt");
    write_file(&truth, |w| synth.write_ground_truth(w))?;
    paths.push(truth);
    Ok(paths)
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Binning(_) => EXIT_CONFIG,
        _ => EXIT_INPUT,
    }
}

/// Parses `args` (including the program name) and executes the command.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let result = match &cli.command {
        Command::Run(args) => args.to_config().and_then(|c| execute_run(&c)).map(|_| ()),
        Command::Sweep(args) => cmd_sweep(args).map(|_| ()),
        Command::Gen(args) => cmd_gen(args).map(|_| ()),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
