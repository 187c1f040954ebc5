//! The `rwfn` command line.
//!
//! Exit codes: 0 on success, 1 on runtime errors and failed checks, 2 on
//! usage errors. Every command writes `<command>.manifest.json` into
//! `--out-dir`.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::data::{gen_synthetic, load_dataset, save_dataset, SyntheticConfig};
use crate::eval::verify::{run_verify, VerifyOptions};
use crate::eval::{
    ablation_table, compare, comparison_table, evaluate, run_ablation, split_dataset, train_task, AucMode,
    EvalReport, ExperimentConfig, ModelFile, ModelKind, Task,
};
use crate::logic::parse_kb;
use crate::numerics::PRNG_ID;
use crate::predicates::{ntn_param_count, rwfn_param_count};
use crate::training::storage_report;

#[derive(Debug, Parser)]
#[command(name = "rwfn", version, about = "Randomly weighted feature networks and logic tensor networks")]
pub struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// JSON file overriding the defaults; explicit flags override it in turn.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic scene dataset.
    GenSynth(GenSynthArgs),
    /// Train a model on the train half of a dataset.
    Train(TrainArgs),
    /// Evaluate a trained model on a labeled dataset.
    Eval(EvalArgs),
    /// Compare LTN, RWFN, shared-encoder RWFN and the inclusion-ratio baseline.
    Compare(CompareArgs),
    /// Train RWFN with each encoder branch alone and with both.
    Ablate(AblateArgs),
    /// Kernel approximation, gradient and parameter-count checks.
    Verify(VerifyArgs),
    /// Parameter and storage counts.
    Params(ParamsArgs),
}

#[derive(Debug, Args)]
pub struct GenSynthArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(short, long)]
    pub output: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub scenes: Option<u64>,
    /// Standard deviation of the class-score noise.
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub jitter: Option<f64>,
    #[arg(long)]
    pub negative_ratio: Option<f64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_wholes: Option<u64>,
    /// Largest offset between overlapping wholes, relative to whole size.
    #[arg(long)]
    pub whole_offset: Option<f64>,
    /// Pad features with noise-only score slots up to this length.
    #[arg(long)]
    pub feature_dim: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Rwfn,
    Ltn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TaskArg {
    Types,
    Partof,
}

impl From<TaskArg> for Task {
    fn from(t: TaskArg) -> Self {
        match t {
            TaskArg::Types => Task::Types,
            TaskArg::Partof => Task::Partof,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AucModeArg {
    Macro,
    Pooled,
}

impl From<AucModeArg> for AucMode {
    fn from(m: AucModeArg) -> Self {
        match m {
            AucModeArg::Macro => AucMode::Macro,
            AucModeArg::Pooled => AucMode::Pooled,
        }
    }
}

/// Experiment knobs shared by train, compare and ablate.
#[derive(Debug, Args, Clone, Default)]
pub struct ExperimentFlags {
    /// Hidden width B for the task being run (both tasks for compare and ablate).
    #[arg(long)]
    pub hidden_width: Option<usize>,
    /// NTN slices k.
    #[arg(long)]
    pub slices: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub lr: Option<f64>,
    /// Quantifier instantiation budget.
    #[arg(long)]
    pub budget: Option<usize>,
    #[arg(long)]
    pub split_ratio: Option<f64>,
    #[arg(long, value_enum)]
    pub auc_mode: Option<AucModeArg>,
    /// Ontology axioms (KB text) added to the part-of task.
    #[arg(long)]
    pub kb: Option<PathBuf>,
    /// Drop the partOf asymmetry axiom.
    #[arg(long)]
    pub no_asymmetry: bool,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum)]
    pub model: ModelArg,
    #[arg(long, value_enum)]
    pub task: TaskArg,
    /// One encoder shared by all predicates of equal arity (RWFN only).
    #[arg(long)]
    pub shared_encoder: bool,
    #[command(flatten)]
    pub exp: ExperimentFlags,
    /// Sweep a setting, e.g. `--grid B=100,200,400`. Keys: B, k, lambda, epochs, lr, budget.
    #[arg(long)]
    pub grid: Vec<String>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub common: Common,
    /// Model file written by `train`.
    #[arg(long)]
    pub model: PathBuf,
    /// Labeled dataset, typically the `test.json` written by `train`.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum)]
    pub auc_mode: Option<AucModeArg>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CompareModel {
    Ltn,
    Rwfn,
    RwfnShared,
}

impl From<CompareModel> for ModelKind {
    fn from(m: CompareModel) -> Self {
        match m {
            CompareModel::Ltn => ModelKind::Ltn,
            CompareModel::Rwfn => ModelKind::Rwfn,
            CompareModel::RwfnShared => ModelKind::RwfnShared,
        }
    }
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    pub repeats: u64,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "ltn,rwfn,rwfn-shared")]
    pub models: Vec<CompareModel>,
    #[command(flatten)]
    pub exp: ExperimentFlags,
}

#[derive(Debug, Args)]
pub struct AblateArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub exp: ExperimentFlags,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_delimiter = ',', default_value = "100,1000,10000")]
    pub kernel_widths: Vec<usize>,
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    pub gradcheck_trials: u64,
}

#[derive(Debug, Args)]
pub struct ParamsArgs {
    #[command(flatten)]
    pub common: Common,
    /// Feature length per entity.
    #[arg(long, default_value_t = 64)]
    pub n: usize,
    #[arg(long, default_value_t = 200)]
    pub hidden_width: usize,
    #[arg(long, default_value_t = 6)]
    pub slices: usize,
    /// Predicate arity m; groundings read `m·n` inputs.
    #[arg(long, default_value_t = 1)]
    pub arity: usize,
    #[arg(long, value_delimiter = ',', default_value = "1,5,11")]
    pub classifiers: Vec<usize>,
}

/// A flag combination that clap cannot reject on its own.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub args: Vec<String>,
    pub config: serde_json::Value,
    pub seeds: BTreeMap<String, u64>,
    pub artifacts: Vec<String>,
    pub tool_version: String,
    pub prng: String,
    pub wall_ms: f64,
}

struct Run {
    command: &'static str,
    args: Vec<String>,
    out_dir: PathBuf,
    start: Instant,
    artifacts: Vec<PathBuf>,
}

impl Run {
    fn new(command: &'static str, args: &[OsString], out_dir: &Path) -> anyhow::Result<Self> {
        fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
        Ok(Self {
            command,
            args: args.iter().map(|a| a.to_string_lossy().into_owned()).collect(),
            out_dir: out_dir.to_path_buf(),
            start: Instant::now(),
            artifacts: Vec::new(),
        })
    }

    fn write_json<T: Serialize>(&mut self, path: PathBuf, value: &T) -> anyhow::Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write_text(path, &text)
    }

    fn write_text(&mut self, path: PathBuf, text: &str) -> anyhow::Result<()> {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        self.artifacts.push(path);
        Ok(())
    }

    fn finish<C: Serialize>(self, config: &C, seeds: BTreeMap<String, u64>) -> anyhow::Result<()> {
        for a in &self.artifacts {
            if !a.exists() {
                bail!("artifact {} vanished", a.display());
            }
        }
        let manifest = RunManifest {
            command: self.command.to_string(),
            args: self.args,
            config: serde_json::to_value(config)?,
            seeds,
            artifacts: self.artifacts.iter().map(|p| p.display().to_string()).collect(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            prng: PRNG_ID.to_string(),
            wall_ms: self.start.elapsed().as_secs_f64() * 1e3,
        };
        let path = self.out_dir.join(format!("{}.manifest.json", self.command));
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}

fn read_config<T: serde::de::DeserializeOwned + Default>(path: Option<&Path>) -> anyhow::Result<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&text).map_err(|e| usage(format!("config {}: {e}", p.display())))
        }
    }
}

fn seeds(pairs: &[(&str, u64)]) -> BTreeMap<String, u64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn experiment_config(
    common: &Common,
    flags: &ExperimentFlags,
    task: Option<Task>,
) -> anyhow::Result<ExperimentConfig> {
    let mut cfg: ExperimentConfig = read_config(common.config.as_deref())?;
    if let Some(b) = flags.hidden_width {
        match task {
            Some(Task::Types) => cfg.hidden_width_types = b,
            Some(Task::Partof) => cfg.hidden_width_partof = b,
            None => {
                cfg.hidden_width_types = b;
                cfg.hidden_width_partof = b;
            }
        }
    }
    if let Some(k) = flags.slices {
        cfg.ntn_slices = k;
    }
    if let Some(e) = flags.epochs {
        cfg.train.epochs = e;
    }
    if let Some(l) = flags.lambda {
        cfg.train.lambda = l;
    }
    if let Some(lr) = flags.lr {
        cfg.train.learning_rate = lr;
    }
    if let Some(b) = flags.budget {
        cfg.train.instantiation_budget = b;
    }
    if let Some(r) = flags.split_ratio {
        cfg.split_ratio = r;
    }
    if let Some(m) = flags.auc_mode {
        cfg.auc_mode = m.into();
    }
    if flags.no_asymmetry {
        cfg.asymmetry_axiom = false;
    }
    if let Some(path) = &flags.kb {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        parse_kb(&text).with_context(|| format!("parsing {}", path.display()))?;
        cfg.axioms = Some(text);
    }
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    Ok(cfg)
}

fn cmd_gen_synth(a: &GenSynthArgs, argv: &[OsString]) -> anyhow::Result<()> {
    let mut cfg: SyntheticConfig = read_config(a.common.config.as_deref())?;
    cfg.seed = a.common.seed;
    if let Some(s) = a.scenes {
        cfg.num_scenes = s as usize;
    }
    if let Some(x) = a.noise {
        cfg.feature_noise = x;
    }
    if let Some(x) = a.jitter {
        cfg.geometry_jitter = x;
    }
    if let Some(x) = a.negative_ratio {
        cfg.negative_ratio = x;
    }
    if let Some(x) = a.max_wholes {
        cfg.max_wholes_per_scene = x as usize;
    }
    if let Some(x) = a.whole_offset {
        cfg.whole_offset = x;
    }
    if a.feature_dim.is_some() {
        cfg.feature_dim = a.feature_dim;
    }
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    let mut run = Run::new("gen-synth", argv, &a.common.out_dir)?;
    let ds = gen_synthetic(&cfg)?;
    if let Some(parent) = a.output.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    save_dataset(&ds, &a.output)?;
    run.artifacts.push(a.output.clone());
    println!(
        "{}: {} records, {} pairs, n = {}",
        a.output.display(),
        ds.records.len(),
        ds.pairs.len(),
        ds.n
    );
    run.finish(&cfg, seeds(&[("seed", cfg.seed)]))
}

/// Trace written next to a model; timings go to the manifest only, so the
/// file is reproducible byte for byte.
#[derive(Debug, Serialize, Deserialize)]
pub struct TraceFile {
    pub epochs: Vec<TraceEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TraceEntry {
    pub epoch: usize,
    pub loss: f64,
    pub sat: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct GridPoint {
    settings: BTreeMap<String, String>,
    dir: String,
    final_sat: f64,
    test_auc: f64,
}

fn parse_grid(specs: &[String]) -> anyhow::Result<Vec<(String, Vec<String>)>> {
    const KEYS: [&str; 6] = ["B", "k", "lambda", "epochs", "lr", "budget"];
    specs
        .iter()
        .map(|s| {
            let (key, values) = s.split_once('=').ok_or_else(|| usage(format!("grid spec `{s}` lacks `=`")))?;
            if !KEYS.contains(&key) {
                return Err(usage(format!("unknown grid key `{key}`; expected one of {}", KEYS.join(", "))));
            }
            let values: Vec<String> = values.split(',').map(str::to_string).collect();
            if values.iter().any(|v| v.is_empty()) {
                return Err(usage(format!("empty value in grid spec `{s}`")));
            }
            Ok((key.to_string(), values))
        })
        .collect()
}

fn apply_grid(cfg: &mut ExperimentConfig, task: Task, key: &str, value: &str) -> anyhow::Result<()> {
    let bad = |_| usage(format!("bad value `{value}` for grid key `{key}`"));
    match key {
        "B" => {
            let b = value.parse().map_err(bad)?;
            match task {
                Task::Types => cfg.hidden_width_types = b,
                Task::Partof => cfg.hidden_width_partof = b,
            }
        }
        "k" => cfg.ntn_slices = value.parse().map_err(bad)?,
        "epochs" => cfg.train.epochs = value.parse().map_err(bad)?,
        "budget" => cfg.train.instantiation_budget = value.parse().map_err(bad)?,
        "lambda" => cfg.train.lambda = value.parse().map_err(|_| usage(format!("bad lambda `{value}`")))?,
        "lr" => cfg.train.learning_rate = value.parse().map_err(|_| usage(format!("bad lr `{value}`")))?,
        _ => unreachable!("keys checked by parse_grid"),
    }
    cfg.validate().map_err(|e| usage(e.to_string()))
}

fn cmd_train(a: &TrainArgs, argv: &[OsString]) -> anyhow::Result<()> {
    let task: Task = a.task.into();
    let kind = match (a.model, a.shared_encoder) {
        (ModelArg::Rwfn, false) => ModelKind::Rwfn,
        (ModelArg::Rwfn, true) => ModelKind::RwfnShared,
        (ModelArg::Ltn, false) => ModelKind::Ltn,
        (ModelArg::Ltn, true) => return Err(usage("--shared-encoder applies to --model rwfn only")),
    };
    let base = experiment_config(&a.common, &a.exp, Some(task))?;
    let grid = parse_grid(&a.grid)?;
    let ds = load_dataset(&a.data)?;
    let seed = a.common.seed;
    let sp = split_dataset(&ds, &base, seed)?;
    let mut run = Run::new("train", argv, &a.common.out_dir)?;
    let out = a.common.out_dir.clone();
    run.write_json(out.join("test.json"), &sp.test)?;
    if sp.dropped_pairs > 0 {
        log::warn!("{} pairs straddled the split and were dropped", sp.dropped_pairs);
    }

    let mut points: Vec<BTreeMap<String, String>> = vec![BTreeMap::new()];
    for (key, values) in &grid {
        points = points
            .into_iter()
            .flat_map(|p| {
                values.iter().map(move |v| {
                    let mut q = p.clone();
                    q.insert(key.clone(), v.clone());
                    q
                })
            })
            .collect();
    }
    let mut summary = Vec::new();
    for settings in points {
        let mut cfg = base.clone();
        for (k, v) in &settings {
            apply_grid(&mut cfg, task, k, v)?;
        }
        let dir = if settings.is_empty() {
            out.clone()
        } else {
            let name: Vec<String> = settings.iter().map(|(k, v)| format!("{k}={v}")).collect();
            out.join("grid").join(name.join("_"))
        };
        let m = train_task(&sp.train, task, kind, &cfg, seed)?;
        let trace = TraceFile {
            epochs: m
                .trace
                .epochs
                .iter()
                .map(|e| TraceEntry {
                    epoch: e.epoch,
                    loss: e.loss,
                    sat: e.sat,
                })
                .collect(),
        };
        let final_sat = m.trace.final_sat().unwrap_or(f64::NAN);
        run.write_json(dir.join("model.json"), &ModelFile::new(&m, &cfg))?;
        run.write_json(dir.join("trace.json"), &trace)?;
        let params = m.predicates.values().next().map(|p| p.count_params());
        println!(
            "{} {task} {}: final satisfiability {final_sat:.4}, {} learnable params per predicate, {:.0} ms",
            kind.label(),
            dir.display(),
            params.map_or(0, |p| p.learnable),
            m.wall_ms
        );
        if !settings.is_empty() {
            let report = evaluate(task, kind.label(), &m.predicates, &sp.test, &cfg, seed)?;
            summary.push(GridPoint {
                settings,
                dir: dir.display().to_string(),
                final_sat,
                test_auc: report.auc,
            });
        }
    }
    if !summary.is_empty() {
        for p in &summary {
            println!("{:?}: test AUC {:.4}", p.settings, p.test_auc);
        }
        run.write_json(out.join("grid.json"), &summary)?;
    }
    run.finish(&base, seeds(&[("seed", seed)]))
}

fn report_line(r: &EvalReport) -> String {
    let mode = r.auc_mode.map_or(String::new(), |m| format!(" ({})", serde_json::to_value(m).unwrap_or_default().as_str().unwrap_or("")));
    format!(
        "{} {} {}: AUC{mode} {:.4}; at th={}: precision {:.4}, recall {:.4}; params {}/{}",
        r.task.tag(),
        r.task,
        r.model,
        r.auc,
        r.threshold,
        r.precision_at_threshold,
        r.recall_at_threshold,
        r.params.learnable,
        r.params.total
    )
}

fn cmd_eval(a: &EvalArgs, argv: &[OsString]) -> anyhow::Result<()> {
    let text = fs::read_to_string(&a.model).with_context(|| format!("reading {}", a.model.display()))?;
    let file: ModelFile = serde_json::from_str(&text).with_context(|| format!("parsing {}", a.model.display()))?;
    let mut cfg = file.config.clone();
    if let Some(m) = a.auc_mode {
        cfg.auc_mode = m.into();
    }
    let ds = load_dataset(&a.data)?;
    let mut run = Run::new("eval", argv, &a.common.out_dir)?;
    let predicates = file.load_predicates()?;
    let report = evaluate(file.task, file.model.label(), &predicates, &ds, &cfg, file.seed)?;
    let line = report_line(&report);
    println!("{line}");
    run.write_json(a.common.out_dir.join("eval.json"), &report)?;
    run.write_text(a.common.out_dir.join("eval.txt"), &format!("{line}\n"))?;
    run.finish(&cfg, seeds(&[("model_seed", file.seed)]))
}

fn cmd_compare(a: &CompareArgs, argv: &[OsString]) -> anyhow::Result<()> {
    let cfg = experiment_config(&a.common, &a.exp, None)?;
    let ds = load_dataset(&a.data)?;
    let models: Vec<ModelKind> = a.models.iter().map(|&m| m.into()).collect();
    let mut run = Run::new("compare", argv, &a.common.out_dir)?;
    let report = compare(&ds, &models, a.repeats as usize, &cfg, a.common.seed)?;
    let table = comparison_table(&report);
    print!("{table}");
    run.write_json(a.common.out_dir.join("comparison.json"), &report)?;
    run.write_text(a.common.out_dir.join("comparison.txt"), &table)?;
    let mut s = seeds(&[("seed", a.common.seed)]);
    for (i, rs) in report.repeat_seeds.iter().enumerate() {
        s.insert(format!("repeat_{i}"), *rs);
    }
    run.finish(&cfg, s)
}

fn cmd_ablate(a: &AblateArgs, argv: &[OsString]) -> anyhow::Result<()> {
    let cfg = experiment_config(&a.common, &a.exp, None)?;
    let ds = load_dataset(&a.data)?;
    let mut run = Run::new("ablate", argv, &a.common.out_dir)?;
    let report = run_ablation(&ds, &cfg, a.common.seed)?;
    let table = ablation_table(&report);
    print!("{table}");
    run.write_json(a.common.out_dir.join("ablation.json"), &report)?;
    run.write_text(a.common.out_dir.join("ablation.txt"), &table)?;
    run.finish(&cfg, seeds(&[("seed", a.common.seed)]))
}

fn cmd_verify(a: &VerifyArgs, argv: &[OsString]) -> anyhow::Result<bool> {
    let mut opts: VerifyOptions = read_config(a.common.config.as_deref())?;
    opts.kernel_widths = a.kernel_widths.clone();
    opts.gradcheck_trials = a.gradcheck_trials as usize;
    opts.seed = a.common.seed;
    if opts.kernel_widths.contains(&0) {
        return Err(usage("kernel widths must be positive"));
    }
    let mut run = Run::new("verify", argv, &a.common.out_dir)?;
    let report = run_verify(&opts)?;
    let mut lines = String::new();
    for k in &report.kernel {
        lines.push_str(&format!("kernel B={}: mean error {:.5}\n", k.width, k.mean_error));
    }
    for c in &report.checks {
        lines.push_str(&format!("{}: {} {}\n", c.name, c.detail, if c.passed { "OK" } else { "FAIL" }));
    }
    print!("{lines}");
    run.write_json(a.common.out_dir.join("verify.json"), &report)?;
    run.finish(&opts, seeds(&[("seed", opts.seed)]))?;
    if !report.passed() {
        eprintln!("failed checks: {}", report.failed().join(", "));
    }
    Ok(report.passed())
}

#[derive(Debug, Serialize)]
struct ParamsOut {
    n: usize,
    arity: usize,
    hidden_width: usize,
    slices: usize,
    rwfn: crate::predicates::ParamCount,
    ltn: crate::predicates::ParamCount,
    storage: Vec<crate::training::StorageReport>,
}

fn cmd_params(a: &ParamsArgs, argv: &[OsString]) -> anyhow::Result<()> {
    if a.n == 0 || a.hidden_width == 0 || a.slices == 0 || a.arity == 0 {
        return Err(usage("n, hidden width, slices and arity must be positive"));
    }
    let mut run = Run::new("params", argv, &a.common.out_dir)?;
    let d = a.arity * a.n;
    let out = ParamsOut {
        n: a.n,
        arity: a.arity,
        hidden_width: a.hidden_width,
        slices: a.slices,
        rwfn: rwfn_param_count(d, a.hidden_width),
        ltn: ntn_param_count(d, a.slices),
        storage: a.classifiers.iter().map(|&i| storage_report(d, a.hidden_width, i)).collect(),
    };
    println!("input {d} (arity {} x n {}), B = {}, k = {}", a.arity, a.n, a.hidden_width, a.slices);
    println!("rwfn  learnable {:>8}  total {:>8}", out.rwfn.learnable, out.rwfn.total);
    println!("ltn   learnable {:>8}  total {:>8}", out.ltn.learnable, out.ltn.total);
    println!("learnable ratio rwfn:ltn = {}:{}", out.rwfn.learnable, out.ltn.learnable);
    println!("classifiers  shared-encoder floats  private-encoder floats");
    for s in &out.storage {
        println!("{:>11}  {:>21}  {:>22}", s.classifiers, s.shared, s.unshared);
    }
    run.write_json(a.common.out_dir.join("params.json"), &out)?;
    run.finish(&out, seeds(&[]))
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .format_timestamp(None)
        .try_init();
}

/// Parses `args` (including the program name), runs the command and maps the
/// outcome to the exit-code contract.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    init_logging(cli.verbose);
    let result = match &cli.command {
        Command::GenSynth(a) => cmd_gen_synth(a, &argv),
        Command::Train(a) => cmd_train(a, &argv),
        Command::Eval(a) => cmd_eval(a, &argv),
        Command::Compare(a) => cmd_compare(a, &argv),
        Command::Ablate(a) => cmd_ablate(a, &argv),
        Command::Verify(a) => match cmd_verify(a, &argv) {
            Ok(true) => Ok(()),
            Ok(false) => return ExitCode::from(1),
            Err(e) => Err(e),
        },
        Command::Params(a) => cmd_params(a, &argv),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.downcast_ref::<UsageError>().is_some() => {
            eprintln!("error: {e}");
            eprintln!("run `rwfn --help` for usage");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
