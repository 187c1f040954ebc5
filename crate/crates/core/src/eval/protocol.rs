use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::metrics::{auc, mean_sd, pr_curve, threshold_metrics, PrCurve, DEFAULT_THRESHOLD};
use crate::data::{inclusion_ratio, pair_features, split, split_by_scene, Dataset, Split};
use crate::encoder::{build_encoder, Branches, EncoderConfig};
use crate::error::{Error, Result};
use crate::logic::{parse_kb, Formula, GroundedTheory, KnowledgeBase, LogicConfig, Term};
use crate::numerics::RngState;
use crate::predicates::{init_ntn, ParamCount, PredicateModel, PredicateSpec, RwfnPredicate};
use crate::training::{train, SharedEncoderRegistry, TrainConfig, TrainTrace};

/// Name of the binary relation predicate.
pub const PART_OF: &str = "partOf";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    /// T1: object type classification.
    Types,
    /// T2: part-of detection.
    Partof,
}

impl Task {
    pub const ALL: [Task; 2] = [Task::Types, Task::Partof];

    pub fn tag(self) -> &'static str {
        match self {
            Task::Types => "T1",
            Task::Partof => "T2",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Task::Types => "types",
            Task::Partof => "partof",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Ltn,
    Rwfn,
    /// RWFN with one encoder shared by all predicates of equal arity.
    RwfnShared,
}

impl ModelKind {
    pub fn label(self) -> &'static str {
        match self {
            ModelKind::Ltn => "ltn",
            ModelKind::Rwfn => "rwfn",
            ModelKind::RwfnShared => "rwfn-shared",
        }
    }

    /// The shared variant only makes sense with several predicates, so it
    /// is not run on the single-relation task.
    pub fn applies_to(self, task: Task) -> bool {
        !(self == ModelKind::RwfnShared && task == Task::Partof)
    }
}

pub const IR_BASELINE: &str = "ir-baseline";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AucMode {
    /// Mean of per-class AUCs.
    #[default]
    Macro,
    /// One curve over all (record, class) scores.
    Pooled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitMode {
    /// Whole scenes go to one side, so no pair is lost.
    #[default]
    Scene,
    /// Record-level split stratified by class.
    Record,
}

/// Everything an experiment run depends on besides the data and the seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub hidden_width_types: usize,
    pub hidden_width_partof: usize,
    pub ntn_slices: usize,
    pub fan_in: usize,
    pub inhibition_strength: f64,
    pub kernel_scale: f64,
    pub branches: Branches,
    pub split_ratio: f64,
    pub split_mode: SplitMode,
    pub auc_mode: AucMode,
    pub threshold: f64,
    /// Adds `forall x,y: partOf(x,y) -> ~partOf(y,x)` to the part-of KB.
    pub asymmetry_axiom: bool,
    /// Extra KB text (ontology axioms) for the part-of task.
    pub axioms: Option<String>,
    pub train: TrainConfig,
    pub logic: LogicConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            hidden_width_types: 200,
            hidden_width_partof: 400,
            ntn_slices: 6,
            fan_in: EncoderConfig::DEFAULT_FAN_IN,
            inhibition_strength: 1.0,
            kernel_scale: 1.0,
            branches: Branches::Both,
            split_ratio: 0.8,
            split_mode: SplitMode::Scene,
            auc_mode: AucMode::Macro,
            threshold: DEFAULT_THRESHOLD,
            asymmetry_axiom: true,
            axioms: None,
            train: TrainConfig::default(),
            logic: LogicConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if self.hidden_width_types == 0 || self.hidden_width_partof == 0 {
            return bad("hidden widths must be at least 1");
        }
        if self.ntn_slices == 0 {
            return bad("NTN needs at least one slice");
        }
        if !(self.threshold >= 0.0 && self.threshold <= 1.0) {
            return bad("threshold must lie in [0, 1]");
        }
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            return bad("split ratio must lie in (0, 1)");
        }
        self.train.validate()
    }

    pub fn hidden_width(&self, task: Task) -> usize {
        match task {
            Task::Types => self.hidden_width_types,
            Task::Partof => self.hidden_width_partof,
        }
    }

    fn encoder_config(&self, input_dim: usize, task: Task, seed: u64) -> EncoderConfig {
        let mut c = EncoderConfig::new(input_dim, self.hidden_width(task), seed);
        c.fan_in = self.fan_in.min(input_dim.saturating_sub(1)).max(1);
        c.inhibition_strength = self.inhibition_strength;
        c.kernel_scale = self.kernel_scale;
        c.with_branches(self.branches)
    }
}

const LABEL_SPLIT: u64 = 1;
const LABEL_SAMPLE: u64 = 2;
const LABEL_ENCODER: u64 = 0x100;
const LABEL_NTN: u64 = 0x10_000;
const LABEL_REPEAT: u64 = 0x1_000_000;

/// Seed of the independent stream `label` under `seed`.
pub fn derive_seed(seed: u64, label: u64) -> u64 {
    RngState::new(seed).child(label).next_u64()
}

/// Train/test split for a run seeded with `seed`.
pub fn split_dataset(ds: &Dataset, cfg: &ExperimentConfig, seed: u64) -> Result<Split> {
    let mut rng = RngState::new(derive_seed(seed, LABEL_SPLIT));
    match cfg.split_mode {
        SplitMode::Scene => split_by_scene(ds, cfg.split_ratio, &mut rng),
        SplitMode::Record => split(ds, cfg.split_ratio, &mut rng),
    }
}

fn type_literals(kb: &mut KnowledgeBase, ds: &Dataset, classes: &[&str]) -> Result<()> {
    for r in &ds.records {
        for &c in classes {
            let atom = Formula::fact(c, [r.id.as_str()]);
            if r.labels.iter().any(|l| l == c) {
                kb.add(atom)?;
            } else {
                kb.add(Formula::not(atom))?;
            }
        }
    }
    Ok(())
}

/// Knowledge base for `task` over the records of `ds`.
///
/// Types: `C(b)` for each label of `b` and `¬C′(b)` for every other class.
/// Part-of: `partOf(p, w)` or `¬partOf(p, w)` per pair, the asymmetry axiom
/// if enabled, and the extra axioms with type literals for every class
/// predicate they mention.
pub fn task_kb(ds: &Dataset, task: Task, cfg: &ExperimentConfig) -> Result<KnowledgeBase> {
    let mut kb = KnowledgeBase::new();
    let classes = ds.class_names();
    match task {
        Task::Types => {
            for &c in &classes {
                kb.declare(c, 1)?;
            }
            type_literals(&mut kb, ds, &classes)?;
        }
        Task::Partof => {
            if classes.contains(&PART_OF) {
                return Err(Error::Dataset(format!("class name `{PART_OF}` is reserved")));
            }
            kb.declare(PART_OF, 2)?;
            for p in &ds.pairs {
                let atom = Formula::fact(PART_OF, [p.part.as_str(), p.whole.as_str()]);
                kb.add(if p.positive { atom } else { Formula::not(atom) })?;
            }
            if cfg.asymmetry_axiom {
                let xy = Formula::atom(PART_OF, [Term::var("x"), Term::var("y")]);
                let yx = Formula::atom(PART_OF, [Term::var("y"), Term::var("x")]);
                kb.add(Formula::forall(["x", "y"], Formula::implies(xy, Formula::not(yx))))?;
            }
            if let Some(text) = &cfg.axioms {
                let axioms = parse_kb(text)?;
                kb.extend(&axioms)?;
                let used = axioms.used_predicates();
                let typed: Vec<&str> = classes.iter().copied().filter(|c| used.contains(*c)).collect();
                for &c in &typed {
                    if kb.arity(c) != Some(1) {
                        return Err(Error::ArityMismatch {
                            name: c.to_string(),
                            expected: 1,
                            got: kb.arity(c).unwrap_or(0),
                        });
                    }
                }
                type_literals(&mut kb, ds, &typed)?;
            }
        }
    }
    Ok(kb)
}

/// Fresh groundings for every declared predicate of `kb`.
pub fn build_models(
    kb: &KnowledgeBase,
    task: Task,
    kind: ModelKind,
    n: usize,
    cfg: &ExperimentConfig,
    seed: u64,
) -> Result<BTreeMap<String, PredicateModel>> {
    let mut registry = SharedEncoderRegistry::new();
    let root = RngState::new(seed);
    let mut out = BTreeMap::new();
    for (i, sig) in kb.predicates().iter().enumerate() {
        let input_dim = sig.arity * n;
        let model = match kind {
            ModelKind::Rwfn => {
                let ec = cfg.encoder_config(input_dim, task, derive_seed(seed, LABEL_ENCODER + i as u64));
                PredicateModel::Rwfn(RwfnPredicate::new(Arc::new(build_encoder(ec)?)))
            }
            ModelKind::RwfnShared => {
                let ec = cfg.encoder_config(input_dim, task, derive_seed(seed, LABEL_ENCODER));
                PredicateModel::Rwfn(RwfnPredicate::new(registry.get_or_build_shared(&ec)?))
            }
            ModelKind::Ltn => {
                let mut rng = root.child(LABEL_NTN + i as u64);
                PredicateModel::Ntn(init_ntn(cfg.ntn_slices, input_dim, &mut rng)?)
            }
        };
        out.insert(sig.name.clone(), model);
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub task: Task,
    pub kind: ModelKind,
    pub n: usize,
    pub seed: u64,
    pub predicates: BTreeMap<String, PredicateModel>,
    pub trace: TrainTrace,
    /// Grounding, compilation and training time.
    pub wall_ms: f64,
}

/// Builds the task KB over `train_ds`, grounds it with fresh models and
/// maximizes its satisfiability.
pub fn train_task(
    train_ds: &Dataset,
    task: Task,
    kind: ModelKind,
    cfg: &ExperimentConfig,
    seed: u64,
) -> Result<TrainedModel> {
    cfg.validate()?;
    let start = Instant::now();
    let kb = task_kb(train_ds, task, cfg)?;
    if kb.is_empty() {
        return Err(Error::EmptyKnowledgeBase);
    }
    let models = build_models(&kb, task, kind, train_ds.n, cfg, seed)?;
    let constants = train_ds
        .records
        .iter()
        .map(|r| (r.id.clone(), r.features.clone()))
        .collect();
    let mut logic = cfg.logic;
    logic.instantiation_budget = cfg.train.instantiation_budget;
    let gt = GroundedTheory::new(kb, constants, models, logic)?;
    let mut tc = cfg.train.clone();
    tc.seed = derive_seed(seed, LABEL_SAMPLE);
    let (gt, trace) = train(gt, &tc)?;
    Ok(TrainedModel {
        task,
        kind,
        n: train_ds.n,
        seed,
        predicates: gt.into_predicates(),
        trace,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// On-disk form of a trained model. Encoders are stored as seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub task: Task,
    pub model: ModelKind,
    pub n: usize,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub predicates: BTreeMap<String, PredicateSpec>,
}

impl ModelFile {
    pub fn new(m: &TrainedModel, config: &ExperimentConfig) -> Self {
        Self {
            task: m.task,
            model: m.kind,
            n: m.n,
            seed: m.seed,
            config: config.clone(),
            predicates: m.predicates.iter().map(|(k, v)| (k.clone(), v.to_spec())).collect(),
        }
    }

    /// Rebuilds the groundings; predicates saved with a shared encoder share it again.
    pub fn load_predicates(&self) -> Result<BTreeMap<String, PredicateModel>> {
        let mut registry = SharedEncoderRegistry::new();
        self.predicates
            .iter()
            .map(|(k, spec)| Ok((k.clone(), PredicateModel::from_spec(spec, &mut registry)?)))
            .collect()
    }
}

/// Scores and labels of one binary evaluation problem.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Scored {
    pub scores: Vec<f64>,
    pub labels: Vec<bool>,
}

impl Scored {
    fn has_both(&self) -> bool {
        self.labels.iter().any(|&l| l) && self.labels.iter().any(|&l| !l)
    }
}

fn check_labeled(ds: &Dataset) -> Result<()> {
    if ds.records.is_empty() {
        return Err(Error::Evaluation("test split is empty".into()));
    }
    if !ds.is_labeled() {
        return Err(Error::Evaluation("test split has unlabeled records".into()));
    }
    Ok(())
}

/// Per-class scores over every record of `ds`, for classes that have a model.
pub fn score_types(predicates: &BTreeMap<String, PredicateModel>, ds: &Dataset) -> Result<BTreeMap<String, Scored>> {
    check_labeled(ds)?;
    let mut out = BTreeMap::new();
    for c in ds.class_names() {
        let Some(model) = predicates.get(c) else { continue };
        let mut s = Scored::default();
        for r in &ds.records {
            s.scores.push(model.forward(&r.features)?);
            s.labels.push(r.labels.iter().any(|l| l == c));
        }
        out.insert(c.to_string(), s);
    }
    if out.is_empty() {
        return Err(Error::Evaluation("no class of the dataset has a trained predicate".into()));
    }
    Ok(out)
}

fn pair_records(ds: &Dataset) -> Result<Vec<(&crate::data::BoxRecord, &crate::data::BoxRecord, bool)>> {
    check_labeled(ds)?;
    if ds.pairs.is_empty() {
        return Err(Error::Evaluation("test split has no pairs".into()));
    }
    let index = ds.record_index();
    Ok(ds
        .pairs
        .iter()
        .map(|p| (&ds.records[index[p.part.as_str()]], &ds.records[index[p.whole.as_str()]], p.positive))
        .collect())
}

/// `partOf` scores over the pairs of `ds`.
pub fn score_partof(predicates: &BTreeMap<String, PredicateModel>, ds: &Dataset) -> Result<Scored> {
    let model = predicates
        .get(PART_OF)
        .ok_or_else(|| Error::Model(format!("model has no `{PART_OF}` predicate")))?;
    let mut s = Scored::default();
    for (part, whole, positive) in pair_records(ds)? {
        s.scores.push(model.forward(&pair_features(part, whole))?);
        s.labels.push(positive);
    }
    Ok(s)
}

/// Inclusion ratio of the part box in the whole box, per pair.
pub fn score_inclusion(ds: &Dataset) -> Result<Scored> {
    let mut s = Scored::default();
    for (part, whole, positive) in pair_records(ds)? {
        s.scores.push(inclusion_ratio(&part.bbox, &whole.bbox)?);
        s.labels.push(positive);
    }
    Ok(s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub task: Task,
    pub model: String,
    pub auc: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub auc_mode: Option<AucMode>,
    /// Per-class AUCs behind a macro average.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub per_class: BTreeMap<String, f64>,
    /// Parameters of one predicate grounding.
    pub params: ParamCount,
    /// Floats stored for all groundings, each distinct encoder counted once.
    pub stored_floats: usize,
    pub threshold: f64,
    pub precision_at_threshold: f64,
    pub recall_at_threshold: f64,
    pub test_size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<f64>,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub curves: BTreeMap<String, PrCurve>,
}

fn stored_floats(predicates: &BTreeMap<String, PredicateModel>) -> usize {
    let mut seen = HashSet::new();
    let mut total = 0;
    for m in predicates.values() {
        total += m.count_params().learnable;
        if let Some(enc) = m.encoder() {
            if seen.insert(Arc::as_ptr(enc)) {
                total += enc.stored_floats();
            }
        }
    }
    total
}

fn grounding_params(task: Task, predicates: &BTreeMap<String, PredicateModel>) -> ParamCount {
    let pick = match task {
        Task::Partof => predicates.get(PART_OF),
        Task::Types => predicates.iter().find(|(k, _)| k.as_str() != PART_OF).map(|(_, v)| v),
    };
    pick.map(|m| m.count_params()).unwrap_or(ParamCount { total: 0, learnable: 0 })
}

fn concat(parts: &BTreeMap<String, Scored>) -> Scored {
    let mut all = Scored::default();
    for s in parts.values() {
        all.scores.extend_from_slice(&s.scores);
        all.labels.extend_from_slice(&s.labels);
    }
    all
}

/// Evaluates trained groundings on the labeled dataset `test`.
pub fn evaluate(
    task: Task,
    label: &str,
    predicates: &BTreeMap<String, PredicateModel>,
    test: &Dataset,
    cfg: &ExperimentConfig,
    seed: u64,
) -> Result<EvalReport> {
    let mut curves = BTreeMap::new();
    let mut per_class = BTreeMap::new();
    let (auc_value, auc_mode, all) = match task {
        Task::Types => {
            let scored = score_types(predicates, test)?;
            let all = concat(&scored);
            let value = match cfg.auc_mode {
                AucMode::Macro => {
                    for (c, s) in &scored {
                        if !s.has_both() {
                            log::debug!("class `{c}` lacks positives or negatives in the test split; skipped");
                            continue;
                        }
                        let curve = pr_curve(&s.scores, &s.labels)?;
                        per_class.insert(c.clone(), auc(&curve)?);
                        curves.insert(c.clone(), curve);
                    }
                    if per_class.is_empty() {
                        return Err(Error::Evaluation("no class has both positives and negatives".into()));
                    }
                    per_class.values().sum::<f64>() / per_class.len() as f64
                }
                AucMode::Pooled => {
                    let curve = pr_curve(&all.scores, &all.labels)?;
                    let value = auc(&curve)?;
                    curves.insert("pooled".into(), curve);
                    value
                }
            };
            (value, Some(cfg.auc_mode), all)
        }
        Task::Partof => {
            let s = score_partof(predicates, test)?;
            let curve = pr_curve(&s.scores, &s.labels)?;
            let value = auc(&curve)?;
            curves.insert(PART_OF.into(), curve);
            (value, None, s)
        }
    };
    let (p, r) = threshold_metrics(&all.scores, &all.labels, cfg.threshold);
    Ok(EvalReport {
        task,
        model: label.to_string(),
        auc: auc_value,
        auc_mode,
        per_class,
        params: grounding_params(task, predicates),
        stored_floats: stored_floats(predicates),
        threshold: cfg.threshold,
        precision_at_threshold: p,
        recall_at_threshold: r,
        test_size: all.scores.len(),
        wall_ms: None,
        seed,
        config: cfg.clone(),
        curves,
    })
}

/// The parameter-free inclusion-ratio baseline on the part-of task.
pub fn evaluate_baseline(test: &Dataset, cfg: &ExperimentConfig, seed: u64) -> Result<EvalReport> {
    let s = score_inclusion(test)?;
    let curve = pr_curve(&s.scores, &s.labels)?;
    let (p, r) = threshold_metrics(&s.scores, &s.labels, cfg.threshold);
    Ok(EvalReport {
        task: Task::Partof,
        model: IR_BASELINE.into(),
        auc: auc(&curve)?,
        auc_mode: None,
        per_class: BTreeMap::new(),
        params: ParamCount { total: 0, learnable: 0 },
        stored_floats: 0,
        threshold: cfg.threshold,
        precision_at_threshold: p,
        recall_at_threshold: r,
        test_size: s.scores.len(),
        wall_ms: Some(0.0),
        seed,
        config: cfg.clone(),
        curves: BTreeMap::from([(PART_OF.to_string(), curve)]),
    })
}

/// Trains on the split's train half and evaluates on its test half.
pub fn run_once(split: &Split, task: Task, kind: ModelKind, cfg: &ExperimentConfig, seed: u64) -> Result<EvalReport> {
    let m = train_task(&split.train, task, kind, cfg, seed)?;
    let mut report = evaluate(task, kind.label(), &m.predicates, &split.test, cfg, seed)?;
    report.wall_ms = Some(m.wall_ms);
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub model: String,
    pub task: Task,
    pub aucs: Vec<f64>,
    pub mean_auc: f64,
    /// Sample standard deviation; the table shows `mean ± 2·sd`.
    pub sd_auc: f64,
    pub params: ParamCount,
    pub stored_floats: usize,
    pub wall_ms: Vec<f64>,
    pub mean_wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub repeats: usize,
    pub seed: u64,
    pub repeat_seeds: Vec<u64>,
    pub models: Vec<String>,
    pub config: ExperimentConfig,
    pub rows: Vec<CompareRow>,
}

impl ComparisonReport {
    pub fn row(&self, model: &str, task: Task) -> Option<&CompareRow> {
        self.rows.iter().find(|r| r.model == model && r.task == task)
    }
}

fn summarize(model: &str, task: Task, reports: &[EvalReport]) -> CompareRow {
    let aucs: Vec<f64> = reports.iter().map(|r| r.auc).collect();
    let wall_ms: Vec<f64> = reports.iter().map(|r| r.wall_ms.unwrap_or(0.0)).collect();
    let (mean_auc, sd_auc) = mean_sd(&aucs);
    let (mean_wall_ms, _) = mean_sd(&wall_ms);
    CompareRow {
        model: model.to_string(),
        task,
        aucs,
        mean_auc,
        sd_auc,
        params: reports[0].params,
        stored_floats: reports[0].stored_floats,
        wall_ms,
        mean_wall_ms,
    }
}

/// `repeats` independent runs per model and task, each on a fresh split and
/// fresh model seeds shared by all models of that repeat, plus the
/// inclusion-ratio baseline on the part-of task.
pub fn compare(
    ds: &Dataset,
    models: &[ModelKind],
    repeats: usize,
    cfg: &ExperimentConfig,
    seed: u64,
) -> Result<ComparisonReport> {
    if repeats == 0 {
        return Err(Error::InvalidArgument("repeats must be at least 1".into()));
    }
    if models.is_empty() {
        return Err(Error::InvalidArgument("no models to compare".into()));
    }
    cfg.validate()?;
    let repeat_seeds: Vec<u64> = (0..repeats as u64).map(|r| derive_seed(seed, LABEL_REPEAT + r)).collect();
    let mut runs: BTreeMap<(usize, Task), Vec<EvalReport>> = BTreeMap::new();
    let baseline_slot = models.len();
    for (r, &rs) in repeat_seeds.iter().enumerate() {
        let sp = split_dataset(ds, cfg, rs)?;
        for (mi, &kind) in models.iter().enumerate() {
            for task in Task::ALL {
                if !kind.applies_to(task) {
                    continue;
                }
                let report = run_once(&sp, task, kind, cfg, rs)?;
                log::info!(
                    "repeat {r} {} {task}: auc {:.4} in {:.0} ms",
                    kind.label(),
                    report.auc,
                    report.wall_ms.unwrap_or(0.0)
                );
                runs.entry((mi, task)).or_default().push(report);
            }
        }
        runs.entry((baseline_slot, Task::Partof))
            .or_default()
            .push(evaluate_baseline(&sp.test, cfg, rs)?);
    }
    let label = |mi: usize| {
        if mi == baseline_slot {
            IR_BASELINE
        } else {
            models[mi].label()
        }
    };
    let rows = runs
        .iter()
        .map(|(&(mi, task), reports)| summarize(label(mi), task, reports))
        .collect();
    let mut names: Vec<String> = models.iter().map(|m| m.label().to_string()).collect();
    names.push(IR_BASELINE.into());
    Ok(ComparisonReport {
        repeats,
        seed,
        repeat_seeds,
        models: names,
        config: cfg.clone(),
        rows,
    })
}

fn pad_table(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for r in rows {
        let line: Vec<String> = r
            .iter()
            .enumerate()
            .map(|(c, s)| format!("{s:<w$}", w = widths[c]))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

/// Models as columns, tasks as rows; AUC cells read `mean ± 2·sd`.
pub fn comparison_table(report: &ComparisonReport) -> String {
    let mut rows = vec![std::iter::once(String::new()).chain(report.models.iter().cloned()).collect::<Vec<_>>()];
    for task in Task::ALL {
        let mut auc_row = vec![format!("{} {} AUC", task.tag(), task.name())];
        let mut par_row = vec![format!("{} params (learnable/total)", task.tag())];
        let mut ms_row = vec![format!("{} wall ms", task.tag())];
        for m in &report.models {
            match report.row(m, task) {
                Some(r) => {
                    auc_row.push(format!("{:.3} ± {:.3}", r.mean_auc, 2.0 * r.sd_auc));
                    par_row.push(format!("{}/{}", r.params.learnable, r.params.total));
                    ms_row.push(format!("{:.1}", r.mean_wall_ms));
                }
                None => {
                    for row in [&mut auc_row, &mut par_row, &mut ms_row] {
                        row.push("---".into());
                    }
                }
            }
        }
        rows.extend([auc_row, par_row, ms_row]);
    }
    let mut out = format!("repeats: {}  seed: {}\n", report.repeats, report.seed);
    out.push_str(&pad_table(&rows));
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub variant: String,
    pub decoder_len: BTreeMap<Task, usize>,
    pub auc: BTreeMap<Task, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub seed: u64,
    pub config: ExperimentConfig,
    pub rows: Vec<AblationRow>,
    pub reports: Vec<EvalReport>,
}

impl AblationReport {
    pub fn row(&self, variant: &str) -> Option<&AblationRow> {
        self.rows.iter().find(|r| r.variant == variant)
    }
}

/// RWFN with only the gating branch, only the Fourier branch, and both. Each
/// branch keeps width `B`, so ablated decoders have length `B` and the full one
/// `2B`. All variants share the split and every seed.
pub fn run_ablation(ds: &Dataset, cfg: &ExperimentConfig, seed: u64) -> Result<AblationReport> {
    cfg.validate()?;
    let sp = split_dataset(ds, cfg, seed)?;
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    for branches in [Branches::AlMbOnly, Branches::FourierOnly, Branches::Both] {
        let vc = ExperimentConfig {
            branches,
            ..cfg.clone()
        };
        let mut row = AblationRow {
            variant: branches.label().to_string(),
            decoder_len: BTreeMap::new(),
            auc: BTreeMap::new(),
        };
        for task in Task::ALL {
            let m = train_task(&sp.train, task, ModelKind::Rwfn, &vc, seed)?;
            let mut report = evaluate(task, branches.label(), &m.predicates, &sp.test, &vc, seed)?;
            report.wall_ms = Some(m.wall_ms);
            row.decoder_len.insert(task, report.params.learnable);
            row.auc.insert(task, report.auc);
            reports.push(report);
        }
        rows.push(row);
    }
    Ok(AblationReport {
        seed,
        config: cfg.clone(),
        rows,
        reports,
    })
}

pub fn ablation_table(report: &AblationReport) -> String {
    let mut rows = vec![vec![
        "variant".to_string(),
        "T1 decoder".into(),
        "T1 AUC".into(),
        "T2 decoder".into(),
        "T2 AUC".into(),
    ]];
    for r in &report.rows {
        let mut line = vec![r.variant.clone()];
        for task in Task::ALL {
            line.push(r.decoder_len.get(&task).map_or("---".into(), |d| d.to_string()));
            line.push(r.auc.get(&task).map_or("---".into(), |a| format!("{a:.3}")));
        }
        rows.push(line);
    }
    pad_table(&rows)
}
