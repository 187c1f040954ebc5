//! Satisfiability maximization with RMSProp, and the shared-encoder registry.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::encoder::{build_encoder, Branches, EncoderConfig, EncoderDescriptor, RwfnEncoder};
use crate::error::{check_len, Error, Result};
use crate::logic::{CompiledTheory, GroundedTheory, KnowledgeBase, LogicConfig};
use crate::numerics::{squared_norm, RngState};
use crate::predicates::{PredicateModel, RwfnPredicate};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lambda: f64,
    pub learning_rate: f64,
    pub rmsprop_decay: f64,
    pub rmsprop_eps: f64,
    pub instantiation_budget: usize,
    pub seed: u64,
    /// Log progress every this many epochs; 0 disables logging.
    pub log_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 1000,
            lambda: 1e-10,
            learning_rate: 0.01,
            rmsprop_decay: 0.9,
            rmsprop_eps: 1e-8,
            instantiation_budget: 10_000,
            seed: 0,
            log_every: 100,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if self.epochs == 0 {
            return bad("epochs must be at least 1");
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad("lambda must be finite and non-negative");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning rate must be positive");
        }
        if !(self.rmsprop_decay > 0.0 && self.rmsprop_decay < 1.0) {
            return bad("RMSProp decay must lie in (0, 1)");
        }
        if !(self.rmsprop_eps > 0.0) {
            return bad("RMSProp epsilon must be positive");
        }
        if self.instantiation_budget == 0 {
            return bad("instantiation budget must be positive");
        }
        Ok(())
    }
}

/// Squared-gradient accumulators, one per parameter block.
#[derive(Debug, Clone, PartialEq)]
pub struct RmsPropState {
    pub acc: Vec<Vec<f64>>,
}

impl RmsPropState {
    pub fn new<'a>(shapes: impl IntoIterator<Item = &'a [f64]>) -> Self {
        Self {
            acc: shapes.into_iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }
}

/// One RMSProp update of a single block:
/// `acc ← ρ·acc + (1−ρ)·g²`, `θ ← θ − lr·g/√(acc + ε)`.
pub fn rmsprop_step(params: &mut [f64], grads: &[f64], acc: &mut [f64], cfg: &TrainConfig) -> Result<()> {
    check_len(params.len(), grads.len())?;
    check_len(params.len(), acc.len())?;
    let rho = cfg.rmsprop_decay;
    for ((p, &g), a) in params.iter_mut().zip(grads).zip(acc.iter_mut()) {
        *a = rho * *a + (1.0 - rho) * g * g;
        *p -= cfg.learning_rate * g / (*a + cfg.rmsprop_eps).sqrt();
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub loss: f64,
    pub sat: f64,
    /// Wall time of this epoch in milliseconds.
    pub ms: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainTrace {
    pub epochs: Vec<EpochRecord>,
    /// Grounding (compilation and input preparation) time in milliseconds.
    pub setup_ms: f64,
}

impl TrainTrace {
    pub fn len(&self) -> usize {
        self.epochs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.epochs.is_empty()
    }

    /// Setup plus every epoch.
    pub fn total_ms(&self) -> f64 {
        self.setup_ms + self.epochs.iter().map(|e| e.ms).sum::<f64>()
    }

    pub fn final_sat(&self) -> Option<f64> {
        self.epochs.last().map(|e| e.sat)
    }
}

fn l2(gt: &GroundedTheory) -> f64 {
    gt.predicates()
        .values()
        .flat_map(|m| m.param_blocks())
        .map(squared_norm)
        .sum()
}

/// Full-batch training of every learnable parameter of `gt` on
/// `loss = 1 − sat + λ‖θ‖²`. The quantifier instantiation sample is drawn once
/// from `cfg.seed` and kept for the whole run. Each trace record holds the loss
/// and satisfiability before that epoch's update.
pub fn train(mut gt: GroundedTheory, cfg: &TrainConfig) -> Result<(GroundedTheory, TrainTrace)> {
    cfg.validate()?;
    let learnable: usize = gt.predicates().values().map(|m| m.count_params().learnable).sum();
    if learnable == 0 {
        return Err(Error::InvalidArgument("theory has no learnable parameters".into()));
    }
    let start = Instant::now();
    let mut rng = RngState::new(cfg.seed);
    let compiled = CompiledTheory::compile(&gt, cfg.instantiation_budget, &mut rng)?;
    let mut trace = TrainTrace {
        epochs: Vec::with_capacity(cfg.epochs),
        setup_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    log::debug!(
        "compiled {} ground atoms into {} nodes{}",
        compiled.num_atoms(),
        compiled.num_nodes(),
        if compiled.is_sampled() { " (sampled)" } else { "" }
    );
    let mut state: BTreeMap<String, RmsPropState> = gt
        .predicates()
        .iter()
        .map(|(name, m)| (name.clone(), RmsPropState::new(m.param_blocks())))
        .collect();

    for epoch in 0..cfg.epochs {
        let t = Instant::now();
        let (eval, grads) = compiled.value_and_gradient(&gt)?;
        let sat = eval.satisfiability;
        let loss = 1.0 - sat + cfg.lambda * l2(&gt);
        if !loss.is_finite() {
            return Err(Error::TrainingAborted {
                epoch,
                message: format!("loss is {loss} (satisfiability {sat})"),
            });
        }
        for (name, blocks) in grads {
            let acc = state.get_mut(&name).expect("state per predicate");
            let params = gt.param_blocks_mut(&name).expect("predicate exists");
            for ((p, g), a) in params.into_iter().zip(blocks).zip(acc.acc.iter_mut()) {
                let g: Vec<f64> = g
                    .iter()
                    .zip(p.iter())
                    .map(|(&g, &x)| -g + 2.0 * cfg.lambda * x)
                    .collect();
                rmsprop_step(p, &g, a, cfg)?;
            }
        }
        trace.epochs.push(EpochRecord {
            epoch,
            loss,
            sat,
            ms: t.elapsed().as_secs_f64() * 1e3,
        });
        if cfg.log_every > 0 && (epoch % cfg.log_every == 0 || epoch + 1 == cfg.epochs) {
            log::info!("epoch {epoch:>5}  loss {loss:.6}  sat {sat:.6}");
        }
    }
    Ok((gt, trace))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct RegistryKey {
    input_dim: usize,
    hidden_width: usize,
    fan_in: usize,
    seed: u64,
    inhibition_bits: u64,
    scale_bits: u64,
    branches: Branches,
}

impl From<&EncoderConfig> for RegistryKey {
    fn from(c: &EncoderConfig) -> Self {
        Self {
            input_dim: c.input_dim,
            hidden_width: c.hidden_width,
            fan_in: c.fan_in,
            seed: c.seed,
            inhibition_bits: c.inhibition_strength.to_bits(),
            scale_bits: c.kernel_scale.to_bits(),
            branches: c.branches,
        }
    }
}

/// Holds at most one encoder per configuration; handles share the same object.
#[derive(Debug, Default)]
pub struct SharedEncoderRegistry {
    encoders: HashMap<RegistryKey, Arc<RwfnEncoder>>,
}

impl SharedEncoderRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds the encoder on first request; later calls return the same handle.
    pub fn get_or_build_shared(&mut self, config: &EncoderConfig) -> Result<Arc<RwfnEncoder>> {
        let key = RegistryKey::from(config);
        if let Some(e) = self.encoders.get(&key) {
            return Ok(e.clone());
        }
        let enc = Arc::new(build_encoder(config.clone())?);
        self.encoders.insert(key, enc.clone());
        Ok(enc)
    }

    /// Rebuilds (or reuses) the encoder a saved descriptor names.
    pub fn get_or_load(&mut self, desc: &EncoderDescriptor) -> Result<Arc<RwfnEncoder>> {
        let enc = RwfnEncoder::from_descriptor(desc)?;
        let key = RegistryKey::from(enc.config());
        if let Some(e) = self.encoders.get(&key) {
            return Ok(e.clone());
        }
        let enc = Arc::new(enc);
        self.encoders.insert(key, enc.clone());
        Ok(enc)
    }

    pub fn len(&self) -> usize {
        self.encoders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.encoders.is_empty()
    }

    /// Floats held by all registered encoders.
    pub fn stored_floats(&self) -> usize {
        self.encoders.values().map(|e| e.stored_floats()).sum()
    }
}

/// One one-vs-rest classifier: a KB over a single predicate `name` plus the
/// constants it mentions.
#[derive(Debug, Clone)]
pub struct ClassifierTask {
    pub name: String,
    pub kb: KnowledgeBase,
    pub constants: Vec<(String, Vec<f64>)>,
}

#[derive(Debug, Clone)]
pub struct TrainedClassifier {
    pub name: String,
    pub predicate: RwfnPredicate,
    pub trace: TrainTrace,
}

/// Trains one decoder per task on top of a single encoder from `registry`.
pub fn train_multi_shared(
    tasks: &[ClassifierTask],
    encoder: &EncoderConfig,
    registry: &mut SharedEncoderRegistry,
    logic: LogicConfig,
    cfg: &TrainConfig,
) -> Result<Vec<TrainedClassifier>> {
    for t in tasks {
        let arity = t
            .kb
            .arity(&t.name)
            .ok_or_else(|| Error::UnknownPredicate(t.name.clone()))?;
        let n = t.constants.first().map_or(0, |(_, v)| v.len());
        if arity * n != encoder.input_dim {
            return Err(Error::DimensionMismatch {
                expected: encoder.input_dim,
                got: arity * n,
            });
        }
    }
    let shared = registry.get_or_build_shared(encoder)?;
    let mut out = Vec::with_capacity(tasks.len());
    for t in tasks {
        let model = PredicateModel::Rwfn(RwfnPredicate::new(shared.clone()));
        let preds = BTreeMap::from([(t.name.clone(), model)]);
        let gt = GroundedTheory::new(t.kb.clone(), t.constants.clone(), preds, logic)?;
        let (gt, trace) = train(gt, cfg)?;
        let predicate = match gt.into_predicates().remove(&t.name) {
            Some(PredicateModel::Rwfn(p)) => p,
            _ => unreachable!("task predicate is RWFN"),
        };
        out.push(TrainedClassifier {
            name: t.name.clone(),
            predicate,
            trace,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StorageReport {
    pub classifiers: usize,
    pub shared: usize,
    pub unshared: usize,
}

/// Stored floats for `classifiers` two-branch RWFN groundings, with and
/// without a shared encoder.
pub fn storage_report(in_dim: usize, hidden_width: usize, classifiers: usize) -> StorageReport {
    StorageReport {
        classifiers,
        shared: crate::predicates::rwfn_storage_floats(in_dim, hidden_width, classifiers, true),
        unshared: crate::predicates::rwfn_storage_floats(in_dim, hidden_width, classifiers, false),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{parse_kb, Formula};
    use crate::predicates::init_ntn;

    #[test]
    fn rmsprop_examples() {
        let cfg = TrainConfig::default();
        let mut p = [0.0];
        let mut acc = [0.0];
        rmsprop_step(&mut p, &[1.0], &mut acc, &cfg).unwrap();
        assert!((acc[0] - 0.1).abs() < 1e-15);
        assert!((p[0] + 0.0316228).abs() < 1e-7, "{}", p[0]);

        let mut p = [0.3];
        let mut acc = [0.5];
        rmsprop_step(&mut p, &[0.0], &mut acc, &cfg).unwrap();
        assert_eq!(p[0], 0.3);
        assert!(rmsprop_step(&mut p, &[0.0, 1.0], &mut acc, &cfg).is_err());
    }

    #[test]
    fn rmsprop_constant_gradient_closed_form() {
        let cfg = TrainConfig::default();
        let g = 0.7;
        let (mut p, mut acc) = ([0.0], [0.0]);
        let mut prev = f64::INFINITY;
        for t in 1..=200 {
            let before = p[0];
            rmsprop_step(&mut p, &[g], &mut acc, &cfg).unwrap();
            let step = (p[0] - before).abs();
            let decay_t = cfg.rmsprop_decay.powi(t);
            let closed = cfg.learning_rate * g / ((1.0 - decay_t) * g * g + cfg.rmsprop_eps).sqrt();
            assert!((step - closed).abs() <= 1e-12 * closed, "t={t}");
            assert!(step <= prev + 1e-15);
            let floor = cfg.learning_rate * g / (g * g + cfg.rmsprop_eps).sqrt();
            assert!(step >= floor - 1e-15);
            prev = step;
        }
        assert!((prev - cfg.learning_rate).abs() < 1e-6);
    }

    fn literal_theory(seed: u64) -> GroundedTheory {
        let kb = parse_kb("pred P/1\nP(b)").unwrap();
        let enc = Arc::new(build_encoder(EncoderConfig::new(4, 50, seed)).unwrap());
        GroundedTheory::new(
            kb,
            vec![("b".into(), vec![0.3, 0.8, 0.1, 0.5])],
            BTreeMap::from([("P".to_string(), PredicateModel::Rwfn(RwfnPredicate::new(enc)))]),
            LogicConfig::default(),
        )
        .unwrap()
    }

    #[test]
    fn single_literal_satisfiability_increases() {
        let cfg = TrainConfig {
            epochs: 50,
            ..TrainConfig::default()
        };
        let (_, trace) = train(literal_theory(4), &cfg).unwrap();
        assert_eq!(trace.len(), 50);
        for w in trace.epochs.windows(2) {
            assert!(w[1].sat > w[0].sat, "{} -> {}", w[0].sat, w[1].sat);
            assert!(w[1].loss >= 0.0 && w[1].loss <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn lambda_is_nearly_vestigial() {
        let run = |lambda| {
            let cfg = TrainConfig {
                epochs: 200,
                lambda,
                ..TrainConfig::default()
            };
            let (gt, _) = train(literal_theory(9), &cfg).unwrap();
            gt.predicates()["P"].param_blocks()[0].to_vec()
        };
        let a = run(0.0);
        let b = run(1e-10);
        let diff: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        assert!(diff < 1e-3 * squared_norm(&a).sqrt());
    }

    #[test]
    fn frozen_encoder_and_determinism() {
        let gt = literal_theory(2);
        let before = gt.predicates()["P"].encoder().unwrap().as_ref().clone();
        let cfg = TrainConfig {
            epochs: 20,
            ..TrainConfig::default()
        };
        let (trained, t1) = train(gt.clone(), &cfg).unwrap();
        let (_, t2) = train(gt, &cfg).unwrap();
        let after = trained.predicates()["P"].encoder().unwrap();
        assert_eq!(after.gate().as_slice(), before.gate().as_slice());
        assert_eq!(after.fourier().as_slice(), before.fourier().as_slice());
        assert_eq!(after.phase(), before.phase());
        let strip = |t: &TrainTrace| t.epochs.iter().map(|e| (e.loss, e.sat)).collect::<Vec<_>>();
        assert_eq!(strip(&t1), strip(&t2));
    }

    #[test]
    fn bad_configs_are_rejected() {
        let cfg = TrainConfig {
            epochs: 0,
            ..TrainConfig::default()
        };
        assert!(train(literal_theory(1), &cfg).is_err());
        for bad in [
            TrainConfig { lambda: -1.0, ..TrainConfig::default() },
            TrainConfig { learning_rate: 0.0, ..TrainConfig::default() },
            TrainConfig { rmsprop_decay: 1.0, ..TrainConfig::default() },
        ] {
            assert!(bad.validate().is_err());
        }
    }

    #[test]
    fn diverging_training_aborts() {
        let kb = parse_kb("pred P/1\nP(b)").unwrap();
        let mut rng = RngState::new(0);
        let gt = GroundedTheory::new(
            kb,
            vec![("b".into(), vec![0.5, 0.5])],
            BTreeMap::from([("P".to_string(), PredicateModel::Ntn(init_ntn(2, 2, &mut rng).unwrap()))]),
            LogicConfig::default(),
        )
        .unwrap();
        let cfg = TrainConfig {
            epochs: 3,
            lambda: f64::MAX,
            ..TrainConfig::default()
        };
        assert!(matches!(train(gt, &cfg), Err(Error::TrainingAborted { .. })));
    }

    #[test]
    fn registry_is_idempotent() {
        let mut reg = SharedEncoderRegistry::new();
        let cfg = EncoderConfig::new(8, 20, 3);
        let a = reg.get_or_build_shared(&cfg).unwrap();
        let b = reg.get_or_build_shared(&cfg).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        assert_eq!(reg.len(), 1);
        let c = reg.get_or_load(&a.descriptor()).unwrap();
        assert!(Arc::ptr_eq(&a, &c));
        let d = reg.get_or_build_shared(&EncoderConfig::new(8, 20, 4)).unwrap();
        assert!(!Arc::ptr_eq(&a, &d));
        assert_eq!(reg.stored_floats(), 2 * (2 * 8 * 20 + 20));
        let v = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8];
        assert_eq!(a.encode(&v).unwrap(), b.encode(&v).unwrap());
    }

    fn tasks(classes: usize) -> Vec<ClassifierTask> {
        let mut rng = RngState::new(21);
        let constants: Vec<(String, Vec<f64>)> = (0..12)
            .map(|i| (format!("b{i}"), (0..6).map(|_| rng.uniform()).collect()))
            .collect();
        (0..classes)
            .map(|c| {
                let name = format!("C{c}");
                let mut kb = KnowledgeBase::new();
                kb.declare(name.clone(), 1).unwrap();
                for (i, (id, _)) in constants.iter().enumerate() {
                    let lit = Formula::fact(&name, [id.as_str()]);
                    kb.add(if i % classes == c { lit } else { Formula::not(lit) }).unwrap();
                }
                ClassifierTask {
                    name,
                    kb,
                    constants: constants.clone(),
                }
            })
            .collect()
    }

    #[test]
    fn shared_training_matches_private_bitwise() {
        let cfg = TrainConfig {
            epochs: 15,
            ..TrainConfig::default()
        };
        let enc = EncoderConfig::new(6, 30, 77);
        let tasks = tasks(3);
        let mut reg = SharedEncoderRegistry::new();
        let shared = train_multi_shared(&tasks, &enc, &mut reg, LogicConfig::default(), &cfg).unwrap();
        assert_eq!(reg.len(), 1);
        assert!(Arc::ptr_eq(shared[0].predicate.encoder(), shared[2].predicate.encoder()));
        assert_ne!(shared[0].predicate.beta(), shared[1].predicate.beta());
        for (task, trained) in tasks.iter().zip(&shared) {
            let private = Arc::new(build_encoder(enc.clone()).unwrap());
            let preds = BTreeMap::from([(
                task.name.clone(),
                PredicateModel::Rwfn(RwfnPredicate::new(private)),
            )]);
            let gt = GroundedTheory::new(task.kb.clone(), task.constants.clone(), preds, LogicConfig::default())
                .unwrap();
            let (gt, _) = train(gt, &cfg).unwrap();
            let beta = gt.predicates()[&task.name].param_blocks()[0].to_vec();
            assert_eq!(beta.as_slice(), trained.predicate.beta());
        }
    }

    #[test]
    fn shared_training_rejects_dimension_mismatch() {
        let mut reg = SharedEncoderRegistry::new();
        let r = train_multi_shared(
            &tasks(2),
            &EncoderConfig::new(7, 30, 1),
            &mut reg,
            LogicConfig::default(),
            &TrainConfig::default(),
        );
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn storage_accounting() {
        for (i, shared, unshared) in [(1, 26_200, 26_200), (5, 27_800, 131_000), (11, 30_200, 288_200)] {
            let r = storage_report(64, 200, i);
            assert_eq!((r.shared, r.unshared), (shared, unshared), "i={i}");
        }
    }
}
