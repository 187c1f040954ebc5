//! Ground-and-flatten evaluation of a grounded theory.
//!
//! Compilation expands every quantifier over its instantiation tuples, dedups
//! the resulting ground atoms and prepares each atom's input once (encoded for
//! RWFN predicates). The resulting tape is then evaluated forward and
//! differentiated backward as many times as needed; the instantiation sample
//! is fixed for the lifetime of the tape.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;

use super::fuzzy::{self, LogicConfig};
use super::grounding::GroundedTheory;
use super::syntax::{Formula, Term};
use crate::encoder::{Projection, RwfnEncoder};
use crate::error::{Error, Result};
use crate::numerics::RngState;
use crate::predicates::PredicateModel;

/// Gradient blocks per predicate, shaped like [`PredicateModel::zero_gradient`].
pub type PredicateGradients = BTreeMap<String, Vec<Vec<f64>>>;

#[derive(Debug, Clone, Copy)]
enum Node {
    Atom(u32),
    Not(u32),
    And(u32, u32),
    Or(u32, u32),
    Implies(u32, u32),
    ForAll(u32, u32),
    Exists(u32, u32),
}

#[derive(Debug, Clone, Copy)]
struct GroundAtom {
    predicate: u32,
    input: u32,
}

/// Satisfiability of the whole theory plus the truth value of each formula.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub satisfiability: f64,
    pub formulas: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct CompiledTheory {
    predicates: Vec<String>,
    encoders: Vec<Option<Arc<RwfnEncoder>>>,
    input_dims: Vec<usize>,
    atoms: Vec<GroundAtom>,
    inputs: Vec<Vec<f64>>,
    nodes: Vec<Node>,
    children: Vec<u32>,
    roots: Vec<u32>,
    config: LogicConfig,
    sampled: bool,
}

type InputKey = (usize, Vec<u32>);

struct Builder<'a> {
    gt: &'a GroundedTheory,
    budget: usize,
    rng: &'a mut RngState,
    pred_index: HashMap<&'a str, u32>,
    models: Vec<&'a PredicateModel>,
    atom_index: HashMap<(u32, Vec<u32>), u32>,
    atom_node: HashMap<u32, u32>,
    atoms: Vec<GroundAtom>,
    input_index: HashMap<InputKey, u32>,
    inputs: Vec<Vec<f64>>,
    slot_cache: HashMap<(usize, usize, u32), Projection>,
    nodes: Vec<Node>,
    children: Vec<u32>,
    sampled: bool,
}

fn encoder_key(model: &PredicateModel) -> usize {
    model.encoder().map_or(0, |e| Arc::as_ptr(e) as usize)
}

impl Builder<'_> {
    fn push(&mut self, node: Node) -> u32 {
        self.nodes.push(node);
        (self.nodes.len() - 1) as u32
    }

    fn prepare(&mut self, model: &PredicateModel, args: &[u32]) -> Result<Vec<f64>> {
        let Some(enc) = model.encoder() else {
            let idx: Vec<usize> = args.iter().map(|&a| a as usize).collect();
            return model.prepare(&self.gt.concat(&idx));
        };
        let n = self.gt.feature_dim();
        if args.len() == 1 {
            return enc.encode(self.gt.features_at(args[0] as usize));
        }
        let key = Arc::as_ptr(enc) as usize;
        let mut total = Projection::zeros(enc.hidden_width());
        for (slot, &a) in args.iter().enumerate() {
            let cache_key = (key, slot, a);
            if !self.slot_cache.contains_key(&cache_key) {
                let p = enc.project(self.gt.features_at(a as usize), slot * n)?;
                self.slot_cache.insert(cache_key, p);
            }
            total.accumulate(&self.slot_cache[&cache_key]);
        }
        Ok(enc.finish(&total))
    }

    fn atom(&mut self, predicate: &str, args: Vec<u32>) -> Result<u32> {
        let p = *self
            .pred_index
            .get(predicate)
            .ok_or_else(|| Error::UnknownPredicate(predicate.to_string()))?;
        let atom_key = (p, args);
        if let Some(&a) = self.atom_index.get(&atom_key) {
            return Ok(self.atom_node[&a]);
        }
        let args = atom_key.1.clone();
        let model = self.models[p as usize];
        let input_key = (encoder_key(model), args);
        let input = match self.input_index.get(&input_key) {
            Some(&i) => i,
            None => {
                let x = self.prepare(model, &input_key.1)?;
                self.inputs.push(x);
                let i = (self.inputs.len() - 1) as u32;
                self.input_index.insert(input_key, i);
                i
            }
        };
        self.atoms.push(GroundAtom { predicate: p, input });
        let a = (self.atoms.len() - 1) as u32;
        self.atom_index.insert(atom_key, a);
        let node = self.push(Node::Atom(a));
        self.atom_node.insert(a, node);
        Ok(node)
    }

    fn tuples(&mut self, k: usize) -> Result<Vec<Vec<u32>>> {
        let d = self.gt.constants().len();
        let total = u32::try_from(k)
            .ok()
            .and_then(|k| (d as u64).checked_pow(k))
            .filter(|&t| t <= usize::MAX as u64)
            .ok_or_else(|| Error::InvalidArgument("quantifier instantiation space overflows".into()))?
            as usize;
        let indices: Vec<usize> = if total <= self.budget {
            (0..total).collect()
        } else {
            self.sampled = true;
            let mut picked = sample_floyd(total, self.budget, self.rng);
            picked.sort_unstable();
            picked
        };
        Ok(indices
            .into_iter()
            .map(|mut idx| {
                let mut t = vec![0u32; k];
                for slot in t.iter_mut().rev() {
                    *slot = (idx % d) as u32;
                    idx /= d;
                }
                t
            })
            .collect())
    }

    fn expand(&mut self, f: &Formula, env: &mut Vec<(String, u32)>) -> Result<u32> {
        Ok(match f {
            Formula::Atom { predicate, args } => {
                let idx = args
                    .iter()
                    .map(|t| match t {
                        Term::Const(c) => self
                            .gt
                            .constant_index(c)
                            .map(|i| i as u32)
                            .ok_or_else(|| Error::MissingConstant(c.clone())),
                        Term::Var(v) => env
                            .iter()
                            .rev()
                            .find(|(name, _)| name == v)
                            .map(|&(_, i)| i)
                            .ok_or_else(|| Error::UnboundVariable(v.clone())),
                    })
                    .collect::<Result<Vec<_>>>()?;
                self.atom(predicate, idx)?
            }
            Formula::Not(a) => {
                let a = self.expand(a, env)?;
                self.push(Node::Not(a))
            }
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                let a = self.expand(a, env)?;
                let b = self.expand(b, env)?;
                self.push(match f {
                    Formula::And(..) => Node::And(a, b),
                    Formula::Or(..) => Node::Or(a, b),
                    _ => Node::Implies(a, b),
                })
            }
            Formula::ForAll(vars, body) | Formula::Exists(vars, body) => {
                let depth = env.len();
                let mut kids = Vec::new();
                for t in self.tuples(vars.len())? {
                    env.truncate(depth);
                    env.extend(vars.iter().cloned().zip(t));
                    kids.push(self.expand(body, env)?);
                }
                env.truncate(depth);
                let start = self.children.len() as u32;
                self.children.extend(&kids);
                let len = kids.len() as u32;
                self.push(match f {
                    Formula::ForAll(..) => Node::ForAll(start, len),
                    _ => Node::Exists(start, len),
                })
            }
        })
    }
}

/// `k` distinct values from `0..n` (Floyd's algorithm), in no particular order.
fn sample_floyd(n: usize, k: usize, rng: &mut RngState) -> Vec<usize> {
    let mut set = HashSet::with_capacity(k);
    let mut out = Vec::with_capacity(k);
    for j in n - k..n {
        let t = rng.below(j + 1);
        let pick = if set.contains(&t) { j } else { t };
        set.insert(pick);
        out.push(pick);
    }
    out
}

impl CompiledTheory {
    /// Grounds every formula of `gt`. Quantifier nodes whose instantiation
    /// space exceeds `budget` tuples are subsampled without replacement using `rng`.
    pub fn compile(gt: &GroundedTheory, budget: usize, rng: &mut RngState) -> Result<Self> {
        if gt.kb().is_empty() {
            return Err(Error::EmptyKnowledgeBase);
        }
        if budget == 0 {
            return Err(Error::InvalidArgument("instantiation budget must be positive".into()));
        }
        let names: Vec<&str> = gt.predicates().keys().map(String::as_str).collect();
        let mut b = Builder {
            gt,
            budget,
            rng,
            pred_index: names.iter().enumerate().map(|(i, &n)| (n, i as u32)).collect(),
            models: gt.predicates().values().collect(),
            atom_index: HashMap::new(),
            atom_node: HashMap::new(),
            atoms: Vec::new(),
            input_index: HashMap::new(),
            inputs: Vec::new(),
            slot_cache: HashMap::new(),
            nodes: Vec::new(),
            children: Vec::new(),
            sampled: false,
        };
        let mut roots = Vec::with_capacity(gt.kb().formulas().len());
        for f in gt.kb().formulas() {
            roots.push(b.expand(f, &mut Vec::new())?);
        }
        Ok(Self {
            predicates: names.iter().map(|s| s.to_string()).collect(),
            encoders: b.models.iter().map(|m| m.encoder().cloned()).collect(),
            input_dims: b.models.iter().map(|m| m.input_dim()).collect(),
            atoms: b.atoms,
            inputs: b.inputs,
            nodes: b.nodes,
            children: b.children,
            roots,
            config: *gt.config(),
            sampled: b.sampled,
        })
    }

    pub fn num_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// True when at least one quantifier was subsampled.
    pub fn is_sampled(&self) -> bool {
        self.sampled
    }

    fn models<'a>(&self, gt: &'a GroundedTheory) -> Result<Vec<&'a PredicateModel>> {
        if gt.predicates().len() != self.predicates.len() {
            return Err(Error::Model("theory predicates changed since compilation".into()));
        }
        let mut out = Vec::with_capacity(self.predicates.len());
        for (i, name) in self.predicates.iter().enumerate() {
            let m = gt
                .predicate(name)
                .ok_or_else(|| Error::UnknownPredicate(name.clone()))?;
            let same_encoder = match (m.encoder(), &self.encoders[i]) {
                (Some(a), Some(b)) => Arc::ptr_eq(a, b),
                (None, None) => true,
                _ => false,
            };
            if !same_encoder || m.input_dim() != self.input_dims[i] {
                return Err(Error::Model(format!("predicate `{name}` changed since compilation")));
            }
            out.push(m);
        }
        Ok(out)
    }

    fn forward(&self, models: &[&PredicateModel]) -> Vec<f64> {
        let atom_values: Vec<f64> = self
            .atoms
            .iter()
            .map(|a| models[a.predicate as usize].forward_prepared(&self.inputs[a.input as usize]))
            .collect();
        let mut values = Vec::with_capacity(self.nodes.len());
        let mut scratch = Vec::new();
        for node in &self.nodes {
            let v = match *node {
                Node::Atom(a) => atom_values[a as usize],
                Node::Not(a) => fuzzy::not(values[a as usize]),
                Node::And(a, b) => fuzzy::and(values[a as usize], values[b as usize]),
                Node::Or(a, b) => fuzzy::or(values[a as usize], values[b as usize]),
                Node::Implies(a, b) => fuzzy::implies(values[a as usize], values[b as usize]),
                Node::ForAll(s, l) | Node::Exists(s, l) => {
                    scratch.clear();
                    scratch.extend(self.child_ids(s, l).iter().map(|&c| values[c as usize]));
                    match node {
                        Node::ForAll(..) => self.config.forall.aggregate(&scratch),
                        _ => self.config.exists.aggregate(&scratch),
                    }
                }
            };
            values.push(v);
        }
        values
    }

    fn child_ids(&self, start: u32, len: u32) -> &[u32] {
        &self.children[start as usize..(start + len) as usize]
    }

    fn summarize(&self, values: &[f64]) -> Evaluation {
        let formulas: Vec<f64> = self.roots.iter().map(|&r| values[r as usize]).collect();
        Evaluation {
            satisfiability: self.config.formulas.aggregate(&formulas),
            formulas,
        }
    }

    pub fn evaluate(&self, gt: &GroundedTheory) -> Result<Evaluation> {
        let models = self.models(gt)?;
        Ok(self.summarize(&self.forward(&models)))
    }

    /// Satisfiability and its gradient with respect to every learnable parameter.
    pub fn value_and_gradient(&self, gt: &GroundedTheory) -> Result<(Evaluation, PredicateGradients)> {
        let models = self.models(gt)?;
        let values = self.forward(&models);
        let eval = self.summarize(&values);

        let mut adj = vec![0.0; self.nodes.len()];
        let root_grad = self.config.formulas.aggregate_grad(&eval.formulas, eval.satisfiability);
        for (&r, g) in self.roots.iter().zip(root_grad) {
            adj[r as usize] += g;
        }
        let mut atom_adj = vec![0.0; self.atoms.len()];
        let mut scratch = Vec::new();
        for (i, node) in self.nodes.iter().enumerate().rev() {
            let g = adj[i];
            if g == 0.0 {
                continue;
            }
            match *node {
                Node::Atom(a) => atom_adj[a as usize] += g,
                Node::Not(a) => adj[a as usize] -= g,
                Node::And(a, b) | Node::Or(a, b) | Node::Implies(a, b) => {
                    let (va, vb) = (values[a as usize], values[b as usize]);
                    let (da, db) = match node {
                        Node::And(..) => fuzzy::and_grad(va, vb),
                        Node::Or(..) => fuzzy::or_grad(va, vb),
                        _ => fuzzy::implies_grad(va, vb),
                    };
                    adj[a as usize] += g * da;
                    adj[b as usize] += g * db;
                }
                Node::ForAll(s, l) | Node::Exists(s, l) => {
                    let kids = self.child_ids(s, l);
                    scratch.clear();
                    scratch.extend(kids.iter().map(|&c| values[c as usize]));
                    let grads = match node {
                        Node::ForAll(..) => self.config.forall.aggregate_grad(&scratch, values[i]),
                        _ => self.config.exists.aggregate_grad(&scratch, values[i]),
                    };
                    for (&c, d) in kids.iter().zip(grads) {
                        adj[c as usize] += g * d;
                    }
                }
            }
        }

        let mut grads: Vec<Vec<Vec<f64>>> = models.iter().map(|m| m.zero_gradient()).collect();
        for (a, &g) in self.atoms.iter().zip(&atom_adj) {
            if g != 0.0 {
                let p = a.predicate as usize;
                models[p].accumulate_gradient_prepared(&self.inputs[a.input as usize], g, &mut grads[p]);
            }
        }
        let grads = self.predicates.iter().cloned().zip(grads).collect();
        Ok((eval, grads))
    }
}

/// Satisfiability of `gt`, subsampling quantifiers to `budget` tuples each.
pub fn satisfiability(gt: &GroundedTheory, budget: usize, rng: &mut RngState) -> Result<f64> {
    Ok(CompiledTheory::compile(gt, budget, rng)?.evaluate(gt)?.satisfiability)
}

/// Satisfiability and its parameter gradient under one instantiation sample.
pub fn satisfiability_gradient(
    gt: &GroundedTheory,
    budget: usize,
    rng: &mut RngState,
) -> Result<(f64, PredicateGradients)> {
    let (eval, grads) = CompiledTheory::compile(gt, budget, rng)?.value_and_gradient(gt)?;
    Ok((eval.satisfiability, grads))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::{build_encoder, EncoderConfig};
    use crate::logic::{eval_formula, parse_kb, ExistsMode, KnowledgeBase};
    use crate::predicates::{init_ntn, RwfnPredicate};

    fn features(count: usize, n: usize, rng: &mut RngState) -> Vec<(String, Vec<f64>)> {
        (0..count)
            .map(|i| (format!("c{i}"), (0..n).map(|_| rng.uniform()).collect()))
            .collect()
    }

    fn rwfn(in_dim: usize, seed: u64, rng: &mut RngState) -> PredicateModel {
        let enc = Arc::new(build_encoder(EncoderConfig::new(in_dim, 24, seed)).unwrap());
        let beta = (0..48).map(|_| 2.0 * rng.normal()).collect();
        PredicateModel::Rwfn(RwfnPredicate::with_beta(enc, beta).unwrap())
    }

    const KB: &str = "pred P/1\npred R/2\n\
        P(c0)\n~P(c1)\nR(c0, c2)\n\
        forall x,y: R(x,y) -> ~R(y,x)\n\
        forall x: P(x) -> (exists y: R(x,y))\n\
        P(c2) | P(c3) & ~R(c3, c1)\n";

    fn theory(ntn: bool, config: LogicConfig) -> GroundedTheory {
        let mut rng = RngState::new(11);
        let n = 4;
        let consts = features(6, n, &mut rng);
        let mut preds = BTreeMap::new();
        if ntn {
            preds.insert("P".to_string(), PredicateModel::Ntn(init_ntn(3, n, &mut rng).unwrap()));
            preds.insert("R".to_string(), PredicateModel::Ntn(init_ntn(3, 2 * n, &mut rng).unwrap()));
        } else {
            preds.insert("P".to_string(), rwfn(n, 1, &mut rng));
            preds.insert("R".to_string(), rwfn(2 * n, 2, &mut rng));
        }
        GroundedTheory::new(parse_kb(KB).unwrap(), consts, preds, config).unwrap()
    }

    #[test]
    fn tape_matches_direct_evaluation() {
        for ntn in [false, true] {
            for exists in [ExistsMode::Max, ExistsMode::DualHarmonic] {
                let config = LogicConfig {
                    exists,
                    ..LogicConfig::default()
                };
                let gt = theory(ntn, config);
                let compiled = CompiledTheory::compile(&gt, 10_000, &mut RngState::new(0)).unwrap();
                assert!(!compiled.is_sampled());
                let eval = compiled.evaluate(&gt).unwrap();
                for (f, &v) in gt.kb().formulas().iter().zip(&eval.formulas) {
                    let direct = eval_formula(&gt, f, &BTreeMap::new()).unwrap();
                    assert!((direct - v).abs() < 1e-12, "{f}: {direct} vs {v}");
                }
                let direct = fuzzy::harmonic_mean(&eval.formulas);
                assert!((eval.satisfiability - direct).abs() < 1e-15);
            }
        }
    }

    fn perturbed(gt: &GroundedTheory, name: &str, block: usize, i: usize, h: f64) -> GroundedTheory {
        let mut gt = gt.clone();
        gt.param_blocks_mut(name).unwrap()[block][i] += h;
        gt
    }

    #[test]
    fn gradient_matches_finite_differences() {
        for ntn in [false, true] {
            let gt = theory(ntn, LogicConfig::default());
            let compiled = CompiledTheory::compile(&gt, 10_000, &mut RngState::new(0)).unwrap();
            let (_, grads) = compiled.value_and_gradient(&gt).unwrap();
            let h = 1e-6;
            let mut checked = 0;
            for (name, blocks) in &grads {
                for (bi, block) in blocks.iter().enumerate() {
                    for i in (0..block.len()).step_by(7) {
                        let up = compiled.evaluate(&perturbed(&gt, name, bi, i, h)).unwrap();
                        let down = compiled.evaluate(&perturbed(&gt, name, bi, i, -h)).unwrap();
                        let fd = (up.satisfiability - down.satisfiability) / (2.0 * h);
                        let g = block[i];
                        let err = (g - fd).abs();
                        assert!(err <= 1e-6 + 1e-4 * g.abs().max(fd.abs()), "{name}[{bi}][{i}]: {g} vs {fd}");
                        checked += 1;
                    }
                }
            }
            assert!(checked > 10);
        }
    }

    #[test]
    fn literal_kb_examples() {
        let mut kb = KnowledgeBase::new();
        kb.declare("P", 1).unwrap();
        kb.add(Formula::fact("P", ["a"])).unwrap();
        let enc = Arc::new(build_encoder(EncoderConfig::new(2, 8, 0)).unwrap());
        let make = |kb: KnowledgeBase, beta: Vec<f64>| {
            let p = PredicateModel::Rwfn(RwfnPredicate::with_beta(enc.clone(), beta).unwrap());
            GroundedTheory::new(
                kb,
                vec![("a".into(), vec![0.2, 0.6]), ("b".into(), vec![0.9, 0.1])],
                BTreeMap::from([("P".to_string(), p)]),
                LogicConfig::default(),
            )
            .unwrap()
        };
        let mut rng = RngState::new(0);
        let gt = make(kb.clone(), vec![0.0; 16]);
        assert!((satisfiability(&gt, 100, &mut rng).unwrap() - 0.5).abs() < 1e-11);

        let h = enc.encode(&[0.2, 0.6]).unwrap();
        let saturated = make(kb.clone(), h.iter().map(|x| 1e6 * x).collect());
        assert!((satisfiability(&saturated, 100, &mut rng).unwrap() - 1.0).abs() < 1e-12);

        // {P(a) | ~P(a), P(a)} at P ≡ 0.5 gives {1, 0.5}.
        let mut kb2 = kb.clone();
        kb2.add(Formula::or(Formula::fact("P", ["a"]), Formula::not(Formula::fact("P", ["a"]))))
            .unwrap();
        let gt2 = make(kb2, vec![0.0; 16]);
        assert!((satisfiability(&gt2, 100, &mut rng).unwrap() - 2.0 / 3.0).abs() < 1e-11);

        assert!(matches!(
            satisfiability(&make(parse_kb("pred P/1").unwrap(), vec![0.0; 16]), 100, &mut rng),
            Err(Error::EmptyKnowledgeBase)
        ));
    }

    #[test]
    fn saturated_and_blocks_gradient() {
        // P(a) & P(b) with both near 0.5 - epsilon sits in the flat region.
        let mut kb = KnowledgeBase::new();
        kb.declare("P", 1).unwrap();
        kb.add(Formula::and(Formula::fact("P", ["a"]), Formula::fact("P", ["b"]))).unwrap();
        let gt = GroundedTheory::new(
            kb,
            vec![("a".into(), vec![0.2, 0.6]), ("b".into(), vec![0.9, 0.1])],
            BTreeMap::from([(
                "P".to_string(),
                PredicateModel::Ntn(crate::predicates::NtnPredicate::zeros(2, 2)),
            )]),
            LogicConfig::default(),
        )
        .unwrap();
        let mut gt = gt;
        gt.param_blocks_mut("P").unwrap()[3].fill(-0.1);
        gt.param_blocks_mut("P").unwrap()[0].fill(1.0);
        let (sat, grads) = satisfiability_gradient(&gt, 100, &mut RngState::new(0)).unwrap();
        assert!(sat < 1e-11);
        assert!(grads["P"].iter().flatten().all(|&g| g == 0.0));
    }

    #[test]
    fn sampling_respects_budget_and_is_deterministic() {
        let mut rng = RngState::new(5);
        let consts = features(40, 2, &mut rng);
        let kb = parse_kb("pred R/2\nforall x,y: R(x,y) -> ~R(y,x)").unwrap();
        let preds = BTreeMap::from([("R".to_string(), rwfn(4, 9, &mut rng))]);
        let gt = GroundedTheory::new(kb, consts, preds, LogicConfig::default()).unwrap();
        let a = CompiledTheory::compile(&gt, 500, &mut RngState::new(1)).unwrap();
        let b = CompiledTheory::compile(&gt, 500, &mut RngState::new(1)).unwrap();
        assert!(a.is_sampled());
        assert_eq!(a.evaluate(&gt).unwrap(), b.evaluate(&gt).unwrap());
        // 500 distinct (x,y) tuples: each one grounds R(x,y) and R(y,x).
        assert!(a.num_atoms() <= 1000 && a.num_atoms() >= 500);
        let full = CompiledTheory::compile(&gt, 1600, &mut RngState::new(1)).unwrap();
        assert!(!full.is_sampled());
        assert_eq!(full.num_atoms(), 1600);
    }

    #[test]
    fn floyd_sample_is_distinct_and_in_range() {
        let mut rng = RngState::new(3);
        let mut s = sample_floyd(100, 60, &mut rng);
        s.sort_unstable();
        s.dedup();
        assert_eq!(s.len(), 60);
        assert!(s.iter().all(|&x| x < 100));
        assert_eq!(sample_floyd(10, 10, &mut rng).len(), 10);
    }

    #[test]
    fn stale_tape_is_rejected() {
        let gt = theory(false, LogicConfig::default());
        let compiled = CompiledTheory::compile(&gt, 10_000, &mut RngState::new(0)).unwrap();
        let other = theory(false, LogicConfig::default());
        assert!(compiled.evaluate(&other).is_err());
    }
}
