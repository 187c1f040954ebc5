use std::collections::{BTreeMap, HashMap};

use super::fuzzy::{self, LogicConfig};
use super::syntax::{Formula, KnowledgeBase, Term};
use crate::error::{check_len, Error, Result};
use crate::predicates::PredicateModel;

/// A knowledge base together with its partial grounding: a feature vector per
/// constant and a model per predicate. Quantifiers range over every grounded
/// constant.
#[derive(Debug, Clone)]
pub struct GroundedTheory {
    kb: KnowledgeBase,
    constants: Vec<String>,
    index: HashMap<String, usize>,
    features: Vec<Vec<f64>>,
    feature_dim: usize,
    predicates: BTreeMap<String, PredicateModel>,
    config: LogicConfig,
}

impl GroundedTheory {
    /// Validates and assembles a grounded theory. Constants keep the order given.
    pub fn new(
        kb: KnowledgeBase,
        constants: Vec<(String, Vec<f64>)>,
        predicates: BTreeMap<String, PredicateModel>,
        config: LogicConfig,
    ) -> Result<Self> {
        let feature_dim = constants.first().map_or(0, |(_, v)| v.len());
        let mut index = HashMap::with_capacity(constants.len());
        let mut names = Vec::with_capacity(constants.len());
        let mut features = Vec::with_capacity(constants.len());
        let mut out_of_range = 0usize;
        for (name, v) in constants {
            check_len(feature_dim, v.len())?;
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidArgument(format!("non-finite feature for `{name}`")));
            }
            if !crate::encoder::in_unit_range(&v) {
                out_of_range += 1;
            }
            if index.insert(name.clone(), names.len()).is_some() {
                return Err(Error::InvalidArgument(format!("constant `{name}` grounded twice")));
            }
            names.push(name);
            features.push(v);
        }
        if out_of_range > 0 {
            log::warn!("{out_of_range} constant(s) have features outside [0, 1]");
        }
        for c in kb.constants() {
            if !index.contains_key(&c) {
                return Err(Error::MissingConstant(c));
            }
        }
        for name in predicates.keys() {
            if kb.arity(name).is_none() {
                return Err(Error::UnknownPredicate(name.clone()));
            }
        }
        for name in kb.used_predicates() {
            let arity = kb.arity(&name).expect("kb checks declarations");
            let model = predicates
                .get(&name)
                .ok_or_else(|| Error::Model(format!("no model grounds predicate `{name}`")))?;
            check_len(arity * feature_dim, model.input_dim())?;
        }
        Ok(Self {
            kb,
            constants: names,
            index,
            features,
            feature_dim,
            predicates,
            config,
        })
    }

    pub fn kb(&self) -> &KnowledgeBase {
        &self.kb
    }

    pub fn constants(&self) -> &[String] {
        &self.constants
    }

    pub fn constant_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn features(&self, name: &str) -> Option<&[f64]> {
        self.constant_index(name).map(|i| self.features[i].as_slice())
    }

    pub(crate) fn features_at(&self, i: usize) -> &[f64] {
        &self.features[i]
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn predicates(&self) -> &BTreeMap<String, PredicateModel> {
        &self.predicates
    }

    pub fn predicate(&self, name: &str) -> Option<&PredicateModel> {
        self.predicates.get(name)
    }

    /// Mutable access to the parameter blocks of one predicate. Shapes are fixed.
    pub fn param_blocks_mut(&mut self, name: &str) -> Option<Vec<&mut [f64]>> {
        self.predicates.get_mut(name).map(|p| p.param_blocks_mut())
    }

    pub fn config(&self) -> &LogicConfig {
        &self.config
    }

    pub fn set_config(&mut self, config: LogicConfig) {
        self.config = config;
    }

    pub fn into_predicates(self) -> BTreeMap<String, PredicateModel> {
        self.predicates
    }

    /// Concatenated argument vector for constant indices `args`.
    pub(crate) fn concat(&self, args: &[usize]) -> Vec<f64> {
        let mut v = Vec::with_capacity(args.len() * self.feature_dim);
        for &a in args {
            v.extend_from_slice(&self.features[a]);
        }
        v
    }

    /// Truth value of an atom over grounded constants.
    pub fn eval_atom(&self, predicate: &str, args: &[&str]) -> Result<f64> {
        let model = self
            .predicates
            .get(predicate)
            .ok_or_else(|| Error::UnknownPredicate(predicate.to_string()))?;
        let idx = args
            .iter()
            .map(|a| self.constant_index(a).ok_or_else(|| Error::MissingConstant(a.to_string())))
            .collect::<Result<Vec<_>>>()?;
        model.forward(&self.concat(&idx))
    }
}

/// Evaluates `f` directly and exhaustively: every quantifier enumerates the
/// full product of the domain. `bindings` maps free variables to constants.
pub fn eval_formula(gt: &GroundedTheory, f: &Formula, bindings: &BTreeMap<String, String>) -> Result<f64> {
    let mut env = Vec::with_capacity(bindings.len());
    for (var, c) in bindings {
        let i = gt
            .constant_index(c)
            .ok_or_else(|| Error::MissingConstant(c.clone()))?;
        env.push((var.clone(), i));
    }
    eval_rec(gt, f, &mut env)
}

fn lookup(env: &[(String, usize)], var: &str) -> Option<usize> {
    env.iter().rev().find(|(v, _)| v == var).map(|&(_, i)| i)
}

fn eval_rec(gt: &GroundedTheory, f: &Formula, env: &mut Vec<(String, usize)>) -> Result<f64> {
    Ok(match f {
        Formula::Atom { predicate, args } => {
            let idx = args
                .iter()
                .map(|t| match t {
                    Term::Const(c) => gt
                        .constant_index(c)
                        .ok_or_else(|| Error::MissingConstant(c.clone())),
                    Term::Var(v) => lookup(env, v).ok_or_else(|| Error::UnboundVariable(v.clone())),
                })
                .collect::<Result<Vec<_>>>()?;
            let model = gt
                .predicate(predicate)
                .ok_or_else(|| Error::UnknownPredicate(predicate.clone()))?;
            model.forward(&gt.concat(&idx))?
        }
        Formula::Not(a) => fuzzy::not(eval_rec(gt, a, env)?),
        Formula::And(a, b) => fuzzy::and(eval_rec(gt, a, env)?, eval_rec(gt, b, env)?),
        Formula::Or(a, b) => fuzzy::or(eval_rec(gt, a, env)?, eval_rec(gt, b, env)?),
        Formula::Implies(a, b) => fuzzy::implies(eval_rec(gt, a, env)?, eval_rec(gt, b, env)?),
        Formula::ForAll(vars, body) => {
            let values = instances(gt, vars, body, env)?;
            gt.config.forall.aggregate(&values)
        }
        Formula::Exists(vars, body) => {
            let values = instances(gt, vars, body, env)?;
            gt.config.exists.aggregate(&values)
        }
    })
}

fn instances(
    gt: &GroundedTheory,
    vars: &[String],
    body: &Formula,
    env: &mut Vec<(String, usize)>,
) -> Result<Vec<f64>> {
    let d = gt.constants.len();
    let k = vars.len();
    let total = d.checked_pow(k as u32).ok_or_else(|| {
        Error::InvalidArgument("quantifier domain too large for exhaustive evaluation".into())
    })?;
    let depth = env.len();
    let mut values = Vec::with_capacity(total);
    let mut tuple = vec![0usize; k];
    for _ in 0..total {
        env.truncate(depth);
        env.extend(vars.iter().cloned().zip(tuple.iter().copied()));
        values.push(eval_rec(gt, body, env)?);
        for slot in tuple.iter_mut().rev() {
            *slot += 1;
            if *slot < d {
                break;
            }
            *slot = 0;
        }
    }
    env.truncate(depth);
    Ok(values)
}
