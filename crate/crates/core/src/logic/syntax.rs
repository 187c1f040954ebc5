use std::collections::{BTreeSet, HashSet};
use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Const(String),
    Var(String),
}

impl Term {
    pub fn constant(name: impl Into<String>) -> Self {
        Term::Const(name.into())
    }

    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    Atom { predicate: String, args: Vec<Term> },
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    ForAll(Vec<String>, Box<Formula>),
    Exists(Vec<String>, Box<Formula>),
}

impl Formula {
    pub fn atom(predicate: impl Into<String>, args: impl IntoIterator<Item = Term>) -> Self {
        Formula::Atom {
            predicate: predicate.into(),
            args: args.into_iter().collect(),
        }
    }

    /// Closed literal `P(c1, …, cm)`.
    pub fn fact<S: Into<String>>(predicate: &str, constants: impl IntoIterator<Item = S>) -> Self {
        Self::atom(predicate, constants.into_iter().map(|c| Term::Const(c.into())))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn forall<S: Into<String>>(vars: impl IntoIterator<Item = S>, body: Formula) -> Self {
        Formula::ForAll(vars.into_iter().map(Into::into).collect(), Box::new(body))
    }

    pub fn exists<S: Into<String>>(vars: impl IntoIterator<Item = S>, body: Formula) -> Self {
        Formula::Exists(vars.into_iter().map(Into::into).collect(), Box::new(body))
    }

    /// Variables occurring free in the formula.
    pub fn free_vars(&self) -> BTreeSet<String> {
        fn walk(f: &Formula, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
            match f {
                Formula::Atom { args, .. } => {
                    for t in args {
                        if let Term::Var(v) = t {
                            if !bound.contains(v) {
                                out.insert(v.clone());
                            }
                        }
                    }
                }
                Formula::Not(a) => walk(a, bound, out),
                Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                    walk(a, bound, out);
                    walk(b, bound, out);
                }
                Formula::ForAll(vs, body) | Formula::Exists(vs, body) => {
                    let depth = bound.len();
                    bound.extend(vs.iter().cloned());
                    walk(body, bound, out);
                    bound.truncate(depth);
                }
            }
        }
        let mut out = BTreeSet::new();
        walk(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Constant symbols mentioned anywhere in the formula.
    pub fn constants(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Atom { args, .. } => {
                for t in args {
                    if let Term::Const(c) = t {
                        out.insert(c.clone());
                    }
                }
            }
            Formula::Not(a) | Formula::ForAll(_, a) | Formula::Exists(_, a) => a.constants(out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.constants(out);
                b.constants(out);
            }
        }
    }

    fn visit_atoms<'a>(&'a self, f: &mut impl FnMut(&'a str, &'a [Term])) {
        match self {
            Formula::Atom { predicate, args } => f(predicate, args),
            Formula::Not(a) | Formula::ForAll(_, a) | Formula::Exists(_, a) => a.visit_atoms(f),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.visit_atoms(f);
                b.visit_atoms(f);
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::ForAll(..) | Formula::Exists(..) => 0,
            Formula::Implies(..) => 1,
            Formula::Or(..) => 2,
            Formula::And(..) => 3,
            Formula::Not(..) | Formula::Atom { .. } => 4,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(c) => write!(f, "{c}"),
            Term::Var(v) => write!(f, "{v}"),
        }
    }
}

/// Renders in the KB text syntax; the output re-parses to the same formula.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |f: &mut fmt::Formatter<'_>, sub: &Formula, min: u8| -> fmt::Result {
            if sub.precedence() < min {
                write!(f, "({sub})")
            } else {
                write!(f, "{sub}")
            }
        };
        match self {
            Formula::Atom { predicate, args } => {
                write!(f, "{predicate}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
            Formula::Not(a) => {
                write!(f, "~")?;
                wrap(f, a, 4)
            }
            Formula::And(a, b) => {
                wrap(f, a, 3)?;
                write!(f, " & ")?;
                wrap(f, b, 4)
            }
            Formula::Or(a, b) => {
                wrap(f, a, 2)?;
                write!(f, " | ")?;
                wrap(f, b, 3)
            }
            Formula::Implies(a, b) => {
                wrap(f, a, 2)?;
                write!(f, " -> ")?;
                wrap(f, b, 1)
            }
            Formula::ForAll(vs, body) => write!(f, "forall {}: {body}", vs.join(",")),
            Formula::Exists(vs, body) => write!(f, "exists {}: {body}", vs.join(",")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateSig {
    pub name: String,
    pub arity: usize,
}

/// Declared predicate signatures plus closed formulas over them.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KnowledgeBase {
    predicates: Vec<PredicateSig>,
    formulas: Vec<Formula>,
}

impl KnowledgeBase {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn declare(&mut self, name: impl Into<String>, arity: usize) -> Result<()> {
        let name = name.into();
        if arity == 0 {
            return Err(Error::InvalidArgument(format!("predicate `{name}` needs arity >= 1")));
        }
        match self.arity(&name) {
            Some(a) if a == arity => Ok(()),
            Some(a) => Err(Error::ArityMismatch {
                name,
                expected: a,
                got: arity,
            }),
            None => {
                self.predicates.push(PredicateSig { name, arity });
                Ok(())
            }
        }
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.predicates.iter().find(|p| p.name == name).map(|p| p.arity)
    }

    pub fn predicates(&self) -> &[PredicateSig] {
        &self.predicates
    }

    pub fn formulas(&self) -> &[Formula] {
        &self.formulas
    }

    pub fn is_empty(&self) -> bool {
        self.formulas.is_empty()
    }

    /// Adds a closed formula whose atoms all use declared predicates at their arity.
    pub fn add(&mut self, formula: Formula) -> Result<()> {
        self.check(&formula)?;
        self.formulas.push(formula);
        Ok(())
    }

    pub fn check(&self, formula: &Formula) -> Result<()> {
        let mut err = None;
        formula.visit_atoms(&mut |name, args| {
            if err.is_some() {
                return;
            }
            match self.arity(name) {
                None => err = Some(Error::UnknownPredicate(name.to_string())),
                Some(a) if a != args.len() => {
                    err = Some(Error::ArityMismatch {
                        name: name.to_string(),
                        expected: a,
                        got: args.len(),
                    })
                }
                Some(_) => {}
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        if let Some(v) = formula.free_vars().into_iter().next() {
            return Err(Error::UnboundVariable(v));
        }
        Ok(())
    }

    /// Appends every declaration and formula of `other`.
    pub fn extend(&mut self, other: &KnowledgeBase) -> Result<()> {
        for p in &other.predicates {
            self.declare(p.name.clone(), p.arity)?;
        }
        for f in &other.formulas {
            self.add(f.clone())?;
        }
        Ok(())
    }

    pub fn constants(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for f in &self.formulas {
            f.constants(&mut out);
        }
        out
    }

    /// Predicates that occur in at least one formula.
    pub fn used_predicates(&self) -> HashSet<String> {
        let mut out = HashSet::new();
        for f in &self.formulas {
            f.visit_atoms(&mut |name, _| {
                out.insert(name.to_string());
            });
        }
        out
    }

    /// KB text: declarations first, then one formula per line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for p in &self.predicates {
            s.push_str(&format!("pred {}/{}\n", p.name, p.arity));
        }
        for f in &self.formulas {
            s.push_str(&format!("{f}\n"));
        }
        s
    }
}
