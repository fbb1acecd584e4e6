//! Constants, facts, databases and relational schemata.

mod cds;
mod cq;
mod deps;
mod join_graph;
mod parse;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

pub use cds::{check_partition, partition, recognize_cds, CDSet, CdViolation, Role};
pub use cq::{evaluate_cq, evaluate_cq_on, ConjunctiveQuery, QAtom, QTerm};
pub use deps::{satisfies, ConstraintSet, Dependency, InclusionDependency, KeyDependency, TaggedDep};
pub use join_graph::{join_graph_components, JoinGraph};
pub use parse::{parse_cds, parse_cq, parse_facts, render_cds};

use crate::lex::{is_bare_constant, quote, ParseError};

/// Interned-by-refcount symbol used for predicate and constant names.
pub type Sym = Arc<str>;

pub fn sym(s: &str) -> Sym {
    Arc::from(s)
}

/// A domain constant or a fresh placeholder.
///
/// The derived order puts every non-fresh constant before every fresh one,
/// compares non-fresh constants by name and fresh ones by ordinal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Constant {
    NonFresh(Sym),
    Fresh(u64),
}

impl Constant {
    pub fn named(s: &str) -> Self {
        Constant::NonFresh(sym(s))
    }

    pub fn is_fresh(&self) -> bool {
        matches!(self, Constant::Fresh(_))
    }
}

impl fmt::Display for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constant::NonFresh(s) if is_bare_constant(s) => f.write_str(s),
            Constant::NonFresh(s) => f.write_str(&quote(s)),
            Constant::Fresh(n) => write!(f, "φ{n}"),
        }
    }
}

/// Monotone allocator of fresh constants; ordinals start at 1.
#[derive(Debug, Clone, Default)]
pub struct FreshGen {
    next: u64,
}

impl FreshGen {
    pub fn new() -> Self {
        FreshGen { next: 0 }
    }

    /// Continue after the largest fresh ordinal already in use.
    pub fn after(used: impl IntoIterator<Item = u64>) -> Self {
        FreshGen { next: used.into_iter().max().unwrap_or(0) }
    }

    pub fn fresh(&mut self) -> Constant {
        self.next += 1;
        Constant::Fresh(self.next)
    }

    pub fn allocated(&self) -> u64 {
        self.next
    }
}

/// A ground atom. The derived order is the fact order used by the chase
/// scheduler: predicate name first, then arguments under the constant order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fact {
    pub pred: Sym,
    pub args: Vec<Constant>,
}

impl Fact {
    pub fn new(pred: &str, args: &[&str]) -> Self {
        Fact { pred: sym(pred), args: args.iter().map(|a| Constant::named(a)).collect() }
    }

    pub fn has_fresh(&self) -> bool {
        self.args.iter().any(Constant::is_fresh)
    }
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.pred)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(")")
    }
}

/// A finite set of facts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Database {
    facts: BTreeSet<Fact>,
}

impl Database {
    pub fn new() -> Self {
        Database::default()
    }

    pub fn insert(&mut self, f: Fact) -> bool {
        self.facts.insert(f)
    }

    pub fn contains(&self, f: &Fact) -> bool {
        self.facts.contains(f)
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Fact> {
        self.facts.iter()
    }

    pub fn constants(&self) -> BTreeSet<Constant> {
        self.facts.iter().flat_map(|f| f.args.iter().cloned()).collect()
    }

    pub fn has_fresh(&self) -> bool {
        self.facts.iter().any(Fact::has_fresh)
    }

    /// Check every fact against the schema.
    pub fn check_schema(&self, schema: &RelationalSchema) -> Result<(), RelError> {
        for f in &self.facts {
            schema.check_atom(&f.pred, f.args.len())?;
        }
        Ok(())
    }
}

impl FromIterator<Fact> for Database {
    fn from_iter<T: IntoIterator<Item = Fact>>(iter: T) -> Self {
        Database { facts: iter.into_iter().collect() }
    }
}

impl<'a> IntoIterator for &'a Database {
    type Item = &'a Fact;
    type IntoIter = std::collections::btree_set::Iter<'a, Fact>;
    fn into_iter(self) -> Self::IntoIter {
        self.facts.iter()
    }
}

/// Predicate names with their arities.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct RelationalSchema {
    preds: BTreeMap<Sym, usize>,
}

impl RelationalSchema {
    pub fn new() -> Self {
        RelationalSchema::default()
    }

    pub fn add(&mut self, name: &str, arity: usize) -> Result<(), RelError> {
        if arity == 0 {
            return Err(RelError::ZeroArity(name.to_string()));
        }
        match self.preds.get(name) {
            Some(_) => Err(RelError::DuplicatePredicate(name.to_string())),
            None => {
                self.preds.insert(sym(name), arity);
                Ok(())
            }
        }
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.preds.get(name).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.preds.contains_key(name)
    }

    pub fn len(&self) -> usize {
        self.preds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.preds.is_empty()
    }

    pub fn max_arity(&self) -> usize {
        self.preds.values().copied().max().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Sym, usize)> {
        self.preds.iter().map(|(k, v)| (k, *v))
    }

    pub fn check_atom(&self, pred: &str, n: usize) -> Result<(), RelError> {
        match self.arity(pred) {
            None => Err(RelError::UnknownPredicate(pred.to_string())),
            Some(a) if a != n => Err(RelError::ArityMismatch { pred: pred.to_string(), expected: a, found: n }),
            Some(_) => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RelError {
    #[error("syntax error at {0}")]
    Parse(#[from] ParseError),
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("predicate `{pred}` has arity {expected}, used with {found} arguments")]
    ArityMismatch { pred: String, expected: usize, found: usize },
    #[error("predicate `{0}` declared twice")]
    DuplicatePredicate(String),
    #[error("predicate `{0}` must have arity at least 1")]
    ZeroArity(String),
    #[error("invalid dependency `{0}`: {1}")]
    BadDependency(String, String),
    #[error("invalid query: {0}")]
    BadQuery(String),
}
