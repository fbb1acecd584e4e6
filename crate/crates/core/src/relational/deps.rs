use std::collections::{HashMap, HashSet};
use std::fmt;

use super::{Constant, Database, RelError, RelationalSchema, Sym};

/// `lhs[lhs_cols] ⊆ rhs[rhs_cols]`, positions 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct InclusionDependency {
    pub lhs: Sym,
    pub lhs_cols: Vec<usize>,
    pub rhs: Sym,
    pub rhs_cols: Vec<usize>,
}

/// `key(pred) = key`, positions 1-based and sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct KeyDependency {
    pub pred: Sym,
    pub key: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Dependency {
    Id(InclusionDependency),
    Kd(KeyDependency),
}

fn cols(c: &[usize]) -> String {
    c.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")
}

fn is_permutation(c: &[usize], n: usize) -> bool {
    let mut seen = vec![false; n + 1];
    c.len() == n && c.iter().all(|&i| i >= 1 && i <= n && !std::mem::replace(&mut seen[i], true))
}

impl InclusionDependency {
    pub fn new(lhs: &str, lhs_cols: &[usize], rhs: &str, rhs_cols: &[usize]) -> Self {
        InclusionDependency {
            lhs: lhs.into(),
            lhs_cols: lhs_cols.to_vec(),
            rhs: rhs.into(),
            rhs_cols: rhs_cols.to_vec(),
        }
    }

    /// The rendering that fixes the dependency order used by the scheduler.
    pub fn canonical(&self) -> String {
        format!("{}[{}]<={}[{}]", self.lhs, cols(&self.lhs_cols), self.rhs, cols(&self.rhs_cols))
    }

    pub fn is_full_width(&self, schema: &RelationalSchema) -> bool {
        match (schema.arity(&self.lhs), schema.arity(&self.rhs)) {
            (Some(a), Some(b)) => is_permutation(&self.lhs_cols, a) && is_permutation(&self.rhs_cols, b),
            _ => false,
        }
    }

    pub fn project(&self, args: &[Constant]) -> Vec<Constant> {
        self.lhs_cols.iter().map(|&i| args[i - 1].clone()).collect()
    }

    pub fn project_rhs(&self, args: &[Constant]) -> Vec<Constant> {
        self.rhs_cols.iter().map(|&i| args[i - 1].clone()).collect()
    }
}

impl KeyDependency {
    pub fn new(pred: &str, key: &[usize]) -> Self {
        let mut key = key.to_vec();
        key.sort_unstable();
        key.dedup();
        KeyDependency { pred: pred.into(), key }
    }

    pub fn canonical(&self) -> String {
        format!("key({})={{{}}}", self.pred, cols(&self.key))
    }

    pub fn project(&self, args: &[Constant]) -> Vec<Constant> {
        self.key.iter().map(|&i| args[i - 1].clone()).collect()
    }
}

impl Dependency {
    pub fn canonical(&self) -> String {
        match self {
            Dependency::Id(d) => d.canonical(),
            Dependency::Kd(d) => d.canonical(),
        }
    }

    /// Well-formedness against a schema.
    pub fn check(&self, schema: &RelationalSchema) -> Result<(), RelError> {
        let bad = |m: &str| Err(RelError::BadDependency(self.to_string(), m.to_string()));
        match self {
            Dependency::Id(d) => {
                let la = schema.arity(&d.lhs).ok_or_else(|| RelError::UnknownPredicate(d.lhs.to_string()))?;
                let ra = schema.arity(&d.rhs).ok_or_else(|| RelError::UnknownPredicate(d.rhs.to_string()))?;
                if d.lhs_cols.is_empty() || d.lhs_cols.len() != d.rhs_cols.len() {
                    return bad("column lists must be nonempty and of equal length");
                }
                for (cs, a) in [(&d.lhs_cols, la), (&d.rhs_cols, ra)] {
                    if cs.iter().any(|&i| i == 0 || i > a) {
                        return bad("position out of range");
                    }
                    if cs.iter().collect::<HashSet<_>>().len() != cs.len() {
                        return bad("repeated position");
                    }
                }
                Ok(())
            }
            Dependency::Kd(d) => {
                let a = schema.arity(&d.pred).ok_or_else(|| RelError::UnknownPredicate(d.pred.to_string()))?;
                if a < 2 {
                    return bad("keys need a predicate of arity at least 2");
                }
                if d.key.is_empty() || d.key.len() >= a || d.key.iter().any(|&i| i == 0 || i > a) {
                    return bad("key must be a nonempty proper subset of the positions");
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for InclusionDependency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}] <= {}[{}]", self.lhs, cols(&self.lhs_cols), self.rhs, cols(&self.rhs_cols))
    }
}

impl fmt::Display for KeyDependency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "key({}) = {{{}}}", self.pred, cols(&self.key))
    }
}

impl fmt::Display for Dependency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dependency::Id(d) => write!(f, "{d}"),
            Dependency::Kd(d) => write!(f, "{d}"),
        }
    }
}

/// A dependency with its label (`sigmaN`) and, when it came from an EER
/// schema, the number of the translation rule that produced it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TaggedDep {
    pub label: String,
    pub rule: Option<u8>,
    pub dep: Dependency,
}

/// A relational schema with key and inclusion dependencies.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConstraintSet {
    pub schema: RelationalSchema,
    pub deps: Vec<TaggedDep>,
}

impl ConstraintSet {
    pub fn new(schema: RelationalSchema, deps: Vec<TaggedDep>) -> Result<Self, RelError> {
        for d in &deps {
            d.dep.check(&schema)?;
        }
        Ok(ConstraintSet { schema, deps })
    }

    /// Label dependencies `sigma1..sigmaN` in order.
    pub fn from_untagged(schema: RelationalSchema, deps: Vec<Dependency>) -> Result<Self, RelError> {
        let deps = deps
            .into_iter()
            .enumerate()
            .map(|(i, dep)| TaggedDep { label: format!("sigma{}", i + 1), rule: None, dep })
            .collect();
        ConstraintSet::new(schema, deps)
    }

    pub fn ids(&self) -> impl Iterator<Item = (&TaggedDep, &InclusionDependency)> {
        self.deps.iter().filter_map(|t| match &t.dep {
            Dependency::Id(d) => Some((t, d)),
            _ => None,
        })
    }

    pub fn kds(&self) -> impl Iterator<Item = (&TaggedDep, &KeyDependency)> {
        self.deps.iter().filter_map(|t| match &t.dep {
            Dependency::Kd(d) => Some((t, d)),
            _ => None,
        })
    }
}

/// Whether `db` satisfies `dep`. Fresh constants behave as distinct unknown
/// values, so they only join with themselves.
pub fn satisfies(db: &Database, schema: &RelationalSchema, dep: &Dependency) -> Result<bool, RelError> {
    dep.check(schema)?;
    match dep {
        Dependency::Id(d) => {
            let targets: HashSet<Vec<Constant>> =
                db.iter().filter(|f| f.pred == d.rhs).map(|f| d.project_rhs(&f.args)).collect();
            Ok(db.iter().filter(|f| f.pred == d.lhs).all(|f| targets.contains(&d.project(&f.args))))
        }
        Dependency::Kd(d) => {
            let mut seen: HashMap<Vec<Constant>, &[Constant]> = HashMap::new();
            for f in db.iter().filter(|f| f.pred == d.pred) {
                if let Some(prev) = seen.insert(d.project(&f.args), &f.args) {
                    if prev != f.args.as_slice() {
                        return Ok(false);
                    }
                }
            }
            Ok(true)
        }
    }
}
