//! From an EER schema to its relational schema and CD set.

use std::collections::{BTreeMap, HashSet};

use thiserror::Error;

use crate::eer::{validate_eer, EERSchema, EerViolation};
use crate::relational::{
    CDSet, ConstraintSet, Dependency, InclusionDependency, KeyDependency, RelError, RelationalSchema, Role, Sym,
    TaggedDep,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TranslationError {
    #[error("`{0}` and `{1}` both translate to predicate `{2}`")]
    NameCollision(String, String, String),
    #[error("invalid schema: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<EerViolation>),
    #[error(transparent)]
    Relational(#[from] RelError),
}

fn pred(name: &str) -> String {
    name.to_lowercase()
}

fn seq(n: usize) -> Vec<usize> {
    (1..=n).collect()
}

/// One unary predicate per entity, one n-ary per relationship, and one per
/// attribute with arity one more than its owner's.
pub fn to_relational(s: &EERSchema) -> Result<RelationalSchema, TranslationError> {
    let report = validate_eer(s);
    if !report.is_empty() {
        return Err(TranslationError::Invalid(report));
    }
    let mut seen: BTreeMap<String, String> = BTreeMap::new();
    let mut schema = RelationalSchema::new();
    let mut add = |name: &'_ str, arity: usize, schema: &mut RelationalSchema| -> Result<(), TranslationError> {
        let p = pred(name);
        if let Some(prev) = seen.get(&p) {
            return Err(TranslationError::NameCollision(prev.clone(), name.to_string(), p));
        }
        schema.add(&p, arity)?;
        seen.insert(p, name.to_string());
        Ok(())
    };
    for e in &s.entities {
        add(&e.name, 1, &mut schema)?;
    }
    for r in &s.relationships {
        add(&r.name, r.among.len(), &mut schema)?;
    }
    for a in &s.attributes {
        let owner = match s.relationship(&a.owner) {
            Some(r) => r.among.len(),
            None => 1,
        };
        add(&a.name, owner + 1, &mut schema)?;
    }
    Ok(schema)
}

/// The dependencies of rules (1) to (11), tagged with their rule number and
/// listed rule by rule, each rule in definition order. Duplicates are dropped.
pub fn to_cds(s: &EERSchema) -> Result<CDSet, TranslationError> {
    let schema = to_relational(s)?;
    let mut out: Vec<(u8, Dependency)> = Vec::new();
    let id = |l: &str, lc: Vec<usize>, r: &str, rc: Vec<usize>| {
        Dependency::Id(InclusionDependency::new(&pred(l), &lc, &pred(r), &rc))
    };
    let kd = |p: &str, k: Vec<usize>| Dependency::Kd(KeyDependency::new(&pred(p), &k));
    let owner_arity = |o: &str| s.relationship(o).map(|r| r.among.len());

    for a in &s.attributes {
        if owner_arity(&a.owner).is_none() {
            out.push((1, id(&a.name, vec![1], &a.owner, vec![1])));
        }
    }
    for a in &s.attributes {
        if let Some(n) = owner_arity(&a.owner) {
            out.push((2, id(&a.name, seq(n), &a.owner, seq(n))));
        }
    }
    for r in &s.relationships {
        for (i, e) in r.among.iter().enumerate() {
            out.push((3, id(&r.name, vec![i + 1], e, vec![1])));
        }
    }
    for a in s.attributes.iter().filter(|a| a.mandatory) {
        if owner_arity(&a.owner).is_none() {
            out.push((4, id(&a.owner, vec![1], &a.name, vec![1])));
        }
    }
    for a in s.attributes.iter().filter(|a| a.mandatory) {
        if let Some(n) = owner_arity(&a.owner) {
            out.push((5, id(&a.owner, seq(n), &a.name, seq(n))));
        }
    }
    for a in s.attributes.iter().filter(|a| a.functional) {
        if owner_arity(&a.owner).is_none() {
            out.push((6, kd(&a.name, vec![1])));
        }
    }
    for a in s.attributes.iter().filter(|a| a.functional) {
        if let Some(n) = owner_arity(&a.owner) {
            out.push((7, kd(&a.name, seq(n))));
        }
    }
    for e in &s.entities {
        for t in &e.isa {
            out.push((8, id(&e.name, vec![1], t, vec![1])));
        }
    }
    for r in &s.relationships {
        for (t, perm) in &r.isa {
            out.push((9, id(&r.name, seq(r.among.len()), t, perm.clone())));
        }
    }
    for e in &s.entities {
        for (r, c) in &e.participates_min {
            out.push((10, id(&e.name, vec![1], r, vec![*c])));
        }
    }
    for e in &s.entities {
        for (r, c) in &e.participates_max {
            out.push((11, kd(r, vec![*c])));
        }
    }

    let mut seen = HashSet::new();
    let deps: Vec<TaggedDep> = out
        .into_iter()
        .filter(|(_, d)| seen.insert(d.clone()))
        .enumerate()
        .map(|(i, (rule, dep))| TaggedDep { label: format!("sigma{}", i + 1), rule: Some(rule), dep })
        .collect();

    let mut roles: BTreeMap<Sym, Role> = BTreeMap::new();
    for e in &s.entities {
        roles.insert(pred(&e.name).into(), Role::Entity);
    }
    for r in &s.relationships {
        roles.insert(pred(&r.name).into(), Role::Relationship);
    }
    for a in &s.attributes {
        roles.insert(pred(&a.name).into(), Role::Attribute);
    }
    Ok(CDSet { constraints: ConstraintSet::new(schema, deps)?, roles })
}
