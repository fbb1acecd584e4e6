//! Recognition of conceptual dependency sets.
//!
//! A constraint set is a CD set iff its predicates can be split into entity
//! (`E`), relationship (`R`) and attribute (`A`) predicates such that every
//! key and inclusion dependency has one of the shapes produced by the EER
//! translation, and the typing and converse dependencies are present.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::{ConstraintSet, InclusionDependency, KeyDependency, RelationalSchema, Sym};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    Entity,
    Relationship,
    Attribute,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Entity => "entity",
            Role::Relationship => "relationship",
            Role::Attribute => "attribute",
        })
    }
}

/// One violated condition of the CD characterisation, `(a)` to `(i)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CdViolation {
    pub condition: char,
    pub message: String,
}

impl fmt::Display for CdViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "condition ({}): {}", self.condition, self.message)
    }
}

/// A constraint set together with a partition witnessing that it is a CD set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CDSet {
    pub constraints: ConstraintSet,
    pub roles: BTreeMap<Sym, Role>,
}

impl CDSet {
    pub fn schema(&self) -> &RelationalSchema {
        &self.constraints.schema
    }

    pub fn role(&self, pred: &str) -> Option<Role> {
        self.roles.get(pred).copied()
    }
}

fn seq(n: usize) -> Vec<usize> {
    (1..=n).collect()
}

fn is_perm(c: &[usize], n: usize) -> bool {
    let mut s = c.to_vec();
    s.sort_unstable();
    s == seq(n)
}

/// The deterministic partition: unary predicates are entities, a predicate of
/// arity `k >= 2` is an attribute when it has an outgoing `p[1..k-1] ⊆
/// q[1..k-1]` into a predicate of arity `k-1` and no outgoing dependency
/// mentions position `k`; everything else is a relationship.
pub fn partition(cs: &ConstraintSet) -> BTreeMap<Sym, Role> {
    let s = &cs.schema;
    s.iter()
        .map(|(p, k)| {
            let role = if k == 1 {
                Role::Entity
            } else {
                let outgoing: Vec<&InclusionDependency> = cs.ids().map(|(_, d)| d).filter(|d| d.lhs == *p).collect();
                let typed = outgoing.iter().any(|d| {
                    d.lhs_cols == seq(k - 1) && d.rhs_cols == seq(k - 1) && s.arity(&d.rhs) == Some(k - 1)
                });
                let last = outgoing.iter().any(|d| d.lhs_cols.contains(&k));
                if typed && !last {
                    Role::Attribute
                } else {
                    Role::Relationship
                }
            };
            (p.clone(), role)
        })
        .collect()
}

/// All violated conditions for a given partition; empty iff it witnesses a CD set.
pub fn check_partition(cs: &ConstraintSet, roles: &BTreeMap<Sym, Role>) -> Vec<CdViolation> {
    let s = &cs.schema;
    let mut out = BTreeSet::new();
    let mut v = |c: char, m: String| {
        out.insert(CdViolation { condition: c, message: m });
    };
    let role = |p: &str| roles.get(p).copied();
    let ar = |p: &str| s.arity(p).unwrap_or(0);

    for (p, k) in s.iter() {
        match role(p) {
            Some(Role::Entity) if k != 1 => v('a', format!("entity predicate `{p}` is not unary")),
            Some(Role::Relationship | Role::Attribute) if k < 2 => {
                v('b', format!("predicate `{p}` needs arity at least 2"))
            }
            None => v('a', format!("predicate `{p}` is not assigned a role")),
            _ => {}
        }
    }

    for (_, kd) in cs.kds() {
        if !kd_shape_ok(kd, &role, &ar) {
            v('c', format!("`{kd}` is neither key(r)={{i}} on a relationship nor key(a)={{1..n}} on an attribute"));
        }
    }

    let ids: Vec<&InclusionDependency> = cs.ids().map(|(_, d)| d).collect();
    let has = |l: &str, lc: &[usize], r: &str, rc: &[usize]| {
        ids.iter().any(|d| &*d.lhs == l && d.lhs_cols == lc && &*d.rhs == r && d.rhs_cols == rc)
    };
    for d in &ids {
        if !id_shape_ok(d, &role, &ar) {
            v('d', format!("`{d}` has none of the admitted inclusion shapes"));
        }
    }

    for (r, k) in s.iter() {
        if role(r) != Some(Role::Relationship) || k < 2 {
            continue;
        }
        for i in 1..=k {
            let targets: BTreeSet<&Sym> = ids
                .iter()
                .filter(|d| d.lhs == *r && d.lhs_cols == [i] && d.rhs_cols == [1] && role(&d.rhs) == Some(Role::Entity))
                .map(|d| &d.rhs)
                .collect();
            match targets.len() {
                0 => v('e', format!("component {i} of `{r}` has no typing dependency {r}[{i}] <= e[1]")),
                1 => {}
                _ => v('e', format!("component {i} of `{r}` is typed by several entities")),
            }
        }
    }

    for (a, k) in s.iter() {
        if role(a) != Some(Role::Attribute) || k < 2 {
            continue;
        }
        let n = k - 1;
        let targets: BTreeSet<&Sym> = ids
            .iter()
            .filter(|d| {
                d.lhs == *a
                    && d.lhs_cols == seq(n)
                    && d.rhs_cols == seq(n)
                    && ar(&d.rhs) == n
                    && matches!(role(&d.rhs), Some(Role::Relationship | Role::Entity))
            })
            .map(|d| &d.rhs)
            .collect();
        match targets.len() {
            0 => v('f', format!("attribute `{a}` has no owner dependency {a}[1..{n}] <= p[1..{n}]")),
            1 => {}
            _ => v('f', format!("attribute `{a}` has several owners")),
        }
    }

    for d in &ids {
        let (l, r) = (role(&d.lhs), role(&d.rhs));
        match (l, r) {
            (Some(Role::Entity), Some(Role::Relationship)) if d.lhs_cols == [1] && d.rhs_cols.len() == 1 => {
                if !has(&d.rhs, &d.rhs_cols, &d.lhs, &[1]) {
                    v('g', format!("`{d}` lacks its converse {}[{}] <= {}[1]", d.rhs, d.rhs_cols[0], d.lhs));
                }
            }
            (Some(Role::Relationship), Some(Role::Attribute)) => {
                let n = ar(&d.lhs);
                if d.lhs_cols == seq(n) && d.rhs_cols == seq(n) && ar(&d.rhs) == n + 1 && !has(&d.rhs, &seq(n), &d.lhs, &seq(n)) {
                    v('h', format!("`{d}` lacks its converse"));
                }
            }
            (Some(Role::Entity), Some(Role::Attribute))
                if d.lhs_cols == [1] && d.rhs_cols == [1] && ar(&d.rhs) == 2 && !has(&d.rhs, &[1], &d.lhs, &[1]) => {
                    v('i', format!("`{d}` lacks its converse {}[1] <= {}[1]", d.rhs, d.lhs));
                }
            _ => {}
        }
    }
    out.into_iter().collect()
}

fn kd_shape_ok(kd: &KeyDependency, role: &dyn Fn(&str) -> Option<Role>, ar: &dyn Fn(&str) -> usize) -> bool {
    let k = ar(&kd.pred);
    match role(&kd.pred) {
        Some(Role::Relationship) => kd.key.len() == 1 && kd.key[0] >= 1 && kd.key[0] <= k,
        Some(Role::Attribute) => k >= 2 && kd.key == seq(k - 1),
        _ => false,
    }
}

fn id_shape_ok(d: &InclusionDependency, role: &dyn Fn(&str) -> Option<Role>, ar: &dyn Fn(&str) -> usize) -> bool {
    use Role::*;
    let (l, r) = match (role(&d.lhs), role(&d.rhs)) {
        (Some(l), Some(r)) => (l, r),
        _ => return false,
    };
    let (la, ra) = (ar(&d.lhs), ar(&d.rhs));
    let unary = d.lhs_cols.len() == 1;
    match (l, r) {
        (Entity, Entity) => d.lhs_cols == [1] && d.rhs_cols == [1],
        (Entity, Relationship) => d.lhs_cols == [1] && unary && d.rhs_cols[0] <= ra,
        (Relationship, Entity) => unary && d.rhs_cols == [1] && d.lhs_cols[0] <= la,
        (Relationship, Relationship) => la == ra && d.lhs_cols == seq(la) && is_perm(&d.rhs_cols, ra),
        (Attribute, Entity) => d.lhs_cols == [1] && d.rhs_cols == [1],
        (Attribute, Relationship) => la == ra + 1 && d.lhs_cols == seq(ra) && d.rhs_cols == seq(ra),
        (Entity, Attribute) => d.lhs_cols == [1] && d.rhs_cols == [1],
        (Relationship, Attribute) => ra == la + 1 && d.lhs_cols == seq(la) && d.rhs_cols == seq(la),
        _ => false,
    }
}

/// Find the partition and check it. Returns the CD set or every violated condition.
pub fn recognize_cds(cs: &ConstraintSet) -> Result<CDSet, Vec<CdViolation>> {
    let roles = partition(cs);
    let violations = check_partition(cs, &roles);
    if violations.is_empty() {
        Ok(CDSet { constraints: cs.clone(), roles })
    } else {
        Err(violations)
    }
}
