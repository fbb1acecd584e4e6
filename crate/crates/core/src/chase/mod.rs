//! The chase under key and inclusion dependencies.
//!
//! [`build_chase`] follows a fixed scheduler so that every run on equal input
//! produces the same facts, the same fresh ordinals and the same step log:
//!
//! 1. while some KD is violated, repair the violating pair with the lowest
//!    `min(level)`, ties broken by the pair (each pair ordered `t1 < t2`) and
//!    then by the KD's canonical text;
//! 2. apply one ID: full-width IDs first, on the lowest-level fact that comes
//!    first in fact order, with the first applicable ID in canonical order.
//!
//! With a level cap, rules only fire on facts whose level is below the cap and
//! the result is `Truncated` if anything was left applicable.

mod eq;
mod standard;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::relational::{
    CDSet, CdViolation, ConstraintSet, Constant, Database, Dependency, Fact, InclusionDependency, KeyDependency,
    RelationalSchema, Sym, TaggedDep,
};

pub use eq::{build_eq_chase, build_eq_chase_with, equality_eliminate, EqChaseResult};
pub use standard::{build_chase, build_chase_with};

pub type Level = u64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChaseError {
    #[error("not a CD set: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    NotCd(Vec<CdViolation>),
    #[error("level bound overflows 64 bits ({0}); cap the maximum arity or pass an explicit --max-level")]
    Overflow(String),
    #[error("resource limit exceeded: more than {limit} {what}")]
    ResourceLimit { what: &'static str, limit: usize },
    #[error("equality class {0} holds two distinct non-fresh constants")]
    InconsistentClass(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChaseStatus {
    Completed,
    Truncated { at_level: Level },
    /// The KD rule failed at step `step` on `pair`.
    Failed { step: usize, kd: String, pair: (Fact, Fact) },
}

impl fmt::Display for ChaseStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChaseStatus::Completed => f.write_str("completed"),
            ChaseStatus::Truncated { at_level } => write!(f, "truncated at level {at_level}"),
            ChaseStatus::Failed { step, kd, pair } => {
                write!(f, "failed at step {step}: {kd} on {} and {}", pair.0, pair.1)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChaseStep {
    Id { dep: String, parent: Fact, child: Fact, level: Level },
    /// `merged` lists `(replaced, replacement)` pairs.
    Kd { dep: String, pair: (Fact, Fact), merged: Vec<(Constant, Constant)>, level: Level },
}

impl fmt::Display for ChaseStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChaseStep::Id { dep, parent, child, level } => write!(f, "id {dep}: {parent} -> {child} @{level}"),
            ChaseStep::Kd { dep, pair, merged, level } => {
                write!(f, "kd {dep}: {} ~ {}", pair.0, pair.1)?;
                for (i, (a, b)) in merged.iter().enumerate() {
                    f.write_str(if i == 0 { ": " } else { ", " })?;
                    write!(f, "{a} := {b}")?;
                }
                write!(f, " @{level}")
            }
        }
    }
}

/// An ID application: `child` was generated from `parent` by `dep`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ForestArc {
    pub parent: Fact,
    pub child: Fact,
    pub dep: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChaseResult {
    pub status: ChaseStatus,
    pub facts: BTreeMap<Fact, Level>,
    pub forest: Vec<ForestArc>,
    pub steps: Vec<ChaseStep>,
}

impl ChaseResult {
    pub fn database(&self) -> Database {
        self.facts.keys().cloned().collect()
    }

    pub fn is_failed(&self) -> bool {
        matches!(self.status, ChaseStatus::Failed { .. })
    }

    pub fn max_level(&self) -> Level {
        self.facts.values().copied().max().unwrap_or(0)
    }

    /// `fact level` per line, in fact order.
    pub fn listing(&self) -> String {
        let mut out = String::new();
        for (f, l) in &self.facts {
            out.push_str(&format!("{f} {l}\n"));
        }
        out
    }

    /// The forest in Graphviz syntax: ID arcs are solid edges labelled with
    /// the dependency, KD merges are listed in a comment block.
    pub fn to_dot(&self) -> String {
        let esc = |s: &str| s.replace('\\', "\\\\").replace('"', "\\\"");
        let mut out = String::from("digraph chase {\n  rankdir=TB;\n  node [shape=box];\n");
        for (f, l) in &self.facts {
            let s = esc(&f.to_string());
            out.push_str(&format!("  \"{s}\" [label=\"{s}\\nlevel {l}\"];\n"));
        }
        for a in &self.forest {
            out.push_str(&format!(
                "  \"{}\" -> \"{}\" [label=\"{}\"];\n",
                esc(&a.parent.to_string()),
                esc(&a.child.to_string()),
                esc(&a.dep)
            ));
        }
        for s in &self.steps {
            if let ChaseStep::Kd { .. } = s {
                out.push_str(&format!("  // {}\n", esc(&s.to_string())));
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Caps on a chase run. `max_level` is the level cap of the scheduler; the
/// other two abort the run with [`ChaseError::ResourceLimit`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ChaseOptions {
    pub max_level: Option<Level>,
    pub max_facts: Option<usize>,
    pub max_steps: Option<usize>,
}

impl ChaseOptions {
    pub fn bounded(max_level: Level) -> Self {
        ChaseOptions { max_level: Some(max_level), ..Default::default() }
    }
}

pub(crate) struct IdRule {
    pub label: String,
    pub dep: InclusionDependency,
    pub full_width: bool,
}

pub(crate) struct KdRule {
    pub label: String,
    pub dep: KeyDependency,
    pub canonical: String,
}

/// Dependencies sorted by canonical text and grouped by predicate.
pub(crate) struct Rules {
    pub ids: Vec<IdRule>,
    pub kds: Vec<KdRule>,
    pub ids_from: BTreeMap<Sym, Vec<usize>>,
    pub kds_on: BTreeMap<Sym, Vec<usize>>,
    /// Distinct `(rhs, rhs_cols)` projections; `id_proj[i]` indexes into it.
    pub projections: Vec<(Sym, Vec<usize>)>,
    pub id_proj: Vec<usize>,
    pub proj_on: BTreeMap<Sym, Vec<usize>>,
}

impl Rules {
    pub fn new(cs: &ConstraintSet) -> Self {
        let mut ids: Vec<IdRule> = cs
            .ids()
            .map(|(t, d)| IdRule { label: t.label.clone(), dep: d.clone(), full_width: d.is_full_width(&cs.schema) })
            .collect();
        ids.sort_by_cached_key(|r| (r.dep.canonical(), r.label.clone()));
        ids.dedup_by(|a, b| a.dep == b.dep);
        let mut kds: Vec<KdRule> = cs
            .kds()
            .map(|(t, d)| KdRule { label: t.label.clone(), dep: d.clone(), canonical: d.canonical() })
            .collect();
        kds.sort_by(|a, b| (&a.canonical, &a.label).cmp(&(&b.canonical, &b.label)));
        kds.dedup_by(|a, b| a.dep == b.dep);

        let mut ids_from: BTreeMap<Sym, Vec<usize>> = BTreeMap::new();
        let mut projections: Vec<(Sym, Vec<usize>)> = Vec::new();
        let mut id_proj = Vec::new();
        let mut proj_on: BTreeMap<Sym, Vec<usize>> = BTreeMap::new();
        for (i, r) in ids.iter().enumerate() {
            ids_from.entry(r.dep.lhs.clone()).or_default().push(i);
            let key = (r.dep.rhs.clone(), r.dep.rhs_cols.clone());
            let p = match projections.iter().position(|k| *k == key) {
                Some(p) => p,
                None => {
                    projections.push(key);
                    proj_on.entry(r.dep.rhs.clone()).or_default().push(projections.len() - 1);
                    projections.len() - 1
                }
            };
            id_proj.push(p);
        }
        let mut kds_on: BTreeMap<Sym, Vec<usize>> = BTreeMap::new();
        for (i, k) in kds.iter().enumerate() {
            kds_on.entry(k.dep.pred.clone()).or_default().push(i);
        }
        Rules { ids, kds, ids_from, kds_on, projections, id_proj, proj_on }
    }

    pub fn has_full_width_from(&self, pred: &str) -> bool {
        self.ids_from.get(pred).is_some_and(|v| v.iter().any(|&i| self.ids[i].full_width))
    }
}

pub(crate) fn project(args: &[Constant], cols: &[usize]) -> Vec<Constant> {
    cols.iter().map(|&i| args[i - 1].clone()).collect()
}

/// The best KD pair among `facts` (all agreeing on the key): lowest
/// `min(level)`, then the pair in fact order. Pairs with `min(level) >= cap`
/// are skipped; `ok` filters pairs that would change nothing.
pub(crate) fn best_pair<'a>(
    facts: &[(&'a Fact, Level)],
    cap: Option<Level>,
    mut ok: impl FnMut(&Fact, &Fact) -> bool,
) -> Option<(Level, &'a Fact, &'a Fact)> {
    let mut best: Option<(Level, &Fact, &Fact)> = None;
    for i in 0..facts.len() {
        for j in i + 1..facts.len() {
            let (a, b) = if facts[i].0 < facts[j].0 { (facts[i], facts[j]) } else { (facts[j], facts[i]) };
            let l = a.1.min(b.1);
            if cap.is_some_and(|c| l >= c) {
                continue;
            }
            let cand = (l, a.0, b.0);
            if best.is_some_and(|b| cand >= b) {
                continue;
            }
            if ok(a.0, b.0) {
                best = Some(cand);
            }
        }
    }
    best
}

/// Whether a chase exists, with the failing KD and pair when it does not.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChaseExistence {
    pub exists: bool,
    pub kd: Option<String>,
    pub witness: Option<(Fact, Fact)>,
}

/// Decide whether the chase of `db` under a CD set exists. Only IDs that
/// introduce no fresh value (is-a between relationships, typing of entities
/// and attributes) can make the chase fail, so the chase under those IDs and
/// all KDs is built; it is finite.
pub fn chase_exists(db: &Database, cds: &CDSet) -> ChaseExistence {
    let cs = &cds.constraints;
    let keep = |t: &TaggedDep| match &t.dep {
        Dependency::Kd(_) => true,
        Dependency::Id(d) => cs.schema.arity(&d.rhs) == Some(d.rhs_cols.len()),
    };
    let sigma_r = ConstraintSet { schema: cs.schema.clone(), deps: cs.deps.iter().filter(|t| keep(t)).cloned().collect() };
    let r = build_chase(db, &sigma_r, None);
    match r.status {
        ChaseStatus::Failed { kd, pair, .. } => ChaseExistence { exists: false, kd: Some(kd), witness: Some(pair) },
        _ => ChaseExistence { exists: true, kd: None, witness: None },
    }
}

/// [`chase_exists`] for a plain constraint set, which must be a CD set.
pub fn chase_exists_checked(db: &Database, cs: &ConstraintSet) -> Result<ChaseExistence, ChaseError> {
    let cds = crate::relational::recognize_cds(cs).map_err(ChaseError::NotCd)?;
    Ok(chase_exists(db, &cds))
}

/// The level bounds. `stop_level` is the cap passed to the scheduler.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LevelBound {
    pub delta_c: u64,
    pub delta_d: u64,
    pub delta_m: u64,
    pub stop_level: u64,
    pub predicates: u64,
    pub max_arity: u64,
    pub c_d: u64,
    pub query_atoms: u64,
}

/// `δ_C = |R|(1 + |R|·W!)`, `δ_D = δ_C·c_D`, `δ_M = δ_D + δ_C(|q|-1)` and
/// `stop = δ_M + δ_C`. A query with no atoms is treated like one with one.
pub fn compute_level_bound(schema: &RelationalSchema, query_atoms: usize, c_d: u64) -> Result<LevelBound, ChaseError> {
    let r = schema.len() as u64;
    let w = schema.max_arity() as u64;
    let of = |what: &str| ChaseError::Overflow(what.to_string());
    let mut fact = 1u64;
    for i in 2..=w {
        fact = fact.checked_mul(i).ok_or_else(|| of(&format!("{w}!")))?;
    }
    let delta_c = r
        .checked_mul(fact)
        .and_then(|x| x.checked_add(1))
        .and_then(|x| x.checked_mul(r))
        .ok_or_else(|| of("delta_C"))?;
    let delta_d = delta_c.checked_mul(c_d).ok_or_else(|| of("delta_D"))?;
    let q = (query_atoms as u64).saturating_sub(1);
    let delta_m = delta_c.checked_mul(q).and_then(|x| x.checked_add(delta_d)).ok_or_else(|| of("delta_M"))?;
    let stop_level = delta_m.checked_add(delta_c).ok_or_else(|| of("stop level"))?;
    Ok(LevelBound {
        delta_c,
        delta_d,
        delta_m,
        stop_level,
        predicates: r,
        max_arity: w,
        c_d,
        query_atoms: query_atoms as u64,
    })
}

/// Whether two fact sets are equal up to a bijective renaming of fresh
/// constants (non-fresh constants map to themselves).
pub fn isomorphic_up_to_fresh<'a>(
    a: impl IntoIterator<Item = &'a Fact>,
    b: impl IntoIterator<Item = &'a Fact>,
) -> bool {
    let a: Vec<&Fact> = a.into_iter().collect();
    let b: Vec<&Fact> = b.into_iter().collect();
    if a.len() != b.len() {
        return false;
    }
    let bset: std::collections::HashSet<&Fact> = b.iter().copied().collect();
    let mut by_pred: BTreeMap<(&str, usize), Vec<&Fact>> = BTreeMap::new();
    for f in &b {
        by_pred.entry((&f.pred, f.args.len())).or_default().push(f);
    }
    // Ground facts must match exactly; the rest are matched by backtracking.
    let mut open: Vec<&Fact> = Vec::new();
    for f in &a {
        if f.has_fresh() {
            open.push(f);
        } else if !bset.contains(f) {
            return false;
        }
    }
    open.sort_by_key(|f| std::cmp::Reverse(f.args.iter().filter(|c| !c.is_fresh()).count()));
    let mut fwd: BTreeMap<u64, u64> = BTreeMap::new();
    let mut back: BTreeMap<u64, u64> = BTreeMap::new();
    let mut used: std::collections::HashSet<&Fact> = std::collections::HashSet::new();
    fn go<'a>(
        i: usize,
        open: &[&'a Fact],
        by_pred: &BTreeMap<(&str, usize), Vec<&'a Fact>>,
        fwd: &mut BTreeMap<u64, u64>,
        back: &mut BTreeMap<u64, u64>,
        used: &mut std::collections::HashSet<&'a Fact>,
    ) -> bool {
        let Some(f) = open.get(i) else { return true };
        let Some(cands) = by_pred.get(&(&*f.pred, f.args.len())) else { return false };
        for g in cands {
            if used.contains(g) || !g.has_fresh() {
                continue;
            }
            let mut added = Vec::new();
            let mut ok = true;
            for (x, y) in f.args.iter().zip(&g.args) {
                match (x, y) {
                    (Constant::Fresh(p), Constant::Fresh(q)) => match (fwd.get(p), back.get(q)) {
                        (Some(a), _) if a != q => ok = false,
                        (_, Some(b)) if b != p => ok = false,
                        (None, None) => {
                            fwd.insert(*p, *q);
                            back.insert(*q, *p);
                            added.push((*p, *q));
                        }
                        _ => {}
                    },
                    (x, y) => ok = x == y,
                }
                if !ok {
                    break;
                }
            }
            if ok {
                used.insert(g);
                if go(i + 1, open, by_pred, fwd, back, used) {
                    return true;
                }
                used.remove(g);
            }
            for (p, q) in added {
                fwd.remove(&p);
                back.remove(&q);
            }
        }
        false
    }
    go(0, &open, &by_pred, &mut fwd, &mut back, &mut used)
}
