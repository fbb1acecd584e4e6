//! The dummy chase: the IDs applied to one fact per predicate, with fresh
//! values written as Skolem terms.
//!
//! [`DummyKind::Restricted`] runs the ordinary chase under the IDs and renames
//! each fresh value into the Skolem term of the step that created it.
//! [`DummyKind::Oblivious`] applies every ID to every fact, as in the least
//! Herbrand model; there, facts that agree on predicate, annotation and the
//! pattern of shared base constants produce the same generalized rules, so
//! only the first such fact (reached at the lowest level) is expanded.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write;

use crate::chase::{build_chase_with, ChaseError, ChaseOptions, ChaseStatus, ChaseStep, Level};
use crate::datalog::{AnnElem, Atom, GroundTerm, Pred, Rule, Term};
use crate::relational::{ConstraintSet, Constant, Database, Dependency, Fact, Sym};

use super::{encode_ids, HeadArg, RewriteError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DummyNode {
    pub pred: Sym,
    pub args: Vec<GroundTerm>,
    pub level: Level,
}

impl DummyNode {
    pub fn annotated(&self) -> (Vec<AnnElem>, Vec<Constant>) {
        annotate(&self.args)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DummyArc {
    pub parent: usize,
    pub child: usize,
    pub dep: String,
    /// The arc with annotated predicates and constants generalized to variables.
    pub rule: Rule,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DummyChase {
    pub database: Database,
    pub nodes: Vec<DummyNode>,
    pub arcs: Vec<DummyArc>,
    pub max_level: Level,
    /// Some node at `max_level` still had an applicable ID.
    pub truncated: bool,
}

/// The annotation of a tuple of ground terms and their innermost constants.
pub fn annotate(args: &[GroundTerm]) -> (Vec<AnnElem>, Vec<Constant>) {
    let mut anns = Vec::with_capacity(args.len());
    let mut bases = Vec::with_capacity(args.len());
    for a in args {
        let mut chain: Vec<Sym> = Vec::new();
        let mut t = a;
        loop {
            match t {
                GroundTerm::Const(c) => {
                    bases.push(c.clone());
                    break;
                }
                GroundTerm::App(f, inner) => {
                    chain.push(f.clone());
                    t = inner;
                }
            }
        }
        anns.push(AnnElem(chain.into()));
    }
    (anns, bases)
}

type StateKey = (Sym, Vec<AnnElem>, Vec<usize>);

fn pattern(bases: &[Constant]) -> Vec<usize> {
    let mut seen: Vec<&Constant> = Vec::new();
    bases
        .iter()
        .map(|b| match seen.iter().position(|s| *s == b) {
            Some(i) => i,
            None => {
                seen.push(b);
                seen.len() - 1
            }
        })
        .collect()
}

fn generalize(parent: (&Sym, &[GroundTerm]), child: (&Sym, &[GroundTerm])) -> Rule {
    let (pa, pb) = annotate(parent.1);
    let (ca, cb) = annotate(child.1);
    let mut seen: Vec<&Constant> = Vec::new();
    for b in pb.iter().chain(&cb) {
        if !seen.contains(&b) {
            seen.push(b);
        }
    }
    let name = |b: &Constant| {
        let i = seen.iter().position(|s| *s == b).unwrap();
        if seen.len() == 1 {
            Term::var("X")
        } else {
            Term::var(&format!("X{}", i + 1))
        }
    };
    let body = Atom::new(Pred { name: parent.0.clone(), ann: Some(pa) }, pb.iter().map(name).collect());
    let head = Atom::new(Pred { name: child.0.clone(), ann: Some(ca) }, cb.iter().map(name).collect());
    Rule::new(head, vec![body])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DummyKind {
    #[default]
    Restricted,
    Oblivious,
}

fn dummy_database(cs: &ConstraintSet) -> Database {
    let mut db = Database::new();
    let mut next = 0usize;
    for (p, n) in cs.schema.iter() {
        let args = (0..n)
            .map(|_| {
                next += 1;
                Constant::named(&format!("c{next}"))
            })
            .collect();
        db.insert(Fact { pred: p.clone(), args });
    }
    db
}

/// Chase the dummy database under the IDs of `cs` up to `max_level`.
pub fn build_dummy_chase(cs: &ConstraintSet, max_level: Level, max_facts: usize) -> Result<DummyChase, RewriteError> {
    build_dummy_chase_with(cs, max_level, max_facts, DummyKind::Restricted)
}

pub fn build_dummy_chase_with(
    cs: &ConstraintSet,
    max_level: Level,
    max_facts: usize,
    kind: DummyKind,
) -> Result<DummyChase, RewriteError> {
    match kind {
        DummyKind::Restricted => restricted(cs, max_level, max_facts),
        DummyKind::Oblivious => oblivious(cs, max_level, max_facts),
    }
}

fn restricted(cs: &ConstraintSet, max_level: Level, max_facts: usize) -> Result<DummyChase, RewriteError> {
    let ids = encode_ids(cs)?;
    let sigma_i = ConstraintSet {
        schema: cs.schema.clone(),
        deps: cs.deps.iter().filter(|t| matches!(t.dep, Dependency::Id(_))).cloned().collect(),
    };
    let database = dummy_database(cs);
    let opts = ChaseOptions { max_level: Some(max_level), max_facts: Some(max_facts), max_steps: None };
    let r = build_chase_with(&database, &sigma_i, opts).map_err(|e| match e {
        ChaseError::ResourceLimit { limit, .. } => RewriteError::ResourceLimit { what: "dummy chase facts", limit },
        e => RewriteError::Chase(e),
    })?;
    let mut skolem: HashMap<Constant, GroundTerm> = HashMap::new();
    let term = |skolem: &HashMap<Constant, GroundTerm>, c: &Constant| {
        skolem.get(c).cloned().unwrap_or_else(|| GroundTerm::Const(c.clone()))
    };
    let mut nodes: Vec<DummyNode> = Vec::new();
    let mut index: HashMap<Fact, usize> = HashMap::new();
    for f in database.iter() {
        index.insert(f.clone(), nodes.len());
        nodes.push(DummyNode { pred: f.pred.clone(), args: f.args.iter().cloned().map(GroundTerm::Const).collect(), level: 0 });
    }
    let mut arcs = Vec::new();
    for step in &r.steps {
        let ChaseStep::Id { dep, parent, child, level } = step else { continue };
        let e = ids.iter().find(|e| &e.label == dep).expect("steps name IDs of the set");
        for (h, c) in e.head.iter().zip(&child.args) {
            if let HeadArg::Skolem(f, k) = h {
                let t = GroundTerm::App(f.clone(), Box::new(term(&skolem, &parent.args[*k])));
                skolem.insert(c.clone(), t);
            }
        }
        let pargs: Vec<GroundTerm> = parent.args.iter().map(|c| term(&skolem, c)).collect();
        let cargs: Vec<GroundTerm> = child.args.iter().map(|c| term(&skolem, c)).collect();
        let rule = generalize((&parent.pred, &pargs), (&child.pred, &cargs));
        let p = index[parent];
        let c = nodes.len();
        index.insert(child.clone(), c);
        nodes.push(DummyNode { pred: child.pred.clone(), args: cargs, level: *level });
        arcs.push(DummyArc { parent: p, child: c, dep: dep.clone(), rule });
    }
    let truncated = matches!(r.status, ChaseStatus::Truncated { .. });
    Ok(DummyChase { database, nodes, arcs, max_level, truncated })
}

fn oblivious(cs: &ConstraintSet, max_level: Level, max_facts: usize) -> Result<DummyChase, RewriteError> {
    let ids = encode_ids(cs)?;
    let mut database = Database::new();
    let mut nodes: Vec<DummyNode> = Vec::new();
    let mut index: HashMap<StateKey, usize> = HashMap::new();
    let mut queue = VecDeque::new();
    let mut next = 0usize;
    for (p, n) in cs.schema.iter() {
        let consts: Vec<Constant> = (0..n)
            .map(|_| {
                next += 1;
                Constant::named(&format!("c{next}"))
            })
            .collect();
        database.insert(Fact { pred: p.clone(), args: consts.clone() });
        let args: Vec<GroundTerm> = consts.into_iter().map(GroundTerm::Const).collect();
        let (ann, bases) = annotate(&args);
        index.insert((p.clone(), ann, pattern(&bases)), nodes.len());
        queue.push_back(nodes.len());
        nodes.push(DummyNode { pred: p.clone(), args, level: 0 });
    }
    let mut arcs = Vec::new();
    let mut truncated = false;
    while let Some(i) = queue.pop_front() {
        let (pred, args, level) = (nodes[i].pred.clone(), nodes[i].args.clone(), nodes[i].level);
        let applicable = ids.iter().filter(|e| e.lhs == pred);
        if level >= max_level {
            truncated |= applicable.count() > 0;
            continue;
        }
        for e in applicable {
            let child: Vec<GroundTerm> = e
                .head
                .iter()
                .map(|h| match h {
                    HeadArg::Copy(k) => args[*k].clone(),
                    HeadArg::Skolem(f, k) => GroundTerm::App(f.clone(), Box::new(args[*k].clone())),
                })
                .collect();
            let rule = generalize((&pred, &args), (&e.rhs, &child));
            let (ann, bases) = annotate(&child);
            let key = (e.rhs.clone(), ann, pattern(&bases));
            let c = match index.get(&key) {
                Some(&c) => c,
                None => {
                    if nodes.len() >= max_facts {
                        return Err(RewriteError::ResourceLimit { what: "dummy chase facts", limit: max_facts });
                    }
                    index.insert(key, nodes.len());
                    queue.push_back(nodes.len());
                    nodes.push(DummyNode { pred: e.rhs.clone(), args: child, level: level + 1 });
                    nodes.len() - 1
                }
            };
            arcs.push(DummyArc { parent: i, child: c, dep: e.label.clone(), rule });
        }
    }
    Ok(DummyChase { database, nodes, arcs, max_level, truncated })
}

/// One rule per arc, duplicates dropped, in arc order.
pub fn build_pi_dc(dc: &DummyChase) -> Vec<Rule> {
    let mut seen = std::collections::HashSet::new();
    dc.arcs.iter().filter(|a| seen.insert(a.rule.clone())).map(|a| a.rule.clone()).collect()
}

impl DummyChase {
    pub fn node_label(&self, i: usize) -> String {
        let n = &self.nodes[i];
        let args: Vec<String> = n.args.iter().map(|a| a.to_string()).collect();
        format!("{}({})", n.pred, args.join(","))
    }

    /// Every annotation element that occurs in a node.
    pub fn annotation_elements(&self) -> std::collections::BTreeSet<AnnElem> {
        self.nodes.iter().flat_map(|n| n.annotated().0).collect()
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph dummy_chase {\n  node [shape=box];\n");
        for (i, n) in self.nodes.iter().enumerate() {
            let _ = writeln!(out, "  n{i} [label=\"{} @{}\"];", self.node_label(i).replace('"', "\\\""), n.level);
        }
        for a in &self.arcs {
            let _ = writeln!(out, "  n{} -> n{} [label=\"{}\"];", a.parent, a.child, a.dep);
        }
        out.push_str("}\n");
        out
    }
}
