//! Compilation of a conjunctive query and a CD set into function-free Datalog.
//!
//! The stages are exposed one by one so that each can be inspected:
//! `Π^eq`, `Π^KD`, `Π^ID` (with Skolem terms), the query `q_eq`, the dummy
//! chase and its rules `Π^DC`, the base annotation rules `Π^base`, and the
//! final program `Π^fin` whose answers under `q@[*,...,*]` are the certain
//! answers.

mod dummy;
mod fin;

use std::collections::HashSet;

use thiserror::Error;

use crate::chase::{compute_level_bound, ChaseError, Level, LevelBound};
use crate::datalog::{Atom, DatalogError, Pred, Program, Rule, Term};
use crate::relational::{
    CDSet, ConjunctiveQuery, ConstraintSet, InclusionDependency, QAtom, QTerm, RelError, RelationalSchema, Sym,
};

pub use dummy::{build_dummy_chase, build_dummy_chase_with, build_pi_dc, DummyArc, DummyChase, DummyKind, DummyNode};
pub use fin::{build_pi_fin, build_pi_fin_with, check_pi_fin, Variants};

pub const EQ: &str = "eq";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RewriteError {
    #[error("{0}")]
    Unsupported(String),
    #[error("name clash: {0}")]
    NameClash(String),
    #[error(transparent)]
    Query(#[from] RelError),
    #[error(transparent)]
    Chase(#[from] ChaseError),
    #[error(transparent)]
    Datalog(#[from] DatalogError),
    #[error("resource limit exceeded: more than {limit} {what}")]
    ResourceLimit { what: &'static str, limit: usize },
}

#[derive(Debug, Clone)]
pub struct RewriteOptions {
    /// Depth of the dummy chase; `δ_M` when unset.
    pub max_level: Option<Level>,
    pub max_dummy_facts: usize,
    pub max_rules: usize,
    pub variants: Variants,
    pub dummy: DummyKind,
}

impl Default for RewriteOptions {
    fn default() -> Self {
        RewriteOptions {
            max_level: None,
            max_dummy_facts: 200_000,
            max_rules: 500_000,
            variants: Variants::Derivable,
            dummy: DummyKind::Restricted,
        }
    }
}

/// One argument of the head of an encoded ID.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum HeadArg {
    /// The body argument at this 0-based position.
    Copy(usize),
    /// A Skolem function applied to the body argument at this position.
    Skolem(Sym, usize),
}

#[derive(Debug, Clone)]
pub(crate) struct IdEncoding {
    pub label: String,
    pub lhs: Sym,
    pub lhs_arity: usize,
    pub rhs: Sym,
    pub head: Vec<HeadArg>,
}

pub fn skolem_name(label: &str, pos: usize) -> String {
    format!("f_{label}_{pos}")
}

fn encode_id(label: &str, d: &InclusionDependency, schema: &RelationalSchema) -> Result<IdEncoding, RewriteError> {
    let la = schema.arity(&d.lhs).unwrap_or(0);
    let ra = schema.arity(&d.rhs).unwrap_or(0);
    let mut head: Vec<Option<HeadArg>> = vec![None; ra];
    for (l, r) in d.lhs_cols.iter().zip(&d.rhs_cols) {
        head[r - 1] = Some(HeadArg::Copy(l - 1));
    }
    let uncovered = head.iter().any(Option::is_none);
    if uncovered && d.lhs_cols.len() != 1 {
        return Err(RewriteError::Unsupported(format!(
            "`{d}` ({label}) would need a Skolem function of {} arguments; only unary function symbols are supported",
            d.lhs_cols.len()
        )));
    }
    let head = head
        .into_iter()
        .enumerate()
        .map(|(j, h)| h.unwrap_or_else(|| HeadArg::Skolem(skolem_name(label, j + 1).into(), d.lhs_cols[0] - 1)))
        .collect();
    Ok(IdEncoding { label: label.to_string(), lhs: d.lhs.clone(), lhs_arity: la, rhs: d.rhs.clone(), head })
}

pub(crate) fn encode_ids(cs: &ConstraintSet) -> Result<Vec<IdEncoding>, RewriteError> {
    cs.ids().map(|(t, d)| encode_id(&t.label, d, &cs.schema)).collect()
}

fn vars(prefix: &str, n: usize) -> Vec<Term> {
    if n == 1 && prefix == "X" {
        return vec![Term::var("X")];
    }
    (1..=n).map(|i| Term::var(&format!("{prefix}{i}"))).collect()
}

fn eq_atom(a: Term, b: Term) -> Atom {
    Atom::new(Pred::plain(EQ), vec![a, b])
}

/// Reflexivity for every position of every predicate, then symmetry and
/// transitivity.
pub fn build_pi_eq(schema: &RelationalSchema) -> Vec<Rule> {
    let mut out = Vec::new();
    for (p, n) in schema.iter() {
        let xs = vars("X", n);
        for x in &xs {
            out.push(Rule::new(eq_atom(x.clone(), x.clone()), vec![Atom::new(Pred::plain(p), xs.clone())]));
        }
    }
    let (x, y, z) = (Term::var("X"), Term::var("Y"), Term::var("Z"));
    out.push(Rule::new(eq_atom(y.clone(), x.clone()), vec![eq_atom(x.clone(), y.clone())]));
    out.push(Rule::new(eq_atom(x.clone(), z.clone()), vec![eq_atom(x, y.clone()), eq_atom(y, z)]));
    out
}

/// For every key and every position outside it, equal keys force equal values.
pub fn build_pi_kd(cs: &ConstraintSet) -> Vec<Rule> {
    let mut out = Vec::new();
    for (_, kd) in cs.kds() {
        let n = cs.schema.arity(&kd.pred).unwrap_or(0);
        let xs: Vec<Term> = (1..=n).map(|i| Term::var(&format!("X{i}"))).collect();
        let ys: Vec<Term> = (1..=n).map(|i| Term::var(&format!("Y{i}"))).collect();
        let mut body = vec![Atom::new(Pred::plain(&kd.pred), xs.clone()), Atom::new(Pred::plain(&kd.pred), ys.clone())];
        for &k in &kd.key {
            body.push(eq_atom(xs[k - 1].clone(), ys[k - 1].clone()));
        }
        for i in (1..=n).filter(|i| !kd.key.contains(i)) {
            out.push(Rule::new(eq_atom(xs[i - 1].clone(), ys[i - 1].clone()), body.clone()));
        }
    }
    out
}

/// One rule per ID; positions of the right side not fed by the left side get
/// a Skolem term `f_<label>_<position>(X)`.
pub fn build_pi_id(cs: &ConstraintSet) -> Result<Vec<Rule>, RewriteError> {
    let mut out = Vec::new();
    for e in encode_ids(cs)? {
        let xs = if e.lhs_arity == 2 { vec![Term::var("X"), Term::var("Y")] } else { vars("X", e.lhs_arity) };
        let head = e
            .head
            .iter()
            .map(|h| match h {
                HeadArg::Copy(i) => xs[*i].clone(),
                HeadArg::Skolem(f, i) => Term::App(f.clone(), Box::new(xs[*i].clone())),
            })
            .collect();
        out.push(Rule::new(Atom::new(Pred::plain(&e.rhs), head), vec![Atom::new(Pred::plain(&e.lhs), xs)]));
    }
    Ok(out)
}

/// `r@[*,...,*](X1,...,Xn) :- r(X1,...,Xn)` for every predicate and for `eq`.
pub fn build_pi_base(schema: &RelationalSchema) -> Vec<Rule> {
    schema
        .iter()
        .map(|(p, n)| (p.to_string(), n))
        .chain(std::iter::once((EQ.to_string(), 2)))
        .map(|(p, n)| {
            let xs = vars("X", n);
            Rule::new(Atom::new(Pred::all_bullets(&p, n), xs.clone()), vec![Atom::new(Pred::plain(&p), xs)])
        })
        .collect()
}

fn fresh_names(taken: &HashSet<String>) -> impl Iterator<Item = String> + '_ {
    let letters = ('A'..='Z').map(|c| c.to_string());
    let numbered = (1..).map(|i| format!("V{i}"));
    letters.chain(numbered).filter(move |v| !taken.contains(v))
}

/// Replace every body term `t` by a new variable `A` and add `eq(A, t)`.
pub fn maquillage(q: &ConjunctiveQuery) -> ConjunctiveQuery {
    let taken: HashSet<String> = q.vars().iter().map(|v| v.to_string()).chain(q.head.iter().map(|v| v.to_string())).collect();
    let mut names = fresh_names(&taken);
    let mut body = Vec::new();
    let mut eqs = Vec::new();
    for a in &q.body {
        let mut terms = Vec::new();
        for t in &a.terms {
            let v: Sym = names.next().unwrap().as_str().into();
            terms.push(QTerm::Var(v.clone()));
            eqs.push(QAtom { pred: EQ.into(), terms: vec![QTerm::Var(v), t.clone()] });
        }
        body.push(QAtom { pred: a.pred.clone(), terms });
    }
    body.extend(eqs);
    ConjunctiveQuery { name: q.name.clone(), head: q.head.clone(), body }
}

fn qterm(t: &QTerm) -> Term {
    match t {
        QTerm::Var(v) => Term::Var(v.clone()),
        QTerm::Const(c) => Term::Const(c.clone()),
    }
}

/// A query as a Datalog rule over plain predicates.
pub fn query_rule(q: &ConjunctiveQuery) -> Rule {
    let head = Atom::new(Pred::plain(&q.name), q.head.iter().map(|v| Term::Var(v.clone())).collect());
    let body = q.body.iter().map(|a| Atom::new(Pred::plain(&a.pred), a.terms.iter().map(qterm).collect())).collect();
    Rule::new(head, body)
}

fn check_names(q: &ConjunctiveQuery, schema: &RelationalSchema) -> Result<(), RewriteError> {
    q.check(Some(schema))?;
    if schema.contains(EQ) {
        return Err(RewriteError::NameClash(format!("the schema has a predicate named `{EQ}`")));
    }
    if &*q.name == EQ {
        return Err(RewriteError::NameClash(format!("the query cannot be named `{EQ}`")));
    }
    Ok(())
}

/// `q_eq ∪ Π^eq ∪ Π^ID ∪ Π^KD` with Skolem terms, queried on plain `q`.
pub fn build_pi_skolem(q: &ConjunctiveQuery, cs: &ConstraintSet) -> Result<Program, RewriteError> {
    check_names(q, &cs.schema)?;
    let mut rules = build_pi_id(cs)?;
    rules.extend(build_pi_kd(cs));
    rules.extend(build_pi_eq(&cs.schema));
    rules.push(query_rule(&maquillage(q)));
    Ok(Program::new(rules, Some(Pred::plain(&q.name))))
}

/// Every stage of one compilation.
#[derive(Debug, Clone)]
pub struct RewriteBundle {
    pub pi_eq: Vec<Rule>,
    pub pi_kd: Vec<Rule>,
    pub pi_id: Vec<Rule>,
    pub q_eq: ConjunctiveQuery,
    pub dummy_chase: DummyChase,
    pub pi_dc: Vec<Rule>,
    pub pi_base: Vec<Rule>,
    pub pi_fin: Program,
    pub bound: LevelBound,
    pub depth: Level,
}

impl RewriteBundle {
    /// The intermediate stages as program text, one section per stage.
    pub fn stages_text(&self) -> String {
        let mut out = String::new();
        let mut section = |name: &str, rules: &[Rule]| {
            out.push_str(&format!("# {name}\n"));
            for r in rules {
                out.push_str(&format!("{r}\n"));
            }
            out.push('\n');
        };
        section("pi_eq", &self.pi_eq);
        section("pi_kd", &self.pi_kd);
        section("pi_id", &self.pi_id);
        section("q_eq", &[query_rule(&self.q_eq)]);
        section("pi_dc", &self.pi_dc);
        section("pi_base", &self.pi_base);
        out
    }
}

/// Compile `q` under `cds` for databases whose join graph components have at
/// most `c_d` facts.
pub fn rewrite(q: &ConjunctiveQuery, cds: &CDSet, c_d: u64, opts: &RewriteOptions) -> Result<RewriteBundle, RewriteError> {
    let cs = &cds.constraints;
    check_names(q, &cs.schema)?;
    let pi_id = build_pi_id(cs)?;
    let bound = compute_level_bound(&cs.schema, q.body.len(), c_d)?;
    let depth = opts.max_level.unwrap_or(bound.delta_m);
    let dummy_chase = build_dummy_chase_with(cs, depth, opts.max_dummy_facts, opts.dummy)?;
    let pi_dc = build_pi_dc(&dummy_chase);
    let pi_fin = build_pi_fin_with(q, cs, &pi_dc, opts.max_rules, opts.variants)?;
    Ok(RewriteBundle {
        pi_eq: build_pi_eq(&cs.schema),
        pi_kd: build_pi_kd(cs),
        pi_id,
        q_eq: maquillage(q),
        dummy_chase,
        pi_dc,
        pi_base: build_pi_base(&cs.schema),
        pi_fin,
        bound,
        depth,
    })
}
