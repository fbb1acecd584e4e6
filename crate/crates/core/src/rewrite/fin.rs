//! The function-free program `Π^fin`.
//!
//! Annotated variants of the rules of `Π^KD ∪ Π^eq ∪ q_eq` are found by
//! evaluating an abstract program whose constants are annotation elements:
//! every rule becomes a rule over annotations (same term, same annotation;
//! constants annotated `*`), `Π^DC` and `Π^base` become ground rules, and the
//! body matches of each abstract rule are exactly its variants whose body
//! predicates can ever hold.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use crate::datalog::{evaluate, AnnElem, Atom, DatalogError, EvalOptions, GroundTerm, Pred, Program, Rule, Term};
use crate::relational::{ConjunctiveQuery, ConstraintSet, Constant, Database};

use super::{build_pi_base, build_pi_eq, build_pi_kd, maquillage, query_rule, RewriteError, EQ};

struct Domain {
    elems: Vec<AnnElem>,
    ids: BTreeMap<AnnElem, usize>,
}

impl Domain {
    fn new(pi_dc: &[Rule]) -> Self {
        let mut set: BTreeSet<AnnElem> = BTreeSet::new();
        set.insert(AnnElem::bullet());
        for r in pi_dc {
            for a in std::iter::once(&r.head).chain(&r.body) {
                if let Some(ann) = &a.pred.ann {
                    set.extend(ann.iter().cloned());
                }
            }
        }
        let elems: Vec<AnnElem> = set.into_iter().collect();
        let ids = elems.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        Domain { elems, ids }
    }

    fn constant(&self, e: &AnnElem) -> Term {
        Term::Const(Constant::named(&self.ids[e].to_string()))
    }

    fn decode(&self, g: &GroundTerm) -> AnnElem {
        let GroundTerm::Const(Constant::NonFresh(s)) = g else { unreachable!("annotation constants are plain") };
        self.elems[s.parse::<usize>().unwrap()].clone()
    }
}

fn rule_vars(r: &Rule) -> Vec<Term> {
    let mut out: Vec<Term> = Vec::new();
    for a in r.body.iter().chain(std::iter::once(&r.head)) {
        for t in &a.args {
            if matches!(t, Term::Var(_)) && !out.contains(t) {
                out.push(t.clone());
            }
        }
    }
    out
}

fn abstract_atom(a: &Atom, bullet: &Term) -> Atom {
    let args = a
        .args
        .iter()
        .map(|t| match t {
            Term::Var(_) => t.clone(),
            _ => bullet.clone(),
        })
        .collect();
    Atom::new(Pred::plain(&a.pred.name), args)
}

fn annotated_atom(a: &Atom, ann: &BTreeMap<Term, AnnElem>) -> Atom {
    let elems = a.args.iter().map(|t| ann.get(t).cloned().unwrap_or_else(AnnElem::bullet)).collect();
    Atom::new(Pred { name: a.pred.name.clone(), ann: Some(elems) }, a.args.clone())
}

fn ground_abstract(a: &Atom, d: &Domain) -> Atom {
    let ann = a.pred.ann.as_ref().expect("dummy chase rules are annotated");
    Atom::new(Pred::plain(&a.pred.name), ann.iter().map(|e| d.constant(e)).collect())
}

/// Which annotated variants go into `Π^fin`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Variants {
    /// Variants whose body predicates can hold for some database.
    #[default]
    Derivable,
    /// Every assignment of annotation elements to the variables of a rule.
    All,
}

/// `Π^DC ∪ Π^base` plus the derivable annotated variants of
/// `Π^KD ∪ Π^eq ∪ q_eq`; the query predicate is `q@[*,...,*]`. At most
/// `max_rules` rules are generated.
pub fn build_pi_fin(
    q: &ConjunctiveQuery,
    cs: &ConstraintSet,
    pi_dc: &[Rule],
    max_rules: usize,
) -> Result<Program, RewriteError> {
    build_pi_fin_with(q, cs, pi_dc, max_rules, Variants::Derivable)
}

pub fn build_pi_fin_with(
    q: &ConjunctiveQuery,
    cs: &ConstraintSet,
    pi_dc: &[Rule],
    max_rules: usize,
    mode: Variants,
) -> Result<Program, RewriteError> {
    let q_rule = query_rule(&maquillage(q));
    let mut sources = build_pi_kd(cs);
    sources.extend(build_pi_eq(&cs.schema));
    sources.push(q_rule.clone());

    let d = Domain::new(pi_dc);
    let bullet = d.constant(&AnnElem::bullet());
    let mut abs = Vec::new();
    for (p, n) in cs.schema.iter().map(|(p, n)| (p.to_string(), n)).chain(std::iter::once((EQ.to_string(), 2))) {
        abs.push(Rule::new(Atom::new(Pred::plain(&p), vec![bullet.clone(); n]), Vec::new()));
    }
    for r in pi_dc {
        abs.push(Rule::new(ground_abstract(&r.head, &d), r.body.iter().map(|a| ground_abstract(a, &d)).collect()));
    }
    let domain = Pred::plain("#annotation");
    for e in &d.elems {
        abs.push(Rule::new(Atom::new(domain.clone(), vec![d.constant(e)]), Vec::new()));
    }
    let mut witnesses = Vec::new();
    for (i, r) in sources.iter().enumerate() {
        let body: Vec<Atom> = r.body.iter().map(|a| abstract_atom(a, &bullet)).collect();
        abs.push(Rule::new(abstract_atom(&r.head, &bullet), body.clone()));
        let w = Pred::plain(&format!("#variant{i}"));
        let vars = rule_vars(r);
        let wbody = match mode {
            Variants::Derivable => body,
            Variants::All => vars.iter().map(|v| Atom::new(domain.clone(), vec![v.clone()])).collect(),
        };
        abs.push(Rule::new(Atom::new(w.clone(), vars), wbody));
        witnesses.push(w);
    }
    let opts = EvalOptions { depth_cap: None, max_facts: Some(max_rules) };
    let model = evaluate(&Program::new(abs, None), &Database::new(), &opts).map_err(|e| match e {
        DatalogError::ResourceLimit { limit, .. } => RewriteError::ResourceLimit { what: "annotated rule variants", limit },
        e => RewriteError::Datalog(e),
    })?;

    let mut rules: Vec<Rule> = build_pi_base(&cs.schema);
    rules.extend(pi_dc.iter().cloned());
    for (r, w) in sources.iter().zip(&witnesses) {
        let vars = rule_vars(r);
        let is_query = r == &q_rule;
        for t in model.tuples(w) {
            let ann: BTreeMap<Term, AnnElem> = vars.iter().cloned().zip(t.iter().map(|g| d.decode(g))).collect();
            let head = annotated_atom(&r.head, &ann);
            if is_query && mode == Variants::Derivable && !head.pred.ann.as_ref().unwrap().iter().all(AnnElem::is_bullet) {
                continue;
            }
            rules.push(Rule::new(head, r.body.iter().map(|a| annotated_atom(a, &ann)).collect()));
        }
    }
    let mut seen = HashSet::new();
    rules.retain(|r| seen.insert(r.clone()));
    if rules.len() > max_rules {
        return Err(RewriteError::ResourceLimit { what: "annotated rule variants", limit: max_rules });
    }
    Ok(Program::new(rules, Some(Pred::all_bullets(&q.name, q.head.len()))))
}

/// Violations of the structural invariants of `Π^fin`: function symbols,
/// annotation elements absent from `Π^DC`, and variants giving one term two
/// annotations.
pub fn check_pi_fin(fin: &Program, pi_dc: &[Rule]) -> Vec<String> {
    let allowed = Domain::new(pi_dc).ids;
    let dc: HashSet<&Rule> = pi_dc.iter().collect();
    let mut out = Vec::new();
    for r in &fin.rules {
        if !r.is_function_free() {
            out.push(format!("function symbol in {r}"));
        }
        if !r.is_range_restricted() {
            out.push(format!("not range-restricted: {r}"));
        }
        for a in std::iter::once(&r.head).chain(&r.body) {
            for e in a.pred.ann.iter().flatten() {
                if !allowed.contains_key(e) {
                    out.push(format!("annotation {e} of {r} does not occur in the dummy chase rules"));
                }
            }
        }
        let base = r.body.len() == 1 && r.body[0].pred.ann.is_none();
        if dc.contains(r) || base {
            continue;
        }
        let mut seen: BTreeMap<&Term, &AnnElem> = BTreeMap::new();
        for a in std::iter::once(&r.head).chain(&r.body) {
            let Some(ann) = &a.pred.ann else {
                out.push(format!("unannotated atom {a} in {r}"));
                continue;
            };
            for (t, e) in a.args.iter().zip(ann) {
                match t {
                    Term::Var(_) => {
                        if let Some(prev) = seen.insert(t, e) {
                            if prev != e {
                                out.push(format!("{t} annotated both {prev} and {e} in {r}"));
                            }
                        }
                    }
                    _ if !e.is_bullet() => out.push(format!("constant {t} annotated {e} in {r}")),
                    _ => {}
                }
            }
        }
    }
    out
}
