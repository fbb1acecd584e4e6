//! Bottom-up evaluation: semi-naive rounds over interned ground terms.

use std::collections::{BTreeSet, HashMap, HashSet};

use crate::relational::{Constant, Database, Sym};

use super::{DatalogError, GroundTerm, Pred, Program, Rule, Term};

const UNBOUND: u32 = u32::MAX;

#[derive(Debug, Clone, Default)]
pub struct EvalOptions {
    /// Facts holding a term nested deeper than this are not derived.
    pub depth_cap: Option<usize>,
    /// Caps derived facts, and join probes at 256 per allowed fact.
    pub max_facts: Option<usize>,
}

#[derive(Debug, Clone)]
enum Node {
    Const(Constant),
    App(Sym, u32),
}

#[derive(Debug, Default, Clone)]
struct TermStore {
    nodes: Vec<(Node, u32)>,
    consts: HashMap<Constant, u32>,
    apps: HashMap<(Sym, u32), u32>,
}

impl TermStore {
    fn constant(&mut self, c: &Constant) -> u32 {
        if let Some(&id) = self.consts.get(c) {
            return id;
        }
        let id = self.nodes.len() as u32;
        self.nodes.push((Node::Const(c.clone()), 0));
        self.consts.insert(c.clone(), id);
        id
    }

    fn app(&mut self, f: &Sym, arg: u32) -> u32 {
        if let Some(&id) = self.apps.get(&(f.clone(), arg)) {
            return id;
        }
        let id = self.nodes.len() as u32;
        let d = self.nodes[arg as usize].1 + 1;
        self.nodes.push((Node::App(f.clone(), arg), d));
        self.apps.insert((f.clone(), arg), id);
        id
    }

    fn find_app(&self, f: &Sym, arg: u32) -> Option<u32> {
        self.apps.get(&(f.clone(), arg)).copied()
    }

    fn depth(&self, id: u32) -> usize {
        self.nodes[id as usize].1 as usize
    }

    fn decode(&self, id: u32) -> GroundTerm {
        match &self.nodes[id as usize].0 {
            Node::Const(c) => GroundTerm::Const(c.clone()),
            Node::App(f, a) => GroundTerm::App(f.clone(), Box::new(self.decode(*a))),
        }
    }

    fn encode(&self, t: &GroundTerm) -> Option<u32> {
        match t {
            GroundTerm::Const(c) => self.consts.get(c).copied(),
            GroundTerm::App(f, a) => self.find_app(f, self.encode(a)?),
        }
    }
}

#[derive(Debug, Default, Clone)]
struct Index {
    map: HashMap<Vec<u32>, Vec<u32>>,
    covered: usize,
}

#[derive(Debug, Clone)]
struct Relation {
    arity: usize,
    rows: Vec<u32>,
    set: HashSet<Box<[u32]>>,
    indexes: HashMap<Vec<usize>, Index>,
    delta_start: usize,
    delta_end: usize,
}

impl Relation {
    fn new(arity: usize) -> Self {
        Relation { arity, rows: Vec::new(), set: HashSet::new(), indexes: HashMap::new(), delta_start: 0, delta_end: 0 }
    }

    fn len(&self) -> usize {
        if self.arity == 0 {
            self.set.len()
        } else {
            self.rows.len() / self.arity
        }
    }

    fn row(&self, i: usize) -> &[u32] {
        &self.rows[i * self.arity..(i + 1) * self.arity]
    }

    fn insert(&mut self, t: &[u32]) -> bool {
        if self.set.contains(t) {
            return false;
        }
        self.set.insert(t.into());
        self.rows.extend_from_slice(t);
        true
    }

    fn refresh_indexes(&mut self) {
        let n = self.len();
        for (cols, ix) in self.indexes.iter_mut() {
            for i in ix.covered..n {
                let r = &self.rows[i * self.arity..(i + 1) * self.arity];
                let key: Vec<u32> = cols.iter().map(|&c| r[c]).collect();
                ix.map.entry(key).or_default().push(i as u32);
            }
            ix.covered = n;
        }
    }
}

#[derive(Debug, Clone)]
enum CTerm {
    Var(usize),
    Const(u32),
    App(Sym, Box<CTerm>),
}

impl CTerm {
    fn vars(&self, out: &mut Vec<usize>) {
        match self {
            CTerm::Var(v) => out.push(*v),
            CTerm::Const(_) => {}
            CTerm::App(_, t) => t.vars(out),
        }
    }

    fn determined(&self, bound: &[bool]) -> bool {
        match self {
            CTerm::Var(v) => bound[*v],
            CTerm::Const(_) => true,
            CTerm::App(_, t) => t.determined(bound),
        }
    }

    fn eval(&self, store: &TermStore, b: &[u32]) -> Option<u32> {
        match self {
            CTerm::Var(v) => Some(b[*v]),
            CTerm::Const(c) => Some(*c),
            CTerm::App(f, t) => store.find_app(f, t.eval(store, b)?),
        }
    }

    fn unify(&self, store: &TermStore, v: u32, b: &mut [u32], trail: &mut Vec<usize>) -> bool {
        match self {
            CTerm::Var(s) => {
                if b[*s] == UNBOUND {
                    b[*s] = v;
                    trail.push(*s);
                    true
                } else {
                    b[*s] == v
                }
            }
            CTerm::Const(c) => *c == v,
            CTerm::App(f, t) => match &store.nodes[v as usize].0 {
                Node::App(g, a) if g == f => t.unify(store, *a, b, trail),
                _ => false,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Range {
    Old,
    Delta,
    All,
}

#[derive(Debug, Clone)]
struct Step {
    rel: usize,
    range: Range,
    key_cols: Vec<usize>,
    key_terms: Vec<CTerm>,
    rest: Vec<(usize, CTerm)>,
}

#[derive(Debug, Clone)]
struct CRule {
    head_rel: usize,
    head: Vec<CTerm>,
    nvars: usize,
    plans: Vec<Vec<Step>>,
}

/// Join probes allowed per fact of [`EvalOptions::max_facts`].
const PROBES_PER_FACT: usize = 256;

struct Engine {
    store: TermStore,
    rels: Vec<Relation>,
    rel_of: HashMap<Pred, usize>,
    preds: Vec<Pred>,
    rules: Vec<CRule>,
    opts: EvalOptions,
    total: usize,
    probes: usize,
}

/// The least model of a program over a database.
#[derive(Debug, Clone)]
pub struct Model {
    store: TermStore,
    rels: Vec<Relation>,
    rel_of: HashMap<Pred, usize>,
    preds: Vec<Pred>,
}

impl Model {
    pub fn len(&self) -> usize {
        self.rels.iter().map(Relation::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Predicates with at least one fact.
    pub fn predicates(&self) -> BTreeSet<Pred> {
        self.preds.iter().zip(&self.rels).filter(|(_, r)| r.len() > 0).map(|(p, _)| p.clone()).collect()
    }

    pub fn tuples(&self, p: &Pred) -> BTreeSet<Vec<GroundTerm>> {
        let Some(&r) = self.rel_of.get(p) else { return BTreeSet::new() };
        let rel = &self.rels[r];
        if rel.arity == 0 {
            return rel.set.iter().map(|_| Vec::new()).collect();
        }
        (0..rel.len()).map(|i| rel.row(i).iter().map(|&t| self.store.decode(t)).collect()).collect()
    }

    pub fn contains(&self, p: &Pred, args: &[GroundTerm]) -> bool {
        let Some(&r) = self.rel_of.get(p) else { return false };
        let ids: Option<Vec<u32>> = args.iter().map(|a| self.store.encode(a)).collect();
        ids.is_some_and(|ids| self.rels[r].set.contains(ids.as_slice()))
    }

    /// Every fact as `pred(args)`, sorted.
    pub fn listing(&self) -> Vec<String> {
        let mut out = Vec::new();
        for p in self.predicates() {
            for t in self.tuples(&p) {
                let args: Vec<String> = t.iter().map(|g| g.to_string()).collect();
                out.push(format!("{p}({})", args.join(",")));
            }
        }
        out.sort();
        out
    }
}

fn compile_term(t: &Term, store: &mut TermStore, vars: &mut Vec<Sym>) -> CTerm {
    match t {
        Term::Var(v) => {
            let i = match vars.iter().position(|x| x == v) {
                Some(i) => i,
                None => {
                    vars.push(v.clone());
                    vars.len() - 1
                }
            };
            CTerm::Var(i)
        }
        Term::Const(c) => CTerm::Const(store.constant(c)),
        Term::App(f, a) => CTerm::App(f.clone(), Box::new(compile_term(a, store, vars))),
    }
}

impl Engine {
    fn rel(&mut self, p: &Pred, arity: usize) -> Result<usize, DatalogError> {
        if let Some(&r) = self.rel_of.get(p) {
            let a = self.rels[r].arity;
            if a != arity {
                return Err(DatalogError::ArityClash(p.to_string(), a, arity));
            }
            return Ok(r);
        }
        self.rels.push(Relation::new(arity));
        self.preds.push(p.clone());
        self.rel_of.insert(p.clone(), self.rels.len() - 1);
        Ok(self.rels.len() - 1)
    }

    fn plan(&mut self, body: &[(usize, Vec<CTerm>)], first: usize, nvars: usize) -> Vec<Step> {
        let mut bound = vec![false; nvars];
        let mut left: Vec<usize> = (0..body.len()).filter(|&j| j != first).collect();
        let mut order = vec![first];
        let mut vs = Vec::new();
        body[first].1.iter().for_each(|t| t.vars(&mut vs));
        vs.iter().for_each(|&v| bound[v] = true);
        while !left.is_empty() {
            let score = |j: usize, bound: &[bool]| {
                let det = body[j].1.iter().filter(|t| t.determined(bound)).count();
                let mut vs = Vec::new();
                body[j].1.iter().for_each(|t| t.vars(&mut vs));
                let free = vs.iter().filter(|&&v| !bound[v]).count();
                (det, usize::MAX - free)
            };
            let best = *left.iter().max_by_key(|&&j| (score(j, &bound), usize::MAX - j)).unwrap();
            left.retain(|&j| j != best);
            let mut vs = Vec::new();
            body[best].1.iter().for_each(|t| t.vars(&mut vs));
            vs.iter().for_each(|&v| bound[v] = true);
            order.push(best);
        }
        let mut bound = vec![false; nvars];
        let mut steps = Vec::new();
        for &j in &order {
            let (rel, terms) = &body[j];
            let range = match j.cmp(&first) {
                std::cmp::Ordering::Less => Range::Old,
                std::cmp::Ordering::Equal => Range::Delta,
                std::cmp::Ordering::Greater => Range::All,
            };
            let mut key_cols = Vec::new();
            let mut key_terms = Vec::new();
            let mut rest = Vec::new();
            for (c, t) in terms.iter().enumerate() {
                if t.determined(&bound) {
                    key_cols.push(c);
                    key_terms.push(t.clone());
                } else {
                    rest.push((c, t.clone()));
                }
            }
            for t in terms {
                let mut vs = Vec::new();
                t.vars(&mut vs);
                vs.iter().for_each(|&v| bound[v] = true);
            }
            if !key_cols.is_empty() {
                self.rels[*rel].indexes.entry(key_cols.clone()).or_default();
            }
            steps.push(Step { rel: *rel, range, key_cols, key_terms, rest });
        }
        steps
    }

    fn compile(&mut self, r: &Rule) -> Result<CRule, DatalogError> {
        if !r.is_range_restricted() {
            return Err(DatalogError::NotRangeRestricted(r.to_string()));
        }
        let mut vars = Vec::new();
        let mut body = Vec::new();
        for a in &r.body {
            let rel = self.rel(&a.pred, a.args.len())?;
            let terms: Vec<CTerm> = a.args.iter().map(|t| compile_term(t, &mut self.store, &mut vars)).collect();
            body.push((rel, terms));
        }
        let head_rel = self.rel(&r.head.pred, r.head.args.len())?;
        let head = r.head.args.iter().map(|t| compile_term(t, &mut self.store, &mut vars)).collect();
        let nvars = vars.len();
        let plans = (0..body.len()).map(|i| self.plan(&body, i, nvars)).collect();
        Ok(CRule { head_rel, head, nvars, plans })
    }

    fn add_fact(&mut self, rel: usize, t: &[u32]) -> Result<bool, DatalogError> {
        if let Some(cap) = self.opts.depth_cap {
            if t.iter().any(|&x| self.store.depth(x) > cap) {
                return Ok(false);
            }
        }
        if !self.rels[rel].insert(t) {
            return Ok(false);
        }
        self.total += 1;
        if let Some(limit) = self.opts.max_facts {
            if self.total > limit {
                return Err(DatalogError::ResourceLimit { what: "facts", limit });
            }
        }
        Ok(true)
    }

    /// Build a head term, or `None` when it would exceed the depth cap.
    fn build(&mut self, t: &CTerm, b: &[u32]) -> Option<u32> {
        match t {
            CTerm::Var(v) => Some(b[*v]),
            CTerm::Const(c) => Some(*c),
            CTerm::App(f, a) => {
                let inner = self.build(a, b)?;
                if let Some(cap) = self.opts.depth_cap {
                    if self.store.depth(inner) + 1 > cap {
                        return None;
                    }
                }
                Some(self.store.app(f, inner))
            }
        }
    }

    fn fire(&mut self, rule: usize, bindings: &[u32]) -> Result<(), DatalogError> {
        let nv = self.rules[rule].nvars.max(1);
        let head = std::mem::take(&mut self.rules[rule].head);
        let rel = self.rules[rule].head_rel;
        let mut out = Vec::with_capacity(head.len());
        let mut res = Ok(());
        for b in bindings.chunks(nv) {
            out.clear();
            let mut ok = true;
            for t in &head {
                match self.build(t, b) {
                    Some(x) => out.push(x),
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                if let Err(e) = self.add_fact(rel, &out) {
                    res = Err(e);
                    break;
                }
            }
        }
        self.rules[rule].head = head;
        res
    }

    fn run(&mut self) -> Result<(), DatalogError> {
        for r in &mut self.rels {
            r.delta_start = 0;
            r.delta_end = 0;
        }
        let facts: Vec<usize> = (0..self.rules.len()).filter(|&i| self.rules[i].plans.is_empty()).collect();
        for i in facts {
            let nv = self.rules[i].nvars.max(1);
            self.fire(i, &vec![0; nv])?;
        }
        loop {
            for r in &mut self.rels {
                r.delta_start = r.delta_end;
                r.delta_end = r.len();
            }
            if self.rels.iter().all(|r| r.delta_start == r.delta_end) {
                return Ok(());
            }
            for r in &mut self.rels {
                r.refresh_indexes();
            }
            for i in 0..self.rules.len() {
                let mut buf = Vec::new();
                for p in 0..self.rules[i].plans.len() {
                    let first = &self.rules[i].plans[p][0];
                    let rel = &self.rels[first.rel];
                    if rel.delta_start == rel.delta_end {
                        continue;
                    }
                    let nv = self.rules[i].nvars.max(1);
                    let mut b = vec![UNBOUND; nv];
                    let mut trail = Vec::new();
                    let budget = self.opts.max_facts.map(|m| m.max(1).saturating_mul(PROBES_PER_FACT));
                    let limit = budget.unwrap_or(usize::MAX);
                    let plan = &self.rules[i].plans[p];
                    let ok = join(&self.store, &self.rels, plan, 0, &mut b, &mut trail, &mut buf, &mut self.probes, limit);
                    if !ok {
                        return Err(DatalogError::ResourceLimit { what: "join probes", limit: budget.unwrap_or(0) });
                    }
                }
                self.fire(i, &buf)?;
            }
        }
    }
}

fn range_of(r: &Relation, k: Range) -> (usize, usize) {
    match k {
        Range::Old => (0, r.delta_start),
        Range::Delta => (r.delta_start, r.delta_end),
        Range::All => (0, r.delta_end),
    }
}

/// Appends every match of `steps[k..]` to `out`; false once `probes`
/// passes `limit`.
#[allow(clippy::too_many_arguments)]
fn join(
    store: &TermStore,
    rels: &[Relation],
    steps: &[Step],
    k: usize,
    b: &mut Vec<u32>,
    trail: &mut Vec<usize>,
    out: &mut Vec<u32>,
    probes: &mut usize,
    limit: usize,
) -> bool {
    if k == steps.len() {
        out.extend_from_slice(b);
        return true;
    }
    let s = &steps[k];
    let rel = &rels[s.rel];
    let (lo, hi) = range_of(rel, s.range);
    if lo >= hi {
        return true;
    }
    let visit = |i: usize, b: &mut Vec<u32>, trail: &mut Vec<usize>, out: &mut Vec<u32>, probes: &mut usize| {
        *probes += 1;
        if *probes > limit {
            return false;
        }
        let row = rel.row(i);
        let mark = trail.len();
        let mut ok = true;
        if s.rest.iter().all(|(c, t)| t.unify(store, row[*c], b, trail)) {
            ok = join(store, rels, steps, k + 1, b, trail, out, probes, limit);
        }
        for v in trail.drain(mark..) {
            b[v] = UNBOUND;
        }
        ok
    };
    if rel.arity == 0 {
        return visit(0, b, trail, out, probes);
    }
    if s.key_cols.is_empty() {
        return (lo..hi).all(|i| visit(i, b, trail, out, probes));
    }
    let mut key = Vec::with_capacity(s.key_terms.len());
    for t in &s.key_terms {
        match t.eval(store, b) {
            Some(x) => key.push(x),
            None => return true,
        }
    }
    let Some(rows) = rel.indexes[&s.key_cols].map.get(&key) else { return true };
    let start = rows.partition_point(|&r| (r as usize) < lo);
    rows[start..].iter().take_while(|&&r| (r as usize) < hi).all(|&r| visit(r as usize, b, trail, out, probes))
}

/// Evaluate a program over a database. Function symbols need a depth cap.
pub fn evaluate(program: &Program, db: &Database, opts: &EvalOptions) -> Result<Model, DatalogError> {
    if opts.depth_cap.is_none() {
        if let Some(r) = program.rules.iter().find(|r| !r.is_function_free()) {
            return Err(DatalogError::NotFunctionFree(r.to_string()));
        }
    }
    let mut e = Engine {
        store: TermStore::default(),
        rels: Vec::new(),
        rel_of: HashMap::new(),
        preds: Vec::new(),
        rules: Vec::new(),
        opts: opts.clone(),
        total: 0,
        probes: 0,
    };
    for f in db.iter() {
        let r = e.rel(&Pred { name: f.pred.clone(), ann: None }, f.args.len())?;
        let t: Vec<u32> = f.args.iter().map(|c| e.store.constant(c)).collect();
        e.add_fact(r, &t)?;
    }
    if let Some(q) = &program.query {
        if !e.rel_of.contains_key(q) {
            let arity = program
                .rules
                .iter()
                .flat_map(|r| std::iter::once(&r.head).chain(&r.body))
                .find(|a| &a.pred == q)
                .map(|a| a.args.len());
            if let Some(n) = arity {
                e.rel(q, n)?;
            }
        }
    }
    let mut rules = Vec::with_capacity(program.rules.len());
    for r in &program.rules {
        rules.push(e.compile(r)?);
    }
    e.rules = rules;
    e.run()?;
    Ok(Model { store: e.store, rels: e.rels, rel_of: e.rel_of, preds: e.preds })
}

/// Least model of a function-free program.
pub fn seminaive_fixpoint(program: &Program, db: &Database) -> Result<Model, DatalogError> {
    evaluate(program, db, &EvalOptions::default())
}

/// Least model restricted to terms of depth at most `depth_cap`.
pub fn bounded_herbrand_fixpoint(program: &Program, db: &Database, depth_cap: usize) -> Result<Model, DatalogError> {
    evaluate(program, db, &EvalOptions { depth_cap: Some(depth_cap), max_facts: None })
}

/// The tuples of the query predicate. With `drop_skolem`, tuples holding a
/// function term are discarded.
pub fn answer(
    program: &Program,
    db: &Database,
    opts: &EvalOptions,
    drop_skolem: bool,
) -> Result<BTreeSet<Vec<GroundTerm>>, DatalogError> {
    let q = program.query.as_ref().ok_or(DatalogError::NoQuery)?;
    let m = evaluate(program, db, opts)?;
    let mut out = m.tuples(q);
    if drop_skolem {
        out.retain(|t| t.iter().all(|g| g.as_constant().is_some()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datalog::parse_program;
    use crate::relational::parse_facts;

    fn c(s: &str) -> GroundTerm {
        GroundTerm::Const(Constant::named(s))
    }

    #[test]
    fn transitive_closure() {
        let p = parse_program("t(X,Y) :- e(X,Y). t(X,Z) :- t(X,Y), e(Y,Z). ?- t.").unwrap();
        let db = parse_facts("e(a,b). e(b,c). e(c,d). e(d,a).").unwrap();
        let ans = answer(&p, &db, &EvalOptions::default(), false).unwrap();
        assert_eq!(ans.len(), 16);
        assert!(ans.contains(&vec![c("a"), c("a")]));
    }

    #[test]
    fn equality_from_key_rule() {
        let p = parse_program("eq(Y1,Y2) :- works_in(X,Y1), works_in(X,Y2).").unwrap();
        let db = parse_facts("works_in(m,d). works_in(m,d2).").unwrap();
        let m = seminaive_fixpoint(&p, &db).unwrap();
        let eq = m.tuples(&Pred::plain("eq"));
        assert_eq!(eq.len(), 4);
        assert!(eq.contains(&vec![c("d"), c("d2")]));
    }

    #[test]
    fn empty_program() {
        let db = parse_facts("p(a).").unwrap();
        let m = seminaive_fixpoint(&Program::default(), &db).unwrap();
        assert_eq!(m.listing(), vec!["p(a)"]);
    }

    #[test]
    fn skolem_rule_respects_depth_cap() {
        let p = parse_program("works_in(X, f_sigma10_2(X)) :- employee(X). employee(X) :- works_in(Y, X).").unwrap();
        let db = parse_facts("employee(m).").unwrap();
        let m = bounded_herbrand_fixpoint(&p, &db, 1).unwrap();
        let f: Sym = "f_sigma10_2".into();
        let fm = GroundTerm::App(f, Box::new(c("m")));
        assert!(m.contains(&Pred::plain("works_in"), &[c("m"), fm.clone()]));
        assert!(m.contains(&Pred::plain("employee"), &[fm]));
        assert_eq!(m.len(), 3);
        let m0 = bounded_herbrand_fixpoint(&p, &db, 0).unwrap();
        assert_eq!(m0.listing(), vec!["employee(m)"]);
        assert!(matches!(seminaive_fixpoint(&p, &db), Err(DatalogError::NotFunctionFree(_))));
    }

    #[test]
    fn function_terms_in_bodies() {
        let src = "r@[*,f(*)](X, f(Y)) :- s(X,Y). u(X,Y) :- r@[*,f(*)](X, f(Y)). ?- u.";
        let p = parse_program(src).unwrap();
        let db = parse_facts("s(a,b). s(b,c).").unwrap();
        let ans = answer(&p, &db, &EvalOptions { depth_cap: Some(3), max_facts: None }, true).unwrap();
        assert_eq!(ans, [vec![c("a"), c("b")], vec![c("b"), c("c")]].into_iter().collect());
    }

    #[test]
    fn constants_and_repeated_variables() {
        let p = parse_program("loop(X) :- e(X,X). from_a(Y) :- e(a,Y).").unwrap();
        let db = parse_facts("e(a,a). e(a,b). e(b,b). e(c,a).").unwrap();
        let m = seminaive_fixpoint(&p, &db).unwrap();
        assert_eq!(m.tuples(&Pred::plain("loop")).len(), 2);
        assert_eq!(m.tuples(&Pred::plain("from_a")).len(), 2);
    }

    #[test]
    fn errors_and_limits() {
        let p = parse_program("p(X,Y) :- q(X).").unwrap();
        assert!(matches!(seminaive_fixpoint(&p, &Database::new()), Err(DatalogError::NotRangeRestricted(_))));
        let p = parse_program("p(X) :- q(X). p(X,Y) :- q(X), q(Y).").unwrap();
        assert!(matches!(seminaive_fixpoint(&p, &Database::new()), Err(DatalogError::ArityClash(..))));
        let p = parse_program("t(X,Y) :- e(X,Y). t(X,Z) :- t(X,Y), t(Y,Z).").unwrap();
        let db = parse_facts("e(a,b). e(b,c). e(c,d). e(d,a).").unwrap();
        let r = evaluate(&p, &db, &EvalOptions { depth_cap: None, max_facts: Some(10) });
        assert!(matches!(r, Err(DatalogError::ResourceLimit { .. })));
        let p = parse_program("t(X) :- e(X,Y).").unwrap();
        assert!(matches!(answer(&p, &db, &EvalOptions::default(), false), Err(DatalogError::NoQuery)));
    }

    #[test]
    fn ground_rules_and_nullary_query() {
        let p = parse_program("e(a,b). yes() :- e(a,b). ?- yes.").unwrap();
        let ans = answer(&p, &Database::new(), &EvalOptions::default(), false).unwrap();
        assert_eq!(ans, [Vec::new()].into_iter().collect());
    }
}
