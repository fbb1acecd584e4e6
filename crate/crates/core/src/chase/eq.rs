//! The chase with equalities: facts are never rewritten; the KD rule records
//! `eq` atoms instead, and ID applicability is checked modulo `eq`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::relational::{ConstraintSet, Constant, Database, Fact, FreshGen};

use super::{
    best_pair, ChaseError, ChaseOptions, ChaseResult, ChaseStatus, ChaseStep, ForestArc, Level, Rules,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EqChaseResult {
    pub status: ChaseStatus,
    /// Facts other than `eq`.
    pub facts: BTreeMap<Fact, Level>,
    pub eq_facts: BTreeMap<(Constant, Constant), Level>,
    pub forest: Vec<ForestArc>,
    pub steps: Vec<ChaseStep>,
}

impl EqChaseResult {
    /// All facts, with `eq(c1,c2)` atoms rendered as facts of predicate `eq`.
    pub fn all_facts(&self) -> BTreeMap<Fact, Level> {
        let mut out = self.facts.clone();
        for ((a, b), l) in &self.eq_facts {
            out.insert(Fact { pred: "eq".into(), args: vec![a.clone(), b.clone()] }, *l);
        }
        out
    }
}

pub fn build_eq_chase(db: &Database, cs: &ConstraintSet, max_level: Option<Level>) -> EqChaseResult {
    build_eq_chase_with(db, cs, ChaseOptions { max_level, ..Default::default() }).expect("no resource limits set")
}

pub fn build_eq_chase_with(db: &Database, cs: &ConstraintSet, opts: ChaseOptions) -> Result<EqChaseResult, ChaseError> {
    let mut e = Engine::new(cs, db, opts);
    let status = e.run()?;
    Ok(e.finish(status))
}

struct Engine<'a> {
    cs: &'a ConstraintSet,
    rules: Rules,
    opts: ChaseOptions,
    facts: Vec<(Fact, Level)>,
    by_fact: HashMap<Fact, usize>,
    consts: Vec<Constant>,
    const_id: HashMap<Constant, usize>,
    parent: Vec<usize>,
    members: Vec<Vec<usize>>,
    /// The non-fresh member of each class, if any.
    anchor: Vec<Option<usize>>,
    pair_level: HashMap<(usize, usize), Level>,
    occ: Vec<Vec<usize>>,
    proj_count: Vec<HashMap<Vec<usize>, usize>>,
    groups: Vec<HashMap<Vec<usize>, Vec<usize>>>,
    dirty: BTreeSet<(usize, Vec<usize>)>,
    fw_queue: BTreeSet<(Level, Fact)>,
    queue: BTreeSet<(Level, Fact)>,
    fresh: FreshGen,
    arcs: Vec<(usize, usize, usize)>,
    steps: Vec<ChaseStep>,
}

impl<'a> Engine<'a> {
    fn new(cs: &'a ConstraintSet, db: &Database, opts: ChaseOptions) -> Self {
        let rules = Rules::new(cs);
        let used = db.iter().flat_map(|f| f.args.iter()).filter_map(|c| match c {
            Constant::Fresh(n) => Some(*n),
            _ => None,
        });
        let mut e = Engine {
            cs,
            proj_count: vec![HashMap::new(); rules.projections.len()],
            groups: vec![HashMap::new(); rules.kds.len()],
            rules,
            opts,
            facts: Vec::new(),
            by_fact: HashMap::new(),
            consts: Vec::new(),
            const_id: HashMap::new(),
            parent: Vec::new(),
            members: Vec::new(),
            anchor: Vec::new(),
            pair_level: HashMap::new(),
            occ: Vec::new(),
            dirty: BTreeSet::new(),
            fw_queue: BTreeSet::new(),
            queue: BTreeSet::new(),
            fresh: FreshGen::after(used),
            arcs: Vec::new(),
            steps: Vec::new(),
        };
        for f in db {
            e.add(f.clone(), 0);
        }
        e
    }

    fn intern(&mut self, c: &Constant, level: Level) -> usize {
        if let Some(&i) = self.const_id.get(c) {
            return i;
        }
        let i = self.consts.len();
        self.consts.push(c.clone());
        self.const_id.insert(c.clone(), i);
        self.parent.push(i);
        self.members.push(vec![i]);
        self.anchor.push((!c.is_fresh()).then_some(i));
        self.occ.push(Vec::new());
        self.pair_level.insert((i, i), level);
        i
    }

    fn root(&self, mut i: usize) -> usize {
        while self.parent[i] != i {
            i = self.parent[i];
        }
        i
    }

    fn class_key(&self, args: &[Constant], cols: &[usize]) -> Vec<usize> {
        cols.iter().map(|&c| self.root(self.const_id[&args[c - 1]])).collect()
    }

    fn add(&mut self, fact: Fact, level: Level) -> usize {
        if let Some(&id) = self.by_fact.get(&fact) {
            return id;
        }
        let id = self.facts.len();
        for c in &fact.args {
            let ci = self.intern(c, level);
            if self.occ[ci].last() != Some(&id) {
                self.occ[ci].push(id);
            }
        }
        self.facts.push((fact.clone(), level));
        self.by_fact.insert(fact.clone(), id);
        self.index(id);
        if self.rules.has_full_width_from(&fact.pred) {
            self.fw_queue.insert((level, fact.clone()));
        }
        if self.rules.ids_from.contains_key(&fact.pred) {
            self.queue.insert((level, fact));
        }
        id
    }

    fn index(&mut self, id: usize) {
        let fact = self.facts[id].0.clone();
        if let Some(ps) = self.rules.proj_on.get(&fact.pred) {
            for &p in ps {
                let key = self.class_key(&fact.args, &self.rules.projections[p].1);
                *self.proj_count[p].entry(key).or_default() += 1;
            }
        }
        if let Some(ks) = self.rules.kds_on.get(&fact.pred) {
            for &k in ks {
                let key = self.class_key(&fact.args, &self.rules.kds[k].dep.key);
                let g = self.groups[k].entry(key.clone()).or_default();
                g.push(id);
                if g.len() >= 2 {
                    self.dirty.insert((k, key));
                }
            }
        }
    }

    fn unindex(&mut self, id: usize) {
        let fact = self.facts[id].0.clone();
        if let Some(ps) = self.rules.proj_on.get(&fact.pred) {
            for &p in ps {
                let key = self.class_key(&fact.args, &self.rules.projections[p].1);
                if let Some(n) = self.proj_count[p].get_mut(&key) {
                    *n -= 1;
                    if *n == 0 {
                        self.proj_count[p].remove(&key);
                    }
                }
            }
        }
        if let Some(ks) = self.rules.kds_on.get(&fact.pred) {
            for &k in ks {
                let key = self.class_key(&fact.args, &self.rules.kds[k].dep.key);
                if let Some(g) = self.groups[k].get_mut(&key) {
                    g.retain(|&x| x != id);
                    if g.len() < 2 {
                        self.dirty.remove(&(k, key.clone()));
                    }
                    if g.is_empty() {
                        self.groups[k].remove(&key);
                    }
                }
            }
        }
    }

    /// Merge the classes of `a` and `b`; false if that equates two distinct
    /// non-fresh constants.
    fn union(&mut self, a: usize, b: usize, level: Level) -> bool {
        let (ra, rb) = (self.root(a), self.root(b));
        if ra == rb {
            return true;
        }
        if let (Some(x), Some(y)) = (self.anchor[ra], self.anchor[rb]) {
            if x != y {
                return false;
            }
        }
        let (big, small) = if self.members[ra].len() >= self.members[rb].len() { (ra, rb) } else { (rb, ra) };
        let mut touched: BTreeSet<usize> = BTreeSet::new();
        for &m in &self.members[small] {
            touched.extend(self.occ[m].iter().copied());
        }
        for &f in &touched {
            self.unindex(f);
        }
        for &x in &self.members[big] {
            for &y in &self.members[small] {
                self.pair_level.insert((x, y), level);
                self.pair_level.insert((y, x), level);
            }
        }
        self.parent[small] = big;
        let moved = std::mem::take(&mut self.members[small]);
        self.members[big].extend(moved);
        if self.anchor[big].is_none() {
            self.anchor[big] = self.anchor[small];
        }
        for &f in &touched {
            self.index(f);
        }
        true
    }

    fn same_class(&self, a: &Constant, b: &Constant) -> bool {
        self.root(self.const_id[a]) == self.root(self.const_id[b])
    }

    fn adds_something(&self, k: usize, t1: &Fact, t2: &Fact) -> bool {
        let key = &self.rules.kds[k].dep.key;
        (1..=t1.args.len()).any(|i| !key.contains(&i) && !self.same_class(&t1.args[i - 1], &t2.args[i - 1]))
    }

    fn check_limits(&self) -> Result<(), ChaseError> {
        if let Some(m) = self.opts.max_facts {
            if self.facts.len() > m {
                return Err(ChaseError::ResourceLimit { what: "chase facts", limit: m });
            }
        }
        if let Some(m) = self.opts.max_steps {
            if self.steps.len() > m {
                return Err(ChaseError::ResourceLimit { what: "chase steps", limit: m });
            }
        }
        Ok(())
    }

    fn run(&mut self) -> Result<ChaseStatus, ChaseError> {
        loop {
            while let Some((k, t1, t2)) = self.next_kd(self.opts.max_level) {
                if let Some(fail) = self.apply_kd(k, t1, t2) {
                    return Ok(fail);
                }
                self.check_limits()?;
            }
            if !self.id_step() {
                break;
            }
            self.check_limits()?;
        }
        let cap = self.opts.max_level;
        Ok(match cap {
            Some(m) if self.pending_above_cap() => ChaseStatus::Truncated { at_level: m },
            _ => ChaseStatus::Completed,
        })
    }

    fn next_kd(&mut self, cap: Option<Level>) -> Option<(usize, usize, usize)> {
        let mut best: Option<((Level, Fact, Fact, String), (usize, usize, usize))> = None;
        let mut clean = Vec::new();
        let dirty: Vec<(usize, Vec<usize>)> = self.dirty.iter().cloned().collect();
        for (k, key) in &dirty {
            let g = &self.groups[*k][key];
            let facts: Vec<(&Fact, Level)> = g.iter().map(|&i| (&self.facts[i].0, self.facts[i].1)).collect();
            if best_pair(&facts, None, |a, b| self.adds_something(*k, a, b)).is_none() {
                clean.push((*k, key.clone()));
                continue;
            }
            if let Some((l, a, b)) = best_pair(&facts, cap, |a, b| self.adds_something(*k, a, b)) {
                let cand = (l, a.clone(), b.clone(), self.rules.kds[*k].canonical.clone());
                if best.as_ref().is_none_or(|(b, _)| cand < *b) {
                    best = Some((cand, (*k, self.by_fact[a], self.by_fact[b])));
                }
            }
        }
        for c in clean {
            self.dirty.remove(&c);
        }
        best.map(|(_, x)| x)
    }

    fn apply_kd(&mut self, k: usize, t1: usize, t2: usize) -> Option<ChaseStatus> {
        let (f1, l1) = self.facts[t1].clone();
        let (f2, l2) = self.facts[t2].clone();
        let level = l1.min(l2);
        let key = self.rules.kds[k].dep.key.clone();
        let label = self.rules.kds[k].label.clone();
        let mut merged = Vec::new();
        for i in 1..=f1.args.len() {
            if key.contains(&i) {
                continue;
            }
            let (a, b) = (&f1.args[i - 1], &f2.args[i - 1]);
            if self.same_class(a, b) {
                continue;
            }
            merged.push((a.clone(), b.clone()));
            let (ia, ib) = (self.const_id[a], self.const_id[b]);
            if !self.union(ia, ib, level) {
                return Some(ChaseStatus::Failed { step: self.steps.len(), kd: label, pair: (f1, f2) });
            }
        }
        self.steps.push(ChaseStep::Kd { dep: label, pair: (f1, f2), merged, level });
        None
    }

    fn applicable(&self, fact: &Fact, i: usize) -> bool {
        let key = self.class_key(&fact.args, &self.rules.ids[i].dep.lhs_cols);
        !self.proj_count[self.rules.id_proj[i]].contains_key(&key)
    }

    fn first_applicable(&self, fact: &Fact, full_width_only: bool) -> Option<usize> {
        let ids = self.rules.ids_from.get(&fact.pred)?;
        ids.iter()
            .copied()
            .filter(|&i| !full_width_only || self.rules.ids[i].full_width)
            .find(|&i| self.applicable(fact, i))
    }

    fn id_step(&mut self) -> bool {
        for fw in [true, false] {
            loop {
                let q = if fw { &self.fw_queue } else { &self.queue };
                let Some((level, fact)) = q.first().cloned() else { break };
                if self.opts.max_level.is_some_and(|m| level >= m) {
                    break;
                }
                match self.first_applicable(&fact, fw) {
                    Some(i) => {
                        let id = self.by_fact[&fact];
                        self.apply_id(id, i);
                        return true;
                    }
                    None => {
                        if fw {
                            self.fw_queue.remove(&(level, fact));
                        } else {
                            self.queue.remove(&(level, fact));
                        }
                    }
                }
            }
        }
        false
    }

    fn apply_id(&mut self, parent: usize, i: usize) {
        let dep = self.rules.ids[i].dep.clone();
        let (pf, pl) = self.facts[parent].clone();
        let level = pl + 1;
        let n = self.cs.schema.arity(&dep.rhs).expect("checked schema");
        let mut args: Vec<Option<Constant>> = vec![None; n];
        for (l, r) in dep.lhs_cols.iter().zip(&dep.rhs_cols) {
            args[r - 1] = Some(pf.args[l - 1].clone());
        }
        let args: Vec<Constant> = args.into_iter().map(|a| a.unwrap_or_else(|| self.fresh.fresh())).collect();
        let child = Fact { pred: dep.rhs.clone(), args };
        self.steps.push(ChaseStep::Id { dep: self.rules.ids[i].label.clone(), parent: pf, child: child.clone(), level });
        let c = self.add(child, level);
        self.arcs.push((parent, c, i));
    }

    fn pending_above_cap(&mut self) -> bool {
        if self.next_kd(None).is_some() {
            return true;
        }
        self.queue.iter().any(|(_, f)| self.first_applicable(f, false).is_some())
    }

    fn finish(self, status: ChaseStatus) -> EqChaseResult {
        let facts = self.facts.iter().cloned().collect();
        let eq_facts = self
            .pair_level
            .iter()
            .map(|(&(a, b), &l)| ((self.consts[a].clone(), self.consts[b].clone()), l))
            .collect();
        let forest: BTreeSet<ForestArc> = self
            .arcs
            .iter()
            .filter(|(p, c, _)| p != c)
            .map(|&(p, c, i)| ForestArc {
                parent: self.facts[p].0.clone(),
                child: self.facts[c].0.clone(),
                dep: self.rules.ids[i].label.clone(),
            })
            .collect();
        EqChaseResult { status, facts, eq_facts, forest: forest.into_iter().collect(), steps: self.steps }
    }
}

/// Drop the `eq` atoms and replace every constant by the least member of its
/// class (non-fresh constants come first in the constant order).
pub fn equality_eliminate(r: &EqChaseResult) -> Result<ChaseResult, ChaseError> {
    let mut rep: BTreeMap<&Constant, &Constant> = BTreeMap::new();
    for (a, b) in r.eq_facts.keys() {
        let e = rep.entry(a).or_insert(a);
        if b < *e {
            *e = b;
        }
    }
    for (a, b) in r.eq_facts.keys() {
        if !a.is_fresh() && !b.is_fresh() && a != b {
            return Err(ChaseError::InconsistentClass(format!("{{{a}, {b}}}")));
        }
    }
    let map = |c: &Constant| rep.get(c).map_or_else(|| c.clone(), |d| (*d).clone());
    let rewrite = |f: &Fact| Fact { pred: f.pred.clone(), args: f.args.iter().map(map).collect() };
    let mut facts: BTreeMap<Fact, Level> = BTreeMap::new();
    for (f, l) in &r.facts {
        let g = rewrite(f);
        let e = facts.entry(g).or_insert(*l);
        *e = (*e).min(*l);
    }
    let forest: BTreeSet<ForestArc> = r
        .forest
        .iter()
        .map(|a| ForestArc { parent: rewrite(&a.parent), child: rewrite(&a.child), dep: a.dep.clone() })
        .filter(|a| a.parent != a.child)
        .collect();
    Ok(ChaseResult { status: r.status.clone(), facts, forest: forest.into_iter().collect(), steps: r.steps.clone() })
}
