use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::relational::{ConstraintSet, Constant, Database, Fact, FreshGen};

use super::{
    best_pair, project, ChaseError, ChaseOptions, ChaseResult, ChaseStatus, ChaseStep, ForestArc, Level, Rules,
};

/// The chase of `db`, optionally capped at `max_level`.
pub fn build_chase(db: &Database, cs: &ConstraintSet, max_level: Option<Level>) -> ChaseResult {
    build_chase_with(db, cs, ChaseOptions { max_level, ..Default::default() }).expect("no resource limits set")
}

pub fn build_chase_with(db: &Database, cs: &ConstraintSet, opts: ChaseOptions) -> Result<ChaseResult, ChaseError> {
    let mut e = Engine::new(cs, db, opts);
    let status = e.run()?;
    Ok(e.finish(status))
}

struct Slot {
    fact: Fact,
    level: Level,
    alive: bool,
}

type KdKey = (usize, Vec<Constant>);

struct Engine<'a> {
    rules: Rules,
    opts: ChaseOptions,
    cs: &'a ConstraintSet,
    slots: Vec<Slot>,
    alias: Vec<usize>,
    by_fact: HashMap<Fact, usize>,
    /// Fresh constant -> slots that mention it (possibly stale).
    occ: HashMap<Constant, Vec<usize>>,
    proj_count: Vec<HashMap<Vec<Constant>, usize>>,
    groups: Vec<HashMap<Vec<Constant>, BTreeSet<usize>>>,
    dirty: BTreeSet<KdKey>,
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
            proj_count: vec![HashMap::new(); rules.projections.len()],
            groups: vec![HashMap::new(); rules.kds.len()],
            rules,
            opts,
            cs,
            slots: Vec::new(),
            alias: Vec::new(),
            by_fact: HashMap::new(),
            occ: HashMap::new(),
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

    fn below_cap(&self, l: Level) -> bool {
        self.opts.max_level.is_none_or(|m| l < m)
    }

    fn resolve(&self, mut id: usize) -> usize {
        while self.alias[id] != id {
            id = self.alias[id];
        }
        id
    }

    /// Insert a fact or lower the level of an existing copy; returns its slot.
    fn add(&mut self, fact: Fact, level: Level) -> usize {
        if let Some(&id) = self.by_fact.get(&fact) {
            if level < self.slots[id].level {
                self.slots[id].level = level;
                self.push_queues(id);
            }
            return id;
        }
        let id = self.slots.len();
        self.slots.push(Slot { fact: fact.clone(), level, alive: true });
        self.alias.push(id);
        self.by_fact.insert(fact, id);
        self.index(id);
        id
    }

    fn push_queues(&mut self, id: usize) {
        let s = &self.slots[id];
        if self.rules.has_full_width_from(&s.fact.pred) {
            self.fw_queue.insert((s.level, s.fact.clone()));
        }
        if self.rules.ids_from.contains_key(&s.fact.pred) {
            self.queue.insert((s.level, s.fact.clone()));
        }
    }

    fn index(&mut self, id: usize) {
        let fact = self.slots[id].fact.clone();
        for c in &fact.args {
            if c.is_fresh() {
                self.occ.entry(c.clone()).or_default().push(id);
            }
        }
        if let Some(ps) = self.rules.proj_on.get(&fact.pred) {
            for &p in ps {
                let key = project(&fact.args, &self.rules.projections[p].1);
                *self.proj_count[p].entry(key).or_default() += 1;
            }
        }
        if let Some(ks) = self.rules.kds_on.get(&fact.pred) {
            for &k in ks {
                let key = self.rules.kds[k].dep.project(&fact.args);
                let g = self.groups[k].entry(key.clone()).or_default();
                g.insert(id);
                if g.len() >= 2 {
                    self.dirty.insert((k, key));
                }
            }
        }
        self.push_queues(id);
    }

    fn unindex(&mut self, id: usize) {
        let fact = self.slots[id].fact.clone();
        if let Some(ps) = self.rules.proj_on.get(&fact.pred) {
            for &p in ps {
                let key = project(&fact.args, &self.rules.projections[p].1);
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
                let key = self.rules.kds[k].dep.project(&fact.args);
                if let Some(g) = self.groups[k].get_mut(&key) {
                    g.remove(&id);
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

    fn check_limits(&self) -> Result<(), ChaseError> {
        if let Some(m) = self.opts.max_facts {
            if self.by_fact.len() > m {
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
            while let Some((k, t1, t2)) = self.next_kd() {
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
        Ok(match self.opts.max_level {
            Some(m) if self.pending_above_cap() => ChaseStatus::Truncated { at_level: m },
            _ => ChaseStatus::Completed,
        })
    }

    fn next_kd(&self) -> Option<(usize, usize, usize)> {
        let mut best: Option<((Level, &Fact, &Fact, &str), (usize, usize, usize))> = None;
        for (k, key) in &self.dirty {
            let g = &self.groups[*k][key];
            let facts: Vec<(&Fact, Level)> = g.iter().map(|&i| (&self.slots[i].fact, self.slots[i].level)).collect();
            if let Some((l, a, b)) = best_pair(&facts, self.opts.max_level, |_, _| true) {
                let cand = (l, a, b, self.rules.kds[*k].canonical.as_str());
                if best.as_ref().is_none_or(|(b, _)| cand < *b) {
                    best = Some((cand, (*k, self.by_fact[a], self.by_fact[b])));
                }
            }
        }
        best.map(|(_, x)| x)
    }

    /// Apply the KD rule; returns the failure status if it fails.
    fn apply_kd(&mut self, k: usize, t1: usize, t2: usize) -> Option<ChaseStatus> {
        let kd = &self.rules.kds[k];
        let (f1, f2) = (self.slots[t1].fact.clone(), self.slots[t2].fact.clone());
        let level = self.slots[t1].level.min(self.slots[t2].level);
        let mut subst: BTreeMap<Constant, Constant> = BTreeMap::new();
        let find = |s: &BTreeMap<Constant, Constant>, mut c: Constant| {
            while let Some(d) = s.get(&c) {
                c = d.clone();
            }
            c
        };
        for i in 1..=f1.args.len() {
            if kd.dep.key.contains(&i) {
                continue;
            }
            let a = find(&subst, f1.args[i - 1].clone());
            let b = find(&subst, f2.args[i - 1].clone());
            if a == b {
                continue;
            }
            if !a.is_fresh() && !b.is_fresh() {
                return Some(ChaseStatus::Failed { step: self.steps.len(), kd: kd.label.clone(), pair: (f1, f2) });
            }
            let (win, lose) = if a < b { (a, b) } else { (b, a) };
            subst.insert(lose, win);
        }
        let merged: Vec<(Constant, Constant)> =
            subst.keys().map(|l| (l.clone(), find(&subst, l.clone()))).collect();
        self.steps.push(ChaseStep::Kd { dep: kd.label.clone(), pair: (f1, f2), merged: merged.clone(), level });

        let mut affected: BTreeSet<usize> = BTreeSet::new();
        for (lose, _) in &merged {
            for id in self.occ.remove(lose).unwrap_or_default() {
                if self.slots[id].alive && self.slots[id].fact.args.contains(lose) {
                    affected.insert(id);
                }
            }
        }
        let map: HashMap<Constant, Constant> = merged.into_iter().collect();
        let mut readd = Vec::new();
        for &id in &affected {
            self.unindex(id);
            self.slots[id].alive = false;
            self.by_fact.remove(&self.slots[id].fact);
            let f = &self.slots[id].fact;
            let args = f.args.iter().map(|c| map.get(c).cloned().unwrap_or_else(|| c.clone())).collect();
            readd.push((id, Fact { pred: f.pred.clone(), args }, self.slots[id].level));
        }
        readd.sort_by(|a, b| (&a.1, a.2).cmp(&(&b.1, b.2)));
        for (id, f, l) in readd {
            let to = self.add(f, l);
            self.alias[id] = to;
        }
        None
    }

    fn applicable(&self, fact: &Fact, i: usize) -> bool {
        let r = &self.rules.ids[i];
        let key = project(&fact.args, &r.dep.lhs_cols);
        !self.proj_count[self.rules.id_proj[i]].contains_key(&key)
    }

    fn first_applicable(&self, fact: &Fact, full_width_only: bool) -> Option<usize> {
        let ids = self.rules.ids_from.get(&fact.pred)?;
        ids.iter()
            .copied()
            .filter(|&i| !full_width_only || self.rules.ids[i].full_width)
            .find(|&i| self.applicable(fact, i))
    }

    fn live_entry(&self, level: Level, fact: &Fact) -> Option<usize> {
        self.by_fact.get(fact).copied().filter(|&id| self.slots[id].level == level)
    }

    /// One ID application; false when none is possible below the cap.
    fn id_step(&mut self) -> bool {
        for fw in [true, false] {
            loop {
                let q = if fw { &self.fw_queue } else { &self.queue };
                let Some((level, fact)) = q.first().cloned() else { break };
                if !self.below_cap(level) {
                    break;
                }
                let Some(id) = self.live_entry(level, &fact) else {
                    self.queue_mut(fw).remove(&(level, fact));
                    continue;
                };
                match self.first_applicable(&fact, fw) {
                    Some(i) => {
                        self.apply_id(id, i);
                        return true;
                    }
                    None => {
                        self.queue_mut(fw).remove(&(level, fact));
                    }
                }
            }
        }
        false
    }

    fn queue_mut(&mut self, fw: bool) -> &mut BTreeSet<(Level, Fact)> {
        if fw {
            &mut self.fw_queue
        } else {
            &mut self.queue
        }
    }

    fn apply_id(&mut self, parent: usize, i: usize) {
        let r = &self.rules.ids[i];
        let pf = self.slots[parent].fact.clone();
        let level = self.slots[parent].level + 1;
        let n = self.cs.schema.arity(&r.dep.rhs).expect("checked schema");
        let mut args: Vec<Option<Constant>> = vec![None; n];
        for (l, rc) in r.dep.lhs_cols.iter().zip(&r.dep.rhs_cols) {
            args[rc - 1] = Some(pf.args[l - 1].clone());
        }
        let args: Vec<Constant> = args.into_iter().map(|a| a.unwrap_or_else(|| self.fresh.fresh())).collect();
        let child = Fact { pred: r.dep.rhs.clone(), args };
        let label = r.label.clone();
        self.steps.push(ChaseStep::Id { dep: label, parent: pf, child: child.clone(), level });
        let c = self.add(child, level);
        self.arcs.push((parent, c, i));
    }

    fn pending_above_cap(&self) -> bool {
        if !self.dirty.is_empty() {
            return true;
        }
        self.queue
            .iter()
            .any(|(l, f)| self.live_entry(*l, f).is_some() && self.first_applicable(f, false).is_some())
    }

    fn finish(self, status: ChaseStatus) -> ChaseResult {
        let facts: BTreeMap<Fact, Level> =
            self.slots.iter().filter(|s| s.alive).map(|s| (s.fact.clone(), s.level)).collect();
        let mut forest: BTreeSet<ForestArc> = BTreeSet::new();
        for &(p, c, i) in &self.arcs {
            let (p, c) = (self.resolve(p), self.resolve(c));
            if p != c {
                forest.insert(ForestArc {
                    parent: self.slots[p].fact.clone(),
                    child: self.slots[c].fact.clone(),
                    dep: self.rules.ids[i].label.clone(),
                });
            }
        }
        ChaseResult { status, facts, forest: forest.into_iter().collect(), steps: self.steps }
    }
}
