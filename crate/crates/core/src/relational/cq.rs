use std::collections::{BTreeSet, HashMap};
use std::fmt;

use super::{Constant, Database, Fact, RelError, RelationalSchema, Sym};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum QTerm {
    Var(Sym),
    Const(Constant),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QAtom {
    pub pred: Sym,
    pub terms: Vec<QTerm>,
}

/// `name(head) :- body`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConjunctiveQuery {
    pub name: Sym,
    pub head: Vec<Sym>,
    pub body: Vec<QAtom>,
}

impl fmt::Display for QTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QTerm::Var(v) => f.write_str(v),
            QTerm::Const(c) => write!(f, "{c}"),
        }
    }
}

impl fmt::Display for QAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.pred)?;
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{t}")?;
        }
        f.write_str(")")
    }
}

impl fmt::Display for ConjunctiveQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({}) :- ", self.name, self.head.join(","))?;
        for (i, a) in self.body.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(".")
    }
}

impl ConjunctiveQuery {
    /// Structural checks, and predicate/arity checks when a schema is given.
    pub fn check(&self, schema: Option<&RelationalSchema>) -> Result<(), RelError> {
        let mut seen = BTreeSet::new();
        for h in &self.head {
            if !seen.insert(h) {
                return Err(RelError::BadQuery(format!("head variable {h} repeated")));
            }
            let occurs = self.body.iter().any(|a| a.terms.iter().any(|t| matches!(t, QTerm::Var(v) if v == h)));
            if !occurs {
                return Err(RelError::BadQuery(format!("head variable {h} does not occur in the body")));
            }
        }
        if self.body.is_empty() {
            return Err(RelError::BadQuery("empty body".into()));
        }
        if let Some(s) = schema {
            if s.contains(&self.name) {
                return Err(RelError::BadQuery(format!("query name `{}` clashes with a schema predicate", self.name)));
            }
            for a in &self.body {
                s.check_atom(&a.pred, a.terms.len())?;
            }
        }
        Ok(())
    }

    pub fn vars(&self) -> BTreeSet<Sym> {
        self.body
            .iter()
            .flat_map(|a| a.terms.iter())
            .filter_map(|t| match t {
                QTerm::Var(v) => Some(v.clone()),
                _ => None,
            })
            .collect()
    }
}

pub fn evaluate_cq(q: &ConjunctiveQuery, db: &Database, drop_fresh: bool) -> BTreeSet<Vec<Constant>> {
    evaluate_cq_on(q, db.iter(), drop_fresh)
}

/// Homomorphic images of the head over `facts`. With `drop_fresh`, tuples
/// that mention a fresh constant are discarded.
pub fn evaluate_cq_on<'a>(
    q: &ConjunctiveQuery,
    facts: impl IntoIterator<Item = &'a Fact>,
    drop_fresh: bool,
) -> BTreeSet<Vec<Constant>> {
    let mut rels: HashMap<&str, Vec<&'a [Constant]>> = HashMap::new();
    for f in facts {
        rels.entry(&*f.pred).or_default().push(&f.args);
    }
    let vars: Vec<Sym> = q.vars().into_iter().collect();
    let var_ix = |v: &Sym| vars.iter().position(|x| x == v).unwrap();

    // greedy join order: most bound positions first, then smallest relation
    let mut order = Vec::new();
    let mut bound = vec![false; vars.len()];
    let mut left: Vec<usize> = (0..q.body.len()).collect();
    while !left.is_empty() {
        let score = |&i: &usize| {
            let a = &q.body[i];
            let b = a
                .terms
                .iter()
                .filter(|t| match t {
                    QTerm::Const(_) => true,
                    QTerm::Var(v) => bound[var_ix(v)],
                })
                .count();
            let size = rels.get(&*a.pred).map_or(0, Vec::len);
            (usize::MAX - b, size)
        };
        let best = *left.iter().min_by_key(|i| score(i)).unwrap();
        left.retain(|&i| i != best);
        for t in &q.body[best].terms {
            if let QTerm::Var(v) = t {
                bound[var_ix(v)] = true;
            }
        }
        order.push(best);
    }

    struct Step<'b> {
        slots: Vec<Slot>,
        keyed: Vec<usize>,
        index: HashMap<Vec<Constant>, Vec<&'b [Constant]>>,
        all: Vec<&'b [Constant]>,
    }
    enum Slot {
        Const(Constant),
        Bound(usize),
        Bind(usize),
    }
    let empty = Vec::new();
    let mut bound = vec![false; vars.len()];
    let mut steps = Vec::new();
    for &i in &order {
        let a = &q.body[i];
        let mut slots = Vec::new();
        let mut keyed = Vec::new();
        let mut binding_here = vec![false; vars.len()];
        for (p, t) in a.terms.iter().enumerate() {
            match t {
                QTerm::Const(c) => {
                    keyed.push(p);
                    slots.push(Slot::Const(c.clone()));
                }
                QTerm::Var(v) => {
                    let x = var_ix(v);
                    if bound[x] {
                        keyed.push(p);
                        slots.push(Slot::Bound(x));
                    } else if binding_here[x] {
                        slots.push(Slot::Bound(x));
                    } else {
                        binding_here[x] = true;
                        slots.push(Slot::Bind(x));
                    }
                }
            }
        }
        for (x, b) in binding_here.iter().enumerate() {
            if *b {
                bound[x] = true;
            }
        }
        let tuples = rels.get(&*a.pred).unwrap_or(&empty);
        let tuples: Vec<&[Constant]> = tuples.iter().copied().filter(|t| t.len() == a.terms.len()).collect();
        let mut index: HashMap<Vec<Constant>, Vec<&[Constant]>> = HashMap::new();
        if !keyed.is_empty() {
            for t in &tuples {
                index.entry(keyed.iter().map(|&p| t[p].clone()).collect()).or_default().push(t);
            }
        }
        steps.push(Step { slots, keyed, index, all: tuples });
    }

    let head: Vec<usize> = q.head.iter().map(var_ix).collect();
    let mut out = BTreeSet::new();
    let mut env: Vec<Option<Constant>> = vec![None; vars.len()];

    fn go(
        k: usize,
        steps: &[Step<'_>],
        env: &mut Vec<Option<Constant>>,
        head: &[usize],
        drop_fresh: bool,
        out: &mut BTreeSet<Vec<Constant>>,
    ) {
        if k == steps.len() {
            let t: Vec<Constant> = head.iter().map(|&x| env[x].clone().unwrap()).collect();
            if !(drop_fresh && t.iter().any(Constant::is_fresh)) {
                out.insert(t);
            }
            return;
        }
        let s = &steps[k];
        let cands: &[&[Constant]] = if s.keyed.is_empty() {
            &s.all
        } else {
            let key: Vec<Constant> = s
                .keyed
                .iter()
                .map(|&p| match &s.slots[p] {
                    Slot::Const(c) => c.clone(),
                    Slot::Bound(x) => env[*x].clone().unwrap(),
                    Slot::Bind(_) => unreachable!(),
                })
                .collect();
            match s.index.get(&key) {
                Some(v) => v,
                None => return,
            }
        };
        for t in cands {
            let mut set = Vec::new();
            let mut ok = true;
            for (p, slot) in s.slots.iter().enumerate() {
                match slot {
                    Slot::Bind(x) => {
                        env[*x] = Some(t[p].clone());
                        set.push(*x);
                    }
                    Slot::Bound(x) if !s.keyed.contains(&p)
                        && env[*x].as_ref() != Some(&t[p]) => {
                            ok = false;
                            break;
                        }
                    _ => {}
                }
            }
            if ok {
                go(k + 1, steps, env, head, drop_fresh, out);
            }
            for x in set {
                env[x] = None;
            }
        }
    }
    go(0, &steps, &mut env, &head, drop_fresh, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relational::parse_cq;

    fn team_chase() -> Database {
        [
            Fact::new("player", &["pirlo", "acMilan"]),
            Fact::new("player", &["totti", "roma"]),
            Fact::new("team", &["acMilan", "milan"]),
            Fact { pred: "team".into(), args: vec![Constant::named("roma"), Constant::Fresh(1)] },
        ]
        .into_iter()
        .collect()
    }

    fn ans(v: &[&[&str]]) -> BTreeSet<Vec<Constant>> {
        v.iter().map(|t| t.iter().map(|c| Constant::named(c)).collect()).collect()
    }

    #[test]
    fn teams_with_and_without_fresh_filter() {
        let q = parse_cq("q(X) :- team(X,Y).").unwrap();
        let want = ans(&[&["acMilan"], &["roma"]]);
        assert_eq!(evaluate_cq(&q, &team_chase(), true), want);
        assert_eq!(evaluate_cq(&q, &team_chase(), false), want);
        let q2 = parse_cq("q(X,Y) :- team(X,Y).").unwrap();
        assert_eq!(evaluate_cq(&q2, &team_chase(), false).len(), 2);
        assert_eq!(evaluate_cq(&q2, &team_chase(), true).len(), 1);
    }

    #[test]
    fn empty_db_gives_no_answers() {
        let q = parse_cq("q(X) :- team(X,Y).").unwrap();
        assert!(evaluate_cq(&q, &Database::new(), true).is_empty());
    }

    #[test]
    fn joins_constants_and_repeated_variables() {
        let db: Database =
            [Fact::new("r", &["a", "a"]), Fact::new("r", &["a", "b"]), Fact::new("s", &["b", "c"])].into_iter().collect();
        let q = parse_cq("q(X) :- r(X,X).").unwrap();
        assert_eq!(evaluate_cq(&q, &db, true), ans(&[&["a"]]));
        let q = parse_cq("q(X,Z) :- r(X,Y), s(Y,Z), s(b,c).").unwrap();
        assert_eq!(evaluate_cq(&q, &db, true), ans(&[&["a", "c"]]));
        let q = parse_cq("q() :- s(X,d).").unwrap();
        assert!(evaluate_cq(&q, &db, true).is_empty());
        let q = parse_cq("q() :- s(X,c).").unwrap();
        assert_eq!(evaluate_cq(&q, &db, true).len(), 1);
    }
}
