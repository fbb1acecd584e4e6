//! Random instances for the property suites: small EER schemata, databases
//! over their relational schemata, and conjunctive queries.

#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;

use eerq::eer::parse_eer;
use eerq::relational::{parse_cq, recognize_cds, CDSet, ConjunctiveQuery};
use eerq::translation::to_cds;
use eerq::{Constant, Database, Fact};

pub struct Instance {
    pub eer: String,
    pub cds: CDSet,
    pub db: Database,
    pub query: ConjunctiveQuery,
}

impl std::fmt::Display for Instance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "{}", self.eer.trim_end())?;
        let facts: Vec<String> = self.db.iter().map(|x| format!("{x}.")).collect();
        writeln!(f, "-- data: {}", facts.join(" "))?;
        write!(f, "-- query: {}", self.query)
    }
}

/// An EER schema whose translation has at most `max_preds` predicates and
/// arity at most 3. Relationship attributes are optional, since mandatory
/// ones give IDs whose fresh values depend on several positions.
pub fn random_eer<R: Rng>(rng: &mut R, max_preds: usize) -> String {
    let n_ent = rng.gen_range(1..=3.min(max_preds));
    let max_rel = if n_ent >= 2 { 2.min(max_preds - n_ent) } else { 0 };
    let n_rel = rng.gen_range(0..=max_rel);
    let n_attr = rng.gen_range(0..=(max_preds - n_ent - n_rel).min(2));
    let ents: Vec<String> = (1..=n_ent).map(|i| format!("E{i}")).collect();
    let mut rels: Vec<(String, Vec<String>, Vec<(String, Vec<usize>)>)> = Vec::new();
    for i in 1..=n_rel {
        let arity = if n_ent >= 3 && rng.gen_bool(0.3) { 3 } else { 2 };
        let mut among = ents.clone();
        among.shuffle(rng);
        among.truncate(arity);
        let mut isa = Vec::new();
        let same: Vec<String> = rels.iter().filter(|r| r.1.len() == arity).map(|r| r.0.clone()).collect();
        if let Some(t) = same.choose(rng) {
            if rng.gen_bool(0.5) {
                let mut perm: Vec<usize> = (1..=arity).collect();
                if rng.gen_bool(0.3) {
                    perm.shuffle(rng);
                }
                isa.push((t.clone(), perm));
            }
        }
        rels.push((format!("R{i}"), among, isa));
    }
    let mut out = String::new();
    for (i, e) in ents.iter().enumerate() {
        out.push_str(&format!("entity {e}\n"));
        if i > 0 && rng.gen_bool(0.35) {
            out.push_str(&format!("    isa: {}\n", ents[rng.gen_range(0..i)]));
        }
        for (r, among, _) in &rels {
            for (c, owner) in among.iter().enumerate() {
                if owner == e {
                    if rng.gen_bool(0.35) {
                        out.push_str(&format!("    participates(>=1): {r}:{}\n", c + 1));
                    }
                    if rng.gen_bool(0.35) {
                        out.push_str(&format!("    participates(<=1): {r}:{}\n", c + 1));
                    }
                }
            }
        }
    }
    for (r, among, isa) in &rels {
        out.push_str(&format!("relationship {r} among {}\n", among.join(", ")));
        for (t, perm) in isa {
            let p: Vec<String> = perm.iter().map(|k| k.to_string()).collect();
            out.push_str(&format!("    isa: {t}[{}]\n", p.join(",")));
        }
    }
    let binary: Vec<&String> = rels.iter().filter(|r| r.1.len() == 2).map(|r| &r.0).collect();
    for i in 1..=n_attr {
        let on_rel = !binary.is_empty() && rng.gen_bool(0.3);
        let owner = if on_rel { binary.choose(rng).unwrap().to_string() } else { ents.choose(rng).unwrap().clone() };
        let mut line = format!("attribute a{i} of {owner}");
        if rng.gen_bool(0.4) {
            line.push_str(" functional");
        }
        if !on_rel && rng.gen_bool(0.4) {
            line.push_str(" mandatory");
        }
        out.push_str(&line);
        out.push('\n');
    }
    out
}

pub fn random_facts<R: Rng>(rng: &mut R, cds: &CDSet, max_facts: usize, n_consts: usize) -> Database {
    let preds: Vec<(String, usize)> = cds.constraints.schema.iter().map(|(p, n)| (p.to_string(), n)).collect();
    let mut db = Database::new();
    for _ in 0..rng.gen_range(1..=max_facts) {
        let (p, n) = preds.choose(rng).unwrap();
        let args: Vec<Constant> = (0..*n).map(|_| Constant::named(&format!("c{}", rng.gen_range(0..n_consts)))).collect();
        db.insert(Fact { pred: p.as_str().into(), args });
    }
    db
}

pub fn random_query<R: Rng>(rng: &mut R, cds: &CDSet, max_atoms: usize, n_consts: usize) -> ConjunctiveQuery {
    let preds: Vec<(String, usize)> = cds.constraints.schema.iter().map(|(p, n)| (p.to_string(), n)).collect();
    let vars = ["X", "Y", "Z", "W"];
    let mut used: Vec<&str> = Vec::new();
    let mut atoms = Vec::new();
    for _ in 0..rng.gen_range(1..=max_atoms) {
        let (p, n) = preds.choose(rng).unwrap();
        let terms: Vec<String> = (0..*n)
            .map(|_| {
                if rng.gen_bool(0.12) {
                    format!("c{}", rng.gen_range(0..n_consts))
                } else {
                    let v = *vars.choose(rng).unwrap();
                    if !used.contains(&v) {
                        used.push(v);
                    }
                    v.to_string()
                }
            })
            .collect();
        atoms.push(format!("{p}({})", terms.join(",")));
    }
    used.shuffle(rng);
    let k = rng.gen_range(0..=used.len().min(2));
    let head = used[..k].join(",");
    parse_cq(&format!("q({head}) :- {}.", atoms.join(", "))).expect("generated query parses")
}

/// A random CD instance; `None` when the drawn schema is rejected.
pub fn random_instance<R: Rng>(rng: &mut R) -> Option<Instance> {
    let eer = random_eer(rng, 6);
    let cds = to_cds(&parse_eer(&eer).ok()?).ok()?;
    recognize_cds(&cds.constraints).ok()?;
    if cds.constraints.schema.len() > 6 || cds.constraints.schema.max_arity() > 3 {
        return None;
    }
    let db = random_facts(rng, &cds, 12, 5);
    let query = random_query(rng, &cds, 4, 5);
    Some(Instance { eer, cds, db, query })
}
