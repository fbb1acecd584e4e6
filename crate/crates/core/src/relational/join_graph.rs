use std::collections::{BTreeMap, HashMap};

use super::{Constant, Database, Fact};

/// Connected components of the join graph (facts adjacent when they share a
/// constant) and the size of the largest one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JoinGraph {
    pub components: Vec<Vec<Fact>>,
    pub c_d: usize,
}

fn find(p: &mut [usize], mut x: usize) -> usize {
    while p[x] != x {
        p[x] = p[p[x]];
        x = p[x];
    }
    x
}

pub fn join_graph_components(db: &Database) -> JoinGraph {
    let facts: Vec<&Fact> = db.iter().collect();
    let mut parent: Vec<usize> = (0..facts.len()).collect();
    let mut owner: HashMap<&Constant, usize> = HashMap::new();
    for (i, f) in facts.iter().enumerate() {
        for c in &f.args {
            match owner.get(c) {
                Some(&j) => {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
                None => {
                    owner.insert(c, i);
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<Fact>> = BTreeMap::new();
    for (i, f) in facts.iter().enumerate() {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push((*f).clone());
    }
    let components: Vec<Vec<Fact>> = groups.into_values().collect();
    let c_d = components.iter().map(Vec::len).max().unwrap_or(0);
    JoinGraph { components, c_d }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shared_constant_joins() {
        let db: Database = [Fact::new("manager", &["m"]), Fact::new("works_in", &["m", "d"])].into_iter().collect();
        let g = join_graph_components(&db);
        assert_eq!((g.components.len(), g.c_d), (1, 2));
    }

    #[test]
    fn disjoint_and_empty() {
        let db: Database = [Fact::new("e1", &["a"]), Fact::new("e2", &["b"])].into_iter().collect();
        let g = join_graph_components(&db);
        assert_eq!((g.components.len(), g.c_d), (2, 1));
        let g = join_graph_components(&Database::new());
        assert_eq!((g.components.len(), g.c_d), (0, 0));
    }
}
