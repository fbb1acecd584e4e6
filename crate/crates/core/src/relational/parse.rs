//! Text formats: `.facts` databases, `.cq` queries and `.cds` constraint sets.

use crate::lex::{Cursor, ParseError, Tok};

use super::{
    ConjunctiveQuery, ConstraintSet, Constant, Database, Dependency, Fact, InclusionDependency, KeyDependency, QAtom,
    QTerm, RelError, RelationalSchema, Sym, TaggedDep,
};

fn constant(cur: &mut Cursor) -> Result<Constant, ParseError> {
    let c = match cur.peek().clone() {
        Tok::Word(w) => w,
        Tok::Str(s) => s,
        _ => return Err(cur.unexpected("a constant")),
    };
    if c.contains('φ') {
        return Err(cur.err("fresh constants (φ) cannot appear in input"));
    }
    cur.next();
    Ok(Constant::NonFresh(Sym::from(c)))
}

/// `pred(c1,...,cn).` per fact, `#` comments.
pub fn parse_facts(src: &str) -> Result<Database, ParseError> {
    let mut cur = Cursor::new(src)?;
    let mut db = Database::new();
    while !cur.at_eof() {
        let pred = cur.expect_ident("a predicate name")?;
        cur.expect_punct("(")?;
        let mut args = vec![constant(&mut cur)?];
        while cur.eat_punct(",") {
            args.push(constant(&mut cur)?);
        }
        cur.expect_punct(")")?;
        cur.expect_punct(".")?;
        db.insert(Fact { pred: pred.as_str().into(), args });
    }
    Ok(db)
}

fn is_var(w: &str) -> bool {
    w.starts_with(|c: char| c.is_ascii_uppercase() || c == '_')
}

fn qterm(cur: &mut Cursor) -> Result<QTerm, ParseError> {
    match cur.peek().clone() {
        Tok::Word(w) if is_var(&w) => {
            cur.next();
            Ok(QTerm::Var(w.as_str().into()))
        }
        _ => constant(cur).map(QTerm::Const),
    }
}

/// One rule `q(X,Y) :- p(X,Z), r(Z,Y,'c').`; uppercase or `_` words are variables.
pub fn parse_cq(src: &str) -> Result<ConjunctiveQuery, RelError> {
    let mut cur = Cursor::new(src)?;
    let name = cur.expect_ident("the query name")?;
    cur.expect_punct("(")?;
    let mut head = Vec::new();
    if !cur.is_punct(")") {
        loop {
            match cur.peek().clone() {
                Tok::Word(w) if is_var(&w) => {
                    cur.next();
                    head.push(Sym::from(w.as_str()));
                }
                _ => return Err(cur.unexpected("a head variable").into()),
            }
            if !cur.eat_punct(",") {
                break;
            }
        }
    }
    cur.expect_punct(")")?;
    cur.expect_punct(":-")?;
    let mut body = Vec::new();
    loop {
        let pred = cur.expect_ident("a predicate name")?;
        cur.expect_punct("(")?;
        let mut terms = vec![qterm(&mut cur)?];
        while cur.eat_punct(",") {
            terms.push(qterm(&mut cur)?);
        }
        cur.expect_punct(")")?;
        body.push(QAtom { pred: pred.as_str().into(), terms });
        if !cur.eat_punct(",") {
            break;
        }
    }
    cur.expect_punct(".")?;
    if !cur.at_eof() {
        return Err(cur.err("exactly one query rule is expected").into());
    }
    let q = ConjunctiveQuery { name: name.as_str().into(), head, body };
    q.check(None)?;
    Ok(q)
}

fn positions(cur: &mut Cursor, open: &str, close: &str) -> Result<Vec<usize>, ParseError> {
    cur.expect_punct(open)?;
    let mut v = vec![cur.expect_usize("a position")?];
    while cur.eat_punct(",") {
        v.push(cur.expect_usize("a position")?);
    }
    cur.expect_punct(close)?;
    Ok(v)
}

fn rule_tag(comment: &str) -> Option<u8> {
    let i = comment.find("by rule")?;
    comment[i + 7..].trim_start().split(|c: char| !c.is_ascii_digit()).next()?.parse().ok()
}

/// Line-oriented constraint file:
///
/// ```text
/// relation works_in/2
/// id: works_in[1] <= employee[1]   # by rule 3
/// kd: key(works_in) = {1}          # by rule 11
/// ```
///
/// Dependencies are labelled `sigma1..sigmaN` in file order.
pub fn parse_cds(src: &str) -> Result<ConstraintSet, RelError> {
    let mut schema = RelationalSchema::new();
    let mut deps = Vec::new();
    for (ln, raw) in src.lines().enumerate() {
        let (code, comment) = match raw.find('#') {
            Some(i) => (&raw[..i], &raw[i..]),
            None => (raw, ""),
        };
        if code.trim().is_empty() {
            continue;
        }
        let relocate = |e: ParseError| ParseError::new(ln + 1, e.col, e.msg);
        let mut cur = Cursor::new(code).map_err(relocate)?;
        let kw = cur.expect_ident("`relation`, `id:` or `kd:`").map_err(relocate)?;
        let dep = match kw.as_str() {
            "relation" => {
                let name = cur.expect_ident("a predicate name").map_err(relocate)?;
                cur.expect_punct("/").map_err(relocate)?;
                let arity = cur.expect_usize("an arity").map_err(relocate)?;
                schema.add(&name, arity)?;
                None
            }
            "id" => {
                cur.expect_punct(":").map_err(relocate)?;
                let l = cur.expect_ident("a predicate name").map_err(relocate)?;
                let lc = positions(&mut cur, "[", "]").map_err(relocate)?;
                cur.expect_punct("<=").map_err(relocate)?;
                let r = cur.expect_ident("a predicate name").map_err(relocate)?;
                let rc = positions(&mut cur, "[", "]").map_err(relocate)?;
                Some(Dependency::Id(InclusionDependency::new(&l, &lc, &r, &rc)))
            }
            "kd" => {
                cur.expect_punct(":").map_err(relocate)?;
                cur.expect_keyword("key").map_err(relocate)?;
                cur.expect_punct("(").map_err(relocate)?;
                let p = cur.expect_ident("a predicate name").map_err(relocate)?;
                cur.expect_punct(")").map_err(relocate)?;
                cur.expect_punct("=").map_err(relocate)?;
                let k = positions(&mut cur, "{", "}").map_err(relocate)?;
                Some(Dependency::Kd(KeyDependency::new(&p, &k)))
            }
            other => return Err(ParseError::new(ln + 1, 1, format!("unknown declaration `{other}`")).into()),
        };
        if !cur.at_eof() {
            return Err(relocate(cur.err("trailing input")).into());
        }
        if let Some(dep) = dep {
            deps.push((dep, rule_tag(comment)));
        }
    }
    let deps = deps
        .into_iter()
        .enumerate()
        .map(|(i, (dep, rule))| TaggedDep { label: format!("sigma{}", i + 1), rule, dep })
        .collect();
    ConstraintSet::new(schema, deps)
}

pub fn render_cds(cs: &ConstraintSet) -> String {
    let mut out = String::new();
    for (p, a) in cs.schema.iter() {
        out.push_str(&format!("relation {p}/{a}\n"));
    }
    for t in &cs.deps {
        let kind = match t.dep {
            Dependency::Id(_) => "id",
            Dependency::Kd(_) => "kd",
        };
        let line = format!("{kind}: {}", t.dep);
        match t.rule {
            Some(r) => out.push_str(&format!("{line:<40} # {}, by rule {r}\n", t.label)),
            None => out.push_str(&format!("{line:<40} # {}\n", t.label)),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn facts_with_comments_and_quotes() {
        let db = parse_facts("# data\nplayer(pirlo, acMilan).\nteam('A C', 2).\n").unwrap();
        assert_eq!(db.len(), 2);
        assert!(db.contains(&Fact::new("team", &["A C", "2"])));
        assert!(parse_facts("p('φ1').").is_err());
        let e = parse_facts("p(a)\nq(b).").unwrap_err();
        assert_eq!(e.line, 2);
    }

    #[test]
    fn query_shape() {
        let q = parse_cq("q(X,Y) :- p(X,Z), r(Z,Y,'c').").unwrap();
        assert_eq!(q.body.len(), 2);
        assert_eq!(q.body[1].terms[2], QTerm::Const(Constant::named("c")));
        assert_eq!(q.to_string(), "q(X,Y) :- p(X,Z), r(Z,Y,c).");
        assert!(parse_cq("q(X) :- p(Y).").is_err());
        assert!(parse_cq("q(X) :- p(X). q(X) :- r(X).").is_err());
    }

    #[test]
    fn cds_round_trip() {
        let src = "relation r/2\nrelation e/1\nid: r[1] <= e[1]  # by rule 3\nid: r[2] ⊆ e[1]\nkd: key(r) = {1} # sigma3, by rule 11\n";
        let cs = parse_cds(src).unwrap();
        assert_eq!(cs.deps.len(), 3);
        assert_eq!(cs.deps[0].rule, Some(3));
        assert_eq!(cs.deps[2].rule, Some(11));
        let again = parse_cds(&render_cds(&cs)).unwrap();
        assert_eq!(again, cs);
    }
}
