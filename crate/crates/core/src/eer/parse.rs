use crate::lex::{Cursor, ParseError, Tok};

use super::{AttributeDef, EERSchema, EntityDef, RelationshipDef};

const DEF_KEYWORDS: &[&str] = &["entity", "relationship", "attribute"];
const RESERVED: &[&str] = &["entity", "relationship", "attribute", "isa", "participates", "among", "of", "functional", "mandatory"];

fn name(cur: &mut Cursor, what: &str) -> Result<String, ParseError> {
    if let Tok::Word(w) = cur.peek() {
        if RESERVED.contains(&w.as_str()) {
            return Err(cur.err(format!("`{w}` is a keyword and cannot be used as {what}")));
        }
    }
    cur.expect_ident(what)
}

fn push_unique<T: PartialEq>(v: &mut Vec<T>, x: T) {
    if !v.contains(&x) {
        v.push(x);
    }
}

fn at_def_or_eof(cur: &Cursor) -> bool {
    match cur.peek() {
        Tok::Eof => true,
        Tok::Word(w) => DEF_KEYWORDS.contains(&w.as_str()),
        _ => false,
    }
}

/// Syntax only; see [`super::parse_eer`] for the validating entry point.
pub fn parse_syntax(src: &str) -> Result<EERSchema, ParseError> {
    let mut cur = Cursor::new(src)?;
    let mut s = EERSchema::default();
    while !cur.at_eof() {
        if cur.is_word("entity") {
            cur.next();
            s.entities.push(entity(&mut cur)?);
        } else if cur.is_word("relationship") {
            cur.next();
            s.relationships.push(relationship(&mut cur)?);
        } else if cur.is_word("attribute") {
            cur.next();
            s.attributes.push(attribute(&mut cur)?);
        } else {
            return Err(cur.unexpected("`entity`, `relationship` or `attribute`"));
        }
    }
    Ok(s)
}

fn entity(cur: &mut Cursor) -> Result<EntityDef, ParseError> {
    let mut e = EntityDef {
        name: name(cur, "an entity name")?,
        isa: vec![],
        participates_min: vec![],
        participates_max: vec![],
    };
    while !at_def_or_eof(cur) {
        if cur.is_word("isa") {
            cur.next();
            cur.expect_punct(":")?;
            loop {
                let t = name(cur, "an entity name")?;
                push_unique(&mut e.isa, t);
                if !cur.eat_punct(",") {
                    break;
                }
            }
        } else if cur.is_word("participates") {
            cur.next();
            cur.expect_punct("(")?;
            let min = if cur.eat_punct(">=") {
                true
            } else if cur.eat_punct("<=") {
                false
            } else {
                return Err(cur.unexpected("`>=` or `<=`"));
            };
            let n = cur.expect_usize("a cardinality")?;
            if n != 1 {
                return Err(cur.err(format!("cardinality {n} is not supported; only 1 is allowed")));
            }
            cur.expect_punct(")")?;
            cur.expect_punct(":")?;
            loop {
                let r = name(cur, "a relationship name")?;
                cur.expect_punct(":")?;
                let c = cur.expect_usize("a component index")?;
                let list = if min { &mut e.participates_min } else { &mut e.participates_max };
                push_unique(list, (r, c));
                if !cur.eat_punct(",") {
                    break;
                }
            }
        } else {
            return Err(cur.unexpected("`isa:`, `participates(...)` or a new definition"));
        }
    }
    Ok(e)
}

fn relationship(cur: &mut Cursor) -> Result<RelationshipDef, ParseError> {
    let n = name(cur, "a relationship name")?;
    cur.expect_keyword("among")?;
    let mut among = vec![name(cur, "an entity name")?];
    while cur.eat_punct(",") {
        among.push(name(cur, "an entity name")?);
    }
    let mut r = RelationshipDef { name: n, among, isa: vec![] };
    while !at_def_or_eof(cur) {
        if cur.is_word("isa") {
            cur.next();
            cur.expect_punct(":")?;
            loop {
                let t = name(cur, "a relationship name")?;
                cur.expect_punct("[")?;
                let mut perm = vec![cur.expect_usize("a component index")?];
                while cur.eat_punct(",") {
                    perm.push(cur.expect_usize("a component index")?);
                }
                cur.expect_punct("]")?;
                push_unique(&mut r.isa, (t, perm));
                if !cur.eat_punct(",") {
                    break;
                }
            }
        } else {
            return Err(cur.unexpected("`isa:` or a new definition"));
        }
    }
    Ok(r)
}

fn attribute(cur: &mut Cursor) -> Result<AttributeDef, ParseError> {
    let n = name(cur, "an attribute name")?;
    cur.expect_keyword("of")?;
    let owner = name(cur, "an entity or relationship name")?;
    let mut a = AttributeDef { name: n, owner, functional: false, mandatory: false };
    while !at_def_or_eof(cur) {
        match cur.peek().clone() {
            Tok::Word(w) if w == "functional" => a.functional = true,
            Tok::Word(w) if w == "mandatory" => a.mandatory = true,
            Tok::Word(w) => return Err(cur.err(format!("unknown qualification keyword `{w}`"))),
            _ => return Err(cur.unexpected("`functional`, `mandatory` or a new definition")),
        }
        cur.next();
    }
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_is_free() {
        let a = parse_syntax("entity A isa: B participates(>=1): R:1 entity B").unwrap();
        let b = parse_syntax("entity A\n  participates(≥1):\n R:1\n isa: B\n\nentity B").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn repeated_clauses_merge() {
        let s = parse_syntax("entity A isa: B isa: C, B participates(<=1): R:1 participates(≤1): R:1, S:2").unwrap();
        assert_eq!(s.entities[0].isa, vec!["B", "C"]);
        assert_eq!(s.entities[0].participates_max, vec![("R".into(), 1), ("S".into(), 2)]);
    }

    #[test]
    fn qualifiers() {
        let s = parse_syntax("attribute x of A mandatory functional attribute y of A").unwrap();
        assert!(s.attributes[0].functional && s.attributes[0].mandatory);
        assert!(!s.attributes[1].functional && !s.attributes[1].mandatory);
        let e = parse_syntax("attribute x of A optional").unwrap_err();
        assert!(e.msg.contains("unknown qualification keyword"));
    }

    #[test]
    fn cardinality_other_than_one() {
        let e = parse_syntax("entity A participates(>=2): R:1").unwrap_err();
        assert!(e.msg.contains("only 1"));
    }

    #[test]
    fn error_positions() {
        let e = parse_syntax("entity A\nrelationship R among A,\n").unwrap_err();
        assert_eq!(e.line, 3);
        let e = parse_syntax("entity A\n  foo").unwrap_err();
        assert_eq!((e.line, e.col), (2, 3));
        assert!(parse_syntax("entity isa").is_err());
    }
}
