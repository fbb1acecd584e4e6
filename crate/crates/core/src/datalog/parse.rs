use crate::lex::{Cursor, ParseError, Tok};
use crate::relational::{Constant, Sym};

use super::{AnnElem, Atom, Pred, Program, Rule, Term};

fn is_var(w: &str) -> bool {
    w.starts_with(|c: char| c.is_ascii_uppercase() || c == '_')
}

fn ann_elem(cur: &mut Cursor) -> Result<AnnElem, ParseError> {
    let mut chain: Vec<Sym> = Vec::new();
    loop {
        if cur.eat_punct("*") {
            break;
        }
        let f = cur.expect_ident("`*` or a function symbol")?;
        cur.expect_punct("(")?;
        chain.push(f.as_str().into());
    }
    for _ in 0..chain.len() {
        cur.expect_punct(")")?;
    }
    Ok(AnnElem(chain.into()))
}

fn pred(cur: &mut Cursor) -> Result<Pred, ParseError> {
    let name = cur.expect_ident("a predicate name")?;
    if is_var(&name) {
        return Err(cur.err(format!("predicate names must start in lowercase: `{name}`")));
    }
    let ann = if cur.eat_punct("@") {
        cur.expect_punct("[")?;
        let mut v = Vec::new();
        if !cur.is_punct("]") {
            v.push(ann_elem(cur)?);
            while cur.eat_punct(",") {
                v.push(ann_elem(cur)?);
            }
        }
        cur.expect_punct("]")?;
        Some(v)
    } else {
        None
    };
    Ok(Pred { name: name.as_str().into(), ann })
}

fn term(cur: &mut Cursor) -> Result<Term, ParseError> {
    match cur.peek().clone() {
        Tok::Word(w) if is_var(&w) => {
            cur.next();
            Ok(Term::Var(w.as_str().into()))
        }
        Tok::Word(w) if matches!(cur.peek_at(1), Tok::Punct("(")) => {
            cur.next();
            cur.next();
            let inner = term(cur)?;
            cur.expect_punct(")")?;
            Ok(Term::App(w.as_str().into(), Box::new(inner)))
        }
        Tok::Word(w) | Tok::Str(w) => {
            cur.next();
            Ok(Term::Const(Constant::NonFresh(w.as_str().into())))
        }
        _ => Err(cur.unexpected("a term")),
    }
}

fn atom(cur: &mut Cursor) -> Result<Atom, ParseError> {
    let (line, col) = cur.position();
    let p = pred(cur)?;
    cur.expect_punct("(")?;
    let mut args = Vec::new();
    if !cur.is_punct(")") {
        args.push(term(cur)?);
        while cur.eat_punct(",") {
            args.push(term(cur)?);
        }
    }
    cur.expect_punct(")")?;
    if let Some(a) = &p.ann {
        if a.len() != args.len() {
            return Err(ParseError::new(
                line,
                col,
                format!("annotation of `{}` has {} elements for {} arguments", p.name, a.len(), args.len()),
            ));
        }
    }
    Ok(Atom { pred: p, args })
}

/// Rules `head :- b1, ..., bn.`, facts `head.`, and at most one `?- pred.`
pub fn parse_program(src: &str) -> Result<Program, ParseError> {
    let mut cur = Cursor::new(src)?;
    let mut prog = Program::default();
    while !cur.at_eof() {
        if cur.eat_punct("?-") {
            if prog.query.is_some() {
                return Err(cur.err("more than one query directive"));
            }
            prog.query = Some(pred(&mut cur)?);
            cur.expect_punct(".")?;
            continue;
        }
        let head = atom(&mut cur)?;
        let mut body = Vec::new();
        if cur.eat_punct(":-") {
            body.push(atom(&mut cur)?);
            while cur.eat_punct(",") {
                body.push(atom(&mut cur)?);
            }
        }
        cur.expect_punct(".")?;
        prog.rules.push(Rule { head, body });
    }
    Ok(prog)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let src = "works_in(X,f_sigma10_2(X)) :- employee(X).\n\
                   eq@[*,*](Y1,Y2) :- manages@[f(*),*](X1,Y1), manages@[*,*](X2,Y2), eq@[f(*),*](X1,X2).\n\
                   p('Big Co',a).\n\
                   ?- q@[*].\n";
        let p = parse_program(src).unwrap();
        assert_eq!(p.rules.len(), 3);
        assert_eq!(p.query.as_ref().unwrap().to_string(), "q@[*]");
        assert_eq!(parse_program(&p.to_string()).unwrap(), p);
    }

    #[test]
    fn nested_annotation() {
        let p = parse_program("r@[g(f(*)),*](X,Y) :- s(X,Y).").unwrap();
        let ann = p.rules[0].head.pred.ann.as_ref().unwrap();
        assert_eq!(ann[0].depth(), 2);
        assert_eq!(ann[0].0[0].as_ref(), "g");
    }

    #[test]
    fn errors() {
        assert!(parse_program("p(X) :- q(X)").is_err());
        assert!(parse_program("p@[*](X,Y) :- q(X,Y).").is_err());
        assert!(parse_program("P(X) :- q(X).").is_err());
        assert!(parse_program("?- q. ?- r.").is_err());
        assert!(parse_program("p@[f(*](X) :- q(X).").is_err());
    }
}
