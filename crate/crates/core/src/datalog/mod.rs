//! Positive Datalog with unary function symbols and annotated predicates.
//!
//! Text format (see `docs/formats.md`):
//!
//! ```text
//! works_in(X, f_sigma10_2(X)) :- employee(X).
//! eq@[*,*](Y1,Y2) :- manages@[f_sigma10_2(*),*](X1,Y1), manages@[*,*](X2,Y2), eq@[f_sigma10_2(*),*](X1,X2).
//! ?- q@[*].
//! ```

mod eval;
mod parse;

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::lex::ParseError;
use crate::relational::{Constant, Sym};

pub use eval::{answer, bounded_herbrand_fixpoint, evaluate, seminaive_fixpoint, EvalOptions, Model};
pub use parse::parse_program;

/// One argument annotation: a chain of function symbols applied to `*`,
/// outermost first. The empty chain is `*`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AnnElem(pub Arc<[Sym]>);

impl AnnElem {
    pub fn bullet() -> Self {
        AnnElem(Arc::from(Vec::new()))
    }

    pub fn is_bullet(&self) -> bool {
        self.0.is_empty()
    }

    /// `f(self)`.
    pub fn wrap(&self, f: &Sym) -> Self {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.push(f.clone());
        v.extend(self.0.iter().cloned());
        AnnElem(Arc::from(v))
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }
}

impl fmt::Display for AnnElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in self.0.iter() {
            write!(f, "{s}(")?;
        }
        f.write_str("*")?;
        for _ in self.0.iter() {
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// A predicate, optionally annotated with one element per argument.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pred {
    pub name: Sym,
    pub ann: Option<Vec<AnnElem>>,
}

impl Pred {
    pub fn plain(name: &str) -> Self {
        Pred { name: name.into(), ann: None }
    }

    pub fn annotated(name: &str, ann: Vec<AnnElem>) -> Self {
        Pred { name: name.into(), ann: Some(ann) }
    }

    pub fn all_bullets(name: &str, arity: usize) -> Self {
        Pred::annotated(name, vec![AnnElem::bullet(); arity])
    }
}

impl fmt::Display for Pred {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        if let Some(a) = &self.ann {
            f.write_str("@[")?;
            for (i, e) in a.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{e}")?;
            }
            f.write_str("]")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Sym),
    Const(Constant),
    App(Sym, Box<Term>),
}

impl Term {
    pub fn var(v: &str) -> Self {
        Term::Var(v.into())
    }

    pub fn is_function_free(&self) -> bool {
        !matches!(self, Term::App(..))
    }

    fn collect_vars<'a>(&'a self, out: &mut Vec<&'a Sym>) {
        match self {
            Term::Var(v) => out.push(v),
            Term::Const(_) => {}
            Term::App(_, t) => t.collect_vars(out),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::Const(c) => write!(f, "{c}"),
            Term::App(s, t) => write!(f, "{s}({t})"),
        }
    }
}

/// A ground term of the Herbrand universe.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroundTerm {
    Const(Constant),
    App(Sym, Box<GroundTerm>),
}

impl GroundTerm {
    pub fn depth(&self) -> usize {
        match self {
            GroundTerm::Const(_) => 0,
            GroundTerm::App(_, t) => 1 + t.depth(),
        }
    }

    pub fn as_constant(&self) -> Option<&Constant> {
        match self {
            GroundTerm::Const(c) => Some(c),
            GroundTerm::App(..) => None,
        }
    }
}

impl fmt::Display for GroundTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroundTerm::Const(c) => write!(f, "{c}"),
            GroundTerm::App(s, t) => write!(f, "{s}({t})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub pred: Pred,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(pred: Pred, args: Vec<Term>) -> Self {
        Atom { pred, args }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.pred)?;
        for (i, t) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{t}")?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rule {
    pub head: Atom,
    pub body: Vec<Atom>,
}

impl Rule {
    pub fn new(head: Atom, body: Vec<Atom>) -> Self {
        Rule { head, body }
    }

    pub fn is_function_free(&self) -> bool {
        self.head.args.iter().chain(self.body.iter().flat_map(|a| a.args.iter())).all(Term::is_function_free)
    }

    /// Every head variable occurs in the body.
    pub fn is_range_restricted(&self) -> bool {
        let mut body = Vec::new();
        for a in &self.body {
            for t in &a.args {
                t.collect_vars(&mut body);
            }
        }
        let mut head = Vec::new();
        for t in &self.head.args {
            t.collect_vars(&mut head);
        }
        head.iter().all(|v| body.contains(v))
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        if !self.body.is_empty() {
            f.write_str(" :- ")?;
            for (i, a) in self.body.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{a}")?;
            }
        }
        f.write_str(".")
    }
}

/// A set of rules and the predicate holding the answers.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Program {
    pub rules: Vec<Rule>,
    pub query: Option<Pred>,
}

impl Program {
    pub fn new(rules: Vec<Rule>, query: Option<Pred>) -> Self {
        Program { rules, query }
    }

    pub fn is_function_free(&self) -> bool {
        self.rules.iter().all(Rule::is_function_free)
    }

    /// Rules sorted and deduplicated.
    pub fn normalized(mut self) -> Self {
        self.rules.sort();
        self.rules.dedup();
        self
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        if let Some(q) = &self.query {
            writeln!(f, "?- {q}.")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DatalogError {
    #[error("syntax error at {0}")]
    Parse(#[from] ParseError),
    #[error("rule is not range-restricted: {0}")]
    NotRangeRestricted(String),
    #[error("rule uses function symbols: {0}")]
    NotFunctionFree(String),
    #[error("predicate {0} is used with arities {1} and {2}")]
    ArityClash(String, usize, usize),
    #[error("the program has no query predicate")]
    NoQuery,
    #[error("resource limit exceeded: more than {limit} {what}")]
    ResourceLimit { what: &'static str, limit: usize },
}
