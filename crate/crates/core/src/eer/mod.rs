//! The textual EER definition language.
//!
//! ```text
//! entity Manager
//!     isa: Employee
//!     participates(>=1): Manages:1
//!     participates(<=1): Manages:1
//! relationship Manages among Manager, Dept
//!     isa: Works_in[1,2]
//! attribute since of Works_in functional mandatory
//! ```
//!
//! Layout is free: clauses are separated by keywords, not by newlines. The full
//! grammar lives in `docs/formats.md`.

mod parse;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::lex::ParseError;

pub use parse::parse_syntax;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EERSchema {
    pub entities: Vec<EntityDef>,
    pub relationships: Vec<RelationshipDef>,
    pub attributes: Vec<AttributeDef>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntityDef {
    pub name: String,
    pub isa: Vec<String>,
    /// `participates(>=1): R:c`
    pub participates_min: Vec<(String, usize)>,
    /// `participates(<=1): R:c`
    pub participates_max: Vec<(String, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationshipDef {
    pub name: String,
    pub among: Vec<String>,
    pub isa: Vec<(String, Vec<usize>)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeDef {
    pub name: String,
    pub owner: String,
    pub functional: bool,
    pub mandatory: bool,
}

impl EERSchema {
    pub fn entity(&self, name: &str) -> Option<&EntityDef> {
        self.entities.iter().find(|e| e.name == name)
    }

    pub fn relationship(&self, name: &str) -> Option<&RelationshipDef> {
        self.relationships.iter().find(|r| r.name == name)
    }
}

/// A violated schema invariant.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EerViolation {
    DuplicateName(String),
    UndefinedEntity { context: String, name: String },
    UndefinedRelationship { context: String, name: String },
    UndefinedOwner { attribute: String, owner: String },
    ArityTooSmall { relationship: String, arity: usize },
    ComponentOutOfRange { entity: String, relationship: String, component: usize, arity: usize },
    WrongParticipant { entity: String, relationship: String, component: usize, listed: String },
    NotAPermutation { relationship: String, target: String, permutation: Vec<usize> },
    IsaArityMismatch { relationship: String, target: String },
}

impl fmt::Display for EerViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use EerViolation::*;
        match self {
            DuplicateName(n) => write!(f, "duplicate name `{n}`"),
            UndefinedEntity { context, name } => write!(f, "undefined entity `{name}` in {context}"),
            UndefinedRelationship { context, name } => write!(f, "undefined relationship `{name}` in {context}"),
            UndefinedOwner { attribute, owner } => write!(f, "attribute `{attribute}` refers to undefined `{owner}`"),
            ArityTooSmall { relationship, arity } => {
                write!(f, "relationship `{relationship}` has arity {arity}; at least 2 entities are required")
            }
            ComponentOutOfRange { entity, relationship, component, arity } => write!(
                f,
                "entity `{entity}` participates in `{relationship}` at component {component}, arity mismatch (arity {arity})"
            ),
            WrongParticipant { entity, relationship, component, listed } => write!(
                f,
                "entity `{entity}` participates in `{relationship}`:{component} but that component is `{listed}`"
            ),
            NotAPermutation { relationship, target, permutation } => write!(
                f,
                "isa {relationship} -> {target}: {:?} is not a permutation",
                permutation
            ),
            IsaArityMismatch { relationship, target } => {
                write!(f, "isa {relationship} -> {target}: arity mismatch")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EerError {
    #[error("syntax error at {0}")]
    Syntax(#[from] ParseError),
    #[error("invalid schema: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Semantic(Vec<EerViolation>),
}

/// Parse and validate.
pub fn parse_eer(text: &str) -> Result<EERSchema, EerError> {
    let s = parse_syntax(text)?;
    let report = validate_eer(&s);
    if report.is_empty() {
        Ok(s)
    } else {
        Err(EerError::Semantic(report))
    }
}

/// One entry per violated invariant; empty iff the schema is well formed.
pub fn validate_eer(s: &EERSchema) -> Vec<EerViolation> {
    use EerViolation::*;
    let mut out = BTreeSet::new();
    let mut names: HashMap<&str, usize> = HashMap::new();
    let all = s
        .entities
        .iter()
        .map(|e| &e.name)
        .chain(s.relationships.iter().map(|r| &r.name))
        .chain(s.attributes.iter().map(|a| &a.name));
    for n in all {
        *names.entry(n).or_default() += 1;
    }
    for (n, c) in &names {
        if *c > 1 {
            out.insert(DuplicateName(n.to_string()));
        }
    }

    for e in &s.entities {
        for t in &e.isa {
            if s.entity(t).is_none() {
                out.insert(UndefinedEntity { context: format!("isa of `{}`", e.name), name: t.clone() });
            }
        }
        for (r, c) in e.participates_min.iter().chain(&e.participates_max) {
            match s.relationship(r) {
                None => {
                    out.insert(UndefinedRelationship { context: format!("participates of `{}`", e.name), name: r.clone() });
                }
                Some(rd) if *c == 0 || *c > rd.among.len() => {
                    out.insert(ComponentOutOfRange {
                        entity: e.name.clone(),
                        relationship: r.clone(),
                        component: *c,
                        arity: rd.among.len(),
                    });
                }
                Some(rd) if rd.among[*c - 1] != e.name => {
                    out.insert(WrongParticipant {
                        entity: e.name.clone(),
                        relationship: r.clone(),
                        component: *c,
                        listed: rd.among[*c - 1].clone(),
                    });
                }
                Some(_) => {}
            }
        }
    }

    for r in &s.relationships {
        let n = r.among.len();
        if n < 2 {
            out.insert(ArityTooSmall { relationship: r.name.clone(), arity: n });
        }
        for e in &r.among {
            if s.entity(e).is_none() {
                out.insert(UndefinedEntity { context: format!("among of `{}`", r.name), name: e.clone() });
            }
        }
        for (t, perm) in &r.isa {
            let mut sorted = perm.clone();
            sorted.sort_unstable();
            if sorted != (1..=n).collect::<Vec<_>>() {
                out.insert(NotAPermutation { relationship: r.name.clone(), target: t.clone(), permutation: perm.clone() });
            }
            match s.relationship(t) {
                None => {
                    out.insert(UndefinedRelationship { context: format!("isa of `{}`", r.name), name: t.clone() });
                }
                Some(td) if td.among.len() != n => {
                    out.insert(IsaArityMismatch { relationship: r.name.clone(), target: t.clone() });
                }
                Some(_) => {}
            }
        }
    }

    for a in &s.attributes {
        if s.entity(&a.owner).is_none() && s.relationship(&a.owner).is_none() {
            out.insert(UndefinedOwner { attribute: a.name.clone(), owner: a.owner.clone() });
        }
    }
    out.into_iter().collect()
}

impl fmt::Display for EERSchema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.entities {
            writeln!(f, "entity {}", e.name)?;
            if !e.isa.is_empty() {
                writeln!(f, "    isa: {}", e.isa.join(", "))?;
            }
            for (kw, list) in [(">=", &e.participates_min), ("<=", &e.participates_max)] {
                if !list.is_empty() {
                    let parts: Vec<String> = list.iter().map(|(r, c)| format!("{r}:{c}")).collect();
                    writeln!(f, "    participates({kw}1): {}", parts.join(", "))?;
                }
            }
        }
        for r in &self.relationships {
            writeln!(f, "relationship {} among {}", r.name, r.among.join(", "))?;
            if !r.isa.is_empty() {
                let parts: Vec<String> = r
                    .isa
                    .iter()
                    .map(|(t, p)| format!("{t}[{}]", p.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")))
                    .collect();
                writeln!(f, "    isa: {}", parts.join(", "))?;
            }
        }
        for a in &self.attributes {
            write!(f, "attribute {} of {}", a.name, a.owner)?;
            if a.functional {
                f.write_str(" functional")?;
            }
            if a.mandatory {
                f.write_str(" mandatory")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// The running example: employees, managers and departments.
pub const EXAMPLE_SCHEMA: &str = "\
entity Employee
    participates(>=1): Works_in:1
    participates(<=1): Works_in:1
entity Manager
    isa: Employee
    participates(>=1): Manages:1
    participates(<=1): Manages:1
entity Dept
relationship Works_in among Employee, Dept
relationship Manages among Manager, Dept
    isa: Works_in[1,2]
attribute emp_name of Employee
attribute dept_name of Dept
attribute since of Works_in
";
