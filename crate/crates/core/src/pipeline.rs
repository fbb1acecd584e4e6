//! End-to-end certain answers.
//!
//! 1. translate the EER schema, if one is given;
//! 2. decide whether the chase exists, and stop with a witness if it does not;
//! 3. compute the level bound from the largest join graph component;
//! 4. answer through the compiled program or through the bounded chase.

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex, OnceLock};
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::chase::{
    build_chase_with, chase_exists, compute_level_bound, ChaseError, ChaseOptions, ChaseStatus, Level, LevelBound,
};
use crate::datalog::{answer, bounded_herbrand_fixpoint, EvalOptions, GroundTerm, Pred};
use crate::eer::EERSchema;
use crate::relational::{
    evaluate_cq, join_graph_components, recognize_cds, render_cds, CDSet, CdViolation, ConjunctiveQuery,
    ConstraintSet, Constant, Database, Fact, RelError,
};
use crate::rewrite::{build_pi_skolem, rewrite, DummyKind, RewriteBundle, RewriteError, RewriteOptions, Variants, EQ};
use crate::translation::{to_cds, TranslationError};

pub type Tuple = Vec<Constant>;

/// Databases up to this size are answered by the bounded chase under
/// [`PathChoice::Auto`].
pub const AUTO_CHASE_MAX_FACTS: usize = 10_000;

/// Stop levels above this need [`AnswerOptions::confirm_large`].
pub const CONFIRM_STOP_LEVEL: Level = 100_000;

#[derive(Debug, Clone)]
pub enum SchemaInput {
    Eer(EERSchema),
    Constraints(ConstraintSet),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PathChoice {
    #[default]
    Auto,
    Rewriting,
    BoundedChase,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnswerPath {
    Rewriting,
    BoundedChase,
}

impl std::fmt::Display for AnswerPath {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AnswerPath::Rewriting => "rewriting",
            AnswerPath::BoundedChase => "bounded-chase",
        })
    }
}

#[derive(Debug, Clone)]
pub struct AnswerOptions {
    pub path: PathChoice,
    pub c_d: Option<u64>,
    /// Replaces the computed stop level (and, for compilation, `δ_M`).
    pub max_level: Option<Level>,
    pub confirm_large: bool,
    /// Reject constraint sets that are not CD sets instead of chasing them best-effort.
    pub strict_cds: bool,
    pub auto_threshold: usize,
    pub chase_max_facts: Option<usize>,
    /// Fact cap of the Skolem program in [`cross_validate`].
    pub oracle_max_facts: Option<usize>,
    pub rewrite: RewriteOptions,
}

impl Default for AnswerOptions {
    fn default() -> Self {
        AnswerOptions {
            path: PathChoice::Auto,
            c_d: None,
            max_level: None,
            confirm_large: false,
            strict_cds: false,
            auto_threshold: AUTO_CHASE_MAX_FACTS,
            chase_max_facts: Some(5_000_000),
            oracle_max_facts: Some(2_000_000),
            rewrite: RewriteOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AnswerStatus {
    Consistent(BTreeSet<Tuple>),
    /// No database satisfies the constraints and contains the data, so every
    /// tuple is an answer.
    TriviallyInconsistent { kd: String, witness: (Fact, Fact) },
}

#[derive(Debug, Clone, Default)]
pub struct Diagnostics {
    pub bound: Option<LevelBound>,
    pub c_d: u64,
    pub stop_level: Option<Level>,
    pub is_cd: bool,
    /// The chase hit the stop level with dependencies still applicable.
    pub truncated: bool,
    pub program_rules: Option<usize>,
    pub notes: Vec<String>,
    pub timings: Vec<(&'static str, Duration)>,
}

#[derive(Debug, Clone)]
pub struct AnswerResult {
    pub status: AnswerStatus,
    pub path: AnswerPath,
    pub diagnostics: Diagnostics,
}

impl AnswerResult {
    pub fn answers(&self) -> Option<&BTreeSet<Tuple>> {
        match &self.status {
            AnswerStatus::Consistent(t) => Some(t),
            AnswerStatus::TriviallyInconsistent { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Translation(#[from] TranslationError),
    #[error("not a CD set: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    NotCd(Vec<CdViolation>),
    #[error(transparent)]
    Relational(#[from] RelError),
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
    #[error(transparent)]
    Chase(#[from] ChaseError),
    #[error("stop level {stop_level} exceeds {threshold}; confirm to proceed")]
    NeedsConfirmation { stop_level: Level, threshold: Level },
}

type CacheKey = (String, String, u64, Option<Level>, bool, bool);
type Compiled = Result<Arc<RewriteBundle>, RewriteError>;

/// Compiled programs keyed by constraint set, query and `c_D`. Concurrent
/// requests for the same key compile once.
#[derive(Debug, Default)]
pub struct ProgramCache {
    map: Mutex<HashMap<CacheKey, Arc<OnceLock<Compiled>>>>,
}

impl ProgramCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.map.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get_or_compile(&self, q: &ConjunctiveQuery, cds: &CDSet, c_d: u64, opts: &RewriteOptions) -> Compiled {
        let key = (
            render_cds(&cds.constraints),
            q.to_string(),
            c_d,
            opts.max_level,
            opts.variants == Variants::All,
            opts.dummy == DummyKind::Oblivious,
        );
        let cell = self.map.lock().unwrap().entry(key).or_default().clone();
        cell.get_or_init(|| rewrite(q, cds, c_d, opts).map(Arc::new)).clone()
    }
}

fn resolve(input: &SchemaInput, strict: bool) -> Result<(ConstraintSet, Option<CDSet>), PipelineError> {
    match input {
        SchemaInput::Eer(s) => {
            let cds = to_cds(s)?;
            Ok((cds.constraints.clone(), Some(cds)))
        }
        SchemaInput::Constraints(cs) => match recognize_cds(cs) {
            Ok(cds) => Ok((cs.clone(), Some(cds))),
            Err(v) if strict => Err(PipelineError::NotCd(v)),
            Err(_) => Ok((cs.clone(), None)),
        },
    }
}

fn ground_tuple(t: &[GroundTerm]) -> Option<Tuple> {
    t.iter().map(|g| g.as_constant().cloned()).collect()
}

/// Answers of the compiled program; also reports `eq@[*,*]` between two
/// distinct constants, which no consistent input produces.
pub fn answer_with_program(bundle: &RewriteBundle, db: &Database) -> Result<(BTreeSet<Tuple>, Option<(Constant, Constant)>), PipelineError> {
    let model = crate::datalog::evaluate(&bundle.pi_fin, db, &EvalOptions::default())
        .map_err(|e| PipelineError::Rewrite(RewriteError::Datalog(e)))?;
    let q = bundle.pi_fin.query.as_ref().expect("compiled programs have a query");
    let answers = model.tuples(q).iter().filter_map(|t| ground_tuple(t)).collect();
    let clash = model.tuples(&Pred::all_bullets(EQ, 2)).into_iter().find_map(|t| match (&t[0], &t[1]) {
        (GroundTerm::Const(a), GroundTerm::Const(b)) if a != b => Some((a.clone(), b.clone())),
        _ => None,
    });
    Ok((answers, clash))
}

fn chase_answers(
    db: &Database,
    cs: &ConstraintSet,
    q: &ConjunctiveQuery,
    stop: Level,
    max_facts: Option<usize>,
) -> Result<(AnswerStatus, bool), PipelineError> {
    let r = build_chase_with(db, cs, ChaseOptions { max_level: Some(stop), max_facts, max_steps: None })?;
    Ok(match r.status {
        ChaseStatus::Failed { kd, pair, .. } => (AnswerStatus::TriviallyInconsistent { kd, witness: pair }, false),
        ChaseStatus::Truncated { .. } => (AnswerStatus::Consistent(evaluate_cq(q, &r.database(), true)), true),
        ChaseStatus::Completed => (AnswerStatus::Consistent(evaluate_cq(q, &r.database(), true)), false),
    })
}

/// Certain answers with a fresh program cache.
pub fn certain_answers(
    input: &SchemaInput,
    db: &Database,
    q: &ConjunctiveQuery,
    opts: &AnswerOptions,
) -> Result<AnswerResult, PipelineError> {
    certain_answers_cached(&ProgramCache::new(), input, db, q, opts)
}

pub fn certain_answers_cached(
    cache: &ProgramCache,
    input: &SchemaInput,
    db: &Database,
    q: &ConjunctiveQuery,
    opts: &AnswerOptions,
) -> Result<AnswerResult, PipelineError> {
    let mut diag = Diagnostics::default();
    let t0 = Instant::now();
    let (cs, cds) = resolve(input, opts.strict_cds)?;
    diag.is_cd = cds.is_some();
    db.check_schema(&cs.schema)?;
    q.check(Some(&cs.schema))?;
    diag.timings.push(("translate", t0.elapsed()));

    let path_for = |choice: PathChoice| match choice {
        PathChoice::Rewriting => AnswerPath::Rewriting,
        PathChoice::BoundedChase => AnswerPath::BoundedChase,
        PathChoice::Auto if db.len() <= opts.auto_threshold => AnswerPath::BoundedChase,
        PathChoice::Auto => AnswerPath::Rewriting,
    };
    let mut path = path_for(opts.path);

    if let Some(cds) = &cds {
        let t = Instant::now();
        let ex = chase_exists(db, cds);
        diag.timings.push(("chase-exists", t.elapsed()));
        if !ex.exists {
            let status = AnswerStatus::TriviallyInconsistent {
                kd: ex.kd.unwrap_or_default(),
                witness: ex.witness.expect("a failed chase has a witness"),
            };
            return Ok(AnswerResult { status, path, diagnostics: diag });
        }
    } else if path == AnswerPath::Rewriting {
        return Err(PipelineError::Rewrite(RewriteError::Unsupported(
            "the rewriting path needs a CD set".to_string(),
        )));
    } else {
        diag.notes.push("not a CD set: bounded chase is best effort".to_string());
    }

    diag.c_d = opts.c_d.unwrap_or_else(|| join_graph_components(db).c_d as u64);
    let bound = compute_level_bound(&cs.schema, q.body.len(), diag.c_d)?;
    diag.bound = Some(bound);
    let stop = opts.max_level.unwrap_or(bound.stop_level);
    diag.stop_level = Some(stop);
    if stop > CONFIRM_STOP_LEVEL && !opts.confirm_large {
        return Err(PipelineError::NeedsConfirmation { stop_level: stop, threshold: CONFIRM_STOP_LEVEL });
    }

    if path == AnswerPath::Rewriting {
        let cds = cds.as_ref().expect("checked above");
        let t = Instant::now();
        match cache.get_or_compile(q, cds, diag.c_d, &opts.rewrite) {
            Ok(bundle) => {
                diag.timings.push(("compile", t.elapsed()));
                diag.program_rules = Some(bundle.pi_fin.rules.len());
                diag.truncated = bundle.dummy_chase.truncated;
                let t = Instant::now();
                let (answers, clash) = answer_with_program(&bundle, db)?;
                diag.timings.push(("evaluate", t.elapsed()));
                if let Some((a, b)) = clash {
                    diag.notes.push(format!("the program equates distinct constants {a} and {b}"));
                }
                return Ok(AnswerResult { status: AnswerStatus::Consistent(answers), path, diagnostics: diag });
            }
            Err(RewriteError::Unsupported(why)) if opts.path == PathChoice::Auto => {
                diag.notes.push(format!("rewriting unavailable ({why}); used the bounded chase"));
                path = AnswerPath::BoundedChase;
            }
            Err(e) => return Err(e.into()),
        }
    }

    let t = Instant::now();
    let (status, truncated) = chase_answers(db, &cs, q, stop, opts.chase_max_facts)?;
    diag.timings.push(("chase", t.elapsed()));
    diag.truncated = truncated;
    if truncated && !diag.is_cd {
        diag.notes.push("chase truncated: answers are sound but possibly incomplete".to_string());
    }
    Ok(AnswerResult { status, path, diagnostics: diag })
}

/// Answers of the Skolem program `q_eq ∪ Π^eq ∪ Π^ID ∪ Π^KD` with terms
/// nested at most `depth` deep, keeping function-free tuples.
pub fn skolem_answers(
    q: &ConjunctiveQuery,
    cs: &ConstraintSet,
    db: &Database,
    depth: usize,
    max_facts: Option<usize>,
) -> Result<BTreeSet<Tuple>, PipelineError> {
    let p = build_pi_skolem(q, cs)?;
    let opts = EvalOptions { depth_cap: Some(depth), max_facts };
    let out = answer(&p, db, &opts, true).map_err(|e| PipelineError::Rewrite(RewriteError::Datalog(e)))?;
    Ok(out.iter().filter_map(|t| ground_tuple(t)).collect())
}

/// The same herbrand model as [`skolem_answers`], with its size.
pub fn skolem_model_size(cs: &ConstraintSet, q: &ConjunctiveQuery, db: &Database, depth: usize) -> Result<usize, PipelineError> {
    let p = build_pi_skolem(q, cs)?;
    let m = bounded_herbrand_fixpoint(&p, db, depth).map_err(|e| PipelineError::Rewrite(RewriteError::Datalog(e)))?;
    Ok(m.len())
}

/// Outcome of one path in [`cross_validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PathOutcome {
    Answers(BTreeSet<Tuple>),
    Inconsistent,
    Skipped(String),
}

#[derive(Debug, Clone)]
pub struct CrossReport {
    pub chase: PathOutcome,
    pub rewriting: PathOutcome,
    pub oracle: PathOutcome,
}

impl CrossReport {
    /// Whether every path that ran agrees.
    pub fn agree(&self) -> bool {
        let ran: Vec<&PathOutcome> =
            [&self.chase, &self.rewriting, &self.oracle].into_iter().filter(|o| !matches!(o, PathOutcome::Skipped(_))).collect();
        ran.windows(2).all(|w| w[0] == w[1])
    }

    pub fn all_ran(&self) -> bool {
        ![&self.chase, &self.rewriting, &self.oracle].iter().any(|o| matches!(o, PathOutcome::Skipped(_)))
    }
}

impl std::fmt::Display for CrossReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (name, o) in [("chase", &self.chase), ("rewriting", &self.rewriting), ("oracle", &self.oracle)] {
            match o {
                PathOutcome::Answers(a) => writeln!(f, "{name}: {} answers {a:?}", a.len())?,
                PathOutcome::Inconsistent => writeln!(f, "{name}: inconsistent")?,
                PathOutcome::Skipped(why) => writeln!(f, "{name}: skipped ({why})")?,
            }
        }
        Ok(())
    }
}

fn outcome(r: Result<AnswerResult, PipelineError>) -> PathOutcome {
    match r {
        Ok(a) => match a.status {
            AnswerStatus::Consistent(t) => PathOutcome::Answers(t),
            AnswerStatus::TriviallyInconsistent { .. } => PathOutcome::Inconsistent,
        },
        Err(e) => PathOutcome::Skipped(e.to_string()),
    }
}

/// Run the bounded chase, the compiled program and the Skolem program on one
/// instance. Resource errors turn into skipped paths.
pub fn cross_validate(cds: &CDSet, db: &Database, q: &ConjunctiveQuery, opts: &AnswerOptions) -> CrossReport {
    let input = SchemaInput::Constraints(cds.constraints.clone());
    let chase = outcome(certain_answers(&input, db, q, &AnswerOptions { path: PathChoice::BoundedChase, ..opts.clone() }));
    let rewriting = outcome(certain_answers(&input, db, q, &AnswerOptions { path: PathChoice::Rewriting, ..opts.clone() }));
    let oracle = if !chase_exists(db, cds).exists {
        PathOutcome::Inconsistent
    } else {
        let c_d = opts.c_d.unwrap_or_else(|| join_graph_components(db).c_d as u64);
        match compute_level_bound(&cds.constraints.schema, q.body.len(), c_d) {
            Ok(b) => {
                let depth = opts.max_level.unwrap_or(b.delta_m) as usize;
                match skolem_answers(q, &cds.constraints, db, depth, opts.oracle_max_facts) {
                    Ok(a) => PathOutcome::Answers(a),
                    Err(e) => PathOutcome::Skipped(e.to_string()),
                }
            }
            Err(e) => PathOutcome::Skipped(e.to_string()),
        }
    };
    CrossReport { chase, rewriting, oracle }
}
