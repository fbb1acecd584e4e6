//! `eerq`: certain answers over EER schemata from the command line.
//!
//! Exit status is 0 on success, 1 on a domain failure and 2 on a usage, I/O
//! or parse error. Errors are reported on stderr as a single
//! `ERROR <code>: <message>` line.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use eerq::chase::{build_chase_with, build_eq_chase_with, chase_exists, compute_level_bound, ChaseOptions, ChaseStatus};
use eerq::eer::{parse_syntax, validate_eer, EXAMPLE_SCHEMA};
use eerq::pipeline::{
    certain_answers, cross_validate, AnswerOptions, AnswerResult, AnswerStatus, PathChoice, PathOutcome,
    Tuple,
};
use eerq::relational::{
    join_graph_components, parse_cds, parse_cq, parse_facts, recognize_cds, render_cds, ConjunctiveQuery,
    ConstraintSet,
};
use eerq::rewrite::{rewrite, RewriteOptions, Variants};
use eerq::translation::to_cds;
use eerq::{Database, Fact};

#[derive(Parser)]
#[command(name = "eerq", version, about = "Certain answers to conjunctive queries under EER schemata")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the dependencies of a schema
    Translate {
        #[command(flatten)]
        schema: SchemaArg,
        #[arg(long, value_enum, default_value_t = Emit::Text)]
        emit: Emit,
    },
    /// Decide whether the chase of the data exists
    Check {
        #[command(flatten)]
        schema: SchemaArg,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum, default_value_t = Emit::Text)]
        emit: Emit,
    },
    /// Build the chase up to a level
    Chase {
        #[command(flatten)]
        schema: SchemaArg,
        #[arg(long)]
        data: PathBuf,
        /// Used only for the default level bound
        #[arg(long)]
        query: Option<PathBuf>,
        #[arg(long)]
        max_level: Option<u64>,
        #[arg(long)]
        cd_bound: Option<u64>,
        /// Keep equalities as eq facts instead of merging
        #[arg(long)]
        eq: bool,
        #[arg(long, value_enum, default_value_t = Emit::Text)]
        emit: Emit,
    },
    /// Compile a query into a function-free program
    Rewrite {
        #[command(flatten)]
        schema: SchemaArg,
        #[arg(long)]
        query: PathBuf,
        /// Data to compute the component bound from
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        cd_bound: Option<u64>,
        #[arg(long)]
        max_level: Option<u64>,
        /// Print the intermediate programs as well
        #[arg(long)]
        stages: bool,
        #[arg(long)]
        all_variants: bool,
        #[arg(long, value_enum, default_value_t = Emit::Text)]
        emit: Emit,
    },
    /// Compute certain answers
    Answer(AnswerArgs),
    /// Check an EER schema
    Validate {
        #[command(flatten)]
        schema: SchemaArg,
        #[arg(long, value_enum, default_value_t = Emit::Text)]
        emit: Emit,
    },
}

#[derive(Args)]
struct SchemaArg {
    /// `.cds` files hold dependencies, anything else is read as EER; `example`
    /// names the built-in Employee/Manager/Dept schema
    #[arg(long)]
    schema: PathBuf,
}

#[derive(Args)]
struct AnswerArgs {
    #[command(flatten)]
    schema: SchemaArg,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    query: PathBuf,
    #[arg(long, value_enum, default_value_t = PathArg::Auto)]
    path: PathArg,
    #[arg(long)]
    max_level: Option<u64>,
    #[arg(long)]
    cd_bound: Option<u64>,
    #[arg(long)]
    strict_cds: bool,
    /// Proceed even when the stop level is very large
    #[arg(long)]
    confirm: bool,
    #[arg(long)]
    fail_on_inconsistent: bool,
    #[arg(long)]
    all_variants: bool,
    /// Include wall-clock timings in the diagnostics
    #[arg(long)]
    timings: bool,
    #[arg(long, value_enum, default_value_t = Emit::Text)]
    emit: Emit,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Emit {
    Text,
    Json,
    Dot,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PathArg {
    Auto,
    Rewrite,
    Chase,
    Both,
}

struct Failure {
    code: &'static str,
    exit: u8,
    message: String,
}

impl Failure {
    fn usage(code: &'static str, message: impl Into<String>) -> Self {
        Failure { code, exit: 2, message: message.into() }
    }

    fn domain(code: &'static str, message: impl Into<String>) -> Self {
        Failure { code, exit: 1, message: message.into() }
    }
}

/// What a command produced: stdout text and the exit status.
struct Output {
    text: String,
    exit: u8,
}

impl Output {
    fn ok(text: String) -> Self {
        Output { text, exit: 0 }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::usage("io", format!("{}: {e}", path.display())))
}

enum Loaded {
    Eer(eerq::eer::EERSchema),
    Cds(ConstraintSet),
}

fn load_schema(a: &SchemaArg) -> Result<Loaded, Failure> {
    let text = if a.schema.as_os_str() == "example" { EXAMPLE_SCHEMA.to_string() } else { read(&a.schema)? };
    if a.schema.extension().is_some_and(|e| e == "cds") {
        parse_cds(&text).map(Loaded::Cds).map_err(|e| Failure::usage("parse", format!("{}: {e}", a.schema.display())))
    } else {
        parse_syntax(&text).map(Loaded::Eer).map_err(|e| Failure::usage("parse", format!("{}: {e}", a.schema.display())))
    }
}

fn constraints(a: &SchemaArg) -> Result<ConstraintSet, Failure> {
    match load_schema(a)? {
        Loaded::Cds(cs) => Ok(cs),
        Loaded::Eer(s) => to_cds(&s).map(|c| c.constraints).map_err(|e| Failure::domain("schema", e.to_string())),
    }
}

fn load_data(p: &Path, cs: &ConstraintSet) -> Result<Database, Failure> {
    let db = parse_facts(&read(p)?).map_err(|e| Failure::usage("parse", format!("{}: {e}", p.display())))?;
    db.check_schema(&cs.schema).map_err(|e| Failure::usage("data", e.to_string()))?;
    Ok(db)
}

fn load_query(p: &Path, cs: &ConstraintSet) -> Result<ConjunctiveQuery, Failure> {
    let q = parse_cq(&read(p)?).map_err(|e| Failure::usage("parse", format!("{}: {e}", p.display())))?;
    q.check(Some(&cs.schema)).map_err(|e| Failure::usage("query", e.to_string()))?;
    Ok(q)
}

fn envelope(command: &str, status: &str, answers: Value, diagnostics: Value, result: Value) -> String {
    let v = json!({
        "command": command,
        "status": status,
        "answers": answers,
        "diagnostics": diagnostics,
        "result": result,
    });
    serde_json::to_string_pretty(&v).expect("json values serialize") + "\n"
}

fn fact_json(f: &Fact) -> Value {
    json!({ "pred": f.pred.to_string(), "args": f.args.iter().map(|c| c.to_string()).collect::<Vec<_>>() })
}

fn tuples_json(t: &BTreeSet<Tuple>) -> Value {
    t.iter().map(|row| row.iter().map(|c| c.to_string()).collect::<Vec<_>>()).collect()
}

fn tuples_text(t: &BTreeSet<Tuple>) -> String {
    t.iter().map(|row| row.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",") + "\n").collect()
}

fn describe_kd(cs: &ConstraintSet, label: &str) -> String {
    match cs.deps.iter().find(|t| t.label == label) {
        Some(t) => format!("{} ({label})", t.dep),
        None => label.to_string(),
    }
}

fn no_dot(emit: Emit, command: &str) -> Result<(), Failure> {
    if emit == Emit::Dot {
        return Err(Failure::usage("usage", format!("`{command}` has no DOT output")));
    }
    Ok(())
}

fn cmd_translate(schema: &SchemaArg, emit: Emit) -> Result<Output, Failure> {
    no_dot(emit, "translate")?;
    let cs = constraints(schema)?;
    Ok(Output::ok(match emit {
        Emit::Json => {
            let deps: Vec<Value> = cs
                .deps
                .iter()
                .map(|t| json!({ "label": t.label, "rule": t.rule, "dependency": t.dep.to_string() }))
                .collect();
            let rels: Vec<Value> = cs.schema.iter().map(|(p, n)| json!({ "name": p.to_string(), "arity": n })).collect();
            envelope("translate", "ok", Value::Null, json!({}), json!({ "relations": rels, "dependencies": deps }))
        }
        _ => render_cds(&cs),
    }))
}

fn cmd_validate(schema: &SchemaArg, emit: Emit) -> Result<Output, Failure> {
    no_dot(emit, "validate")?;
    let report: Vec<String> = match load_schema(schema)? {
        Loaded::Eer(s) => validate_eer(&s).iter().map(|v| v.to_string()).collect(),
        Loaded::Cds(cs) => match recognize_cds(&cs) {
            Ok(_) => Vec::new(),
            Err(v) => v.iter().map(|v| v.to_string()).collect(),
        },
    };
    let exit = u8::from(!report.is_empty());
    let text = match emit {
        Emit::Json => envelope(
            "validate",
            if report.is_empty() { "ok" } else { "invalid" },
            Value::Null,
            json!({}),
            json!({ "violations": report }),
        ),
        _ if report.is_empty() => "ok\n".to_string(),
        _ => report.iter().map(|l| format!("{l}\n")).collect(),
    };
    Ok(Output { text, exit })
}

fn cmd_check(schema: &SchemaArg, data: &Path, emit: Emit) -> Result<Output, Failure> {
    no_dot(emit, "check")?;
    let cs = constraints(schema)?;
    let db = load_data(data, &cs)?;
    let cds = recognize_cds(&cs).map_err(|v| {
        Failure::domain("not-cd", v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))
    })?;
    let ex = chase_exists(&db, &cds);
    let exit = u8::from(!ex.exists);
    let text = match emit {
        Emit::Json => {
            let witness = ex.witness.as_ref().map(|(a, b)| json!([fact_json(a), fact_json(b)]));
            envelope(
                "check",
                if ex.exists { "exists" } else { "fails" },
                Value::Null,
                json!({}),
                json!({ "exists": ex.exists, "kd": ex.kd, "witness": witness }),
            )
        }
        _ => match (&ex.kd, &ex.witness) {
            (Some(kd), Some((a, b))) => {
                format!("chase does not exist\nkd: {}\nwitness: {a} {b}\n", describe_kd(&cs, kd))
            }
            _ => "chase exists\n".to_string(),
        },
    };
    Ok(Output { text, exit })
}

#[allow(clippy::too_many_arguments)]
fn cmd_chase(
    schema: &SchemaArg,
    data: &Path,
    query: Option<&Path>,
    max_level: Option<u64>,
    cd_bound: Option<u64>,
    eq: bool,
    emit: Emit,
) -> Result<Output, Failure> {
    let cs = constraints(schema)?;
    let db = load_data(data, &cs)?;
    let atoms = match query {
        Some(p) => load_query(p, &cs)?.body.len(),
        None => 1,
    };
    let level = match max_level {
        Some(l) => l,
        None => {
            let c_d = cd_bound.unwrap_or_else(|| join_graph_components(&db).c_d as u64);
            compute_level_bound(&cs.schema, atoms, c_d).map_err(|e| Failure::domain("bound", e.to_string()))?.stop_level
        }
    };
    let opts = ChaseOptions { max_level: Some(level), max_facts: Some(5_000_000), max_steps: None };
    if eq {
        no_dot(emit, "chase --eq")?;
        let r = build_eq_chase_with(&db, &cs, opts).map_err(|e| Failure::domain("limit", e.to_string()))?;
        let facts = r.all_facts();
        let text = match emit {
            Emit::Json => {
                let fs: Vec<Value> = facts.iter().map(|(f, l)| json!({ "fact": fact_json(f), "level": l })).collect();
                envelope("chase", "ok", Value::Null, json!({ "max_level": level }), json!({ "facts": fs }))
            }
            _ => facts.iter().map(|(f, l)| format!("{f} {l}\n")).collect(),
        };
        return Ok(Output::ok(text));
    }
    let r = build_chase_with(&db, &cs, opts).map_err(|e| Failure::domain("limit", e.to_string()))?;
    let (status, exit) = match &r.status {
        ChaseStatus::Completed => ("completed", 0),
        ChaseStatus::Truncated { .. } => ("truncated", 0),
        ChaseStatus::Failed { .. } => ("failed", 1),
    };
    let text = match emit {
        Emit::Dot => r.to_dot(),
        Emit::Json => {
            let fs: Vec<Value> = r.facts.iter().map(|(f, l)| json!({ "fact": fact_json(f), "level": l })).collect();
            let failure = match &r.status {
                ChaseStatus::Failed { kd, pair, .. } => json!({ "kd": kd, "witness": [fact_json(&pair.0), fact_json(&pair.1)] }),
                _ => Value::Null,
            };
            envelope("chase", status, Value::Null, json!({ "max_level": level }), json!({ "facts": fs, "failure": failure }))
        }
        Emit::Text => {
            let mut t = r.listing();
            match &r.status {
                ChaseStatus::Failed { kd, pair, .. } => {
                    t.push_str(&format!("# failed: {} on {} {}\n", describe_kd(&cs, kd), pair.0, pair.1))
                }
                ChaseStatus::Truncated { .. } => t.push_str(&format!("# truncated at level {level}\n")),
                ChaseStatus::Completed => {}
            }
            t
        }
    };
    Ok(Output { text, exit })
}

#[allow(clippy::too_many_arguments)]
fn cmd_rewrite(
    schema: &SchemaArg,
    query: &Path,
    data: Option<&Path>,
    cd_bound: Option<u64>,
    max_level: Option<u64>,
    stages: bool,
    all_variants: bool,
    emit: Emit,
) -> Result<Output, Failure> {
    let cs = constraints(schema)?;
    let cds = recognize_cds(&cs).map_err(|v| {
        Failure::domain("not-cd", v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))
    })?;
    let q = load_query(query, &cs)?;
    let c_d = match (cd_bound, data) {
        (Some(c), _) => c,
        (None, Some(p)) => join_graph_components(&load_data(p, &cs)?).c_d as u64,
        (None, None) => 1,
    };
    let opts = RewriteOptions {
        max_level,
        variants: if all_variants { Variants::All } else { Variants::Derivable },
        ..RewriteOptions::default()
    };
    let b = rewrite(&q, &cds, c_d, &opts).map_err(|e| Failure::domain("rewrite", e.to_string()))?;
    let text = match emit {
        Emit::Dot => b.dummy_chase.to_dot(),
        Emit::Json => {
            let rules: Vec<String> = b.pi_fin.rules.iter().map(|r| r.to_string()).collect();
            let query = b.pi_fin.query.as_ref().map(|p| p.to_string());
            let diag = json!({
                "c_d": c_d,
                "delta_m": b.bound.delta_m,
                "depth": b.depth,
                "dummy_chase_facts": b.dummy_chase.nodes.len(),
                "truncated": b.dummy_chase.truncated,
            });
            let mut result = json!({ "rules": rules, "query": query });
            if stages {
                result["stages"] = Value::String(b.stages_text());
            }
            envelope("rewrite", "ok", Value::Null, diag, result)
        }
        Emit::Text if stages => format!("{}# pi_fin\n{}", b.stages_text(), b.pi_fin),
        Emit::Text => b.pi_fin.to_string(),
    };
    Ok(Output::ok(text))
}

fn answer_options(a: &AnswerArgs, path: PathChoice) -> AnswerOptions {
    AnswerOptions {
        path,
        c_d: a.cd_bound,
        max_level: a.max_level,
        confirm_large: a.confirm,
        strict_cds: a.strict_cds,
        rewrite: RewriteOptions {
            max_level: a.max_level,
            variants: if a.all_variants { Variants::All } else { Variants::Derivable },
            ..RewriteOptions::default()
        },
        ..AnswerOptions::default()
    }
}

fn diagnostics_json(r: &AnswerResult, timings: bool) -> Value {
    let d = &r.diagnostics;
    let bound = d.bound.map(|b| {
        json!({
            "delta_c": b.delta_c,
            "delta_d": b.delta_d,
            "delta_m": b.delta_m,
            "stop_level": b.stop_level,
        })
    });
    let mut v = json!({
        "path": r.path.to_string(),
        "c_d": d.c_d,
        "bound": bound,
        "stop_level": d.stop_level,
        "is_cd": d.is_cd,
        "truncated": d.truncated,
        "program_rules": d.program_rules,
        "notes": d.notes,
    });
    if timings {
        v["timings_ms"] = d.timings.iter().map(|(k, t)| json!({ "stage": k, "ms": t.as_secs_f64() * 1e3 })).collect();
    }
    v
}

fn cmd_answer(a: &AnswerArgs) -> Result<Output, Failure> {
    no_dot(a.emit, "answer")?;
    let input = match load_schema(&a.schema)? {
        Loaded::Eer(s) => {
            let v = validate_eer(&s);
            if !v.is_empty() {
                let msg = v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ");
                return Err(Failure::domain("schema", msg));
            }
            eerq::pipeline::SchemaInput::Eer(s)
        }
        Loaded::Cds(cs) => eerq::pipeline::SchemaInput::Constraints(cs),
    };
    let cs = match &input {
        eerq::pipeline::SchemaInput::Eer(s) => to_cds(s).map_err(|e| Failure::domain("schema", e.to_string()))?.constraints,
        eerq::pipeline::SchemaInput::Constraints(cs) => cs.clone(),
    };
    let db = load_data(&a.data, &cs)?;
    let q = load_query(&a.query, &cs)?;

    if a.path == PathArg::Both {
        let cds = recognize_cds(&cs).map_err(|v| {
            Failure::domain("not-cd", v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))
        })?;
        let report = cross_validate(&cds, &db, &q, &answer_options(a, PathChoice::Auto));
        if !report.agree() {
            return Err(Failure::domain("disagreement", report.to_string().trim_end().replace('\n', "; ")));
        }
        let outcome = [&report.chase, &report.rewriting, &report.oracle]
            .into_iter()
            .find(|o| !matches!(o, PathOutcome::Skipped(_)))
            .cloned()
            .ok_or_else(|| Failure::domain("limit", report.to_string().trim_end().replace('\n', "; ")))?;
        let paths = |o: &PathOutcome| match o {
            PathOutcome::Answers(_) => "ran".to_string(),
            PathOutcome::Inconsistent => "inconsistent".to_string(),
            PathOutcome::Skipped(w) => format!("skipped: {w}"),
        };
        let diag = json!({
            "path": "both",
            "chase": paths(&report.chase),
            "rewriting": paths(&report.rewriting),
            "oracle": paths(&report.oracle),
        });
        return Ok(match outcome {
            PathOutcome::Answers(t) => Output::ok(match a.emit {
                Emit::Json => envelope("answer", "consistent", tuples_json(&t), diag, Value::Null),
                _ => tuples_text(&t),
            }),
            _ => Output {
                text: match a.emit {
                    Emit::Json => envelope("answer", "inconsistent", Value::Null, diag, Value::Null),
                    _ => "INCONSISTENT\n".to_string(),
                },
                exit: u8::from(a.fail_on_inconsistent),
            },
        });
    }

    let path = match a.path {
        PathArg::Auto => PathChoice::Auto,
        PathArg::Rewrite => PathChoice::Rewriting,
        _ => PathChoice::BoundedChase,
    };
    let r = certain_answers(&input, &db, &q, &answer_options(a, path)).map_err(|e| match e {
        eerq::pipeline::PipelineError::NeedsConfirmation { .. } => Failure::domain("confirm", format!("{e}; pass --confirm")),
        eerq::pipeline::PipelineError::NotCd(_) => Failure::domain("not-cd", e.to_string()),
        eerq::pipeline::PipelineError::Rewrite(eerq::rewrite::RewriteError::Unsupported(_)) => {
            Failure::domain("unsupported", e.to_string())
        }
        _ => Failure::domain("limit", e.to_string()),
    })?;
    for n in &r.diagnostics.notes {
        eprintln!("note: {n}");
    }
    let diag = diagnostics_json(&r, a.timings);
    Ok(match &r.status {
        AnswerStatus::Consistent(t) => Output::ok(match a.emit {
            Emit::Json => envelope("answer", "consistent", tuples_json(t), diag, Value::Null),
            _ => tuples_text(t),
        }),
        AnswerStatus::TriviallyInconsistent { kd, witness } => Output {
            text: match a.emit {
                Emit::Json => envelope(
                    "answer",
                    "inconsistent",
                    Value::Null,
                    diag,
                    json!({ "kd": kd, "witness": [fact_json(&witness.0), fact_json(&witness.1)] }),
                ),
                _ => format!("INCONSISTENT {} {} {}\n", describe_kd(&cs, kd), witness.0, witness.1),
            },
            exit: u8::from(a.fail_on_inconsistent),
        },
    })
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    match &cli.command {
        Command::Translate { schema, emit } => cmd_translate(schema, *emit),
        Command::Validate { schema, emit } => cmd_validate(schema, *emit),
        Command::Check { schema, data, emit } => cmd_check(schema, data, *emit),
        Command::Chase { schema, data, query, max_level, cd_bound, eq, emit } => {
            cmd_chase(schema, data, query.as_deref(), *max_level, *cd_bound, *eq, *emit)
        }
        Command::Rewrite { schema, query, data, cd_bound, max_level, stages, all_variants, emit } => {
            cmd_rewrite(schema, query, data.as_deref(), *cd_bound, *max_level, *stages, *all_variants, *emit)
        }
        Command::Answer(a) => cmd_answer(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            if !e.use_stderr() {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let msg = e.to_string();
            eprintln!("ERROR usage: {}", msg.lines().next().unwrap_or("").trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    match run(&cli) {
        Ok(out) => {
            print!("{}", out.text);
            ExitCode::from(out.exit)
        }
        Err(f) => {
            eprintln!("ERROR {}: {}", f.code, f.message.replace('\n', " "));
            ExitCode::from(f.exit)
        }
    }
}
