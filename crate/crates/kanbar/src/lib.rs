//! Presentation files, batch commands and deterministic reports on top of
//! [`kanbar_core`].
//!
//! A run loads one presentation (`kanbar/1` JSON), executes one command on
//! one or all applicable objects, evaluates the file's inline expectations
//! and returns a report together with an exit code: 0 when every
//! expectation matched, 1 when one did not or an object's computation was
//! refused (recorded as its `error` field), 2 for input errors.

pub mod format;
pub mod load;
pub mod run;

use std::time::Instant;

use serde_json::{json, Map, Value};

pub use format::{parse_range, BoundsDesc};
pub use load::{load, Env, InputError};
pub use run::{matches, Command, Runner};

/// Bundled presentation files.
pub const FIXTURES: &[(&str, &str)] = &[
    ("as_operad", include_str!("../fixtures/as_operad.json")),
    ("bv_operad_arity3", include_str!("../fixtures/bv_operad_arity3.json")),
    ("z2_group_ring_cat", include_str!("../fixtures/z2_group_ring_cat.json")),
    ("poset_N_k", include_str!("../fixtures/poset_N_k.json")),
    ("complexes", include_str!("../fixtures/complexes.json")),
    ("cubical", include_str!("../fixtures/cubical.json")),
    ("phi_free", include_str!("../fixtures/phi_free.json")),
    ("phi_nonfree", include_str!("../fixtures/phi_nonfree.json")),
    ("hv_squares", include_str!("../fixtures/hv_squares.json")),
    ("novikov_tower", include_str!("../fixtures/novikov_tower.json")),
    ("untangle", include_str!("../fixtures/untangle.json")),
];

pub fn fixture(name: &str) -> Option<&'static str> {
    FIXTURES.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

#[derive(Clone, Debug)]
pub enum Source {
    File(String),
    Fixture(String),
    /// In-memory text with a display name.
    Text { name: String, text: String },
}

#[derive(Clone, Debug)]
pub struct Invocation {
    pub command: Command,
    pub source: Source,
    pub object: Option<String>,
    pub degrees: Option<(i64, i64)>,
    pub scenario: Option<String>,
    pub bounds: BoundsDesc,
    pub full: bool,
    pub timing: bool,
}

impl Invocation {
    pub fn new(command: Command, source: Source) -> Invocation {
        Invocation { command, source, object: None, degrees: None, scenario: None, bounds: BoundsDesc::default(), full: false, timing: false }
    }
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub report: Value,
    pub code: i32,
}

fn source_text(s: &Source) -> Result<(String, String), InputError> {
    match s {
        Source::File(p) => std::fs::read_to_string(p).map(|t| (p.clone(), t)).map_err(|e| InputError::Usage(format!("cannot read {p}: {e}"))),
        Source::Fixture(n) => fixture(n)
            .map(|t| (format!("fixture:{n}"), t.to_string()))
            .ok_or_else(|| InputError::Usage(format!("no bundled fixture `{n}`; known: {}", FIXTURES.iter().map(|f| f.0).collect::<Vec<_>>().join(", ")))),
        Source::Text { name, text } => Ok((name.clone(), text.clone())),
    }
}

fn expectation_key(e: &Map<String, Value>) -> Result<(Command, String, Option<(i64, i64)>, Option<String>), InputError> {
    let bad = |m: &str| InputError::Schema(format!("expectation {}: {m}", Value::Object(e.clone())));
    let cmd = e.get("command").and_then(Value::as_str).and_then(Command::parse).ok_or_else(|| bad("needs a known `command`"))?;
    if cmd == Command::Report {
        return Err(bad("`report` is not an expectation command"));
    }
    let object = e.get("object").and_then(Value::as_str).ok_or_else(|| bad("needs an `object`"))?.to_string();
    let degrees = match e.get("degrees") {
        None => None,
        Some(v) => {
            let a = v.as_array().filter(|a| a.len() == 2).ok_or_else(|| bad("`degrees` must be [a, b]"))?;
            Some((a[0].as_i64().ok_or_else(|| bad("degree"))?, a[1].as_i64().ok_or_else(|| bad("degree"))?))
        }
    };
    let scenario = e.get("scenario").and_then(Value::as_str).map(str::to_string);
    if cmd == Command::Compare && scenario.is_none() {
        return Err(bad("compare needs a `scenario`"));
    }
    Ok((cmd, object, degrees, scenario))
}

/// The expected fields of an expectation (everything but the key).
fn expected_fields(e: &Map<String, Value>) -> Value {
    Value::Object(e.iter().filter(|(k, _)| !matches!(k.as_str(), "command" | "object" | "degrees" | "scenario")).map(|(k, v)| (k.clone(), v.clone())).collect())
}

/// Run one invocation. Input errors are returned as `Err`; everything
/// else, including failed expectations, is an [`Outcome`].
pub fn execute(inv: &Invocation) -> Result<Outcome, InputError> {
    let start = Instant::now();
    let (source_name, text) = source_text(&inv.source)?;
    let env = load(&text, &inv.bounds)?;
    if let Some(s) = &inv.scenario {
        if !run::SCENARIOS.contains(&s.as_str()) {
            return Err(InputError::Usage(format!("unknown scenario `{s}`; known: {}", run::SCENARIOS.join(", "))));
        }
    }
    if inv.command == Command::Compare && inv.scenario.is_none() {
        return Err(InputError::Usage("compare needs --scenario".into()));
    }
    if let Some(o) = &inv.object {
        if !env.objects.contains_key(o) {
            return Err(InputError::Usage(format!("no object named `{o}`")));
        }
    }
    let mut runner = Runner::new(&env, inv.full, inv.timing);
    let keys = env.expect.iter().map(expectation_key).collect::<Result<Vec<_>, _>>()?;

    let mut results = Vec::new();
    if inv.command == Command::Report {
        for (cmd, object, degrees, scenario) in &keys {
            let r = runner.record(*cmd, object, *degrees, scenario.as_deref())?;
            if !results.contains(&r) {
                results.push(r);
            }
        }
    } else {
        let targets: Vec<String> = match &inv.object {
            Some(o) => vec![o.clone()],
            None => env
                .order
                .iter()
                .filter(|n| {
                    let kind = env.kinds[*n];
                    let scenario = inv.scenario.as_deref();
                    run::applies(inv.command, kind, scenario)
                        && match (scenario, &env.objects[*n]) {
                            (Some(s), load::Obj::Kan { scenarios, .. }) => scenarios.iter().any(|x| x == s),
                            _ => true,
                        }
                })
                .cloned()
                .collect(),
        };
        for t in &targets {
            results.push(runner.record(inv.command, t, inv.degrees, inv.scenario.as_deref())?);
        }
    }

    // Expectations that concern this run.
    let mut checked = Vec::new();
    let mut ok = true;
    for (e, (cmd, object, degrees, scenario)) in env.expect.iter().zip(&keys) {
        let relevant = inv.command == Command::Report
            || (*cmd == inv.command
                && inv.object.as_ref().is_none_or(|o| o == object)
                && (inv.command != Command::Compare || scenario == &inv.scenario)
                && (inv.degrees.is_none() || *degrees == inv.degrees));
        if !relevant {
            continue;
        }
        // Each expectation is evaluated at its own window.
        let observed = runner.record(*cmd, object, *degrees, scenario.as_deref())?;
        let want = expected_fields(e);
        let pass = matches(&want, &observed);
        ok &= pass;
        let seen: Map<String, Value> = want.as_object().unwrap().keys().map(|k| (k.clone(), observed.get(k).cloned().unwrap_or(Value::Null))).collect();
        checked.push(json!({"expect": Value::Object(e.clone()), "pass": pass, "observed": Value::Object(seen)}));
    }

    let mut report = Map::new();
    report.insert("schema".into(), json!(format::SCHEMA));
    report.insert("engine".into(), json!({"name": "kanbar", "version": env!("CARGO_PKG_VERSION")}));
    report.insert(
        "command".into(),
        json!({
            "name": inv.command.name(),
            "source": source_name,
            "object": inv.object,
            "degrees": inv.degrees.map(|(a, b)| json!([a, b])),
            "scenario": inv.scenario,
            "emit": if inv.full { "full" } else { "summary" },
        }),
    );
    report.insert("bounds".into(), serde_json::to_value(env.bounds).expect("bounds serialize"));
    report.insert("ring".into(), json!(env.ring.to_string()));
    report.insert("results".into(), Value::Array(results));
    report.insert("expectations".into(), Value::Array(checked));
    report.insert("ok".into(), json!(ok));
    if inv.timing {
        report.insert("timing".into(), json!({"total_ms": start.elapsed().as_millis() as u64}));
    }
    let refused = report["results"].as_array().is_some_and(|rs| rs.iter().any(|r| r.get("error").is_some()));
    Ok(Outcome { report: Value::Object(report), code: if ok && !refused { 0 } else { 1 } })
}

/// Pretty JSON with a trailing newline.
pub fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json");
    s.push('\n');
    s
}
