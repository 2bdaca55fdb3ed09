use serde_json::{json, Map, Value as Json};

use strnum::semantics::{Assignment, Value};
use strnum::{print, Formula, Ident, ModelSpec, ParseError, Sort};

pub const SCHEMA: &str = "strnum/1";

pub fn formula(f: &Formula) -> Json {
    Json::String(print(f))
}

pub fn sort(s: Sort) -> Json {
    Json::String(s.to_string())
}

pub fn vars(vs: &[(Ident, Sort)]) -> Json {
    vs.iter()
        .map(|(v, s)| json!({ "name": v.as_str(), "sort": sort(*s) }))
        .collect()
}

/// Values in surface syntax: quoted words or `epsilon`, decimal numbers as
/// strings so that large values survive JSON readers.
pub fn value<N: std::fmt::Display>(v: &Value<N>) -> Json {
    json!({
        "sort": sort(match v {
            Value::Str(_) => Sort::Str,
            Value::Num(_) => Sort::Num,
        }),
        "value": v.to_string(),
    })
}

pub fn assignment<N: std::fmt::Display>(a: &Assignment<N>) -> Json {
    let mut m = Map::new();
    for (k, v) in a {
        m.insert(k.as_str().to_owned(), value(v));
    }
    Json::Object(m)
}

pub fn bindings_text<N: std::fmt::Display>(a: &Assignment<N>) -> String {
    a.iter().map(|(k, v)| format!("{k} = {v}")).collect::<Vec<_>>().join(", ")
}

pub fn model(m: &ModelSpec) -> Json {
    let w = m.witness_bounds();
    json!({
        "universe": m.universe.to_string(),
        "max_str_len": m.max_str_len,
        "max_num": m.max_num,
        "witness": { "max_str_len": w.max_str_len, "max_num": w.max_num },
    })
}

pub fn parse_error(e: &ParseError, source: &str, origin: &str) -> Json {
    let (line, column) = e.span.line_col(source);
    json!({
        "kind": "parse",
        "origin": origin,
        "message": e.message,
        "span": { "start": e.span.start, "end": e.span.end },
        "line": line,
        "column": column,
        "expected": e.expected,
    })
}

/// `message`, the offending line and a caret under the span.
pub fn parse_error_text(e: &ParseError, source: &str, origin: &str) -> String {
    let (line, column) = e.span.line_col(source);
    let text = source.lines().nth(line.saturating_sub(1)).unwrap_or("");
    let width = e.span.end.saturating_sub(e.span.start).clamp(1, text.len().saturating_sub(column - 1).max(1));
    let mut out = format!(
        "error: {}\n  --> {origin}:{line}:{column}\n   | {text}\n   | {}{}",
        e.message,
        " ".repeat(column - 1),
        "^".repeat(width)
    );
    if !e.expected.is_empty() {
        out.push_str(&format!("\n   = expected {}", e.expected.join(", ")));
    }
    out
}
