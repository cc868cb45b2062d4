//! Canonical document output: fixed key order, two-space indentation, each
//! operator literal on one line, floats in `{:.16e}` (17 significant digits,
//! enough to read back bit-for-bit).

use std::fmt::Write;

use crate::linalg::Operator;

use super::{slh_payload, strat_payload, ComponentDecl, NetworkSpec, Payload, ReductionResult, Route};

/// Name of the single component in a serialized reduction result.
pub const REDUCED_NAME: &str = "reduced";

fn number(x: f64) -> String {
    format!("{x:.16e}")
}

fn quoted(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

fn op_lit(op: &Operator) -> String {
    let pair = |z: num_complex::Complex64| format!("[{}, {}]", number(z.re), number(z.im));
    if let Some(z) = op.as_scalar() {
        return pair(z);
    }
    let d = op.dim();
    let rows: Vec<String> = (0..d)
        .map(|r| {
            let entries: Vec<String> = (0..d).map(|c| pair(op[(r, c)])).collect();
            format!("[{}]", entries.join(", "))
        })
        .collect();
    format!("[{}]", rows.join(", "))
}

fn op_row(ops: &[Operator]) -> String {
    let items: Vec<String> = ops.iter().map(op_lit).collect();
    format!("[{}]", items.join(", "))
}

fn op_matrix(out: &mut String, key: &str, rows: &[Vec<Operator>], indent: &str, trailing: &str) {
    if rows.is_empty() {
        let _ = writeln!(out, "{indent}\"{key}\": []{trailing}");
        return;
    }
    let _ = writeln!(out, "{indent}\"{key}\": [");
    for (k, row) in rows.iter().enumerate() {
        let sep = if k + 1 < rows.len() { "," } else { "" };
        let _ = writeln!(out, "{indent}  {}{sep}", op_row(row));
    }
    let _ = writeln!(out, "{indent}]{trailing}");
}

fn component(out: &mut String, c: &ComponentDecl) {
    let ind = "      ";
    out.push_str("    {\n");
    let _ = writeln!(out, "{ind}\"name\": {},", quoted(&c.name));
    let inputs: Vec<String> = c.inputs.iter().map(|p| quoted(p)).collect();
    let _ = writeln!(out, "{ind}\"inputs\": [{}],", inputs.join(", "));
    let _ = writeln!(out, "{ind}\"form\": {},", quoted(c.payload.form()));
    match &c.payload {
        Payload::Slh { s, l, h } => {
            op_matrix(out, "S", s, ind, ",");
            let _ = writeln!(out, "{ind}\"L\": {},", op_row(l));
            let _ = writeln!(out, "{ind}\"H\": {}", op_lit(h));
        }
        Payload::Strat { e } => {
            op_matrix(out, "E", e, ind, "");
        }
    }
    out.push_str("    }");
}

/// Canonical text of a network document.
pub fn serialize_spec(spec: &NetworkSpec) -> String {
    let mut out = String::from("{\n");
    let _ = writeln!(out, "  \"hilbert_dim\": {},", spec.hilbert_dim);
    out.push_str("  \"components\": [\n");
    for (k, c) in spec.components.iter().enumerate() {
        component(&mut out, c);
        out.push_str(if k + 1 < spec.components.len() { ",\n" } else { "\n" });
    }
    out.push_str("  ],\n");
    if spec.connections.is_empty() {
        out.push_str("  \"connections\": []\n");
    } else {
        out.push_str("  \"connections\": [\n");
        for (k, c) in spec.connections.iter().enumerate() {
            let from = format!("{}.out[{}]", c.from.component, c.from.port);
            let to = format!("{}.in[{}]", c.to.component, c.to.port);
            let sep = if k + 1 < spec.connections.len() { "," } else { "" };
            let _ = writeln!(out, "    {{\"from\": {}, \"to\": {}}}{sep}", quoted(&from), quoted(&to));
        }
        out.push_str("  ]\n");
    }
    out.push_str("}\n");
    out
}

/// A reduction result as a one-component document named `reduced`, whose
/// inputs are the surviving channel labels. Route `strat` is written in
/// Stratonovich form, the others in SLH form.
pub fn serialize_model(result: &ReductionResult) -> String {
    let payload = match (&result.route, &result.strat) {
        (Route::Strat, Some(e)) => strat_payload(e),
        _ => slh_payload(&result.slh),
    };
    let inputs = result.slh.channels().iter().map(|l| l.as_str().to_string()).collect();
    serialize_spec(&NetworkSpec::single(REDUCED_NAME, inputs, payload, result.slh.dim()))
}
