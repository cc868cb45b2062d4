use std::collections::HashSet;

use num_complex::Complex64;
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::linalg::{Operator, Tolerances};

use super::{ComponentDecl, Connection, NetworkSpec, Payload, PortRef};

fn schema(path: &str, msg: impl AsRef<str>) -> Error {
    Error::InvalidValue(format!("{path}: {}", msg.as_ref()))
}

fn object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| schema(path, "expected an object"))
}

fn array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| schema(path, "expected an array"))
}

fn string<'a>(v: &'a Value, path: &str) -> Result<&'a str> {
    v.as_str().ok_or_else(|| schema(path, "expected a string"))
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| schema(path, format!("missing field {key:?}")))
}

fn reject_unknown(obj: &Map<String, Value>, allowed: &[&str], path: &str) -> Result<()> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(schema(path, format!("unknown field {k:?}"))),
        None => Ok(()),
    }
}

fn complex(v: &Value, path: &str) -> Result<Complex64> {
    let pair = array(v, path)?;
    let nums: Option<Vec<f64>> = pair.iter().map(Value::as_f64).collect();
    match nums.as_deref() {
        Some([re, im]) => Ok(Complex64::new(*re, *im)),
        _ => Err(schema(path, "expected [re, im]")),
    }
}

/// `[re, im]` lifts to a multiple of the identity; otherwise a `d x d` array of pairs.
fn operator(v: &Value, d: usize, path: &str) -> Result<Operator> {
    let outer = array(v, path)?;
    if outer.first().is_some_and(Value::is_number) {
        return Ok(Operator::scalar(d, complex(v, path)?));
    }
    if outer.len() != d {
        return Err(Error::DimMismatch {
            expected: d,
            found: outer.len(),
        });
    }
    let mut rows = Vec::with_capacity(d);
    for (r, row) in outer.iter().enumerate() {
        let row_path = format!("{path}[{r}]");
        let entries = array(row, &row_path)?;
        if entries.len() != d {
            return Err(Error::DimMismatch {
                expected: d,
                found: entries.len(),
            });
        }
        rows.push(
            entries
                .iter()
                .enumerate()
                .map(|(c, z)| complex(z, &format!("{row_path}[{c}]")))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    Operator::from_rows(rows)
}

fn operator_list(v: &Value, n: usize, d: usize, path: &str) -> Result<Vec<Operator>> {
    let items = array(v, path)?;
    if items.len() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            found: items.len(),
        });
    }
    items
        .iter()
        .enumerate()
        .map(|(k, x)| operator(x, d, &format!("{path}[{k}]")))
        .collect()
}

fn operator_matrix(v: &Value, n: usize, d: usize, path: &str) -> Result<Vec<Vec<Operator>>> {
    let rows = array(v, path)?;
    if rows.len() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            found: rows.len(),
        });
    }
    rows.iter()
        .enumerate()
        .map(|(r, row)| operator_list(row, n, d, &format!("{path}[{r}]")))
        .collect()
}

fn check_name(name: &str, forbidden: &[char], what: &str, path: &str) -> Result<()> {
    if name.is_empty() {
        return Err(schema(path, format!("{what} must not be empty")));
    }
    if let Some(ch) = name.chars().find(|c| forbidden.contains(c)) {
        return Err(schema(path, format!("{what} {name:?} must not contain {ch:?}")));
    }
    if name.ends_with('\'') {
        return Err(schema(path, format!("{what} {name:?} must not end with a prime")));
    }
    Ok(())
}

fn component(v: &Value, d: usize, tol: &Tolerances, path: &str) -> Result<ComponentDecl> {
    let obj = object(v, path)?;
    let name = string(field(obj, "name", path)?, &format!("{path}.name"))?.to_string();
    check_name(&name, &['.', '[', ']'], "component name", path)?;

    let inputs_path = format!("{path}.inputs");
    let inputs: Vec<String> = array(field(obj, "inputs", path)?, &inputs_path)?
        .iter()
        .enumerate()
        .map(|(k, p)| string(p, &format!("{inputs_path}[{k}]")).map(str::to_string))
        .collect::<Result<_>>()?;
    let mut seen = HashSet::new();
    for p in &inputs {
        check_name(p, &['[', ']'], "port name", &inputs_path)?;
        if !seen.insert(p.as_str()) {
            return Err(Error::LabelCollision(format!("{name}.{p}")));
        }
    }
    let n = inputs.len();

    let form = string(field(obj, "form", path)?, &format!("{path}.form"))?;
    let payload = match form {
        "slh" => {
            reject_unknown(obj, &["name", "inputs", "form", "S", "L", "H"], path)?;
            Payload::Slh {
                s: operator_matrix(field(obj, "S", path)?, n, d, &format!("{path}.S"))?,
                l: operator_list(field(obj, "L", path)?, n, d, &format!("{path}.L"))?,
                h: operator(field(obj, "H", path)?, d, &format!("{path}.H"))?,
            }
        }
        "strat" => {
            reject_unknown(obj, &["name", "inputs", "form", "E"], path)?;
            Payload::Strat {
                e: operator_matrix(field(obj, "E", path)?, n + 1, d, &format!("{path}.E"))?,
            }
        }
        other => return Err(schema(&format!("{path}.form"), format!("unknown form {other:?}"))),
    };
    let decl = ComponentDecl { name, inputs, payload };
    match &decl.payload {
        Payload::Slh { .. } => decl.slh(tol).map(|_| ()),
        Payload::Strat { .. } => decl.strat(tol).map(|_| ()),
    }
    .map_err(|e| match e {
        Error::InvariantViolation(msg) => Error::InvariantViolation(format!("{path} ({}): {msg}", decl.name)),
        other => other,
    })?;
    Ok(decl)
}

/// Splits `comp.out[port]` / `comp.in[port]` at the first `.`.
fn port_ref(text: &str, direction: &str, path: &str) -> Result<PortRef> {
    let bad = || schema(path, format!("expected \"component.{direction}[port]\", found {text:?}"));
    let (component, rest) = text.split_once('.').ok_or_else(bad)?;
    let port = rest
        .strip_prefix(direction)
        .and_then(|r| r.strip_prefix('['))
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(bad)?;
    if component.is_empty() || port.is_empty() {
        return Err(bad());
    }
    Ok(PortRef {
        component: component.to_string(),
        port: port.to_string(),
    })
}

fn resolve(spec_components: &[ComponentDecl], r: &PortRef, text: &str) -> Result<()> {
    let known = spec_components
        .iter()
        .find(|c| c.name == r.component)
        .is_some_and(|c| c.inputs.contains(&r.port));
    if known {
        Ok(())
    } else {
        Err(Error::UnknownPort(text.to_string()))
    }
}

/// Parses and validates a network document. Model invariants (unitary `S`,
/// self-adjoint `H`, Hermitian-structured `E`) are checked within `tol.eq_tol`.
pub fn parse_network(text: &str, tol: &Tolerances) -> Result<NetworkSpec> {
    let root: Value = serde_json::from_str(text).map_err(|e| Error::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let obj = object(&root, "document")?;
    reject_unknown(obj, &["hilbert_dim", "components", "connections"], "document")?;

    let d = field(obj, "hilbert_dim", "document")?
        .as_u64()
        .filter(|&d| d >= 1)
        .ok_or_else(|| schema("hilbert_dim", "expected a positive integer"))? as usize;

    let comps = array(field(obj, "components", "document")?, "components")?;
    let mut components = Vec::with_capacity(comps.len());
    let mut names = HashSet::new();
    for (k, c) in comps.iter().enumerate() {
        let decl = component(c, d, tol, &format!("components[{k}]"))?;
        if !names.insert(decl.name.clone()) {
            return Err(Error::LabelCollision(decl.name));
        }
        components.push(decl);
    }
    if components.is_empty() {
        return Err(schema("components", "at least one component is required"));
    }

    let conns = array(field(obj, "connections", "document")?, "connections")?;
    let mut connections = Vec::with_capacity(conns.len());
    let mut sources = HashSet::new();
    let mut targets = HashSet::new();
    for (k, c) in conns.iter().enumerate() {
        let path = format!("connections[{k}]");
        let o = object(c, &path)?;
        reject_unknown(o, &["from", "to"], &path)?;
        let from_text = string(field(o, "from", &path)?, &format!("{path}.from"))?;
        let to_text = string(field(o, "to", &path)?, &format!("{path}.to"))?;
        let from = port_ref(from_text, "out", &format!("{path}.from"))?;
        let to = port_ref(to_text, "in", &format!("{path}.to"))?;
        resolve(&components, &from, from_text)?;
        resolve(&components, &to, to_text)?;
        if !sources.insert(from.clone()) {
            return Err(Error::DuplicateConnection(from_text.to_string()));
        }
        if !targets.insert(to.clone()) {
            return Err(Error::DuplicateConnection(to_text.to_string()));
        }
        connections.push(Connection { from, to });
    }

    Ok(NetworkSpec {
        hilbert_dim: d,
        components,
        connections,
    })
}
