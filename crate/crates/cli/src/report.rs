//! Deterministic JSON reports: sorted keys, floats at 17 significant digits, config hash
//! and the tolerances in force.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use cylinder_core::verify::tol;
use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::config::{Application, RunConfig};

/// Converts any serializable value to JSON; non-finite floats become `null`.
pub fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

/// A JSON float, or `null` if it is not finite.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

/// Pretty-printed canonical text of `v`.
pub fn canonical(v: &Value) -> String {
    let mut out = String::new();
    write_value(v, 0, &mut out);
    out.push('\n');
    out
}

fn write_value(v: &Value, indent: usize, out: &mut String) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => match (n.as_i64(), n.as_u64(), n.as_f64()) {
            (Some(i), _, _) => write!(out, "{i}").unwrap(),
            (None, Some(u), _) => write!(out, "{u}").unwrap(),
            (None, None, Some(x)) => write!(out, "{x:.16e}").unwrap(),
            _ => out.push_str("null"),
        },
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Array(items) => {
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_value(item, indent + 1, out);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            out.push_str("{\n");
            let sorted: BTreeMap<&String, &Value> = map.iter().collect();
            for (i, (k, item)) in sorted.iter().enumerate() {
                write!(out, "{}{}: ", pad(indent + 1), Value::String((*k).clone())).unwrap();
                write_value(item, indent + 1, out);
                out.push_str(if i + 1 < sorted.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
    }
}

/// SHA-256 of the canonical form of the configuration, output directory excluded.
pub fn config_hash(cfg: &RunConfig) -> String {
    let digest = Sha256::digest(canonical(&to_value(&cfg.hashed())).as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Tolerances applied by the pipelines and the acceptance checks.
pub fn tolerances() -> Value {
    let entries = [
        ("spectrum.eigen_residual", cylinder_core::spectrum::EIGEN_RESIDUAL_TOL),
        ("spectrum.root_bracket", cylinder_core::spectrum::ROOT_BRACKET_TOL),
        ("orbit.seed_offset", cylinder_core::orbit::SEED_OFFSET),
        ("orbit.sink_radius", cylinder_core::orbit::SINK_RADIUS),
        ("acceptance.nu0", tol::NU0),
        ("acceptance.nu1", tol::NU1),
        ("acceptance.phi0", tol::PHI0),
        ("acceptance.rho0", tol::RHO0),
        ("acceptance.simplicity", tol::SIMPLICITY),
        ("acceptance.profile", tol::PROFILE),
        ("acceptance.solvability", tol::SOLVABILITY),
        ("acceptance.reduced_coefficient", tol::REDUCED_COEFFICIENT),
        ("acceptance.orbit_residual", tol::ORBIT_RESIDUAL),
        ("acceptance.endpoint", tol::ENDPOINT),
        ("acceptance.shooting_factor", tol::SHOOTING_FACTOR),
        ("acceptance.sink", tol::SINK),
        ("acceptance.float_conjugate", tol::FLOAT_CONJUGATE),
        ("acceptance.slope", tol::SLOPE),
        ("acceptance.series", tol::SERIES),
        ("acceptance.identity", tol::IDENTITY),
        ("acceptance.preset_coefficient", tol::PRESET_COEFFICIENT),
        ("acceptance.conserved_drift", tol::CONSERVED_DRIFT),
        ("acceptance.flow_force_gap", tol::FLOW_FORCE_GAP),
        ("acceptance.residual_order", tol::RESIDUAL_ORDER),
        ("acceptance.critical_height", tol::CRITICAL_HEIGHT),
        ("acceptance.flat_residual", tol::FLAT_RESIDUAL),
        ("acceptance.eye_slope", tol::EYE_SLOPE),
        ("acceptance.eye_slope_tol", tol::EYE_SLOPE_TOL),
        ("acceptance.tangent", tol::TANGENT),
    ];
    Value::Object(entries.iter().map(|(k, v)| (k.to_string(), num(*v))).collect())
}

/// Wraps command results with the configuration, its hash and the tolerances.
pub fn envelope(app: Application, cfg: &RunConfig, results: Value) -> Value {
    let mut m = Map::new();
    m.insert("application".into(), Value::String(app.name().into()));
    m.insert("config".into(), to_value(&cfg.hashed()));
    m.insert("config_sha256".into(), Value::String(config_hash(cfg)));
    m.insert("results".into(), results);
    m.insert("tolerances".into(), tolerances());
    m.insert("version".into(), Value::String(env!("CARGO_PKG_VERSION").into()));
    Value::Object(m)
}
