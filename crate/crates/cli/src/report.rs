//! Report values and their JSON form.
//!
//! Floats are written as decimal scientific literals with 17 significant digits, integers as
//! integers, so identical runs give byte-identical files.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use dkt_core::diffk::KClassObservable;
use dkt_core::graded::{EtaValue, LaurentScalar, Numerics};
use dkt_core::C64;
use serde_json::{Map, Number, Value};

use crate::CliError;

/// Schema tag written into every report.
pub const REPORT_SCHEMA: &str = "dkt-report/1";

/// A float as a 17-significant-digit JSON number; non-finite values become strings.
pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::String(format!("{x}"));
    }
    let s = format!("{x:.16e}");
    Value::Number(s.parse::<Number>().expect("formatted float is a JSON number"))
}

pub fn complex(z: C64) -> Value {
    let mut m = Map::new();
    m.insert("re".into(), num(z.re));
    m.insert("im".into(), num(z.im));
    Value::Object(m)
}

/// Laurent coefficients keyed by total degree (`u^k` sits at degree `2k`).
pub fn laurent(l: &LaurentScalar) -> Value {
    let mut m = Map::new();
    for (k, c) in l.terms() {
        m.insert(k.to_string(), if c.im == 0.0 { num(c.re) } else { complex(c) });
    }
    Value::Object(m)
}

pub fn eta(e: &EtaValue) -> Value {
    let mut m = Map::new();
    m.insert("u_degree".into(), Value::from(e.u_power));
    m.insert("value_mod_1".into(), num(e.value));
    Value::Object(m)
}

pub fn observable(o: &KClassObservable) -> Value {
    let mut periods = Map::new();
    for (c, p) in &o.periods {
        periods.insert(c.to_string(), laurent(p));
    }
    let mut m = Map::new();
    m.insert("degree".into(), Value::from(o.degree));
    m.insert("rank".into(), Value::from(o.rank));
    m.insert("periods".into(), Value::Object(periods));
    Value::Object(m)
}

pub fn numerics(n: &Numerics) -> Value {
    let mut m = Map::new();
    m.insert("circle_points".into(), Value::from(n.circle_points));
    m.insert("sphere_theta".into(), Value::from(n.sphere_theta));
    m.insert("sphere_phi".into(), Value::from(n.sphere_phi));
    m.insert("interval_order".into(), Value::from(n.interval_order));
    Value::Object(m)
}

/// Rewrites every float in a serialized value into the fixed 17-digit form.
pub fn normalize(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => num(n.as_f64().unwrap_or(f64::NAN)),
        Value::Array(a) => Value::Array(a.into_iter().map(normalize).collect()),
        Value::Object(m) => Value::Object(m.into_iter().map(|(k, v)| (k, normalize(v))).collect()),
        other => other,
    }
}

/// One named scalar of a request result.
#[derive(Clone, Debug)]
pub struct Quantity {
    pub value: Value,
    pub residual: f64,
    /// Whether the residual is held to the tolerance.
    pub checked: bool,
}

impl Quantity {
    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("value".into(), self.value.clone());
        m.insert("residual".into(), num(self.residual));
        m.insert("checked".into(), Value::Bool(self.checked));
        Value::Object(m)
    }
}

/// Two grid levels and the Richardson estimate of one scalar.
#[derive(Clone, Debug)]
pub struct Convergence {
    pub name: String,
    pub fine: f64,
    pub coarse: f64,
    pub fine_residual: f64,
    pub coarse_residual: f64,
    pub richardson: f64,
}

/// Extrapolation assuming second-order error and a refinement ratio of two.
pub fn richardson(fine: f64, coarse: f64) -> f64 {
    fine + (fine - coarse) / 3.0
}

impl Convergence {
    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("name".into(), Value::String(self.name.clone()));
        m.insert("fine".into(), num(self.fine));
        m.insert("coarse".into(), num(self.coarse));
        m.insert("fine_residual".into(), num(self.fine_residual));
        m.insert("coarse_residual".into(), num(self.coarse_residual));
        m.insert("richardson".into(), num(self.richardson));
        Value::Object(m)
    }
}

#[derive(Clone, Debug)]
pub struct RequestReport {
    pub out: String,
    pub op: String,
    pub inputs: Value,
    pub values: BTreeMap<String, Quantity>,
    pub notes: Vec<String>,
    pub convergence: Vec<Convergence>,
    pub error: Option<String>,
    pub breach: bool,
    pub wall_time_s: f64,
}

impl RequestReport {
    pub fn status(&self) -> &'static str {
        if self.error.is_some() {
            "error"
        } else if self.breach {
            "tolerance"
        } else {
            "ok"
        }
    }

    pub fn to_json(&self, with_time: bool) -> Value {
        let mut m = Map::new();
        m.insert("out".into(), Value::String(self.out.clone()));
        m.insert("op".into(), Value::String(self.op.clone()));
        m.insert("inputs".into(), normalize(self.inputs.clone()));
        m.insert("status".into(), Value::String(self.status().into()));
        if let Some(e) = &self.error {
            m.insert("error".into(), Value::String(e.clone()));
        }
        let values: Map<String, Value> = self.values.iter().map(|(k, q)| (k.clone(), q.to_json())).collect();
        m.insert("values".into(), Value::Object(values));
        m.insert("convergence".into(), Value::Array(self.convergence.iter().map(Convergence::to_json).collect()));
        m.insert("notes".into(), Value::Array(self.notes.iter().cloned().map(Value::String).collect()));
        if with_time {
            m.insert("wall_time_s".into(), num(self.wall_time_s));
        }
        Value::Object(m)
    }
}

#[derive(Clone, Debug)]
pub struct Report {
    pub fine: Numerics,
    pub coarse: Numerics,
    pub tolerance: f64,
    pub requests: Vec<RequestReport>,
    pub exit_code: i32,
    pub wall_time_s: f64,
}

impl Report {
    /// The report as JSON; `with_time = false` drops every wall-time field.
    pub fn to_json(&self, with_time: bool) -> Value {
        let mut m = Map::new();
        m.insert("schema".into(), Value::String(REPORT_SCHEMA.into()));
        let mut levels = Map::new();
        levels.insert("fine".into(), numerics(&self.fine));
        levels.insert("coarse".into(), numerics(&self.coarse));
        m.insert("grid_levels".into(), Value::Object(levels));
        m.insert("tolerance".into(), num(self.tolerance));
        m.insert("exit_code".into(), Value::from(self.exit_code));
        m.insert("requests".into(), Value::Array(self.requests.iter().map(|r| r.to_json(with_time)).collect()));
        if with_time {
            m.insert("wall_time_s".into(), num(self.wall_time_s));
        }
        Value::Object(m)
    }

    pub fn render(&self, with_time: bool) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json(with_time)).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_carry_seventeen_digits() {
        assert_eq!(num(0.1).to_string(), "1.0000000000000001e-1");
        assert_eq!(num(3.0).to_string(), "3.0000000000000000e+0");
        assert_eq!(num(f64::INFINITY), Value::String("inf".into()));
        let back: f64 = num(1.0 / 3.0).to_string().parse().unwrap();
        assert_eq!(back, 1.0 / 3.0);
    }

    #[test]
    fn normalize_rewrites_nested_floats() {
        let v = serde_json::json!({"a": [0.5, 2], "b": {"c": 0.25}});
        let n = normalize(v);
        assert_eq!(n["a"][0].to_string(), "5.0000000000000000e-1");
        assert_eq!(n["a"][1].to_string(), "2");
        assert_eq!(n["b"]["c"].to_string(), "2.5000000000000000e-1");
    }

    #[test]
    fn richardson_removes_second_order_error() {
        let f = |h: f64| 2.0 + 0.7 * h * h;
        assert!((richardson(f(0.5), f(1.0)) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn atomic_write_replaces_contents() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.json");
        write_atomic(&p, "one").unwrap();
        write_atomic(&p, "two").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "two");
    }
}
