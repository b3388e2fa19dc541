//! Scenario documents: JSON in, validated `Scenario` out, and back.
//!
//! A document is an object with fields `name`, `dims` {`n0`, `n_env`},
//! `builtin` or `params` {`h0`, `hs`, `v`, `d`}, `phi`/`psi`
//! {`breakpoints`, `values`}, `t_grid`, `h_list`, `observables`,
//! `ode_step`, optional `seed`. Complex scalars are always `[re, im]`;
//! matrices are row-major nested arrays. When `builtin` is present the named
//! scenario supplies defaults and any other field present overrides it.

use num_complex::Complex64;
use serde_json::{json, Map, Value};

use crate::dilation::KrausFamily;
use crate::discrete::CoherentFunction;
use crate::error::{Error, Result};
use crate::hamiltonian::{limit_coefficients, unitary_step, InteractionParams, QsdeCoefficients};
use crate::model::{BlockOperator, SpaceDims};
use crate::numerics::matrix::{ComplexMatrix, HermitianMatrix, ONE, ZERO};
use crate::scenarios::{
    low_density_params, two_level_params, two_level_step, von_neumann_params, weak_coupling_params,
    AlphaPolicy, ProjectionFamily,
};

/// The step family under test together with its continuous limit.
#[derive(Clone, Debug, PartialEq)]
pub enum SystemSpec {
    /// Interaction data; steps are e^{-ihH(h)} and the limit is computed.
    Params(InteractionParams),
    /// The explicit two-level rotation blocks at a coupling-angle policy.
    TwoLevelBlocks(AlphaPolicy),
}

impl SystemSpec {
    pub fn dims(&self) -> SpaceDims {
        match self {
            SystemSpec::Params(p) => p.dims(),
            SystemSpec::TwoLevelBlocks(_) => SpaceDims::new(2, 1).unwrap(),
        }
    }

    /// The discrete step operator at time step h.
    pub fn step(&self, h: f64) -> Result<BlockOperator> {
        match self {
            SystemSpec::Params(p) => unitary_step(p, h),
            SystemSpec::TwoLevelBlocks(policy) => two_level_step(h, *policy),
        }
    }

    /// Coefficients of the limit equation. The fixed-angle block family does
    /// not converge, so it has none.
    pub fn coefficients(&self) -> Result<QsdeCoefficients> {
        match self {
            SystemSpec::Params(p) => limit_coefficients(p),
            SystemSpec::TwoLevelBlocks(AlphaPolicy::SqrtH) => {
                limit_coefficients(&two_level_params())
            }
            SystemSpec::TwoLevelBlocks(AlphaPolicy::Fixed(_)) => Err(Error::InvalidScenario(
                "the fixed-angle step family has no continuous limit".into(),
            )),
        }
    }
}

/// A fully resolved experiment description.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub dims: SpaceDims,
    pub system: SystemSpec,
    pub phi: CoherentFunction,
    pub psi: CoherentFunction,
    pub t_grid: Vec<f64>,
    pub h_list: Vec<f64>,
    pub observables: Vec<ComplexMatrix>,
    pub ode_step: f64,
    pub seed: Option<u64>,
}

/// ode_step chosen so integration error stays far below the h-signal.
pub fn default_ode_step(h_list: &[f64]) -> f64 {
    let h_min = h_list.iter().copied().fold(f64::INFINITY, f64::min);
    h_min.min(1e-3) / 4.0
}

pub fn builtin_names() -> &'static [&'static str] {
    &["two-level", "von-neumann", "weak-coupling", "low-density"]
}

/// Named default scenarios.
pub fn builtin_scenario(name: &str) -> Result<Scenario> {
    let r = |x: f64| Complex64::new(x, 0.0);
    let scenario = match name {
        "two-level" => {
            let h_list = vec![1e-2, 1e-3, 1e-4];
            Scenario {
                name: name.into(),
                dims: SpaceDims::new(2, 1)?,
                system: SystemSpec::TwoLevelBlocks(AlphaPolicy::SqrtH),
                phi: CoherentFunction::constant(vec![r(0.5)], 1.0)?,
                psi: CoherentFunction::constant(vec![r(0.5)], 1.0)?,
                t_grid: vec![1.0],
                ode_step: default_ode_step(&h_list),
                h_list,
                observables: vec![ComplexMatrix::diagonal(&[ZERO, ONE])],
                seed: None,
            }
        }
        "von-neumann" => {
            let family = ProjectionFamily::new(
                2,
                vec![
                    ComplexMatrix::diagonal(&[ONE, ZERO]),
                    ComplexMatrix::diagonal(&[ZERO, ONE]),
                ],
            )?;
            let h_list = vec![1e-2, 1e-3, 1e-4];
            Scenario {
                name: name.into(),
                dims: SpaceDims::new(2, 2)?,
                system: SystemSpec::Params(von_neumann_params(&family)?),
                phi: CoherentFunction::zero(2),
                psi: CoherentFunction::zero(2),
                t_grid: vec![0.0, 1.0, 10.0],
                ode_step: default_ode_step(&h_list),
                h_list,
                observables: vec![ComplexMatrix::from_rows(&[
                    vec![ONE, ONE],
                    vec![ONE, ONE],
                ])],
                seed: None,
            }
        }
        "weak-coupling" => {
            let h_list = vec![1e-1, 1e-2, 1e-3];
            Scenario {
                name: name.into(),
                dims: SpaceDims::new(2, 2)?,
                system: SystemSpec::Params(weak_coupling_params()),
                phi: CoherentFunction::zero(2),
                psi: CoherentFunction::zero(2),
                t_grid: vec![1.0],
                ode_step: default_ode_step(&h_list),
                h_list,
                observables: vec![ComplexMatrix::diagonal(&[ONE, -ONE])],
                seed: None,
            }
        }
        "low-density" => {
            let h_list = vec![1e-1, 1e-2, 1e-3];
            Scenario {
                name: name.into(),
                dims: SpaceDims::new(2, 2)?,
                system: SystemSpec::Params(low_density_params()),
                phi: CoherentFunction::zero(2),
                psi: CoherentFunction::zero(2),
                t_grid: vec![1.0],
                ode_step: default_ode_step(&h_list),
                h_list,
                observables: vec![ComplexMatrix::from_rows(&[
                    vec![ZERO, ONE],
                    vec![ONE, ZERO],
                ])],
                seed: None,
            }
        }
        other => {
            return Err(Error::SchemaError {
                path: "builtin".into(),
                message: format!(
                    "unknown builtin {other:?}; available: {}",
                    builtin_names().join(", ")
                ),
            })
        }
    };
    Ok(scenario)
}

fn schema(path: &str, message: impl Into<String>) -> Error {
    Error::SchemaError { path: path.into(), message: message.into() }
}

fn invalid(path: &str, message: impl Into<String>) -> Error {
    Error::ValidationError { path: path.into(), message: message.into() }
}

fn as_f64(v: &Value, path: &str) -> Result<f64> {
    v.as_f64().ok_or_else(|| schema(path, "expected a number"))
}

fn as_array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| schema(path, "expected an array"))
}

fn f64_list(v: &Value, path: &str) -> Result<Vec<f64>> {
    as_array(v, path)?
        .iter()
        .enumerate()
        .map(|(k, x)| as_f64(x, &format!("{path}[{k}]")))
        .collect()
}

fn complex_entry(v: &Value, path: &str) -> Result<Complex64> {
    let pair = as_array(v, path)?;
    if pair.len() != 2 {
        return Err(schema(path, "complex scalar must be a [re, im] pair"));
    }
    Ok(Complex64::new(
        as_f64(&pair[0], &format!("{path}[0]"))?,
        as_f64(&pair[1], &format!("{path}[1]"))?,
    ))
}

fn matrix_entry(v: &Value, path: &str) -> Result<ComplexMatrix> {
    let rows = as_array(v, path)?;
    if rows.is_empty() {
        return Err(schema(path, "matrix must have at least one row"));
    }
    let mut parsed: Vec<Vec<Complex64>> = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let row_path = format!("{path}[{i}]");
        let entries = as_array(row, &row_path)?;
        let mut out = Vec::with_capacity(entries.len());
        for (j, e) in entries.iter().enumerate() {
            out.push(complex_entry(e, &format!("{row_path}[{j}]"))?);
        }
        parsed.push(out);
    }
    let width = parsed[0].len();
    if parsed.iter().any(|r| r.len() != width) {
        return Err(schema(path, "matrix rows have unequal lengths"));
    }
    Ok(ComplexMatrix::from_rows(&parsed))
}

fn hermitian_entry(v: &Value, path: &str) -> Result<HermitianMatrix> {
    let m = matrix_entry(v, path)?;
    HermitianMatrix::new(&m).map_err(|e| invalid(path, e.to_string()))
}

fn get<'a>(obj: &'a Map<String, Value>, key: &str, parent: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| {
        let path = if parent.is_empty() { key.to_string() } else { format!("{parent}.{key}") };
        schema(&path, "missing field")
    })
}

fn params_entry(v: &Value, dims: SpaceDims, path: &str) -> Result<InteractionParams> {
    let obj = v.as_object().ok_or_else(|| schema(path, "expected an object"))?;
    for key in obj.keys() {
        if !["h0", "hs", "v", "d"].contains(&key.as_str()) {
            return Err(schema(&format!("{path}.{key}"), "unknown field"));
        }
    }
    let h0 = hermitian_entry(get(obj, "h0", path)?, &format!("{path}.h0"))?;
    let hs = hermitian_entry(get(obj, "hs", path)?, &format!("{path}.hs"))?;
    let d = hermitian_entry(get(obj, "d", path)?, &format!("{path}.d"))?;
    let v_path = format!("{path}.v");
    let v_list = as_array(get(obj, "v", path)?, &v_path)?;
    let v: Vec<ComplexMatrix> = v_list
        .iter()
        .enumerate()
        .map(|(i, m)| matrix_entry(m, &format!("{v_path}[{i}]")))
        .collect::<Result<_>>()?;
    InteractionParams::new(dims, h0, hs, v, d).map_err(|e| invalid(path, e.to_string()))
}

fn coherent_entry(v: &Value, n_levels: usize, path: &str) -> Result<CoherentFunction> {
    let obj = v.as_object().ok_or_else(|| schema(path, "expected an object"))?;
    for key in obj.keys() {
        if !["breakpoints", "values"].contains(&key.as_str()) {
            return Err(schema(&format!("{path}.{key}"), "unknown field"));
        }
    }
    let breakpoints = f64_list(get(obj, "breakpoints", path)?, &format!("{path}.breakpoints"))?;
    let values_path = format!("{path}.values");
    let values_raw = as_array(get(obj, "values", path)?, &values_path)?;
    let mut values = Vec::with_capacity(values_raw.len());
    for (i, seg) in values_raw.iter().enumerate() {
        let seg_path = format!("{values_path}[{i}]");
        let entries = as_array(seg, &seg_path)?;
        let mut out = Vec::with_capacity(entries.len());
        for (j, e) in entries.iter().enumerate() {
            out.push(complex_entry(e, &format!("{seg_path}[{j}]"))?);
        }
        values.push(out);
    }
    CoherentFunction::new(n_levels, breakpoints, values).map_err(|e| invalid(path, e.to_string()))
}

fn dims_entry(v: &Value, path: &str) -> Result<SpaceDims> {
    let obj = v.as_object().ok_or_else(|| schema(path, "expected an object"))?;
    for key in obj.keys() {
        if !["n0", "n_env"].contains(&key.as_str()) {
            return Err(schema(&format!("{path}.{key}"), "unknown field"));
        }
    }
    let n0 = get(obj, "n0", path)?
        .as_u64()
        .ok_or_else(|| schema(&format!("{path}.n0"), "expected a positive integer"))?;
    let n_env = get(obj, "n_env", path)?
        .as_u64()
        .ok_or_else(|| schema(&format!("{path}.n_env"), "expected a positive integer"))?;
    SpaceDims::new(n0 as usize, n_env as usize).map_err(|e| invalid(path, e.to_string()))
}

const KNOWN_FIELDS: &[&str] = &[
    "name", "dims", "builtin", "params", "alpha", "phi", "psi", "t_grid", "h_list",
    "observables", "ode_step", "seed",
];

/// Parse and validate a scenario document.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| Error::ParseError(e.to_string()))?;
    scenario_from_value(&value)
}

pub fn scenario_from_value(value: &Value) -> Result<Scenario> {
    let obj = value
        .as_object()
        .ok_or_else(|| schema("$", "document must be an object"))?;
    for key in obj.keys() {
        if !KNOWN_FIELDS.contains(&key.as_str()) {
            return Err(schema(key, "unknown field"));
        }
    }

    let base = match obj.get("builtin") {
        Some(Value::String(name)) => Some(builtin_scenario(name)?),
        Some(_) => return Err(schema("builtin", "expected a string")),
        None => None,
    };

    let dims = match (obj.get("dims"), &base) {
        (Some(v), _) => dims_entry(v, "dims")?,
        (None, Some(b)) => b.dims,
        (None, None) => return Err(schema("dims", "missing field")),
    };

    let system = match (obj.get("params"), &base) {
        (Some(v), _) => SystemSpec::Params(params_entry(v, dims, "params")?),
        (None, Some(b)) => b.system.clone(),
        (None, None) => {
            return Err(schema("params", "missing field (provide params or builtin)"))
        }
    };
    let system = match (obj.get("alpha"), system) {
        (None, sys) => sys,
        (Some(v), SystemSpec::TwoLevelBlocks(_)) => {
            let policy = match v {
                Value::String(s) if s == "sqrt-h" => AlphaPolicy::SqrtH,
                v => AlphaPolicy::Fixed(as_f64(v, "alpha")?),
            };
            SystemSpec::TwoLevelBlocks(policy)
        }
        (Some(_), SystemSpec::Params(_)) => {
            return Err(invalid("alpha", "only applies to the two-level block family"))
        }
    };

    let name = match (obj.get("name"), &base) {
        (Some(Value::String(s)), _) => s.clone(),
        (Some(_), _) => return Err(schema("name", "expected a string")),
        (None, Some(b)) => b.name.clone(),
        (None, None) => return Err(schema("name", "missing field")),
    };

    let phi = match (obj.get("phi"), &base) {
        (Some(v), _) => coherent_entry(v, dims.n_env, "phi")?,
        (None, Some(b)) => b.phi.clone(),
        (None, None) => CoherentFunction::zero(dims.n_env),
    };
    let psi = match (obj.get("psi"), &base) {
        (Some(v), _) => coherent_entry(v, dims.n_env, "psi")?,
        (None, Some(b)) => b.psi.clone(),
        (None, None) => CoherentFunction::zero(dims.n_env),
    };

    let t_grid = match (obj.get("t_grid"), &base) {
        (Some(v), _) => f64_list(v, "t_grid")?,
        (None, Some(b)) => b.t_grid.clone(),
        (None, None) => return Err(schema("t_grid", "missing field")),
    };
    let h_list = match (obj.get("h_list"), &base) {
        (Some(v), _) => f64_list(v, "h_list")?,
        (None, Some(b)) => b.h_list.clone(),
        (None, None) => return Err(schema("h_list", "missing field")),
    };

    let observables = match (obj.get("observables"), &base) {
        (Some(v), _) => {
            let arr = as_array(v, "observables")?;
            arr.iter()
                .enumerate()
                .map(|(i, m)| matrix_entry(m, &format!("observables[{i}]")))
                .collect::<Result<_>>()?
        }
        (None, Some(b)) => b.observables.clone(),
        (None, None) => Vec::new(),
    };

    // keep a builtin's ode_step only while its h_list is also kept
    let ode_step = match (obj.get("ode_step"), &base, obj.get("h_list")) {
        (Some(v), _, _) => as_f64(v, "ode_step")?,
        (None, Some(b), None) => b.ode_step,
        _ => default_ode_step(&h_list),
    };

    let seed = match (obj.get("seed"), &base) {
        (Some(v), _) => Some(
            v.as_u64()
                .ok_or_else(|| schema("seed", "expected a nonnegative integer"))?,
        ),
        (None, Some(b)) => b.seed,
        (None, None) => None,
    };

    let scenario =
        Scenario { name, dims, system, phi, psi, t_grid, h_list, observables, ode_step, seed };
    validate_scenario(&scenario)?;
    Ok(scenario)
}

fn validate_scenario(s: &Scenario) -> Result<()> {
    if s.system.dims() != s.dims {
        return Err(invalid(
            "dims",
            format!(
                "declared ({}, {}) but the system acts on ({}, {})",
                s.dims.n0,
                s.dims.n_env,
                s.system.dims().n0,
                s.system.dims().n_env
            ),
        ));
    }
    for (field, f) in [("phi", &s.phi), ("psi", &s.psi)] {
        if f.n_levels() != s.dims.n_env {
            return Err(invalid(
                field,
                format!("has {} levels, dims require {}", f.n_levels(), s.dims.n_env),
            ));
        }
    }
    if s.t_grid.iter().any(|&t| !(t >= 0.0) || !t.is_finite()) {
        return Err(invalid("t_grid", "times must be finite and nonnegative"));
    }
    if s.h_list.iter().any(|&h| !(h > 0.0) || !h.is_finite()) {
        return Err(invalid("h_list", "time steps must be finite and positive"));
    }
    if s.h_list.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(invalid("h_list", "time steps must be strictly decreasing"));
    }
    for (i, m) in s.observables.iter().enumerate() {
        if m.rows() != s.dims.n0 || m.cols() != s.dims.n0 {
            return Err(invalid(
                &format!("observables[{i}]"),
                format!("must be {0}x{0}", s.dims.n0),
            ));
        }
    }
    if !(s.ode_step > 0.0) || !s.ode_step.is_finite() {
        return Err(invalid("ode_step", "must be finite and positive"));
    }
    Ok(())
}

fn complex_value(z: Complex64) -> Value {
    json!([z.re, z.im])
}

/// Matrix in document encoding: row-major nested arrays of [re, im] pairs.
pub fn matrix_value(m: &ComplexMatrix) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|i| Value::Array((0..m.cols()).map(|j| complex_value(m[(i, j)])).collect()))
            .collect(),
    )
}

/// Parse a Kraus-family document: an object with `dims` {`n0`, `n_env`} and
/// `kraus`, a list of n0 x n0 matrices (one per environment level, ground
/// first), in the same encoding as scenario documents.
pub fn parse_kraus_document(text: &str) -> Result<KrausFamily> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::ParseError(e.to_string()))?;
    let obj = value.as_object().ok_or_else(|| schema("$", "document must be an object"))?;
    for key in obj.keys() {
        if !["dims", "kraus"].contains(&key.as_str()) {
            return Err(schema(key, "unknown field"));
        }
    }
    let dims = dims_entry(obj.get("dims").ok_or_else(|| schema("dims", "missing field"))?, "dims")?;
    let ops = as_array(obj.get("kraus").ok_or_else(|| schema("kraus", "missing field"))?, "kraus")?
        .iter()
        .enumerate()
        .map(|(i, m)| matrix_entry(m, &format!("kraus[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    KrausFamily::new(dims, ops)
}

fn coherent_value(f: &CoherentFunction) -> Value {
    json!({
        "breakpoints": f.breakpoints(),
        "values": f
            .values()
            .iter()
            .map(|seg| Value::Array(seg.iter().map(|&z| complex_value(z)).collect()))
            .collect::<Vec<_>>(),
    })
}

/// Render a scenario back into a document; `parse_scenario` of the result
/// reproduces the scenario exactly.
pub fn serialize_scenario(s: &Scenario) -> Value {
    let mut map = Map::new();
    map.insert("name".into(), json!(s.name));
    map.insert("dims".into(), json!({"n0": s.dims.n0, "n_env": s.dims.n_env}));
    match &s.system {
        SystemSpec::Params(p) => {
            map.insert(
                "params".into(),
                json!({
                    "h0": matrix_value(p.h0().as_matrix()),
                    "hs": matrix_value(p.hs().as_matrix()),
                    "v": p.v().iter().map(matrix_value).collect::<Vec<_>>(),
                    "d": matrix_value(p.d().as_matrix()),
                }),
            );
        }
        SystemSpec::TwoLevelBlocks(policy) => {
            map.insert("builtin".into(), json!("two-level"));
            match policy {
                AlphaPolicy::SqrtH => {
                    map.insert("alpha".into(), json!("sqrt-h"));
                }
                AlphaPolicy::Fixed(a) => {
                    map.insert("alpha".into(), json!(a));
                }
            }
        }
    }
    map.insert("phi".into(), coherent_value(&s.phi));
    map.insert("psi".into(), coherent_value(&s.psi));
    map.insert("t_grid".into(), json!(s.t_grid));
    map.insert("h_list".into(), json!(s.h_list));
    map.insert(
        "observables".into(),
        Value::Array(s.observables.iter().map(matrix_value).collect()),
    );
    map.insert("ode_step".into(), json!(s.ode_step));
    if let Some(seed) = s.seed {
        map.insert("seed".into(), json!(seed));
    }
    Value::Object(map)
}
