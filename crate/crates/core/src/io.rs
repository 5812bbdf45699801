//! JSON interchange, version "cnc/1".
//!
//! Vectors are integer arrays `[z_1..z_n, x_1..x_n]`. Every reader reports
//! failures as [`Error::Schema`] with a JSON pointer to the offending value.

use std::collections::BTreeMap;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::circuit::{Circuit, Gate, Instruction};
use crate::clifford::{CliffordElement, NamedGate};
use crate::cnc::{CncSet, Form, PhasePoint};
use crate::dense::{DenseCap, DenseOperator};
use crate::error::{Error, Result};
use crate::field::Modulus;
use crate::oracle::DensityState;
use crate::simulate::Ensemble;
use crate::symplectic::SymplecticVector;

pub const FORMAT: &str = "cnc/1";

fn schema(pointer: impl Into<String>, message: impl ToString) -> Error {
    Error::Schema {
        pointer: pointer.into(),
        message: message.to_string(),
    }
}

fn escape(key: &str) -> String {
    key.replace('~', "~0").replace('/', "~1")
}

/// Deserializes with the failing location as a JSON pointer under `base`.
fn from_value<T: DeserializeOwned>(v: &Value, base: &str) -> Result<T> {
    serde_path_to_error::deserialize(v).map_err(|e| {
        let mut pointer = base.to_string();
        for seg in e.path().iter() {
            use serde_path_to_error::Segment;
            match seg {
                Segment::Seq { index } => pointer.push_str(&format!("/{index}")),
                Segment::Map { key } => pointer.push_str(&format!("/{}", escape(key))),
                Segment::Enum { variant } => pointer.push_str(&format!("/{}", escape(variant))),
                Segment::Unknown => {}
            }
        }
        schema(pointer, e.into_inner())
    })
}

/// Any error raised while building a value at `pointer` becomes a schema
/// error there; cap errors pass through unchanged.
fn at<T>(pointer: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Schema { .. } | Error::CapExceeded { .. } => e,
        other => schema(pointer, other),
    })
}

fn check_format(format: &Option<String>, base: &str) -> Result<()> {
    match format.as_deref() {
        None | Some(FORMAT) => Ok(()),
        Some(other) => Err(schema(
            format!("{base}/format"),
            format!("unsupported format {other:?}, expected {FORMAT:?}"),
        )),
    }
}

fn modulus(d: u32, base: &str) -> Result<Modulus> {
    at(&format!("{base}/d"), Modulus::new(d))
}

fn qudit_count(n: usize, base: &str) -> Result<usize> {
    if n == 0 {
        return Err(schema(format!("{base}/n"), "n must be positive"));
    }
    Ok(n)
}

fn vector(d: Modulus, n: usize, c: &[i64], pointer: &str) -> Result<SymplecticVector> {
    if c.len() != 2 * n {
        return Err(schema(pointer, format!("expected {} entries, found {}", 2 * n, c.len())));
    }
    at(pointer, SymplecticVector::new(d, c))
}

fn vector_record(v: &SymplecticVector) -> Vec<i64> {
    v.coords().iter().map(|&c| c as i64).collect()
}

// ---------------------------------------------------------------- circuits

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub op: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qudits: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub param: Option<i64>,
    #[serde(rename = "S", default, skip_serializing_if = "Option::is_none")]
    pub s: Option<Vec<Vec<i64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<i64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionRecord {
    pub vars: BTreeMap<String, i64>,
    #[serde(rename = "const", default)]
    pub constant: i64,
}

/// One instruction; which fields are allowed depends on `op`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstructionRecord {
    pub op: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qudits: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub param: Option<i64>,
    #[serde(rename = "S", default, skip_serializing_if = "Option::is_none")]
    pub s: Option<Vec<Vec<i64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub var: Option<String>,
    #[serde(rename = "if", default, skip_serializing_if = "Option::is_none")]
    pub condition: Option<ConditionRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gate: Option<GateRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
    pub d: u32,
    pub n: usize,
    pub instructions: Vec<InstructionRecord>,
}

fn gate_from_record(d: Modulus, n: usize, g: &GateRecord, base: &str) -> Result<Gate> {
    if let Some(op) = &g.op {
        if op != "gate" {
            return Err(schema(format!("{base}/op"), "nested gate must have op \"gate\""));
        }
    }
    match (&g.name, &g.s) {
        (Some(_), Some(_)) => Err(schema(base, "give either name or S, not both")),
        (None, None) => Err(schema(base, "gate needs name or S")),
        (Some(name), None) => {
            if g.b.is_some() {
                return Err(schema(format!("{base}/b"), "b belongs to raw gates"));
            }
            let q = g
                .qudits
                .as_ref()
                .ok_or_else(|| schema(base, "named gate needs qudits"))?;
            let arity = if name == "SUM" { 2 } else { 1 };
            if q.len() != arity {
                return Err(schema(format!("{base}/qudits"), format!("{name} acts on {arity} qudit(s)")));
            }
            let shift = |p: Option<i64>| -> u32 { p.unwrap_or(1).rem_euclid(d.get() as i64) as u32 };
            let gate = match name.as_str() {
                "F" | "P" | "SUM" if g.param.is_some() => {
                    return Err(schema(format!("{base}/param"), "param applies to X and Z only"));
                }
                "F" => NamedGate::F(q[0]),
                "P" => NamedGate::P(q[0]),
                "SUM" => NamedGate::Sum(q[0], q[1]),
                "X" => NamedGate::XShift(q[0], shift(g.param)),
                "Z" => NamedGate::ZShift(q[0], shift(g.param)),
                other => return Err(schema(format!("{base}/name"), format!("unknown gate {other:?}"))),
            };
            at(&format!("{base}/qudits"), Gate::named(d, n, gate))
        }
        (None, Some(s)) => {
            if g.qudits.is_some() || g.param.is_some() {
                return Err(schema(base, "raw gates take S and b only"));
            }
            let b = match &g.b {
                Some(b) => vector(d, n, b, &format!("{base}/b"))?,
                None => SymplecticVector::zero(d, n),
            };
            at(&format!("{base}/S"), CliffordElement::new(d, n, s.clone(), b).map(Gate::raw))
        }
    }
}

fn gate_record(g: &Gate) -> GateRecord {
    match g.name() {
        Some(named) => {
            let (name, qudits, param) = match *named {
                NamedGate::F(q) => ("F", vec![q], None),
                NamedGate::P(q) => ("P", vec![q], None),
                NamedGate::Sum(c, t) => ("SUM", vec![c, t], None),
                NamedGate::XShift(q, k) => ("X", vec![q], Some(k as i64)),
                NamedGate::ZShift(q, k) => ("Z", vec![q], Some(k as i64)),
            };
            GateRecord {
                name: Some(name.into()),
                qudits: Some(qudits),
                param,
                ..Default::default()
            }
        }
        None => {
            let e = g.element();
            GateRecord {
                s: Some(
                    e.matrix()
                        .iter()
                        .map(|r| r.iter().map(|&x| x as i64).collect())
                        .collect(),
                ),
                b: Some(vector_record(e.shift())),
                ..Default::default()
            }
        }
    }
}

pub fn circuit_from_value(v: &Value) -> Result<Circuit> {
    let file: CircuitFile = from_value(v, "")?;
    check_format(&file.format, "")?;
    let d = modulus(file.d, "")?;
    let n = qudit_count(file.n, "")?;
    let mut c = Circuit::new(d, n)?;
    for (i, ins) in file.instructions.iter().enumerate() {
        let base = format!("/instructions/{i}");
        let unexpected = |present: bool, field: &str| -> Result<()> {
            if present {
                Err(schema(format!("{base}/{field}"), format!("not allowed for op {:?}", ins.op)))
            } else {
                Ok(())
            }
        };
        match ins.op.as_str() {
            "gate" => {
                unexpected(ins.a.is_some(), "a")?;
                unexpected(ins.var.is_some(), "var")?;
                unexpected(ins.condition.is_some(), "if")?;
                unexpected(ins.gate.is_some(), "gate")?;
                let g = GateRecord {
                    op: None,
                    name: ins.name.clone(),
                    qudits: ins.qudits.clone(),
                    param: ins.param,
                    s: ins.s.clone(),
                    b: ins.b.clone(),
                };
                c.push_gate(gate_from_record(d, n, &g, &base)?)?;
            }
            "measure" => {
                for (present, field) in [
                    (ins.name.is_some(), "name"),
                    (ins.qudits.is_some(), "qudits"),
                    (ins.param.is_some(), "param"),
                    (ins.s.is_some(), "S"),
                    (ins.b.is_some(), "b"),
                    (ins.condition.is_some(), "if"),
                    (ins.gate.is_some(), "gate"),
                ] {
                    unexpected(present, field)?;
                }
                let a = ins.a.as_ref().ok_or_else(|| schema(&base, "measure needs a"))?;
                let var = ins.var.as_ref().ok_or_else(|| schema(&base, "measure needs var"))?;
                let a = vector(d, n, a, &format!("{base}/a"))?;
                at(&base, c.push_measure(a, var.clone()))?;
            }
            "cond-gate" => {
                for (present, field) in [
                    (ins.name.is_some(), "name"),
                    (ins.qudits.is_some(), "qudits"),
                    (ins.param.is_some(), "param"),
                    (ins.s.is_some(), "S"),
                    (ins.b.is_some(), "b"),
                    (ins.a.is_some(), "a"),
                    (ins.var.is_some(), "var"),
                ] {
                    unexpected(present, field)?;
                }
                let cond = ins.condition.as_ref().ok_or_else(|| schema(&base, "cond-gate needs if"))?;
                let g = ins.gate.as_ref().ok_or_else(|| schema(&base, "cond-gate needs gate"))?;
                let gate = gate_from_record(d, n, g, &format!("{base}/gate"))?;
                let terms: Vec<(&str, i64)> = cond.vars.iter().map(|(k, v)| (k.as_str(), *v)).collect();
                at(&format!("{base}/if"), c.push_cond_gate(&terms, cond.constant, gate))?;
            }
            other => return Err(schema(format!("{base}/op"), format!("unknown op {other:?}"))),
        }
    }
    Ok(c)
}

pub fn circuit_to_value(c: &Circuit) -> Value {
    let instructions = c
        .instructions()
        .iter()
        .map(|ins| match ins {
            Instruction::Gate(g) => {
                let r = gate_record(g);
                InstructionRecord {
                    op: "gate".into(),
                    name: r.name,
                    qudits: r.qudits,
                    param: r.param,
                    s: r.s,
                    b: r.b,
                    ..Default::default()
                }
            }
            Instruction::Measure { label, var } => InstructionRecord {
                op: "measure".into(),
                a: Some(vector_record(label)),
                var: Some(var.clone()),
                ..Default::default()
            },
            Instruction::CondGate { condition, gate } => InstructionRecord {
                op: "cond-gate".into(),
                condition: Some(ConditionRecord {
                    vars: condition
                        .terms()
                        .iter()
                        .map(|&(i, k)| (c.variable(i).to_string(), k as i64))
                        .collect(),
                    constant: condition.constant() as i64,
                }),
                gate: Some(gate_record(gate)),
                ..Default::default()
            },
        })
        .collect();
    serde_json::to_value(CircuitFile {
        format: Some(FORMAT.into()),
        d: c.modulus().get(),
        n: c.n(),
        instructions,
    })
    .expect("circuit records serialize")
}

// ------------------------------------------------------------ phase points

/// A phase point. `gamma` maps positions in `I` followed by `generators`
/// to values; every position must be present.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    pub form: String,
    #[serde(rename = "I")]
    pub core: Vec<Vec<i64>>,
    #[serde(default)]
    pub generators: Vec<Vec<i64>>,
    pub gamma: BTreeMap<String, i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
}

pub fn point_record(p: &PhasePoint) -> PointRecord {
    let values = p.values();
    let (core, gens) = match p.set() {
        CncSet::Subspace(s) => (s.basis(), Vec::new()),
        CncSet::Cone { core, generators } => (core.basis(), generators),
    };
    PointRecord {
        format: None,
        d: Some(p.modulus().get()),
        n: Some(p.n()),
        form: p.form().as_str().into(),
        core: core.iter().map(vector_record).collect(),
        generators: gens.iter().map(vector_record).collect(),
        gamma: values
            .iter()
            .enumerate()
            .map(|(i, v)| (i.to_string(), *v as i64))
            .collect(),
        weight: None,
    }
}

fn point_from_record(r: &PointRecord, dims: Option<(Modulus, usize)>, base: &str) -> Result<PhasePoint> {
    check_format(&r.format, base)?;
    let (d, n) = match (dims, r.d, r.n) {
        (Some((d, n)), rd, rn) => {
            if rd.is_some_and(|x| x != d.get()) {
                return Err(schema(format!("{base}/d"), "does not match the enclosing file"));
            }
            if rn.is_some_and(|x| x != n) {
                return Err(schema(format!("{base}/n"), "does not match the enclosing file"));
            }
            (d, n)
        }
        (None, Some(d), Some(n)) => (modulus(d, base)?, qudit_count(n, base)?),
        _ => return Err(schema(base, "d and n are required")),
    };
    let total = r.core.len() + r.generators.len();
    let mut gamma = vec![None; total];
    for (k, v) in &r.gamma {
        let ptr = format!("{base}/gamma/{}", escape(k));
        let i: usize = k.parse().map_err(|_| schema(&ptr, "key must be a position index"))?;
        if i >= total {
            return Err(schema(&ptr, format!("index out of range (I and generators have {total} rows)")));
        }
        gamma[i] = Some(v.rem_euclid(d.get() as i64) as u32);
    }
    if let Some(i) = gamma.iter().position(Option::is_none) {
        return Err(schema(format!("{base}/gamma"), format!("missing value for position {i}")));
    }
    let gamma: Vec<u32> = gamma.into_iter().map(|g| g.expect("checked")).collect();
    let mut linear = Vec::with_capacity(r.core.len());
    for (i, c) in r.core.iter().enumerate() {
        linear.push((vector(d, n, c, &format!("{base}/I/{i}"))?, gamma[i]));
    }
    let mut gens = Vec::with_capacity(r.generators.len());
    for (i, c) in r.generators.iter().enumerate() {
        gens.push((vector(d, n, c, &format!("{base}/generators/{i}"))?, gamma[r.core.len() + i]));
    }
    let declared = match r.form.as_str() {
        "subspace" => Form::Subspace,
        "cone" => Form::Cone,
        other => return Err(schema(format!("{base}/form"), format!("unknown form {other:?}"))),
    };
    if declared == Form::Subspace && !gens.is_empty() {
        return Err(schema(format!("{base}/generators"), "subspace form takes no generators"));
    }
    if declared == Form::Cone && gens.len() < 2 {
        return Err(schema(format!("{base}/generators"), "cone form needs at least two generators"));
    }
    let p = at(base, PhasePoint::from_pairs(d, n, &linear, &gens))?;
    if p.form() != declared {
        return Err(schema(format!("{base}/form"), format!("set is in {} form", p.form().as_str())));
    }
    Ok(p)
}

pub fn point_from_value(v: &Value) -> Result<PhasePoint> {
    point_from_record(&from_value(v, "")?, None, "")
}

pub fn point_to_value(p: &PhasePoint) -> Value {
    let mut r = point_record(p);
    r.format = Some(FORMAT.into());
    serde_json::to_value(r).expect("point records serialize")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointListFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
    pub d: u32,
    pub n: usize,
    pub points: Vec<PointRecord>,
}

fn point_list(v: &Value) -> Result<(PointListFile, Modulus, usize, Vec<PhasePoint>)> {
    let file: PointListFile = from_value(v, "")?;
    check_format(&file.format, "")?;
    let d = modulus(file.d, "")?;
    let n = qudit_count(file.n, "")?;
    let points = file
        .points
        .iter()
        .enumerate()
        .map(|(i, r)| point_from_record(r, Some((d, n)), &format!("/points/{i}")))
        .collect::<Result<Vec<_>>>()?;
    Ok((file, d, n, points))
}

/// A dictionary file: a point list whose entries carry no weights.
pub fn dictionary_from_value(v: &Value) -> Result<Vec<PhasePoint>> {
    let (file, _, _, points) = point_list(v)?;
    if let Some(i) = file.points.iter().position(|r| r.weight.is_some()) {
        return Err(schema(format!("/points/{i}/weight"), "dictionary entries take no weight"));
    }
    if points.is_empty() {
        return Err(schema("/points", "dictionary is empty"));
    }
    Ok(points)
}

pub fn dictionary_to_value(points: &[PhasePoint]) -> Value {
    let (d, n) = points.first().map(|p| (p.modulus().get(), p.n())).unwrap_or((3, 1));
    let records = points
        .iter()
        .map(|p| {
            let mut r = point_record(p);
            r.d = None;
            r.n = None;
            r
        })
        .collect();
    serde_json::to_value(PointListFile {
        format: Some(FORMAT.into()),
        d,
        n,
        points: records,
    })
    .expect("point records serialize")
}

/// An ensemble file: a point list where every entry has a weight.
pub fn ensemble_from_value(v: &Value) -> Result<Ensemble> {
    let (file, _, _, points) = point_list(v)?;
    if points.is_empty() {
        return Err(schema("/points", "ensemble is empty"));
    }
    let mut entries = Vec::with_capacity(points.len());
    for (i, (r, p)) in file.points.iter().zip(points).enumerate() {
        let w = r
            .weight
            .ok_or_else(|| schema(format!("/points/{i}"), "ensemble entries need a weight"))?;
        if !(w >= 0.0) {
            return Err(schema(format!("/points/{i}/weight"), "weight must be nonnegative"));
        }
        entries.push((p, w));
    }
    at("/points", Ensemble::new(entries))
}

pub fn ensemble_to_value(e: &Ensemble) -> Value {
    let records = e
        .entries()
        .map(|(p, w)| {
            let mut r = point_record(p);
            r.d = None;
            r.n = None;
            r.weight = Some(w);
            r
        })
        .collect();
    serde_json::to_value(PointListFile {
        format: Some(FORMAT.into()),
        d: e.modulus().get(),
        n: e.n(),
        points: records,
    })
    .expect("point records serialize")
}

// ----------------------------------------------------------------- states

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DenseFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
    pub d: u32,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<String>,
}

fn dense_from_file(file: &DenseFile, cap: DenseCap) -> Result<(DenseOperator, Option<&'static str>)> {
    check_format(&file.format, "")?;
    let d = modulus(file.d, "")?;
    let n = qudit_count(file.n, "")?;
    at("/n", cap.check(d, n).map(|_| ()))?;
    let given = [file.rho.is_some(), file.operator.is_some(), file.state.is_some()];
    if given.iter().filter(|x| **x).count() != 1 {
        return Err(schema("", "give exactly one of rho, operator, state"));
    }
    if let Some(name) = &file.state {
        let s = match name.as_str() {
            "stabilizer-zero" => DensityState::stabilizer_zero(d, n, cap)?,
            "maximally-mixed" => DensityState::maximally_mixed(d, n, cap)?,
            other => return Err(schema("/state", format!("unknown named state {other:?}"))),
        };
        return Ok((s.into_operator(), Some("state")));
    }
    let (rows, key) = match (&file.rho, &file.operator) {
        (Some(r), _) => (r, "rho"),
        (_, Some(o)) => (o, "operator"),
        _ => unreachable!("checked above"),
    };
    let dim = (d.get() as usize).pow(n as u32);
    if rows.len() != dim {
        return Err(schema(format!("/{key}"), format!("expected {dim} rows, found {}", rows.len())));
    }
    if let Some(i) = rows.iter().position(|r| r.len() != dim) {
        return Err(schema(format!("/{key}/{i}"), format!("expected {dim} entries")));
    }
    let op = at(&format!("/{key}"), DenseOperator::from_pairs(d, n, rows))?;
    Ok((op, Some(if key == "rho" { "rho" } else { "operator" })))
}

/// A density matrix, or a named state (`stabilizer-zero`, `maximally-mixed`).
pub fn state_from_value(v: &Value, cap: DenseCap) -> Result<DensityState> {
    let file: DenseFile = from_value(v, "")?;
    if file.operator.is_some() {
        return Err(schema("/operator", "state files use rho"));
    }
    let (op, key) = dense_from_file(&file, cap)?;
    let pointer = if key == Some("rho") { "/rho" } else { "/state" };
    at(pointer, DensityState::new(op))
}

pub fn state_to_value(rho: &DensityState) -> Value {
    serde_json::to_value(DenseFile {
        format: Some(FORMAT.into()),
        d: rho.modulus().get(),
        n: rho.n(),
        rho: Some(rho.operator().to_pairs()),
        operator: None,
        state: None,
    })
    .expect("dense records serialize")
}

/// A Hermitian unit-trace operator: a dense matrix under `operator` or
/// `rho`, a named state, or a phase-point record.
pub fn operator_from_value(v: &Value, cap: DenseCap) -> Result<DenseOperator> {
    if v.get("form").is_some() {
        return at("", point_from_value(v)?.operator(cap));
    }
    let file: DenseFile = from_value(v, "")?;
    Ok(dense_from_file(&file, cap)?.0)
}

pub fn operator_to_value(x: &DenseOperator) -> Value {
    serde_json::to_value(DenseFile {
        format: Some(FORMAT.into()),
        d: x.modulus().get(),
        n: x.n(),
        rho: None,
        operator: Some(x.to_pairs()),
        state: None,
    })
    .expect("dense records serialize")
}
