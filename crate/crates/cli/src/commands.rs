use std::io::Write;
use std::path::Path;

use cnc_qudit::analysis::{
    cnc_decompose, full_dictionary, lambda_membership, stabilizer_states, wigner_dictionary, wigner_function,
    DecomposeMode, DictionaryCaps, Target,
};
use cnc_qudit::circuit::Circuit;
use cnc_qudit::cnc::PhasePoint;
use cnc_qudit::dense::{DenseCap, DenseOperator};
use cnc_qudit::enumerate::{count_phase_points, enumerate_phase_points, EnumerationCaps};
use cnc_qudit::field::Modulus;
use cnc_qudit::io;
use cnc_qudit::oracle::{joint_distribution_of_operator, tv_distance, DensityState, OracleCaps};
use cnc_qudit::simulate::{empirical_distribution, marginals, run_cnc, run_wigner, Ensemble, ShotRecord, WignerDistribution};
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};
use crate::schema;
use crate::{Algorithm, Cli, Command, Global, Mode, OutputFormat};

const FIXTURE_CIRCUIT: &str = include_str!("../fixtures/feedforward.circuit.json");
const FIXTURE_CONE: &str = include_str!("../fixtures/cone-mixture.ensemble.json");
const FIXTURE_WIGNER: &str = include_str!("../fixtures/wigner-mixture.ensemble.json");
const FIXTURE_STABILIZER: &str = include_str!("../fixtures/stabilizer-zero.state.json");

/// Coefficients below this are dropped from reports and ensembles.
const COEFFICIENT_TOL: f64 = 1e-12;

struct Caps {
    dense: DenseCap,
    oracle: OracleCaps,
    max_subspaces: usize,
    max_stabilizer_states: u128,
    dictionary: DictionaryCaps,
}

impl Caps {
    fn from_global(g: &Global) -> CliResult<Caps> {
        let positive = [
            ("--dense-cap", g.dense_cap as u128),
            ("--max-branches", g.max_branches),
            ("--max-subspaces", g.max_subspaces as u128),
            ("--max-stabilizer-states", g.max_stabilizer_states),
            ("--dict-enumerated", g.dict_enumerated as u128),
            ("--dict-orbit", g.dict_orbit as u128),
        ];
        if let Some((flag, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return Err(CliError::usage(format!("{flag} must be positive")));
        }
        let dense = DenseCap { max_dim: g.dense_cap };
        Ok(Caps {
            dense,
            oracle: OracleCaps {
                dense,
                max_branches: g.max_branches,
            },
            max_subspaces: g.max_subspaces,
            max_stabilizer_states: g.max_stabilizer_states,
            dictionary: DictionaryCaps {
                enumerated: g.dict_enumerated,
                orbit: g.dict_orbit,
                max_subspaces: g.max_subspaces,
            },
        })
    }

    fn to_json(&self) -> Value {
        json!({
            "dense_max_dim": self.dense.max_dim,
            "max_branches": self.oracle.max_branches as u64,
            "max_subspaces": self.max_subspaces,
            "max_stabilizer_states": self.max_stabilizer_states as u64,
            "dictionary_enumerated": self.dictionary.enumerated,
            "dictionary_orbit": self.dictionary.orbit,
        })
    }
}

pub fn run(cli: &Cli) -> CliResult<()> {
    let g = &cli.global;
    let caps = Caps::from_global(g)?;
    if let Some(d) = g.d {
        Modulus::new(d)?;
    }
    if g.n == Some(0) {
        return Err(CliError::usage("--n must be at least 1"));
    }
    match &cli.command {
        Command::Simulate {
            circuit,
            input,
            shots,
            seed,
            algorithm,
            verify,
            tv_threshold,
            summary,
        } => {
            if *shots == 0 {
                return Err(CliError::usage("--shots must be positive"));
            }
            let circuit = load_circuit(g, &read_json(circuit)?)?;
            let input = load_input(g, &read_json(input)?, &caps)?;
            simulate(
                g,
                &caps,
                &circuit,
                &input,
                SimOptions {
                    shots: *shots,
                    seed: *seed,
                    algorithm: *algorithm,
                    verify: *verify,
                    tv_threshold: *tv_threshold,
                    summary: summary.as_deref(),
                },
            )
        }
        Command::Decompose {
            state,
            dictionary,
            mode,
            exact,
        } => decompose(g, &caps, &read_json(state)?, dictionary, *mode, *exact),
        Command::Enumerate {
            max_xi,
            list,
            max_points,
            start_index,
        } => enumerate(g, &caps, *max_xi, *list, *max_points, *start_index),
        Command::Lambda { operator } => lambda(g, &caps, &read_json(operator)?),
        Command::Verify { shots, seed, threshold } => {
            if *shots == 0 {
                return Err(CliError::usage("--shots must be positive"));
            }
            verify(g, &caps, *shots, *seed, *threshold)
        }
        Command::Schema { name } => print_schema(g, name),
    }
}

// ------------------------------------------------------------------ input

fn read_json(path: &Path) -> CliResult<Value> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_json(&text)
}

fn parse_json(text: &str) -> CliResult<Value> {
    serde_json::from_str(text).map_err(|e| CliError::Schema {
        pointer: String::new(),
        message: format!("invalid JSON: {e}"),
    })
}

fn check_dims(g: &Global, d: Modulus, n: usize, what: &str) -> CliResult<()> {
    if g.d.is_some_and(|x| x != d.get()) {
        return Err(CliError::Schema {
            pointer: "/d".into(),
            message: format!("{what} has d = {}, but --d {} was given", d.get(), g.d.unwrap()),
        });
    }
    if g.n.is_some_and(|x| x != n) {
        return Err(CliError::Schema {
            pointer: "/n".into(),
            message: format!("{what} has n = {n}, but --n {} was given", g.n.unwrap()),
        });
    }
    Ok(())
}

/// Schema check followed by the typed reader. When both reject the value,
/// the reader's pointer is usually the more precise one.
fn load<T>(schema: &str, v: &Value, parse: impl FnOnce(&Value) -> cnc_qudit::Result<T>) -> CliResult<T> {
    match schema::validate(schema, v) {
        Ok(()) => Ok(parse(v)?),
        Err(outer) => match parse(v) {
            Err(e @ cnc_qudit::Error::Schema { .. }) => Err(e.into()),
            _ => Err(outer),
        },
    }
}

fn load_circuit(g: &Global, v: &Value) -> CliResult<Circuit> {
    let c = load(schema::CIRCUIT, v, io::circuit_from_value)?;
    check_dims(g, c.modulus(), c.n(), "circuit")?;
    Ok(c)
}

/// A simulation input as read from disk.
enum Input {
    Ensemble(Ensemble),
    State(DensityState),
}

impl Input {
    fn dims(&self) -> (Modulus, usize) {
        match self {
            Input::Ensemble(e) => (e.modulus(), e.n()),
            Input::State(s) => (s.modulus(), s.n()),
        }
    }

    fn source(&self) -> &'static str {
        match self {
            Input::Ensemble(_) => "ensemble",
            Input::State(_) => "state",
        }
    }

    fn operator(&self, cap: DenseCap) -> CliResult<DenseOperator> {
        Ok(match self {
            Input::Ensemble(e) => e.operator(cap)?,
            Input::State(s) => s.operator().clone(),
        })
    }
}

fn load_input(g: &Global, v: &Value, caps: &Caps) -> CliResult<Input> {
    let input = if v.get("points").is_some() {
        Input::Ensemble(load(schema::POINT_LIST, v, io::ensemble_from_value)?)
    } else if v.get("form").is_some() {
        Input::Ensemble(Ensemble::point_mass(load(schema::POINT, v, io::point_from_value)?))
    } else {
        Input::State(load(schema::DENSE, v, |v| io::state_from_value(v, caps.dense))?)
    };
    let (d, n) = input.dims();
    check_dims(g, d, n, "input")?;
    Ok(input)
}

/// Nonnegative decomposition over the default dictionary, as an ensemble.
fn ensemble_of_state(rho: &DensityState, caps: &Caps) -> CliResult<Ensemble> {
    let dict = full_dictionary(rho.modulus(), rho.n(), &caps.dictionary)?;
    let dec = cnc_decompose(Target::State(rho), &dict, DecomposeMode::Feasibility, false, caps.dense)?;
    if !dec.feasible {
        return Err(CliError::usage(
            "state has no nonnegative decomposition over the phase-point dictionary",
        ));
    }
    let kept: Vec<(PhasePoint, f64)> = dec
        .sparse(COEFFICIENT_TOL)
        .into_iter()
        .filter(|(_, c)| *c > 0.0)
        .map(|(i, c)| (dict[i].clone(), c))
        .collect();
    let total: f64 = kept.iter().map(|(_, c)| c).sum();
    Ok(Ensemble::new(kept.into_iter().map(|(p, c)| (p, c / total)).collect())?)
}

// ----------------------------------------------------------------- output

fn emit(g: &Global, text: &str) -> CliResult<()> {
    match &g.out {
        Some(path) => write_file(path, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| CliError::Io {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn json_line(v: &Value) -> String {
    let mut s = serde_json::to_string(v).expect("values serialize");
    s.push('\n');
    s
}

fn json_doc(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

fn nested_point(p: &PhasePoint) -> Value {
    let mut r = io::point_record(p);
    r.d = None;
    r.n = None;
    serde_json::to_value(r).expect("point records serialize")
}

// --------------------------------------------------------------- simulate

struct SimOptions<'a> {
    shots: u64,
    seed: u64,
    algorithm: Algorithm,
    verify: bool,
    tv_threshold: f64,
    summary: Option<&'a Path>,
}

fn sample(circuit: &Circuit, input: &Input, caps: &Caps, algorithm: Algorithm, seed: u64, shots: u64) -> CliResult<Vec<ShotRecord>> {
    let (d, n) = input.dims();
    if d != circuit.modulus() || n != circuit.n() {
        return Err(CliError::Schema {
            pointer: "/n".into(),
            message: format!(
                "input has (d, n) = ({}, {n}), circuit has ({}, {})",
                d.get(),
                circuit.modulus().get(),
                circuit.n()
            ),
        });
    }
    Ok(match (algorithm, input) {
        (Algorithm::Cnc, Input::Ensemble(e)) => run_cnc(e, circuit, seed, shots)?,
        (Algorithm::Cnc, Input::State(rho)) => run_cnc(&ensemble_of_state(rho, caps)?, circuit, seed, shots)?,
        (Algorithm::Wigner, Input::Ensemble(e)) => run_wigner(&WignerDistribution::from_ensemble(e)?, circuit, seed, shots)?,
        (Algorithm::Wigner, Input::State(rho)) => {
            let dist = wigner_function(rho, caps.dense)?.to_distribution()?;
            run_wigner(&dist, circuit, seed, shots)?
        }
    })
}

fn oracle_tv(circuit: &Circuit, input: &Input, caps: &Caps, records: &[ShotRecord]) -> CliResult<f64> {
    let exact = joint_distribution_of_operator(&input.operator(caps.dense)?, circuit, caps.oracle)?;
    Ok(tv_distance(&empirical_distribution(records), &exact)?)
}

fn simulate(g: &Global, caps: &Caps, circuit: &Circuit, input: &Input, opt: SimOptions<'_>) -> CliResult<()> {
    let records = sample(circuit, input, caps, opt.algorithm, opt.seed, opt.shots)?;
    let tv = if opt.verify {
        Some(oracle_tv(circuit, input, caps, &records)?)
    } else {
        None
    };
    let distribution: Vec<Value> = empirical_distribution(&records)
        .into_iter()
        .map(|(outcomes, p)| json!({ "outcomes": outcomes, "probability": p }))
        .collect();
    let mut summary = json!({
        "format": io::FORMAT,
        "command": "simulate",
        "algorithm": opt.algorithm.as_str(),
        "d": circuit.modulus().get(),
        "n": circuit.n(),
        "shots": opt.shots,
        "seed": opt.seed,
        "input_source": input.source(),
        "variables": circuit.variables(),
        "distribution": distribution,
        "marginals": marginals(circuit, &records),
        "caps": caps.to_json(),
    });
    if let Some(tv) = tv {
        summary["oracle_tv"] = json!(tv);
        summary["tv_threshold"] = json!(opt.tv_threshold);
        summary["verified"] = json!(tv <= opt.tv_threshold);
    }
    let summary = json!({ "summary": summary });

    let mut text = String::new();
    match g.format {
        OutputFormat::Json => {
            for (i, r) in records.iter().enumerate() {
                text.push_str(&json_line(&json!({ "shot": i, "outcomes": r.outcomes })));
            }
            if opt.summary.is_none() {
                text.push_str(&json_line(&summary));
            }
        }
        OutputFormat::Csv => {
            let mut header = vec!["shot".to_string()];
            header.extend(circuit.variables().iter().cloned());
            text.push_str(&header.join(","));
            text.push('\n');
            for (i, r) in records.iter().enumerate() {
                text.push_str(&i.to_string());
                for o in &r.outcomes {
                    text.push(',');
                    text.push_str(&o.to_string());
                }
                text.push('\n');
            }
        }
    }
    emit(g, &text)?;
    if let Some(path) = opt.summary {
        write_file(path, &json_doc(&summary))?;
    }
    match tv {
        Some(tv) if tv > opt.tv_threshold => Err(CliError::VerifyFailed {
            tv,
            threshold: opt.tv_threshold,
        }),
        _ => Ok(()),
    }
}

// -------------------------------------------------------------- decompose

fn decompose(g: &Global, caps: &Caps, v: &Value, dictionary: &str, mode: Mode, exact: bool) -> CliResult<()> {
    enum Loaded {
        Point(PhasePoint),
        Operator(DenseOperator),
        State(DensityState),
    }
    let loaded = if v.get("form").is_some() {
        Loaded::Point(load(schema::POINT, v, io::point_from_value)?)
    } else if v.get("operator").is_some() {
        Loaded::Operator(load(schema::DENSE, v, |v| io::operator_from_value(v, caps.dense))?)
    } else {
        Loaded::State(load(schema::DENSE, v, |v| io::state_from_value(v, caps.dense))?)
    };
    let target = match &loaded {
        Loaded::Point(p) => Target::Point(p),
        Loaded::Operator(x) => Target::Operator(x),
        Loaded::State(s) => Target::State(s),
    };
    let (d, n) = match &loaded {
        Loaded::Point(p) => (p.modulus(), p.n()),
        Loaded::Operator(x) => (x.modulus(), x.n()),
        Loaded::State(s) => (s.modulus(), s.n()),
    };
    check_dims(g, d, n, "state")?;

    let dict = match dictionary {
        "full" => full_dictionary(d, n, &caps.dictionary)?,
        "wigner" => wigner_dictionary(d, n),
        path => {
            let dv = read_json(Path::new(path))?;
            let points = load(schema::POINT_LIST, &dv, io::dictionary_from_value)?;
            if let Some(p) = points.first() {
                if p.modulus() != d || p.n() != n {
                    return Err(CliError::Schema {
                        pointer: "/n".into(),
                        message: "dictionary and state dimensions differ".into(),
                    });
                }
            }
            points
        }
    };
    let mode = match mode {
        Mode::Feasibility => DecomposeMode::Feasibility,
        Mode::MinNegativity => DecomposeMode::MinNegativity,
    };
    let dec = cnc_decompose(target, &dict, mode, exact, caps.dense)?;
    let sparse = dec.sparse(COEFFICIENT_TOL);

    let text = match g.format {
        OutputFormat::Json => {
            let coefficients: Vec<Value> = sparse
                .iter()
                .map(|&(i, c)| json!({ "index": i, "value": c, "point": nested_point(&dict[i]) }))
                .collect();
            let kind = match dictionary {
                "full" | "wigner" => dictionary,
                _ => "file",
            };
            json_doc(&json!({
                "format": io::FORMAT,
                "command": "decompose",
                "d": d.get(),
                "n": n,
                "dictionary": { "kind": kind, "size": dict.len() },
                "feasible": dec.feasible,
                "mode": dec.mode,
                "exact": dec.exact,
                "objective": dec.objective,
                "coefficient_sum": dec.coefficient_sum,
                "residual": dec.residual,
                "coefficients": coefficients,
                "certificate": dec.certificate,
                "caps": caps.to_json(),
            }))
        }
        OutputFormat::Csv => {
            let mut s = String::from("index,value\n");
            for (i, c) in &sparse {
                s.push_str(&format!("{i},{c}\n"));
            }
            s
        }
    };
    emit(g, &text)
}

// -------------------------------------------------------------- enumerate

fn enumerate(g: &Global, caps: &Caps, max_xi: Option<usize>, list: bool, max_points: u64, start_index: u64) -> CliResult<()> {
    let (Some(d), Some(n)) = (g.d, g.n) else {
        return Err(CliError::usage("enumerate needs --d and --n"));
    };
    let d = Modulus::new(d)?;
    let max_xi = max_xi.unwrap_or(d.get() as usize * n + 1);
    let counts = count_phase_points(n, d, max_xi, caps.max_subspaces)?;
    let points = if list {
        if g.format == OutputFormat::Csv {
            return Err(CliError::usage("--list is only available with --format json"));
        }
        let ec = EnumerationCaps {
            max_xi,
            max_points,
            start_index,
            max_subspaces: caps.max_subspaces,
        };
        Some(enumerate_phase_points(n, d, &ec)?)
    } else {
        None
    };
    let text = match g.format {
        OutputFormat::Json => {
            let mut report = json!({
                "format": io::FORMAT,
                "command": "enumerate",
                "d": d.get(),
                "n": n,
                "max_xi": max_xi,
                "counts": counts,
                "caps": caps.to_json(),
            });
            if let Some(points) = points {
                report["points"] = Value::Array(points.iter().map(nested_point).collect());
            }
            json_doc(&report)
        }
        OutputFormat::Csv => format!(
            "d,n,max_xi,total,subspace_form,cone_form,linear,nonlinear\n{},{n},{max_xi},{},{},{},{},{}\n",
            d.get(),
            counts.total,
            counts.subspace_form,
            counts.cone_form,
            counts.linear,
            counts.nonlinear
        ),
    };
    emit(g, &text)
}

// ----------------------------------------------------------------- lambda

fn lambda(g: &Global, caps: &Caps, v: &Value) -> CliResult<()> {
    let x = if v.get("form").is_some() {
        load(schema::POINT, v, io::point_from_value)?.operator(caps.dense)?
    } else {
        load(schema::DENSE, v, |v| io::operator_from_value(v, caps.dense))?
    };
    let (d, n) = (x.modulus(), x.n());
    check_dims(g, d, n, "operator")?;
    let stabs = stabilizer_states(n, d, caps.max_stabilizer_states, caps.dense)?;
    let report = lambda_membership(&x, &stabs)?;
    let text = match g.format {
        OutputFormat::Json => {
            let violating = report.violating_stabilizer.map(|i| {
                let outcome = &stabs[i].outcome;
                let basis = outcome.subspace().basis();
                let values: Vec<u32> = basis.iter().map(|b| outcome.value(b).expect("basis vector")).collect();
                json!({
                    "index": i,
                    "stabilizers": basis.iter().map(|b| b.coords().to_vec()).collect::<Vec<_>>(),
                    "values": values,
                })
            });
            json_doc(&json!({
                "format": io::FORMAT,
                "command": "lambda",
                "d": d.get(),
                "n": n,
                "member": report.member,
                "min_overlap": report.min_overlap,
                "violating_stabilizer": violating,
                "stabilizer_count": stabs.len(),
                "caps": caps.to_json(),
            }))
        }
        OutputFormat::Csv => format!(
            "member,min_overlap,violating_stabilizer\n{},{},{}\n",
            report.member,
            report.min_overlap,
            report.violating_stabilizer.map(|i| i.to_string()).unwrap_or_default()
        ),
    };
    emit(g, &text)
}

// ----------------------------------------------------------------- verify

struct Case {
    name: &'static str,
    input: &'static str,
    algorithm: Algorithm,
}

const CASES: [Case; 4] = [
    Case {
        name: "feedforward/cone-mixture",
        input: FIXTURE_CONE,
        algorithm: Algorithm::Cnc,
    },
    Case {
        name: "feedforward/wigner-mixture",
        input: FIXTURE_WIGNER,
        algorithm: Algorithm::Wigner,
    },
    Case {
        name: "feedforward/wigner-mixture",
        input: FIXTURE_WIGNER,
        algorithm: Algorithm::Cnc,
    },
    Case {
        name: "feedforward/stabilizer-zero",
        input: FIXTURE_STABILIZER,
        algorithm: Algorithm::Wigner,
    },
];

fn verify(g: &Global, caps: &Caps, shots: u64, seed: u64, threshold: f64) -> CliResult<()> {
    // the bundled fixtures fix their own dimensions
    let free = Global { d: None, n: None, ..g.clone() };
    let circuit = load_circuit(&free, &parse_json(FIXTURE_CIRCUIT)?)?;
    let mut cases = Vec::new();
    let mut worst = 0.0f64;
    for case in &CASES {
        let input = load_input(&free, &parse_json(case.input)?, caps)?;
        let records = sample(&circuit, &input, caps, case.algorithm, seed, shots)?;
        let tv = oracle_tv(&circuit, &input, caps, &records)?;
        worst = worst.max(tv);
        cases.push((case, tv));
    }
    let passed = worst <= threshold;
    let text = match g.format {
        OutputFormat::Json => json_doc(&json!({
            "format": io::FORMAT,
            "command": "verify",
            "shots": shots,
            "seed": seed,
            "threshold": threshold,
            "cases": cases.iter().map(|(c, tv)| json!({
                "name": c.name,
                "d": circuit.modulus().get(),
                "n": circuit.n(),
                "algorithm": c.algorithm.as_str(),
                "tv": tv,
                "passed": *tv <= threshold,
            })).collect::<Vec<_>>(),
            "passed": passed,
            "caps": caps.to_json(),
        })),
        OutputFormat::Csv => {
            let mut s = String::from("name,algorithm,tv,passed\n");
            for (c, tv) in &cases {
                s.push_str(&format!("{},{},{tv},{}\n", c.name, c.algorithm.as_str(), *tv <= threshold));
            }
            s
        }
    };
    emit(g, &text)?;
    if passed {
        Ok(())
    } else {
        Err(CliError::VerifyFailed { tv: worst, threshold })
    }
}

fn print_schema(g: &Global, name: &str) -> CliResult<()> {
    if name == "list" {
        let names: Vec<&str> = schema::ALL.iter().map(|(n, _)| *n).collect();
        return emit(g, &format!("{}\n", names.join("\n")));
    }
    match schema::ALL.iter().find(|(n, _)| *n == name) {
        Some((_, text)) => emit(g, text),
        None => Err(CliError::usage(format!("unknown schema {name:?}; try `cnc schema list`"))),
    }
}
