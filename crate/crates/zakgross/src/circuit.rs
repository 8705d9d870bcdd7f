//! Circuit documents, format `zakgross-circuit/1`.
//!
//! ```json
//! {
//!   "format": "zakgross-circuit/1",
//!   "d": 3, "n": 2,
//!   "inputs": [{"ideal_logical": 0}, {"realistic": {"logical": 0, "delta": 0.3}}],
//!   "ops": [{"Fourier": 0}, {"SUM": [0, 1]}, {"displace": [0, 0, 0.5, 0]}],
//!   "measurement": {"modes": [0, 1], "K": 3},
//!   "estimator": {"epsilon": 0.05, "delta_fail": 0.1, "seed": 7}
//! }
//! ```
//!
//! Other inputs: `{"ideal_table": {"re": [[..]], "im": [[..]]}}` (a `d × d`
//! density matrix) and `{"realistic": {"phase_state": true, "delta": Δ}}`.
//! Other ops: `SUM_INV`, `Fourier_INV`, `Phase`, `Phase_INV`, `CZ`, `CZ_INV`
//! and `{"symplectic": [[..]]}` (a bare Gaussian unitary). `format` may be
//! omitted.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use zakgross_core::measure::MeasurementSpec;
use zakgross_core::qudit::DenseOperator;
use zakgross_core::symplectic::{Generator, IntSymplectic, Operation};
use zakgross_core::theta::{GkpKind, RealisticGkpSpec};
use zakgross_core::wigner::ModeInput;
use zakgross_core::CodeParams;

pub const FORMAT: &str = "zakgross-circuit/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CircuitDoc {
    #[serde(default = "default_format")]
    format: String,
    d: u32,
    n: usize,
    inputs: Vec<InputDoc>,
    #[serde(default)]
    ops: Vec<OpDoc>,
    measurement: MeasurementDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    estimator: Option<EstimatorSettings>,
}

fn default_format() -> String {
    FORMAT.to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum InputDoc {
    IdealLogical(u32),
    IdealTable(DensityDoc),
    Realistic(RealisticDoc),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DensityDoc {
    re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    im: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RealisticDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    logical: Option<u32>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    phase_state: bool,
    delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
enum OpDoc {
    #[serde(rename = "SUM")]
    Sum([usize; 2]),
    #[serde(rename = "SUM_INV")]
    SumInv([usize; 2]),
    #[serde(rename = "Fourier", alias = "F")]
    Fourier(usize),
    #[serde(rename = "Fourier_INV", alias = "F_INV")]
    FourierInv(usize),
    #[serde(rename = "Phase", alias = "P")]
    Phase(usize),
    #[serde(rename = "Phase_INV", alias = "P_INV")]
    PhaseInv(usize),
    #[serde(rename = "CZ")]
    Cz([usize; 2]),
    #[serde(rename = "CZ_INV")]
    CzInv([usize; 2]),
    #[serde(rename = "symplectic")]
    Symplectic(Vec<Vec<f64>>),
    #[serde(rename = "displace")]
    Displace(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasurementDoc {
    modes: Vec<usize>,
    #[serde(rename = "K")]
    k: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorSettings {
    pub epsilon: f64,
    pub delta_fail: f64,
    #[serde(default)]
    pub seed: u64,
}

/// A validated circuit.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitSpec {
    pub params: CodeParams,
    pub inputs: Vec<ModeInput>,
    pub ops: Vec<Operation>,
    pub measurement: MeasurementSpec,
    pub estimator: Option<EstimatorSettings>,
}

/// A schema violation at a JSON path such as `ops[2].symplectic`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{}", list(.0))]
pub struct SchemaErrors(pub Vec<SchemaError>);

fn list(errs: &[SchemaError]) -> String {
    errs.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

struct Errors(Vec<SchemaError>);

impl Errors {
    fn push(&mut self, path: impl Into<String>, message: impl fmt::Display) {
        self.0.push(SchemaError {
            path: path.into(),
            message: message.to_string(),
        });
    }
}

pub fn parse_circuit(text: &str) -> Result<CircuitSpec, SchemaErrors> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: CircuitDoc = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        SchemaErrors(vec![SchemaError {
            path: if path == "." { "$".into() } else { path },
            message: e.into_inner().to_string(),
        }])
    })?;
    validate(doc)
}

fn validate(doc: CircuitDoc) -> Result<CircuitSpec, SchemaErrors> {
    let mut errs = Errors(Vec::new());
    if doc.format != FORMAT {
        errs.push("format", format_args!("unsupported format {:?}, expected {FORMAT:?}", doc.format));
    }
    if doc.d % 2 == 0 {
        errs.push("d", "d must be odd");
    }
    let params = match CodeParams::new(doc.d, doc.n) {
        Ok(p) => p,
        Err(e) => {
            if doc.d % 2 == 1 {
                errs.push("$", e);
            }
            return Err(SchemaErrors(errs.0));
        }
    };
    let n = params.n();
    if doc.inputs.len() != n {
        errs.push("inputs", format_args!("expected {n} inputs, found {}", doc.inputs.len()));
    }
    let mut inputs = Vec::with_capacity(doc.inputs.len());
    for (i, input) in doc.inputs.iter().enumerate() {
        let path = format!("inputs[{i}]");
        match input_spec(&params, input) {
            Ok(m) => inputs.push(m),
            Err((sub, msg)) => errs.push(format!("{path}{sub}"), msg),
        }
    }
    let mut ops = Vec::with_capacity(doc.ops.len());
    for (k, op) in doc.ops.iter().enumerate() {
        match operation(n, op) {
            Ok(o) => ops.push(o),
            Err(msg) => errs.push(format!("ops[{k}]"), msg),
        }
    }
    let measurement = MeasurementSpec::new(&params, doc.measurement.modes.clone(), doc.measurement.k)
        .map_err(|e| errs.push("measurement", e))
        .ok();
    if let Some(est) = &doc.estimator {
        if !(est.epsilon > 0.0 && est.epsilon < 1.0) {
            errs.push("estimator.epsilon", "must lie in (0, 1)");
        }
        if !(est.delta_fail > 0.0 && est.delta_fail < 1.0) {
            errs.push("estimator.delta_fail", "must lie in (0, 1)");
        }
    }
    match measurement {
        Some(measurement) if errs.0.is_empty() => Ok(CircuitSpec {
            params,
            inputs,
            ops,
            measurement,
            estimator: doc.estimator,
        }),
        _ => Err(SchemaErrors(errs.0)),
    }
}

type InputError = (&'static str, String);

fn input_spec(params: &CodeParams, input: &InputDoc) -> Result<ModeInput, InputError> {
    let d = params.d();
    match input {
        InputDoc::IdealLogical(j) => {
            if *j >= d {
                return Err((".ideal_logical", format!("label {j} out of range for d = {d}")));
            }
            Ok(ModeInput::Logical(*j))
        }
        InputDoc::IdealTable(t) => density(params, t)
            .map(ModeInput::Density)
            .map_err(|m| (".ideal_table", m)),
        InputDoc::Realistic(r) => {
            let kind = match (r.logical, r.phase_state) {
                (Some(j), false) => GkpKind::Logical(j),
                (None, true) => GkpKind::PhaseState,
                _ => {
                    return Err((
                        ".realistic",
                        "give exactly one of `logical` or `phase_state: true`".into(),
                    ))
                }
            };
            RealisticGkpSpec::new(d, r.delta, kind)
                .map(ModeInput::Realistic)
                .map_err(|e| (".realistic", e.to_string()))
        }
    }
}

fn density(params: &CodeParams, t: &DensityDoc) -> Result<DenseOperator, String> {
    let d = params.d() as usize;
    let square = |m: &Vec<Vec<f64>>| m.len() == d && m.iter().all(|r| r.len() == d);
    if !square(&t.re) || t.im.as_ref().is_some_and(|m| !square(m)) {
        return Err(format!("density matrix must be {d}x{d}"));
    }
    let m = DMatrix::from_fn(d, d, |r, c| {
        Complex64::new(t.re[r][c], t.im.as_ref().map_or(0.0, |im| im[r][c]))
    });
    let p1 = params.with_modes(1).map_err(|e| e.to_string())?;
    let rho = DenseOperator::new(&p1, m).map_err(|e| e.to_string())?;
    let herm = rho.hermiticity_defect();
    if herm > 1e-10 {
        return Err(format!("density matrix is not Hermitian (defect {herm:e})"));
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
        return Err(format!("density matrix has trace {}, expected 1", tr.re));
    }
    Ok(rho)
}

fn operation(n: usize, op: &OpDoc) -> Result<Operation, String> {
    let gate = match *op {
        OpDoc::Sum([control, target]) => Generator::Sum { control, target },
        OpDoc::SumInv([control, target]) => Generator::SumInv { control, target },
        OpDoc::Fourier(i) => Generator::Fourier(i),
        OpDoc::FourierInv(i) => Generator::FourierInv(i),
        OpDoc::Phase(i) => Generator::Phase(i),
        OpDoc::PhaseInv(i) => Generator::PhaseInv(i),
        OpDoc::Cz([i, j]) => Generator::Cz(i, j),
        OpDoc::CzInv([i, j]) => Generator::CzInv(i, j),
        OpDoc::Symplectic(ref rows) => {
            let s = IntSymplectic::from_f64_rows(rows).map_err(|e| e.to_string())?;
            if s.modes() != n {
                return Err(format!("matrix acts on {} modes, expected {n}", s.modes()));
            }
            return Ok(Operation::Symplectic(s));
        }
        OpDoc::Displace(ref c) => {
            if c.len() != 2 * n {
                return Err(format!("displacement has {} entries, expected {}", c.len(), 2 * n));
            }
            if c.iter().any(|x| !x.is_finite()) {
                return Err("displacement must be finite".into());
            }
            return Ok(Operation::Displace(c.clone()));
        }
    };
    gate.validate(n).map_err(|e| e.to_string())?;
    Ok(Operation::Gate(gate))
}

fn op_doc(op: &Operation) -> OpDoc {
    match op {
        Operation::Gate(g) => match *g {
            Generator::Sum { control, target } => OpDoc::Sum([control, target]),
            Generator::SumInv { control, target } => OpDoc::SumInv([control, target]),
            Generator::Fourier(i) => OpDoc::Fourier(i),
            Generator::FourierInv(i) => OpDoc::FourierInv(i),
            Generator::Phase(i) => OpDoc::Phase(i),
            Generator::PhaseInv(i) => OpDoc::PhaseInv(i),
            Generator::Cz(i, j) => OpDoc::Cz([i, j]),
            Generator::CzInv(i, j) => OpDoc::CzInv([i, j]),
        },
        Operation::Symplectic(s) => OpDoc::Symplectic(
            s.matrix()
                .rows()
                .iter()
                .map(|r| r.iter().map(|&v| v as f64).collect())
                .collect(),
        ),
        Operation::Displace(c) => OpDoc::Displace(c.clone()),
    }
}

fn input_doc(input: &ModeInput) -> InputDoc {
    match input {
        ModeInput::Logical(j) => InputDoc::IdealLogical(*j),
        ModeInput::Density(rho) => {
            let m = rho.matrix();
            let rows = |f: fn(&Complex64) -> f64| {
                (0..m.nrows())
                    .map(|r| (0..m.ncols()).map(|c| f(&m[(r, c)])).collect())
                    .collect::<Vec<Vec<f64>>>()
            };
            let im = rows(|z| z.im);
            InputDoc::IdealTable(DensityDoc {
                re: rows(|z| z.re),
                im: im.iter().flatten().any(|&v| v != 0.0).then_some(im),
            })
        }
        ModeInput::Realistic(spec) => InputDoc::Realistic(match spec.kind() {
            GkpKind::Logical(j) => RealisticDoc {
                logical: Some(j),
                phase_state: false,
                delta: spec.delta(),
            },
            GkpKind::PhaseState => RealisticDoc {
                logical: None,
                phase_state: true,
                delta: spec.delta(),
            },
        }),
    }
}

/// Pretty JSON that [`parse_circuit`] maps back to `spec`.
pub fn emit_circuit(spec: &CircuitSpec) -> String {
    let doc = CircuitDoc {
        format: FORMAT.into(),
        d: spec.params.d(),
        n: spec.params.n(),
        inputs: spec.inputs.iter().map(input_doc).collect(),
        ops: spec.ops.iter().map(op_doc).collect(),
        measurement: MeasurementDoc {
            modes: spec.measurement.modes().to_vec(),
            k: spec.measurement.bins(),
        },
        estimator: spec.estimator,
    };
    serde_json::to_string_pretty(&doc).expect("circuit documents serialize")
}

/// JSON `ops` array for a generator word.
pub fn word_json(word: &[Generator]) -> serde_json::Value {
    let ops: Vec<OpDoc> = word.iter().map(|&g| op_doc(&Operation::Gate(g))).collect();
    serde_json::to_value(ops).expect("ops serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document() {
        let s = parse_circuit(
            r#"{"d":3,"n":1,"inputs":[{"ideal_logical":0}],"ops":[],"measurement":{"modes":[0],"K":3}}"#,
        )
        .unwrap();
        assert_eq!(s.params.d(), 3);
        assert_eq!(s.inputs, vec![ModeInput::Logical(0)]);
        assert!(s.ops.is_empty() && s.estimator.is_none());
    }

    #[test]
    fn even_d_is_rejected() {
        let e = parse_circuit(
            r#"{"d":4,"n":1,"inputs":[{"ideal_logical":0}],"measurement":{"modes":[0],"K":3}}"#,
        )
        .unwrap_err();
        assert_eq!(e.0[0].path, "d");
        assert_eq!(e.0[0].message, "d must be odd");
    }

    #[test]
    fn non_symplectic_matrix_is_located() {
        let e = parse_circuit(
            r#"{"d":3,"n":1,"inputs":[{"ideal_logical":0}],
                "ops":[{"Fourier":0},{"symplectic":[[2,0],[0,1]]}],
                "measurement":{"modes":[0],"K":3}}"#,
        )
        .unwrap_err();
        assert_eq!(e.0.len(), 1);
        assert_eq!(e.0[0].path, "ops[1]");
        assert!(e.0[0].message.contains("differs from"), "{}", e.0[0].message);
    }

    #[test]
    fn structural_errors_carry_paths() {
        let e = parse_circuit(
            r#"{"d":3,"n":1,"inputs":[{"ideal_logical":0}],"ops":[{"Toffoli":[0,1]}],
                "measurement":{"modes":[0],"K":3}}"#,
        )
        .unwrap_err();
        assert_eq!(e.0[0].path, "ops[0]");
        assert!(e.0[0].message.contains("Toffoli"));
        let e = parse_circuit(
            r#"{"d":3,"n":2,"inputs":[{"ideal_logical":0},{"ideal_logical":5}],
                "ops":[{"SUM":[0,2]}],"measurement":{"modes":[0],"K":3}}"#,
        )
        .unwrap_err();
        let paths: Vec<_> = e.0.iter().map(|x| x.path.as_str()).collect();
        assert_eq!(paths, ["inputs[1].ideal_logical", "ops[0]"]);
    }

    #[test]
    fn round_trip() {
        let text = r#"{"d":3,"n":2,
            "inputs":[{"ideal_table":{"re":[[0.5,0,0],[0,0.5,0],[0,0,0]]}},
                      {"realistic":{"phase_state":true,"delta":0.3}}],
            "ops":[{"F":0},{"SUM_INV":[1,0]},{"CZ":[0,1]},{"Phase_INV":1},
                   {"symplectic":[[1,0,0,0],[0,1,0,0],[1,0,1,0],[0,0,0,1]]},
                   {"displace":[0.25,-1,0,2]}],
            "measurement":{"modes":[1,0],"K":6},
            "estimator":{"epsilon":0.1,"delta_fail":0.2,"seed":9}}"#;
        let spec = parse_circuit(text).unwrap();
        let again = parse_circuit(&emit_circuit(&spec)).unwrap();
        assert_eq!(spec, again);
    }
}
