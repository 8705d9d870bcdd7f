//! Oracle-agreement checks at desk scale.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zakgross_core::measure::{exact_probabilities_ideal, MeasurementSpec};
use zakgross_core::quadrature::AdaptiveTorus;
use zakgross_core::qudit::{clifford_oracle_probabilities, CliffordGate};
use zakgross_core::symplectic::{compose_word, decompose, parity_identity_check, Generator, Operation};
use zakgross_core::theta::{gkp_wigner_oracle, GkpKind, GkpThetaForm, RealisticGkpSpec};
use zakgross_core::wigner::{WignerState, SERIES_TOL};
use zakgross_core::{CodeParams, PhasePoint};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

/// A random circuit on basis inputs and the same circuit for the dense oracle.
#[derive(Debug, Clone)]
pub struct CliffordCase {
    pub inputs: Vec<u32>,
    pub ops: Vec<Operation>,
    pub gates: Vec<CliffordGate>,
}

/// Up to `max_len` steps, each a random generator or, with probability 0.3,
/// a unit lattice displacement along one axis.
pub fn random_clifford_case(rng: &mut impl Rng, d: u32, n: usize, max_len: usize) -> CliffordCase {
    let gens = Generator::all(n);
    let inputs = (0..n).map(|_| rng.random_range(0..d)).collect();
    let mut ops = Vec::new();
    let mut gates = Vec::new();
    for _ in 0..rng.random_range(0..=max_len) {
        if rng.random_bool(0.3) {
            let m = rng.random_range(0..n);
            let z = rng.random_bool(0.5);
            let mut c = vec![0.0; 2 * n];
            c[if z { n + m } else { m }] = 1.0;
            ops.push(Operation::Displace(c));
            gates.push(if z {
                CliffordGate::ShiftZ(m)
            } else {
                CliffordGate::ShiftX(m)
            });
        } else {
            let g = gens[rng.random_range(0..gens.len())];
            ops.push(Operation::Gate(g));
            gates.push(CliffordGate::Generator(g));
        }
    }
    CliffordCase { inputs, ops, gates }
}

pub fn random_word(rng: &mut impl Rng, n: usize, max_len: usize) -> Vec<Generator> {
    let gens = Generator::all(n);
    (0..rng.random_range(0..=max_len))
        .map(|_| gens[rng.random_range(0..gens.len())])
        .collect()
}

/// Largest entrywise gap between the phase-space and dense-oracle outcome tables.
pub fn clifford_gap(case: &CliffordCase, d: u32, n: usize) -> Result<f64, String> {
    let params = CodeParams::new(d, n).map_err(|e| e.to_string())?;
    let measured: Vec<usize> = (0..n).collect();
    let st = WignerState::ideal_input(&params, &case.inputs)
        .and_then(|s| s.apply_all(&case.ops))
        .map_err(|e| e.to_string())?;
    let spec = MeasurementSpec::new(&params, measured.clone(), d).map_err(|e| e.to_string())?;
    let a = exact_probabilities_ideal(&st, &spec).map_err(|e| e.to_string())?;
    let b = clifford_oracle_probabilities(&params, &case.inputs, &case.gates, &measured)
        .map_err(|e| e.to_string())?;
    Ok(a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
}

/// Relative gap between the theta evaluation and the position-space oracle.
pub fn theta_gap(spec: &RealisticGkpSpec, u: f64, v: f64) -> Result<f64, String> {
    let form = GkpThetaForm::new(spec.clone()).map_err(|e| e.to_string())?;
    let params = CodeParams::new(spec.d(), 1).map_err(|e| e.to_string())?;
    let a = form.evaluate(u, v).value;
    let b = gkp_wigner_oracle(spec, &PhasePoint::single(&params, u, v), None)
        .map_err(|e| e.to_string())?
        .value;
    Ok((a - b).abs() / b.abs())
}

/// `∫W` over the torus by adaptive quadrature of the Fourier series.
pub fn wigner_integral(spec: &RealisticGkpSpec) -> Result<f64, String> {
    let series = GkpThetaForm::new(spec.clone())
        .and_then(|f| f.fourier_series(SERIES_TOL))
        .map_err(|e| e.to_string())?;
    let q = AdaptiveTorus {
        abs_tol: 1e-9,
        ..Default::default()
    };
    let mut f = |us: &[f64], vs: &[f64], out: &mut [f64]| {
        series.eval_grid(us, vs, out);
    };
    Ok(q.integrate(series.period(), &mut f).value)
}

fn check(name: &str, worst: Result<f64, String>, tol: f64) -> Check {
    match worst {
        Ok(w) => Check {
            name: name.into(),
            pass: w <= tol,
            detail: format!("worst {w:.3e} (tolerance {tol:.0e})"),
        },
        Err(e) => Check {
            name: name.into(),
            pass: false,
            detail: e,
        },
    }
}

/// Runs the quick suite. `tol` overrides the probability tolerance (1e-9).
pub fn run_suite(seed: u64, tol: Option<f64>) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();

    let mut worst: Result<f64, String> = Ok(0.0);
    for d in [3u32, 5] {
        for n in 1..=3usize {
            for _ in 0..20 {
                let case = random_clifford_case(&mut rng, d, n, 10);
                worst = worst.and_then(|w| clifford_gap(&case, d, n).map(|g| w.max(g)));
            }
        }
    }
    out.push(check("ideal circuits vs dense oracle", worst, tol.unwrap_or(1e-9)));

    let mut bad = 0usize;
    for _ in 0..100 {
        let n = rng.random_range(1..=3);
        let s = compose_word(&random_word(&mut rng, n, 20), n).expect("generator words compose");
        for _ in 0..100 {
            let a: Vec<i64> = (0..2 * n).map(|_| rng.random_range(-50..=50)).collect();
            bad += usize::from(!parity_identity_check(&s, &a));
        }
    }
    out.push(Check {
        name: "parity identity".into(),
        pass: bad == 0,
        detail: format!("{bad} violations in 10000 cases"),
    });

    let mut mismatched = 0usize;
    for _ in 0..30 {
        let n = rng.random_range(1..=3);
        let s = compose_word(&random_word(&mut rng, n, 15), n).expect("generator words compose");
        let ok = decompose(&s)
            .and_then(|w| compose_word(&w, n))
            .is_ok_and(|r| r == s);
        mismatched += usize::from(!ok);
    }
    out.push(Check {
        name: "decomposition round trip".into(),
        pass: mismatched == 0,
        detail: format!("{mismatched} of 30 words failed"),
    });

    let mut worst: Result<f64, String> = Ok(0.0);
    for kind in [GkpKind::Logical(0), GkpKind::PhaseState] {
        let spec = RealisticGkpSpec::new(3, 0.3, kind).expect("valid spec");
        for i in 0..3 {
            for j in 0..3 {
                let (u, v) = (0.4 + 1.3 * i as f64, 0.2 + 1.45 * j as f64);
                worst = worst.and_then(|w| theta_gap(&spec, u, v).map(|g| w.max(g)));
            }
        }
    }
    out.push(check("theta vs position-space oracle (relative)", worst, 1e-6));

    let spec = RealisticGkpSpec::logical(3, 0, 0.3).expect("valid spec");
    out.push(check(
        "integral of W",
        wigner_integral(&spec).map(|v| (v - 1.0).abs()),
        1e-5,
    ));
    out
}
