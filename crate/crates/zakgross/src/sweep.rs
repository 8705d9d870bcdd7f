//! Wigner grids and negativity sweeps.

use rayon::prelude::*;
use zakgross_core::quadrature::AdaptiveTorus;
use zakgross_core::theta::{
    gkp_wigner_oracle, GaussianComb, GkpKind, GkpThetaForm, RealisticGkpSpec, ThetaError,
};
use zakgross_core::wigner::{comb_negativity, negativity_rule, realistic_negativity, SERIES_TOL};
use zakgross_core::{CodeParams, PhasePoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    Logical(u32),
    PhaseState,
    /// The Gaussian vacuum `e^{−x²/2}`; ignores `Δ`.
    Vacuum,
}

impl std::str::FromStr for SweepKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "phase_state" | "phase" => Ok(SweepKind::PhaseState),
            "vacuum" => Ok(SweepKind::Vacuum),
            _ => s
                .strip_prefix("logical_")
                .and_then(|j| j.parse().ok())
                .map(SweepKind::Logical)
                .ok_or_else(|| format!("unknown state {s:?}; use logical_<j>, phase_state or vacuum")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub delta: f64,
    pub negativity: f64,
    pub log_negativity: f64,
    pub quadrature_error: f64,
    /// Empty on success.
    pub error: String,
}

pub fn quadrature_rule(tol: Option<f64>) -> AdaptiveTorus {
    let mut rule = negativity_rule();
    if let Some(t) = tol {
        rule.abs_tol = t;
    }
    rule
}

/// One row per `Δ`; failures are reported in the row.
pub fn negativity_sweep(kind: SweepKind, deltas: &[f64], d: u32, rule: &AdaptiveTorus) -> Vec<SweepRow> {
    let vacuum = (kind == SweepKind::Vacuum).then(|| comb_negativity(&GaussianComb::vacuum(), d, rule));
    deltas
        .par_iter()
        .map(|&delta| {
            let res = match (kind, vacuum) {
                (_, Some(q)) => Ok(q),
                (SweepKind::Logical(j), _) => RealisticGkpSpec::logical(d, j, delta)
                    .map_err(Into::into)
                    .and_then(|s| realistic_negativity(&s, rule)),
                _ => RealisticGkpSpec::phase_state(d, delta)
                    .map_err(Into::into)
                    .and_then(|s| realistic_negativity(&s, rule)),
            };
            match res {
                Ok(q) => SweepRow {
                    delta,
                    negativity: q.value,
                    log_negativity: q.value.ln(),
                    quadrature_error: q.error_estimate,
                    error: String::new(),
                },
                Err(e) => SweepRow {
                    delta,
                    negativity: f64::NAN,
                    log_negativity: f64::NAN,
                    quadrature_error: f64::NAN,
                    error: e.to_string(),
                },
            }
        })
        .collect()
}

pub const SWEEP_HEADER: [&str; 5] = ["delta", "M", "log_M", "quadrature_error", "error"];

pub fn sweep_rows(rows: &[SweepRow]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| {
            vec![
                r.delta.to_string(),
                format!("{:.15e}", r.negativity),
                format!("{:.15e}", r.log_negativity),
                format!("{:.3e}", r.quadrature_error),
                r.error.clone(),
            ]
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridMethod {
    /// Pointwise factored theta sum.
    Theta,
    /// Truncated Fourier series of the theta form.
    Series,
    /// Position-space definition.
    Oracle,
}

impl std::str::FromStr for GridMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "theta" => Ok(GridMethod::Theta),
            "series" => Ok(GridMethod::Series),
            "oracle" => Ok(GridMethod::Oracle),
            _ => Err(format!("unknown method {s:?}; use theta, series or oracle")),
        }
    }
}

pub const GRID_HEADER: [&str; 3] = ["u", "v", "W"];

/// `(u, v, W)` on a `points × points` grid of `[0, dℓ)²`, `u = η_X`, `v = η_Z`.
pub fn wigner_grid(
    spec: &RealisticGkpSpec,
    points: usize,
    method: GridMethod,
) -> Result<Vec<[f64; 3]>, ThetaError> {
    let period = spec.period();
    let h = period / points as f64;
    let form = GkpThetaForm::new(spec.clone())?;
    let series = match method {
        GridMethod::Series => Some(form.fourier_series(SERIES_TOL)?),
        _ => None,
    };
    let params = CodeParams::new(spec.d(), 1).expect("spec has odd d");
    (0..points * points)
        .into_par_iter()
        .map(|k| {
            let (u, v) = ((k / points) as f64 * h, (k % points) as f64 * h);
            let w = match method {
                GridMethod::Theta => form.evaluate(u, v).value,
                GridMethod::Series => series.as_ref().map_or(0.0, |s| s.eval(u, v).re),
                GridMethod::Oracle => gkp_wigner_oracle(spec, &PhasePoint::single(&params, u, v), None)?.value,
            };
            Ok([u, v, w])
        })
        .collect()
}

pub fn realistic_spec(kind: SweepKind, d: u32, delta: f64) -> Result<RealisticGkpSpec, ThetaError> {
    let k = match kind {
        SweepKind::Logical(j) => GkpKind::Logical(j),
        SweepKind::PhaseState => GkpKind::PhaseState,
        SweepKind::Vacuum => return Err(ThetaError::InvalidSpec("the vacuum has no theta form")),
    };
    RealisticGkpSpec::new(d, delta, k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kinds_parse() {
        assert_eq!("logical_0".parse(), Ok(SweepKind::Logical(0)));
        assert_eq!("phase_state".parse(), Ok(SweepKind::PhaseState));
        assert!("logical".parse::<SweepKind>().is_err());
    }

    #[test]
    fn grid_methods_agree() {
        let spec = RealisticGkpSpec::logical(3, 0, 0.5).unwrap();
        let a = wigner_grid(&spec, 5, GridMethod::Theta).unwrap();
        let b = wigner_grid(&spec, 5, GridMethod::Series).unwrap();
        let c = wigner_grid(&spec, 5, GridMethod::Oracle).unwrap();
        for ((x, y), z) in a.iter().zip(&b).zip(&c) {
            assert_eq!(x[..2], z[..2]);
            assert!((x[2] - y[2]).abs() < 1e-12 && (x[2] - z[2]).abs() < 1e-12);
        }
    }

    #[test]
    fn sweep_reports_bad_rows() {
        let rows = negativity_sweep(SweepKind::Logical(0), &[0.5, -1.0], 3, &quadrature_rule(None));
        assert!(rows[0].error.is_empty() && rows[0].log_negativity > 0.1);
        assert!(!rows[1].error.is_empty());
        let vac = negativity_sweep(SweepKind::Vacuum, &[1.0], 3, &quadrature_rule(None));
        assert!((vac[0].log_negativity - 0.43274).abs() < 1e-4, "{:?}", vac[0]);
    }
}
