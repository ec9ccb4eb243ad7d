//! Optimized trade-off curves swept over the beam-splitter angle.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fidelities::{
    avg_ed_fidelities, avg_id_fidelities, oracle_fidelity, thermal_avg, thermal_weights_checked,
    universal_ed_fidelities, universal_id_fidelities, Ensemble, FidelityKind, FidelityPair,
};
use crate::optimize::{
    optimal_g_disturbance, optimal_g_distortion, optimal_kappa_estimation, optimal_kappa_info,
    try_maximize_1d, Bracket, DEFAULT_TOL,
};
use crate::phase_space::InputState;
use crate::quadrature::QuadratureSpec;
use crate::scheme::{universal_gain, universal_kappa, SchemeParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveKind {
    /// (Ḡ, F̄) for a Gaussian coherent ensemble.
    IdCoherent,
    /// (H̄, K̄) for a Gaussian coherent ensemble.
    EdCoherent,
    /// (H, K) for one number state.
    EdFock,
    /// (H̄, K̄) for a thermal number-state ensemble.
    EdThermal,
}

impl CurveKind {
    pub const ALL: [CurveKind; 4] = [
        CurveKind::IdCoherent,
        CurveKind::EdCoherent,
        CurveKind::EdFock,
        CurveKind::EdThermal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CurveKind::IdCoherent => "id-coherent",
            CurveKind::EdCoherent => "ed-coherent",
            CurveKind::EdFock => "ed-fock",
            CurveKind::EdThermal => "ed-thermal",
        }
    }
}

impl fmt::Display for CurveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CurveKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CurveKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidParams(format!("unknown curve kind {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveSpec {
    pub curve: CurveKind,
    pub eta: f64,
    pub ensemble: Ensemble,
    pub phi_steps: usize,
    pub universal: bool,
}

impl CurveSpec {
    pub fn validate(&self) -> Result<()> {
        if self.phi_steps < 2 {
            return Err(Error::InvalidParams(format!(
                "phi_steps = {} must be >= 2",
                self.phi_steps
            )));
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::InvalidParams(format!("eta = {} must lie in (0, 1]", self.eta)));
        }
        self.ensemble.validate()?;
        let matches = matches!(
            (self.curve, self.ensemble),
            (CurveKind::IdCoherent | CurveKind::EdCoherent, Ensemble::GaussianCoherent { .. })
                | (CurveKind::EdFock, Ensemble::Single(InputState::Fock(_)))
                | (CurveKind::EdThermal, Ensemble::ThermalFock { .. })
        );
        if !matches {
            return Err(Error::InvalidParams(format!(
                "curve {} does not accept ensemble {:?}",
                self.curve, self.ensemble
            )));
        }
        Ok(())
    }

    /// Angles of the sweep: `k (π/2)/phi_steps` for `k = 1..=phi_steps`,
    /// preceded by the `φ = 0` limit for optimized curves.
    pub fn phi_grid(&self) -> Vec<f64> {
        let start = if self.universal { 1 } else { 0 };
        (start..=self.phi_steps)
            .map(|k| {
                if k == self.phi_steps {
                    FRAC_PI_2
                } else {
                    k as f64 * FRAC_PI_2 / self.phi_steps as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TradeoffPoint {
    pub phi: f64,
    pub x_fid: f64,
    pub y_fid: f64,
    pub kappa_opt: f64,
    pub g_opt: f64,
}

pub fn generate_curve(spec: &CurveSpec) -> Result<Vec<TradeoffPoint>> {
    generate_curve_with(spec, &QuadratureSpec::default())
}

/// Evaluates the curve on [`CurveSpec::phi_grid`], points in parallel and
/// returned in grid order. Errors carry the offending angle.
pub fn generate_curve_with(spec: &CurveSpec, quad: &QuadratureSpec) -> Result<Vec<TradeoffPoint>> {
    spec.validate()?;
    let weights = match spec.ensemble {
        Ensemble::ThermalFock { nbar, n_trunc } => thermal_weights_checked(nbar, n_trunc)?,
        _ => Vec::new(),
    };
    spec.phi_grid()
        .into_par_iter()
        .map(|phi| {
            curve_point(spec, phi, &weights, quad).map_err(|e| Error::AtPhi {
                phi,
                source: Box::new(e),
            })
        })
        .collect()
}

fn point(phi: f64, pair: FidelityPair, kappa: f64, g: f64) -> TradeoffPoint {
    TradeoffPoint {
        phi,
        x_fid: pair.x,
        y_fid: pair.y,
        kappa_opt: kappa,
        g_opt: g,
    }
}

fn curve_point(
    spec: &CurveSpec,
    phi: f64,
    weights: &[f64],
    quad: &QuadratureSpec,
) -> Result<TradeoffPoint> {
    let eta = spec.eta;
    if spec.universal {
        let (kappa, g) = (universal_kappa(phi), universal_gain(phi));
        let pair = match spec.curve {
            CurveKind::IdCoherent => universal_id_fidelities(eta, phi)?,
            CurveKind::EdCoherent => universal_ed_fidelities(eta, phi)?,
            CurveKind::EdFock | CurveKind::EdThermal => {
                let p = SchemeParams::new(eta, phi, kappa, g)?;
                let h = numeric_objective(spec, FidelityKind::Estimation, &p, weights, quad)?;
                let k = numeric_objective(spec, FidelityKind::Distortion, &p, weights, quad)?;
                FidelityPair::ed(h, k)
            }
        };
        return Ok(point(phi, pair, kappa, g));
    }

    match (spec.curve, spec.ensemble) {
        (CurveKind::IdCoherent, Ensemble::GaussianCoherent { omega }) => {
            let kappa = optimal_kappa_info(eta, phi, omega)?;
            let g = optimal_g_disturbance(eta, phi, omega)?;
            Ok(point(phi, avg_id_fidelities(eta, phi, omega, kappa, g)?, kappa, g))
        }
        (CurveKind::EdCoherent, Ensemble::GaussianCoherent { omega }) => {
            let kappa = optimal_kappa_estimation(eta, phi, omega)?;
            let g = optimal_g_distortion(eta, phi, omega)?;
            Ok(point(phi, avg_ed_fidelities(eta, phi, omega, kappa, g)?, kappa, g))
        }
        _ => {
            // H depends on κ only and K on g only; the other one is a dummy.
            let (kappa, h) = try_maximize_1d(
                |kappa| {
                    let p = SchemeParams::new(eta, phi, kappa, 0.0)?;
                    numeric_objective(spec, FidelityKind::Estimation, &p, weights, quad)
                },
                Bracket::default(),
                DEFAULT_TOL,
            )?;
            let (g, k) = try_maximize_1d(
                |g| {
                    let p = SchemeParams::new(eta, phi, 1.0, g)?;
                    numeric_objective(spec, FidelityKind::Distortion, &p, weights, quad)
                },
                Bracket::default(),
                DEFAULT_TOL,
            )?;
            Ok(point(phi, FidelityPair::ed(h, k), kappa, g))
        }
    }
}

fn numeric_objective(
    spec: &CurveSpec,
    kind: FidelityKind,
    p: &SchemeParams,
    weights: &[f64],
    quad: &QuadratureSpec,
) -> Result<f64> {
    match spec.ensemble {
        Ensemble::Single(state) => oracle_fidelity(kind, &state, p, quad),
        Ensemble::ThermalFock { .. } => thermal_avg(kind, p, weights, quad),
        Ensemble::GaussianCoherent { .. } => Err(Error::InvalidParams(
            "coherent curves are evaluated in closed form".into(),
        )),
    }
}
