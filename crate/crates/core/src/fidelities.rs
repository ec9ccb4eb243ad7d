//! Information (G), disturbance (F), estimation (H) and distortion (K)
//! fidelities.
//!
//! Coherent inputs have closed forms, per state, for the universal protocol
//! and averaged over a Gaussian set of amplitudes. Every fidelity also has a
//! quadrature evaluator ([`oracle_fidelity`]) that integrates its defining
//! overlap directly from the phase-space densities of [`crate::scheme`]; it
//! is the only evaluator for number states.
//!
//! Two per-state forms differ from their most commonly quoted versions: the
//! K exponent is negative (otherwise K grows without bound in `|β|`), and
//! the averaged H carries `(1 - κ sinφ)²`. Both are what the defining
//! integrals give; the oracle tests pin them.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase_space::{
    q_function, wigner_s, ComplexAmplitude, InputState, OrderingParam, DEFAULT_N_MAX,
};
use crate::quadrature::{self, Envelope, QuadratureSpec};
use crate::scheme::{
    outcome_density, outcome_envelope, output_density, output_envelope, output_ordering,
    SchemeParams,
};

/// Tail weight a thermal truncation may leave out.
pub const THERMAL_TAIL_BOUND: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FidelityKind {
    /// G: overlap of the inferred coherent state with the input.
    Information,
    /// F: overlap of the output state with the input.
    Disturbance,
    /// H: Bhattacharyya overlap of the rescaled outcome distribution with `Q_in`.
    Estimation,
    /// K: Bhattacharyya overlap of `Q_out` with `Q_in`.
    Distortion,
}

impl FidelityKind {
    pub const ALL: [FidelityKind; 4] = [
        FidelityKind::Information,
        FidelityKind::Disturbance,
        FidelityKind::Estimation,
        FidelityKind::Distortion,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            FidelityKind::Information => "G",
            FidelityKind::Disturbance => "F",
            FidelityKind::Estimation => "H",
            FidelityKind::Distortion => "K",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairLabel {
    /// (G, F)
    InformationDisturbance,
    /// (H, K)
    EstimationDistortion,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FidelityPair {
    pub x: f64,
    pub y: f64,
    pub label: PairLabel,
}

impl FidelityPair {
    pub fn id(x: f64, y: f64) -> Self {
        Self {
            x,
            y,
            label: PairLabel::InformationDisturbance,
        }
    }

    pub fn ed(x: f64, y: f64) -> Self {
        Self {
            x,
            y,
            label: PairLabel::EstimationDistortion,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ensemble {
    /// Coherent states with amplitude density `exp(-|β|²/Ω²)/(πΩ²)`.
    GaussianCoherent { omega: f64 },
    /// Number states with thermal weights of mean photon number `nbar`.
    ThermalFock { nbar: f64, n_trunc: Option<usize> },
    Single(InputState),
}

impl Ensemble {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Ensemble::GaussianCoherent { omega } if !(omega > 0.0 && omega.is_finite()) => {
                Err(Error::InvalidParams(format!("omega = {omega} must be > 0")))
            }
            Ensemble::ThermalFock { nbar, .. } if !(nbar >= 0.0 && nbar.is_finite()) => {
                Err(Error::InvalidParams(format!("nbar = {nbar} must be >= 0")))
            }
            Ensemble::Single(state) => state.validate(DEFAULT_N_MAX),
            _ => Ok(()),
        }
    }
}

fn check_omega(omega: f64) -> Result<()> {
    if omega > 0.0 && omega.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            what: "omega",
            value: omega,
            reason: "ensemble width must be positive",
        })
    }
}

fn check_universal_phi(phi: f64) -> Result<()> {
    if phi > 0.0 && phi <= FRAC_PI_2 {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            what: "phi",
            value: phi,
            reason: "universal protocol needs 0 < phi <= pi/2",
        })
    }
}

// ---------------------------------------------------------------------------
// Closed forms, coherent inputs

/// Residual displacement of the inferred amplitude, `1 - κ sinφ`.
fn inference_bias(p: &SchemeParams) -> f64 {
    1.0 - p.kappa * p.phi.sin()
}

/// Residual displacement of the output amplitude, `1 - cosφ - g sinφ`.
fn output_bias(p: &SchemeParams) -> f64 {
    1.0 - p.feed_forward_scale()
}

pub fn info_fidelity_coherent(p: &SchemeParams, beta: ComplexAmplitude) -> f64 {
    let d = p.eta + p.kappa * p.kappa;
    p.eta / d * (-p.eta * inference_bias(p).powi(2) * beta.norm_sqr() / d).exp()
}

pub fn disturbance_fidelity_coherent(p: &SchemeParams, beta: ComplexAmplitude) -> f64 {
    let d = p.eta + p.g * p.g;
    p.eta / d * (-p.eta * output_bias(p).powi(2) * beta.norm_sqr() / d).exp()
}

pub fn est_fidelity_coherent(p: &SchemeParams, beta: ComplexAmplitude) -> f64 {
    let d = p.eta + p.kappa * p.kappa;
    2.0 * p.kappa * p.eta.sqrt() / d
        * (-p.eta * inference_bias(p).powi(2) * beta.norm_sqr() / (2.0 * d)).exp()
}

pub fn distortion_fidelity_coherent(p: &SchemeParams, beta: ComplexAmplitude) -> f64 {
    let g2 = p.g * p.g;
    let d = 2.0 * p.eta + g2;
    2.0 * (p.eta * (p.eta + g2)).sqrt() / d
        * (-p.eta * output_bias(p).powi(2) * beta.norm_sqr() / (2.0 * d)).exp()
}

pub fn coherent_fidelity(kind: FidelityKind, p: &SchemeParams, beta: ComplexAmplitude) -> f64 {
    match kind {
        FidelityKind::Information => info_fidelity_coherent(p, beta),
        FidelityKind::Disturbance => disturbance_fidelity_coherent(p, beta),
        FidelityKind::Estimation => est_fidelity_coherent(p, beta),
        FidelityKind::Distortion => distortion_fidelity_coherent(p, beta),
    }
}

pub fn universal_id_fidelities(eta: f64, phi: f64) -> Result<FidelityPair> {
    check_universal_phi(phi)?;
    let es2 = eta * phi.sin().powi(2);
    let u2 = (1.0 - phi.cos()).powi(2);
    Ok(FidelityPair::id(es2 / (1.0 + es2), es2 / (es2 + u2)))
}

/// Largest information fidelity a universal protocol reaches (at φ = π/2).
pub fn universal_g_max(eta: f64) -> f64 {
    eta / (1.0 + eta)
}

/// Disturbance fidelity of the universal protocol as a function of its
/// information fidelity.
pub fn universal_id_tradeoff(eta: f64, g: f64) -> Result<f64> {
    let g_max = universal_g_max(eta);
    if !(g >= 0.0 && g <= g_max * (1.0 + 1e-12)) {
        return Err(Error::OutOfRange {
            what: "G",
            value: g,
            reason: "beyond the reachable universal range [0, eta/(1+eta)]",
        });
    }
    if g == 0.0 {
        return Ok(1.0);
    }
    let inner = (1.0 - g / (eta * (1.0 - g))).max(0.0);
    let bracket = (1.0 - inner.sqrt()).powi(2);
    Ok(g / (g + (1.0 - g) * bracket))
}

pub fn avg_id_fidelities(eta: f64, phi: f64, omega: f64, kappa: f64, g: f64) -> Result<FidelityPair> {
    check_omega(omega)?;
    let (s, c) = phi.sin_cos();
    let o2 = omega * omega;
    let gbar = eta / (eta + kappa * kappa + eta * o2 * (1.0 - kappa * s).powi(2));
    let fbar = eta / (eta + g * g + eta * o2 * (1.0 - c - g * s).powi(2));
    Ok(FidelityPair::id(gbar, fbar))
}

/// Averaged (G, F) at the optimal κ and g, in closed form.
pub fn optimal_avg_id_fidelities(eta: f64, phi: f64, omega: f64) -> Result<FidelityPair> {
    check_omega(omega)?;
    let (s, c) = phi.sin_cos();
    let o2 = omega * omega;
    let a = 1.0 + eta * o2 * s * s;
    Ok(FidelityPair::id(
        a / (a + o2),
        a / (1.0 + o2 * (eta * s * s + (1.0 - c).powi(2))),
    ))
}

/// Averaged-ensemble trade-off `F̄(Ḡ)` obtained by eliminating φ from the
/// optimal averaged fidelities:
/// `F̄ = Ḡ / {Ḡ + (1-Ḡ)[1 - √(1 - ((1+Ω²)Ḡ - 1)/(ηΩ²(1-Ḡ)))]²}`.
pub fn avg_id_tradeoff(eta: f64, omega: f64, gbar: f64) -> Result<f64> {
    Ok(gbar / avg_id_tradeoff_braces(eta, omega, gbar)?)
}

/// The same relation with an extra `(1+Ω²)/Ω²` prefactor, the form found in
/// the literature for this scheme. It disagrees with the parametric curve
/// for finite Ω and is kept only to quantify that discrepancy.
pub fn avg_id_tradeoff_scaled_prefactor(eta: f64, omega: f64, gbar: f64) -> Result<f64> {
    let o2 = omega * omega;
    Ok((1.0 + o2) * gbar / o2 / avg_id_tradeoff_braces(eta, omega, gbar)?)
}

fn avg_id_tradeoff_braces(eta: f64, omega: f64, gbar: f64) -> Result<f64> {
    check_omega(omega)?;
    let o2 = omega * omega;
    let lo = 1.0 / (1.0 + o2);
    let hi = (1.0 + eta * o2) / (1.0 + o2 + eta * o2);
    if !(gbar >= lo * (1.0 - 1e-12) && gbar <= hi * (1.0 + 1e-12)) {
        return Err(Error::OutOfRange {
            what: "G",
            value: gbar,
            reason: "outside the reachable averaged range",
        });
    }
    // Radicand written without the cancellation in `1 - x` near the upper end.
    let inner = ((1.0 + eta * o2 - gbar * (1.0 + o2 + eta * o2)) / (eta * o2 * (1.0 - gbar)))
        .clamp(0.0, 1.0);
    Ok(gbar + (1.0 - gbar) * (1.0 - inner.sqrt()).powi(2))
}

pub fn universal_ed_fidelities(eta: f64, phi: f64) -> Result<FidelityPair> {
    check_universal_phi(phi)?;
    let s = phi.sin();
    let s2 = s * s;
    let u2 = (1.0 - phi.cos()).powi(2);
    let h = 2.0 * eta.sqrt() * s / (1.0 + eta * s2);
    let k = 2.0 * s * (eta * (eta * s2 + u2)).sqrt() / (2.0 * eta * s2 + u2);
    Ok(FidelityPair::ed(h, k))
}

pub fn avg_ed_fidelities(eta: f64, phi: f64, omega: f64, kappa: f64, g: f64) -> Result<FidelityPair> {
    check_omega(omega)?;
    let (s, c) = phi.sin_cos();
    let o2 = omega * omega;
    let hbar = 4.0 * kappa * eta.sqrt()
        / (2.0 * (eta + kappa * kappa) + eta * o2 * (1.0 - kappa * s).powi(2));
    let kbar = 4.0 * (eta * (eta + g * g)).sqrt()
        / (2.0 * (2.0 * eta + g * g) + eta * o2 * (1.0 - c - g * s).powi(2));
    Ok(FidelityPair::ed(hbar, kbar))
}

/// Averaged H at its optimal κ, in closed form.
pub fn optimal_avg_estimation(eta: f64, phi: f64, omega: f64) -> Result<f64> {
    check_omega(omega)?;
    let s = phi.sin();
    let o2 = omega * omega;
    let a = (2.0 + o2) * (2.0 + eta * o2 * s * s);
    Ok(2.0 * a.sqrt() / (a - o2 * s * (eta * a).sqrt()))
}

// ---------------------------------------------------------------------------
// Quadrature oracles

/// Evaluates a fidelity by integrating its defining overlap over the plane.
///
/// * G: `∫ T(z) ⟨κz|ϱ|κz⟩`
/// * F: `π ∫ P_out(ξ) Q_in(ξ)`, or `π ∫ W_out W_in` (Wigner functions) when
///   the output P-function is singular (`g = 0`)
/// * H: `∫ √(Q_in(z) S(z))` with `S(z) = T(z/κ)/κ²`
/// * K: `∫ √(Q_in(z) Q_out(z))`
///
/// F and G assume a pure input.
pub fn oracle_fidelity(
    kind: FidelityKind,
    state: &InputState,
    p: &SchemeParams,
    spec: &QuadratureSpec,
) -> Result<f64> {
    p.validate()?;
    state.validate(DEFAULT_N_MAX)?;
    let n = match *state {
        InputState::Fock(n) => n,
        InputState::Coherent(_) => 0,
    };
    let at_center = |c: Complex64, w: f64| Envelope::fock(c, w, n);
    let q_in_env = at_center(state.center(), 1.0);

    match kind {
        FidelityKind::Information => {
            let kappa = p.kappa;
            let envs = [
                outcome_envelope(state, p),
                at_center(state.center() / kappa, 1.0 / (kappa * kappa)),
            ];
            integrate_plane(state, &envs, spec, |z| {
                Ok(outcome_density(state, p, z) * PI * q_function(state, z * kappa))
            })
        }
        FidelityKind::Disturbance => {
            if p.g > 0.0 && output_ordering(p, 1.0) < 1.0 {
                let envs = [output_envelope(state, p, 1.0), q_in_env];
                integrate_plane(state, &envs, spec, |xi| {
                    Ok(output_density(state, p, 1.0, xi)? * PI * q_function(state, xi))
                })
            } else {
                let envs = [output_envelope(state, p, 0.0), state.envelope(OrderingParam::WIGNER)];
                integrate_plane(state, &envs, spec, |z| {
                    Ok(PI
                        * output_density(state, p, 0.0, z)?
                        * wigner_s(state, OrderingParam::WIGNER, z))
                })
            }
        }
        FidelityKind::Estimation => {
            let kappa = p.kappa;
            if kappa == 0.0 {
                // S collapses onto the origin.
                return Ok(0.0);
            }
            let t_env = outcome_envelope(state, p);
            let s_env = Envelope {
                center: t_env.center * kappa,
                width: t_env.width * kappa * kappa,
                order: n,
            };
            integrate_plane(state, &[q_in_env.sqrt(), s_env.sqrt()], spec, |z| {
                let est = outcome_density(state, p, z / kappa) / (kappa * kappa);
                Ok((q_function(state, z) * est).max(0.0).sqrt())
            })
        }
        FidelityKind::Distortion => {
            let envs = [q_in_env.sqrt(), output_envelope(state, p, -1.0).sqrt()];
            integrate_plane(state, &envs, spec, |z| {
                let q_out = output_density(state, p, -1.0, z)?;
                Ok((q_function(state, z) * q_out).max(0.0).sqrt())
            })
        }
    }
}

fn integrate_plane<F>(
    state: &InputState,
    envelopes: &[Envelope],
    spec: &QuadratureSpec,
    f: F,
) -> Result<f64>
where
    F: Fn(Complex64) -> Result<f64>,
{
    let (center, radius) = quadrature::domain_for(envelopes, spec);
    if state.is_radial() && center == Complex64::new(0.0, 0.0) {
        quadrature::try_integrate_radial(|r| f(Complex64::new(r, 0.0)), radius, spec)
    } else {
        quadrature::try_integrate_disc(f, center, radius, spec)
    }
}

/// Average of the quadrature oracle over the Gaussian set of coherent
/// amplitudes of width Ω. Every fidelity depends on `|β|` only, so the
/// average is a radial integral of the per-state oracle.
pub fn oracle_gaussian_average(
    kind: FidelityKind,
    omega: f64,
    p: &SchemeParams,
    spec: &QuadratureSpec,
) -> Result<f64> {
    check_omega(omega)?;
    let o2 = omega * omega;
    let radius = Envelope::gaussian(Complex64::new(0.0, 0.0), o2).reach();
    quadrature::try_integrate_radial(
        |rho| {
            let weight = (-rho * rho / o2).exp() / (PI * o2);
            if weight == 0.0 {
                return Ok(0.0);
            }
            Ok(weight
                * oracle_fidelity(kind, &InputState::Coherent(Complex64::new(rho, 0.0)), p, spec)?)
        },
        radius,
        spec,
    )
}

// ---------------------------------------------------------------------------
// Number states

pub fn fock_estimation(n: u32, p: &SchemeParams, spec: &QuadratureSpec) -> Result<f64> {
    oracle_fidelity(FidelityKind::Estimation, &InputState::Fock(n), p, spec)
}

pub fn fock_distortion(n: u32, p: &SchemeParams, spec: &QuadratureSpec) -> Result<f64> {
    oracle_fidelity(FidelityKind::Distortion, &InputState::Fock(n), p, spec)
}

pub fn fock_ed_fidelities(n: u32, p: &SchemeParams, spec: &QuadratureSpec) -> Result<FidelityPair> {
    Ok(FidelityPair::ed(
        fock_estimation(n, p, spec)?,
        fock_distortion(n, p, spec)?,
    ))
}

/// `⌈ln ε / ln(N/(1+N))⌉` with `ε` = [`THERMAL_TAIL_BOUND`]; the omitted
/// tail `(N/(1+N))^{n+1}` is then below `ε`.
pub fn auto_truncation(nbar: f64) -> usize {
    if nbar <= 0.0 {
        return 0;
    }
    let q = nbar / (1.0 + nbar);
    (THERMAL_TAIL_BOUND.ln() / q.ln()).ceil() as usize
}

/// Thermal weights `p_n = N^n/(1+N)^{n+1}` for `n = 0..=n_trunc`, and the
/// weight of the omitted tail.
pub fn thermal_weights(nbar: f64, n_trunc: usize) -> (Vec<f64>, f64) {
    let q = nbar / (1.0 + nbar);
    let mut w = Vec::with_capacity(n_trunc + 1);
    let mut pn = 1.0 / (1.0 + nbar);
    for _ in 0..=n_trunc {
        w.push(pn);
        pn *= q;
    }
    (w, q.powi(n_trunc as i32 + 1))
}

/// Validated thermal weights, defaulting to [`auto_truncation`] and
/// renormalized over the retained number states.
pub fn thermal_weights_checked(nbar: f64, n_trunc: Option<usize>) -> Result<Vec<f64>> {
    if !(nbar >= 0.0 && nbar.is_finite()) {
        return Err(Error::InvalidParams(format!("nbar = {nbar} must be >= 0")));
    }
    let n_trunc = n_trunc.unwrap_or_else(|| auto_truncation(nbar));
    if n_trunc > DEFAULT_N_MAX as usize {
        return Err(Error::FockTooLarge {
            n: n_trunc as u32,
            max: DEFAULT_N_MAX,
        });
    }
    let (mut w, tail) = thermal_weights(nbar, n_trunc);
    if tail >= THERMAL_TAIL_BOUND {
        return Err(Error::TruncationInsufficient { n_trunc, tail });
    }
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    Ok(w)
}

/// Thermal average of one Fock fidelity (H or K).
pub fn thermal_avg(
    kind: FidelityKind,
    p: &SchemeParams,
    weights: &[f64],
    spec: &QuadratureSpec,
) -> Result<f64> {
    let mut acc = 0.0;
    for (n, w) in weights.iter().enumerate() {
        acc += w * oracle_fidelity(kind, &InputState::Fock(n as u32), p, spec)?;
    }
    Ok(acc)
}

pub fn thermal_avg_ed(
    p: &SchemeParams,
    nbar: f64,
    n_trunc: Option<usize>,
    spec: &QuadratureSpec,
) -> Result<FidelityPair> {
    let weights = thermal_weights_checked(nbar, n_trunc)?;
    Ok(FidelityPair::ed(
        thermal_avg(FidelityKind::Estimation, p, &weights, spec)?,
        thermal_avg(FidelityKind::Distortion, p, &weights, spec)?,
    ))
}
