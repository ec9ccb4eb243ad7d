//! Statistics of the beam-splitter / double-homodyne / feed-forward scheme.
//!
//! The signal meets the vacuum at a beam splitter of transmissivity
//! `cos²φ`; the reflected beam goes to a double-homodyne detector of
//! efficiency `η` and the outcome `z` displaces the transmitted beam by
//! `g z`. Every density below is a rescaled s-ordered density of the input.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase_space::{wigner_s, ComplexAmplitude, InputState, OrderingParam};
use crate::quadrature::Envelope;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeParams {
    /// Detector quantum efficiency, `0 < η ≤ 1`.
    pub eta: f64,
    /// Beam-splitter angle in `[0, π/2]`.
    pub phi: f64,
    /// Inference rescaling.
    pub kappa: f64,
    /// Feed-forward gain.
    pub g: f64,
}

impl SchemeParams {
    pub fn new(eta: f64, phi: f64, kappa: f64, g: f64) -> Result<Self> {
        let p = Self {
            eta,
            phi,
            kappa,
            g,
        };
        p.validate()?;
        Ok(p)
    }

    /// Parameters of the protocol whose fidelities do not depend on the
    /// coherent amplitude: `κ = 1/sinφ`, `g = (1 - cosφ)/sinφ`.
    pub fn universal(eta: f64, phi: f64) -> Result<Self> {
        if !(phi > 0.0 && phi <= FRAC_PI_2) {
            return Err(Error::OutOfRange {
                what: "phi",
                value: phi,
                reason: "universal protocol needs 0 < phi <= pi/2",
            });
        }
        Self::new(eta, phi, universal_kappa(phi), universal_gain(phi))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::InvalidParams(format!(
                "efficiency eta = {} outside (0, 1]",
                self.eta
            )));
        }
        if !(0.0..=FRAC_PI_2).contains(&self.phi) {
            return Err(Error::InvalidParams(format!(
                "beam-splitter angle phi = {} outside [0, pi/2]",
                self.phi
            )));
        }
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return Err(Error::InvalidParams(format!("kappa = {} must be >= 0", self.kappa)));
        }
        if !(self.g >= 0.0 && self.g.is_finite()) {
            return Err(Error::InvalidParams(format!("gain g = {} must be >= 0", self.g)));
        }
        Ok(())
    }

    pub fn transmissivity(&self) -> f64 {
        self.phi.cos().powi(2)
    }

    /// Amplitude scale `cosφ + g sinφ` of the output state.
    pub fn feed_forward_scale(&self) -> f64 {
        self.phi.cos() + self.g * self.phi.sin()
    }
}

pub fn universal_kappa(phi: f64) -> f64 {
    1.0 / phi.sin()
}

pub fn universal_gain(phi: f64) -> f64 {
    (1.0 - phi.cos()) / phi.sin()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderingTriple {
    /// Ordering of the outcome distribution (`-∞` at `φ = 0`).
    pub s1: f64,
    /// Ordering of the output P-function.
    pub s2: f64,
    /// Ordering of the output Q-function.
    pub s3: f64,
}

pub fn ordering_params(p: &SchemeParams) -> Result<OrderingTriple> {
    let m = p.feed_forward_scale();
    if m == 0.0 {
        return Err(Error::DegenerateGeometry);
    }
    let sin2 = p.phi.sin().powi(2);
    let s1 = if sin2 == 0.0 {
        f64::NEG_INFINITY
    } else {
        1.0 - 2.0 / (p.eta * sin2)
    };
    Ok(OrderingTriple {
        s1,
        s2: output_ordering(p, 1.0),
        s3: output_ordering(p, -1.0),
    })
}

/// Ordering `s_in` such that the `s_out`-ordered density of the output
/// state is `W_{s_in}[ϱ_in](z/m) / m²`, with `m = cosφ + g sinφ`.
///
/// The outcome-averaged displacement adds `2g²/(η m²)` to `1 - s`, and each
/// further Gaussian smoothing of the output by `1 - s_out` adds
/// `(1 - s_out)/m²`.
pub fn output_ordering(p: &SchemeParams, s_out: f64) -> f64 {
    let m2 = p.feed_forward_scale().powi(2);
    1.0 - (2.0 * p.g * p.g / p.eta + (1.0 - s_out)) / m2
}

/// Distribution of the raw double-homodyne outcomes.
pub fn outcome_density(state: &InputState, p: &SchemeParams, z: ComplexAmplitude) -> f64 {
    let sin = p.phi.sin();
    if p.phi == 0.0 || sin == 0.0 {
        // Only the vacuum reaches the detector.
        return p.eta / PI * (-p.eta * z.norm_sqr()).exp();
    }
    let s1 = 1.0 - 2.0 / (p.eta * sin * sin);
    let s1 = OrderingParam::new(s1).expect("s1 <= -1 for eta <= 1");
    wigner_s(state, s1, z / sin) / (sin * sin)
}

pub fn outcome_envelope(state: &InputState, p: &SchemeParams) -> Envelope {
    let center = state.center() * p.phi.sin();
    match *state {
        InputState::Coherent(_) => Envelope::gaussian(center, 1.0 / p.eta),
        InputState::Fock(n) => Envelope::fock(center, 1.0 / p.eta, n),
    }
}

/// `s_out`-ordered density of the (outcome-averaged) output state.
pub fn output_density(
    state: &InputState,
    p: &SchemeParams,
    s_out: f64,
    z: ComplexAmplitude,
) -> Result<f64> {
    let m = p.feed_forward_scale();
    if m == 0.0 {
        return Err(Error::DegenerateGeometry);
    }
    let s = OrderingParam::new(output_ordering(p, s_out))?;
    Ok(wigner_s(state, s, z / m) / (m * m))
}

pub fn output_envelope(state: &InputState, p: &SchemeParams, s_out: f64) -> Envelope {
    let center = state.center() * p.feed_forward_scale();
    let width = p.g * p.g / p.eta + 0.5 * (1.0 - s_out);
    match *state {
        InputState::Coherent(_) => Envelope::gaussian(center, width),
        InputState::Fock(n) => Envelope::fock(center, width, n),
    }
}

/// Glauber P-function of the output state; only pointwise-defined when the
/// feed-forward adds noise (`s2 < 1`).
pub fn output_p_density(state: &InputState, p: &SchemeParams, xi: ComplexAmplitude) -> Result<f64> {
    if p.g == 0.0 {
        return Err(Error::DistributionalP { s2: 1.0 });
    }
    let m = p.feed_forward_scale();
    if m == 0.0 {
        return Err(Error::DegenerateGeometry);
    }
    let s2 = output_ordering(p, 1.0);
    if s2 >= 1.0 {
        return Err(Error::DistributionalP { s2 });
    }
    output_density(state, p, 1.0, xi)
}

/// Husimi Q-function of the output state.
pub fn output_q(state: &InputState, p: &SchemeParams, z: ComplexAmplitude) -> Result<f64> {
    output_density(state, p, -1.0, z)
}

/// Mean of the outcome distribution for a coherent input.
pub fn coherent_outcome_mean(beta: ComplexAmplitude, p: &SchemeParams) -> Complex64 {
    beta * p.phi.sin()
}
