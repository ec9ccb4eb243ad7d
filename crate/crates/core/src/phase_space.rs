//! s-ordered quasi-probability densities of coherent and Fock states.
//!
//! All densities are normalized to one over the complex plane. An ordering
//! `s` interpolates between the Glauber P-function (`s = 1`, never evaluated
//! pointwise), the Wigner function (`s = 0`) and the Husimi Q-function
//! (`s = -1`); lowering `s` convolves with a Gaussian of variance
//! proportional to the difference (see [`gaussian_smooth`]).

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{self, Envelope, QuadratureSpec};

pub type ComplexAmplitude = Complex64;

/// Default upper bound on Fock numbers accepted by the evaluators.
pub const DEFAULT_N_MAX: u32 = 128;

/// Half-width of the window around `s = -1` where the Fock density is
/// evaluated by its closed-form Q-function limit.
pub const S_WINDOW: f64 = 1e-9;

/// Ordering parameter of an s-ordered density; always `< 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct OrderingParam(f64);

impl OrderingParam {
    pub const WIGNER: OrderingParam = OrderingParam(0.0);
    pub const HUSIMI: OrderingParam = OrderingParam(-1.0);

    pub fn new(s: f64) -> Result<Self> {
        if s < 1.0 {
            Ok(Self(s))
        } else {
            Err(Error::OrderingOutOfRange { s })
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Gaussian width `w` of the coherent-state density `exp(-|ξ-β|²/w)`.
    pub fn width(self) -> f64 {
        0.5 * (1.0 - self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputState {
    Coherent(ComplexAmplitude),
    Fock(u32),
}

impl InputState {
    pub fn vacuum() -> Self {
        InputState::Fock(0)
    }

    pub fn validate(&self, n_max: u32) -> Result<()> {
        match *self {
            InputState::Fock(n) if n > n_max => Err(Error::FockTooLarge { n, max: n_max }),
            InputState::Coherent(beta) if !(beta.re.is_finite() && beta.im.is_finite()) => Err(
                Error::InvalidParams(format!("non-finite coherent amplitude {beta}")),
            ),
            _ => Ok(()),
        }
    }

    /// Center of the phase-space densities of this state.
    pub fn center(&self) -> ComplexAmplitude {
        match *self {
            InputState::Coherent(beta) => beta,
            InputState::Fock(_) => Complex64::new(0.0, 0.0),
        }
    }

    pub fn is_radial(&self) -> bool {
        matches!(self, InputState::Fock(_))
    }

    /// Radius scale of the state: `|β|` or `√n`.
    pub fn scale(&self) -> f64 {
        match *self {
            InputState::Coherent(beta) => beta.norm(),
            InputState::Fock(n) => (n as f64).sqrt(),
        }
    }

    /// Envelope of `W_s` for this state.
    pub fn envelope(&self, s: OrderingParam) -> Envelope {
        match *self {
            InputState::Coherent(beta) => Envelope::gaussian(beta, s.width()),
            InputState::Fock(n) => Envelope::fock(Complex64::new(0.0, 0.0), s.width(), n),
        }
    }
}

fn ln_factorial(n: u32) -> f64 {
    const CACHED: usize = 1024;
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(CACHED + 1);
        let mut acc = 0.0;
        t.push(0.0);
        for k in 1..=CACHED {
            acc += (k as f64).ln();
            t.push(acc);
        }
        t
    });
    match table.get(n as usize) {
        Some(v) => *v,
        None => table[CACHED] + ((CACHED + 1)..=(n as usize)).map(|k| (k as f64).ln()).sum::<f64>(),
    }
}

/// Laguerre polynomial `L_n(x)` by the three-term recurrence.
pub fn laguerre(n: u32, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 - x;
    for k in 1..n {
        let k = k as f64;
        let next = ((2.0 * k + 1.0 - x) * cur - k * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

pub fn wigner_s_coherent(beta: ComplexAmplitude, s: OrderingParam, xi: ComplexAmplitude) -> f64 {
    let w = s.width();
    (-(xi - beta).norm_sqr() / w).exp() / (PI * w)
}

/// s-ordered density of the number state `|n⟩`.
///
/// Away from `s = -1` the Laguerre form is evaluated through the scaled
/// recurrence for `l_k = t^k L_k(x)` with `t = (1+s)/(1-s)`, which stays
/// finite as `t → 0` (there `t·x = 4|ξ|²/(1-s)²` is fixed).
pub fn wigner_s_fock(n: u32, s: OrderingParam, xi: ComplexAmplitude) -> f64 {
    if n == 0 {
        return wigner_s_coherent(Complex64::new(0.0, 0.0), s, xi);
    }
    let r2 = xi.norm_sqr();
    let s = s.value();
    if (s + 1.0).abs() <= S_WINDOW {
        return husimi_fock(n, r2);
    }
    let a = 2.0 / (1.0 - s);
    let t = (1.0 + s) / (1.0 - s);
    let y = a * a * r2;

    // l_{k+1} = ((2k+1) t l_k - y l_k - k t² l_{k-1}) / (k+1)
    let mut prev = 1.0;
    let mut cur = t - y;
    let mut ln_scale = 0.0;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * t * cur - y * cur - kf * t * t * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
        let mag = cur.abs();
        if mag > 1e150 {
            prev /= mag;
            cur /= mag;
            ln_scale += mag.ln();
        }
    }
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * cur * ((a / PI).ln() - a * r2 + ln_scale).exp()
}

/// `e^{-|ξ|²} |ξ|^{2n} / (π n!)`.
fn husimi_fock(n: u32, r2: f64) -> f64 {
    if n == 0 {
        return (-r2).exp() / PI;
    }
    if r2 == 0.0 {
        return 0.0;
    }
    (-r2 + n as f64 * r2.ln() - ln_factorial(n)).exp() / PI
}

pub fn wigner_s(state: &InputState, s: OrderingParam, xi: ComplexAmplitude) -> f64 {
    match *state {
        InputState::Coherent(beta) => wigner_s_coherent(beta, s, xi),
        InputState::Fock(n) => wigner_s_fock(n, s, xi),
    }
}

/// `Q(z) = ⟨z|ϱ|z⟩ / π`.
pub fn q_function(state: &InputState, z: ComplexAmplitude) -> f64 {
    match *state {
        InputState::Coherent(beta) => (-(z - beta).norm_sqr()).exp() / PI,
        InputState::Fock(n) => husimi_fock(n, z.norm_sqr()),
    }
}

/// Transports an r-ordered density to ordering `s < r` by convolution with
/// the normalized Gaussian of width `(r - s)/2`, evaluated at `zeta`.
///
/// `w_envelope` bounds `w`; together with the kernel it fixes the domain.
pub fn gaussian_smooth<F>(
    w: F,
    w_envelope: Envelope,
    r: OrderingParam,
    s: OrderingParam,
    zeta: ComplexAmplitude,
    spec: &QuadratureSpec,
) -> Result<f64>
where
    F: Fn(ComplexAmplitude) -> f64,
{
    if r.value() <= s.value() {
        return Err(Error::OutOfRange {
            what: "r - s",
            value: r.value() - s.value(),
            reason: "smoothing needs r > s",
        });
    }
    let width = 0.5 * (r.value() - s.value());
    let kernel = Envelope::gaussian(zeta, width);
    let (center, radius) = quadrature::domain_for(&[kernel, w_envelope], spec);
    quadrature::integrate_disc(
        |xi| (-(xi - zeta).norm_sqr() / width).exp() / (PI * width) * w(xi),
        center,
        radius,
        spec,
    )
}
