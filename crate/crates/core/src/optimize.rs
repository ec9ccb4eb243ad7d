//! Optimal rescaling κ and feed-forward gain g.
//!
//! For Gaussian coherent ensembles every optimum is closed form except the
//! distortion gain, which is the real root of a depressed cubic. Number-state
//! and thermal objectives go through [`maximize_1d`].

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::fidelities::avg_ed_fidelities;

/// Default search interval for κ and g.
pub const DEFAULT_BRACKET: Bracket = Bracket { lo: 0.0, hi: 10.0 };
/// Default golden-section tolerance in the argument.
pub const DEFAULT_TOL: f64 = 1e-8;
/// Points of the coarse scan preceding golden-section refinement.
pub const SCAN_POINTS: usize = 32;
/// Largest admissible distortion gain.
pub const G_MAX: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

impl Bracket {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_finite() && hi.is_finite() && lo < hi {
            Ok(Self { lo, hi })
        } else {
            Err(Error::BracketInvalid { lo, hi })
        }
    }
}

impl Default for Bracket {
    fn default() -> Self {
        DEFAULT_BRACKET
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

/// κ maximizing the averaged information fidelity.
pub fn optimal_kappa_info(eta: f64, phi: f64, omega: f64) -> Result<f64> {
    check_omega(omega)?;
    let s = phi.sin();
    let eo2 = eta * omega * omega;
    Ok(eo2 * s / (1.0 + eo2 * s * s))
}

/// g maximizing the averaged disturbance fidelity.
///
/// The numerator carries one power of `sinφ`; with `sin²φ` the optimum
/// misses the stationary point of F̄ and the universal limit.
pub fn optimal_g_disturbance(eta: f64, phi: f64, omega: f64) -> Result<f64> {
    check_omega(omega)?;
    let (s, c) = phi.sin_cos();
    let eo2 = eta * omega * omega;
    Ok(eo2 * s * (1.0 - c) / (1.0 + eo2 * s * s))
}

/// κ maximizing the averaged estimation fidelity.
pub fn optimal_kappa_estimation(eta: f64, phi: f64, omega: f64) -> Result<f64> {
    check_omega(omega)?;
    let s = phi.sin();
    let o2 = omega * omega;
    Ok((eta * (2.0 + o2) / (2.0 + eta * o2 * s * s)).sqrt())
}

/// Stationarity condition of the averaged distortion fidelity in g,
/// `a g³ + b g = c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistortionCubic {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl DistortionCubic {
    pub fn new(eta: f64, phi: f64, omega: f64) -> Self {
        let (s, c) = phi.sin_cos();
        let u = 1.0 - c;
        let eo2 = eta * omega * omega;
        Self {
            a: 2.0 + eo2 * s * s,
            b: eo2 * (2.0 * eta * s * s - u * u),
            c: 2.0 * eta * eo2 * s * u,
        }
    }

    /// Residual of the monic form `g³ + (b/a) g - c/a`.
    pub fn residual(&self, g: f64) -> f64 {
        g * g * g + (self.b / self.a) * g - self.c / self.a
    }

    /// Real roots, each polished by Newton steps on the monic form.
    pub fn real_roots(&self) -> Vec<f64> {
        let p = self.b / self.a;
        let q = -self.c / self.a;
        let disc = -(4.0 * p * p * p + 27.0 * q * q);
        let raw: Vec<f64> = if q == 0.0 && p >= 0.0 {
            vec![0.0]
        } else if disc > 0.0 {
            // Three distinct real roots (p < 0).
            let m = 2.0 * (-p / 3.0).sqrt();
            let theta = ((3.0 * q / (p * m)).clamp(-1.0, 1.0)).acos() / 3.0;
            (0..3)
                .map(|k| m * (theta - 2.0 * PI * k as f64 / 3.0).cos())
                .collect()
        } else {
            let r = (q * q / 4.0 + p * p * p / 27.0).max(0.0).sqrt();
            vec![(-q / 2.0 + r).cbrt() + (-q / 2.0 - r).cbrt()]
        };
        raw.into_iter().map(|g| self.polish(g)).collect()
    }

    fn polish(&self, mut g: f64) -> f64 {
        let p = self.b / self.a;
        for _ in 0..4 {
            let d = 3.0 * g * g + p;
            if d == 0.0 {
                break;
            }
            let step = self.residual(g) / d;
            if !step.is_finite() {
                break;
            }
            g -= step;
            if step.abs() <= 1e-16 * g.abs().max(1e-300) {
                break;
            }
        }
        g
    }
}

/// g maximizing the averaged distortion fidelity: the real root of the
/// stationarity cubic in `[0, G_MAX]`. Several admissible roots are
/// resolved by comparing the objective.
pub fn optimal_g_distortion(eta: f64, phi: f64, omega: f64) -> Result<f64> {
    check_omega(omega)?;
    if !(0.0..=FRAC_PI_2).contains(&phi) {
        return Err(Error::OutOfRange {
            what: "phi",
            value: phi,
            reason: "expected 0 <= phi <= pi/2",
        });
    }
    let cubic = DistortionCubic::new(eta, phi, omega);
    let kbar = |g: f64| -> f64 {
        avg_ed_fidelities(eta, phi, omega, 1.0, g)
            .map(|p| p.y)
            .unwrap_or(f64::NEG_INFINITY)
    };
    cubic
        .real_roots()
        .into_iter()
        .filter(|g| (-1e-12..=G_MAX).contains(g))
        .map(|g| g.max(0.0))
        .max_by(|x, y| kbar(*x).total_cmp(&kbar(*y)))
        .ok_or(Error::NoRealRootInRange { g_max: G_MAX })
}

/// Maximizes `f` on `b`: a [`SCAN_POINTS`]-interval scan locates the best
/// sample, then golden-section search refines it between its neighbours.
/// Multimodal objectives thus resolve to the highest sampled peak.
pub fn maximize_1d<F>(f: F, b: Bracket, tol: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    try_maximize_1d(|x| Ok(f(x)), b, tol)
}

/// [`maximize_1d`] for fallible objectives; the first error aborts.
pub fn try_maximize_1d<F>(f: F, b: Bracket, tol: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let Bracket { lo, hi } = Bracket::new(b.lo, b.hi)?;
    let h = (hi - lo) / SCAN_POINTS as f64;
    let mut best = (0usize, f64::NEG_INFINITY);
    let mut samples = Vec::with_capacity(SCAN_POINTS + 1);
    for i in 0..=SCAN_POINTS {
        let x = if i == SCAN_POINTS { hi } else { lo + i as f64 * h };
        let v = f(x)?;
        if v > best.1 {
            best = (i, v);
        }
        samples.push((x, v));
    }
    let i = best.0;
    let mut a = samples[i.saturating_sub(1)].0;
    let mut d = samples[(i + 1).min(SCAN_POINTS)].0;

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut b1 = d - inv_phi * (d - a);
    let mut c1 = a + inv_phi * (d - a);
    let mut fb = f(b1)?;
    let mut fc = f(c1)?;
    while d - a > tol {
        if fb >= fc {
            d = c1;
            c1 = b1;
            fc = fb;
            b1 = d - inv_phi * (d - a);
            fb = f(b1)?;
        } else {
            a = b1;
            b1 = c1;
            fb = fc;
            c1 = a + inv_phi * (d - a);
            fc = f(c1)?;
        }
    }
    let (mut x, mut v) = if fb >= fc { (b1, fb) } else { (c1, fc) };
    // A maximum on the bracket edge is only reachable through the scan.
    if samples[i].1 > v {
        (x, v) = samples[i];
    }
    Ok((x, v))
}
