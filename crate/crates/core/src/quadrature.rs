//! Adaptive Gauss–Legendre quadrature on intervals, discs (polar tensor
//! product) and radially symmetric planar integrands.
//!
//! Each panel is integrated with an `order`-point Gauss–Legendre rule and
//! bisected until the two halves agree with the parent to the panel's share
//! of the absolute tolerance.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `exp(-REACH_EXPONENT)` is the relative size of a Gaussian envelope at the
/// edge of the integration domain.
const REACH_EXPONENT: f64 = 60.0;

/// Panels are bisected at least this many times regardless of agreement.
const MIN_DEPTH: u32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Gauss–Legendre points per panel.
    pub order: usize,
    /// Absolute tolerance of the full integral.
    pub tolerance: f64,
    /// Maximum bisection depth per dimension.
    pub max_depth: u32,
    /// Domain cutoff radius; derived from the integrand envelopes when `None`.
    pub radius: Option<f64>,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            order: 12,
            tolerance: 1e-11,
            max_depth: 40,
            radius: None,
        }
    }
}

impl QuadratureSpec {
    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }

    fn try_integrate<F: Fn(f64) -> Result<f64>>(&self, f: &F, a: f64, b: f64) -> Result<f64> {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x)?;
        }
        Ok(acc * half)
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Adaptive integral of a fallible integrand over [a, b].
pub fn try_integrate_1d<F>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    adaptive(&f, &GaussLegendre::new(spec.order), a, b, spec)
}

fn adaptive<F>(f: &F, rule: &GaussLegendre, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if a == b {
        return Ok(0.0);
    }
    let whole = rule.try_integrate(f, a, b)?;
    bisect(f, rule, a, b, whole, b - a, spec, 0)
}

pub fn integrate_1d<F>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    try_integrate_1d(|x| Ok(f(x)), a, b, spec)
}

#[allow(clippy::too_many_arguments)]
fn bisect<F>(
    f: &F,
    rule: &GaussLegendre,
    a: f64,
    b: f64,
    whole: f64,
    total_width: f64,
    spec: &QuadratureSpec,
    depth: u32,
) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let mid = 0.5 * (a + b);
    let left = rule.try_integrate(f, a, mid)?;
    let right = rule.try_integrate(f, mid, b)?;
    let refined = left + right;
    let error = (refined - whole).abs();
    let local_tol = (spec.tolerance * (b - a).abs() / total_width.abs())
        .max(64.0 * f64::EPSILON * (left.abs() + right.abs()));
    if depth >= MIN_DEPTH && error <= local_tol {
        return Ok(refined);
    }
    if depth >= spec.max_depth {
        return Err(Error::QuadratureFailure {
            lo: a,
            hi: b,
            error,
        });
    }
    Ok(bisect(f, rule, a, mid, left, total_width, spec, depth + 1)?
        + bisect(f, rule, mid, b, right, total_width, spec, depth + 1)?)
}

/// Integral over the disc of `radius` around `center`, in polar coordinates.
pub fn try_integrate_disc<F>(
    f: F,
    center: Complex64,
    radius: f64,
    spec: &QuadratureSpec,
) -> Result<f64>
where
    F: Fn(Complex64) -> Result<f64>,
{
    // Angular errors are weighted by r dr over the disc.
    let inner = QuadratureSpec {
        tolerance: spec.tolerance / (0.5 * radius * radius).max(1.0),
        ..*spec
    };
    let rule = GaussLegendre::new(spec.order);
    adaptive(
        &|r| {
            if r == 0.0 {
                return Ok(0.0);
            }
            let ring = adaptive(
                &|theta| f(center + Complex64::from_polar(r, theta)),
                &rule,
                0.0,
                2.0 * PI,
                &inner,
            )?;
            Ok(r * ring)
        },
        &rule,
        0.0,
        radius,
        spec,
    )
}

pub fn integrate_disc<F>(f: F, center: Complex64, radius: f64, spec: &QuadratureSpec) -> Result<f64>
where
    F: Fn(Complex64) -> f64,
{
    try_integrate_disc(|z| Ok(f(z)), center, radius, spec)
}

/// Planar integral of a radially symmetric integrand, `2π ∫ r f(r) dr`.
pub fn try_integrate_radial<F>(f: F, radius: f64, spec: &QuadratureSpec) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    Ok(2.0 * PI * try_integrate_1d(|r| Ok(r * f(r)?), 0.0, radius, spec)?)
}

pub fn integrate_radial<F>(f: F, radius: f64, spec: &QuadratureSpec) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    try_integrate_radial(|r| Ok(f(r)), radius, spec)
}

/// Gaussian bound `|z - center|^(2 order) exp(-|z - center|^2 / width)` on
/// one factor of an integrand; used to size the integration domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Envelope {
    pub center: Complex64,
    pub width: f64,
    pub order: u32,
}

impl Envelope {
    pub fn gaussian(center: Complex64, width: f64) -> Self {
        Self {
            center,
            width,
            order: 0,
        }
    }

    pub fn fock(center: Complex64, width: f64, n: u32) -> Self {
        Self {
            center,
            width,
            order: n,
        }
    }

    /// Envelope of the square root of this factor.
    pub fn sqrt(self) -> Self {
        Self {
            width: 2.0 * self.width,
            ..self
        }
    }

    /// Distance from the center beyond which the factor is negligible.
    pub fn reach(&self) -> f64 {
        self.width.sqrt() * ((self.order as f64).sqrt() + REACH_EXPONENT.sqrt())
    }
}

/// For an integrand that is a product of bounded factors, the disc around
/// the narrowest factor contains everything that is not negligible.
pub fn domain_for(envelopes: &[Envelope], spec: &QuadratureSpec) -> (Complex64, f64) {
    let narrowest = envelopes
        .iter()
        .filter(|e| e.width.is_finite() && e.width > 0.0)
        .min_by(|a, b| a.reach().total_cmp(&b.reach()))
        .copied()
        .expect("at least one finite envelope");
    (
        narrowest.center,
        spec.radius.unwrap_or_else(|| narrowest.reach()),
    )
}
