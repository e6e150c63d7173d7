//! Radial energy
//!
//! ```text
//! E(t) = ω [ w'''w' - ½(w'')² + K3 w''w' + ½K2 (w')² + ½K0 w² - w^{p+1}/(p+1) ]
//! ```
//!
//! with `ω = |S^{n-1}|`. Along solutions of the radial equation
//! `dE/dt = ω [K3 (w'')² - K1 (w')²]`, which is `<= 0` on the window.

use serde::Serialize;

use crate::coeffs::{compute_coefficients, FloatCoefficients, Params};
use crate::dopri::{State, Vec4};
use crate::error::{Error, Result};
use crate::fit::median;
use crate::ode::Trajectory;
use crate::transform::{ef_state, scale, to_ef, RadialFunction, RadialProfile, Scaled};

/// Allowed growth of `E` per unit `t`, relative to `1 + |E|`.
pub const MONOTONE_SLACK: f64 = 1e-6;
/// Allowed median gap between the two `dE/dt` estimates, relative to
/// `1 + median |dE/dt|`.
pub const IDENTITY_TOLERANCE: f64 = 1e-4;
pub const SCALING_TOLERANCE_ANALYTIC: f64 = 1e-6;
pub const SCALING_TOLERANCE_SAMPLED: f64 = 1e-3;

/// `Γ(n/2)` from factorials.
fn gamma_half(n: u32) -> f64 {
    let factorial = |k: u32| (1..=k).map(f64::from).product::<f64>();
    if n.is_multiple_of(2) {
        factorial(n / 2 - 1)
    } else {
        let k = (n - 1) / 2;
        factorial(2 * k) * std::f64::consts::PI.sqrt() / (4f64.powi(k as i32) * factorial(k))
    }
}

/// `|S^{n-1}| = 2π^{n/2} / Γ(n/2)`.
pub fn sphere_area(n: u32) -> f64 {
    2.0 * std::f64::consts::PI.powf(n as f64 / 2.0) / gamma_half(n)
}

/// Energy and its derivative identity for fixed `(n, p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyFunctional {
    coeffs: FloatCoefficients,
    omega: f64,
}

impl EnergyFunctional {
    pub fn new(params: &Params) -> Self {
        EnergyFunctional { coeffs: compute_coefficients(params).floats(), omega: sphere_area(params.n()) }
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    fn terms(&self, y: &Vec4) -> [f64; 6] {
        let c = &self.coeffs;
        let [w, w1, w2, w3] = *y;
        [
            w3 * w1,
            -0.5 * w2 * w2,
            c.k3 * w2 * w1,
            0.5 * c.k2 * w1 * w1,
            0.5 * c.k0 * w * w,
            -w.max(0.0).powf(c.p + 1.0) / (c.p + 1.0),
        ]
    }

    pub fn energy(&self, y: &Vec4) -> f64 {
        self.omega * self.terms(y).iter().sum::<f64>()
    }

    /// Size of the rounding error in [`Self::energy`].
    fn rounding_scale(&self, y: &Vec4) -> f64 {
        self.omega * self.terms(y).iter().map(|v| v.abs()).sum::<f64>() * f64::EPSILON
    }

    /// `ω [K3 (w'')² - K1 (w')²]`
    pub fn derivative(&self, y: &Vec4) -> f64 {
        self.omega * (self.coeffs.k3 * y[2] * y[2] - self.coeffs.k1 * y[1] * y[1])
    }
}

pub fn energy_at(params: &Params, state: &State) -> Result<f64> {
    if state.y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteState { t: state.t });
    }
    Ok(EnergyFunctional::new(params).energy(&state.y))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyLevels {
    pub level_zero: f64,
    /// `(1/2 - 1/(p+1)) K0^{(p+1)/(p-1)} |S^{n-1}|`
    pub level_singular: f64,
}

/// The two values the limit of `E` as `t → -∞` can take.
pub fn energy_levels(params: &Params) -> Result<EnergyLevels> {
    params.require_closed_window("energy_levels")?;
    let c = compute_coefficients(params).floats();
    let p = c.p;
    let power = if c.k0 > 0.0 { c.k0.powf((p + 1.0) / (p - 1.0)) } else { 0.0 };
    Ok(EnergyLevels {
        level_zero: 0.0,
        level_singular: (0.5 - 1.0 / (p + 1.0)) * power * sphere_area(params.n()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyRecord {
    pub t: f64,
    #[serde(rename = "E")]
    pub energy: f64,
    #[serde(rename = "dE_formula")]
    pub de_formula: f64,
    #[serde(rename = "dE_numeric")]
    pub de_numeric: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityAudit {
    /// One record per state, ordered by increasing `t`.
    pub records: Vec<EnergyRecord>,
    pub monotone: bool,
    /// Largest growth of `E` per unit `t` relative to `1 + |E|` (0 when `E`
    /// never grows beyond rounding).
    pub max_violation: f64,
    pub median_identity_gap: f64,
    pub median_formula_magnitude: f64,
    pub identity_ok: bool,
    /// Largest value of the formula side; nonpositive inside the window.
    pub max_de_formula: f64,
}

impl MonotonicityAudit {
    pub fn pass(&self) -> bool {
        self.monotone && self.identity_ok
    }
}

/// Three-point derivative weights on a nonuniform grid at the middle,
/// first and last node.
const STENCIL: usize = 5;

/// Weights of the derivative at `x` of the Lagrange interpolant through `nodes`.
fn lagrange_derivative_weights(nodes: &[f64], x: f64) -> Vec<f64> {
    let k = nodes.len();
    (0..k)
        .map(|j| {
            let denom: f64 = (0..k).filter(|&m| m != j).map(|m| nodes[j] - nodes[m]).product();
            let numer: f64 = (0..k)
                .filter(|&i| i != j)
                .map(|i| (0..k).filter(|&m| m != j && m != i).map(|m| x - nodes[m]).product::<f64>())
                .sum();
            numer / denom
        })
        .collect()
}

/// Evaluates `E` along a trajectory and compares the derivative identity
/// with a finite-difference derivative of `E`.
pub fn audit_monotonicity(params: &Params, traj: &Trajectory) -> Result<MonotonicityAudit> {
    params.require_closed_window("audit_monotonicity")?;
    if traj.states.len() < 5 {
        return Err(Error::TooFewPoints { needed: 5, got: traj.states.len() });
    }
    if let Some(s) = traj.states.iter().find(|s| s.y[0] < 0.0) {
        return Err(Error::NegativeState { w: s.y[0] });
    }
    let functional = EnergyFunctional::new(params);
    let mut states: Vec<&State> = traj.states.iter().collect();
    if states[0].t > states[states.len() - 1].t {
        states.reverse();
    }
    let ts: Vec<f64> = states.iter().map(|s| s.t).collect();
    let es: Vec<f64> = states.iter().map(|s| functional.energy(&s.y)).collect();
    let last = states.len() - 1;

    let records: Vec<EnergyRecord> = (0..=last)
        .map(|i| {
            let start = i.saturating_sub(STENCIL / 2).min(states.len() - STENCIL);
            let nodes = &ts[start..start + STENCIL];
            let weights = lagrange_derivative_weights(nodes, ts[i]);
            let de_numeric = weights.iter().zip(&es[start..start + STENCIL]).map(|(c, e)| c * e).sum();
            EnergyRecord { t: ts[i], energy: es[i], de_formula: functional.derivative(&states[i].y), de_numeric }
        })
        .collect();

    let mut max_violation = 0.0f64;
    for i in 0..last {
        let dt = ts[i + 1] - ts[i];
        let floor = 16.0 * functional.rounding_scale(&states[i].y).max(functional.rounding_scale(&states[i + 1].y));
        let growth = es[i + 1] - es[i] - floor;
        if growth > 0.0 {
            let scale = 1.0 + es[i].abs().max(es[i + 1].abs());
            max_violation = max_violation.max(growth / (scale * dt));
        }
    }

    let interior = &records[1..last];
    let gaps: Vec<f64> = interior.iter().map(|r| (r.de_formula - r.de_numeric).abs()).collect();
    let magnitudes: Vec<f64> = interior.iter().map(|r| r.de_formula.abs()).collect();
    let median_identity_gap = median(&gaps).unwrap_or(0.0);
    let median_formula_magnitude = median(&magnitudes).unwrap_or(0.0);
    let max_de_formula = records.iter().map(|r| r.de_formula).fold(f64::NEG_INFINITY, f64::max);

    Ok(MonotonicityAudit {
        records,
        monotone: max_violation <= MONOTONE_SLACK,
        max_violation,
        median_identity_gap,
        median_formula_magnitude,
        identity_ok: median_identity_gap <= IDENTITY_TOLERANCE * (1.0 + median_formula_magnitude),
        max_de_formula,
    })
}

/// Where [`scaling_invariance_check`] gets `u` and its derivatives.
pub enum ProbeSource<'a> {
    /// Closed-form derivatives.
    Analytic(&'a dyn RadialFunction),
    /// Dense samples; derivatives by local interpolation in `t`.
    Sampled(&'a RadialProfile),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingCheck {
    /// `Ẽ(r; u^λ)`
    pub scaled: f64,
    /// `Ẽ(λr; u)`
    pub shifted: f64,
    pub relative_gap: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Compares the energy of `u^λ` at radius `r_probe` with the energy of `u`
/// at `λ r_probe`.
pub fn scaling_invariance_check(
    params: &Params,
    source: ProbeSource<'_>,
    lambda: f64,
    r_probe: f64,
) -> Result<ScalingCheck> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidScale(lambda));
    }
    if !(r_probe > 0.0) {
        return Err(Error::NonPositiveRadius(r_probe));
    }
    let functional = EnergyFunctional::new(params);
    let (scaled_state, shifted_state, tolerance) = match source {
        ProbeSource::Analytic(u) => {
            let u_lambda = Scaled::new(params, u, lambda)?;
            (
                ef_state(params, &u_lambda, r_probe.ln())?,
                ef_state(params, u, (lambda * r_probe).ln())?,
                SCALING_TOLERANCE_ANALYTIC,
            )
        }
        ProbeSource::Sampled(profile) => {
            let scaled_ef = to_ef(&scale(profile, lambda)?);
            let ef = to_ef(profile);
            (
                scaled_ef.derivatives_at(r_probe.ln())?,
                ef.derivatives_at((lambda * r_probe).ln())?,
                SCALING_TOLERANCE_SAMPLED,
            )
        }
    };
    let scaled = functional.energy(&scaled_state);
    let shifted = functional.energy(&shifted_state);
    let denom = scaled.abs().max(shifted.abs());
    let relative_gap = if denom == 0.0 { 0.0 } else { (scaled - shifted).abs() / denom };
    Ok(ScalingCheck { scaled, shifted, relative_gap, tolerance, pass: relative_gap <= tolerance })
}
