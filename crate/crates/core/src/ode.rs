//! The radial Emden-Fowler ODE
//! `w'''' + K3 w''' + K2 w'' + K1 w' + K0 w = w^p`
//! as a first-order system in `(w, w', w'', w''')`.

use num_complex::Complex64;
use num_traits::Zero;
use serde::Serialize;

use crate::coeffs::{characteristic_polynomial, compute_coefficients, FloatCoefficients, Params};
use crate::dopri::{integrate_autonomous, IntegrateOptions, Solution, State, Termination, Vec4};
use crate::error::{Error, Result};
use crate::fit::{linear_fit, LinearFit};
use crate::rational::{int, to_f64, Rational};

/// Vector field of the radial equation with float coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialSystem {
    coeffs: FloatCoefficients,
    /// Positive equilibrium `K0^{1/(p-1)}` when `K0 > 0`.
    equilibrium: Option<f64>,
}

impl RadialSystem {
    pub fn new(params: &Params) -> Self {
        let coeffs = compute_coefficients(params).floats();
        RadialSystem { coeffs, equilibrium: coeffs.c_pn }
    }

    pub fn coefficients(&self) -> &FloatCoefficients {
        &self.coeffs
    }

    /// `w* = K0^{1/(p-1)}`, if `K0 > 0`.
    pub fn equilibrium(&self) -> Option<f64> {
        self.equilibrium
    }

    /// `w^p - K0 w`, extended oddly to `w < 0` for use inside Runge-Kutta
    /// stages.
    ///
    /// When `K0 > 0` it is evaluated as `K0 w ((|w|/w*)^{p-1} - 1)`, which is
    /// exactly zero at the float `w*`.
    fn forcing(&self, w: f64) -> f64 {
        let c = &self.coeffs;
        match self.equilibrium {
            Some(w_star) => c.k0 * w * ((w.abs() / w_star).powf(c.p - 1.0) - 1.0),
            None => w * w.abs().powf(c.p - 1.0) - c.k0 * w,
        }
    }

    pub(crate) fn field(&self, y: &Vec4) -> Vec4 {
        let c = &self.coeffs;
        [y[1], y[2], y[3], self.forcing(y[0]) - c.k3 * y[3] - c.k2 * y[2] - c.k1 * y[1]]
    }

    /// Derivative of the state; rejects `w < 0`.
    pub fn rhs(&self, state: &State) -> Result<Vec4> {
        if state.y[0] < 0.0 {
            return Err(Error::NegativeState { w: state.y[0] });
        }
        if state.y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState { t: state.t });
        }
        Ok(self.field(&state.y))
    }
}

/// `(w', w'', w''', w^p - K3 w''' - K2 w'' - K1 w' - K0 w)`.
pub fn rhs(params: &Params, state: &State) -> Result<Vec4> {
    RadialSystem::new(params).rhs(state)
}

/// Accepted states of one integration of the radial equation.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub params: Params,
    pub states: Vec<State>,
    pub termination: Termination,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl Trajectory {
    /// Wraps externally supplied states (e.g. read back from CSV). `t` must
    /// be strictly monotone and every component finite.
    pub fn from_states(params: Params, states: Vec<State>, termination: Termination) -> Result<Self> {
        if let Some(i) = states.iter().position(|s| s.y.iter().chain([&s.t]).any(|v| !v.is_finite())) {
            return Err(Error::InvalidTrajectory(format!("non-finite value in state {i}")));
        }
        if states.len() >= 2 {
            let dir = (states[1].t - states[0].t).signum();
            if dir == 0.0 || states.windows(2).any(|w| (w[1].t - w[0].t) * dir <= 0.0) {
                return Err(Error::InvalidTrajectory("t is not strictly monotone".into()));
            }
        }
        let steps = states.len().saturating_sub(1);
        Ok(Trajectory { params, states, termination, accepted_steps: steps, rejected_steps: 0 })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Least-squares slope of `ln w` against `t` over states with
    /// `t ∈ [t_lo, t_hi]` and `w > 0`.
    pub fn log_slope(&self, t_lo: f64, t_hi: f64) -> Option<LinearFit> {
        linear_fit(
            self.states
                .iter()
                .filter(|s| s.t >= t_lo && s.t <= t_hi && s.y[0] > 0.0)
                .map(|s| (s.t, s.y[0].ln())),
        )
    }
}

/// Integrates the radial equation from `initial` to `t_end` (either
/// direction).
pub fn integrate(params: &Params, initial: State, t_end: f64, options: &IntegrateOptions) -> Result<Trajectory> {
    params.require_closed_window("integrate")?;
    if initial.y[0] < 0.0 {
        return Err(Error::NegativeState { w: initial.y[0] });
    }
    let system = RadialSystem::new(params);
    let Solution { states, termination, accepted_steps, rejected_steps } =
        integrate_autonomous(|y: &Vec4| system.field(y), initial, t_end, options)?;
    Ok(Trajectory { params: params.clone(), states, termination, accepted_steps, rejected_steps })
}

/// Constant solutions of the radial equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Equilibrium {
    Zero,
    /// `K0^{1/(p-1)}`
    Constant,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumSpectrum {
    pub equilibrium: Equilibrium,
    /// Value of `w` at the equilibrium.
    pub value: f64,
    /// Exponents `m` of the linearization `e^{mt}`, sorted by decreasing real
    /// part.
    pub roots: [Complex64; 4],
    /// Exact roots, available for [`Equilibrium::Zero`].
    pub exact_roots: Option<[Rational; 4]>,
}

impl EquilibriumSpectrum {
    /// Largest growth rate of a perturbation as `t` increases
    /// (`direction > 0`) or decreases (`direction < 0`).
    pub fn dominant_rate(&self, direction: f64) -> f64 {
        self.roots.iter().map(|z| direction.signum() * z.re).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Linearization exponents at an equilibrium.
///
/// At zero they are the roots of `P(m)`, checked exactly against
/// `{a, a+2, a+2-n, a+4-n}` with `a = 4/(p-1)`. At the positive constant
/// they are the roots of `P(m) - p K0`.
pub fn equilibrium_spectrum(params: &Params, which: Equilibrium) -> Result<EquilibriumSpectrum> {
    params.require_closed_window("equilibrium_spectrum")?;
    let coeffs = compute_coefficients(params);
    let poly = characteristic_polynomial(&coeffs);
    match which {
        Equilibrium::Zero => {
            let numeric = poly.roots();
            let a = params.ef_exponent_exact();
            let n = int(params.n() as i64);
            let exact = [&a + int(2), a.clone(), &a + int(2) - &n, &a + int(4) - &n];
            for root in &exact {
                let residual = poly.eval(root);
                if !residual.is_zero() {
                    return Err(Error::SpectrumMismatch(format!("P({root}) = {residual}, not 0")));
                }
            }
            // The companion-matrix roots must land on the same four values.
            let mut unmatched: Vec<Complex64> = numeric.to_vec();
            for root in &exact {
                let target = Complex64::new(to_f64(root), 0.0);
                let best = unmatched
                    .iter()
                    .enumerate()
                    .min_by(|x, y| (x.1 - target).norm().total_cmp(&(y.1 - target).norm()))
                    .map(|(i, z)| (i, (z - target).norm()));
                match best {
                    Some((i, d)) if d <= 1e-6 * (1.0 + target.norm()) => {
                        unmatched.swap_remove(i);
                    }
                    _ => {
                        return Err(Error::SpectrumMismatch(format!(
                            "no numerical root near {root}; companion roots {numeric:?}"
                        )))
                    }
                }
            }
            let roots = exact.clone().map(|q| Complex64::new(to_f64(&q), 0.0));
            Ok(EquilibriumSpectrum { equilibrium: which, value: 0.0, roots, exact_roots: Some(exact) })
        }
        Equilibrium::Constant => {
            let shifted = poly.shifted_down(&(params.p() * &coeffs.k0));
            let roots = shifted.roots();
            for z in roots {
                let residual = shifted.eval_complex(z).norm();
                if residual > 1e-8 * (1.0 + z.norm().powi(4)) {
                    return Err(Error::SpectrumMismatch(format!("residual {residual:e} at root {z}")));
                }
            }
            let value = coeffs.c_pn().unwrap_or(0.0);
            Ok(EquilibriumSpectrum { equilibrium: which, value, roots, exact_roots: None })
        }
    }
}

/// Largest admissible `u0 e^{4 t_start/(p-1)}` for [`shoot_regular`].
pub const SLOW_MANIFOLD_LIMIT: f64 = 1e-4;

/// Regular solution with `u(0) = u0`: starts on `w = u0 e^{4t/(p-1)}` (all
/// four components from that exponential) at `t_start` and integrates to
/// `t_end`.
pub fn shoot_regular(params: &Params, u0: f64, t_start: f64, t_end: f64) -> Result<Trajectory> {
    shoot_regular_with(params, u0, t_start, t_end, &IntegrateOptions::default())
}

pub fn shoot_regular_with(
    params: &Params,
    u0: f64,
    t_start: f64,
    t_end: f64,
    options: &IntegrateOptions,
) -> Result<Trajectory> {
    if !(u0 >= 0.0) || !u0.is_finite() {
        return Err(Error::InvalidIntegration(format!("centre value u0 = {u0} must be finite and >= 0")));
    }
    let a = params.ef_exponent();
    let w0 = u0 * (a * t_start).exp();
    if !(w0 < SLOW_MANIFOLD_LIMIT) {
        return Err(Error::InvalidIntegration(format!(
            "u0 e^(4 t_start/(p-1)) = {w0:e} must be below {SLOW_MANIFOLD_LIMIT:e}; start further left"
        )));
    }
    let initial = State::new(t_start, [w0, a * w0, a * a * w0, a * a * a * w0]);
    integrate(params, initial, t_end, options)
}

/// Perturbation `δ` such that the state `w* + δ` has `w >= 0`.
pub fn perturbed_equilibrium(params: &Params, delta: Vec4, t0: f64) -> State {
    let w_star = RadialSystem::new(params).equilibrium().unwrap_or(0.0);
    State::new(t0, [w_star + delta[0], delta[1], delta[2], delta[3]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn five_seven() -> Params {
        Params::strict(5, int(7)).unwrap()
    }

    #[test]
    fn rhs_examples() {
        let params = five_seven();
        let system = RadialSystem::new(&params);
        let w_star = system.equilibrium().unwrap();
        assert_eq!(system.rhs(&State::new(0.0, [w_star, 0.0, 0.0, 0.0])).unwrap(), [0.0; 4]);
        assert_eq!(system.rhs(&State::new(0.0, [0.0; 4])).unwrap(), [0.0; 4]);
        let d = rhs(&params, &State::new(0.0, [1.0, 0.0, 0.0, 0.0])).unwrap();
        assert!((d[3] + 31.0 / 81.0).abs() < 1e-15, "{}", d[3]);
        assert!(matches!(system.rhs(&State::new(0.0, [-1e-3, 0.0, 0.0, 0.0])), Err(Error::NegativeState { .. })));
    }

    #[test]
    fn forcing_agrees_with_direct_power() {
        let params = Params::strict(7, ratio(5, 2)).unwrap();
        let system = RadialSystem::new(&params);
        let c = system.coefficients();
        for w in [0.0_f64, 0.1, 0.9, 1.3, 4.0] {
            let direct = w.powf(c.p) - c.k0 * w;
            assert!((system.forcing(w) - direct).abs() < 1e-13 * (1.0 + direct.abs()), "w = {w}");
        }
    }

    #[test]
    fn equilibrium_is_a_fixed_point() {
        let params = five_seven();
        let w_star = RadialSystem::new(&params).equilibrium().unwrap();
        let opts = IntegrateOptions::default();
        let traj = integrate(&params, State::new(0.0, [w_star, 0.0, 0.0, 0.0]), -50.0, &opts).unwrap();
        assert_eq!(traj.termination, Termination::ReachedEnd);
        assert!(traj.states.iter().all(|s| (s.y[0] - w_star).abs() <= 10.0 * opts.rtol));
    }

    #[test]
    fn zero_stays_zero() {
        let traj = integrate(&five_seven(), State::new(0.0, [0.0; 4]), 20.0, &Default::default()).unwrap();
        assert_eq!(traj.termination, Termination::ReachedEnd);
        assert!(traj.states.iter().all(|s| s.y == [0.0; 4]));
    }

    #[test]
    fn integrate_requires_closed_window() {
        let params = Params::relaxed(5, int(10)).unwrap();
        let r = integrate(&params, State::new(0.0, [1.0, 0.0, 0.0, 0.0]), 1.0, &Default::default());
        assert!(matches!(r, Err(Error::OutsideClosedWindow { .. })));
    }

    #[test]
    fn zero_spectrum_five_seven() {
        let s = equilibrium_spectrum(&five_seven(), Equilibrium::Zero).unwrap();
        let exact = s.exact_roots.unwrap();
        let mut got: Vec<Rational> = exact.to_vec();
        got.sort();
        assert_eq!(got, vec![ratio(-7, 3), ratio(-1, 3), ratio(2, 3), ratio(8, 3)]);
        let product: Rational = exact.iter().fold(int(1), |acc, r| acc * r);
        assert_eq!(product, ratio(112, 81));
    }

    #[test]
    fn constant_spectrum_has_roots_of_both_signs() {
        for (n, p) in [(5, int(7)), (6, int(4)), (9, ratio(11, 5))] {
            let params = Params::strict(n, p).unwrap();
            let s = equilibrium_spectrum(&params, Equilibrium::Constant).unwrap();
            let real: Vec<f64> = s.roots.iter().filter(|z| z.im == 0.0).map(|z| z.re).collect();
            assert!(real.iter().any(|&x| x > 0.0) && real.iter().any(|&x| x < 0.0), "{:?}", s.roots);
        }
    }

    #[test]
    fn shoot_examples() {
        let params = five_seven();
        let traj = shoot_regular(&params, 1.0, -20.0, -10.0).unwrap();
        let fit = traj.log_slope(-20.0, -15.0).unwrap();
        assert!((fit.slope - 2.0 / 3.0).abs() <= 0.02 * 2.0 / 3.0, "{}", fit.slope);
        let zero = shoot_regular(&params, 0.0, -20.0, -10.0).unwrap();
        assert!(zero.states.iter().all(|s| s.y == [0.0; 4]));
        assert!(shoot_regular(&params, 1.0, -1.0, 0.0).is_err());
    }

    #[test]
    fn from_states_validation() {
        let params = five_seven();
        let ok = vec![State::new(0.0, [1.0; 4]), State::new(-1.0, [1.0; 4])];
        assert!(Trajectory::from_states(params.clone(), ok, Termination::ReachedEnd).is_ok());
        let bad = vec![State::new(0.0, [1.0; 4]), State::new(0.0, [1.0; 4])];
        assert!(Trajectory::from_states(params, bad, Termination::ReachedEnd).is_err());
    }
}
