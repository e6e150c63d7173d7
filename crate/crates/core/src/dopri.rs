//! Dormand-Prince 5(4) (autonomous form, stage times unused) with PI step-size control for autonomous systems
//! in four variables.
//!
//! Integration toward smaller `t` runs in `s = -t` so the stepper only
//! ever moves forward.

use serde::Serialize;

use crate::error::{Error, Result};

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// 5th-order weights minus embedded 4th-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;
const ALPHA: f64 = 0.2 - 0.75 * BETA;

/// Bisection resolution in `t` for a sign change of `w`.
pub const SIGN_CHANGE_RESOLUTION: f64 = 1e-10;

pub type Vec4 = [f64; 4];

/// One accepted point `(t, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct State {
    pub t: f64,
    pub y: Vec4,
}

impl State {
    pub fn new(t: f64, y: Vec4) -> Self {
        State { t, y }
    }

    pub fn w(&self) -> f64 {
        self.y[0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Stop with [`Termination::Diverged`] once `w` exceeds this.
    pub w_max: f64,
    pub max_steps: usize,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions { rtol: 1e-10, atol: 1e-12, w_max: 1e6, max_steps: 1_000_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    ReachedEnd,
    /// `w` exceeded `w_max` or left the finite range.
    Diverged,
    /// `w` changed sign; the last state is within the bisection resolution
    /// of the crossing.
    WentNegative,
    /// Step size fell below `1e-14 |t-span|`.
    StepUnderflow,
    /// `max_steps` accepted steps were taken before reaching the end.
    StepLimit,
}

impl Termination {
    pub fn is_failure(self) -> bool {
        matches!(self, Termination::Diverged | Termination::StepUnderflow | Termination::StepLimit)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub states: Vec<State>,
    pub termination: Termination,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

fn axpy(y: &Vec4, h: f64, terms: &[(f64, &Vec4)]) -> Vec4 {
    let mut out = *y;
    for (i, slot) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        *slot += h * acc;
    }
    out
}

/// One Dormand-Prince step; returns `(y_next, k7, error_vector)`.
fn step<F: Fn(&Vec4) -> Vec4>(f: &F, y: &Vec4, k1: &Vec4, h: f64) -> (Vec4, Vec4, Vec4) {
    let k2 = f(&axpy(y, h, &[(A21, k1)]));
    let k3 = f(&axpy(y, h, &[(A31, k1), (A32, &k2)]));
    let k4 = f(&axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
    let k5 = f(&axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
    let k6 = f(&axpy(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
    let y_next = axpy(y, h, &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
    let k7 = f(&y_next);
    let mut err = [0.0; 4];
    for i in 0..4 {
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    (y_next, k7, err)
}

fn error_norm(err: &Vec4, y: &Vec4, y_next: &Vec4, opts: &IntegrateOptions) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..4 {
        let scale = opts.atol + opts.rtol * y[i].abs().max(y_next[i].abs());
        let e = (err[i] / scale).abs();
        if !e.is_finite() {
            return f64::INFINITY;
        }
        worst = worst.max(e);
    }
    worst
}

fn max_norm(v: &Vec4, y: &Vec4, opts: &IntegrateOptions) -> f64 {
    (0..4)
        .map(|i| (v[i] / (opts.atol + opts.rtol * y[i].abs())).abs())
        .fold(0.0, f64::max)
}

fn initial_step<F: Fn(&Vec4) -> Vec4>(f: &F, y0: &Vec4, f0: &Vec4, opts: &IntegrateOptions, length: f64) -> f64 {
    let d0 = max_norm(y0, y0, opts);
    let d1 = max_norm(f0, y0, opts);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1 = axpy(y0, h0, &[(1.0, f0)]);
    let f1 = f(&y1);
    let diff = [f1[0] - f0[0], f1[1] - f0[1], f1[2] - f0[2], f1[3] - f0[3]];
    let d2 = max_norm(&diff, y0, opts) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(length)
}

/// Integrates `dy/dt = field(y)` from `initial` to `t_end` in either
/// direction, recording every accepted step.
pub fn integrate_autonomous<F: Fn(&Vec4) -> Vec4>(
    field: F,
    initial: State,
    t_end: f64,
    opts: &IntegrateOptions,
) -> Result<Solution> {
    let span = t_end - initial.t;
    if !span.is_finite() || span == 0.0 {
        return Err(Error::InvalidIntegration(format!(
            "t-span from {} to {t_end} is empty or not finite",
            initial.t
        )));
    }
    if !(opts.rtol > 0.0) || !(opts.atol >= 0.0) || !(opts.w_max > 0.0) || opts.max_steps == 0 {
        return Err(Error::InvalidIntegration(format!("bad options {opts:?}")));
    }
    if initial.y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteState { t: initial.t });
    }
    let direction = span.signum();
    let length = span.abs();
    let g = |y: &Vec4| {
        let d = field(y);
        [direction * d[0], direction * d[1], direction * d[2], direction * d[3]]
    };
    let t_of = |s: f64| if s >= length { t_end } else { initial.t + direction * s };

    let mut states = vec![initial];
    let mut y = initial.y;
    let mut k1 = g(&y);
    let mut s = 0.0f64;
    let mut h = initial_step(&g, &y, &k1, opts, length);
    let h_min = 1e-14 * length;
    let mut err_prev = 1e-4f64;
    let mut accepted = 0usize;
    let mut rejected = 0usize;

    let termination = loop {
        if s >= length {
            break Termination::ReachedEnd;
        }
        if accepted >= opts.max_steps {
            break Termination::StepLimit;
        }
        let remaining = length - s;
        let last = h >= remaining;
        if last {
            h = remaining;
        }
        if h < h_min && remaining > h_min {
            break Termination::StepUnderflow;
        }

        let (y_next, k7, err_vec) = step(&g, &y, &k1, h);
        let err = error_norm(&err_vec, &y, &y_next, opts);
        if err > 1.0 {
            rejected += 1;
            let factor = if err.is_finite() { (SAFETY * err.powf(-ALPHA)).max(FAC_MIN) } else { FAC_MIN };
            h *= factor.min(1.0);
            continue;
        }

        accepted += 1;
        let s_next = if last { length } else { s + h };

        if y_next[0] < 0.0 && y[0] >= 0.0 {
            // bisect on the step length from the last good state
            let (mut lo, mut hi) = (0.0f64, h);
            let mut y_lo = y;
            while hi - lo > SIGN_CHANGE_RESOLUTION {
                let mid = 0.5 * (lo + hi);
                let (y_mid, _, _) = step(&g, &y, &k1, mid);
                if y_mid[0] >= 0.0 {
                    lo = mid;
                    y_lo = y_mid;
                } else {
                    hi = mid;
                }
            }
            if lo > 0.0 {
                states.push(State::new(t_of(s + lo), y_lo));
            }
            break Termination::WentNegative;
        }

        states.push(State::new(t_of(s_next), y_next));
        if !(y_next[0] <= opts.w_max) || y_next.iter().any(|v| !v.is_finite()) {
            break Termination::Diverged;
        }

        s = s_next;
        y = y_next;
        k1 = k7;
        let factor = SAFETY * err.max(1e-12).powf(-ALPHA) * err_prev.powf(BETA);
        h *= factor.clamp(FAC_MIN, FAC_MAX);
        err_prev = err.max(1e-4);
    };

    Ok(Solution { states, termination, accepted_steps: accepted, rejected_steps: rejected })
}
