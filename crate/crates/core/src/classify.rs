//! Removable / singular / undetermined verdicts for sampled radial
//! profiles, and empirical bound audits.

use serde::{Serialize, Serializer};

use crate::coeffs::{compute_coefficients, Params};
use crate::dopri::Termination;
use crate::error::{Error, Result};
use crate::fit::{linear_fit, median};
use crate::ode::Trajectory;
use crate::transform::{Domain, RadialProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Removable,
    Singular,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyOptions {
    /// Fraction of the sampled decades, counted from the innermost radius,
    /// used for the fit.
    pub window_fraction: f64,
    /// Relative distance to `C_{p,n}` accepted as singular.
    pub tol_limit: f64,
    /// Limit below `tol_zero * C_{p,n}` counts as zero.
    pub tol_zero: f64,
    pub tol_rate: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions { window_fraction: 1.0 / 3.0, tol_limit: 0.05, tol_zero: 0.01, tol_rate: 0.05 }
    }
}

pub const MIN_SAMPLES: usize = 20;
pub const MIN_DECADES: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub verdict: Verdict,
    /// Median of `r^{4/(p-1)} u` over the window.
    pub fitted_limit: f64,
    /// Slope of `ln u` against `ln r` over the window; `None` when fewer
    /// than two window samples are positive.
    pub fitted_rate: Option<f64>,
    #[serde(rename = "C_pn")]
    pub c_pn: f64,
    #[serde(serialize_with = "pair_as_array")]
    pub window: (f64, f64),
    pub residual_rms: Option<f64>,
    /// `sup r^{4/(p-1)} u` over all samples.
    pub bound_sup: f64,
}

fn pair_as_array<S: Serializer>(pair: &(f64, f64), s: S) -> std::result::Result<S::Ok, S::Error> {
    [pair.0, pair.1].serialize(s)
}

/// Decides between a removable singularity, the singular limit
/// `C_{p,n} = K0^{1/(p-1)}`, and neither.
pub fn classify_profile(
    params: &Params,
    profile: &RadialProfile,
    options: &ClassifyOptions,
) -> Result<ClassificationReport> {
    params.require_strict("classify_profile")?;
    if profile.domain() != Domain::Interior {
        return Err(Error::DomainMismatch("classification needs samples approaching r = 0".into()));
    }
    if !(options.window_fraction > 0.0 && options.window_fraction <= 1.0) {
        return Err(Error::InvalidProfile(format!(
            "window fraction {} must lie in (0, 1]",
            options.window_fraction
        )));
    }
    let samples = profile.samples();
    if samples.len() < MIN_SAMPLES {
        return Err(Error::TooFewPoints { needed: MIN_SAMPLES, got: samples.len() });
    }
    let r_min = samples[0].0;
    let r_max = samples[samples.len() - 1].0;
    let decades = (r_max / r_min).log10();
    if decades < MIN_DECADES {
        return Err(Error::TooFewDecades { needed: MIN_DECADES, got: decades });
    }
    let c_pn = compute_coefficients(params).c_pn().expect("K0 > 0 inside the window");
    let a = params.ef_exponent();

    let r_hi = r_min * 10f64.powf(options.window_fraction * decades) * (1.0 + 1e-12);
    let window: Vec<(f64, f64)> = samples.iter().copied().filter(|&(r, _)| r <= r_hi).collect();
    if window.len() < 3 {
        return Err(Error::TooFewPoints { needed: 3, got: window.len() });
    }
    let weighted: Vec<f64> = window.iter().map(|&(r, u)| r.powf(a) * u).collect();
    let fitted_limit = median(&weighted).unwrap_or(0.0);
    let fit = linear_fit(window.iter().filter(|&&(_, u)| u > 0.0).map(|&(r, u)| (r.ln(), u.ln())));
    let fitted_rate = fit.map(|f| f.slope);
    let bound_sup = samples.iter().map(|&(r, u)| r.powf(a) * u).fold(0.0, f64::max);

    let singular = (fitted_limit - c_pn).abs() <= options.tol_limit * c_pn
        && fitted_rate.is_some_and(|rate| (rate + a).abs() <= options.tol_rate);
    let removable =
        fitted_limit <= options.tol_zero * c_pn && fitted_rate.is_none_or(|rate| rate >= -options.tol_rate);
    let verdict = if singular {
        Verdict::Singular
    } else if removable {
        Verdict::Removable
    } else {
        Verdict::Undetermined
    };

    Ok(ClassificationReport {
        verdict,
        fitted_limit,
        fitted_rate,
        c_pn,
        window: (window[0].0, window[window.len() - 1].0),
        residual_rms: fit.map(|f| f.residual_rms),
        bound_sup,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// `0 < r <= 1/2`
    Interior,
    /// `r >= 2`
    Exterior,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundReport {
    pub side: Side,
    /// `sup r^{4/(p-1)} u` over the samples.
    pub empirical_constant: f64,
    pub argmax_r: f64,
    /// The supremum sits on the first or last sample.
    pub attained_at_edge: bool,
    /// `r^{4/(p-1)} u` at the sample closest to the origin (interior) or
    /// to infinity (exterior).
    pub extreme_value: f64,
}

/// Reports the empirical constant in `u <= C r^{-4/(p-1)}`; never declares
/// a violation since no value of `C` is prescribed.
pub fn audit_bounds(params: &Params, profile: &RadialProfile, side: Side) -> Result<BoundReport> {
    let samples = profile.samples();
    let ok = match side {
        Side::Interior => samples.iter().all(|&(r, _)| r <= 0.5),
        Side::Exterior => samples.iter().all(|&(r, _)| r >= 2.0),
    };
    if !ok {
        return Err(Error::DomainMismatch(format!(
            "{side:?} audit needs radii in {}",
            if side == Side::Interior { "(0, 1/2]" } else { "[2, ∞)" }
        )));
    }
    let a = params.ef_exponent();
    let weighted: Vec<f64> = samples.iter().map(|&(r, u)| r.powf(a) * u).collect();
    let (arg, &sup) = weighted
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.total_cmp(y.1).then(y.0.cmp(&x.0)))
        .expect("profiles are non-empty");
    let extreme_value = match side {
        Side::Interior => weighted[0],
        Side::Exterior => weighted[weighted.len() - 1],
    };
    Ok(BoundReport {
        side,
        empirical_constant: sup,
        argmax_r: samples[arg].0,
        attained_at_edge: arg == 0 || arg == samples.len() - 1,
        extreme_value,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivativeBoundReport {
    /// `sup |w|, sup |w'|, sup |w''|, sup |w'''|`
    pub sup: [f64; 4],
    /// Monotone growth by at least a factor of ten over the last tenth of
    /// the t-span, or a diverged integration.
    pub suspected_unbounded: bool,
}

/// Suprema of the Emden-Fowler state along a trajectory.
pub fn audit_derivative_bounds(traj: &Trajectory) -> Result<DerivativeBoundReport> {
    let states = &traj.states;
    if states.len() < 5 {
        return Err(Error::TooFewPoints { needed: 5, got: states.len() });
    }
    let mut sup = [0.0f64; 4];
    for s in states {
        for (m, v) in sup.iter_mut().zip(s.y) {
            *m = m.max(v.abs());
        }
    }
    let t_first = states[0].t;
    let t_last = states[states.len() - 1].t;
    let cut = t_last - 0.1 * (t_last - t_first);
    let dir = (t_last - t_first).signum();
    let tail: Vec<f64> = states
        .iter()
        .filter(|s| (s.t - cut) * dir >= 0.0)
        .map(|s| s.y.iter().fold(0.0f64, |m, v| m.max(v.abs())))
        .collect();
    let growing = tail.len() >= 2
        && tail.windows(2).all(|w| w[1] >= w[0])
        && tail[tail.len() - 1] >= 10.0 * tail[0]
        && tail[tail.len() - 1] > 0.0;
    Ok(DerivativeBoundReport {
        sup,
        suspected_unbounded: growing || traj.termination == Termination::Diverged,
    })
}
