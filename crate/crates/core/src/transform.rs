//! Emden-Fowler coordinates `t = ln r`, `w = r^{4/(p-1)} u`, the scaling
//! family `u^λ(r) = λ^{4/(p-1)} u(λr)`, and a direct-space radial
//! bilaplacian used as an independent check on the transformed symbol.

use crate::coeffs::Params;
use crate::error::{Error, Result};

/// Which side of the unit sphere a profile lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    /// All radii in `(0, 1]`.
    Interior,
    /// All radii in `[1, ∞)`.
    Exterior,
}

impl Domain {
    fn contains(self, r: f64) -> bool {
        match self {
            Domain::Interior => r > 0.0 && r <= 1.0,
            Domain::Exterior => r >= 1.0,
        }
    }
}

/// Samples `(r, u(r))` of a nonnegative radial solution.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    samples: Vec<(f64, f64)>,
    params: Params,
    domain: Domain,
}

impl RadialProfile {
    pub fn new(params: Params, samples: Vec<(f64, f64)>) -> Result<Self> {
        let Some(&(first, _)) = samples.first() else {
            return Err(Error::InvalidProfile("no samples".into()));
        };
        for (i, &(r, u)) in samples.iter().enumerate() {
            if !(r > 0.0) || !r.is_finite() {
                return Err(Error::NonPositiveRadius(r));
            }
            if !u.is_finite() || u < 0.0 {
                return Err(Error::InvalidProfile(format!("u = {u} at r = {r} is not finite and nonnegative")));
            }
            if i > 0 && r <= samples[i - 1].0 {
                return Err(Error::InvalidProfile(format!("radii not strictly increasing at index {i}")));
            }
        }
        let last = samples[samples.len() - 1].0;
        let domain = if last <= 1.0 {
            Domain::Interior
        } else if first >= 1.0 {
            Domain::Exterior
        } else {
            return Err(Error::InvalidProfile(format!(
                "radii [{first}, {last}] straddle r = 1; profiles must be interior or exterior"
            )));
        };
        Ok(RadialProfile { samples, params, domain })
    }

    /// Samples `f` at the given radii.
    pub fn from_fn(params: Params, radii: &[f64], f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(params, radii.iter().map(|&r| (r, f(r))).collect())
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Samples `(t, w(t))` in Emden-Fowler coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct EFProfile {
    samples: Vec<(f64, f64)>,
    params: Params,
}

impl EFProfile {
    pub fn new(params: Params, samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidProfile("no samples".into()));
        }
        for (i, &(t, w)) in samples.iter().enumerate() {
            if !t.is_finite() || !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidProfile(format!("bad sample (t = {t}, w = {w}) at index {i}")));
            }
            if i > 0 && t <= samples[i - 1].0 {
                return Err(Error::InvalidProfile(format!("t not strictly increasing at index {i}")));
            }
        }
        Ok(EFProfile { samples, params })
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    /// `(w, w', w'', w''')` at `t`, from the degree-6 interpolant through
    /// the seven samples nearest to `t`.
    pub fn derivatives_at(&self, t: f64) -> Result<[f64; 4]> {
        const WIDTH: usize = 7;
        let s = &self.samples;
        let (lo, hi) = (s[0].0, s[s.len() - 1].0);
        if t < lo || t > hi {
            return Err(Error::ProbeOutOfRange { t, lo, hi });
        }
        if s.len() < WIDTH {
            return Err(Error::TooFewPoints { needed: WIDTH, got: s.len() });
        }
        let centre = s.partition_point(|&(ti, _)| ti < t);
        let start = centre.saturating_sub(WIDTH / 2).min(s.len() - WIDTH);
        let window = &s[start..start + WIDTH];
        Ok(interpolant_derivatives(window, t))
    }
}

/// Value and first three derivatives at `x` of the polynomial through
/// `points`, via Taylor coefficients of the Newton form.
fn interpolant_derivatives(points: &[(f64, f64)], x: f64) -> [f64; 4] {
    let k = points.len();
    let xs: Vec<f64> = points.iter().map(|p| p.0 - x).collect();
    let mut dd: Vec<f64> = points.iter().map(|p| p.1).collect();
    for level in 1..k {
        for i in (level..k).rev() {
            dd[i] = (dd[i] - dd[i - 1]) / (xs[i] - xs[i - level]);
        }
    }
    // Horner on the Newton form with truncated Taylor series around 0.
    let mut taylor = [0.0f64; 4];
    for i in (0..k).rev() {
        // taylor <- taylor * (y - xs[i]) + dd[i]
        let mut next = [0.0f64; 4];
        for d in 0..4 {
            next[d] = -xs[i] * taylor[d] + if d > 0 { taylor[d - 1] } else { 0.0 };
        }
        next[0] += dd[i];
        taylor = next;
    }
    [taylor[0], taylor[1], 2.0 * taylor[2], 6.0 * taylor[3]]
}

/// `t_i = ln r_i`, `w_i = r_i^{4/(p-1)} u_i`.
pub fn to_ef(profile: &RadialProfile) -> EFProfile {
    let a = profile.params.ef_exponent();
    let samples = profile.samples.iter().map(|&(r, u)| (r.ln(), r.powf(a) * u)).collect();
    EFProfile { samples, params: profile.params.clone() }
}

/// Inverse of [`to_ef`].
pub fn from_ef(profile: &EFProfile) -> Result<RadialProfile> {
    let a = profile.params.ef_exponent();
    let samples = profile.samples.iter().map(|&(t, w)| (t.exp(), (-a * t).exp() * w)).collect();
    RadialProfile::new(profile.params.clone(), samples)
}

/// `u^λ(r) = λ^{4/(p-1)} u(λr)` on the radii `r_i/λ`.
///
/// In Emden-Fowler coordinates this is the translation `t ↦ t - ln λ` with
/// `w` unchanged.
pub fn scale(profile: &RadialProfile, lambda: f64) -> Result<RadialProfile> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidScale(lambda));
    }
    let factor = lambda.powf(profile.params.ef_exponent());
    let samples: Vec<(f64, f64)> = profile.samples.iter().map(|&(r, u)| (r / lambda, factor * u)).collect();
    if let Some(&(r, _)) = samples.iter().find(|&&(r, _)| !profile.domain.contains(r)) {
        return Err(Error::DomainMismatch(format!(
            "scaled radius {r} leaves the {:?} domain",
            profile.domain
        )));
    }
    RadialProfile::new(profile.params.clone(), samples)
}

/// A radial function `φ(r)` with optional analytic derivatives.
pub trait RadialFunction {
    fn value(&self, r: f64) -> f64;

    /// `[φ, φ', φ'', φ''', φ'''']` at `r`, when known in closed form.
    fn derivatives(&self, _r: f64) -> Option<[f64; 5]> {
        None
    }
}

impl<F: Fn(f64) -> f64> RadialFunction for F {
    fn value(&self, r: f64) -> f64 {
        self(r)
    }
}

/// `Σ c_i r^{e_i}` with exact derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSum {
    terms: Vec<(f64, f64)>,
}

impl PowerSum {
    /// Terms as `(coefficient, exponent)`.
    pub fn new(terms: Vec<(f64, f64)>) -> Self {
        PowerSum { terms }
    }

    pub fn power(exponent: f64) -> Self {
        PowerSum { terms: vec![(1.0, exponent)] }
    }

    /// `C_{p,n} r^{-4/(p-1)}`, the exact singular solution.
    pub fn singular_solution(params: &Params) -> Option<Self> {
        let c = crate::coeffs::compute_coefficients(params).c_pn()?;
        Some(PowerSum { terms: vec![(c, -params.ef_exponent())] })
    }

    pub fn terms(&self) -> &[(f64, f64)] {
        &self.terms
    }
}

impl RadialFunction for PowerSum {
    fn value(&self, r: f64) -> f64 {
        self.terms.iter().map(|&(c, e)| c * r.powf(e)).sum()
    }

    fn derivatives(&self, r: f64) -> Option<[f64; 5]> {
        let mut out = [0.0; 5];
        for &(c, e) in &self.terms {
            let mut falling = 1.0;
            for (k, slot) in out.iter_mut().enumerate() {
                *slot += c * falling * r.powf(e - k as f64);
                falling *= e - k as f64;
            }
        }
        Some(out)
    }
}

/// `u^λ(r) = λ^a u(λr)` of an underlying radial function, with its
/// derivatives `λ^{a+k} u^{(k)}(λr)`.
#[derive(Clone, Copy)]
pub struct Scaled<'a> {
    inner: &'a dyn RadialFunction,
    lambda: f64,
    weight: f64,
}

impl<'a> Scaled<'a> {
    pub fn new(params: &Params, inner: &'a dyn RadialFunction, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidScale(lambda));
        }
        Ok(Scaled { inner, lambda, weight: params.ef_exponent() })
    }
}

impl RadialFunction for Scaled<'_> {
    fn value(&self, r: f64) -> f64 {
        self.lambda.powf(self.weight) * self.inner.value(self.lambda * r)
    }

    fn derivatives(&self, r: f64) -> Option<[f64; 5]> {
        let d = self.inner.derivatives(self.lambda * r)?;
        let mut out = [0.0; 5];
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = self.lambda.powf(self.weight + k as f64) * d[k];
        }
        Some(out)
    }
}

/// Emden-Fowler state `(w, w', w'', w''')` at `t = ln r` of a radial
/// function with analytic derivatives.
///
/// With `D = r d/dr`, `d^k w/dt^k = r^a (D + a)^k u`, and
/// `D u = r u'`, `D²u = r u' + r² u''`, `D³u = r u' + 3r² u'' + r³ u'''`.
pub fn ef_state<F: RadialFunction + ?Sized>(params: &Params, f: &F, t: f64) -> Result<[f64; 4]> {
    let d = f.derivatives(t.exp()).ok_or(Error::MissingDerivatives)?;
    let a = params.ef_exponent();
    let r = t.exp();
    let du = [
        d[0],
        r * d[1],
        r * d[1] + r * r * d[2],
        r * d[1] + 3.0 * r * r * d[2] + r * r * r * d[3],
    ];
    let ra = r.powf(a);
    let mut out = [0.0; 4];
    for (k, slot) in out.iter_mut().enumerate() {
        // (D + a)^k = Σ_j C(k, j) a^{k-j} D^j
        let mut acc = 0.0;
        let mut binom = 1.0;
        for (j, d) in du.iter().enumerate().take(k + 1) {
            acc += binom * a.powi((k - j) as i32) * d;
            binom = binom * (k - j) as f64 / (j + 1) as f64;
        }
        *slot = ra * acc;
    }
    Ok(out)
}

/// How [`radial_bilaplacian`] obtains `φ'..φ''''`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DerivativeMode {
    Analytic,
    /// Five-point central differences with uniform step `h`.
    FiniteDifference { h: f64 },
}

/// `Δ²φ(r) = φ'''' + 2(n-1)/r φ''' + (n-1)(n-3)/r² φ'' - (n-1)(n-3)/r³ φ'`
/// for a radial function in `R^n`.
pub fn radial_bilaplacian<F: RadialFunction + ?Sized>(
    n: u32,
    phi: &F,
    r: f64,
    mode: DerivativeMode,
) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::NonPositiveRadius(r));
    }
    let [_, d1, d2, d3, d4] = match mode {
        DerivativeMode::Analytic => phi.derivatives(r).ok_or(Error::MissingDerivatives)?,
        DerivativeMode::FiniteDifference { h } => {
            if !(h > 0.0) || r <= 2.0 * h {
                return Err(Error::StencilTooWide { r, h });
            }
            let f = |k: f64| phi.value(r + k * h);
            let (m2, m1, c, p1, p2) = (f(-2.0), f(-1.0), f(0.0), f(1.0), f(2.0));
            [
                c,
                (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h),
                (-m2 + 16.0 * m1 - 30.0 * c + 16.0 * p1 - p2) / (12.0 * h * h),
                (-m2 + 2.0 * m1 - 2.0 * p1 + p2) / (2.0 * h * h * h),
                (m2 - 4.0 * m1 + 6.0 * c - 4.0 * p1 + p2) / (h * h * h * h),
            ]
        }
    };
    let nf = n as f64;
    let b = (nf - 1.0) * (nf - 3.0);
    Ok(d4 + 2.0 * (nf - 1.0) / r * d3 + b / (r * r) * d2 - b / (r * r * r) * d1)
}
