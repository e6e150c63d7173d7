//! Parameters of the problem `Δ²u = u^p` and the exact coefficients of its
//! Emden-Fowler form
//!
//! ```text
//! w'''' + K3 w''' + K2 w'' + K1 w' + Δθ²w + 2 ∂t²Δθ w + K3 ∂tΔθ w + J1 Δθ w + K0 w = w^p
//! ```
//!
//! Everything here is computed in exact rational arithmetic; floats are
//! derived views.

use num_traits::{One, Signed};
#[cfg(test)]
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quartic::QuarticPolynomial;
use crate::rational::{from_f64, int, powi, ratio, to_f64, Rational, Sign};

/// Validated `(n, p)` pair.
///
/// `p` is always held exactly. Floats passed through [`Params::from_f64`]
/// become their exact dyadic value.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    n: u32,
    p: Rational,
    strict: bool,
}

impl Params {
    /// Builds parameters, enforcing `n >= 5` and the open window
    /// `n/(n-4) < p < (n+4)/(n-4)` when `strict` is set. `p > 1` is always
    /// required.
    pub fn new(n: u32, p: Rational, strict: bool) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDimension { n });
        }
        if p <= Rational::one() {
            return Err(Error::ExponentTooSmall { p: p.to_string() });
        }
        let params = Params { n, p, strict };
        if strict && !params.in_open_window() {
            return Err(Error::OutsideWindow { n, p: params.p.to_string() });
        }
        Ok(params)
    }

    pub fn strict(n: u32, p: Rational) -> Result<Self> {
        Self::new(n, p, true)
    }

    /// Only `p > 1` is checked; used for endpoint and out-of-window evaluation.
    pub fn relaxed(n: u32, p: Rational) -> Result<Self> {
        Self::new(n, p, false)
    }

    pub fn from_f64(n: u32, p: f64, strict: bool) -> Result<Self> {
        let exact = from_f64(p).ok_or_else(|| Error::Parse {
            input: p.to_string(),
            reason: "not a finite float".into(),
        })?;
        Self::new(n, exact, strict)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn p(&self) -> &Rational {
        &self.p
    }

    pub fn p_f64(&self) -> f64 {
        to_f64(&self.p)
    }

    pub fn is_strict(&self) -> bool {
        self.strict
    }

    /// `(n/(n-4), (n+4)/(n-4))`, defined for `n >= 5`.
    pub fn window(n: u32) -> Option<(Rational, Rational)> {
        if n < 5 {
            return None;
        }
        let n = n as i64;
        Some((ratio(n, n - 4), ratio(n + 4, n - 4)))
    }

    pub fn in_open_window(&self) -> bool {
        Self::window(self.n).is_some_and(|(lo, hi)| lo < self.p && self.p < hi)
    }

    pub fn in_closed_window(&self) -> bool {
        Self::window(self.n).is_some_and(|(lo, hi)| lo <= self.p && self.p <= hi)
    }

    pub(crate) fn require_strict(&self, operation: &'static str) -> Result<()> {
        if self.in_open_window() {
            Ok(())
        } else {
            Err(Error::NotStrict { operation, n: self.n, p: self.p.to_string() })
        }
    }

    /// Dynamics and energy work on the closed window: at the endpoints
    /// `K0 >= 0`, `K1 >= 0` and `K3 <= 0` still hold.
    pub(crate) fn require_closed_window(&self, operation: &'static str) -> Result<()> {
        if self.in_closed_window() {
            Ok(())
        } else {
            Err(Error::OutsideClosedWindow { operation, n: self.n, p: self.p.to_string() })
        }
    }

    /// `4/(p-1)`, the weight in `w = r^{4/(p-1)} u`.
    pub fn ef_exponent_exact(&self) -> Rational {
        int(4) / (&self.p - Rational::one())
    }

    pub fn ef_exponent(&self) -> f64 {
        to_f64(&self.ef_exponent_exact())
    }
}

/// Transform coefficients in exact form.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSet {
    pub n: u32,
    pub p: Rational,
    pub k0: Rational,
    pub k1: Rational,
    pub k2: Rational,
    pub k3: Rational,
    pub j1: Rational,
    /// `-4/(p-1)`
    pub gamma0: Rational,
}

/// Float view of a [`CoefficientSet`], cheap to copy into inner loops.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FloatCoefficients {
    pub k0: f64,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub j1: f64,
    pub gamma0: f64,
    pub p: f64,
    /// `K0^{1/(p-1)}` when `K0 > 0`.
    pub c_pn: Option<f64>,
}

impl CoefficientSet {
    pub fn c_pn(&self) -> Option<f64> {
        if self.k0.is_positive() {
            let q = to_f64(&self.p) - 1.0;
            Some(to_f64(&self.k0).powf(1.0 / q))
        } else {
            None
        }
    }

    pub fn floats(&self) -> FloatCoefficients {
        FloatCoefficients {
            k0: to_f64(&self.k0),
            k1: to_f64(&self.k1),
            k2: to_f64(&self.k2),
            k3: to_f64(&self.k3),
            j1: to_f64(&self.j1),
            gamma0: to_f64(&self.gamma0),
            p: to_f64(&self.p),
            c_pn: self.c_pn(),
        }
    }
}

/// Evaluates K0..K3 and J1 from their closed forms in `q = p - 1`.
pub fn compute_coefficients(params: &Params) -> CoefficientSet {
    let n = int(params.n as i64);
    let q = params.p() - Rational::one();
    let q2 = powi(&q, 2);
    let q3 = powi(&q, 3);
    let q4 = powi(&q, 4);
    let nm2 = &n - int(2);
    let nm4 = &n - int(4);
    let quad = &n * &n - int(10) * &n + int(20);

    let k0 = int(8) / &q4
        * (&nm2 * &nm4 * &q3 + int(2) * &quad * &q2 - int(16) * &nm4 * &q + int(32));
    let k1 = -int(2) / &q3
        * (&nm2 * &nm4 * &q3 + int(4) * &quad * &q2 - int(48) * &nm4 * &q + int(128));
    let k2 = (&quad * &q2 - int(24) * &nm4 * &q + int(96)) / &q2;
    let k3 = int(2) / &q * (&nm4 * &q - int(8));
    let j1 = -int(2) / &q2 * (&nm4 * &q2 + int(4) * &nm4 * &q - int(16));
    let gamma0 = -int(4) / &q;

    CoefficientSet { n: params.n, p: params.p.clone(), k0, k1, k2, k3, j1, gamma0 }
}

/// Exact signs of the coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SignReport {
    pub k0: Sign,
    pub k1: Sign,
    pub k2: Sign,
    pub k3: Sign,
    pub j1: Sign,
}

/// Signs of K0, K1, K2, K3, J1 inside the open window.
///
/// Inside the window `K0 > 0`, `K1 > 0`, `K3 < 0` and `J1 < 0`; any other
/// outcome is returned as [`Error::SignLemmaViolated`]. The sign of `K2`
/// varies with `(n, p)` and is only reported.
pub fn sign_report(params: &Params) -> Result<SignReport> {
    params.require_strict("sign_report")?;
    let c = compute_coefficients(params);
    let report = SignReport {
        k0: Sign::of(&c.k0),
        k1: Sign::of(&c.k1),
        k2: Sign::of(&c.k2),
        k3: Sign::of(&c.k3),
        j1: Sign::of(&c.j1),
    };
    let expected = [
        ("K0", report.k0, Sign::Positive, &c.k0),
        ("K1", report.k1, Sign::Positive, &c.k1),
        ("K3", report.k3, Sign::Negative, &c.k3),
        ("J1", report.j1, Sign::Negative, &c.j1),
    ];
    let bad: Vec<String> = expected
        .iter()
        .filter(|(_, got, want, _)| got != want)
        .map(|(name, got, want, value)| format!("{name} = {value} has sign {got}, expected {want}"))
        .collect();
    if bad.is_empty() {
        Ok(report)
    } else {
        Err(Error::SignLemmaViolated {
            n: params.n,
            p: params.p.to_string(),
            detail: bad.join("; "),
        })
    }
}

/// `P(m) = m⁴ + K3 m³ + K2 m² + K1 m + K0`, the symbol of the radial part.
pub fn characteristic_polynomial(coeffs: &CoefficientSet) -> QuarticPolynomial {
    QuarticPolynomial::monic([
        coeffs.k0.clone(),
        coeffs.k1.clone(),
        coeffs.k2.clone(),
        coeffs.k3.clone(),
    ])
}

/// Spherical harmonic degrees covered by [`verify_symbol_identity`].
pub const SYMBOL_DEGREES: [u32; 4] = [0, 1, 2, 3];

/// One failed comparison in [`verify_symbol_identity`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymbolMismatch {
    pub m: String,
    pub k: u32,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymbolReport {
    pub n: u32,
    pub p: String,
    pub trials: usize,
    /// Number of random `m` values for which every degree matched.
    pub exact_trials: usize,
    pub first_mismatch: Option<SymbolMismatch>,
}

impl SymbolReport {
    pub fn is_exact(&self) -> bool {
        self.first_mismatch.is_none() && self.exact_trials == self.trials
    }
}

/// Full symbol of the transformed operator on `e^{mt} Y_k` where
/// `Δθ Y_k = μ Y_k`:
/// `S(m, μ) = P(m) + μ² + 2m²μ + K3 m μ + J1 μ`.
pub fn operator_symbol(coeffs: &CoefficientSet, m: &Rational, mu: &Rational) -> Rational {
    let p_of_m = characteristic_polynomial(coeffs).eval(m);
    p_of_m + mu * mu + int(2) * m * m * mu + &coeffs.k3 * m * mu + &coeffs.j1 * mu
}

/// `Δ(r^s Y_k) = (s(s+n-2) - λ_k) r^{s-2} Y_k`.
fn laplacian_factor(s: &Rational, n: u32, lambda: &Rational) -> Rational {
    s * (s + int(n as i64 - 2)) - lambda
}

/// `λ_k = k(k+n-2)`, the (positive) eigenvalue of `-Δθ` on degree-k harmonics.
pub fn harmonic_eigenvalue(k: u32, n: u32) -> Rational {
    int(k as i64 * (k as i64 + n as i64 - 2))
}

/// Checks the symbol `S(m, -λ_k)` against the bilaplacian of
/// `r^σ Y_k` (σ = m + γ0) computed by applying the Laplacian twice, for
/// `trials` seeded random rationals `m` and `k` in [`SYMBOL_DEGREES`].
pub fn verify_symbol_identity(params: &Params, trials: usize, seed: u64) -> SymbolReport {
    let coeffs = compute_coefficients(params);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut exact_trials = 0;
    let mut first_mismatch = None;
    for _ in 0..trials {
        let num: i64 = rng.random_range(-60..=60);
        let den: i64 = rng.random_range(1..=24);
        let m = ratio(num, den);
        let mut all_ok = true;
        for &k in &SYMBOL_DEGREES {
            let (lhs, rhs) = symbol_sides(&coeffs, &m, k);
            if lhs != rhs {
                all_ok = false;
                if first_mismatch.is_none() {
                    first_mismatch = Some(SymbolMismatch {
                        m: m.to_string(),
                        k,
                        lhs: lhs.to_string(),
                        rhs: rhs.to_string(),
                    });
                }
            }
        }
        if all_ok {
            exact_trials += 1;
        }
    }
    SymbolReport { n: params.n, p: params.p.to_string(), trials, exact_trials, first_mismatch }
}

/// Both sides of the symbol identity at one `(m, k)`.
pub fn symbol_sides(coeffs: &CoefficientSet, m: &Rational, k: u32) -> (Rational, Rational) {
    let lambda = harmonic_eigenvalue(k, coeffs.n);
    let lhs = operator_symbol(coeffs, m, &-lambda.clone());
    let sigma = m + &coeffs.gamma0;
    let rhs = laplacian_factor(&sigma, coeffs.n, &lambda)
        * laplacian_factor(&(&sigma - int(2)), coeffs.n, &lambda);
    (lhs, rhs)
}
