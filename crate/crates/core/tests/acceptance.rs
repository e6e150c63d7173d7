//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::PI;
use std::time::Instant;

use bilane::classify::{classify_profile, ClassifyOptions, Verdict};
use bilane::coeffs::{compute_coefficients, sign_report, symbol_sides, verify_symbol_identity, Params};
use bilane::dopri::{IntegrateOptions, State};
use bilane::energy::{audit_monotonicity, energy_at, energy_levels, scaling_invariance_check, ProbeSource};
use bilane::ode::{equilibrium_spectrum, integrate, perturbed_equilibrium, rhs, shoot_regular, Equilibrium};
use bilane::rational::{int, ratio, to_f64, Rational};
use bilane::transform::{radial_bilaplacian, DerivativeMode, PowerSum, RadialProfile};
use num_complex::Complex64;

// Pinned tolerances.
const RTOL: f64 = 1e-10;
const FIXED_POINT_TOL: f64 = 10.0 * RTOL;
const MONOTONE_SLACK: f64 = 1e-6;
const IDENTITY_TOL: f64 = 1e-4;
const LEVEL_REL_TOL: f64 = 1e-12;
const SCALING_REL_TOL: f64 = 1e-6;
const ROOT_RESIDUAL_TOL: f64 = 1e-8;
const CLASSIFY_TOL: f64 = 1e-10;
const SHOT_RATE_REL_TOL: f64 = 0.02;
const BILAPLACIAN_REL_TOL: f64 = 1e-12;
const FD_MIN_ORDER: f64 = 1.9;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what())
    }
}

/// `p` values strictly inside `(n/(n-4), (n+4)/(n-4))`.
fn interior_grid(n: u32, count: i64) -> Vec<Rational> {
    let (lo, hi) = (ratio(n as i64, n as i64 - 4), ratio(n as i64 + 4, n as i64 - 4));
    (1..=count).map(|k| &lo + (&hi - &lo) * ratio(k, count + 1)).collect()
}

/// Ascending coefficients of `(m + c0)(m + c1)(m + c2)(m + c3)`.
fn expand_linear_factors(shifts: &[Rational; 4]) -> Vec<Rational> {
    let mut poly = vec![int(1)];
    for c in shifts {
        let mut next = vec![int(0); poly.len() + 1];
        for (i, a) in poly.iter().enumerate() {
            next[i] += a * c;
            next[i + 1] += a;
        }
        poly = next;
    }
    poly
}

/// `Q(m + γ0)` with `Q(γ) = γ(γ-2)(γ+n-2)(γ+n-4)`, expanded densely.
fn shifted_power_polynomial(n: u32, p: &Rational) -> Vec<Rational> {
    let g0 = -int(4) / (p - int(1));
    let n = int(n as i64);
    expand_linear_factors(&[g0.clone(), &g0 - int(2), &g0 + &n - int(2), &g0 + &n - int(4)])
}

fn c1_coefficient_identity() -> Outcome {
    let mut checked = 0;
    for n in 5..=12 {
        for p in interior_grid(n, 200) {
            let params = Params::strict(n, p.clone()).map_err(|e| e.to_string())?;
            let coeffs = compute_coefficients(&params);
            let got = bilane::characteristic_polynomial(&coeffs);
            let want = shifted_power_polynomial(n, &p);
            check(got.coefficients().as_slice() == want.as_slice(), || format!("n={n} p={p}"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} (n,p) pairs, exact"))
}

fn c2_sign_lemma() -> Outcome {
    let mut checked = 0;
    for n in 5..=12 {
        for p in interior_grid(n, 200) {
            let params = Params::strict(n, p.clone()).map_err(|e| e.to_string())?;
            sign_report(&params).map_err(|e| e.to_string())?;
            let c = compute_coefficients(&params);
            let zero = int(0);
            check(c.k0 > zero && c.k1 > zero && c.k3 < zero && c.j1 < zero, || format!("n={n} p={p}"))?;
            checked += 1;
        }
        let critical = ratio(n as i64 + 4, n as i64 - 4);
        let c = compute_coefficients(&Params::relaxed(n, critical.clone()).map_err(|e| e.to_string())?);
        check(c.k1 == int(0) && c.k3 == int(0), || format!("critical n={n}: K1={} K3={}", c.k1, c.k3))?;
    }
    Ok(format!("{checked} pairs signed, K1=K3=0 at 8 critical exponents"))
}

fn c3_symbol_identity() -> Outcome {
    let mut checked = 0;
    for n in 5..=12 {
        for p in interior_grid(n, 5) {
            let params = Params::strict(n, p.clone()).map_err(|e| e.to_string())?;
            let report = verify_symbol_identity(&params, 32, 7 + n as u64);
            check(report.is_exact() && report.exact_trials == 32, || format!("n={n} p={p}: {report:?}"))?;
            // Independent right side: compose the Laplacian on r^σ Y_k twice.
            let coeffs = compute_coefficients(&params);
            let g0 = -int(4) / (&p - int(1));
            let nn = int(n as i64);
            for (i, k) in (0..4u32).enumerate() {
                let m = ratio(3 * i as i64 - 5, 7);
                let sigma = &m + &g0;
                let lambda = int((k * (k + n - 2)) as i64);
                let inner = &sigma * (&sigma + &nn - int(2)) - &lambda;
                let s2 = &sigma - int(2);
                let outer = &s2 * (&s2 + &nn - int(2)) - &lambda;
                let (lhs, _) = symbol_sides(&coeffs, &m, k);
                check(lhs == &inner * &outer, || format!("n={n} p={p} k={k} m={m}"))?;
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} (n,p) pairs x 32 trials x k=0..3, exact"))
}

fn c4_fixed_point() -> Outcome {
    let params = Params::strict(5, int(7)).unwrap();
    let w_star = (112.0f64 / 81.0).powf(1.0 / 6.0);
    let residual = rhs(&params, &State::new(0.0, [w_star, 0.0, 0.0, 0.0])).map_err(|e| e.to_string())?;
    check(residual.iter().all(|v| v.abs() <= f64::EPSILON), || format!("residual {residual:?}"))?;
    let opts = IntegrateOptions { rtol: RTOL, ..Default::default() };
    let mut worst = 0.0f64;
    for (start, t_end) in [([w_star, 0.0, 0.0, 0.0], -50.0), ([w_star, 0.0, 0.0, 0.0], 50.0), ([0.0; 4], -50.0)] {
        let traj = integrate(&params, State::new(0.0, start), t_end, &opts).map_err(|e| e.to_string())?;
        check(traj.states.last().unwrap().t == t_end, || format!("stopped {:?}", traj.termination))?;
        for s in &traj.states {
            worst = worst.max((s.y[0] - start[0]).abs()).max(s.y[1].abs()).max(s.y[2].abs()).max(s.y[3].abs());
        }
    }
    check(worst <= FIXED_POINT_TOL, || format!("max drift {worst:e}"))?;
    Ok(format!("max drift {worst:e} <= {FIXED_POINT_TOL:e}, residual 0"))
}

fn c5_energy_monotonicity() -> Outcome {
    let deltas: [[f64; 4]; 12] = [
        [1e-6, 0.0, 0.0, 0.0],
        [1e-4, 0.0, 0.0, 0.0],
        [1e-2, 0.0, 0.0, 0.0],
        [0.0, 1e-5, 0.0, 0.0],
        [0.0, -1e-5, 0.0, 0.0],
        [0.0, 0.0, 1e-4, 0.0],
        [0.0, 0.0, -1e-4, 0.0],
        [0.0, 0.0, 0.0, 1e-3],
        [0.0, 0.0, 0.0, -1e-3],
        [1e-3, 1e-3, -1e-3, 1e-3],
        [1e-5, -2e-5, 3e-5, -4e-5],
        [5e-3, 0.0, 1e-3, 0.0],
    ];
    let mut total = 0;
    let mut worst_violation = 0.0f64;
    let mut worst_ratio = 0.0f64;
    for (n, p) in [(5, int(7)), (6, int(3)), (8, int(2))] {
        let params = Params::relaxed(n, p.clone()).unwrap();
        for (j, d) in deltas.iter().enumerate() {
            let mut d = *d;
            let w_star = bilane::ode::RadialSystem::new(&params).equilibrium().unwrap_or(0.0);
            if w_star == 0.0 {
                d[0] = d[0].abs().max(1e-4);
            }
            let t_end = if j % 2 == 0 { -50.0 } else { 50.0 };
            let traj = integrate(&params, perturbed_equilibrium(&params, d, 0.0), t_end, &IntegrateOptions::default())
                .map_err(|e| e.to_string())?;
            check(!traj.termination.is_failure() || traj.termination == bilane::Termination::Diverged, || {
                format!("n={n} p={p} delta={d:?}: {:?}", traj.termination)
            })?;
            let audit = audit_monotonicity(&params, &traj).map_err(|e| e.to_string())?;
            check(audit.max_violation <= MONOTONE_SLACK, || {
                format!("n={n} p={p} delta={d:?}: violation {:e}", audit.max_violation)
            })?;
            let ratio = audit.median_identity_gap / (1.0 + audit.median_formula_magnitude);
            check(ratio <= IDENTITY_TOL, || format!("n={n} p={p} delta={d:?}: identity gap ratio {ratio:e}"))?;
            worst_violation = worst_violation.max(audit.max_violation);
            worst_ratio = worst_ratio.max(ratio);
            total += 1;
        }
    }
    Ok(format!("{total} trajectories, max violation {worst_violation:e}, max identity ratio {worst_ratio:e}"))
}

fn c6_energy_level() -> Outcome {
    for (n, p) in [(5, int(7)), (5, int(6)), (6, ratio(7, 2)), (7, ratio(5, 2)), (9, int(2)), (12, ratio(7, 4))] {
        let params = Params::strict(n, p.clone()).unwrap();
        let k0 = to_f64(&compute_coefficients(&params).k0);
        let pf = to_f64(&p);
        let w_star = k0.powf(1.0 / (pf - 1.0));
        let area = 2.0 * PI.powf(n as f64 / 2.0) / gamma_half_integer(n);
        let want = (0.5 - 1.0 / (pf + 1.0)) * k0.powf((pf + 1.0) / (pf - 1.0)) * area;
        let got = energy_at(&params, &State::new(0.0, [w_star, 0.0, 0.0, 0.0])).map_err(|e| e.to_string())?;
        check(((got - want) / want).abs() <= LEVEL_REL_TOL, || format!("n={n} p={p}: {got} vs {want}"))?;
        let level = energy_levels(&params).map_err(|e| e.to_string())?.level_singular;
        check(((level - want) / want).abs() <= LEVEL_REL_TOL, || format!("level n={n} p={p}"))?;
    }
    let anchor = 3.0 / 8.0 * (112.0f64 / 81.0).powf(4.0 / 3.0) * (8.0 * PI * PI / 3.0);
    let params = Params::strict(5, int(7)).unwrap();
    let got = energy_at(&params, &State::new(0.0, [(112.0f64 / 81.0).powf(1.0 / 6.0), 0.0, 0.0, 0.0])).unwrap();
    check(((got - anchor) / anchor).abs() <= LEVEL_REL_TOL, || format!("(5,7): {got} vs {anchor}"))?;
    check((got - 15.2035060210).abs() < 1e-9, || format!("(5,7) anchor {got}"))?;
    Ok(format!("6 pairs to {LEVEL_REL_TOL:e} rel; (5,7) level {got:.10}"))
}

/// `Γ(n/2)` by the half-integer recursion.
fn gamma_half_integer(n: u32) -> f64 {
    let (mut g, mut x) = if n.is_multiple_of(2) { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
    while x < n as f64 / 2.0 {
        g *= x;
        x += 1.0;
    }
    g
}

fn c7_scaling_invariance() -> Outcome {
    let params = Params::strict(5, int(7)).unwrap();
    let a = params.ef_exponent();
    let c = compute_coefficients(&params).c_pn().unwrap();
    let exact = PowerSum::new(vec![(c, -a)]);
    let perturbed = PowerSum::new(vec![(c, -a), (0.01 * c, 1.0 - a)]);
    let mut worst = 0.0f64;
    for f in [&exact, &perturbed] {
        for lambda in [0.5, 2.0, 5.0] {
            let r = scaling_invariance_check(&params, ProbeSource::Analytic(f), lambda, 0.1).map_err(|e| e.to_string())?;
            check(r.relative_gap <= SCALING_REL_TOL, || format!("lambda={lambda}: {r:?}"))?;
            worst = worst.max(r.relative_gap);
        }
    }
    Ok(format!("max relative gap {worst:e}"))
}

fn c8_spectrum() -> Outcome {
    let mut worst = 0.0f64;
    let mut checked = 0;
    for n in 5..=12 {
        for p in interior_grid(n, 5) {
            let params = Params::strict(n, p.clone()).unwrap();
            let zero = equilibrium_spectrum(&params, Equilibrium::Zero).map_err(|e| e.to_string())?;
            let a = int(4) / (&p - int(1));
            let nn = int(n as i64);
            let mut want = vec![a.clone(), &a + int(2), &a + int(2) - &nn, &a + int(4) - &nn];
            let mut got = zero.exact_roots.clone().ok_or("no exact roots")?.to_vec();
            want.sort();
            got.sort();
            check(got == want, || format!("n={n} p={p}: {got:?}"))?;

            let constant = equilibrium_spectrum(&params, Equilibrium::Constant).map_err(|e| e.to_string())?;
            let mut shifted = shifted_power_polynomial(n, &p);
            let k0 = compute_coefficients(&params).k0;
            shifted[0] -= &p * &k0;
            let cs: Vec<f64> = shifted.iter().map(to_f64).collect();
            for m in constant.roots {
                let value = cs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * m + c);
                let bound = ROOT_RESIDUAL_TOL * (1.0 + m.norm().powi(4));
                check(value.norm() <= bound, || format!("n={n} p={p} root {m}: residual {}", value.norm()))?;
                worst = worst.max(value.norm() / (1.0 + m.norm().powi(4)));
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} pairs; zero spectra exact, max scaled residual {worst:e}"))
}

fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..count).map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp()).collect()
}

fn c9_classifier() -> Outcome {
    let params = Params::strict(5, int(7)).unwrap();
    let a = params.ef_exponent();
    let c = compute_coefficients(&params).c_pn().unwrap();
    let radii = log_grid(1e-8, 0.5, 200);
    let opts = ClassifyOptions::default();
    let classify = |f: &dyn Fn(f64) -> f64| {
        let profile = RadialProfile::from_fn(params.clone(), &radii, f).map_err(|e| e.to_string())?;
        classify_profile(&params, &profile, &opts).map_err(|e| e.to_string())
    };

    let singular = classify(&|r| c * r.powf(-a))?;
    check(singular.verdict == Verdict::Singular, || format!("{singular:?}"))?;
    check((singular.fitted_limit - c).abs() <= CLASSIFY_TOL, || format!("limit {}", singular.fitted_limit))?;
    let rate = singular.fitted_rate.ok_or("no rate")?;
    check((rate + a).abs() <= CLASSIFY_TOL, || format!("rate {rate}"))?;

    let bounded = classify(&|r| 1.0 + r * r)?;
    check(bounded.verdict == Verdict::Removable, || format!("{bounded:?}"))?;

    let half = classify(&|r| 0.5 * c * r.powf(-a))?;
    check(half.verdict == Verdict::Undetermined, || format!("{half:?}"))?;
    Ok(format!("limit gap {:e}, rate gap {:e}", (singular.fitted_limit - c).abs(), (rate + a).abs()))
}

fn c10_regular_shot() -> Outcome {
    let mut parts = Vec::new();
    for (n, p, t_start) in [(5, int(7), -20.0), (6, int(3), -10.0)] {
        let params = Params::relaxed(n, p.clone()).unwrap();
        let a = params.ef_exponent();
        check(a * t_start < (1e-4f64).ln(), || format!("t_start too large for n={n}"))?;
        let traj = shoot_regular(&params, 1.0, t_start, t_start + 8.0).map_err(|e| e.to_string())?;
        let fit = traj.log_slope(t_start, t_start + 5.0).ok_or("no fit")?;
        let rel = (fit.slope - a).abs() / a;
        check(rel <= SHOT_RATE_REL_TOL, || format!("n={n} p={p}: slope {} vs {a}", fit.slope))?;
        parts.push(format!("({n},{p}) slope {:.6} rel {rel:.1e}", fit.slope));
    }
    Ok(parts.join("; "))
}

fn c11_bilaplacian() -> Outcome {
    let gammas = [-3.0, -2.0, -1.0, -2.0 / 3.0, 0.0, 0.5, 2.0, 3.0];
    let mut worst = 0.0f64;
    for n in 5..=9u32 {
        let nf = n as f64;
        for &g in &gammas {
            let q = g * (g - 2.0) * (g + nf - 2.0) * (g + nf - 4.0);
            for r in [0.3f64, 1.0, 2.5] {
                let want = q * r.powf(g - 4.0);
                let got = radial_bilaplacian(n, &PowerSum::power(g), r, DerivativeMode::Analytic)
                    .map_err(|e| e.to_string())?;
                // Q(γ) = 0: measure against the size of the individual terms.
                let fall = |k: i32| (0..k).map(|i| g - i as f64).product::<f64>().abs() * r.powf(g - k as f64);
                let c = (nf - 1.0) * (nf - 3.0);
                let scale = fall(4) + 2.0 * (nf - 1.0) / r * fall(3) + c / (r * r) * fall(2) + c / r.powi(3) * fall(1);
                let err = if want == 0.0 { got.abs() / scale.max(f64::MIN_POSITIVE) } else { ((got - want) / want).abs() };
                check(err <= BILAPLACIAN_REL_TOL, || format!("n={n} g={g} r={r}: {got} vs {want}"))?;
                worst = worst.max(err);
            }
        }
    }
    // Finite differences on a non-polynomial radial function.
    let phi = |r: f64| r.powf(-2.0 / 3.0) + r.sin();
    let exact_d = |r: f64| {
        let g = -2.0 / 3.0;
        let pw = |k: i32| (0..k).map(|i| g - i as f64).product::<f64>() * r.powf(g - k as f64);
        [pw(1) + r.cos(), pw(2) - r.sin(), pw(3) - r.cos(), pw(4) + r.sin()]
    };
    let (n, r) = (5u32, 1.0);
    let d = exact_d(r);
    let nf = n as f64;
    let want = d[3] + 2.0 * (nf - 1.0) / r * d[2] + (nf - 1.0) * (nf - 3.0) / (r * r) * d[1]
        - (nf - 1.0) * (nf - 3.0) / (r * r * r) * d[0];
    let errors: Vec<f64> = [0.04, 0.02, 0.01]
        .iter()
        .map(|&h| radial_bilaplacian(n, &phi, r, DerivativeMode::FiniteDifference { h }).map(|v| (v - want).abs()))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let orders: Vec<f64> = errors.windows(2).map(|e| (e[0] / e[1]).log2()).collect();
    check(orders.iter().all(|&o| o >= FD_MIN_ORDER), || format!("orders {orders:?}"))?;
    Ok(format!("analytic max rel err {worst:e}; FD orders {orders:.3?}"))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("exact coefficient identities", c1_coefficient_identity),
        ("sign lemma", c2_sign_lemma),
        ("symbol identity with angular terms", c3_symbol_identity),
        ("singular-solution fixed point", c4_fixed_point),
        ("energy monotonicity and derivative identity", c5_energy_monotonicity),
        ("energy level value", c6_energy_level),
        ("scaling invariance", c7_scaling_invariance),
        ("spectrum closed form", c8_spectrum),
        ("classifier dichotomy", c9_classifier),
        ("regular-shot rate", c10_regular_shot),
        ("bilaplacian oracle", c11_bilaplacian),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name} ({secs:.2}s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name} ({secs:.2}s): {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
