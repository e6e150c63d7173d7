use bilane::coeffs::{characteristic_polynomial, compute_coefficients, sign_report, verify_symbol_identity, Params};
use bilane::rational::{int, parse_rational, ratio, Rational};
use bilane::transform::{from_ef, scale, to_ef, RadialProfile};
use proptest::prelude::*;

/// A rational strictly inside the window for `n`.
fn window_point(n: u32, k: i64, d: i64) -> Rational {
    let (lo, hi) = Params::window(n).unwrap();
    &lo + (&hi - &lo) * ratio(k, d)
}

fn params_strategy() -> impl Strategy<Value = Params> {
    (5u32..=16, 1i64..1000).prop_map(|(n, k)| Params::strict(n, window_point(n, k, 1000)).unwrap())
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

proptest! {
    #[test]
    fn characteristic_polynomial_is_shifted_power(params in params_strategy()) {
        let c = compute_coefficients(&params);
        let poly = characteristic_polynomial(&c);
        let n = int(params.n() as i64);
        for m in [int(0), int(1), ratio(-3, 2), ratio(7, 5), int(-4)] {
            let g = &m + &c.gamma0;
            let q = &g * (&g - int(2)) * (&g + &n - int(2)) * (&g + &n - int(4));
            prop_assert_eq!(poly.eval(&m), q);
        }
    }

    #[test]
    fn signs_hold_inside_window(params in params_strategy()) {
        prop_assert!(sign_report(&params).is_ok());
    }

    #[test]
    fn symbol_identity_is_exact(params in params_strategy(), seed in any::<u64>()) {
        prop_assert!(verify_symbol_identity(&params, 8, seed).is_exact());
    }

    #[test]
    fn ef_round_trip(params in params_strategy(), lo in -30.0f64..-27.7, amp in 0.1f64..10.0, freq in 0.1f64..3.0) {
        let radii: Vec<f64> = (0..400).map(|i| (lo * (399 - i) as f64 / 399.0).exp()).collect();
        let profile = RadialProfile::from_fn(params, &radii, |r| amp * (2.0 + (freq * r.ln()).sin()) / r).unwrap();
        let back = from_ef(&to_ef(&profile)).unwrap();
        for (a, b) in profile.samples().iter().zip(back.samples()) {
            prop_assert!(rel(a.0, b.0) <= 1e-12 && rel(a.1, b.1) <= 1e-12, "{:?} vs {:?}", a, b);
        }
    }

    #[test]
    fn scale_is_translation_in_t(params in params_strategy(), lambda in 1.0f64..50.0) {
        let radii: Vec<f64> = (0..100).map(|i| (-20.0 + 0.19 * i as f64).exp()).collect();
        let profile = RadialProfile::from_fn(params, &radii, |r| 1.0 + r.sqrt()).unwrap();
        let shifted = to_ef(&scale(&profile, lambda).unwrap());
        let base = to_ef(&profile);
        for (s, b) in shifted.samples().iter().zip(base.samples()) {
            prop_assert!((s.0 - (b.0 - lambda.ln())).abs() <= 1e-12 * (1.0 + b.0.abs()));
            prop_assert!(rel(s.1, b.1) <= 1e-12);
        }
    }

    #[test]
    fn rationals_parse_exactly(num in -100_000i64..100_000, den in 1i64..100_000) {
        prop_assert_eq!(parse_rational(&format!("{num}/{den}")).unwrap(), ratio(num, den));
    }

    #[test]
    fn constant_spectrum_residuals(params in params_strategy()) {
        let s = bilane::equilibrium_spectrum(&params, bilane::Equilibrium::Constant).unwrap();
        let c = compute_coefficients(&params);
        let shifted = characteristic_polynomial(&c).shifted_down(&(params.p() * &c.k0));
        for m in s.roots {
            prop_assert!(shifted.eval_complex(m).norm() <= 1e-8 * (1.0 + m.norm().powi(4)));
        }
    }
}
