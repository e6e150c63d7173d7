//! Monic quartics with exact coefficients and their complex roots.

use nalgebra::Matrix4;
use num_complex::Complex64;
use num_traits::One;

use crate::rational::{to_f64, Rational};

/// `a4 m⁴ + a3 m³ + a2 m² + a1 m + a0`, stored lowest degree first.
#[derive(Debug, Clone, PartialEq)]
pub struct QuarticPolynomial {
    coeffs: [Rational; 5],
}

impl QuarticPolynomial {
    /// Monic quartic from `[a0, a1, a2, a3]`.
    pub fn monic(lower: [Rational; 4]) -> Self {
        let [a0, a1, a2, a3] = lower;
        QuarticPolynomial { coeffs: [a0, a1, a2, a3, Rational::one()] }
    }

    /// `[a0, a1, a2, a3, a4]`
    pub fn coefficients(&self) -> &[Rational; 5] {
        &self.coeffs
    }

    pub fn eval(&self, m: &Rational) -> Rational {
        self.coeffs.iter().rev().fold(Rational::from_integer(0.into()), |acc, c| acc * m + c)
    }

    /// The same quartic with `delta` subtracted from the constant term.
    pub fn shifted_down(&self, delta: &Rational) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs[0] -= delta;
        QuarticPolynomial { coeffs }
    }

    pub fn to_f64(&self) -> [f64; 5] {
        let c = &self.coeffs;
        [to_f64(&c[0]), to_f64(&c[1]), to_f64(&c[2]), to_f64(&c[3]), to_f64(&c[4])]
    }

    pub fn eval_complex(&self, m: Complex64) -> Complex64 {
        horner(&self.to_f64(), m)
    }

    /// Roots from the eigenvalues of the companion matrix, each refined by
    /// one Newton step.
    pub fn roots(&self) -> [Complex64; 4] {
        let a = self.to_f64();
        let lead = a[4];
        let c: Vec<f64> = a.iter().map(|x| x / lead).collect();
        #[rustfmt::skip]
        let companion = Matrix4::new(
            0.0, 0.0, 0.0, -c[0],
            1.0, 0.0, 0.0, -c[1],
            0.0, 1.0, 0.0, -c[2],
            0.0, 0.0, 1.0, -c[3],
        );
        let eig = companion.complex_eigenvalues();
        let deriv = [a[1], 2.0 * a[2], 3.0 * a[3], 4.0 * a[4], 0.0];
        let mut roots = [Complex64::new(0.0, 0.0); 4];
        for (slot, &z) in roots.iter_mut().zip(eig.iter()) {
            let f = horner(&a, z);
            let df = horner(&deriv, z);
            let polished = if df.norm() > 0.0 { z - f / df } else { z };
            // keep the raw eigenvalue if Newton made things worse
            *slot = if horner(&a, polished).norm() <= f.norm() { polished } else { z };
            if slot.im.abs() < 1e-14 * (1.0 + slot.re.abs()) {
                slot.im = 0.0;
            }
        }
        roots.sort_by(|x, y| y.re.total_cmp(&x.re).then(y.im.total_cmp(&x.im)));
        roots
    }
}

fn horner(a: &[f64; 5], z: Complex64) -> Complex64 {
    a.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn roots_of_known_factorization() {
        // (m-1)(m+2)(m-3)(m+4) = m^4 + 2m^3 - 13m^2 - 14m + 24
        let p = QuarticPolynomial::monic([int(24), int(-14), int(-13), int(2)]);
        let roots = p.roots();
        let mut re: Vec<f64> = roots.iter().map(|z| z.re).collect();
        re.sort_by(f64::total_cmp);
        for (got, want) in re.iter().zip([-4.0, -2.0, 1.0, 3.0]) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
        assert!(roots.iter().all(|z| z.im == 0.0));
    }

    #[test]
    fn complex_pair() {
        // (m^2 + 1)(m^2 - 4)
        let p = QuarticPolynomial::monic([int(-4), int(0), int(-3), int(0)]);
        let roots = p.roots();
        let complex: Vec<_> = roots.iter().filter(|z| z.im != 0.0).collect();
        assert_eq!(complex.len(), 2);
        for z in roots {
            assert!(p.eval_complex(z).norm() < 1e-12);
        }
    }

    #[test]
    fn exact_eval_and_shift() {
        let p = QuarticPolynomial::monic([ratio(1, 2), int(0), int(0), int(0)]);
        assert_eq!(p.eval(&int(2)), ratio(33, 2));
        assert_eq!(p.shifted_down(&ratio(1, 2)).eval(&int(0)), int(0));
    }
}
