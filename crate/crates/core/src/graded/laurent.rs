//! Sparse Laurent polynomials in `u` with `deg u = 2`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::C64;

/// Coefficients with modulus below this are dropped.
const ZERO_CUTOFF: f64 = 0.0;

/// Element of the complexified ring `C[u, u^-1]`.
///
/// Keys are u-degrees, always even. `u^k` lives at key `2k`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LaurentScalar {
    terms: BTreeMap<i32, C64>,
}

impl LaurentScalar {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(0, C64::new(1.0, 0.0))
    }

    /// `c * u^(degree/2)`. Panics on odd degree.
    pub fn monomial(degree: i32, c: C64) -> Self {
        assert!(degree % 2 == 0, "u-degree must be even, got {degree}");
        let mut s = Self::zero();
        s.add_term(degree, c);
        s
    }

    pub fn real_monomial(degree: i32, c: f64) -> Self {
        Self::monomial(degree, C64::new(c, 0.0))
    }

    pub fn add_term(&mut self, degree: i32, c: C64) {
        assert!(degree % 2 == 0, "u-degree must be even, got {degree}");
        let e = self.terms.entry(degree).or_insert(C64::new(0.0, 0.0));
        *e += c;
        if e.norm() <= ZERO_CUTOFF {
            self.terms.remove(&degree);
        }
    }

    pub fn coeff(&self, degree: i32) -> C64 {
        self.terms.get(&degree).copied().unwrap_or_default()
    }

    /// Real part of a coefficient; panics if the imaginary part exceeds `1e-9`.
    pub fn real_coeff(&self, degree: i32) -> f64 {
        let c = self.coeff(degree);
        assert!(c.im.abs() < 1e-9, "coefficient at u-degree {degree} is not real: {c}");
        c.re
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, C64)> + '_ {
        self.terms.iter().map(|(k, v)| (*k, *v))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self, c: C64) -> Self {
        let mut out = Self::zero();
        for (k, v) in self.terms() {
            out.add_term(k, v * c);
        }
        out
    }

    /// Applies `u -> 2 pi i u`.
    pub fn r_u(&self) -> Self {
        let mut out = Self::zero();
        for (k, v) in self.terms() {
            out.add_term(k, v * two_pi_i_pow(k / 2));
        }
        out
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn distance(&self, other: &Self) -> f64 {
        (self - other).max_abs()
    }
}

/// `(2 pi i)^k` for any integer `k`.
pub fn two_pi_i_pow(k: i32) -> C64 {
    C64::new(0.0, 2.0 * std::f64::consts::PI).powi(k)
}

impl Add for &LaurentScalar {
    type Output = LaurentScalar;
    fn add(self, rhs: &LaurentScalar) -> LaurentScalar {
        let mut out = self.clone();
        for (k, v) in rhs.terms() {
            out.add_term(k, v);
        }
        out
    }
}

impl Sub for &LaurentScalar {
    type Output = LaurentScalar;
    fn sub(self, rhs: &LaurentScalar) -> LaurentScalar {
        let mut out = self.clone();
        for (k, v) in rhs.terms() {
            out.add_term(k, -v);
        }
        out
    }
}

impl Neg for &LaurentScalar {
    type Output = LaurentScalar;
    fn neg(self) -> LaurentScalar {
        self.scale(C64::new(-1.0, 0.0))
    }
}

impl Mul for &LaurentScalar {
    type Output = LaurentScalar;
    fn mul(self, rhs: &LaurentScalar) -> LaurentScalar {
        let mut out = LaurentScalar::zero();
        for (a, x) in self.terms() {
            for (b, y) in rhs.terms() {
                out.add_term(a + b, x * y);
            }
        }
        out
    }
}

impl fmt::Display for LaurentScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms()
            .map(|(k, v)| {
                if v.im == 0.0 {
                    format!("{}*u^{}", v.re, k / 2)
                } else {
                    format!("({})*u^{}", v, k / 2)
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_scalar() -> impl Strategy<Value = LaurentScalar> {
        proptest::collection::vec((-3i32..=3, -5i32..=5, -5i32..=5), 0..5).prop_map(|v| {
            let mut s = LaurentScalar::zero();
            for (k, re, im) in v {
                s.add_term(2 * k, C64::new(re as f64, im as f64));
            }
            s
        })
    }

    #[test]
    fn zero_coefficients_are_dropped() {
        let mut s = LaurentScalar::real_monomial(2, 1.5);
        s.add_term(2, C64::new(-1.5, 0.0));
        assert!(s.is_zero());
    }

    #[test]
    #[should_panic]
    fn odd_degree_rejected() {
        let _ = LaurentScalar::real_monomial(1, 1.0);
    }

    #[test]
    fn r_u_scales_by_powers_of_two_pi_i() {
        let s = LaurentScalar::real_monomial(-2, 1.0);
        let r = s.r_u();
        let expect = 1.0 / (2.0 * std::f64::consts::PI);
        assert!((r.coeff(-2) - C64::new(0.0, -expect)).norm() < 1e-15);
        let s2 = LaurentScalar::real_monomial(4, 1.0).r_u();
        assert!((s2.coeff(4).re + 4.0 * std::f64::consts::PI.powi(2)).abs() < 1e-12);
        assert_eq!(LaurentScalar::one().r_u(), LaurentScalar::one());
    }

    proptest! {
        #[test]
        fn ring_axioms(a in arb_scalar(), b in arb_scalar(), c in arb_scalar()) {
            let ab = &a * &b;
            let ba = &b * &a;
            prop_assert!(ab.distance(&ba) < 1e-9);
            let lhs = &(&a * &b) * &c;
            let rhs = &a * &(&b * &c);
            prop_assert!(lhs.distance(&rhs) < 1e-9);
            let dist = &a * &(&b + &c);
            let expand = &(&a * &b) + &(&a * &c);
            prop_assert!(dist.distance(&expand) < 1e-9);
            prop_assert!((&a * &LaurentScalar::one()).distance(&a) < 1e-12);
            for (k, _) in ab.terms() {
                prop_assert!(k % 2 == 0);
            }
        }

        #[test]
        fn r_u_is_multiplicative(a in arb_scalar(), b in arb_scalar()) {
            let lhs = (&a * &b).r_u();
            let rhs = &a.r_u() * &b.r_u();
            let scale = 1.0 + lhs.max_abs();
            prop_assert!(lhs.distance(&rhs) / scale < 1e-10);
        }
    }
}
