//! The rational elliptic surface pipeline.
//!
//! With t the fiber variable and ts the section marker, the genus-0
//! generating function
//!
//!   F_0(t) = ts * sum_{d>=0} a_d t^d
//!
//! counts rational curves in the class s + d f. Two independent
//! constructions are provided: the ODE t F_0' = 12 G F_0 driven by the
//! divisor-sum series G = sum sigma(d) t^d, and the closed product form
//!
//!   F_0(t) = ts * prod_{d>=1} (1 - t^d)^{-12}.
//!
//! The genus-1 series H is likewise computed two ways: through the
//! genus-1 topological recursion relation,
//!
//!   H = (1/12)(t F_0' - F_0) + F_0 G,
//!
//! and through the fiber-sum splitting H = 2 F_0 (G - 1/24). Equality of
//! the two pairs is exactly the content of the product formula, and the
//! crate's acceptance suite checks both to high order.

use crate::rational::{binomial, Rational};
use crate::series::{GradedMonomial, TruncatedSeries};

/// Sum of divisors sigma(d) = sum_{a|d} a.
pub fn sigma(d: u32) -> u64 {
    let mut total = 0u64;
    for a in 1..=d as u64 {
        if (d as u64).is_multiple_of(a) {
            total += a;
        }
    }
    total
}

/// G = sum_{d=1}^{N} sigma(d) t^d.
pub fn sigma_series(order: u32) -> TruncatedSeries {
    let mut g = TruncatedSeries::zero(internal_order(order));
    for d in 1..=order {
        g = g.add(&TruncatedSeries::monomial(
            GradedMonomial::t(d),
            Rational::from_int(sigma(d) as i64),
            internal_order(order),
        ));
    }
    g
}

/// F_0 from the ODE recursion d*a_d = 12 * sum_{k=1}^{d} sigma(k) a_{d-k},
/// a_0 = 1.
pub fn f0_via_ode(order: u32) -> TruncatedSeries {
    let mut coeffs: Vec<Rational> = Vec::with_capacity(order as usize + 1);
    coeffs.push(Rational::one());
    for d in 1..=order as usize {
        let mut sum = Rational::zero();
        for k in 1..=d {
            sum += &(Rational::from_int(sigma(k as u32) as i64) * &coeffs[d - k]);
        }
        let ad = Rational::from_int(12) * sum / Rational::from_int(d as i64);
        coeffs.push(ad);
    }
    series_with_section(&coeffs, order)
}

/// F_0 from the closed form ts * prod_{d=1}^{N} (1 - t^d)^{-12}, each
/// factor expanded by the negative binomial series
/// (1 - u)^{-12} = sum_k C(k+11, 11) u^k.
pub fn f0_via_product(order: u32) -> TruncatedSeries {
    let trunc = internal_order(order);
    let mut acc = TruncatedSeries::one(trunc);
    for d in 1..=order {
        let mut factor = TruncatedSeries::zero(trunc);
        let mut k = 0u32;
        while k * d <= order {
            factor = factor.add(&TruncatedSeries::monomial(
                GradedMonomial::t(k * d),
                Rational::from_int(binomial(k as u64 + 11, 11)),
                trunc,
            ));
            k += 1;
        }
        acc = acc.mul(&factor);
    }
    acc.mul(&TruncatedSeries::monomial(
        GradedMonomial::ts(),
        Rational::one(),
        trunc,
    ))
}

/// H from the genus-1 TRR: H = (1/12)(t F_0' - F_0) + F_0 G.
pub fn h_via_trr(f0: &TruncatedSeries, g: &TruncatedSeries) -> TruncatedSeries {
    let twelfth = Rational::new(1, 12);
    f0.derivative_t().sub(f0).scale(&twelfth).add(&f0.mul(g))
}

/// H from the fiber-sum splitting: H = 2 F_0 (G - 1/24).
pub fn h_via_sum(f0: &TruncatedSeries, g: &TruncatedSeries) -> TruncatedSeries {
    let shifted = g.sub(&TruncatedSeries::monomial(
        GradedMonomial::UNIT,
        Rational::new(1, 24),
        g.trunc_order(),
    ));
    f0.mul(&shifted).scale(&Rational::from_int(2))
}

/// One complete run of the pipeline at a fixed order.
pub struct EllipticRun {
    pub order: u32,
    pub f0: TruncatedSeries,
    pub h_trr: TruncatedSeries,
    pub h_sum: TruncatedSeries,
    pub g: TruncatedSeries,
}

impl EllipticRun {
    /// Computes F_0 (product form), G, and both H constructions.
    pub fn compute(order: u32) -> Self {
        let f0 = f0_via_product(order);
        let g = sigma_series(order);
        let h_trr = h_via_trr(&f0, &g);
        let h_sum = h_via_sum(&f0, &g);
        EllipticRun {
            order,
            f0,
            h_trr,
            h_sum,
            g,
        }
    }

    /// Coefficient a_d of t^d ts in F_0.
    pub fn f0_coeff(&self, d: u32) -> Rational {
        self.f0.coeff(&section_monomial(d))
    }

    /// Coefficient of t^d ts in H (TRR form).
    pub fn h_coeff(&self, d: u32) -> Rational {
        self.h_trr.coeff(&section_monomial(d))
    }

    /// t F_0' - 12 G F_0 vanishes coefficientwise.
    pub fn ode_residual_is_zero(&self) -> bool {
        self.f0
            .derivative_t()
            .sub(&self.g.mul(&self.f0).scale(&Rational::from_int(12)))
            .is_zero()
    }

    /// TRR and fiber-sum computations of H agree.
    pub fn h_consistent(&self) -> bool {
        self.h_trr == self.h_sum
    }

    /// Product and ODE constructions of F_0 agree.
    pub fn f0_consistent(&self) -> bool {
        self.f0 == f0_via_ode(self.order)
    }
}

fn section_monomial(d: u32) -> GradedMonomial {
    GradedMonomial {
        fiber_deg: d,
        section_pow: 1,
        lambda_pow: 0,
        point_pow: 0,
    }
}

// All series carry the ts marker, so the truncation grading needs one
// extra unit beyond the fiber order to retain t^N ts.
fn internal_order(order: u32) -> u32 {
    order + 1
}

fn series_with_section(coeffs: &[Rational], order: u32) -> TruncatedSeries {
    let trunc = internal_order(order);
    let mut s = TruncatedSeries::zero(trunc);
    for (d, c) in coeffs.iter().enumerate() {
        s = s.add(&TruncatedSeries::monomial(
            section_monomial(d as u32),
            c.clone(),
            trunc,
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_values() {
        assert_eq!(sigma(1), 1);
        assert_eq!(sigma(4), 7);
        assert_eq!(sigma(6), 12);
    }

    #[test]
    fn sigma_series_coefficients() {
        let g = sigma_series(6);
        assert_eq!(g.coeff(&GradedMonomial::t(1)), Rational::one());
        assert_eq!(g.coeff(&GradedMonomial::t(4)), Rational::from_int(7));
        assert_eq!(g.coeff(&GradedMonomial::t(6)), Rational::from_int(12));
    }

    #[test]
    fn ode_recursion_coefficients() {
        let f0 = f0_via_ode(4);
        let a = |d| f0.coeff(&section_monomial(d));
        assert!(a(0).is_one());
        assert_eq!(a(1), Rational::from_int(12));
        assert_eq!(a(2), Rational::from_int(90));
        assert_eq!(a(3), Rational::from_int(520));
        assert_eq!(a(4), Rational::from_int(2535));
    }

    #[test]
    fn product_form_coefficients() {
        let f0 = f0_via_product(2);
        assert!(f0.coeff(&section_monomial(0)).is_one());
        assert_eq!(f0.coeff(&section_monomial(1)), Rational::from_int(12));
        // order 0 is just ts
        let tiny = f0_via_product(0);
        assert_eq!(tiny.num_terms(), 1);
        assert!(tiny.coeff(&section_monomial(0)).is_one());
    }

    #[test]
    fn product_matches_ode_to_order_12() {
        assert_eq!(f0_via_product(12), f0_via_ode(12));
    }

    #[test]
    fn h_constant_and_linear_terms() {
        let run = EllipticRun::compute(5);
        assert_eq!(run.h_coeff(0), Rational::new(-1, 12));
        assert_eq!(run.h_coeff(1), Rational::one());
        assert_eq!(run.h_trr.coeff(&section_monomial(2)), Rational::new(45, 2));
    }

    #[test]
    fn h_with_bare_section() {
        // F_0 = ts at truncation 0: H = -ts/12
        let f0 = f0_via_product(0);
        let g = sigma_series(0);
        let h = h_via_sum(&f0, &g);
        assert_eq!(h.coeff(&section_monomial(0)), Rational::new(-1, 12));
        assert_eq!(h.num_terms(), 1);
    }

    #[test]
    fn pipeline_consistency_small_order() {
        let run = EllipticRun::compute(8);
        assert!(run.ode_residual_is_zero());
        assert!(run.h_consistent());
        assert!(run.f0_consistent());
    }

    #[test]
    fn f0_coefficients_are_positive_integers() {
        let run = EllipticRun::compute(16);
        for d in 0..=16 {
            let a = run.f0_coeff(d);
            assert!(a.is_integer(), "a_{d} integral");
            assert!(!a.is_negative() && !a.is_zero(), "a_{d} positive");
        }
    }
}
