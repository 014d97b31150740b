//! Truncated multigraded formal series over the exact rationals.
//!
//! A [`TruncatedSeries`] is a finitely supported sum of monomials
//!
//!   c * t^a * ts^b * l^p * x^n
//!
//! where t tracks the fiber-degree of a curve class, ts the section
//! marker, l is the Laurent euler-class variable (its exponent may be
//! negative), and x is the point-constraint variable with the exponential
//! normalization x^n/n!. The truncation grading is the total curve-class
//! degree a + b: terms above `trunc_order` are discarded, which makes
//! positively graded series nilpotent and the exponential/logarithm pair
//! finite and exact.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Exponent vector of one series monomial.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct GradedMonomial {
    /// Exponent of t (fiber degree / generic curve-class degree).
    pub fiber_deg: u32,
    /// Exponent of ts (section marker).
    pub section_pow: u32,
    /// Exponent of l (may be negative: genus-0 terms carry l^{-2}).
    pub lambda_pow: i32,
    /// Exponent of x (point-count variable, normalized x^n/n!).
    pub point_pow: u32,
}

impl GradedMonomial {
    pub const UNIT: GradedMonomial = GradedMonomial {
        fiber_deg: 0,
        section_pow: 0,
        lambda_pow: 0,
        point_pow: 0,
    };

    pub fn t(d: u32) -> Self {
        GradedMonomial {
            fiber_deg: d,
            ..Self::UNIT
        }
    }

    pub fn ts() -> Self {
        GradedMonomial {
            section_pow: 1,
            ..Self::UNIT
        }
    }

    pub fn lambda(p: i32) -> Self {
        GradedMonomial {
            lambda_pow: p,
            ..Self::UNIT
        }
    }

    pub fn x(n: u32) -> Self {
        GradedMonomial {
            point_pow: n,
            ..Self::UNIT
        }
    }

    /// Total curve-class degree, the truncation grading.
    pub fn curve_degree(&self) -> u32 {
        self.fiber_deg + self.section_pow
    }

    /// Product of monomials: exponents add componentwise.
    pub fn mul(&self, other: &GradedMonomial) -> GradedMonomial {
        GradedMonomial {
            fiber_deg: self.fiber_deg + other.fiber_deg,
            section_pow: self.section_pow + other.section_pow,
            lambda_pow: self.lambda_pow + other.lambda_pow,
            point_pow: self.point_pow + other.point_pow,
        }
    }
}

// Canonical monomial order: by curve degree first, then the individual
// exponents. Storage order and serialization order coincide.
impl Ord for GradedMonomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (
            self.curve_degree(),
            self.fiber_deg,
            self.section_pow,
            self.lambda_pow,
            self.point_pow,
        )
            .cmp(&(
                other.curve_degree(),
                other.fiber_deg,
                other.section_pow,
                other.lambda_pow,
                other.point_pow,
            ))
    }
}

impl PartialOrd for GradedMonomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for GradedMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self == Self::UNIT {
            return write!(f, "1");
        }
        let mut first = true;
        let mut var = |f: &mut fmt::Formatter<'_>, name: &str, exp: i64| -> fmt::Result {
            if exp == 0 {
                return Ok(());
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if exp == 1 {
                write!(f, "{name}")
            } else {
                write!(f, "{name}^{exp}")
            }
        };
        var(f, "t", self.fiber_deg as i64)?;
        var(f, "ts", self.section_pow as i64)?;
        var(f, "l", self.lambda_pow as i64)?;
        var(f, "x", self.point_pow as i64)?;
        Ok(())
    }
}

/// Finitely supported series with truncation order and Laurent floor.
///
/// Canonical form: no zero coefficients, no terms above `trunc_order` in
/// curve degree, no lambda exponent below `lambda_floor`. The stored
/// floor is kept tight (the least lambda exponent present, capped at 0),
/// so series built along different routes compare equal term-for-term.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TruncatedSeries {
    terms: BTreeMap<GradedMonomial, Rational>,
    trunc_order: u32,
    lambda_floor: i32,
}

impl TruncatedSeries {
    pub fn zero(trunc_order: u32) -> Self {
        TruncatedSeries {
            terms: BTreeMap::new(),
            trunc_order,
            lambda_floor: 0,
        }
    }

    pub fn one(trunc_order: u32) -> Self {
        Self::monomial(GradedMonomial::UNIT, Rational::one(), trunc_order)
    }

    pub fn monomial(m: GradedMonomial, coeff: Rational, trunc_order: u32) -> Self {
        let mut s = TruncatedSeries {
            terms: BTreeMap::new(),
            trunc_order,
            lambda_floor: 0,
        };
        if !coeff.is_zero() && m.curve_degree() <= trunc_order {
            s.terms.insert(m, coeff);
        }
        s.normalize_floor();
        s
    }

    /// Builds a series from raw terms, enforcing the declared bounds:
    /// terms above `trunc_order` or below `lambda_floor` are rejected.
    pub fn from_terms(
        terms: impl IntoIterator<Item = (GradedMonomial, Rational)>,
        trunc_order: u32,
        lambda_floor: i32,
    ) -> Result<Self> {
        let mut map: BTreeMap<GradedMonomial, Rational> = BTreeMap::new();
        for (m, c) in terms {
            if m.curve_degree() > trunc_order {
                return Err(Error::InvalidInput(format!(
                    "term {m} exceeds truncation order {trunc_order}"
                )));
            }
            if m.lambda_pow < lambda_floor {
                return Err(Error::InvalidInput(format!(
                    "term {m} falls below the lambda floor {lambda_floor}"
                )));
            }
            let entry = map.entry(m).or_insert_with(Rational::zero);
            *entry += &c;
        }
        map.retain(|_, c| !c.is_zero());
        let mut s = TruncatedSeries {
            terms: map,
            trunc_order,
            lambda_floor,
        };
        s.normalize_floor();
        Ok(s)
    }

    pub fn trunc_order(&self) -> u32 {
        self.trunc_order
    }

    pub fn lambda_floor(&self) -> i32 {
        self.lambda_floor
    }

    fn normalize_floor(&mut self) {
        self.lambda_floor = self
            .terms
            .keys()
            .map(|m| m.lambda_pow)
            .min()
            .unwrap_or(0)
            .min(0);
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &GradedMonomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&GradedMonomial, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// True if every term has curve degree >= 1.
    pub fn is_positively_graded(&self) -> bool {
        self.terms.keys().all(|m| m.curve_degree() >= 1)
    }

    /// Coefficientwise sum. Truncation order of the result is the minimum
    /// of the operands', the lambda floor the minimum.
    pub fn add(&self, other: &TruncatedSeries) -> TruncatedSeries {
        let trunc = self.trunc_order.min(other.trunc_order);
        let mut terms = BTreeMap::new();
        for (m, c) in self.terms.iter().chain(other.terms.iter()) {
            if m.curve_degree() > trunc {
                continue;
            }
            let entry = terms.entry(*m).or_insert_with(Rational::zero);
            *entry += c;
        }
        terms.retain(|_, c: &mut Rational| !c.is_zero());
        let mut out = TruncatedSeries {
            terms,
            trunc_order: trunc,
            lambda_floor: 0,
        };
        out.normalize_floor();
        out
    }

    pub fn neg(&self) -> TruncatedSeries {
        let terms = self.terms.iter().map(|(m, c)| (*m, -c)).collect();
        TruncatedSeries {
            terms,
            ..self.clone()
        }
    }

    pub fn sub(&self, other: &TruncatedSeries) -> TruncatedSeries {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Rational) -> TruncatedSeries {
        if c.is_zero() {
            return TruncatedSeries::zero(self.trunc_order);
        }
        let terms = self.terms.iter().map(|(m, v)| (*m, v * c)).collect();
        TruncatedSeries {
            terms,
            ..self.clone()
        }
    }

    /// Convolution product in the group ring: monomial exponents add,
    /// terms above the truncation order are discarded.
    pub fn mul(&self, other: &TruncatedSeries) -> TruncatedSeries {
        let trunc = self.trunc_order.min(other.trunc_order);
        let mut terms: BTreeMap<GradedMonomial, Rational> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            if ma.curve_degree() > trunc {
                continue;
            }
            for (mb, cb) in &other.terms {
                if ma.curve_degree() + mb.curve_degree() > trunc {
                    continue;
                }
                let m = ma.mul(mb);
                let entry = terms.entry(m).or_insert_with(Rational::zero);
                *entry += &(ca * cb);
            }
        }
        terms.retain(|_, c| !c.is_zero());
        let mut out = TruncatedSeries {
            terms,
            trunc_order: trunc,
            lambda_floor: 0,
        };
        out.normalize_floor();
        out
    }

    pub fn pow(&self, exp: u32) -> TruncatedSeries {
        let mut acc = TruncatedSeries::one(self.trunc_order);
        for _ in 0..exp {
            acc = acc.mul(self);
        }
        acc
    }

    /// exp(a) = sum_{k>=0} a^k / k!, finite because a positively graded
    /// series is nilpotent under truncation.
    pub fn exp(&self) -> Result<TruncatedSeries> {
        if let Some(m) = self.terms.keys().find(|m| m.curve_degree() == 0) {
            return Err(Error::PositiveGradingRequired(m.to_string()));
        }
        let mut result = TruncatedSeries::one(self.trunc_order);
        let mut power = TruncatedSeries::one(self.trunc_order);
        let mut k: u64 = 0;
        loop {
            k += 1;
            power = power.mul(self).scale(&Rational::new(1, k as i64));
            if power.is_zero() {
                break;
            }
            result = result.add(&power);
        }
        Ok(result)
    }

    /// log(a) = sum_{k>=1} (-1)^{k+1} (a-1)^k / k for a with constant
    /// term 1 and every other term of positive curve degree.
    pub fn log(&self) -> Result<TruncatedSeries> {
        let constant = self.coeff(&GradedMonomial::UNIT);
        if !constant.is_one() {
            return Err(Error::UnitConstantTermRequired(constant.to_string()));
        }
        let u = self.sub(&TruncatedSeries::one(self.trunc_order));
        if let Some(m) = u.terms.keys().find(|m| m.curve_degree() == 0) {
            return Err(Error::PositiveGradingRequired(m.to_string()));
        }
        let mut result = TruncatedSeries::zero(self.trunc_order);
        let mut power = TruncatedSeries::one(self.trunc_order);
        let mut k: u64 = 0;
        loop {
            k += 1;
            power = power.mul(&u);
            if power.is_zero() {
                break;
            }
            let sign = if k % 2 == 1 { 1 } else { -1 };
            result = result.add(&power.scale(&Rational::new(sign, k as i64)));
        }
        Ok(result)
    }

    /// The grading-preserving derivation t * d/dt: each monomial is
    /// scaled by its fiber degree.
    pub fn derivative_t(&self) -> TruncatedSeries {
        let terms = self
            .terms
            .iter()
            .filter(|(m, _)| m.fiber_deg > 0)
            .map(|(m, c)| (*m, c * &Rational::from_int(m.fiber_deg as i64)))
            .collect();
        let mut out = TruncatedSeries {
            terms,
            ..self.clone()
        };
        out.normalize_floor();
        out
    }

    /// Restricts to curve degree <= new_order (no-op beyond the current
    /// truncation order).
    pub fn truncate(&self, new_order: u32) -> TruncatedSeries {
        let trunc = self.trunc_order.min(new_order);
        let terms = self
            .terms
            .iter()
            .filter(|(m, _)| m.curve_degree() <= trunc)
            .map(|(m, c)| (*m, c.clone()))
            .collect();
        let mut out = TruncatedSeries {
            terms,
            trunc_order: trunc,
            lambda_floor: 0,
        };
        out.normalize_floor();
        out
    }

    /// Canonical text form: monomials in canonical order, coefficients as
    /// "num/den" (exactness preserved bit-for-bit).
    pub fn to_canonical_string(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        self.terms
            .iter()
            .map(|(m, c)| {
                if *m == GradedMonomial::UNIT {
                    c.to_fraction_string()
                } else {
                    format!("{} {m}", c.to_fraction_string())
                }
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_canonical_string())
    }
}
