//! Generalized Severi degrees of the plane.
//!
//! N^{d,delta}(alpha, beta) counts degree-d plane curves with delta nodes,
//! contact of order k with a fixed line L at alpha_k fixed points and
//! beta_k moving points, through the appropriate number r of generic
//! points, where
//!
//!   r = d(d+3)/2 - delta - d + |beta|.
//!
//! The recursion implemented here moves one point constraint across a
//! ruled neck and splits into two terms: a degree-preserving term where a
//! moving contact of order k becomes fixed (weight k), and a degree-drop
//! term over all (alpha', beta') with alpha' <= alpha, beta' >= beta and
//! I(alpha') + I(beta') = d - 1:
//!
//!   N^{d,delta}(alpha, beta)
//!     = sum_k k * N^{d,delta}(alpha + e_k, beta - e_k)
//!     + sum ord(beta'-beta) * C(alpha, alpha') * C(beta', beta)
//!           * N^{d-1, delta'}(alpha', beta'),
//!
//! with delta' = delta + |beta' - beta| - (d - 1); terms with delta' < 0
//! are dropped. Every term on the right consumes exactly one point
//! constraint, which is asserted on each expansion.
//!
//! The module also provides the classical Kontsevich recursion for
//! rational plane curves as an independent oracle, and the
//! connected/disconnected transform that recovers irreducible counts from
//! Severi degrees.

use std::collections::HashMap;
use std::sync::RwLock;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::contact::{enum_sequences, enum_splits, multi_binom, order_pow, ContactMultiIndex};
use crate::error::{Error, Result};
use crate::rational::{binomial, factorial, multinomial, Rational};

/// Index of a generalized Severi degree.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct SeveriKey {
    pub d: u32,
    pub delta: u32,
    pub alpha: ContactMultiIndex,
    pub beta: ContactMultiIndex,
}

impl SeveriKey {
    /// Validates I(alpha) + I(beta) = d.
    pub fn new(
        d: u32,
        delta: u32,
        alpha: ContactMultiIndex,
        beta: ContactMultiIndex,
    ) -> Result<Self> {
        let found = alpha.total_order() + beta.total_order();
        if d == 0 || found != d as u64 {
            return Err(Error::ContactDegreeMismatch {
                expected: d as u64,
                found,
            });
        }
        Ok(SeveriKey {
            d,
            delta,
            alpha,
            beta,
        })
    }

    /// Full transverse profile: alpha = 0, beta = d*e_1.
    pub fn transverse(d: u32, delta: u32) -> Result<Self> {
        Self::new(
            d,
            delta,
            ContactMultiIndex::zero(),
            ContactMultiIndex::transverse(d),
        )
    }

    /// Number of generic point constraints r = d(d+3)/2 - delta - d + |beta|.
    pub fn point_conditions(&self) -> i64 {
        let d = self.d as i64;
        d * (d + 3) / 2 - self.delta as i64 - d + self.beta.cardinality() as i64
    }

    /// Largest delta with r >= 0 for every contact profile of this degree.
    pub fn delta_cap(d: u32) -> u32 {
        let d = d as u64;
        (d * (d + 3) / 2 - d) as u32
    }
}

/// Memoized Severi degrees. Values, once stored, never change; lookups may
/// run concurrently.
#[derive(Default)]
pub struct SeveriTable {
    memo: RwLock<HashMap<SeveriKey, BigInt>>,
    irr_memo: RwLock<HashMap<(u32, u32), BigInt>>,
}

impl SeveriTable {
    pub fn new() -> Self {
        SeveriTable::default()
    }

    /// The generalized Severi degree N^{d,delta}(alpha, beta).
    pub fn severi(&self, key: &SeveriKey) -> Result<BigInt> {
        if key.delta > SeveriKey::delta_cap(key.d) {
            return Err(Error::NegativePointCount {
                context: format!(
                    "d={}, delta={} exceeds the cap {}",
                    key.d,
                    key.delta,
                    SeveriKey::delta_cap(key.d)
                ),
                r: key.point_conditions(),
            });
        }
        let r = key.point_conditions();
        if r < 0 {
            return Err(Error::NegativePointCount {
                context: format!("d={}, delta={}", key.d, key.delta),
                r,
            });
        }
        Ok(self.severi_inner(key))
    }

    fn severi_inner(&self, key: &SeveriKey) -> BigInt {
        let r = key.point_conditions();
        if r < 0 {
            return BigInt::zero();
        }
        if key.d == 1 {
            return if key.delta == 0 {
                BigInt::one()
            } else {
                BigInt::zero()
            };
        }
        if let Some(v) = self.memo.read().unwrap().get(key) {
            return v.clone();
        }

        let mut total = BigInt::zero();

        // Degree-preserving term: a moving contact of order k becomes fixed.
        for (k, count) in key.beta.support() {
            debug_assert!(count > 0);
            let next = SeveriKey {
                d: key.d,
                delta: key.delta,
                alpha: key.alpha.add(&ContactMultiIndex::unit(k)),
                beta: key
                    .beta
                    .checked_sub(&ContactMultiIndex::unit(k))
                    .expect("beta_k > 0"),
            };
            assert_eq!(
                next.point_conditions(),
                r - 1,
                "point-count conservation in the degree-preserving term"
            );
            total += BigInt::from(k) * self.severi_inner(&next);
        }

        // Degree-drop term.
        let splits = enum_splits(key.d, &key.alpha, &key.beta)
            .expect("key invariant guarantees matching contact degree");
        for (alpha2, beta2) in splits {
            let gained = beta2
                .checked_sub(&key.beta)
                .expect("enum_splits guarantees beta' >= beta");
            let delta2 = key.delta as i64 + gained.cardinality() as i64 - (key.d as i64 - 1);
            if delta2 < 0 {
                continue;
            }
            let next = SeveriKey {
                d: key.d - 1,
                delta: delta2 as u32,
                alpha: alpha2.clone(),
                beta: beta2.clone(),
            };
            assert_eq!(
                next.point_conditions(),
                r - 1,
                "point-count conservation in the degree-drop term"
            );
            let factor = order_pow(&gained)
                * multi_binom(&key.alpha, &alpha2)
                * multi_binom(&beta2, &key.beta);
            total += factor * self.severi_inner(&next);
        }

        assert!(!total.is_negative(), "Severi degrees are nonnegative");
        self.memo
            .write()
            .unwrap()
            .entry(key.clone())
            .or_insert(total)
            .clone()
    }

    /// Count of irreducible delta-nodal degree-d curves through
    /// d(d+3)/2 - delta generic points, obtained from the Severi degrees
    /// by subtracting all reducible configurations.
    pub fn connected_from_severi(&self, d: u32, delta: u32) -> Result<BigInt> {
        if d == 0 {
            return Err(Error::InvalidInput("degree must be positive".into()));
        }
        let r = full_points(d, delta);
        if r < 0 {
            return Err(Error::NegativePointCount {
                context: format!("irreducible d={d}, delta={delta}"),
                r,
            });
        }
        Ok(self.connected_inner(d, delta))
    }

    fn connected_inner(&self, d: u32, delta: u32) -> BigInt {
        if let Some(v) = self.irr_memo.read().unwrap().get(&(d, delta)) {
            return v.clone();
        }
        let key = SeveriKey::transverse(d, delta).expect("transverse profile is well-formed");
        let mut total = Rational::from(self.severi_inner(&key));

        // Subtract every unordered splitting d = sum d_i (l >= 2 parts)
        // with node budget delta = sum delta_i + sum_{i<j} d_i d_j. The
        // r_i points of each component are chosen from the r total points;
        // identical (d_i, delta_i) components are interchangeable, hence
        // the division by the multiplicity factorials.
        for part in enum_sequences(d) {
            let parts = part.parts();
            if parts.len() < 2 {
                continue;
            }
            let cross: u64 = {
                let total: u64 = parts.iter().map(|&p| p as u64).sum();
                let sq: u64 = parts.iter().map(|&p| (p as u64) * (p as u64)).sum();
                (total * total - sq) / 2
            };
            if cross > delta as u64 {
                continue;
            }
            let budget = delta - cross as u32;
            for assignment in node_assignments(parts, budget) {
                let mut points = Vec::with_capacity(parts.len());
                let mut feasible = true;
                for &(di, deltai) in &assignment {
                    let ri = full_points(di, deltai);
                    if ri < 0 {
                        feasible = false;
                        break;
                    }
                    points.push(ri as u64);
                }
                if !feasible {
                    continue;
                }
                let mut product = BigInt::one();
                for &(di, deltai) in &assignment {
                    product *= self.connected_inner(di, deltai);
                    if product.is_zero() {
                        break;
                    }
                }
                if product.is_zero() {
                    continue;
                }
                let distributions = Rational::new(multinomial(&points), symmetry(&assignment));
                total = total - distributions * Rational::from(product);
            }
        }

        let value = total.to_integer().expect("irreducible counts are integers");
        assert!(!value.is_negative(), "irreducible counts are nonnegative");
        self.irr_memo
            .write()
            .unwrap()
            .entry((d, delta))
            .or_insert(value)
            .clone()
    }
}

fn full_points(d: u32, delta: u32) -> i64 {
    let d = d as i64;
    d * (d + 3) / 2 - delta as i64
}

/// Unordered assignments of `budget` nodes to the sorted parts: canonical
/// representatives have (d_i, delta_i) nondecreasing within ties of d_i.
fn node_assignments(parts: &[u32], budget: u32) -> Vec<Vec<(u32, u32)>> {
    let mut out = Vec::new();
    let mut current: Vec<(u32, u32)> = Vec::with_capacity(parts.len());
    fn go(
        parts: &[u32],
        idx: usize,
        remaining: u32,
        current: &mut Vec<(u32, u32)>,
        out: &mut Vec<Vec<(u32, u32)>>,
    ) {
        if idx == parts.len() {
            if remaining == 0 {
                out.push(current.clone());
            }
            return;
        }
        let min = match current.last() {
            Some(&(dprev, deltaprev)) if dprev == parts[idx] => deltaprev,
            _ => 0,
        };
        for delta in min..=remaining {
            current.push((parts[idx], delta));
            go(parts, idx + 1, remaining - delta, current, out);
            current.pop();
        }
    }
    go(parts, 0, budget, &mut current, &mut out);
    out
}

/// prod m_t! over the multiplicities of identical (d_i, delta_i) pairs.
fn symmetry(assignment: &[(u32, u32)]) -> BigInt {
    let mut acc = BigInt::one();
    let mut run = 1u64;
    for w in assignment.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            acc *= factorial(run);
            run = 1;
        }
    }
    acc *= factorial(run);
    acc
}

/// Kontsevich's recursion for the number N_d of rational degree-d plane
/// curves through 3d-1 generic points:
///
///   N_1 = 1,
///   N_d = sum_{d1+d2=d} N_{d1} N_{d2} [ d1^2 d2^2 C(3d-4, 3d1-2)
///                                       - d1^3 d2 C(3d-4, 3d1-1) ].
pub fn kontsevich(d: u32) -> BigInt {
    assert!(d >= 1, "degree must be positive");
    let mut table: Vec<BigInt> = vec![BigInt::zero(), BigInt::one()];
    for n in 2..=d as u64 {
        let mut total = BigInt::zero();
        for d1 in 1..n {
            let d2 = n - d1;
            let bracket = BigInt::from(d1 * d1 * d2 * d2) * binomial(3 * n - 4, 3 * d1 - 2)
                - BigInt::from(d1 * d1 * d1 * d2) * binomial(3 * n - 4, 3 * d1 - 1);
            total += &table[d1 as usize] * &table[d2 as usize] * bracket;
        }
        table.push(total);
    }
    table[d as usize].clone()
}
