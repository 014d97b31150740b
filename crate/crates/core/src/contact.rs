//! Tangency sequences and contact multi-indices.
//!
//! A tangency sequence s = (s_1, ..., s_l) records the contact orders of a
//! curve with a fixed divisor. Its three basic statistics are
//!
//!   deg s = s_1 + ... + s_l,    l(s) = l,    ord s = s_1 * ... * s_l,
//!
//! and the convolution weight attached to s is ord(s) / l(s)!.
//!
//! A contact multi-index alpha = (alpha_1, alpha_2, ...) counts, for each
//! contact order k, how many contact points of that order occur; it carries
//! the total order I(alpha) = sum k*alpha_k and the cardinality
//! |alpha| = sum alpha_k. Multi-indices index the generalized Severi
//! degrees N^{d,delta}(alpha, beta).

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::{binomial, factorial, Rational};

/// Largest contact order accepted from external input (CLI flags, JSON).
/// Contact order is bounded by curve degree in every application here, so
/// anything larger is almost certainly a typo. Internal enumeration is not
/// subject to this cap.
pub const MAX_CONTACT_ORDER: u32 = 32;

/// A multiset of positive contact orders, stored sorted ascending.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct TangencySeq {
    parts: Vec<u32>,
}

impl TangencySeq {
    /// Builds a sequence from parts in any order; rejects zero parts.
    pub fn new(mut parts: Vec<u32>) -> Result<Self> {
        if parts.contains(&0) {
            return Err(Error::InvalidInput(
                "tangency sequence parts must be >= 1".into(),
            ));
        }
        parts.sort_unstable();
        Ok(TangencySeq { parts })
    }

    pub fn empty() -> Self {
        TangencySeq { parts: Vec::new() }
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// deg s = sum of parts.
    pub fn deg(&self) -> u64 {
        self.parts.iter().map(|&p| p as u64).sum()
    }

    /// l(s) = number of parts.
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    /// ord s = product of parts (1 for the empty sequence).
    pub fn ord(&self) -> BigInt {
        let mut acc = BigInt::one();
        for &p in &self.parts {
            acc *= BigInt::from(p);
        }
        acc
    }
}

impl fmt::Display for TangencySeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

/// Convolution weight ord(s) / l(s)!.
pub fn weight(s: &TangencySeq) -> Rational {
    Rational::new(s.ord(), factorial(s.len() as u64))
}

/// All tangency sequences of the given degree: the integer partitions,
/// listed with parts ascending and in lexicographic order. Degree 0 yields
/// exactly the empty sequence.
pub fn enum_sequences(degree: u32) -> Vec<TangencySeq> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn go(remaining: u32, min_part: u32, current: &mut Vec<u32>, out: &mut Vec<TangencySeq>) {
        if remaining == 0 {
            out.push(TangencySeq {
                parts: current.clone(),
            });
            return;
        }
        for part in min_part..=remaining {
            current.push(part);
            go(remaining - part, part, current, out);
            current.pop();
        }
    }
    go(degree, 1, &mut current, &mut out);
    out
}

/// Finitely supported map from contact order k >= 1 to multiplicity.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct ContactMultiIndex {
    counts: BTreeMap<u32, u32>,
}

impl ContactMultiIndex {
    pub fn zero() -> Self {
        ContactMultiIndex::default()
    }

    /// The elementary index e_k (one contact of order k).
    pub fn unit(k: u32) -> Self {
        assert!(k >= 1, "contact order must be >= 1");
        let mut counts = BTreeMap::new();
        counts.insert(k, 1);
        ContactMultiIndex { counts }
    }

    /// d transverse contacts: d * e_1.
    pub fn transverse(d: u32) -> Self {
        let mut counts = BTreeMap::new();
        if d > 0 {
            counts.insert(1, d);
        }
        ContactMultiIndex { counts }
    }

    /// Builds from sparse `(order, multiplicity)` pairs; rejects order 0,
    /// duplicate orders, and orders beyond `max_order` when given.
    pub fn from_pairs(pairs: &[(u32, u32)], max_order: Option<u32>) -> Result<Self> {
        let mut counts = BTreeMap::new();
        for &(k, c) in pairs {
            if k == 0 {
                return Err(Error::InvalidInput("contact order 0 is not allowed".into()));
            }
            if let Some(cap) = max_order {
                if k > cap {
                    return Err(Error::InvalidInput(format!(
                        "contact order {k} exceeds the maximum {cap}"
                    )));
                }
            }
            if c == 0 {
                continue;
            }
            if counts.insert(k, c).is_some() {
                return Err(Error::InvalidInput(format!(
                    "duplicate contact order {k} in sparse pairs"
                )));
            }
        }
        Ok(ContactMultiIndex { counts })
    }

    /// Sparse pairs [[k, count], ...] sorted by k.
    pub fn to_pairs(&self) -> Vec<(u32, u32)> {
        self.counts.iter().map(|(&k, &c)| (k, c)).collect()
    }

    pub fn get(&self, k: u32) -> u32 {
        self.counts.get(&k).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn support(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.counts.iter().map(|(&k, &c)| (k, c))
    }

    /// Total order I(alpha) = sum k * alpha_k.
    pub fn total_order(&self) -> u64 {
        self.counts.iter().map(|(&k, &c)| k as u64 * c as u64).sum()
    }

    /// Cardinality |alpha| = sum alpha_k.
    pub fn cardinality(&self) -> u64 {
        self.counts.values().map(|&c| c as u64).sum()
    }

    /// Componentwise comparison alpha <= other.
    pub fn le(&self, other: &ContactMultiIndex) -> bool {
        self.counts.iter().all(|(&k, &c)| c <= other.get(k))
    }

    pub fn add(&self, other: &ContactMultiIndex) -> ContactMultiIndex {
        let mut counts = self.counts.clone();
        for (&k, &c) in &other.counts {
            *counts.entry(k).or_insert(0) += c;
        }
        ContactMultiIndex { counts }
    }

    /// Componentwise difference, `None` when any entry would go negative.
    pub fn checked_sub(&self, other: &ContactMultiIndex) -> Option<ContactMultiIndex> {
        let mut counts = BTreeMap::new();
        for (&k, &c) in &self.counts {
            let rest = c.checked_sub(other.get(k))?;
            if rest > 0 {
                counts.insert(k, rest);
            }
        }
        // entries present in `other` but not in `self` must be zero there
        if other.counts.keys().any(|k| !self.counts.contains_key(k)) {
            return None;
        }
        Some(ContactMultiIndex { counts })
    }

    /// The multiset of contact orders as a tangency sequence.
    pub fn to_sequence(&self) -> TangencySeq {
        let mut parts = Vec::new();
        for (&k, &c) in &self.counts {
            for _ in 0..c {
                parts.push(k);
            }
        }
        TangencySeq { parts }
    }

    /// Inverse of `to_sequence`.
    pub fn from_sequence(s: &TangencySeq) -> Self {
        let mut counts = BTreeMap::new();
        for &p in s.parts() {
            *counts.entry(p).or_insert(0) += 1;
        }
        ContactMultiIndex { counts }
    }
}

impl fmt::Display for ContactMultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, (k, c)) in self.counts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "[{k},{c}]")?;
        }
        write!(f, "]")
    }
}

/// Product of componentwise binomials, prod_k C(alpha_k, alpha'_k);
/// zero when alpha' is not componentwise <= alpha.
pub fn multi_binom(alpha: &ContactMultiIndex, sub: &ContactMultiIndex) -> BigInt {
    if !sub.le(alpha) {
        return BigInt::zero();
    }
    let mut acc = BigInt::one();
    for (k, c) in sub.support() {
        acc *= binomial(alpha.get(k) as u64, c as u64);
    }
    acc
}

/// prod_k k^{gamma_k}, the order of the multiset gamma describes.
pub fn order_pow(gamma: &ContactMultiIndex) -> BigInt {
    let mut acc = BigInt::one();
    for (k, c) in gamma.support() {
        acc *= BigInt::from(k).pow(c);
    }
    acc
}

/// All pairs (alpha', beta') with alpha' <= alpha, beta' >= beta and
/// I(alpha') + I(beta') = d - 1: the index range of the degree-drop term
/// of the Caporaso-Harris recursion. Requires I(alpha) + I(beta) = d.
pub fn enum_splits(
    d: u32,
    alpha: &ContactMultiIndex,
    beta: &ContactMultiIndex,
) -> Result<Vec<(ContactMultiIndex, ContactMultiIndex)>> {
    let found = alpha.total_order() + beta.total_order();
    if found != d as u64 {
        return Err(Error::ContactDegreeMismatch {
            expected: d as u64,
            found,
        });
    }
    if d == 0 {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for sub in sub_indices(alpha) {
        // beta' = beta + extra with I(extra) = I(alpha) - I(alpha') - 1
        let Some(extra_order) = (alpha.total_order())
            .checked_sub(sub.total_order())
            .and_then(|m| m.checked_sub(1))
        else {
            continue;
        };
        for part in enum_sequences(extra_order as u32) {
            let extra = ContactMultiIndex::from_sequence(&part);
            out.push((sub.clone(), beta.add(&extra)));
        }
    }
    out.sort();
    Ok(out)
}

/// All multi-indices componentwise <= alpha.
fn sub_indices(alpha: &ContactMultiIndex) -> Vec<ContactMultiIndex> {
    let support: Vec<(u32, u32)> = alpha.support().collect();
    let mut out = vec![ContactMultiIndex::zero()];
    for (k, cap) in support {
        let mut next = Vec::with_capacity(out.len() * (cap as usize + 1));
        for base in &out {
            for c in 0..=cap {
                let mut counts = base.counts.clone();
                if c > 0 {
                    counts.insert(k, c);
                }
                next.push(ContactMultiIndex { counts });
            }
        }
        out = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(parts: &[u32]) -> TangencySeq {
        TangencySeq::new(parts.to_vec()).unwrap()
    }

    #[test]
    fn degree_length_order() {
        let s = seq(&[3, 1, 2]);
        assert_eq!(s.parts(), &[1, 2, 3]);
        assert_eq!(s.deg(), 6);
        assert_eq!(s.len(), 3);
        assert_eq!(s.ord(), BigInt::from(6));
    }

    #[test]
    fn weights() {
        assert!(weight(&seq(&[1])).is_one());
        assert_eq!(weight(&seq(&[1, 1, 3])), Rational::new(1, 2));
        assert_eq!(weight(&seq(&[2, 2])), Rational::from_int(2));
        // empty sequence: ord = 1, 0! = 1
        assert!(weight(&TangencySeq::empty()).is_one());
    }

    #[test]
    fn partitions_of_small_degrees() {
        assert_eq!(enum_sequences(0), vec![TangencySeq::empty()]);
        let p3 = enum_sequences(3);
        assert_eq!(p3, vec![seq(&[1, 1, 1]), seq(&[1, 2]), seq(&[3])]);
        assert_eq!(enum_sequences(8).len(), 22);
    }

    /// Independent partition counter (coin-style dynamic programming).
    fn partition_count(n: usize) -> u64 {
        let mut table = vec![0u64; n + 1];
        table[0] = 1;
        for part in 1..=n {
            for total in part..=n {
                table[total] += table[total - part];
            }
        }
        table[n]
    }

    #[test]
    fn partition_counts_match_brute_force_up_to_20() {
        for n in 0..=20u32 {
            assert_eq!(
                enum_sequences(n).len() as u64,
                partition_count(n as usize),
                "p({n})"
            );
        }
    }

    #[test]
    fn rejects_zero_part() {
        assert!(TangencySeq::new(vec![1, 0]).is_err());
    }

    #[test]
    fn multi_index_statistics() {
        let a = ContactMultiIndex::from_pairs(&[(1, 2), (3, 1)], None).unwrap();
        assert_eq!(a.total_order(), 5);
        assert_eq!(a.cardinality(), 3);
        assert_eq!(a.to_pairs(), vec![(1, 2), (3, 1)]);
    }

    #[test]
    fn from_pairs_validation() {
        assert!(ContactMultiIndex::from_pairs(&[(0, 1)], None).is_err());
        assert!(ContactMultiIndex::from_pairs(&[(1, 1), (1, 2)], None).is_err());
        assert!(ContactMultiIndex::from_pairs(&[(40, 1)], Some(MAX_CONTACT_ORDER)).is_err());
        // zero multiplicities are dropped
        let z = ContactMultiIndex::from_pairs(&[(2, 0)], None).unwrap();
        assert!(z.is_zero());
    }

    #[test]
    fn binom_examples() {
        let a = ContactMultiIndex::from_pairs(&[(1, 2)], None).unwrap();
        let e1 = ContactMultiIndex::unit(1);
        assert_eq!(multi_binom(&a, &a), BigInt::one());
        assert_eq!(multi_binom(&a, &e1), BigInt::from(2));
        assert_eq!(multi_binom(&a, &ContactMultiIndex::zero()), BigInt::one());
        // out of range in slot 2
        let b = ContactMultiIndex::from_pairs(&[(2, 1)], None).unwrap();
        assert_eq!(multi_binom(&a, &b), BigInt::zero());
    }

    #[test]
    fn binom_multiplicative_over_disjoint_supports() {
        let a1 = ContactMultiIndex::from_pairs(&[(1, 3)], None).unwrap();
        let a2 = ContactMultiIndex::from_pairs(&[(4, 2)], None).unwrap();
        let s1 = ContactMultiIndex::from_pairs(&[(1, 2)], None).unwrap();
        let s2 = ContactMultiIndex::from_pairs(&[(4, 1)], None).unwrap();
        assert_eq!(
            multi_binom(&a1.add(&a2), &s1.add(&s2)),
            multi_binom(&a1, &s1) * multi_binom(&a2, &s2)
        );
    }

    #[test]
    fn order_pow_examples() {
        assert_eq!(order_pow(&ContactMultiIndex::zero()), BigInt::one());
        assert_eq!(order_pow(&ContactMultiIndex::unit(2)), BigInt::from(2));
        let g = ContactMultiIndex::from_pairs(&[(1, 2), (3, 1)], None).unwrap();
        assert_eq!(order_pow(&g), BigInt::from(3));
    }

    #[test]
    fn splits_for_conic_profile() {
        // d=2, alpha = 2e1, beta = 0 -> [(e1, 0), (0, e1)]
        let alpha = ContactMultiIndex::transverse(2);
        let beta = ContactMultiIndex::zero();
        let splits = enum_splits(2, &alpha, &beta).unwrap();
        let e1 = ContactMultiIndex::unit(1);
        assert_eq!(splits.len(), 2);
        assert!(splits.contains(&(ContactMultiIndex::zero(), e1.clone())));
        assert!(splits.contains(&(e1, ContactMultiIndex::zero())));
    }

    #[test]
    fn splits_empty_when_beta_cannot_grow() {
        // d=3, alpha = 0, beta = 3e1: beta' >= beta forces I(beta') >= 3 > 2
        let splits = enum_splits(
            3,
            &ContactMultiIndex::zero(),
            &ContactMultiIndex::transverse(3),
        )
        .unwrap();
        assert!(splits.is_empty());
    }

    #[test]
    fn splits_at_degree_one_are_empty() {
        // Any candidate needs I(alpha') + I(beta') = 0, which contradicts
        // beta' >= e1; the constraint set is empty.
        let splits =
            enum_splits(1, &ContactMultiIndex::zero(), &ContactMultiIndex::unit(1)).unwrap();
        assert!(splits.is_empty());
    }

    #[test]
    fn splits_validate_degree() {
        let err = enum_splits(3, &ContactMultiIndex::zero(), &ContactMultiIndex::unit(1));
        assert!(matches!(err, Err(Error::ContactDegreeMismatch { .. })));
    }

    #[test]
    fn split_postconditions_hold() {
        let alpha = ContactMultiIndex::from_pairs(&[(1, 1), (2, 1)], None).unwrap();
        let beta = ContactMultiIndex::from_pairs(&[(1, 2)], None).unwrap();
        let d = 5;
        for (a2, b2) in enum_splits(d, &alpha, &beta).unwrap() {
            assert!(a2.le(&alpha));
            assert!(beta.le(&b2));
            assert_eq!(a2.total_order() + b2.total_order(), (d - 1) as u64);
        }
    }
}
