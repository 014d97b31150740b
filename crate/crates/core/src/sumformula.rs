//! The symplectic-sum convolution engine (no-rim-tori, purely numerical).
//!
//! A [`RelInvTable`] is a finitely supported table of relative-invariant
//! numbers indexed by euler characteristic chi, a class-degree vector over
//! named generators, an opaque constraint tag, and up to two contact
//! slots. A contact slot holds a tangency sequence s together with one
//! homology basis label per part, stored with the (part, label) pairs
//! sorted.
//!
//! [`contract`] glues a left table to a right table along the left
//! operand's last contact slot and the right operand's first one. For
//! each matched sequence s it accumulates
//!
//!   ord(s) * pairsum_{Qinv}(I, J) / (aut(I) * aut(J))
//!     * T_left(...; s, I) * T_right(s, J; ...)
//!
//! into the entry with chi = chi_1 + chi_2 - 2 l(s) and the class degrees
//! added. Here pairsum_M(I, J) runs over all alignments of labels within
//! blocks of equal parts (a per-block permanent of M), and aut counts the
//! label automorphisms of a slot. On slots whose parts are pairwise
//! distinct this reduces to the familiar weight ord(s)/l(s)! summed over
//! ordered data; the symmetrized form is what makes the identity element
//! act as an exact identity on sorted slots, which the tests verify
//! against an ordered brute-force enumeration.
//!
//! The S-matrix is held as I + R with the identity part symbolic, so its
//! inverse is the alternating Neumann series in R, which terminates under
//! class-degree truncation whenever every term of R carries positive
//! class degree.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::contact::{enum_sequences, TangencySeq};
use crate::error::{Error, Result};
use crate::rational::{factorial, Rational};

/// Homology basis of the gluing divisor with its intersection pairing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisSpec {
    dim: usize,
    pairing: Vec<Vec<Rational>>,
    inverse: Vec<Vec<Rational>>,
}

impl BasisSpec {
    /// Builds the basis from its intersection matrix; fails when the
    /// matrix is not square or not invertible.
    pub fn new(pairing: Vec<Vec<Rational>>) -> Result<Self> {
        let dim = pairing.len();
        if dim == 0 || pairing.iter().any(|row| row.len() != dim) {
            return Err(Error::InvalidInput(
                "pairing matrix must be square and nonempty".into(),
            ));
        }
        let inverse = invert_matrix(&pairing).ok_or_else(|| {
            Error::InvalidInput("pairing matrix is singular, no dual basis exists".into())
        })?;
        Ok(BasisSpec {
            dim,
            pairing,
            inverse,
        })
    }

    /// As [`BasisSpec::new`], with declared homological degrees. Classes
    /// of odd degree would introduce permutation signs the engine does
    /// not implement, so they are rejected.
    pub fn with_degrees(pairing: Vec<Vec<Rational>>, degrees: &[u32]) -> Result<Self> {
        if let Some(k) = degrees.iter().position(|d| d % 2 == 1) {
            return Err(Error::InvalidInput(format!(
                "basis class {k} has odd degree {}; only even-degree constraints are supported",
                degrees[k]
            )));
        }
        if degrees.len() != pairing.len() {
            return Err(Error::InvalidInput(
                "one degree per basis class is required".into(),
            ));
        }
        Self::new(pairing)
    }

    /// The point basis: dim 1, pairing [1].
    pub fn point() -> Self {
        BasisSpec::new(vec![vec![Rational::one()]]).expect("[1] is invertible")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pairing(&self) -> &Vec<Vec<Rational>> {
        &self.pairing
    }

    pub fn inverse_pairing(&self) -> &Vec<Vec<Rational>> {
        &self.inverse
    }
}

/// Exact Gauss-Jordan inverse; `None` for singular input.
fn invert_matrix(m: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m.to_vec();
    let mut inv: Vec<Vec<Rational>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        Rational::one()
                    } else {
                        Rational::zero()
                    }
                })
                .collect()
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let scale = a[col][col].recip();
        for j in 0..n {
            a[col][j] = &a[col][j] * &scale;
            inv[col][j] = &inv[col][j] * &scale;
        }
        for row in 0..n {
            if row == col || a[row][col].is_zero() {
                continue;
            }
            let factor = a[row][col].clone();
            for j in 0..n {
                a[row][j] = &a[row][j] - &(&factor * &a[col][j]);
                inv[row][j] = &inv[row][j] - &(&factor * &inv[col][j]);
            }
        }
    }
    Some(inv)
}

/// A tangency sequence with one basis label per part; (part, label) pairs
/// are kept sorted, the canonical form for unordered contact data.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct ContactSlot {
    parts: Vec<u32>,
    labels: Vec<usize>,
}

impl ContactSlot {
    pub fn new(parts: Vec<u32>, labels: Vec<usize>) -> Result<Self> {
        if parts.len() != labels.len() {
            return Err(Error::InvalidInput(format!(
                "slot needs one label per part: {} parts, {} labels",
                parts.len(),
                labels.len()
            )));
        }
        if parts.contains(&0) {
            return Err(Error::InvalidInput(
                "tangency sequence parts must be >= 1".into(),
            ));
        }
        let mut pairs: Vec<(u32, usize)> = parts.into_iter().zip(labels).collect();
        pairs.sort_unstable();
        let (parts, labels) = pairs.into_iter().unzip();
        Ok(ContactSlot { parts, labels })
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn seq(&self) -> TangencySeq {
        TangencySeq::new(self.parts.clone()).expect("slot parts are positive")
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn deg(&self) -> u64 {
        self.parts.iter().map(|&p| p as u64).sum()
    }

    /// Runs of equal parts, as (start, end) position ranges.
    fn blocks(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut start = 0;
        for i in 1..=self.parts.len() {
            if i == self.parts.len() || self.parts[i] != self.parts[start] {
                out.push((start, i));
                start = i;
            }
        }
        out
    }

    /// Number of label-preserving permutations within tied parts.
    fn aut(&self) -> Rational {
        let mut acc = Rational::one();
        for (lo, hi) in self.blocks() {
            let mut run = 1u64;
            for i in lo + 1..hi {
                if self.labels[i] == self.labels[i - 1] {
                    run += 1;
                } else {
                    acc = acc * Rational::from_int(factorial(run));
                    run = 1;
                }
            }
            acc = acc * Rational::from_int(factorial(run));
        }
        acc
    }

    fn ord(&self) -> Rational {
        let mut acc = Rational::one();
        for &p in &self.parts {
            acc = acc * Rational::from_int(p as i64);
        }
        acc
    }
}

impl fmt::Display for ContactSlot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(s={:?}, labels={:?})", self.parts, self.labels)
    }
}

/// Sum over all within-block alignments of prod_m M[I_m][J_sigma(m)]:
/// the product over tied-part blocks of the permanent of the block's
/// pairing submatrix. Zero when the two slots carry different sequences.
fn pair_sum(matrix: &[Vec<Rational>], a: &ContactSlot, b: &ContactSlot) -> Rational {
    debug_assert_eq!(a.parts, b.parts);
    let mut acc = Rational::one();
    for (lo, hi) in a.blocks() {
        let size = hi - lo;
        let block: Vec<Vec<Rational>> = (lo..hi)
            .map(|i| {
                (lo..hi)
                    .map(|j| matrix[a.labels[i]][b.labels[j]].clone())
                    .collect()
            })
            .collect();
        acc = acc * permanent(&block, size);
        if acc.is_zero() {
            return acc;
        }
    }
    acc
}

fn permanent(m: &[Vec<Rational>], n: usize) -> Rational {
    fn go(m: &[Vec<Rational>], row: usize, used: &mut Vec<bool>, n: usize) -> Rational {
        if row == n {
            return Rational::one();
        }
        let mut acc = Rational::zero();
        for col in 0..n {
            if used[col] || m[row][col].is_zero() {
                continue;
            }
            used[col] = true;
            acc += &(&m[row][col] * &go(m, row + 1, used, n));
            used[col] = false;
        }
        acc
    }
    go(m, 0, &mut vec![false; n], n)
}

/// Role of a slot position within a table.
#[derive(Clone, Copy, PartialEq, Eq, Debug, PartialOrd, Ord, Hash)]
pub enum SlotRole {
    /// Contact data along the gluing divisor; eligible for contraction.
    Contact,
    /// Untouched pass-through data (spectator submanifolds).
    Spectator,
}

/// Index of one table entry.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct EntryKey {
    pub chi: i64,
    pub class_deg: Vec<u32>,
    pub tag: String,
    pub slots: Vec<ContactSlot>,
}

impl EntryKey {
    pub fn total_class_deg(&self) -> u64 {
        self.class_deg.iter().map(|&c| c as u64).sum()
    }
}

/// Truncation bounds for tables: total class degree from above, euler
/// characteristic from below.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Truncation {
    pub max_class_deg: u32,
    pub min_chi: i64,
}

impl Truncation {
    pub fn new(max_class_deg: u32, min_chi: i64) -> Self {
        Truncation {
            max_class_deg,
            min_chi,
        }
    }

    fn admits(&self, key: &EntryKey) -> bool {
        key.total_class_deg() <= self.max_class_deg as u64 && key.chi >= self.min_chi
    }
}

/// Finitely supported table of relative invariants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelInvTable {
    generators: Vec<String>,
    roles: Vec<SlotRole>,
    /// One optional linear functional per slot sending classDeg to A.V;
    /// when present, every entry must satisfy deg(slot.seq) = A.V.
    vdeg_rules: Vec<Option<Vec<i64>>>,
    entries: BTreeMap<EntryKey, Rational>,
}

impl RelInvTable {
    pub fn new(
        generators: Vec<String>,
        roles: Vec<SlotRole>,
        vdeg_rules: Vec<Option<Vec<i64>>>,
    ) -> Result<Self> {
        if roles.len() > 2 {
            return Err(Error::SlotConventionMismatch(format!(
                "tables carry at most two slots, got {}",
                roles.len()
            )));
        }
        if vdeg_rules.len() != roles.len() {
            return Err(Error::VDegreeMismatch(format!(
                "need one V-degree rule slot (possibly null) per slot: {} rules for {} slots",
                vdeg_rules.len(),
                roles.len()
            )));
        }
        for rule in vdeg_rules.iter().flatten() {
            if rule.len() != generators.len() {
                return Err(Error::VDegreeMismatch(format!(
                    "V-degree rule length {} does not match {} generators",
                    rule.len(),
                    generators.len()
                )));
            }
        }
        Ok(RelInvTable {
            generators,
            roles,
            vdeg_rules,
            entries: BTreeMap::new(),
        })
    }

    pub fn from_entries(
        generators: Vec<String>,
        roles: Vec<SlotRole>,
        vdeg_rules: Vec<Option<Vec<i64>>>,
        entries: impl IntoIterator<Item = (EntryKey, Rational)>,
        trunc: &Truncation,
    ) -> Result<Self> {
        let mut table = Self::new(generators, roles, vdeg_rules)?;
        for (key, value) in entries {
            table.insert(key, value, trunc)?;
        }
        Ok(table)
    }

    /// Validates and adds one entry (values on equal keys accumulate).
    pub fn insert(&mut self, key: EntryKey, value: Rational, trunc: &Truncation) -> Result<()> {
        if key.chi % 2 != 0 {
            return Err(Error::InvalidInput(format!(
                "euler characteristic must be even, got {}",
                key.chi
            )));
        }
        if key.class_deg.len() != self.generators.len() {
            return Err(Error::InvalidInput(format!(
                "class degree vector of length {} does not match {} generators",
                key.class_deg.len(),
                self.generators.len()
            )));
        }
        if key.slots.len() != self.roles.len() {
            return Err(Error::SlotConventionMismatch(format!(
                "entry carries {} slots, table declares {}",
                key.slots.len(),
                self.roles.len()
            )));
        }
        if !trunc.admits(&key) {
            return Err(Error::InvalidInput(format!(
                "entry with class degree {} and chi {} lies outside the truncation bounds",
                key.total_class_deg(),
                key.chi
            )));
        }
        for (i, slot) in key.slots.iter().enumerate() {
            if let Some(rule) = &self.vdeg_rules[i] {
                let vdeg: i64 = rule
                    .iter()
                    .zip(&key.class_deg)
                    .map(|(&r, &c)| r * c as i64)
                    .sum();
                if vdeg != slot.deg() as i64 {
                    return Err(Error::VDegreeMismatch(format!(
                        "slot {i} has deg(s) = {} but A.V = {vdeg}",
                        slot.deg()
                    )));
                }
            }
        }
        if value.is_zero() {
            return Ok(());
        }
        let cell = self.entries.entry(key).or_insert_with(Rational::zero);
        *cell += &value;
        Ok(())
    }

    fn accumulate(&mut self, key: EntryKey, value: Rational) {
        if value.is_zero() {
            return;
        }
        let cell = self.entries.entry(key).or_insert_with(Rational::zero);
        *cell += &value;
    }

    fn drop_zeros(&mut self) {
        self.entries.retain(|_, v| !v.is_zero());
    }

    pub fn generators(&self) -> &[String] {
        &self.generators
    }

    pub fn roles(&self) -> &[SlotRole] {
        &self.roles
    }

    pub fn vdeg_rules(&self) -> &[Option<Vec<i64>>] {
        &self.vdeg_rules
    }

    pub fn entries(&self) -> impl Iterator<Item = (&EntryKey, &Rational)> {
        self.entries.iter()
    }

    pub fn value(&self, key: &EntryKey) -> Rational {
        self.entries
            .get(key)
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn num_entries(&self) -> usize {
        self.entries.len()
    }

    /// Entrywise sum; the tables must have identical shape.
    pub fn add(&self, other: &RelInvTable) -> Result<RelInvTable> {
        if self.generators != other.generators
            || self.roles != other.roles
            || self.vdeg_rules != other.vdeg_rules
        {
            return Err(Error::BasisMismatch(
                "cannot add tables of different shapes".into(),
            ));
        }
        let mut out = self.clone();
        for (k, v) in &other.entries {
            out.accumulate(k.clone(), v.clone());
        }
        out.drop_zeros();
        Ok(out)
    }

    pub fn scale(&self, c: &Rational) -> RelInvTable {
        let mut out = self.clone();
        if c.is_zero() {
            out.entries.clear();
            return out;
        }
        for v in out.entries.values_mut() {
            *v *= c;
        }
        out
    }

    fn check_labels(&self, basis: &BasisSpec) -> Result<()> {
        for key in self.entries.keys() {
            for slot in &key.slots {
                if let Some(&bad) = slot.labels().iter().find(|&&l| l >= basis.dim()) {
                    return Err(Error::BasisMismatch(format!(
                        "label {bad} out of range for basis of dimension {}",
                        basis.dim()
                    )));
                }
            }
        }
        Ok(())
    }

    fn last_contact(&self) -> Option<usize> {
        self.roles.iter().rposition(|r| *r == SlotRole::Contact)
    }

    fn first_contact(&self) -> Option<usize> {
        self.roles.iter().position(|r| *r == SlotRole::Contact)
    }
}

fn combine_tags(a: &str, b: &str) -> String {
    match (a.is_empty(), b.is_empty()) {
        (true, _) => b.to_string(),
        (_, true) => a.to_string(),
        _ => format!("{a}|{b}"),
    }
}

/// Convolution of two tables: contracts the left operand's last contact
/// slot against the right operand's first contact slot, pairing equal
/// sequences through the inverse intersection matrix with weight
/// ord(s) * pairsum / (aut * aut), shifting chi by -2 l(s) and adding
/// class degrees. Remaining slots pass through, left's first.
pub fn contract(
    left: &RelInvTable,
    right: &RelInvTable,
    basis: &BasisSpec,
    trunc: &Truncation,
) -> Result<RelInvTable> {
    if left.generators != right.generators {
        return Err(Error::BasisMismatch(format!(
            "left generators {:?} differ from right generators {:?}",
            left.generators, right.generators
        )));
    }
    left.check_labels(basis)?;
    right.check_labels(basis)?;
    let li = left.last_contact().ok_or_else(|| {
        Error::SlotConventionMismatch("left operand has no contact slot to contract".into())
    })?;
    let ri = right.first_contact().ok_or_else(|| {
        Error::SlotConventionMismatch("right operand has no contact slot to contract".into())
    })?;

    let mut roles = Vec::new();
    let mut rules = Vec::new();
    for (i, r) in left.roles.iter().enumerate() {
        if i != li {
            roles.push(*r);
            rules.push(left.vdeg_rules[i].clone());
        }
    }
    for (i, r) in right.roles.iter().enumerate() {
        if i != ri {
            roles.push(*r);
            rules.push(right.vdeg_rules[i].clone());
        }
    }
    if roles.len() > 2 {
        return Err(Error::SlotConventionMismatch(format!(
            "contraction would leave {} slots, at most two are supported",
            roles.len()
        )));
    }
    let mut out = RelInvTable::new(left.generators.clone(), roles, rules)?;

    for (kl, vl) in &left.entries {
        let sl = &kl.slots[li];
        for (kr, vr) in &right.entries {
            let sr = &kr.slots[ri];
            if sl.parts() != sr.parts() {
                continue;
            }
            let kernel = contraction_kernel(basis, sl, sr);
            if kernel.is_zero() {
                continue;
            }
            let chi = kl.chi + kr.chi - 2 * sl.len() as i64;
            assert_eq!(
                chi,
                kl.chi + kr.chi - 2 * sr.len() as i64,
                "chi additivity: matched slots must glue the same number of points"
            );
            assert_eq!(chi % 2, 0, "chi additivity preserves parity");
            let class_deg: Vec<u32> = kl
                .class_deg
                .iter()
                .zip(&kr.class_deg)
                .map(|(&a, &b)| a + b)
                .collect();
            let mut slots = Vec::new();
            for (i, s) in kl.slots.iter().enumerate() {
                if i != li {
                    slots.push(s.clone());
                }
            }
            for (i, s) in kr.slots.iter().enumerate() {
                if i != ri {
                    slots.push(s.clone());
                }
            }
            let key = EntryKey {
                chi,
                class_deg,
                tag: combine_tags(&kl.tag, &kr.tag),
                slots,
            };
            if !trunc.admits(&key) {
                continue;
            }
            out.accumulate(key, &(vl * &kernel) * vr);
        }
    }
    out.drop_zeros();
    Ok(out)
}

/// Weight attached to one matched pair of slots.
fn contraction_kernel(basis: &BasisSpec, a: &ContactSlot, b: &ContactSlot) -> Rational {
    let pairsum = pair_sum(basis.inverse_pairing(), a, b);
    if pairsum.is_zero() {
        return pairsum;
    }
    a.ord() * pairsum / (a.aut() * b.aut())
}

/// The identity element of the convolution algebra, materialized for all
/// sequences of degree 1..=max_seq_deg and all label combinations. Each
/// entry pairs equal sequences through the intersection matrix itself
/// with weight 1/ord(s), carries chi = 2 l(s) (disjoint rational fiber
/// covers) and zero class degree, so that contracting it against any
/// table reproduces that table exactly.
pub fn identity_table(
    basis: &BasisSpec,
    generators: Vec<String>,
    max_seq_deg: u32,
) -> Result<RelInvTable> {
    let mut table = RelInvTable::new(
        generators.clone(),
        vec![SlotRole::Contact, SlotRole::Contact],
        vec![None, None],
    )?;
    let zero_class = vec![0u32; generators.len()];
    for deg in 1..=max_seq_deg {
        for seq in enum_sequences(deg) {
            if seq.is_empty() {
                continue;
            }
            let parts = seq.parts().to_vec();
            let labelings = slot_labelings(&parts, basis.dim());
            for left_labels in &labelings {
                let left =
                    ContactSlot::new(parts.clone(), left_labels.clone()).expect("well-formed slot");
                for right_labels in &labelings {
                    let right = ContactSlot::new(parts.clone(), right_labels.clone())
                        .expect("well-formed slot");
                    let value = pair_sum(basis.pairing(), &left, &right) / left.ord();
                    if value.is_zero() {
                        continue;
                    }
                    let key = EntryKey {
                        chi: 2 * parts.len() as i64,
                        class_deg: zero_class.clone(),
                        tag: String::new(),
                        slots: vec![left.clone(), right],
                    };
                    table.accumulate(key, value);
                }
            }
        }
    }
    Ok(table)
}

/// All canonical labelings of a sorted part vector: labels sorted within
/// each block of equal parts.
pub fn slot_labelings(parts: &[u32], dim: usize) -> Vec<Vec<usize>> {
    let mut blocks = Vec::new();
    let mut start = 0;
    for i in 1..=parts.len() {
        if i == parts.len() || parts[i] != parts[start] {
            blocks.push(i - start);
            start = i;
        }
    }
    let mut out: Vec<Vec<usize>> = vec![Vec::new()];
    for size in blocks {
        let choices = nondecreasing_tuples(size, dim);
        let mut next = Vec::with_capacity(out.len() * choices.len());
        for base in &out {
            for choice in &choices {
                let mut labels = base.clone();
                labels.extend_from_slice(choice);
                next.push(labels);
            }
        }
        out = next;
    }
    out
}

fn nondecreasing_tuples(len: usize, dim: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(len);
    fn go(len: usize, dim: usize, min: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == len {
            out.push(current.clone());
            return;
        }
        for l in min..dim {
            current.push(l);
            go(len, dim, l, current, out);
            current.pop();
        }
    }
    go(len, dim, 0, &mut current, &mut out);
    out
}

/// S-matrix in the form I + R with the identity part symbolic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SMatrix {
    pub remainder: RelInvTable,
    pub includes_identity: bool,
}

impl SMatrix {
    /// The trivial S-matrix (pure identity, empty remainder).
    pub fn identity(generators: Vec<String>) -> Self {
        let remainder = RelInvTable::new(
            generators,
            vec![SlotRole::Contact, SlotRole::Contact],
            vec![None, None],
        )
        .expect("two contact slots are a valid shape");
        SMatrix {
            remainder,
            includes_identity: true,
        }
    }

    pub fn from_remainder(remainder: RelInvTable) -> Result<Self> {
        if remainder.roles() != [SlotRole::Contact, SlotRole::Contact] {
            return Err(Error::SlotConventionMismatch(
                "an S-matrix needs exactly two contact slots (incoming, outgoing)".into(),
            ));
        }
        Ok(SMatrix {
            remainder,
            includes_identity: true,
        })
    }

    pub fn is_identity(&self) -> bool {
        self.includes_identity && self.remainder.is_empty()
    }
}

/// Inverse of S = I + R as the alternating series
/// I - R + R*R - R*R*R + ..., truncated at the class-degree bound.
/// Requires every term of R to carry strictly positive class degree.
pub fn invert_smatrix(s: &SMatrix, basis: &BasisSpec, trunc: &Truncation) -> Result<SMatrix> {
    if !s.includes_identity {
        return Err(Error::NonNilpotentRemainder(
            "S-matrix lacks its identity part, the Neumann series does not apply".into(),
        ));
    }
    if let Some((key, _)) = s
        .remainder
        .entries()
        .find(|(k, _)| k.total_class_deg() == 0)
    {
        return Err(Error::NonNilpotentRemainder(format!(
            "remainder term with zero class degree (chi = {}) cannot be inverted by truncation",
            key.chi
        )));
    }
    let mut acc = s.remainder.scale(&-Rational::one());
    let mut power = s.remainder.clone();
    let mut sign = Rational::one();
    loop {
        power = contract(&power, &s.remainder, basis, trunc)?;
        if power.is_empty() {
            break;
        }
        acc = acc.add(&power.scale(&sign))?;
        sign = -sign;
    }
    Ok(SMatrix {
        remainder: acc,
        includes_identity: true,
    })
}

/// Composition of S-matrices: (Ia + Ra) * (Ib + Rb).
pub fn compose_smatrix(
    a: &SMatrix,
    b: &SMatrix,
    basis: &BasisSpec,
    trunc: &Truncation,
) -> Result<SMatrix> {
    let mut remainder = contract(&a.remainder, &b.remainder, basis, trunc)?;
    if b.includes_identity {
        remainder = remainder.add(&a.remainder)?;
    }
    if a.includes_identity {
        remainder = remainder.add(&b.remainder)?;
    }
    Ok(SMatrix {
        remainder,
        includes_identity: a.includes_identity && b.includes_identity,
    })
}

/// The numerical sum formula: T_X * S * T_Y with S supplied as-is
/// (pass the inverted S-matrix for a stretched neck, or the identity
/// for a trivial one). Expands to
/// contract(T_X, T_Y) + contract(contract(T_X, R), T_Y).
pub fn sum_formula(
    tx: &RelInvTable,
    s: &SMatrix,
    ty: &RelInvTable,
    basis: &BasisSpec,
    trunc: &Truncation,
) -> Result<RelInvTable> {
    let mut parts: Vec<RelInvTable> = Vec::new();
    if s.includes_identity {
        parts.push(contract(tx, ty, basis, trunc)?);
    }
    if !s.remainder.is_empty() {
        let through = contract(tx, &s.remainder, basis, trunc)?;
        parts.push(contract(&through, ty, basis, trunc)?);
    }
    let mut iter = parts.into_iter();
    match iter.next() {
        None => Err(Error::SlotConventionMismatch(
            "S-matrix with no identity and empty remainder annihilates everything".into(),
        )),
        Some(first) => iter.try_fold(first, |acc, p| acc.add(&p)),
    }
}

// ---------------------------------------------------------------------
// JSON schema
// ---------------------------------------------------------------------

/// Wire form of a basis.
#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct BasisJson {
    pub dim: usize,
    pub pairing: Vec<Vec<Rational>>,
    /// Optional homological degrees; odd degrees are rejected.
    #[serde(
        rename = "classDegrees",
        skip_serializing_if = "Option::is_none",
        default
    )]
    pub class_degrees: Option<Vec<u32>>,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct SlotJson {
    pub seq: Vec<u32>,
    pub labels: Vec<usize>,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct EntryJson {
    pub chi: i64,
    #[serde(rename = "classDeg")]
    pub class_deg: Vec<u32>,
    pub tag: String,
    pub slots: Vec<SlotJson>,
    pub value: Rational,
}

/// Wire form of a table. `slotRoles`, `vDegreeRules` and
/// `includesIdentity` are optional extensions: roles default to contact
/// slots (two slots read as incoming, outgoing), rules default to
/// unchecked, and `includesIdentity` only matters for S-matrix files.
#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct TableJson {
    pub basis: BasisJson,
    pub generators: Vec<String>,
    #[serde(rename = "slotRoles", skip_serializing_if = "Option::is_none", default)]
    pub slot_roles: Option<Vec<String>>,
    #[serde(
        rename = "vDegreeRules",
        skip_serializing_if = "Option::is_none",
        default
    )]
    pub v_degree_rules: Option<Vec<Option<Vec<i64>>>>,
    #[serde(
        rename = "includesIdentity",
        skip_serializing_if = "Option::is_none",
        default
    )]
    pub includes_identity: Option<bool>,
    pub entries: Vec<EntryJson>,
}

impl TableJson {
    pub fn from_table(basis: &BasisSpec, table: &RelInvTable) -> Self {
        let slot_roles = if table.roles().is_empty() {
            None
        } else {
            Some(
                table
                    .roles()
                    .iter()
                    .map(|r| {
                        match r {
                            SlotRole::Contact => "contact",
                            SlotRole::Spectator => "spectator",
                        }
                        .to_string()
                    })
                    .collect(),
            )
        };
        let v_degree_rules = if table.vdeg_rules().iter().all(Option::is_none) {
            None
        } else {
            Some(table.vdeg_rules().to_vec())
        };
        TableJson {
            basis: BasisJson {
                dim: basis.dim(),
                pairing: basis.pairing().clone(),
                class_degrees: None,
            },
            generators: table.generators().to_vec(),
            slot_roles,
            v_degree_rules,
            includes_identity: None,
            entries: table
                .entries()
                .map(|(k, v)| EntryJson {
                    chi: k.chi,
                    class_deg: k.class_deg.clone(),
                    tag: k.tag.clone(),
                    slots: k
                        .slots
                        .iter()
                        .map(|s| SlotJson {
                            seq: s.parts().to_vec(),
                            labels: s.labels().to_vec(),
                        })
                        .collect(),
                    value: v.clone(),
                })
                .collect(),
        }
    }

    /// Reconstructs the basis and table, validating the schema and every
    /// table invariant.
    pub fn into_table(self, trunc: &Truncation) -> Result<(BasisSpec, RelInvTable)> {
        if self.basis.pairing.len() != self.basis.dim {
            return Err(Error::InvalidInput(format!(
                "basis declares dim {} but the pairing has {} rows",
                self.basis.dim,
                self.basis.pairing.len()
            )));
        }
        let basis = match &self.basis.class_degrees {
            Some(degrees) => BasisSpec::with_degrees(self.basis.pairing.clone(), degrees)?,
            None => BasisSpec::new(self.basis.pairing.clone())?,
        };
        let arity = self
            .entries
            .first()
            .map(|e| e.slots.len())
            .unwrap_or_default();
        let roles = match &self.slot_roles {
            Some(names) => names
                .iter()
                .map(|n| match n.as_str() {
                    "contact" => Ok(SlotRole::Contact),
                    "spectator" => Ok(SlotRole::Spectator),
                    other => Err(Error::InvalidInput(format!("unknown slot role {other:?}"))),
                })
                .collect::<Result<Vec<_>>>()?,
            None => vec![SlotRole::Contact; arity],
        };
        let rules = match self.v_degree_rules {
            Some(rules) => rules,
            None => vec![None; roles.len()],
        };
        let mut table = RelInvTable::new(self.generators, roles, rules)?;
        for entry in self.entries {
            let slots = entry
                .slots
                .into_iter()
                .map(|s| ContactSlot::new(s.seq, s.labels))
                .collect::<Result<Vec<_>>>()?;
            let key = EntryKey {
                chi: entry.chi,
                class_deg: entry.class_deg,
                tag: entry.tag,
                slots,
            };
            table.insert(key, entry.value, trunc)?;
        }
        table.check_labels(&basis)?;
        Ok((basis, table))
    }
}

/// Deterministic pretty JSON for a table.
pub fn table_to_json_string(basis: &BasisSpec, table: &RelInvTable) -> String {
    serde_json::to_string_pretty(&TableJson::from_table(basis, table))
        .expect("table serialization cannot fail")
}

/// Parses a table from JSON text.
pub fn table_from_json_str(
    text: &str,
    trunc: &Truncation,
) -> Result<(BasisSpec, RelInvTable, bool)> {
    let json: TableJson = serde_json::from_str(text)
        .map_err(|e| Error::InvalidInput(format!("malformed table JSON: {e}")))?;
    let includes_identity = json.includes_identity.unwrap_or(true);
    let (basis, table) = json.into_table(trunc)?;
    Ok((basis, table, includes_identity))
}
