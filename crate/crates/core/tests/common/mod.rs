#![allow(dead_code)]

//! Shared generators for randomized integration tests.

use curvecount::contact::enum_sequences;
use curvecount::rational::Rational;
use curvecount::sumformula::{BasisSpec, ContactSlot, EntryKey, RelInvTable, SlotRole, Truncation};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn small_rational(rng: &mut ChaCha8Rng) -> Rational {
    loop {
        let n = rng.gen_range(-6i64..=6);
        if n != 0 {
            return Rational::new(n, rng.gen_range(1i64..=4));
        }
    }
}

pub fn random_basis(rng: &mut ChaCha8Rng, dim: usize) -> BasisSpec {
    loop {
        let pairing: Vec<Vec<Rational>> = (0..dim)
            .map(|_| {
                (0..dim)
                    .map(|_| Rational::from_int(rng.gen_range(-3i64..=3)))
                    .collect()
            })
            .collect();
        if let Ok(basis) = BasisSpec::new(pairing) {
            return basis;
        }
    }
}

pub fn generators() -> Vec<String> {
    vec!["a".to_string(), "b".to_string()]
}

pub fn wide_trunc() -> Truncation {
    Truncation::new(64, -64)
}

fn random_slot(rng: &mut ChaCha8Rng, dim: usize, max_deg: u32) -> ContactSlot {
    let deg = rng.gen_range(1..=max_deg);
    let seqs = enum_sequences(deg);
    let seq = &seqs[rng.gen_range(0..seqs.len())];
    let labels: Vec<usize> = (0..seq.len()).map(|_| rng.gen_range(0..dim)).collect();
    ContactSlot::new(seq.parts().to_vec(), labels).expect("well-formed slot")
}

/// Random table with one contact slot and up to `max_entries` entries.
pub fn random_contact_table(
    rng: &mut ChaCha8Rng,
    dim: usize,
    max_entries: usize,
    max_seq_deg: u32,
) -> RelInvTable {
    let mut t = RelInvTable::new(generators(), vec![SlotRole::Contact], vec![None])
        .expect("one contact slot is a valid shape");
    let entries = rng.gen_range(1..=max_entries);
    for _ in 0..entries {
        let key = EntryKey {
            chi: 2 * rng.gen_range(-2i64..=2),
            class_deg: vec![rng.gen_range(0..3u32), rng.gen_range(0..3u32)],
            tag: if rng.gen_bool(0.3) {
                "p".into()
            } else {
                String::new()
            },
            slots: vec![random_slot(rng, dim, max_seq_deg)],
        };
        t.insert(key, small_rational(rng), &wide_trunc())
            .expect("valid entry");
    }
    t
}

/// Independent contraction oracle: enumerates ordered contact data
/// directly. For every pair of entries it lists all distinct orderings of
/// each slot's (part, label) pairs, keeps only those sharing the same
/// ordered sequence, and accumulates ord(s)/l(s)! times the aligned
/// product of inverse-pairing entries. Tables must carry exactly one
/// contact slot each. Returns (chi, classDeg, tag) -> value.
pub fn oracle_contract(
    left: &RelInvTable,
    right: &RelInvTable,
    basis: &BasisSpec,
    trunc: &Truncation,
) -> std::collections::BTreeMap<(i64, Vec<u32>, String), Rational> {
    use std::collections::BTreeMap;
    let qinv = basis.inverse_pairing();
    let mut acc: BTreeMap<(i64, Vec<u32>, String), Rational> = BTreeMap::new();
    for (kl, vl) in left.entries() {
        let sl = &kl.slots[0];
        for (kr, vr) in right.entries() {
            let sr = &kr.slots[0];
            if sl.parts() != sr.parts() {
                continue;
            }
            let len = sl.len() as u64;
            let ord: i64 = sl.parts().iter().map(|&p| p as i64).product();
            let weight = Rational::new(ord, curvecount::rational::factorial(len));
            for lrep in orderings(sl) {
                for rrep in orderings(sr) {
                    if lrep.iter().map(|p| p.0).ne(rrep.iter().map(|p| p.0)) {
                        continue;
                    }
                    let mut dual = Rational::one();
                    for (lp, rp) in lrep.iter().zip(&rrep) {
                        dual *= &qinv[lp.1][rp.1];
                    }
                    if dual.is_zero() {
                        continue;
                    }
                    let chi = kl.chi + kr.chi - 2 * sl.len() as i64;
                    let class: Vec<u32> = kl
                        .class_deg
                        .iter()
                        .zip(&kr.class_deg)
                        .map(|(&a, &b)| a + b)
                        .collect();
                    let total: u64 = class.iter().map(|&c| c as u64).sum();
                    if total > trunc.max_class_deg as u64 || chi < trunc.min_chi {
                        continue;
                    }
                    let tag = match (kl.tag.is_empty(), kr.tag.is_empty()) {
                        (true, _) => kr.tag.clone(),
                        (_, true) => kl.tag.clone(),
                        _ => format!("{}|{}", kl.tag, kr.tag),
                    };
                    let term = &(vl * &weight) * &(&dual * vr);
                    *acc.entry((chi, class, tag)).or_insert_with(Rational::zero) += &term;
                }
            }
        }
    }
    acc.retain(|_, v| !v.is_zero());
    acc
}

/// All distinct orderings of a slot's (part, label) pair multiset.
fn orderings(slot: &ContactSlot) -> Vec<Vec<(u32, usize)>> {
    let pairs: Vec<(u32, usize)> = slot
        .parts()
        .iter()
        .copied()
        .zip(slot.labels().iter().copied())
        .collect();
    let mut out = std::collections::BTreeSet::new();
    let mut current = Vec::with_capacity(pairs.len());
    let mut used = vec![false; pairs.len()];
    fn go(
        pairs: &[(u32, usize)],
        used: &mut Vec<bool>,
        current: &mut Vec<(u32, usize)>,
        out: &mut std::collections::BTreeSet<Vec<(u32, usize)>>,
    ) {
        if current.len() == pairs.len() {
            out.insert(current.clone());
            return;
        }
        for i in 0..pairs.len() {
            if used[i] {
                continue;
            }
            used[i] = true;
            current.push(pairs[i]);
            go(pairs, used, current, out);
            current.pop();
            used[i] = false;
        }
    }
    go(&pairs, &mut used, &mut current, &mut out);
    out.into_iter().collect()
}

/// Flattens an engine table with no slots into the oracle's key space.
pub fn flatten_slotless(
    table: &RelInvTable,
) -> std::collections::BTreeMap<(i64, Vec<u32>, String), Rational> {
    table
        .entries()
        .map(|(k, v)| {
            assert!(k.slots.is_empty(), "expected a fully contracted table");
            ((k.chi, k.class_deg.clone(), k.tag.clone()), v.clone())
        })
        .collect()
}

/// Random two-slot S-matrix remainder whose entries all carry strictly
/// positive class degree (nilpotent under truncation).
pub fn random_smatrix_remainder(
    rng: &mut ChaCha8Rng,
    dim: usize,
    max_entries: usize,
) -> RelInvTable {
    let mut t = RelInvTable::new(
        generators(),
        vec![SlotRole::Contact, SlotRole::Contact],
        vec![None, None],
    )
    .expect("two contact slots are a valid shape");
    let entries = rng.gen_range(1..=max_entries);
    for _ in 0..entries {
        let key = EntryKey {
            chi: 2 * rng.gen_range(0i64..=2),
            class_deg: vec![rng.gen_range(1..=2u32), rng.gen_range(0..2u32)],
            tag: String::new(),
            slots: vec![random_slot(rng, dim, 2), random_slot(rng, dim, 2)],
        };
        t.insert(key, small_rational(rng), &wide_trunc())
            .expect("valid entry");
    }
    t
}
