//! Convolution engine against independently coded references: the
//! ordered-data triple loop, associativity of iterated contraction, and
//! spectator slot pass-through.

mod common;

use rand::Rng;

use curvecount::rational::Rational;
use curvecount::sumformula::{
    contract, sum_formula, BasisSpec, ContactSlot, EntryKey, RelInvTable, SMatrix, SlotRole,
    Truncation,
};

fn rat(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

#[test]
fn two_entry_synthetic_tables_match_the_triple_loop() {
    let basis = BasisSpec::point();
    let trunc = common::wide_trunc();
    let mut tx =
        RelInvTable::new(common::generators(), vec![SlotRole::Contact], vec![None]).unwrap();
    let mut ty =
        RelInvTable::new(common::generators(), vec![SlotRole::Contact], vec![None]).unwrap();
    for (chi, class, parts, value) in [
        (2i64, vec![1u32, 0], vec![1u32], rat(3, 2)),
        (0, vec![2, 0], vec![1, 1], rat(-5, 3)),
    ] {
        tx.insert(
            EntryKey {
                chi,
                class_deg: class,
                tag: String::new(),
                slots: vec![ContactSlot::new(parts.clone(), vec![0; parts.len()]).unwrap()],
            },
            value,
            &trunc,
        )
        .unwrap();
    }
    for (chi, class, parts, value) in [
        (2i64, vec![0u32, 1], vec![1u32], rat(7, 1)),
        (2, vec![0, 2], vec![1, 1], rat(1, 4)),
    ] {
        ty.insert(
            EntryKey {
                chi,
                class_deg: class,
                tag: String::new(),
                slots: vec![ContactSlot::new(parts.clone(), vec![0; parts.len()]).unwrap()],
            },
            value,
            &trunc,
        )
        .unwrap();
    }
    let engine = contract(&tx, &ty, &basis, &trunc).unwrap();
    let oracle = common::oracle_contract(&tx, &ty, &basis, &trunc);
    assert_eq!(common::flatten_slotless(&engine), oracle);
    // the s=(1,1) cell pairs with weight 1/2: (-5/3)(1/4)(1/2) = -5/24
    let key = EntryKey {
        chi: -2,
        class_deg: vec![2, 2],
        tag: String::new(),
        slots: vec![],
    };
    assert_eq!(engine.value(&key), rat(-5, 24));
}

#[test]
fn oracle_agreement_with_multilabel_ties() {
    let mut rng = common::rng(0x0ac1e);
    for case in 0..200 {
        let dim = rng.gen_range(2..=3);
        let basis = common::random_basis(&mut rng, dim);
        let tx = common::random_contact_table(&mut rng, dim, 8, 4);
        let ty = common::random_contact_table(&mut rng, dim, 8, 4);
        let engine = contract(&tx, &ty, &basis, &common::wide_trunc()).unwrap();
        let oracle = common::oracle_contract(&tx, &ty, &basis, &common::wide_trunc());
        assert_eq!(
            common::flatten_slotless(&engine),
            oracle,
            "disagreement at case {case}"
        );
    }
}

#[test]
fn iterated_contraction_is_associative() {
    let mut rng = common::rng(0xa550c);
    let trunc = common::wide_trunc();
    for case in 0..100 {
        let dim = rng.gen_range(1..=3);
        let basis = common::random_basis(&mut rng, dim);
        let a = common::random_contact_table(&mut rng, dim, 4, 2);
        let m = common::random_smatrix_remainder(&mut rng, dim, 4);
        let b = common::random_contact_table(&mut rng, dim, 4, 2);
        let left = contract(
            &contract(&a, &m, &basis, &trunc).unwrap(),
            &b,
            &basis,
            &trunc,
        )
        .unwrap();
        let right = contract(
            &a,
            &contract(&m, &b, &basis, &trunc).unwrap(),
            &basis,
            &trunc,
        )
        .unwrap();
        assert_eq!(left, right, "associativity failed at case {case}");
    }
}

#[test]
fn sum_formula_with_identity_equals_iterated_contract() {
    let mut rng = common::rng(0x5f0);
    let trunc = common::wide_trunc();
    for case in 0..100 {
        let dim = rng.gen_range(1..=3);
        let basis = common::random_basis(&mut rng, dim);
        let tx = common::random_contact_table(&mut rng, dim, 5, 3);
        let ty = common::random_contact_table(&mut rng, dim, 5, 3);
        let s = SMatrix::identity(common::generators());
        let via_sum = sum_formula(&tx, &s, &ty, &basis, &trunc).unwrap();
        let direct = contract(&tx, &ty, &basis, &trunc).unwrap();
        assert_eq!(via_sum, direct, "trivial-S sum formula at case {case}");
    }
}

#[test]
fn sum_formula_with_remainder_expands_both_terms() {
    let mut rng = common::rng(0xbead);
    let trunc = Truncation::new(6, -64);
    for case in 0..50 {
        let dim = rng.gen_range(1..=3);
        let basis = common::random_basis(&mut rng, dim);
        let tx = common::random_contact_table(&mut rng, dim, 4, 2);
        let ty = common::random_contact_table(&mut rng, dim, 4, 2);
        let s =
            SMatrix::from_remainder(common::random_smatrix_remainder(&mut rng, dim, 3)).unwrap();
        let via_sum = sum_formula(&tx, &s, &ty, &basis, &trunc).unwrap();
        let direct = contract(&tx, &ty, &basis, &trunc).unwrap();
        let through = contract(
            &contract(&tx, &s.remainder, &basis, &trunc).unwrap(),
            &ty,
            &basis,
            &trunc,
        )
        .unwrap();
        assert_eq!(
            via_sum,
            direct.add(&through).unwrap(),
            "sum formula decomposition at case {case}"
        );
    }
}

#[test]
fn spectator_slots_pass_through_untouched() {
    let basis = BasisSpec::point();
    let trunc = common::wide_trunc();
    // left table: [spectator, contact]
    let mut tx = RelInvTable::new(
        common::generators(),
        vec![SlotRole::Spectator, SlotRole::Contact],
        vec![None, None],
    )
    .unwrap();
    let spectator = ContactSlot::new(vec![3], vec![0]).unwrap();
    tx.insert(
        EntryKey {
            chi: 2,
            class_deg: vec![1, 0],
            tag: String::new(),
            slots: vec![
                spectator.clone(),
                ContactSlot::new(vec![2], vec![0]).unwrap(),
            ],
        },
        rat(5, 1),
        &trunc,
    )
    .unwrap();
    let mut ty =
        RelInvTable::new(common::generators(), vec![SlotRole::Contact], vec![None]).unwrap();
    ty.insert(
        EntryKey {
            chi: 2,
            class_deg: vec![0, 1],
            tag: String::new(),
            slots: vec![ContactSlot::new(vec![2], vec![0]).unwrap()],
        },
        rat(1, 1),
        &trunc,
    )
    .unwrap();
    let out = contract(&tx, &ty, &basis, &trunc).unwrap();
    assert_eq!(out.roles(), &[SlotRole::Spectator]);
    assert_eq!(out.num_entries(), 1);
    let (key, value) = out.entries().next().unwrap();
    assert_eq!(key.slots, vec![spectator]);
    assert_eq!(key.chi, 2);
    // s = (2) pairs with weight 2: 5 * 2 * 1
    assert_eq!(*value, rat(10, 1));
}

#[test]
fn contract_applies_truncation_bounds() {
    let basis = BasisSpec::point();
    let tight = Truncation::new(2, 0);
    let mut tx =
        RelInvTable::new(common::generators(), vec![SlotRole::Contact], vec![None]).unwrap();
    tx.insert(
        EntryKey {
            chi: 2,
            class_deg: vec![1, 1],
            tag: String::new(),
            slots: vec![ContactSlot::new(vec![1, 1], vec![0, 0]).unwrap()],
        },
        rat(1, 1),
        &tight,
    )
    .unwrap();
    let ty = tx.clone();
    // class degree 4 exceeds the bound, chi = 0 stays within it
    let out = contract(&tx, &ty, &basis, &tight).unwrap();
    assert!(out.is_empty());
    // with a wider class bound the chi floor bites instead
    let chi_floor = Truncation::new(8, 2);
    let out = contract(&tx, &ty, &basis, &chi_floor).unwrap();
    assert!(out.is_empty());
    let wide = Truncation::new(8, -8);
    let out = contract(&tx, &ty, &basis, &wide).unwrap();
    assert_eq!(out.num_entries(), 1);
}
