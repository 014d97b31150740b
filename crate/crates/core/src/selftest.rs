//! The self-test harness behind `curvecount selftest`.
//!
//! Every module's stated invariants are exercised here with deterministic
//! pseudo-random data, one named check per property. The CLI prints one
//! line per check and exits nonzero on the first failure.

use num_bigint::BigInt;

use crate::contact::{enum_sequences, enum_splits, multi_binom, ContactMultiIndex};
use crate::elliptic::EllipticRun;
use crate::rational::Rational;
use crate::series::{GradedMonomial, TruncatedSeries};
use crate::severi::{kontsevich, SeveriKey, SeveriTable};
use crate::sumformula::{
    compose_smatrix, contract, identity_table, invert_smatrix, BasisSpec, ContactSlot, EntryKey,
    RelInvTable, SMatrix, SlotRole, Truncation,
};

pub struct CheckResult {
    pub name: &'static str,
    pub outcome: Result<(), String>,
}

type Check = fn() -> Result<(), String>;

/// Runs the complete invariant suite.
pub fn run_all() -> Vec<CheckResult> {
    let checks: Vec<(&'static str, Check)> = vec![
        ("series: ring axioms", series_ring_axioms),
        ("series: exp is a homomorphism", series_exp_homomorphism),
        ("series: log/exp roundtrip", series_log_exp_roundtrip),
        ("series: truncation coherence", series_truncation_coherence),
        (
            "contact: partition counts match brute force",
            contact_partition_counts,
        ),
        ("contact: binomial identities", contact_binom_identities),
        (
            "contact: split postconditions",
            contact_split_postconditions,
        ),
        (
            "severi: recursion reproduces pinned values",
            severi_pinned_values,
        ),
        (
            "severi: irreducible counts match the Kontsevich oracle",
            severi_oracle_agreement,
        ),
        ("severi: memo determinism", severi_memo_determinism),
        (
            "sumformula: dual pairing is a Kronecker delta",
            sumformula_duality,
        ),
        ("sumformula: identity law", sumformula_identity_law),
        ("sumformula: S-matrix inverse", sumformula_smatrix_inverse),
        ("elliptic: ODE residual vanishes", elliptic_ode_residual),
        (
            "elliptic: product form equals ODE solution",
            elliptic_product_vs_ode,
        ),
        ("elliptic: TRR equals fiber-sum", elliptic_trr_vs_sum),
        (
            "elliptic: coefficients are positive integers",
            elliptic_integrality,
        ),
    ];
    checks
        .into_iter()
        .map(|(name, f)| CheckResult { name, outcome: f() })
        .collect()
}

// SplitMix64: small deterministic generator, good enough for test data.
struct Rng(u64);

impl Rng {
    fn new(seed: u64) -> Self {
        Rng(seed)
    }

    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    fn below(&mut self, n: u64) -> u64 {
        self.next() % n
    }

    fn int(&mut self, lo: i64, hi: i64) -> i64 {
        lo + self.below((hi - lo + 1) as u64) as i64
    }

    fn nonzero_rational(&mut self) -> Rational {
        loop {
            let n = self.int(-5, 5);
            if n != 0 {
                return Rational::new(n, self.int(1, 3));
            }
        }
    }
}

fn random_series(rng: &mut Rng, trunc: u32, positive_grading: bool) -> TruncatedSeries {
    let terms = rng.below(4) + 1;
    let mut out = TruncatedSeries::zero(trunc);
    for _ in 0..terms {
        let fiber = rng.below(3) as u32;
        let section = rng.below(2) as u32;
        if positive_grading && fiber + section == 0 {
            continue;
        }
        let m = GradedMonomial {
            fiber_deg: fiber,
            section_pow: section,
            lambda_pow: rng.int(-2, 2) as i32,
            point_pow: rng.below(3) as u32,
        };
        out = out.add(&TruncatedSeries::monomial(m, rng.nonzero_rational(), trunc));
    }
    out
}

fn fail(msg: impl Into<String>) -> Result<(), String> {
    Err(msg.into())
}

fn series_ring_axioms() -> Result<(), String> {
    let mut rng = Rng::new(0x5e11);
    for case in 0..400 {
        let a = random_series(&mut rng, 4, false);
        let b = random_series(&mut rng, 4, false);
        let c = random_series(&mut rng, 4, false);
        if a.add(&b).add(&c) != a.add(&b.add(&c)) {
            return fail(format!("additive associativity failed at case {case}"));
        }
        if a.mul(&b) != b.mul(&a) {
            return fail(format!("commutativity failed at case {case}"));
        }
        if a.mul(&b).mul(&c) != a.mul(&b.mul(&c)) {
            return fail(format!(
                "multiplicative associativity failed at case {case}"
            ));
        }
        if a.mul(&b.add(&c)) != a.mul(&b).add(&a.mul(&c)) {
            return fail(format!("distributivity failed at case {case}"));
        }
    }
    Ok(())
}

fn series_exp_homomorphism() -> Result<(), String> {
    let mut rng = Rng::new(0xe4b);
    for case in 0..300 {
        let a = random_series(&mut rng, 4, true);
        let b = random_series(&mut rng, 4, true);
        let lhs = a.add(&b).exp().map_err(|e| e.to_string())?;
        let rhs = a
            .exp()
            .map_err(|e| e.to_string())?
            .mul(&b.exp().map_err(|e| e.to_string())?);
        if lhs != rhs {
            return fail(format!("exp(a+b) != exp(a)exp(b) at case {case}"));
        }
    }
    Ok(())
}

fn series_log_exp_roundtrip() -> Result<(), String> {
    let mut rng = Rng::new(0x10c);
    for case in 0..300 {
        let a = random_series(&mut rng, 4, true);
        let back = a
            .exp()
            .map_err(|e| e.to_string())?
            .log()
            .map_err(|e| e.to_string())?;
        if back != a {
            return fail(format!("log(exp(a)) != a at case {case}"));
        }
        let u = TruncatedSeries::one(4).add(&a);
        let forth = u
            .log()
            .map_err(|e| e.to_string())?
            .exp()
            .map_err(|e| e.to_string())?;
        if forth != u {
            return fail(format!("exp(log(1+a)) != 1+a at case {case}"));
        }
    }
    Ok(())
}

fn series_truncation_coherence() -> Result<(), String> {
    let mut rng = Rng::new(0x7c0);
    for case in 0..300 {
        let a = random_series(&mut rng, 5, false);
        let b = random_series(&mut rng, 5, false);
        let m = rng.below(5) as u32;
        if a.mul(&b).truncate(m) != a.truncate(m).mul(&b.truncate(m)) {
            return fail(format!(
                "product truncation coherence failed at case {case}"
            ));
        }
        let p = random_series(&mut rng, 5, true);
        let full = p.exp().map_err(|e| e.to_string())?.truncate(m);
        let cut = p.truncate(m).exp().map_err(|e| e.to_string())?;
        if full != cut {
            return fail(format!("exp truncation coherence failed at case {case}"));
        }
    }
    Ok(())
}

fn contact_partition_counts() -> Result<(), String> {
    // coin-style DP, independent of the recursive enumerator
    let mut table = [0u64; 21];
    table[0] = 1;
    for part in 1..=20usize {
        for total in part..=20 {
            table[total] += table[total - part];
        }
    }
    for n in 0..=20u32 {
        let got = enum_sequences(n).len() as u64;
        if got != table[n as usize] {
            return fail(format!(
                "p({n}) = {} but enumeration found {got}",
                table[n as usize]
            ));
        }
    }
    Ok(())
}

fn contact_binom_identities() -> Result<(), String> {
    let mut rng = Rng::new(0xb1);
    for case in 0..500 {
        let mut pairs = Vec::new();
        for k in 1..=4u32 {
            let c = rng.below(4) as u32;
            if c > 0 {
                pairs.push((k, c));
            }
        }
        let alpha = ContactMultiIndex::from_pairs(&pairs, None).map_err(|e| e.to_string())?;
        if multi_binom(&alpha, &ContactMultiIndex::zero()) != BigInt::from(1) {
            return fail(format!("binom(alpha, 0) != 1 at case {case}"));
        }
        if multi_binom(&alpha, &alpha) != BigInt::from(1) {
            return fail(format!("binom(alpha, alpha) != 1 at case {case}"));
        }
        // multiplicativity over disjoint supports
        let shifted: Vec<(u32, u32)> = pairs.iter().map(|&(k, c)| (k + 10, c)).collect();
        let beta = ContactMultiIndex::from_pairs(&shifted, None).map_err(|e| e.to_string())?;
        let sub_a = ContactMultiIndex::from_pairs(
            &pairs
                .iter()
                .map(|&(k, c)| (k, rng.below(c as u64 + 1) as u32))
                .collect::<Vec<_>>(),
            None,
        )
        .map_err(|e| e.to_string())?;
        let sub_b = ContactMultiIndex::from_pairs(
            &shifted
                .iter()
                .map(|&(k, c)| (k, rng.below(c as u64 + 1) as u32))
                .collect::<Vec<_>>(),
            None,
        )
        .map_err(|e| e.to_string())?;
        let lhs = multi_binom(&alpha.add(&beta), &sub_a.add(&sub_b));
        let rhs = multi_binom(&alpha, &sub_a) * multi_binom(&beta, &sub_b);
        if lhs != rhs {
            return fail(format!("binom multiplicativity failed at case {case}"));
        }
    }
    Ok(())
}

fn contact_split_postconditions() -> Result<(), String> {
    let mut rng = Rng::new(0x59);
    for case in 0..200 {
        let d = rng.int(1, 6) as u32;
        // random split of d into I(alpha) + I(beta)
        let ia = rng.below(d as u64 + 1) as u32;
        let alpha_part = &enum_sequences(ia)[..];
        let alpha = ContactMultiIndex::from_sequence(
            &alpha_part[rng.below(alpha_part.len() as u64) as usize],
        );
        let beta_part = &enum_sequences(d - ia)[..];
        let beta = ContactMultiIndex::from_sequence(
            &beta_part[rng.below(beta_part.len() as u64) as usize],
        );
        for (a2, b2) in enum_splits(d, &alpha, &beta).map_err(|e| e.to_string())? {
            if !a2.le(&alpha) || !beta.le(&b2) {
                return fail(format!("split bounds violated at case {case}"));
            }
            if a2.total_order() + b2.total_order() != d as u64 - 1 {
                return fail(format!("split total order violated at case {case}"));
            }
        }
    }
    Ok(())
}

fn severi_pinned_values() -> Result<(), String> {
    let table = SeveriTable::new();
    let expect = |d: u32, delta: u32, want: i64| -> Result<(), String> {
        let key = SeveriKey::transverse(d, delta).map_err(|e| e.to_string())?;
        let got = table.severi(&key).map_err(|e| e.to_string())?;
        if got != BigInt::from(want) {
            return fail(format!("N^({d},{delta}) = {got}, expected {want}"));
        }
        Ok(())
    };
    for d in 1..=4 {
        expect(d, 0, 1)?;
    }
    expect(2, 1, 3)?;
    expect(3, 1, 12)?;
    expect(4, 3, 675)?;
    Ok(())
}

fn severi_oracle_agreement() -> Result<(), String> {
    let table = SeveriTable::new();
    for d in 1..=5u32 {
        let delta = ((d as i64 - 1) * (d as i64 - 2) / 2) as u32;
        let connected = table
            .connected_from_severi(d, delta)
            .map_err(|e| e.to_string())?;
        let oracle = kontsevich(d);
        if connected != oracle {
            return fail(format!(
                "connected count {connected} != Kontsevich {oracle} at d={d}"
            ));
        }
    }
    Ok(())
}

fn severi_memo_determinism() -> Result<(), String> {
    let key = SeveriKey::transverse(4, 3).map_err(|e| e.to_string())?;
    let a = SeveriTable::new().severi(&key).map_err(|e| e.to_string())?;
    let b = SeveriTable::new().severi(&key).map_err(|e| e.to_string())?;
    if a != b {
        return fail(format!("cold-cache recomputation differs: {a} vs {b}"));
    }
    Ok(())
}

fn random_pairing(rng: &mut Rng, dim: usize) -> BasisSpec {
    loop {
        let pairing: Vec<Vec<Rational>> = (0..dim)
            .map(|_| {
                (0..dim)
                    .map(|_| Rational::from_int(rng.int(-3, 3)))
                    .collect()
            })
            .collect();
        if let Ok(basis) = BasisSpec::new(pairing) {
            return basis;
        }
    }
}

fn sumformula_duality() -> Result<(), String> {
    let mut rng = Rng::new(0xd0a1);
    for case in 0..200 {
        let dim = rng.int(1, 4) as usize;
        let basis = random_pairing(&mut rng, dim);
        for i in 0..dim {
            for j in 0..dim {
                let mut sum = Rational::zero();
                for k in 0..dim {
                    sum += &(&basis.pairing()[i][k] * &basis.inverse_pairing()[k][j]);
                }
                let expect = if i == j {
                    Rational::one()
                } else {
                    Rational::zero()
                };
                if sum != expect {
                    return fail(format!("pairing * inverse != delta at case {case}"));
                }
            }
        }
    }
    Ok(())
}

fn random_contact_table(rng: &mut Rng, dim: usize, generators: &[String]) -> RelInvTable {
    let trunc = Truncation::new(64, -64);
    let mut t = RelInvTable::new(generators.to_vec(), vec![SlotRole::Contact], vec![None])
        .expect("one contact slot is a valid shape");
    let entries = rng.int(1, 4);
    for _ in 0..entries {
        let deg = rng.int(1, 3) as u32;
        let seqs = enum_sequences(deg);
        let seq = &seqs[rng.below(seqs.len() as u64) as usize];
        let labels: Vec<usize> = (0..seq.len())
            .map(|_| rng.below(dim as u64) as usize)
            .collect();
        let slot = ContactSlot::new(seq.parts().to_vec(), labels).expect("well-formed slot");
        let key = EntryKey {
            chi: 2 * rng.int(-2, 2),
            class_deg: vec![rng.below(3) as u32, rng.below(3) as u32],
            tag: String::new(),
            slots: vec![slot],
        };
        t.insert(key, rng.nonzero_rational(), &trunc)
            .expect("valid entry");
    }
    t
}

fn sumformula_identity_law() -> Result<(), String> {
    let mut rng = Rng::new(0x1de);
    let generators = vec!["a".to_string(), "b".to_string()];
    let trunc = Truncation::new(64, -64);
    for case in 0..60 {
        let dim = rng.int(1, 3) as usize;
        let basis = random_pairing(&mut rng, dim);
        let id = identity_table(&basis, generators.clone(), 3).map_err(|e| e.to_string())?;
        let t = random_contact_table(&mut rng, dim, &generators);
        let left = contract(&id, &t, &basis, &trunc).map_err(|e| e.to_string())?;
        if left != t {
            return fail(format!("I * T != T at case {case} (dim {dim})"));
        }
        let right = contract(&t, &id, &basis, &trunc).map_err(|e| e.to_string())?;
        if right != t {
            return fail(format!("T * I != T at case {case} (dim {dim})"));
        }
    }
    Ok(())
}

fn random_smatrix_remainder(rng: &mut Rng, dim: usize, generators: &[String]) -> RelInvTable {
    let trunc = Truncation::new(64, -64);
    let mut t = RelInvTable::new(
        generators.to_vec(),
        vec![SlotRole::Contact, SlotRole::Contact],
        vec![None, None],
    )
    .expect("two contact slots are a valid shape");
    let entries = rng.int(1, 3);
    for _ in 0..entries {
        let mut slots = Vec::new();
        for _ in 0..2 {
            let deg = rng.int(1, 2) as u32;
            let seqs = enum_sequences(deg);
            let seq = &seqs[rng.below(seqs.len() as u64) as usize];
            let labels: Vec<usize> = (0..seq.len())
                .map(|_| rng.below(dim as u64) as usize)
                .collect();
            slots.push(ContactSlot::new(seq.parts().to_vec(), labels).expect("well-formed slot"));
        }
        let key = EntryKey {
            chi: 2 * rng.int(0, 2),
            // strictly positive class degree keeps the remainder nilpotent
            class_deg: vec![1 + rng.below(2) as u32, rng.below(2) as u32],
            tag: String::new(),
            slots,
        };
        t.insert(key, rng.nonzero_rational(), &trunc)
            .expect("valid entry");
    }
    t
}

fn sumformula_smatrix_inverse() -> Result<(), String> {
    let mut rng = Rng::new(0x5a5a);
    let generators = vec!["a".to_string(), "b".to_string()];
    let trunc = Truncation::new(5, -64);
    for case in 0..40 {
        let dim = rng.int(1, 3) as usize;
        let basis = random_pairing(&mut rng, dim);
        let s = SMatrix::from_remainder(random_smatrix_remainder(&mut rng, dim, &generators))
            .map_err(|e| e.to_string())?;
        let inv = invert_smatrix(&s, &basis, &trunc).map_err(|e| e.to_string())?;
        let left = compose_smatrix(&inv, &s, &basis, &trunc).map_err(|e| e.to_string())?;
        let right = compose_smatrix(&s, &inv, &basis, &trunc).map_err(|e| e.to_string())?;
        if !left.is_identity() || !right.is_identity() {
            return fail(format!("S * S^-1 != I at case {case}"));
        }
    }
    Ok(())
}

fn elliptic_ode_residual() -> Result<(), String> {
    let run = EllipticRun::compute(32);
    if !run.ode_residual_is_zero() {
        return fail("t F0' - 12 G F0 != 0");
    }
    Ok(())
}

fn elliptic_product_vs_ode() -> Result<(), String> {
    let run = EllipticRun::compute(32);
    if !run.f0_consistent() {
        return fail("product form differs from the ODE solution");
    }
    Ok(())
}

fn elliptic_trr_vs_sum() -> Result<(), String> {
    let run = EllipticRun::compute(32);
    if !run.h_consistent() {
        return fail("TRR and fiber-sum H differ");
    }
    Ok(())
}

fn elliptic_integrality() -> Result<(), String> {
    let run = EllipticRun::compute(32);
    for d in 0..=32 {
        let a = run.f0_coeff(d);
        if !a.is_integer() || a.is_negative() || a.is_zero() {
            return fail(format!("a_{d} = {a} is not a positive integer"));
        }
    }
    Ok(())
}
