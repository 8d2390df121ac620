//! The labeled counting track: LF(G) — the number of one-factorizations —
//! for every isomorphism class of k-regular one-factorizable graph on n
//! vertices, computed level by level.
//!
//! Level k holds one record per class of graphs expressible as a union of k
//! disjoint one-factors. Forward accumulation pushes each level-(k−1) class H
//! into every extension H∪F (F a one-factor of H's complement): summed over
//! the class of G, the weighted contributions total k·LF(G), because a
//! factorization of G is reached once per ordered choice of its k factors
//! divided out by automorphisms. To keep every intermediate value an exact
//! integer, accumulators carry the n!-scaled sum Σ (n!/|Aut H|)·LF(H); the
//! finalize pass multiplies by |Aut G|/n! and divides by k, asserting both
//! divisions are exact.
//!
//! Two independent verifiers cross-check finished levels: a recursion that
//! recomputes LF(G) as Σ LF(G−F) over the one-factors F through a fixed edge
//! of G, and a meet-in-the-middle identity recovering LF(K_n) from any single
//! level k by pairing each class with its complement:
//!
//! ```text
//! LF(K_n) · C(n−1, k) = Σ_[G] (n!/|Aut G|) · LF(G) · LF(Ḡ)
//! ```
//!
//! equal for every k — an n-way consistency check.

use crate::canon::Canonizer;
use crate::graphcore::DenseGraph;
use crate::{factorial, BigCount};
use num_traits::Zero;
use rayon::prelude::*;
use std::sync::Mutex;

const SHARDS: usize = 32;

// ============================================================================
// ClassRecord / LevelStore
// ============================================================================

/// One isomorphism class at a level: its canonical form, the accumulator
/// (k·LF during accumulation, LF once finalized), and the cached
/// automorphism-group order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassRecord {
    /// 16-byte canonical bitmap from the canon module.
    pub canonical_form: [u8; 16],
    /// n!-scaled sum during accumulation; LF(G) once the level is finalized.
    pub accumulator: BigCount,
    /// |Aut(G)|, filled in by the finalize pass (zero until then).
    pub aut_order: BigCount,
}

struct Shard {
    slots: Vec<Option<ClassRecord>>,
    len: usize,
}

impl Shard {
    fn new() -> Self {
        Shard {
            slots: vec![None; 64],
            len: 0,
        }
    }

    fn probe(&self, form: &[u8; 16], hash: u32) -> usize {
        let mask = self.slots.len() - 1;
        let mut i = hash as usize & mask;
        loop {
            match &self.slots[i] {
                None => return i,
                Some(rec) if &rec.canonical_form == form => return i,
                _ => i = (i + 1) & mask,
            }
        }
    }

    fn grow(&mut self) {
        let bigger = self.slots.len() * 2;
        let old = std::mem::replace(&mut self.slots, vec![None; bigger]);
        let mask = bigger - 1;
        for rec in old.into_iter().flatten() {
            let mut i = form_hash(&rec.canonical_form) as usize & mask;
            while self.slots[i].is_some() {
                i = (i + 1) & mask;
            }
            self.slots[i] = Some(rec);
        }
    }

    fn add(&mut self, form: [u8; 16], hash: u32, delta: &BigCount) {
        if self.len * 10 >= self.slots.len() * 7 {
            self.grow();
        }
        let i = self.probe(&form, hash);
        match &mut self.slots[i] {
            Some(rec) => rec.accumulator += delta,
            slot @ None => {
                *slot = Some(ClassRecord {
                    canonical_form: form,
                    accumulator: delta.clone(),
                    aut_order: BigCount::zero(),
                });
                self.len += 1;
            }
        }
    }
}

/// 4-byte FNV-1a hash of a 16-byte canonical form.
fn form_hash(form: &[u8; 16]) -> u32 {
    let mut h = 0x811c9dc5u32;
    for &b in form {
        h ^= b as u32;
        h = h.wrapping_mul(0x01000193);
    }
    h
}

/// All class records of one level: an open-addressing hash table keyed by
/// canonical form, sharded for concurrent accumulation.
pub struct LevelStore {
    n: u8,
    k: u8,
    finalized: bool,
    shards: Vec<Mutex<Shard>>,
}

impl LevelStore {
    /// An empty, unfinalized store for level `k`.
    pub fn new(n: usize, k: usize) -> Self {
        assert!(n % 2 == 0 && n >= 2 && n <= 14, "n must be even, 2..=14");
        assert!(k < n, "regularity degree must be below n");
        LevelStore {
            n: n as u8,
            k: k as u8,
            finalized: false,
            shards: (0..SHARDS).map(|_| Mutex::new(Shard::new())).collect(),
        }
    }

    /// The finalized level 0: the empty graph, LF = 1 (the empty partition).
    pub fn base(n: usize) -> Self {
        let store = LevelStore::new(n, 0);
        let form = crate::canon::canonical_form_dense(&DenseGraph::empty(n));
        store.add(form, &BigCount::from(1u32));
        {
            let mut shard = store.shards[Self::shard_of(&form)].lock().unwrap();
            let i = shard.probe(&form, form_hash(&form));
            shard.slots[i].as_mut().unwrap().aut_order = factorial(n as u64);
        }
        LevelStore {
            finalized: true,
            ..store
        }
    }

    /// Rebuilds a finalized store from records (e.g. loaded from a level file).
    pub fn from_records(n: usize, k: usize, records: Vec<ClassRecord>) -> Self {
        let store = LevelStore::new(n, k);
        for rec in records {
            let hash = form_hash(&rec.canonical_form);
            let mut shard = store.shards[Self::shard_of(&rec.canonical_form)].lock().unwrap();
            if shard.len * 10 >= shard.slots.len() * 7 {
                shard.grow();
            }
            let i = shard.probe(&rec.canonical_form, hash);
            assert!(shard.slots[i].is_none(), "duplicate canonical form");
            shard.slots[i] = Some(rec);
            shard.len += 1;
        }
        LevelStore {
            finalized: true,
            ..store
        }
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn k(&self) -> usize {
        self.k as usize
    }

    pub fn is_finalized(&self) -> bool {
        self.finalized
    }

    /// Number of class records.
    pub fn len(&self) -> usize {
        self.shards.iter().map(|s| s.lock().unwrap().len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn shard_of(form: &[u8; 16]) -> usize {
        (form_hash(form) >> 27) as usize & (SHARDS - 1)
    }

    /// Adds `delta` to the accumulator of `form`, inserting a fresh record if
    /// absent. Safe for concurrent use.
    pub fn add(&self, form: [u8; 16], delta: &BigCount) {
        let hash = form_hash(&form);
        let mut shard = self.shards[Self::shard_of(&form)].lock().unwrap();
        shard.add(form, hash, delta);
    }

    /// Snapshot of one record.
    pub fn get(&self, form: &[u8; 16]) -> Option<ClassRecord> {
        let shard = self.shards[Self::shard_of(form)].lock().unwrap();
        let i = shard.probe(form, form_hash(form));
        shard.slots[i].clone()
    }

    /// The finalized LF value of a class, if present.
    pub fn get_lf(&self, form: &[u8; 16]) -> Option<BigCount> {
        debug_assert!(self.finalized);
        self.get(form).map(|rec| rec.accumulator)
    }

    /// All records, sorted ascending by canonical form (as a little-endian
    /// 128-bit integer) — the level-file order.
    pub fn records_sorted(&self) -> Vec<ClassRecord> {
        let mut out: Vec<ClassRecord> = Vec::with_capacity(self.len());
        for shard in &self.shards {
            out.extend(shard.lock().unwrap().slots.iter().flatten().cloned());
        }
        out.sort_unstable_by_key(|rec| u128::from_le_bytes(rec.canonical_form));
        out
    }
}

// ============================================================================
// Forward accumulation
// ============================================================================

/// Builds level k from finalized level k−1: for every class representative H
/// and every one-factor F of H's complement, the record of canonical(H∪F)
/// accumulates (n!/|Aut H|)·LF(H). The finalize pass rescales each class G by
/// |Aut G|/n!, yielding k·LF(G), and divides by k.
///
/// # Panics
///
/// Panics if `prev` is not finalized, or on any divisibility failure — both
/// signal an implementation bug, not bad input.
pub fn forward_accumulate_level(prev: &LevelStore) -> LevelStore {
    assert!(prev.is_finalized(), "source level must be finalized");
    let n = prev.n();
    let k = prev.k() + 1;
    let nfact = factorial(n as u64);
    let next = LevelStore::new(n, k);

    let sources = prev.records_sorted();
    sources.par_iter().for_each_init(Canonizer::new, |cz, rec| {
        let h = DenseGraph::from_edge_mask(n, u128::from_le_bytes(rec.canonical_form));
        debug_assert!(h.is_k_regular(k - 1));
        // Weight (n!/|Aut H|)·LF(H): integral, since |Aut H| divides n!.
        let weight = &nfact / &rec.aut_order * &rec.accumulator;
        h.complement().visit_one_factors(None, |pairs| {
            let mut union = h;
            for &(a, b) in pairs {
                union.add_edge(a as usize, b as usize);
            }
            next.add(cz.dense_form(&union), &weight);
        });
    });

    finalize_level(next, k)
}

/// Rescales every accumulator from the n!-scaled sum to LF, caching |Aut G|
/// and asserting the record's form is a canonical fixed point.
fn finalize_level(store: LevelStore, k: usize) -> LevelStore {
    let n = store.n();
    let nfact = factorial(n as u64);
    store.shards.par_iter().for_each_init(Canonizer::new, |cz, shard| {
        let mut shard = shard.lock().unwrap();
        for slot in shard.slots.iter_mut().flatten() {
            let g = DenseGraph::from_edge_mask(n, u128::from_le_bytes(slot.canonical_form));
            let r = cz.dense_result(&g);
            assert_eq!(
                r.canonical_form[..16],
                slot.canonical_form,
                "stored form is not a canonical fixed point"
            );
            let scaled = &slot.accumulator * &r.aut_order;
            let (x, rem) = num_integer::Integer::div_rem(&scaled, &nfact);
            assert!(rem.is_zero(), "accumulator not divisible by n!/|Aut|");
            let (lf, rem) = num_integer::Integer::div_rem(&x, &BigCount::from(k));
            assert!(rem.is_zero(), "accumulator not divisible by k = {k}");
            slot.accumulator = lf;
            slot.aut_order = r.aut_order;
        }
    });
    LevelStore {
        finalized: true,
        ..store
    }
}

/// Runs the full pipeline: all levels 0..=k_max for K_n.
pub fn build_levels(n: usize, k_max: usize) -> Vec<LevelStore> {
    let mut levels = vec![LevelStore::base(n)];
    for _ in 1..=k_max {
        let next = forward_accumulate_level(levels.last().unwrap());
        levels.push(next);
    }
    levels
}

// ============================================================================
// Verifiers
// ============================================================================

/// Recomputes every LF at level k through the deletion recursion
/// LF(G) = Σ LF(G−F) over one-factors F of G through a fixed edge (the
/// lexicographically smallest edge of G), and compares with the stored
/// values. Mismatches are reported on stderr by canonical form.
pub fn verify_dgm_level(level_k: &LevelStore, level_km1: &LevelStore) -> bool {
    assert!(level_k.is_finalized() && level_km1.is_finalized());
    assert_eq!(level_k.k(), level_km1.k() + 1);
    let n = level_k.n();
    let records = level_k.records_sorted();
    records
        .par_iter()
        .map_init(Canonizer::new, |cz, rec| {
            let g = DenseGraph::from_edge_mask(n, u128::from_le_bytes(rec.canonical_form));
            let e = g.lowest_edge().expect("k ≥ 1 level graphs have edges");
            let mut sum = BigCount::zero();
            g.visit_one_factors(Some(e), |pairs| {
                let f = crate::graphcore::OneFactor::from_pairs(n, pairs.to_vec());
                let form = cz.dense_form(&g.delete_factor(&f));
                // G−F need not decompose into k−1 one-factors; such graphs
                // are absent from the level and contribute LF(G−F) = 0.
                if let Some(lf) = level_km1.get_lf(&form) {
                    sum += lf;
                }
            });
            if sum != rec.accumulator {
                eprintln!(
                    "dgm mismatch at n={n} k={}: form {} stored {} recomputed {sum}",
                    level_k.k(),
                    hex16(&rec.canonical_form),
                    rec.accumulator,
                );
                false
            } else {
                true
            }
        })
        .reduce(|| true, |a, b| a && b)
}

/// The meet-in-the-middle identity at level k: returns
/// Σ_[G] (n!/|Aut G|)·LF(G)·LF(Ḡ) / C(n−1, k), which must equal LF(K_n) for
/// every k.
///
/// # Panics
///
/// Panics if the binomial does not divide the sum exactly (corrupted data).
pub fn verify_mitm(n: usize, k: usize, levels: &[LevelStore]) -> BigCount {
    assert!(k < n);
    let level_k = &levels[k];
    let level_co = &levels[n - 1 - k];
    assert!(level_k.is_finalized() && level_co.is_finalized());
    assert_eq!(level_k.k(), k);
    assert_eq!(level_co.k(), n - 1 - k);
    let nfact = factorial(n as u64);
    let sum = level_k
        .records_sorted()
        .par_iter()
        .map_init(Canonizer::new, |cz, rec| {
            let g = DenseGraph::from_edge_mask(n, u128::from_le_bytes(rec.canonical_form));
            let co_form = cz.dense_form(&g.complement());
            match level_co.get_lf(&co_form) {
                // Complement not one-factorizable: LF(Ḡ) = 0 term.
                None => BigCount::zero(),
                Some(lf_co) => &nfact / &rec.aut_order * &rec.accumulator * lf_co,
            }
        })
        .reduce(BigCount::zero, |a, b| a + b);
    let binom = crate::binomial(n as u64 - 1, k as u64);
    let (value, rem) = num_integer::Integer::div_rem(&sum, &binom);
    assert!(
        rem.is_zero(),
        "meet-in-the-middle sum not divisible by C({}, {k})",
        n - 1
    );
    value
}

/// Entry k is Σ over level-k classes of (n!/|Aut G|)·LF(G): the number of
/// distinct labeled one-factorizations of k-regular graphs on n vertices.
pub fn distinct_factorization_table(n: usize, levels: &[LevelStore]) -> Vec<BigCount> {
    let nfact = factorial(n as u64);
    levels
        .iter()
        .map(|level| {
            assert!(level.is_finalized());
            level
                .records_sorted()
                .iter()
                .map(|rec| &nfact / &rec.aut_order * &rec.accumulator)
                .fold(BigCount::zero(), |a, b| a + b)
        })
        .collect()
}

fn hex16(form: &[u8; 16]) -> String {
    form.iter().map(|b| format!("{b:02x}")).collect()
}

// ============================================================================
// Tests
// ============================================================================
