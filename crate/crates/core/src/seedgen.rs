//! Seed classification for the symmetric census track.
//!
//! For an admissible automorphism type at order n, fix the representative
//! permutation π of that type ([`fix_group_representative`]). A *seed* is a
//! pair (T, S): an anchor set T of up to three points matching the type's
//! anchor schema, and a ⟨π⟩-closed block set S in which
//!
//! * no {u, v} or {v, v′} pair is covered twice,
//! * every U-anchor lies in exactly n/2 blocks and every V-anchor in exactly
//!   n−1 blocks (the anchors are *saturated*: their factor respectively their
//!   vertex neighborhood is complete),
//! * every ⟨π⟩-orbit of blocks meets T, and
//! * T is contained in one block.
//!
//! Two seeds are equivalent when a point permutation normalizing ⟨π⟩ maps one
//! onto the other; [`classify_seeds`] returns one representative per class
//! with its stabilizer order and generators. Every one-factorization invariant
//! under a conjugate of ⟨π⟩ extends at least one seed, so completing seed
//! representatives (the extender's job) reaches every such factorization.
//!
//! Equivalence is decided by canonical forms of a colored graph encoding: the
//! points, one vertex per block *touching T* (the rest of S is the ⟨π⟩-closure
//! of those, so nothing is lost), and the action of π drawn as matching edges
//! (involutions) or two-vertex arc gadgets per moved point (odd order). The
//! normalizer's twist action — conjugating π to a power π^a — is absorbed by
//! minimizing the form over all generators π^a of ⟨π⟩.
//!
//! Growth is staged per schema slot: anchor a point of the slot's kind, then
//! saturate it by breadth-first orbit additions, deduplicating by canonical
//! form after every step. Saturation is final — a saturated point's pairs are
//! all covered, so no later block can touch it — which is what makes the
//! stage order sound. For three-slot schemas the third anchor is forced: it
//! must complete the unique block covering the first two anchors.

use crate::autotypes::{AutType, Slot};
use crate::canon::{CanonicalResult, Canonizer, Colored};
use crate::gdd::{restrict_perm, PointSpace};
use crate::graphcore::edge_index;
use crate::perm::Perm;
use crate::BigCount;
use rayon::prelude::*;
use std::collections::{HashMap, HashSet};

// ============================================================================
// Representative permutation and normalizer
// ============================================================================

/// The representative permutation of an automorphism type: fixed points at
/// the lowest indices on each side, then consecutive p-cycles in natural
/// order.
pub fn fix_group_representative(n: usize, t: &AutType) -> Perm {
    let space = PointSpace::new(n);
    let mut cycles: Vec<Vec<usize>> = Vec::new();
    let c_u = (space.u_count() - t.f_u) / t.p;
    for j in 0..c_u {
        cycles.push(
            (0..t.p)
                .map(|i| space.u_point(t.f_u + j * t.p + i) as usize)
                .collect(),
        );
    }
    let c_v = (space.v_count() - t.f_v) / t.p;
    for j in 0..c_v {
        cycles.push(
            (0..t.p)
                .map(|i| space.v_point(t.f_v + j * t.p + i) as usize)
                .collect(),
        );
    }
    let refs: Vec<&[usize]> = cycles.iter().map(|c| c.as_slice()).collect();
    Perm::from_cycles(space.point_count(), &refs)
}

/// Order of the normalizer of ⟨π⟩ inside the point group (side-preserving
/// permutations): (p−1) twists × independent permutations of fixed points,
/// cycle rotations, and cycle interchanges on each side.
pub fn normalizer_order(n: usize, t: &AutType) -> BigCount {
    let space = PointSpace::new(n);
    let c_u = (space.u_count() - t.f_u) / t.p;
    let c_v = (space.v_count() - t.f_v) / t.p;
    let mut order = BigCount::from(t.p as u64 - 1);
    order *= crate::factorial(t.f_u as u64);
    order *= crate::factorial(c_u as u64);
    order *= BigCount::from(t.p as u64).pow(c_u as u32);
    order *= crate::factorial(t.f_v as u64);
    order *= crate::factorial(c_v as u64);
    order *= BigCount::from(t.p as u64).pow(c_v as u32);
    order
}

/// How many anchor sets T a factorization invariant under π admits for this
/// type — the overcount factor when seeds of one factorization are tallied.
pub fn seed_m_value(n: usize, t: &AutType) -> usize {
    use Slot::{Absent, Fixed, Moved};
    let s = t.anchor_schema;
    match (s.one_factor, s.vertex1, s.vertex2) {
        // Fixed factor with a moved vertex: free choice of both.
        (Fixed, Moved, Absent) => t.f_u * (n - t.f_v),
        // Fixed vertex with a moved vertex: free choice of both.
        (Absent, Fixed, Moved) => t.f_v * (n - t.f_v),
        // All-fixed block: the vertex pair determines the block, whose factor
        // is automatically fixed.
        (Fixed, Fixed, Fixed) => t.f_v * (t.f_v - 1) / 2,
        // All-moved block: count blocks avoiding fixed points entirely.
        (Moved, Moved, Moved) => {
            debug_assert_eq!(t.f_v, 0);
            n * (n - 1) / 2 - t.f_u * n / 2
        }
        // Block through a fixed vertex and a moved one; its factor is moved
        // since no factor is fixed.
        (Moved, Fixed, Moved) => {
            debug_assert_eq!(t.f_u, 0);
            t.f_v * (n - t.f_v)
        }
        // Fixed factor, both vertices moved (only when every factor is
        // fixed and no vertex is): every block of a fixed factor qualifies.
        (Fixed, Moved, Moved) => {
            debug_assert_eq!(t.f_v, 0);
            t.f_u * n / 2
        }
        _ => unreachable!("no anchor schema produces this slot combination"),
    }
}

/// A permutation γ with γ·g·γ⁻¹ equal to the representative of the type:
/// maps g's fixed points and cycles onto the representative's, side by side.
///
/// # Panics
///
/// Panics if g's cycle structure does not match the type.
pub fn align_to_representative(n: usize, t: &AutType, g: &Perm) -> Perm {
    let space = PointSpace::new(n);
    assert_eq!(g.degree(), space.point_count());
    assert_eq!(g.element_order(), t.p as u64, "element order mismatch");
    let mut img = vec![0u8; space.point_count()];
    for (lo, hi, fixed_count) in [
        (0, space.u_count(), t.f_u),
        (space.u_count(), space.point_count(), t.f_v),
    ] {
        let mut fixed: Vec<usize> = Vec::new();
        let mut cycles: Vec<Vec<usize>> = Vec::new();
        let mut seen = vec![false; space.point_count()];
        for x in lo..hi {
            if seen[x] {
                continue;
            }
            if g.apply(x) == x {
                fixed.push(x);
                seen[x] = true;
            } else {
                let mut cyc = vec![x];
                seen[x] = true;
                let mut y = g.apply(x);
                while y != x {
                    seen[y] = true;
                    cyc.push(y);
                    y = g.apply(y);
                }
                assert_eq!(cyc.len(), t.p, "cycle length mismatch");
                cycles.push(cyc);
            }
        }
        assert_eq!(fixed.len(), fixed_count, "fixed point count mismatch");
        for (i, &x) in fixed.iter().enumerate() {
            img[x] = (lo + i) as u8;
        }
        for (j, cyc) in cycles.iter().enumerate() {
            for (i, &x) in cyc.iter().enumerate() {
                img[x] = (lo + fixed_count + j * t.p + i) as u8;
            }
        }
    }
    let gamma = Perm::from_images(img);
    debug_assert_eq!(
        Perm::compose(&Perm::compose(&gamma, g), &gamma.inverse()),
        fix_group_representative(n, t)
    );
    gamma
}

// ============================================================================
// Seed classes
// ============================================================================

/// One classified seed: its anchors (in schema slot order), the full block
/// set S, the canonical key that identified its class, and the stabilizer of
/// (T, S) inside the normalizer of ⟨π⟩.
#[derive(Clone, Debug)]
pub struct SeedClass {
    pub anchors: Vec<u8>,
    pub blocks: Vec<[u8; 3]>,
    pub canonical_key: Vec<u8>,
    pub aut_order: BigCount,
    pub aut_generators: Vec<Perm>,
}

/// All seed classes of one automorphism type at order n.
#[derive(Clone, Debug)]
pub struct SeedSet {
    pub n: usize,
    pub aut_type: AutType,
    pub pi: Perm,
    pub classes: Vec<SeedClass>,
}

// ============================================================================
// Growth state
// ============================================================================

#[derive(Clone)]
struct PartialSeed {
    /// Anchors chosen so far, in schema slot order.
    anchors: Vec<u8>,
    /// All blocks of S so far, sorted.
    blocks: Vec<[u8; 3]>,
    /// Covered {u, v} pairs: per factor label, a bitmask over vertex indices.
    uv: [u16; 13],
    /// Covered {v, v′} pairs as edge-index bits.
    vv: u128,
    /// Number of blocks through each point.
    cnt: [u8; 27],
}

/// A state as held between growth levels: anchors and blocks only. The pair
/// tables are cheap to rebuild, and millions of stored states can be live at
/// once, so they are not kept.
struct Stored {
    anchors: Vec<u8>,
    blocks: Box<[[u8; 3]]>,
}

impl PartialSeed {
    fn empty() -> Self {
        PartialSeed {
            anchors: Vec::new(),
            blocks: Vec::new(),
            uv: [0; 13],
            vv: 0,
            cnt: [0; 27],
        }
    }

    fn pack(self) -> Stored {
        Stored {
            anchors: self.anchors,
            blocks: self.blocks.into_boxed_slice(),
        }
    }

    fn unpack(stored: &Stored, space: &PointSpace) -> PartialSeed {
        let mut st = PartialSeed::empty();
        st.anchors = stored.anchors.clone();
        st.blocks = stored.blocks.to_vec();
        for b in stored.blocks.iter() {
            let u = b[0] as usize;
            let vi = space.v_index(b[1]);
            let vj = space.v_index(b[2]);
            debug_assert_eq!(st.uv[u] & ((1 << vi) | (1 << vj)), 0);
            st.uv[u] |= (1u16 << vi) | (1u16 << vj);
            st.vv |= 1u128 << edge_index(space.n(), vi, vj);
            for &pt in b {
                st.cnt[pt as usize] += 1;
            }
        }
        st
    }

    /// Adds a whole orbit of blocks, or None on any repeated pair (internal
    /// to the orbit or against the current state).
    fn try_add_orbit(&self, space: &PointSpace, orbit: &[[u8; 3]]) -> Option<PartialSeed> {
        let mut s = self.clone();
        for &b in orbit {
            let u = b[0] as usize;
            let vi = space.v_index(b[1]);
            let vj = space.v_index(b[2]);
            let vm = (1u16 << vi) | (1u16 << vj);
            if s.uv[u] & vm != 0 {
                return None;
            }
            s.uv[u] |= vm;
            let e = 1u128 << edge_index(space.n(), vi, vj);
            if s.vv & e != 0 {
                return None;
            }
            s.vv |= e;
            for &pt in &b {
                s.cnt[pt as usize] += 1;
            }
        }
        s.blocks.extend_from_slice(orbit);
        s.blocks.sort_unstable();
        Some(s)
    }
}

/// The ⟨π⟩-orbit of a block (size 1 or p), starting from the block itself.
pub(crate) fn orbit_of(pi: &Perm, b: [u8; 3]) -> Vec<[u8; 3]> {
    let step = |b: [u8; 3]| {
        let u = pi.apply(b[0] as usize) as u8;
        let x = pi.apply(b[1] as usize) as u8;
        let y = pi.apply(b[2] as usize) as u8;
        if x <= y {
            [u, x, y]
        } else {
            [u, y, x]
        }
    };
    let mut out = vec![b];
    let mut cur = step(b);
    while cur != b {
        out.push(cur);
        cur = step(cur);
    }
    out
}

// ============================================================================
// Canonical keys
// ============================================================================

struct Ctx {
    space: PointSpace,
    t: AutType,
    pi: Perm,
    /// π^a for a = 1, …, p−1 (just π for involutions).
    powers: Vec<Perm>,
    /// Moved points, ascending (the same for every power).
    moved: Vec<usize>,
}

impl Ctx {
    fn new(n: usize, t: &AutType) -> Self {
        let space = PointSpace::new(n);
        let pi = fix_group_representative(n, t);
        let powers: Vec<Perm> = (1..t.p as u64).map(|a| pi.pow(a)).collect();
        let moved: Vec<usize> = (0..space.point_count())
            .filter(|&x| pi.apply(x) != x)
            .collect();
        Ctx {
            space,
            t: *t,
            pi,
            powers,
            moved,
        }
    }

    fn quota(&self, pt: u8) -> u8 {
        if self.space.is_u(pt) {
            (self.space.n() / 2) as u8
        } else {
            (self.space.n() - 1) as u8
        }
    }

    fn point_matches(&self, side_u: bool, slot: Slot, pt: u8) -> bool {
        if self.space.is_u(pt) != side_u {
            return false;
        }
        let fixed = self.pi.apply(pt as usize) == pt as usize;
        match slot {
            Slot::Fixed => fixed,
            Slot::Moved => !fixed,
            Slot::Absent => false,
        }
    }

    /// Graph vertex count for a state with `bt` blocks touching T.
    fn graph_size(&self, bt_len: usize) -> usize {
        let gadgets = if self.t.p == 2 {
            0
        } else {
            2 * self.moved.len()
        };
        self.space.point_count() + bt_len + gadgets
    }
}

/// Present schema slots as (is-U-side, kind), in slot order.
fn slot_list(t: &AutType) -> Vec<(bool, Slot)> {
    let s = t.anchor_schema;
    [(true, s.one_factor), (false, s.vertex1), (false, s.vertex2)]
        .into_iter()
        .filter(|&(_, sl)| sl != Slot::Absent)
        .collect()
}

fn blocks_touching(anchors: &[u8], blocks: &[[u8; 3]]) -> Vec<[u8; 3]> {
    blocks
        .iter()
        .copied()
        .filter(|b| b.iter().any(|p| anchors.contains(p)))
        .collect()
}

/// The colored seed graph for one generator π^a: points colored by side and
/// anchor membership, one vertex per block touching T joined to its three
/// points, and π^a drawn as matching edges (p = 2) or A→B arc gadgets per
/// moved point (odd p).
fn build_graph<const W: usize>(
    ctx: &Ctx,
    power: &Perm,
    anchors: &[u8],
    bt: &[[u8; 3]],
) -> Colored<W> {
    let pc = ctx.space.point_count();
    let mut raw: Vec<u16> = Vec::with_capacity(ctx.graph_size(bt.len()));
    for p in 0..pc as u8 {
        let anchored = anchors.contains(&p);
        raw.push(match (ctx.space.is_u(p), anchored) {
            (true, false) => 0,
            (true, true) => 1,
            (false, false) => 2,
            (false, true) => 3,
        });
    }
    raw.extend(std::iter::repeat(4).take(bt.len()));
    if ctx.t.p != 2 {
        for _ in &ctx.moved {
            raw.push(5);
            raw.push(6);
        }
    }
    // Compress to a contiguous palette (some classes may be empty).
    let mut present: Vec<u16> = raw.clone();
    present.sort_unstable();
    present.dedup();
    let colors: Vec<u16> = raw
        .iter()
        .map(|c| present.binary_search(c).unwrap() as u16)
        .collect();
    let mut g = Colored::<W>::new(colors);
    for (bi, b) in bt.iter().enumerate() {
        for &pt in b {
            g.add_edge(pc + bi, pt as usize);
        }
    }
    if ctx.t.p == 2 {
        for &x in &ctx.moved {
            let y = power.apply(x);
            if x < y {
                g.add_edge(x, y);
            }
        }
    } else {
        for (k, &x) in ctx.moved.iter().enumerate() {
            let a = pc + bt.len() + 2 * k;
            g.add_edge(a, x);
            g.add_edge(a, a + 1);
            g.add_edge(a + 1, power.apply(x));
        }
    }
    g
}

struct Engines {
    narrow: Canonizer<1>,
    wide: Canonizer<2>,
}

impl Engines {
    fn new() -> Self {
        Engines {
            narrow: Canonizer::new(),
            wide: Canonizer::new(),
        }
    }

    fn run(
        &mut self,
        ctx: &Ctx,
        power: &Perm,
        anchors: &[u8],
        bt: &[[u8; 3]],
    ) -> CanonicalResult {
        if ctx.graph_size(bt.len()) <= 64 {
            self.narrow.run(&build_graph::<1>(ctx, power, anchors, bt))
        } else {
            self.wide.run(&build_graph::<2>(ctx, power, anchors, bt))
        }
    }

    fn labeling(&mut self, ctx: &Ctx, power: &Perm, anchors: &[u8], bt: &[[u8; 3]]) -> Perm {
        if ctx.graph_size(bt.len()) <= 64 {
            self.narrow.labeling(&build_graph::<1>(ctx, power, anchors, bt))
        } else {
            self.wide.labeling(&build_graph::<2>(ctx, power, anchors, bt))
        }
    }

    /// Canonical key of a state: the anchor count, the generator's action,
    /// and the touched blocks, all rewritten through a canonical labeling of
    /// the state's encoding and minimized over the generators of ⟨π⟩.
    ///
    /// Exact in both directions: isomorphic states share a key because the
    /// rewritten data is a pure function of the canonical graph; conversely,
    /// equal keys compose the two labelings into an explicit isomorphism
    /// (the anchor classes occupy the same canonical positions for states of
    /// one type and stage, whose color class sizes agree). Half the size of
    /// the padded adjacency form, which matters when millions of level
    /// states are held for deduplication.
    fn key(&mut self, ctx: &Ctx, st: &PartialSeed) -> Vec<u8> {
        let bt = blocks_touching(&st.anchors, &st.blocks);
        ctx.powers
            .iter()
            .map(|pw| {
                let lab = self.labeling(ctx, pw, &st.anchors, &bt);
                relabeled_key(ctx, st.anchors.len(), pw, &lab, &bt)
            })
            .min()
            .expect("at least one generator")
    }
}

/// The state structure rewritten through a canonical labeling of its
/// encoding: the generator as images over canonical point positions, then
/// the touched blocks as sorted canonical triples.
fn relabeled_key(ctx: &Ctx, n_anchors: usize, power: &Perm, labeling: &Perm, bt: &[[u8; 3]]) -> Vec<u8> {
    let pc = ctx.space.point_count();
    let mut triples: Vec<[u8; 3]> = bt
        .iter()
        .map(|b| {
            let mut t = [
                labeling.apply(b[0] as usize) as u8,
                labeling.apply(b[1] as usize) as u8,
                labeling.apply(b[2] as usize) as u8,
            ];
            t.sort_unstable();
            t
        })
        .collect();
    triples.sort_unstable();
    let mut key = Vec::with_capacity(1 + pc + 3 * triples.len());
    key.push(n_anchors as u8);
    let mut action = vec![0u8; pc];
    for x in 0..pc {
        action[labeling.apply(x)] = labeling.apply(power.apply(x)) as u8;
    }
    key.extend_from_slice(&action);
    for t in triples {
        key.extend_from_slice(&t);
    }
    key
}

/// Canonical key of a seed given directly by anchors and blocks (used by
/// tests and cross-checks; classification keeps keys as it grows).
pub fn seed_canonical_key(n: usize, t: &AutType, anchors: &[u8], blocks: &[[u8; 3]]) -> Vec<u8> {
    let ctx = Ctx::new(n, t);
    let mut st = PartialSeed::empty();
    st.anchors = anchors.to_vec();
    st.blocks = blocks.to_vec();
    st.blocks.sort_unstable();
    Engines::new().key(&ctx, &st)
}

/// Rebuilds a full seed class — canonical key, stabilizer order, stabilizer
/// generators — from its anchors and blocks alone, e.g. after loading a
/// stored seed list that keeps only the combinatorial data.
pub fn seed_class_from_parts(n: usize, t: &AutType, anchors: &[u8], blocks: &[[u8; 3]]) -> SeedClass {
    let ctx = Ctx::new(n, t);
    let mut st = PartialSeed::empty();
    st.anchors = anchors.to_vec();
    st.blocks = blocks.to_vec();
    st.blocks.sort_unstable();
    for b in &st.blocks {
        for &pt in b {
            st.cnt[pt as usize] += 1;
        }
    }
    finalize_class(&mut Engines::new(), &ctx, st)
}

// ============================================================================
// Staged growth
// ============================================================================

/// Candidate orbits extending a state at its newest anchor: orbits of blocks
/// through the anchor whose pairs are still free, one per distinct orbit.
fn successor_orbits(ctx: &Ctx, st: &PartialSeed, anchor: u8) -> Vec<Vec<[u8; 3]>> {
    let space = &ctx.space;
    let n = space.n();
    let mut reps: HashSet<[u8; 3]> = HashSet::new();
    let mut out: Vec<Vec<[u8; 3]>> = Vec::new();
    let consider = |b: [u8; 3], reps: &mut HashSet<[u8; 3]>, out: &mut Vec<Vec<[u8; 3]>>| {
        let orbit = orbit_of(&ctx.pi, b);
        let rep = *orbit.iter().min().expect("orbit is nonempty");
        if reps.insert(rep) {
            out.push(orbit);
        }
    };
    if space.is_u(anchor) {
        let u = anchor as usize;
        for vi in 0..n {
            if st.uv[u] & (1 << vi) != 0 {
                continue;
            }
            for vj in vi + 1..n {
                if st.uv[u] & (1 << vj) != 0 || st.vv & (1u128 << edge_index(n, vi, vj)) != 0 {
                    continue;
                }
                consider(
                    [anchor, space.v_point(vi), space.v_point(vj)],
                    &mut reps,
                    &mut out,
                );
            }
        }
    } else {
        let tv = space.v_index(anchor);
        for u in 0..space.u_count() {
            if st.uv[u] & (1 << tv) != 0 {
                continue;
            }
            for x in 0..n {
                if x == tv
                    || st.uv[u] & (1 << x) != 0
                    || st.vv & (1u128 << edge_index(n, tv.min(x), tv.max(x))) != 0
                {
                    continue;
                }
                let (a, b) = (tv.min(x), tv.max(x));
                consider(
                    [space.u_point(u), space.v_point(a), space.v_point(b)],
                    &mut reps,
                    &mut out,
                );
            }
        }
    }
    out
}

/// Runs one schema stage: anchors every admissible point of the slot's kind
/// (the least one for the opening stage, the forced block completion for a
/// third slot), then saturates the new anchor by breadth-first orbit
/// additions with canonical-form deduplication at every level.
fn run_stage(
    ctx: &Ctx,
    states: Vec<PartialSeed>,
    stage: usize,
    n_stages: usize,
    slot: (bool, Slot),
) -> Vec<PartialSeed> {
    // Anchor step.
    let mut anchored: Vec<PartialSeed> = Vec::new();
    for st in &states {
        let candidates: Vec<u8> = if n_stages == 3 && stage == 2 {
            // The block covering the first two anchors forces the third.
            let t1 = st.anchors[0];
            let t2 = st.anchors[1];
            debug_assert!(ctx.space.is_u(t1) && ctx.space.is_v(t2));
            st.blocks
                .iter()
                .find(|b| b[0] == t1 && (b[1] == t2 || b[2] == t2))
                .map(|b| if b[1] == t2 { b[2] } else { b[1] })
                .into_iter()
                .filter(|&p| ctx.point_matches(slot.0, slot.1, p))
                .collect()
        } else {
            let all: Vec<u8> = (0..ctx.space.point_count() as u8)
                .filter(|&p| ctx.point_matches(slot.0, slot.1, p) && !st.anchors.contains(&p))
                .collect();
            if stage == 0 {
                // The normalizer is transitive on each point kind, so the
                // least point loses nothing before any block exists.
                all.into_iter().take(1).collect()
            } else {
                all
            }
        };
        for c in candidates {
            let mut s2 = st.clone();
            s2.anchors.push(c);
            if s2.cnt[c as usize] <= ctx.quota(c) {
                anchored.push(s2);
            }
        }
    }

    // Work in bounded chunks: a level's pre-deduplication successor batch
    // can dwarf the deduplicated level itself, so it must never be held in
    // full.
    const CHUNK: usize = 4096;
    let trace = std::env::var_os("ONEFACT_TRACE").is_some();
    let mut done: HashMap<Vec<u8>, Stored> = HashMap::new();
    let mut frontier: HashMap<Vec<u8>, Stored> = HashMap::new();
    for chunk in anchored.chunks(CHUNK) {
        let keyed: Vec<(Vec<u8>, PartialSeed)> = chunk
            .par_iter()
            .map_init(Engines::new, |eng, st| (eng.key(ctx, st), st.clone()))
            .collect();
        for (key, st) in keyed {
            let anchor = *st.anchors.last().expect("anchored state");
            let target = if st.cnt[anchor as usize] == ctx.quota(anchor) {
                &mut done
            } else {
                &mut frontier
            };
            target.entry(key).or_insert_with(|| st.pack());
        }
    }
    drop(anchored);

    // Saturation: breadth-first over orbit additions, one level at a time.
    let mut level = 0usize;
    while !frontier.is_empty() {
        if trace {
            eprintln!(
                "    stage {stage} level {level}: frontier {}, done {}",
                frontier.len(),
                done.len()
            );
        }
        level += 1;
        let cur: Vec<Stored> = frontier.drain().map(|(_, st)| st).collect();
        for chunk in cur.chunks(CHUNK) {
            let expanded: Vec<(Vec<u8>, PartialSeed, bool)> = chunk
                .par_iter()
                .map_init(Engines::new, |eng, stored| {
                    let st = PartialSeed::unpack(stored, &ctx.space);
                    let anchor = *st.anchors.last().expect("anchored state");
                    let quota = ctx.quota(anchor);
                    let mut found = Vec::new();
                    for orbit in successor_orbits(ctx, &st, anchor) {
                        if let Some(s2) = st.try_add_orbit(&ctx.space, &orbit) {
                            if s2.cnt[anchor as usize] <= quota {
                                let finished = s2.cnt[anchor as usize] == quota;
                                found.push((eng.key(ctx, &s2), s2, finished));
                            }
                        }
                    }
                    found
                })
                .flatten()
                .collect();
            for (key, st, finished) in expanded {
                let target = if finished { &mut done } else { &mut frontier };
                target.entry(key).or_insert_with(|| st.pack());
            }
        }
    }
    if trace {
        eprintln!("    stage {stage} done: {}", done.len());
    }
    done.into_values()
        .map(|st| PartialSeed::unpack(&st, &ctx.space))
        .collect()
}

/// Classifies the seeds of one admissible type: one representative per
/// normalizer-equivalence class, sorted by canonical key.
pub fn classify_seeds(n: usize, t: &AutType) -> SeedSet {
    let ctx = Ctx::new(n, t);
    let slots = slot_list(t);
    assert!(!slots.is_empty(), "a schema must have at least one slot");
    let mut states = vec![PartialSeed::empty()];
    for (stage, &slot) in slots.iter().enumerate() {
        states = run_stage(&ctx, states, stage, slots.len(), slot);
    }
    let mut classes: Vec<SeedClass> = states
        .into_par_iter()
        .map_init(Engines::new, |eng, st| finalize_class(eng, &ctx, st))
        .collect();
    classes.sort_by(|a, b| a.canonical_key.cmp(&b.canonical_key));
    for w in classes.windows(2) {
        assert_ne!(w[0].canonical_key, w[1].canonical_key, "duplicate class");
    }
    SeedSet {
        n,
        aut_type: *t,
        pi: ctx.pi.clone(),
        classes,
    }
}

/// Computes the stabilizer of a finished seed: color-preserving graph
/// automorphisms give the centralizing part; for every generator π^a whose
/// encoding is isomorphic to π's, composing the two canonical labelings
/// gives a stabilizer element twisting π to π^a.
fn finalize_class(eng: &mut Engines, ctx: &Ctx, st: PartialSeed) -> SeedClass {
    let pc = ctx.space.point_count();
    let bt = blocks_touching(&st.anchors, &st.blocks);
    let results: Vec<CanonicalResult> = ctx
        .powers
        .iter()
        .map(|pw| eng.run(ctx, pw, &st.anchors, &bt))
        .collect();
    let restrict = |g: &Perm| {
        debug_assert!(g.images()[..pc].iter().all(|&i| (i as usize) < pc));
        restrict_perm(g, pc)
    };
    let mut aut_generators: Vec<Perm> = results[0].aut_generators.iter().map(&restrict).collect();
    let mut twists = 0u64;
    for r in &results {
        if r.canonical_form == results[0].canonical_form {
            twists += 1;
            if !std::ptr::eq(r, &results[0]) {
                // An isomorphism from the π-encoding onto the π^a-encoding.
                let delta = Perm::compose(&r.canonical_labeling.inverse(), &results[0].canonical_labeling);
                aut_generators.push(restrict(&delta));
            }
        }
    }
    let aut_order = results[0].aut_order.clone() * BigCount::from(twists);
    let canonical_key = results
        .iter()
        .zip(&ctx.powers)
        .map(|(r, pw)| relabeled_key(ctx, st.anchors.len(), pw, &r.canonical_labeling, &bt))
        .min()
        .expect("at least one generator");
    SeedClass {
        anchors: st.anchors,
        blocks: st.blocks,
        canonical_key,
        aut_order,
        aut_generators,
    }
}

// ============================================================================
// Structural validation
// ============================================================================

/// Checks every defining seed condition directly (shape, pair coverage,
/// ⟨π⟩-closure, anchor kinds and saturation, orbits meeting T, T inside a
/// block). Used by tests as an independent referee for classification output.
pub fn seed_conditions_hold(
    n: usize,
    t: &AutType,
    anchors: &[u8],
    blocks: &[[u8; 3]],
) -> Result<(), String> {
    let space = PointSpace::new(n);
    let pi = fix_group_representative(n, t);

    // Block shape and sortedness.
    let mut sorted = blocks.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != blocks.len() {
        return Err("duplicate block".into());
    }
    for b in blocks {
        if !space.is_u(b[0]) || !space.is_v(b[1]) || !space.is_v(b[2]) || b[1] >= b[2] {
            return Err(format!("malformed block {b:?}"));
        }
    }

    // Pair coverage.
    let mut uv = vec![0u16; space.u_count()];
    let mut vv = 0u128;
    for b in blocks {
        let u = b[0] as usize;
        let vi = space.v_index(b[1]);
        let vj = space.v_index(b[2]);
        let vm = (1u16 << vi) | (1u16 << vj);
        if uv[u] & vm != 0 {
            return Err(format!("factor pair covered twice at block {b:?}"));
        }
        uv[u] |= vm;
        let e = 1u128 << edge_index(n, vi, vj);
        if vv & e != 0 {
            return Err(format!("vertex pair covered twice at block {b:?}"));
        }
        vv |= e;
    }

    // Closure under π.
    let set: HashSet<[u8; 3]> = blocks.iter().copied().collect();
    for &b in blocks {
        for img in orbit_of(&pi, b) {
            if !set.contains(&img) {
                return Err(format!("orbit of {b:?} leaves the block set"));
            }
        }
    }

    // Anchors: count, kinds, distinctness.
    let slots = slot_list(t);
    if anchors.len() != slots.len() {
        return Err(format!(
            "expected {} anchors, got {}",
            slots.len(),
            anchors.len()
        ));
    }
    let distinct: HashSet<u8> = anchors.iter().copied().collect();
    if distinct.len() != anchors.len() {
        return Err("repeated anchor".into());
    }
    for (&a, &(side_u, kind)) in anchors.iter().zip(&slots) {
        if space.is_u(a) != side_u {
            return Err(format!("anchor {a} on the wrong side"));
        }
        let fixed = pi.apply(a as usize) == a as usize;
        let ok = match kind {
            Slot::Fixed => fixed,
            Slot::Moved => !fixed,
            Slot::Absent => false,
        };
        if !ok {
            return Err(format!("anchor {a} has the wrong kind"));
        }
    }

    // Saturation quotas.
    for &a in anchors {
        let got = blocks.iter().filter(|b| b.contains(&a)).count();
        let want = if space.is_u(a) { n / 2 } else { n - 1 };
        if got != want {
            return Err(format!("anchor {a} lies in {got} blocks, wants {want}"));
        }
    }

    // Every orbit meets T.
    let mut seen: HashSet<[u8; 3]> = HashSet::new();
    for &b in blocks {
        if seen.contains(&b) {
            continue;
        }
        let orbit = orbit_of(&pi, b);
        if !orbit
            .iter()
            .any(|ob| ob.iter().any(|p| anchors.contains(p)))
        {
            return Err(format!("orbit of {b:?} misses the anchors"));
        }
        seen.extend(orbit);
    }

    // T inside one block.
    if !blocks
        .iter()
        .any(|b| anchors.iter().all(|a| b.contains(a)))
    {
        return Err("no block contains every anchor".into());
    }
    Ok(())
}

// ============================================================================
// Tests
// ============================================================================
