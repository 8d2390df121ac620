//! Seed completion and the symmetric census: exact-cover search over block
//! orbits, with a canonical-augmentation acceptance rule that outputs every
//! isomorphism class of symmetric one-factorizations exactly once.
//!
//! Completing a seed (T, S) to a full ⟨π⟩-invariant factorization is an exact
//! cover problem: the items are the point pairs not yet covered by S, the
//! options are the ⟨π⟩-orbits of blocks whose pairs are all free (orbits that
//! clash internally are dropped when the instance is built). A hand-rolled
//! dancing-links solver with fewest-options-first item selection enumerates
//! the covers; its decision order is deterministic, so a search can be split
//! into independent subtrees by decision prefix and distributed.
//!
//! Every solution is a factorization invariant under π, but isomorphic
//! solutions arise many times — across seeds, types, and within one search.
//! Acceptance keeps exactly one representative per isomorphism class:
//!
//! 1. a solution must be lexicographically minimal within its orbit under
//!    the seed's stabilizer (cheap, filters most duplicates), and
//! 2. relabeled canonically, the seed that generated it must be equivalent —
//!    under the full automorphism group of the solution — to the least
//!    serialized seed among *all* seeds of *all* admissible types found
//!    inside the solution.
//!
//! Rule 2 is invariant under relabeling, so across the whole run each class
//! is accepted from exactly one seed orbit, and rule 1 picks exactly one
//! solution out of that orbit.

use crate::autotypes::{admissible_types, anchor_schema_for, check_type, AnchorSchema, AutType, Slot};
use crate::gdd::{enumerate_group, prime_subgroups_of, restrict_perm, Factorization, PointSpace};
use crate::graphcore::edge_index;
use crate::perm::{Perm, StabChain};
use crate::seedgen::{classify_seeds, orbit_of, seed_m_value, SeedClass};
use crate::BigCount;
use rayon::prelude::*;
use std::collections::{BTreeMap, HashSet};

// ============================================================================
// Exact cover instances
// ============================================================================

/// One selectable unit: a ⟨π⟩-orbit of blocks and the items (pair ids) it
/// covers.
#[derive(Clone, Debug)]
pub struct CoverOption {
    pub blocks: Vec<[u8; 3]>,
    pub items: Vec<u32>,
}

/// An exact cover instance: `n_items` pairs to cover, each exactly once.
#[derive(Clone, Debug)]
pub struct CoverInstance {
    pub n_items: usize,
    pub options: Vec<CoverOption>,
}

/// Builds the completion instance of a seed: one item per uncovered {u, v}
/// and {v, v′} pair, one option per internally consistent block orbit all of
/// whose pairs are uncovered.
pub fn build_cover_instance(n: usize, pi: &Perm, seed_blocks: &[[u8; 3]]) -> CoverInstance {
    let space = PointSpace::new(n);
    let mut uv = vec![0u16; space.u_count()];
    let mut vv = 0u128;
    for b in seed_blocks {
        let (vi, vj) = (space.v_index(b[1]), space.v_index(b[2]));
        uv[b[0] as usize] |= (1 << vi) | (1 << vj);
        vv |= 1u128 << edge_index(n, vi, vj);
    }

    const NONE: u32 = u32::MAX;
    let mut uv_item = vec![[NONE; 14]; space.u_count()];
    let mut vv_item = vec![NONE; n * (n - 1) / 2];
    let mut n_items = 0u32;
    for u in 0..space.u_count() {
        for v in 0..n {
            if uv[u] & (1 << v) == 0 {
                uv_item[u][v] = n_items;
                n_items += 1;
            }
        }
    }
    for vi in 0..n {
        for vj in vi + 1..n {
            let e = edge_index(n, vi, vj);
            if vv & (1u128 << e) == 0 {
                vv_item[e] = n_items;
                n_items += 1;
            }
        }
    }
    assert_eq!(n_items % 3, 0, "three items per missing block");

    let mut options = Vec::new();
    for u in 0..space.u_count() {
        for vi in 0..n {
            if uv[u] & (1 << vi) != 0 {
                continue;
            }
            for vj in vi + 1..n {
                if uv[u] & (1 << vj) != 0 || vv & (1u128 << edge_index(n, vi, vj)) != 0 {
                    continue;
                }
                let b = [space.u_point(u), space.v_point(vi), space.v_point(vj)];
                let orbit = orbit_of(pi, b);
                if *orbit.iter().min().expect("orbit is nonempty") != b {
                    continue; // one option per orbit
                }
                // The whole orbit must fit: internally disjoint pairs, all
                // uncovered by the seed.
                let mut ouv = uv.clone();
                let mut ovv = vv;
                let mut ok = true;
                let mut items = Vec::with_capacity(3 * orbit.len());
                for ob in &orbit {
                    let u2 = ob[0] as usize;
                    let (wi, wj) = (space.v_index(ob[1]), space.v_index(ob[2]));
                    let vm = (1u16 << wi) | (1u16 << wj);
                    let e = 1u128 << edge_index(n, wi, wj);
                    if ouv[u2] & vm != 0 || ovv & e != 0 {
                        ok = false;
                        break;
                    }
                    ouv[u2] |= vm;
                    ovv |= e;
                    items.push(uv_item[u2][wi]);
                    items.push(uv_item[u2][wj]);
                    items.push(vv_item[edge_index(n, wi, wj)]);
                }
                if ok {
                    debug_assert!(items.iter().all(|&i| i != NONE));
                    options.push(CoverOption {
                        blocks: orbit,
                        items,
                    });
                }
            }
        }
    }
    CoverInstance {
        n_items: n_items as usize,
        options,
    }
}

impl CoverInstance {
    /// Enumerates every exact cover, invoking the callback with the chosen
    /// option ids.
    pub fn solve<F: FnMut(&[u32])>(&self, mut f: F) {
        Dlx::new(self).search(&mut Vec::new(), &mut Drive::Full, &mut f);
    }

    /// Number of exact covers.
    pub fn solution_count(&self) -> u64 {
        let mut c = 0u64;
        self.solve(|_| c += 1);
        c
    }

    /// Splits the search into independent units: the decision prefixes at
    /// the given depth (complete solutions shallower than the depth appear
    /// as shorter prefixes). Re-running each prefix visits every solution
    /// exactly once across units.
    pub fn split(&self, depth: usize) -> Vec<Vec<u32>> {
        let mut out = Vec::new();
        Dlx::new(self).search(&mut Vec::new(), &mut Drive::Split(depth, &mut out), &mut |_| {});
        out
    }

    /// Enumerates the exact covers inside one split unit.
    pub fn solve_prefix<F: FnMut(&[u32])>(&self, prefix: &[u32], mut f: F) {
        Dlx::new(self).search(&mut Vec::new(), &mut Drive::Replay(prefix), &mut f);
    }
}

// ============================================================================
// Dancing links
// ============================================================================

enum Drive<'a> {
    /// Enumerate everything.
    Full,
    /// Record decision stacks at the given depth instead of descending.
    Split(usize, &'a mut Vec<Vec<u32>>),
    /// Follow the recorded decisions, then enumerate everything below.
    Replay(&'a [u32]),
}

/// Knuth's dancing-links exact cover solver: circular doubly linked lists
/// over a node pool, column headers with live option counts, and
/// fewest-options-first column selection (ties to the lowest item id, which
/// makes the decision order deterministic and replayable).
struct Dlx {
    l: Vec<u32>,
    r: Vec<u32>,
    u: Vec<u32>,
    d: Vec<u32>,
    /// Column header of a node.
    c: Vec<u32>,
    /// Live option count per column.
    len: Vec<u32>,
    /// Option id of a node (undefined for headers).
    row: Vec<u32>,
    root: u32,
}

impl Dlx {
    fn new(inst: &CoverInstance) -> Dlx {
        let k = inst.n_items;
        let root = k as u32;
        let mut dlx = Dlx {
            l: (0..=k as u32)
                .map(|i| if i == 0 { root } else { i - 1 })
                .collect(),
            r: (0..=k as u32).map(|i| if i == root { 0 } else { i + 1 }).collect(),
            u: (0..=k as u32).collect(),
            d: (0..=k as u32).collect(),
            c: (0..=k as u32).collect(),
            len: vec![0; k],
            row: vec![u32::MAX; k + 1],
            root,
        };
        if k == 0 {
            dlx.l[root as usize] = root;
            dlx.r[root as usize] = root;
        }
        for (oid, opt) in inst.options.iter().enumerate() {
            let first = dlx.l.len() as u32;
            for (j, &item) in opt.items.iter().enumerate() {
                let node = dlx.l.len() as u32;
                let hdr = item as usize;
                let above = dlx.u[hdr];
                dlx.u.push(above);
                dlx.d.push(item);
                dlx.d[above as usize] = node;
                dlx.u[hdr] = node;
                dlx.c.push(item);
                dlx.len[hdr] += 1;
                dlx.row.push(oid as u32);
                if j == 0 {
                    dlx.l.push(node);
                    dlx.r.push(node);
                } else {
                    let prev = node - 1;
                    dlx.l.push(prev);
                    dlx.r.push(first);
                    dlx.r[prev as usize] = node;
                    dlx.l[first as usize] = node;
                }
            }
        }
        dlx
    }

    fn cover(&mut self, col: u32) {
        let (cl, cr) = (self.l[col as usize], self.r[col as usize]);
        self.r[cl as usize] = cr;
        self.l[cr as usize] = cl;
        let mut i = self.d[col as usize];
        while i != col {
            let mut j = self.r[i as usize];
            while j != i {
                let (ju, jd) = (self.u[j as usize], self.d[j as usize]);
                self.d[ju as usize] = jd;
                self.u[jd as usize] = ju;
                self.len[self.c[j as usize] as usize] -= 1;
                j = self.r[j as usize];
            }
            i = self.d[i as usize];
        }
    }

    fn uncover(&mut self, col: u32) {
        let mut i = self.u[col as usize];
        while i != col {
            let mut j = self.l[i as usize];
            while j != i {
                self.len[self.c[j as usize] as usize] += 1;
                self.d[self.u[j as usize] as usize] = j;
                self.u[self.d[j as usize] as usize] = j;
                j = self.l[j as usize];
            }
            i = self.u[i as usize];
        }
        let (cl, cr) = (self.l[col as usize], self.r[col as usize]);
        self.r[cl as usize] = col;
        self.l[cr as usize] = col;
    }

    fn search<F: FnMut(&[u32])>(&mut self, stack: &mut Vec<u32>, drive: &mut Drive, f: &mut F) {
        if self.r[self.root as usize] == self.root {
            match drive {
                Drive::Split(_, out) => out.push(stack.clone()),
                _ => f(stack),
            }
            return;
        }
        if let Drive::Split(depth, out) = drive {
            if stack.len() == *depth {
                out.push(stack.clone());
                return;
            }
        }
        // Fewest options first; the header ring is in item order, so ties
        // resolve to the lowest item id.
        let mut col = u32::MAX;
        let mut best = u32::MAX;
        let mut h = self.r[self.root as usize];
        while h != self.root {
            if self.len[h as usize] < best {
                best = self.len[h as usize];
                col = h;
            }
            h = self.r[h as usize];
        }
        if best == 0 {
            return;
        }
        let forced: Option<u32> = match drive {
            Drive::Replay(prefix) if stack.len() < prefix.len() => Some(prefix[stack.len()]),
            _ => None,
        };
        self.cover(col);
        let mut rnode = self.d[col as usize];
        while rnode != col {
            if forced.is_some_and(|want| self.row[rnode as usize] != want) {
                rnode = self.d[rnode as usize];
                continue;
            }
            stack.push(self.row[rnode as usize]);
            let mut j = self.r[rnode as usize];
            while j != rnode {
                self.cover(self.c[j as usize]);
                j = self.r[j as usize];
            }
            self.search(stack, drive, f);
            let mut j = self.l[rnode as usize];
            while j != rnode {
                self.uncover(self.c[j as usize]);
                j = self.l[j as usize];
            }
            stack.pop();
            rnode = self.d[rnode as usize];
        }
        self.uncover(col);
    }
}

// ============================================================================
// Acceptance
// ============================================================================

/// An isomorphism class of symmetric factorizations, as reported once by the
/// census: canonical form, automorphism group order, how many prime-order
/// subgroups of each type the group contains, and a representative.
#[derive(Clone, Debug)]
pub struct SymmetricClass {
    pub canonical_form: Vec<u8>,
    pub aut_order: BigCount,
    pub subgroup_counts: BTreeMap<(usize, usize, usize), u64>,
    pub representative: Factorization,
}

fn relabel_block(g: &Perm, b: [u8; 3]) -> [u8; 3] {
    let u = g.apply(b[0] as usize) as u8;
    let x = g.apply(b[1] as usize) as u8;
    let y = g.apply(b[2] as usize) as u8;
    [u, x.min(y), x.max(y)]
}

fn relabel_blocks_sorted(g: &Perm, blocks: &[[u8; 3]]) -> Vec<[u8; 3]> {
    let mut out: Vec<[u8; 3]> = blocks.iter().map(|&b| relabel_block(g, b)).collect();
    out.sort_unstable();
    out
}

fn conj(g: &Perm, pi: &Perm) -> Perm {
    Perm::compose(&Perm::compose(g, pi), &g.inverse())
}

/// A deterministic serialization of a seed (anchors sorted, blocks sorted,
/// ⟨π⟩ by the least one-line form among its generators), comparable across
/// seeds of every type within one labeled factorization.
fn serialize_seed(p: usize, anchors: &[u8], blocks: &[[u8; 3]], gen: &Perm) -> Vec<u8> {
    let min_gen = (1..p as u64)
        .map(|a| gen.pow(a).images().to_vec())
        .min()
        .expect("a generator exists");
    let mut out = Vec::with_capacity(4 + anchors.len() + 3 * blocks.len() + min_gen.len());
    out.push(p as u8);
    out.push(anchors.len() as u8);
    out.extend_from_slice(anchors);
    out.extend_from_slice(&(blocks.len() as u16).to_le_bytes());
    for b in blocks {
        out.extend_from_slice(b);
    }
    out.extend_from_slice(&min_gen);
    out
}

/// The schema-valid anchor sets contained in one block, for a subgroup with
/// the given generator.
fn anchors_in_block(schema: AnchorSchema, gen: &Perm, b: [u8; 3]) -> Vec<Vec<u8>> {
    use Slot::{Absent, Fixed, Moved};
    let fx = |p: u8| gen.apply(p as usize) == p as usize;
    let (u, v1, v2) = (b[0], b[1], b[2]);
    let mut out = Vec::new();
    match (schema.one_factor, schema.vertex1, schema.vertex2) {
        (Fixed, Moved, Absent) => {
            if fx(u) {
                for v in [v1, v2] {
                    if !fx(v) {
                        out.push(vec![u, v]);
                    }
                }
            }
        }
        (Absent, Fixed, Moved) => {
            for (a, m) in [(v1, v2), (v2, v1)] {
                if fx(a) && !fx(m) {
                    out.push(vec![a, m]);
                }
            }
        }
        (Fixed, Fixed, Fixed) => {
            if fx(u) && fx(v1) && fx(v2) {
                out.push(vec![u, v1, v2]);
            }
        }
        (Moved, Moved, Moved) => {
            if !fx(u) && !fx(v1) && !fx(v2) {
                out.push(vec![u, v1, v2]);
            }
        }
        (Moved, Fixed, Moved) => {
            if !fx(u) {
                for (a, m) in [(v1, v2), (v2, v1)] {
                    if fx(a) && !fx(m) {
                        out.push(vec![u, a, m]);
                    }
                }
            }
        }
        (Fixed, Moved, Moved) => {
            if fx(u) && !fx(v1) && !fx(v2) {
                out.push(vec![u, v1, v2]);
            }
        }
        _ => unreachable!("no anchor schema produces this slot combination"),
    }
    out
}

/// Decides whether a solution is the one representative of its isomorphism
/// class reported by the whole census, and if so computes its class data.
///
/// `stab` must be the full stabilizer of the generating seed (elements, not
/// just generators).
fn accept_solution(
    n: usize,
    aut_type: &AutType,
    pi: &Perm,
    seed: &SeedClass,
    stab: &[Perm],
    blocks: Vec<[u8; 3]>,
) -> Option<SymmetricClass> {
    let space = PointSpace::new(n);
    let pc = space.point_count();

    // Rule 1: lexicographic minimum within the seed stabilizer's orbit.
    for g in stab {
        if g.is_identity() {
            continue;
        }
        if relabel_blocks_sorted(g, &blocks) < blocks {
            return None;
        }
    }

    let fact =
        Factorization::from_blocks(n, blocks.clone()).expect("cover solutions are factorizations");
    let res = fact.canonical();
    let sigma = restrict_perm(&res.canonical_labeling, pc);

    // Work entirely on the canonical copy, so serializations agree across
    // every labeled copy of this class.
    let c_blocks = relabel_blocks_sorted(&sigma, &blocks);
    let aut_gens: Vec<Perm> = res
        .aut_generators
        .iter()
        .map(|g| conj(&sigma, &restrict_perm(g, pc)))
        .collect();
    let elements = enumerate_group(pc, &aut_gens);
    assert_eq!(BigCount::from(elements.len()), res.aut_order);

    // The generating seed, canonically relabeled, and its orbit under the
    // full automorphism group.
    let pi_c = conj(&sigma, pi);
    let mut s_anchors: Vec<u8> = seed
        .anchors
        .iter()
        .map(|&a| sigma.apply(a as usize) as u8)
        .collect();
    s_anchors.sort_unstable();
    let s_blocks = relabel_blocks_sorted(&sigma, &seed.blocks);
    let orbit: HashSet<Vec<u8>> = elements
        .iter()
        .map(|alpha| {
            let mut t: Vec<u8> = s_anchors
                .iter()
                .map(|&a| alpha.apply(a as usize) as u8)
                .collect();
            t.sort_unstable();
            serialize_seed(
                aut_type.p,
                &t,
                &relabel_blocks_sorted(alpha, &s_blocks),
                &conj(alpha, &pi_c),
            )
        })
        .collect();

    // Rule 2: the least serialized seed among all seeds of all admissible
    // types inside the solution must lie in that orbit.
    let subgroups = prime_subgroups_of(&elements, space);
    let mut subgroup_counts: BTreeMap<(usize, usize, usize), u64> = BTreeMap::new();
    let mut best: Option<Vec<u8>> = None;
    for sg in &subgroups {
        assert!(
            check_type(n, sg.p, sg.f_u, sg.f_v).is_ok(),
            "a factorization realizes an automorphism type the admissibility rules exclude"
        );
        *subgroup_counts.entry((sg.p, sg.f_u, sg.f_v)).or_insert(0) += 1;
        let schema = anchor_schema_for(n, sg.p, sg.f_u, sg.f_v);
        let mut t_count = 0usize;
        for &b in &c_blocks {
            for mut anchors in anchors_in_block(schema, &sg.generator, b) {
                t_count += 1;
                let bt: Vec<[u8; 3]> = c_blocks
                    .iter()
                    .copied()
                    .filter(|cb| cb.iter().any(|p| anchors.contains(p)))
                    .collect();
                let mut closure: HashSet<[u8; 3]> = HashSet::new();
                for &tb in &bt {
                    closure.extend(orbit_of(&sg.generator, tb));
                }
                let mut s: Vec<[u8; 3]> = closure.into_iter().collect();
                s.sort_unstable();
                anchors.sort_unstable();
                let ser = serialize_seed(sg.p, &anchors, &s, &sg.generator);
                if best.as_ref().is_none_or(|m| ser < *m) {
                    best = Some(ser);
                }
            }
        }
        debug_assert_eq!(
            t_count,
            seed_m_value(
                n,
                &AutType {
                    p: sg.p,
                    f_u: sg.f_u,
                    f_v: sg.f_v,
                    anchor_schema: schema
                }
            ),
            "anchor count disagrees with the multiplicity formula"
        );
    }
    let best = best.expect("the generating subgroup is always present");
    if !orbit.contains(&best) {
        return None;
    }
    Some(SymmetricClass {
        canonical_form: res.canonical_form,
        aut_order: res.aut_order,
        subgroup_counts,
        representative: fact,
    })
}

// ============================================================================
// Per-seed and per-order classification
// ============================================================================

/// Result of completing one seed: how many solutions the exact cover search
/// found, and the classes this seed reported under the acceptance rule.
#[derive(Clone, Debug)]
pub struct ExtensionOutcome {
    pub solutions: u64,
    pub accepted: Vec<SymmetricClass>,
}

/// Completes one seed and applies the acceptance rule to every solution.
pub fn extend_seed(n: usize, t: &AutType, pi: &Perm, seed: &SeedClass) -> ExtensionOutcome {
    extend_seed_unit(n, t, pi, seed, None)
}

/// Completes one seed within one unit of a split search: with a decision
/// prefix, only the solutions in that subtree are visited, so the units of
/// one seed partition its solution set exactly.
pub fn extend_seed_unit(
    n: usize,
    t: &AutType,
    pi: &Perm,
    seed: &SeedClass,
    prefix: Option<&[u32]>,
) -> ExtensionOutcome {
    let space = PointSpace::new(n);
    let instance = build_cover_instance(n, pi, &seed.blocks);
    let stab = StabChain::from_generators(space.point_count(), &seed.aut_generators).elements();
    assert_eq!(BigCount::from(stab.len()), seed.aut_order);
    let mut out = ExtensionOutcome {
        solutions: 0,
        accepted: Vec::new(),
    };
    let mut on_solution = |chosen: &[u32]| {
        out.solutions += 1;
        let mut blocks = seed.blocks.clone();
        for &oid in chosen {
            blocks.extend_from_slice(&instance.options[oid as usize].blocks);
        }
        blocks.sort_unstable();
        if let Some(class) = accept_solution(n, t, pi, seed, &stab, blocks) {
            out.accepted.push(class);
        }
    };
    match prefix {
        None => instance.solve(&mut on_solution),
        Some(p) => instance.solve_prefix(p, &mut on_solution),
    }
    out
}

/// Census data for one automorphism type: the anchor multiplicity and, per
/// seed class, its stabilizer order and completion count.
#[derive(Clone, Debug)]
pub struct TypeOutcome {
    pub aut_type: AutType,
    pub m: u64,
    pub seed_tallies: Vec<(BigCount, u64)>,
}

/// The full symmetric census at order n: per-type seed statistics and the
/// complete list of isomorphism classes with a nontrivial automorphism,
/// each exactly once.
#[derive(Clone, Debug)]
pub struct SymmetricCensus {
    pub n: usize,
    pub types: Vec<TypeOutcome>,
    pub classes: Vec<SymmetricClass>,
}

/// Classifies every one-factorization of K_n with a nontrivial automorphism:
/// seeds per admissible type, exact-cover completion, canonical acceptance.
pub fn classify_symmetric(n: usize) -> SymmetricCensus {
    let mut types = Vec::new();
    let mut classes: Vec<SymmetricClass> = Vec::new();
    for t in admissible_types(n) {
        let seeds = classify_seeds(n, &t);
        let outcomes: Vec<(BigCount, u64, Vec<SymmetricClass>)> = seeds
            .classes
            .par_iter()
            .map(|s| {
                let out = extend_seed(n, &t, &seeds.pi, s);
                (s.aut_order.clone(), out.solutions, out.accepted)
            })
            .collect();
        let mut seed_tallies = Vec::with_capacity(outcomes.len());
        for (aut, solutions, accepted) in outcomes {
            seed_tallies.push((aut, solutions));
            classes.extend(accepted);
        }
        types.push(TypeOutcome {
            aut_type: t,
            m: seed_m_value(n, &t) as u64,
            seed_tallies,
        });
    }
    let distinct: HashSet<&[u8]> = classes.iter().map(|c| c.canonical_form.as_slice()).collect();
    assert_eq!(
        distinct.len(),
        classes.len(),
        "acceptance must report each class exactly once"
    );
    SymmetricCensus { n, types, classes }
}

/// Tally of classes by automorphism group order: the N_i of the census.
pub fn aut_order_tally(census: &SymmetricCensus) -> BTreeMap<u64, u64> {
    use num_traits::ToPrimitive;
    let mut tally = BTreeMap::new();
    for class in &census.classes {
        let i = class
            .aut_order
            .to_u64()
            .expect("automorphism groups of factorizations are small");
        *tally.entry(i).or_insert(0) += 1;
    }
    tally
}

// ============================================================================
// Tests
// ============================================================================
