//! The design representation of one-factorizations: a point set U ∪ V, where
//! U = {u_0, …, u_{n−2}} labels the one-factors and V = {v_0, …, v_{n−1}}
//! the vertices of K_n, and a block {u, v, v′} for every edge {v, v′} lying
//! in factor u. Isomorphisms are the permutations of U ∪ V fixing U and V
//! setwise and mapping blocks to blocks; unlike the graphical form, this
//! makes factor relabelings explicit, so automorphism groups act on points.
//!
//! Isomorphism questions reduce to colored-graph isomorphism of the block
//! incidence graph (points and blocks as vertices, colored by role), which
//! the canon module answers.

use crate::canon::{canonicalize_wide, CanonicalResult, Colored, ColoredGraphWide};
use crate::graphcore::OneFactor;
use crate::perm::Perm;
use crate::BigCount;
use std::collections::HashSet;

// ============================================================================
// PointSpace
// ============================================================================

/// Index scheme for the 2n−1 points: 0…n−2 are U (factor labels), n−1…2n−2
/// are V (vertices).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PointSpace {
    n: u8,
}

impl PointSpace {
    /// The point space for order `n`.
    ///
    /// # Panics
    ///
    /// Panics unless `n` is even and 4 ≤ n ≤ 14.
    pub fn new(n: usize) -> Self {
        assert!(n % 2 == 0 && n >= 4 && n <= 14, "order must be even, 4..=14");
        PointSpace { n: n as u8 }
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    /// Total number of points, 2n−1.
    pub fn point_count(&self) -> usize {
        2 * self.n() - 1
    }

    /// Number of U-points, n−1.
    pub fn u_count(&self) -> usize {
        self.n() - 1
    }

    /// Number of V-points, n.
    pub fn v_count(&self) -> usize {
        self.n()
    }

    /// The point for factor label k.
    pub fn u_point(&self, k: usize) -> u8 {
        debug_assert!(k < self.u_count());
        k as u8
    }

    /// The point for vertex i.
    pub fn v_point(&self, i: usize) -> u8 {
        debug_assert!(i < self.v_count());
        (self.n() - 1 + i) as u8
    }

    pub fn is_u(&self, p: u8) -> bool {
        (p as usize) < self.u_count()
    }

    pub fn is_v(&self, p: u8) -> bool {
        !self.is_u(p) && (p as usize) < self.point_count()
    }

    /// The vertex index of a V-point.
    pub fn v_index(&self, p: u8) -> usize {
        debug_assert!(self.is_v(p));
        p as usize - self.u_count()
    }
}

// ============================================================================
// Validation errors
// ============================================================================

/// Why a factor list or block set is not a one-factorization.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InvalidFactorization {
    /// Expected n−1 factors.
    WrongFactorCount { expected: usize, got: usize },
    /// Two factors share this edge.
    OverlappingFactors { edge: (u8, u8) },
    /// A block is not of the form {u, v, v′}.
    MalformedBlock { block: [u8; 3] },
    /// A {u, v} or {v, v′} pair occurs in two blocks.
    PairCoveredTwice { pair: (u8, u8) },
    /// A required pair occurs in no block.
    PairUncovered { pair: (u8, u8) },
}

impl std::fmt::Display for InvalidFactorization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InvalidFactorization::WrongFactorCount { expected, got } => {
                write!(f, "expected {expected} one-factors, got {got}")
            }
            InvalidFactorization::OverlappingFactors { edge } => {
                write!(f, "edge {{{}, {}}} occurs in two factors", edge.0, edge.1)
            }
            InvalidFactorization::MalformedBlock { block } => {
                write!(
                    f,
                    "block {{{}, {}, {}}} is not a factor label with a vertex pair",
                    block[0], block[1], block[2]
                )
            }
            InvalidFactorization::PairCoveredTwice { pair } => {
                write!(f, "pair {{{}, {}}} covered twice", pair.0, pair.1)
            }
            InvalidFactorization::PairUncovered { pair } => {
                write!(f, "pair {{{}, {}}} covered by no block", pair.0, pair.1)
            }
        }
    }
}

impl std::error::Error for InvalidFactorization {}

// ============================================================================
// Factorization
// ============================================================================

/// A one-factorization as a set of blocks {u, v, v′} over its point space:
/// every {u, v} pair and every {v, v′} pair occurs in exactly one block, and
/// no block holds two U-points.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Factorization {
    n: u8,
    blocks: Vec<[u8; 3]>,
}

impl Factorization {
    /// Encodes an ordered list of n−1 one-factors: factor k's edge {i, j}
    /// becomes the block {u_k, v_i, v_j}.
    ///
    /// # Errors
    ///
    /// Rejects lists that are not a one-factorization of K_n (wrong count,
    /// shared edges — which for n/2-sized disjoint factors is equivalent to
    /// not covering K_n).
    pub fn from_graphical(n: usize, factors: &[OneFactor]) -> Result<Self, InvalidFactorization> {
        let space = PointSpace::new(n);
        if factors.len() != n - 1 {
            return Err(InvalidFactorization::WrongFactorCount {
                expected: n - 1,
                got: factors.len(),
            });
        }
        let mut seen = 0u128;
        let mut blocks = Vec::with_capacity(n * (n - 1) / 2);
        for (k, f) in factors.iter().enumerate() {
            assert_eq!(f.n(), n, "factor order mismatch");
            let fm = f.edge_mask();
            if seen & fm != 0 {
                let idx = (seen & fm).trailing_zeros() as usize;
                return Err(InvalidFactorization::OverlappingFactors {
                    edge: crate::graphcore::edge_at(n, idx),
                });
            }
            seen |= fm;
            for &(i, j) in f.pairs() {
                blocks.push([
                    space.u_point(k),
                    space.v_point(i as usize),
                    space.v_point(j as usize),
                ]);
            }
        }
        // n−1 disjoint factors hold n(n−1)/2 edges: exactly K_n.
        debug_assert_eq!(seen.count_ones() as usize, n * (n - 1) / 2);
        blocks.sort_unstable();
        Ok(Factorization { n: n as u8, blocks })
    }

    /// Builds from an explicit block set, verifying conditions (a)–(c).
    pub fn from_blocks(n: usize, mut blocks: Vec<[u8; 3]>) -> Result<Self, InvalidFactorization> {
        for b in &mut blocks {
            b.sort_unstable();
        }
        blocks.sort_unstable();
        validate_blocks(n, &blocks)?;
        Ok(Factorization { n: n as u8, blocks })
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn space(&self) -> PointSpace {
        PointSpace::new(self.n())
    }

    /// The sorted block list.
    pub fn blocks(&self) -> &[[u8; 3]] {
        &self.blocks
    }

    /// Reads the one-factors back out, indexed by factor label.
    pub fn factors(&self) -> Vec<OneFactor> {
        let space = self.space();
        let mut pairs: Vec<Vec<(u8, u8)>> = vec![Vec::new(); space.u_count()];
        for b in &self.blocks {
            pairs[b[0] as usize].push((
                space.v_index(b[1]) as u8,
                space.v_index(b[2]) as u8,
            ));
        }
        pairs
            .into_iter()
            .map(|p| OneFactor::from_pairs(self.n(), p))
            .collect()
    }

    /// Applies a point permutation (which must fix U and V setwise).
    pub fn relabel(&self, gamma: &Perm) -> Factorization {
        let space = self.space();
        debug_assert_eq!(gamma.degree(), space.point_count());
        debug_assert!((0..space.u_count()).all(|k| space.is_u(gamma.apply(k) as u8)));
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                let mut nb = [
                    gamma.apply(b[0] as usize) as u8,
                    gamma.apply(b[1] as usize) as u8,
                    gamma.apply(b[2] as usize) as u8,
                ];
                nb.sort_unstable();
                nb
            })
            .collect::<Vec<_>>();
        Factorization::from_blocks(self.n(), blocks).expect("relabeling preserves validity")
    }

    /// The block incidence graph: point-vertices colored by side (U = 0,
    /// V = 1) and one block-vertex (color 2) per block, adjacent to its three
    /// points. Color-preserving isomorphism of these graphs is equivalent to
    /// isomorphism of the factorizations.
    pub fn to_colored_graph(&self) -> ColoredGraphWide {
        let space = self.space();
        let pts = space.point_count();
        let mut colors = vec![0u16; pts + self.blocks.len()];
        for p in 0..pts {
            colors[p] = if space.is_u(p as u8) { 0 } else { 1 };
        }
        for c in colors.iter_mut().skip(pts) {
            *c = 2;
        }
        let mut g = Colored::new(colors);
        for (bi, b) in self.blocks.iter().enumerate() {
            for &p in b {
                g.add_edge(pts + bi, p as usize);
            }
        }
        g
    }

    /// Canonicalizes the incidence graph (labeling, form, automorphisms).
    pub fn canonical(&self) -> CanonicalResult {
        canonicalize_wide(&self.to_colored_graph())
    }

    /// The automorphism group as permutations of the points: order and
    /// generators. (Block-vertex images are determined by the point images,
    /// so restriction loses nothing.)
    pub fn aut_group(&self) -> (BigCount, Vec<Perm>) {
        let result = self.canonical();
        let pts = self.space().point_count();
        let gens = result
            .aut_generators
            .iter()
            .map(|g| restrict_perm(g, pts))
            .collect();
        (result.aut_order, gens)
    }

    /// Every prime-order subgroup of the automorphism group, each reported
    /// once with its fixed-point type.
    pub fn prime_subgroups(&self) -> Vec<PrimeGroup> {
        let (order, gens) = self.aut_group();
        let space = self.space();
        let elements = enumerate_group(space.point_count(), &gens);
        assert_eq!(
            BigCount::from(elements.len()),
            order,
            "generator closure disagrees with reported group order"
        );
        prime_subgroups_of(&elements, space)
    }
}

/// Checks conditions (a)–(c) on a sorted block list: every {u, v} and
/// {v, v′} pair exactly once, no two U-points in a block.
pub fn validate_blocks(n: usize, blocks: &[[u8; 3]]) -> Result<(), InvalidFactorization> {
    let space = PointSpace::new(n);
    let mut uv = vec![0u16; space.u_count()];
    let mut vv = 0u128;
    for b in blocks {
        // Sorted blocks put the U-point (if unique) first.
        if !(space.is_u(b[0]) && space.is_v(b[1]) && space.is_v(b[2]) && b[1] != b[2]) {
            return Err(InvalidFactorization::MalformedBlock { block: *b });
        }
        let (u, i, j) = (b[0] as usize, space.v_index(b[1]), space.v_index(b[2]));
        for v in [i, j] {
            if uv[u] >> v & 1 == 1 {
                return Err(InvalidFactorization::PairCoveredTwice {
                    pair: (b[0], space.v_point(v)),
                });
            }
            uv[u] |= 1 << v;
        }
        let e = crate::graphcore::edge_index(n, i.min(j), i.max(j));
        if vv >> e & 1 == 1 {
            return Err(InvalidFactorization::PairCoveredTwice { pair: (b[1], b[2]) });
        }
        vv |= 1 << e;
    }
    for u in 0..space.u_count() {
        if uv[u] != (1 << n) - 1 {
            let v = uv[u].trailing_ones() as usize;
            return Err(InvalidFactorization::PairUncovered {
                pair: (space.u_point(u), space.v_point(v)),
            });
        }
    }
    if vv != (1u128 << (n * (n - 1) / 2)) - 1 {
        let e = vv.trailing_ones() as usize;
        let (i, j) = crate::graphcore::edge_at(n, e);
        return Err(InvalidFactorization::PairUncovered {
            pair: (space.v_point(i as usize), space.v_point(j as usize)),
        });
    }
    Ok(())
}

// ============================================================================
// Prime-order subgroups
// ============================================================================

/// A subgroup of prime order within an automorphism group, identified by a
/// generator and its fixed-point counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeGroup {
    pub p: usize,
    /// One generator (the lexicographically least nonidentity element).
    pub generator: Perm,
    /// Fixed points in U.
    pub f_u: usize,
    /// Fixed points in V.
    pub f_v: usize,
}

/// Restricts a permutation to the first `pts` points (which it must fix
/// setwise).
pub(crate) fn restrict_perm(g: &Perm, pts: usize) -> Perm {
    let img: Vec<u8> = g.images()[..pts].to_vec();
    debug_assert!(img.iter().all(|&x| (x as usize) < pts));
    Perm::from_images(img)
}

/// All elements of the group generated by `gens`, by breadth-first closure.
pub(crate) fn enumerate_group(degree: usize, gens: &[Perm]) -> Vec<Perm> {
    let mut seen: HashSet<Vec<u8>> = HashSet::new();
    let id = Perm::identity(degree);
    seen.insert(id.images().to_vec());
    let mut frontier = vec![id];
    let mut all = Vec::new();
    while let Some(g) = frontier.pop() {
        for s in gens {
            let h = Perm::compose(s, &g);
            if seen.insert(h.images().to_vec()) {
                frontier.push(h);
            }
        }
        all.push(g);
    }
    all
}

/// Groups the prime-order elements of an enumerated group into subgroups.
pub(crate) fn prime_subgroups_of(elements: &[Perm], space: PointSpace) -> Vec<PrimeGroup> {
    let mut seen: HashSet<Vec<u8>> = HashSet::new();
    let mut out = Vec::new();
    for g in elements {
        let p = g.element_order();
        if g.is_identity() || !is_prime(p) {
            continue;
        }
        // The subgroup ⟨g⟩ is keyed by its least nonidentity member.
        let mut members: Vec<Perm> = (1..p).map(|j| g.pow(j)).collect();
        members.sort_unstable_by(|a, b| a.images().cmp(b.images()));
        let least = members.remove(0);
        if !seen.insert(least.images().to_vec()) {
            continue;
        }
        let f_u = least.fixed_in_range(0, space.u_count());
        let f_v = least.fixed_in_range(space.u_count(), space.point_count());
        out.push(PrimeGroup {
            p: p as usize,
            generator: least,
            f_u,
            f_v,
        });
    }
    out.sort_unstable_by(|a, b| {
        (a.p, a.f_u, a.f_v, a.generator.images())
            .cmp(&(b.p, b.f_u, b.f_v, b.generator.images()))
    });
    out
}

pub(crate) fn is_prime(x: u64) -> bool {
    if x < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= x {
        if x % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

// ============================================================================
// Tests
// ============================================================================
