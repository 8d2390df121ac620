//! Dense small-graph representation and one-factor (perfect matching) machinery.
//!
//! Graphs live on at most 14 vertices, so the edge set fits in a `u128` bitmask
//! over the n(n−1)/2 unordered pairs: edge {i, j} with i < j sits at bit
//! `i·n − i(i+1)/2 + (j − i − 1)` (row-major upper triangle). The same layout
//! doubles as the serialized canonical form downstream, and gives a total order
//! on graphs for lexicographic tie-breaking.
//!
//! One-factor enumeration is an elementary backtrack: always match the
//! lowest-indexed unmatched vertex, partners in increasing order. That emits
//! factors in lexicographic order of their sorted pair lists, which the
//! resumable-run machinery relies on.

use crate::BigCount;

// ============================================================================
// Edge-bit layout
// ============================================================================

/// Bit position of edge {i, j}, i < j, in the upper-triangle mask for order n.
#[inline(always)]
pub fn edge_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

/// Inverse of [`edge_index`]: the pair {i, j} at bit position `idx`.
pub fn edge_at(n: usize, idx: usize) -> (u8, u8) {
    debug_assert!(idx < n * (n - 1) / 2);
    let mut i = 0usize;
    let mut base = 0usize;
    while base + (n - 1 - i) <= idx {
        base += n - 1 - i;
        i += 1;
    }
    (i as u8, (idx - base + i + 1) as u8)
}

// ============================================================================
// DenseGraph
// ============================================================================

/// A simple graph on `n ≤ 14` vertices as an upper-triangle edge bitmask.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DenseGraph {
    n: u8,
    edges: u128,
}

impl std::fmt::Debug for DenseGraph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "DenseGraph(n={}, edges={{", self.n)?;
        let mut first = true;
        for (i, j) in self.edge_list() {
            if !first {
                write!(f, ", ")?;
            }
            write!(f, "{i}{j:}", i = i, j = j)?;
            first = false;
        }
        write!(f, "}})")
    }
}

impl DenseGraph {
    /// The empty graph on `n` vertices.
    ///
    /// # Panics
    ///
    /// Panics if `n` is 0 or exceeds 14.
    pub fn empty(n: usize) -> Self {
        assert!(n >= 1 && n <= 14, "vertex count must be in 1..=14");
        DenseGraph { n: n as u8, edges: 0 }
    }

    /// The complete graph `K_n`.
    pub fn complete(n: usize) -> Self {
        let mut g = DenseGraph::empty(n);
        g.edges = if n < 2 {
            0
        } else {
            (1u128 << (n * (n - 1) / 2)) - 1
        };
        g
    }

    /// Reconstructs a graph from its raw edge mask (e.g. a canonical form).
    ///
    /// # Panics
    ///
    /// Panics if bits are set beyond the n(n−1)/2 pair positions.
    pub fn from_edge_mask(n: usize, edges: u128) -> Self {
        let g = DenseGraph::complete(n);
        assert!(
            edges & !g.edges == 0,
            "edge mask has bits outside the pair universe"
        );
        DenseGraph { n: n as u8, edges }
    }

    /// Vertex count.
    #[inline(always)]
    pub fn n(&self) -> usize {
        self.n as usize
    }

    /// Raw edge bitmask.
    #[inline(always)]
    pub fn edge_mask(&self) -> u128 {
        self.edges
    }

    /// Number of edges.
    #[inline(always)]
    pub fn edge_count(&self) -> usize {
        self.edges.count_ones() as usize
    }

    /// Whether {i, j} is an edge.
    #[inline(always)]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        self.edges >> edge_index(self.n(), i, j) & 1 == 1
    }

    /// Adds edge {i, j} (idempotent).
    pub fn add_edge(&mut self, i: usize, j: usize) {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        self.edges |= 1u128 << edge_index(self.n(), i, j);
    }

    /// Neighbourhood of `v` as a vertex bitmask.
    #[inline]
    pub fn row(&self, v: usize) -> u16 {
        let n = self.n();
        let mut row = 0u16;
        for w in 0..n {
            if w != v && self.has_edge(v, w) {
                row |= 1 << w;
            }
        }
        row
    }

    /// All adjacency rows at once (cheaper than n calls to [`Self::row`]).
    pub fn rows(&self) -> [u16; 14] {
        let n = self.n();
        let mut rows = [0u16; 14];
        let mut mask = self.edges;
        let mut i = 0usize;
        let mut j = 1usize;
        while mask != 0 {
            let skip = mask.trailing_zeros() as usize;
            mask >>= skip;
            // advance (i, j) by `skip` positions in row-major order
            let mut s = skip;
            while s > 0 {
                let room = n - 1 - j;
                if s <= room {
                    j += s;
                    s = 0;
                } else {
                    s -= room + 1;
                    i += 1;
                    j = i + 1;
                }
            }
            rows[i] |= 1 << j;
            rows[j] |= 1 << i;
            mask &= !1;
        }
        rows
    }

    /// Degree of vertex `v`.
    pub fn degree(&self, v: usize) -> usize {
        self.row(v).count_ones() as usize
    }

    /// True iff every vertex has degree `k`.
    pub fn is_k_regular(&self, k: usize) -> bool {
        (0..self.n()).all(|v| self.degree(v) == k)
    }

    /// Complement within the pair universe on the same vertex set.
    pub fn complement(&self) -> DenseGraph {
        let full = DenseGraph::complete(self.n()).edges;
        DenseGraph {
            n: self.n,
            edges: full & !self.edges,
        }
    }

    /// Edges as sorted (i, j) pairs, i < j, ascending by bit position.
    pub fn edge_list(&self) -> Vec<(u8, u8)> {
        let n = self.n();
        let mut out = Vec::with_capacity(self.edge_count());
        for i in 0..n {
            for j in (i + 1)..n {
                if self.has_edge(i, j) {
                    out.push((i as u8, j as u8));
                }
            }
        }
        out
    }

    /// The lexicographically smallest edge (lowest bit position).
    pub fn lowest_edge(&self) -> Option<(u8, u8)> {
        if self.edges == 0 {
            None
        } else {
            Some(edge_at(self.n(), self.edges.trailing_zeros() as usize))
        }
    }

    /// Union with a one-factor's edges.
    ///
    /// # Errors
    ///
    /// Returns the first overlapping pair if any pair of `f` is already an
    /// edge.
    pub fn union_with_factor(&self, f: &OneFactor) -> Result<DenseGraph, OverlapError> {
        debug_assert_eq!(self.n(), f.n());
        let fm = f.edge_mask();
        if self.edges & fm != 0 {
            let idx = (self.edges & fm).trailing_zeros() as usize;
            return Err(OverlapError {
                pair: edge_at(self.n(), idx),
            });
        }
        Ok(DenseGraph {
            n: self.n,
            edges: self.edges | fm,
        })
    }

    /// Removes a one-factor's edges.
    ///
    /// # Panics
    ///
    /// Panics (debug) if some pair of `f` is not an edge.
    pub fn delete_factor(&self, f: &OneFactor) -> DenseGraph {
        let fm = f.edge_mask();
        debug_assert_eq!(self.edges & fm, fm, "factor is not a subgraph");
        DenseGraph {
            n: self.n,
            edges: self.edges & !fm,
        }
    }

    /// Applies a vertex permutation: vertex v of the result is `perm[v]` of
    /// the input... precisely, edge {i, j} of the input becomes
    /// {perm[i], perm[j]} of the result.
    pub fn relabel(&self, perm: &[u8]) -> DenseGraph {
        let n = self.n();
        debug_assert_eq!(perm.len(), n);
        let mut out = DenseGraph::empty(n);
        for (i, j) in self.edge_list() {
            out.add_edge(perm[i as usize] as usize, perm[j as usize] as usize);
        }
        out
    }

    /// Enumerates the one-factors (perfect matchings) of the graph, restricted
    /// to those containing `through_edge` when given, in lexicographic order
    /// of their sorted pair lists.
    ///
    /// # Panics
    ///
    /// Panics if `through_edge` is given but is not an edge.
    pub fn enumerate_one_factors(&self, through_edge: Option<(u8, u8)>) -> Vec<OneFactor> {
        let mut out = Vec::new();
        self.visit_one_factors(through_edge, |pairs| {
            out.push(OneFactor::from_pairs(self.n(), pairs.to_vec()));
        });
        out
    }

    /// Visitor-form one-factor enumeration: `f` receives each factor's pair
    /// list, sorted ascending. Same order and restriction semantics as
    /// [`Self::enumerate_one_factors`], without per-factor allocation.
    pub fn visit_one_factors<F: FnMut(&[(u8, u8)])>(
        &self,
        through_edge: Option<(u8, u8)>,
        mut f: F,
    ) {
        let n = self.n();
        if n % 2 != 0 {
            return; // odd order: no perfect matching
        }
        let rows = self.rows();
        let full: u16 = if n == 0 { 0 } else { (1 << n) - 1 };
        let mut used: u16 = 0;
        let mut pairs: Vec<(u8, u8)> = Vec::with_capacity(n / 2);
        if let Some((a, b)) = through_edge {
            let (a, b) = if a < b { (a, b) } else { (b, a) };
            assert!(self.has_edge(a as usize, b as usize), "through_edge not an edge");
            used |= (1 << a) | (1 << b);
            pairs.push((a, b));
        }
        fn recurse<F: FnMut(&[(u8, u8)])>(
            rows: &[u16; 14],
            full: u16,
            used: u16,
            pairs: &mut Vec<(u8, u8)>,
            f: &mut F,
        ) {
            if used == full {
                // The pre-matched through-edge may sit out of order; emit sorted.
                if pairs.windows(2).all(|w| w[0] < w[1]) {
                    f(pairs);
                } else {
                    let mut sorted = pairs.clone();
                    sorted.sort_unstable();
                    f(&sorted);
                }
                return;
            }
            let a = (!used).trailing_zeros() as usize;
            let mut cand = rows[a] & !used;
            while cand != 0 {
                let b = cand.trailing_zeros() as usize;
                cand &= cand - 1;
                pairs.push((a as u8, b as u8));
                recurse(rows, full, used | (1 << a) | (1 << b), pairs, f);
                pairs.pop();
            }
        }
        recurse(&rows, full, used, &mut pairs, &mut f);
    }

    /// Number of perfect matchings (without materializing them).
    pub fn count_one_factors(&self) -> u64 {
        let mut count = 0u64;
        self.visit_one_factors(None, |_| count += 1);
        count
    }
}

// ============================================================================
// OneFactor
// ============================================================================

/// A perfect matching: n/2 vertex pairs partitioning {0, …, n−1}, kept sorted.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct OneFactor {
    n: u8,
    pairs: Vec<(u8, u8)>,
}

impl OneFactor {
    /// Builds a one-factor from its pairs (any order; stored sorted).
    ///
    /// # Panics
    ///
    /// Panics if the pairs do not partition {0, …, n−1}.
    pub fn from_pairs(n: usize, mut pairs: Vec<(u8, u8)>) -> Self {
        assert_eq!(pairs.len(), n / 2, "a one-factor has n/2 pairs");
        for p in pairs.iter_mut() {
            if p.0 > p.1 {
                *p = (p.1, p.0);
            }
        }
        pairs.sort_unstable();
        let mut seen = 0u16;
        for &(a, b) in &pairs {
            assert!(a != b && (b as usize) < n, "pair out of range");
            let m = (1u16 << a) | (1u16 << b);
            assert_eq!(seen & m, 0, "vertex repeated across pairs");
            seen |= m;
        }
        assert_eq!(seen.count_ones() as usize, n, "pairs must cover all vertices");
        OneFactor {
            n: n as u8,
            pairs,
        }
    }

    /// Vertex count.
    pub fn n(&self) -> usize {
        self.n as usize
    }

    /// The pairs, sorted ascending.
    pub fn pairs(&self) -> &[(u8, u8)] {
        &self.pairs
    }

    /// The factor's edges as an upper-triangle bitmask.
    pub fn edge_mask(&self) -> u128 {
        let n = self.n();
        let mut mask = 0u128;
        for &(a, b) in &self.pairs {
            mask |= 1u128 << edge_index(n, a as usize, b as usize);
        }
        mask
    }

    /// The factor as a 1-regular [`DenseGraph`].
    pub fn as_graph(&self) -> DenseGraph {
        DenseGraph {
            n: self.n,
            edges: self.edge_mask(),
        }
    }
}

/// The circle-method one-factorization of K_n: factor k pairs vertex n−1
/// with k and pairs {(k+i) mod (n−1), (k−i) mod (n−1)} for the rest. Handy
/// as a concrete, reproducible factorization at any even order.
pub fn round_robin_factorization(n: usize) -> Vec<OneFactor> {
    assert!(n % 2 == 0 && n >= 2, "order must be even and positive");
    let m = n - 1;
    (0..m)
        .map(|k| {
            let mut pairs = vec![((n - 1) as u8, k as u8)];
            for i in 1..n / 2 {
                pairs.push((((k + i) % m) as u8, ((k + m - i) % m) as u8));
            }
            OneFactor::from_pairs(n, pairs)
        })
        .collect()
}

// ============================================================================
// Errors
// ============================================================================

/// A one-factor pair collided with an existing edge during a union.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OverlapError {
    /// The offending pair.
    pub pair: (u8, u8),
}

impl std::fmt::Display for OverlapError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "factor pair {{{}, {}}} is already an edge",
            self.pair.0, self.pair.1
        )
    }
}

impl std::error::Error for OverlapError {}

// ============================================================================
// Brute-force labeled factorization count (test oracle)
// ============================================================================

/// Counts the partitions of the edge set into one-factors, as unordered sets
/// of factors, by direct backtracking. Exponential; intended as an independent
/// oracle for n ≤ 10 (tests use n ≤ 8).
///
/// Each partition is constructed exactly once: the branch always decides the
/// factor containing the lexicographically smallest remaining edge.
pub fn count_labeled_factorizations_bruteforce(g: &DenseGraph) -> BigCount {
    fn go(g: &DenseGraph) -> BigCount {
        if g.edge_mask() == 0 {
            return BigCount::from(1u32);
        }
        let e = g.lowest_edge().expect("nonempty graph");
        let mut total = BigCount::from(0u32);
        if g.n() % 2 != 0 {
            return total;
        }
        g.visit_one_factors(Some(e), |pairs| {
            let f = OneFactor::from_pairs(g.n(), pairs.to_vec());
            total += go(&g.delete_factor(&f));
        });
        total
    }
    go(g)
}

// ============================================================================
// Tests
// ============================================================================
