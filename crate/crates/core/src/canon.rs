//! Canonical labeling, canonical forms, and automorphism groups for small
//! vertex-colored graphs, via individualization–refinement (McKay style).
//!
//! The search refines an ordered partition of the vertices to its coarsest
//! equitable refinement, individualizes a vertex from the first smallest
//! non-singleton cell, and recurses; each discrete partition (leaf) is a
//! candidate labeling. The canonical labeling is the leaf whose relabeled
//! upper-triangle adjacency bitmask is smallest (read as a little-endian
//! multi-word integer); pairs of leaves producing identical bitmasks yield
//! automorphisms, which both prune the search (orbit pruning among the
//! candidates of a node) and feed a stabilizer chain for the exact group
//! order.
//!
//! Two graphs with equal vertex counts and equal color-class size sequences
//! are isomorphic (color-preservingly) if and only if their canonical forms
//! are equal; forms are only ever compared within such pools. For plain
//! graphs on up to 14 vertices the form is exactly 16 bytes: the bitmask of
//! [`DenseGraph::edge_mask`] after relabeling, zero-padded, little-endian.
//!
//! `ColoredGraph` covers up to 64 vertices; `ColoredGraphWide` (128) carries
//! the block-incidence encodings of factorizations, which outgrow 64 vertices
//! at n = 14. Both instantiate the same const-generic engine.

use crate::graphcore::DenseGraph;
use crate::perm::{Perm, StabChain};
use crate::BigCount;
use std::cmp::Ordering;
use std::collections::VecDeque;

// ============================================================================
// Bitset rows
// ============================================================================

#[inline(always)]
fn row_get<const W: usize>(r: &[u64; W], v: usize) -> bool {
    r[v >> 6] >> (v & 63) & 1 == 1
}

#[inline(always)]
fn row_set<const W: usize>(r: &mut [u64; W], v: usize) {
    r[v >> 6] |= 1 << (v & 63);
}

#[inline(always)]
fn row_and_count<const W: usize>(a: &[u64; W], b: &[u64; W]) -> u32 {
    let mut c = 0;
    for w in 0..W {
        c += (a[w] & b[w]).count_ones();
    }
    c
}

// ============================================================================
// Colored graphs
// ============================================================================

/// A simple vertex-colored graph on at most `64·W` vertices, adjacency as
/// per-vertex bitset rows.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Colored<const W: usize> {
    m: usize,
    rows: Vec<[u64; W]>,
    colors: Vec<u16>,
}

/// The standard instantiation: up to 64 vertices.
pub type ColoredGraph = Colored<1>;

/// Wide instantiation for block-incidence encodings: up to 128 vertices.
pub type ColoredGraphWide = Colored<2>;

impl<const W: usize> Colored<W> {
    /// An edgeless colored graph; `colors[v]` is vertex v's color.
    ///
    /// # Panics
    ///
    /// Panics if there are no vertices, more than `64·W`, or the colors do
    /// not form a contiguous range starting at 0.
    pub fn new(colors: Vec<u16>) -> Self {
        let m = colors.len();
        assert!(m >= 1 && m <= 64 * W, "vertex count must be in 1..={}", 64 * W);
        let max = *colors.iter().max().unwrap() as usize;
        let mut present = vec![false; max + 1];
        for &c in &colors {
            present[c as usize] = true;
        }
        assert!(
            present.iter().all(|&p| p),
            "colors must form a contiguous range starting at 0"
        );
        Colored {
            m,
            rows: vec![[0u64; W]; m],
            colors,
        }
    }

    /// Vertex count.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Vertex v's color.
    pub fn color(&self, v: usize) -> u16 {
        self.colors[v]
    }

    /// Adds edge {u, v} (idempotent).
    ///
    /// # Panics
    ///
    /// Panics on a loop or out-of-range vertex.
    pub fn add_edge(&mut self, u: usize, v: usize) {
        assert!(u != v && u < self.m && v < self.m, "invalid edge");
        row_set(&mut self.rows[u], v);
        row_set(&mut self.rows[v], u);
    }

    /// Whether {u, v} is an edge.
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        row_get(&self.rows[u], v)
    }

    /// Degree of vertex v.
    pub fn degree(&self, v: usize) -> usize {
        let mut d = 0;
        for w in 0..W {
            d += self.rows[v][w].count_ones() as usize;
        }
        d
    }

    /// The graph with vertex v renamed to `perm(v)` (colors follow vertices).
    pub fn relabel(&self, perm: &Perm) -> Self {
        assert_eq!(perm.degree(), self.m);
        let mut colors = vec![0u16; self.m];
        for v in 0..self.m {
            colors[perm.apply(v)] = self.colors[v];
        }
        let mut out = Colored::new(colors);
        for u in 0..self.m {
            for v in (u + 1)..self.m {
                if self.has_edge(u, v) {
                    out.add_edge(perm.apply(u), perm.apply(v));
                }
            }
        }
        out
    }
}

impl ColoredGraph {
    /// A plain (uniformly colored) graph from a dense bitmask graph.
    pub fn from_dense(g: &DenseGraph) -> ColoredGraph {
        let mut out = Colored::new(vec![0u16; g.n()]);
        for (i, j) in g.edge_list() {
            out.add_edge(i as usize, j as usize);
        }
        out
    }

    /// Overwrites this graph with a plain copy of `g`, reusing buffers.
    fn assign_dense(&mut self, g: &DenseGraph) {
        let n = g.n();
        self.m = n;
        self.colors.clear();
        self.colors.resize(n, 0);
        self.rows.clear();
        self.rows.resize(n, [0u64; 1]);
        let rows = g.rows();
        for v in 0..n {
            self.rows[v][0] = rows[v] as u64;
        }
    }
}

// ============================================================================
// CanonicalResult
// ============================================================================

/// Output of [`canonicalize`]: a canonical labeling with its form and the
/// color-preserving automorphism group.
#[derive(Clone, Debug)]
pub struct CanonicalResult {
    /// Relabeling map: vertex v of the input becomes vertex
    /// `canonical_labeling(v)` of the canonical graph.
    pub canonical_labeling: Perm,
    /// Serialized canonical adjacency: upper-triangle bitmask of the
    /// relabeled graph, little-endian, zero-padded to at least 16 bytes
    /// (exactly 16 for plain graphs on ≤ 14 vertices).
    pub canonical_form: Vec<u8>,
    /// Order of the color-preserving automorphism group.
    pub aut_order: BigCount,
    /// Generators of the automorphism group (empty when trivial).
    pub aut_generators: Vec<Perm>,
}

// ============================================================================
// Partition frames
// ============================================================================

/// An ordered partition: `pi` lists vertices grouped by cell, `pos` is its
/// inverse, and `cstart[p]` is the start position of the cell containing
/// position p. Cells are the maximal runs with equal `cstart`.
#[derive(Clone, Default)]
struct Frame {
    pi: Vec<u8>,
    pos: Vec<u8>,
    cstart: Vec<u8>,
}

impl Frame {
    fn resize(&mut self, m: usize) {
        self.pi.resize(m, 0);
        self.pos.resize(m, 0);
        self.cstart.resize(m, 0);
    }

    fn assign_from(&mut self, other: &Frame) {
        self.pi.copy_from_slice(&other.pi);
        self.pos.copy_from_slice(&other.pos);
        self.cstart.copy_from_slice(&other.cstart);
    }

    #[inline]
    fn cell_end(&self, s: usize) -> usize {
        let m = self.pi.len();
        let mut e = s + 1;
        while e < m && self.cstart[e] as usize == s {
            e += 1;
        }
        e
    }

    /// First smallest non-singleton cell, in partition order.
    fn target_cell(&self) -> Option<(usize, usize)> {
        let m = self.pi.len();
        let mut best: Option<(usize, usize)> = None;
        let mut s = 0;
        while s < m {
            let e = self.cell_end(s);
            if e - s >= 2 && best.map_or(true, |(bs, be)| e - s < be - bs) {
                best = Some((s, e));
                if e - s == 2 {
                    break; // cannot improve
                }
            }
            s = e;
        }
        best
    }

    /// Moves v to the front of its cell, splitting off the singleton {v}.
    /// Returns the singleton's start position.
    fn individualize(&mut self, v: usize) -> usize {
        let p = self.pos[v] as usize;
        let s = self.cstart[p] as usize;
        let e = self.cell_end(s);
        debug_assert!(e - s >= 2);
        self.pi.swap(p, s);
        let moved = self.pi[p];
        self.pos[moved as usize] = p as u8;
        self.pos[v] = s as u8;
        for q in (s + 1)..e {
            self.cstart[q] = (s + 1) as u8;
        }
        s
    }
}

// ============================================================================
// Refinement
// ============================================================================

#[derive(Default)]
struct RefineScratch {
    queue: VecDeque<u8>,
    queued: Vec<bool>,
    keys: Vec<u32>,
    // counting-sort scratch
    cnt: Vec<u32>,
    outv: Vec<u8>,
    outk: Vec<u32>,
    frags: Vec<(usize, usize)>,
}

impl RefineScratch {
    fn resize(&mut self, m: usize) {
        self.queue.clear();
        self.queued.resize(m, false);
        self.queued.fill(false);
        self.keys.resize(m, 0);
        self.cnt.resize(m + 2, 0);
        self.outv.resize(m, 0);
        self.outk.resize(m, 0);
    }
}

/// Refines `fr` to the coarsest equitable partition reachable from it,
/// processing splitter cells from `ws.queue` (and any cells they split). A
/// final verification sweep re-queues any remaining non-equitable splitter,
/// so the result is equitable regardless of worklist bookkeeping. All steps
/// are deterministic and positional, which makes the outcome equivariant
/// under vertex relabeling.
fn refine<const W: usize>(g: &Colored<W>, fr: &mut Frame, ws: &mut RefineScratch) {
    let m = g.m;
    loop {
        while let Some(s8) = ws.queue.pop_front() {
            let s = s8 as usize;
            ws.queued[s] = false;
            let e = fr.cell_end(s);
            let mut sm = [0u64; W];
            for p in s..e {
                row_set(&mut sm, fr.pi[p] as usize);
            }
            let mut cs = 0;
            while cs < m {
                let ce = fr.cell_end(cs);
                if ce - cs >= 2 {
                    split_cell(g, fr, ws, &sm, cs, ce);
                }
                cs = ce;
            }
        }
        // Verification sweep: re-queue the first splitter that still
        // distinguishes vertices within some cell.
        match find_violation(g, fr) {
            None => return,
            Some(s) => {
                ws.queue.push_back(s as u8);
                ws.queued[s] = true;
            }
        }
    }
}

/// Splits cell [cs, ce) by the degree of its vertices into the splitter mask
/// `sm`, enqueueing new fragments per the all-but-largest rule.
fn split_cell<const W: usize>(
    g: &Colored<W>,
    fr: &mut Frame,
    ws: &mut RefineScratch,
    sm: &[u64; W],
    cs: usize,
    ce: usize,
) {
    let width = ce - cs;
    let mut lo = u32::MAX;
    let mut hi = 0u32;
    for p in cs..ce {
        let k = row_and_count(&g.rows[fr.pi[p] as usize], sm);
        ws.keys[p] = k;
        lo = lo.min(k);
        hi = hi.max(k);
    }
    if lo == hi {
        return;
    }
    // Stable counting sort of positions cs..ce by key (keys ≤ splitter size ≤ m).
    let span = (hi - lo) as usize + 1;
    ws.cnt[..span].fill(0);
    for p in cs..ce {
        ws.cnt[(ws.keys[p] - lo) as usize] += 1;
    }
    let mut acc = 0u32;
    for c in ws.cnt[..span].iter_mut() {
        let here = *c;
        *c = acc;
        acc += here;
    }
    for p in cs..ce {
        let slot = ws.cnt[(ws.keys[p] - lo) as usize] as usize;
        ws.cnt[(ws.keys[p] - lo) as usize] += 1;
        ws.outv[slot] = fr.pi[p];
        ws.outk[slot] = ws.keys[p];
    }
    for off in 0..width {
        let p = cs + off;
        fr.pi[p] = ws.outv[off];
        fr.pos[ws.outv[off] as usize] = p as u8;
        ws.keys[p] = ws.outk[off];
    }
    // Fragment boundaries.
    ws.frags.clear();
    let mut fs = cs;
    for p in (cs + 1)..ce {
        if ws.keys[p] != ws.keys[p - 1] {
            ws.frags.push((fs, p));
            fs = p;
        }
    }
    ws.frags.push((fs, ce));
    for &(a, b) in &ws.frags {
        for p in a..b {
            fr.cstart[p] = a as u8;
        }
    }
    // Enqueue rule: if the parent cell was pending, all fragments must be
    // processed (the pending entry now denotes the first); otherwise all but
    // one largest fragment suffice.
    if ws.queued[cs] {
        for &(a, _) in ws.frags.iter().skip(1) {
            if !ws.queued[a] {
                ws.queue.push_back(a as u8);
                ws.queued[a] = true;
            }
        }
    } else {
        let mut big = 0;
        for (idx, &(a, b)) in ws.frags.iter().enumerate() {
            if b - a > ws.frags[big].1 - ws.frags[big].0 {
                big = idx;
            }
        }
        for (idx, &(a, _)) in ws.frags.iter().enumerate() {
            if idx != big && !ws.queued[a] {
                ws.queue.push_back(a as u8);
                ws.queued[a] = true;
            }
        }
    }
}

/// First splitter cell (by partition order) that still splits some cell, or
/// None when the partition is equitable.
fn find_violation<const W: usize>(g: &Colored<W>, fr: &mut Frame) -> Option<usize> {
    let m = g.m;
    let mut s = 0;
    while s < m {
        let e = fr.cell_end(s);
        let mut sm = [0u64; W];
        for p in s..e {
            row_set(&mut sm, fr.pi[p] as usize);
        }
        let mut cs = 0;
        while cs < m {
            let ce = fr.cell_end(cs);
            if ce - cs >= 2 {
                let k0 = row_and_count(&g.rows[fr.pi[cs] as usize], &sm);
                for p in (cs + 1)..ce {
                    if row_and_count(&g.rows[fr.pi[p] as usize], &sm) != k0 {
                        return Some(s);
                    }
                }
            }
            cs = ce;
        }
        s = e;
    }
    None
}

// ============================================================================
// Search
// ============================================================================

#[derive(Default, Clone)]
struct Leaf {
    set: bool,
    pi: Vec<u8>,
    pos: Vec<u8>,
    mask: Vec<u64>,
}

impl Leaf {
    fn store(&mut self, fr: &Frame, mask: &[u64]) {
        self.set = true;
        self.pi.clear();
        self.pi.extend_from_slice(&fr.pi);
        self.pos.clear();
        self.pos.extend_from_slice(&fr.pos);
        self.mask.clear();
        self.mask.extend_from_slice(mask);
    }
}

/// Reusable canonicalization engine. One instance per thread; the free
/// functions below wrap a fresh instance for one-off calls.
pub struct Canonizer<const W: usize> {
    m: usize,
    frames: Vec<Frame>,
    scratch: RefineScratch,
    path: Vec<u8>,
    cand: Vec<Vec<u8>>,
    expl: Vec<Vec<u8>>,
    first: Leaf,
    best: Leaf,
    leaf_mask: Vec<u64>,
    uf: Vec<u8>,
    gens: Vec<Perm>,
    chain: StabChain,
    dense_buf: Colored<1>,
}

impl<const W: usize> Default for Canonizer<W> {
    fn default() -> Self {
        Canonizer {
            m: 0,
            frames: Vec::new(),
            scratch: RefineScratch::default(),
            path: Vec::new(),
            cand: Vec::new(),
            expl: Vec::new(),
            first: Leaf::default(),
            best: Leaf::default(),
            leaf_mask: Vec::new(),
            uf: Vec::new(),
            gens: Vec::new(),
            chain: StabChain::new(0),
            dense_buf: Colored::default(),
        }
    }
}

impl<const W: usize> Canonizer<W> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Canonicalizes `g`; see [`canonicalize`].
    pub fn run(&mut self, g: &Colored<W>) -> CanonicalResult {
        self.search(g);
        let labeling = Perm::from_images(self.best.pos.clone());
        let form = mask_to_bytes(&self.best.mask, g.m);
        CanonicalResult {
            canonical_labeling: labeling,
            canonical_form: form,
            aut_order: self.chain.order(),
            aut_generators: self.gens.clone(),
        }
    }

    /// Canonical form only (identical bytes to [`Self::run`], skipping the
    /// result assembly). The hot path of level accumulation.
    pub fn form(&mut self, g: &Colored<W>) -> Vec<u8> {
        self.search(g);
        mask_to_bytes(&self.best.mask, g.m)
    }

    /// Order of the color-preserving automorphism group alone.
    pub fn aut_order(&mut self, g: &Colored<W>) -> BigCount {
        self.search(g);
        self.chain.order()
    }

    /// Canonical labeling alone (input vertex → canonical position),
    /// skipping form and group assembly.
    pub fn labeling(&mut self, g: &Colored<W>) -> Perm {
        self.search(g);
        Perm::from_images(self.best.pos.clone())
    }

    fn search(&mut self, g: &Colored<W>) {
        let m = g.m;
        self.prepare(m);
        self.initial_partition(g);
        refine(g, &mut self.frames[0], &mut self.scratch);
        self.node(g, 0);
        debug_assert!(self.best.set);
    }

    fn prepare(&mut self, m: usize) {
        self.m = m;
        if self.frames.len() < m + 2 {
            self.frames.resize_with(m + 2, Frame::default);
            self.cand.resize_with(m + 2, Vec::new);
            self.expl.resize_with(m + 2, Vec::new);
        }
        for fr in &mut self.frames {
            fr.resize(m);
        }
        self.scratch.resize(m);
        self.path.clear();
        self.first.set = false;
        self.best.set = false;
        self.uf.resize(m, 0);
        self.gens.clear();
        self.chain = StabChain::new(m);
    }

    /// Initial partition: vertices sorted by (color, degree, triangle count),
    /// one cell per distinct value, queued in full for refinement.
    fn initial_partition(&mut self, g: &Colored<W>) {
        let m = g.m;
        let mut inv = vec![0u64; m];
        for v in 0..m {
            let deg = g.degree(v) as u64;
            let mut tri2 = 0u64; // twice the triangle count through v
            for w in 0..m {
                if row_get(&g.rows[v], w) {
                    tri2 += row_and_count(&g.rows[v], &g.rows[w]) as u64;
                }
            }
            inv[v] = (g.colors[v] as u64) << 40 | deg << 20 | tri2 / 2;
        }
        let fr = &mut self.frames[0];
        let mut order: Vec<u8> = (0..m as u8).collect();
        order.sort_by_key(|&v| inv[v as usize]);
        for (p, &v) in order.iter().enumerate() {
            fr.pi[p] = v;
            fr.pos[v as usize] = p as u8;
        }
        let mut s = 0;
        while s < m {
            let mut e = s + 1;
            while e < m && inv[fr.pi[e] as usize] == inv[fr.pi[s] as usize] {
                e += 1;
            }
            for p in s..e {
                fr.cstart[p] = s as u8;
            }
            self.scratch.queue.push_back(s as u8);
            self.scratch.queued[s] = true;
            s = e;
        }
    }

    fn node(&mut self, g: &Colored<W>, depth: usize) {
        let (ts, te) = match self.frames[depth].target_cell() {
            None => {
                self.leaf(g, depth);
                return;
            }
            Some(c) => c,
        };
        {
            let cand = &mut self.cand[depth];
            cand.clear();
            cand.extend_from_slice(&self.frames[depth].pi[ts..te]);
            cand.sort_unstable();
            self.expl[depth].clear();
        }
        for i in 0..self.cand[depth].len() {
            let v = self.cand[depth][i];
            if self.pruned(v) {
                continue;
            }
            {
                let (a, b) = self.frames.split_at_mut(depth + 1);
                b[0].assign_from(&a[depth]);
            }
            let s = self.frames[depth + 1].individualize(v as usize);
            self.scratch.queue.clear();
            self.scratch.queued.fill(false);
            self.scratch.queue.push_back(s as u8);
            self.scratch.queued[s] = true;
            refine(g, &mut self.frames[depth + 1], &mut self.scratch);
            self.path.push(v);
            self.node(g, depth + 1);
            self.path.pop();
            self.expl[depth].push(v);
        }
    }

    /// Orbit pruning: skip candidate v when a known automorphism fixing the
    /// individualized path pointwise maps it into the orbit of an already
    /// explored sibling. Such a subtree is a mirror image of an explored one.
    fn pruned(&mut self, v: u8) -> bool {
        if self.gens.is_empty() {
            return false;
        }
        let depth = self.path.len();
        let expl = &self.expl[depth];
        if expl.is_empty() {
            return false;
        }
        let m = self.m;
        for x in 0..m {
            self.uf[x] = x as u8;
        }
        fn find(uf: &mut [u8], mut x: usize) -> usize {
            while uf[x] as usize != x {
                let up = uf[uf[x] as usize];
                uf[x] = up;
                x = up as usize;
            }
            x
        }
        for gperm in &self.gens {
            if self.path.iter().any(|&u| gperm.apply(u as usize) != u as usize) {
                continue;
            }
            for x in 0..m {
                let a = find(&mut self.uf, x);
                let b = find(&mut self.uf, gperm.apply(x));
                if a != b {
                    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                    self.uf[hi] = lo as u8;
                }
            }
        }
        let rv = find(&mut self.uf, v as usize);
        // Split borrow: re-walk explored list by index against uf.
        for i in 0..self.expl[depth].len() {
            let u = self.expl[depth][i];
            if find(&mut self.uf, u as usize) == rv {
                return true;
            }
        }
        false
    }

    fn leaf(&mut self, g: &Colored<W>, depth: usize) {
        let m = g.m;
        let limbs = (m * (m - 1) / 2 + 63) / 64;
        self.leaf_mask.clear();
        self.leaf_mask.resize(limbs.max(1), 0);
        {
            let fr = &self.frames[depth];
            let mut bit = 0usize;
            for p in 0..m {
                let u = fr.pi[p] as usize;
                for q in (p + 1)..m {
                    if row_get(&g.rows[u], fr.pi[q] as usize) {
                        self.leaf_mask[bit >> 6] |= 1 << (bit & 63);
                    }
                    bit += 1;
                }
            }
        }
        if !self.first.set {
            self.first.store(&self.frames[depth], &self.leaf_mask);
            self.best.store(&self.frames[depth], &self.leaf_mask);
            return;
        }
        if self.leaf_mask == self.first.mask {
            self.record_automorphism(depth, true);
            return;
        }
        match cmp_masks(&self.leaf_mask, &self.best.mask) {
            Ordering::Less => {
                let mask = std::mem::take(&mut self.leaf_mask);
                self.best.store(&self.frames[depth], &mask);
                self.leaf_mask = mask;
            }
            Ordering::Equal => self.record_automorphism(depth, false),
            Ordering::Greater => {}
        }
    }

    /// The current leaf matches the stored first/best leaf's bitmask, so
    /// composing the labelings yields an automorphism.
    fn record_automorphism(&mut self, depth: usize, against_first: bool) {
        let reference = if against_first { &self.first } else { &self.best };
        let fr = &self.frames[depth];
        let m = self.m;
        let mut img = vec![0u8; m];
        for v in 0..m {
            img[v] = reference.pi[fr.pos[v] as usize];
        }
        let alpha = Perm::from_images(img);
        if alpha.is_identity() {
            return;
        }
        if !self.chain.contains(&alpha) {
            self.chain.insert(alpha.clone());
            self.gens.push(alpha);
        }
    }
}

impl Canonizer<1> {
    /// Canonical 16-byte form of a plain graph on ≤ 14 vertices, reusing all
    /// internal buffers. The hot path of the level pipeline.
    pub fn dense_form(&mut self, g: &DenseGraph) -> [u8; 16] {
        let mut cg = std::mem::take(&mut self.dense_buf);
        cg.assign_dense(g);
        self.search(&cg);
        self.dense_buf = cg;
        let mut out = [0u8; 16];
        out[..8].copy_from_slice(&self.best.mask[0].to_le_bytes());
        if self.best.mask.len() > 1 {
            out[8..].copy_from_slice(&self.best.mask[1].to_le_bytes());
        }
        out
    }

    /// Full canonicalization of a plain graph, reusing internal buffers.
    pub fn dense_result(&mut self, g: &DenseGraph) -> CanonicalResult {
        let mut cg = std::mem::take(&mut self.dense_buf);
        cg.assign_dense(g);
        let r = self.run(&cg);
        self.dense_buf = cg;
        r
    }
}

fn cmp_masks(a: &[u64], b: &[u64]) -> Ordering {
    debug_assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().rev().zip(b.iter().rev()) {
        match x.cmp(y) {
            Ordering::Equal => {}
            other => return other,
        }
    }
    Ordering::Equal
}

/// Little-endian serialization of a canonical bitmask, zero-padded to at
/// least 16 bytes.
fn mask_to_bytes(mask: &[u64], m: usize) -> Vec<u8> {
    let nbytes = ((m * (m - 1) / 2 + 7) / 8).max(16);
    let mut out = vec![0u8; nbytes];
    for (i, limb) in mask.iter().enumerate() {
        for (j, byte) in limb.to_le_bytes().iter().enumerate() {
            let at = i * 8 + j;
            if at < nbytes {
                out[at] = *byte;
            }
        }
    }
    out
}

// ============================================================================
// Entry points
// ============================================================================

/// Canonicalizes a colored graph: canonical labeling, canonical form, and
/// the color-preserving automorphism group with its exact order.
pub fn canonicalize(g: &ColoredGraph) -> CanonicalResult {
    Canonizer::new().run(g)
}

/// [`canonicalize`] for the wide (≤ 128 vertex) instantiation.
pub fn canonicalize_wide(g: &ColoredGraphWide) -> CanonicalResult {
    Canonizer::new().run(g)
}

/// Automorphism group order of a plain (uncolored) graph.
pub fn aut_order_graph(g: &DenseGraph) -> BigCount {
    canonicalize(&ColoredGraph::from_dense(g)).aut_order
}

/// Canonical form of a plain graph on ≤ 14 vertices as its 16-byte key.
pub fn canonical_form_dense(g: &DenseGraph) -> [u8; 16] {
    Canonizer::new().dense_form(g)
}

// ============================================================================
// Tests
// ============================================================================

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphcore::edge_index;
    use proptest::prelude::*;

    fn graph_from_mask(m: usize, mask: u32) -> ColoredGraph {
        let mut g = Colored::new(vec![0u16; m]);
        let mut idx = 0;
        for i in 0..m {
            for j in (i + 1)..m {
                if mask >> idx & 1 == 1 {
                    g.add_edge(i, j);
                }
                idx += 1;
            }
        }
        g
    }

    fn all_perms(m: usize) -> Vec<Perm> {
        fn heap(v: &mut Vec<u8>, k: usize, out: &mut Vec<Perm>) {
            if k <= 1 {
                out.push(Perm::from_images(v.clone()));
                return;
            }
            for i in 0..k {
                heap(v, k - 1, out);
                if k % 2 == 0 {
                    v.swap(i, k - 1);
                } else {
                    v.swap(0, k - 1);
                }
            }
        }
        let mut v: Vec<u8> = (0..m as u8).collect();
        let mut out = Vec::new();
        heap(&mut v, m, &mut out);
        out
    }

    fn brute_aut_order(g: &ColoredGraph, perms: &[Perm]) -> u64 {
        perms.iter().filter(|p| &g.relabel(p) == g).count() as u64
    }

    fn cycle(m: usize) -> ColoredGraph {
        let mut g = Colored::new(vec![0u16; m]);
        for v in 0..m {
            g.add_edge(v, (v + 1) % m);
        }
        g
    }

    // ----- structured automorphism groups -------------------------------------

    #[test]
    fn complete_graph_aut_is_full_symmetric() {
        let g = ColoredGraph::from_dense(&DenseGraph::complete(14));
        let r = canonicalize(&g);
        assert_eq!(r.aut_order, crate::factorial(14));
        assert_eq!(aut_order_graph(&DenseGraph::empty(14)), crate::factorial(14));
    }

    #[test]
    fn perfect_matching_aut_is_wreath_product() {
        // 2^7 · 7! = 645120: swap within pairs, permute pairs.
        let mut g = DenseGraph::empty(14);
        for i in 0..7 {
            g.add_edge(2 * i, 2 * i + 1);
        }
        assert_eq!(aut_order_graph(&g), BigCount::from(645_120u32));
    }

    #[test]
    fn hexagon_aut_is_dihedral() {
        assert_eq!(canonicalize(&cycle(6)).aut_order, BigCount::from(12u32));
    }

    #[test]
    fn petersen_graph_aut_is_120() {
        let mut g = Colored::new(vec![0u16; 10]);
        for i in 0..5 {
            g.add_edge(i, (i + 1) % 5); // outer 5-cycle
            g.add_edge(i, i + 5); // spokes
            g.add_edge(5 + i, 5 + (i + 2) % 5); // inner pentagram
        }
        let r = canonicalize(&g);
        assert_eq!(r.aut_order, BigCount::from(120u32));
    }

    #[test]
    fn two_disjoint_7_cycles_aut_is_392() {
        // Each 7-cycle contributes a dihedral group of order 14, and the two
        // components swap: 14 · 14 · 2 = 392. The analogous 6-vertex case
        // (two triangles, 6 · 6 · 2 = 72) is covered against raw brute force
        // by the exhaustive sweep above.
        let mut g = DenseGraph::empty(14);
        for v in 0..7usize {
            g.add_edge(v, (v + 1) % 7);
            g.add_edge(7 + v, 7 + (v + 1) % 7);
        }
        assert_eq!(aut_order_graph(&g), BigCount::from(392u32));
    }

    // ----- exhaustive brute force, small orders --------------------------------

    #[test]
    fn aut_order_matches_brute_force_up_to_5_vertices() {
        for m in 1..=5usize {
            let perms = all_perms(m);
            let nbits = m * (m - 1) / 2;
            for mask in 0u32..1 << nbits {
                let g = graph_from_mask(m, mask);
                let r = canonicalize(&g);
                assert_eq!(
                    r.aut_order,
                    BigCount::from(brute_aut_order(&g, &perms)),
                    "m={m} mask={mask:b}"
                );
            }
        }
    }

    #[test]
    fn aut_order_matches_brute_force_on_6_vertices() {
        let perms = all_perms(6);
        for mask in 0u32..1 << 15 {
            let g = graph_from_mask(6, mask);
            let r = canonicalize(&g);
            assert_eq!(
                r.aut_order,
                BigCount::from(brute_aut_order(&g, &perms)),
                "mask={mask:b}"
            );
        }
    }

    #[test]
    fn aut_order_matches_brute_force_on_sampled_7_vertex_graphs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x0711);
        let perms = all_perms(7);
        for _ in 0..300 {
            let mask: u32 = rng.gen_range(0..1 << 21);
            let g = graph_from_mask(7, mask);
            let r = canonicalize(&g);
            assert_eq!(
                r.aut_order,
                BigCount::from(brute_aut_order(&g, &perms)),
                "mask={mask:b}"
            );
        }
    }

    #[test]
    fn distinct_relabelings_equal_factorial_over_aut_order() {
        use rand::{Rng, SeedableRng};
        use std::collections::HashSet;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x0712);
        for m in [5usize, 6, 7] {
            let perms = all_perms(m);
            let nbits = m * (m - 1) / 2;
            for _ in 0..60 {
                let mask: u32 = rng.gen_range(0..1u32 << nbits);
                let g = graph_from_mask(m, mask);
                let distinct: HashSet<Vec<u8>> = perms
                    .iter()
                    .map(|p| canonical_mask_bytes_raw(&g.relabel(p)))
                    .collect();
                let r = canonicalize(&g);
                let expected = crate::factorial(m as u64) / r.aut_order;
                assert_eq!(BigCount::from(distinct.len() as u64), expected);
            }
        }
    }

    /// Raw (non-canonical) adjacency serialization, for orbit counting.
    fn canonical_mask_bytes_raw(g: &ColoredGraph) -> Vec<u8> {
        let m = g.m();
        let mut out = vec![0u8; 16];
        for i in 0..m {
            for j in (i + 1)..m {
                if g.has_edge(i, j) {
                    let bit = edge_index(m, i, j);
                    out[bit >> 3] |= 1 << (bit & 7);
                }
            }
        }
        out
    }

    // ----- canonical form postconditions ---------------------------------------

    #[test]
    fn labeling_applied_to_input_reproduces_canonical_form() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x0713);
        for _ in 0..200 {
            let m = rng.gen_range(2..=14usize);
            let mut g = Colored::new((0..m).map(|v| (v % 3) as u16).map(map_contig(m)).collect());
            for i in 0..m {
                for j in (i + 1)..m {
                    if rng.gen_bool(0.4) {
                        g.add_edge(i, j);
                    }
                }
            }
            let r = canonicalize(&g);
            let relabeled = g.relabel(&r.canonical_labeling);
            // Serialized upper-triangle bitmask of the relabeled graph.
            let mut bytes = vec![0u8; r.canonical_form.len()];
            let mut bit = 0usize;
            for p in 0..m {
                for q in (p + 1)..m {
                    if relabeled.has_edge(p, q) {
                        bytes[bit >> 3] |= 1 << (bit & 7);
                    }
                    bit += 1;
                }
            }
            assert_eq!(bytes, r.canonical_form);
            // Colors must land sorted ascending by canonical position.
            let cs: Vec<u16> = (0..m).map(|p| relabeled.color(p)).collect();
            assert!(cs.windows(2).all(|w| w[0] <= w[1]));
            // Every generator is a color-preserving automorphism.
            for a in &r.aut_generators {
                assert_eq!(&g.relabel(a), &g);
            }
            // aut_order divides m!.
            assert_eq!(crate::factorial(m as u64) % r.aut_order, BigCount::from(0u32));
        }
    }

    /// Remaps colors so the used set is contiguous from 0 (identity here, as
    /// v % 3 always covers 0..=min(2, m−1); kept explicit for clarity).
    fn map_contig(_m: usize) -> impl Fn(u16) -> u16 {
        |c| c
    }

    #[test]
    fn all_distinct_colors_force_trivial_group() {
        let mut g = Colored::new((0..10u16).collect());
        for i in 0..10 {
            for j in (i + 1)..10 {
                if (i + j) % 3 == 0 {
                    g.add_edge(i, j);
                }
            }
        }
        let r = canonicalize(&g);
        assert_eq!(r.aut_order, BigCount::from(1u32));
        assert!(r.aut_generators.is_empty());
    }

    #[test]
    fn same_adjacency_different_coloring_gives_distinct_forms() {
        // Path 0–1–2 with the odd color on the middle vs. on an endpoint:
        // same class sizes, non-isomorphic as colored graphs.
        let mut a = Colored::<1>::new(vec![0, 1, 0]);
        a.add_edge(0, 1);
        a.add_edge(1, 2);
        let mut b = Colored::<1>::new(vec![1, 0, 0]);
        b.add_edge(0, 1);
        b.add_edge(1, 2);
        assert_ne!(canonicalize(&a).canonical_form, canonicalize(&b).canonical_form);
    }

    #[test]
    fn plain_14_vertex_form_is_exactly_16_bytes() {
        let g = DenseGraph::complete(14);
        let form = canonicalize(&ColoredGraph::from_dense(&g)).canonical_form;
        assert_eq!(form.len(), 16);
        // K_14's canonical form is K_14's own bitmask: all 91 bits set.
        assert_eq!(u128::from_le_bytes(form.try_into().unwrap()), (1u128 << 91) - 1);
        assert_eq!(canonical_form_dense(&g), g.edge_mask().to_le_bytes());
    }

    // ----- relabeling invariance -----------------------------------------------

    fn arb_colored(max_m: usize) -> impl Strategy<Value = ColoredGraph> {
        (2..=max_m, any::<u128>(), any::<u128>(), 1u16..4).prop_map(|(m, bits, cbits, ncol)| {
            let ncol = ncol.min(m as u16);
            let mut colors: Vec<u16> = (0..m).map(|v| (v as u16) % ncol).collect();
            // scramble color assignment while keeping the range contiguous
            for v in 0..m {
                colors[v] = (colors[v] + (cbits >> v & 1) as u16) % ncol;
            }
            let mut present = vec![false; ncol as usize];
            for &c in &colors {
                present[c as usize] = true;
            }
            for c in 0..ncol {
                if !present[c as usize] {
                    colors[c as usize % m] = c;
                }
            }
            // second pass: previous line may have unseated another color
            let mut seen = vec![false; ncol as usize];
            for &c in &colors {
                seen[c as usize] = true;
            }
            if !seen.iter().all(|&s| s) {
                for v in 0..m {
                    colors[v] = (v as u16) % ncol;
                }
            }
            let mut g = Colored::new(colors);
            let mut idx = 0;
            for i in 0..m {
                for j in (i + 1)..m {
                    if bits >> (idx % 128) & 1 == 1 {
                        g.add_edge(i, j);
                    }
                    idx += 1;
                }
            }
            g
        })
    }

    proptest! {
        #[test]
        fn canonical_form_is_relabeling_invariant(
            (g, perm) in arb_colored(14).prop_flat_map(|g| {
                let m = g.m();
                (Just(g), Just((0..m as u8).collect::<Vec<u8>>()).prop_shuffle())
            })
        ) {
            let p = Perm::from_images(perm);
            let h = g.relabel(&p);
            let rg = canonicalize(&g);
            let rh = canonicalize(&h);
            prop_assert_eq!(rg.canonical_form, rh.canonical_form);
            prop_assert_eq!(rg.aut_order, rh.aut_order);
        }
    }

    // ----- wide instantiation ---------------------------------------------------

    #[test]
    fn wide_cycle_aut_is_dihedral() {
        let mut g: ColoredGraphWide = Colored::new(vec![0u16; 100]);
        for v in 0..100 {
            g.add_edge(v, (v + 1) % 100);
        }
        assert_eq!(canonicalize_wide(&g).aut_order, BigCount::from(200u32));
    }

    #[test]
    fn wide_disjoint_copies_double_the_group() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x0715);
        let mut g: ColoredGraphWide = Colored::new(vec![0u16; 80]);
        for i in 0..40usize {
            for j in (i + 1)..40 {
                if rng.gen_bool(0.3) {
                    g.add_edge(i, j);
                    g.add_edge(40 + i, 40 + j);
                }
            }
        }
        let r = canonicalize_wide(&g);
        assert_eq!(&r.aut_order % 2u32, BigCount::from(0u32));
    }

    #[test]
    fn wide_relabeling_invariance() {
        use rand::seq::SliceRandom;
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x0716);
        for _ in 0..20 {
            let m = rng.gen_range(65..=110usize);
            let mut colors: Vec<u16> = (0..m).map(|v| (v % 3) as u16).collect();
            colors.shuffle(&mut rng);
            // keep contiguity
            colors[0] = 0;
            colors[1] = 1;
            colors[2] = 2;
            let mut g: ColoredGraphWide = Colored::new(colors);
            for i in 0..m {
                for j in (i + 1)..m {
                    if rng.gen_bool(0.08) {
                        g.add_edge(i, j);
                    }
                }
            }
            let mut images: Vec<u8> = (0..m as u8).collect();
            images.shuffle(&mut rng);
            let p = Perm::from_images(images);
            let h = g.relabel(&p);
            assert_eq!(
                canonicalize_wide(&g).canonical_form,
                canonicalize_wide(&h).canonical_form
            );
        }
    }
}
