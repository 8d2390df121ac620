//! Shared brute-force oracles for the integration tests.
//!
//! Everything here classifies one-factorizations by direct backtracking over
//! the lowest uncovered vertex pair — no seed growth, no dancing links, no
//! acceptance rule — so it provides an independent reference for the census
//! pipeline's results.
//!
//! Blocks follow the engine's convention: `[factor, vertex, vertex]` with
//! factor labels 0…n−2 and vertices n−1…2n−2.

use onefact::gdd::Factorization;
use onefact::perm::Perm;
use onefact::BigCount;
use std::collections::BTreeMap;

/// All one-factorizations of K_n as block lists, enumerated exactly once
/// each. Factors are introduced in first-use order, which picks one
/// representative per unordered partition into perfect matchings.
pub fn enumerate_factorizations(n: usize) -> Vec<Vec<[u8; 3]>> {
    assert!(n % 2 == 0 && n <= 8, "full enumeration is for small orders");
    let mut state = FullSearch {
        n,
        covered: vec![false; n * n],
        factor_vertices: vec![0u16; n - 1],
        blocks: Vec::new(),
        out: Vec::new(),
    };
    state.recurse();
    state.out
}

struct FullSearch {
    n: usize,
    covered: Vec<bool>,
    factor_vertices: Vec<u16>,
    blocks: Vec<[u8; 3]>,
    out: Vec<Vec<[u8; 3]>>,
}

impl FullSearch {
    fn recurse(&mut self) {
        let n = self.n;
        let mut pair = None;
        'scan: for i in 0..n {
            for j in i + 1..n {
                if !self.covered[i * n + j] {
                    pair = Some((i, j));
                    break 'scan;
                }
            }
        }
        let Some((i, j)) = pair else {
            self.out.push(self.blocks.clone());
            return;
        };
        // First-use order: factors in use form a prefix, and the lowest
        // unused factor is the only fresh choice offered.
        let used = self.factor_vertices.iter().filter(|&&m| m != 0).count();
        for f in 0..=used.min(n - 2) {
            if self.factor_vertices[f] & (1 << i | 1 << j) != 0 {
                continue;
            }
            self.covered[i * n + j] = true;
            self.factor_vertices[f] |= 1 << i | 1 << j;
            self.blocks
                .push([f as u8, (n - 1 + i) as u8, (n - 1 + j) as u8]);
            self.recurse();
            self.blocks.pop();
            self.factor_vertices[f] &= !(1 << i | 1 << j);
            self.covered[i * n + j] = false;
        }
    }
}

/// Distinct isomorphism classes of a list of block lists, as canonical forms
/// with each class's automorphism group order.
pub fn classify_forms(n: usize, factorizations: &[Vec<[u8; 3]>]) -> BTreeMap<Vec<u8>, BigCount> {
    let mut classes = BTreeMap::new();
    for blocks in factorizations {
        let f = Factorization::from_blocks(n, blocks.clone())
            .expect("oracle built a valid factorization");
        let r = f.canonical();
        classes
            .entry(r.canonical_form.clone())
            .or_insert_with(|| r.aut_order.clone());
    }
    classes
}

/// All one-factorizations of K_n whose partition into perfect matchings is
/// invariant under the vertex action of `pi`, each found exactly once.
///
/// Matchings are kept anonymous and created in first-use order; `pi` acts on
/// them through an explicit successor table, so placing one pair forces its
/// whole orbit and no time is spent distinguishing factor relabelings of the
/// same partition. Factor labels in the emitted blocks are creation indices.
pub fn enumerate_invariant_factorizations(n: usize, pi: &Perm) -> Vec<Vec<[u8; 3]>> {
    assert_eq!(pi.images().len(), 2 * n - 1);
    let vmap: Vec<usize> = (0..n).map(|x| pi.apply(n - 1 + x) - (n - 1)).collect();
    let mut state = InvariantSearch {
        n,
        vmap,
        covered: vec![false; n * n],
        matchings: Vec::new(),
        edges: Vec::new(),
        next: Vec::new(),
        out: Vec::new(),
    };
    state.recurse();
    state.out
}

struct InvariantSearch {
    n: usize,
    /// Image of each vertex under the permutation.
    vmap: Vec<usize>,
    covered: Vec<bool>,
    /// Vertex mask of each matching, indexed by creation order.
    matchings: Vec<u16>,
    /// Edges of each matching, for block emission at the leaves.
    edges: Vec<Vec<(usize, usize)>>,
    /// Index of the matching the permutation maps each matching onto.
    next: Vec<usize>,
    out: Vec<Vec<[u8; 3]>>,
}

impl InvariantSearch {
    /// Orbit of a vertex pair under the vertex action, each pair sorted.
    fn pair_orbit(&self, i: usize, j: usize) -> Vec<(usize, usize)> {
        let mut orbit = vec![(i, j)];
        loop {
            let (x, y) = *orbit.last().unwrap();
            let (a, b) = (self.vmap[x], self.vmap[y]);
            let image = (a.min(b), a.max(b));
            if image == orbit[0] {
                return orbit;
            }
            orbit.push(image);
        }
    }

    fn place(&mut self, m: usize, x: usize, y: usize) {
        self.covered[x * self.n + y] = true;
        self.matchings[m] |= 1 << x | 1 << y;
        self.edges[m].push((x, y));
    }

    fn unplace_last(&mut self, m: usize) {
        let (x, y) = self.edges[m].pop().expect("matching has an edge to undo");
        self.matchings[m] &= !(1 << x | 1 << y);
        self.covered[x * self.n + y] = false;
    }

    fn recurse(&mut self) {
        let n = self.n;
        let mut pair = None;
        'scan: for i in 0..n {
            for j in i + 1..n {
                if !self.covered[i * n + j] {
                    pair = Some((i, j));
                    break 'scan;
                }
            }
        }
        let Some((i, j)) = pair else {
            // Full coverage with at most n−1 matchings forces exactly n−1
            // perfect ones, so the leaf is a one-factorization.
            debug_assert!(self.matchings.len() == n - 1);
            debug_assert!(self.matchings.iter().all(|&m| m == (1 << n) - 1));
            let mut blocks = Vec::with_capacity(n * (n - 1) / 2);
            for (c, es) in self.edges.iter().enumerate() {
                for &(x, y) in es {
                    blocks.push([c as u8, (n - 1 + x) as u8, (n - 1 + y) as u8]);
                }
            }
            blocks.sort_unstable();
            self.out.push(blocks);
            return;
        };
        // The covered set stays invariant under the permutation, so every
        // pair in the orbit is uncovered here.
        let orbit = self.pair_orbit(i, j);
        let p = orbit.len();

        // Put the pair in an existing matching. Invariance then forces each
        // image pair into the successor matching; the walk must come back to
        // where it started after exactly one lap of the pair orbit.
        for m0 in 0..self.matchings.len() {
            let mut m = m0;
            let mut placed = 0;
            for &(x, y) in &orbit {
                debug_assert!(!self.covered[x * n + y]);
                if self.matchings[m] & (1 << x | 1 << y) != 0 {
                    break;
                }
                self.place(m, x, y);
                placed += 1;
                m = self.next[m];
            }
            if placed == p && m == m0 {
                self.recurse();
            }
            let mut m = m0;
            for _ in 0..placed {
                self.unplace_last(m);
                m = self.next[m];
            }
        }

        // Or open a fresh cycle of q matchings, q running over the divisors
        // of the orbit length, with every q-th image pair sharing a matching.
        let room = (n - 1) - self.matchings.len();
        for q in 1..=p.min(room) {
            if p % q != 0 {
                continue;
            }
            let mut masks = vec![0u16; q];
            let clash = orbit.iter().enumerate().any(|(k, &(x, y))| {
                let hit = masks[k % q] & (1 << x | 1 << y) != 0;
                masks[k % q] |= 1 << x | 1 << y;
                hit
            });
            if clash {
                continue;
            }
            let base = self.matchings.len();
            for t in 0..q {
                self.matchings.push(0);
                self.edges.push(Vec::new());
                self.next.push(base + (t + 1) % q);
            }
            for (k, &(x, y)) in orbit.iter().enumerate() {
                self.place(base + k % q, x, y);
            }
            self.recurse();
            for &(x, y) in &orbit {
                self.covered[x * n + y] = false;
            }
            self.matchings.truncate(base);
            self.edges.truncate(base);
            self.next.truncate(base);
        }
    }
}

/// Classes of factorizations of K_n with a nontrivial automorphism, found by
/// running the invariant enumeration over every admissible prime type and
/// pooling the canonical forms.
///
/// Canonical labeling is by far the dominant cost, so only one member of
/// each isomorphism orbit inside a pool is canonicalized; the rest are
/// marked off by explicitly relabeling it under permutations that commute
/// with the fixed automorphism. Relabeled copies are isomorphic by
/// construction, so an incomplete generator list could only slow the search
/// down, never change the answer.
pub fn brute_symmetric_classes(n: usize) -> BTreeMap<Vec<u8>, BigCount> {
    let mut classes = BTreeMap::new();
    let mut seen_actions = std::collections::BTreeSet::new();
    for t in onefact::autotypes::admissible_types(n) {
        let pi = onefact::seedgen::fix_group_representative(n, &t);
        let vmap: Vec<u8> = (0..n)
            .map(|x| (pi.apply(n - 1 + x) - (n - 1)) as u8)
            .collect();
        // Types differing only in fixed factors share a vertex action and
        // would reproduce the identical pool.
        if !seen_actions.insert(vmap.clone()) {
            continue;
        }
        let found = enumerate_invariant_factorizations(n, &pi);
        let gens = commuting_generators(&vmap);
        let mut marked = std::collections::HashSet::new();
        for blocks in &found {
            let part = partition_of(n, blocks);
            if !marked.insert(part.concat()) {
                continue;
            }
            let f = Factorization::from_blocks(n, blocks.clone())
                .expect("oracle built a valid factorization");
            let r = f.canonical();
            classes.entry(r.canonical_form).or_insert(r.aut_order);
            let mut queue = vec![part];
            while let Some(p) = queue.pop() {
                for g in &gens {
                    let q = relabel_partition(&p, g);
                    if marked.insert(q.concat()) {
                        queue.push(q);
                    }
                }
            }
        }
    }
    classes
}

/// A factorization's unordered partition into matchings: each matching as a
/// partner vector, the list sorted. Equal partitions get equal values.
fn partition_of(n: usize, blocks: &[[u8; 3]]) -> Vec<Vec<u8>> {
    let mut part = vec![vec![0u8; n]; n - 1];
    for b in blocks {
        let (f, x, y) = (
            b[0] as usize,
            b[1] as usize - (n - 1),
            b[2] as usize - (n - 1),
        );
        part[f][x] = y as u8;
        part[f][y] = x as u8;
    }
    part.sort_unstable();
    part
}

fn relabel_partition(part: &[Vec<u8>], g: &[u8]) -> Vec<Vec<u8>> {
    let mut out: Vec<Vec<u8>> = part
        .iter()
        .map(|m| {
            let mut v = vec![0u8; g.len()];
            for x in 0..g.len() {
                v[g[x] as usize] = g[m[x] as usize];
            }
            v
        })
        .collect();
    out.sort_unstable();
    out
}

/// Vertex permutations generating the centralizer of `vmap`: a rotation of
/// one cycle per cycle length, plus a transposition and a full cycle of the
/// equal-length cycles (the symmetric group on each block of cycles).
fn commuting_generators(vmap: &[u8]) -> Vec<Vec<u8>> {
    let n = vmap.len();
    let mut cycles_by_len: BTreeMap<usize, Vec<Vec<usize>>> = BTreeMap::new();
    let mut visited = vec![false; n];
    for s in 0..n {
        if visited[s] {
            continue;
        }
        let mut cycle = vec![s];
        visited[s] = true;
        let mut x = vmap[s] as usize;
        while x != s {
            visited[x] = true;
            cycle.push(x);
            x = vmap[x] as usize;
        }
        cycles_by_len.entry(cycle.len()).or_default().push(cycle);
    }
    let identity: Vec<u8> = (0..n as u8).collect();
    let mut gens = Vec::new();
    for (len, group) in &cycles_by_len {
        if *len > 1 {
            let mut g = identity.clone();
            for k in 0..*len {
                g[group[0][k]] = group[0][(k + 1) % len] as u8;
            }
            gens.push(g);
        }
        if group.len() >= 2 {
            let mut g = identity.clone();
            for k in 0..*len {
                g[group[0][k]] = group[1][k] as u8;
                g[group[1][k]] = group[0][k] as u8;
            }
            gens.push(g);
        }
        if group.len() >= 3 {
            let mut g = identity.clone();
            for (i, c) in group.iter().enumerate() {
                let d = &group[(i + 1) % group.len()];
                for k in 0..*len {
                    g[c[k]] = d[k] as u8;
                }
            }
            gens.push(g);
        }
    }
    gens
}
