//! Permutations on small point sets and permutation groups via stabilizer chains.
//!
//! Everything downstream works with groups acting on at most a couple hundred
//! points (graph vertices, or the 2n−1 points of the triple-system view), so
//! permutations are stored as dense image arrays of `u8` indices. Group orders
//! are computed exactly with a deterministic Schreier–Sims stabilizer chain:
//! the order is the product of the basic orbit lengths, so even groups of order
//! 14! never require listing elements. Element listing is available for the
//! small groups (automorphism groups of factorizations, seed stabilizers) where
//! the callers genuinely iterate over every element.

use crate::BigCount;

// ============================================================================
// Permutation
// ============================================================================

/// A permutation of `{0, 1, …, degree−1}`, stored as its image array.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm {
    img: Vec<u8>,
}

impl std::fmt::Debug for Perm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        // Cycle notation is far easier to eyeball in test failures than image
        // arrays.
        let mut seen = vec![false; self.img.len()];
        let mut wrote = false;
        for start in 0..self.img.len() {
            if seen[start] || self.apply(start) == start {
                continue;
            }
            write!(f, "(")?;
            let mut x = start;
            let mut first = true;
            while !seen[x] {
                seen[x] = true;
                if !first {
                    write!(f, " ")?;
                }
                write!(f, "{x}")?;
                first = false;
                x = self.apply(x);
            }
            write!(f, ")")?;
            wrote = true;
        }
        if !wrote {
            write!(f, "()")?;
        }
        Ok(())
    }
}

impl Perm {
    /// The identity permutation on `degree` points.
    pub fn identity(degree: usize) -> Self {
        debug_assert!(degree <= 256);
        Perm {
            img: (0..degree).map(|i| i as u8).collect(),
        }
    }

    /// Builds a permutation from its image array.
    ///
    /// # Panics
    ///
    /// Panics if `img` is not a permutation of `0..img.len()` or if the degree
    /// exceeds 256.
    pub fn from_images(img: Vec<u8>) -> Self {
        assert!(img.len() <= 256, "permutation degree exceeds 256");
        let mut seen = vec![false; img.len()];
        for &x in &img {
            assert!(
                (x as usize) < img.len() && !seen[x as usize],
                "image array is not a permutation"
            );
            seen[x as usize] = true;
        }
        Perm { img }
    }

    /// Builds the permutation given by a list of disjoint cycles; points not
    /// mentioned are fixed.
    ///
    /// # Panics
    ///
    /// Panics if a point repeats or lies outside `0..degree`.
    pub fn from_cycles(degree: usize, cycles: &[&[usize]]) -> Self {
        let mut img: Vec<u8> = (0..degree).map(|i| i as u8).collect();
        let mut touched = vec![false; degree];
        for cycle in cycles {
            for w in 0..cycle.len() {
                let from = cycle[w];
                let to = cycle[(w + 1) % cycle.len()];
                assert!(from < degree && !touched[from], "bad cycle specification");
                touched[from] = true;
                img[from] = to as u8;
            }
        }
        Perm::from_images(img)
    }

    /// Number of points acted on.
    #[inline(always)]
    pub fn degree(&self) -> usize {
        self.img.len()
    }

    /// Image of point `x`.
    #[inline(always)]
    pub fn apply(&self, x: usize) -> usize {
        self.img[x] as usize
    }

    /// The raw image array.
    #[inline(always)]
    pub fn images(&self) -> &[u8] {
        &self.img
    }

    /// Functional composition: `compose(outer, inner)(x) = outer(inner(x))`,
    /// i.e. `inner` acts first.
    pub fn compose(outer: &Perm, inner: &Perm) -> Perm {
        debug_assert_eq!(outer.degree(), inner.degree());
        Perm {
            img: inner.img.iter().map(|&x| outer.img[x as usize]).collect(),
        }
    }

    /// The inverse permutation.
    pub fn inverse(&self) -> Perm {
        let mut img = vec![0u8; self.img.len()];
        for (x, &y) in self.img.iter().enumerate() {
            img[y as usize] = x as u8;
        }
        Perm { img }
    }

    /// Whether this is the identity.
    pub fn is_identity(&self) -> bool {
        self.img.iter().enumerate().all(|(i, &x)| i == x as usize)
    }

    /// Order of the permutation as a group element (lcm of cycle lengths).
    pub fn element_order(&self) -> u64 {
        let mut seen = vec![false; self.img.len()];
        let mut order: u64 = 1;
        for start in 0..self.img.len() {
            if seen[start] {
                continue;
            }
            let mut len: u64 = 0;
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                len += 1;
                x = self.apply(x);
            }
            order = num_integer::lcm(order, len);
        }
        order
    }

    /// `self` composed with itself `k` times (`k = 0` gives the identity).
    pub fn pow(&self, k: u64) -> Perm {
        let mut acc = Perm::identity(self.degree());
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = Perm::compose(&base, &acc);
            }
            base = Perm::compose(&base, &base);
            k >>= 1;
        }
        acc
    }

    /// Points fixed by the permutation within `lo..hi`.
    pub fn fixed_in_range(&self, lo: usize, hi: usize) -> usize {
        (lo..hi).filter(|&x| self.apply(x) == x).count()
    }
}

// ============================================================================
// Orbits of a generating set
// ============================================================================

/// Orbit labels for every point under the group generated by `gens`: two
/// points get the same label iff they lie in the same orbit. Labels are the
/// smallest point of each orbit.
pub fn point_orbits(degree: usize, gens: &[Perm]) -> Vec<usize> {
    let mut label: Vec<usize> = (0..degree).collect();
    // Tiny union-find; path halving is plenty at these sizes.
    fn find(label: &mut [usize], mut x: usize) -> usize {
        while label[x] != x {
            label[x] = label[label[x]];
            x = label[x];
        }
        x
    }
    for g in gens {
        for x in 0..degree {
            let a = find(&mut label, x);
            let b = find(&mut label, g.apply(x));
            if a != b {
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                label[hi] = lo;
            }
        }
    }
    (0..degree).map(|x| find(&mut label, x)).collect()
}

// ============================================================================
// Stabilizer chain (Schreier–Sims)
// ============================================================================

struct ChainLevel {
    /// Base point stabilized by the deeper levels.
    point: usize,
    /// Strong generators first installed at this level: each fixes every
    /// earlier base point. Level i's full group is generated by the union of
    /// `stored` over levels i and deeper.
    stored: Vec<Perm>,
    /// Basic orbit of `point` in discovery order.
    orbit: Vec<usize>,
    /// `transversal[beta]` maps `point` to `beta`; `None` for points off the orbit.
    transversal: Vec<Option<Perm>>,
}

/// A permutation group given by a base and strong generating set, supporting
/// exact order computation, membership tests, and element listing.
pub struct StabChain {
    degree: usize,
    levels: Vec<ChainLevel>,
}

impl StabChain {
    /// The trivial group on `degree` points.
    pub fn new(degree: usize) -> Self {
        StabChain {
            degree,
            levels: Vec::new(),
        }
    }

    /// Builds the chain for the group generated by `gens`.
    pub fn from_generators(degree: usize, gens: &[Perm]) -> Self {
        let mut chain = StabChain::new(degree);
        for g in gens {
            chain.insert(g.clone());
        }
        chain
    }

    /// Number of points the group acts on.
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Exact group order (product of basic orbit lengths).
    pub fn order(&self) -> BigCount {
        let mut acc = BigCount::from(1u32);
        for level in &self.levels {
            acc *= level.orbit.len();
        }
        acc
    }

    /// Whether `g` lies in the group.
    pub fn contains(&self, g: &Perm) -> bool {
        match self.sift(g, 0) {
            None => true,
            Some(_) => false,
        }
    }

    /// Adds a generator, restoring the strong generating property.
    pub fn insert(&mut self, g: Perm) {
        debug_assert_eq!(g.degree(), self.degree);
        if let Some((residue, level)) = self.sift(&g, 0) {
            // residue = (transversal word)·g with the word in the current
            // group, so adjoining it generates the same extension as g; it
            // fixes the first `level` base points, so it is stored there.
            self.add_stored(level, residue);
            self.verify_from(level);
        }
    }

    /// Lists every group element. Intended for the small groups of this crate
    /// (factorization and seed automorphism groups); cost is linear in the
    /// order.
    pub fn elements(&self) -> Vec<Perm> {
        let mut out = vec![Perm::identity(self.degree)];
        // Deepest level first, so each pass left-multiplies by a transversal.
        for level in self.levels.iter().rev() {
            let mut next = Vec::with_capacity(out.len() * level.orbit.len());
            for beta in &level.orbit {
                let u = level.transversal[*beta].as_ref().expect("orbit point");
                for g in &out {
                    next.push(Perm::compose(u, g));
                }
            }
            out = next;
        }
        out
    }

    // ------------------------------------------------------------------
    // internals
    // ------------------------------------------------------------------

    /// Strips `g` through levels `from..`; returns the non-identity residue
    /// and the level it got stuck at (`levels.len()` when it fixes the whole
    /// base), or `None` when `g` sifts to the identity.
    fn sift(&self, g: &Perm, from: usize) -> Option<(Perm, usize)> {
        let mut g = g.clone();
        for (i, level) in self.levels.iter().enumerate().skip(from) {
            let beta = g.apply(level.point);
            match &level.transversal[beta] {
                Some(u) => g = Perm::compose(&u.inverse(), &g),
                None => return Some((g, i)),
            }
        }
        if g.is_identity() {
            None
        } else {
            Some((g, self.levels.len()))
        }
    }

    /// Installs `residue` at `level`, appending a new chain level (with its
    /// first moved point as base point) when `level` is past the current base.
    fn add_stored(&mut self, level: usize, residue: Perm) {
        if level == self.levels.len() {
            let point = (0..self.degree)
                .find(|&x| residue.apply(x) != x)
                .expect("non-identity residue moves a point");
            self.levels.push(ChainLevel {
                point,
                stored: Vec::new(),
                orbit: Vec::new(),
                transversal: vec![None; self.degree],
            });
        }
        self.levels[level].stored.push(residue);
    }

    /// Generators of level `i`'s group: everything stored at `i` or deeper.
    fn level_gens(&self, i: usize) -> Vec<Perm> {
        self.levels[i..]
            .iter()
            .flat_map(|lv| lv.stored.iter().cloned())
            .collect()
    }

    /// Restores the strong generating property for levels `start..=0` after a
    /// generator was stored at `start` (deeper levels are unaffected: they
    /// never see shallower generators). Sweeps upward, rebuilding each basic
    /// orbit and sifting its Schreier generators through the deeper chain;
    /// when one fails to sift, its residue is stored where it got stuck and
    /// the sweep restarts from that level.
    fn verify_from(&mut self, start: usize) {
        let mut i = start;
        'sweep: loop {
            self.rebuild_orbit(i);
            let gens = self.level_gens(i);
            let mut beta_idx = 0;
            while beta_idx < self.levels[i].orbit.len() {
                let beta = self.levels[i].orbit[beta_idx];
                for s in &gens {
                    let h = {
                        let lv = &self.levels[i];
                        let u_beta = lv.transversal[beta].as_ref().expect("orbit point");
                        let s_beta = s.apply(beta);
                        let u_s_beta = lv.transversal[s_beta]
                            .as_ref()
                            .expect("orbit closed under generators");
                        // Schreier generator u_{s_beta}⁻¹ · s · u_beta fixes the base point.
                        Perm::compose(&u_s_beta.inverse(), &Perm::compose(s, u_beta))
                    };
                    if h.is_identity() {
                        continue;
                    }
                    if let Some((residue, stuck)) = self.sift(&h, i + 1) {
                        self.add_stored(stuck, residue);
                        i = stuck;
                        continue 'sweep;
                    }
                }
                beta_idx += 1;
            }
            if i == 0 {
                return;
            }
            i -= 1;
        }
    }

    /// Breadth-first closure of the basic orbit at `level`, recording
    /// transversal elements.
    fn rebuild_orbit(&mut self, level: usize) {
        let point = self.levels[level].point;
        let gens = self.level_gens(level);
        let lv = &mut self.levels[level];
        lv.orbit.clear();
        lv.transversal = vec![None; self.degree];
        lv.orbit.push(point);
        lv.transversal[point] = Some(Perm::identity(self.degree));
        let mut head = 0;
        while head < lv.orbit.len() {
            let beta = lv.orbit[head];
            head += 1;
            for s in &gens {
                let gamma = s.apply(beta);
                if lv.transversal[gamma].is_none() {
                    let u_beta = lv.transversal[beta].as_ref().expect("visited point");
                    lv.transversal[gamma] = Some(Perm::compose(s, u_beta));
                    lv.orbit.push(gamma);
                }
            }
        }
    }
}

// ============================================================================
// Tests
// ============================================================================

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    /// Brute-force closure of a generating set, for cross-checking the chain.
    fn closure(degree: usize, gens: &[Perm]) -> HashSet<Perm> {
        let mut set: HashSet<Perm> = HashSet::new();
        set.insert(Perm::identity(degree));
        let mut frontier: Vec<Perm> = vec![Perm::identity(degree)];
        while let Some(g) = frontier.pop() {
            for s in gens {
                let h = Perm::compose(s, &g);
                if set.insert(h.clone()) {
                    frontier.push(h);
                }
            }
        }
        set
    }

    #[test]
    fn compose_applies_inner_first() {
        // inner sends 0→1, outer sends 1→2, so the composite sends 0→2.
        let inner = Perm::from_cycles(3, &[&[0, 1]]);
        let outer = Perm::from_cycles(3, &[&[1, 2]]);
        let c = Perm::compose(&outer, &inner);
        assert_eq!(c.apply(0), 2);
    }

    #[test]
    fn inverse_roundtrip() {
        let g = Perm::from_cycles(7, &[&[0, 3, 5], &[1, 2]]);
        assert!(Perm::compose(&g, &g.inverse()).is_identity());
        assert!(Perm::compose(&g.inverse(), &g).is_identity());
        assert_eq!(g.element_order(), 6);
    }

    #[test]
    fn pow_matches_repeated_composition() {
        let g = Perm::from_cycles(9, &[&[0, 1, 2, 3, 4], &[5, 6]]);
        let mut acc = Perm::identity(9);
        for k in 0..12u64 {
            assert_eq!(g.pow(k), acc);
            acc = Perm::compose(&g, &acc);
        }
        assert_eq!(g.element_order(), 10);
        assert!(g.pow(10).is_identity());
    }

    #[test]
    fn symmetric_group_order() {
        // S_8 from a transposition and an 8-cycle.
        let t = Perm::from_cycles(8, &[&[0, 1]]);
        let c = Perm::from_cycles(8, &[&[0, 1, 2, 3, 4, 5, 6, 7]]);
        let chain = StabChain::from_generators(8, &[t, c]);
        assert_eq!(chain.order(), BigCount::from(40320u32));
    }

    #[test]
    fn chain_matches_brute_force_closure() {
        // Dihedral group of the hexagon: rotation + reflection, order 12.
        let rot = Perm::from_cycles(6, &[&[0, 1, 2, 3, 4, 5]]);
        let refl = Perm::from_cycles(6, &[&[1, 5], &[2, 4]]);
        let gens = vec![rot, refl];
        let chain = StabChain::from_generators(6, &gens);
        let all = closure(6, &gens);
        assert_eq!(chain.order(), BigCount::from(all.len()));
        for g in &all {
            assert!(chain.contains(g));
        }
        // Something outside the group: a transposition of adjacent vertices.
        let odd = Perm::from_cycles(6, &[&[0, 1]]);
        assert!(!all.contains(&odd));
        assert!(!chain.contains(&odd));
    }

    #[test]
    fn elements_lists_each_element_once() {
        let rot = Perm::from_cycles(5, &[&[0, 1, 2, 3, 4]]);
        let refl = Perm::from_cycles(5, &[&[1, 4], &[2, 3]]);
        let gens = vec![rot, refl];
        let chain = StabChain::from_generators(5, &gens);
        let elems = chain.elements();
        assert_eq!(BigCount::from(elems.len()), chain.order());
        let distinct: HashSet<Perm> = elems.iter().cloned().collect();
        assert_eq!(distinct.len(), elems.len());
        assert_eq!(distinct, closure(5, &gens));
    }

    #[test]
    fn klein_four_group() {
        let a = Perm::from_cycles(4, &[&[0, 1], &[2, 3]]);
        let b = Perm::from_cycles(4, &[&[0, 2], &[1, 3]]);
        let chain = StabChain::from_generators(4, &[a, b]);
        assert_eq!(chain.order(), BigCount::from(4u32));
    }

    #[test]
    fn randomized_groups_match_closure() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xC0FFEE);
        for _ in 0..40 {
            let degree = rng.gen_range(2..=7);
            let n_gens = rng.gen_range(1..=3);
            let gens: Vec<Perm> = (0..n_gens)
                .map(|_| {
                    let mut img: Vec<u8> = (0..degree as u8).collect();
                    for i in (1..degree).rev() {
                        img.swap(i, rng.gen_range(0..=i));
                    }
                    Perm::from_images(img)
                })
                .collect();
            let chain = StabChain::from_generators(degree, &gens);
            let all = closure(degree, &gens);
            assert_eq!(chain.order(), BigCount::from(all.len()));
            assert_eq!(chain.elements().len(), all.len());
        }
    }

    #[test]
    fn point_orbits_partition() {
        let g = Perm::from_cycles(8, &[&[0, 1, 2], &[5, 6]]);
        let orb = point_orbits(8, &[g]);
        assert_eq!(orb[0], orb[1]);
        assert_eq!(orb[1], orb[2]);
        assert_eq!(orb[5], orb[6]);
        assert_ne!(orb[0], orb[5]);
        assert_eq!(orb[3], 3);
        assert_eq!(orb[4], 4);
        assert_eq!(orb[7], 7);
    }
}
