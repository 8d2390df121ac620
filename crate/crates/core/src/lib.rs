//! Census engine for one-factorizations of complete graphs `K_n` (n even, n ≤ 14).
//!
//! A one-factorization of `K_n` splits the edge set into n−1 perfect matchings
//! (one-factors). This crate counts them two ways and cross-checks the results:
//!
//! * **Labeled track** ([`labelcount`]): level-by-level forward accumulation over
//!   isomorphism classes of k-regular one-factorizable graphs, producing the exact
//!   labeled count `LF(K_n)`, with two independent verification routes (a
//!   recursion over factor deletions and a meet-in-the-middle identity).
//! * **Symmetric track** ([`autotypes`], [`seedgen`], [`extender`]): exhaustive
//!   classification of the one-factorizations with a nontrivial automorphism,
//!   via prescribed prime-order groups, seed classification, and exact-cover
//!   completion with canonical-augmentation acceptance.
//!
//! The [`census`] module combines both tracks through the orbit-counting identity
//! `|Ω| = |Γ| · Σ_i N_i / i` to obtain the number of isomorphism classes, including
//! the vast majority with trivial automorphism group, without listing them.
//!
//! Supporting machinery: dense bitmask graphs and perfect-matching enumeration
//! ([`graphcore`]), canonical labeling of colored graphs by partition refinement
//! with automorphism pruning ([`canon`]), permutation groups with Schreier–Sims
//! order computation ([`perm`]), and the triple-system view of a factorization
//! used by the symmetric track ([`gdd`]). The [`cli`] module provides the
//! `onefact` binary: `count`, `verify`, and `classify` subcommands with
//! resumable, worker-splittable runs.
//!
//! All counts are exact: arithmetic uses arbitrary-precision unsigned integers
//! ([`BigCount`]) everywhere, and every division in the pipeline asserts
//! divisibility instead of truncating.

pub mod autotypes;
pub mod canon;
pub mod census;
pub mod cli;
pub mod extender;
pub mod gdd;
pub mod graphcore;
pub mod labelcount;
pub mod perm;
pub mod seedgen;

/// Exact unbounded count type used throughout the pipeline.
pub type BigCount = num_bigint::BigUint;

/// n! as a [`BigCount`].
pub fn factorial(n: u64) -> BigCount {
    let mut acc = BigCount::from(1u32);
    for i in 2..=n {
        acc *= i;
    }
    acc
}

/// Double factorial n!! = n·(n−2)·(n−4)···; the number of perfect matchings of
/// `K_{n+1}` is n!! for odd n.
pub fn double_factorial(n: u64) -> BigCount {
    let mut acc = BigCount::from(1u32);
    let mut i = n;
    while i > 1 {
        acc *= i;
        i -= 2;
    }
    acc
}

/// Binomial coefficient C(n, k) as a [`BigCount`] (exact).
pub fn binomial(n: u64, k: u64) -> BigCount {
    if k > n {
        return BigCount::from(0u32);
    }
    let k = k.min(n - k);
    let mut acc = BigCount::from(1u32);
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1; // exact: product of j consecutive integers is divisible by j!
    }
    acc
}
