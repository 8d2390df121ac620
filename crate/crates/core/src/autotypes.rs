//! Admissible prime-order automorphism types (p, f_U, f_V) for a
//! one-factorization of K_n, and the anchor schema each type uses when seeds
//! are grown.
//!
//! A prime-order element of the point group is determined up to conjugacy by
//! its fixed-point counts f_U and f_V, so p must divide n−1−f_U and n−f_V.
//! Structural rules then cut the candidates down:
//!
//! * fixed substructure — if f_U ≥ 1 and f_V ≥ 1, the blocks on fixed points
//!   form a one-factorization of K_{f_V}, forcing f_U = f_V − 1 and f_V even;
//! * fixed-vertex bound — f_V ≤ n/2, with equality only for involutions;
//! * fixed-factor bound — with no fixed vertex, a fixed factor must contain
//!   a full cycle-pair of edges; when n ≡ 2 (mod 4) and p = 2 the n/2
//!   transpositions admit at most n/2 disjoint such factors, and when
//!   n = 2p (odd p) the p aligned cross-matchings of the two vertex
//!   p-cycles admit at most p, so f_U ≤ n/2 in both regimes;
//! * lone fixed factor — p = 2 with f_V = 0 and exactly one fixed factor is
//!   impossible when n ≡ 4 or 6 (mod 8), by counting opposite-sign pair
//!   incidences across the moved blocks;
//! * the identity is not an automorphism type.

use crate::gdd::is_prime;

// ============================================================================
// Types
// ============================================================================

/// Whether an anchor slot takes a fixed point, a moved point, or nothing.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    Absent,
    Fixed,
    Moved,
}

/// How a seed anchor set T is composed for a type: at most one U-point and
/// up to two V-points, each fixed or moved by the group.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AnchorSchema {
    /// The one-factor slot (a U-point).
    pub one_factor: Slot,
    /// The first vertex slot (a V-point).
    pub vertex1: Slot,
    /// The second vertex slot (a V-point).
    pub vertex2: Slot,
}

/// An admissible automorphism type.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AutType {
    pub p: usize,
    pub f_u: usize,
    pub f_v: usize,
    pub anchor_schema: AnchorSchema,
}

/// Why a candidate (p, f_U, f_V) is not an admissible type.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RejectionReason {
    /// p is not prime or does not divide both n−1−f_U and n−f_V.
    CycleStructure,
    /// Everything fixed: the identity, not a nontrivial automorphism.
    Identity,
    /// Fixed points would have to induce a one-factorization, so
    /// f_U = f_V − 1 with f_V even.
    FixedSubstructure,
    /// More than n/2 fixed vertices, or exactly n/2 at odd order.
    FixedVertexBound,
    /// Without fixed vertices, at most n/2 factors can be fixed.
    FixedFactorBound,
    /// An involution without fixed vertices cannot fix exactly one factor.
    LoneFixedFactor,
}

// ============================================================================
// The filter
// ============================================================================

/// Applies every admissibility rule to one candidate.
pub fn check_type(n: usize, p: usize, f_u: usize, f_v: usize) -> Result<(), RejectionReason> {
    assert!(n % 2 == 0 && (4..=14).contains(&n), "order must be even, 4..=14");
    if !is_prime(p as u64)
        || f_u > n - 1
        || f_v > n
        || (n - 1 - f_u) % p != 0
        || (n - f_v) % p != 0
    {
        return Err(RejectionReason::CycleStructure);
    }
    if f_u == n - 1 && f_v == n {
        return Err(RejectionReason::Identity);
    }
    if f_u >= 1 && f_v >= 1 && (f_u != f_v - 1 || f_v % 2 != 0) {
        return Err(RejectionReason::FixedSubstructure);
    }
    if f_v > n / 2 || (f_v == n / 2 && p != 2) {
        return Err(RejectionReason::FixedVertexBound);
    }
    if f_v == 0 && f_u > n / 2 && ((p == 2 && n % 4 == 2) || (p != 2 && n == 2 * p)) {
        return Err(RejectionReason::FixedFactorBound);
    }
    if p == 2 && f_v == 0 && f_u == 1 && (n % 8 == 4 || n % 8 == 6) {
        return Err(RejectionReason::LoneFixedFactor);
    }
    Ok(())
}

/// All admissible types for order n, sorted by (p, f_U, f_V).
pub fn admissible_types(n: usize) -> Vec<AutType> {
    let mut out = Vec::new();
    for p in 2..n {
        if !is_prime(p as u64) {
            continue;
        }
        for f_u in (0..=n - 1).filter(|f| (n - 1 - f) % p == 0) {
            for f_v in (0..=n).filter(|f| (n - f) % p == 0) {
                if check_type(n, p, f_u, f_v).is_ok() {
                    out.push(AutType {
                        p,
                        f_u,
                        f_v,
                        anchor_schema: anchor_schema_for(n, p, f_u, f_v),
                    });
                }
            }
        }
    }
    out
}

/// The anchor composition used when growing seeds of a type.
///
/// Involutions anchor on a vertex pair (fixed + moved) when they fix
/// vertices, else on a fixed factor and a moved vertex. Odd-order types with
/// fixed points on both sides anchor on an all-fixed block; with no fixed
/// factor they anchor on a moved factor and the vertex pair (fixed vertex
/// first when one exists); with no fixed vertex, on three moved points
/// (falling back to a fixed factor in the degenerate all-factors-fixed
/// case, which the admissibility rules exclude wherever seeds are built).
pub fn anchor_schema_for(n: usize, p: usize, f_u: usize, f_v: usize) -> AnchorSchema {
    debug_assert!(check_type(n, p, f_u, f_v).is_ok());
    let (one_factor, vertex1, vertex2) = if p == 2 {
        if f_v == 0 {
            (Slot::Fixed, Slot::Moved, Slot::Absent)
        } else {
            (Slot::Absent, Slot::Fixed, Slot::Moved)
        }
    } else if f_u == 0 {
        let v1 = if f_v >= 1 { Slot::Fixed } else { Slot::Moved };
        (Slot::Moved, v1, Slot::Moved)
    } else if f_v == 0 {
        let u = if f_u < n - 1 { Slot::Moved } else { Slot::Fixed };
        (u, Slot::Moved, Slot::Moved)
    } else {
        (Slot::Fixed, Slot::Fixed, Slot::Fixed)
    };
    AnchorSchema {
        one_factor,
        vertex1,
        vertex2,
    }
}

// ============================================================================
// Tests
// ============================================================================
