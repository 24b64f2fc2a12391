//! Eigenfunctions on the Grassmannian of 2-planes in R^4, evaluated through
//! the double cover S^2 x S^2: products Y_j^a(u) Y_{j'}^b(v) of real
//! spherical harmonics with j + j' even, which are exactly the functions
//! invariant under (u,v) -> (-u,-v).
//!
//! The label (l1, l2) with l1 >= l2 >= 0 groups tensor degrees via
//! j = l1 + l2, j' = l1 - l2 (and the swapped block (j', j) when l2 > 0).
//! From each block the first 1 + l1 + l2 tensor pairs in lexicographic
//! (a, b) order are used, matching the multiplicity Z(l1,l2) =
//! (1 + l1 + l2) * eta(l2); the full product eigenspaces are larger, so
//! this is a documented deterministic sub-family choice.

use super::sphere::SphereTables;
use crate::linalg::Vec3;

/// Multiplicity Z(l1, l2) = (1 + l1 + l2) * eta(l2).
pub fn grass_multiplicity(l1: u32, l2: u32) -> u32 {
    let eta = if l2 == 0 { 1 } else { 2 };
    (1 + l1 + l2) * eta
}

/// Tensor-product location of one enumerated eigenfunction:
/// degrees (ju, jv) and 1-based sphere orders (a, b).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TensorSlot {
    pub ju: u32,
    pub jv: u32,
    pub a: u32,
    pub b: u32,
}

/// Map a member index 1..=Z(l1,l2) to its tensor slot.
pub fn tensor_slot(l1: u32, l2: u32, member: u32) -> TensorSlot {
    debug_assert!(l2 <= l1 && member >= 1 && member <= grass_multiplicity(l1, l2));
    let j = l1 + l2;
    let jp = l1 - l2;
    let half = 1 + l1 + l2;
    let (ju, jv, p) = if l2 == 0 || member <= half {
        (j, jp, member - 1)
    } else {
        (jp, j, member - half - 1)
    };
    let cols = 2 * jv + 1;
    TensorSlot {
        ju,
        jv,
        a: p / cols + 1,
        b: p % cols + 1,
    }
}

/// Per-point tables: sphere tables on both factors.
pub struct GrassTables {
    pub u: SphereTables,
    pub v: SphereTables,
    degree: usize,
}

impl GrassTables {
    pub fn compute(u: &Vec3, v: &Vec3, degree: usize, with_gradient: bool) -> GrassTables {
        GrassTables {
            u: SphereTables::compute(u, degree, with_gradient),
            v: SphereTables::compute(v, degree, with_gradient),
            degree,
        }
    }

    pub fn value(&self, slot: &TensorSlot) -> f64 {
        self.u.value(slot.ju as usize, slot.a as usize) * self.v.value(slot.jv as usize, slot.b as usize)
    }

    /// (du, dv) components of sum_i w_i grad(phi_i) for real weights `w`
    /// aligned with `slots`.
    pub fn weighted_gradient(&self, slots: &[TensorSlot], w: &[f64]) -> (Vec3, Vec3) {
        let dim = (self.degree + 1) * (self.degree + 1);
        let mut wu = vec![0.0; dim];
        let mut wv = vec![0.0; dim];
        for (slot, &wi) in slots.iter().zip(w) {
            if wi == 0.0 {
                continue;
            }
            let yu = self.u.value(slot.ju as usize, slot.a as usize);
            let yv = self.v.value(slot.jv as usize, slot.b as usize);
            wu[(slot.ju * slot.ju + slot.a - 1) as usize] += wi * yv;
            wv[(slot.jv * slot.jv + slot.b - 1) as usize] += wi * yu;
        }
        (self.u.weighted_gradient(&wu), self.v.weighted_gradient(&wv))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiplicities() {
        assert_eq!(grass_multiplicity(0, 0), 1);
        assert_eq!(grass_multiplicity(1, 0), 2);
        assert_eq!(grass_multiplicity(1, 1), 6);
        assert_eq!(grass_multiplicity(2, 1), 8);
    }

    #[test]
    fn slots_are_distinct_and_in_range() {
        for l1 in 0..=4u32 {
            for l2 in 0..=l1 {
                let z = grass_multiplicity(l1, l2);
                let mut seen = Vec::new();
                for m in 1..=z {
                    let s = tensor_slot(l1, l2, m);
                    assert_eq!(s.ju + s.jv, 2 * l1);
                    assert!((s.ju as i64 - s.jv as i64).unsigned_abs() == (2 * l2) as u64);
                    assert!(s.a >= 1 && s.a <= 2 * s.ju + 1);
                    assert!(s.b >= 1 && s.b <= 2 * s.jv + 1);
                    assert!(!seen.contains(&s), "duplicate slot for ({l1},{l2})");
                    seen.push(s);
                }
            }
        }
    }

    #[test]
    fn even_total_degree() {
        // all slots have ju + jv even, so values are invariant under
        // (u,v) -> (-u,-v)
        for l1 in 0..=3u32 {
            for l2 in 0..=l1 {
                for m in 1..=grass_multiplicity(l1, l2) {
                    let s = tensor_slot(l1, l2, m);
                    assert_eq!((s.ju + s.jv) % 2, 0);
                }
            }
        }
    }
}
