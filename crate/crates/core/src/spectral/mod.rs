//! Laplace-Beltrami eigenfunctions, their Riemannian gradients, frequency
//! enumeration and kernel coefficient sequences for the four manifolds.
//!
//! Frequency ordering (all enumerations are lexicographic and fixed, so that
//! serialized coefficient vectors are portable):
//!
//! * Torus(d): multi-indices k in Z^d with |k|_inf <= r, coordinates running
//!   from -r to r, last coordinate fastest. Count (2r+1)^d.
//! * Sphere2: (k, l) with k = 0..r, l = 1..2k+1, m = l-k-1 (sine harmonics
//!   below the zonal index, cosine above). Count (r+1)^2.
//! * So3: (k, l, l') with k = 0..r and l, l' = -k..k, l outer. Count
//!   (r+1)(2r+1)(2r+3)/3.
//! * Grass24: (l1, l2, member) with l1 >= l2 >= 0, l1+l2 <= r, blocks in
//!   lexicographic (l1, l2) order and member = 1..Z(l1,l2) with
//!   Z = (1+l1+l2)*eta(l2).

pub mod grass;
pub mod quad;
pub mod sphere;
pub mod torus;
pub mod wigner;

use crate::error::{Error, Result};
use crate::linalg::{hat, mat3_mul, sub3, Vec3};
use crate::manifold::{ManifoldId, Point, Tangent, TangentVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use quad::{chebyshev_u, gauss_legendre, legendre_p};

/// Index of one Laplace-Beltrami eigenfunction.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FrequencyIndex {
    Torus(Vec<i64>),
    Sphere { degree: u32, order: u32 },
    So3 { degree: u32, row: i32, col: i32 },
    Grass { l1: u32, l2: u32, member: u32 },
}

impl FrequencyIndex {
    pub fn manifold_matches(&self, m: ManifoldId) -> bool {
        matches!(
            (self, m),
            (FrequencyIndex::Torus(_), ManifoldId::Torus(_))
                | (FrequencyIndex::Sphere { .. }, ManifoldId::Sphere2)
                | (FrequencyIndex::So3 { .. }, ManifoldId::So3)
                | (FrequencyIndex::Grass { .. }, ManifoldId::Grass24)
        )
    }

    /// Index tuple used in serialized measure files.
    pub fn tuple(&self) -> Vec<i64> {
        match self {
            FrequencyIndex::Torus(k) => k.clone(),
            FrequencyIndex::Sphere { degree, order } => vec![*degree as i64, *order as i64],
            FrequencyIndex::So3 { degree, row, col } => {
                vec![*degree as i64, *row as i64, *col as i64]
            }
            FrequencyIndex::Grass { l1, l2, member } => {
                vec![*l1 as i64, *l2 as i64, *member as i64]
            }
        }
    }

    pub fn from_tuple(m: ManifoldId, t: &[i64]) -> Result<FrequencyIndex> {
        let bad = || Error::InvalidIndex(format!("bad index tuple {t:?} for {m}"));
        match m {
            ManifoldId::Torus(d) => {
                if t.len() != d {
                    return Err(bad());
                }
                Ok(FrequencyIndex::Torus(t.to_vec()))
            }
            ManifoldId::Sphere2 => {
                if t.len() != 2 || t[0] < 0 || t[1] < 1 || t[1] > 2 * t[0] + 1 {
                    return Err(bad());
                }
                Ok(FrequencyIndex::Sphere {
                    degree: t[0] as u32,
                    order: t[1] as u32,
                })
            }
            ManifoldId::So3 => {
                if t.len() != 3 || t[0] < 0 || t[1].abs() > t[0] || t[2].abs() > t[0] {
                    return Err(bad());
                }
                Ok(FrequencyIndex::So3 {
                    degree: t[0] as u32,
                    row: t[1] as i32,
                    col: t[2] as i32,
                })
            }
            ManifoldId::Grass24 => {
                if t.len() != 3 || t[1] < 0 || t[0] < t[1] {
                    return Err(bad());
                }
                let (l1, l2) = (t[0] as u32, t[1] as u32);
                if t[2] < 1 || t[2] > grass::grass_multiplicity(l1, l2) as i64 {
                    return Err(bad());
                }
                Ok(FrequencyIndex::Grass {
                    l1,
                    l2,
                    member: t[2] as u32,
                })
            }
        }
    }
}

/// All frequency indices of the degree-r eigenspaces, in the documented
/// lexicographic order.
pub fn enumerate_frequencies(m: ManifoldId, r: u32) -> Vec<FrequencyIndex> {
    match m {
        ManifoldId::Torus(d) => {
            let n = (2 * r + 1) as usize;
            let total = n.pow(d as u32);
            let mut out = Vec::with_capacity(total);
            let mut k = vec![-(r as i64); d];
            for _ in 0..total {
                out.push(FrequencyIndex::Torus(k.clone()));
                for c in (0..d).rev() {
                    k[c] += 1;
                    if k[c] <= r as i64 {
                        break;
                    }
                    k[c] = -(r as i64);
                }
            }
            out
        }
        ManifoldId::Sphere2 => {
            let mut out = Vec::with_capacity(((r + 1) * (r + 1)) as usize);
            for k in 0..=r {
                for l in 1..=(2 * k + 1) {
                    out.push(FrequencyIndex::Sphere { degree: k, order: l });
                }
            }
            out
        }
        ManifoldId::So3 => {
            let total = ((r + 1) * (2 * r + 1) * (2 * r + 3) / 3) as usize;
            let mut out = Vec::with_capacity(total);
            for k in 0..=r {
                for row in -(k as i32)..=(k as i32) {
                    for col in -(k as i32)..=(k as i32) {
                        out.push(FrequencyIndex::So3 { degree: k, row, col });
                    }
                }
            }
            out
        }
        ManifoldId::Grass24 => {
            let mut out = Vec::new();
            for l1 in 0..=r {
                for l2 in 0..=l1.min(r - l1) {
                    for member in 1..=grass::grass_multiplicity(l1, l2) {
                        out.push(FrequencyIndex::Grass { l1, l2, member });
                    }
                }
            }
            out
        }
    }
}

/// Laplace-Beltrami eigenvalue of one eigenfunction.
pub fn eigenvalue(idx: &FrequencyIndex) -> f64 {
    match idx {
        FrequencyIndex::Torus(k) => {
            let norm_sq: f64 = k.iter().map(|&c| (c * c) as f64).sum();
            4.0 * std::f64::consts::PI * std::f64::consts::PI * norm_sq
        }
        FrequencyIndex::Sphere { degree, .. } => (*degree as f64) * (*degree as f64 + 1.0),
        FrequencyIndex::So3 { degree, .. } => (*degree as f64) * (*degree as f64 + 1.0),
        FrequencyIndex::Grass { l1, l2, .. } => {
            let (a, b) = (*l1 as f64, *l2 as f64);
            4.0 * (a * a + b * b + a)
        }
    }
}

/// Sobolev kernel coefficients alpha_k, truncated to degree r.
#[derive(Debug, Clone)]
pub struct KernelWeights {
    pub manifold: ManifoldId,
    pub smoothness: f64,
    pub degree: u32,
    /// aligned with `enumerate_frequencies(manifold, degree)`
    pub weights: Vec<f64>,
}

/// Per-eigenfunction coefficient of the fixed Sobolev kernel of the
/// manifold (smoothness (d+1)/2 on T^d, 3/2 on S^2, 2 on SO(3), 5/2 on the
/// Grassmannian).
pub fn kernel_coefficient(idx: &FrequencyIndex, torus_dim: usize) -> f64 {
    match idx {
        FrequencyIndex::Torus(k) => {
            let norm_sq: f64 = k.iter().map(|&c| (c * c) as f64).sum();
            (1.0 + norm_sq).powf(-((torus_dim as f64 + 1.0) / 2.0))
        }
        FrequencyIndex::Sphere { degree, .. } => {
            let k = *degree as f64;
            if *degree == 0 {
                1.0 / 3.0
            } else {
                2.0 / ((2.0 * k - 1.0) * (2.0 * k + 1.0) * (2.0 * k + 3.0))
            }
        }
        FrequencyIndex::So3 { degree, .. } => {
            let k = *degree as f64;
            if *degree == 0 {
                std::f64::consts::PI / 8.0 - 1.0 / 3.0
            } else {
                1.0 / ((2.0 * k - 1.0) * (2.0 * k + 1.0) * (2.0 * k + 1.0) * (2.0 * k + 3.0))
            }
        }
        FrequencyIndex::Grass { l1, l2, .. } => {
            let (a, b) = (*l1 as f64, *l2 as f64);
            (1.0 + a * a + b * b).powf(-2.5)
        }
    }
}

/// The manifold's fixed kernel, truncated to degree r.
pub fn kernel_weights(m: ManifoldId, r: u32) -> KernelWeights {
    let torus_dim = match m {
        ManifoldId::Torus(d) => d,
        _ => 0,
    };
    let smoothness = match m {
        ManifoldId::Torus(d) => (d as f64 + 1.0) / 2.0,
        ManifoldId::Sphere2 => 1.5,
        ManifoldId::So3 => 2.0,
        ManifoldId::Grass24 => 2.5,
    };
    let weights = enumerate_frequencies(m, r)
        .iter()
        .map(|idx| kernel_coefficient(idx, torus_dim))
        .collect();
    KernelWeights {
        manifold: m,
        smoothness,
        degree: r,
        weights,
    }
}

/// Closed-form kernel value where available (S^2 and SO(3)).
pub fn kernel_closed_form(m: ManifoldId, x: &Point, y: &Point) -> Result<f64> {
    match (m, x, y) {
        (ManifoldId::Sphere2, Point::Sphere2(a), Point::Sphere2(b)) => {
            Ok(1.0 - 0.5 * crate::linalg::norm3(&sub3(a, b)))
        }
        (ManifoldId::So3, Point::So3(a), Point::So3(b)) => {
            let mut fro = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    let d = a[i][j] - b[i][j];
                    fro += d * d;
                }
            }
            Ok(std::f64::consts::PI / 8.0
                - std::f64::consts::PI * std::f64::consts::SQRT_2 / 16.0 * fro.sqrt())
        }
        (ManifoldId::Torus(_), _, _) | (ManifoldId::Grass24, _, _) => Err(
            Error::UnsupportedManifold(format!("no closed-form kernel on {m}")),
        ),
        _ => Err(Error::ManifoldMismatch(
            x.manifold().tag(),
            y.manifold().tag(),
        )),
    }
}

/// Degree-r truncation of the S^2 kernel series, evaluated through the
/// addition theorem (sum over orders of Y Y* collapses to (2k+1) P_k).
pub fn sphere_kernel_series(x: &Vec3, y: &Vec3, r: usize) -> f64 {
    let dot = crate::linalg::dot3(x, y).clamp(-1.0, 1.0);
    let mut sum = 1.0 / 3.0;
    let mut pm1 = 1.0;
    let mut p = dot;
    for k in 1..=r {
        sum += 2.0 / ((2 * k - 1) as f64 * (2 * k + 3) as f64) * p;
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * dot * p - kf * pm1) / (kf + 1.0);
        pm1 = p;
        p = next;
    }
    sum
}

/// Degree-r truncation of the SO(3) kernel series, evaluated through the
/// character identity (sum over rows/cols of D D* collapses to (2k+1) U_2k).
pub fn so3_kernel_series(x: &crate::linalg::Mat3, y: &crate::linalg::Mat3, r: usize) -> f64 {
    let arg = wigner::character_argument(x, y);
    let mut sum = std::f64::consts::PI / 8.0 - 1.0 / 3.0;
    // maintain (U_{2k-2}, U_{2k-1}) and advance two recurrence steps per k
    let mut u_even = 1.0;
    let mut u_odd = 2.0 * arg;
    for k in 1..=r {
        let u_2k = 2.0 * arg * u_odd - u_even;
        sum += u_2k / ((2 * k - 1) as f64 * (2 * k + 1) as f64 * (2 * k + 3) as f64);
        let u_2kp1 = 2.0 * arg * u_2k - u_odd;
        u_even = u_2k;
        u_odd = u_2kp1;
    }
    sum
}

// ---------------------------------------------------------------------------
// Batched evaluation
// ---------------------------------------------------------------------------

enum PointTables {
    Torus(torus::TorusTables),
    Sphere(sphere::SphereTables),
    So3(wigner::WignerTables),
    Grass(grass::GrassTables),
}

/// Batched evaluator for all eigenfunctions up to a degree, on one manifold.
pub struct Basis {
    pub manifold: ManifoldId,
    pub degree: u32,
    indices: Vec<FrequencyIndex>,
    grass_slots: Vec<grass::TensorSlot>,
}

impl Basis {
    pub fn new(m: ManifoldId, r: u32) -> Basis {
        let indices = enumerate_frequencies(m, r);
        let grass_slots = if m == ManifoldId::Grass24 {
            indices
                .iter()
                .map(|idx| match idx {
                    FrequencyIndex::Grass { l1, l2, member } => {
                        grass::tensor_slot(*l1, *l2, *member)
                    }
                    _ => unreachable!(),
                })
                .collect()
        } else {
            Vec::new()
        };
        Basis {
            manifold: m,
            degree: r,
            indices,
            grass_slots,
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[FrequencyIndex] {
        &self.indices
    }

    /// Position of an index within the enumeration.
    pub fn position(&self, idx: &FrequencyIndex) -> Option<usize> {
        let r = self.degree;
        match (self.manifold, idx) {
            (ManifoldId::Torus(d), FrequencyIndex::Torus(k)) => {
                if k.len() != d || k.iter().any(|&c| c.unsigned_abs() > r as u64) {
                    return None;
                }
                let n = (2 * r + 1) as usize;
                let mut pos = 0usize;
                for &c in k {
                    pos = pos * n + (c + r as i64) as usize;
                }
                Some(pos)
            }
            (ManifoldId::Sphere2, FrequencyIndex::Sphere { degree, order }) => {
                if *degree > r || *order < 1 || *order > 2 * degree + 1 {
                    return None;
                }
                Some((degree * degree + order - 1) as usize)
            }
            (ManifoldId::So3, FrequencyIndex::So3 { degree, row, col }) => {
                let k = *degree as i64;
                if k > r as i64 || row.unsigned_abs() as i64 > k || col.unsigned_abs() as i64 > k {
                    return None;
                }
                let base = (k * (2 * k - 1) * (2 * k + 1) / 3) as usize;
                let n = (2 * k + 1) as usize;
                Some(base + (*row as i64 + k) as usize * n + (*col as i64 + k) as usize)
            }
            (ManifoldId::Grass24, FrequencyIndex::Grass { l1, l2, member }) => {
                if l1 + l2 > r || l2 > l1 || *member < 1 {
                    return None;
                }
                let mut pos = 0usize;
                for a in 0..=r {
                    for b in 0..=a.min(r - a) {
                        if a == *l1 && b == *l2 {
                            return Some(pos + (*member - 1) as usize);
                        }
                        pos += grass::grass_multiplicity(a, b) as usize;
                    }
                }
                None
            }
            _ => None,
        }
    }

    fn tables(&self, x: &Point, with_gradient: bool) -> Result<PointTables> {
        if x.manifold() != self.manifold {
            return Err(Error::ManifoldMismatch(
                self.manifold.tag(),
                x.manifold().tag(),
            ));
        }
        let r = self.degree as usize;
        Ok(match x {
            Point::Torus(c) => PointTables::Torus(torus::TorusTables::compute(c, r)),
            Point::Sphere2(c) => {
                PointTables::Sphere(sphere::SphereTables::compute(c, r, with_gradient))
            }
            Point::So3(c) => PointTables::So3(wigner::WignerTables::compute(c, r)),
            Point::Grass24 { u, v } => {
                PointTables::Grass(grass::GrassTables::compute(u, v, r, with_gradient))
            }
        })
    }

    /// Evaluate all eigenfunctions at x into `out` (enumeration order).
    pub fn eval(&self, x: &Point, out: &mut [Complex64]) -> Result<()> {
        debug_assert_eq!(out.len(), self.len());
        match self.tables(x, false)? {
            PointTables::Torus(t) => t.values_into(out),
            PointTables::Sphere(t) => {
                let mut i = 0;
                for k in 0..=(self.degree as usize) {
                    for l in 1..=(2 * k + 1) {
                        out[i] = Complex64::new(t.value(k, l), 0.0);
                        i += 1;
                    }
                }
            }
            PointTables::So3(t) => {
                let mut i = 0;
                for k in 0..=(self.degree as usize) {
                    let scale = ((2 * k + 1) as f64).sqrt();
                    for l in -(k as i64)..=(k as i64) {
                        for lp in -(k as i64)..=(k as i64) {
                            out[i] = scale * t.entry(k, l, lp);
                            i += 1;
                        }
                    }
                }
            }
            PointTables::Grass(t) => {
                for (i, slot) in self.grass_slots.iter().enumerate() {
                    out[i] = Complex64::new(t.value(slot), 0.0);
                }
            }
        }
        Ok(())
    }

    /// Real tangent vector Re( sum_k w_k grad(phi_k)(x) ).
    pub fn weighted_gradient_sum(&self, x: &Point, w: &[Complex64]) -> Result<TangentVector> {
        debug_assert_eq!(w.len(), self.len());
        let components = match self.tables(x, true)? {
            PointTables::Torus(t) => Tangent::Torus(t.weighted_gradient(w)),
            PointTables::Sphere(t) => {
                let wr: Vec<f64> = w.iter().map(|c| c.re).collect();
                Tangent::Sphere2(t.weighted_gradient(&wr))
            }
            PointTables::So3(t) => {
                let mut s = [Complex64::new(0.0, 0.0); 3];
                let mut i = 0;
                for k in 0..=(self.degree as usize) {
                    let scale = ((2 * k + 1) as f64).sqrt();
                    for l in -(k as i64)..=(k as i64) {
                        for lp in -(k as i64)..=(k as i64) {
                            let wk = w[i];
                            i += 1;
                            if wk.re == 0.0 && wk.im == 0.0 {
                                continue;
                            }
                            let g = t.entry_derivatives(k, l, lp);
                            let ws = wk * scale;
                            s[0] += ws * g[0];
                            s[1] += ws * g[1];
                            s[2] += ws * g[2];
                        }
                    }
                }
                // gradient = x * hat(2 Re S) in the tr(v^T w)/8 metric
                let rot = match x {
                    Point::So3(r) => r,
                    _ => unreachable!(),
                };
                let axis = [2.0 * s[0].re, 2.0 * s[1].re, 2.0 * s[2].re];
                Tangent::So3(mat3_mul(rot, &hat(&axis)))
            }
            PointTables::Grass(t) => {
                let wr: Vec<f64> = w.iter().map(|c| c.re).collect();
                let (du, dv) = t.weighted_gradient(&self.grass_slots, &wr);
                Tangent::Grass24 { du, dv }
            }
        };
        Ok(TangentVector {
            base: x.clone(),
            components,
        })
    }

    /// Single eigenfunction value (position within the enumeration).
    pub fn eigenfunction(&self, pos: usize, x: &Point) -> Result<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.len()];
        self.eval(x, &mut out)?;
        Ok(out[pos])
    }

    /// Riemannian gradient of one eigenfunction as (real part, imaginary
    /// part) tangent vectors.
    pub fn eigenfunction_gradient(
        &self,
        pos: usize,
        x: &Point,
    ) -> Result<(TangentVector, TangentVector)> {
        let mut w = vec![Complex64::new(0.0, 0.0); self.len()];
        w[pos] = Complex64::new(1.0, 0.0);
        let re = self.weighted_gradient_sum(x, &w)?;
        w[pos] = Complex64::new(0.0, -1.0);
        let im = self.weighted_gradient_sum(x, &w)?;
        Ok((re, im))
    }
}
