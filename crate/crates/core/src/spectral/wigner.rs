//! Wigner D-functions on SO(3), orthonormal with respect to the normalized
//! Haar measure: phi_{k,l,l'} = sqrt(2k+1) D^k_{l,l'} where D^k are the
//! unitary irreducible representation matrices in the z-y-z Euler-angle
//! convention D^k_{l,l'}(alpha,beta,gamma) = e^{-i l alpha} d^k_{l,l'}(beta)
//! e^{-i l' gamma}.
//!
//! The small-d matrix is evaluated through Jacobi polynomials, which stays
//! stable for the degrees used here. Derivatives along the coordinate axes
//! at the identity come from the tridiagonal representation matrices of the
//! rotation generators, so gradients never touch the Euler-angle chart and
//! are free of gimbal-lock issues.

use crate::linalg::{mat3_mul, mat3_transpose, Mat3};
use num_complex::Complex64;

/// z-y-z Euler angles of a rotation matrix, beta in [0, pi].
pub fn euler_zyz(r: &Mat3) -> (f64, f64, f64) {
    let beta = r[2][2].clamp(-1.0, 1.0).acos();
    let s = (r[0][2] * r[0][2] + r[1][2] * r[1][2]).sqrt();
    if s < 1e-12 {
        // gimbal lock: choose gamma = 0
        let alpha = if r[2][2] > 0.0 {
            r[1][0].atan2(r[0][0])
        } else {
            (-r[1][0]).atan2(-r[0][0])
        };
        return (alpha, beta, 0.0);
    }
    let alpha = r[1][2].atan2(r[0][2]);
    let gamma = r[2][1].atan2(-r[2][0]);
    (alpha, beta, gamma)
}

/// ln(n!) table.
fn ln_factorials(n: usize) -> Vec<f64> {
    let mut lf = vec![0.0; n + 1];
    for i in 2..=n {
        lf[i] = lf[i - 1] + (i as f64).ln();
    }
    lf
}

/// Jacobi polynomial P_n^{(a,b)}(x) by the three-term recurrence.
fn jacobi(n: usize, a: f64, b: f64, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut pm1 = 1.0;
    let mut p = (a + 1.0) + (a + b + 2.0) * (x - 1.0) / 2.0;
    for m in 2..=n {
        let m = m as f64;
        let c1 = 2.0 * m * (m + a + b) * (2.0 * m + a + b - 2.0);
        let c2 = (2.0 * m + a + b - 1.0)
            * ((2.0 * m + a + b) * (2.0 * m + a + b - 2.0) * x + a * a - b * b);
        let c3 = 2.0 * (m + a - 1.0) * (m + b - 1.0) * (2.0 * m + a + b);
        let next = (c2 * p - c3 * pm1) / c1;
        pm1 = p;
        p = next;
    }
    p
}

/// Small Wigner d-matrix d^k(beta), row-major with indices [l+k][l'+k],
/// l, l' = -k..=k.
pub fn wigner_d_matrix(k: usize, beta: f64) -> Vec<f64> {
    let n = 2 * k + 1;
    let mut d = vec![0.0; n * n];
    let lf = ln_factorials(2 * k + 1);
    let half = 0.5 * beta;
    let (sh, ch) = (half.sin(), half.cos());
    let x = beta.cos();
    for lp in -(k as i64)..=(k as i64) {
        for mp in -(k as i64)..=(k as i64) {
            d[(lp + k as i64) as usize * n + (mp + k as i64) as usize] =
                wigner_d_entry(k as i64, lp, mp, sh, ch, x, &lf);
        }
    }
    d
}

/// d^j_{m1,m2}(beta), with sin/cos of the half angle and cos(beta) given.
fn wigner_d_entry(j: i64, m1: i64, m2: i64, sh: f64, ch: f64, x: f64, lf: &[f64]) -> f64 {
    // smallest of the four corner distances selects a stable (a,b) form
    let candidates = [j + m2, j - m2, j + m1, j - m1];
    let mut k0 = candidates[0];
    for &c in &candidates[1..] {
        if c < k0 {
            k0 = c;
        }
    }
    let (a, lambda) = if k0 == j + m2 {
        (m1 - m2, m1 - m2)
    } else if k0 == j - m2 {
        (m2 - m1, 0)
    } else if k0 == j + m1 {
        (m2 - m1, 0)
    } else {
        (m1 - m2, m1 - m2)
    };
    debug_assert!(a >= 0);
    let b = 2 * j - 2 * k0 - a;
    let sign = if lambda % 2 == 0 { 1.0 } else { -1.0 };
    // sqrt( C(2j-k0, k0+a) / C(k0+b, b) )
    let ln_coeff = 0.5
        * (lf[(2 * j - k0) as usize] - lf[(k0 + a) as usize] - lf[b as usize]
            - (lf[(k0 + b) as usize] - lf[k0 as usize] - lf[b as usize]));
    sign * ln_coeff.exp() * sh.powi(a as i32) * ch.powi(b as i32) * jacobi(k0 as usize, a as f64, b as f64, x)
}

/// Ladder coefficient c^+_m = sqrt(k(k+1) - m(m+1)).
#[inline]
pub fn c_plus(k: i64, m: i64) -> f64 {
    ((k * (k + 1) - m * (m + 1)) as f64).max(0.0).sqrt()
}

/// Ladder coefficient c^-_m = sqrt(k(k+1) - m(m-1)).
#[inline]
pub fn c_minus(k: i64, m: i64) -> f64 {
    ((k * (k + 1) - m * (m - 1)) as f64).max(0.0).sqrt()
}

/// Per-point tables of full D^k matrices for k = 0..=degree.
pub struct WignerTables {
    pub degree: usize,
    /// mats[k] is the complex (2k+1)x(2k+1) matrix D^k(x), row-major [l+k][l'+k]
    pub mats: Vec<Vec<Complex64>>,
}

impl WignerTables {
    pub fn compute(r: &Mat3, degree: usize) -> WignerTables {
        let (alpha, beta, gamma) = euler_zyz(r);
        let mut mats = Vec::with_capacity(degree + 1);
        let e_alpha: Vec<Complex64> = (-(degree as i64)..=(degree as i64))
            .map(|l| Complex64::from_polar(1.0, -(l as f64) * alpha))
            .collect();
        let e_gamma: Vec<Complex64> = (-(degree as i64)..=(degree as i64))
            .map(|l| Complex64::from_polar(1.0, -(l as f64) * gamma))
            .collect();
        for k in 0..=degree {
            let d = wigner_d_matrix(k, beta);
            let n = 2 * k + 1;
            let mut m = vec![Complex64::new(0.0, 0.0); n * n];
            for l in 0..n {
                let pa = e_alpha[degree - k + l];
                for lp in 0..n {
                    let pg = e_gamma[degree - k + lp];
                    m[l * n + lp] = pa * pg * d[l * n + lp];
                }
            }
            mats.push(m);
        }
        WignerTables { degree, mats }
    }

    /// D^k_{l,l'}(x); l, l' in -k..=k.
    #[inline]
    pub fn entry(&self, k: usize, l: i64, lp: i64) -> Complex64 {
        let n = 2 * k + 1;
        self.mats[k][(l + k as i64) as usize * n + (lp + k as i64) as usize]
    }

    fn entry_or_zero(&self, k: usize, l: i64, lp: i64) -> Complex64 {
        if lp.unsigned_abs() as usize > k || l.unsigned_abs() as usize > k {
            Complex64::new(0.0, 0.0)
        } else {
            self.entry(k, l, lp)
        }
    }

    /// Derivatives of D^k_{l,l'} along the right-translated generator
    /// directions x * hat(e_b): returns [along e1, e2, e3].
    pub fn entry_derivatives(&self, k: usize, l: i64, lp: i64) -> [Complex64; 3] {
        let cp = c_plus(k as i64, lp);
        let cm = c_minus(k as i64, lp);
        let d_up = self.entry_or_zero(k, l, lp + 1);
        let d_dn = self.entry_or_zero(k, l, lp - 1);
        let d_00 = self.entry(k, l, lp);
        let i = Complex64::new(0.0, 1.0);
        let g1 = -0.5 * i * (cp * d_up + cm * d_dn);
        let g2 = 0.5 * (-cp * d_up + cm * d_dn);
        let g3 = -i * (lp as f64) * d_00;
        [g1, g2, g3]
    }
}

/// Character of the degree-k representation at the relative rotation
/// x^T y: sum_{l,l'} D_{l,l'}(x) conj(D_{l,l'}(y)) = U_{2k}(cos(omega/2)).
pub fn character_argument(x: &Mat3, y: &Mat3) -> f64 {
    let tr = crate::linalg::mat3_trace(&mat3_mul(&mat3_transpose(x), y));
    // cos(omega/2) = sqrt(tr+1)/2
    (0.25 * (tr + 1.0)).max(0.0).sqrt().clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{expm_skew, hat, rot_y, rot_z, MAT3_ID};
    use crate::spectral::quad::chebyshev_u;

    #[test]
    fn small_d_degree_one_table() {
        let beta = 0.63;
        let d = wigner_d_matrix(1, beta);
        let (s, c) = beta.sin_cos();
        let sq = 1.0 / 2.0_f64.sqrt();
        // rows/cols ordered l = -1, 0, 1
        let expected = [
            [(1.0 + c) / 2.0, s * sq, (1.0 - c) / 2.0],
            [-s * sq, c, s * sq],
            [(1.0 - c) / 2.0, -s * sq, (1.0 + c) / 2.0],
        ];
        for i in 0..3 {
            for j in 0..3 {
                assert!(
                    (d[i * 3 + j] - expected[i][j]).abs() < 1e-13,
                    "entry ({i},{j}): {} vs {}",
                    d[i * 3 + j],
                    expected[i][j]
                );
            }
        }
    }

    #[test]
    fn small_d_orthogonal() {
        for k in 1..=8usize {
            let d = wigner_d_matrix(k, 1.234);
            let n = 2 * k + 1;
            for i in 0..n {
                for j in 0..n {
                    let dot: f64 = (0..n).map(|t| d[i * n + t] * d[j * n + t]).sum();
                    let id = if i == j { 1.0 } else { 0.0 };
                    assert!((dot - id).abs() < 1e-11, "k={k} ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn d_is_a_homomorphism() {
        let r1 = mat3_mul(&rot_z(0.4), &rot_y(1.1));
        let r2 = mat3_mul(&rot_y(0.3), &rot_z(-0.8));
        let r12 = mat3_mul(&r1, &r2);
        for k in 1..=4usize {
            let t1 = WignerTables::compute(&r1, k);
            let t2 = WignerTables::compute(&r2, k);
            let t12 = WignerTables::compute(&r12, k);
            let n = 2 * k + 1;
            for l in -(k as i64)..=(k as i64) {
                for lp in -(k as i64)..=(k as i64) {
                    let mut prod = Complex64::new(0.0, 0.0);
                    for m in -(k as i64)..=(k as i64) {
                        prod += t1.entry(k, l, m) * t2.entry(k, m, lp);
                    }
                    let direct = t12.entry(k, l, lp);
                    assert!((prod - direct).norm() < 1e-11, "k={k} n={n}");
                }
            }
        }
    }

    #[test]
    fn character_identity() {
        // sum_{l,l'} D(x) conj(D(y)) equals the Chebyshev character
        let x = expm_skew(&hat(&[0.3, -0.2, 0.9]));
        let y = expm_skew(&hat(&[-0.5, 0.11, 0.4]));
        let tx = WignerTables::compute(&x, 6);
        let ty = WignerTables::compute(&y, 6);
        let arg = character_argument(&x, &y);
        for k in 0..=6usize {
            let mut s = Complex64::new(0.0, 0.0);
            for l in -(k as i64)..=(k as i64) {
                for lp in -(k as i64)..=(k as i64) {
                    s += tx.entry(k, l, lp) * ty.entry(k, l, lp).conj();
                }
            }
            let expected = chebyshev_u(2 * k, arg);
            assert!(s.im.abs() < 1e-10);
            assert!((s.re - expected).abs() < 1e-9, "k={k}: {} vs {expected}", s.re);
        }
    }

    #[test]
    fn generator_derivatives_match_finite_differences() {
        let x = expm_skew(&hat(&[0.7, 0.2, -0.4]));
        let k = 3usize;
        let t = WignerTables::compute(&x, k);
        let h = 1e-7;
        for b in 0..3 {
            let mut e = [0.0; 3];
            e[b] = h;
            let xp = mat3_mul(&x, &expm_skew(&hat(&e)));
            let tp = WignerTables::compute(&xp, k);
            for l in -(k as i64)..=(k as i64) {
                for lp in -(k as i64)..=(k as i64) {
                    let fd = (tp.entry(k, l, lp) - t.entry(k, l, lp)) / h;
                    let an = t.entry_derivatives(k, l, lp)[b];
                    assert!(
                        (fd - an).norm() < 1e-5,
                        "b={b} l={l} lp={lp}: fd {fd} vs {an}"
                    );
                }
            }
        }
    }

    #[test]
    fn gimbal_lock_still_evaluates() {
        let t = WignerTables::compute(&MAT3_ID, 4);
        for k in 0..=4usize {
            for l in -(k as i64)..=(k as i64) {
                for lp in -(k as i64)..=(k as i64) {
                    let expected = if l == lp { 1.0 } else { 0.0 };
                    assert!((t.entry(k, l, lp) - expected).norm() < 1e-12);
                }
            }
        }
        let t2 = WignerTables::compute(&rot_z(std::f64::consts::PI), 2);
        // still a valid representation value: D(R_z(pi)) = diag(e^{-il pi})
        for l in -2i64..=2 {
            let expected = Complex64::from_polar(1.0, -(l as f64) * std::f64::consts::PI);
            assert!((t2.entry(2, l, l) - expected).norm() < 1e-12);
        }
    }
}
