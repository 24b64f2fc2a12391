//! Real spherical harmonics on S^2, orthonormal with respect to the
//! normalized surface measure (the constant harmonic is identically 1).
//!
//! Ordering within degree k: l = 1..2k+1 with m = l-k-1; negative m are
//! sine harmonics, positive m cosine harmonics, l = k+1 is zonal about e3.
//! Longitude phi = atan2(x2, x1), colatitude theta = arccos(x3).
//! No Condon-Shortley phase.

use crate::linalg::Vec3;

/// Per-point tables of normalized associated Legendre values Q_k^m and
/// their theta-derivatives, plus the local spherical frame.
pub struct SphereTables {
    degree: usize,
    /// packed [m][k], k = m..=degree
    q: Vec<f64>,
    dq: Vec<f64>,
    cos_m: Vec<f64>,
    sin_m: Vec<f64>,
    pub sin_theta: f64,
    pub cos_theta: f64,
    theta_hat: Vec3,
    phi_hat: Vec3,
    near_pole: bool,
    x: Vec3,
}

const SQRT2: f64 = std::f64::consts::SQRT_2;
const POLE_EPS: f64 = 1e-9;

#[inline]
fn pack_offset(degree: usize, m: usize) -> usize {
    m * (degree + 1) - m * (m.saturating_sub(1)) / 2
}

impl SphereTables {
    pub fn compute(x: &Vec3, degree: usize, with_gradient: bool) -> SphereTables {
        let u = x[2].clamp(-1.0, 1.0);
        let s = (x[0] * x[0] + x[1] * x[1]).sqrt();
        let near_pole = s < POLE_EPS;
        let (cphi, sphi) = if near_pole {
            (1.0, 0.0)
        } else {
            (x[0] / s, x[1] / s)
        };

        let n = degree + 1;
        let packed = n * (n + 1) / 2;
        let mut q = vec![0.0; packed];
        let mut dq = vec![0.0; if with_gradient { packed } else { 0 }];

        // Q_m^m and Q_{m+1}^m seeds, then three-term recurrence upward in k.
        let mut qmm = 1.0; // Q_0^0
        for m in 0..=degree {
            let off = pack_offset(degree, m);
            if m > 0 {
                qmm *= ((2 * m + 1) as f64 / (2 * m) as f64).sqrt() * s;
            }
            q[off] = qmm;
            if m < degree {
                q[off + 1] = ((2 * m + 3) as f64).sqrt() * u * qmm;
            }
            for k in (m + 2)..=degree {
                let a = (((4 * k * k - 1) as f64) / ((k * k - m * m) as f64)).sqrt();
                let a_prev =
                    (((4 * (k - 1) * (k - 1) - 1) as f64) / (((k - 1) * (k - 1) - m * m) as f64))
                        .sqrt();
                q[off + k - m] = a * (u * q[off + k - 1 - m] - q[off + k - 2 - m] / a_prev);
            }
        }

        if with_gradient && !near_pole {
            for m in 0..=degree {
                let off = pack_offset(degree, m);
                for k in m..=degree {
                    let qk = q[off + k - m];
                    let qkm1 = if k > m { q[off + k - 1 - m] } else { 0.0 };
                    let e = if k >= 1 {
                        ((((k * k - m * m) as f64) * (2 * k + 1) as f64) / (2 * k - 1) as f64)
                            .sqrt()
                    } else {
                        0.0
                    };
                    dq[off + k - m] = (k as f64 * u * qk - e * qkm1) / s;
                }
            }
        }

        let mut cos_m = vec![0.0; n];
        let mut sin_m = vec![0.0; n];
        cos_m[0] = 1.0;
        for m in 1..n {
            cos_m[m] = cos_m[m - 1] * cphi - sin_m[m - 1] * sphi;
            sin_m[m] = sin_m[m - 1] * cphi + cos_m[m - 1] * sphi;
        }

        let theta_hat = [u * cphi, u * sphi, -s];
        let phi_hat = [-sphi, cphi, 0.0];

        SphereTables {
            degree,
            q,
            dq,
            cos_m,
            sin_m,
            sin_theta: s,
            cos_theta: u,
            theta_hat,
            phi_hat,
            near_pole,
            x: *x,
        }
    }

    /// Y_k^l for l = 1..2k+1 (m = l-k-1).
    pub fn value(&self, k: usize, l: usize) -> f64 {
        debug_assert!(k <= self.degree && l >= 1 && l <= 2 * k + 1);
        let m = l as i64 - k as i64 - 1;
        let ma = m.unsigned_abs() as usize;
        let qv = self.q[pack_offset(self.degree, ma) + k - ma];
        if m == 0 {
            qv
        } else if m > 0 {
            SQRT2 * qv * self.cos_m[ma]
        } else {
            SQRT2 * qv * self.sin_m[ma]
        }
    }

    /// Write all values for degrees 0..=degree into `out` in (k, l) order.
    pub fn values_into(&self, out: &mut [f64]) {
        debug_assert_eq!(out.len(), (self.degree + 1) * (self.degree + 1));
        let mut i = 0;
        for k in 0..=self.degree {
            for l in 1..=(2 * k + 1) {
                out[i] = self.value(k, l);
                i += 1;
            }
        }
    }

    /// Tangent vector sum_{k,l} w[(k,l)] * grad Y_k^l at the point, with real
    /// weights indexed in (k, l) order.
    pub fn weighted_gradient(&self, w: &[f64]) -> Vec3 {
        debug_assert_eq!(w.len(), (self.degree + 1) * (self.degree + 1));
        if self.near_pole {
            return self.weighted_gradient_pole(w);
        }
        let mut a_theta = 0.0;
        let mut a_phi = 0.0;
        let mut i = 0;
        for k in 0..=self.degree {
            for l in 1..=(2 * k + 1) {
                let wi = w[i];
                i += 1;
                if wi == 0.0 {
                    continue;
                }
                let m = l as i64 - k as i64 - 1;
                let ma = m.unsigned_abs() as usize;
                let off = pack_offset(self.degree, ma) + k - ma;
                let dqv = self.dq[off];
                let qv = self.q[off];
                if m == 0 {
                    a_theta += wi * dqv;
                } else if m > 0 {
                    a_theta += wi * SQRT2 * dqv * self.cos_m[ma];
                    a_phi -= wi * SQRT2 * qv * (ma as f64) * self.sin_m[ma] / self.sin_theta;
                } else {
                    a_theta += wi * SQRT2 * dqv * self.sin_m[ma];
                    a_phi += wi * SQRT2 * qv * (ma as f64) * self.cos_m[ma] / self.sin_theta;
                }
            }
        }
        [
            a_theta * self.theta_hat[0] + a_phi * self.phi_hat[0],
            a_theta * self.theta_hat[1] + a_phi * self.phi_hat[1],
            a_theta * self.theta_hat[2] + a_phi * self.phi_hat[2],
        ]
    }

    /// At the poles only |m| = 1 harmonics carry a gradient:
    /// Y_{k,+-1} = sqrt(2) N_k^1 P_k'(u) * x_{1,2} to leading order.
    fn weighted_gradient_pole(&self, w: &[f64]) -> Vec3 {
        let u = self.cos_theta;
        let mut g = [0.0, 0.0, 0.0];
        for k in 1..=self.degree {
            let base = k * k;
            let wc = w[base + k + 1]; // m = +1
            let ws = w[base + k - 1]; // m = -1
            if wc == 0.0 && ws == 0.0 {
                continue;
            }
            let nk1 = ((2 * k + 1) as f64 / (k * (k + 1)) as f64).sqrt();
            let dpk = legendre_dp_at(k, u);
            let c = SQRT2 * nk1 * dpk;
            g[0] += wc * c;
            g[1] += ws * c;
        }
        // project to the tangent plane at x
        let p = g[0] * self.x[0] + g[1] * self.x[1] + g[2] * self.x[2];
        [
            g[0] - p * self.x[0],
            g[1] - p * self.x[1],
            g[2] - p * self.x[2],
        ]
    }
}

fn legendre_dp_at(k: usize, u: f64) -> f64 {
    if u.abs() > 1.0 - 1e-12 {
        let sign = if u > 0.0 { 1.0 } else { (-1.0_f64).powi(k as i32 - 1) };
        return sign * (k * (k + 1)) as f64 / 2.0;
    }
    let (p, dp) = {
        let mut pm1 = 1.0;
        let mut p = u;
        for n in 1..k {
            let next = ((2 * n + 1) as f64 * u * p - n as f64 * pm1) / (n + 1) as f64;
            pm1 = p;
            p = next;
        }
        (p, k as f64 * (u * p - pm1) / (u * u - 1.0))
    };
    let _ = p;
    dp
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm3;
    use crate::spectral::quad::legendre_p;

    #[test]
    fn zonal_values() {
        // zonal harmonic is sqrt(2k+1) P_k(cos theta)
        let x = [0.3, -0.4, (1.0_f64 - 0.25).sqrt()];
        let t = SphereTables::compute(&x, 6, false);
        for k in 0..=6 {
            let expected = ((2 * k + 1) as f64).sqrt() * legendre_p(k, x[2]);
            assert!((t.value(k, k + 1) - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn degree_one_cartesian() {
        let x = [0.48, 0.6, 0.64];
        let t = SphereTables::compute(&x, 1, false);
        let s3 = 3.0_f64.sqrt();
        assert!((t.value(1, 2) - s3 * x[2]).abs() < 1e-13); // zonal
        assert!((t.value(1, 3) - s3 * x[0]).abs() < 1e-13); // cos
        assert!((t.value(1, 1) - s3 * x[1]).abs() < 1e-13); // sin
    }

    #[test]
    fn addition_theorem() {
        // sum_l Y_k^l(x) Y_k^l(y) = (2k+1) P_k(<x,y>)
        let xnorm = norm3(&[1.0, 2.0, 3.0]);
        let x = [1.0 / xnorm, 2.0 / xnorm, 3.0 / xnorm];
        let ynorm = norm3(&[0.1, -0.7, 0.9]);
        let y = [0.1 / ynorm, -0.7 / ynorm, 0.9 / ynorm];
        let tx = SphereTables::compute(&x, 16, false);
        let ty = SphereTables::compute(&y, 16, false);
        let dot = x[0] * y[0] + x[1] * y[1] + x[2] * y[2];
        for k in 0..=16 {
            let sum: f64 = (1..=(2 * k + 1)).map(|l| tx.value(k, l) * ty.value(k, l)).sum();
            let expected = (2 * k + 1) as f64 * legendre_p(k, dot);
            assert!((sum - expected).abs() < 1e-8, "k={k}: {sum} vs {expected}");
        }
    }

    #[test]
    fn pole_gradient_matches_near_pole() {
        // the pole branch agrees with the generic branch just off the pole
        let r = 4;
        let dim = (r + 1) * (r + 1);
        let mut w = vec![0.0; dim];
        for (i, wi) in w.iter_mut().enumerate() {
            *wi = 0.1 + 0.05 * i as f64;
        }
        let eps: f64 = 1e-6;
        let off_pole = [eps, 0.5 * eps, (1.0 - 1.25 * eps * eps).sqrt()];
        let t1 = SphereTables::compute(&off_pole, r, true);
        let g1 = t1.weighted_gradient(&w);
        let pole = [0.0, 0.0, 1.0];
        let t2 = SphereTables::compute(&pole, r, true);
        let g2 = t2.weighted_gradient(&w);
        for c in 0..3 {
            assert!((g1[c] - g2[c]).abs() < 1e-4, "{g1:?} vs {g2:?}");
        }
    }
}
