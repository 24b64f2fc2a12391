//! Exponential basis e^{2 pi i <k, x>} on the flat torus, |k|_inf <= degree,
//! enumerated lexicographically with coordinates running from -degree to
//! degree.

use num_complex::Complex64;

/// Per-point tables e^{2 pi i m x_c} for m = -degree..=degree per coordinate.
pub struct TorusTables {
    pub degree: usize,
    dim: usize,
    /// tables[c][m + degree]
    tables: Vec<Vec<Complex64>>,
}

impl TorusTables {
    pub fn compute(x: &[f64], degree: usize) -> TorusTables {
        let dim = x.len();
        let mut tables = Vec::with_capacity(dim);
        for &xc in x {
            let mut t = vec![Complex64::new(0.0, 0.0); 2 * degree + 1];
            let base = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * xc);
            t[degree] = Complex64::new(1.0, 0.0);
            for m in 1..=degree {
                let next = t[degree + m - 1] * base;
                t[degree + m] = next;
                t[degree - m] = next.conj();
            }
            tables.push(t);
        }
        TorusTables { degree, dim, tables }
    }

    #[inline]
    pub fn factor(&self, coord: usize, k: i64) -> Complex64 {
        self.tables[coord][(k + self.degree as i64) as usize]
    }

    /// e^{2 pi i <k, x>} for a full multi-index.
    pub fn value(&self, k: &[i64]) -> Complex64 {
        let mut v = Complex64::new(1.0, 0.0);
        for (c, &kc) in k.iter().enumerate() {
            v *= self.factor(c, kc);
        }
        v
    }

    /// Write all values in lexicographic multi-index order into `out`.
    pub fn values_into(&self, out: &mut [Complex64]) {
        let n = 2 * self.degree + 1;
        debug_assert_eq!(out.len(), n.pow(self.dim as u32));
        match self.dim {
            1 => out.copy_from_slice(&self.tables[0]),
            2 => {
                let mut i = 0;
                for a in &self.tables[0] {
                    for b in &self.tables[1] {
                        out[i] = a * b;
                        i += 1;
                    }
                }
            }
            3 => {
                let mut i = 0;
                for a in &self.tables[0] {
                    for b in &self.tables[1] {
                        let ab = a * b;
                        for c in &self.tables[2] {
                            out[i] = ab * c;
                            i += 1;
                        }
                    }
                }
            }
            _ => {
                let mut idx = vec![0usize; self.dim];
                for slot in out.iter_mut() {
                    let mut v = Complex64::new(1.0, 0.0);
                    for (c, &m) in idx.iter().enumerate() {
                        v *= self.tables[c][m];
                    }
                    *slot = v;
                    for c in (0..self.dim).rev() {
                        idx[c] += 1;
                        if idx[c] < n {
                            break;
                        }
                        idx[c] = 0;
                    }
                }
            }
        }
    }

    /// Real part of sum_k w_k * grad(phi_k), where grad(phi_k) has component
    /// c equal to 2 pi i k_c phi_k. Returns the real tangent components.
    pub fn weighted_gradient(&self, w: &[Complex64]) -> Vec<f64> {
        let n = 2 * self.degree + 1;
        debug_assert_eq!(w.len(), n.pow(self.dim as u32));
        let two_pi = 2.0 * std::f64::consts::PI;
        let r = self.degree as i64;
        let mut acc = vec![Complex64::new(0.0, 0.0); self.dim];
        match self.dim {
            2 => {
                let mut i = 0;
                for (ia, a) in self.tables[0].iter().enumerate() {
                    let k0 = ia as i64 - r;
                    let mut s_b = Complex64::new(0.0, 0.0);
                    let mut s_kb = Complex64::new(0.0, 0.0);
                    for (ib, b) in self.tables[1].iter().enumerate() {
                        let k1 = ib as i64 - r;
                        let p = w[i] * b;
                        i += 1;
                        s_b += p;
                        s_kb += p * k1 as f64;
                    }
                    acc[0] += a * s_b * k0 as f64;
                    acc[1] += a * s_kb;
                }
            }
            _ => {
                let mut idx = vec![0usize; self.dim];
                for &wk in w.iter() {
                    let mut v = Complex64::new(1.0, 0.0);
                    for (c, &m) in idx.iter().enumerate() {
                        v *= self.tables[c][m];
                    }
                    let p = wk * v;
                    for (c, &m) in idx.iter().enumerate() {
                        acc[c] += p * (m as i64 - r) as f64;
                    }
                    for c in (0..self.dim).rev() {
                        idx[c] += 1;
                        if idx[c] < n {
                            break;
                        }
                        idx[c] = 0;
                    }
                }
            }
        }
        // Re(2 pi i z) = -2 pi Im(z)
        acc.iter().map(|z| -two_pi * z.im).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_modulus_and_example() {
        let t = TorusTables::compute(&[0.25, 0.7], 2);
        let v = t.value(&[1, 0]);
        assert!((v - Complex64::new(0.0, 1.0)).norm() < 1e-14);
        for k0 in -2..=2 {
            for k1 in -2..=2 {
                assert!((t.value(&[k0, k1]).norm() - 1.0).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn values_match_direct() {
        let x = [0.13, 0.82, 0.4];
        let t = TorusTables::compute(&x, 2);
        let mut out = vec![Complex64::new(0.0, 0.0); 125];
        t.values_into(&mut out);
        let mut i = 0;
        for k0 in -2i64..=2 {
            for k1 in -2i64..=2 {
                for k2 in -2i64..=2 {
                    let phase = 2.0
                        * std::f64::consts::PI
                        * (k0 as f64 * x[0] + k1 as f64 * x[1] + k2 as f64 * x[2]);
                    let direct = Complex64::from_polar(1.0, phase);
                    assert!((out[i] - direct).norm() < 1e-12);
                    i += 1;
                }
            }
        }
    }
}
