//! Target measures represented by Fourier coefficients with respect to the
//! Laplace-Beltrami eigenfunctions: mu_hat_k = integral of conj(phi_k) d mu.
//!
//! Every constructor normalizes the zero-frequency coefficient to exactly 1.

use crate::curve::DiscreteCurve;
use crate::error::{Error, Result};
use crate::manifold::{wrap_diff, ManifoldId, Point};
use crate::spectral::{enumerate_frequencies, legendre_p, Basis, FrequencyIndex};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// A measure given by its Fourier coefficients on the degree-r frequency set.
#[derive(Debug, Clone)]
pub struct SpectralMeasure {
    pub manifold: ManifoldId,
    pub degree: u32,
    /// aligned with `enumerate_frequencies(manifold, degree)`
    pub coefficients: Vec<Complex64>,
}

impl SpectralMeasure {
    fn from_raw(
        manifold: ManifoldId,
        degree: u32,
        coefficients: Vec<Complex64>,
    ) -> SpectralMeasure {
        debug_assert_eq!(
            coefficients.len(),
            enumerate_frequencies(manifold, degree).len()
        );
        SpectralMeasure {
            manifold,
            degree,
            coefficients,
        }
    }

    /// Position of the zero frequency in the enumeration.
    pub fn zero_position(manifold: ManifoldId, degree: u32) -> usize {
        match manifold {
            ManifoldId::Torus(d) => {
                let n = (2 * degree + 1) as usize;
                let mut pos = 0;
                for _ in 0..d {
                    pos = pos * n + degree as usize;
                }
                pos
            }
            _ => 0,
        }
    }

    pub fn coefficient(&self, idx: &FrequencyIndex) -> Option<Complex64> {
        let basis = Basis::new(self.manifold, self.degree);
        basis.position(idx).map(|p| self.coefficients[p])
    }

    /// Restrict or zero-extend to another degree.
    pub fn with_degree(&self, degree: u32) -> SpectralMeasure {
        if degree == self.degree {
            return self.clone();
        }
        let src = Basis::new(self.manifold, self.degree);
        let dst = enumerate_frequencies(self.manifold, degree);
        let mut coefficients = vec![Complex64::new(0.0, 0.0); dst.len()];
        for (slot, idx) in coefficients.iter_mut().zip(dst.iter()) {
            if let Some(p) = src.position(idx) {
                *slot = self.coefficients[p];
            }
        }
        SpectralMeasure::from_raw(self.manifold, degree, coefficients)
    }

    /// Largest coefficient magnitude violation of the sup-norm bound of the
    /// corresponding eigenfunction (0 when all coefficients are admissible).
    pub fn bound_violation(&self) -> f64 {
        let idxs = enumerate_frequencies(self.manifold, self.degree);
        let mut worst = 0.0f64;
        for (c, idx) in self.coefficients.iter().zip(&idxs) {
            let bound = eigenfunction_sup_bound(idx);
            worst = worst.max(c.norm() - bound);
        }
        worst.max(0.0)
    }
}

/// Sup-norm bound of one eigenfunction.
fn eigenfunction_sup_bound(idx: &FrequencyIndex) -> f64 {
    match idx {
        FrequencyIndex::Torus(_) => 1.0,
        FrequencyIndex::Sphere { degree, .. } => ((2 * degree + 1) as f64).sqrt() * (1.0 + 1e-12),
        FrequencyIndex::So3 { degree, .. } => ((2 * degree + 1) as f64).sqrt() * (1.0 + 1e-12),
        FrequencyIndex::Grass { l1, l2, .. } => {
            let j = (l1 + l2) as f64;
            let jp = (l1 - l2) as f64;
            ((2.0 * j + 1.0) * (2.0 * jp + 1.0)).sqrt() * 2.0 * (1.0 + 1e-12)
        }
    }
}

/// The normalized Riemannian (uniform) measure: delta at the zero frequency.
pub fn uniform_measure(m: ManifoldId, r: u32) -> SpectralMeasure {
    let n = enumerate_frequencies(m, r).len();
    let mut c = vec![Complex64::new(0.0, 0.0); n];
    c[SpectralMeasure::zero_position(m, r)] = Complex64::new(1.0, 0.0);
    SpectralMeasure::from_raw(m, r, c)
}

/// Measure of a pixel grid on T^2: pixel (i, j) carries mass `pixels[i][j]`
/// at x = (j/W, i/H); coefficients are the DFT truncated to |k|_inf <= r,
/// normalized so the zero coefficient is 1.
pub fn from_torus_image(pixels: &[Vec<f64>], r: u32) -> Result<SpectralMeasure> {
    let h = pixels.len();
    if h == 0 || pixels[0].is_empty() {
        return Err(Error::DegenerateInput("empty image".into()));
    }
    let w = pixels[0].len();
    if pixels.iter().any(|row| row.len() != w) {
        return Err(Error::DegenerateInput("ragged image".into()));
    }
    if pixels.iter().flatten().any(|&p| p < 0.0) {
        return Err(Error::DegenerateInput("negative pixel mass".into()));
    }
    let total: f64 = pixels.iter().flatten().sum();
    if total <= 0.0 {
        return Err(Error::DegenerateInput("all-zero image".into()));
    }
    if 2 * r as usize >= h.min(w) {
        return Err(Error::DegenerateInput(format!(
            "degree {r} aliases on a {h}x{w} grid"
        )));
    }
    // 1-D factor tables e^{-2 pi i k t/n} per axis, then separable sums
    let m = ManifoldId::Torus(2);
    let idxs = enumerate_frequencies(m, r);
    let mut coefficients = vec![Complex64::new(0.0, 0.0); idxs.len()];
    let col_phase = dft_phase_table(w, r);
    let row_phase = dft_phase_table(h, r);
    // row-combined partial sums: for each k2 (row frequency), sum over rows of
    // phase * (row DFT over columns)
    let n = (2 * r + 1) as usize;
    let mut partial = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for (i, row) in pixels.iter().enumerate() {
        let mut row_dft = vec![Complex64::new(0.0, 0.0); n];
        for (j, &p) in row.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            for (a, slot) in row_dft.iter_mut().enumerate() {
                *slot += p * col_phase[a][j];
            }
        }
        for (b, prow) in partial.iter_mut().enumerate() {
            let ph = row_phase[b][i];
            for (a, slot) in prow.iter_mut().enumerate() {
                *slot += ph * row_dft[a];
            }
        }
    }
    for (slot, idx) in coefficients.iter_mut().zip(&idxs) {
        if let FrequencyIndex::Torus(k) = idx {
            // k = (k1, k2) with x = (j/W, i/H): k1 pairs with columns
            let a = (k[0] + r as i64) as usize;
            let b = (k[1] + r as i64) as usize;
            *slot = partial[b][a] / total;
        }
    }
    Ok(SpectralMeasure::from_raw(m, r, coefficients))
}

/// Table of e^{-2 pi i k t/n} for k = -r..=r (index k+r) and t = 0..n.
/// Rows for -k are exact conjugates of rows for k, so real inputs give
/// exactly conjugate-symmetric transforms.
fn dft_phase_table(n: usize, r: u32) -> Vec<Vec<Complex64>> {
    let r = r as usize;
    let mut out = vec![Vec::new(); 2 * r + 1];
    for k in 0..=r {
        let mut row = Vec::with_capacity(n);
        for t in 0..n {
            let angle = -2.0 * std::f64::consts::PI * k as f64 * t as f64 / n as f64;
            row.push(Complex64::from_polar(1.0, angle));
        }
        out[r - k] = row.iter().map(|c| c.conj()).collect();
        out[r + k] = row;
    }
    out
}

/// Measure of a latitude-longitude sample grid on S^2 (180 rows, 360
/// columns): discretized Fourier integrals with sin-latitude weights,
/// normalized so the zero coefficient is 1.
pub fn from_sphere_grid(samples: &[Vec<f64>], r: u32) -> Result<SpectralMeasure> {
    if samples.len() != 180 || samples.iter().any(|row| row.len() != 360) {
        return Err(Error::DegenerateInput("sphere grid must be 180x360".into()));
    }
    if r > 180 {
        return Err(Error::DegenerateInput("degree above grid resolution".into()));
    }
    if samples.iter().flatten().any(|&p| p < 0.0) {
        return Err(Error::DegenerateInput("negative sample".into()));
    }
    if samples.iter().flatten().sum::<f64>() <= 0.0 {
        return Err(Error::DegenerateInput("all-zero grid".into()));
    }
    let m = ManifoldId::Sphere2;
    let basis = Basis::new(m, r);
    let mut acc = vec![Complex64::new(0.0, 0.0); basis.len()];
    let mut vals = vec![Complex64::new(0.0, 0.0); basis.len()];
    let deg = std::f64::consts::PI / 180.0;
    for (i, row) in samples.iter().enumerate() {
        let theta = (i + 1) as f64 * deg;
        let (st, ct) = theta.sin_cos();
        if st == 0.0 {
            continue;
        }
        for (j, &rho) in row.iter().enumerate() {
            if rho == 0.0 {
                continue;
            }
            let phi = (j + 1) as f64 * deg;
            let x = Point::Sphere2([st * phi.sin(), st * phi.cos(), ct]);
            basis.eval(&x, &mut vals)?;
            let wgt = rho * st;
            for (a, v) in acc.iter_mut().zip(&vals) {
                *a += wgt * v.conj();
            }
        }
    }
    let zero = acc[0];
    if zero.norm() <= 0.0 {
        return Err(Error::DegenerateInput("grid has zero total mass".into()));
    }
    let coefficients: Vec<Complex64> = acc.iter().map(|a| a / zero).collect();
    Ok(SpectralMeasure::from_raw(m, r, coefficients))
}

/// Mixture of wrapped Gaussian bumps exp(-sharpness * wrapped_dist^2) at the
/// given centers in [-1/2, 1/2)^d, sampled on a grid_n^d lattice and
/// transformed; truncated to |k|_inf <= r with the zero coefficient
/// normalized to 1.
pub fn gaussian_mixture_torus(
    centers: &[Vec<f64>],
    sharpness: f64,
    grid_n: usize,
    r: u32,
) -> Result<SpectralMeasure> {
    if centers.is_empty() {
        return Err(Error::DegenerateInput("no mixture centers".into()));
    }
    let d = centers[0].len();
    if centers.iter().any(|c| c.len() != d) {
        return Err(Error::DegenerateInput("ragged center list".into()));
    }
    if grid_n < 2 * r as usize + 2 {
        return Err(Error::DegenerateInput(format!(
            "grid {grid_n} too coarse for degree {r}"
        )));
    }
    let m = ManifoldId::Torus(d);
    let idxs = enumerate_frequencies(m, r);
    // separable per center: 1-D transforms of the wrapped Gaussian factor
    let n = (2 * r + 1) as usize;
    let mut coefficients = vec![Complex64::new(0.0, 0.0); idxs.len()];
    for center in centers {
        // per coordinate: T_c[k] = sum_m exp(-s wrap(m/grid - p_c)^2) e^{-2 pi i k m/grid}
        let mut transforms: Vec<Vec<Complex64>> = Vec::with_capacity(d);
        for &pc in center {
            let mut t = vec![Complex64::new(0.0, 0.0); n];
            for mm in 0..grid_n {
                let x = mm as f64 / grid_n as f64;
                let w = wrap_diff(x - pc);
                let g = (-sharpness * w * w).exp();
                if g < 1e-300 {
                    continue;
                }
                for (a, slot) in t.iter_mut().enumerate() {
                    let k = a as i64 - r as i64;
                    let angle = -2.0 * std::f64::consts::PI * k as f64 * x;
                    *slot += g * Complex64::from_polar(1.0, angle);
                }
            }
            transforms.push(t);
        }
        for (slot, idx) in coefficients.iter_mut().zip(&idxs) {
            if let FrequencyIndex::Torus(k) = idx {
                let mut v = Complex64::new(1.0, 0.0);
                for (c, &kc) in k.iter().enumerate() {
                    v *= transforms[c][(kc + r as i64) as usize];
                }
                *slot += v;
            }
        }
    }
    let zero = coefficients[SpectralMeasure::zero_position(m, r)];
    if zero.norm() <= 0.0 {
        return Err(Error::DegenerateInput("mixture has zero mass on the grid".into()));
    }
    let coefficients = coefficients.iter().map(|c| c / zero).collect();
    Ok(SpectralMeasure::from_raw(m, r, coefficients))
}

/// Restriction of the Haar measure of SO(3) to the solid band of rotations
/// with middle Euler angle at most pi/2: only the (k, 0, 0) coefficients are
/// nonzero, with values P_{k-1}(0) - P_{k+1}(0) and the k = 0 coefficient
/// fixed to 1.
pub fn so3_band_measure(r: u32) -> SpectralMeasure {
    let m = ManifoldId::So3;
    let basis = Basis::new(m, r);
    let mut coefficients = vec![Complex64::new(0.0, 0.0); basis.len()];
    for k in 0..=r {
        let pos = basis
            .position(&FrequencyIndex::So3 {
                degree: k,
                row: 0,
                col: 0,
            })
            .expect("zonal index in range");
        let v = if k == 0 {
            1.0
        } else {
            legendre_p((k - 1) as usize, 0.0) - legendre_p((k + 1) as usize, 0.0)
        };
        coefficients[pos] = Complex64::new(v, 0.0);
    }
    SpectralMeasure::from_raw(m, r, coefficients)
}

/// Coefficients of the empirical measure of the curve points:
/// nu_hat_k = (1/N) sum_i conj(phi_k(x_i)).
pub fn empirical_coefficients(curve: &DiscreteCurve, r: u32) -> Result<SpectralMeasure> {
    let basis = Basis::new(curve.manifold(), r);
    let coefficients = empirical_with_basis(&basis, curve.points())?;
    Ok(SpectralMeasure::from_raw(curve.manifold(), r, coefficients))
}

/// Shared accumulation path for the empirical coefficients; deterministic
/// block order regardless of parallel scheduling.
pub fn empirical_with_basis(basis: &Basis, points: &[Point]) -> Result<Vec<Complex64>> {
    use rayon::prelude::*;
    const BLOCK: usize = 64;
    let blocks: Vec<Vec<Complex64>> = points
        .par_chunks(BLOCK)
        .map(|chunk| {
            let mut acc = vec![Complex64::new(0.0, 0.0); basis.len()];
            let mut vals = vec![Complex64::new(0.0, 0.0); basis.len()];
            for p in chunk {
                basis.eval(p, &mut vals)?;
                for (a, v) in acc.iter_mut().zip(&vals) {
                    *a += v.conj();
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut total = vec![Complex64::new(0.0, 0.0); basis.len()];
    for block in blocks {
        for (t, b) in total.iter_mut().zip(&block) {
            *t += b;
        }
    }
    let n = points.len() as f64;
    for t in total.iter_mut() {
        *t /= n;
    }
    Ok(total)
}

/// Line-integral coefficients of the closed piecewise-geodesic curve through
/// the given points with arclength-proportional parametrization. Torus
/// segments use closed-form integrals of exponentials; curved manifolds use
/// per-segment Gauss-Legendre with 4r+4 nodes.
pub fn curve_line_coefficients(curve: &DiscreteCurve, r: u32) -> Result<SpectralMeasure> {
    let seg = curve.segment_lengths()?;
    if seg.iter().any(|&s| s <= 0.0) {
        return Err(Error::DegenerateInput(
            "repeated consecutive points on the curve".into(),
        ));
    }
    let total: f64 = seg.iter().sum();
    let m = curve.manifold();
    let basis = Basis::new(m, r);
    let n = curve.len();
    let mut acc = vec![Complex64::new(0.0, 0.0); basis.len()];
    match m {
        ManifoldId::Torus(_) => {
            let idxs = basis.indices();
            for i in 0..n {
                let a = &curve.points()[(i + n - 1) % n];
                let b = &curve.points()[i];
                let (pa, pb) = match (a, b) {
                    (Point::Torus(pa), Point::Torus(pb)) => (pa, pb),
                    _ => unreachable!(),
                };
                let diff: Vec<f64> = pa
                    .iter()
                    .zip(pb)
                    .map(|(x, y)| wrap_diff(y - x))
                    .collect();
                let share = seg[i] / total;
                for (slot, idx) in acc.iter_mut().zip(idxs) {
                    if let FrequencyIndex::Torus(k) = idx {
                        // mean over the segment of e^{-2 pi i <k, x(t)>}
                        let phase0: f64 = k
                            .iter()
                            .zip(pa)
                            .map(|(&kc, &xc)| kc as f64 * xc)
                            .sum();
                        let dphase: f64 = k
                            .iter()
                            .zip(&diff)
                            .map(|(&kc, &dc)| kc as f64 * dc)
                            .sum();
                        let tp = -2.0 * std::f64::consts::PI;
                        let start = Complex64::from_polar(1.0, tp * phase0);
                        let mean = if dphase.abs() < 1e-14 {
                            start
                        } else {
                            let full = Complex64::from_polar(1.0, tp * dphase);
                            start * (full - 1.0) / Complex64::new(0.0, tp * dphase)
                        };
                        *slot += share * mean;
                    }
                }
            }
        }
        _ => {
            let nodes = 4 * r as usize + 4;
            let (gl_x, gl_w) = crate::spectral::gauss_legendre(nodes);
            let mut vals = vec![Complex64::new(0.0, 0.0); basis.len()];
            for i in 0..n {
                let a = &curve.points()[(i + n - 1) % n];
                let b = &curve.points()[i];
                let v = crate::manifold::log_map(a, b)?;
                let share = seg[i] / total;
                for (x, w) in gl_x.iter().zip(&gl_w) {
                    let t = 0.5 * (x + 1.0);
                    let p = crate::manifold::geodesic_with_velocity(a, &v, t)?.0;
                    basis.eval(&p, &mut vals)?;
                    let wgt = share * w * 0.5;
                    for (slot, val) in acc.iter_mut().zip(&vals) {
                        *slot += wgt * val.conj();
                    }
                }
            }
        }
    }
    Ok(SpectralMeasure::from_raw(m, r, acc))
}

// ---------------------------------------------------------------------------
// Serialization (measure files)
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct MeasureFile {
    manifold: String,
    degree: u32,
    /// (index tuple, re, im); omitted entries are zero
    entries: Vec<(Vec<i64>, f64, f64)>,
}

impl SpectralMeasure {
    pub fn to_json(&self) -> String {
        let idxs = enumerate_frequencies(self.manifold, self.degree);
        let entries: Vec<(Vec<i64>, f64, f64)> = idxs
            .iter()
            .zip(&self.coefficients)
            .filter(|(_, c)| c.re != 0.0 || c.im != 0.0)
            .map(|(idx, c)| (idx.tuple(), c.re, c.im))
            .collect();
        serde_json::to_string_pretty(&MeasureFile {
            manifold: self.manifold.tag(),
            degree: self.degree,
            entries,
        })
        .expect("measure serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<SpectralMeasure> {
        let file: MeasureFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let manifold = ManifoldId::from_tag(&file.manifold)?;
        let basis = Basis::new(manifold, file.degree);
        let mut coefficients = vec![Complex64::new(0.0, 0.0); basis.len()];
        for (tuple, re, im) in &file.entries {
            let idx = FrequencyIndex::from_tuple(manifold, tuple)?;
            let pos = basis
                .position(&idx)
                .ok_or_else(|| Error::InvalidIndex(format!("{tuple:?} out of range")))?;
            coefficients[pos] = Complex64::new(*re, *im);
        }
        Ok(SpectralMeasure::from_raw(manifold, file.degree, coefficients))
    }
}
