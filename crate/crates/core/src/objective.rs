//! The minimization target: truncated squared kernel discrepancy between a
//! target measure and the empirical measure of the curve points, plus a
//! squared-hinge speed penalty, with Riemannian gradients and
//! finite-difference Hessian-vector products.

use crate::curve::DiscreteCurve;
use crate::error::{Error, Result};
use crate::manifold::{
    geodesic_with_velocity, inner, log_map, parallel_transport, TangentVector,
};
use crate::measure::{empirical_with_basis, SpectralMeasure};
use crate::spectral::{Basis, KernelWeights};
use num_complex::Complex64;

/// Configuration of one objective instance.
pub struct ObjectiveConfig {
    pub target: SpectralMeasure,
    pub kernel: KernelWeights,
    /// speed limit L
    pub speed_limit: f64,
    /// penalty weight lambda
    pub penalty_weight: f64,
    /// step h of the Hessian finite difference
    pub fd_step: f64,
    basis: Basis,
}

impl ObjectiveConfig {
    pub fn new(
        target: SpectralMeasure,
        kernel: KernelWeights,
        speed_limit: f64,
        penalty_weight: f64,
    ) -> Result<ObjectiveConfig> {
        Self::with_fd_step(target, kernel, speed_limit, penalty_weight, 1e-8)
    }

    pub fn with_fd_step(
        target: SpectralMeasure,
        kernel: KernelWeights,
        speed_limit: f64,
        penalty_weight: f64,
        fd_step: f64,
    ) -> Result<ObjectiveConfig> {
        if kernel.manifold != target.manifold {
            return Err(Error::ManifoldMismatch(
                kernel.manifold.tag(),
                target.manifold.tag(),
            ));
        }
        if kernel.degree != target.degree {
            return Err(Error::DegreeMismatch(kernel.degree, target.degree));
        }
        if !(speed_limit > 0.0) {
            return Err(Error::InvalidConfig("speed limit must be positive".into()));
        }
        if !(penalty_weight >= 0.0) {
            return Err(Error::InvalidConfig("penalty weight must be nonnegative".into()));
        }
        if !(fd_step > 0.0 && fd_step <= 1e-4) {
            return Err(Error::InvalidConfig(
                "finite-difference step must lie in (0, 1e-4]".into(),
            ));
        }
        let basis = Basis::new(target.manifold, target.degree);
        Ok(ObjectiveConfig {
            target,
            kernel,
            speed_limit,
            penalty_weight,
            fd_step,
            basis,
        })
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    /// Truncated squared discrepancy sum alpha_k |mu_hat_k - nu_hat_k|^2.
    pub fn discrepancy_sq(&self, nu: &SpectralMeasure) -> Result<f64> {
        if nu.manifold != self.target.manifold {
            return Err(Error::ManifoldMismatch(
                self.target.manifold.tag(),
                nu.manifold.tag(),
            ));
        }
        if nu.degree != self.target.degree {
            return Err(Error::DegreeMismatch(self.target.degree, nu.degree));
        }
        let mut sum = 0.0;
        for ((mu, nu), alpha) in self
            .target
            .coefficients
            .iter()
            .zip(&nu.coefficients)
            .zip(&self.kernel.weights)
        {
            sum += alpha * (mu - nu).norm_sqr();
        }
        Ok(sum)
    }

    /// Squared-hinge speed penalty (lambda/N) sum (N d_i - L)_+^2.
    pub fn penalty(&self, curve: &DiscreteCurve) -> Result<f64> {
        if self.penalty_weight == 0.0 {
            return Ok(0.0);
        }
        let n = curve.len() as f64;
        let mut sum = 0.0;
        for d in curve.segment_lengths()? {
            let excess = (n * d - self.speed_limit).max(0.0);
            sum += excess * excess;
        }
        Ok(self.penalty_weight / n * sum)
    }

    /// Full objective: data term plus penalty.
    pub fn objective(&self, curve: &DiscreteCurve) -> Result<f64> {
        let nu = self.empirical(curve)?;
        Ok(self.discrepancy_sq(&nu)? + self.penalty(curve)?)
    }

    fn empirical(&self, curve: &DiscreteCurve) -> Result<SpectralMeasure> {
        if curve.manifold() != self.target.manifold {
            return Err(Error::ManifoldMismatch(
                self.target.manifold.tag(),
                curve.manifold().tag(),
            ));
        }
        let coefficients = empirical_with_basis(&self.basis, curve.points())?;
        Ok(SpectralMeasure {
            manifold: curve.manifold(),
            degree: self.target.degree,
            coefficients,
        })
    }

    /// Riemannian gradient, one tangent vector per curve point.
    pub fn gradient(&self, curve: &DiscreteCurve) -> Result<Vec<TangentVector>> {
        use rayon::prelude::*;
        let n = curve.len();
        let nu = self.empirical(curve)?;
        // shared complex weights alpha_k (nu_hat_k - mu_hat_k); the data
        // gradient at x_i is (2/N) Re sum_k w_k grad(phi_k)(x_i)
        let w: Vec<Complex64> = self
            .target
            .coefficients
            .iter()
            .zip(&nu.coefficients)
            .zip(&self.kernel.weights)
            .map(|((mu, nuc), &alpha)| alpha * (nuc - mu))
            .collect();

        let seg = curve.segment_lengths()?;
        let lambda = self.penalty_weight;
        if lambda > 0.0 && seg.iter().any(|&d| d == 0.0) {
            return Err(Error::NonsmoothPoint(
                "coincident consecutive points with an active penalty".into(),
            ));
        }
        let nf = n as f64;
        let points = curve.points();
        let grads: Vec<Result<TangentVector>> = points
            .par_iter()
            .enumerate()
            .map(|(i, x)| {
                let mut g = self
                    .basis
                    .weighted_gradient_sum(x, &w)?
                    .scale(2.0 / nf);
                if lambda > 0.0 {
                    // segments (i-1 -> i) and (i -> i+1)
                    let d_in = seg[i];
                    let h_in = (nf * d_in - self.speed_limit).max(0.0);
                    if h_in > 0.0 {
                        let prev = &points[(i + n - 1) % n];
                        let l = log_map(x, prev)?;
                        g = g.add(&l.scale(-2.0 * lambda * h_in / d_in));
                    }
                    let d_out = seg[(i + 1) % n];
                    let h_out = (nf * d_out - self.speed_limit).max(0.0);
                    if h_out > 0.0 {
                        let next = &points[(i + 1) % n];
                        let l = log_map(x, next)?;
                        g = g.add(&l.scale(-2.0 * lambda * h_out / d_out));
                    }
                }
                Ok(g)
            })
            .collect();
        grads.into_iter().collect()
    }

    /// Hessian-vector product by a one-sided geodesic finite difference,
    /// with the stepped gradient transported back to the base points.
    pub fn hessian_vec(
        &self,
        curve: &DiscreteCurve,
        dir: &[TangentVector],
    ) -> Result<Vec<TangentVector>> {
        let base = self.gradient(curve)?;
        self.hessian_vec_with_gradient(curve, &base, dir)
    }

    pub fn hessian_vec_with_gradient(
        &self,
        curve: &DiscreteCurve,
        base_gradient: &[TangentVector],
        dir: &[TangentVector],
    ) -> Result<Vec<TangentVector>> {
        fd_hessian_vec(self, curve, base_gradient, dir, self.fd_step)
    }
}

/// Objective oracle used by the optimizer.
pub trait CurveObjective: Sync {
    fn value(&self, curve: &DiscreteCurve) -> Result<f64>;
    fn gradient(&self, curve: &DiscreteCurve) -> Result<Vec<TangentVector>>;
    fn hessian_vec_with_gradient(
        &self,
        curve: &DiscreteCurve,
        base_gradient: &[TangentVector],
        dir: &[TangentVector],
    ) -> Result<Vec<TangentVector>>;
}

impl CurveObjective for ObjectiveConfig {
    fn value(&self, curve: &DiscreteCurve) -> Result<f64> {
        self.objective(curve)
    }

    fn gradient(&self, curve: &DiscreteCurve) -> Result<Vec<TangentVector>> {
        ObjectiveConfig::gradient(self, curve)
    }

    fn hessian_vec_with_gradient(
        &self,
        curve: &DiscreteCurve,
        base_gradient: &[TangentVector],
        dir: &[TangentVector],
    ) -> Result<Vec<TangentVector>> {
        ObjectiveConfig::hessian_vec_with_gradient(self, curve, base_gradient, dir)
    }
}

/// H F(x) d ~ (|d|/h) (T_back grad F(exp_x(h d/|d|)) - grad F(x)).
pub fn fd_hessian_vec<O: CurveObjective + ?Sized>(
    objective: &O,
    curve: &DiscreteCurve,
    base_gradient: &[TangentVector],
    dir: &[TangentVector],
    h: f64,
) -> Result<Vec<TangentVector>> {
    let norm = bundle_norm(dir);
    if norm == 0.0 {
        return Err(Error::DegenerateInput(
            "zero direction in Hessian finite difference".into(),
        ));
    }
    let scale = 1.0 / norm;
    let mut stepped_points = Vec::with_capacity(curve.len());
    let mut velocities = Vec::with_capacity(curve.len());
    for (x, d) in curve.points().iter().zip(dir) {
        let (y, vel) = geodesic_with_velocity(x, &d.scale(scale), h)?;
        stepped_points.push(y);
        velocities.push(vel);
    }
    let stepped = DiscreteCurve::new(curve.manifold(), stepped_points)?;
    let stepped_grad = objective.gradient(&stepped)?;
    let mut out = Vec::with_capacity(curve.len());
    for ((g_y, vel), g_x) in stepped_grad.iter().zip(&velocities).zip(base_gradient) {
        // transport back along the reversed geodesic
        let back = parallel_transport(&g_y.base, &vel.scale(-h), g_y)?;
        out.push(back.add(&g_x.scale(-1.0)).scale(norm / h));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Product-manifold tangent bundle helpers
// ---------------------------------------------------------------------------

pub fn bundle_inner(a: &[TangentVector], b: &[TangentVector]) -> f64 {
    a.iter().zip(b).map(|(x, y)| inner(x, y)).sum()
}

pub fn bundle_norm(a: &[TangentVector]) -> f64 {
    bundle_inner(a, a).sqrt()
}

pub fn bundle_scale(a: &[TangentVector], s: f64) -> Vec<TangentVector> {
    a.iter().map(|t| t.scale(s)).collect()
}

/// Move every point along its tangent direction: exp_{x_i}(t d_i).
pub fn step_curve(curve: &DiscreteCurve, dir: &[TangentVector], t: f64) -> Result<DiscreteCurve> {
    let mut pts = Vec::with_capacity(curve.len());
    for (x, d) in curve.points().iter().zip(dir) {
        pts.push(geodesic_with_velocity(x, d, t)?.0);
    }
    DiscreteCurve::new(curve.manifold(), pts)
}

/// Endpoint velocities of the per-point geodesics, i.e. the search direction
/// transported to the stepped curve.
pub fn step_velocities(
    curve: &DiscreteCurve,
    dir: &[TangentVector],
    t: f64,
) -> Result<Vec<TangentVector>> {
    let mut vels = Vec::with_capacity(curve.len());
    for (x, d) in curve.points().iter().zip(dir) {
        vels.push(geodesic_with_velocity(x, d, t)?.1);
    }
    Ok(vels)
}

/// Largest deviation of any curve point from its manifold constraints.
pub fn curve_constraint_deviation(curve: &DiscreteCurve) -> f64 {
    curve
        .points()
        .iter()
        .map(|p| p.constraint_deviation())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{random_point, random_tangent, ManifoldId, Point};
    use crate::measure::{empirical_coefficients, uniform_measure};
    use crate::spectral::kernel_weights;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn uniform_cfg(m: ManifoldId, r: u32, l: f64, lambda: f64) -> ObjectiveConfig {
        ObjectiveConfig::new(uniform_measure(m, r), kernel_weights(m, r), l, lambda).unwrap()
    }

    fn random_curve<R: rand::Rng>(m: ManifoldId, n: usize, rng: &mut R) -> DiscreteCurve {
        DiscreteCurve::new(m, (0..n).map(|_| random_point(m, rng)).collect()).unwrap()
    }

    #[test]
    fn config_validation() {
        let m = ManifoldId::Torus(2);
        assert!(ObjectiveConfig::new(
            uniform_measure(m, 2),
            kernel_weights(m, 3),
            1.0,
            0.0
        )
        .is_err());
        assert!(ObjectiveConfig::new(
            uniform_measure(m, 2),
            kernel_weights(ManifoldId::Sphere2, 2),
            1.0,
            0.0
        )
        .is_err());
        assert!(ObjectiveConfig::with_fd_step(
            uniform_measure(m, 2),
            kernel_weights(m, 2),
            1.0,
            0.0,
            1e-3
        )
        .is_err());
    }

    #[test]
    fn discrepancy_zero_on_equal_coefficients() {
        let cfg = uniform_cfg(ManifoldId::Sphere2, 3, 1.0, 0.0);
        let d = cfg.discrepancy_sq(&uniform_measure(ManifoldId::Sphere2, 3)).unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn discrepancy_single_torus_point() {
        // sum over 0 < |k|_inf <= 1 of (1+|k|^2)^{-3/2}: 4 axis + 4 diagonal
        let cfg = uniform_cfg(ManifoldId::Torus(2), 1, 1.0, 0.0);
        let expected = 4.0 * 2.0_f64.powf(-1.5) + 4.0 * 3.0_f64.powf(-1.5);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..5 {
            let c = random_curve(ManifoldId::Torus(2), 1, &mut rng);
            let nu = empirical_coefficients(&c, 1).unwrap();
            let d = cfg.discrepancy_sq(&nu).unwrap();
            assert!((d - expected).abs() < 1e-12, "{d} vs {expected}");
            assert!((d - 2.18401).abs() < 1e-5);
        }
    }

    #[test]
    fn penalty_examples() {
        let m = ManifoldId::Torus(2);
        let curve = DiscreteCurve::new(
            m,
            vec![Point::torus(&[0.0, 0.0]), Point::torus(&[0.5, 0.0])],
        )
        .unwrap();
        let loose = uniform_cfg(m, 1, 2.0, 1.0);
        assert_eq!(loose.penalty(&curve).unwrap(), 0.0);
        let tight = uniform_cfg(m, 1, 0.5, 1.0);
        assert!((tight.penalty(&curve).unwrap() - 0.25).abs() < 1e-14);
        let off = uniform_cfg(m, 1, 0.5, 0.0);
        assert_eq!(off.penalty(&curve).unwrap(), 0.0);
    }

    #[test]
    fn penalty_cyclic_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = ManifoldId::Sphere2;
        let cfg = uniform_cfg(m, 2, 0.8, 2.5);
        let c = random_curve(m, 7, &mut rng);
        let p0 = cfg.penalty(&c).unwrap();
        let mut pts = c.points().to_vec();
        pts.rotate_left(3);
        let c2 = DiscreteCurve::new(m, pts).unwrap();
        assert!((cfg.penalty(&c2).unwrap() - p0).abs() < 1e-14);
    }

    #[test]
    fn objective_reversal_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for m in [ManifoldId::Torus(2), ManifoldId::Sphere2] {
            let cfg = uniform_cfg(m, 2, 0.9, 1.7);
            let c = random_curve(m, 6, &mut rng);
            let f = cfg.objective(&c).unwrap();
            let mut pts = c.points().to_vec();
            pts.reverse();
            let rev = DiscreteCurve::new(m, pts).unwrap();
            assert!((cfg.objective(&rev).unwrap() - f).abs() < 1e-12, "{m}");
        }
    }

    #[test]
    fn grid_curve_is_a_global_minimizer() {
        // 4x4 grid, r = 3 < 4: all coefficients vanish, and with L = N/n the
        // penalty is inactive, so the objective is exactly zero
        let n = 4usize;
        let mut pts = Vec::new();
        // boustrophedon ordering keeps consecutive distances at 1/n
        for i in 0..n {
            for j in 0..n {
                let jj = if i % 2 == 0 { j } else { n - 1 - j };
                pts.push(Point::torus(&[i as f64 / n as f64, jj as f64 / n as f64]));
            }
        }
        let curve = DiscreteCurve::new(ManifoldId::Torus(2), pts).unwrap();
        let cfg = uniform_cfg(ManifoldId::Torus(2), 3, 4.0, 1.0);
        let f = cfg.objective(&curve).unwrap();
        assert!(f.abs() < 1e-25, "objective at the grid: {f}");

        // first-order condition: gradient vanishes at a global minimum
        let g = cfg.gradient(&curve).unwrap();
        assert!(bundle_norm(&g) < 1e-10);

        // curvature is nonnegative there
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let dir: Vec<TangentVector> = curve
                .points()
                .iter()
                .map(|p| random_tangent(p, &mut rng))
                .collect();
            let hd = cfg.hessian_vec(&curve, &dir).unwrap();
            assert!(bundle_inner(&dir, &hd) >= -1e-6);
        }
    }

    #[test]
    fn duplicate_interleave_keeps_data_term() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m = ManifoldId::Sphere2;
        let cfg = uniform_cfg(m, 2, 10.0, 0.0);
        let c = random_curve(m, 5, &mut rng);
        let mut doubled = Vec::new();
        for p in c.points() {
            doubled.push(p.clone());
            doubled.push(p.clone());
        }
        let c2 = DiscreteCurve::new(m, doubled).unwrap();
        let f1 = cfg.objective(&c).unwrap();
        let f2 = cfg.objective(&c2).unwrap();
        assert!((f1 - f2).abs() < 1e-12);
    }

    #[test]
    fn single_point_uniform_gradient_vanishes() {
        // the data term is constant in the point position
        let cfg = uniform_cfg(ManifoldId::Torus(2), 2, 1.0, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let c = random_curve(ManifoldId::Torus(2), 1, &mut rng);
            let g = cfg.gradient(&c).unwrap();
            assert!(bundle_norm(&g) < 1e-12);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let h = 1e-6;
        for m in [
            ManifoldId::Torus(2),
            ManifoldId::Torus(3),
            ManifoldId::Sphere2,
            ManifoldId::So3,
            ManifoldId::Grass24,
        ] {
            for lambda in [0.0, 0.7] {
                let n = 8;
                // choose L so that some segments are active when lambda > 0
                let curve = random_curve(m, n, &mut rng);
                let mean_speed = curve.length().unwrap();
                let cfg = uniform_cfg(m, 4, 0.6 * mean_speed, lambda);
                let g = cfg.gradient(&curve).unwrap();
                for _ in 0..6 {
                    let dir: Vec<TangentVector> = curve
                        .points()
                        .iter()
                        .map(|p| random_tangent(p, &mut rng))
                        .collect();
                    let fp = cfg.objective(&step_curve(&curve, &dir, h).unwrap()).unwrap();
                    let fm = cfg
                        .objective(&step_curve(&curve, &dir, -h).unwrap())
                        .unwrap();
                    let fd = (fp - fm) / (2.0 * h);
                    let an = bundle_inner(&g, &dir);
                    let scale = fd.abs().max(an.abs()).max(1e-8);
                    assert!(
                        (fd - an).abs() / scale < 1e-5,
                        "{m} lambda={lambda}: fd {fd} vs {an}"
                    );
                }
            }
        }
    }

    #[test]
    fn gradient_rejects_coincident_points_with_penalty() {
        let m = ManifoldId::Torus(1);
        let curve = DiscreteCurve::new(
            m,
            vec![Point::torus(&[0.2]), Point::torus(&[0.2]), Point::torus(&[0.7])],
        )
        .unwrap();
        let cfg = uniform_cfg(m, 1, 0.5, 1.0);
        assert!(matches!(
            cfg.gradient(&curve),
            Err(Error::NonsmoothPoint(_))
        ));
        // without the penalty the data gradient is fine
        let cfg0 = uniform_cfg(m, 1, 0.5, 0.0);
        assert!(cfg0.gradient(&curve).is_ok());
    }

    #[test]
    fn hessian_homogeneity_and_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = ManifoldId::Torus(2);
        let cfg = uniform_cfg(m, 2, 1.0, 0.0);
        let curve = random_curve(m, 5, &mut rng);
        let dir: Vec<TangentVector> = curve
            .points()
            .iter()
            .map(|p| random_tangent(p, &mut rng))
            .collect();
        let hd = cfg.hessian_vec(&curve, &dir).unwrap();
        let hd2 = cfg.hessian_vec(&curve, &bundle_scale(&dir, 3.0)).unwrap();
        let n1 = bundle_norm(&hd);
        for (a, b) in hd.iter().zip(&hd2) {
            let diff = a.scale(3.0).add(&b.scale(-1.0));
            assert!(diff.norm() / (3.0 * n1) < 1e-4);
        }

        // symmetry of the quadratic form on the flat torus
        let e: Vec<TangentVector> = curve
            .points()
            .iter()
            .map(|p| random_tangent(p, &mut rng))
            .collect();
        let he = cfg.hessian_vec(&curve, &e).unwrap();
        let dhe = bundle_inner(&dir, &he);
        let ehd = bundle_inner(&e, &hd);
        let scale = dhe.abs().max(ehd.abs()).max(1e-8);
        assert!((dhe - ehd).abs() / scale < 1e-4, "{dhe} vs {ehd}");
    }

    #[test]
    fn hessian_rejects_zero_direction() {
        let cfg = uniform_cfg(ManifoldId::Torus(2), 1, 1.0, 0.0);
        let curve = DiscreteCurve::new(
            ManifoldId::Torus(2),
            vec![Point::torus(&[0.1, 0.2]), Point::torus(&[0.5, 0.6])],
        )
        .unwrap();
        let dir: Vec<TangentVector> = curve.points().iter().map(TangentVector::zero).collect();
        assert!(cfg.hessian_vec(&curve, &dir).is_err());
    }

    #[test]
    fn discrepancy_matches_double_sum_kernel_form() {
        // cross-formula consistency with the truncated-kernel double sum
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for m in [ManifoldId::Torus(2), ManifoldId::Sphere2, ManifoldId::So3] {
            let r = 2u32;
            let cfg = uniform_cfg(m, r, 1.0, 0.0);
            let curve = random_curve(m, 6, &mut rng);
            let nu = empirical_coefficients(&curve, r).unwrap();
            let direct = cfg.discrepancy_sq(&nu).unwrap();

            let basis = Basis::new(m, r);
            let kr = |x: &Point, y: &Point| -> f64 {
                let mut vx = vec![Complex64::new(0.0, 0.0); basis.len()];
                let mut vy = vec![Complex64::new(0.0, 0.0); basis.len()];
                basis.eval(x, &mut vx).unwrap();
                basis.eval(y, &mut vy).unwrap();
                vx.iter()
                    .zip(&vy)
                    .zip(&cfg.kernel.weights)
                    .map(|((a, b), &w)| (w * a * b.conj()).re)
                    .sum()
            };
            let nn = curve.len();
            let mut double_sum = 0.0;
            for i in 0..nn {
                for j in 0..nn {
                    double_sum += kr(&curve.points()[i], &curve.points()[j]);
                }
            }
            double_sum /= (nn * nn) as f64;
            // mu uniform: integral of K_r d mu = alpha_0 phi_0 = alpha_0,
            // and the mu x mu term is alpha_0
            let alpha0 = cfg.kernel.weights
                [crate::measure::SpectralMeasure::zero_position(m, r)];
            let cross = alpha0;
            let mu_mu = alpha0;
            let expected = mu_mu - 2.0 * cross + double_sum;
            assert!(
                (direct - expected).abs() < 1e-10,
                "{m}: {direct} vs {expected}"
            );
        }
    }
}
