//! Nonlinear conjugate gradient method on the product manifold of curve
//! points, with Hessian-informed exact-conjugacy beta, periodic and forced
//! steepest-descent restarts, and a second-order initialized Armijo line
//! search.

use crate::curve::DiscreteCurve;
use crate::error::{Error, Result};
use crate::objective::{
    bundle_inner, bundle_norm, bundle_scale, curve_constraint_deviation, step_curve,
    step_velocities, CurveObjective,
};
use crate::manifold::TangentVector;

/// Optimizer parameters.
#[derive(Debug, Clone)]
pub struct CgConfig {
    /// iteration cap per run
    pub max_iterations: usize,
    /// Armijo sufficient-decrease parameter, in (0, 1/2)
    pub armijo_a: f64,
    /// backtracking factor, in (0, 1)
    pub armijo_b: f64,
    /// backtracking cap
    pub armijo_max_backtracks: usize,
    /// number of extra forced steepest-descent resets, evenly spaced
    pub forced_restarts: usize,
    /// early stop when the gradient norm falls below this
    pub gradient_tolerance: f64,
}

impl CgConfig {
    pub fn new(
        max_iterations: usize,
        armijo_a: f64,
        armijo_b: f64,
        armijo_max_backtracks: usize,
        forced_restarts: usize,
    ) -> Result<CgConfig> {
        if !(armijo_a > 0.0 && armijo_a < 0.5) {
            return Err(Error::InvalidConfig(
                "Armijo parameter a must lie in (0, 1/2)".into(),
            ));
        }
        if !(armijo_b > 0.0 && armijo_b < 1.0) {
            return Err(Error::InvalidConfig(
                "backtracking factor b must lie in (0, 1)".into(),
            ));
        }
        Ok(CgConfig {
            max_iterations,
            armijo_a,
            armijo_b,
            armijo_max_backtracks,
            forced_restarts,
            gradient_tolerance: 1e-12,
        })
    }
}

impl Default for CgConfig {
    fn default() -> Self {
        CgConfig {
            max_iterations: 100,
            armijo_a: 0.05,
            armijo_b: 0.5,
            armijo_max_backtracks: 50,
            forced_restarts: 0,
            gradient_tolerance: 1e-12,
        }
    }
}

/// One per-iteration record.
#[derive(Debug, Clone)]
pub struct TraceRecord {
    pub iteration: usize,
    pub objective: f64,
    pub gradient_norm: f64,
    pub step: Option<f64>,
    pub beta: f64,
    pub restart: bool,
    pub reprojected: bool,
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    GradientTolerance,
    MaxIterations,
    LineSearchFailed,
}

#[derive(Debug, Clone)]
pub struct CgTrace {
    pub records: Vec<TraceRecord>,
    pub termination: Termination,
}

impl CgTrace {
    pub fn final_objective(&self) -> f64 {
        self.records.last().map(|r| r.objective).unwrap_or(f64::NAN)
    }

    pub fn final_gradient_norm(&self) -> f64 {
        self.records
            .last()
            .map(|r| r.gradient_norm)
            .unwrap_or(f64::NAN)
    }

    pub fn is_monotone(&self) -> bool {
        self.records
            .windows(2)
            .all(|w| w[1].objective <= w[0].objective + 1e-15)
    }

    /// CSV export: iteration, objective, gradient norm, step, beta, restart
    /// flag, reprojection flag.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,objective,grad_norm,tau,beta,restart,reprojected\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},{:.17e},{:.17e},{},{:.17e},{},{}\n",
                r.iteration,
                r.objective,
                r.gradient_norm,
                r.step.map(|s| format!("{s:.17e}")).unwrap_or_default(),
                r.beta,
                r.restart as u8,
                r.reprojected as u8,
            ));
        }
        out
    }
}

/// Backtracking line search along `dir` with the curvature-informed initial
/// step |<d,g>/<d,Hd>| (1 when the curvature term vanishes). Returns the
/// accepted step, the objective there and the stepped curve.
pub fn armijo_step<O: CurveObjective + ?Sized>(
    objective: &O,
    curve: &DiscreteCurve,
    value_at_curve: f64,
    gradient_at_curve: &[TangentVector],
    dir: &[TangentVector],
    cfg: &CgConfig,
) -> Result<(f64, f64, DiscreteCurve)> {
    let slope = bundle_inner(dir, gradient_at_curve);
    if slope >= 0.0 {
        return Err(Error::NotDescentDirection(slope));
    }
    let hd = objective.hessian_vec_with_gradient(curve, gradient_at_curve, dir)?;
    let curvature = bundle_inner(dir, &hd);
    let mut tau = if curvature != 0.0 {
        (slope / curvature).abs()
    } else {
        1.0
    };
    for k in 0..=cfg.armijo_max_backtracks {
        let trial = step_curve(curve, dir, tau)?;
        match objective.value(&trial) {
            Ok(f_trial) => {
                if f_trial - value_at_curve < cfg.armijo_a * tau * slope {
                    return Ok((tau, f_trial, trial));
                }
            }
            // reject the step and keep backtracking on geometric failures
            Err(Error::CutLocus(_)) | Err(Error::NonsmoothPoint(_)) => {}
            Err(e) => return Err(e),
        }
        if k == cfg.armijo_max_backtracks {
            break;
        }
        tau *= cfg.armijo_b;
    }
    Err(Error::LineSearchFailed(cfg.armijo_max_backtracks))
}

/// Minimize the objective from `x0`. Accepted iterates decrease the
/// objective monotonically; the trace records every iteration.
pub fn cg_minimize<O: CurveObjective + ?Sized>(
    objective: &O,
    x0: &DiscreteCurve,
    cfg: &CgConfig,
) -> Result<(DiscreteCurve, CgTrace)> {
    let ctx = |iteration: usize| move |e: Error| Error::Optimizer {
        iteration,
        source: Box::new(e),
    };
    let dim = x0.manifold().dim();
    let period = (x0.len() * dim).max(1);
    let forced: Vec<usize> = (1..=cfg.forced_restarts)
        .map(|j| (j * cfg.max_iterations) / (cfg.forced_restarts + 1))
        .filter(|&i| i > 0)
        .collect();

    let mut x = x0.clone();
    let mut f = objective.value(&x).map_err(ctx(0))?;
    let mut g = objective.gradient(&x).map_err(ctx(0))?;
    let mut gnorm = bundle_norm(&g);
    let mut records = vec![TraceRecord {
        iteration: 0,
        objective: f,
        gradient_norm: gnorm,
        step: None,
        beta: 0.0,
        restart: false,
        reprojected: false,
    }];
    if gnorm < cfg.gradient_tolerance {
        return Ok((
            x,
            CgTrace {
                records,
                termination: Termination::GradientTolerance,
            },
        ));
    }
    let mut d = bundle_scale(&g, -1.0);
    let mut last_restart = 0usize;

    for k in 0..cfg.max_iterations {
        let (tau, f_new, x_new) =
            match armijo_step(objective, &x, f, &g, &d, cfg) {
                Ok(r) => r,
                Err(Error::LineSearchFailed(_)) | Err(Error::NotDescentDirection(_)) => {
                    return Ok((
                        x,
                        CgTrace {
                            records,
                            termination: Termination::LineSearchFailed,
                        },
                    ));
                }
                Err(e) => return Err(ctx(k)(e)),
            };
        let mut d_tilde = step_velocities(&x, &d, tau).map_err(ctx(k))?;

        // guarded re-projection onto the manifold
        let deviation = curve_constraint_deviation(&x_new);
        let reprojected = deviation > 1e-9;
        let x_new = if reprojected {
            let pts = x_new.points().iter().map(|p| p.project()).collect();
            let fixed = DiscreteCurve::new(x_new.manifold(), pts).map_err(ctx(k))?;
            for (t, p) in d_tilde.iter_mut().zip(fixed.points()) {
                t.base = p.clone();
            }
            fixed
        } else {
            x_new
        };

        let g_new = objective.gradient(&x_new).map_err(ctx(k))?;
        let gnorm_new = bundle_norm(&g_new);
        if gnorm_new < cfg.gradient_tolerance {
            records.push(TraceRecord {
                iteration: k + 1,
                objective: f_new,
                gradient_norm: gnorm_new,
                step: Some(tau),
                beta: 0.0,
                restart: false,
                reprojected,
            });
            return Ok((
                x_new,
                CgTrace {
                    records,
                    termination: Termination::GradientTolerance,
                },
            ));
        }

        // exact-conjugacy beta from the Hessian at the new iterate
        let h_dtilde = objective
            .hessian_vec_with_gradient(&x_new, &g_new, &d_tilde)
            .map_err(ctx(k))?;
        let denom = bundle_inner(&d_tilde, &h_dtilde);
        let beta = if denom != 0.0 {
            let h_g = objective
                .hessian_vec_with_gradient(&x_new, &g_new, &g_new)
                .map_err(ctx(k))?;
            bundle_inner(&d_tilde, &h_g) / denom
        } else {
            0.0
        };

        let mut d_new: Vec<TangentVector> = g_new
            .iter()
            .zip(&d_tilde)
            .map(|(gi, ti)| gi.scale(-1.0).add(&ti.scale(beta)))
            .collect();
        let mut restart = false;
        if bundle_inner(&d_new, &g_new) > 0.0
            || (k + 1 - last_restart) % period == 0
            || forced.contains(&(k + 1))
        {
            d_new = bundle_scale(&g_new, -1.0);
            last_restart = k + 1;
            restart = true;
        }

        x = x_new;
        f = f_new;
        g = g_new;
        gnorm = gnorm_new;
        d = d_new;
        records.push(TraceRecord {
            iteration: k + 1,
            objective: f,
            gradient_norm: gnorm,
            step: Some(tau),
            beta,
            restart,
            reprojected,
        });
    }
    let _ = gnorm;
    Ok((
        x,
        CgTrace {
            records,
            termination: Termination::MaxIterations,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{random_point, wrap_diff, ManifoldId, Point, Tangent};
    use crate::measure::uniform_measure;
    use crate::objective::{fd_hessian_vec, ObjectiveConfig};
    use crate::spectral::kernel_weights;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn config_rejects_bad_armijo_parameters() {
        assert!(CgConfig::new(10, 0.5, 0.5, 10, 0).is_err());
        assert!(CgConfig::new(10, 0.6, 0.5, 10, 0).is_err());
        assert!(CgConfig::new(10, 0.05, 1.0, 10, 0).is_err());
        assert!(CgConfig::new(10, 0.05, 0.5, 10, 0).is_ok());
    }

    /// Quadratic objective in the first coordinate of a 1-point torus curve.
    struct Quadratic {
        center: f64,
        scale: f64,
    }

    impl Quadratic {
        fn offset(&self, curve: &DiscreteCurve) -> f64 {
            match &curve.points()[0] {
                Point::Torus(c) => wrap_diff(c[0] - self.center),
                _ => unreachable!(),
            }
        }
    }

    impl CurveObjective for Quadratic {
        fn value(&self, curve: &DiscreteCurve) -> Result<f64> {
            let d = self.offset(curve);
            Ok(self.scale * d * d)
        }

        fn gradient(&self, curve: &DiscreteCurve) -> Result<Vec<TangentVector>> {
            let d = self.offset(curve);
            Ok(vec![TangentVector {
                base: curve.points()[0].clone(),
                components: Tangent::Torus(vec![2.0 * self.scale * d]),
            }])
        }

        fn hessian_vec_with_gradient(
            &self,
            curve: &DiscreteCurve,
            base_gradient: &[TangentVector],
            dir: &[TangentVector],
        ) -> Result<Vec<TangentVector>> {
            fd_hessian_vec(self, curve, base_gradient, dir, 1e-8)
        }
    }

    #[test]
    fn armijo_takes_the_newton_step_on_a_quadratic() {
        // slope -4, curvature 8 gives the exact minimizer step 1/2
        let obj = Quadratic {
            center: 0.6,
            scale: 4.0,
        };
        let x = DiscreteCurve::new(ManifoldId::Torus(1), vec![Point::torus(&[0.35])]).unwrap();
        let f = obj.value(&x).unwrap();
        let g = obj.gradient(&x).unwrap();
        let dir = vec![TangentVector {
            base: x.points()[0].clone(),
            components: Tangent::Torus(vec![1.0]),
        }];
        assert!((bundle_inner(&dir, &g) + 4.0).abs() < 1e-12);
        let cfg = CgConfig::default();
        let (tau, f_new, _) = armijo_step(&obj, &x, f, &g, &dir, &cfg).unwrap();
        assert!((tau - 0.5).abs() < 1e-6, "tau {tau}");
        assert!(f_new < 1e-10);
    }

    /// Objective with an identically zero Hessian oracle and slope -1.
    struct Linear;

    impl CurveObjective for Linear {
        fn value(&self, curve: &DiscreteCurve) -> Result<f64> {
            match &curve.points()[0] {
                Point::Torus(c) => Ok(-wrap_diff(c[0] - 0.2)),
                _ => unreachable!(),
            }
        }

        fn gradient(&self, curve: &DiscreteCurve) -> Result<Vec<TangentVector>> {
            Ok(vec![TangentVector {
                base: curve.points()[0].clone(),
                components: Tangent::Torus(vec![-1.0]),
            }])
        }

        fn hessian_vec_with_gradient(
            &self,
            curve: &DiscreteCurve,
            _base_gradient: &[TangentVector],
            _dir: &[TangentVector],
        ) -> Result<Vec<TangentVector>> {
            Ok(vec![TangentVector::zero(&curve.points()[0])])
        }
    }

    #[test]
    fn armijo_starts_at_one_when_curvature_vanishes() {
        let obj = Linear;
        let x = DiscreteCurve::new(ManifoldId::Torus(1), vec![Point::torus(&[0.2])]).unwrap();
        let f = obj.value(&x).unwrap();
        let g = obj.gradient(&x).unwrap();
        let dir = vec![TangentVector {
            base: x.points()[0].clone(),
            components: Tangent::Torus(vec![1.0]),
        }];
        let cfg = CgConfig::default();
        // at tau = 1 the coordinate wraps back to the start (no decrease),
        // so the search accepts the first backtracked step b * 1
        let (tau, f_new, _) = armijo_step(&obj, &x, f, &g, &dir, &cfg).unwrap();
        assert!((tau - 0.5).abs() < 1e-12);
        assert!((f_new + 0.5).abs() < 1e-12);
    }

    #[test]
    fn armijo_rejects_ascent_directions() {
        let obj = Linear;
        let x = DiscreteCurve::new(ManifoldId::Torus(1), vec![Point::torus(&[0.2])]).unwrap();
        let f = obj.value(&x).unwrap();
        let g = obj.gradient(&x).unwrap();
        let dir = vec![TangentVector {
            base: x.points()[0].clone(),
            components: Tangent::Torus(vec![-1.0]),
        }];
        assert!(matches!(
            armijo_step(&obj, &x, f, &g, &dir, &CgConfig::default()),
            Err(Error::NotDescentDirection(_))
        ));
    }

    #[test]
    fn stationary_start_returns_immediately() {
        // uniform target, single point: the gradient is identically zero
        let m = ManifoldId::Torus(2);
        let cfg = ObjectiveConfig::new(uniform_measure(m, 2), kernel_weights(m, 2), 1.0, 0.0)
            .unwrap();
        let x0 = DiscreteCurve::new(m, vec![Point::torus(&[0.3, 0.7])]).unwrap();
        let (x, trace) = cg_minimize(&cfg, &x0, &CgConfig::default()).unwrap();
        assert_eq!(trace.records.len(), 1);
        assert_eq!(trace.termination, Termination::GradientTolerance);
        assert_eq!(x.points()[0], x0.points()[0]);
    }

    #[test]
    fn quadratic_converges_and_trace_is_monotone() {
        let obj = Quadratic {
            center: 0.37,
            scale: 2.5,
        };
        let x0 = DiscreteCurve::new(ManifoldId::Torus(1), vec![Point::torus(&[0.9])]).unwrap();
        let mut cg = CgConfig::default();
        cg.gradient_tolerance = 1e-10;
        let (x, trace) = cg_minimize(&obj, &x0, &cg).unwrap();
        assert!(trace.is_monotone());
        assert_eq!(trace.termination, Termination::GradientTolerance);
        if let Point::Torus(c) = &x.points()[0] {
            assert!((wrap_diff(c[0] - 0.37)).abs() < 1e-8);
        }
    }

    #[test]
    fn sphere_run_stays_on_manifold_and_decreases() {
        let m = ManifoldId::Sphere2;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let pts: Vec<Point> = (0..6).map(|_| random_point(m, &mut rng)).collect();
        let x0 = DiscreteCurve::new(m, pts).unwrap();
        let target = uniform_measure(m, 2);
        let cfg =
            ObjectiveConfig::new(target, kernel_weights(m, 2), 6.0, 0.5).unwrap();
        let mut cg = CgConfig::default();
        cg.max_iterations = 40;
        let (x, trace) = cg_minimize(&cfg, &x0, &cg).unwrap();
        assert!(trace.is_monotone());
        assert!(trace.final_objective() < trace.records[0].objective);
        assert!(crate::objective::curve_constraint_deviation(&x) < 1e-9);
    }

    #[test]
    fn forced_restarts_are_recorded() {
        let obj = Quadratic {
            center: 0.3,
            scale: 1.0,
        };
        let x0 = DiscreteCurve::new(ManifoldId::Torus(1), vec![Point::torus(&[0.6])]).unwrap();
        let mut cg = CgConfig::default();
        cg.max_iterations = 9;
        cg.forced_restarts = 2;
        cg.gradient_tolerance = 0.0;
        let (_, trace) = cg_minimize(&obj, &x0, &cg).unwrap();
        // forced resets at iterations 3 and 6
        let restarts: Vec<usize> = trace
            .records
            .iter()
            .filter(|r| r.restart)
            .map(|r| r.iteration)
            .collect();
        assert!(restarts.contains(&3) && restarts.contains(&6), "{restarts:?}");
    }

    #[test]
    fn csv_header_and_rows() {
        let obj = Quadratic {
            center: 0.3,
            scale: 1.0,
        };
        let x0 = DiscreteCurve::new(ManifoldId::Torus(1), vec![Point::torus(&[0.5])]).unwrap();
        let (_, trace) = cg_minimize(&obj, &x0, &CgConfig::default()).unwrap();
        let csv = trace.to_csv();
        assert!(csv.starts_with("iteration,objective,grad_norm,tau,beta,restart,reprojected\n"));
        assert_eq!(csv.lines().count(), trace.records.len() + 1);
    }
}
