//! Riemannian geometry primitives for the four supported manifolds:
//! the flat torus T^d, the unit sphere S^2, the rotation group SO(3) and
//! the Grassmannian of 2-planes in R^4 represented through its double
//! cover S^2 x S^2.
//!
//! All operations are pure functions; `Point` and `TangentVector` are
//! immutable values. Conventions:
//!
//! * Torus coordinates live in [0,1); wrapped differences are taken in
//!   (-1/2, 1/2] per coordinate.
//! * S^2 points are unit 3-vectors, distance arccos<x,y>.
//! * SO(3) points are rotation matrices; tangent vectors are stored in the
//!   ambient form x*Omega with Omega skew; the metric is tr(v^T w)/8 so
//!   that distance(x,y) = arccos((tr(x^T y)-1)/2)/2 equals the length of
//!   the connecting geodesic.
//! * Grassmannian points are canonical-sign pairs (u,v) of unit 3-vectors;
//!   (u,v) and (-u,-v) denote the same plane. Geometry is factor-wise on
//!   S^2 x S^2 with the lift chosen to minimize the product distance; with
//!   the distance sqrt(2)*sqrt(theta1^2+theta2^2) in principal angles this
//!   equals the product metric without rescaling.

use crate::error::{Error, Result};
use crate::linalg::*;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Identifier of one of the supported manifolds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ManifoldId {
    Torus(usize),
    Sphere2,
    So3,
    Grass24,
}

impl ManifoldId {
    /// Intrinsic dimension.
    pub fn dim(&self) -> usize {
        match self {
            ManifoldId::Torus(d) => *d,
            ManifoldId::Sphere2 => 2,
            ManifoldId::So3 => 3,
            ManifoldId::Grass24 => 4,
        }
    }

    /// Tag used in serialized curve and measure files.
    pub fn tag(&self) -> String {
        match self {
            ManifoldId::Torus(d) => format!("torus{d}"),
            ManifoldId::Sphere2 => "sphere2".into(),
            ManifoldId::So3 => "so3".into(),
            ManifoldId::Grass24 => "grass24".into(),
        }
    }

    pub fn from_tag(tag: &str) -> Result<Self> {
        match tag {
            "sphere2" => Ok(ManifoldId::Sphere2),
            "so3" => Ok(ManifoldId::So3),
            "grass24" => Ok(ManifoldId::Grass24),
            _ => {
                if let Some(d) = tag.strip_prefix("torus") {
                    let d: usize = d
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad manifold tag {tag}")))?;
                    if d == 0 {
                        return Err(Error::InvalidConfig("torus dimension must be >= 1".into()));
                    }
                    Ok(ManifoldId::Torus(d))
                } else {
                    Err(Error::Parse(format!("bad manifold tag {tag}")))
                }
            }
        }
    }
}

impl std::fmt::Display for ManifoldId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.tag())
    }
}

/// A point on one of the supported manifolds.
#[derive(Debug, Clone, PartialEq)]
pub enum Point {
    Torus(Vec<f64>),
    Sphere2(Vec3),
    So3(Mat3),
    /// Canonical-sign pair: the first coordinate of `u` whose magnitude
    /// exceeds 1e-14 is positive.
    Grass24 { u: Vec3, v: Vec3 },
}

/// Tangent data at a base point, stored in the same ambient representation.
#[derive(Debug, Clone)]
pub enum Tangent {
    Torus(Vec<f64>),
    Sphere2(Vec3),
    So3(Mat3),
    Grass24 { du: Vec3, dv: Vec3 },
}

/// A tangent vector together with its base point.
#[derive(Debug, Clone)]
pub struct TangentVector {
    pub base: Point,
    pub components: Tangent,
}

pub(crate) fn wrap01(x: f64) -> f64 {
    let y = x - x.floor();
    if y >= 1.0 {
        0.0
    } else {
        y
    }
}

/// Wrapped representative of a difference in (-1/2, 1/2].
pub(crate) fn wrap_diff(d: f64) -> f64 {
    let mut y = d - d.round();
    if y <= -0.5 {
        y += 1.0;
    }
    y
}

fn canonical_pair(u: Vec3, v: Vec3) -> (Vec3, Vec3) {
    for c in 0..3 {
        if u[c].abs() > 1e-14 {
            if u[c] < 0.0 {
                return (scale3(&u, -1.0), scale3(&v, -1.0));
            }
            return (u, v);
        }
    }
    (u, v)
}

impl Point {
    pub fn manifold(&self) -> ManifoldId {
        match self {
            Point::Torus(x) => ManifoldId::Torus(x.len()),
            Point::Sphere2(_) => ManifoldId::Sphere2,
            Point::So3(_) => ManifoldId::So3,
            Point::Grass24 { .. } => ManifoldId::Grass24,
        }
    }

    /// Torus point with coordinates wrapped into [0,1).
    pub fn torus(coords: &[f64]) -> Point {
        Point::Torus(coords.iter().map(|&c| wrap01(c)).collect())
    }

    /// Sphere point; errors if the input is not a unit vector within 1e-12
    /// after normalization would change it by more than that.
    pub fn sphere(x: Vec3) -> Result<Point> {
        let n = norm3(&x);
        if (n - 1.0).abs() > 1e-12 {
            return Err(Error::DegenerateInput(format!(
                "sphere point has norm {n}, expected 1"
            )));
        }
        Ok(Point::Sphere2(normalize3(&x)))
    }

    /// Sphere point from an arbitrary nonzero vector (normalized).
    pub fn sphere_normalize(x: Vec3) -> Point {
        Point::Sphere2(normalize3(&x))
    }

    pub fn rotation(r: Mat3) -> Result<Point> {
        let rt_r = mat3_mul(&mat3_transpose(&r), &r);
        let mut dev: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let id = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((rt_r[i][j] - id).abs());
            }
        }
        let det = r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1])
            - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0])
            + r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0]);
        if dev > 1e-10 || (det - 1.0).abs() > 1e-10 {
            return Err(Error::DegenerateInput(format!(
                "not a rotation matrix (orthogonality deviation {dev:.2e}, det {det})"
            )));
        }
        Ok(Point::So3(r))
    }

    /// Grassmannian point from a pair of unit vectors on the double cover.
    pub fn grass_from_pair(u: Vec3, v: Vec3) -> Result<Point> {
        let (nu, nv) = (norm3(&u), norm3(&v));
        if (nu - 1.0).abs() > 1e-12 || (nv - 1.0).abs() > 1e-12 {
            return Err(Error::DegenerateInput(format!(
                "grass pair must be unit vectors (norms {nu}, {nv})"
            )));
        }
        let (u, v) = canonical_pair(normalize3(&u), normalize3(&v));
        Ok(Point::Grass24 { u, v })
    }

    /// Deviation from the manifold constraints (0 for an exact point).
    pub fn constraint_deviation(&self) -> f64 {
        match self {
            Point::Torus(x) => x
                .iter()
                .map(|&c| if (0.0..1.0).contains(&c) { 0.0 } else { 1.0 })
                .fold(0.0, f64::max),
            Point::Sphere2(x) => (norm3(x) - 1.0).abs(),
            Point::So3(r) => {
                let rt_r = mat3_mul(&mat3_transpose(r), r);
                let mut dev: f64 = 0.0;
                for i in 0..3 {
                    for j in 0..3 {
                        let id = if i == j { 1.0 } else { 0.0 };
                        dev = dev.max((rt_r[i][j] - id).abs());
                    }
                }
                dev
            }
            Point::Grass24 { u, v } => (norm3(u) - 1.0).abs().max((norm3(v) - 1.0).abs()),
        }
    }

    /// Project back onto the manifold (wrap, normalize, re-orthonormalize).
    pub fn project(&self) -> Point {
        match self {
            Point::Torus(x) => Point::torus(x),
            Point::Sphere2(x) => Point::Sphere2(normalize3(x)),
            Point::So3(r) => Point::So3(reorthonormalize(r)),
            Point::Grass24 { u, v } => {
                let (u, v) = canonical_pair(normalize3(u), normalize3(v));
                Point::Grass24 { u, v }
            }
        }
    }

    /// Flat coordinate list used by the curve file format.
    pub fn flat_coords(&self) -> Vec<f64> {
        match self {
            Point::Torus(x) => x.clone(),
            Point::Sphere2(x) => x.to_vec(),
            Point::So3(r) => r.iter().flat_map(|row| row.iter().copied()).collect(),
            Point::Grass24 { u, v } => u.iter().chain(v.iter()).copied().collect(),
        }
    }

    pub fn from_flat_coords(m: ManifoldId, coords: &[f64]) -> Result<Point> {
        match m {
            ManifoldId::Torus(d) => {
                if coords.len() != d {
                    return Err(Error::Parse("bad torus coordinate count".into()));
                }
                Ok(Point::torus(coords))
            }
            ManifoldId::Sphere2 => {
                if coords.len() != 3 {
                    return Err(Error::Parse("bad sphere coordinate count".into()));
                }
                Point::sphere([coords[0], coords[1], coords[2]])
            }
            ManifoldId::So3 => {
                if coords.len() != 9 {
                    return Err(Error::Parse("bad rotation coordinate count".into()));
                }
                let mut r = [[0.0; 3]; 3];
                for i in 0..3 {
                    for j in 0..3 {
                        r[i][j] = coords[3 * i + j];
                    }
                }
                Point::rotation(r)
            }
            ManifoldId::Grass24 => {
                if coords.len() != 6 {
                    return Err(Error::Parse("bad grass coordinate count".into()));
                }
                Point::grass_from_pair(
                    [coords[0], coords[1], coords[2]],
                    [coords[3], coords[4], coords[5]],
                )
            }
        }
    }
}

impl TangentVector {
    pub fn zero(base: &Point) -> TangentVector {
        let components = match base {
            Point::Torus(x) => Tangent::Torus(vec![0.0; x.len()]),
            Point::Sphere2(_) => Tangent::Sphere2([0.0; 3]),
            Point::So3(_) => Tangent::So3([[0.0; 3]; 3]),
            Point::Grass24 { .. } => Tangent::Grass24 {
                du: [0.0; 3],
                dv: [0.0; 3],
            },
        };
        TangentVector {
            base: base.clone(),
            components,
        }
    }

    pub fn scale(&self, s: f64) -> TangentVector {
        let components = match &self.components {
            Tangent::Torus(v) => Tangent::Torus(v.iter().map(|c| c * s).collect()),
            Tangent::Sphere2(v) => Tangent::Sphere2(scale3(v, s)),
            Tangent::So3(v) => Tangent::So3(mat3_scale(v, s)),
            Tangent::Grass24 { du, dv } => Tangent::Grass24 {
                du: scale3(du, s),
                dv: scale3(dv, s),
            },
        };
        TangentVector {
            base: self.base.clone(),
            components,
        }
    }

    /// Sum of two tangent vectors at the same base point.
    pub fn add(&self, other: &TangentVector) -> TangentVector {
        let components = match (&self.components, &other.components) {
            (Tangent::Torus(a), Tangent::Torus(b)) => {
                Tangent::Torus(a.iter().zip(b).map(|(x, y)| x + y).collect())
            }
            (Tangent::Sphere2(a), Tangent::Sphere2(b)) => Tangent::Sphere2(add3(a, b)),
            (Tangent::So3(a), Tangent::So3(b)) => Tangent::So3(mat3_add(a, b)),
            (
                Tangent::Grass24 { du: a1, dv: a2 },
                Tangent::Grass24 { du: b1, dv: b2 },
            ) => Tangent::Grass24 {
                du: add3(a1, b1),
                dv: add3(a2, b2),
            },
            _ => panic!("tangent representation mismatch"),
        };
        TangentVector {
            base: self.base.clone(),
            components,
        }
    }

    pub fn norm(&self) -> f64 {
        inner(self, self).sqrt()
    }
}

/// Riemannian inner product of two tangent vectors at the same base point.
pub fn inner(a: &TangentVector, b: &TangentVector) -> f64 {
    match (&a.components, &b.components) {
        (Tangent::Torus(x), Tangent::Torus(y)) => x.iter().zip(y).map(|(p, q)| p * q).sum(),
        (Tangent::Sphere2(x), Tangent::Sphere2(y)) => dot3(x, y),
        // tr(v^T w)/8 makes |log_x y| equal the half-rotation-angle distance
        (Tangent::So3(x), Tangent::So3(y)) => frobenius_inner(x, y) / 8.0,
        (Tangent::Grass24 { du: xu, dv: xv }, Tangent::Grass24 { du: yu, dv: yv }) => {
            dot3(xu, yu) + dot3(xv, yv)
        }
        _ => panic!("tangent representation mismatch"),
    }
}

fn check_same_manifold(x: &Point, y: &Point) -> Result<()> {
    if x.manifold() != y.manifold() {
        return Err(Error::ManifoldMismatch(
            x.manifold().tag(),
            y.manifold().tag(),
        ));
    }
    Ok(())
}

/// Geodesic distance between two points on the same manifold.
pub fn distance(x: &Point, y: &Point) -> Result<f64> {
    check_same_manifold(x, y)?;
    Ok(match (x, y) {
        (Point::Torus(a), Point::Torus(b)) => a
            .iter()
            .zip(b)
            .map(|(p, q)| {
                let d = wrap_diff(q - p);
                d * d
            })
            .sum::<f64>()
            .sqrt(),
        (Point::Sphere2(a), Point::Sphere2(b)) => dot3(a, b).clamp(-1.0, 1.0).acos(),
        (Point::So3(a), Point::So3(b)) => {
            let tr = mat3_trace(&mat3_mul(&mat3_transpose(a), b));
            ((tr - 1.0) * 0.5).clamp(-1.0, 1.0).acos() * 0.5
        }
        (Point::Grass24 { u: ua, v: va }, Point::Grass24 { u: ub, v: vb }) => {
            grass_lift_distances(ua, va, ub, vb).0
        }
        _ => unreachable!(),
    })
}

/// Squared factor distances for the two lifts; returns (distance, flip)
/// where `flip` indicates the minimizing lift is (-u,-v).
fn grass_lift_distances(ua: &Vec3, va: &Vec3, ub: &Vec3, vb: &Vec3) -> (f64, bool) {
    let du_p = dot3(ua, ub).clamp(-1.0, 1.0).acos();
    let dv_p = dot3(va, vb).clamp(-1.0, 1.0).acos();
    let du_m = std::f64::consts::PI - du_p;
    let dv_m = std::f64::consts::PI - dv_p;
    let s_p = du_p * du_p + dv_p * dv_p;
    let s_m = du_m * du_m + dv_m * dv_m;
    if s_p <= s_m {
        (s_p.sqrt(), false)
    } else {
        (s_m.sqrt(), true)
    }
}

fn sphere_exp(x: &Vec3, v: &Vec3) -> (Vec3, Vec3) {
    let theta = norm3(v);
    if theta < 1e-300 {
        return (*x, *v);
    }
    let vhat = scale3(v, 1.0 / theta);
    let p = add3(&scale3(x, theta.cos()), &scale3(&vhat, theta.sin()));
    let vel = scale3(
        &add3(&scale3(x, -theta.sin()), &scale3(&vhat, theta.cos())),
        theta,
    );
    (normalize3(&p), vel)
}

fn sphere_log(x: &Vec3, y: &Vec3) -> Result<Vec3> {
    let c = dot3(x, y).clamp(-1.0, 1.0);
    let theta = c.acos();
    if theta >= std::f64::consts::PI - 1e-9 {
        return Err(Error::CutLocus("antipodal points on the sphere".into()));
    }
    if theta < 1e-15 {
        return Ok([0.0; 3]);
    }
    let mut dir = sub3(y, &scale3(x, c));
    let n = norm3(&dir);
    dir = scale3(&dir, theta / n);
    Ok(dir)
}

/// Parallel transport of `w` (tangent at `x`) along the geodesic with
/// initial velocity `v`, to the point exp_x(v).
fn sphere_transport(x: &Vec3, v: &Vec3, w: &Vec3) -> Vec3 {
    let theta = norm3(v);
    if theta < 1e-300 {
        return *w;
    }
    let vhat = scale3(v, 1.0 / theta);
    let a = dot3(w, &vhat);
    // component along the geodesic rotates in the (x, vhat) plane
    let mut out = *w;
    axpy3(&mut out, -a * (1.0 - theta.cos()), &vhat);
    axpy3(&mut out, -a * theta.sin(), x);
    out
}

/// Exponential map: the endpoint of the constant-speed geodesic from x with
/// initial velocity v.
pub fn exp_map(x: &Point, v: &TangentVector) -> Result<Point> {
    Ok(geodesic_with_velocity(x, v, 1.0)?.0)
}

/// Point and velocity of the geodesic t -> exp_x(t v).
pub fn geodesic_with_velocity(x: &Point, v: &TangentVector, t: f64) -> Result<(Point, TangentVector)> {
    check_same_manifold(x, &v.base)?;
    match (x, &v.components) {
        (Point::Torus(p), Tangent::Torus(d)) => {
            let q: Vec<f64> = p.iter().zip(d).map(|(a, b)| wrap01(a + t * b)).collect();
            let np = Point::Torus(q);
            let vel = TangentVector {
                base: np.clone(),
                components: Tangent::Torus(d.clone()),
            };
            Ok((np, vel))
        }
        (Point::Sphere2(p), Tangent::Sphere2(d)) => {
            let (q, vel) = sphere_exp(p, &scale3(d, t));
            let speed_dir = if t == 0.0 {
                *d
            } else {
                scale3(&vel, 1.0 / t)
            };
            let np = Point::Sphere2(q);
            Ok((
                np.clone(),
                TangentVector {
                    base: np,
                    components: Tangent::Sphere2(speed_dir),
                },
            ))
        }
        (Point::So3(r), Tangent::So3(d)) => {
            // v = r*Omega; gamma(t) = r expm(t Omega), velocity gamma(t)*Omega
            let omega = mat3_mul(&mat3_transpose(r), d);
            let omega_t = mat3_scale(&omega, t);
            let q = mat3_mul(r, &expm_skew(&omega_t));
            let vel = mat3_mul(&q, &omega);
            let np = Point::So3(q);
            Ok((
                np.clone(),
                TangentVector {
                    base: np,
                    components: Tangent::So3(vel),
                },
            ))
        }
        (Point::Grass24 { u, v: vv }, Tangent::Grass24 { du, dv }) => {
            let (qu, velu) = sphere_exp(u, &scale3(du, t));
            let (qv, velv) = sphere_exp(vv, &scale3(dv, t));
            let (mut su, mut sv) = (
                if t == 0.0 { *du } else { scale3(&velu, 1.0 / t) },
                if t == 0.0 { *dv } else { scale3(&velv, 1.0 / t) },
            );
            let (cu, cv) = canonical_pair(qu, qv);
            // tangents flip together with the representative
            if dot3(&cu, &qu) < 0.0 {
                su = scale3(&su, -1.0);
                sv = scale3(&sv, -1.0);
            }
            let np = Point::Grass24 { u: cu, v: cv };
            Ok((
                np.clone(),
                TangentVector {
                    base: np,
                    components: Tangent::Grass24 { du: su, dv: sv },
                },
            ))
        }
        _ => Err(Error::ManifoldMismatch(
            x.manifold().tag(),
            v.base.manifold().tag(),
        )),
    }
}

/// Logarithm map: the initial velocity of the unit-time geodesic from x to y.
pub fn log_map(x: &Point, y: &Point) -> Result<TangentVector> {
    check_same_manifold(x, y)?;
    let components = match (x, y) {
        (Point::Torus(a), Point::Torus(b)) => {
            let mut d = Vec::with_capacity(a.len());
            for (p, q) in a.iter().zip(b) {
                let w = wrap_diff(q - p);
                if (w.abs() - 0.5).abs() < 1e-12 && w.abs() > 1e-12 {
                    return Err(Error::CutLocus(
                        "torus coordinate difference of exactly 1/2".into(),
                    ));
                }
                d.push(w);
            }
            Tangent::Torus(d)
        }
        (Point::Sphere2(a), Point::Sphere2(b)) => Tangent::Sphere2(sphere_log(a, b)?),
        (Point::So3(a), Point::So3(b)) => {
            let rel = mat3_mul(&mat3_transpose(a), b);
            let omega = logm_rotation(&rel, 1e-9)
                .ok_or_else(|| Error::CutLocus("rotations differing by angle pi".into()))?;
            Tangent::So3(mat3_mul(a, &omega))
        }
        (Point::Grass24 { u: ua, v: va }, Point::Grass24 { u: ub, v: vb }) => {
            let du_p = dot3(ua, ub).clamp(-1.0, 1.0).acos();
            let dv_p = dot3(va, vb).clamp(-1.0, 1.0).acos();
            let du_m = std::f64::consts::PI - du_p;
            let dv_m = std::f64::consts::PI - dv_p;
            let s_p = du_p * du_p + dv_p * dv_p;
            let s_m = du_m * du_m + dv_m * dv_m;
            if (s_p.sqrt() - s_m.sqrt()).abs() < 1e-12 && s_p > 1e-20 {
                return Err(Error::CutLocus(
                    "equidistant lifts on the Grassmannian double cover".into(),
                ));
            }
            let (tu, tv) = if s_p <= s_m {
                (*ub, *vb)
            } else {
                (scale3(ub, -1.0), scale3(vb, -1.0))
            };
            Tangent::Grass24 {
                du: sphere_log(ua, &tu)?,
                dv: sphere_log(va, &tv)?,
            }
        }
        _ => unreachable!(),
    };
    Ok(TangentVector {
        base: x.clone(),
        components,
    })
}

/// Parallel transport of `w` along the geodesic t -> exp_x(t v), t in [0,1].
pub fn parallel_transport(x: &Point, v: &TangentVector, w: &TangentVector) -> Result<TangentVector> {
    check_same_manifold(x, &v.base)?;
    check_same_manifold(x, &w.base)?;
    let endpoint = exp_map(x, v)?;
    let components = match (x, &v.components, &w.components) {
        (Point::Torus(_), Tangent::Torus(_), Tangent::Torus(d)) => Tangent::Torus(d.clone()),
        (Point::Sphere2(p), Tangent::Sphere2(d), Tangent::Sphere2(wc)) => {
            Tangent::Sphere2(sphere_transport(p, d, wc))
        }
        (Point::So3(r), Tangent::So3(d), Tangent::So3(wc)) => {
            // bi-invariant transport: Psi -> e^{Omega/2} Psi e^{Omega/2}
            let omega = mat3_mul(&mat3_transpose(r), d);
            let psi = mat3_mul(&mat3_transpose(r), wc);
            let half = expm_skew(&mat3_scale(&omega, 0.5));
            let out = mat3_mul(&half, &mat3_mul(&psi, &half));
            Tangent::So3(mat3_mul(r, &out))
        }
        (
            Point::Grass24 { u, v: vv },
            Tangent::Grass24 { du, dv },
            Tangent::Grass24 { du: wu, dv: wv },
        ) => {
            let mut tu = sphere_transport(u, du, wu);
            let mut tv = sphere_transport(vv, dv, wv);
            // match the endpoint's canonical representative
            let (qu, _) = sphere_exp(u, du);
            if let Point::Grass24 { u: cu, .. } = &endpoint {
                let flipped = dot3(cu, &qu) < 0.0;
                if flipped {
                    tu = scale3(&tu, -1.0);
                    tv = scale3(&tv, -1.0);
                }
            }
            Tangent::Grass24 { du: tu, dv: tv }
        }
        _ => unreachable!(),
    };
    Ok(TangentVector {
        base: endpoint,
        components,
    })
}

/// Rotation matrix from a unit quaternion through the double cover of SO(3).
pub fn covering_map_s3_to_so3(q: &[f64; 4]) -> Result<Point> {
    let n = (q.iter().map(|x| x * x).sum::<f64>()).sqrt();
    if (n - 1.0).abs() > 1e-12 {
        return Err(Error::DegenerateInput(format!(
            "quaternion has norm {n}, expected 1"
        )));
    }
    let qn = [q[0] / n, q[1] / n, q[2] / n, q[3] / n];
    Ok(Point::So3(quat_to_matrix(&qn)))
}

/// Symmetric rank-2 projector onto the plane represented by a Grassmannian
/// point, as a 4x4 matrix.
pub fn projector_of(p: &Point) -> Result<[[f64; 4]; 4]> {
    let (u, v) = match p {
        Point::Grass24 { u, v } => (u, v),
        _ => {
            return Err(Error::UnsupportedManifold(format!(
                "projector_of expects grass24, got {}",
                p.manifold()
            )))
        }
    };
    let c = dot3(u, v);
    let w = cross3(u, v);
    let mut m = [[0.0; 4]; 4];
    m[0][0] = 0.5 * (1.0 + c);
    for i in 0..3 {
        m[0][i + 1] = -0.5 * w[i];
        m[i + 1][0] = -0.5 * w[i];
        for j in 0..3 {
            let id = if i == j { 1.0 } else { 0.0 };
            m[i + 1][j + 1] = 0.5 * (u[i] * v[j] + v[i] * u[j] + (1.0 - c) * id);
        }
    }
    Ok(m)
}

/// Grassmannian point recovered from a rank-2 projector.
pub fn grass_from_projector(m: &[[f64; 4]; 4]) -> Result<Point> {
    let c = (2.0 * m[0][0] - 1.0).clamp(-1.0, 1.0);
    let w = [-2.0 * m[1][0], -2.0 * m[2][0], -2.0 * m[3][0]];
    // S = u v^T + v u^T from the lower-right block
    let mut s = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let id = if i == j { 1.0 } else { 0.0 };
            s[i][j] = 2.0 * m[i + 1][j + 1] - (1.0 - c) * id;
        }
    }
    if c > 1.0 - 1e-12 {
        // u = v: S = 2 u u^T
        let u = dominant_unit_column(&s)?;
        return Point::grass_from_pair(u, u);
    }
    if c < -1.0 + 1e-12 {
        // v = -u: S = -2 u u^T
        let neg = mat3_scale(&s, -1.0);
        let u = dominant_unit_column(&neg)?;
        return Point::grass_from_pair(u, scale3(&u, -1.0));
    }
    let what = normalize3(&w);
    // p = u+v is the (1+c)-eigenvector of S orthogonal to w
    let p_dir = eigvec_sym3(&s, 1.0 + c, &what)?;
    let p = scale3(&p_dir, (2.0 + 2.0 * c).sqrt());
    let m_dir = cross3(&p_dir, &what);
    let mut mm = scale3(&normalize3(&m_dir), (2.0 - 2.0 * c).sqrt());
    let mut u = scale3(&add3(&p, &mm), 0.5);
    let mut v = scale3(&sub3(&p, &mm), 0.5);
    if dot3(&cross3(&u, &v), &w) < 0.0 {
        mm = scale3(&mm, -1.0);
        u = scale3(&add3(&p, &mm), 0.5);
        v = scale3(&sub3(&p, &mm), 0.5);
    }
    Point::grass_from_pair(normalize3(&u), normalize3(&v))
}

fn dominant_unit_column(s: &Mat3) -> Result<Vec3> {
    let mut best = 0;
    let mut best_n = 0.0;
    for j in 0..3 {
        let col = [s[0][j], s[1][j], s[2][j]];
        let n = norm3(&col);
        if n > best_n {
            best_n = n;
            best = j;
        }
    }
    if best_n < 1e-12 {
        return Err(Error::DegenerateInput("zero projector block".into()));
    }
    Ok(normalize3(&[s[0][best], s[1][best], s[2][best]]))
}

/// Unit eigenvector of a symmetric 3x3 matrix for a known eigenvalue,
/// orthogonal to `avoid`.
fn eigvec_sym3(s: &Mat3, lambda: f64, avoid: &Vec3) -> Result<Vec3> {
    // (S - lambda I) x = 0: take the cross product of the two most
    // independent rows.
    let a = [
        [s[0][0] - lambda, s[0][1], s[0][2]],
        [s[1][0], s[1][1] - lambda, s[1][2]],
        [s[2][0], s[2][1], s[2][2] - lambda],
    ];
    let mut best: Option<Vec3> = None;
    let mut best_n = 0.0;
    for i in 0..3 {
        for j in (i + 1)..3 {
            let c = cross3(&a[i], &a[j]);
            let n = norm3(&c);
            if n > best_n {
                best_n = n;
                best = Some(c);
            }
        }
    }
    match best {
        Some(c) if best_n > 1e-12 => {
            let mut e = normalize3(&c);
            // remove any numerically spurious component along `avoid`
            let proj = dot3(&e, avoid);
            axpy3(&mut e, -proj, avoid);
            Ok(normalize3(&e))
        }
        _ => Err(Error::DegenerateInput(
            "could not extract projector eigenvector".into(),
        )),
    }
}

/// Deterministic uniform-ish random point (for tests and verification).
pub fn random_point<R: Rng>(m: ManifoldId, rng: &mut R) -> Point {
    match m {
        ManifoldId::Torus(d) => Point::Torus((0..d).map(|_| rng.gen::<f64>()).collect()),
        ManifoldId::Sphere2 => {
            let g = random_gaussian3(rng);
            Point::Sphere2(normalize3(&g))
        }
        ManifoldId::So3 => {
            let mut q = [0.0; 4];
            loop {
                for c in q.iter_mut() {
                    *c = gauss(rng);
                }
                let n = (q.iter().map(|x| x * x).sum::<f64>()).sqrt();
                if n > 1e-6 {
                    q.iter_mut().for_each(|c| *c /= n);
                    break;
                }
            }
            Point::So3(quat_to_matrix(&q))
        }
        ManifoldId::Grass24 => {
            let u = normalize3(&random_gaussian3(rng));
            let v = normalize3(&random_gaussian3(rng));
            Point::grass_from_pair(u, v).expect("unit by construction")
        }
    }
}

/// Random unit tangent vector at a point (for tests and verification).
pub fn random_tangent<R: Rng>(x: &Point, rng: &mut R) -> TangentVector {
    let components = match x {
        Point::Torus(p) => {
            let mut v: Vec<f64> = (0..p.len()).map(|_| gauss(rng)).collect();
            let n = v.iter().map(|c| c * c).sum::<f64>().sqrt().max(1e-300);
            v.iter_mut().for_each(|c| *c /= n);
            Tangent::Torus(v)
        }
        Point::Sphere2(p) => {
            let g = random_gaussian3(rng);
            let mut t = g;
            axpy3(&mut t, -dot3(&g, p), p);
            Tangent::Sphere2(normalize3(&t))
        }
        Point::So3(r) => {
            let w = random_gaussian3(rng);
            let omega = hat(&normalize3(&w));
            // |x hat(w)| = sqrt(2)|w|/(2 sqrt 2) = |w|/2, so scale by 2
            Tangent::So3(mat3_scale(&mat3_mul(r, &omega), 2.0))
        }
        Point::Grass24 { u, v } => {
            let mut a = random_gaussian3(rng);
            let pa = dot3(&a, u);
            axpy3(&mut a, -pa, u);
            let mut b = random_gaussian3(rng);
            let pb = dot3(&b, v);
            axpy3(&mut b, -pb, v);
            let n = (dot3(&a, &a) + dot3(&b, &b)).sqrt().max(1e-300);
            Tangent::Grass24 {
                du: scale3(&a, 1.0 / n),
                dv: scale3(&b, 1.0 / n),
            }
        }
    };
    TangentVector {
        base: x.clone(),
        components,
    }
}

fn gauss<R: Rng>(rng: &mut R) -> f64 {
    // Box-Muller; avoids a rand_distr dependency for this small need
    let u1: f64 = rng.gen::<f64>().max(1e-12);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn random_gaussian3<R: Rng>(rng: &mut R) -> Vec3 {
    [gauss(rng), gauss(rng), gauss(rng)]
}
