//! Constructive exact-quadrature curves: closed curves (optionally carrying
//! a density) whose push-forward measures integrate all eigenfunctions up
//! to a degree exactly. They serve as independent verification oracles for
//! the discrepancy pipeline and as optimizer initializations.
//!
//! * Torus: an Euler circuit through the d n^{d-1} axis-parallel unit
//!   circles over the n^d grid, n = r+1, constant speed d n^{d-1}.
//! * S^2: Gauss-Legendre latitude circles with arclength shares equal to
//!   their quadrature weights, in two orthogonal orientations, stitched
//!   into one closed curve by an Euler circuit through the intersection
//!   graph.
//! * S^d (d = 2, 3): great circles through the pole over an exact
//!   quadrature of S^{d-1}, carrying the |sin|^{d-1} density.
//! * SO(3): the S^3 construction at doubled degree composed with the double
//!   cover.

use crate::curve::DiscreteCurve;
use crate::error::{Error, Result};
use crate::linalg::*;
use crate::manifold::{ManifoldId, Point};
use crate::measure::SpectralMeasure;
use crate::spectral::{enumerate_frequencies, gauss_legendre, Basis, FrequencyIndex};
use num_complex::Complex64;

/// Space a parametrized curve lives in; S^3 appears only as the covering
/// space of SO(3).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveSpace {
    Manifold(ManifoldId),
    Sphere3,
}

/// Evaluation rule of one constant-speed piece.
#[derive(Debug, Clone)]
enum SegmentRule {
    /// straight torus line from `start` with direction `velocity` per unit t
    TorusLine { start: Vec<f64>, velocity: Vec<f64> },
    /// x(alpha) = center + cos(alpha) a + sin(alpha) b on S^2
    Arc3 {
        center: Vec3,
        a: Vec3,
        b: Vec3,
        alpha0: f64,
        dalpha: f64,
    },
    /// q(alpha) = cos(alpha) e + sin(alpha) w on S^3
    Arc4 {
        e: [f64; 4],
        w: [f64; 4],
        alpha0: f64,
        dalpha: f64,
    },
    /// covering-map image of an S^3 great circle
    So3Arc {
        e: [f64; 4],
        w: [f64; 4],
        alpha0: f64,
        dalpha: f64,
    },
    /// base segment reparametrized by the inverse cumulative density
    Warped {
        base: Box<Segment>,
        /// cumulative density share at the start of the base piece
        offset: f64,
        /// total mass (normalizer of the cumulative integral)
        beta: f64,
        piece: DensityPiece,
    },
}

/// One constant-speed piece of an analytic curve.
#[derive(Debug, Clone)]
pub struct Segment {
    pub t0: f64,
    pub t1: f64,
    pub speed: f64,
    rule: SegmentRule,
}

impl Segment {
    /// Ambient coordinates at curve parameter t in [t0, t1].
    fn eval(&self, t: f64) -> Vec<f64> {
        let s = if self.t1 > self.t0 {
            ((t - self.t0) / (self.t1 - self.t0)).clamp(0.0, 1.0)
        } else {
            0.0
        };
        match &self.rule {
            SegmentRule::TorusLine { start, velocity } => start
                .iter()
                .zip(velocity)
                .map(|(p, v)| crate::manifold::wrap01(p + v * (t - self.t0)))
                .collect(),
            SegmentRule::Arc3 {
                center,
                a,
                b,
                alpha0,
                dalpha,
            } => {
                let alpha = alpha0 + s * dalpha;
                let (sa, ca) = alpha.sin_cos();
                vec![
                    center[0] + ca * a[0] + sa * b[0],
                    center[1] + ca * a[1] + sa * b[1],
                    center[2] + ca * a[2] + sa * b[2],
                ]
            }
            SegmentRule::Arc4 { e, w, alpha0, dalpha } => {
                let alpha = alpha0 + s * dalpha;
                let (sa, ca) = alpha.sin_cos();
                (0..4).map(|c| ca * e[c] + sa * w[c]).collect()
            }
            SegmentRule::So3Arc { e, w, alpha0, dalpha } => {
                let alpha = alpha0 + s * dalpha;
                let (sa, ca) = alpha.sin_cos();
                let q = [
                    ca * e[0] + sa * w[0],
                    ca * e[1] + sa * w[1],
                    ca * e[2] + sa * w[2],
                    ca * e[3] + sa * w[3],
                ];
                let m = quat_to_matrix(&q);
                m.iter().flat_map(|row| row.iter().copied()).collect()
            }
            SegmentRule::Warped {
                base,
                offset,
                beta,
                piece,
            } => {
                let target = t.clamp(self.t0, self.t1);
                let s_base = invert_cumulative(piece, *offset, *beta, target, base.t0, base.t1);
                base.eval(s_base)
            }
        }
    }
}

/// A closed curve assembled from constant-speed pieces whose parameter
/// intervals partition [0, 1].
#[derive(Debug, Clone)]
pub struct AnalyticCurve {
    pub space: CurveSpace,
    segments: Vec<Segment>,
    /// latitude-circle shares of the sphere constructions (geometry plus
    /// parameter share), used by the per-circle exactness checks
    circles: Vec<CircleShare>,
}

/// One full circle of a sphere construction with its parameter share.
#[derive(Debug, Clone)]
pub struct CircleShare {
    pub center: Vec3,
    pub a: Vec3,
    pub b: Vec3,
    pub share: f64,
}

impl AnalyticCurve {
    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn circles(&self) -> &[CircleShare] {
        &self.circles
    }

    /// Ambient coordinates at parameter t (wrapped into [0,1)).
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let t = t - t.floor();
        // binary search for the containing segment
        let mut lo = 0usize;
        let mut hi = self.segments.len();
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.segments[mid].t0 <= t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        self.segments[lo].eval(t)
    }

    /// Manifold point at parameter t (errors on the internal S^3 space).
    pub fn point_at(&self, t: f64) -> Result<Point> {
        match self.space {
            CurveSpace::Manifold(m) => Point::from_flat_coords(m, &self.eval(t)),
            CurveSpace::Sphere3 => Err(Error::UnsupportedManifold(
                "S^3 curves are internal to the covering construction".into(),
            )),
        }
    }

    /// Largest per-segment speed (the Lipschitz constant for piecewise
    /// constant-speed curves).
    pub fn lipschitz(&self) -> f64 {
        self.segments.iter().fold(0.0, |m, s| m.max(s.speed))
    }

    /// Total length.
    pub fn length(&self) -> f64 {
        self.segments.iter().map(|s| s.speed * (s.t1 - s.t0)).sum()
    }

    /// Sample the curve at parameters i/N, i = 1..N.
    pub fn discretize(&self, n: usize) -> Result<DiscreteCurve> {
        if n < 2 {
            return Err(Error::DegenerateInput("need at least two samples".into()));
        }
        let m = match self.space {
            CurveSpace::Manifold(m) => m,
            CurveSpace::Sphere3 => {
                return Err(Error::UnsupportedManifold(
                    "S^3 curves are internal to the covering construction".into(),
                ))
            }
        };
        let pts: Result<Vec<Point>> = (1..=n)
            .map(|i| Point::from_flat_coords(m, &self.eval(i as f64 / n as f64)))
            .collect();
        DiscreteCurve::new(m, pts?)
    }

    /// Fourier coefficients of the Lebesgue push-forward (line integral with
    /// the curve's own parametrization).
    pub fn line_coefficients(&self, r: u32) -> Result<SpectralMeasure> {
        let m = match self.space {
            CurveSpace::Manifold(m) => m,
            CurveSpace::Sphere3 => {
                return Err(Error::UnsupportedManifold(
                    "no eigenbasis is exposed on the internal S^3 space".into(),
                ))
            }
        };
        let basis = Basis::new(m, r);
        let mut acc = vec![Complex64::new(0.0, 0.0); basis.len()];
        match m {
            ManifoldId::Torus(_) => {
                let idxs = basis.indices();
                for seg in &self.segments {
                    if let SegmentRule::TorusLine { start, velocity } = &seg.rule {
                        let dt = seg.t1 - seg.t0;
                        torus_segment_mean(idxs, start, velocity, dt, &mut acc);
                    } else {
                        return Err(Error::CurveConstruction(
                            "torus curve with a non-line segment".into(),
                        ));
                    }
                }
            }
            _ => {
                let nodes = (4 * r as usize + 8).max(64);
                let (gl_x, gl_w) = gauss_legendre(nodes);
                let mut vals = vec![Complex64::new(0.0, 0.0); basis.len()];
                for seg in &self.segments {
                    let dt = seg.t1 - seg.t0;
                    for (x, w) in gl_x.iter().zip(&gl_w) {
                        let t = seg.t0 + 0.5 * (x + 1.0) * dt;
                        let p = Point::from_flat_coords(m, &seg.eval(t))?;
                        basis.eval(&p, &mut vals)?;
                        let wgt = 0.5 * w * dt;
                        for (a, v) in acc.iter_mut().zip(&vals) {
                            *a += wgt * v.conj();
                        }
                    }
                }
            }
        }
        Ok(SpectralMeasure {
            manifold: m,
            degree: r,
            coefficients: acc,
        })
    }
}

/// Accumulate the exact per-segment means of conj(phi_k) along a torus line.
fn torus_segment_mean(
    idxs: &[FrequencyIndex],
    start: &[f64],
    velocity: &[f64],
    dt: f64,
    acc: &mut [Complex64],
) {
    let tp = -2.0 * std::f64::consts::PI;
    for (slot, idx) in acc.iter_mut().zip(idxs) {
        if let FrequencyIndex::Torus(k) = idx {
            let phase0: f64 = k.iter().zip(start).map(|(&kc, &x)| kc as f64 * x).sum();
            let rate: f64 = k
                .iter()
                .zip(velocity)
                .map(|(&kc, &v)| kc as f64 * v)
                .sum::<f64>()
                * dt;
            let begin = Complex64::from_polar(1.0, tp * phase0);
            let mean = if rate.abs() < 1e-14 {
                begin
            } else {
                let full = Complex64::from_polar(1.0, tp * rate);
                begin * (full - 1.0) / Complex64::new(0.0, tp * rate)
            };
            *slot += dt * mean;
        }
    }
}

// ---------------------------------------------------------------------------
// Densities on [0,1]
// ---------------------------------------------------------------------------

/// density(t) = amp * |sin(freq (t - t0) + phase)|^pow on [t0, t1];
/// constant when pow = 0.
#[derive(Debug, Clone)]
pub struct DensityPiece {
    pub t0: f64,
    pub t1: f64,
    pub amp: f64,
    pub freq: f64,
    pub phase: f64,
    pub pow: u32,
}

impl DensityPiece {
    pub fn value(&self, t: f64) -> f64 {
        if self.pow == 0 {
            return self.amp;
        }
        let s = (self.freq * (t - self.t0) + self.phase).sin().abs();
        self.amp * s.powi(self.pow as i32)
    }

    /// Integral over [t0, upto] by 64-node Gauss-Legendre (the integrand is
    /// smooth within a piece).
    fn integral_to(&self, upto: f64) -> f64 {
        let hi = upto.clamp(self.t0, self.t1);
        if hi <= self.t0 {
            return 0.0;
        }
        let (gl_x, gl_w) = cached_gl64();
        let half = 0.5 * (hi - self.t0);
        let mid = 0.5 * (hi + self.t0);
        gl_x
            .iter()
            .zip(gl_w)
            .map(|(x, w)| w * self.value(mid + half * x))
            .sum::<f64>()
            * half
    }
}

fn cached_gl64() -> (&'static [f64], &'static [f64]) {
    use std::sync::OnceLock;
    static CELL: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    let (x, w) = CELL.get_or_init(|| gauss_legendre(64));
    (x, w)
}

/// A piecewise density on [0,1] attached to an analytic curve.
#[derive(Debug, Clone)]
pub struct CurveDensity {
    pub pieces: Vec<DensityPiece>,
}

impl CurveDensity {
    pub fn value(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, 1.0);
        for p in &self.pieces {
            if t >= p.t0 && t <= p.t1 {
                return p.value(t);
            }
        }
        0.0
    }

    pub fn total_mass(&self) -> f64 {
        self.pieces.iter().map(|p| p.integral_to(p.t1)).sum()
    }

    /// Cumulative integral up to t, unnormalized.
    pub fn cumulative(&self, t: f64) -> f64 {
        let mut sum = 0.0;
        for p in &self.pieces {
            if t >= p.t1 {
                sum += p.integral_to(p.t1);
            } else if t > p.t0 {
                sum += p.integral_to(t);
                break;
            } else {
                break;
            }
        }
        sum
    }
}

/// Solve offset + integral(piece, s)/beta = target for s in [s0, s1] by
/// bisection with Newton refinement, tolerance 1e-12 in the parameter.
fn invert_cumulative(
    piece: &DensityPiece,
    offset: f64,
    beta: f64,
    target: f64,
    s0: f64,
    s1: f64,
) -> f64 {
    let g = |s: f64| offset + piece.integral_to(s) / beta;
    let mut lo = s0;
    let mut hi = s1;
    let mut s = 0.5 * (lo + hi);
    for _ in 0..200 {
        let gs = g(s);
        if (gs - target).abs() < 1e-15 {
            break;
        }
        if gs > target {
            hi = s;
        } else {
            lo = s;
        }
        // Newton step when the derivative is usable, else bisection
        let dg = piece.value(s) / beta;
        let newton = if dg > 1e-12 { s - (gs - target) / dg } else { f64::NAN };
        s = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo < 1e-12 {
            break;
        }
    }
    s
}

// ---------------------------------------------------------------------------
// Euler circuits
// ---------------------------------------------------------------------------

/// Closed walk through every edge of a connected even-degree multigraph
/// exactly once (Hierholzer, iterative). Edges are (u, v) pairs, self-loops
/// allowed. Returns the traversal as (edge id, traversed forward) starting
/// at the first edge's tail, or None if the graph has a vertex of odd
/// degree or the edge support is disconnected. The adjacency order is fixed
/// by edge id, so the circuit is deterministic.
pub fn euler_circuit(num_vertices: usize, edges: &[(usize, usize)]) -> Option<Vec<(usize, bool)>> {
    if edges.is_empty() {
        return None;
    }
    let mut adjacency: Vec<Vec<(usize, usize, bool)>> = vec![Vec::new(); num_vertices];
    for (id, &(u, v)) in edges.iter().enumerate() {
        adjacency[u].push((id, v, true));
        if u != v {
            adjacency[v].push((id, u, false));
        } else {
            // a self-loop contributes degree two but one traversal
            adjacency[u].push((id, u, false));
        }
    }
    for adj in &adjacency {
        if adj.len() % 2 != 0 {
            return None;
        }
    }
    for adj in adjacency.iter_mut() {
        adj.sort_by_key(|e| e.0);
    }
    let start = edges[0].0;
    let mut next = vec![0usize; num_vertices];
    let mut used = vec![false; edges.len()];
    // stack entries carry the edge used to arrive; the reversed pop order
    // of those edges is the circuit
    let mut stack: Vec<(usize, Option<(usize, bool)>)> = vec![(start, None)];
    let mut out_rev: Vec<(usize, bool)> = Vec::with_capacity(edges.len());
    while let Some(&(v, via)) = stack.last() {
        let mut advanced = false;
        while next[v] < adjacency[v].len() {
            let (id, to, forward) = adjacency[v][next[v]];
            next[v] += 1;
            if used[id] {
                continue;
            }
            used[id] = true;
            stack.push((to, Some((id, forward))));
            advanced = true;
            break;
        }
        if !advanced {
            stack.pop();
            if let Some(e) = via {
                out_rev.push(e);
            }
        }
    }
    if out_rev.len() != edges.len() {
        return None;
    }
    out_rev.reverse();
    Some(out_rev)
}

// ---------------------------------------------------------------------------
// Torus construction
// ---------------------------------------------------------------------------

/// Closed curve of constant speed d n^{d-1}, n = r+1, through all
/// d n^{d-1} axis-parallel unit circles over the n^d grid; its Lebesgue
/// push-forward integrates every e^{2 pi i <k, .>} with |k|_inf <= r
/// exactly.
pub fn torus_quadrature_curve(d: usize, r: u32) -> Result<AnalyticCurve> {
    if d < 2 {
        return Err(Error::InvalidConfig(
            "the grid circuit needs dimension at least 2".into(),
        ));
    }
    let n = r as usize + 1;
    let num_vertices = n.pow(d as u32);
    let vertex_id = |idx: &[usize]| -> usize {
        let mut id = 0;
        for &c in idx {
            id = id * n + c;
        }
        id
    };
    let mut edges: Vec<(usize, usize)> = Vec::with_capacity(d * num_vertices);
    let mut edge_geometry: Vec<(Vec<usize>, usize)> = Vec::new(); // (grid index, direction)
    let mut idx = vec![0usize; d];
    for _ in 0..num_vertices {
        for c in 0..d {
            let mut to = idx.clone();
            to[c] = (to[c] + 1) % n;
            edges.push((vertex_id(&idx), vertex_id(&to)));
            edge_geometry.push((idx.clone(), c));
        }
        for c in (0..d).rev() {
            idx[c] += 1;
            if idx[c] < n {
                break;
            }
            idx[c] = 0;
        }
    }
    let walk = euler_circuit(num_vertices, &edges).ok_or_else(|| {
        Error::CurveConstruction("grid circuit has no Euler circuit".into())
    })?;
    let speed = d as f64 * (n as f64).powi(d as i32 - 1);
    let dt = 1.0 / edges.len() as f64;
    let mut segments = Vec::with_capacity(edges.len());
    for (s, &(id, forward)) in walk.iter().enumerate() {
        let (grid, c) = &edge_geometry[id];
        let mut start: Vec<f64> = grid.iter().map(|&g| g as f64 / n as f64).collect();
        let mut velocity = vec![0.0; d];
        // each edge spans 1/n along its axis over parameter dt
        let step = 1.0 / n as f64;
        if forward {
            velocity[*c] = step / dt;
        } else {
            start[*c] = (start[*c] + step) % 1.0;
            velocity[*c] = -step / dt;
        }
        segments.push(Segment {
            t0: s as f64 * dt,
            t1: (s + 1) as f64 * dt,
            speed,
            rule: SegmentRule::TorusLine { start, velocity },
        });
    }
    Ok(AnalyticCurve {
        space: CurveSpace::Manifold(ManifoldId::Torus(d)),
        segments,
        circles: Vec::new(),
    })
}

// ---------------------------------------------------------------------------
// S^2 Gauss-Legendre latitude-circle construction
// ---------------------------------------------------------------------------

/// Closed piecewise-circular curve on S^2 whose Lebesgue push-forward
/// integrates all spherical harmonics of degree <= r exactly: latitude
/// circles at the Gauss-Legendre nodes with arclength shares equal to the
/// quadrature weights, in two orthogonal orientations, stitched into one
/// curve through the intersection graph.
pub fn sphere2_quadrature_curve(r: u32) -> Result<AnalyticCurve> {
    let n = (r as usize + 2) / 2; // ceil((r+1)/2)
    let (gl_nodes, gl_w) = gauss_legendre(n);

    // family 0: circles with axis e1; family 1: the sphere turned by the
    // rotation swapping the e1 and e3 axes
    struct Circle {
        center: Vec3,
        a: Vec3,
        b: Vec3,
        share: f64,
    }
    let mut circles: Vec<Circle> = Vec::new();
    for (u, w) in gl_nodes.iter().zip(&gl_w) {
        let s = (1.0 - u * u).max(0.0).sqrt();
        let share = w / 2.0 / 2.0; // omega_j = w_j/2, halved again across families
        circles.push(Circle {
            center: [*u, 0.0, 0.0],
            a: [0.0, s, 0.0],
            b: [0.0, 0.0, s],
            share,
        });
    }
    for (u, w) in gl_nodes.iter().zip(&gl_w) {
        let s = (1.0 - u * u).max(0.0).sqrt();
        let share = w / 2.0 / 2.0;
        // image of the family-0 circle under (x1,x2,x3) -> (x3, -x2, x1)
        circles.push(Circle {
            center: [0.0, 0.0, *u],
            a: [0.0, -s, 0.0],
            b: [s, 0.0, 0.0],
            share,
        });
    }

    // intersection points between the two families
    let nc = circles.len();
    let mut vertices: Vec<Vec3> = Vec::new();
    let vertex_of = |p: Vec3, vertices: &mut Vec<Vec3>| -> usize {
        for (i, q) in vertices.iter().enumerate() {
            if norm3(&sub3(q, &p)) < 1e-9 {
                return i;
            }
        }
        vertices.push(p);
        vertices.len() - 1
    };
    // per circle: sorted list of (angle, vertex)
    let mut cuts: Vec<Vec<(f64, usize)>> = vec![Vec::new(); nc];
    for i in 0..n {
        for j in n..nc {
            let ui = circles[i].center[0];
            let uj = circles[j].center[2];
            let x2sq = 1.0 - ui * ui - uj * uj;
            if x2sq < 1e-12 {
                if x2sq > -1e-12 {
                    return Err(Error::CurveConstruction(
                        "tangential circle intersection".into(),
                    ));
                }
                continue;
            }
            for sign in [1.0, -1.0] {
                let p = [ui, sign * x2sq.sqrt(), uj];
                let v = vertex_of(p, &mut vertices);
                for c in [i, j] {
                    let circ = &circles[c];
                    let rel = sub3(&p, &circ.center);
                    let ca = dot3(&rel, &circ.a) / dot3(&circ.a, &circ.a);
                    let sa = dot3(&rel, &circ.b) / dot3(&circ.b, &circ.b);
                    let mut angle = sa.atan2(ca);
                    if angle < 0.0 {
                        angle += 2.0 * std::f64::consts::PI;
                    }
                    cuts[c].push((angle, v));
                }
            }
        }
    }
    for (c, list) in cuts.iter_mut().enumerate() {
        if list.is_empty() {
            return Err(Error::CurveConstruction(format!(
                "circle {c} does not meet the other family"
            )));
        }
        list.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    }

    // arcs between consecutive cut points form the multigraph edges
    struct Arc {
        circle: usize,
        alpha0: f64,
        dalpha: f64,
    }
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut arcs: Vec<Arc> = Vec::new();
    for (c, list) in cuts.iter().enumerate() {
        let m = list.len();
        for t in 0..m {
            let (a0, v0) = list[t];
            let (mut a1, v1) = list[(t + 1) % m];
            if t + 1 == m {
                a1 += 2.0 * std::f64::consts::PI;
            }
            edges.push((v0, v1));
            arcs.push(Arc {
                circle: c,
                alpha0: a0,
                dalpha: a1 - a0,
            });
        }
    }
    let walk = euler_circuit(vertices.len(), &edges).ok_or_else(|| {
        Error::CurveConstruction(
            "latitude-circle union is not connected with even degrees".into(),
        )
    })?;

    let mut segments = Vec::with_capacity(walk.len());
    let mut t = 0.0;
    for &(id, forward) in &walk {
        let arc = &arcs[id];
        let circ = &circles[arc.circle];
        let dt = arc.dalpha / (2.0 * std::f64::consts::PI) * circ.share;
        let radius = norm3(&circ.a);
        let speed = radius * arc.dalpha / dt; // = 2 pi radius / share
        let (alpha0, dalpha) = if forward {
            (arc.alpha0, arc.dalpha)
        } else {
            (arc.alpha0 + arc.dalpha, -arc.dalpha)
        };
        segments.push(Segment {
            t0: t,
            t1: t + dt,
            speed,
            rule: SegmentRule::Arc3 {
                center: circ.center,
                a: circ.a,
                b: circ.b,
                alpha0,
                dalpha,
            },
        });
        t += dt;
    }
    if (t - 1.0).abs() > 1e-9 {
        return Err(Error::CurveConstruction(format!(
            "parameter shares sum to {t}, expected 1"
        )));
    }
    // snap the final endpoint exactly
    if let Some(last) = segments.last_mut() {
        last.t1 = 1.0;
    }
    let circle_shares = circles
        .iter()
        .map(|c| CircleShare {
            center: c.center,
            a: c.a,
            b: c.b,
            share: c.share,
        })
        .collect();
    Ok(AnalyticCurve {
        space: CurveSpace::Manifold(ManifoldId::Sphere2),
        segments,
        circles: circle_shares,
    })
}

// ---------------------------------------------------------------------------
// S^d great-circle construction with density, and the SO(3) lift
// ---------------------------------------------------------------------------

/// Exact degree-r quadrature on S^{d-1} used by the great-circle
/// construction: equispaced points on the circle for d = 2, a
/// Gauss-Legendre x equispaced product rule on S^2 for d = 3.
fn lower_sphere_quadrature(d: usize, r: u32) -> Result<Vec<(Vec<f64>, f64)>> {
    match d {
        2 => {
            let m = 2 * r as usize + 1;
            Ok((0..m)
                .map(|i| {
                    let phi = 2.0 * std::f64::consts::PI * i as f64 / m as f64;
                    (vec![phi.cos(), phi.sin()], 1.0 / m as f64)
                })
                .collect())
        }
        3 => {
            let ng = (r as usize + 2) / 2;
            let (gl_nodes, gl_w) = gauss_legendre(ng);
            let mp = 2 * r as usize + 1;
            let mut out = Vec::with_capacity(ng * mp);
            for (u, w) in gl_nodes.iter().zip(&gl_w) {
                let s = (1.0 - u * u).max(0.0).sqrt();
                for i in 0..mp {
                    let phi = 2.0 * std::f64::consts::PI * i as f64 / mp as f64;
                    out.push((
                        vec![*u, s * phi.cos(), s * phi.sin()],
                        w / 2.0 / mp as f64,
                    ));
                }
            }
            Ok(out)
        }
        _ => Err(Error::UnsupportedManifold(format!(
            "no curve construction for S^{d}"
        ))),
    }
}

/// Closed constant-speed curve through great circles (cos a, sin a x_i)
/// over an exact quadrature {(x_i, a_i)} of S^{d-1}, together with the
/// density a_i c_d pi n |sin|^{d-1}; the weighted push-forward integrates
/// all degree <= r eigenfunctions of S^d exactly.
pub fn sphere_d_curve_with_density(d: usize, r: u32) -> Result<(AnalyticCurve, CurveDensity)> {
    if d != 2 && d != 3 {
        return Err(Error::UnsupportedManifold(format!(
            "no curve-with-density construction for S^{d}"
        )));
    }
    let nodes = lower_sphere_quadrature(d, r)?;
    let n = nodes.len();
    let c_d = match d {
        2 => 0.5,
        3 => 2.0 / std::f64::consts::PI,
        _ => unreachable!(),
    };
    let speed = 2.0 * std::f64::consts::PI * n as f64;
    let mut segments = Vec::with_capacity(2 * n);
    let mut pieces = Vec::with_capacity(2 * n);
    for (i, (x, a_i)) in nodes.iter().enumerate() {
        let t0 = i as f64 / n as f64;
        let amp = a_i * c_d * std::f64::consts::PI * n as f64;
        // split each full circle at alpha = pi so the density is smooth
        // within each piece
        for half in 0..2 {
            let h0 = t0 + half as f64 * 0.5 / n as f64;
            let h1 = t0 + (half + 1) as f64 * 0.5 / n as f64;
            let alpha0 = half as f64 * std::f64::consts::PI;
            let rule = match d {
                2 => SegmentRule::Arc3 {
                    center: [0.0; 3],
                    a: [1.0, 0.0, 0.0],
                    b: [0.0, x[0], x[1]],
                    alpha0,
                    dalpha: std::f64::consts::PI,
                },
                3 => SegmentRule::Arc4 {
                    e: [1.0, 0.0, 0.0, 0.0],
                    w: [0.0, x[0], x[1], x[2]],
                    alpha0,
                    dalpha: std::f64::consts::PI,
                },
                _ => unreachable!(),
            };
            segments.push(Segment {
                t0: h0,
                t1: h1,
                speed,
                rule,
            });
            pieces.push(DensityPiece {
                t0: h0,
                t1: h1,
                amp,
                freq: speed, // 2 pi n
                phase: alpha0,
                pow: (d - 1) as u32,
            });
        }
    }
    let space = match d {
        2 => CurveSpace::Manifold(ManifoldId::Sphere2),
        3 => CurveSpace::Sphere3,
        _ => unreachable!(),
    };
    Ok((
        AnalyticCurve {
            space,
            segments,
            circles: Vec::new(),
        },
        CurveDensity { pieces },
    ))
}

/// Curve-with-density on SO(3): the S^3 construction at doubled degree
/// composed with the covering map.
pub fn so3_quadrature_curve(r: u32) -> Result<(AnalyticCurve, CurveDensity)> {
    let (s3, density) = sphere_d_curve_with_density(3, 2 * r)?;
    let segments = s3
        .segments
        .into_iter()
        .map(|seg| {
            let rule = match seg.rule {
                SegmentRule::Arc4 { e, w, alpha0, dalpha } => SegmentRule::So3Arc {
                    e,
                    w,
                    alpha0,
                    dalpha,
                },
                other => other,
            };
            Segment { rule, ..seg }
        })
        .collect();
    Ok((
        AnalyticCurve {
            space: CurveSpace::Manifold(ManifoldId::So3),
            segments,
            circles: Vec::new(),
        },
        density,
    ))
}

// ---------------------------------------------------------------------------
// Reparametrization by a density (push-forward equivalence)
// ---------------------------------------------------------------------------

/// Reparametrize so that the Lebesgue push-forward of the result equals the
/// density-weighted push-forward of the input: gamma o g^{-1} with
/// g(t) = cumulative(density)(t) / total mass. Density pieces must align
/// with curve segment boundaries.
pub fn reparametrize_constant_speed(
    curve: &AnalyticCurve,
    density: &CurveDensity,
) -> Result<AnalyticCurve> {
    let beta = density.total_mass();
    if !(beta > 0.0) {
        return Err(Error::NotInvertible("density has zero total mass".into()));
    }
    for p in &density.pieces {
        if p.integral_to(p.t1) <= 0.0 {
            return Err(Error::NotInvertible(
                "density vanishes on a whole piece".into(),
            ));
        }
        if p.amp < 0.0 {
            return Err(Error::NotInvertible("negative density".into()));
        }
    }
    // pieces and segments must share boundaries
    if density.pieces.len() != curve.segments.len() {
        return Err(Error::InvalidConfig(
            "density pieces do not align with curve segments".into(),
        ));
    }
    let mut segments = Vec::with_capacity(curve.segments.len());
    let mut cum = 0.0;
    for (seg, piece) in curve.segments.iter().zip(&density.pieces) {
        if (seg.t0 - piece.t0).abs() > 1e-12 || (seg.t1 - piece.t1).abs() > 1e-12 {
            return Err(Error::InvalidConfig(
                "density pieces do not align with curve segments".into(),
            ));
        }
        let mass = piece.integral_to(piece.t1);
        let new_t0 = cum / beta;
        let new_t1 = (cum + mass) / beta;
        // sampled speed bound of the warped piece
        let mut max_speed: f64 = 0.0;
        for j in 1..16 {
            let s = seg.t0 + (seg.t1 - seg.t0) * j as f64 / 16.0;
            let rho = piece.value(s);
            if rho > 1e-12 {
                max_speed = max_speed.max(seg.speed * beta / rho);
            }
        }
        segments.push(Segment {
            t0: new_t0,
            t1: new_t1,
            speed: max_speed,
            rule: SegmentRule::Warped {
                base: Box::new(seg.clone()),
                offset: new_t0,
                beta,
                piece: piece.clone(),
            },
        });
        cum += mass;
    }
    if let Some(last) = segments.last_mut() {
        last.t1 = 1.0;
    }
    Ok(AnalyticCurve {
        space: curve.space,
        segments,
        circles: curve.circles.clone(),
    })
}

// ---------------------------------------------------------------------------
// Weighted integrals along a curve
// ---------------------------------------------------------------------------

/// Integral of f over the density-weighted curve: per-piece Gauss-Legendre
/// on the smooth pieces. `f` receives ambient coordinates.
pub fn weighted_integral<F: Fn(&[f64]) -> f64>(
    curve: &AnalyticCurve,
    density: &CurveDensity,
    nodes: usize,
    f: F,
) -> f64 {
    let (gl_x, gl_w) = gauss_legendre(nodes.max(8));
    let mut sum = 0.0;
    for (seg, piece) in curve.segments.iter().zip(&density.pieces) {
        let half = 0.5 * (seg.t1 - seg.t0);
        let mid = 0.5 * (seg.t1 + seg.t0);
        for (x, w) in gl_x.iter().zip(&gl_w) {
            let t = mid + half * x;
            sum += w * half * piece.value(t) * f(&seg.eval(t));
        }
    }
    sum
}

/// Fourier coefficients of the density-weighted push-forward.
pub fn weighted_line_coefficients(
    curve: &AnalyticCurve,
    density: &CurveDensity,
    r: u32,
) -> Result<SpectralMeasure> {
    let m = match curve.space {
        CurveSpace::Manifold(m) => m,
        CurveSpace::Sphere3 => {
            return Err(Error::UnsupportedManifold(
                "no eigenbasis is exposed on the internal S^3 space".into(),
            ))
        }
    };
    let basis = Basis::new(m, r);
    let nodes = (4 * r as usize + 8).max(64);
    let (gl_x, gl_w) = gauss_legendre(nodes);
    let mut acc = vec![Complex64::new(0.0, 0.0); basis.len()];
    let mut vals = vec![Complex64::new(0.0, 0.0); basis.len()];
    for (seg, piece) in curve.segments.iter().zip(&density.pieces) {
        let half = 0.5 * (seg.t1 - seg.t0);
        let mid = 0.5 * (seg.t1 + seg.t0);
        for (x, w) in gl_x.iter().zip(&gl_w) {
            let t = mid + half * x;
            let p = Point::from_flat_coords(m, &seg.eval(t))?;
            basis.eval(&p, &mut vals)?;
            let wgt = w * half * piece.value(t);
            for (a, v) in acc.iter_mut().zip(&vals) {
                *a += wgt * v.conj();
            }
        }
    }
    Ok(SpectralMeasure {
        manifold: m,
        degree: r,
        coefficients: acc,
    })
}

/// Per-circle exactness defect of a latitude-circle curve: the largest
/// |integral of phi_k| over 1 <= k <= r, evaluated with `nodes` equispaced
/// points per circle (exact for the trigonometric integrands involved).
pub fn sphere_circle_exactness_defect(curve: &AnalyticCurve, r: u32, nodes: usize) -> Result<f64> {
    if curve.circles.is_empty() {
        return Err(Error::CurveConstruction(
            "curve carries no circle decomposition".into(),
        ));
    }
    let m = ManifoldId::Sphere2;
    let basis = Basis::new(m, r);
    let mut acc = vec![Complex64::new(0.0, 0.0); basis.len()];
    let mut vals = vec![Complex64::new(0.0, 0.0); basis.len()];
    for circ in &curve.circles {
        for j in 0..nodes {
            let alpha = 2.0 * std::f64::consts::PI * j as f64 / nodes as f64;
            let (sa, ca) = alpha.sin_cos();
            let p = Point::Sphere2([
                circ.center[0] + ca * circ.a[0] + sa * circ.b[0],
                circ.center[1] + ca * circ.a[1] + sa * circ.b[1],
                circ.center[2] + ca * circ.a[2] + sa * circ.b[2],
            ]);
            basis.eval(&p, &mut vals)?;
            let w = circ.share / nodes as f64;
            for (a, v) in acc.iter_mut().zip(&vals) {
                *a += w * v.conj();
            }
        }
    }
    let idxs = enumerate_frequencies(m, r);
    let mut worst = 0.0f64;
    for (c, idx) in acc.iter().zip(&idxs) {
        if let FrequencyIndex::Sphere { degree, .. } = idx {
            if *degree >= 1 {
                worst = worst.max(c.norm());
            }
        }
    }
    Ok(worst)
}
