//! Closed discrete curves: the optimization variable.

use crate::error::{Error, Result};
use crate::manifold::{distance, ManifoldId, Point};

/// An ordered closed list of points on one manifold; the predecessor of the
/// first point is the last point.
#[derive(Debug, Clone)]
pub struct DiscreteCurve {
    manifold: ManifoldId,
    points: Vec<Point>,
}

impl DiscreteCurve {
    pub fn new(manifold: ManifoldId, points: Vec<Point>) -> Result<DiscreteCurve> {
        if points.is_empty() {
            return Err(Error::DegenerateInput("curve needs at least one point".into()));
        }
        for p in &points {
            if p.manifold() != manifold {
                return Err(Error::ManifoldMismatch(manifold.tag(), p.manifold().tag()));
            }
        }
        Ok(DiscreteCurve { manifold, points })
    }

    pub fn manifold(&self) -> ManifoldId {
        self.manifold
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Point> {
        self.points
    }

    /// Segment lengths (dist(x_{i-1}, x_i) for i = 1..N, with x_0 = x_N).
    pub fn segment_lengths(&self) -> Result<Vec<f64>> {
        let n = self.points.len();
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let prev = &self.points[(i + n - 1) % n];
            out.push(distance(prev, &self.points[i])?);
        }
        Ok(out)
    }

    /// Total closed length.
    pub fn length(&self) -> Result<f64> {
        Ok(self.segment_lengths()?.iter().sum())
    }

    /// N times the largest segment distance.
    pub fn max_speed(&self) -> Result<f64> {
        let n = self.points.len() as f64;
        Ok(self
            .segment_lengths()?
            .iter()
            .fold(0.0f64, |a, &b| a.max(b))
            * n)
    }
}
