//! Domains, boundary segments and their sample points, corner pole placement.
//!
//! A [`Domain`] is an outer loop of [`Segment`]s traversed counterclockwise
//! (fluid on the left) plus holes traversed clockwise. Each segment carries its
//! own boundary conditions and sampling rule.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::Arc;

use crate::stokes_system::BoundaryConditionSpec;
use crate::C64;

/// Complex coordinate `x + iy` of a point in the plane.
pub type PlanePoint = C64;

/// Tolerance on consecutive segment endpoints.
pub const JOIN_TOL: f64 = 1e-12;

#[derive(Debug, thiserror::Error)]
pub enum GeometryError {
    #[error("degenerate segment '{0}' (zero length)")]
    DegenerateSegment(String),
    #[error("segment needs at least 2 samples, '{label}' has {n}")]
    TooFewSamples { label: String, n: usize },
    #[error("boundary loop is not closed: gap {gap:e} after segment '{label}'")]
    OpenLoop { label: String, gap: f64 },
    #[error("{0} loop has the wrong orientation")]
    Orientation(&'static str),
    #[error("collinear corner at {0}: no exterior bisector")]
    Collinear(PlanePoint),
    #[error("Laurent center {0} of hole {1} is not inside the hole")]
    CenterOutsideHole(PlanePoint, usize),
    #[error("invalid geometry: {0}")]
    Invalid(String),
}

/// A smooth parametric curve on `t ∈ [0, 1]`.
#[derive(Clone)]
pub struct ParamCurve {
    pub name: String,
    func: Arc<dyn Fn(f64) -> PlanePoint + Send + Sync>,
}

impl ParamCurve {
    pub fn new(
        name: impl Into<String>,
        func: impl Fn(f64) -> PlanePoint + Send + Sync + 'static,
    ) -> Self {
        Self { name: name.into(), func: Arc::new(func) }
    }

    pub fn at(&self, t: f64) -> PlanePoint {
        (self.func)(t)
    }
}

impl fmt::Debug for ParamCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ParamCurve({})", self.name)
    }
}

/// Ordered point list interpolated linearly in arclength.
#[derive(Debug, Clone)]
pub struct Polyline {
    points: Vec<PlanePoint>,
    cumulative: Vec<f64>,
}

impl Polyline {
    pub fn new(points: Vec<PlanePoint>) -> Self {
        let mut cumulative = Vec::with_capacity(points.len());
        let mut acc = 0.0;
        for (i, p) in points.iter().enumerate() {
            if i > 0 {
                acc += (p - points[i - 1]).norm();
            }
            cumulative.push(acc);
        }
        Self { points, cumulative }
    }

    pub fn points(&self) -> &[PlanePoint] {
        &self.points
    }

    fn at(&self, t: f64) -> PlanePoint {
        let n = self.points.len();
        if n == 1 {
            return self.points[0];
        }
        let total = self.cumulative[n - 1];
        let s = t.clamp(0.0, 1.0) * total;
        let k = match self.cumulative.binary_search_by(|c| c.total_cmp(&s)) {
            Ok(k) => return self.points[k],
            Err(k) => k.clamp(1, n - 1),
        };
        let (s0, s1) = (self.cumulative[k - 1], self.cumulative[k]);
        let w = if s1 > s0 { (s - s0) / (s1 - s0) } else { 0.0 };
        self.points[k - 1] + (self.points[k] - self.points[k - 1]) * w
    }
}

/// Geometric shape of a boundary segment.
#[derive(Debug, Clone)]
pub enum Curve {
    Line { from: PlanePoint, to: PlanePoint },
    /// Circular arc, angle varying linearly from `start_angle` to `end_angle`.
    Arc { center: PlanePoint, radius: f64, start_angle: f64, end_angle: f64 },
    Parametric(ParamCurve),
    Polyline(Polyline),
}

impl Curve {
    pub fn at(&self, t: f64) -> PlanePoint {
        match self {
            Curve::Line { from, to } => from + (to - from) * t,
            Curve::Arc { center, radius, start_angle, end_angle } => {
                let th = start_angle + (end_angle - start_angle) * t;
                center + C64::from_polar(*radius, th)
            }
            Curve::Parametric(p) => p.at(t),
            Curve::Polyline(p) => p.at(t),
        }
    }

    /// Unit tangent at parameter `t` (direction of increasing `t`).
    pub fn tangent(&self, t: f64) -> PlanePoint {
        let d = match self {
            Curve::Line { from, to } => to - from,
            Curve::Arc { radius, start_angle, end_angle, .. } => {
                let th = start_angle + (end_angle - start_angle) * t;
                C64::i() * C64::from_polar(*radius, th) * (end_angle - start_angle)
            }
            _ => {
                let h = 1e-7;
                let (a, b) = if t < h {
                    (0.0, 2.0 * h)
                } else if t > 1.0 - h {
                    (1.0 - 2.0 * h, 1.0)
                } else {
                    (t - h, t + h)
                };
                self.at(b) - self.at(a)
            }
        };
        d / d.norm()
    }

    fn approx_length(&self) -> f64 {
        match self {
            Curve::Line { from, to } => (to - from).norm(),
            Curve::Arc { radius, start_angle, end_angle, .. } => {
                radius.abs() * (end_angle - start_angle).abs()
            }
            _ => {
                let n = 256;
                (1..=n)
                    .map(|k| {
                        (self.at(k as f64 / n as f64) - self.at((k - 1) as f64 / n as f64)).norm()
                    })
                    .sum()
            }
        }
    }
}

/// Which end of a segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SegmentEnd {
    Start,
    End,
}

/// Sample distribution along a segment's parameter.
#[derive(Debug, Clone, PartialEq)]
pub enum Clustering {
    Uniform,
    /// `t = (tanh(u) + 1) / 2` for `u` uniform on `[-half_width, half_width]`.
    Tanh { half_width: f64 },
    /// Pure geometric sequence `ratio^n, …, ratio^1` measured from `toward`.
    Geometric { toward: SegmentEnd, ratio: f64 },
    /// Uniform backbone plus root-exponentially graded points toward the
    /// flagged ends, three per corner pole and matched to the pole depths.
    Lightning { start: Option<usize>, end: Option<usize>, sigma: f64 },
}

/// One piece of a boundary loop.
#[derive(Debug, Clone)]
pub struct Segment {
    pub label: String,
    pub curve: Curve,
    pub n_samples: usize,
    pub clustering: Clustering,
    /// Request AAA poles near this segment.
    pub curved: bool,
    pub bc: BoundaryConditionSpec,
    /// Endpoints that are corners; corner vertices are never sampled.
    pub corner_ends: (bool, bool),
    /// Extra sample parameters merged with the clustering rule.
    pub refinement: Vec<f64>,
}

impl Segment {
    pub fn new(label: impl Into<String>, curve: Curve, n_samples: usize, bc: BoundaryConditionSpec) -> Self {
        Self {
            label: label.into(),
            curve,
            n_samples,
            clustering: Clustering::Uniform,
            curved: false,
            bc,
            corner_ends: (false, false),
            refinement: Vec::new(),
        }
    }

    pub fn with_clustering(mut self, clustering: Clustering) -> Self {
        self.clustering = clustering;
        self
    }

    pub fn curved(mut self, curved: bool) -> Self {
        self.curved = curved;
        self
    }

    pub fn start(&self) -> PlanePoint {
        self.curve.at(0.0)
    }

    pub fn end(&self) -> PlanePoint {
        self.curve.at(1.0)
    }

    pub fn is_closed(&self) -> bool {
        (self.start() - self.end()).norm() <= JOIN_TOL * self.start().norm().max(1.0)
    }

    pub fn length(&self) -> f64 {
        self.curve.approx_length()
    }

    pub fn point_at(&self, t: f64) -> PlanePoint {
        self.curve.at(t)
    }

    /// Sample parameters in `[0, 1]`, strictly increasing.
    pub fn sample_params(&self) -> Result<Vec<f64>, GeometryError> {
        let n = self.n_samples;
        if n < 2 {
            return Err(GeometryError::TooFewSamples { label: self.label.clone(), n });
        }
        if self.length() <= 1e-14 {
            return Err(GeometryError::DegenerateSegment(self.label.clone()));
        }
        let open = self.corner_ends.0 || self.corner_ends.1;
        let closed = self.is_closed();
        let uniform = |n: usize| -> Vec<f64> {
            if closed {
                (1..=n).map(|k| k as f64 / n as f64).collect()
            } else if open {
                (1..=n).map(|k| k as f64 / (n + 1) as f64).collect()
            } else {
                (0..n).map(|k| k as f64 / (n - 1) as f64).collect()
            }
        };
        let mut t = match &self.clustering {
            Clustering::Uniform => uniform(n),
            Clustering::Tanh { half_width } => (0..n)
                .map(|k| {
                    let u = -half_width + 2.0 * half_width * k as f64 / (n - 1) as f64;
                    0.5 * (u.tanh() + 1.0)
                })
                .collect(),
            Clustering::Geometric { toward, ratio } => {
                let mut t: Vec<f64> = (1..=n).rev().map(|k| ratio.powi(k as i32)).collect();
                if *toward == SegmentEnd::End {
                    t = t.into_iter().rev().map(|d| 1.0 - d).collect();
                }
                t
            }
            Clustering::Lightning { start, end, sigma } => {
                let mut t = if open {
                    (1..=n).map(|k| k as f64 / (n + 1) as f64).collect::<Vec<_>>()
                } else {
                    uniform(n)
                };
                let first = 1.0 / (n + 1) as f64;
                let graded = |poles: usize| -> Vec<f64> {
                    let sn = (poles as f64).sqrt();
                    (1..=3 * poles)
                        .map(|k| (-sigma * (sn - (k as f64 / 3.0).sqrt())).exp())
                        .filter(|&d| d < first)
                        .collect()
                };
                if let Some(poles) = start {
                    t.extend(graded(*poles));
                }
                if let Some(poles) = end {
                    t.extend(graded(*poles).into_iter().map(|d| 1.0 - d));
                }
                t
            }
        };
        t.extend(self.refinement.iter().copied().filter(|&s| s <= 1.0 && (s > 0.0 || s == 0.0 && !closed)));
        if open {
            t.retain(|&s| s > 0.0 && s < 1.0);
        }
        t.sort_by(f64::total_cmp);
        t.dedup_by(|a, b| (*a - *b).abs() <= 1e-15);
        Ok(t)
    }

    /// Parameters for residual checks: training parameters plus the midpoints
    /// of consecutive training intervals.
    pub fn residual_params(&self) -> Result<Vec<f64>, GeometryError> {
        let t = self.sample_params()?;
        let mut out = Vec::with_capacity(2 * t.len());
        for w in t.windows(2) {
            out.push(w[0]);
            out.push(0.5 * (w[0] + w[1]));
        }
        out.extend(t.last());
        Ok(out)
    }

    /// Evenly spaced parameters including both ends.
    pub fn dense_points(&self, n: usize) -> Vec<PlanePoint> {
        let n = n.max(2);
        (0..n).map(|k| self.point_at(k as f64 / (n - 1) as f64)).collect()
    }
}

/// Ordered sample points of a segment.
pub fn sample_segment(seg: &Segment) -> Result<Vec<PlanePoint>, GeometryError> {
    Ok(seg.sample_params()?.into_iter().map(|t| seg.point_at(t)).collect())
}

/// A sharp corner that receives exponentially clustered poles.
#[derive(Debug, Clone, PartialEq)]
pub struct Corner {
    pub vertex: PlanePoint,
    pub exterior_bisector: f64,
    pub scale: f64,
    pub pole_count: usize,
    pub sigma: f64,
}

impl Corner {
    /// Poles `w + L e^{iθ} e^{-σ(√N - √n)}`, `n = 1..N`.
    pub fn poles(&self) -> Vec<PlanePoint> {
        cluster_corner_poles(self)
    }
}

/// Lightning poles along the exterior bisector of a corner.
pub fn cluster_corner_poles(c: &Corner) -> Vec<PlanePoint> {
    let n_total = (c.pole_count as f64).sqrt();
    let dir = C64::from_polar(c.scale, c.exterior_bisector);
    (1..=c.pole_count)
        .map(|n| c.vertex + dir * (-c.sigma * (n_total - (n as f64).sqrt())).exp())
        .collect()
}

/// Direction (radians, in `[0, 2π)`) bisecting the exterior angle at `vertex`
/// for a counterclockwise loop `prev → vertex → next` with fluid on the left.
pub fn exterior_bisector(
    prev: PlanePoint,
    vertex: PlanePoint,
    next: PlanePoint,
) -> Result<f64, GeometryError> {
    let back = (prev - vertex).arg();
    let ahead = (next - vertex).arg();
    // Fluid sector runs counterclockwise from `ahead` to `back`.
    let interior = (back - ahead).rem_euclid(TAU);
    if (interior - PI).abs() < 1e-9 || interior < 1e-12 {
        return Err(GeometryError::Collinear(vertex));
    }
    Ok((ahead + 0.5 * interior + PI).rem_euclid(TAU))
}

/// Even–odd point-in-polygon test. Points on an edge count as inside.
pub fn point_in_region(z: PlanePoint, polyline: &[PlanePoint]) -> bool {
    let n = polyline.len();
    if n < 3 {
        return false;
    }
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (polyline[j], polyline[i]);
        if on_segment(z, a, b) {
            return true;
        }
        if (b.im > z.im) != (a.im > z.im) {
            let x = b.re + (z.im - b.im) * (a.re - b.re) / (a.im - b.im);
            if z.re < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

fn on_segment(z: PlanePoint, a: PlanePoint, b: PlanePoint) -> bool {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    let tol = 1e-14 * (1.0 + a.norm().max(b.norm()));
    if len2 == 0.0 {
        return (z - a).norm() <= tol;
    }
    let s = ((z - a) * ab.conj()).re / len2;
    if !(0.0..=1.0).contains(&s) {
        return false;
    }
    (a + ab * s - z).norm() <= tol
}

/// Distance from `z` to a closed polyline.
pub fn distance_to_polyline(z: PlanePoint, polyline: &[PlanePoint]) -> f64 {
    let n = polyline.len();
    (0..n)
        .map(|i| {
            let (a, b) = (polyline[i], polyline[(i + 1) % n]);
            let ab = b - a;
            let len2 = ab.norm_sqr();
            let s = if len2 > 0.0 { (((z - a) * ab.conj()).re / len2).clamp(0.0, 1.0) } else { 0.0 };
            (a + ab * s - z).norm()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Signed area of a closed polyline (positive when counterclockwise).
pub fn signed_area(polyline: &[PlanePoint]) -> f64 {
    let n = polyline.len();
    0.5 * (0..n)
        .map(|i| {
            let (a, b) = (polyline[i], polyline[(i + 1) % n]);
            a.re * b.im - b.re * a.im
        })
        .sum::<f64>()
}

/// An obstacle inside the flow with its Laurent expansion data.
#[derive(Debug, Clone)]
pub struct Hole {
    /// Closed clockwise loop.
    pub boundary: Vec<Segment>,
    pub laurent_center: PlanePoint,
    pub laurent_degree: usize,
    /// Auxiliary Laurent series (no logarithmic terms).
    pub extra_centers: Vec<(PlanePoint, usize)>,
}

/// Identifies a boundary segment: loop 0 is the outer loop, loop `h + 1` is hole `h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SegmentId {
    pub loop_index: usize,
    pub segment: usize,
}

/// A bounded, possibly multiply connected flow domain.
#[derive(Debug, Clone)]
pub struct Domain {
    pub outer: Vec<Segment>,
    pub holes: Vec<Hole>,
    pub corners: Vec<Corner>,
    outer_poly: Vec<PlanePoint>,
    hole_polys: Vec<Vec<PlanePoint>>,
}

impl Domain {
    /// Validates loop closure, orientation and Laurent centers.
    pub fn new(outer: Vec<Segment>, holes: Vec<Hole>, corners: Vec<Corner>) -> Result<Self, GeometryError> {
        if outer.is_empty() {
            return Err(GeometryError::Invalid("empty outer boundary".into()));
        }
        check_closed(&outer)?;
        for h in &holes {
            check_closed(&h.boundary)?;
        }
        let outer_poly = loop_polyline(&outer);
        if signed_area(&outer_poly) <= 0.0 {
            return Err(GeometryError::Orientation("outer"));
        }
        let hole_polys: Vec<_> = holes.iter().map(|h| loop_polyline(&h.boundary)).collect();
        for (k, (h, poly)) in holes.iter().zip(&hole_polys).enumerate() {
            if signed_area(poly) >= 0.0 {
                return Err(GeometryError::Orientation("hole"));
            }
            if !point_in_region(h.laurent_center, poly) {
                return Err(GeometryError::CenterOutsideHole(h.laurent_center, k));
            }
            if h.laurent_degree == 0 {
                return Err(GeometryError::Invalid(format!("hole {k} needs Laurent degree >= 1")));
            }
            if !poly.iter().all(|&p| point_in_region(p, &outer_poly)) {
                return Err(GeometryError::Invalid(format!("hole {k} is not inside the outer boundary")));
            }
        }
        let mut dom = Self { outer, holes, corners, outer_poly, hole_polys };
        dom.mark_corner_ends();
        Ok(dom)
    }

    fn mark_corner_ends(&mut self) {
        let vertices: Vec<PlanePoint> = self.corners.iter().map(|c| c.vertex).collect();
        let is_corner = |p: PlanePoint| vertices.iter().any(|v| (v - p).norm() <= 1e-10 * (1.0 + p.norm()));
        let mark = |s: &mut Segment| {
            s.corner_ends = (is_corner(s.start()), is_corner(s.end()));
        };
        self.outer.iter_mut().for_each(mark);
        for h in &mut self.holes {
            h.boundary.iter_mut().for_each(mark);
        }
    }

    /// All segments, outer loop first.
    pub fn segments(&self) -> impl Iterator<Item = (SegmentId, &Segment)> {
        let outer = self
            .outer
            .iter()
            .enumerate()
            .map(|(k, s)| (SegmentId { loop_index: 0, segment: k }, s));
        let holes = self.holes.iter().enumerate().flat_map(|(h, hole)| {
            hole.boundary
                .iter()
                .enumerate()
                .map(move |(k, s)| (SegmentId { loop_index: h + 1, segment: k }, s))
        });
        outer.chain(holes)
    }

    pub fn segment(&self, id: SegmentId) -> &Segment {
        if id.loop_index == 0 {
            &self.outer[id.segment]
        } else {
            &self.holes[id.loop_index - 1].boundary[id.segment]
        }
    }

    pub fn outer_polyline(&self) -> &[PlanePoint] {
        &self.outer_poly
    }

    pub fn hole_polylines(&self) -> &[Vec<PlanePoint>] {
        &self.hole_polys
    }

    /// Closed fluid region test (boundary points count as fluid).
    pub fn contains(&self, z: PlanePoint) -> bool {
        point_in_region(z, &self.outer_poly)
            && !self
                .hole_polys
                .iter()
                .any(|p| point_in_region(z, p) && distance_to_polyline(z, p) > 1e-14)
    }

    pub fn distance_to_boundary(&self, z: PlanePoint) -> f64 {
        std::iter::once(&self.outer_poly)
            .chain(self.hole_polys.iter())
            .map(|p| distance_to_polyline(z, p))
            .fold(f64::INFINITY, f64::min)
    }

    /// `(xmin, xmax, ymin, ymax)` of the outer boundary.
    pub fn bbox(&self) -> (f64, f64, f64, f64) {
        self.outer_poly.iter().fold(
            (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
            |(a, b, c, d), p| (a.min(p.re), b.max(p.re), c.min(p.im), d.max(p.im)),
        )
    }

    /// Characteristic length: the smaller side of the bounding box.
    pub fn scale(&self) -> f64 {
        let (x0, x1, y0, y1) = self.bbox();
        (x1 - x0).min(y1 - y0)
    }

    /// Junctions between consecutive segments of a loop where the tangent
    /// turns; returned as `(vertex, incoming segment index, outgoing index)`.
    pub fn detect_corners(loop_segments: &[Segment]) -> Vec<(PlanePoint, usize, usize, f64)> {
        let n = loop_segments.len();
        let mut out = Vec::new();
        for k in 0..n {
            let (a, b) = (&loop_segments[k], &loop_segments[(k + 1) % n]);
            let tin = a.curve.tangent(1.0);
            let tout = b.curve.tangent(0.0);
            let turn = (tout / tin).arg();
            if turn.abs() > 1e-6 {
                let v = b.start();
                if let Ok(theta) = exterior_bisector(v - tin, v, v + tout) {
                    out.push((v, k, (k + 1) % n, theta));
                }
            }
        }
        out
    }
}

fn check_closed(segs: &[Segment]) -> Result<(), GeometryError> {
    for (k, s) in segs.iter().enumerate() {
        let next = &segs[(k + 1) % segs.len()];
        let gap = (s.end() - next.start()).norm();
        if gap > JOIN_TOL * s.end().norm().max(1.0) {
            return Err(GeometryError::OpenLoop { label: s.label.clone(), gap });
        }
    }
    Ok(())
}

/// Polyline for region tests at four times the sample density.
fn loop_polyline(segs: &[Segment]) -> Vec<PlanePoint> {
    let mut pts = Vec::new();
    for s in segs {
        let n = (4 * s.n_samples).max(16);
        let dense = s.dense_points(n + 1);
        pts.extend_from_slice(&dense[..n]);
    }
    pts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stokes_system::BoundaryConditionSpec;

    fn line(a: C64, b: C64, n: usize) -> Segment {
        Segment::new("l", Curve::Line { from: a, to: b }, n, BoundaryConditionSpec::no_slip())
    }

    fn winding_number(z: C64, poly: &[C64]) -> i32 {
        let n = poly.len();
        let total: f64 = (0..n)
            .map(|i| ((poly[(i + 1) % n] - z) / (poly[i] - z)).arg())
            .sum();
        (total / TAU).round() as i32
    }

    #[test]
    fn uniform_line_includes_endpoints() {
        let pts = sample_segment(&line(C64::new(0.0, 0.0), C64::new(1.0, 0.0), 3)).unwrap();
        assert_eq!(pts, vec![C64::new(0.0, 0.0), C64::new(0.5, 0.0), C64::new(1.0, 0.0)]);
    }

    #[test]
    fn geometric_clustering_toward_start() {
        let s = line(C64::new(0.0, 0.0), C64::new(1.0, 0.0), 4)
            .with_clustering(Clustering::Geometric { toward: SegmentEnd::Start, ratio: 0.5 });
        let t = s.sample_params().unwrap();
        assert_eq!(t, vec![1.0 / 16.0, 1.0 / 8.0, 1.0 / 4.0, 1.0 / 2.0]);
    }

    #[test]
    fn tanh_arc_matches_mapped_parameters() {
        let arc = Segment::new(
            "arc",
            Curve::Arc { center: C64::new(0.0, 0.0), radius: 1.0, start_angle: 0.0, end_angle: PI },
            600,
            BoundaryConditionSpec::no_slip(),
        )
        .with_clustering(Clustering::Tanh { half_width: 14.0 });
        let pts = sample_segment(&arc).unwrap();
        assert_eq!(pts.len(), 600);
        for (k, p) in pts.iter().enumerate() {
            let u = -14.0 + 28.0 * k as f64 / 599.0;
            let expect = C64::from_polar(1.0, PI * 0.5 * (u.tanh() + 1.0));
            assert!((p - expect).norm() < 1e-15);
        }
    }

    #[test]
    fn corner_ends_are_never_sampled() {
        let mut s = line(C64::new(0.0, 0.0), C64::new(1.0, 0.0), 5);
        s.corner_ends = (true, false);
        let t = s.sample_params().unwrap();
        assert!(t.iter().all(|&x| x > 0.0 && x < 1.0));
        s.clustering = Clustering::Lightning { start: Some(8), end: None, sigma: 4.0 };
        let t = s.sample_params().unwrap();
        assert!(t[0] > 0.0 && t[0] < 1e-3);
        assert!(t.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn degenerate_segment_is_rejected() {
        let s = line(C64::new(1.0, 1.0), C64::new(1.0, 1.0), 4);
        assert!(matches!(sample_segment(&s), Err(GeometryError::DegenerateSegment(_))));
    }

    #[test]
    fn corner_pole_formula() {
        let c = Corner { vertex: C64::new(0.0, 0.0), exterior_bisector: 0.0, scale: 1.0, pole_count: 4, sigma: 4.0 };
        let p = cluster_corner_poles(&c);
        assert!((p[3] - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((p[0].re - (-4.0f64).exp()).abs() < 1e-17);
        assert!((p[0].re - 1.8316e-2).abs() < 1e-6);
        let c = Corner { vertex: C64::new(1.0, 1.0), exterior_bisector: PI, scale: 1.0, pole_count: 1, sigma: 4.0 };
        assert!((cluster_corner_poles(&c)[0] - C64::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn bisectors() {
        let o = C64::new(0.0, 0.0);
        let th = exterior_bisector(C64::new(0.0, 1.0), o, C64::new(1.0, 0.0)).unwrap();
        assert!((th - 5.0 * PI / 4.0).abs() < 1e-14);
        let th = exterior_bisector(C64::new(1.0, 0.0), o, C64::new(0.0, 1.0)).unwrap();
        assert!((th - PI / 4.0).abs() < 1e-14);
        assert!(matches!(
            exterior_bisector(C64::new(-1.0, 0.0), o, C64::new(1.0, 0.0)),
            Err(GeometryError::Collinear(_))
        ));
    }

    #[test]
    fn polygon_circle_tests() {
        let poly: Vec<C64> = (0..256).map(|k| C64::from_polar(1.0, TAU * k as f64 / 256.0)).collect();
        assert!(point_in_region(C64::new(0.0, 0.0), &poly));
        assert!(!point_in_region(C64::new(2.0, 0.0), &poly));
        let z = C64::new(0.999, 0.0);
        assert_eq!(point_in_region(z, &poly), winding_number(z, &poly) != 0);
    }

    #[test]
    fn edge_points_count_as_inside() {
        let sq = [C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 1.0), C64::new(0.0, 1.0)];
        assert!(point_in_region(C64::new(0.5, 0.0), &sq));
        assert!(point_in_region(C64::new(1.0, 1.0), &sq));
    }

    #[test]
    fn domain_rejects_clockwise_outer_loop() {
        let (a, b, c) = (C64::new(0.0, 0.0), C64::new(0.0, 1.0), C64::new(1.0, 0.0));
        let segs = vec![line(a, b, 3), line(b, c, 3), line(c, a, 3)];
        assert!(matches!(Domain::new(segs, vec![], vec![]), Err(GeometryError::Orientation(_))));
    }

    #[test]
    fn detects_square_corners() {
        let v = [C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 1.0), C64::new(0.0, 1.0)];
        let segs: Vec<_> = (0..4).map(|k| line(v[k], v[(k + 1) % 4], 4)).collect();
        let corners = Domain::detect_corners(&segs);
        assert_eq!(corners.len(), 4);
        let at_one = corners.iter().find(|c| (c.0 - v[1]).norm() < 1e-14).unwrap();
        assert!((at_one.3 - 7.0 * PI / 4.0).abs() < 1e-12);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn star(n: usize, inner: f64) -> Vec<C64> {
            (0..2 * n)
                .map(|k| C64::from_polar(if k % 2 == 0 { 1.0 } else { inner }, PI * k as f64 / n as f64 + 0.1))
                .collect()
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(1000))]
            #[test]
            fn region_test_agrees_with_winding_number(x in -1.5f64..1.5, y in -1.5f64..1.5) {
                let z = C64::new(x, y);
                let convex: Vec<C64> = (0..7).map(|k| C64::from_polar(1.2, TAU * k as f64 / 7.0)).collect();
                let nonconvex = star(5, 0.45);
                prop_assert_eq!(point_in_region(z, &convex), winding_number(z, &convex) != 0);
                prop_assert_eq!(point_in_region(z, &nonconvex), winding_number(z, &nonconvex) != 0);
            }

            #[test]
            fn corner_poles_on_bisector_ray(n in 1usize..40, sigma in 0.5f64..6.0, theta in 0.0f64..TAU) {
                let w = C64::new(0.3, -0.7);
                let c = Corner { vertex: w, exterior_bisector: theta, scale: 1.5, pole_count: n, sigma };
                let poles = cluster_corner_poles(&c);
                let dir = C64::from_polar(1.0, theta);
                for (k, p) in poles.iter().enumerate() {
                    let rel = (p - w) / dir;
                    prop_assert!(rel.re > 0.0 && rel.im.abs() <= 1e-12 * rel.re.max(1.0));
                    if k + 1 < poles.len() {
                        let ratio = (poles[k + 1] - w).norm() / (p - w).norm();
                        let expect = (sigma * (((k + 2) as f64).sqrt() - ((k + 1) as f64).sqrt())).exp();
                        // Forming p − w loses digits when the pole hugs the vertex.
                        let cancel = 4e-16 * w.norm() / (p - w).norm();
                        prop_assert!((ratio / expect - 1.0).abs() < 1e-12 + cancel);
                    }
                }
            }

            #[test]
            fn samples_strictly_monotone(n in 2usize..300, w in 1.0f64..14.0, kind in 0usize..3) {
                let mut s = line(C64::new(-1.0, 0.5), C64::new(2.0, 1.5), n);
                s.clustering = match kind {
                    0 => Clustering::Uniform,
                    1 => Clustering::Tanh { half_width: w },
                    _ => Clustering::Lightning { start: Some(n / 10 + 1), end: Some(3), sigma: 4.0 },
                };
                s.corner_ends = (kind == 2, kind == 2);
                let t = s.sample_params().unwrap();
                prop_assert!(t.windows(2).all(|p| p[1] > p[0]));
            }
        }
    }
}
