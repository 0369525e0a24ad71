//! Boundary rows of the real least-squares system and its solution.
//!
//! Every real unknown (real or imaginary part of a coefficient) contributes a
//! known tuple `(f, f′, g, g′)` at a point. A boundary functional is real-linear
//! in that tuple, so each matrix entry is the functional applied to one
//! contribution. Field evaluation in [`crate::solution`] sums the same
//! contributions, which keeps rows and fields consistent by construction.
//!
//! Unknown layout, with `N` basis columns and `H` holes:
//! `[Re cf (N), Re cg (N), Re f0₁, Re g0₁, …, Re f0_H, Re g0_H, Im (same order)]`.

use std::fmt;
use std::sync::Arc;

use faer::{Mat, MatRef};
use serde::{Deserialize, Serialize};

use crate::geometry::{Domain, SegmentId};
use crate::linalg;
use crate::rational_basis::BasisEval;
use crate::C64;

#[derive(Debug, thiserror::Error)]
pub enum SystemError {
    #[error("non-finite entry in row {0}")]
    NonFinite(usize),
    #[error("sample {0} coincides with a logarithmic center")]
    OnLogCenter(C64),
    #[error("no boundary rows")]
    NoRows,
    #[error("basis evaluation has {got} rows, expected {expected}")]
    Shape { expected: usize, got: usize },
    #[error("coefficient vector has length {got}, expected {expected}")]
    CoefficientLength { expected: usize, got: usize },
}

/// A scalar field that can be imposed on the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Functional {
    Psi,
    U,
    V,
    P,
    Omega,
}

impl Functional {
    pub const ALL: [Functional; 5] = [Functional::Psi, Functional::U, Functional::V, Functional::P, Functional::Omega];

    pub fn name(self) -> &'static str {
        match self {
            Functional::Psi => "psi",
            Functional::U => "u",
            Functional::V => "v",
            Functional::P => "p",
            Functional::Omega => "omega",
        }
    }

    /// Value of the functional for Goursat data at `z`.
    pub fn apply(self, z: C64, t: &GoursatTuple) -> f64 {
        match self {
            Functional::Psi => (z.conj() * t.f + t.g).im,
            Functional::U => (-t.f.conj() + z.conj() * t.fp + t.gp).re,
            Functional::V => -(-t.f.conj() + z.conj() * t.fp + t.gp).im,
            Functional::P => 4.0 * t.fp.re,
            Functional::Omega => -4.0 * t.fp.im,
        }
    }
}

/// `(f, f′, g, g′)` at a point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GoursatTuple {
    pub f: C64,
    pub fp: C64,
    pub g: C64,
    pub gp: C64,
}

impl GoursatTuple {
    fn scaled(self, s: C64) -> Self {
        Self { f: self.f * s, fp: self.fp * s, g: self.g * s, gp: self.gp * s }
    }
}

/// `c₀ x^{i} y^{j}` term of a polynomial target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolyTerm {
    pub coeff: f64,
    #[serde(default)]
    pub x_pow: i32,
    #[serde(default)]
    pub y_pow: i32,
}

/// Right-hand side of a boundary condition as a function of position.
#[derive(Clone)]
pub enum Target {
    Constant(f64),
    Polynomial(Vec<PolyTerm>),
    Function(String, Arc<dyn Fn(C64) -> f64 + Send + Sync>),
}

impl Target {
    pub fn function(name: impl Into<String>, f: impl Fn(C64) -> f64 + Send + Sync + 'static) -> Self {
        Target::Function(name.into(), Arc::new(f))
    }

    pub fn eval(&self, z: C64) -> f64 {
        match self {
            Target::Constant(c) => *c,
            Target::Polynomial(terms) => terms
                .iter()
                .map(|t| t.coeff * z.re.powi(t.x_pow) * z.im.powi(t.y_pow))
                .sum(),
            Target::Function(_, f) => f(z),
        }
    }
}

impl fmt::Debug for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Constant(c) => write!(f, "Constant({c})"),
            Target::Polynomial(t) => write!(f, "Polynomial({t:?})"),
            Target::Function(name, _) => write!(f, "Function({name})"),
        }
    }
}

/// Two functional–target pairs imposed at every sample of a segment.
#[derive(Debug, Clone)]
pub struct BoundaryConditionSpec {
    pub conditions: [(Functional, Target); 2],
    /// Unit direction `d`: `U` and `V` conditions constrain the velocity
    /// components along `d` and `i·d`. Defaults to `1`.
    pub frame: C64,
}

impl BoundaryConditionSpec {
    pub fn new(first: (Functional, Target), second: (Functional, Target)) -> Self {
        Self { conditions: [first, second], frame: C64::new(1.0, 0.0) }
    }

    /// Measures `U` and `V` along `direction` and its left normal.
    pub fn with_frame(mut self, direction: C64) -> Self {
        self.frame = direction / direction.norm();
        self
    }

    /// Weights `(w_u, w_v)` of the Cartesian components in a velocity
    /// condition, or `None` for the other functionals.
    pub fn velocity_weights(&self, fun: Functional) -> Option<(f64, f64)> {
        let (c, s) = (self.frame.re, self.frame.im);
        match fun {
            Functional::U => Some((c, s)),
            Functional::V => Some((-s, c)),
            _ => None,
        }
    }

    /// Value of condition functional `fun` given Cartesian `(u, v)` and the
    /// value `other` of any non-velocity functional.
    pub fn measure(&self, fun: Functional, u: f64, v: f64, other: impl FnOnce() -> f64) -> f64 {
        match self.velocity_weights(fun) {
            Some((wu, wv)) => wu * u + wv * v,
            None => other(),
        }
    }

    /// `u = v = 0`.
    pub fn no_slip() -> Self {
        Self::velocity(Target::Constant(0.0), Target::Constant(0.0))
    }

    pub fn velocity(u: Target, v: Target) -> Self {
        Self::new((Functional::U, u), (Functional::V, v))
    }

    /// Parallel outflow `v = 0` at pressure `p`.
    pub fn pressure_outlet(p: f64) -> Self {
        Self::new((Functional::V, Target::Constant(0.0)), (Functional::P, Target::Constant(p)))
    }
}

/// Logarithmic terms attached to one hole.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogTermBlock {
    pub center: C64,
}

impl LogTermBlock {
    /// Contributions of `Re f0`, `Im f0`, `Re g0`, `Im g0` at `z`.
    pub fn contributions(&self, z: C64) -> [GoursatTuple; 4] {
        let dz = z - self.center;
        let l = dz.ln();
        let o = 1.0 / dz;
        let tied = dz * l - z;
        let i = C64::i();
        let zero = C64::new(0.0, 0.0);
        [
            GoursatTuple { f: l, fp: o, g: -tied, gp: -l },
            GoursatTuple { f: i * l, fp: i * o, g: i * tied, gp: i * l },
            GoursatTuple { f: zero, fp: zero, g: l, gp: o },
            GoursatTuple { f: zero, fp: zero, g: i * l, gp: i * o },
        ]
    }
}

/// Positions of the real unknowns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ColumnMap {
    pub ncols: usize,
    pub nholes: usize,
}

impl ColumnMap {
    pub fn half(&self) -> usize {
        2 * self.ncols + 2 * self.nholes
    }
    pub fn nreal(&self) -> usize {
        2 * self.half()
    }
    pub fn cf(&self, j: usize) -> usize {
        j
    }
    pub fn cg(&self, j: usize) -> usize {
        self.ncols + j
    }
    pub fn f0(&self, h: usize) -> usize {
        2 * self.ncols + 2 * h
    }
    pub fn g0(&self, h: usize) -> usize {
        2 * self.ncols + 2 * h + 1
    }
    /// Offset of the imaginary part of an unknown.
    pub fn imag(&self, re_index: usize) -> usize {
        self.half() + re_index
    }

    pub fn describe(&self, index: usize) -> String {
        let (part, k) = if index < self.half() { ("Re", index) } else { ("Im", index - self.half()) };
        if k < self.ncols {
            format!("{part} cf[{k}]")
        } else if k < 2 * self.ncols {
            format!("{part} cg[{}]", k - self.ncols)
        } else {
            let h = (k - 2 * self.ncols) / 2;
            let which = if (k - 2 * self.ncols) % 2 == 0 { "f0" } else { "g0" };
            format!("{part} {which}[{h}]")
        }
    }
}

/// Complex coefficients of both Goursat functions.
#[derive(Debug, Clone, PartialEq)]
pub struct GoursatCoefficients {
    pub cf: Vec<C64>,
    pub cg: Vec<C64>,
    /// `(f0, g0)` per hole.
    pub logs: Vec<(C64, C64)>,
}

impl GoursatCoefficients {
    pub fn zeros(map: ColumnMap) -> Self {
        let z = C64::new(0.0, 0.0);
        Self { cf: vec![z; map.ncols], cg: vec![z; map.ncols], logs: vec![(z, z); map.nholes] }
    }

    pub fn map(&self) -> ColumnMap {
        ColumnMap { ncols: self.cf.len(), nholes: self.logs.len() }
    }

    pub fn from_real(x: &[f64], map: ColumnMap) -> Result<Self, SystemError> {
        if x.len() != map.nreal() {
            return Err(SystemError::CoefficientLength { expected: map.nreal(), got: x.len() });
        }
        let c = |k: usize| C64::new(x[k], x[map.imag(k)]);
        Ok(Self {
            cf: (0..map.ncols).map(|j| c(map.cf(j))).collect(),
            cg: (0..map.ncols).map(|j| c(map.cg(j))).collect(),
            logs: (0..map.nholes).map(|h| (c(map.f0(h)), c(map.g0(h)))).collect(),
        })
    }

    pub fn to_real(&self) -> Vec<f64> {
        let map = self.map();
        let mut x = vec![0.0; map.nreal()];
        let mut put = |k: usize, v: C64| {
            x[k] = v.re;
            x[map.imag(k)] = v.im;
        };
        for j in 0..map.ncols {
            put(map.cf(j), self.cf[j]);
            put(map.cg(j), self.cg[j]);
        }
        for (h, &(f0, g0)) in self.logs.iter().enumerate() {
            put(map.f0(h), f0);
            put(map.g0(h), g0);
        }
        x
    }
}

/// Fills `out` with the row of functional `fun` at `z`.
///
/// `values`/`derivs` are the basis values and derivatives at `z`. The `f`
/// column of basis function `φ` with anchor `a` also carries `g = −ā φ`.
pub fn fill_row(
    fun: Functional,
    z: C64,
    values: &[C64],
    derivs: &[C64],
    anchors: &[C64],
    logs: &[LogTermBlock],
    out: &mut [f64],
) {
    let map = ColumnMap { ncols: values.len(), nholes: logs.len() };
    let i = C64::i();
    let zero = C64::new(0.0, 0.0);
    for j in 0..map.ncols {
        let shift = -anchors[j].conj();
        let base_f = GoursatTuple { f: values[j], fp: derivs[j], g: shift * values[j], gp: shift * derivs[j] };
        let base_g = GoursatTuple { f: zero, fp: zero, g: values[j], gp: derivs[j] };
        out[map.cf(j)] = fun.apply(z, &base_f);
        out[map.imag(map.cf(j))] = fun.apply(z, &base_f.scaled(i));
        out[map.cg(j)] = fun.apply(z, &base_g);
        out[map.imag(map.cg(j))] = fun.apply(z, &base_g.scaled(i));
    }
    for (h, block) in logs.iter().enumerate() {
        let [ref_f0, imf_f0, re_g0, im_g0] = block.contributions(z);
        out[map.f0(h)] = fun.apply(z, &ref_f0);
        out[map.imag(map.f0(h))] = fun.apply(z, &imf_f0);
        out[map.g0(h)] = fun.apply(z, &re_g0);
        out[map.imag(map.g0(h))] = fun.apply(z, &im_g0);
    }
}

/// Full row blocks `PSI, U, V, P, OMEGA` at the given points.
#[derive(Debug, Clone)]
pub struct RowBlocks {
    pub psi: Mat<f64>,
    pub u: Mat<f64>,
    pub v: Mat<f64>,
    pub p: Mat<f64>,
    pub omega: Mat<f64>,
}

impl RowBlocks {
    pub fn get(&self, fun: Functional) -> MatRef<'_, f64> {
        match fun {
            Functional::Psi => self.psi.as_ref(),
            Functional::U => self.u.as_ref(),
            Functional::V => self.v.as_ref(),
            Functional::P => self.p.as_ref(),
            Functional::Omega => self.omega.as_ref(),
        }
    }
}

pub fn make_rows(points: &[C64], be: &BasisEval, logs: &[LogTermBlock]) -> Result<RowBlocks, SystemError> {
    check_shapes(points, be, logs)?;
    let map = ColumnMap { ncols: be.values.ncols(), nholes: logs.len() };
    let block = |fun: Functional| {
        let mut m = Mat::<f64>::zeros(points.len(), map.nreal());
        let mut row = vec![0.0; map.nreal()];
        for (k, &z) in points.iter().enumerate() {
            let (vals, ders) = basis_row(be, k);
            fill_row(fun, z, &vals, &ders, &be.anchors, logs, &mut row);
            for (c, &x) in row.iter().enumerate() {
                m[(k, c)] = x;
            }
        }
        m
    };
    Ok(RowBlocks {
        psi: block(Functional::Psi),
        u: block(Functional::U),
        v: block(Functional::V),
        p: block(Functional::P),
        omega: block(Functional::Omega),
    })
}

fn check_shapes(points: &[C64], be: &BasisEval, logs: &[LogTermBlock]) -> Result<(), SystemError> {
    if be.anchors.len() != be.values.ncols() {
        return Err(SystemError::Shape { expected: be.values.ncols(), got: be.anchors.len() });
    }
    if be.values.nrows() != points.len() {
        return Err(SystemError::Shape { expected: points.len(), got: be.values.nrows() });
    }
    if let Some(&z) = points.iter().find(|&&z| logs.iter().any(|b| b.center == z)) {
        return Err(SystemError::OnLogCenter(z));
    }
    Ok(())
}

fn basis_row(be: &BasisEval, k: usize) -> (Vec<C64>, Vec<C64>) {
    let n = be.values.ncols();
    ((0..n).map(|j| be.values[(k, j)]).collect(), (0..n).map(|j| be.derivs[(k, j)]).collect())
}

/// A collocation point with its segment and row weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundarySample {
    pub z: C64,
    pub segment: SegmentId,
    pub weight: f64,
}

/// Describes one row of the assembled system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowInfo {
    pub sample: usize,
    pub segment: SegmentId,
    pub functional: Functional,
    pub weight: f64,
}

/// Weighted system `A x ≈ b`.
#[derive(Debug, Clone)]
pub struct StokesLinearSystem {
    pub a: Mat<f64>,
    pub rhs: Vec<f64>,
    pub column_map: ColumnMap,
    pub rows: Vec<RowInfo>,
}

/// Two rows per sample from the segment's boundary conditions.
pub fn assemble(
    domain: &Domain,
    samples: &[BoundarySample],
    be: &BasisEval,
    logs: &[LogTermBlock],
) -> Result<StokesLinearSystem, SystemError> {
    let points: Vec<C64> = samples.iter().map(|s| s.z).collect();
    check_shapes(&points, be, logs)?;
    if samples.is_empty() {
        return Err(SystemError::NoRows);
    }
    let map = ColumnMap { ncols: be.values.ncols(), nholes: logs.len() };
    let nrows = 2 * samples.len();
    let mut a = Mat::<f64>::zeros(nrows, map.nreal());
    let mut rhs = vec![0.0; nrows];
    let mut rows = Vec::with_capacity(nrows);
    let mut buf = vec![0.0; map.nreal()];
    let mut other = vec![0.0; map.nreal()];
    for (k, s) in samples.iter().enumerate() {
        let bc = &domain.segment(s.segment).bc;
        let (vals, ders) = basis_row(be, k);
        for (c, (fun, target)) in bc.conditions.iter().enumerate() {
            let r = 2 * k + c;
            match bc.velocity_weights(*fun).filter(|_| bc.frame != C64::new(1.0, 0.0)) {
                Some((wu, wv)) => {
                    fill_row(Functional::U, s.z, &vals, &ders, &be.anchors, logs, &mut buf);
                    fill_row(Functional::V, s.z, &vals, &ders, &be.anchors, logs, &mut other);
                    for (x, &y) in buf.iter_mut().zip(&other) {
                        *x = wu * *x + wv * y;
                    }
                }
                None => fill_row(*fun, s.z, &vals, &ders, &be.anchors, logs, &mut buf),
            }
            for (col, &x) in buf.iter().enumerate() {
                a[(r, col)] = s.weight * x;
            }
            rhs[r] = s.weight * target.eval(s.z);
            if !rhs[r].is_finite() || buf.iter().any(|x| !x.is_finite()) {
                return Err(SystemError::NonFinite(r));
            }
            rows.push(RowInfo { sample: k, segment: s.segment, functional: *fun, weight: s.weight });
        }
    }
    Ok(StokesLinearSystem { a, rhs, column_map: map, rows })
}

/// Residual statistics of the rows of one segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SegmentResidual {
    pub max: f64,
    pub rms: f64,
}

/// Outcome of the least-squares solve.
#[derive(Debug, Clone)]
pub struct SolveDiagnostics {
    pub rank: usize,
    pub unknowns: usize,
    pub rows: usize,
    /// Unweighted row residuals grouped by segment.
    pub per_segment: Vec<(SegmentId, SegmentResidual)>,
    /// No pressure row: pressure known up to a constant.
    pub pressure_gauge_free: bool,
    /// No stream-function row: ψ known up to a constant.
    pub stream_gauge_free: bool,
}

/// Least-squares solution via truncated column-pivoted QR of the
/// column-scaled matrix.
pub fn solve(sys: &StokesLinearSystem) -> Result<(GoursatCoefficients, SolveDiagnostics), SystemError> {
    let (m, n) = sys.a.shape();
    if m == 0 {
        return Err(SystemError::NoRows);
    }
    if m < n {
        log::warn!("underdetermined system: {m} rows for {n} unknowns");
    }
    let ls = linalg::lstsq_truncated(sys.a.as_ref(), &sys.rhs);
    if ls.rank < n {
        log::debug!("rank {} of {} unknowns (gauge freedom and truncation)", ls.rank, n);
    }
    let coeffs = GoursatCoefficients::from_real(&ls.x, sys.column_map)?;
    let mut per_segment: Vec<(SegmentId, SegmentResidual, usize)> = Vec::new();
    for (r, info) in sys.rows.iter().enumerate() {
        let ax: f64 = (0..n).map(|j| sys.a[(r, j)] * ls.x[j]).sum();
        let res = ((ax - sys.rhs[r]) / info.weight).abs();
        match per_segment.iter_mut().find(|e| e.0 == info.segment) {
            Some(e) => {
                e.1.max = e.1.max.max(res);
                e.1.rms += res * res;
                e.2 += 1;
            }
            None => per_segment.push((info.segment, SegmentResidual { max: res, rms: res * res }, 1)),
        }
    }
    let per_segment = per_segment
        .into_iter()
        .map(|(id, mut r, count)| {
            r.rms = (r.rms / count as f64).sqrt();
            (id, r)
        })
        .collect();
    let has = |f: Functional| sys.rows.iter().any(|r| r.functional == f);
    Ok((
        coeffs,
        SolveDiagnostics {
            rank: ls.rank,
            unknowns: n,
            rows: m,
            per_segment,
            pressure_gauge_free: !has(Functional::P),
            stream_gauge_free: !has(Functional::Psi),
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational_basis::{orthogonalize, BasisFamily};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn sample_points() -> Vec<C64> {
        (0..40)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / 40.0;
                c(0.9 * t.cos() + 0.1, 0.7 * t.sin())
            })
            .collect()
    }

    /// Plain monomial basis `1, z` so coefficients are easy to write down.
    fn monomial_eval(points: &[C64]) -> BasisEval {
        BasisEval {
            values: Mat::from_fn(points.len(), 2, |i, j| if j == 0 { c(1.0, 0.0) } else { points[i] }),
            derivs: Mat::from_fn(points.len(), 2, |_, j| if j == 0 { c(0.0, 0.0) } else { c(1.0, 0.0) }),
            anchors: vec![c(0.0, 0.0); 2],
        }
    }

    fn dot(m: MatRef<'_, f64>, row: usize, x: &[f64]) -> f64 {
        (0..x.len()).map(|j| m[(row, j)] * x[j]).sum()
    }

    #[test]
    fn uniform_flow_rows() {
        let pts = sample_points();
        let rows = make_rows(&pts, &monomial_eval(&pts), &[]).unwrap();
        let mut coeffs = GoursatCoefficients::zeros(ColumnMap { ncols: 2, nholes: 0 });
        coeffs.cg[1] = c(1.0, 0.0);
        let x = coeffs.to_real();
        for (k, z) in pts.iter().enumerate() {
            assert!((dot(rows.u.as_ref(), k, &x) - 1.0).abs() < 1e-15);
            assert!(dot(rows.v.as_ref(), k, &x).abs() < 1e-15);
            assert!((dot(rows.psi.as_ref(), k, &x) - z.im).abs() < 1e-15);
        }
    }

    #[test]
    fn rigid_rotation_rows() {
        let pts = sample_points();
        let rows = make_rows(&pts, &monomial_eval(&pts), &[]).unwrap();
        let mut coeffs = GoursatCoefficients::zeros(ColumnMap { ncols: 2, nholes: 0 });
        coeffs.cf[1] = c(0.0, 0.5);
        let x = coeffs.to_real();
        for (k, z) in pts.iter().enumerate() {
            assert!((dot(rows.u.as_ref(), k, &x) - z.im).abs() < 1e-15);
            assert!((dot(rows.v.as_ref(), k, &x) + z.re).abs() < 1e-15);
            assert!((dot(rows.omega.as_ref(), k, &x) + 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn rotated_frame_rows_measure_along_and_across() {
        use crate::geometry::{Curve, Domain, Segment, SegmentId};
        let v = [c(0.0, 0.0), c(1.0, 0.0), c(1.0, 1.0), c(0.0, 1.0)];
        let segs = (0..4)
            .map(|k| {
                let bc = BoundaryConditionSpec::no_slip();
                let bc = if k == 1 { bc.with_frame(c(0.0, 2.0)) } else { bc };
                Segment::new(format!("side{k}"), Curve::Line { from: v[k], to: v[(k + 1) % 4] }, 5, bc)
            })
            .collect();
        let domain = Domain::new(segs, vec![], vec![]).unwrap();
        let pts = [c(1.0, 0.5), c(0.5, 0.0)];
        let samples: Vec<BoundarySample> = [1, 0]
            .iter()
            .zip(pts)
            .map(|(&segment, z)| BoundarySample { z, segment: SegmentId { loop_index: 0, segment }, weight: 1.0 })
            .collect();
        let sys = assemble(&domain, &samples, &monomial_eval(&pts), &[]).unwrap();
        let mut coeffs = GoursatCoefficients::zeros(ColumnMap { ncols: 2, nholes: 0 });
        coeffs.cg[1] = c(1.0, 0.0);
        let x = coeffs.to_real();
        // Uniform flow (1, 0): along `i` it is 0, across (along −1) it is −1.
        assert!(dot(sys.a.as_ref(), 0, &x).abs() < 1e-15);
        assert!((dot(sys.a.as_ref(), 1, &x) + 1.0).abs() < 1e-15);
        assert!((dot(sys.a.as_ref(), 2, &x) - 1.0).abs() < 1e-15);
        assert!(dot(sys.a.as_ref(), 3, &x).abs() < 1e-15);
        let bc = &domain.outer[1].bc;
        assert_eq!(bc.measure(Functional::U, 1.0, 0.0, || f64::NAN), 0.0);
        assert_eq!(bc.measure(Functional::V, 1.0, 0.0, || f64::NAN), -1.0);
        assert_eq!(bc.measure(Functional::P, 1.0, 0.0, || 3.0), 3.0);
    }

    #[test]
    fn log_column_at_unit_point() {
        let pts = [c(1.0, 0.0)];
        let be = monomial_eval(&pts);
        let logs = [LogTermBlock { center: c(0.0, 0.0) }];
        let rows = make_rows(&pts, &be, &logs).unwrap();
        let map = ColumnMap { ncols: 2, nholes: 1 };
        assert!((rows.u[(0, map.f0(0))] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn log_columns_match_closed_forms() {
        let pts = sample_points();
        let zc = c(0.05, -0.02);
        let logs = [LogTermBlock { center: zc }];
        let rows = make_rows(&pts, &monomial_eval(&pts), &logs).unwrap();
        let map = ColumnMap { ncols: 2, nholes: 1 };
        for (k, &z) in pts.iter().enumerate() {
            let o = 1.0 / (z - zc);
            let l = (z - zc).ln();
            assert!((rows.u[(k, map.f0(0))] - (z.conj() * o - 2.0 * l).re).abs() < 1e-13);
            assert!((rows.u[(k, map.imag(map.f0(0)))] + (z.conj() * o).im).abs() < 1e-13);
            assert!((rows.p[(k, map.f0(0))] - (4.0 * o).re).abs() < 1e-13);
            assert_eq!(rows.p[(k, map.g0(0))], 0.0);
        }
    }

    #[test]
    fn gauge_column_is_zero_in_flow_rows() {
        let pts = sample_points();
        let be = orthogonalize(&pts, &[BasisFamily::Polynomial { degree: 4 }]).unwrap().evaluate(&pts).unwrap();
        let rows = make_rows(&pts, &be, &[]).unwrap();
        let map = ColumnMap { ncols: 5, nholes: 0 };
        for k in 0..pts.len() {
            for fun in [Functional::U, Functional::V, Functional::P, Functional::Omega] {
                assert_eq!(rows.get(fun)[(k, map.cg(0))], 0.0);
                assert_eq!(rows.get(fun)[(k, map.imag(map.cg(0)))], 0.0);
            }
        }
    }

    #[test]
    fn real_packing_round_trip() {
        let map = ColumnMap { ncols: 3, nholes: 2 };
        let x: Vec<f64> = (0..map.nreal()).map(|k| k as f64 * 0.5 - 3.0).collect();
        let coeffs = GoursatCoefficients::from_real(&x, map).unwrap();
        assert_eq!(coeffs.to_real(), x);
        assert_eq!(map.nreal(), 4 * 3 + 4 * 2);
        assert_eq!(map.describe(map.imag(map.g0(1))), "Im g0[1]");
    }
}
