//! Evaluation of a solved flow and physics diagnostics.

use rayon::prelude::*;
use serde::Serialize;

use crate::geometry::{Domain, GeometryError, SegmentId};
use crate::rational_basis::{BasisError, OrthogonalBasis};
use crate::stokes_system::{Functional, GoursatCoefficients, GoursatTuple, LogTermBlock, SegmentResidual};
use crate::C64;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("point {0} coincides with a logarithmic center")]
    OnLogCenter(C64),
    #[error("finite-difference stencil around {0} leaves the fluid region")]
    StencilOutside(C64),
    #[error("no hole with index {0}")]
    NoSuchHole(usize),
}

/// Flow quantities at a point (μ = 1, pressure is `p/μ`).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct FieldSample {
    pub psi: f64,
    pub u: f64,
    pub v: f64,
    pub p: f64,
    pub omega: f64,
}

impl FieldSample {
    pub fn get(&self, fun: Functional) -> f64 {
        match fun {
            Functional::Psi => self.psi,
            Functional::U => self.u,
            Functional::V => self.v,
            Functional::P => self.p,
            Functional::Omega => self.omega,
        }
    }
}

/// An immutable solved flow.
#[derive(Debug, Clone)]
pub struct StokesSolution {
    pub domain: Domain,
    pub basis: OrthogonalBasis,
    pub coefficients: GoursatCoefficients,
    pub logs: Vec<LogTermBlock>,
}

/// Boundary errors of the imposed conditions at re-sampled points.
#[derive(Debug, Clone, Serialize)]
pub struct BoundaryResidual {
    pub per_segment: Vec<SegmentResidualEntry>,
    pub max: f64,
    pub accuracy_digits: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SegmentResidualEntry {
    pub loop_index: usize,
    pub segment: usize,
    pub label: String,
    #[serde(flatten)]
    pub residual: SegmentResidual,
}

/// Jumps of the velocity and stream function across a log branch cut.
#[derive(Debug, Clone, Default, Serialize)]
pub struct BranchCutReport {
    pub points: Vec<C64Pair>,
    pub velocity_jump: f64,
    pub velocity_scale: f64,
    pub psi_jumps: Vec<f64>,
    pub psi_jump_expected: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct C64Pair {
    pub x: f64,
    pub y: f64,
}

/// An identity `Σ terms = 0` checked numerically.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct IdentityCheck {
    /// Value of the sum.
    pub residual: f64,
    /// Sum of the absolute values of the terms.
    pub magnitude: f64,
}

impl IdentityCheck {
    fn of(terms: &[f64]) -> Self {
        Self { residual: terms.iter().sum(), magnitude: terms.iter().map(|t| t.abs()).sum() }
    }

    /// `|residual| / max(magnitude, floor)`.
    pub fn relative(&self, floor: f64) -> f64 {
        let r = self.residual.abs() / self.magnitude.max(floor).max(f64::MIN_POSITIVE);
        if r.is_nan() { f64::INFINITY } else { r }
    }
}

/// Finite-difference residuals of the governing identities at a point.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct PhysicsResiduals {
    /// `ψ_xxxx + 2ψ_xxyy + ψ_yyyy`.
    pub biharmonic: IdentityCheck,
    pub laplacian_p: IdentityCheck,
    pub laplacian_omega: IdentityCheck,
    /// `u_x + v_y`.
    pub divergence: IdentityCheck,
    /// `v_x − u_y − ω`.
    pub curl_minus_omega: IdentityCheck,
    /// `ψ_y − u`.
    pub stream_u: IdentityCheck,
    /// `ψ_x + v`.
    pub stream_v: IdentityCheck,
}

impl PhysicsResiduals {
    pub fn named(&self) -> [(&'static str, IdentityCheck); 7] {
        [
            ("biharmonic", self.biharmonic),
            ("laplacian p", self.laplacian_p),
            ("laplacian omega", self.laplacian_omega),
            ("divergence", self.divergence),
            ("curl - omega", self.curl_minus_omega),
            ("psi_y - u", self.stream_u),
            ("psi_x + v", self.stream_v),
        ]
    }
}

/// Fields on a rectangular lattice; nodes outside the fluid are `None`.
#[derive(Debug, Clone)]
pub struct FieldGrid {
    pub bbox: (f64, f64, f64, f64),
    pub nx: usize,
    pub ny: usize,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// Row-major, `y` outer.
    pub samples: Vec<Option<FieldSample>>,
    pub psi_reference: Option<f64>,
}

impl FieldGrid {
    pub fn at(&self, i: usize, j: usize) -> Option<&FieldSample> {
        self.samples[j * self.nx + i].as_ref()
    }

    pub fn masked_count(&self) -> usize {
        self.samples.iter().filter(|s| s.is_none()).count()
    }
}

impl StokesSolution {
    /// `(f, f′, g, g′)` at `z`.
    pub fn eval_goursat(&self, z: C64) -> Result<GoursatTuple, EvalError> {
        if self.logs.iter().any(|b| b.center == z) {
            return Err(EvalError::OnLogCenter(z));
        }
        let (vals, ders) = self.basis.eval_point(z)?;
        let c = &self.coefficients;
        let mut t = GoursatTuple::default();
        for (j, anchor) in self.basis.anchors().into_iter().enumerate() {
            let cg = c.cg[j] - anchor.conj() * c.cf[j];
            t.f += c.cf[j] * vals[j];
            t.fp += c.cf[j] * ders[j];
            t.g += cg * vals[j];
            t.gp += cg * ders[j];
        }
        for (block, &(f0, g0)) in self.logs.iter().zip(&c.logs) {
            let parts = block.contributions(z);
            for (w, p) in [f0.re, f0.im, g0.re, g0.im].into_iter().zip(parts) {
                t.f += w * p.f;
                t.fp += w * p.fp;
                t.g += w * p.g;
                t.gp += w * p.gp;
            }
        }
        Ok(t)
    }

    pub fn eval_fields(&self, z: C64) -> Result<FieldSample, EvalError> {
        let t = self.eval_goursat(z)?;
        Ok(fields_from_goursat(z, &t))
    }

    /// `p(z1) − p(z2)`.
    pub fn pressure_drop(&self, z1: C64, z2: C64) -> Result<f64, EvalError> {
        Ok(self.eval_fields(z1)?.p - self.eval_fields(z2)?.p)
    }

    /// Imposed conditions re-checked at training parameters and the midpoints
    /// between them.
    pub fn boundary_residual(&self) -> Result<BoundaryResidual, EvalError> {
        let segs: Vec<(SegmentId, &crate::geometry::Segment)> = self.domain.segments().collect();
        let per_segment = segs
            .par_iter()
            .map(|(id, seg)| -> Result<SegmentResidualEntry, EvalError> {
                let params = seg.residual_params()?;
                let mut max: f64 = 0.0;
                let mut sq = 0.0;
                let mut count = 0usize;
                for t in params {
                    let z = seg.point_at(t);
                    let fs = self.eval_fields(z)?;
                    for (fun, target) in &seg.bc.conditions {
                        let value = seg.bc.measure(*fun, fs.u, fs.v, || fs.get(*fun));
                        let e = (value - target.eval(z)).abs();
                        max = max.max(if e.is_nan() { f64::INFINITY } else { e });
                        sq += e * e;
                        count += 1;
                    }
                }
                Ok(SegmentResidualEntry {
                    loop_index: id.loop_index,
                    segment: id.segment,
                    label: seg.label.clone(),
                    residual: SegmentResidual { max, rms: (sq / count.max(1) as f64).sqrt() },
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let max = per_segment.iter().map(|e| e.residual.max).fold(0.0, f64::max);
        Ok(BoundaryResidual { per_segment, max, accuracy_digits: accuracy_digits(max) })
    }

    /// Richardson-extrapolated central differences at steps `h`, `2h` and `4h`.
    ///
    /// The stencil reaches `8h` from `z` along both axes.
    pub fn physics_residuals(&self, z: C64, h: f64) -> Result<PhysicsResiduals, EvalError> {
        if !self.domain.contains(z) || self.domain.distance_to_boundary(z) <= 8.0 * h {
            return Err(EvalError::StencilOutside(z));
        }
        let mut cache: std::collections::HashMap<(i32, i32), FieldSample> = Default::default();
        let mut at = |i: i32, j: i32| -> Result<FieldSample, EvalError> {
            if let Some(s) = cache.get(&(i, j)) {
                return Ok(*s);
            }
            let s = self.eval_fields(z + C64::new(i as f64 * h, j as f64 * h))?;
            cache.insert((i, j), s);
            Ok(s)
        };
        // Weighted sum of `f` over offsets at steps h, 2h and 4h, extrapolated twice.
        let mut stencil = |f: Functional, taps: &[(i32, i32, f64)], order: i32| -> Result<f64, EvalError> {
            let mut est = [0.0; 3];
            for (k, s) in [1, 2, 4].into_iter().enumerate() {
                for &(i, j, w) in taps {
                    est[k] += w * at(s * i, s * j)?.get(f);
                }
                est[k] /= (s as f64 * h).powi(order);
            }
            Ok(richardson(est[0], est[1], est[2]))
        };
        let dx = [(1, 0, 0.5), (-1, 0, -0.5)];
        let dy = [(0, 1, 0.5), (0, -1, -0.5)];
        let dxx = [(1, 0, 1.0), (0, 0, -2.0), (-1, 0, 1.0)];
        let dyy = [(0, 1, 1.0), (0, 0, -2.0), (0, -1, 1.0)];
        let dxxxx = [(2, 0, 1.0), (1, 0, -4.0), (0, 0, 6.0), (-1, 0, -4.0), (-2, 0, 1.0)];
        let dyyyy = [(0, 2, 1.0), (0, 1, -4.0), (0, 0, 6.0), (0, -1, -4.0), (0, -2, 1.0)];
        let mut dxxyy = Vec::with_capacity(9);
        for (i, wi) in [(-1, 1.0), (0, -2.0), (1, 1.0)] {
            for (j, wj) in [(-1, 1.0), (0, -2.0), (1, 1.0)] {
                dxxyy.push((i, j, wi * wj));
            }
        }
        use Functional::{Omega, Psi, P, U, V};
        let biharmonic = IdentityCheck::of(&[
            stencil(Psi, &dxxxx, 4)?,
            2.0 * stencil(Psi, &dxxyy, 4)?,
            stencil(Psi, &dyyyy, 4)?,
        ]);
        let laplacian_p = IdentityCheck::of(&[stencil(P, &dxx, 2)?, stencil(P, &dyy, 2)?]);
        let laplacian_omega = IdentityCheck::of(&[stencil(Omega, &dxx, 2)?, stencil(Omega, &dyy, 2)?]);
        let (ux, uy) = (stencil(U, &dx, 1)?, stencil(U, &dy, 1)?);
        let (vx, vy) = (stencil(V, &dx, 1)?, stencil(V, &dy, 1)?);
        let (psix, psiy) = (stencil(Psi, &dx, 1)?, stencil(Psi, &dy, 1)?);
        let c = at(0, 0)?;
        Ok(PhysicsResiduals {
            biharmonic,
            laplacian_p,
            laplacian_omega,
            divergence: IdentityCheck::of(&[ux, vy]),
            curl_minus_omega: IdentityCheck::of(&[vx, -uy, -c.omega]),
            stream_u: IdentityCheck::of(&[psiy, -c.u]),
            stream_v: IdentityCheck::of(&[psix, c.v]),
        })
    }

    /// Plain 13-point biharmonic stencil of ψ at step `h`.
    pub fn biharmonic_residual(&self, z: C64, h: f64) -> Result<f64, EvalError> {
        if !self.domain.contains(z) || self.domain.distance_to_boundary(z) <= 2.0 * h {
            return Err(EvalError::StencilOutside(z));
        }
        let psi = |i: f64, j: f64| self.eval_fields(z + C64::new(i * h, j * h)).map(|s| s.psi);
        let axis1 = psi(1.0, 0.0)? + psi(-1.0, 0.0)? + psi(0.0, 1.0)? + psi(0.0, -1.0)?;
        let diag = psi(1.0, 1.0)? + psi(-1.0, 1.0)? + psi(1.0, -1.0)? + psi(-1.0, -1.0)?;
        let axis2 = psi(2.0, 0.0)? + psi(-2.0, 0.0)? + psi(0.0, 2.0)? + psi(0.0, -2.0)?;
        Ok((20.0 * psi(0.0, 0.0)? - 8.0 * axis1 + 2.0 * diag + axis2) / h.powi(4))
    }

    /// True when a box of half-width `margin` around `z` meets a log branch
    /// cut (ψ is discontinuous there).
    pub fn near_branch_cut(&self, z: C64, margin: f64) -> bool {
        self.logs.iter().any(|b| (z.im - b.center.im).abs() <= margin && z.re - margin < b.center.re)
    }

    /// Velocity and ψ jumps across the cut `z_c − t`, `t > 0`, of hole `hole`.
    pub fn branch_cut_check(&self, hole: usize) -> Result<BranchCutReport, EvalError> {
        let block = *self.logs.get(hole).ok_or(EvalError::NoSuchHole(hole))?;
        let (f0, g0) = self.coefficients.logs[hole];
        let (x0, x1, y0, y1) = self.domain.bbox();
        let scale = self.domain.scale();
        let reach = (x1 - x0).max(y1 - y0);
        let delta = 1e-8 * scale;
        let candidates: Vec<C64> = (1..400)
            .map(|k| block.center - reach * k as f64 / 400.0)
            .filter(|&z| z.re >= x0 && z.im >= y0 && z.im <= y1)
            .filter(|&z| self.domain.contains(z) && self.domain.distance_to_boundary(z) > 1e-3 * scale)
            .collect();
        let step = (candidates.len() / 12).max(1);
        let points: Vec<C64> = candidates.into_iter().step_by(step).collect();
        let mut report = BranchCutReport {
            psi_jump_expected: 2.0 * std::f64::consts::PI * (g0 + f0.conj() * block.center).re,
            ..Default::default()
        };
        for &z in &points {
            let side = |sign: f64| -> Result<(C64, f64), EvalError> {
                let a = self.eval_fields(z + C64::new(0.0, sign * delta))?;
                let b = self.eval_fields(z + C64::new(0.0, 2.0 * sign * delta))?;
                let w = 2.0 * C64::new(a.u, a.v) - C64::new(b.u, b.v);
                Ok((w, 2.0 * a.psi - b.psi))
            };
            let (wp, psip) = side(1.0)?;
            let (wm, psim) = side(-1.0)?;
            report.velocity_jump = report.velocity_jump.max((wp - wm).norm());
            report.velocity_scale = report.velocity_scale.max(wp.norm()).max(wm.norm());
            report.psi_jumps.push(psip - psim);
            report.points.push(C64Pair { x: z.re, y: z.im });
        }
        Ok(report)
    }

    /// Fields on an `nx × ny` lattice over `bbox = (xmin, xmax, ymin, ymax)`.
    pub fn grid_eval(&self, bbox: (f64, f64, f64, f64), nx: usize, ny: usize) -> FieldGrid {
        let lin = |a: f64, b: f64, n: usize| -> Vec<f64> {
            (0..n).map(|k| if n == 1 { a } else { a + (b - a) * k as f64 / (n - 1) as f64 }).collect()
        };
        let xs = lin(bbox.0, bbox.1, nx);
        let ys = lin(bbox.2, bbox.3, ny);
        let samples = (0..nx * ny)
            .into_par_iter()
            .map(|k| {
                let z = C64::new(xs[k % nx], ys[k / nx]);
                if self.domain.contains(z) {
                    self.eval_fields(z).ok().filter(|s| {
                        [s.psi, s.u, s.v, s.p, s.omega].iter().all(|x| x.is_finite())
                    })
                } else {
                    None
                }
            })
            .collect();
        FieldGrid { bbox, nx, ny, xs, ys, samples, psi_reference: None }
    }
}

/// Removes the `h²` and `h⁴` error terms from estimates at `h`, `2h`, `4h`.
fn richardson(fine: f64, mid: f64, coarse: f64) -> f64 {
    let once_fine = (4.0 * fine - mid) / 3.0;
    let once_coarse = (4.0 * mid - coarse) / 3.0;
    (16.0 * once_fine - once_coarse) / 15.0
}

/// ψ, u, v, p, ω from Goursat data at `z`.
pub fn fields_from_goursat(z: C64, t: &GoursatTuple) -> FieldSample {
    let w = -t.f.conj() + z.conj() * t.fp + t.gp;
    FieldSample {
        psi: (z.conj() * t.f + t.g).im,
        u: w.re,
        v: -w.im,
        p: 4.0 * t.fp.re,
        omega: -4.0 * t.fp.im,
    }
}

/// `−log10(max)`, capped at 16 for an exactly zero residual.
pub fn accuracy_digits(max: f64) -> f64 {
    if max <= 0.0 {
        16.0
    } else {
        -max.log10()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Curve, Segment};
    use crate::rational_basis::{orthogonalize, BasisFamily};
    use crate::stokes_system::{BoundaryConditionSpec, ColumnMap};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn unit_square() -> Domain {
        let v = [c(0.0, 0.0), c(1.0, 0.0), c(1.0, 1.0), c(0.0, 1.0)];
        let segs = (0..4)
            .map(|k| {
                Segment::new(
                    format!("side{k}"),
                    Curve::Line { from: v[k], to: v[(k + 1) % 4] },
                    20,
                    BoundaryConditionSpec::velocity(
                        crate::stokes_system::Target::Constant(1.0),
                        crate::stokes_system::Target::Constant(0.0),
                    ),
                )
            })
            .collect();
        Domain::new(segs, vec![], vec![]).unwrap()
    }

    /// Degree-2 polynomial basis on the square with coefficients chosen so that
    /// the Goursat functions are `f = f1·z`, `g = g1·z`.
    fn linear_solution(f1: C64, g1: C64, logs: Vec<(LogTermBlock, (C64, C64))>) -> StokesSolution {
        let domain = unit_square();
        let pts: Vec<C64> = domain
            .segments()
            .flat_map(|(_, s)| crate::geometry::sample_segment(s).unwrap())
            .collect();
        let basis = orthogonalize(&pts, &[BasisFamily::Polynomial { degree: 1 }]).unwrap();
        let h = &basis.records[0].hessenberg;
        // column 1 = (z − h00)/h10, so z = h10·col1 + h00·col0
        let (h00, h10) = (h[(0, 0)], h[(1, 0)]);
        let map = ColumnMap { ncols: 2, nholes: logs.len() };
        let mut coefficients = GoursatCoefficients::zeros(map);
        coefficients.cf = vec![f1 * h00, f1 * h10];
        coefficients.cg = vec![g1 * h00, g1 * h10];
        coefficients.logs = logs.iter().map(|l| l.1).collect();
        StokesSolution { domain, basis, coefficients, logs: logs.into_iter().map(|l| l.0).collect() }
    }

    #[test]
    fn zero_coefficients_give_zero() {
        let sol = linear_solution(c(0.0, 0.0), c(0.0, 0.0), vec![]);
        assert_eq!(sol.eval_goursat(c(0.3, 0.2)).unwrap(), GoursatTuple::default());
    }

    #[test]
    fn uniform_flow_fields() {
        let sol = linear_solution(c(0.0, 0.0), c(1.0, 0.0), vec![]);
        let z = c(0.3, 0.7);
        let t = sol.eval_goursat(z).unwrap();
        assert!((t.g - z).norm() < 1e-15 && (t.gp - 1.0).norm() < 1e-15);
        let s = sol.eval_fields(z).unwrap();
        assert!((s.u - 1.0).abs() < 1e-15 && s.v.abs() < 1e-15 && (s.psi - 0.7).abs() < 1e-15);
        assert!(s.p.abs() < 1e-15 && s.omega.abs() < 1e-15);
        assert!(sol.pressure_drop(c(0.2, 0.2), c(0.8, 0.5)).unwrap().abs() < 1e-15);
        assert!(sol.boundary_residual().unwrap().max < 1e-14);
        assert!(sol.biharmonic_residual(c(0.5, 0.5), 1e-2).unwrap().abs() < 1e-6);
    }

    #[test]
    fn rigid_rotation_fields() {
        let sol = linear_solution(c(0.0, 0.5), c(0.0, 0.0), vec![]);
        let z = c(0.4, 0.3);
        let s = sol.eval_fields(z).unwrap();
        assert!((s.u - 0.3).abs() < 1e-15 && (s.v + 0.4).abs() < 1e-15);
        assert!((s.omega + 2.0).abs() < 1e-15 && s.p.abs() < 1e-15);
        assert!((s.psi - 0.125).abs() < 1e-15);
        assert!(sol.biharmonic_residual(c(0.5, 0.5), 1e-2).unwrap().abs() < 1e-5);
    }

    #[test]
    fn rest_state_with_constant_pressure() {
        let sol = linear_solution(c(1.0, 0.0), c(0.0, 0.0), vec![]);
        let s = sol.eval_fields(c(0.6, 0.1)).unwrap();
        assert!(s.u.abs() < 1e-15 && s.v.abs() < 1e-15 && (s.p - 4.0).abs() < 1e-15 && s.omega.abs() < 1e-15);
        assert!(sol.pressure_drop(c(0.2, 0.2), c(0.7, 0.9)).unwrap().abs() < 1e-14);
    }

    #[test]
    fn log_term_value() {
        let block = LogTermBlock { center: c(0.0, 0.0) };
        let sol = linear_solution(c(0.0, 0.0), c(0.0, 0.0), vec![(block, (c(1.0, 0.0), c(0.0, 0.0)))]);
        let e = std::f64::consts::E;
        let t = sol.eval_goursat(c(e, 0.0)).unwrap();
        assert!((t.f - 1.0).norm() < 1e-15);
        assert!((t.fp - 1.0 / e).norm() < 1e-15);
        assert!(matches!(sol.eval_goursat(c(0.0, 0.0)), Err(EvalError::OnLogCenter(_))));
    }

    #[test]
    fn grid_masks_outside_nodes() {
        let sol = linear_solution(c(0.0, 0.0), c(1.0, 0.0), vec![]);
        let g = sol.grid_eval((2.0, 3.0, 2.0, 3.0), 5, 5);
        assert_eq!(g.masked_count(), 25);
        let g = sol.grid_eval((0.0, 1.0, 0.0, 1.0), 10, 10);
        assert_eq!(g.masked_count(), 0);
        assert!(g.samples.iter().flatten().all(|s| (s.u - 1.0).abs() < 1e-14));
        let g = sol.grid_eval((-0.5, 1.5, -0.5, 1.5), 9, 9);
        let inside = g.xs.iter().filter(|x| (0.0..=1.0).contains(*x)).count()
            * g.ys.iter().filter(|y| (0.0..=1.0).contains(*y)).count();
        assert_eq!(g.masked_count(), 81 - inside);
    }

    #[test]
    fn zero_log_coefficients_have_no_jump() {
        let block = LogTermBlock { center: c(0.5, 0.5) };
        let sol = linear_solution(c(0.0, 0.3), c(1.0, 0.0), vec![(block, (c(0.0, 0.0), c(0.0, 0.0)))]);
        let rep = sol.branch_cut_check(0).unwrap();
        assert!(!rep.psi_jumps.is_empty());
        assert!(rep.velocity_jump < 1e-12);
        assert!(rep.psi_jumps.iter().all(|j| j.abs() < 1e-12));
    }

    #[test]
    fn log_jumps_match_analytic_constant() {
        let block = LogTermBlock { center: c(0.6, 0.5) };
        let (f0, g0) = (c(0.3, -0.2), c(-0.1, 0.4));
        let sol = linear_solution(c(0.0, 0.0), c(0.0, 0.0), vec![(block, (f0, g0))]);
        let rep = sol.branch_cut_check(0).unwrap();
        assert!(rep.velocity_jump <= 1e-10 * rep.velocity_scale.max(1.0));
        for j in &rep.psi_jumps {
            assert!((j - rep.psi_jump_expected).abs() < 1e-7, "{j} vs {}", rep.psi_jump_expected);
        }
    }
}
