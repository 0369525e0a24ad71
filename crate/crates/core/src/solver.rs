//! End-to-end solve: sampling, AAA poles, basis, assembly, least squares.

use std::fmt;
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;

use crate::aaa;
use crate::geometry::{distance_to_polyline, sample_segment, Domain, Segment};
use crate::rational_basis::{self, BasisFamily};
use crate::solution::{BoundaryResidual, StokesSolution};
use crate::stokes_system::{self, BoundarySample, LogTermBlock, SegmentResidual};
use crate::{Result, C64};

/// Values fitted by AAA on curved boundary samples.
#[derive(Clone, Default)]
pub enum BoundaryFunction {
    /// `conj(z)`.
    #[default]
    Schwarz,
    Custom(Arc<dyn Fn(C64) -> C64 + Send + Sync>),
}

impl fmt::Debug for BoundaryFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryFunction::Schwarz => write!(f, "Schwarz"),
            BoundaryFunction::Custom(_) => write!(f, "Custom"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct AaaOptions {
    pub tol: f64,
    pub max_degree: usize,
    pub boundary_function: BoundaryFunction,
    /// Relative residue threshold for spurious poles; 0 disables cleanup.
    pub cleanup_tol: f64,
}

impl Default for AaaOptions {
    fn default() -> Self {
        Self {
            tol: aaa::DEFAULT_TOL,
            max_degree: aaa::DEFAULT_MAX_DEGREE,
            boundary_function: BoundaryFunction::Schwarz,
            cleanup_tol: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum RowWeighting {
    #[default]
    Uniform,
    /// `sqrt(local spacing / mean spacing)` per sample.
    Spacing,
}

/// Everything needed to compute one flow.
#[derive(Debug, Clone)]
pub struct Problem {
    pub name: String,
    pub domain: Domain,
    pub polynomial_degree: usize,
    /// Run AAA on samples of segments flagged `curved`.
    pub aaa: Option<AaaOptions>,
    pub weighting: RowWeighting,
    /// Points for the reported pressure drop `p(z1) − p(z2)`.
    pub pressure_probe: Option<(C64, C64)>,
}

impl Problem {
    pub fn new(name: impl Into<String>, domain: Domain, polynomial_degree: usize) -> Self {
        Self {
            name: name.into(),
            domain,
            polynomial_degree,
            aaa: None,
            weighting: RowWeighting::Uniform,
            pressure_probe: None,
        }
    }
}

/// Where a pole came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PoleSource {
    Lightning,
    Aaa,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoleRecord {
    pub z: C64Serde,
    pub source: PoleSource,
    /// Corner index for lightning poles, 0 for AAA.
    pub group: usize,
}

/// Serializable complex number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct C64Serde {
    pub x: f64,
    pub y: f64,
}

impl From<C64> for C64Serde {
    fn from(z: C64) -> Self {
        Self { x: z.re, y: z.im }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Timings {
    pub sampling_s: f64,
    pub aaa_s: f64,
    pub orthogonalize_s: f64,
    pub assemble_s: f64,
    pub solve_s: f64,
    pub residual_s: f64,
    pub total_s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PoleCounts {
    pub lightning: usize,
    pub aaa: usize,
    /// AAA poles discarded as lying in the fluid or next to a non-curved segment.
    pub aaa_removed: usize,
    pub aaa_degree: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct BranchJump {
    pub hole: usize,
    pub velocity_jump: f64,
    pub velocity_scale: f64,
    pub psi_jump: Option<f64>,
    pub psi_jump_spread: f64,
    pub psi_jump_expected: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LsqSegmentResidual {
    pub loop_index: usize,
    pub segment: usize,
    #[serde(flatten)]
    pub residual: SegmentResidual,
}

/// Summary of one solve.
#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub name: String,
    pub accuracy_digits: f64,
    pub boundary_residual: BoundaryResidual,
    pub collocation_residual: Vec<LsqSegmentResidual>,
    pub sample_count: usize,
    pub basis_columns: usize,
    pub unknowns: usize,
    pub rank: usize,
    pub poles: PoleCounts,
    pub pressure_gauge_free: bool,
    pub stream_gauge_free: bool,
    pub pressure_drop: Option<f64>,
    pub branch_jumps: Vec<BranchJump>,
    pub timings: Timings,
}

/// A solved problem with its report and poles.
#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub solution: StokesSolution,
    pub report: SolveReport,
    pub poles: Vec<PoleRecord>,
}

/// Boundary samples with row weights, in segment order.
pub fn collect_samples(domain: &Domain, weighting: RowWeighting) -> Result<Vec<BoundarySample>> {
    let mut out = Vec::new();
    let mut spacing = Vec::new();
    for (id, seg) in domain.segments() {
        let pts = sample_segment(seg)?;
        for (k, &z) in pts.iter().enumerate() {
            let prev = if k > 0 { pts[k - 1] } else { z };
            let next = if k + 1 < pts.len() { pts[k + 1] } else { z };
            let denom = if k > 0 && k + 1 < pts.len() { 2.0 } else { 1.0 };
            spacing.push((next - prev).norm() / denom);
            out.push(BoundarySample { z, segment: id, weight: 1.0 });
        }
    }
    if weighting == RowWeighting::Spacing && !spacing.is_empty() {
        let mean = spacing.iter().sum::<f64>() / spacing.len() as f64;
        for (s, d) in out.iter_mut().zip(&spacing) {
            s.weight = (d / mean).sqrt().max(1e-8);
        }
    }
    Ok(out)
}

/// AAA poles for the curved segments. Poles in the fluid, and poles lying
/// closer to a segment that is not flagged curved, are discarded.
pub fn aaa_poles(domain: &Domain, opts: &AaaOptions) -> Result<(Vec<C64>, usize, usize)> {
    let mut zb = Vec::new();
    for (_, seg) in domain.segments().filter(|(_, s)| s.curved) {
        zb.extend(sample_segment(seg)?);
    }
    if zb.len() < 2 {
        return Ok((Vec::new(), 0, 0));
    }
    let fb: Vec<C64> = match &opts.boundary_function {
        BoundaryFunction::Schwarz => zb.iter().map(|z| z.conj()).collect(),
        BoundaryFunction::Custom(f) => zb.iter().map(|&z| f(z)).collect(),
    };
    let mut rep = aaa::aaa_fit(&zb, &fb, opts.tol, opts.max_degree)?;
    if opts.cleanup_tol > 0.0 {
        rep = aaa::froissart_cleanup(&rep, &zb, &fb, opts.cleanup_tol)?;
    }
    let report = rep.poles()?;
    let exterior = aaa::filter_exterior(&report, domain);
    let curved: Vec<Vec<C64>> = domain.segments().filter(|(_, s)| s.curved).map(|(_, s)| s.dense_points(400)).collect();
    let straight: Vec<Vec<C64>> = domain.segments().filter(|(_, s)| !s.curved).map(|(_, s)| s.dense_points(400)).collect();
    let nearest = |z: C64, lines: &[Vec<C64>]| {
        lines.iter().map(|l| distance_to_polyline(z, l)).fold(f64::INFINITY, f64::min)
    };
    let kept: Vec<C64> = exterior.into_iter().filter(|&p| nearest(p, &curved) <= nearest(p, &straight)).collect();
    let removed = report.poles.len() - kept.len();
    Ok((kept, removed, rep.degree()))
}

/// Adds samples around the boundary point nearest to each pole, graded
/// geometrically from a quarter of the pole distance up to eight times it.
/// Every curved segment within ten times the pole distance is refined.
pub fn refine_near_poles(domain: &mut Domain, poles: &[C64]) {
    const COARSE: usize = 400;
    let mut segments: Vec<&mut Segment> =
        domain.outer.iter_mut().chain(domain.holes.iter_mut().flat_map(|h| h.boundary.iter_mut())).collect();
    for &pole in poles {
        let nearest: Vec<(f64, f64)> = segments.iter().map(|seg| nearest_param(seg, pole, COARSE)).collect();
        let closest = nearest.iter().map(|n| n.1).fold(f64::INFINITY, f64::min);
        for (seg, &(t0, dist)) in segments.iter_mut().zip(&nearest) {
            if !seg.curved || dist > 10.0 * closest {
                continue;
            }
            let step = closest / seg.length();
            seg.refinement.push(t0);
            for k in 0..6 {
                let offset = 0.25 * step * f64::from(1 << k);
                seg.refinement.extend([t0 - offset, t0 + offset]);
            }
        }
    }
}

/// Parameter and distance of the point of `seg` nearest to `z`.
fn nearest_param(seg: &Segment, z: C64, coarse: usize) -> (f64, f64) {
    let dist = |t: f64| (seg.point_at(t) - z).norm();
    let h = 1.0 / (coarse - 1) as f64;
    let k = (0..coarse).min_by(|&a, &b| dist(a as f64 * h).total_cmp(&dist(b as f64 * h))).unwrap_or(0);
    let (mut lo, mut hi) = (((k as f64 - 1.0) * h).max(0.0), ((k as f64 + 1.0) * h).min(1.0));
    for _ in 0..60 {
        let (a, b) = (lo + (hi - lo) / 3.0, hi - (hi - lo) / 3.0);
        if dist(a) < dist(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    let t = 0.5 * (lo + hi);
    (t, dist(t))
}

/// Runs the full pipeline.
pub fn solve_problem(problem: &Problem) -> Result<SolveOutcome> {
    let t_start = Instant::now();
    let mut timings = Timings::default();

    let t = Instant::now();
    let (aaa_kept, aaa_removed, aaa_degree) = match &problem.aaa {
        Some(opts) => aaa_poles(&problem.domain, opts)?,
        None => (Vec::new(), 0, 0),
    };
    timings.aaa_s = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let mut refined = problem.domain.clone();
    refine_near_poles(&mut refined, &aaa_kept);
    let dom = &refined;
    let samples = collect_samples(dom, problem.weighting)?;
    timings.sampling_s = t.elapsed().as_secs_f64();

    let mut families = vec![BasisFamily::Polynomial { degree: problem.polynomial_degree }];
    let mut poles = Vec::new();
    let mut lightning = 0;
    for (k, corner) in dom.corners.iter().enumerate() {
        // Farthest first, so near-corner columns are never formed by
        // cancelling large multiples of earlier ones.
        let mut group = corner.poles();
        group.reverse();
        lightning += group.len();
        poles.extend(group.iter().map(|&z| PoleRecord { z: z.into(), source: PoleSource::Lightning, group: k }));
        families.push(BasisFamily::PoleGroup { poles: group, anchor: corner.vertex });
    }
    if !aaa_kept.is_empty() {
        poles.extend(aaa_kept.iter().map(|&z| PoleRecord { z: z.into(), source: PoleSource::Aaa, group: 0 }));
        families.push(BasisFamily::PoleGroup { poles: aaa_kept.clone(), anchor: C64::new(0.0, 0.0) });
    }
    let mut logs = Vec::new();
    for hole in &dom.holes {
        families.push(BasisFamily::Laurent { center: hole.laurent_center, degree: hole.laurent_degree });
        for &(center, degree) in &hole.extra_centers {
            families.push(BasisFamily::Laurent { center, degree });
        }
        logs.push(LogTermBlock { center: hole.laurent_center });
    }

    let t = Instant::now();
    let points: Vec<C64> = samples.iter().map(|s| s.z).collect();
    let basis = rational_basis::orthogonalize(&points, &families)?;
    let be = basis.evaluate(&points)?;
    timings.orthogonalize_s = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let sys = stokes_system::assemble(dom, &samples, &be, &logs)?;
    timings.assemble_s = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let (coefficients, diag) = stokes_system::solve(&sys)?;
    timings.solve_s = t.elapsed().as_secs_f64();

    let solution = StokesSolution { domain: dom.clone(), basis, coefficients, logs };

    let t = Instant::now();
    let residual = solution.boundary_residual()?;
    timings.residual_s = t.elapsed().as_secs_f64();

    let pressure_drop = match problem.pressure_probe {
        Some((a, b)) => Some(solution.pressure_drop(a, b)?),
        None => None,
    };
    let mut branch_jumps = Vec::new();
    for h in 0..dom.holes.len() {
        let rep = solution.branch_cut_check(h)?;
        let (lo, hi) = rep
            .psi_jumps
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
        branch_jumps.push(BranchJump {
            hole: h,
            velocity_jump: rep.velocity_jump,
            velocity_scale: rep.velocity_scale,
            psi_jump: rep.psi_jumps.first().copied(),
            psi_jump_spread: if rep.psi_jumps.is_empty() { 0.0 } else { hi - lo },
            psi_jump_expected: rep.psi_jump_expected,
        });
    }
    timings.total_s = t_start.elapsed().as_secs_f64();

    let report = SolveReport {
        name: problem.name.clone(),
        accuracy_digits: residual.accuracy_digits,
        boundary_residual: residual,
        collocation_residual: diag
            .per_segment
            .iter()
            .map(|(id, r)| LsqSegmentResidual { loop_index: id.loop_index, segment: id.segment, residual: *r })
            .collect(),
        sample_count: samples.len(),
        basis_columns: solution.basis.ncols(),
        unknowns: diag.unknowns,
        rank: diag.rank,
        poles: PoleCounts { lightning, aaa: aaa_kept.len(), aaa_removed, aaa_degree },
        pressure_gauge_free: diag.pressure_gauge_free,
        stream_gauge_free: diag.stream_gauge_free,
        pressure_drop,
        branch_jumps,
        timings,
    };
    log::info!(
        "{}: {:.2} digits, {} unknowns, rank {}, {:.3}s",
        report.name,
        report.accuracy_digits,
        report.unknowns,
        report.rank,
        report.timings.total_s
    );
    Ok(SolveOutcome { solution, report, poles })
}
