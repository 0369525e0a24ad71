//! Acceptance checks shared by the `validate` subcommand and the acceptance test target.

use std::fmt;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cases::{self, ConstrictionConfig, GalleryConfig, TwoCylinderConfig, TABLE_CASES};
use crate::geometry::{Curve, Domain, Segment};
use crate::rational_basis::{self, BasisFamily};
use crate::solution::StokesSolution;
use crate::solver::{collect_samples, solve_problem, Problem, RowWeighting, SolveOutcome};
use crate::stokes_system::{BoundaryConditionSpec, ColumnMap, Functional, GoursatCoefficients, Target};
use crate::{Result, C64};

/// Result of one acceptance criterion.
#[derive(Debug, Clone, Serialize)]
pub struct CriterionOutcome {
    pub id: u32,
    pub title: &'static str,
    pub passed: bool,
    /// Advisory criteria are reported but never fail the suite.
    pub advisory: bool,
    pub detail: String,
    pub seconds: f64,
}

impl fmt::Display for CriterionOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match (self.passed, self.advisory) {
            (true, _) => "PASS",
            (false, true) => "WARN",
            (false, false) => "FAIL",
        };
        write!(f, "[{tag}] criterion {:>2} {}: {} ({:.2}s)", self.id, self.title, self.detail, self.seconds)
    }
}

pub const CRITERIA: [(u32, &str); 11] = [
    (1, "manufactured round trip"),
    (2, "exact representability"),
    (3, "concentric Couette"),
    (4, "two-cylinder table"),
    (5, "channel pressure drop"),
    (6, "polynomial-only failure"),
    (7, "pole hygiene"),
    (8, "physics invariants"),
    (9, "branch-cut single-valuedness"),
    (10, "lightning convergence"),
    (11, "corner eddies (advisory)"),
];

pub const CHANNEL_LAMBDAS: [f64; 4] = [0.2, 0.4, 0.6, 0.8];

/// A cached solve with the wall-clock time of its first computation.
#[derive(Debug)]
pub struct TimedSolve {
    pub outcome: SolveOutcome,
    pub seconds: f64,
}

/// Runs criteria while reusing solves between them.
#[derive(Debug, Default)]
pub struct Suite {
    solves: Vec<(String, Arc<TimedSolve>)>,
}

type Check = std::result::Result<(bool, String), crate::Error>;

impl Suite {
    pub fn new() -> Self {
        Self::default()
    }

    fn solve(&mut self, key: &str, build: impl FnOnce() -> Result<Problem>) -> Result<Arc<TimedSolve>> {
        if let Some((_, s)) = self.solves.iter().find(|(k, _)| k == key) {
            return Ok(s.clone());
        }
        let problem = build()?;
        let t = Instant::now();
        let outcome = solve_problem(&problem)?;
        let solved = Arc::new(TimedSolve { outcome, seconds: t.elapsed().as_secs_f64() });
        self.solves.push((key.to_string(), solved.clone()));
        Ok(solved)
    }

    fn channel(&mut self, lambda: f64) -> Result<Arc<TimedSolve>> {
        self.solve(&format!("channel-{lambda}"), || {
            Ok(cases::build_constricted_channel(&ConstrictionConfig { lambda, ..Default::default() })?)
        })
    }

    fn two_cylinder(&mut self, case: char) -> Result<Arc<TimedSolve>> {
        self.solve(&format!("two-cylinder-{case}"), || {
            Ok(cases::build_two_cylinder(&TwoCylinderConfig::table_case(case)?)?)
        })
    }

    fn gallery(&mut self, name: &str) -> Result<Arc<TimedSolve>> {
        self.solve(name, || Ok(cases::build_gallery_case(name, &GalleryConfig::defaults(name)?)?))
    }

    fn bifurcation_without_hole(&mut self, corner_poles: usize) -> Result<Arc<TimedSolve>> {
        self.solve(&format!("bifurcation-n{corner_poles}"), || {
            let cfg = GalleryConfig { corner_poles, with_hole: false, ..GalleryConfig::defaults("bifurcation-ellipse")? };
            Ok(cases::build_gallery_case("bifurcation-ellipse", &cfg)?)
        })
    }

    /// Names of the solves computed so far.
    pub fn solved_cases(&self) -> Vec<String> {
        self.solves.iter().map(|(k, _)| k.clone()).collect()
    }

    pub fn run(&mut self, id: u32) -> CriterionOutcome {
        let title = CRITERIA.iter().find(|c| c.0 == id).map(|c| c.1).unwrap_or("unknown");
        let t = Instant::now();
        let result = match id {
            1 => criterion_manufactured(),
            2 => self.criterion_exact(),
            3 => criterion_couette(),
            4 => self.criterion_two_cylinder(),
            5 => self.criterion_channel(),
            6 => self.criterion_polynomial_failure(),
            7 => self.criterion_pole_hygiene(),
            8 => self.criterion_physics(),
            9 => self.criterion_branch_cut(),
            10 => self.criterion_lightning(),
            11 => self.criterion_eddies(),
            _ => Ok((false, "no such criterion".into())),
        };
        let (passed, detail) = result.unwrap_or_else(|e| (false, format!("error: {e}")));
        CriterionOutcome { id, title, passed, advisory: id == 11, detail, seconds: t.elapsed().as_secs_f64() }
    }

    pub fn run_all(&mut self) -> Vec<CriterionOutcome> {
        CRITERIA.iter().map(|&(id, _)| self.run(id)).collect()
    }

    fn criterion_exact(&mut self) -> Check {
        let t = Instant::now();
        let uniform = solve_problem(&cases::build_uniform_flow_square(10, 60)?)?;
        let channel = solve_problem(&cases::build_constricted_channel(&ConstrictionConfig {
            lambda: 0.0,
            polynomial_degree: 20,
            samples_per_segment: 150,
            ..Default::default()
        })?)?;
        let secs = t.elapsed().as_secs_f64();
        let r_uniform = uniform.report.boundary_residual.max;
        let r_channel = channel.report.boundary_residual.max;
        let dp = channel.report.pressure_drop.unwrap_or(f64::NAN);
        let ok = r_uniform <= 1e-10 && r_channel <= 1e-10 && (dp - 24.0).abs() <= 1e-8 && secs < 2.0;
        Ok((
            ok,
            format!(
                "uniform residual {r_uniform:.2e}, Poiseuille residual {r_channel:.2e}, dP - 24 = {:.2e}, {secs:.2}s (limits 1e-10, 1e-8, 2s)",
                dp - 24.0
            ),
        ))
    }

    fn criterion_two_cylinder(&mut self) -> Check {
        let mut worst: f64 = 0.0;
        let mut slowest: f64 = 0.0;
        let mut parts = Vec::new();
        for c in TABLE_CASES {
            let s = self.two_cylinder(c)?;
            let r = s.outcome.report.boundary_residual.max;
            worst = worst.max(r);
            slowest = slowest.max(s.seconds);
            parts.push(format!("{c}:{r:.1e}"));
        }
        Ok((
            worst <= 1e-8 && slowest <= 1.0,
            format!("residuals [{}], worst {worst:.2e}, slowest {slowest:.2}s (limits 1e-8, 1s)", parts.join(" ")),
        ))
    }

    fn criterion_channel(&mut self) -> Check {
        let mut ok = true;
        let mut parts = Vec::new();
        for lambda in CHANNEL_LAMBDAS {
            let s = self.channel(lambda)?;
            let dp = s.outcome.report.pressure_drop.unwrap_or(f64::NAN);
            let elt = cases::elt_pressure_drop(lambda, 1.0, 4)?;
            let rel = (dp - elt).abs() / dp.abs();
            let res = s.outcome.report.boundary_residual.max;
            ok &= rel <= 0.03 && res <= 1e-5 && s.seconds <= 10.0;
            parts.push(format!("λ={lambda}: dP {dp:.4} rel {:.2}% res {res:.1e} {:.1}s", rel * 100.0, s.seconds));
        }
        Ok((ok, format!("{} (limits 3%, 1e-5, 10s)", parts.join("; "))))
    }

    fn criterion_polynomial_failure(&mut self) -> Check {
        let problem = cases::build_constricted_channel(&ConstrictionConfig {
            lambda: 0.8,
            polynomial_degree: 200,
            use_aaa: false,
            ..Default::default()
        })?;
        let poly = solve_problem(&problem)?;
        let r_poly = poly.report.boundary_residual.max;
        let aaa = self.channel(0.8)?;
        let r_aaa = aaa.outcome.report.boundary_residual.max;
        let dp = aaa.outcome.report.pressure_drop.unwrap_or(f64::NAN);
        let rel = (dp - cases::elt_pressure_drop(0.8, 1.0, 4)?).abs() / dp.abs();
        Ok((
            r_poly > 1e-2 && r_aaa <= 1e-5 && rel <= 0.03,
            format!("degree-200 polynomial residual {r_poly:.2e} (> 1e-2), AAA residual {r_aaa:.2e}, rel dP {:.2}%", rel * 100.0),
        ))
    }

    fn criterion_pole_hygiene(&mut self) -> Check {
        for lambda in CHANNEL_LAMBDAS {
            self.channel(lambda)?;
        }
        self.gallery("bifurcation-ellipse")?;
        let mut total = 0;
        let mut bad = 0;
        let mut solves = 0;
        for (_, s) in &self.solves {
            let aaa: Vec<C64> = s
                .outcome
                .poles
                .iter()
                .filter(|p| p.source == crate::solver::PoleSource::Aaa)
                .map(|p| C64::new(p.z.x, p.z.y))
                .collect();
            if aaa.is_empty() {
                continue;
            }
            solves += 1;
            total += aaa.len();
            bad += aaa.iter().filter(|&&z| s.outcome.solution.domain.contains(z)).count();
        }
        Ok((bad == 0 && solves > 0, format!("{bad} of {total} retained AAA poles in the fluid over {solves} solves")))
    }

    fn ensure_all_cases(&mut self) -> Result<()> {
        for c in TABLE_CASES {
            self.two_cylinder(c)?;
        }
        for lambda in CHANNEL_LAMBDAS {
            self.channel(lambda)?;
        }
        for name in cases::GALLERY_CASES {
            self.gallery(name)?;
        }
        Ok(())
    }

    fn criterion_physics(&mut self) -> Check {
        self.ensure_all_cases()?;
        let mut worst = (0.0, String::new());
        for (name, s) in &self.solves {
            let r = physics_check(&s.outcome.solution, 20, 7)?;
            if r.worst >= worst.0 {
                worst = (r.worst, format!("{name} ({})", r.quantity));
            }
        }
        Ok((
            worst.0 <= 1e-4,
            format!("worst relative FD residual {:.2e} in {} over {} cases (limit 1e-4)", worst.0, worst.1, self.solves.len()),
        ))
    }

    fn criterion_branch_cut(&mut self) -> Check {
        self.ensure_all_cases()?;
        let mut worst_vel: f64 = 0.0;
        let mut worst_psi: f64 = 0.0;
        let mut count = 0;
        for (_, s) in &self.solves {
            let sol = &s.outcome.solution;
            for h in 0..sol.domain.holes.len() {
                let rep = sol.branch_cut_check(h)?;
                if rep.psi_jumps.is_empty() {
                    return Ok((false, format!("no branch-cut points for hole {h}")));
                }
                count += 1;
                let (lo, hi) = rep.psi_jumps.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
                let psi_scale = rep.velocity_scale.max(f64::MIN_POSITIVE) * sol.domain.scale();
                worst_vel = worst_vel.max(rep.velocity_jump / rep.velocity_scale.max(f64::MIN_POSITIVE));
                worst_psi = worst_psi.max((hi - lo) / psi_scale);
            }
        }
        Ok((
            count > 0 && worst_vel <= 1e-10 && worst_psi <= 1e-10,
            format!("{count} holes: relative velocity jump {worst_vel:.2e}, relative psi-jump spread {worst_psi:.2e} (limits 1e-10)"),
        ))
    }

    fn criterion_lightning(&mut self) -> Check {
        let coarse = self.bifurcation_without_hole(8)?.outcome.report.boundary_residual.max;
        let fine = self.bifurcation_without_hole(32)?.outcome.report.boundary_residual.max;
        let drop = (coarse / fine).log10();
        Ok((drop >= 2.0, format!("residual {coarse:.2e} at N=8, {fine:.2e} at N=32: {drop:.2} orders (need >= 2)")))
    }

    fn criterion_eddies(&mut self) -> Check {
        let s = self.gallery("heart-hole-channel")?;
        let strength = first_eddy_strength(&s.outcome.solution)?;
        match strength {
            Some(e) => Ok((
                (1e-9..=1e-5).contains(&e),
                format!("first eddy |psi - psi_hole| = {e:.2e} (expected within 100x of 1e-7)"),
            )),
            None => Ok((false, "no eddy detected in the notch".into())),
        }
    }
}

/// Random coefficients on a square, regenerated boundary data, re-solved fields.
pub fn criterion_manufactured() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(20240601);
    let corners = [C64::new(-1.0, -1.0), C64::new(1.0, -1.0), C64::new(1.0, 1.0), C64::new(-1.0, 1.0)];
    let square = |bcs: [BoundaryConditionSpec; 5]| -> Result<Domain> {
        let [bottom, right, top, left_upper, left_lower] = bcs;
        let pts = [corners[0], corners[1], corners[2], corners[3], C64::new(-1.0, 0.0), corners[0]];
        let segs = [bottom, right, top, left_upper, left_lower]
            .into_iter()
            .enumerate()
            .map(|(k, bc)| Segment::new(format!("side {k}"), Curve::Line { from: pts[k], to: pts[k + 1] }, 40, bc))
            .collect();
        Ok(Domain::new(segs, vec![], vec![])?)
    };
    let degree = 10;
    let placeholder = square(std::array::from_fn(|_| BoundaryConditionSpec::no_slip()))?;
    let points: Vec<C64> = collect_samples(&placeholder, RowWeighting::Uniform)?.iter().map(|s| s.z).collect();
    let basis = rational_basis::orthogonalize(&points, &[BasisFamily::Polynomial { degree }])?;
    let map = ColumnMap { ncols: basis.ncols(), nholes: 0 };
    let mut coefficients = GoursatCoefficients::zeros(map);
    let mut random = || C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    coefficients.cf.iter_mut().for_each(|c| *c = random());
    coefficients.cg.iter_mut().for_each(|c| *c = random());
    let reference = Arc::new(StokesSolution { domain: placeholder, basis, coefficients, logs: vec![] });
    let target = |fun: Functional| {
        let r = reference.clone();
        (fun, Target::function(fun.name(), move |z| r.eval_fields(z).map(|s| s.get(fun)).unwrap_or(f64::NAN)))
    };
    let velocity = || BoundaryConditionSpec::new(target(Functional::U), target(Functional::V));
    let mixed = BoundaryConditionSpec::new(target(Functional::Psi), target(Functional::P));
    let domain = square([velocity(), velocity(), velocity(), velocity(), mixed])?;
    let t = Instant::now();
    let solved = solve_problem(&Problem::new("manufactured", domain, degree))?;
    let secs = t.elapsed().as_secs_f64();
    let mut worst: f64 = 0.0;
    let mut magnitude: f64 = 0.0;
    for _ in 0..50 {
        let z = C64::new(rng.random_range(-0.95..0.95), rng.random_range(-0.95..0.95));
        let a = solved.solution.eval_fields(z)?;
        let b = reference.eval_fields(z)?;
        for fun in [Functional::Psi, Functional::U, Functional::V, Functional::P, Functional::Omega] {
            worst = worst.max((a.get(fun) - b.get(fun)).abs());
            magnitude = magnitude.max(b.get(fun).abs());
        }
    }
    let rel = worst / magnitude;
    Ok((rel <= 1e-10 && secs < 1.0, format!("max field error {rel:.2e} relative to {magnitude:.2e}, {secs:.2}s (limits 1e-10, 1s)")))
}

/// Concentric cylinders against the Couette profile.
pub fn criterion_couette() -> Check {
    let cfg = TwoCylinderConfig { u_in: 0.0, ..TwoCylinderConfig::new(0.5, 0.0, 0.0, 1.0, 0.0) };
    let t = Instant::now();
    let solved = solve_problem(&cases::build_two_cylinder(&cfg)?)?;
    let secs = t.elapsed().as_secs_f64();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let r = rng.random_range(0.5..1.0);
        let theta = rng.random_range(0.0..std::f64::consts::TAU);
        let s = solved.solution.eval_fields(C64::from_polar(r, theta))?;
        let u_theta = -s.u * theta.sin() + s.v * theta.cos();
        worst = worst.max((u_theta - cases::couette_oracle(0.5, 1.0, 1.0, 0.0, r)?).abs());
    }
    Ok((worst <= 1e-8 && secs < 2.0, format!("max |u_theta - oracle| = {worst:.2e}, {secs:.2}s (limits 1e-8, 2s)")))
}

/// Worst normalized finite-difference residual over random interior points.
#[derive(Debug, Clone, Serialize)]
pub struct PhysicsCheck {
    pub worst: f64,
    pub quantity: &'static str,
    pub points: usize,
}

/// Interior points at least `0.1ℓ` from the boundary, away from branch cuts.
pub fn random_interior_points(sol: &StokesSolution, count: usize, seed: u64, clearance: f64) -> Vec<C64> {
    let (x0, x1, y0, y1) = sol.domain.bbox();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for _ in 0..200 * count {
        if out.len() == count {
            break;
        }
        let z = C64::new(rng.random_range(x0..x1), rng.random_range(y0..y1));
        if sol.domain.contains(z) && sol.domain.distance_to_boundary(z) >= clearance && !sol.near_branch_cut(z, clearance) {
            out.push(z);
        }
    }
    out
}

/// FD checks with step `h = 0.01ℓ`. The biharmonic stencil is measured
/// against `max|ψ|/h⁴`, the size of its inputs. The other identities are
/// taken relative to the summed magnitude of their terms, floored at `10⁻³`
/// of the natural scale built from `U` and `ℓ`.
pub fn physics_check(sol: &StokesSolution, count: usize, seed: u64) -> Result<PhysicsCheck> {
    let ell = sol.domain.scale();
    let h = 1e-2 * ell;
    let points = random_interior_points(sol, count, seed, 0.1 * ell);
    let probe = random_interior_points(sol, 200, seed + 1, 0.0);
    let samples: Vec<_> = probe.iter().chain(&points).filter_map(|&z| sol.eval_fields(z).ok()).collect();
    let velocity = samples.iter().map(|s| s.u.hypot(s.v)).fold(f64::MIN_POSITIVE, f64::max);
    let psi = samples.iter().map(|s| s.psi.abs()).fold(f64::MIN_POSITIVE, f64::max);
    let mut check = PhysicsCheck { worst: 0.0, quantity: "none", points: points.len() };
    for z in points {
        let r = sol.physics_residuals(z, h)?;
        for (k, (name, identity)) in r.named().into_iter().enumerate() {
            let floor = match k {
                0 => psi / h.powi(4),
                1 | 2 => 1e-3 * velocity / ell.powi(3),
                3 | 4 => 1e-3 * velocity / ell,
                _ => 1e-3 * velocity,
            };
            let v = identity.relative(floor);
            if v >= check.worst {
                check.worst = v;
                check.quantity = name;
            }
        }
    }
    Ok(check)
}

/// Largest `|ψ − ψ_hole|` of reversed flow in the upper half of the heart's notch.
pub fn first_eddy_strength(sol: &StokesSolution) -> Result<Option<f64>> {
    let cusp = cases::HEART_CUSP;
    let a = cases::HEART_SIZE;
    let psi_hole = sol.eval_fields(cusp + 2.0 * a)?.psi;
    let outside = sol.eval_fields(cusp + C64::new(-0.2, 0.3))?.psi - psi_hole;
    let mut strongest: Option<f64> = None;
    for k in 1..=120 {
        let phi = 1.2 * k as f64 / 120.0;
        let r = a * (1.0 - phi.cos());
        let branch = cusp + C64::from_polar(r, std::f64::consts::PI - phi);
        for m in 1..20 {
            let z = C64::new(branch.re, branch.im * m as f64 / 20.0);
            if !sol.domain.contains(z) {
                continue;
            }
            let s = sol.eval_fields(z)?.psi - psi_hole;
            if s * outside < 0.0 {
                strongest = Some(strongest.unwrap_or(0.0).max(s.abs()));
            }
        }
    }
    Ok(strongest)
}
