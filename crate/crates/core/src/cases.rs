//! Benchmark problems and analytic oracles.

use std::f64::consts::{PI, TAU};

use crate::geometry::{Clustering, Corner, Curve, Domain, Hole, ParamCurve, Segment};
use crate::solver::{AaaOptions, Problem};
use crate::stokes_system::{BoundaryConditionSpec, Target};
use crate::C64;

#[derive(Debug, thiserror::Error)]
pub enum CaseError {
    #[error("unknown case '{0}'")]
    Unknown(String),
    #[error("invalid parameter: {0}")]
    Invalid(String),
    #[error(transparent)]
    Geometry(#[from] crate::geometry::GeometryError),
}

/// Upper wall height `1 − (λ/2)(1 + cos πX)` of the constricted channel.
pub fn constriction_shape(x: f64, lambda: f64) -> f64 {
    1.0 - 0.5 * lambda * (1.0 + (PI * x).cos())
}

/// Lubrication-theory pressure drop across the constriction, truncated after
/// the `δ^order` term (`order` ∈ {0, 2, 4}).
pub fn elt_pressure_drop(lambda: f64, delta: f64, order: u32) -> Result<f64, CaseError> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(CaseError::Invalid(format!("lambda must lie in [0, 1), got {lambda}")));
    }
    if !matches!(order, 0 | 2 | 4) {
        return Err(CaseError::Invalid(format!("order must be 0, 2 or 4, got {order}")));
    }
    let (p0, p2, p4) = elt_terms(lambda);
    let mut dp = p0;
    if order >= 2 {
        dp += delta.powi(2) * p2;
    }
    if order >= 4 {
        dp += delta.powi(4) * p4;
    }
    Ok(dp)
}

/// `(ΔP₀, ΔP₂, ΔP₄)`.
pub fn elt_terms(lambda: f64) -> (f64, f64, f64) {
    let l = lambda;
    let s = (1.0 - l).sqrt();
    let p0 = 3.0 * (3.0 * l * l - 8.0 * l + 8.0) / (1.0 - l).powf(2.5);
    let p2 = 12.0 * PI.powi(2) * l * l / (5.0 * (1.0 - l).powf(1.5));
    let p4 = 8.0 * PI.powi(4) * (428.0 * (s - 1.0) - 214.0 * (s - 2.0) * l - 53.0 * l * l) / (175.0 * s);
    (p0, p2, p4)
}

/// Azimuthal velocity of circular Couette flow between concentric cylinders.
pub fn couette_oracle(r_in: f64, r_out: f64, omega_in: f64, omega_out: f64, r: f64) -> Result<f64, CaseError> {
    if r_in >= r_out || r_in <= 0.0 {
        return Err(CaseError::Invalid(format!("need 0 < r_in < r_out, got {r_in}, {r_out}")));
    }
    let d = r_out * r_out - r_in * r_in;
    let a = (omega_out * r_out * r_out - omega_in * r_in * r_in) / d;
    let b = (omega_in - omega_out) * r_in * r_in * r_out * r_out / d;
    Ok(a * r + b / r)
}

/// Constricted channel `X ∈ [−2, 2]` with Poiseuille inflow. Both walls are
/// split at `X = −1, 0, 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstrictionConfig {
    pub lambda: f64,
    /// Aspect ratio, used only by the lubrication oracle.
    pub delta: f64,
    pub polynomial_degree: usize,
    pub aaa_tol: f64,
    pub aaa_max_degree: usize,
    pub samples_per_segment: usize,
    pub tanh_half_width: f64,
    pub use_aaa: bool,
}

impl Default for ConstrictionConfig {
    fn default() -> Self {
        Self {
            lambda: 0.4,
            delta: 1.0,
            polynomial_degree: 100,
            aaa_tol: 1e-8,
            aaa_max_degree: 100,
            samples_per_segment: 600,
            tanh_half_width: 5.0,
            use_aaa: true,
        }
    }
}

/// Points between which the channel pressure drop is measured.
pub const CHANNEL_PROBE: (C64, C64) = (C64::new(-1.0, 0.5), C64::new(1.0, 0.5));

pub fn build_constricted_channel(cfg: &ConstrictionConfig) -> Result<Problem, CaseError> {
    let lambda = cfg.lambda;
    if !(0.0..1.0).contains(&lambda) {
        return Err(CaseError::Invalid(format!("lambda must lie in [0, 1), got {lambda}")));
    }
    let n = cfg.samples_per_segment;
    let cl = Clustering::Tanh { half_width: cfg.tanh_half_width };
    let line = |label: &str, a: C64, b: C64, bc: BoundaryConditionSpec| {
        Segment::new(label, Curve::Line { from: a, to: b }, n, bc).with_clustering(cl.clone())
    };
    let bump = |label: &str, x0: f64, x1: f64| {
        let curve = ParamCurve::new(label, move |t| {
            let x = x0 + (x1 - x0) * t;
            C64::new(x, constriction_shape(x, lambda))
        });
        Segment::new(label, Curve::Parametric(curve), n, BoundaryConditionSpec::no_slip())
            .with_clustering(cl.clone())
            .curved(true)
    };
    let c = C64::new;
    let inlet = BoundaryConditionSpec::velocity(
        Target::function("poiseuille", |z: C64| 6.0 * (z.im - z.im * z.im)),
        Target::Constant(0.0),
    );
    let mut outer: Vec<Segment> = [-2.0, -1.0, 0.0, 1.0]
        .iter()
        .map(|&x| line(&format!("lower wall {x}..{}", x + 1.0), c(x, 0.0), c(x + 1.0, 0.0), BoundaryConditionSpec::no_slip()))
        .collect();
    outer.extend([
        line("outlet", c(2.0, 0.0), c(2.0, 1.0), BoundaryConditionSpec::pressure_outlet(0.0)),
        line("upper wall right", c(2.0, 1.0), c(1.0, 1.0), BoundaryConditionSpec::no_slip()).curved(true),
        bump("constriction right", 1.0, 0.0),
        bump("constriction left", 0.0, -1.0),
        line("upper wall left", c(-1.0, 1.0), c(-2.0, 1.0), BoundaryConditionSpec::no_slip()).curved(true),
        line("inlet", c(-2.0, 1.0), c(-2.0, 0.0), inlet),
    ]);
    let domain = Domain::new(outer, vec![], vec![])?;
    let mut problem = Problem::new(format!("constricted-channel(lambda={lambda})"), domain, cfg.polynomial_degree);
    if cfg.use_aaa && lambda > 0.0 {
        problem.aaa = Some(AaaOptions { tol: cfg.aaa_tol, max_degree: cfg.aaa_max_degree, ..Default::default() });
    }
    problem.pressure_probe = Some(CHANNEL_PROBE);
    Ok(problem)
}

/// Rotating, translating cylinder inside a rotating unit cylinder.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoCylinderConfig {
    pub a_in: f64,
    pub e: f64,
    pub v_star: f64,
    pub omega_in: f64,
    pub omega_out: f64,
    /// Horizontal translation speed of the inner cylinder.
    pub u_in: f64,
    pub polynomial_degree: usize,
    pub laurent_degree: usize,
    pub outer_samples: usize,
    pub inner_samples: usize,
}

impl TwoCylinderConfig {
    pub fn new(a_in: f64, e: f64, v_star: f64, omega_in: f64, omega_out: f64) -> Self {
        Self {
            a_in,
            e,
            v_star,
            omega_in,
            omega_out,
            u_in: 1.0,
            polynomial_degree: 20,
            laurent_degree: 50,
            outer_samples: 500,
            inner_samples: 100,
        }
    }

    /// Parameter table cases `a`–`i`.
    pub fn table_case(name: char) -> Result<Self, CaseError> {
        let (a, e, v, wi, wo) = match name {
            'a' => (0.1, 0.8, 2.0, -3.0, 1.0),
            'b' => (0.4, 0.3, 1.0, 5.0, -3.0),
            'c' => (0.15, 0.6, 1.0, 10.0, 0.0),
            'd' => (0.1, 0.1, 2.0, 0.0, 0.0),
            'e' => (0.15, 0.7, 0.0, 3.33, 0.66),
            'f' => (0.15, 0.7, -1.0, 0.0, 0.66),
            'g' => (0.3, 0.65, 0.0, 0.0, -0.2),
            'h' => (0.1, 0.2, 1.0, 5.0, -1.0),
            'i' => (0.3, 0.5, 1.0, 2.0, -2.0),
            _ => return Err(CaseError::Unknown(format!("two-cylinder case '{name}'"))),
        };
        Ok(Self::new(a, e, v, wi, wo))
    }
}

pub const TABLE_CASES: [char; 9] = ['a', 'b', 'c', 'd', 'e', 'f', 'g', 'h', 'i'];

fn rigid_motion(center: C64, translation: C64, omega: f64) -> BoundaryConditionSpec {
    BoundaryConditionSpec::velocity(
        Target::function("rigid u", move |z: C64| translation.re - omega * (z - center).im),
        Target::function("rigid v", move |z: C64| translation.im + omega * (z - center).re),
    )
}

pub fn build_two_cylinder(cfg: &TwoCylinderConfig) -> Result<Problem, CaseError> {
    if cfg.a_in <= 0.0 || cfg.e < 0.0 || cfg.a_in + cfg.e >= 1.0 {
        return Err(CaseError::Invalid(format!(
            "cylinders touch or overlap: A_in = {}, E = {}",
            cfg.a_in, cfg.e
        )));
    }
    let pw = (1.0 / (1.0 - cfg.e)).ceil() + 1.0;
    let zero = C64::new(0.0, 0.0);
    let center = C64::new(cfg.e, 0.0);
    let outer = Segment::new(
        "outer cylinder",
        Curve::Arc { center: zero, radius: 1.0, start_angle: -TAU, end_angle: 0.0 },
        cfg.outer_samples,
        rigid_motion(zero, zero, cfg.omega_out),
    )
    .with_clustering(Clustering::Tanh { half_width: pw });
    let inner = Segment::new(
        "inner cylinder",
        Curve::Arc { center, radius: cfg.a_in, start_angle: 0.0, end_angle: -TAU },
        cfg.inner_samples,
        rigid_motion(center, C64::new(cfg.u_in, cfg.v_star), cfg.omega_in),
    );
    let extra = if cfg.e > 0.0 { vec![(C64::new(1.0 / cfg.e, 0.0), cfg.laurent_degree)] } else { vec![] };
    let hole = Hole { boundary: vec![inner], laurent_center: center, laurent_degree: cfg.laurent_degree, extra_centers: extra };
    let domain = Domain::new(vec![outer], vec![hole], vec![])?;
    Ok(Problem::new(
        format!("two-cylinder(A_in={}, E={})", cfg.a_in, cfg.e),
        domain,
        cfg.polynomial_degree,
    ))
}

/// Closed ellipse `center + R(rot)·(a cos t, b sin t)`, clockwise when `clockwise`.
fn ellipse(label: &str, center: C64, a: f64, b: f64, rotation: f64, clockwise: bool) -> Curve {
    let rot = C64::from_polar(1.0, rotation);
    let sign = if clockwise { -1.0 } else { 1.0 };
    Curve::Parametric(ParamCurve::new(label, move |t| {
        let th = sign * TAU * t;
        center + rot * C64::new(a * th.cos(), b * th.sin())
    }))
}

/// Gallery case parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct GalleryConfig {
    pub polynomial_degree: usize,
    pub laurent_degree: usize,
    /// Lightning poles per sharp corner (bifurcation only).
    pub corner_poles: usize,
    /// Include the ellipse obstacle (bifurcation only).
    pub with_hole: bool,
}

pub const GALLERY_CASES: [&str; 3] = ["ellipse-in-ellipse", "heart-hole-channel", "bifurcation-ellipse"];

impl GalleryConfig {
    pub fn defaults(name: &str) -> Result<Self, CaseError> {
        let (p, l, n) = match name {
            "ellipse-in-ellipse" => (40, 120, 0),
            "heart-hole-channel" => (120, 80, 0),
            "bifurcation-ellipse" => (96, 48, 48),
            _ => return Err(CaseError::Unknown(name.to_string())),
        };
        Ok(Self { polynomial_degree: p, laurent_degree: l, corner_poles: n, with_hole: true })
    }
}

pub fn build_gallery_case(name: &str, cfg: &GalleryConfig) -> Result<Problem, CaseError> {
    match name {
        "ellipse-in-ellipse" => ellipse_in_ellipse(cfg),
        "heart-hole-channel" => heart_hole_channel(cfg),
        "bifurcation-ellipse" => bifurcation(cfg),
        _ => Err(CaseError::Unknown(name.to_string())),
    }
}

/// Parameters of the cardioid obstacle `z0 + a(1 + cos t)e^{it}`.
pub const HEART_CUSP: C64 = C64::new(-0.35, 0.0);
pub const HEART_SIZE: f64 = 0.35;

/// Elliptic cylinders with the boundary motion of table case `c`.
fn ellipse_in_ellipse(cfg: &GalleryConfig) -> Result<Problem, CaseError> {
    let table = TwoCylinderConfig::table_case('c')?;
    let zero = C64::new(0.0, 0.0);
    let center = C64::new(table.e, 0.0);
    // Semi-minor axes 1 and A_in; eccentricities 0.6 and 0.8.
    let outer_major = 1.0 / (1.0f64 - 0.36).sqrt();
    let inner_major = table.a_in / (1.0f64 - 0.64).sqrt();
    let outer = Segment::new(
        "outer ellipse",
        ellipse("outer ellipse", zero, outer_major, 1.0, 0.0, false),
        600,
        rigid_motion(zero, zero, table.omega_out),
    );
    let inner = Segment::new(
        "inner ellipse",
        ellipse("inner ellipse", center, inner_major, table.a_in, 0.0, true),
        (6 * cfg.laurent_degree + 80).max(400),
        rigid_motion(center, C64::new(table.u_in, table.v_star), table.omega_in),
    );
    let hole = Hole { boundary: vec![inner], laurent_center: center, laurent_degree: cfg.laurent_degree, extra_centers: vec![] };
    let domain = Domain::new(vec![outer], vec![hole], vec![])?;
    Ok(Problem::new("ellipse-in-ellipse", domain, cfg.polynomial_degree))
}

/// Pressure-driven channel `[−3, 3] × [−1, 1]` around a cardioid obstacle
/// whose cusp faces upstream.
fn heart_hole_channel(cfg: &GalleryConfig) -> Result<Problem, CaseError> {
    let c = C64::new;
    let wall = |label: &str, a: C64, b: C64, n: usize| {
        Segment::new(label, Curve::Line { from: a, to: b }, n, BoundaryConditionSpec::no_slip())
    };
    let n_wall = 3 * cfg.polynomial_degree.max(40);
    let n_end = n_wall / 2;
    let outer = vec![
        wall("lower wall", c(-3.0, -1.0), c(3.0, -1.0), n_wall),
        Segment::new("outlet", Curve::Line { from: c(3.0, -1.0), to: c(3.0, 1.0) }, n_end, BoundaryConditionSpec::pressure_outlet(0.0)),
        wall("upper wall", c(3.0, 1.0), c(-3.0, 1.0), n_wall),
        Segment::new("inlet", Curve::Line { from: c(-3.0, 1.0), to: c(-3.0, -1.0) }, n_end, BoundaryConditionSpec::pressure_outlet(12.0)),
    ];
    let heart = Curve::Parametric(ParamCurve::new("cardioid", |t| {
        let th = -TAU * t;
        HEART_CUSP + C64::from_polar(HEART_SIZE * (1.0 + th.cos()), th)
    }));
    let n_heart = 4 * cfg.laurent_degree.max(40) + 200;
    let hole = Hole {
        boundary: vec![Segment::new("heart", heart, n_heart, BoundaryConditionSpec::no_slip())],
        laurent_center: HEART_CUSP + 5.0 / 6.0 * HEART_SIZE,
        laurent_degree: cfg.laurent_degree,
        extra_centers: vec![],
    };
    let domain = Domain::new(outer, vec![hole], vec![])?;
    Ok(Problem::new("heart-hole-channel", domain, cfg.polynomial_degree))
}

/// Inlet pressure and outlet pressures of the bifurcation.
pub const BIFURCATION_PRESSURES: (f64, f64, f64) = (60.0, 10.0, 0.0);

/// Angle between each branch and the inlet axis.
const BRANCH_ANGLE: f64 = PI / 4.0;
/// Length of the outer wall of each branch.
const BRANCH_LENGTH: f64 = 2.0;
/// Width of the tanh transition rounding the divider tip.
const DIVIDER_ROUNDING: f64 = 0.2;

/// Symmetric Y: inlet channel `[−2, 0] × [−½, ½]` splitting into two unit-width
/// branches at ±45°. The outer junctions are sharp re-entrant corners; the
/// divider `x = x₀ + cot θ · y tanh(y/w)` between the branches is smooth.
/// Outlets impose pressure and zero cross-flow in the branch frame.
fn bifurcation(cfg: &GalleryConfig) -> Result<Problem, CaseError> {
    let c = C64::new;
    let (p_in, p_up, p_low) = BIFURCATION_PRESSURES;
    let density = (cfg.polynomial_degree as f64 / 96.0 * 90.0).max(60.0);
    let n_for = |len: f64| ((len * density).ceil() as usize).max(20);
    let n = cfg.corner_poles;
    let sigma = 4.0;
    let lightning = |start: bool, end: bool| Clustering::Lightning { start: start.then_some(n), end: end.then_some(n), sigma };
    let (cl_end, cl_start) = if n > 0 { (lightning(false, true), lightning(true, false)) } else { (Clustering::Uniform, Clustering::Uniform) };
    let wall = |label: &str, a: C64, b: C64, cl: Clustering| {
        Segment::new(label, Curve::Line { from: a, to: b }, n_for((b - a).norm()), BoundaryConditionSpec::no_slip())
            .with_clustering(cl)
    };
    let outlet = |p: f64, direction: C64| BoundaryConditionSpec::pressure_outlet(p).with_frame(direction);

    let th = BRANCH_ANGLE;
    let (dir_lo, dir_up) = (C64::from_polar(1.0, -th), C64::from_polar(1.0, th));
    let across_lo = c(th.sin(), th.cos());
    let corner_lo = c(0.0, -0.5);
    let corner_up = corner_lo.conj();
    let outlet_lo = corner_lo + BRANCH_LENGTH * dir_lo;
    // Where the straight inner walls would meet on the axis.
    let wall_start = corner_lo + across_lo;
    let apex = wall_start + dir_lo * (wall_start.im / th.sin());
    let cot = th.cos() / th.sin();
    let divider_x = move |y: f64| apex.re + cot * y * (y / DIVIDER_ROUNDING).tanh();
    // The outlet runs across the branch until it meets the divider.
    let gap = |t: f64| {
        let z = outlet_lo + t * across_lo;
        z.re - divider_x(z.im)
    };
    let (mut lo, mut hi) = (0.0, 2.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if gap(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let inner_lo = outlet_lo + lo * across_lo;
    let y_end = -inner_lo.im;
    let divider = Curve::Parametric(ParamCurve::new("divider", move |t| {
        let y = -y_end + 2.0 * y_end * t;
        c(divider_x(y), y)
    }));
    let outer = vec![
        wall("inlet channel lower wall", c(-2.0, -0.5), corner_lo, cl_end.clone()),
        wall("lower branch outer wall", corner_lo, outlet_lo, cl_start.clone()),
        Segment::new("lower outlet", Curve::Line { from: outlet_lo, to: inner_lo }, n_for(1.0), outlet(p_low, dir_lo)),
        Segment::new("divider", divider, n_for(2.0 * y_end / th.sin()), BoundaryConditionSpec::no_slip()).curved(true),
        Segment::new("upper outlet", Curve::Line { from: inner_lo.conj(), to: outlet_lo.conj() }, n_for(1.0), outlet(p_up, dir_up)),
        wall("upper branch outer wall", outlet_lo.conj(), corner_up, cl_end),
        wall("inlet channel upper wall", corner_up, c(-2.0, 0.5), cl_start),
        Segment::new("inlet", Curve::Line { from: c(-2.0, 0.5), to: c(-2.0, -0.5) }, n_for(1.0), BoundaryConditionSpec::pressure_outlet(p_in)),
    ];
    let mut corners = Vec::new();
    if n > 0 {
        for (prev, vertex, next) in [(c(-1.0, -0.5), corner_lo, corner_lo + dir_lo), (corner_up + dir_up, corner_up, c(-1.0, 0.5))] {
            corners.push(Corner {
                vertex,
                exterior_bisector: crate::geometry::exterior_bisector(prev, vertex, next)?,
                scale: 2.0,
                pole_count: n,
                sigma,
            });
        }
    }
    let mut holes = Vec::new();
    if cfg.with_hole {
        let center = c(-1.0, 0.05);
        let boundary = ellipse("ellipse", center, 0.25, 0.2, PI / 8.0, true);
        holes.push(Hole {
            boundary: vec![Segment::new("ellipse", boundary, (6 * cfg.laurent_degree + 80).max(300), BoundaryConditionSpec::no_slip())],
            laurent_center: center,
            laurent_degree: cfg.laurent_degree,
            extra_centers: vec![],
        });
    }
    let domain = Domain::new(outer, holes, corners)?;
    let name = if cfg.with_hole { "bifurcation-ellipse" } else { "bifurcation" };
    let mut problem = Problem::new(name, domain, cfg.polynomial_degree);
    problem.aaa = Some(AaaOptions::default());
    Ok(problem)
}

/// Uniform flow `u = 1, v = 0` imposed on the whole boundary of the unit square.
pub fn build_uniform_flow_square(degree: usize, samples_per_side: usize) -> Result<Problem, CaseError> {
    let v = [C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 1.0), C64::new(0.0, 1.0)];
    let segs = (0..4)
        .map(|k| {
            Segment::new(
                format!("side {k}"),
                Curve::Line { from: v[k], to: v[(k + 1) % 4] },
                samples_per_side,
                BoundaryConditionSpec::velocity(Target::Constant(1.0), Target::Constant(0.0)),
            )
        })
        .collect();
    Ok(Problem::new("uniform-flow", Domain::new(segs, vec![], vec![])?, degree))
}

/// Builds any named case with default parameters.
pub fn named_case(name: &str) -> Result<Problem, CaseError> {
    if let Some(rest) = name.strip_prefix("two-cylinder-") {
        let mut chars = rest.chars();
        return match (chars.next(), chars.next()) {
            (Some(ch), None) => build_two_cylinder(&TwoCylinderConfig::table_case(ch)?),
            _ => Err(CaseError::Unknown(name.to_string())),
        };
    }
    match name {
        "constricted-channel" => build_constricted_channel(&ConstrictionConfig::default()),
        "uniform-flow" => build_uniform_flow_square(10, 60),
        "bifurcation" => {
            let cfg = GalleryConfig { with_hole: false, ..GalleryConfig::defaults("bifurcation-ellipse")? };
            bifurcation(&cfg)
        }
        _ => build_gallery_case(name, &GalleryConfig::defaults(name)?),
    }
}
