//! JSON run configuration: case selection, overrides, solver and output settings.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cases::{self, ConstrictionConfig, GalleryConfig, TwoCylinderConfig};
use crate::geometry::{Clustering, Corner, Curve, Domain, Hole, Segment};
use crate::solver::{AaaOptions, Problem, RowWeighting};
use crate::stokes_system::{BoundaryConditionSpec, Functional, PolyTerm, Target};
use crate::C64;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unsupported schema_version {0} (expected {SCHEMA_VERSION})")]
    Schema(u32),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Case(#[from] cases::CaseError),
    #[error(transparent)]
    Geometry(#[from] crate::geometry::GeometryError),
}

/// Top-level configuration document.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    /// Named case; exclusive with `domain`.
    #[serde(default)]
    pub case: Option<String>,
    #[serde(default)]
    pub domain: Option<DomainSpec>,
    #[serde(default)]
    pub params: CaseParams,
    #[serde(default)]
    pub solver: SolverParams,
    #[serde(default)]
    pub output: OutputParams,
    #[serde(default)]
    pub accuracy_target: Option<f64>,
    #[serde(default)]
    pub sweep: Option<SweepParams>,
}

/// Per-case parameter overrides; fields irrelevant to the chosen case are rejected.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseParams {
    pub lambda: Option<f64>,
    pub delta: Option<f64>,
    pub samples_per_segment: Option<usize>,
    pub tanh_half_width: Option<f64>,
    pub use_aaa: Option<bool>,
    pub a_in: Option<f64>,
    pub e: Option<f64>,
    pub v_star: Option<f64>,
    pub omega_in: Option<f64>,
    pub omega_out: Option<f64>,
    pub u_in: Option<f64>,
    pub with_hole: Option<bool>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverParams {
    pub polynomial_degree: Option<usize>,
    pub laurent_degree: Option<usize>,
    pub lightning_poles: Option<usize>,
    pub lightning_sigma: Option<f64>,
    pub aaa_tol: Option<f64>,
    pub aaa_max_degree: Option<usize>,
    pub aaa_cleanup_tol: Option<f64>,
    pub weighting: Option<RowWeighting>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputParams {
    pub grid: [usize; 2],
    /// `[xmin, xmax, ymin, ymax]`; defaults to the domain bounding box.
    pub bbox: Option<[f64; 4]>,
    pub levels: usize,
    pub report: String,
    pub field_csv: String,
    pub poles_csv: String,
    pub psi_svg: String,
    pub sweep_csv: String,
}

impl Default for OutputParams {
    fn default() -> Self {
        Self {
            grid: [200, 100],
            bbox: None,
            levels: 13,
            report: "report.json".into(),
            field_csv: "fields.csv".into(),
            poles_csv: "poles.csv".into(),
            psi_svg: "psi.svg".into(),
            sweep_csv: "sweep.csv".into(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepParams {
    pub parameter: String,
    pub values: Vec<f64>,
}

/// Explicit geometry: an outer loop, optional holes, optional automatic corners.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub outer: Vec<SegmentSpec>,
    #[serde(default)]
    pub holes: Vec<HoleSpec>,
    /// Put lightning poles at every corner of the outer loop.
    #[serde(default)]
    pub lightning: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HoleSpec {
    pub boundary: Vec<SegmentSpec>,
    pub laurent_center: [f64; 2],
    pub laurent_degree: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum CurveSpec {
    Line { from: [f64; 2], to: [f64; 2] },
    Arc { center: [f64; 2], radius: f64, start_angle: f64, end_angle: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentSpec {
    #[serde(default)]
    pub label: Option<String>,
    pub curve: CurveSpec,
    pub samples: usize,
    #[serde(default)]
    pub tanh_half_width: Option<f64>,
    #[serde(default)]
    pub curved: bool,
    pub bc: [ConditionSpec; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionSpec {
    pub functional: Functional,
    pub value: ValueSpec,
}

/// A constant or a polynomial `Σ c xᵃ yᵇ` given as `[[c, a, b], ...]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ValueSpec {
    Constant(f64),
    Polynomial(Vec<(f64, i32, i32)>),
}

fn point(p: [f64; 2]) -> C64 {
    C64::new(p[0], p[1])
}

impl ValueSpec {
    fn target(&self) -> Target {
        match self {
            ValueSpec::Constant(c) => Target::Constant(*c),
            ValueSpec::Polynomial(terms) => Target::Polynomial(
                terms.iter().map(|&(coeff, x_pow, y_pow)| PolyTerm { coeff, x_pow, y_pow }).collect(),
            ),
        }
    }
}

impl SegmentSpec {
    fn build(&self, index: usize) -> Segment {
        let curve = match self.curve {
            CurveSpec::Line { from, to } => Curve::Line { from: point(from), to: point(to) },
            CurveSpec::Arc { center, radius, start_angle, end_angle } => {
                Curve::Arc { center: point(center), radius, start_angle, end_angle }
            }
        };
        let bc = BoundaryConditionSpec::new(
            (self.bc[0].functional, self.bc[0].value.target()),
            (self.bc[1].functional, self.bc[1].value.target()),
        );
        let label = self.label.clone().unwrap_or_else(|| format!("segment {index}"));
        let mut seg = Segment::new(label, curve, self.samples, bc).curved(self.curved);
        if let Some(w) = self.tanh_half_width {
            seg = seg.with_clustering(Clustering::Tanh { half_width: w });
        }
        seg
    }
}

impl DomainSpec {
    pub fn build(&self, lightning_poles: usize, sigma: f64) -> Result<Domain, ConfigError> {
        let mut outer: Vec<Segment> = self.outer.iter().enumerate().map(|(k, s)| s.build(k)).collect();
        let mut holes = Vec::new();
        for h in &self.holes {
            holes.push(Hole {
                boundary: h.boundary.iter().enumerate().map(|(k, s)| s.build(k)).collect(),
                laurent_center: point(h.laurent_center),
                laurent_degree: h.laurent_degree,
                extra_centers: vec![],
            });
        }
        let mut corners = Vec::new();
        if self.lightning && lightning_poles > 0 {
            for (vertex, k_in, k_out, theta) in Domain::detect_corners(&outer) {
                let scale = outer[k_in].length().max(outer[k_out].length());
                corners.push(Corner { vertex, exterior_bisector: theta, scale, pole_count: lightning_poles, sigma });
                for (k, at_start) in [(k_in, false), (k_out, true)] {
                    let (mut start, mut end) = match outer[k].clustering {
                        Clustering::Lightning { start, end, .. } => (start, end),
                        _ => (None, None),
                    };
                    if at_start {
                        start = Some(lightning_poles);
                    } else {
                        end = Some(lightning_poles);
                    }
                    outer[k].clustering = Clustering::Lightning { start, end, sigma };
                }
            }
        }
        Ok(Domain::new(outer, holes, corners)?)
    }
}

fn check_unused(params: &CaseParams, allowed: &[&str]) -> Result<(), ConfigError> {
    let value = serde_json::to_value(params)?;
    for (k, v) in value.as_object().into_iter().flatten() {
        if !v.is_null() && !allowed.contains(&k.as_str()) {
            return Err(ConfigError::Invalid(format!("parameter '{k}' does not apply to this case")));
        }
    }
    Ok(())
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::Schema(self.schema_version));
        }
        match (&self.case, &self.domain) {
            (Some(_), Some(_)) => return Err(ConfigError::Invalid("give either 'case' or 'domain', not both".into())),
            (None, None) => return Err(ConfigError::Invalid("missing 'case' or 'domain'".into())),
            _ => {}
        }
        if self.output.grid.iter().any(|&n| n < 2) {
            return Err(ConfigError::Invalid("grid resolution must be at least 2 x 2".into()));
        }
        if let Some(t) = self.accuracy_target {
            if !t.is_finite() {
                return Err(ConfigError::Invalid("accuracy_target must be finite".into()));
            }
        }
        if let Some(sweep) = &self.sweep {
            if sweep.parameter != "lambda" {
                return Err(ConfigError::Invalid(format!("cannot sweep parameter '{}'", sweep.parameter)));
            }
            if sweep.values.is_empty() {
                return Err(ConfigError::Invalid("sweep needs at least one value".into()));
            }
        }
        Ok(())
    }

    /// Builds the problem described by this configuration.
    pub fn problem(&self) -> Result<Problem, ConfigError> {
        self.problem_with_lambda(None)
    }

    /// Same as [`RunConfig::problem`] with the channel amplitude overridden.
    pub fn problem_with_lambda(&self, lambda: Option<f64>) -> Result<Problem, ConfigError> {
        let p = &self.params;
        let s = &self.solver;
        let mut problem = if let Some(spec) = &self.domain {
            check_unused(p, &[])?;
            let domain = spec.build(s.lightning_poles.unwrap_or(24), s.lightning_sigma.unwrap_or(4.0))?;
            let mut prob = Problem::new("custom", domain, s.polynomial_degree.unwrap_or(20));
            if prob.domain.segments().any(|(_, seg)| seg.curved) {
                prob.aaa = Some(AaaOptions::default());
            }
            prob
        } else {
            let name = self.case.as_deref().unwrap_or_default();
            self.named_problem(name, lambda)?
        };
        if lambda.is_some() && !matches!(self.case.as_deref(), Some("constricted-channel")) {
            return Err(ConfigError::Invalid("lambda sweeps need the constricted-channel case".into()));
        }
        if let Some(d) = s.polynomial_degree {
            problem.polynomial_degree = d;
        }
        if let Some(d) = s.laurent_degree {
            for h in &mut problem.domain.holes {
                h.laurent_degree = d;
                h.extra_centers.iter_mut().for_each(|c| c.1 = d);
            }
        }
        if let Some(sigma) = s.lightning_sigma {
            problem.domain.corners.iter_mut().for_each(|c| c.sigma = sigma);
        }
        if let Some(aaa) = &mut problem.aaa {
            if let Some(t) = s.aaa_tol {
                aaa.tol = t;
            }
            if let Some(m) = s.aaa_max_degree {
                aaa.max_degree = m;
            }
            if let Some(c) = s.aaa_cleanup_tol {
                aaa.cleanup_tol = c;
            }
        }
        if let Some(w) = s.weighting {
            problem.weighting = w;
        }
        Ok(problem)
    }

    fn named_problem(&self, name: &str, lambda: Option<f64>) -> Result<Problem, ConfigError> {
        let p = &self.params;
        let s = &self.solver;
        let problem = if name == "constricted-channel" {
            check_unused(p, &["lambda", "delta", "samples_per_segment", "tanh_half_width", "use_aaa"])?;
            let d = ConstrictionConfig::default();
            let cfg = ConstrictionConfig {
                lambda: lambda.or(p.lambda).unwrap_or(d.lambda),
                delta: p.delta.unwrap_or(d.delta),
                samples_per_segment: p.samples_per_segment.unwrap_or(d.samples_per_segment),
                tanh_half_width: p.tanh_half_width.unwrap_or(d.tanh_half_width),
                use_aaa: p.use_aaa.unwrap_or(d.use_aaa),
                aaa_tol: s.aaa_tol.unwrap_or(d.aaa_tol),
                aaa_max_degree: s.aaa_max_degree.unwrap_or(d.aaa_max_degree),
                polynomial_degree: s.polynomial_degree.unwrap_or(d.polynomial_degree),
            };
            cases::build_constricted_channel(&cfg)?
        } else if name == "two-cylinder" || name.starts_with("two-cylinder-") {
            check_unused(p, &["a_in", "e", "v_star", "omega_in", "omega_out", "u_in"])?;
            let base = match name.strip_prefix("two-cylinder-") {
                Some(tag) if tag.chars().count() == 1 => TwoCylinderConfig::table_case(tag.chars().next().unwrap_or('?'))?,
                Some(_) => return Err(cases::CaseError::Unknown(name.to_string()).into()),
                None => TwoCylinderConfig::new(0.5, 0.0, 0.0, 1.0, 0.0),
            };
            let cfg = TwoCylinderConfig {
                a_in: p.a_in.unwrap_or(base.a_in),
                e: p.e.unwrap_or(base.e),
                v_star: p.v_star.unwrap_or(base.v_star),
                omega_in: p.omega_in.unwrap_or(base.omega_in),
                omega_out: p.omega_out.unwrap_or(base.omega_out),
                u_in: p.u_in.unwrap_or(base.u_in),
                ..base
            };
            cases::build_two_cylinder(&cfg)?
        } else if name == "bifurcation" || cases::GALLERY_CASES.contains(&name) {
            check_unused(p, &["with_hole"])?;
            let gallery_name = if name == "bifurcation" { "bifurcation-ellipse" } else { name };
            let d = GalleryConfig::defaults(gallery_name)?;
            let cfg = GalleryConfig {
                polynomial_degree: s.polynomial_degree.unwrap_or(d.polynomial_degree),
                laurent_degree: s.laurent_degree.unwrap_or(d.laurent_degree),
                corner_poles: s.lightning_poles.unwrap_or(d.corner_poles),
                with_hole: p.with_hole.unwrap_or(name != "bifurcation"),
            };
            cases::build_gallery_case(gallery_name, &cfg)?
        } else {
            check_unused(p, &[])?;
            cases::named_case(name)?
        };
        Ok(problem)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_case_config() {
        let cfg = RunConfig::from_json(r#"{"schema_version": 1, "case": "two-cylinder-d"}"#).unwrap();
        let p = cfg.problem().unwrap();
        assert_eq!(p.polynomial_degree, 20);
        assert_eq!(p.domain.holes[0].laurent_degree, 50);
        assert_eq!(cfg.output.grid, [200, 100]);
    }

    #[test]
    fn overrides_apply() {
        let cfg = RunConfig::from_json(
            r#"{"schema_version": 1, "case": "constricted-channel",
                "params": {"lambda": 0.0},
                "solver": {"polynomial_degree": 12, "weighting": "spacing"}}"#,
        )
        .unwrap();
        let p = cfg.problem().unwrap();
        assert_eq!(p.polynomial_degree, 12);
        assert!(p.aaa.is_none());
        assert_eq!(p.weighting, RowWeighting::Spacing);
    }

    #[test]
    fn rejects_bad_documents() {
        for text in [
            "{",
            r#"{"case": "uniform-flow"}"#,
            r#"{"schema_version": 2, "case": "uniform-flow"}"#,
            r#"{"schema_version": 1}"#,
            r#"{"schema_version": 1, "case": "uniform-flow", "bogus": 1}"#,
            r#"{"schema_version": 1, "case": "uniform-flow", "output": {"grid": [1, 5]}}"#,
        ] {
            assert!(RunConfig::from_json(text).is_err(), "{text}");
        }
        let cfg = RunConfig::from_json(r#"{"schema_version": 1, "case": "two-cylinder-a", "params": {"lambda": 0.3}}"#)
            .unwrap();
        assert!(matches!(cfg.problem(), Err(ConfigError::Invalid(_))));
        let cfg = RunConfig::from_json(r#"{"schema_version": 1, "case": "no-such-case"}"#).unwrap();
        assert!(cfg.problem().is_err());
    }

    #[test]
    fn explicit_domain_with_lightning() {
        let text = r#"{
            "schema_version": 1,
            "domain": {
                "lightning": true,
                "outer": [
                    {"curve": {"kind": "line", "from": [0, 0], "to": [1, 0]}, "samples": 40,
                     "bc": [{"functional": "u", "value": 0}, {"functional": "v", "value": 0}]},
                    {"curve": {"kind": "line", "from": [1, 0], "to": [1, 1]}, "samples": 40,
                     "bc": [{"functional": "u", "value": 0}, {"functional": "v", "value": 0}]},
                    {"curve": {"kind": "line", "from": [1, 1], "to": [0, 1]}, "samples": 40,
                     "bc": [{"functional": "u", "value": 1}, {"functional": "v", "value": 0}]},
                    {"curve": {"kind": "line", "from": [0, 1], "to": [0, 0]}, "samples": 40,
                     "bc": [{"functional": "u", "value": [[1, 0, 2]]}, {"functional": "v", "value": 0}]}
                ]
            },
            "solver": {"lightning_poles": 10}
        }"#;
        let p = RunConfig::from_json(text).unwrap().problem().unwrap();
        assert_eq!(p.domain.corners.len(), 4);
        assert!(p.domain.outer.iter().all(|s| s.corner_ends == (true, true)));
        let target = &p.domain.outer[3].bc.conditions[0].1;
        assert!((target.eval(C64::new(0.0, 0.5)) - 0.25).abs() < 1e-15);
    }
}
