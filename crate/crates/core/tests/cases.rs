//! End-to-end solves of the benchmark problems.

use ratstokes::cases::{self, GalleryConfig, TwoCylinderConfig};
use ratstokes::{solve_problem, C64};

fn gallery_residual(name: &str, cfg: &GalleryConfig) -> f64 {
    let problem = cases::build_gallery_case(name, cfg).unwrap();
    solve_problem(&problem).unwrap().report.boundary_residual.max
}

#[test]
fn ellipse_in_ellipse_reaches_seven_digits() {
    let cfg = GalleryConfig::defaults("ellipse-in-ellipse").unwrap();
    assert!(gallery_residual("ellipse-in-ellipse", &cfg) <= 1e-6);
}

#[test]
fn heart_hole_with_reduced_degrees_reaches_six_digits() {
    let cfg = GalleryConfig { polynomial_degree: 80, laurent_degree: 40, ..GalleryConfig::defaults("heart-hole-channel").unwrap() };
    assert!(gallery_residual("heart-hole-channel", &cfg) <= 1e-5);
}

#[test]
fn bifurcation_with_ellipse_reaches_six_digits() {
    let cfg = GalleryConfig::defaults("bifurcation-ellipse").unwrap();
    assert_eq!((cfg.polynomial_degree, cfg.laurent_degree, cfg.corner_poles), (96, 48, 48));
    let problem = cases::build_gallery_case("bifurcation-ellipse", &cfg).unwrap();
    let out = solve_problem(&problem).unwrap();
    assert!(out.report.boundary_residual.max <= 1e-5);
    assert!(out.report.poles.aaa > 0);
    assert_eq!(out.report.poles.lightning, 96);
}

#[test]
fn two_cylinder_case_d_reaches_eight_digits() {
    let problem = cases::build_two_cylinder(&TwoCylinderConfig::table_case('d').unwrap()).unwrap();
    assert!(solve_problem(&problem).unwrap().report.boundary_residual.max <= 1e-8);
}

#[test]
fn translating_cylinder_flow_is_mirror_symmetric() {
    let cfg = TwoCylinderConfig::new(0.3, 0.4, 0.0, 0.0, 0.0);
    let out = solve_problem(&cases::build_two_cylinder(&cfg).unwrap()).unwrap();
    let sol = &out.solution;
    for k in 0..20 {
        let x = -0.95 + 0.09 * k as f64;
        let on_axis = C64::new(x, 0.0);
        if sol.domain.contains(on_axis) {
            assert!(sol.eval_fields(on_axis).unwrap().v.abs() <= 1e-8, "v on axis at x = {x}");
        }
        let z = C64::new(x, 0.35);
        if sol.domain.contains(z) {
            let (up, down) = (sol.eval_fields(z).unwrap(), sol.eval_fields(z.conj()).unwrap());
            assert!((up.v + down.v).abs() <= 1e-8);
            assert!((up.u - down.u).abs() <= 1e-8);
        }
    }
}

#[test]
fn resting_cylinders_give_zero_flow() {
    let cfg = TwoCylinderConfig { u_in: 0.0, ..TwoCylinderConfig::new(0.2, 0.3, 0.0, 0.0, 0.0) };
    let out = solve_problem(&cases::build_two_cylinder(&cfg).unwrap()).unwrap();
    for z in [C64::new(-0.6, 0.1), C64::new(0.1, 0.6), C64::new(0.3, -0.6)] {
        let f = out.solution.eval_fields(z).unwrap();
        assert!(f.u.abs() < 1e-12 && f.v.abs() < 1e-12 && f.omega.abs() < 1e-12);
    }
}

#[test]
fn concentric_cylinders_match_couette_profile() {
    let cfg = TwoCylinderConfig { u_in: 0.0, ..TwoCylinderConfig::new(0.5, 0.0, 0.0, 1.0, 0.0) };
    let out = solve_problem(&cases::build_two_cylinder(&cfg).unwrap()).unwrap();
    for k in 0..100 {
        let r = 0.5 + 0.5 * (k as f64 + 0.5) / 100.0;
        let theta = 2.399_963 * k as f64;
        let f = out.solution.eval_fields(C64::from_polar(r, theta)).unwrap();
        let u_theta = -f.u * theta.sin() + f.v * theta.cos();
        assert!((u_theta - cases::couette_oracle(0.5, 1.0, 1.0, 0.0, r).unwrap()).abs() <= 1e-8);
    }
}

#[test]
fn straight_channel_is_exact_poiseuille() {
    let cfg = cases::ConstrictionConfig { lambda: 0.0, ..Default::default() };
    let out = solve_problem(&cases::build_constricted_channel(&cfg).unwrap()).unwrap();
    assert!(out.report.boundary_residual.max <= 1e-10);
    assert!((out.report.pressure_drop.unwrap() - 24.0).abs() <= 1e-8);
}

#[test]
fn constricted_channel_matches_lubrication_theory() {
    let cfg = cases::ConstrictionConfig { lambda: 0.4, ..Default::default() };
    let out = solve_problem(&cases::build_constricted_channel(&cfg).unwrap()).unwrap();
    let dp = out.report.pressure_drop.unwrap();
    let elt = cases::elt_pressure_drop(0.4, 1.0, 4).unwrap();
    assert!((dp - elt).abs() / dp <= 0.03);
    assert!(out.poles.iter().all(|p| !out.solution.domain.contains(C64::new(p.z.x, p.z.y))));
}
