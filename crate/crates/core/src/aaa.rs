//! AAA rational approximation in barycentric form and pole extraction.
//!
//! Poles found near a curved wall are used as a pole group of the basis; the
//! ones inside the fluid are discarded by [`filter_exterior`].

use faer::Mat;

use crate::geometry::Domain;
use crate::linalg::{self, LinalgError};
use crate::C64;

/// Default relative tolerance of [`aaa_fit`].
pub const DEFAULT_TOL: f64 = 1e-8;
/// Default degree cap of [`aaa_fit`].
pub const DEFAULT_MAX_DEGREE: usize = 100;

#[derive(Debug, thiserror::Error)]
pub enum AaaError {
    #[error("sample and value vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("non-finite sample or value at index {0}")]
    NonFinite(usize),
    #[error("{0}")]
    Linalg(#[from] LinalgError),
    #[error("pole computation failed: {source}; pencil:\n{pencil}")]
    Pencil { source: LinalgError, pencil: String },
}

/// `r(z) = Σ w_j f_j/(z − z_j) / Σ w_j/(z − z_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BarycentricRational {
    pub support_points: Vec<C64>,
    pub support_values: Vec<C64>,
    pub weights: Vec<C64>,
}

/// Poles of a barycentric rational with their residues.
#[derive(Debug, Clone, Default)]
pub struct PoleReport {
    pub poles: Vec<C64>,
    pub residues: Vec<C64>,
}

impl BarycentricRational {
    /// Type `(m, m)` where `m + 1` is the number of support points.
    pub fn degree(&self) -> usize {
        self.support_points.len().saturating_sub(1)
    }

    pub fn eval(&self, z: C64) -> C64 {
        let mut num = C64::new(0.0, 0.0);
        let mut den = C64::new(0.0, 0.0);
        for ((&zj, &fj), &wj) in self.support_points.iter().zip(&self.support_values).zip(&self.weights) {
            if z == zj {
                return fj;
            }
            let c = wj / (z - zj);
            num += c * fj;
            den += c;
        }
        num / den
    }

    /// Poles from the arrowhead pencil, residues from `N(p)/D'(p)`.
    pub fn poles(&self) -> Result<PoleReport, AaaError> {
        poles_of(self)
    }
}

/// Greedy AAA fit of `values` sampled at `points`.
pub fn aaa_fit(
    points: &[C64],
    values: &[C64],
    tol: f64,
    max_degree: usize,
) -> Result<BarycentricRational, AaaError> {
    if points.len() != values.len() {
        return Err(AaaError::LengthMismatch(points.len(), values.len()));
    }
    if points.len() < 2 {
        return Err(AaaError::TooFewSamples(points.len()));
    }
    if !(tol > 0.0) {
        return Err(AaaError::BadTolerance(tol));
    }
    if let Some(i) = (0..points.len()).find(|&i| !is_finite(points[i]) || !is_finite(values[i])) {
        return Err(AaaError::NonFinite(i));
    }
    let (points, values) = &dedup(points, values);
    let n = points.len();
    if n < 2 {
        return Err(AaaError::TooFewSamples(n));
    }
    let fmax = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mean = values.iter().sum::<C64>() / n as f64;
    let mut approx = vec![mean; n];
    let mut in_support = vec![false; n];
    let mut support: Vec<usize> = Vec::new();
    let mut weights = Vec::new();

    loop {
        let (jmax, err) = max_residual(values, &approx, &in_support);
        if !support.is_empty() && err <= tol * fmax {
            break;
        }
        if support.is_empty() && values.iter().all(|&v| v == values[0]) {
            support.push(0);
            weights = vec![C64::new(1.0, 0.0)];
            break;
        }
        if support.len() > max_degree || support.len() >= n - 1 {
            break;
        }
        support.push(jmax);
        in_support[jmax] = true;
        weights = loewner_weights(points, values, &support, &in_support)?;
        let rep = assemble(points, values, &support, &weights);
        for i in 0..n {
            approx[i] = if in_support[i] { values[i] } else { rep.eval(points[i]) };
        }
    }
    Ok(assemble(points, values, &support, &weights))
}

/// Drops repeated sample points (segment joints), keeping one of each.
fn dedup(points: &[C64], values: &[C64]) -> (Vec<C64>, Vec<C64>) {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a].re.total_cmp(&points[b].re));
    let mut repeated = vec![false; points.len()];
    for (k, &i) in order.iter().enumerate() {
        if repeated[i] {
            continue;
        }
        let close = 1e-14 * (1.0 + points[i].norm());
        for &j in order[k + 1..].iter().take_while(|&&j| points[j].re - points[i].re <= close) {
            if (points[j] - points[i]).norm() <= close {
                repeated[j] = true;
            }
        }
    }
    (0..points.len()).filter(|&i| !repeated[i]).map(|i| (points[i], values[i])).unzip()
}

fn is_finite(z: C64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

fn max_residual(values: &[C64], approx: &[C64], in_support: &[bool]) -> (usize, f64) {
    let mut best = (0, -1.0);
    for i in 0..values.len() {
        if in_support[i] {
            continue;
        }
        let r = (values[i] - approx[i]).norm();
        if r > best.1 {
            best = (i, r);
        }
    }
    (best.0, best.1.max(0.0))
}

fn assemble(points: &[C64], values: &[C64], support: &[usize], weights: &[C64]) -> BarycentricRational {
    BarycentricRational {
        support_points: support.iter().map(|&j| points[j]).collect(),
        support_values: support.iter().map(|&j| values[j]).collect(),
        weights: weights.to_vec(),
    }
}

fn loewner_weights(
    points: &[C64],
    values: &[C64],
    support: &[usize],
    in_support: &[bool],
) -> Result<Vec<C64>, AaaError> {
    let rows: Vec<usize> = (0..points.len()).filter(|&i| !in_support[i]).collect();
    let loewner = Mat::from_fn(rows.len(), support.len(), |r, c| {
        let (i, j) = (rows[r], support[c]);
        (values[i] - values[j]) / (points[i] - points[j])
    });
    Ok(linalg::min_right_singular_vector(loewner.as_ref())?)
}

/// Finite generalized eigenvalues of the `(m+2)×(m+2)` arrowhead pencil.
pub fn poles_of(rep: &BarycentricRational) -> Result<PoleReport, AaaError> {
    let m1 = rep.support_points.len();
    if m1 < 2 {
        return Ok(PoleReport::default());
    }
    let size = m1 + 1;
    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let e = Mat::from_fn(size, size, |i, j| match (i, j) {
        (0, 0) => zero,
        (0, j) => rep.weights[j - 1],
        (_, 0) => one,
        (i, j) if i == j => rep.support_points[i - 1],
        _ => zero,
    });
    let b = Mat::from_fn(size, size, |i, j| if i == j && i > 0 { one } else { zero });
    let pairs = linalg::generalized_eigenvalues(e.as_ref(), b.as_ref()).map_err(|source| {
        AaaError::Pencil { source, pencil: format!("{e:?}") }
    })?;
    // Exactly two eigenvalues are infinite; drop the two with the smallest |β|/|α|.
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    let finiteness = |k: usize| {
        let (a, b) = pairs[k];
        b.norm() / (a.norm() + b.norm()).max(f64::MIN_POSITIVE)
    };
    order.sort_by(|&x, &y| finiteness(y).total_cmp(&finiteness(x)));
    let poles: Vec<C64> = order[..m1 - 1].iter().map(|&k| pairs[k].0 / pairs[k].1).collect();
    let residues = poles.iter().map(|&p| residue(rep, p)).collect();
    Ok(PoleReport { poles, residues })
}

fn residue(rep: &BarycentricRational, p: C64) -> C64 {
    let mut num = C64::new(0.0, 0.0);
    let mut dden = C64::new(0.0, 0.0);
    for ((&zj, &fj), &wj) in rep.support_points.iter().zip(&rep.support_values).zip(&rep.weights) {
        let d = p - zj;
        num += wj * fj / d;
        dden -= wj / (d * d);
    }
    num / dden
}

/// Poles outside the closed fluid region (poles inside holes are kept).
pub fn filter_exterior(report: &PoleReport, domain: &Domain) -> Vec<C64> {
    report.poles.iter().copied().filter(|&p| is_finite(p) && !domain.contains(p)).collect()
}

/// Removes support points responsible for spurious pole–zero pairs.
///
/// A pole is spurious when `|residue| < residue_tol · max|F| · d`, with `d`
/// the distance from the pole to the nearest sample. For each spurious pole
/// the nearest support point is dropped, then the weights are refitted once.
pub fn froissart_cleanup(
    rep: &BarycentricRational,
    points: &[C64],
    values: &[C64],
    residue_tol: f64,
) -> Result<BarycentricRational, AaaError> {
    if residue_tol <= 0.0 || rep.degree() == 0 {
        return Ok(rep.clone());
    }
    let fmax = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let report = rep.poles()?;
    let mut drop = vec![false; rep.support_points.len()];
    for (&p, &r) in report.poles.iter().zip(&report.residues) {
        let dist = points.iter().map(|&z| (z - p).norm()).fold(f64::INFINITY, f64::min);
        if r.norm() < residue_tol * fmax * dist {
            let nearest = (0..rep.support_points.len())
                .min_by(|&a, &b| {
                    (rep.support_points[a] - p).norm().total_cmp(&(rep.support_points[b] - p).norm())
                })
                .expect("nonempty support");
            drop[nearest] = true;
        }
    }
    if !drop.iter().any(|&d| d) {
        return Ok(rep.clone());
    }
    if drop.iter().all(|&d| d) {
        return Ok(rep.clone());
    }
    let keep: Vec<C64> = rep
        .support_points
        .iter()
        .zip(&drop)
        .filter(|(_, &d)| !d)
        .map(|(&z, _)| z)
        .collect();
    let mut in_support = vec![false; points.len()];
    let mut support = Vec::new();
    for z in keep {
        if let Some(i) = points.iter().position(|&p| p == z) {
            in_support[i] = true;
            support.push(i);
        }
    }
    if support.is_empty() {
        return Ok(rep.clone());
    }
    let weights = loewner_weights(points, values, &support, &in_support)?;
    Ok(assemble(points, values, &support, &weights))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Curve, Hole, Segment};
    use crate::stokes_system::BoundaryConditionSpec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::TAU;

    fn circle(n: usize) -> Vec<C64> {
        (0..n).map(|k| C64::from_polar(1.0, TAU * k as f64 / n as f64)).collect()
    }

    fn max_err(rep: &BarycentricRational, z: &[C64], f: impl Fn(C64) -> C64) -> f64 {
        z.iter().map(|&z| (rep.eval(z) - f(z)).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn schwarz_function_of_circle() {
        let z = circle(128);
        let f: Vec<C64> = z.iter().map(|z| z.conj()).collect();
        let rep = aaa_fit(&z, &f, 1e-8, 100).unwrap();
        assert!(max_err(&rep, &z, |z| z.conj()) <= 1e-10);
        let off = C64::new(0.3, 0.4);
        assert!((rep.eval(off) - 1.0 / off).norm() < 1e-9);
        let poles = rep.poles().unwrap();
        assert_eq!(poles.poles.len(), 1);
        assert!(poles.poles[0].norm() < 1e-8);
        assert!((poles.residues[0] - 1.0).norm() < 1e-8);
    }

    #[test]
    fn constant_data_gives_degree_zero() {
        let z = circle(20);
        let f = vec![C64::new(2.5, -1.0); 20];
        let rep = aaa_fit(&z, &f, 1e-8, 100).unwrap();
        assert_eq!(rep.degree(), 0);
        assert!((rep.eval(C64::new(0.1, 0.2)) - C64::new(2.5, -1.0)).norm() < 1e-14);
        assert!(rep.poles().unwrap().poles.is_empty());
    }

    #[test]
    fn recovers_simple_rational() {
        let z = circle(200);
        let g = |z: C64| 1.0 / (z - 2.0);
        let f: Vec<C64> = z.iter().map(|&z| g(z)).collect();
        let rep = aaa_fit(&z, &f, 1e-13, 100).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let test: Vec<C64> =
            (0..1000).map(|_| C64::from_polar(rng.random_range(0.0..1.5), rng.random_range(0.0..TAU))).collect();
        assert!(max_err(&rep, &test, g) <= 1e-12);
    }

    #[test]
    fn two_pole_recovery() {
        let z = circle(200);
        let g = |z: C64| 1.0 / (z - 2.0) + 1.0 / (z + C64::new(0.0, 3.0));
        let f: Vec<C64> = z.iter().map(|&z| g(z)).collect();
        let rep = aaa_fit(&z, &f, 1e-13, 100).unwrap();
        let mut poles = rep.poles().unwrap().poles;
        assert_eq!(poles.len(), 2);
        poles.sort_by(|a, b| a.im.total_cmp(&b.im));
        assert!((poles[0] - C64::new(0.0, -3.0)).norm() < 1e-8);
        assert!((poles[1] - C64::new(2.0, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn interpolates_support_values_exactly() {
        let z = circle(64);
        let f: Vec<C64> = z.iter().map(|&z| (2.0 * z).exp()).collect();
        let rep = aaa_fit(&z, &f, 1e-12, 30).unwrap();
        for (zj, fj) in rep.support_points.iter().zip(&rep.support_values) {
            assert_eq!(rep.eval(*zj), *fj);
        }
    }

    #[test]
    fn filters_interior_poles() {
        let seg = Segment::new(
            "c",
            Curve::Arc { center: C64::new(0.0, 0.0), radius: 1.0, start_angle: 0.0, end_angle: TAU },
            64,
            BoundaryConditionSpec::no_slip(),
        );
        let disk = Domain::new(vec![seg.clone()], vec![], vec![]).unwrap();
        let report = PoleReport {
            poles: vec![C64::new(0.0, 0.0), C64::new(2.0, 0.0)],
            residues: vec![C64::new(1.0, 0.0); 2],
        };
        assert_eq!(filter_exterior(&report, &disk), vec![C64::new(2.0, 0.0)]);

        let hole = Segment::new(
            "h",
            Curve::Arc { center: C64::new(0.0, 0.0), radius: 0.3, start_angle: 0.0, end_angle: -TAU },
            64,
            BoundaryConditionSpec::no_slip(),
        );
        let annulus = Domain::new(
            vec![seg],
            vec![Hole {
                boundary: vec![hole],
                laurent_center: C64::new(0.0, 0.0),
                laurent_degree: 1,
                extra_centers: vec![],
            }],
            vec![],
        )
        .unwrap();
        let report = PoleReport { poles: vec![C64::new(0.05, 0.0)], residues: vec![C64::new(1.0, 0.0)] };
        assert_eq!(filter_exterior(&report, &annulus).len(), 1);
    }

    #[test]
    fn cleanup_keeps_clean_fit() {
        let z = circle(100);
        let f: Vec<C64> = z.iter().map(|&z| 1.0 / (z - 2.0)).collect();
        let rep = aaa_fit(&z, &f, 1e-13, 100).unwrap();
        assert_eq!(froissart_cleanup(&rep, &z, &f, 1e-8).unwrap(), rep);
        assert_eq!(froissart_cleanup(&rep, &z, &f, 0.0).unwrap(), rep);
    }

    #[test]
    fn cleanup_removes_noise_poles() {
        let z = circle(100);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f: Vec<C64> =
            (0..100).map(|_| C64::new(1.0 + 1e-9 * rng.random_range(-1.0..1.0), 0.0)).collect();
        let rep = aaa_fit(&z, &f, 1e-16, 5).unwrap();
        assert_eq!(rep.degree(), 5);
        let before = rep.poles().unwrap().poles.len();
        let cleaned = froissart_cleanup(&rep, &z, &f, 1e-4).unwrap();
        let after = cleaned.poles().unwrap().poles.len();
        assert!(after < before, "{after} !< {before}");
        let res = |r: &BarycentricRational| (0..100).map(|i| (r.eval(z[i]) - f[i]).norm()).fold(0.0, f64::max);
        assert!(res(&cleaned) <= 10.0 * res(&rep).max(1e-9));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]
            #[test]
            fn residual_contract(a in -0.9f64..0.9, b in -0.9f64..0.9, k in 0.5f64..3.0) {
                let z = circle(150);
                let f: Vec<C64> = z.iter().map(|&z| (k * z).sin() + 1.0 / (z - C64::new(a, b) * 3.0)).collect();
                let rep = aaa_fit(&z, &f, 1e-9, 100).unwrap();
                let fmax = f.iter().map(|v| v.norm()).fold(0.0, f64::max);
                let res = (0..z.len()).map(|i| (rep.eval(z[i]) - f[i]).norm()).fold(0.0, f64::max);
                prop_assert!(res <= 1e-9 * fmax);
            }

            #[test]
            fn exact_for_low_type_rationals(p in -0.5f64..0.5, q in 1.5f64..3.0, c in -2.0f64..2.0) {
                let z = circle(24);
                let pole = C64::from_polar(q, p);
                let g = |z: C64| (c * z * z + 1.0) / ((z - pole) * (z + 2.0 * pole));
                let f: Vec<C64> = z.iter().map(|&z| g(z)).collect();
                let rep = aaa_fit(&z, &f, 1e-14, 4).unwrap();
                let fmax = f.iter().map(|v| v.norm()).fold(0.0, f64::max);
                let test: Vec<C64> = (0..97).map(|k| C64::from_polar(0.9, TAU * k as f64 / 97.0)).collect();
                prop_assert!(max_err(&rep, &test, g) <= 1e-10 * fmax);
            }
        }
    }
}
