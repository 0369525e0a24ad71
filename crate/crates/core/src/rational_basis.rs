//! Orthogonalized basis families (Vandermonde with Arnoldi) and their
//! re-evaluation with derivatives.
//!
//! Each family is orthogonalized on the training samples with the discrete
//! inner product `⟨a, b⟩ = mean(conj(a)·b)`. The recurrence coefficients are
//! stored so that values and derivatives can be rebuilt at any point.

use faer::Mat;
use rayon::prelude::*;

use crate::C64;

const REORTH_THRESHOLD: f64 = 1e-8;
const BREAKDOWN_TOL: f64 = 1e-14;

#[derive(Debug, thiserror::Error)]
pub enum BasisError {
    #[error("{family} basis broke down at step {step} (column has no new direction)")]
    Breakdown { family: String, step: usize },
    #[error("{needed} basis columns but only {samples} training samples")]
    TooFewSamples { needed: usize, samples: usize },
    #[error("evaluation point {0} coincides with a pole or Laurent center")]
    Singular(C64),
    #[error("no basis families given")]
    Empty,
}

/// One block of basis functions.
#[derive(Debug, Clone, PartialEq)]
pub enum BasisFamily {
    /// `1, z, …, z^degree`.
    Polynomial { degree: usize },
    /// `(z − center)^{-k}`, `k = 1..degree`.
    Laurent { center: C64, degree: usize },
    /// `1/(z − pole)` for every pole. In the Goursat pairing the `f` columns
    /// of this group multiply `z̄ − conj(anchor)` instead of `z̄`.
    PoleGroup { poles: Vec<C64>, anchor: C64 },
}

impl BasisFamily {
    /// Number of recurrence steps (columns beyond the constant).
    pub fn steps(&self) -> usize {
        match self {
            BasisFamily::Polynomial { degree } => *degree,
            BasisFamily::Laurent { degree, .. } => *degree,
            BasisFamily::PoleGroup { poles, .. } => poles.len(),
        }
    }

    /// Point `a` such that `f` columns enter `ψ` as `Im[(z̄ − ā) f]`; the
    /// Laurent center for Laurent blocks and the origin for polynomials.
    pub fn anchor(&self) -> C64 {
        match self {
            BasisFamily::Polynomial { .. } => C64::new(0.0, 0.0),
            BasisFamily::Laurent { center, .. } => *center,
            BasisFamily::PoleGroup { anchor, .. } => *anchor,
        }
    }

    fn name(&self) -> String {
        match self {
            BasisFamily::Polynomial { degree } => format!("polynomial(degree {degree})"),
            BasisFamily::Laurent { center, degree } => format!("Laurent(center {center}, degree {degree})"),
            BasisFamily::PoleGroup { poles, .. } => format!("pole group ({} poles)", poles.len()),
        }
    }

    fn singular_at(&self, z: C64) -> bool {
        match self {
            BasisFamily::Polynomial { .. } => false,
            BasisFamily::Laurent { center, .. } => z == *center,
            BasisFamily::PoleGroup { poles, .. } => poles.contains(&z),
        }
    }
}

/// A family with its upper-Hessenberg recurrence table, `(d+1)×d`.
#[derive(Debug, Clone)]
pub struct OrthogonalBasisRecord {
    pub family: BasisFamily,
    pub hessenberg: Mat<C64>,
}

/// Basis values `R0` and derivatives `R1`, one row per point, with the
/// anchor of every column.
#[derive(Debug, Clone)]
pub struct BasisEval {
    pub values: Mat<C64>,
    pub derivs: Mat<C64>,
    pub anchors: Vec<C64>,
}

/// The concatenated orthogonal basis.
#[derive(Debug, Clone)]
pub struct OrthogonalBasis {
    pub records: Vec<OrthogonalBasisRecord>,
}

impl OrthogonalBasis {
    /// `1 + Σ steps`: the constant appears once.
    pub fn ncols(&self) -> usize {
        1 + self.records.iter().map(|r| r.family.steps()).sum::<usize>()
    }

    /// Anchor of every column; the shared constant is anchored at the origin.
    pub fn anchors(&self) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0)];
        for rec in &self.records {
            out.extend(std::iter::repeat_n(rec.family.anchor(), rec.family.steps()));
        }
        out
    }

    /// Values and derivatives of all columns at one point.
    pub fn eval_point(&self, z: C64) -> Result<(Vec<C64>, Vec<C64>), BasisError> {
        let n = self.ncols();
        let mut vals = Vec::with_capacity(n);
        let mut ders = Vec::with_capacity(n);
        vals.push(C64::new(1.0, 0.0));
        ders.push(C64::new(0.0, 0.0));
        let mut w = Vec::new();
        let mut d = Vec::new();
        for rec in &self.records {
            if rec.family.singular_at(z) {
                return Err(BasisError::Singular(z));
            }
            eval_family(rec, z, &mut w, &mut d);
            vals.extend_from_slice(&w[1..]);
            ders.extend_from_slice(&d[1..]);
        }
        Ok((vals, ders))
    }

    /// `R0`, `R1` at every point (rows evaluated in parallel).
    pub fn evaluate(&self, points: &[C64]) -> Result<BasisEval, BasisError> {
        let rows: Vec<_> = points.par_iter().map(|&z| self.eval_point(z)).collect::<Result<_, _>>()?;
        let n = self.ncols();
        let values = Mat::from_fn(points.len(), n, |i, j| rows[i].0[j]);
        let derivs = Mat::from_fn(points.len(), n, |i, j| rows[i].1[j]);
        Ok(BasisEval { values, derivs, anchors: self.anchors() })
    }
}

fn eval_family(rec: &OrthogonalBasisRecord, z: C64, w: &mut Vec<C64>, d: &mut Vec<C64>) {
    let h = &rec.hessenberg;
    let steps = rec.family.steps();
    w.clear();
    d.clear();
    w.push(C64::new(1.0, 0.0));
    d.push(C64::new(0.0, 0.0));
    for k in 1..=steps {
        let (mut val, mut der) = match &rec.family {
            BasisFamily::Polynomial { .. } => (z * w[k - 1], z * d[k - 1] + w[k - 1]),
            BasisFamily::Laurent { center, .. } => {
                let s = 1.0 / (z - center);
                (s * w[k - 1], s * d[k - 1] - s * s * w[k - 1])
            }
            BasisFamily::PoleGroup { poles, .. } => {
                let s = 1.0 / (z - poles[k - 1]);
                (s, -s * s)
            }
        };
        for j in 0..k {
            val -= h[(j, k - 1)] * w[j];
            der -= h[(j, k - 1)] * d[j];
        }
        let hk = h[(k, k - 1)];
        w.push(val / hk);
        d.push(der / hk);
    }
}

/// Orthogonalizes each family on the training samples.
///
/// The constant column is shared; later families drop their own.
pub fn orthogonalize(points: &[C64], families: &[BasisFamily]) -> Result<OrthogonalBasis, BasisError> {
    orthogonalize_with_columns(points, families).map(|(b, _)| b)
}

/// As [`orthogonalize`], also returning the training-point columns.
pub fn orthogonalize_with_columns(
    points: &[C64],
    families: &[BasisFamily],
) -> Result<(OrthogonalBasis, Vec<Vec<C64>>), BasisError> {
    if families.is_empty() {
        return Err(BasisError::Empty);
    }
    let needed = 1 + families.iter().map(BasisFamily::steps).sum::<usize>();
    if points.len() < needed {
        return Err(BasisError::TooFewSamples { needed, samples: points.len() });
    }
    for fam in families {
        if let Some(&z) = points.iter().find(|&&z| fam.singular_at(z)) {
            return Err(BasisError::Singular(z));
        }
    }
    let mut records = Vec::new();
    let mut columns = vec![vec![C64::new(1.0, 0.0); points.len()]];
    for fam in families {
        if fam.steps() == 0 && !records.is_empty() {
            continue;
        }
        let (rec, q) = arnoldi(points, fam)?;
        columns.extend(q.into_iter().skip(1));
        records.push(rec);
    }
    Ok((OrthogonalBasis { records }, columns))
}

fn mean_dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<C64>() / a.len() as f64
}

fn rms(a: &[C64]) -> f64 {
    (a.iter().map(|x| x.norm_sqr()).sum::<f64>() / a.len() as f64).sqrt()
}

fn arnoldi(points: &[C64], fam: &BasisFamily) -> Result<(OrthogonalBasisRecord, Vec<Vec<C64>>), BasisError> {
    let m = points.len();
    let steps = fam.steps();
    let mut h = Mat::<C64>::zeros(steps + 1, steps);
    let mut q: Vec<Vec<C64>> = vec![vec![C64::new(1.0, 0.0); m]];
    for k in 1..=steps {
        let mut v: Vec<C64> = match fam {
            BasisFamily::Polynomial { .. } => points.iter().zip(&q[k - 1]).map(|(z, x)| z * x).collect(),
            BasisFamily::Laurent { center, .. } => {
                points.iter().zip(&q[k - 1]).map(|(z, x)| x / (z - center)).collect()
            }
            BasisFamily::PoleGroup { poles, .. } => points.iter().map(|z| 1.0 / (z - poles[k - 1])).collect(),
        };
        let raw_norm = rms(&v);
        for j in 0..k {
            let c = mean_dot(&q[j], &v);
            h[(j, k - 1)] = c;
            v.iter_mut().zip(&q[j]).for_each(|(x, y)| *x -= c * y);
        }
        let norm = rms(&v);
        let loss = (0..k).map(|j| mean_dot(&q[j], &v).norm()).fold(0.0, f64::max) / norm.max(f64::MIN_POSITIVE);
        if loss > REORTH_THRESHOLD {
            for j in 0..k {
                let c = mean_dot(&q[j], &v);
                h[(j, k - 1)] += c;
                v.iter_mut().zip(&q[j]).for_each(|(x, y)| *x -= c * y);
            }
        }
        let norm = rms(&v);
        if !norm.is_finite() || norm <= BREAKDOWN_TOL * raw_norm {
            return Err(BasisError::Breakdown { family: fam.name(), step: k });
        }
        h[(k, k - 1)] = C64::new(norm, 0.0);
        v.iter_mut().for_each(|x| *x /= norm);
        q.push(v);
    }
    Ok((OrthogonalBasisRecord { family: fam.clone(), hessenberg: h }, q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn hand_arnoldi_degree_one() {
        let z = [c(-1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        let (basis, cols) = orthogonalize_with_columns(&z, &[BasisFamily::Polynomial { degree: 1 }]).unwrap();
        let s = (2.0f64 / 3.0).sqrt();
        assert!((basis.records[0].hessenberg[(1, 0)].re - s).abs() < 1e-15);
        for (k, zk) in z.iter().enumerate() {
            assert!((cols[0][k] - 1.0).norm() == 0.0);
            assert!((cols[1][k] - zk / s).norm() < 1e-15);
        }
        let (v, d) = basis.eval_point(c(2.0, 0.0)).unwrap();
        assert!((v[1] - 2.0 / s).norm() < 1e-14);
        assert!((d[1] - 1.0 / s).norm() < 1e-14);
        assert_eq!(d[0], c(0.0, 0.0));
    }

    #[test]
    fn laurent_on_circle_has_unit_subdiagonal() {
        let z: Vec<C64> = (0..64).map(|k| C64::from_polar(1.0, TAU * k as f64 / 64.0)).collect();
        let (basis, cols) =
            orthogonalize_with_columns(&z, &[BasisFamily::Laurent { center: c(0.0, 0.0), degree: 1 }]).unwrap();
        assert!((basis.records[0].hessenberg[(1, 0)].re - 1.0).abs() < 1e-14);
        for (k, zk) in z.iter().enumerate() {
            assert!((cols[1][k] - 1.0 / zk).norm() < 1e-14);
        }
    }

    fn mixed_setup() -> (Vec<C64>, Vec<BasisFamily>) {
        let z: Vec<C64> = (0..400)
            .map(|k| {
                let t = TAU * k as f64 / 400.0;
                C64::new(1.3 * t.cos(), 0.8 * t.sin())
            })
            .collect();
        let fams = vec![
            BasisFamily::Polynomial { degree: 12 },
            BasisFamily::Laurent { center: c(0.2, 0.1), degree: 6 },
            BasisFamily::PoleGroup { poles: vec![c(1.5, 0.0), c(1.4, 0.05), c(0.0, 1.1)], anchor: c(0.0, 0.0) },
        ];
        (z, fams)
    }

    #[test]
    fn evaluation_reproduces_training_columns() {
        let (z, fams) = mixed_setup();
        let (basis, cols) = orthogonalize_with_columns(&z, &fams).unwrap();
        assert_eq!(basis.ncols(), 13 + 6 + 3);
        assert_eq!(cols.len(), basis.ncols());
        let ev = basis.evaluate(&z).unwrap();
        for j in 0..basis.ncols() {
            for i in 0..z.len() {
                assert!((ev.values[(i, j)] - cols[j][i]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn gram_matrix_is_identity_within_families() {
        let (z, fams) = mixed_setup();
        let (_, cols) = orthogonalize_with_columns(&z, &fams).unwrap();
        let blocks = [(0usize, 13usize), (13, 19), (19, 22)];
        for &(a, b) in &blocks {
            let mut range: Vec<usize> = (a..b).collect();
            range.insert(0, 0);
            range.dedup();
            for &i in &range {
                for &j in &range {
                    let g = mean_dot(&cols[i], &cols[j]);
                    let e = if i == j { 1.0 } else { 0.0 };
                    assert!((g - e).norm() < 1e-10, "gram({i},{j}) = {g}");
                }
            }
        }
    }

    #[test]
    fn zero_degree_families_are_skipped() {
        let (z, _) = mixed_setup();
        let basis = orthogonalize(
            &z,
            &[
                BasisFamily::Polynomial { degree: 3 },
                BasisFamily::Laurent { center: c(0.0, 0.0), degree: 0 },
                BasisFamily::PoleGroup { poles: vec![], anchor: c(0.0, 0.0) },
            ],
        )
        .unwrap();
        assert_eq!(basis.ncols(), 4);
    }

    #[test]
    fn duplicate_poles_break_down() {
        let (z, _) = mixed_setup();
        let err = orthogonalize(
            &z,
            &[BasisFamily::Polynomial { degree: 2 }, BasisFamily::PoleGroup { poles: vec![c(2.0, 0.0), c(2.0, 0.0)], anchor: c(0.0, 0.0) }],
        )
        .unwrap_err();
        assert!(matches!(err, BasisError::Breakdown { step: 2, .. }));
    }

    #[test]
    fn evaluation_at_center_is_an_error() {
        let (z, fams) = mixed_setup();
        let basis = orthogonalize(&z, &fams).unwrap();
        assert!(matches!(basis.eval_point(c(0.2, 0.1)), Err(BasisError::Singular(_))));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]
            #[test]
            fn derivative_matches_central_difference(x in -0.9f64..0.9, y in -0.5f64..0.5) {
                let (z, fams) = mixed_setup();
                let basis = orthogonalize(&z, &fams).unwrap();
                let z0 = c(x, y);
                prop_assume!((z0 - c(0.2, 0.1)).norm() > 0.1);
                let h = 1e-6;
                let (_, d) = basis.eval_point(z0).unwrap();
                let (vp, _) = basis.eval_point(z0 + h).unwrap();
                let (vm, _) = basis.eval_point(z0 - h).unwrap();
                for j in 0..basis.ncols() {
                    let fd = (vp[j] - vm[j]) / (2.0 * h);
                    prop_assert!((fd - d[j]).norm() <= 1e-6 * d[j].norm().max(1.0), "col {}: {} vs {}", j, fd, d[j]);
                }
            }
        }
    }
}
