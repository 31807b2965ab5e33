use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::cutoff::Cutoff;
use super::fpair::FPair;
use super::frame::{AdaptedFrame, FrameCase};
use crate::curvature::{riemann_tensor, Tensor4};
use crate::defect::TangentPlane;
use crate::error::{GeoError, Result};
use crate::manifold::{Chart, MetricField, MetricJet, MetricModel};

/// Everything needed to re-evaluate one block perturbation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeformationSpec {
    pub center: TangentPlane,
    pub case: FrameCase,
    /// Adapted frame at the center, as a list of columns.
    #[serde(with = "columns_serde")]
    pub frame: DMatrix<f64>,
    #[serde(rename = "K")]
    pub k: f64,
    pub eps: f64,
    pub eps_tilde: f64,
    pub delta: f64,
    pub rho: f64,
    pub pad: f64,
    pub s: f64,
}

mod columns_serde {
    use nalgebra::{DMatrix, DVector};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &DMatrix<f64>, ser: S) -> Result<S::Ok, S::Error> {
        let cols: Vec<Vec<f64>> = m.column_iter().map(|c| c.iter().copied().collect()).collect();
        cols.serialize(ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<DMatrix<f64>, D::Error> {
        let cols: Vec<Vec<f64>> = Vec::deserialize(de)?;
        let n = cols.first().map(Vec::len).unwrap_or(0);
        if cols.iter().any(|c| c.len() != n) {
            return Err(serde::de::Error::custom("frame columns differ in length"));
        }
        let cols: Vec<DVector<f64>> = cols.into_iter().map(DVector::from_vec).collect();
        Ok(crate::manifold::columns(n, &cols))
    }
}

impl DeformationSpec {
    pub fn new(frame: &AdaptedFrame, fpair: &FPair, s: f64) -> Self {
        Self {
            center: frame.plane.clone(),
            case: frame.case,
            frame: frame.frame.clone(),
            k: fpair.k,
            eps: fpair.eps,
            eps_tilde: fpair.eps_tilde,
            delta: fpair.bump.delta,
            rho: fpair.cutoff.rho,
            pad: fpair.cutoff.pad,
            s,
        }
    }

    pub fn fpair(&self) -> Result<FPair> {
        let cutoff = Cutoff::new(self.rho, self.pad)?;
        FPair::with_eps_tilde(self.k, self.eps, self.eps_tilde, cutoff)
    }

    pub fn with_amplitude(&self, s: f64) -> Self {
        Self { s, ..self.clone() }
    }

    pub fn support_radius(&self) -> f64 {
        self.rho + self.pad
    }

    pub fn adapted_frame(&self) -> AdaptedFrame {
        AdaptedFrame {
            plane: self.center.clone(),
            case: self.case,
            frame: self.frame.clone(),
        }
    }
}

/// `ĝ` plus the block perturbation of one [`DeformationSpec`]. In the
/// adapted coordinates `y = A(x − p)`, `A = F⁻¹`, the only changed entries
/// are `(2,3)`, `(3,2)` by `s·f₁` and `(2,4)`, `(4,2)` by `s·f₂`.
#[derive(Debug)]
pub struct DeformedMetric {
    base: MetricField,
    spec: DeformationSpec,
    fpair: FPair,
    inverse: DMatrix<f64>,
    s12: DMatrix<f64>,
    s13: DMatrix<f64>,
}

impl DeformedMetric {
    pub fn new(base: MetricField, spec: DeformationSpec) -> Result<Self> {
        let n = base.dim();
        if n < 4 {
            return Err(GeoError::InvalidParameter(format!(
                "deformation needs dimension at least 4, got {n}"
            )));
        }
        if spec.frame.nrows() != n || spec.frame.ncols() != n || spec.center.n() != n {
            return Err(GeoError::DimensionMismatch {
                expected: n,
                got: spec.frame.nrows(),
            });
        }
        if !(spec.s >= 0.0) || !spec.s.is_finite() {
            return Err(GeoError::InvalidParameter(format!(
                "amplitude s must be non-negative, got {}",
                spec.s
            )));
        }
        let inverse = spec
            .frame
            .clone()
            .try_inverse()
            .ok_or_else(|| GeoError::InvalidParameter("adapted frame is singular".into()))?;
        for axis in 0..n {
            let reach = spec.frame.row(axis).norm() * spec.support_radius();
            if let Some(period) = base.chart().period(axis) {
                if reach >= 0.5 * period {
                    return Err(GeoError::InvalidParameter(format!(
                        "deformation support (reach {reach:.4}) wraps around periodic axis {axis}"
                    )));
                }
            }
        }
        let fpair = spec.fpair()?;
        let row = |i: usize| inverse.row(i).transpose();
        let sym = |a: DVector<f64>, b: DVector<f64>| &a * b.transpose() + &b * a.transpose();
        let s12 = sym(row(1), row(2));
        let s13 = sym(row(1), row(3));
        Ok(Self {
            base,
            spec,
            fpair,
            inverse,
            s12,
            s13,
        })
    }

    pub fn spec(&self) -> &DeformationSpec {
        &self.spec
    }

    pub fn base(&self) -> &MetricField {
        &self.base
    }

    /// Adapted coordinates of `x` when it lies inside the support.
    pub fn local(&self, x: &DVector<f64>) -> Option<DVector<f64>> {
        let d = self.base.chart().displacement(self.spec.center.point(), x);
        let y = &self.inverse * d;
        (y.norm() < self.spec.support_radius()).then_some(y)
    }
}

impl MetricModel for DeformedMetric {
    fn chart(&self) -> &Chart {
        self.base.chart()
    }

    fn eval(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        let g = self.base.model().eval(x)?;
        let Some(y) = self.local(x) else {
            return Ok(g);
        };
        let [f1, f2] = self.fpair.eval(&y);
        let s = self.spec.s;
        Ok(g + &self.s12 * (s * f1.value) + &self.s13 * (s * f2.value))
    }

    fn has_analytic_jet(&self) -> bool {
        self.base.backend().is_analytic()
    }

    fn analytic_jet(&self, x: &DVector<f64>) -> Result<MetricJet> {
        let mut jet = self.base.model().analytic_jet(x)?;
        let Some(y) = self.local(x) else {
            return Ok(jet);
        };
        let n = x.len();
        let s = self.spec.s;
        let [f1, f2] = self.fpair.eval(&y);
        let at = self.inverse.transpose();
        let (g1, g2) = (&at * &f1.grad, &at * &f2.grad);
        let (h1, h2) = (&at * &f1.hess * &self.inverse, &at * &f2.hess * &self.inverse);
        jet.value += &self.s12 * (s * f1.value) + &self.s13 * (s * f2.value);
        for a in 0..n {
            jet.first[a] += &self.s12 * (s * g1[a]) + &self.s13 * (s * g2[a]);
            for c in 0..n {
                *jet.second_mut(a, c) += &self.s12 * (s * h1[(a, c)]) + &self.s13 * (s * h2[(a, c)]);
            }
        }
        Ok(jet)
    }
}

/// Wraps `base` with one perturbation of amplitude `s`, checking positive
/// definiteness on the sampled support.
pub fn perturb(base: &MetricField, frame: &AdaptedFrame, fpair: &FPair, s: f64) -> Result<MetricField> {
    let spec = DeformationSpec::new(frame, fpair, s);
    let field = deformed_field(base, spec)?;
    if spd_on_support(&field, frame, fpair) {
        return Ok(field);
    }
    let mut valid = 0.5 * s;
    for _ in 0..60 {
        let trial = deformed_field(base, DeformationSpec::new(frame, fpair, valid))?;
        if spd_on_support(&trial, frame, fpair) {
            break;
        }
        valid *= 0.5;
    }
    Err(GeoError::AmplitudeTooLarge { s, max_valid: valid })
}

/// Builds the deformed field without the positive-definiteness sweep.
pub fn deformed_field(base: &MetricField, spec: DeformationSpec) -> Result<MetricField> {
    Ok(MetricField::new(Arc::new(DeformedMetric::new(base.clone(), spec)?)))
}

fn spd_on_support(field: &MetricField, frame: &AdaptedFrame, fpair: &FPair) -> bool {
    let n = field.dim();
    let p = frame.point();
    fpair
        .sample_points(n)
        .iter()
        .step_by(3)
        .filter(|y| y.norm() < fpair.support_radius())
        .all(|y| {
            let x = p + &frame.frame * y;
            field.metric_at(&x).is_ok()
        })
}

/// Leading-order change of `R(E₂, E₁, E₁, E₃)` and `R(E₂, E₁, E₁, E₄)` in the
/// adapted frame: `−(s/2)·∂₁∂₁f₁` and `−(s/2)·∂₁∂₁f₂`.
pub fn predicted_curvature_delta(spec: &DeformationSpec, chart: &Chart, x: &DVector<f64>) -> Result<(f64, f64)> {
    let a = spec
        .frame
        .clone()
        .try_inverse()
        .ok_or_else(|| GeoError::InvalidParameter("adapted frame is singular".into()))?;
    let y = a * chart.displacement(spec.center.point(), x);
    if y.norm() >= spec.support_radius() {
        return Ok((0.0, 0.0));
    }
    let [f1, f2] = spec.fpair()?.eval(&y);
    Ok((
        -0.5 * spec.s * f1.hess[(0, 0)],
        -0.5 * spec.s * f2.hess[(0, 0)],
    ))
}

/// Curvature tensor at `x` expressed in the spec's adapted frame.
pub fn frame_curvature(field: &MetricField, spec: &DeformationSpec, x: &DVector<f64>) -> Result<Tensor4> {
    Ok(riemann_tensor(field, x)?.riemann.in_frame(&spec.frame))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deformation::adapted_frame;
    use crate::manifold::{make_model, ModelDescriptor};

    fn setup(s: f64) -> (MetricField, MetricField, DeformationSpec) {
        let torus = make_model(&ModelDescriptor::new("torus", 4)).unwrap();
        let center = DVector::from_element(4, 0.5);
        let plane = TangentPlane::coordinate(&torus, center, &[0, 1]).unwrap();
        let frame = adapted_frame(&torus, &plane).unwrap();
        let fpair = FPair::build(10.0, 0.1, Cutoff::new(0.15, 0.1).unwrap(), 4).unwrap();
        let field = perturb(&torus, &frame, &fpair, s).unwrap();
        (torus, field, DeformationSpec::new(&frame, &fpair, s))
    }

    #[test]
    fn zero_amplitude_is_the_base() {
        let (torus, field, _) = setup(0.0);
        for k in 0..50 {
            let x = DVector::from_fn(4, |i, _| 0.5 + 0.004 * ((k * (i + 1)) as f64).sin() * k as f64);
            assert_eq!(field.metric_at(&x).unwrap(), torus.metric_at(&x).unwrap());
        }
    }

    #[test]
    fn entry_is_s_times_f1() {
        let s = 1e-3;
        let (_, field, spec) = setup(s);
        let fpair = spec.fpair().unwrap();
        let y = DVector::from_vec(vec![0.0123, 0.02, -0.01, 0.03]);
        let x = spec.center.point() + &y;
        let g = field.metric_at(&x).unwrap();
        let [f1, f2] = fpair.eval(&(&x - spec.center.point()));
        assert_eq!(g[(1, 2)], s * f1.value);
        assert_eq!(g[(1, 3)], s * f2.value);
        assert_eq!(g[(0, 0)], 1.0);
        assert_eq!(g[(2, 3)], 0.0);
    }

    #[test]
    fn identical_outside_support() {
        let (torus, field, _) = setup(1e-3);
        let x = DVector::from_vec(vec![0.1, 0.5, 0.5, 0.5]);
        assert_eq!(field.metric_at(&x).unwrap(), torus.metric_at(&x).unwrap());
        assert_eq!(field.jet(&x).unwrap(), torus.jet(&x).unwrap());
    }

    #[test]
    fn analytic_jet_matches_differences() {
        let torus = make_model(&ModelDescriptor::new("random-trig", 4).with_seed(5)).unwrap();
        let plane = TangentPlane::coordinate(&torus, DVector::from_element(4, 1.5), &[0, 2]).unwrap();
        let frame = adapted_frame(&torus, &plane).unwrap();
        // a slow bump so that differences resolve it
        let fpair = FPair::with_eps_tilde(3.0, 0.1, 0.05, Cutoff::new(0.15, 0.1).unwrap()).unwrap();
        let field = perturb(&torus, &frame, &fpair, 1e-2).unwrap();
        let spec = DeformationSpec::new(&frame, &fpair, 1e-2);
        let fd = field
            .with_backend(crate::manifold::DerivativeBackend::richardson(1e-4))
            .unwrap();
        // in the transition shell, where every term is active
        let x = spec.center.point() + DVector::from_vec(vec![0.1, 0.12, 0.05, -0.03]);
        let a = field.jet(&x).unwrap();
        let b = fd.jet(&x).unwrap();
        for i in 0..4 {
            assert!((&a.first[i] - &b.first[i]).amax() < 1e-6);
        }
        for (p, q) in a.second.iter().zip(&b.second) {
            assert!((p - q).amax() < 1e-3 * (1.0 + p.amax()), "{} {}", p.amax(), (p - q).amax());
        }
    }

    #[test]
    fn too_large_amplitude_is_reported() {
        let torus = make_model(&ModelDescriptor::new("torus", 4)).unwrap();
        let plane = TangentPlane::coordinate(&torus, DVector::from_element(4, 0.5), &[0, 1]).unwrap();
        let frame = adapted_frame(&torus, &plane).unwrap();
        let fpair = FPair::build(10.0, 0.1, Cutoff::new(0.15, 0.1).unwrap(), 4).unwrap();
        let huge = 1.0 / fpair.bump.amplitude();
        match perturb(&torus, &frame, &fpair, huge) {
            Err(GeoError::AmplitudeTooLarge { max_valid, .. }) => {
                assert!(max_valid < huge);
                assert!(perturb(&torus, &frame, &fpair, max_valid).is_ok());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn spec_json_round_trip_is_exact() {
        let (torus, field, spec) = setup(2f64.powi(-12));
        let text = serde_json::to_string(&spec).unwrap();
        let back: DeformationSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);
        let rebuilt = deformed_field(&torus, back).unwrap();
        let x = spec.center.point() + DVector::from_vec(vec![0.01, 0.03, 0.0, 0.02]);
        assert_eq!(rebuilt.jet(&x).unwrap(), field.jet(&x).unwrap());
    }
}
