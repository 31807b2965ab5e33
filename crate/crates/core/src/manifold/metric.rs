use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::chart::Chart;
use super::fd;
use crate::error::{GeoError, Result};

/// Metric value with its first and second coordinate partials at one point.
///
/// `first[i]` is ∂ᵢg and `second[i * n + j]` is ∂ᵢ∂ⱼg.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricJet {
    pub value: DMatrix<f64>,
    pub first: Vec<DMatrix<f64>>,
    pub second: Vec<DMatrix<f64>>,
}

impl MetricJet {
    pub fn zeros(n: usize, value: DMatrix<f64>) -> Self {
        Self {
            value,
            first: vec![DMatrix::zeros(n, n); n],
            second: vec![DMatrix::zeros(n, n); n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.value.nrows()
    }

    pub fn second(&self, i: usize, j: usize) -> &DMatrix<f64> {
        &self.second[i * self.dim() + j]
    }

    pub fn second_mut(&mut self, i: usize, j: usize) -> &mut DMatrix<f64> {
        let n = self.dim();
        &mut self.second[i * n + j]
    }

    /// Entrywise sum, used to superpose a perturbation on a base jet.
    pub fn add_assign(&mut self, other: &MetricJet) {
        self.value += &other.value;
        for (a, b) in self.first.iter_mut().zip(&other.first) {
            *a += b;
        }
        for (a, b) in self.second.iter_mut().zip(&other.second) {
            *a += b;
        }
    }

    fn symmetrize(&mut self) {
        sym_in_place(&mut self.value);
        self.first.iter_mut().for_each(sym_in_place);
        self.second.iter_mut().for_each(sym_in_place);
    }
}

pub(crate) fn sym_in_place(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let s = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = s;
            m[(j, i)] = s;
        }
    }
}

/// A metric tensor field in chart coordinates.
///
/// `eval` receives points already reduced into the chart domain.
pub trait MetricModel: Send + Sync + fmt::Debug {
    fn chart(&self) -> &Chart;

    fn eval(&self, x: &DVector<f64>) -> Result<DMatrix<f64>>;

    fn has_analytic_jet(&self) -> bool {
        false
    }

    fn analytic_jet(&self, _x: &DVector<f64>) -> Result<MetricJet> {
        Err(GeoError::InvalidParameter(
            "model has no closed-form partials".into(),
        ))
    }

    fn dim(&self) -> usize {
        self.chart().dim()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DerivativeMode {
    Analytic,
    Central,
    Richardson,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivativeBackend {
    pub mode: DerivativeMode,
    pub step: f64,
}

impl DerivativeBackend {
    pub fn analytic() -> Self {
        Self {
            mode: DerivativeMode::Analytic,
            step: 1e-4,
        }
    }

    pub fn central(step: f64) -> Self {
        Self {
            mode: DerivativeMode::Central,
            step,
        }
    }

    pub fn richardson(step: f64) -> Self {
        Self {
            mode: DerivativeMode::Richardson,
            step,
        }
    }

    pub fn is_analytic(&self) -> bool {
        self.mode == DerivativeMode::Analytic
    }
}

/// A metric field together with the derivative backend used for curvature.
#[derive(Clone)]
pub struct MetricField {
    model: Arc<dyn MetricModel>,
    backend: DerivativeBackend,
}

impl fmt::Debug for MetricField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetricField")
            .field("model", &self.model)
            .field("backend", &self.backend)
            .finish()
    }
}

impl MetricField {
    /// Analytic partials when the model provides them, otherwise Richardson
    /// differences with `h = 1e-4 · scale`.
    pub fn new(model: Arc<dyn MetricModel>) -> Self {
        let backend = if model.has_analytic_jet() {
            DerivativeBackend::analytic()
        } else {
            DerivativeBackend::richardson(1e-4 * model.chart().scale())
        };
        Self { model, backend }
    }

    pub fn from_model<M: MetricModel + 'static>(model: M) -> Self {
        Self::new(Arc::new(model))
    }

    pub fn with_backend(&self, backend: DerivativeBackend) -> Result<Self> {
        if !(backend.step > 0.0) || !backend.step.is_finite() {
            return Err(GeoError::InvalidParameter(format!(
                "derivative step must be positive, got {}",
                backend.step
            )));
        }
        if backend.is_analytic() && !self.model.has_analytic_jet() {
            return Err(GeoError::InvalidParameter(
                "analytic backend requested for a model without closed-form partials".into(),
            ));
        }
        Ok(Self {
            model: Arc::clone(&self.model),
            backend,
        })
    }

    pub fn model(&self) -> &Arc<dyn MetricModel> {
        &self.model
    }

    pub fn backend(&self) -> DerivativeBackend {
        self.backend
    }

    pub fn chart(&self) -> &Chart {
        self.model.chart()
    }

    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    /// Symmetrized metric matrix; errors if the point is outside the domain
    /// or the matrix is not positive definite.
    pub fn metric_at(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        let x = self.chart().reduce(x)?;
        let mut g = self.model.eval(&x)?;
        sym_in_place(&mut g);
        if g.clone().cholesky().is_none() {
            return Err(GeoError::NotPositiveDefinite {
                point: x.iter().copied().collect(),
            });
        }
        Ok(g)
    }

    pub fn metric_inverse_at(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        let g = self.metric_at(x)?;
        inverse_spd(&g).ok_or_else(|| GeoError::NotPositiveDefinite {
            point: x.iter().copied().collect(),
        })
    }

    /// Value, first and second partials through the configured backend.
    pub fn jet(&self, x: &DVector<f64>) -> Result<MetricJet> {
        let xr = self.chart().reduce(x)?;
        let mut jet = match self.backend.mode {
            DerivativeMode::Analytic => self.model.analytic_jet(&xr)?,
            DerivativeMode::Central => {
                self.chart().check_stencil(&xr, 2.0 * self.backend.step)?;
                fd::central_jet(|y| self.raw_eval(y), &xr, self.backend.step)?
            }
            DerivativeMode::Richardson => {
                self.chart().check_stencil(&xr, 2.0 * self.backend.step)?;
                fd::richardson_jet(|y| self.raw_eval(y), &xr, self.backend.step)?
            }
        };
        jet.symmetrize();
        if jet.value.clone().cholesky().is_none() {
            return Err(GeoError::NotPositiveDefinite {
                point: xr.iter().copied().collect(),
            });
        }
        Ok(jet)
    }

    pub fn metric_partial(&self, x: &DVector<f64>, i: usize) -> Result<DMatrix<f64>> {
        self.check_axis(i)?;
        Ok(self.jet(x)?.first.swap_remove(i))
    }

    pub fn metric_second_partial(
        &self,
        x: &DVector<f64>,
        i: usize,
        j: usize,
    ) -> Result<DMatrix<f64>> {
        self.check_axis(i)?;
        self.check_axis(j)?;
        let n = self.dim();
        Ok(self.jet(x)?.second.swap_remove(i * n + j))
    }

    fn check_axis(&self, i: usize) -> Result<()> {
        if i >= self.dim() {
            return Err(GeoError::InvalidParameter(format!(
                "axis {i} out of range for dimension {}",
                self.dim()
            )));
        }
        Ok(())
    }

    fn raw_eval(&self, y: &DVector<f64>) -> Result<DMatrix<f64>> {
        let y = self.chart().reduce(y)?;
        let mut g = self.model.eval(&y)?;
        sym_in_place(&mut g);
        Ok(g)
    }
}

/// Inverse of a symmetric positive definite matrix, symmetrized.
pub fn inverse_spd(g: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let mut inv = g.clone().cholesky()?.inverse();
    sym_in_place(&mut inv);
    Some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::models::{FlatTorus, StereographicSphere};

    #[test]
    fn analytic_backend_requires_closed_forms() {
        #[derive(Debug)]
        struct Opaque(Chart);
        impl MetricModel for Opaque {
            fn chart(&self) -> &Chart {
                &self.0
            }
            fn eval(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
                Ok(DMatrix::identity(x.len(), x.len()))
            }
        }
        let field = MetricField::from_model(Opaque(Chart::cube(2, 1.0).unwrap()));
        assert_eq!(field.backend().mode, DerivativeMode::Richardson);
        assert!((field.backend().step - 2e-4).abs() < 1e-18);
        assert!(field.with_backend(DerivativeBackend::analytic()).is_err());
        assert!(field.with_backend(DerivativeBackend::central(0.0)).is_err());
    }

    #[test]
    fn inverse_of_scaled_identity() {
        let g = DMatrix::identity(3, 3) * 4.0;
        let inv = inverse_spd(&g).unwrap();
        assert!((inv - DMatrix::identity(3, 3) * 0.25).amax() < 1e-15);
    }

    #[test]
    fn non_positive_definite_is_reported() {
        #[derive(Debug)]
        struct Bad(Chart);
        impl MetricModel for Bad {
            fn chart(&self) -> &Chart {
                &self.0
            }
            fn eval(&self, _x: &DVector<f64>) -> Result<DMatrix<f64>> {
                Ok(DMatrix::from_diagonal_element(2, 2, -1.0))
            }
        }
        let field = MetricField::from_model(Bad(Chart::cube(2, 1.0).unwrap()));
        let err = field.metric_at(&DVector::zeros(2)).unwrap_err();
        assert!(matches!(err, GeoError::NotPositiveDefinite { .. }));
        assert!(field.metric_inverse_at(&DVector::zeros(2)).is_err());
    }

    #[test]
    fn torus_and_sphere_values() {
        let torus = MetricField::from_model(FlatTorus::new(4, 1.0).unwrap());
        let x = DVector::from_vec(vec![3.7, -0.2, 0.5, 10.0]);
        assert_eq!(torus.metric_at(&x).unwrap(), DMatrix::identity(4, 4));
        assert_eq!(torus.metric_inverse_at(&x).unwrap(), DMatrix::identity(4, 4));
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(
                    torus.metric_second_partial(&x, i, j).unwrap(),
                    DMatrix::zeros(4, 4)
                );
            }
        }

        let sphere = MetricField::from_model(StereographicSphere::new(4, 1.0, 2.0).unwrap());
        let g0 = sphere.metric_at(&DVector::zeros(4)).unwrap();
        assert!((g0 - DMatrix::identity(4, 4) * 4.0).amax() < 1e-15);
        let inv = sphere.metric_inverse_at(&DVector::zeros(4)).unwrap();
        assert!((inv - DMatrix::identity(4, 4) * 0.25).amax() < 1e-15);
    }
}
