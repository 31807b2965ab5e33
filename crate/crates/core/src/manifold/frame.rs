use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::chart::Chart;
use super::metric::{MetricField, MetricJet, MetricModel};
use crate::error::{GeoError, Result};

/// Relative residual below which a vector counts as dependent.
pub const TAU_RANK: f64 = 1e-12;
/// Orthonormality tolerance for frames handed in by callers.
pub const TAU_ON: f64 = 1e-10;

#[inline]
pub fn g_inner(g: &DMatrix<f64>, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (g * b).dot(a)
}

#[inline]
pub fn g_norm(g: &DMatrix<f64>, a: &DVector<f64>) -> f64 {
    g_inner(g, a, a).max(0.0).sqrt()
}

/// Gram–Schmidt with respect to the inner product `G`, in input order.
///
/// Each vector is projected twice against the accepted ones, which keeps
/// `BᵀGB = I` at round-off level even for poorly conditioned input.
pub fn gram_schmidt_g(g: &DMatrix<f64>, vectors: &[DVector<f64>]) -> Result<Vec<DVector<f64>>> {
    let mut out: Vec<DVector<f64>> = Vec::with_capacity(vectors.len());
    for v in vectors {
        if v.len() != g.nrows() {
            return Err(GeoError::DimensionMismatch {
                expected: g.nrows(),
                got: v.len(),
            });
        }
        let scale = g_norm(g, v);
        if !(scale > 0.0) {
            return Err(GeoError::RankDeficient { residual: 0.0 });
        }
        let w = project_out(g, &out, v);
        let norm = g_norm(g, &w);
        if norm <= TAU_RANK * scale {
            return Err(GeoError::RankDeficient {
                residual: norm / scale,
            });
        }
        out.push(w / norm);
    }
    Ok(out)
}

fn project_out(g: &DMatrix<f64>, basis: &[DVector<f64>], v: &DVector<f64>) -> DVector<f64> {
    let mut w = v.clone();
    for _ in 0..2 {
        for b in basis {
            let c = g_inner(g, b, &w);
            w.axpy(-c, b, 1.0);
        }
    }
    w
}

/// G-orthonormal basis of the G-orthogonal complement of the column span of
/// `basis`, built by sweeping the standard basis vectors in index order.
pub fn g_orthonormal_complement(g: &DMatrix<f64>, basis: &DMatrix<f64>) -> DMatrix<f64> {
    let n = g.nrows();
    let mut accepted: Vec<DVector<f64>> = basis.column_iter().map(|c| c.into_owned()).collect();
    let start = accepted.len();
    for i in 0..n {
        if accepted.len() == n {
            break;
        }
        let e = DVector::from_fn(n, |k, _| if k == i { 1.0 } else { 0.0 });
        let scale = g_norm(g, &e);
        let w = project_out(g, &accepted, &e);
        let norm = g_norm(g, &w);
        if norm > 1e-8 * scale {
            accepted.push(w / norm);
        }
    }
    columns(n, &accepted[start..])
}

/// Column matrix with `rows` rows; unlike `from_columns`, accepts an empty slice.
pub fn columns(rows: usize, cols: &[DVector<f64>]) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols.len(), |i, j| cols[j][i])
}

/// Max entrywise deviation of `BᵀGB` from the identity.
pub fn orthonormality_defect(g: &DMatrix<f64>, basis: &DMatrix<f64>) -> f64 {
    let gram = basis.transpose() * g * basis;
    (gram - DMatrix::identity(basis.ncols(), basis.ncols())).amax()
}

/// A basis of the tangent space at a chart point (columns).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameAtPoint {
    pub point: DVector<f64>,
    pub basis: DMatrix<f64>,
    pub orthonormal: bool,
}

impl FrameAtPoint {
    pub fn new(point: DVector<f64>, basis: DMatrix<f64>) -> Result<Self> {
        if basis.nrows() != point.len() || basis.ncols() != point.len() {
            return Err(GeoError::DimensionMismatch {
                expected: point.len(),
                got: basis.ncols(),
            });
        }
        if basis.clone().lu().try_inverse().is_none() {
            return Err(GeoError::RankDeficient { residual: 0.0 });
        }
        Ok(Self {
            point,
            basis,
            orthonormal: false,
        })
    }

    /// Checks `BᵀG(p)B = I` within [`TAU_ON`] before flagging the frame.
    pub fn orthonormal(field: &MetricField, point: DVector<f64>, basis: DMatrix<f64>) -> Result<Self> {
        let mut frame = Self::new(point, basis)?;
        let g = field.metric_at(&frame.point)?;
        let deviation = orthonormality_defect(&g, &frame.basis);
        if deviation > TAU_ON {
            return Err(GeoError::NotOrthonormal { deviation });
        }
        frame.orthonormal = true;
        Ok(frame)
    }
}

/// The metric pulled back through the affine map `x = p + B·y`.
///
/// The coordinate frame `∂/∂y` at `y = 0` is the column set of `B`.
#[derive(Debug)]
pub struct AffineChartModel {
    base: MetricField,
    origin: DVector<f64>,
    frame: DMatrix<f64>,
    chart: Chart,
}

impl AffineChartModel {
    pub fn new(base: MetricField, origin: DVector<f64>, frame: DMatrix<f64>) -> Result<Self> {
        let n = base.dim();
        if frame.nrows() != n || frame.ncols() != n || origin.len() != n {
            return Err(GeoError::DimensionMismatch {
                expected: n,
                got: frame.ncols(),
            });
        }
        Ok(Self {
            base,
            origin,
            frame,
            chart: Chart::unbounded(n)?,
        })
    }

    pub fn frame(&self) -> &DMatrix<f64> {
        &self.frame
    }

    fn to_base(&self, y: &DVector<f64>) -> DVector<f64> {
        &self.origin + &self.frame * y
    }
}

impl MetricModel for AffineChartModel {
    fn chart(&self) -> &Chart {
        &self.chart
    }

    fn eval(&self, y: &DVector<f64>) -> Result<DMatrix<f64>> {
        let g = self.base.metric_at(&self.to_base(y))?;
        Ok(self.frame.transpose() * g * &self.frame)
    }

    fn has_analytic_jet(&self) -> bool {
        true
    }

    // Delegates to whatever backend the base field uses; the affine change
    // itself is exact.
    fn analytic_jet(&self, y: &DVector<f64>) -> Result<MetricJet> {
        let base = self.base.jet(&self.to_base(y))?;
        Ok(transform_jet(&base, &self.frame))
    }
}

/// Jet of `Bᵀ g(p + B y) B` given the jet of `g` at `p + B y`.
pub fn transform_jet(base: &MetricJet, b: &DMatrix<f64>) -> MetricJet {
    let n = base.dim();
    let bt = b.transpose();
    let conj = |m: &DMatrix<f64>| &bt * m * b;
    let value = conj(&base.value);
    let first: Vec<DMatrix<f64>> = (0..n)
        .map(|a| {
            let mut acc = DMatrix::zeros(n, n);
            for i in 0..n {
                if b[(i, a)] != 0.0 {
                    acc += &base.first[i] * b[(i, a)];
                }
            }
            conj(&acc)
        })
        .collect();
    // contract the first index, then the second
    let partial: Vec<DMatrix<f64>> = (0..n * n)
        .map(|idx| {
            let (a, j) = (idx / n, idx % n);
            let mut acc = DMatrix::zeros(n, n);
            for i in 0..n {
                if b[(i, a)] != 0.0 {
                    acc += base.second(i, j) * b[(i, a)];
                }
            }
            acc
        })
        .collect();
    let mut second = Vec::with_capacity(n * n);
    for a in 0..n {
        for c in 0..n {
            let mut acc = DMatrix::zeros(n, n);
            for j in 0..n {
                if b[(j, c)] != 0.0 {
                    acc += &partial[a * n + j] * b[(j, c)];
                }
            }
            second.push(conj(&acc));
        }
    }
    MetricJet {
        value,
        first,
        second,
    }
}

/// Complete `vectors` to a full G-orthonormal frame; the given vectors come
/// first, in order, and must already be G-orthonormal.
pub fn complete_frame(g: &DMatrix<f64>, vectors: &[DVector<f64>]) -> Result<DMatrix<f64>> {
    let head = columns(g.nrows(), vectors);
    let deviation = orthonormality_defect(g, &head);
    if deviation > TAU_ON {
        return Err(GeoError::NotOrthonormal { deviation });
    }
    let tail = g_orthonormal_complement(g, &head);
    let mut cols: Vec<DVector<f64>> = vectors.to_vec();
    cols.extend(tail.column_iter().map(|c| c.into_owned()));
    Ok(DMatrix::from_columns(&cols))
}

/// Re-express `field` in the affine coordinates `y = A(x - p)` whose
/// coordinate frame at `p` starts with the given G(p)-orthonormal quadruple.
pub fn linear_adapted_chart(
    field: &MetricField,
    p: &DVector<f64>,
    quad: &[DVector<f64>],
) -> Result<MetricField> {
    let p = field.chart().reduce(p)?;
    let g = field.metric_at(&p)?;
    let frame = complete_frame(&g, quad)?;
    linear_chart_with_frame(field, &p, frame)
}

/// Same as [`linear_adapted_chart`] with an explicit invertible frame.
pub fn linear_chart_with_frame(
    field: &MetricField,
    p: &DVector<f64>,
    frame: DMatrix<f64>,
) -> Result<MetricField> {
    let model = AffineChartModel::new(field.clone(), p.clone(), frame)?;
    let out = MetricField::new(Arc::new(model));
    Ok(out)
}
