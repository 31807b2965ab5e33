use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::defect::TangentPlane;
use crate::error::{GeoError, Result};
use crate::manifold::{g_orthonormal_complement, MetricField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FrameCase {
    /// `(v, T, n₃, n₄)` with `v, T ∈ P`, used for `l ≤ n − 2`.
    Surface,
    /// `(v, n, T₃, T₄)` with `v, T₃, T₄ ∈ P`, used for `l = n − 1`.
    Hypersurface,
}

/// A g(p)-orthonormal frame whose first four vectors form the quadruple of
/// the perturbation block, followed by the remaining plane vectors and then
/// the remaining normals.
#[derive(Clone, Debug, PartialEq)]
pub struct AdaptedFrame {
    pub plane: TangentPlane,
    pub case: FrameCase,
    pub frame: DMatrix<f64>,
}

impl AdaptedFrame {
    pub fn point(&self) -> &DVector<f64> {
        self.plane.point()
    }

    pub fn quad(&self) -> Vec<DVector<f64>> {
        (0..4).map(|k| self.frame.column(k).into_owned()).collect()
    }
}

pub fn adapted_frame(field: &MetricField, plane: &TangentPlane) -> Result<AdaptedFrame> {
    let n = field.dim();
    if n < 4 {
        return Err(GeoError::InvalidParameter(format!(
            "deformation needs dimension at least 4, got {n}"
        )));
    }
    let l = plane.l();
    let g = field.metric_at(plane.point())?;
    let b = plane.basis();
    let q = g_orthonormal_complement(&g, b);
    let col = |m: &DMatrix<f64>, k: usize| m.column(k).into_owned();
    let (case, mut cols) = if l + 2 <= n {
        (FrameCase::Surface, vec![col(b, 0), col(b, 1), col(&q, 0), col(&q, 1)])
    } else {
        (FrameCase::Hypersurface, vec![col(b, 0), col(&q, 0), col(b, 1), col(b, 2)])
    };
    let (b_used, q_used) = match case {
        FrameCase::Surface => (2, 2),
        FrameCase::Hypersurface => (3, 1),
    };
    cols.extend((b_used..l).map(|k| col(b, k)));
    cols.extend((q_used..q.ncols()).map(|k| col(&q, k)));
    Ok(AdaptedFrame {
        plane: plane.clone(),
        case,
        frame: crate::manifold::columns(n, &cols),
    })
}
