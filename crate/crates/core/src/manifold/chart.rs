use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};

/// A single coordinate chart: an axis-aligned box in ℝⁿ, with optional
/// periodic axes.
///
/// Periodic axes cover `[lower, lower + period)`; points are reduced modulo
/// the period before evaluation. Bounds may be infinite for derived charts
/// whose domain is checked by the underlying field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Chart {
    lower: Vec<f64>,
    upper: Vec<f64>,
    periods: Vec<Option<f64>>,
}

impl Chart {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(GeoError::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        if lower.len() < 2 {
            return Err(GeoError::InvalidParameter(format!(
                "chart dimension must be at least 2, got {}",
                lower.len()
            )));
        }
        for (a, b) in lower.iter().zip(&upper) {
            if a.is_nan() || b.is_nan() || !(b > a) {
                return Err(GeoError::InvalidParameter(format!(
                    "chart box [{a}, {b}] has no volume"
                )));
            }
        }
        let periods = vec![None; lower.len()];
        Ok(Self {
            lower,
            upper,
            periods,
        })
    }

    /// Symmetric box `[-half_width, half_width]ⁿ`.
    pub fn cube(dim: usize, half_width: f64) -> Result<Self> {
        Self::new(vec![-half_width; dim], vec![half_width; dim])
    }

    /// Flat torus chart `[0, period)ⁿ` with every axis periodic.
    pub fn torus(dim: usize, period: f64) -> Result<Self> {
        if !(period > 0.0) || !period.is_finite() {
            return Err(GeoError::InvalidParameter(format!(
                "torus period must be positive, got {period}"
            )));
        }
        let mut chart = Self::new(vec![0.0; dim], vec![period; dim])?;
        chart.periods = vec![Some(period); dim];
        Ok(chart)
    }

    /// All of ℝⁿ.
    pub fn unbounded(dim: usize) -> Result<Self> {
        Self::new(vec![f64::NEG_INFINITY; dim], vec![f64::INFINITY; dim])
    }

    pub fn product(a: &Chart, b: &Chart) -> Self {
        let mut lower = a.lower.clone();
        lower.extend_from_slice(&b.lower);
        let mut upper = a.upper.clone();
        upper.extend_from_slice(&b.upper);
        let mut periods = a.periods.clone();
        periods.extend_from_slice(&b.periods);
        Self {
            lower,
            upper,
            periods,
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn period(&self, axis: usize) -> Option<f64> {
        self.periods[axis]
    }

    /// Typical length scale of the domain (mean finite box width, 1 if unbounded).
    pub fn scale(&self) -> f64 {
        let widths: Vec<f64> = self
            .lower
            .iter()
            .zip(&self.upper)
            .map(|(a, b)| b - a)
            .filter(|w| w.is_finite())
            .collect();
        if widths.is_empty() {
            1.0
        } else {
            widths.iter().sum::<f64>() / widths.len() as f64
        }
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.dim() {
            return Err(GeoError::DimensionMismatch {
                expected: self.dim(),
                got,
            });
        }
        Ok(())
    }

    /// Reduce periodic coordinates and check the point lies in the domain.
    pub fn reduce(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_dim(x.len())?;
        let mut out = x.clone();
        for i in 0..self.dim() {
            let xi = out[i];
            if !xi.is_finite() {
                return Err(GeoError::OutOfDomain {
                    point: x.iter().copied().collect(),
                });
            }
            match self.periods[i] {
                Some(period) => {
                    let mut r = self.lower[i] + (xi - self.lower[i]).rem_euclid(period);
                    // rem_euclid can round up to exactly `period`
                    if r >= self.lower[i] + period {
                        r = self.lower[i];
                    }
                    out[i] = r;
                }
                None => {
                    if xi < self.lower[i] || xi > self.upper[i] {
                        return Err(GeoError::OutOfDomain {
                            point: x.iter().copied().collect(),
                        });
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn contains(&self, x: &DVector<f64>) -> bool {
        self.reduce(x).is_ok()
    }

    /// Ensure `x ± reach·e_i` stays inside the domain on every non-periodic axis.
    pub fn check_stencil(&self, x: &DVector<f64>, reach: f64) -> Result<()> {
        self.check_dim(x.len())?;
        for i in 0..self.dim() {
            if self.periods[i].is_none()
                && (x[i] - reach < self.lower[i] || x[i] + reach > self.upper[i])
            {
                return Err(GeoError::StencilOutOfDomain {
                    point: x.iter().copied().collect(),
                    axis: i,
                });
            }
        }
        Ok(())
    }

    /// `to - from`, using the shortest representative on periodic axes.
    pub fn displacement(&self, from: &DVector<f64>, to: &DVector<f64>) -> DVector<f64> {
        let mut d = to - from;
        for i in 0..self.dim() {
            if let Some(period) = self.periods[i] {
                d[i] -= period * (d[i] / period).round();
            }
        }
        d
    }

    pub fn distance(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        self.displacement(a, b).norm()
    }
}
