//! Sampling of the Grassmannian bundle: defect scans over a grid of points,
//! margin certificates and greedy covers of low-defect planes.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curvature::riemann_tensor;
use crate::defect::{plane_defect_with_curvature, DefectReport, DefectSettings, TangentPlane};
use crate::error::{GeoError, Result};
use crate::manifold::{columns, gram_schmidt_g, Chart, MetricField};

/// Axis-aligned box of chart points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Region {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(GeoError::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        if lower
            .iter()
            .zip(&upper)
            .any(|(a, b)| !(a <= b) || !a.is_finite() || !b.is_finite())
        {
            return Err(GeoError::EmptyRegion);
        }
        Ok(Self { lower, upper })
    }

    /// The whole chart box; unbounded charts have no default region.
    pub fn from_chart(chart: &Chart) -> Result<Self> {
        if chart.lower().iter().chain(chart.upper()).any(|v| !v.is_finite()) {
            return Err(GeoError::InvalidParameter(
                "chart is unbounded; give an explicit region".into(),
            ));
        }
        Self::new(chart.lower().to_vec(), chart.upper().to_vec())
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn center(&self) -> DVector<f64> {
        DVector::from_fn(self.dim(), |i, _| 0.5 * (self.lower[i] + self.upper[i]))
    }
}

/// Cell-centered grid of points with a fixed number of seeded planes per point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanGrid {
    pub region: Region,
    pub counts: Vec<usize>,
    pub planes_per_point: usize,
    pub l: usize,
    pub seed: u64,
    #[serde(default)]
    pub settings: DefectSettings,
}

impl ScanGrid {
    /// Grid over the whole chart with `per_axis` points on every axis.
    pub fn over_chart(field: &MetricField, per_axis: usize, planes_per_point: usize, l: usize, seed: u64) -> Result<Self> {
        let grid = Self {
            region: Region::from_chart(field.chart())?,
            counts: vec![per_axis; field.dim()],
            planes_per_point,
            l,
            seed,
            settings: DefectSettings {
                seed,
                ..DefectSettings::for_field(field)
            },
        };
        grid.validate(field)?;
        Ok(grid)
    }

    pub fn validate(&self, field: &MetricField) -> Result<()> {
        let n = field.dim();
        if self.region.dim() != n || self.counts.len() != n {
            return Err(GeoError::DimensionMismatch {
                expected: n,
                got: if self.region.dim() != n {
                    self.region.dim()
                } else {
                    self.counts.len()
                },
            });
        }
        if self.counts.iter().any(|&c| c == 0) || self.planes_per_point == 0 {
            return Err(GeoError::EmptyRegion);
        }
        if self.l < 2 || self.l >= n {
            return Err(GeoError::InvalidParameter(format!(
                "plane dimension l must lie in 2..={}, got {}",
                n - 1,
                self.l
            )));
        }
        Ok(())
    }

    pub fn point_count(&self) -> usize {
        self.counts.iter().product()
    }

    /// Cell centers in row-major order (last axis fastest).
    pub fn points(&self) -> Vec<DVector<f64>> {
        let n = self.counts.len();
        let total = self.point_count();
        (0..total)
            .map(|mut idx| {
                let mut x = DVector::zeros(n);
                for axis in (0..n).rev() {
                    let c = self.counts[axis];
                    let k = idx % c;
                    idx /= c;
                    let (lo, hi) = (self.region.lower[axis], self.region.upper[axis]);
                    x[axis] = lo + (hi - lo) * (k as f64 + 0.5) / c as f64;
                }
                x
            })
            .collect()
    }

    /// The seeded planes at one grid point, orthonormalized for `field`.
    pub fn planes_at(&self, field: &MetricField, point_index: usize, point: &DVector<f64>) -> Result<Vec<TangentPlane>> {
        let n = field.dim();
        let g = field.metric_at(point)?;
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(self.seed, point_index as u64));
        let mut out = Vec::with_capacity(self.planes_per_point);
        while out.len() < self.planes_per_point {
            let vs: Vec<DVector<f64>> = (0..self.l)
                .map(|_| DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng)))
                .collect();
            // Gaussian frames are independent with probability one
            if let Ok(basis) = gram_schmidt_g(&g, &vs) {
                out.push(TangentPlane::new(field, point.clone(), columns(n, &basis))?);
            }
        }
        Ok(out)
    }
}

/// SplitMix64 finalizer over `seed ⊕ f(index)`.
pub fn mix_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanSample {
    pub point_index: usize,
    pub plane_index: usize,
    pub report: DefectReport,
}

fn sort_samples(samples: &mut [ScanSample]) {
    samples.sort_by(|a, b| {
        a.report
            .defect
            .total_cmp(&b.report.defect)
            .then(a.point_index.cmp(&b.point_index))
            .then(a.plane_index.cmp(&b.plane_index))
    });
}

/// One defect report per (point, plane), sorted ascending by defect. Work is
/// spread over the current rayon pool; the result does not depend on it.
pub fn scan(field: &MetricField, grid: &ScanGrid) -> Result<Vec<ScanSample>> {
    grid.validate(field)?;
    let points = grid.points();
    let per_point: Vec<Result<Vec<ScanSample>>> = points
        .par_iter()
        .enumerate()
        .map(|(pi, x)| {
            let x = field.chart().reduce(x)?;
            let data = riemann_tensor(field, &x)?;
            let planes = grid.planes_at(field, pi, &x)?;
            planes
                .iter()
                .enumerate()
                .map(|(qi, plane)| {
                    Ok(ScanSample {
                        point_index: pi,
                        plane_index: qi,
                        report: plane_defect_with_curvature(&data, plane, &grid.settings)?,
                    })
                })
                .collect()
        })
        .collect();
    let mut samples = Vec::with_capacity(grid.point_count() * grid.planes_per_point);
    for chunk in per_point {
        samples.extend(chunk?);
    }
    sort_samples(&mut samples);
    Ok(samples)
}

/// Defect reports for an explicit list of planes, in input order.
pub fn scan_planes(field: &MetricField, planes: &[TangentPlane], settings: &DefectSettings) -> Result<Vec<DefectReport>> {
    planes
        .par_iter()
        .map(|p| {
            let data = riemann_tensor(field, p.point())?;
            plane_defect_with_curvature(&data, p, settings)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginCertificate {
    pub region: Region,
    pub l: usize,
    pub threshold: f64,
    /// Smallest sampled defect; every sampled plane exceeds the threshold.
    pub margin: f64,
    pub min_plane: DefectReport,
    pub points: usize,
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum CertificateOutcome {
    Certified(MarginCertificate),
    Counterexample(DefectReport),
}

impl CertificateOutcome {
    pub fn is_certified(&self) -> bool {
        matches!(self, Self::Certified(_))
    }
}

/// Certifies that every sampled plane has defect above `threshold`, or
/// returns the smallest violating plane.
pub fn min_defect_certificate(field: &MetricField, grid: &ScanGrid, threshold: f64) -> Result<CertificateOutcome> {
    let samples = scan(field, grid)?;
    certificate_from_samples(grid, &samples, threshold)
}

pub fn certificate_from_samples(grid: &ScanGrid, samples: &[ScanSample], threshold: f64) -> Result<CertificateOutcome> {
    let first = samples.first().ok_or(GeoError::EmptyRegion)?;
    if !(first.report.defect > threshold) {
        return Ok(CertificateOutcome::Counterexample(first.report.clone()));
    }
    Ok(CertificateOutcome::Certified(MarginCertificate {
        region: grid.region.clone(),
        l: grid.l,
        threshold,
        margin: first.report.defect,
        min_plane: first.report.clone(),
        points: grid.point_count(),
        samples: samples.len(),
    }))
}

/// Largest principal angle between two equidimensional coordinate subspaces.
pub fn max_principal_angle(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let qa = a.clone().qr().q();
    let qb = b.clone().qr().q();
    let residual = &qb - &qa * (qa.transpose() * &qb);
    let top = residual.singular_values().max();
    top.clamp(0.0, 1.0).asin()
}

/// Base distance in the chart plus the largest principal angle.
pub fn bundle_distance(chart: &Chart, a: &TangentPlane, b: &TangentPlane) -> f64 {
    chart.distance(a.point(), b.point()) + max_principal_angle(a.basis(), b.basis())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverBall {
    pub center: TangentPlane,
    pub defect: f64,
    pub radius: f64,
}

/// Greedy cover of all reports with defect below `tau` by balls of radius
/// `rho`; a report becomes a new center when no earlier center is within
/// `rho`.
pub fn candidate_cover(chart: &Chart, reports: &[DefectReport], tau: f64, rho: f64) -> Vec<CoverBall> {
    let mut balls: Vec<CoverBall> = Vec::new();
    for r in reports.iter().filter(|r| r.defect < tau) {
        if balls
            .iter()
            .any(|b| bundle_distance(chart, &b.center, &r.plane) < rho)
        {
            continue;
        }
        balls.push(CoverBall {
            center: r.plane.clone(),
            defect: r.defect,
            radius: rho,
        });
    }
    balls
}

/// Writes one CSV row per sample: point coordinates, point and plane ids,
/// defect.
pub fn write_csv<W: std::io::Write>(mut out: W, samples: &[ScanSample]) -> std::io::Result<()> {
    let n = samples.first().map(|s| s.report.plane.n()).unwrap_or(0);
    let mut header: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
    header.extend(["point_id".into(), "plane_id".into(), "defect".into()]);
    writeln!(out, "{}", header.join(","))?;
    for s in samples {
        let coords: Vec<String> = s.report.plane.point().iter().map(|v| format!("{v:e}")).collect();
        writeln!(
            out,
            "{},{},{},{:e}",
            coords.join(","),
            s.point_index,
            s.plane_index,
            s.report.defect
        )?;
    }
    Ok(())
}
