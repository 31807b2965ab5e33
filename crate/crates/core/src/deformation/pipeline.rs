use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::local::{LocalBreaker, LocalParams};
use super::perturb::DeformationSpec;
use crate::defect::{tau_pg, TangentPlane};
use crate::error::{GeoError, Result};
use crate::manifold::MetricField;
use crate::scanner::{candidate_cover, scan, Region, ScanGrid, ScanSample};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub grid_per_axis: usize,
    pub planes_per_point: usize,
    pub seed: u64,
    /// Scan region; the whole chart when absent.
    pub region: Option<Region>,
    pub local: LocalParams,
    /// Budget for the C^q proxy distance from the input metric.
    pub xi: f64,
    pub q: usize,
    /// Cover radius in the bundle distance; `local.rho` when absent.
    pub cover_radius: Option<f64>,
    pub max_steps: usize,
    pub proxy_samples: usize,
    /// Overrides the backend default of `τ_pg`.
    pub tau_pg: Option<f64>,
    /// Overrides the backend default pair-symmetry tolerance.
    pub sym_tol: Option<f64>,
    /// Overrides the default hemisphere grid density of the defect search.
    pub density: Option<usize>,
    /// How many times a center may retry with `ρ` and pad halved when no
    /// amplitude passes.
    pub retune: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            grid_per_axis: 2,
            planes_per_point: 6,
            seed: 0,
            region: None,
            local: LocalParams::default(),
            xi: 0.5,
            q: 2,
            cover_radius: None,
            max_steps: 256,
            proxy_samples: 256,
            retune: 3,
            tau_pg: None,
            sym_tol: None,
            density: None,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.local.validate()?;
        if self.grid_per_axis == 0 || self.planes_per_point == 0 {
            return Err(GeoError::EmptyRegion);
        }
        if !(self.xi > 0.0) {
            return Err(GeoError::InvalidParameter(format!("ξ must be positive, got {}", self.xi)));
        }
        if self.q > 2 {
            return Err(GeoError::InvalidParameter(format!(
                "C^q proxy supports q ≤ 2, got {}",
                self.q
            )));
        }
        Ok(())
    }

    /// The scan grid used at level `l`; `geodefect scan` builds the same
    /// grid from the same flags.
    pub fn grid(&self, field: &MetricField, l: usize) -> Result<ScanGrid> {
        let mut grid = ScanGrid::over_chart(field, self.grid_per_axis, self.planes_per_point, l, self.seed)?;
        if let Some(r) = &self.region {
            grid.region = r.clone();
        }
        if let Some(t) = self.sym_tol {
            grid.settings.sym_tol = t;
        }
        grid.settings.density = self.density.or(grid.settings.density);
        grid.validate(field)?;
        Ok(grid)
    }

    pub fn tau(&self, field: &MetricField) -> f64 {
        self.tau_pg.unwrap_or_else(|| tau_pg(field))
    }
}

/// One deformation step of the pipeline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub step: usize,
    pub level: usize,
    pub center: TangentPlane,
    pub s: f64,
    pub rho: f64,
    pub pad: f64,
    pub min_defect_before: f64,
    pub min_defect_after: f64,
    pub candidates_before: usize,
    pub candidates_after: usize,
    pub cq_proxy: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PipelineStatus {
    /// Every level ended with an empty candidate cover.
    Cleared,
    /// No amplitude kept the C^q proxy within ξ.
    BudgetExhausted,
    StepLimit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSummary {
    pub l: usize,
    pub min_defect: f64,
    pub samples: usize,
    pub tau_pg: f64,
}

pub struct PipelineOutcome {
    pub metric: MetricField,
    pub deformations: Vec<DeformationSpec>,
    pub audit: Vec<AuditRecord>,
    pub status: PipelineStatus,
    pub levels: Vec<LevelSummary>,
    pub cq_proxy: f64,
}

/// Max over `points` of the entrywise differences of the metric and its
/// partials up to order `q`.
pub fn cq_proxy(a: &MetricField, b: &MetricField, points: &[DVector<f64>], q: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for x in points {
        let (ja, jb) = (a.jet(x)?, b.jet(x)?);
        worst = worst.max((&ja.value - &jb.value).amax());
        if q >= 1 {
            for (p, r) in ja.first.iter().zip(&jb.first) {
                worst = worst.max((p - r).amax());
            }
        }
        if q >= 2 {
            for (p, r) in ja.second.iter().zip(&jb.second) {
                worst = worst.max((p - r).amax());
            }
        }
    }
    Ok(worst)
}

/// Seeded points of the region plus, for each deformation, its center,
/// the quarter-period offset along the first frame vector and a few points
/// of its support.
pub fn proxy_points(region: &Region, samples: usize, seed: u64, specs: &[DeformationSpec]) -> Vec<DVector<f64>> {
    let n = region.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xc0de);
    let mut pts: Vec<DVector<f64>> = (0..samples)
        .map(|_| DVector::from_fn(n, |i, _| rng.gen_range(region.lower[i]..=region.upper[i])))
        .collect();
    for spec in specs {
        let p = spec.center.point();
        pts.push(p.clone());
        let eta = spec.eps_tilde / (4.0 * spec.k);
        let quarter = DVector::from_fn(n, |i, _| if i == 0 { 0.5 * std::f64::consts::PI * eta } else { 0.0 });
        pts.push(p + &spec.frame * quarter);
        for _ in 0..8 {
            let y = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0)) * (spec.support_radius() / (n as f64).sqrt());
            pts.push(p + &spec.frame * y);
        }
    }
    pts
}

/// Scans `l`-planes, breaks the first low-defect cover center, rescans,
/// and repeats; levels run from `n − 1` down to `l`.
pub fn global_pipeline(g: &MetricField, l: usize, config: &PipelineConfig) -> Result<PipelineOutcome> {
    config.validate()?;
    let n = g.dim();
    if n < 4 {
        return Err(GeoError::InvalidParameter(format!(
            "deformation needs dimension at least 4, got {n}"
        )));
    }
    if l < 2 || l >= n {
        return Err(GeoError::InvalidParameter(format!(
            "plane dimension l must lie in 2..={}, got {l}",
            n - 1
        )));
    }
    let region = match &config.region {
        Some(r) => r.clone(),
        None => Region::from_chart(g.chart())?,
    };
    let cover_radius = config.cover_radius.unwrap_or(config.local.rho);

    let mut current = g.clone();
    let mut specs: Vec<DeformationSpec> = Vec::new();
    let mut audit = Vec::new();
    let mut status = PipelineStatus::Cleared;
    let mut proxy = 0.0;
    let mut step = 0;

    'levels: for level in (l..n).rev() {
        let grid = config.grid(g, level)?;
        let mut samples = scan(&current, &grid)?;
        loop {
            let tau = config.tau(&current);
            let reports: Vec<_> = samples.iter().map(|s| s.report.clone()).collect();
            let cover = candidate_cover(current.chart(), &reports, tau, cover_radius);
            let Some(ball) = cover.first() else {
                break;
            };
            if step >= config.max_steps {
                status = PipelineStatus::StepLimit;
                break 'levels;
            }
            let mut local = config.local.clone();
            let mut over_budget = false;
            let mut measured = 0.0;
            let mut attempt = 0;
            let broken = loop {
                let breaker = LocalBreaker::new(&current, &ball.center, &local)?;
                let result = breaker.run_with(|metric, trial| {
                    let spec = DeformationSpec::new(breaker.frame(), breaker.fpair(), trial.s);
                    let mut all = specs.clone();
                    all.push(spec);
                    let pts = proxy_points(&region, config.proxy_samples, config.seed, &all);
                    match cq_proxy(g, metric, &pts, config.q) {
                        Ok(d) if d <= config.xi => {
                            measured = d;
                            true
                        }
                        _ => {
                            over_budget = true;
                            false
                        }
                    }
                });
                match result {
                    Ok(b) => break Some(b),
                    Err(GeoError::NoValidAmplitude) if over_budget => break None,
                    Err(GeoError::NoValidAmplitude) if attempt < config.retune => {
                        attempt += 1;
                        local.rho *= 0.5;
                        local.pad *= 0.5;
                    }
                    Err(e) => return Err(e),
                }
            };
            let Some(broken) = broken else {
                status = PipelineStatus::BudgetExhausted;
                break 'levels;
            };
            let after = scan(&broken.metric, &grid)?;
            let tau_after = config.tau(&broken.metric);
            let after_reports: Vec<_> = after.iter().map(|s| s.report.clone()).collect();
            audit.push(AuditRecord {
                step,
                level,
                center: ball.center.clone(),
                s: broken.spec.s,
                rho: local.rho,
                pad: local.pad,
                min_defect_before: min_defect(&samples),
                min_defect_after: min_defect(&after),
                candidates_before: cover.len(),
                candidates_after: candidate_cover(current.chart(), &after_reports, tau_after, cover_radius).len(),
                cq_proxy: measured,
            });
            proxy = measured;
            specs.push(broken.spec);
            current = broken.metric;
            samples = after;
            step += 1;
        }
    }

    let mut levels = Vec::new();
    for level in (l..n).rev() {
        let grid = config.grid(g, level)?;
        let samples = scan(&current, &grid)?;
        levels.push(LevelSummary {
            l: level,
            min_defect: min_defect(&samples),
            samples: samples.len(),
            tau_pg: config.tau(&current),
        });
    }
    Ok(PipelineOutcome {
        metric: current,
        deformations: specs,
        audit,
        status,
        levels,
        cq_proxy: proxy,
    })
}

fn min_defect(samples: &[ScanSample]) -> f64 {
    samples.first().map(|s| s.report.defect).unwrap_or(f64::INFINITY)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{make_model, ModelDescriptor};

    #[test]
    fn no_low_defect_planes_is_a_no_op() {
        let field = make_model(&ModelDescriptor::new("random-trig", 4).with_seed(7)).unwrap();
        let config = PipelineConfig {
            planes_per_point: 2,
            ..Default::default()
        };
        let out = global_pipeline(&field, 2, &config).unwrap();
        assert!(out.deformations.is_empty());
        assert!(out.audit.is_empty());
        assert_eq!(out.status, PipelineStatus::Cleared);
        assert!(std::sync::Arc::ptr_eq(out.metric.model(), field.model()));
    }

    #[test]
    fn tiny_budget_is_exhausted() {
        let field = make_model(&ModelDescriptor::new("torus", 4)).unwrap();
        let config = PipelineConfig {
            grid_per_axis: 1,
            planes_per_point: 1,
            xi: 1e-12,
            ..Default::default()
        };
        let out = global_pipeline(&field, 3, &config).unwrap();
        assert_eq!(out.status, PipelineStatus::BudgetExhausted);
        assert!(out.deformations.is_empty());
    }
}
