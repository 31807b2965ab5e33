use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cutoff::Cutoff;
use super::fpair::FPair;
use super::frame::{adapted_frame, AdaptedFrame};
use super::perturb::{perturb, DeformationSpec};
use crate::curvature::riemann_tensor;
use crate::defect::{maximize_over_sphere, DefectSettings, PlaneCurvature, TangentPlane};
use crate::error::{GeoError, Result};
use crate::manifold::{g_orthonormal_complement, MetricField};

/// `2⁻¹⁰, 2⁻¹¹, …, 2⁻²⁰`.
pub fn default_schedule() -> Vec<f64> {
    (10..=20).map(|k| 2f64.powi(-k)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LocalParams {
    #[serde(rename = "K")]
    pub k: f64,
    pub eps: f64,
    pub rho: f64,
    /// Width of the cutoff transition shell.
    pub pad: f64,
    pub schedule: Vec<f64>,
    pub affected_samples: usize,
    pub global_samples: usize,
    pub far_samples: usize,
    pub seed: u64,
    /// Part 3 accepts `|Δ𝓘| ≤ factor·K·s`.
    pub part3_factor: f64,
    /// Part 4 accepts `|Δ𝓘| ≤ factor·K·s` away from the support.
    pub part4_factor: f64,
    pub settings: DefectSettings,
}

impl Default for LocalParams {
    fn default() -> Self {
        Self {
            k: 10.0,
            eps: 0.1,
            rho: 0.15,
            pad: 0.1,
            schedule: default_schedule(),
            affected_samples: 12,
            global_samples: 24,
            far_samples: 8,
            seed: 0,
            part3_factor: 2.2,
            part4_factor: 0.1,
            settings: DefectSettings::default(),
        }
    }
}

impl LocalParams {
    pub fn validate(&self) -> Result<()> {
        if self.schedule.is_empty() {
            return Err(GeoError::InvalidParameter("amplitude schedule is empty".into()));
        }
        if self.schedule.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
            return Err(GeoError::InvalidParameter("amplitudes must be positive".into()));
        }
        if !(self.rho > 0.0 && self.pad > 0.0) {
            return Err(GeoError::InvalidParameter("ρ and pad must be positive".into()));
        }
        Ok(())
    }

    fn descending(&self) -> Vec<f64> {
        let mut s = self.schedule.clone();
        s.sort_by(|a, b| b.total_cmp(a));
        s.dedup();
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleKind {
    Center,
    Affected,
    Global,
    Far,
}

/// A sampled plane with its offset from the center in adapted coordinates
/// and tilt angle against the transported center plane.
#[derive(Clone, Debug)]
struct Sample {
    kind: SampleKind,
    offset: f64,
    tilt: Option<f64>,
    base: TangentPlane,
    base_curvature: PlaneCurvature,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeTrial {
    pub s: f64,
    pub positive_definite: bool,
    /// `min` over affected planes of `max_v |Δ𝓘|`.
    pub part2_min: f64,
    /// `max` over all sampled planes.
    pub part3_max: f64,
    /// `max` over planes outside the support.
    pub part4_max: f64,
    pub center_defect: f64,
    pub part2_pass: bool,
    pub part3_pass: bool,
    pub part4_pass: bool,
    pub deltas: Vec<SampleDelta>,
}

/// Measured `max_v |Δ𝓘|` for one sampled plane.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleDelta {
    pub kind: SampleKind,
    /// Distance from the center in adapted coordinates.
    pub offset: f64,
    pub tilt: Option<f64>,
    pub delta: f64,
    pub defect_after: f64,
}

impl AmplitudeTrial {
    pub fn passed(&self) -> bool {
        self.positive_definite && self.part2_pass && self.part3_pass && self.part4_pass
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalReport {
    pub center: TangentPlane,
    pub eps_tilde: f64,
    pub cutoff_m: f64,
    pub samples: usize,
    pub trials: Vec<AmplitudeTrial>,
    pub chosen_s: Option<f64>,
    /// `part2_min / (K s)` at the chosen amplitude.
    pub fitted_c: Option<f64>,
    /// `part4_max / s` at the chosen amplitude.
    pub eps0: Option<f64>,
}

pub struct LocalBreak {
    pub metric: MetricField,
    pub spec: DeformationSpec,
    pub report: LocalReport,
}

/// Prepared deformation around one plane; evaluates amplitudes on demand.
pub struct LocalBreaker {
    base: MetricField,
    params: LocalParams,
    frame: AdaptedFrame,
    fpair: FPair,
    samples: Vec<Sample>,
}

impl LocalBreaker {
    pub fn new(base: &MetricField, plane: &TangentPlane, params: &LocalParams) -> Result<Self> {
        params.validate()?;
        let frame = adapted_frame(base, plane)?;
        let cutoff = Cutoff::new(params.rho, params.pad)?;
        let fpair = FPair::build(params.k, params.eps, cutoff, base.dim())?;
        let planes = sample_planes(base, &frame, params)?;
        let samples = planes
            .into_par_iter()
            .map(|(kind, offset, tilt, p)| {
                let data = riemann_tensor(base, p.point())?;
                let pc = PlaneCurvature::new(&data, &p, params.settings.sym_tol)?;
                Ok(Sample {
                    kind,
                    offset,
                    tilt,
                    base: p,
                    base_curvature: pc,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            base: base.clone(),
            params: params.clone(),
            frame,
            fpair,
            samples,
        })
    }

    pub fn fpair(&self) -> &FPair {
        &self.fpair
    }

    pub fn frame(&self) -> &AdaptedFrame {
        &self.frame
    }

    /// Deforms with amplitude `s` and measures the invariant changes.
    pub fn trial(&self, s: f64) -> Result<(AmplitudeTrial, Option<(MetricField, DeformationSpec)>)> {
        let ks = self.params.k * s;
        let metric = match perturb(&self.base, &self.frame, &self.fpair, s) {
            Ok(m) => m,
            Err(GeoError::AmplitudeTooLarge { .. }) => {
                return Ok((
                    AmplitudeTrial {
                        s,
                        positive_definite: false,
                        part2_min: 0.0,
                        part3_max: f64::INFINITY,
                        part4_max: f64::INFINITY,
                        center_defect: 0.0,
                        part2_pass: false,
                        part3_pass: false,
                        part4_pass: false,
                        deltas: Vec::new(),
                    },
                    None,
                ))
            }
            Err(e) => return Err(e),
        };
        let deltas: Vec<SampleDelta> = self
            .samples
            .par_iter()
            .map(|smp| {
                let (delta, defect_after) = invariant_change(&metric, smp, &self.params.settings)?;
                Ok(SampleDelta {
                    kind: smp.kind,
                    offset: smp.offset,
                    tilt: smp.tilt,
                    delta,
                    defect_after,
                })
            })
            .collect::<Result<_>>()?;
        let mut part2_min = f64::INFINITY;
        let mut part3_max: f64 = 0.0;
        let mut part4_max: f64 = 0.0;
        let mut center_defect = 0.0;
        for sd in &deltas {
            let d = sd.delta;
            part3_max = part3_max.max(d);
            match sd.kind {
                SampleKind::Center => {
                    center_defect = sd.defect_after;
                    part2_min = part2_min.min(d);
                }
                SampleKind::Affected => part2_min = part2_min.min(d),
                SampleKind::Far => part4_max = part4_max.max(d),
                SampleKind::Global => {}
            }
        }
        let trial = AmplitudeTrial {
            s,
            positive_definite: true,
            part2_min,
            part3_max,
            part4_max,
            center_defect,
            part2_pass: part2_min > ks,
            part3_pass: part3_max <= self.params.part3_factor * ks,
            part4_pass: part4_max <= self.params.part4_factor * ks,
            deltas,
        };
        let spec = DeformationSpec::new(&self.frame, &self.fpair, s);
        Ok((trial, Some((metric, spec))))
    }

    fn empty_report(&self) -> LocalReport {
        LocalReport {
            center: self.frame.plane.clone(),
            eps_tilde: self.fpair.eps_tilde,
            cutoff_m: self.fpair.cutoff.m,
            samples: self.samples.len(),
            trials: Vec::new(),
            chosen_s: None,
            fitted_c: None,
            eps0: None,
        }
    }

    /// Largest amplitude in the schedule whose measurements pass.
    pub fn run(&self) -> Result<LocalBreak> {
        self.run_with(|_, _| true)
    }

    /// As [`run`](Self::run), with an extra acceptance test on the candidate
    /// metric (used for the global budget).
    pub fn run_with<F>(&self, mut accept: F) -> Result<LocalBreak>
    where
        F: FnMut(&MetricField, &AmplitudeTrial) -> bool,
    {
        let mut report = self.empty_report();
        for s in self.params.descending() {
            let (trial, built) = self.trial(s)?;
            let ok = trial.passed();
            report.trials.push(trial.clone());
            if let (true, Some((metric, spec))) = (ok, built) {
                if !accept(&metric, &trial) {
                    continue;
                }
                report.chosen_s = Some(s);
                report.fitted_c = Some(trial.part2_min / (self.params.k * s));
                report.eps0 = Some(trial.part4_max / s);
                return Ok(LocalBreak {
                    metric,
                    spec,
                    report,
                });
            }
        }
        Err(GeoError::NoValidAmplitude)
    }

    /// Measures every amplitude of the schedule without stopping.
    pub fn sweep(&self) -> Result<LocalReport> {
        let mut report = self.empty_report();
        for s in self.params.descending() {
            report.trials.push(self.trial(s)?.0);
        }
        Ok(report)
    }
}

/// Deforms `base` near `plane` with the largest validated amplitude.
pub fn local_break(base: &MetricField, plane: &TangentPlane, params: &LocalParams) -> Result<LocalBreak> {
    LocalBreaker::new(base, plane, params)?.run()
}

/// `max_v ‖M_{g_s}(v) − M_ĝ(v)‖` over unit `v` of the sampled plane, where
/// `M` is the off-diagonal block of the Jacobi operator. The plane and
/// complement frames of `ĝ` are carried to `g_s` by symmetric
/// orthonormalization, so the result does not depend on their choice. Also
/// returns the defect under `g_s`.
fn invariant_change(metric: &MetricField, smp: &Sample, settings: &DefectSettings) -> Result<(f64, f64)> {
    let x = smp.base.point();
    let data = riemann_tensor(metric, x)?;
    let g = &data.metric;
    let b = symmetric_orthonormalize(g, smp.base_curvature.basis())?;
    let q0 = smp.base_curvature.complement();
    let q = q0 - &b * (b.transpose() * g * q0);
    let q = symmetric_orthonormalize(g, &q)?;
    let after = PlaneCurvature::with_frames(&data, b, q)?;
    let l = smp.base.l();
    let (delta, _, _) = maximize_over_sphere(l, settings, |c| {
        let c = c / c.norm();
        (after.offblock(&c) - smp.base_curvature.offblock(&c))
            .singular_values()
            .max()
    });
    let (defect, _, _) = maximize_over_sphere(l, settings, |c| after.invariant(c));
    Ok((delta, defect))
}

/// `X (Xᵀ G X)^{-1/2}`.
fn symmetric_orthonormalize(g: &DMatrix<f64>, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let gram = x.transpose() * g * x;
    let eig = gram.symmetric_eigen();
    if eig.eigenvalues.iter().any(|&e| !(e > 0.0)) {
        return Err(GeoError::DegeneratePlane);
    }
    let inv_sqrt = DMatrix::from_diagonal(&eig.eigenvalues.map(|e| 1.0 / e.sqrt()));
    Ok(x * (&eig.eigenvectors * inv_sqrt * eig.eigenvectors.transpose()))
}

fn unit_direction(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(n, |_, _| StandardNormal.sample(rng));
        let norm: f64 = v.norm();
        if norm > 1e-8 {
            return v / norm;
        }
    }
}

/// Offset in a ball (or shell) of the adapted coordinates.
fn offset_in_shell(rng: &mut ChaCha8Rng, n: usize, r0: f64, r1: f64) -> DVector<f64> {
    let u: f64 = rng.gen_range(0.0..1.0);
    let nf = n as f64;
    let r = (r0.powf(nf) + u * (r1.powf(nf) - r0.powf(nf))).powf(1.0 / nf);
    unit_direction(rng, n) * r
}

/// Columns `B + Q X` with `‖X‖₂ = tan θ`.
fn tilted(rng: &mut ChaCha8Rng, b: &DMatrix<f64>, q: &DMatrix<f64>, theta: f64) -> Vec<DVector<f64>> {
    let x = DMatrix::from_fn(q.ncols(), b.ncols(), |_, _| StandardNormal.sample(rng));
    let norm = x.clone().singular_values().max();
    let x = if norm > 0.0 { x * (theta.tan() / norm) } else { x };
    let m = b + q * x;
    m.column_iter().map(|c| c.into_owned()).collect()
}

type PlaneSample = (SampleKind, f64, Option<f64>, TangentPlane);

fn sample_planes(base: &MetricField, frame: &AdaptedFrame, params: &LocalParams) -> Result<Vec<PlaneSample>> {
    let n = base.dim();
    let l = frame.plane.l();
    let p = frame.point();
    let g = base.metric_at(p)?;
    let b = frame.plane.basis().clone();
    let q = g_orthonormal_complement(&g, &b);
    let outer = params.rho + params.pad;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed ^ 0x10ca1);
    let mut out: Vec<PlaneSample> = vec![(SampleKind::Center, 0.0, Some(0.0), frame.plane.clone())];

    let place = |y: &DVector<f64>, vs: &[DVector<f64>]| -> Option<TangentPlane> {
        let x = base.chart().reduce(&(p + &frame.frame * y)).ok()?;
        TangentPlane::from_span(base, x, vs).ok()
    };

    let mut tries = 0;
    while out.iter().filter(|s| s.0 == SampleKind::Affected).count() < params.affected_samples && tries < 100 * params.affected_samples.max(1) {
        tries += 1;
        let y = offset_in_shell(&mut rng, n, 0.0, 0.5 * params.rho);
        let theta = rng.gen_range(0.0..0.5 * params.rho);
        let vs = tilted(&mut rng, &b, &q, theta);
        if let Some(plane) = place(&y, &vs) {
            out.push((SampleKind::Affected, y.norm(), Some(theta), plane));
        }
    }
    let random_span = |rng: &mut ChaCha8Rng| -> Vec<DVector<f64>> {
        (0..l).map(|_| unit_direction(rng, n)).collect()
    };
    let mut tries = 0;
    while out.iter().filter(|s| s.0 == SampleKind::Global).count() < params.global_samples && tries < 100 * params.global_samples.max(1) {
        tries += 1;
        let y = offset_in_shell(&mut rng, n, 0.0, outer);
        let vs = random_span(&mut rng);
        if let Some(plane) = place(&y, &vs) {
            out.push((SampleKind::Global, y.norm(), None, plane));
        }
    }
    let mut tries = 0;
    while out.iter().filter(|s| s.0 == SampleKind::Far).count() < params.far_samples && tries < 100 * params.far_samples.max(1) {
        tries += 1;
        let y = offset_in_shell(&mut rng, n, 1.05 * outer, 1.5 * outer);
        let vs = random_span(&mut rng);
        if let Some(plane) = place(&y, &vs) {
            out.push((SampleKind::Far, y.norm(), None, plane));
        }
    }
    Ok(out)
}
