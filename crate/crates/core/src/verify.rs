//! Property suite run by `geodefect verify`: each check records a measured
//! quantity, the bounds it must respect and whether it passed.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::curvature::{jacobi_operator, riemann_tensor, sectional, self_adjointness_residual, symmetry_residual, CurvatureData};
use crate::defect::{plane_defect, TangentPlane};
use crate::deformation::{
    adapted_frame, deformed_field, frame_curvature, local_break, predicted_curvature_delta, BumpPair, Cutoff,
    DeformationSpec, FPair, LocalParams,
};
use crate::error::Result;
use crate::manifold::{make_model, DerivativeBackend, MetricField, ModelDescriptor};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifyOptions {
    /// Random samples per check.
    pub samples: usize,
    pub seed: u64,
    /// Step of the central-difference backend compared against the
    /// analytic one.
    pub fd_step: f64,
    pub tol_sym: f64,
    pub tol_pg: f64,
    /// Negates every curvature tensor before use; a test fixture.
    pub flip_curvature_sign: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            samples: 200,
            seed: 0,
            fd_step: 1e-4,
            tol_sym: 1e-8,
            tol_pg: 1e-8,
            flip_curvature_sign: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
    pub pass: bool,
}

impl Check {
    pub fn new(name: &str, measured: f64, lower: Option<f64>, upper: Option<f64>) -> Self {
        let pass = measured.is_finite()
            && lower.map_or(true, |lo| measured > lo)
            && upper.map_or(true, |hi| measured < hi);
        Self {
            name: name.to_string(),
            measured,
            lower,
            upper,
            pass,
        }
    }

    fn below(name: &str, measured: f64, upper: f64) -> Self {
        Self::new(name, measured, None, Some(upper))
    }

    fn above(name: &str, measured: f64, lower: f64) -> Self {
        Self::new(name, measured, Some(lower), None)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn model(kind: &str, n: usize) -> Result<MetricField> {
    make_model(&ModelDescriptor::new(kind, n))
}

fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

fn box_point(rng: &mut ChaCha8Rng, n: usize, half: f64) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.gen_range(-half..half))
}

fn curvature(field: &MetricField, x: &DVector<f64>, opts: &VerifyOptions) -> Result<CurvatureData> {
    let data = riemann_tensor(field, x)?;
    Ok(if opts.flip_curvature_sign { data.negated() } else { data })
}

pub fn run_suite(opts: &VerifyOptions) -> Result<VerifyReport> {
    let mut checks = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let sphere = model("sphere", 4)?;
    let torus = model("torus", 4)?;
    let trig = make_model(&ModelDescriptor::new("random-trig", 4).with_seed(7).with_param("amplitude", 0.05))?;

    let mut sec_err: f64 = 0.0;
    let mut sym_sphere: f64 = 0.0;
    let mut scaled_err: f64 = 0.0;
    let big = make_model(&ModelDescriptor::new("sphere", 4).with_param("radius", 2.0))?;
    for _ in 0..opts.samples {
        let x = box_point(&mut rng, 4, 1.5);
        let (a, b) = (gaussian(&mut rng, 4), gaussian(&mut rng, 4));
        let data = curvature(&sphere, &x, opts)?;
        sec_err = sec_err.max((sectional(&data, &a, &b)? - 1.0).abs());
        sym_sphere = sym_sphere.max(symmetry_residual(&data));
        let scaled = curvature(&big, &x, opts)?;
        scaled_err = scaled_err.max((4.0 * sectional(&scaled, &a, &b)? - 1.0).abs());
    }
    checks.push(Check::below("sphere-sectional-one", sec_err, 1e-6));
    checks.push(Check::below("sphere-symmetry-residual", sym_sphere, opts.tol_sym));
    checks.push(Check::below("sectional-scaling", scaled_err, 1e-6));

    let mut flat: f64 = 0.0;
    let mut sym_trig: f64 = 0.0;
    let mut adjoint: f64 = 0.0;
    for _ in 0..opts.samples.min(100) {
        let x = box_point(&mut rng, 4, 3.0);
        flat = flat.max(curvature(&torus, &x.add_scalar(3.0), opts)?.riemann.max_abs());
        let data = curvature(&trig, &x, opts)?;
        sym_trig = sym_trig.max(symmetry_residual(&data));
        let v = gaussian(&mut rng, 4);
        adjoint = adjoint.max(self_adjointness_residual(&data.metric, &jacobi_operator(&data, &v)?));
    }
    checks.push(Check::below("torus-curvature-zero", flat, 1e-10));
    checks.push(Check::below("random-trig-symmetry-residual", sym_trig, opts.tol_sym));
    checks.push(Check::below("jacobi-self-adjoint", adjoint, opts.tol_sym));

    let (err_h, err_half) = fd_errors(&sphere, opts.fd_step, &mut rng, opts.samples.min(50))?;
    checks.push(Check::below("fd-first-partial-error", err_h, 1e-6));
    checks.push(Check::new("fd-convergence-order", err_h / err_half, Some(3.5), Some(4.5)));

    let mut defect: f64 = 0.0;
    for field in [&torus, &sphere] {
        for l in [2, 3] {
            for _ in 0..opts.samples.min(50) {
                let x = box_point(&mut rng, 4, 0.45).add_scalar(if field.chart().period(0).is_some() { 0.5 } else { 0.0 });
                let vs: Vec<_> = (0..l).map(|_| gaussian(&mut rng, 4)).collect();
                let plane = TangentPlane::from_span(field, x, &vs)?;
                defect = defect.max(plane_defect(field, &plane)?.defect);
            }
        }
    }
    checks.push(Check::below("symmetric-space-zero-defect", defect, opts.tol_pg));

    checks.push(Check::above("bump-bounds-margin", bump_margin()?, 0.0));
    checks.push(Check::above("fpair-properties-margin", fpair_margin()?, 0.0));

    let plane = TangentPlane::coordinate(&torus, DVector::from_element(4, 0.25), &[0, 1])?;
    let frame = adapted_frame(&torus, &plane)?;
    let fpair = FPair::build(10.0, 0.1, Cutoff::new(0.15, 0.1)?, 4)?;
    checks.push(Check::below(
        "deformation-locality-mismatches",
        locality_mismatches(&torus, &DeformationSpec::new(&frame, &fpair, 1.0), &mut rng)? as f64,
        0.5,
    ));
    let (rel, off) = curvature_delta_errors(&torus, &DeformationSpec::new(&frame, &fpair, 2f64.powi(-14)))?;
    checks.push(Check::below("curvature-delta-relative-error", rel, 0.1));
    checks.push(Check::below("curvature-delta-other-over-10-eps-s", off, 1.0));

    let params = LocalParams::default();
    let broken = local_break(&torus, &plane, &params)?;
    let trial = broken.report.trials.last().expect("a passing trial is recorded");
    let ks = params.k * trial.s;
    checks.push(Check::above("part2-delta-over-ks", trial.part2_min / ks, 1.0));
    checks.push(Check::below("part3-delta-over-ks", trial.part3_max / ks, params.part3_factor));
    checks.push(Check::below("part4-delta-over-ks", trial.part4_max / ks, params.part4_factor));

    let passed = checks.iter().all(|c| c.pass);
    Ok(VerifyReport { passed, checks })
}

/// Largest entrywise error of central-difference first partials against
/// the analytic ones at steps `h` and `h/2`.
fn fd_errors(field: &MetricField, h: f64, rng: &mut ChaCha8Rng, samples: usize) -> Result<(f64, f64)> {
    let coarse = field.with_backend(DerivativeBackend::central(h))?;
    let fine = field.with_backend(DerivativeBackend::central(h / 2.0))?;
    let (mut e1, mut e2): (f64, f64) = (0.0, 0.0);
    for _ in 0..samples {
        let x = box_point(rng, field.dim(), 1.0);
        let exact = field.jet(&x)?;
        let (a, b) = (coarse.jet(&x)?, fine.jet(&x)?);
        for i in 0..field.dim() {
            e1 = e1.max((&a.first[i] - &exact.first[i]).amax());
            e2 = e2.max((&b.first[i] - &exact.first[i]).amax());
        }
    }
    Ok((e1, e2))
}

/// Smallest relative slack of the bump bounds over the sampled grid of
/// `(K, ε)`.
fn bump_margin() -> Result<f64> {
    let mut margin = f64::INFINITY;
    for k in [2.0, 10.0, 100.0] {
        for eps in [0.1, 0.01] {
            let b = BumpPair::new(k, eps)?.sample_bounds(10_000);
            margin = margin
                .min(b.min_max_second / (2.01 * k) - 1.0)
                .min(1.0 - b.max_max_second / (3.99 * k))
                .min(1.0 - b.max_value.max(b.max_first) / eps);
        }
    }
    Ok(margin)
}

fn fpair_margin() -> Result<f64> {
    let (k, eps) = (10.0, 0.1);
    let f = FPair::build(k, eps, Cutoff::new(0.15, 0.1)?, 4)?;
    let c = f.check(4);
    if c.nonzero_outside > 0 {
        return Ok(-1.0);
    }
    Ok((c.inner_min_second / (2.0 * k) - 1.0)
        .min(1.0 - c.max_second / (4.0 * k))
        .min(1.0 - c.max_other_second / eps)
        .min(1.0 - c.max_c1 / eps))
}

/// Points outside the support where the deformed metric differs from the
/// base in any bit, over five amplitudes.
fn locality_mismatches(base: &MetricField, spec: &DeformationSpec, rng: &mut ChaCha8Rng) -> Result<usize> {
    let p = spec.center.point().clone();
    let reach = spec.support_radius();
    let mut bad = 0;
    for s in [1e-6, 1e-4, 1e-3, 2f64.powi(-10), 2f64.powi(-14)] {
        let field = deformed_field(base, spec.with_amplitude(s))?;
        for _ in 0..2000 {
            let x = loop {
                let x = DVector::from_fn(4, |_, _| rng.gen_range(0.0..1.0));
                if base.chart().distance(&x, &p) > reach * 1.0001 {
                    break x;
                }
            };
            if field.metric_at(&x)? != base.metric_at(&x)? {
                bad += 1;
            }
        }
    }
    Ok(bad)
}

/// Whether `(i, j, k, l)` is a symmetry image of `(2, v, v, 3)` or
/// `(2, v, v, 4)` in frame indices.
pub fn designated_entry(i: usize, j: usize, k: usize, l: usize) -> bool {
    let pair = |a: usize, b: usize| (a.min(b), a.max(b));
    let (p, q) = (pair(i, j), pair(k, l));
    let first = (0, 1);
    [(0, 2), (0, 3)].iter().any(|&other| (p == first && q == other) || (p == other && q == first))
}

/// On a flat base: the relative error of the designated entries against the
/// prediction, at the center and at the quarter-period offset, and the
/// largest other entry change divided by `ε s`.
fn curvature_delta_errors(base: &MetricField, spec: &DeformationSpec) -> Result<(f64, f64)> {
    let field = deformed_field(base, spec.clone())?;
    let p = spec.center.point();
    let eta = spec.eps_tilde / (4.0 * spec.k);
    let quarter = p + &spec.frame * DVector::from_fn(4, |i, _| if i == 0 { 0.5 * std::f64::consts::PI * eta } else { 0.0 });
    let mut rel: f64 = 0.0;
    let mut other: f64 = 0.0;
    for x in [p.clone(), quarter] {
        let before = frame_curvature(base, spec, &x)?;
        let after = frame_curvature(&field, spec, &x)?;
        let (d3, d4) = predicted_curvature_delta(spec, base.chart(), &x)?;
        for (measured, predicted) in [(after.get(1, 0, 0, 2) - before.get(1, 0, 0, 2), d3), (after.get(1, 0, 0, 3) - before.get(1, 0, 0, 3), d4)] {
            if predicted.abs() > 1e-3 * spec.k * spec.s {
                rel = rel.max((measured - predicted).abs() / predicted.abs());
            }
        }
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    for l in 0..4 {
                        if !designated_entry(i, j, k, l) {
                            let d = (after.get(i, j, k, l) - before.get(i, j, k, l)).abs();
                            other = other.max(d / (10.0 * spec.eps * spec.s));
                        }
                    }
                }
            }
        }
    }
    Ok((rel, other))
}
