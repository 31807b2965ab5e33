//! Off-block invariant of a self-adjoint operator and the partial-geodesy
//! defect of a tangent plane.
//!
//! For a plane `P` with g-orthonormal basis `B` and complement basis `Q`, the
//! invariant of an operator `J` is the top singular value of `Qᵀ G J B`. The
//! defect of `P` is its maximum over g-unit `v ∈ P` of the invariant of the
//! Jacobi operator `R_v`.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::curvature::{riemann_tensor, self_adjointness_residual, CurvatureData};
use crate::error::{GeoError, Result};
use crate::manifold::{
    columns, g_orthonormal_complement, gram_schmidt_g, orthonormality_defect, MetricField, TAU_ON,
};
use crate::simplex::NelderMead;

/// Threshold below which a plane counts as partially geodesic.
pub const TAU_PG_ANALYTIC: f64 = 1e-7;
pub const TAU_PG_FD: f64 = 1e-3;
pub const TAU_SYM_ANALYTIC: f64 = 1e-8;
pub const TAU_SYM_FD: f64 = 1e-4;

/// A point with a g-orthonormal basis of an `l`-dimensional subspace,
/// `2 ≤ l ≤ n − 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "PlaneRepr", into = "PlaneRepr")]
pub struct TangentPlane {
    point: DVector<f64>,
    basis: DMatrix<f64>,
}

#[derive(Serialize, Deserialize)]
struct PlaneRepr {
    point: Vec<f64>,
    basis: Vec<Vec<f64>>,
}

impl From<PlaneRepr> for TangentPlane {
    fn from(r: PlaneRepr) -> Self {
        let cols: Vec<DVector<f64>> = r.basis.into_iter().map(DVector::from_vec).collect();
        Self {
            basis: columns(r.point.len(), &cols),
            point: DVector::from_vec(r.point),
        }
    }
}

impl From<TangentPlane> for PlaneRepr {
    fn from(p: TangentPlane) -> Self {
        Self {
            point: p.point.iter().copied().collect(),
            basis: p
                .basis
                .column_iter()
                .map(|c| c.iter().copied().collect())
                .collect(),
        }
    }
}

impl TangentPlane {
    /// Checks dimensions and orthonormality against `g` at the (reduced) point.
    pub fn new(field: &MetricField, point: DVector<f64>, basis: DMatrix<f64>) -> Result<Self> {
        let point = field.chart().reduce(&point)?;
        let n = field.dim();
        if basis.nrows() != n {
            return Err(GeoError::DimensionMismatch {
                expected: n,
                got: basis.nrows(),
            });
        }
        let l = basis.ncols();
        if l < 2 || l >= n {
            return Err(GeoError::InvalidParameter(format!(
                "plane dimension must lie in 2..={}, got {l}",
                n - 1
            )));
        }
        let g = field.metric_at(&point)?;
        let dev = orthonormality_defect(&g, &basis);
        if dev > TAU_ON {
            return Err(GeoError::NotOrthonormal { deviation: dev });
        }
        Ok(Self { point, basis })
    }

    /// Orthonormalizes `vectors` with respect to `g` at `point`.
    pub fn from_span(field: &MetricField, point: DVector<f64>, vectors: &[DVector<f64>]) -> Result<Self> {
        let point = field.chart().reduce(&point)?;
        let g = field.metric_at(&point)?;
        let basis = columns(field.dim(), &gram_schmidt_g(&g, vectors)?);
        Self::new(field, point, basis)
    }

    /// Span of the given coordinate axes.
    pub fn coordinate(field: &MetricField, point: DVector<f64>, axes: &[usize]) -> Result<Self> {
        let n = field.dim();
        if let Some(&a) = axes.iter().find(|&&a| a >= n) {
            return Err(GeoError::InvalidParameter(format!("axis {a} out of range")));
        }
        let vs: Vec<_> = axes
            .iter()
            .map(|&a| DVector::from_fn(n, |k, _| if k == a { 1.0 } else { 0.0 }))
            .collect();
        Self::from_span(field, point, &vs)
    }

    pub fn point(&self) -> &DVector<f64> {
        &self.point
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn l(&self) -> usize {
        self.basis.ncols()
    }

    pub fn n(&self) -> usize {
        self.basis.nrows()
    }

    /// Same subspace at the same point, re-orthonormalized for another metric.
    pub fn reorthonormalize(&self, field: &MetricField) -> Result<Self> {
        let vs: Vec<_> = self.basis.column_iter().map(|c| c.into_owned()).collect();
        Self::from_span(field, self.point.clone(), &vs)
    }
}

/// Top singular value of an off-block together with its singular vectors.
#[derive(Clone, Debug)]
pub struct OffBlock {
    pub value: f64,
    /// g-unit vector of the plane achieving the value.
    pub argmax: DVector<f64>,
    /// g-unit normal direction receiving the largest component.
    pub witness: DVector<f64>,
}

/// `max_{w ∈ W, |w| = 1} |J(w)^{W⊥}|`, computed as the top singular value of
/// `Qᵀ G J B`.
pub fn offblock_invariant(
    j: &DMatrix<f64>,
    g: &DMatrix<f64>,
    basis: &DMatrix<f64>,
    sym_tol: f64,
) -> Result<OffBlock> {
    let n = g.nrows();
    if j.nrows() != n || j.ncols() != n || basis.nrows() != n {
        return Err(GeoError::DimensionMismatch {
            expected: n,
            got: j.nrows().max(basis.nrows()),
        });
    }
    let gj = g * j;
    let residual = self_adjointness_residual(g, j);
    if residual > sym_tol * gj.amax().max(1.0) {
        return Err(GeoError::NotSelfAdjoint { residual });
    }
    let q = g_orthonormal_complement(g, basis);
    if q.ncols() == 0 {
        return Err(GeoError::DegeneratePlane);
    }
    let m = q.transpose() * gj * basis;
    let (value, left, right) = top_singular(&m);
    Ok(OffBlock {
        value,
        argmax: basis * right,
        witness: q * left,
    })
}

/// Largest singular value with left and right singular vectors, the right one
/// sign-normalized.
fn top_singular(m: &DMatrix<f64>) -> (f64, DVector<f64>, DVector<f64>) {
    let svd = m.clone().svd(true, true);
    let (mut k, mut best) = (0, f64::NEG_INFINITY);
    for (i, s) in svd.singular_values.iter().enumerate() {
        if *s > best {
            best = *s;
            k = i;
        }
    }
    let mut u = svd.u.as_ref().map(|u| u.column(k).into_owned()).unwrap_or_else(|| DVector::zeros(m.nrows()));
    let mut v = svd.v_t.as_ref().map(|vt| vt.row(k).transpose()).unwrap_or_else(|| DVector::zeros(m.ncols()));
    if sign_flip(&v) {
        v.neg_mut();
        u.neg_mut();
    }
    (best.max(0.0), u, v)
}

fn sign_flip(c: &DVector<f64>) -> bool {
    c.iter().find(|x| x.abs() > 1e-14).is_some_and(|x| *x < 0.0)
}

fn sign_normalized(mut c: DVector<f64>) -> DVector<f64> {
    if sign_flip(&c) {
        c.neg_mut();
    }
    c
}

fn lex_cmp(a: &DVector<f64>, b: &DVector<f64>) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

/// Curvature restricted to a plane, for fast evaluation of `c ↦ 𝓘_{R_v}(P)`
/// with `v = B c`.
#[derive(Clone, Debug)]
pub struct PlaneCurvature {
    l: usize,
    k: usize,
    basis: DMatrix<f64>,
    complement: DMatrix<f64>,
    /// `blocks[q * l + b]` is the symmetric form `c ↦ R(B_b, Bc, Bc, Q_q)`.
    blocks: Vec<DMatrix<f64>>,
}

impl PlaneCurvature {
    pub fn new(data: &CurvatureData, plane: &TangentPlane, sym_tol: f64) -> Result<Self> {
        let n = data.dim();
        if plane.n() != n {
            return Err(GeoError::DimensionMismatch {
                expected: n,
                got: plane.n(),
            });
        }
        let r = &data.riemann;
        let mut residual: f64 = 0.0;
        for b in 0..n {
            for c in 0..n {
                for e in 0..n {
                    for d in 0..n {
                        residual = residual.max((r.get(b, c, e, d) - r.get(d, e, c, b)).abs());
                    }
                }
            }
        }
        if residual > sym_tol * r.max_abs().max(1.0) {
            return Err(GeoError::NotSelfAdjoint { residual });
        }
        let basis = plane.basis().clone();
        let complement = g_orthonormal_complement(&data.metric, &basis);
        Self::with_frames(data, basis, complement)
    }

    /// Uses the given orthonormal plane and complement frames as they are;
    /// the pair symmetry check is left to the caller.
    pub(crate) fn with_frames(data: &CurvatureData, basis: DMatrix<f64>, complement: DMatrix<f64>) -> Result<Self> {
        let n = data.dim();
        let r = &data.riemann;
        let l = basis.ncols();
        let k = complement.ncols();
        if k == 0 {
            return Err(GeoError::DegeneratePlane);
        }
        let mut frame = DMatrix::zeros(n, n);
        frame.columns_mut(0, l).copy_from(&basis);
        frame.columns_mut(l, k).copy_from(&complement);
        let t = r.in_frame(&frame);
        let mut blocks = Vec::with_capacity(k * l);
        for q in 0..k {
            for b in 0..l {
                let mut s = DMatrix::from_fn(l, l, |a, c| t.get(b, a, c, l + q));
                s = (&s + s.transpose()) * 0.5;
                blocks.push(s);
            }
        }
        Ok(Self {
            l,
            k,
            basis,
            complement,
            blocks,
        })
    }

    /// Off-block `M(c)` in the orthonormal frames of plane and complement.
    pub fn offblock(&self, c: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_fn(self.k, self.l, |q, b| {
            let s = &self.blocks[q * self.l + b];
            (s * c).dot(c)
        })
    }

    /// `𝓘_{R_v}(P)` for `v = B c / |c|`.
    pub fn invariant(&self, c: &DVector<f64>) -> f64 {
        let c = c / c.norm();
        let m = self.offblock(&c);
        let small = if self.k <= self.l {
            &m * m.transpose()
        } else {
            m.transpose() * &m
        };
        let top = small.symmetric_eigenvalues().max();
        top.max(0.0).sqrt()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn complement(&self) -> &DMatrix<f64> {
        &self.complement
    }

    pub fn l(&self) -> usize {
        self.l
    }
}

/// Deterministic points on the closed upper hemisphere of `S^{l-1}`, sign
/// normalized. `l = 2` uses angles `kπ/d`, `l = 3` a Fibonacci lattice and
/// higher `l` seeded Gaussian directions.
pub fn hemisphere_grid(l: usize, density: usize, seed: u64) -> Vec<DVector<f64>> {
    let d = density.max(1);
    match l {
        0 | 1 => vec![DVector::from_element(l.max(1), 1.0)],
        2 => (0..d)
            .map(|k| {
                let t = k as f64 * std::f64::consts::PI / d as f64;
                sign_normalized(DVector::from_vec(vec![t.cos(), t.sin()]))
            })
            .collect(),
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..d)
                .map(|k| {
                    let z = 1.0 - (k as f64 + 0.5) / d as f64;
                    let r = (1.0 - z * z).max(0.0).sqrt();
                    let phi = golden * k as f64;
                    sign_normalized(DVector::from_vec(vec![z, r * phi.cos(), r * phi.sin()]))
                })
                .collect()
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
            let mut out = Vec::with_capacity(d);
            out.push(sign_normalized(DVector::from_fn(l, |i, _| if i == 0 { 1.0 } else { 0.0 })));
            while out.len() < d {
                let c: DVector<f64> = DVector::from_fn(l, |_, _| StandardNormal.sample(&mut rng));
                let norm = c.norm();
                if norm > 1e-8 {
                    out.push(sign_normalized(c / norm));
                }
            }
            out
        }
    }
}

fn default_density(l: usize) -> usize {
    match l {
        2 => 90,
        3 => 400,
        _ => 150 * l,
    }
}

/// Tuning of the `v`-maximization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectSettings {
    /// Grid points on the hemisphere; `None` picks a default per `l`.
    pub density: Option<usize>,
    /// Number of best grid points refined by the simplex method.
    pub refine_starts: usize,
    pub max_iter: usize,
    pub sym_tol: f64,
    pub seed: u64,
}

impl Default for DefectSettings {
    fn default() -> Self {
        Self {
            density: None,
            refine_starts: 3,
            max_iter: 400,
            sym_tol: TAU_SYM_ANALYTIC,
            seed: 0,
        }
    }
}

impl DefectSettings {
    pub fn for_field(field: &MetricField) -> Self {
        let sym_tol = if field.backend().is_analytic() {
            TAU_SYM_ANALYTIC
        } else {
            TAU_SYM_FD
        };
        Self {
            sym_tol,
            ..Default::default()
        }
    }

    pub fn with_density(mut self, density: usize) -> Self {
        self.density = Some(density);
        self
    }
}

/// `τ_pg` for the field's backend.
pub fn tau_pg(field: &MetricField) -> f64 {
    if field.backend().is_analytic() {
        TAU_PG_ANALYTIC
    } else {
        TAU_PG_FD
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectMeta {
    pub grid_points: usize,
    pub refine_starts: usize,
    pub refine_iterations: usize,
    pub evaluations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectReport {
    #[serde(flatten)]
    pub plane: TangentPlane,
    pub defect: f64,
    pub vstar: Vec<f64>,
    pub witness: Vec<f64>,
    pub meta: DefectMeta,
}

/// Maximizes `c ↦ 𝓘(Bc)` over the unit sphere: hemisphere grid, then
/// Nelder–Mead on gnomonic charts around the best grid points. Returns the
/// maximizer in plane coordinates.
pub fn maximize_on_sphere(pc: &PlaneCurvature, settings: &DefectSettings) -> (f64, DVector<f64>, DefectMeta) {
    maximize_over_sphere(pc.l(), settings, |c| pc.invariant(c))
}

/// Same search for an arbitrary even objective on `S^{l−1}`.
pub fn maximize_over_sphere<F>(l: usize, settings: &DefectSettings, objective: F) -> (f64, DVector<f64>, DefectMeta)
where
    F: Fn(&DVector<f64>) -> f64,
{
    let d = settings.density.unwrap_or_else(|| default_density(l));
    let grid = hemisphere_grid(l, d, settings.seed);
    let mut evaluations = grid.len();
    let mut scored: Vec<(f64, DVector<f64>)> = grid.into_iter().map(|c| (objective(&c), c)).collect();
    // best first; ties go to the lexicographically smaller point
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| lex_cmp(&a.1, &b.1)));

    let step = match l {
        2 => std::f64::consts::PI / d as f64,
        _ => (d as f64).powf(-1.0 / (l as f64 - 1.0)).min(0.5),
    };
    let nm = NelderMead {
        step,
        max_iter: settings.max_iter,
        ..Default::default()
    };
    let (mut best_val, mut best_c) = scored[0].clone();
    let mut iterations = 0;
    let starts = settings.refine_starts.min(scored.len());
    if best_val > 0.0 {
        for (_, c0) in scored.iter().take(starts) {
            let tangent = sphere_tangent(c0);
            let chart = |z: &DVector<f64>| {
                let c = c0 + &tangent * z;
                c.normalize()
            };
            let m = nm.minimize(|z| -objective(&chart(z)), &DVector::zeros(l - 1));
            iterations += m.iterations;
            evaluations += m.evaluations;
            let c = sign_normalized(chart(&m.x));
            let val = -m.value;
            let tie = (val - best_val).abs() <= 1e-15 * best_val.abs().max(1.0);
            if (val > best_val && !tie) || (tie && lex_cmp(&c, &best_c) == Ordering::Less) {
                best_val = val;
                best_c = c;
            }
        }
    }
    let meta = DefectMeta {
        grid_points: d,
        refine_starts: starts,
        refine_iterations: iterations,
        evaluations,
    };
    (best_val, best_c, meta)
}

/// Orthonormal basis of `c⊥` in ℝˡ, as columns.
fn sphere_tangent(c: &DVector<f64>) -> DMatrix<f64> {
    let l = c.len();
    let mut out: Vec<DVector<f64>> = Vec::with_capacity(l - 1);
    let c = c.normalize();
    for i in 0..l {
        let mut e = DVector::from_fn(l, |k, _| if k == i { 1.0 } else { 0.0 });
        for _ in 0..2 {
            e -= &c * c.dot(&e);
            for u in &out {
                e -= u * u.dot(&e);
            }
        }
        let norm = e.norm();
        if norm > 1e-8 {
            out.push(e / norm);
        }
        if out.len() == l - 1 {
            break;
        }
    }
    columns(l, &out)
}

pub fn plane_defect_with_curvature(
    data: &CurvatureData,
    plane: &TangentPlane,
    settings: &DefectSettings,
) -> Result<DefectReport> {
    let pc = PlaneCurvature::new(data, plane, settings.sym_tol)?;
    let (defect, c, meta) = maximize_on_sphere(&pc, settings);
    let m = pc.offblock(&c);
    let (_, left, _) = top_singular(&m);
    let vstar = &pc.basis * &c;
    let witness = &pc.complement * left;
    Ok(DefectReport {
        plane: plane.clone(),
        defect,
        vstar: vstar.iter().copied().collect(),
        witness: witness.iter().copied().collect(),
        meta,
    })
}

/// Partial-geodesy defect `max_{v ∈ P, |v| = 1} 𝓘_{R_v}(P)`.
pub fn plane_defect(field: &MetricField, plane: &TangentPlane) -> Result<DefectReport> {
    plane_defect_with(field, plane, &DefectSettings::for_field(field))
}

pub fn plane_defect_with(
    field: &MetricField,
    plane: &TangentPlane,
    settings: &DefectSettings,
) -> Result<DefectReport> {
    let data = riemann_tensor(field, plane.point())?;
    plane_defect_with_curvature(&data, plane, settings)
}

/// Literal maximization of `|J(w)^{W⊥}|` over sampled unit `w ∈ W`.
pub mod oracle {
    use super::*;
    use crate::manifold::{g_inner, g_norm};

    pub fn offblock_oracle(j: &DMatrix<f64>, g: &DMatrix<f64>, basis: &DMatrix<f64>, density: usize) -> f64 {
        let l = basis.ncols();
        let cols: Vec<DVector<f64>> = basis.column_iter().map(|c| c.into_owned()).collect();
        let mut best: f64 = 0.0;
        for c in hemisphere_grid(l, density, 1) {
            let w = basis * c;
            let jw = j * &w;
            let mut normal = jw.clone();
            for b in &cols {
                normal -= b * g_inner(g, &jw, b);
            }
            best = best.max(g_norm(g, &normal));
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::jacobi_operator;
    use crate::manifold::{make_model, ModelDescriptor};
    use proptest::prelude::*;
    use rand::Rng;

    fn e(n: usize, i: usize) -> DVector<f64> {
        DVector::from_fn(n, |k, _| if k == i { 1.0 } else { 0.0 })
    }

    #[test]
    fn block_diagonal_operator_has_zero_invariant() {
        let g = DMatrix::identity(4, 4);
        let j = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0]));
        let b = columns(4, &[e(4, 0), e(4, 1)]);
        assert_eq!(offblock_invariant(&j, &g, &b, 1e-12).unwrap().value, 0.0);
        assert_eq!(oracle::offblock_oracle(&j, &g, &b, 100), 0.0);
    }

    #[test]
    fn single_coupling() {
        let g = DMatrix::identity(4, 4);
        let mut j = DMatrix::zeros(4, 4);
        j[(0, 2)] = -0.7;
        j[(2, 0)] = -0.7;
        let b = columns(4, &[e(4, 0), e(4, 1)]);
        let out = offblock_invariant(&j, &g, &b, 1e-12).unwrap();
        assert!((out.value - 0.7).abs() < 1e-14);
        assert!((out.argmax - e(4, 0)).amax() < 1e-14);
        assert!((out.witness[2].abs() - 1.0).abs() < 1e-14);
        let oracle = oracle::offblock_oracle(&j, &g, &b, 100);
        assert!(oracle <= 0.7 + 1e-12 && oracle > 0.7 * (1.0 - 1e-3));
    }

    #[test]
    fn rejects_non_self_adjoint() {
        let g = DMatrix::identity(4, 4);
        let mut j = DMatrix::zeros(4, 4);
        j[(0, 2)] = 1.0;
        let b = columns(4, &[e(4, 0), e(4, 1)]);
        assert!(matches!(
            offblock_invariant(&j, &g, &b, 1e-8),
            Err(GeoError::NotSelfAdjoint { .. })
        ));
    }

    fn random_instance(rng: &mut ChaCha8Rng, n: usize, l: usize) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
        let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let g = &a * a.transpose() + DMatrix::identity(n, n);
        let s = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let s = &s + s.transpose();
        // G J symmetric
        let j = crate::manifold::inverse_spd(&g).unwrap() * s;
        let vs: Vec<_> = (0..l).map(|_| DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0))).collect();
        let b = columns(n, &gram_schmidt_g(&g, &vs).unwrap());
        (j, g, b)
    }

    #[test]
    fn oracle_never_exceeds_invariant_and_converges() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let (j, g, b) = random_instance(&mut rng, 5, 2);
            let exact = offblock_invariant(&j, &g, &b, 1e-10).unwrap().value;
            let mut last_gap = f64::INFINITY;
            for d in [100, 1000, 10000] {
                let o = oracle::offblock_oracle(&j, &g, &b, d);
                assert!(o <= exact + 1e-12);
                let gap = exact - o;
                assert!(gap <= last_gap + 1e-15);
                last_gap = gap;
            }
            assert!(last_gap < 1e-4 * exact.max(1.0));
        }
    }

    #[test]
    fn flat_and_round_planes_have_zero_defect() {
        let torus = make_model(&ModelDescriptor::new("torus", 4)).unwrap();
        let sphere = make_model(&ModelDescriptor::new("sphere", 4)).unwrap();
        let x = DVector::from_vec(vec![0.3, -0.4, 0.2, 0.5]);
        for field in [&torus, &sphere] {
            for l in [2, 3] {
                let vs: Vec<_> = (0..l)
                    .map(|k| DVector::from_fn(4, |i, _| (((i + 1) * (k + 2)) as f64).sin()))
                    .collect();
                let plane = TangentPlane::from_span(field, x.clone(), &vs).unwrap();
                let r = plane_defect(field, &plane).unwrap();
                assert!(r.defect < 1e-8, "{}", r.defect);
            }
        }
    }

    #[test]
    fn random_trig_defect_matches_dense_oracle() {
        let field = make_model(&ModelDescriptor::new("random-trig", 4).with_seed(7)).unwrap();
        let x = DVector::from_vec(vec![1.1, 2.3, 0.4, 5.0]);
        let data = riemann_tensor(&field, &x).unwrap();
        for l in [2, 3] {
            let vs: Vec<_> = (0..l)
                .map(|k| DVector::from_fn(4, |i, _| (((i + 2) * (k + 1) * (k + 1)) as f64).cos()))
                .collect();
            let plane = TangentPlane::from_span(&field, x.clone(), &vs).unwrap();
            let r = plane_defect(&field, &plane).unwrap();
            assert!(r.defect > 0.0);

            // dense oracle over v, each with the literal off-block oracle
            let dense = r.meta.grid_points * 10;
            let mut best: f64 = 0.0;
            for c in hemisphere_grid(l, dense, 5) {
                let v = plane.basis() * c;
                let j = jacobi_operator(&data, &v).unwrap();
                best = best.max(oracle::offblock_oracle(&j, &data.metric, plane.basis(), 400));
            }
            assert!(best <= r.defect + 1e-12);
            assert!(r.defect - best < 1e-4, "{} vs {}", r.defect, best);

            // re-evaluating at vstar reproduces the value
            let v = DVector::from_vec(r.vstar.clone());
            let j = jacobi_operator(&data, &v).unwrap();
            let again = offblock_invariant(&j, &data.metric, plane.basis(), 1e-8).unwrap().value;
            assert!((again - r.defect).abs() < 1e-12);
        }
    }

    #[derive(Debug)]
    struct Scaled(MetricField, f64);

    impl crate::manifold::MetricModel for Scaled {
        fn chart(&self) -> &crate::manifold::Chart {
            self.0.chart()
        }
        fn eval(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
            Ok(self.0.metric_at(x)? * self.1)
        }
        fn has_analytic_jet(&self) -> bool {
            true
        }
        fn analytic_jet(&self, x: &DVector<f64>) -> Result<crate::manifold::MetricJet> {
            let mut jet = self.0.jet(x)?;
            jet.value *= self.1;
            jet.first.iter_mut().for_each(|m| *m *= self.1);
            jet.second.iter_mut().for_each(|m| *m *= self.1);
            Ok(jet)
        }
    }

    #[test]
    fn defect_scales_inversely_with_metric_scale() {
        let base = make_model(&ModelDescriptor::new("random-trig", 4).with_seed(3)).unwrap();
        let scaled = MetricField::from_model(Scaled(base.clone(), 4.0));
        let x = DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0]);
        for axes in [[0, 2], [1, 3]] {
            let plane = TangentPlane::coordinate(&base, x.clone(), &axes).unwrap();
            let d = plane_defect(&base, &plane).unwrap().defect;
            let plane4 = plane.reorthonormalize(&scaled).unwrap();
            let d4 = plane_defect(&scaled, &plane4).unwrap().defect;
            assert!((d4 - d / 4.0).abs() < 1e-8, "{d4} {d}");
        }
    }

    #[test]
    fn hemisphere_grids_are_unit_and_normalized() {
        for l in [2, 3, 4, 5] {
            let grid = hemisphere_grid(l, 50, 0);
            assert_eq!(grid.len(), 50);
            for c in &grid {
                assert!((c.norm() - 1.0).abs() < 1e-14);
                assert!(!sign_flip(c));
            }
        }
    }

    #[test]
    fn report_json_shape() {
        let torus = make_model(&ModelDescriptor::new("torus", 4)).unwrap();
        let plane = TangentPlane::coordinate(&torus, DVector::zeros(4), &[0, 1]).unwrap();
        let r = plane_defect(&torus, &plane).unwrap();
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        for key in ["point", "basis", "defect", "vstar", "witness", "meta"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        let back: DefectReport = serde_json::from_value(v).unwrap();
        assert_eq!(back, r);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn invariant_dominates_oracle(seed in 0u64..10_000, l in 2usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (j, g, b) = random_instance(&mut rng, 5, l);
            let exact = offblock_invariant(&j, &g, &b, 1e-10).unwrap().value;
            prop_assert!(oracle::offblock_oracle(&j, &g, &b, 300) <= exact + 1e-12);
        }

        #[test]
        fn defect_is_basis_independent(seed in 0u64..10_000, angle in 0.0f64..6.28) {
            let field = make_model(&ModelDescriptor::new("random-trig", 4).with_seed(seed % 50)).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = DVector::from_fn(4, |_, _| rng.gen_range(0.0..6.0));
            let vs: Vec<_> = (0..2).map(|_| DVector::from_fn(4, |_, _| rng.gen_range(-1.0..1.0))).collect();
            let plane = TangentPlane::from_span(&field, x.clone(), &vs).unwrap();
            let (c, s) = (angle.cos(), angle.sin());
            let b = plane.basis();
            let rotated = columns(4, &[
                b.column(0) * c + b.column(1) * s,
                b.column(1) * c - b.column(0) * s,
            ]);
            let other = TangentPlane::new(&field, x, rotated).unwrap();
            let d1 = plane_defect(&field, &plane).unwrap().defect;
            let d2 = plane_defect(&field, &other).unwrap().defect;
            prop_assert!((d1 - d2).abs() < 1e-10, "{} {}", d1, d2);
        }
    }
}
