//! Christoffel symbols of the first kind and the (0,4) curvature tensor in a
//! coordinate frame.
//!
//! Conventions: `Γ_{jk,l} = g(∇_{∂j}∂k, ∂l)` and
//! `R_{ijkl} = g(R(∂i,∂j)∂k, ∂l)` with `R(X,Y) = [∇X,∇Y] - ∇[X,Y]`, so that
//! `R(x,y,y,x)` is the sectional-curvature numerator and the Jacobi operator
//! is `R_v = R(·, v)v`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{GeoError, Result};
use crate::manifold::{g_inner, inverse_spd, MetricField, MetricJet};

/// Dense `n³` array.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tensor3 {
    n: usize,
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n * n],
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[(i * self.n + j) * self.n + k]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        self.data[(i * self.n + j) * self.n + k] = v;
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Dense `n⁴` array.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tensor4 {
    n: usize,
    data: Vec<f64>,
}

impl Tensor4 {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n * n * n],
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.data[((i * self.n + j) * self.n + k) * self.n + l]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, l: usize, v: f64) {
        self.data[((i * self.n + j) * self.n + k) * self.n + l] = v;
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scale(&mut self, factor: f64) {
        self.data.iter_mut().for_each(|v| *v *= factor);
    }

    /// Max entrywise difference.
    pub fn max_diff(&self, other: &Tensor4) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Components in a new frame: `T'_{abcd} = T_{ijkl} B_ia B_jb B_kc B_ld`.
    pub fn in_frame(&self, b: &DMatrix<f64>) -> Tensor4 {
        let n = self.n;
        let mut cur = self.clone();
        // contract one slot at a time
        for slot in 0..4 {
            let mut next = Tensor4::zeros(n);
            for idx in 0..n * n * n * n {
                let mut ix = [idx / (n * n * n), (idx / (n * n)) % n, (idx / n) % n, idx % n];
                let target = ix[slot];
                let mut acc = 0.0;
                for m in 0..n {
                    ix[slot] = m;
                    acc += cur.get(ix[0], ix[1], ix[2], ix[3]) * b[(m, target)];
                }
                next.data[idx] = acc;
            }
            cur = next;
        }
        cur
    }
}

/// Curvature quantities at one point.
#[derive(Clone, Debug, Serialize)]
pub struct CurvatureData {
    pub point: DVector<f64>,
    pub metric: DMatrix<f64>,
    pub inverse: DMatrix<f64>,
    /// `gamma.get(i, j, k) = Γ_{ij,k}`
    pub gamma: Tensor3,
    /// `gamma_partial.get(i, j, k, l) = ∂_i Γ_{jk,l}`
    pub gamma_partial: Tensor4,
    pub riemann: Tensor4,
}

impl CurvatureData {
    pub fn dim(&self) -> usize {
        self.point.len()
    }

    /// Build from a metric jet.
    pub fn from_jet(point: DVector<f64>, jet: &MetricJet) -> Result<Self> {
        let n = jet.dim();
        let inverse = inverse_spd(&jet.value).ok_or_else(|| GeoError::NotPositiveDefinite {
            point: point.iter().copied().collect(),
        })?;
        let gamma = christoffel_from_jet(jet);
        let mut gamma_partial = Tensor4::zeros(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let v = 0.5
                            * (jet.second(i, j)[(k, l)] + jet.second(i, k)[(j, l)]
                                - jet.second(i, l)[(j, k)]);
                        gamma_partial.set(i, j, k, l, v);
                    }
                }
            }
        }
        // raised last index: Γ_{ij}^τ = g^{τσ} Γ_{ij,σ}
        let mut raised = Tensor3::zeros(n);
        for i in 0..n {
            for j in 0..n {
                for t in 0..n {
                    let mut acc = 0.0;
                    for s in 0..n {
                        acc += inverse[(t, s)] * gamma.get(i, j, s);
                    }
                    raised.set(i, j, t, acc);
                }
            }
        }
        let mut riemann = Tensor4::zeros(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let mut quad = 0.0;
                        for t in 0..n {
                            quad += raised.get(i, k, t) * gamma.get(j, l, t)
                                - raised.get(j, k, t) * gamma.get(i, l, t);
                        }
                        let v = gamma_partial.get(i, j, k, l) - gamma_partial.get(j, i, k, l) + quad;
                        riemann.set(i, j, k, l, v);
                    }
                }
            }
        }
        Ok(Self {
            point,
            metric: jet.value.clone(),
            inverse,
            gamma,
            gamma_partial,
            riemann,
        })
    }

    /// `R(a, b, c, d)` for arbitrary vectors.
    pub fn riemann_on(&self, a: &DVector<f64>, b: &DVector<f64>, c: &DVector<f64>, d: &DVector<f64>) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            if a[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                if b[j] == 0.0 {
                    continue;
                }
                for k in 0..n {
                    if c[k] == 0.0 {
                        continue;
                    }
                    for l in 0..n {
                        acc += self.riemann.get(i, j, k, l) * a[i] * b[j] * c[k] * d[l];
                    }
                }
            }
        }
        acc
    }

    /// `L_{bd} = R(E_b, v, v, E_d)`: the Jacobi operator with its output index lowered.
    pub fn jacobi_lowered(&self, v: &DVector<f64>) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |b, d| {
            let mut acc = 0.0;
            for c in 0..n {
                for e in 0..n {
                    acc += self.riemann.get(b, c, e, d) * v[c] * v[e];
                }
            }
            acc
        })
    }

    /// Copy with the curvature tensor negated (test fixture for sign bugs).
    pub fn negated(&self) -> Self {
        let mut out = self.clone();
        out.riemann.scale(-1.0);
        out
    }
}

fn christoffel_from_jet(jet: &MetricJet) -> Tensor3 {
    let n = jet.dim();
    let mut gamma = Tensor3::zeros(n);
    for j in 0..n {
        for k in 0..n {
            for l in 0..n {
                let v = 0.5 * (jet.first[j][(k, l)] + jet.first[k][(j, l)] - jet.first[l][(j, k)]);
                gamma.set(j, k, l, v);
            }
        }
    }
    gamma
}

/// `Γ_{ij,k}` at `x`.
pub fn christoffel_first_kind(field: &MetricField, x: &DVector<f64>) -> Result<Tensor3> {
    Ok(christoffel_from_jet(&field.jet(x)?))
}

/// `Γ_{ij}^k = g^{kl} Γ_{ij,l}`.
pub fn christoffel_second_kind(field: &MetricField, x: &DVector<f64>) -> Result<Tensor3> {
    let data = riemann_tensor(field, x)?;
    let n = data.dim();
    let mut out = Tensor3::zeros(n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let v = (0..n).map(|l| data.inverse[(k, l)] * data.gamma.get(i, j, l)).sum();
                out.set(i, j, k, v);
            }
        }
    }
    Ok(out)
}

pub fn riemann_tensor(field: &MetricField, x: &DVector<f64>) -> Result<CurvatureData> {
    let x = field.chart().reduce(x)?;
    let jet = field.jet(&x)?;
    CurvatureData::from_jet(x, &jet)
}

/// Matrix `J` with `R(E_b, v)v = Σ_a J[a, b] E_a`.
pub fn jacobi_operator(data: &CurvatureData, v: &DVector<f64>) -> Result<DMatrix<f64>> {
    if v.len() != data.dim() {
        return Err(GeoError::DimensionMismatch {
            expected: data.dim(),
            got: v.len(),
        });
    }
    if v.iter().all(|c| *c == 0.0) {
        return Err(GeoError::ZeroVector);
    }
    let lowered = data.jacobi_lowered(v);
    Ok(&data.inverse * lowered.transpose())
}

/// Sectional curvature of `span{x, y}`.
pub fn sectional(data: &CurvatureData, x: &DVector<f64>, y: &DVector<f64>) -> Result<f64> {
    let g = &data.metric;
    let (xx, yy, xy) = (g_inner(g, x, x), g_inner(g, y, y), g_inner(g, x, y));
    let area = xx * yy - xy * xy;
    if !(area > 1e-14 * xx * yy) {
        return Err(GeoError::DegeneratePlane);
    }
    Ok(data.riemann_on(x, y, y, x) / area)
}

/// Largest violation of `Γ_{ij,k} = Γ_{ji,k}`, the pair (anti)symmetries of
/// `R` and the first Bianchi identity.
pub fn symmetry_residual(data: &CurvatureData) -> f64 {
    let n = data.dim();
    let r = |i, j, k, l| data.riemann.get(i, j, k, l);
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                worst = worst.max((data.gamma.get(i, j, k) - data.gamma.get(j, i, k)).abs());
                for l in 0..n {
                    let v = r(i, j, k, l);
                    worst = worst
                        .max((v + r(j, i, k, l)).abs())
                        .max((v + r(i, j, l, k)).abs())
                        .max((v - r(k, l, i, j)).abs())
                        .max((v + r(j, k, i, l) + r(k, i, j, l)).abs());
                }
            }
        }
    }
    worst
}

/// `max |G·J - (G·J)ᵀ|`.
pub fn self_adjointness_residual(g: &DMatrix<f64>, j: &DMatrix<f64>) -> f64 {
    let gj = g * j;
    (&gj - gj.transpose()).amax()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::models::{FlatTorus, ProductMetric, StereographicSphere};
    use crate::manifold::{make_model, DerivativeBackend, ModelDescriptor};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_point(rng: &mut ChaCha8Rng, n: usize, w: f64) -> DVector<f64> {
        DVector::from_fn(n, |_, _| rng.gen_range(-w..w))
    }

    #[test]
    fn flat_torus_has_no_curvature() {
        let torus = MetricField::from_model(FlatTorus::new(4, 1.0).unwrap());
        let x = DVector::from_vec(vec![0.1, 0.2, 0.3, 0.4]);
        assert_eq!(christoffel_first_kind(&torus, &x).unwrap().max_abs(), 0.0);
        let data = riemann_tensor(&torus, &x).unwrap();
        assert_eq!(data.riemann.max_abs(), 0.0);
        assert_eq!(symmetry_residual(&data), 0.0);
        let v = DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(jacobi_operator(&data, &v).unwrap(), DMatrix::zeros(4, 4));
        let w = DVector::from_vec(vec![0.0, 1.0, 0.0, 0.0]);
        assert_eq!(sectional(&data, &v, &w).unwrap(), 0.0);
    }

    #[test]
    fn sphere_christoffel_vanishes_at_origin() {
        let sphere = MetricField::from_model(StereographicSphere::new(4, 1.0, 2.0).unwrap());
        let gamma = christoffel_first_kind(&sphere, &DVector::zeros(4)).unwrap();
        assert_eq!(gamma.max_abs(), 0.0);
    }

    #[test]
    fn round_sphere_constant_curvature_and_jacobi() {
        let sphere = MetricField::from_model(StereographicSphere::new(4, 1.0, 2.0).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let x = random_point(&mut rng, 4, 1.5);
            let data = riemann_tensor(&sphere, &x).unwrap();
            assert!(symmetry_residual(&data) < 1e-10);
            let a = random_point(&mut rng, 4, 1.0);
            let b = random_point(&mut rng, 4, 1.0);
            assert!((sectional(&data, &a, &b).unwrap() - 1.0).abs() < 1e-6);

            // unit v: J w = w - g(w, v) v
            let v = &a / g_inner(&data.metric, &a, &a).sqrt();
            let j = jacobi_operator(&data, &v).unwrap();
            let w = random_point(&mut rng, 4, 1.0);
            let expected = &w - &v * g_inner(&data.metric, &w, &v);
            assert!((&j * &w - expected).amax() < 1e-6);
            assert!(self_adjointness_residual(&data.metric, &j) < 1e-10);
            assert!((&j * &v).amax() < 1e-10);
        }
    }

    #[test]
    fn product_of_sphere_and_torus() {
        let s2 = MetricField::from_model(StereographicSphere::new(2, 1.0, 2.0).unwrap());
        let t2 = MetricField::from_model(FlatTorus::new(2, 1.0).unwrap());
        let product = MetricField::from_model(ProductMetric::new(s2, t2));
        let x = DVector::from_vec(vec![0.4, -0.7, 0.2, 0.9]);
        let data = riemann_tensor(&product, &x).unwrap();
        let e = |i: usize| DVector::from_fn(4, |k, _| if k == i { 1.0 } else { 0.0 });
        assert!((sectional(&data, &e(0), &e(1)).unwrap() - 1.0).abs() < 1e-6);
        for (a, b) in [(0, 2), (0, 3), (1, 2), (1, 3), (2, 3)] {
            assert!(sectional(&data, &e(a), &e(b)).unwrap().abs() < 1e-6);
        }
    }

    #[test]
    fn hyperbolic_warped_product() {
        let field = make_model(&ModelDescriptor::new("warped", 4).with_param("rate", 0.5)).unwrap();
        let data = riemann_tensor(&field, &DVector::from_vec(vec![0.3, 0.1, -0.2, 0.5])).unwrap();
        let e = |i: usize| DVector::from_fn(4, |k, _| if k == i { 1.0 } else { 0.0 });
        for (a, b) in [(0, 1), (1, 2), (0, 3), (2, 3)] {
            assert!((sectional(&data, &e(a), &e(b)).unwrap() + 0.25).abs() < 1e-10);
        }
    }

    #[test]
    fn random_trig_christoffel_matches_finite_difference_route() {
        let field = make_model(&ModelDescriptor::new("random-trig", 4).with_seed(7)).unwrap();
        let fd = field.with_backend(DerivativeBackend::richardson(1e-3)).unwrap();
        let x = DVector::from_vec(vec![0.7, 1.3, 2.9, 4.1]);
        let a = christoffel_first_kind(&field, &x).unwrap();
        let b = christoffel_first_kind(&fd, &x).unwrap();
        let diff = a.data.iter().zip(&b.data).fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
        assert!(diff < 1e-8, "diff {diff}");
    }

    #[test]
    fn jacobi_matches_tensor_contraction() {
        let field = make_model(&ModelDescriptor::new("random-trig", 5).with_param("amplitude", 0.04).with_seed(11)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let x = DVector::from_fn(5, |_, _| rng.gen_range(0.0..6.0));
            let data = riemann_tensor(&field, &x).unwrap();
            let v = random_point(&mut rng, 5, 1.0);
            let w = random_point(&mut rng, 5, 1.0);
            let u = random_point(&mut rng, 5, 1.0);
            let j = jacobi_operator(&data, &v).unwrap();
            let lhs = g_inner(&data.metric, &(&j * &w), &u);
            let rhs = data.riemann_on(&w, &v, &v, &u);
            assert!((lhs - rhs).abs() < 1e-10);
            assert!(self_adjointness_residual(&data.metric, &j) < 1e-8);
        }
    }

    #[test]
    fn zero_vector_and_degenerate_plane() {
        let torus = MetricField::from_model(FlatTorus::new(4, 1.0).unwrap());
        let data = riemann_tensor(&torus, &DVector::zeros(4)).unwrap();
        assert!(matches!(
            jacobi_operator(&data, &DVector::zeros(4)),
            Err(GeoError::ZeroVector)
        ));
        let v = DVector::from_vec(vec![1.0, 2.0, 0.0, 0.0]);
        assert!(matches!(
            sectional(&data, &v, &(&v * 3.0)),
            Err(GeoError::DegeneratePlane)
        ));
    }

    #[test]
    fn finite_difference_symmetry_residual_bound() {
        let sphere = MetricField::from_model(StereographicSphere::new(4, 1.0, 2.0).unwrap());
        let fd = sphere.with_backend(DerivativeBackend::central(1e-4)).unwrap();
        let data = riemann_tensor(&fd, &DVector::from_vec(vec![0.3, -0.2, 0.5, 0.1])).unwrap();
        assert!(symmetry_residual(&data) < 1e-5);
    }

    #[test]
    fn frame_change_matches_direct_contraction() {
        let sphere = MetricField::from_model(StereographicSphere::new(4, 1.0, 2.0).unwrap());
        let data = riemann_tensor(&sphere, &DVector::from_vec(vec![0.3, -0.2, 0.5, 0.1])).unwrap();
        let b = DMatrix::from_fn(4, 4, |i, j| ((i * 4 + j) as f64 * 0.37).sin());
        let t = data.riemann.in_frame(&b);
        let col = |k: usize| b.column(k).into_owned();
        let direct = data.riemann_on(&col(1), &col(0), &col(0), &col(2));
        assert!((t.get(1, 0, 0, 2) - direct).abs() < 1e-12);
    }

    #[test]
    fn ellipsoid_matches_gauss_equation() {
        use crate::manifold::models::EllipsoidGraph;
        let model = EllipsoidGraph::new(&[1.0, 1.3, 0.8, 1.1, 2.0], 0.9).unwrap();
        let field = MetricField::from_model(model.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let x = random_point(&mut rng, 4, 0.3);
            let data = riemann_tensor(&field, &x).unwrap();
            let (_, du, hu, _) = model.height_jet(&x);
            let w = 1.0 + du.norm_squared();
            let mut worst: f64 = 0.0;
            for i in 0..4 {
                for j in 0..4 {
                    for k in 0..4 {
                        for l in 0..4 {
                            let gauss = (hu[(i, l)] * hu[(j, k)] - hu[(i, k)] * hu[(j, l)]) / w;
                            worst = worst.max((data.riemann.get(i, j, k, l) - gauss).abs());
                        }
                    }
                }
            }
            assert!(worst < 1e-10, "{worst}");
        }
    }

    #[test]
    fn ellipsoid_pole_curvature() {
        let field = make_model(
            &ModelDescriptor::new("ellipsoid", 3).with_param("semi_axes", vec![1.0, 1.0, 1.0, 2.0]),
        )
        .unwrap();
        let data = riemann_tensor(&field, &DVector::zeros(3)).unwrap();
        let e = |i: usize| DVector::from_fn(3, |k, _| if k == i { 1.0 } else { 0.0 });
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            assert!((sectional(&data, &e(a), &e(b)).unwrap() - 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn scaling_the_metric_scales_curvature() {
        let unit = MetricField::from_model(StereographicSphere::new(4, 1.0, 2.0).unwrap());
        let big = MetricField::from_model(StereographicSphere::new(4, 2.0, 2.0).unwrap());
        let x = DVector::from_vec(vec![0.2, 0.1, -0.4, 0.3]);
        let a = riemann_tensor(&unit, &x).unwrap();
        let b = riemann_tensor(&big, &x).unwrap();
        // g -> 4g: R_{ijkl} -> 4 R_{ijkl}, K -> K/4
        let mut scaled = a.riemann.clone();
        scaled.scale(4.0);
        assert!(scaled.max_diff(&b.riemann) < 1e-10);
        let u = DVector::from_vec(vec![1.0, 0.5, 0.0, 0.2]);
        let v = DVector::from_vec(vec![0.0, 1.0, -1.0, 0.3]);
        assert!((sectional(&b, &u, &v).unwrap() - 0.25).abs() < 1e-10);
        let ka = sectional(&a, &u, &v).unwrap();
        // same plane, different basis
        let u2 = &u * 2.0 + &v;
        let v2 = &v * -0.5 + &u * 0.3;
        assert!((sectional(&a, &u2, &v2).unwrap() - ka).abs() < 1e-12);
    }

    #[test]
    fn curvature_is_a_tensor_under_linear_charts() {
        let field = make_model(&ModelDescriptor::new("random-trig", 4).with_seed(3)).unwrap();
        let p = DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0]);
        let frame = DMatrix::from_fn(4, 4, |i, j| if i == j { 1.0 } else { 0.1 * (i + 2 * j) as f64 });
        let chart = crate::manifold::linear_chart_with_frame(&field, &p, frame.clone()).unwrap();
        let inner = riemann_tensor(&chart, &DVector::zeros(4)).unwrap();
        let outer = riemann_tensor(&field, &p).unwrap();
        assert!(inner.riemann.max_diff(&outer.riemann.in_frame(&frame)) < 1e-10);

        let g = field.metric_at(&p).unwrap();
        let quad: Vec<_> = (0..4).map(|k| frame.column(k).into_owned()).collect();
        let quad = crate::manifold::gram_schmidt_g(&g, &quad).unwrap();
        let adapted = crate::manifold::linear_adapted_chart(&field, &p, &quad).unwrap();
        let inner = riemann_tensor(&adapted, &DVector::zeros(4)).unwrap();
        let e = |i: usize| DVector::from_fn(4, |k, _| if k == i { 1.0 } else { 0.0 });
        for (a, b) in [(0, 1), (0, 2), (1, 3), (2, 3)] {
            let k_in = sectional(&inner, &e(a), &e(b)).unwrap();
            let k_out = sectional(&outer, &quad[a], &quad[b]).unwrap();
            assert!((k_in - k_out).abs() < 1e-8);
        }
    }

    #[test]
    fn jacobi_self_adjoint_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let fields = [
            make_model(&ModelDescriptor::new("random-trig", 4).with_seed(1)).unwrap(),
            make_model(&ModelDescriptor::new("ellipsoid", 4)).unwrap(),
            make_model(&ModelDescriptor::new("sphere", 4)).unwrap(),
            make_model(&ModelDescriptor::new("warped", 4)).unwrap(),
        ];
        for k in 0..100 {
            let field = &fields[k % fields.len()];
            let chart = field.chart();
            let x = DVector::from_fn(4, |i, _| {
                let (lo, hi) = (chart.lower()[i], chart.upper()[i]);
                let (lo, hi) = if lo.is_finite() { (lo, hi) } else { (0.0, 1.0) };
                lo + (hi - lo) * rng.gen_range(0.05..0.95)
            });
            let data = riemann_tensor(field, &x).unwrap();
            let v = random_point(&mut rng, 4, 1.0);
            let j = jacobi_operator(&data, &v).unwrap();
            assert!(self_adjointness_residual(&data.metric, &j) < 1e-8);
            assert!(symmetry_residual(&data) < 1e-8);
        }
    }
}

