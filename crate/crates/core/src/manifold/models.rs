//! Model manifolds with closed-form metric jets.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::chart::Chart;
use super::metric::{MetricField, MetricJet, MetricModel};
use crate::error::{GeoError, Result};

/// Flat metric on `[0, period)ⁿ` with periodic axes.
#[derive(Debug, Clone)]
pub struct FlatTorus {
    chart: Chart,
}

impl FlatTorus {
    pub fn new(dim: usize, period: f64) -> Result<Self> {
        Ok(Self {
            chart: Chart::torus(dim, period)?,
        })
    }
}

impl MetricModel for FlatTorus {
    fn chart(&self) -> &Chart {
        &self.chart
    }

    fn eval(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        Ok(DMatrix::identity(x.len(), x.len()))
    }

    fn has_analytic_jet(&self) -> bool {
        true
    }

    fn analytic_jet(&self, x: &DVector<f64>) -> Result<MetricJet> {
        Ok(MetricJet::zeros(x.len(), DMatrix::identity(x.len(), x.len())))
    }
}

/// Round sphere of radius `R` in the stereographic chart:
/// `g = R² · 4 / (1 + |x|²)² · δ`, restricted to `[-w, w]ⁿ`.
#[derive(Debug, Clone)]
pub struct StereographicSphere {
    chart: Chart,
    radius: f64,
}

impl StereographicSphere {
    pub fn new(dim: usize, radius: f64, half_width: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(GeoError::InvalidParameter(format!(
                "sphere radius must be positive, got {radius}"
            )));
        }
        Ok(Self {
            chart: Chart::cube(dim, half_width)?,
            radius,
        })
    }
}

impl MetricModel for StereographicSphere {
    fn chart(&self) -> &Chart {
        &self.chart
    }

    fn eval(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        let q = 1.0 + x.norm_squared();
        let phi = 4.0 * self.radius * self.radius / (q * q);
        Ok(DMatrix::identity(x.len(), x.len()) * phi)
    }

    fn has_analytic_jet(&self) -> bool {
        true
    }

    fn analytic_jet(&self, x: &DVector<f64>) -> Result<MetricJet> {
        let n = x.len();
        let r2 = self.radius * self.radius;
        let q = 1.0 + x.norm_squared();
        let phi = 4.0 * r2 / (q * q);
        let id = DMatrix::<f64>::identity(n, n);
        let mut jet = MetricJet::zeros(n, &id * phi);
        for i in 0..n {
            jet.first[i] = &id * (-16.0 * r2 * x[i] / q.powi(3));
            for j in 0..n {
                let delta = if i == j { 1.0 } else { 0.0 };
                let d2 = -16.0 * r2 * delta / q.powi(3) + 96.0 * r2 * x[i] * x[j] / q.powi(4);
                *jet.second_mut(i, j) = &id * d2;
            }
        }
        Ok(jet)
    }
}

/// Upper half of the ellipsoid `Σ xᵢ²/aᵢ² + z²/c² = 1` as the graph
/// `z = c·√(1 - Σ xᵢ²/aᵢ²)`; the metric is `δ + ∇u ∇uᵀ`.
#[derive(Debug, Clone)]
pub struct EllipsoidGraph {
    chart: Chart,
    axes: Vec<f64>,
    height: f64,
}

impl EllipsoidGraph {
    /// `semi_axes` has `n + 1` entries; the last one is the graph axis.
    /// The chart is the box `|xᵢ| ≤ fraction · aᵢ / √n`.
    pub fn new(semi_axes: &[f64], fraction: f64) -> Result<Self> {
        if semi_axes.len() < 3 {
            return Err(GeoError::InvalidParameter(
                "ellipsoid needs at least 3 semi-axes".into(),
            ));
        }
        if semi_axes.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
            return Err(GeoError::InvalidParameter(
                "ellipsoid semi-axes must be positive".into(),
            ));
        }
        if !(fraction > 0.0 && fraction < 1.0) {
            return Err(GeoError::InvalidParameter(format!(
                "domain fraction must lie in (0, 1), got {fraction}"
            )));
        }
        let n = semi_axes.len() - 1;
        let axes = semi_axes[..n].to_vec();
        let upper: Vec<f64> = axes.iter().map(|a| fraction * a / (n as f64).sqrt()).collect();
        let lower = upper.iter().map(|u| -u).collect();
        Ok(Self {
            chart: Chart::new(lower, upper)?,
            axes,
            height: semi_axes[n],
        })
    }

    /// Height function `u` with gradient, Hessian and third derivatives.
    #[allow(clippy::type_complexity)]
    pub fn height_jet(&self, x: &DVector<f64>) -> (f64, DVector<f64>, DMatrix<f64>, Vec<f64>) {
        let n = x.len();
        let c = self.height;
        let w = 1.0 - (0..n).map(|i| (x[i] / self.axes[i]).powi(2)).sum::<f64>();
        let wi: Vec<f64> = (0..n).map(|i| -2.0 * x[i] / self.axes[i].powi(2)).collect();
        let wii: Vec<f64> = (0..n).map(|i| -2.0 / self.axes[i].powi(2)).collect();
        let wij = |i: usize, j: usize| if i == j { wii[i] } else { 0.0 };
        let sw = w.sqrt();
        let u = c * sw;
        let grad = DVector::from_fn(n, |i, _| 0.5 * c * wi[i] / sw);
        let hess = DMatrix::from_fn(n, n, |i, j| {
            c * (0.5 * wij(i, j) / sw - 0.25 * wi[i] * wi[j] / (w * sw))
        });
        let mut third = vec![0.0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    third[(i * n + j) * n + k] = c
                        * (-0.25 * (wij(i, j) * wi[k] + wij(i, k) * wi[j] + wij(j, k) * wi[i])
                            / (w * sw)
                            + 0.375 * wi[i] * wi[j] * wi[k] / (w * w * sw));
                }
            }
        }
        (u, grad, hess, third)
    }
}

impl MetricModel for EllipsoidGraph {
    fn chart(&self) -> &Chart {
        &self.chart
    }

    fn eval(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        let (_, grad, _, _) = self.height_jet(x);
        Ok(DMatrix::identity(x.len(), x.len()) + &grad * grad.transpose())
    }

    fn has_analytic_jet(&self) -> bool {
        true
    }

    fn analytic_jet(&self, x: &DVector<f64>) -> Result<MetricJet> {
        let n = x.len();
        let (_, u1, u2, u3) = self.height_jet(x);
        let u3 = |i: usize, j: usize, k: usize| u3[(i * n + j) * n + k];
        let value = DMatrix::identity(n, n) + &u1 * u1.transpose();
        let mut jet = MetricJet::zeros(n, value);
        for k in 0..n {
            jet.first[k] = DMatrix::from_fn(n, n, |i, j| u2[(i, k)] * u1[j] + u1[i] * u2[(j, k)]);
            for l in 0..n {
                *jet.second_mut(k, l) = DMatrix::from_fn(n, n, |i, j| {
                    u3(i, k, l) * u1[j]
                        + u2[(i, k)] * u2[(j, l)]
                        + u2[(i, l)] * u2[(j, k)]
                        + u1[i] * u3(j, k, l)
                });
            }
        }
        Ok(jet)
    }
}

/// Warped product `dt² + e^{2·rate·t} |dx|²` on `[-w, w]ⁿ`; constant
/// curvature `-rate²`.
#[derive(Debug, Clone)]
pub struct WarpedProduct {
    chart: Chart,
    rate: f64,
}

impl WarpedProduct {
    pub fn new(dim: usize, rate: f64, half_width: f64) -> Result<Self> {
        if !rate.is_finite() {
            return Err(GeoError::InvalidParameter("warping rate must be finite".into()));
        }
        Ok(Self {
            chart: Chart::cube(dim, half_width)?,
            rate,
        })
    }
}

impl MetricModel for WarpedProduct {
    fn chart(&self) -> &Chart {
        &self.chart
    }

    fn eval(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        let w = (2.0 * self.rate * x[0]).exp();
        let n = x.len();
        Ok(DMatrix::from_fn(n, n, |i, j| match (i, j) {
            (0, 0) => 1.0,
            (i, j) if i == j => w,
            _ => 0.0,
        }))
    }

    fn has_analytic_jet(&self) -> bool {
        true
    }

    fn analytic_jet(&self, x: &DVector<f64>) -> Result<MetricJet> {
        let n = x.len();
        let w = (2.0 * self.rate * x[0]).exp();
        let fiber = |scale: f64| {
            DMatrix::from_fn(n, n, |i, j| if i == j && i > 0 { scale } else { 0.0 })
        };
        let mut jet = MetricJet::zeros(n, self.eval(x)?);
        jet.first[0] = fiber(2.0 * self.rate * w);
        *jet.second_mut(0, 0) = fiber(4.0 * self.rate * self.rate * w);
        Ok(jet)
    }
}

#[derive(Debug, Clone, PartialEq)]
struct TrigMode {
    wave: Vec<f64>,
    phase: f64,
    coeff: f64,
}

/// `g = δ + amplitude · Σ c·cos(k·x + φ)` per entry, with integer wave
/// vectors on the `2π`-periodic torus. Seeded and reproducible.
#[derive(Debug, Clone)]
pub struct RandomTrig {
    chart: Chart,
    amplitude: f64,
    // modes[i * n + j] for i <= j
    modes: Vec<Vec<TrigMode>>,
}

impl RandomTrig {
    pub fn new(dim: usize, amplitude: f64, modes: usize, max_wave: i32, seed: u64) -> Result<Self> {
        if !(amplitude >= 0.0) || !amplitude.is_finite() {
            return Err(GeoError::InvalidParameter(format!(
                "amplitude must be non-negative, got {amplitude}"
            )));
        }
        // Gershgorin: every entry deviates by at most amplitude * modes.
        if amplitude * modes as f64 * dim as f64 >= 1.0 {
            return Err(GeoError::InvalidParameter(format!(
                "amplitude {amplitude} with {modes} modes in dimension {dim} may lose positive definiteness"
            )));
        }
        if max_wave < 0 {
            return Err(GeoError::InvalidParameter("max_wave must be non-negative".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut table = vec![Vec::new(); dim * dim];
        for i in 0..dim {
            for j in i..dim {
                table[i * dim + j] = (0..modes)
                    .map(|_| TrigMode {
                        wave: (0..dim)
                            .map(|_| rng.gen_range(-max_wave..=max_wave) as f64)
                            .collect(),
                        phase: rng.gen_range(0.0..2.0 * PI),
                        coeff: rng.gen_range(-1.0..1.0),
                    })
                    .collect();
            }
        }
        Ok(Self {
            chart: Chart::torus(dim, 2.0 * PI)?,
            amplitude,
            modes: table,
        })
    }

    fn entry_modes(&self, i: usize, j: usize) -> &[TrigMode] {
        let n = self.chart.dim();
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        &self.modes[a * n + b]
    }
}

impl MetricModel for RandomTrig {
    fn chart(&self) -> &Chart {
        &self.chart
    }

    fn eval(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        let n = x.len();
        Ok(DMatrix::from_fn(n, n, |i, j| {
            let base = if i == j { 1.0 } else { 0.0 };
            base + self.amplitude
                * self
                    .entry_modes(i, j)
                    .iter()
                    .map(|m| m.coeff * (dot(&m.wave, x) + m.phase).cos())
                    .sum::<f64>()
        }))
    }

    fn has_analytic_jet(&self) -> bool {
        true
    }

    fn analytic_jet(&self, x: &DVector<f64>) -> Result<MetricJet> {
        let n = x.len();
        let mut jet = MetricJet::zeros(n, self.eval(x)?);
        for i in 0..n {
            for j in i..n {
                for m in self.entry_modes(i, j) {
                    let arg = dot(&m.wave, x) + m.phase;
                    let (s, c) = arg.sin_cos();
                    let a = self.amplitude * m.coeff;
                    for k in 0..n {
                        let d1 = -a * s * m.wave[k];
                        jet.first[k][(i, j)] += d1;
                        if i != j {
                            jet.first[k][(j, i)] += d1;
                        }
                        for l in 0..n {
                            let d2 = -a * c * m.wave[k] * m.wave[l];
                            jet.second_mut(k, l)[(i, j)] += d2;
                            if i != j {
                                jet.second_mut(k, l)[(j, i)] += d2;
                            }
                        }
                    }
                }
            }
        }
        Ok(jet)
    }
}

fn dot(a: &[f64], x: &DVector<f64>) -> f64 {
    a.iter().zip(x.iter()).map(|(p, q)| p * q).sum()
}

/// Riemannian product of two fields: block-diagonal metric on the product chart.
#[derive(Debug)]
pub struct ProductMetric {
    first: MetricField,
    second: MetricField,
    chart: Chart,
}

impl ProductMetric {
    pub fn new(first: MetricField, second: MetricField) -> Self {
        let chart = Chart::product(first.chart(), second.chart());
        Self {
            first,
            second,
            chart,
        }
    }

    fn split(&self, x: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let k = self.first.dim();
        (
            x.rows(0, k).into_owned(),
            x.rows(k, x.len() - k).into_owned(),
        )
    }
}

fn block_diag(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (k, m) = (a.nrows(), b.nrows());
    let mut out = DMatrix::zeros(k + m, k + m);
    out.view_mut((0, 0), (k, k)).copy_from(a);
    out.view_mut((k, k), (m, m)).copy_from(b);
    out
}

impl MetricModel for ProductMetric {
    fn chart(&self) -> &Chart {
        &self.chart
    }

    fn eval(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        let (a, b) = self.split(x);
        Ok(block_diag(&self.first.metric_at(&a)?, &self.second.metric_at(&b)?))
    }

    fn has_analytic_jet(&self) -> bool {
        self.first.backend().is_analytic() && self.second.backend().is_analytic()
    }

    fn analytic_jet(&self, x: &DVector<f64>) -> Result<MetricJet> {
        let (a, b) = self.split(x);
        let (ja, jb) = (self.first.jet(&a)?, self.second.jet(&b)?);
        let (k, m) = (a.len(), b.len());
        let n = k + m;
        let za = DMatrix::zeros(k, k);
        let zb = DMatrix::zeros(m, m);
        let mut jet = MetricJet::zeros(n, block_diag(&ja.value, &jb.value));
        for i in 0..n {
            jet.first[i] = if i < k {
                block_diag(&ja.first[i], &zb)
            } else {
                block_diag(&za, &jb.first[i - k])
            };
            for j in 0..n {
                *jet.second_mut(i, j) = match (i < k, j < k) {
                    (true, true) => block_diag(ja.second(i, j), &zb),
                    (false, false) => block_diag(&za, jb.second(i - k, j - k)),
                    _ => DMatrix::zeros(n, n),
                };
            }
        }
        Ok(jet)
    }
}

/// JSON model descriptor: `{type, n, params, seed}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDescriptor {
    #[serde(rename = "type")]
    pub kind: String,
    pub n: usize,
    #[serde(default)]
    pub params: Map<String, Value>,
    #[serde(default)]
    pub seed: u64,
}

impl ModelDescriptor {
    pub fn new(kind: &str, n: usize) -> Self {
        Self {
            kind: kind.to_string(),
            n,
            params: Map::new(),
            seed: 0,
        }
    }

    pub fn with_param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn number(&self, key: &str, default: f64) -> Result<f64> {
        match self.params.get(key) {
            None => Ok(default),
            Some(v) => v.as_f64().ok_or_else(|| {
                GeoError::InvalidParameter(format!("parameter `{key}` must be a number"))
            }),
        }
    }

    fn integer(&self, key: &str, default: i64) -> Result<i64> {
        match self.params.get(key) {
            None => Ok(default),
            Some(v) => v.as_i64().ok_or_else(|| {
                GeoError::InvalidParameter(format!("parameter `{key}` must be an integer"))
            }),
        }
    }

    fn check_params(&self, allowed: &[&str]) -> Result<()> {
        for key in self.params.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(GeoError::InvalidParameter(format!(
                    "model `{}` has no parameter `{key}`",
                    self.kind
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ParamDoc {
    pub name: &'static str,
    pub default: Value,
    pub doc: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct ZooEntry {
    pub name: &'static str,
    pub description: &'static str,
    pub params: Vec<ParamDoc>,
    pub seeded: bool,
}

pub const MODEL_NAMES: [&str; 5] = ["torus", "sphere", "ellipsoid", "warped", "random-trig"];

pub fn zoo() -> Vec<ZooEntry> {
    vec![
        ZooEntry {
            name: "torus",
            description: "flat torus [0, period)^n, identity metric, periodic axes",
            params: vec![ParamDoc {
                name: "period",
                default: Value::from(1.0),
                doc: "length of every periodic axis",
            }],
            seeded: false,
        },
        ZooEntry {
            name: "sphere",
            description: "round sphere in the stereographic chart, g = R^2 * 4/(1+|x|^2)^2 * I",
            params: vec![
                ParamDoc {
                    name: "radius",
                    default: Value::from(1.0),
                    doc: "sphere radius R (sectional curvature 1/R^2)",
                },
                ParamDoc {
                    name: "half_width",
                    default: Value::from(2.0),
                    doc: "chart box [-w, w]^n",
                },
            ],
            seeded: false,
        },
        ZooEntry {
            name: "ellipsoid",
            description: "upper graph chart of an ellipsoid in R^(n+1), g = I + grad(u) grad(u)^T",
            params: vec![
                ParamDoc {
                    name: "semi_axes",
                    default: Value::Null,
                    doc: "n+1 positive semi-axes, last one is the graph axis (default: 1,...,1,2)",
                },
                ParamDoc {
                    name: "fraction",
                    default: Value::from(0.9),
                    doc: "chart box |x_i| <= fraction * a_i / sqrt(n)",
                },
            ],
            seeded: false,
        },
        ZooEntry {
            name: "warped",
            description: "warped product dt^2 + exp(2 rate t)|dx|^2, curvature -rate^2",
            params: vec![
                ParamDoc {
                    name: "rate",
                    default: Value::from(1.0),
                    doc: "exponential warping rate",
                },
                ParamDoc {
                    name: "half_width",
                    default: Value::from(1.0),
                    doc: "chart box [-w, w]^n",
                },
            ],
            seeded: false,
        },
        ZooEntry {
            name: "random-trig",
            description: "identity plus seeded trigonometric perturbation on the 2*pi torus",
            params: vec![
                ParamDoc {
                    name: "amplitude",
                    default: Value::from(0.05),
                    doc: "perturbation amplitude",
                },
                ParamDoc {
                    name: "modes",
                    default: Value::from(3),
                    doc: "Fourier modes per metric entry",
                },
                ParamDoc {
                    name: "max_wave",
                    default: Value::from(2),
                    doc: "largest integer wave number per axis",
                },
            ],
            seeded: true,
        },
    ]
}

/// Build a zoo metric from its descriptor.
pub fn make_model(desc: &ModelDescriptor) -> Result<MetricField> {
    let n = desc.n;
    if n < 2 {
        return Err(GeoError::InvalidParameter(format!(
            "dimension must be at least 2, got {n}"
        )));
    }
    let field = match desc.kind.as_str() {
        "torus" => {
            desc.check_params(&["period"])?;
            MetricField::from_model(FlatTorus::new(n, desc.number("period", 1.0)?)?)
        }
        "sphere" => {
            desc.check_params(&["radius", "half_width"])?;
            MetricField::from_model(StereographicSphere::new(
                n,
                desc.number("radius", 1.0)?,
                desc.number("half_width", 2.0)?,
            )?)
        }
        "ellipsoid" => {
            desc.check_params(&["semi_axes", "fraction"])?;
            let axes = match desc.params.get("semi_axes") {
                None => {
                    let mut a = vec![1.0; n];
                    a.push(2.0);
                    a
                }
                Some(v) => serde_json::from_value::<Vec<f64>>(v.clone()).map_err(|_| {
                    GeoError::InvalidParameter("semi_axes must be an array of numbers".into())
                })?,
            };
            if axes.len() != n + 1 {
                return Err(GeoError::InvalidParameter(format!(
                    "ellipsoid in dimension {n} needs {} semi-axes, got {}",
                    n + 1,
                    axes.len()
                )));
            }
            MetricField::from_model(EllipsoidGraph::new(&axes, desc.number("fraction", 0.9)?)?)
        }
        "warped" => {
            desc.check_params(&["rate", "half_width"])?;
            MetricField::from_model(WarpedProduct::new(
                n,
                desc.number("rate", 1.0)?,
                desc.number("half_width", 1.0)?,
            )?)
        }
        "random-trig" => {
            desc.check_params(&["amplitude", "modes", "max_wave"])?;
            let modes = desc.integer("modes", 3)?;
            if modes < 0 {
                return Err(GeoError::InvalidParameter("modes must be non-negative".into()));
            }
            MetricField::from_model(RandomTrig::new(
                n,
                desc.number("amplitude", 0.05)?,
                modes as usize,
                desc.integer("max_wave", 2)? as i32,
                desc.seed,
            )?)
        }
        other => return Err(GeoError::UnknownModel(other.to_string())),
    };
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zoo_lists_all_models() {
        let names: Vec<_> = zoo().iter().map(|e| e.name).collect();
        assert_eq!(names, MODEL_NAMES);
    }

    #[test]
    fn descriptor_errors() {
        let err = make_model(&ModelDescriptor::new("klein-bottle", 4)).unwrap_err();
        assert!(matches!(err, GeoError::UnknownModel(_)));
        assert!(err.to_string().contains("random-trig"));
        assert!(make_model(&ModelDescriptor::new("torus", 1)).is_err());
        assert!(make_model(&ModelDescriptor::new("torus", 4).with_param("radius", 2.0)).is_err());
        assert!(make_model(&ModelDescriptor::new("sphere", 4).with_param("radius", -1.0)).is_err());
        assert!(make_model(
            &ModelDescriptor::new("random-trig", 4).with_param("amplitude", 0.2)
        )
        .is_err());
    }

    #[test]
    fn descriptor_json_shape() {
        let desc: ModelDescriptor = serde_json::from_str(
            r#"{"type": "random-trig", "n": 4, "params": {"amplitude": 0.05}, "seed": 7}"#,
        )
        .unwrap();
        assert_eq!(desc.kind, "random-trig");
        assert_eq!(desc.seed, 7);
        let field = make_model(&desc).unwrap();
        assert_eq!(field.dim(), 4);
        assert!(field.chart().period(0).is_some());
    }

    #[test]
    fn torus_descriptor_is_identity() {
        let field = make_model(&ModelDescriptor::new("torus", 4)).unwrap();
        let x = DVector::from_vec(vec![0.1, 0.2, 0.3, 0.4]);
        assert_eq!(field.metric_at(&x).unwrap(), DMatrix::identity(4, 4));
        assert!((0..4).all(|i| field.chart().period(i) == Some(1.0)));
    }

    #[test]
    fn sphere_descriptor_conformal_factor() {
        let field = make_model(&ModelDescriptor::new("sphere", 4)).unwrap();
        let x = DVector::from_vec(vec![0.5, -0.5, 0.25, 0.0]);
        let q = 1.0 + x.norm_squared();
        let expected = DMatrix::identity(4, 4) * (4.0 / (q * q));
        assert!((field.metric_at(&x).unwrap() - expected).amax() < 1e-15);
    }

    #[test]
    fn random_trig_is_reproducible_and_spd() {
        let desc = ModelDescriptor::new("random-trig", 4)
            .with_param("amplitude", 0.05)
            .with_seed(7);
        let a = make_model(&desc).unwrap();
        let b = make_model(&desc).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..500 {
            let x = DVector::from_fn(4, |_, _| rng.gen_range(0.0..2.0 * PI));
            let ga = a.metric_at(&x).unwrap();
            assert_eq!(ga, b.metric_at(&x).unwrap());
            assert!(ga.cholesky().is_some());
        }
    }

    #[test]
    fn ellipsoid_matches_induced_metric() {
        // independent route: Jacobianᵀ·Jacobian of the embedding
        // x ↦ (x, c·√(1 - Σ xᵢ²/aᵢ²)), Jacobian by hand
        let axes = [1.0, 1.5, 2.0, 1.2, 2.0];
        let model = EllipsoidGraph::new(&axes, 0.9).unwrap();
        let field = MetricField::from_model(model);
        let x = DVector::from_vec(vec![0.2, -0.3, 0.1, 0.15]);
        let w: f64 = 1.0 - (0..4).map(|i| (x[i] / axes[i]).powi(2)).sum::<f64>();
        let mut jac = DMatrix::<f64>::zeros(5, 4);
        for i in 0..4 {
            jac[(i, i)] = 1.0;
            jac[(4, i)] = -axes[4] * x[i] / (axes[i] * axes[i] * w.sqrt());
        }
        let induced = jac.transpose() * jac;
        assert!((field.metric_at(&x).unwrap() - induced).amax() < 1e-14);
    }
}
