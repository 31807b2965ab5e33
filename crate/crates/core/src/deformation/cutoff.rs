use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};

/// `ψ(t) = exp(−1/t)` for `t > 0`, with two derivatives.
fn psi(t: f64) -> [f64; 3] {
    if t <= 0.0 {
        return [0.0; 3];
    }
    let p = (-1.0 / t).exp();
    let t2 = t * t;
    [p, p / t2, p * (1.0 / (t2 * t2) - 2.0 / (t2 * t))]
}

/// Smooth step `S(t) = ψ(t)/(ψ(t) + ψ(1−t))`: 0 for `t ≤ 0`, 1 for `t ≥ 1`.
pub fn smooth_step(t: f64) -> [f64; 3] {
    if t <= 0.0 {
        return [0.0; 3];
    }
    if t >= 1.0 {
        return [1.0, 0.0, 0.0];
    }
    let [a, a1, a2] = psi(t);
    let [b, mb1, b2] = psi(1.0 - t);
    let b1 = -mb1;
    let sum = a + b;
    let num = a1 * b - a * b1;
    let s1 = num / (sum * sum);
    let s2 = (a2 * b - a * b2) / (sum * sum) - 2.0 * num * (a1 + b1) / (sum * sum * sum);
    [a / sum, s1, s2]
}

/// Radial cutoff `χ(y) = φ(|y|)` with `φ = 1` on `[0, ρ]` and `φ = 0` on
/// `[ρ + pad, ∞)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cutoff {
    pub rho: f64,
    pub pad: f64,
    /// Sampled bound on `max(|χ|, |∇χ|, |Hess χ|)`.
    pub m: f64,
}

/// Radii sampled when measuring `M`.
pub const CUTOFF_SAMPLES: usize = 10_000;

impl Cutoff {
    pub fn new(rho: f64, pad: f64) -> Result<Self> {
        if !(rho > 0.0) || !(pad > 0.0) || !rho.is_finite() || !pad.is_finite() {
            return Err(GeoError::InvalidParameter(format!(
                "cutoff radii must be positive, got ρ = {rho}, pad = {pad}"
            )));
        }
        let mut c = Self { rho, pad, m: 1.0 };
        c.m = c.measure_c2(CUTOFF_SAMPLES);
        Ok(c)
    }

    pub fn outer(&self) -> f64 {
        self.rho + self.pad
    }

    /// `φ(r), φ′(r), φ″(r)`.
    pub fn radial(&self, r: f64) -> [f64; 3] {
        if r <= self.rho {
            return [1.0, 0.0, 0.0];
        }
        if r >= self.outer() {
            return [0.0; 3];
        }
        let [s, s1, s2] = smooth_step((r - self.rho) / self.pad);
        [1.0 - s, -s1 / self.pad, -s2 / (self.pad * self.pad)]
    }

    /// `χ`, gradient and Hessian at `y`.
    pub fn eval(&self, y: &DVector<f64>) -> (f64, DVector<f64>, DMatrix<f64>) {
        let n = y.len();
        let r = y.norm();
        if r <= self.rho {
            return (1.0, DVector::zeros(n), DMatrix::zeros(n, n));
        }
        if r >= self.outer() {
            return (0.0, DVector::zeros(n), DMatrix::zeros(n, n));
        }
        let [phi, d1, d2] = self.radial(r);
        let u = y / r;
        let uu = &u * u.transpose();
        let hess = &uu * d2 + (DMatrix::identity(n, n) - &uu) * (d1 / r);
        (phi, u * d1, hess)
    }

    fn measure_c2(&self, samples: usize) -> f64 {
        let mut m: f64 = 1.0;
        for k in 0..=samples {
            let r = self.rho + self.pad * k as f64 / samples as f64;
            let [_, d1, d2] = self.radial(r);
            m = m.max(d1.abs()).max(d2.abs()).max((d1 / r).abs());
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_derivatives_match_differences() {
        let h = 1e-6;
        for t in [0.05, 0.2, 0.5, 0.77, 0.95] {
            let [_, s1, s2] = smooth_step(t);
            let d1 = (smooth_step(t + h)[0] - smooth_step(t - h)[0]) / (2.0 * h);
            let d2 = (smooth_step(t + h)[1] - smooth_step(t - h)[1]) / (2.0 * h);
            assert!((d1 - s1).abs() < 1e-6, "{t}");
            assert!((d2 - s2).abs() < 1e-5 * (1.0 + s2.abs()), "{t}");
        }
        assert_eq!(smooth_step(0.5)[0], 0.5);
    }

    #[test]
    fn exact_plateaus() {
        let c = Cutoff::new(1.0, 1.0).unwrap();
        let inside = DVector::from_vec(vec![0.3, -0.5, 0.2, 0.1]);
        let outside = DVector::from_vec(vec![1.5, 1.5, 0.0, 0.0]);
        assert_eq!(c.eval(&inside).0, 1.0);
        assert_eq!(c.eval(&outside).0, 0.0);
        for r in [0.0, 0.5, 1.0, 1.3, 1.9, 2.0, 3.0] {
            let v = c.radial(r)[0];
            assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn measured_bound_is_reproducible() {
        let a = Cutoff::new(1.0, 1.0).unwrap();
        let b = Cutoff::new(1.0, 1.0).unwrap();
        assert!(a.m.is_finite() && a.m >= 1.0);
        assert!((a.m - b.m).abs() <= 1e-12);
    }

    #[test]
    fn hessian_matches_differences() {
        let c = Cutoff::new(0.3, 0.4).unwrap();
        let y = DVector::from_vec(vec![0.25, 0.2, -0.1, 0.05]);
        let (_, g, hess) = c.eval(&y);
        let h = 1e-6;
        for i in 0..4 {
            let mut p = y.clone();
            p[i] += h;
            let mut m = y.clone();
            m[i] -= h;
            let (fp, gp, _) = c.eval(&p);
            let (fm, gm, _) = c.eval(&m);
            assert!(((fp - fm) / (2.0 * h) - g[i]).abs() < 1e-7);
            let col = (gp - gm) / (2.0 * h);
            assert!((col - hess.column(i)).amax() < 1e-6);
        }
    }
}
