use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::bump::BumpPair;
use super::cutoff::Cutoff;
use crate::error::{GeoError, Result};

/// Value, gradient and Hessian of a scalar function.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarJet {
    pub value: f64,
    pub grad: DVector<f64>,
    pub hess: DMatrix<f64>,
}

impl ScalarJet {
    fn zero(n: usize) -> Self {
        Self {
            value: 0.0,
            grad: DVector::zeros(n),
            hess: DMatrix::zeros(n, n),
        }
    }
}

/// `f_i(y) = χ(y)·h_i(y₁)` in adapted coordinates, where `h_i` is a bump
/// pair built with the internal parameter `eps_tilde`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FPair {
    pub k: f64,
    pub eps: f64,
    pub eps_tilde: f64,
    pub bump: BumpPair,
    pub cutoff: Cutoff,
}

const MAX_HALVINGS: usize = 40;

impl FPair {
    /// Starts at `ε̃ = ε/(2M)` and halves until the sampled bounds hold in
    /// dimension `n`.
    pub fn build(k: f64, eps: f64, cutoff: Cutoff, n: usize) -> Result<Self> {
        let mut eps_tilde = eps / (2.0 * cutoff.m);
        for _ in 0..MAX_HALVINGS {
            let pair = Self::with_eps_tilde(k, eps, eps_tilde, cutoff)?;
            if pair.check(n).holds(k, eps) {
                return Ok(pair);
            }
            eps_tilde *= 0.5;
        }
        Err(GeoError::FPairConstruction {
            attempts: MAX_HALVINGS,
        })
    }

    /// No validation of the sampled bounds; used when rebuilding a stored pair.
    pub fn with_eps_tilde(k: f64, eps: f64, eps_tilde: f64, cutoff: Cutoff) -> Result<Self> {
        Ok(Self {
            k,
            eps,
            eps_tilde,
            bump: BumpPair::new(k, eps_tilde)?,
            cutoff,
        })
    }

    pub fn support_radius(&self) -> f64 {
        self.cutoff.outer()
    }

    /// Jets of `f₁` and `f₂` at `y`.
    pub fn eval(&self, y: &DVector<f64>) -> [ScalarJet; 2] {
        let n = y.len();
        if y.norm() >= self.cutoff.outer() {
            return [ScalarJet::zero(n), ScalarJet::zero(n)];
        }
        let (chi, dchi, hchi) = self.cutoff.eval(y);
        let hs = self.bump.eval(y[0]);
        hs.map(|[h, h1, h2]| {
            let mut grad = &dchi * h;
            grad[0] += chi * h1;
            let mut hess = &hchi * h;
            for j in 0..n {
                hess[(0, j)] += h1 * dchi[j];
                hess[(j, 0)] += h1 * dchi[j];
            }
            hess[(0, 0)] += chi * h2;
            ScalarJet {
                value: chi * h,
                grad,
                hess,
            }
        })
    }

    /// Deterministic sample: the `y₁` axis, three radial rays and seeded
    /// points in a ball slightly larger than the support.
    pub fn sample_points(&self, n: usize) -> Vec<DVector<f64>> {
        let outer = self.cutoff.outer() * 1.2;
        let mut pts = Vec::new();
        let axis_n = 4001;
        for k in 0..axis_n {
            let t = -outer + 2.0 * outer * k as f64 / (axis_n - 1) as f64;
            pts.push(DVector::from_fn(n, |i, _| if i == 0 { t } else { 0.0 }));
        }
        let dirs = [
            DVector::from_fn(n, |i, _| if i == 1 { 1.0 } else { 0.0 }),
            DVector::from_fn(n, |i, _| if i < 2 { 0.5f64.sqrt() } else { 0.0 }),
            DVector::from_fn(n, |_, _| 1.0 / (n as f64).sqrt()),
        ];
        for d in &dirs {
            for k in 0..1000 {
                pts.push(d * (outer * k as f64 / 999.0));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0xf1a7);
        while pts.len() < axis_n + 3000 + 4000 {
            let y = DVector::from_fn(n, |_, _| rng.gen_range(-outer..outer));
            if y.norm() < outer {
                pts.push(y);
            }
        }
        pts
    }

    /// Sampled versions of the four bounds.
    pub fn check(&self, n: usize) -> FPairCheck {
        let mut c = FPairCheck {
            inner_min_second: f64::INFINITY,
            max_second: 0.0,
            max_other_second: 0.0,
            max_c1: 0.0,
            nonzero_outside: 0,
            samples: 0,
        };
        let inner = self.cutoff.rho;
        let outer = self.cutoff.outer();
        for y in self.sample_points(n) {
            c.samples += 1;
            let r = y.norm();
            let [f1, f2] = self.eval(&y);
            if r <= inner {
                let m = f1.hess[(0, 0)].abs().max(f2.hess[(0, 0)].abs());
                c.inner_min_second = c.inner_min_second.min(m);
            }
            for f in [&f1, &f2] {
                c.max_second = c.max_second.max(f.hess.amax());
                let mut other = f.hess.clone();
                other[(0, 0)] = 0.0;
                c.max_other_second = c.max_other_second.max(other.amax());
                c.max_c1 = c.max_c1.max(f.value.abs()).max(f.grad.amax());
                if r >= outer && (f.value != 0.0 || f.grad.amax() != 0.0 || f.hess.amax() != 0.0) {
                    c.nonzero_outside += 1;
                }
            }
        }
        c
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FPairCheck {
    /// Smallest `max(|∂₁∂₁f₁|, |∂₁∂₁f₂|)` on the inner ball.
    pub inner_min_second: f64,
    /// Largest second partial anywhere.
    pub max_second: f64,
    /// Largest second partial other than `∂₁∂₁`.
    pub max_other_second: f64,
    /// Largest `|f|` or `|∂f|`.
    pub max_c1: f64,
    pub nonzero_outside: usize,
    pub samples: usize,
}

impl FPairCheck {
    pub fn holds(&self, k: f64, eps: f64) -> bool {
        self.inner_min_second > 2.0 * k
            && self.max_second <= 4.0 * k
            && self.max_other_second < eps
            && self.max_c1 < eps
            && self.nonzero_outside == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_pair_satisfies_bounds() {
        let cutoff = Cutoff::new(0.15, 0.1).unwrap();
        let f = FPair::build(10.0, 0.1, cutoff, 4).unwrap();
        let c = f.check(4);
        assert!(c.holds(10.0, 0.1), "{c:?}");
        assert!(f.eps_tilde <= 0.1 / (2.0 * cutoff.m));
    }

    #[test]
    fn center_second_derivatives() {
        let cutoff = Cutoff::new(0.2, 0.2).unwrap();
        let f = FPair::build(5.0, 0.1, cutoff, 4).unwrap();
        let a = f.bump.amplitude() / (f.bump.eta * f.bump.eta);
        let [f1, f2] = f.eval(&DVector::zeros(4));
        assert_eq!(f1.hess[(0, 0)], 0.0);
        assert!((f2.hess[(0, 0)] + a).abs() < 1e-12 * a);
        let y = DVector::from_vec(vec![0.5 * std::f64::consts::PI * f.bump.eta, 0.0, 0.0, 0.0]);
        let [f1, _] = f.eval(&y);
        assert!((f1.hess[(0, 0)] + a).abs() < 1e-9 * a);
    }

    #[test]
    fn jets_match_differences_in_transition() {
        let cutoff = Cutoff::new(0.2, 0.2).unwrap();
        let f = FPair::with_eps_tilde(3.0, 0.1, 0.05, cutoff).unwrap();
        let y = DVector::from_vec(vec![0.21, 0.1, -0.05, 0.02]);
        let h = 1e-7;
        let base = f.eval(&y);
        for i in 0..4 {
            let mut p = y.clone();
            p[i] += h;
            let mut m = y.clone();
            m[i] -= h;
            let (fp, fm) = (f.eval(&p), f.eval(&m));
            for k in 0..2 {
                let d = (fp[k].value - fm[k].value) / (2.0 * h);
                assert!((d - base[k].grad[i]).abs() < 1e-6);
                let col = (&fp[k].grad - &fm[k].grad) / (2.0 * h);
                assert!((col - base[k].hess.column(i)).amax() < 1e-4 * (1.0 + base[k].hess.amax()));
            }
        }
    }

    #[test]
    fn vanishes_outside_support() {
        let cutoff = Cutoff::new(0.2, 0.1).unwrap();
        let f = FPair::build(10.0, 0.1, cutoff, 5).unwrap();
        let y = DVector::from_vec(vec![0.3, 0.0, 0.0, 0.0, 0.0]);
        let [a, b] = f.eval(&y);
        assert_eq!(a.value, 0.0);
        assert_eq!(b.hess, DMatrix::zeros(5, 5));
    }
}
