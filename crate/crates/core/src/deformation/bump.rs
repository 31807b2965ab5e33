use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};

/// `4 − δ`: midpoint of the window `(√2·2.01, 3.99)`.
pub fn four_minus_delta() -> f64 {
    0.5 * (2f64.sqrt() * 2.01 + 3.99)
}

/// The pair `h₁ = a·sin(t/η)`, `h₂ = a·cos(t/η)` with `η = ε/(4K)` and
/// `a = (4 − δ)Kη²`, so that `max_i |h_i″| ∈ ((4−δ)K/√2, (4−δ)K]` and
/// `|h_i′| ≤ (4−δ)ε/4`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BumpPair {
    pub k: f64,
    pub eps: f64,
    pub delta: f64,
    pub eta: f64,
}

/// Value, first and second derivative.
pub type Jet1 = [f64; 3];

impl BumpPair {
    pub fn new(k: f64, eps: f64) -> Result<Self> {
        if !(k > 1.0) || !k.is_finite() {
            return Err(GeoError::InvalidParameter(format!("K must exceed 1, got {k}")));
        }
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(GeoError::InvalidParameter(format!("ε must be positive, got {eps}")));
        }
        let c = four_minus_delta();
        // |h| = c·ε²/(16K) must stay below ε as well
        if eps >= 16.0 * k / c {
            return Err(GeoError::InvalidParameter(format!(
                "ε = {eps} too large for K = {k}: need ε < {:.4}",
                16.0 * k / c
            )));
        }
        Ok(Self {
            k,
            eps,
            delta: 4.0 - c,
            eta: eps / (4.0 * k),
        })
    }

    pub fn amplitude(&self) -> f64 {
        (4.0 - self.delta) * self.k * self.eta * self.eta
    }

    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.eta
    }

    /// `[h₁, h₁′, h₁″]` and `[h₂, h₂′, h₂″]` at `t`.
    pub fn eval(&self, t: f64) -> [Jet1; 2] {
        let a = self.amplitude();
        let (s, c) = (t / self.eta).sin_cos();
        let e = self.eta;
        [
            [a * s, a * c / e, -a * s / (e * e)],
            [a * c, -a * s / e, -a * c / (e * e)],
        ]
    }

    /// Sampled extremes over one period.
    pub fn sample_bounds(&self, per_period: usize) -> BumpBounds {
        let mut b = BumpBounds {
            min_max_second: f64::INFINITY,
            max_max_second: 0.0,
            max_value: 0.0,
            max_first: 0.0,
            samples: per_period,
        };
        for k in 0..per_period {
            let t = self.period() * k as f64 / per_period as f64;
            let [h1, h2] = self.eval(t);
            let m = h1[2].abs().max(h2[2].abs());
            b.min_max_second = b.min_max_second.min(m);
            b.max_max_second = b.max_max_second.max(m);
            b.max_value = b.max_value.max(h1[0].abs()).max(h2[0].abs());
            b.max_first = b.max_first.max(h1[1].abs()).max(h2[1].abs());
        }
        b
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BumpBounds {
    pub min_max_second: f64,
    pub max_max_second: f64,
    pub max_value: f64,
    pub max_first: f64,
    pub samples: usize,
}

impl BumpBounds {
    /// `2.01K < max_i|h_i″| < 3.99K` and `|h_i|, |h_i′| < ε` at every sample.
    pub fn holds(&self, k: f64, eps: f64) -> bool {
        self.min_max_second > 2.01 * k
            && self.max_max_second < 3.99 * k
            && self.max_value < eps
            && self.max_first < eps
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eta_for_reference_parameters() {
        let b = BumpPair::new(10.0, 0.1).unwrap();
        assert!((b.eta - 0.0025).abs() < 1e-18);
        let w = four_minus_delta();
        assert!(w > 2f64.sqrt() * 2.01 && w < 3.99);
    }

    #[test]
    fn sampled_bounds_hold() {
        for k in [2.0, 10.0, 100.0] {
            for eps in [0.1, 0.01] {
                let b = BumpPair::new(k, eps).unwrap();
                let s = b.sample_bounds(10_000);
                assert!(s.holds(k, eps), "{k} {eps} {s:?}");
                assert!(s.min_max_second > 20.1 * k / 10.0);
            }
        }
    }

    #[test]
    fn derivatives_match_differences() {
        let b = BumpPair::new(3.0, 0.2).unwrap();
        let h = 1e-6;
        for t in [0.0, 0.013, 0.4] {
            let [p, m, c] = [b.eval(t + h), b.eval(t - h), b.eval(t)];
            for i in 0..2 {
                let d1 = (p[i][0] - m[i][0]) / (2.0 * h);
                let d2 = (p[i][1] - m[i][1]) / (2.0 * h);
                assert!((d1 - c[i][1]).abs() < 1e-6 * (1.0 + c[i][1].abs()));
                assert!((d2 - c[i][2]).abs() < 1e-5 * (1.0 + c[i][2].abs()));
            }
        }
    }

    #[test]
    fn invalid_parameters() {
        assert!(BumpPair::new(1.0, 0.1).is_err());
        assert!(BumpPair::new(2.0, 0.0).is_err());
        assert!(BumpPair::new(2.0, 10.0).is_err());
    }
}
