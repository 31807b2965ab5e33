//! Symmetric finite-difference stencils for metric jets.
//!
//! First partials use `(g(x+h) - g(x-h)) / 2h`, pure second partials the
//! three-point stencil and mixed second partials the four-corner stencil, all
//! with O(h²) error. Richardson extrapolation combines steps `h` and `h/2`.

use nalgebra::{DMatrix, DVector};

use super::metric::MetricJet;
use crate::error::Result;

pub fn central_jet<F>(eval: F, x: &DVector<f64>, h: f64) -> Result<MetricJet>
where
    F: Fn(&DVector<f64>) -> Result<DMatrix<f64>>,
{
    let n = x.len();
    let at = |offsets: &[(usize, f64)]| {
        let mut y = x.clone();
        for &(axis, d) in offsets {
            y[axis] += d;
        }
        eval(&y)
    };

    let value = eval(x)?;
    let mut jet = MetricJet::zeros(n, value.clone());

    let mut plus = Vec::with_capacity(n);
    let mut minus = Vec::with_capacity(n);
    for i in 0..n {
        plus.push(at(&[(i, h)])?);
        minus.push(at(&[(i, -h)])?);
    }
    for i in 0..n {
        jet.first[i] = (&plus[i] - &minus[i]) / (2.0 * h);
        *jet.second_mut(i, i) = (&plus[i] - &value * 2.0 + &minus[i]) / (h * h);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let pp = at(&[(i, h), (j, h)])?;
            let pm = at(&[(i, h), (j, -h)])?;
            let mp = at(&[(i, -h), (j, h)])?;
            let mm = at(&[(i, -h), (j, -h)])?;
            let d = (pp - pm - mp + mm) / (4.0 * h * h);
            *jet.second_mut(j, i) = d.clone();
            *jet.second_mut(i, j) = d;
        }
    }
    Ok(jet)
}

pub fn richardson_jet<F>(eval: F, x: &DVector<f64>, h: f64) -> Result<MetricJet>
where
    F: Fn(&DVector<f64>) -> Result<DMatrix<f64>>,
{
    let coarse = central_jet(&eval, x, h)?;
    let fine = central_jet(&eval, x, 0.5 * h)?;
    let combine = |c: &DMatrix<f64>, f: &DMatrix<f64>| (f * 4.0 - c) / 3.0;
    Ok(MetricJet {
        value: fine.value.clone(),
        first: coarse
            .first
            .iter()
            .zip(&fine.first)
            .map(|(c, f)| combine(c, f))
            .collect(),
        second: coarse
            .second
            .iter()
            .zip(&fine.second)
            .map(|(c, f)| combine(c, f))
            .collect(),
    })
}
