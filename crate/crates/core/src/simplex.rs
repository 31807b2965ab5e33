//! Nelder–Mead minimization for small unconstrained problems.

use nalgebra::DVector;

#[derive(Clone, Copy, Debug)]
pub struct NelderMead {
    /// Edge length of the initial simplex.
    pub step: f64,
    /// Stop when the spread of simplex values is below `ftol_abs + ftol_rel·|f_best|`.
    pub ftol_abs: f64,
    pub ftol_rel: f64,
    /// Stop when every vertex is within `xtol` of the best one.
    pub xtol: f64,
    pub max_iter: usize,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            step: 0.1,
            ftol_abs: 1e-15,
            ftol_rel: 1e-13,
            xtol: 1e-12,
            max_iter: 500,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Minimum {
    pub x: DVector<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
}

impl NelderMead {
    pub fn minimize<F>(&self, mut f: F, x0: &DVector<f64>) -> Minimum
    where
        F: FnMut(&DVector<f64>) -> f64,
    {
        let n = x0.len();
        let mut evals = 0usize;
        let mut eval = |x: &DVector<f64>, evals: &mut usize| {
            *evals += 1;
            let v = f(x);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        };

        let mut pts: Vec<DVector<f64>> = Vec::with_capacity(n + 1);
        pts.push(x0.clone());
        for i in 0..n {
            let mut p = x0.clone();
            p[i] += self.step;
            pts.push(p);
        }
        let mut vals: Vec<f64> = pts.iter().map(|p| eval(p, &mut evals)).collect();

        let mut iter = 0;
        while iter < self.max_iter {
            // stable sort keeps earlier vertices first on ties
            let mut order: Vec<usize> = (0..=n).collect();
            order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
            pts = order.iter().map(|&i| pts[i].clone()).collect();
            vals = order.iter().map(|&i| vals[i]).collect();

            let spread = vals[n] - vals[0];
            let reach = pts[1..]
                .iter()
                .map(|p| (p - &pts[0]).amax())
                .fold(0.0, f64::max);
            if spread <= self.ftol_abs + self.ftol_rel * vals[0].abs() || reach <= self.xtol {
                break;
            }
            iter += 1;

            let centroid = pts[..n].iter().fold(DVector::zeros(n), |acc, p| acc + p) / n as f64;
            let worst = &pts[n];
            let reflected = &centroid + (&centroid - worst);
            let fr = eval(&reflected, &mut evals);

            if fr < vals[0] {
                let expanded = &centroid + (&centroid - worst) * 2.0;
                let fe = eval(&expanded, &mut evals);
                if fe < fr {
                    pts[n] = expanded;
                    vals[n] = fe;
                } else {
                    pts[n] = reflected;
                    vals[n] = fr;
                }
                continue;
            }
            if fr < vals[n - 1] {
                pts[n] = reflected;
                vals[n] = fr;
                continue;
            }
            let (candidate, fc) = if fr < vals[n] {
                let c = &centroid + (&reflected - &centroid) * 0.5;
                let fc = eval(&c, &mut evals);
                (c, fc)
            } else {
                let c = &centroid + (worst - &centroid) * 0.5;
                let fc = eval(&c, &mut evals);
                (c, fc)
            };
            if fc < vals[n].min(fr) {
                pts[n] = candidate;
                vals[n] = fc;
                continue;
            }
            for i in 1..=n {
                pts[i] = &pts[0] + (&pts[i] - &pts[0]) * 0.5;
                vals[i] = eval(&pts[i], &mut evals);
            }
        }

        let best = (0..=n)
            .min_by(|&a, &b| vals[a].total_cmp(&vals[b]))
            .unwrap_or(0);
        Minimum {
            x: pts[best].clone(),
            value: vals[best],
            iterations: iter,
            evaluations: evals,
        }
    }
}
