//! Lists the model zoo and prints a few curvature values for each model.

use geodefect::curvature::{riemann_tensor, sectional, symmetry_residual};
use geodefect::manifold::{make_model, zoo, ModelDescriptor};
use nalgebra::DVector;

fn main() -> geodefect::Result<()> {
    let e = |i: usize| DVector::from_fn(4, |k, _| if k == i { 1.0 } else { 0.0 });
    for entry in zoo() {
        let field = make_model(&ModelDescriptor::new(entry.name, 4))?;
        let chart = field.chart();
        // a point a little off the chart center
        let x = DVector::from_fn(4, |i, _| {
            let (lo, hi) = (chart.lower()[i], chart.upper()[i]);
            if lo.is_finite() && hi.is_finite() {
                lo + (hi - lo) * (0.5 + 0.05 * i as f64)
            } else {
                0.1 * i as f64
            }
        });
        let data = riemann_tensor(&field, &x)?;
        println!("{:12} {}", entry.name, entry.description);
        println!(
            "{:12} K(e0,e1) = {:+.6}  K(e2,e3) = {:+.6}  symmetry residual = {:.1e}",
            "",
            sectional(&data, &e(0), &e(1))?,
            sectional(&data, &e(2), &e(3))?,
            symmetry_residual(&data)
        );
    }
    Ok(())
}
