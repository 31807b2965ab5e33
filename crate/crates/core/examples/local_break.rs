//! Sweeps the amplitude schedule for one partially geodesic plane of the flat
//! torus and reports how the invariant responds.

use geodefect::defect::TangentPlane;
use geodefect::deformation::{LocalBreaker, LocalParams};
use geodefect::manifold::{make_model, ModelDescriptor};
use nalgebra::DVector;

fn main() -> geodefect::Result<()> {
    let torus = make_model(&ModelDescriptor::new("torus", 4))?;
    let plane = TangentPlane::coordinate(&torus, DVector::from_element(4, 0.5), &[0, 1])?;
    let params = LocalParams::default();
    let breaker = LocalBreaker::new(&torus, &plane, &params)?;
    let report = breaker.sweep()?;
    println!("{} sampled planes, eps~ = {:.3e}", report.samples, report.eps_tilde);
    println!("{:>10} {:>10} {:>10} {:>10} {:>12} {:>6}", "s", "part2/Ks", "part3/Ks", "part4/Ks", "center", "pass");
    for t in &report.trials {
        let ks = params.k * t.s;
        println!(
            "{:>10.3e} {:>10.4} {:>10.4} {:>10.4} {:>12.4e} {:>6}",
            t.s,
            t.part2_min / ks,
            t.part3_max / ks,
            t.part4_max / ks,
            t.center_defect,
            t.passed()
        );
    }
    let broken = breaker.run()?;
    println!("chosen s = {:.3e}, fitted c = {:.4}", broken.spec.s, broken.report.fitted_c.unwrap_or(0.0));
    Ok(())
}
