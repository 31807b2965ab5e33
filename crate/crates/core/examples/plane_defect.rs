//! Partial-geodesy defect of a few planes: zero on the round sphere, positive
//! on a random trigonometric metric.

use geodefect::defect::{plane_defect, TangentPlane};
use geodefect::manifold::{make_model, ModelDescriptor};
use nalgebra::DVector;

fn main() -> geodefect::Result<()> {
    let sphere = make_model(&ModelDescriptor::new("sphere", 4))?;
    let trig = make_model(&ModelDescriptor::new("random-trig", 4).with_seed(7))?;
    let x = DVector::from_vec(vec![0.3, -0.2, 0.1, 0.4]);
    let spans = [
        vec![DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]), DVector::from_vec(vec![0.0, 1.0, 0.0, 0.0])],
        vec![DVector::from_vec(vec![1.0, 1.0, 0.0, 0.0]), DVector::from_vec(vec![0.0, 0.5, 1.0, 0.0])],
        vec![
            DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]),
            DVector::from_vec(vec![0.0, 1.0, 0.0, 0.0]),
            DVector::from_vec(vec![0.0, 0.0, 1.0, 1.0]),
        ],
    ];
    for (name, field) in [("sphere", &sphere), ("random-trig", &trig)] {
        for vs in &spans {
            let plane = TangentPlane::from_span(field, x.clone(), vs)?;
            let r = plane_defect(field, &plane)?;
            println!(
                "{name:12} l={} defect = {:.3e}  v* = {:?}",
                plane.l(),
                r.defect,
                r.vstar.iter().map(|v| format!("{v:+.3}")).collect::<Vec<_>>()
            );
        }
    }
    Ok(())
}
