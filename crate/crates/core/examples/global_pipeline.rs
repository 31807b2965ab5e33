//! Removes every sampled partially geodesic 3-plane and 2-plane of the flat
//! torus and writes the resulting metric descriptor.

use geodefect::deformation::{global_pipeline, MetricDescriptor, PipelineConfig};
use geodefect::manifold::{make_model, ModelDescriptor};

fn main() -> geodefect::Result<()> {
    let base = ModelDescriptor::new("torus", 4);
    let torus = make_model(&base)?;
    let out = global_pipeline(&torus, 2, &PipelineConfig::default())?;
    for a in &out.audit {
        println!(
            "step {:>3} l={} s={:.2e} rho={:.4} min defect {:.2e} -> {:.2e}, candidates {} -> {}",
            a.step, a.level, a.s, a.rho, a.min_defect_before, a.min_defect_after, a.candidates_before, a.candidates_after
        );
    }
    println!("status {:?}, C2 proxy {:.4}", out.status, out.cq_proxy);
    for l in &out.levels {
        println!("l={} min defect {:.3e} over {} planes (tau {:.0e})", l.l, l.min_defect, l.samples, l.tau_pg);
    }
    let path = std::env::temp_dir().join("geodefect-torus-metric.json");
    MetricDescriptor {
        base,
        deformations: out.deformations,
    }
    .save(&path)?;
    println!("metric written to {}", path.display());
    Ok(())
}
