//! Scans 2-planes over the flat torus and a random metric, builds the greedy
//! cover of low-defect planes and asks for a margin certificate.

use geodefect::defect::tau_pg;
use geodefect::manifold::{make_model, ModelDescriptor};
use geodefect::scanner::{candidate_cover, certificate_from_samples, scan, CertificateOutcome, ScanGrid};

fn main() -> geodefect::Result<()> {
    for desc in [ModelDescriptor::new("torus", 4), ModelDescriptor::new("random-trig", 4).with_seed(7)] {
        let field = make_model(&desc)?;
        let grid = ScanGrid::over_chart(&field, 2, 6, 2, 0)?;
        let samples = scan(&field, &grid)?;
        let tau = tau_pg(&field);
        let reports: Vec<_> = samples.iter().map(|s| s.report.clone()).collect();
        let cover = candidate_cover(field.chart(), &reports, tau, 0.3);
        println!(
            "{:12} {} samples, min defect {:.3e}, {} cover balls",
            desc.kind,
            samples.len(),
            samples[0].report.defect,
            cover.len()
        );
        match certificate_from_samples(&grid, &samples, tau)? {
            CertificateOutcome::Certified(c) => println!("{:12} certified margin {:.3e} > {tau:.0e}", "", c.margin),
            CertificateOutcome::Counterexample(r) => {
                println!("{:12} counterexample at {:?}, defect {:.1e}", "", r.plane.point().as_slice(), r.defect)
            }
        }
    }
    Ok(())
}
