//! Sampled bounds of the oscillating bump pair and of the cut-off f-pair.

use geodefect::deformation::{BumpPair, Cutoff, FPair};

fn main() -> geodefect::Result<()> {
    println!("{:>6} {:>6} {:>12} {:>12} {:>12}", "K", "eps", "min h''/K", "max h''/K", "C1/eps");
    for k in [2.0, 10.0, 100.0] {
        for eps in [0.1, 0.01] {
            let b = BumpPair::new(k, eps)?.sample_bounds(10_000);
            println!(
                "{k:>6} {eps:>6} {:>12.4} {:>12.4} {:>12.4}",
                b.min_max_second / k,
                b.max_max_second / k,
                b.max_value.max(b.max_first) / eps
            );
        }
    }
    let cutoff = Cutoff::new(0.15, 0.1)?;
    let f = FPair::build(10.0, 0.1, cutoff, 4)?;
    let c = f.check(4);
    println!("f-pair: cutoff M = {:.1}, eps~ = {:.3e}, support radius {}", cutoff.m, f.eps_tilde, f.support_radius());
    println!(
        "  inner min/K = {:.4}, max/K = {:.4}, other second partials {:.2e}, C1 {:.2e}, nonzero outside {}",
        c.inner_min_second / 10.0,
        c.max_second / 10.0,
        c.max_other_second,
        c.max_c1,
        c.nonzero_outside
    );
    Ok(())
}
