//! Relative entropy of a coherent state with respect to the vacuum, for a
//! Gaussian bump of field data sliding across the wedge boundary at x = 0.
//! Deep inside the wedge it grows like 2π·(position); outside it vanishes.

use modgen::discretize::{build_grid, chi_diagonal, normalize, Scenario, TaperMode};
use modgen::highprec::PrecisionContext;
use modgen::kernels::assemble_am14_2d;
use modgen::modular::{modular_from_kernel, relative_entropy, KernelPower};
use modgen::probes::{overlaps, ProbeKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ctx = PrecisionContext::new(100)?;
    let grid = build_grid(&ctx, Scenario::Wedge2d, 64, &ctx.scalar(4), TaperMode::default())?;
    let chi = chi_diagonal(&grid);
    let basis = normalize(&grid);
    let kernel = assemble_am14_2d(&ctx, &basis, &ctx.one())?;
    let result = modular_from_kernel(&ctx, &kernel, &chi, KernelPower::D2)?;

    let sigma = ctx.scalar(6) / 32u32;
    let zeros = vec![ctx.zero(); basis.dim()];
    println!("{:>8} {:>12}", "centre", "S(f)");
    for centre in [-1.0, -0.5, -0.25, 0.0, 0.25, 0.5, 1.0] {
        let f = overlaps(&ctx, &basis, ProbeKind::Gaussian, &sigma, &ctx.scalar(centre))?;
        let s = relative_entropy(&result, &chi, &zeros, &f)?;
        println!("{centre:>8.2} {:>12.6}", s.to_f64());
    }
    Ok(())
}
