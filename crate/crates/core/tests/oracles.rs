use modgen::discretize::{build_grid, normalize, Grid, Measure, Scenario, TaperMode};
use modgen::highprec::{agreeing_digits, bessel_k_quarter, PrecisionContext};
use modgen::kernels::{antiderivative_f, assemble_ainv_4d, assemble_am14_2d};
use modgen::linalg::SymMatrix;
use modgen::validation::oracles;

fn worst_agreement(a: &SymMatrix, b: &SymMatrix) -> u32 {
    let mut worst = u32::MAX;
    for i in 0..a.dim() {
        for j in 0..=i {
            worst = worst.min(agreeing_digits(a.get(i, j), b.get(i, j), 0.0));
        }
    }
    worst
}

#[test]
fn kernel_2d_uniform_grid_matches_bruteforce() {
    let ctx = PrecisionContext::new(50).unwrap();
    let grid = build_grid(&ctx, Scenario::Wedge2d, 8, &ctx.scalar(4), TaperMode::default()).unwrap();
    let basis = normalize(&grid);
    let m = ctx.one();
    let prod = assemble_am14_2d(&ctx, &basis, &m).unwrap();
    let oracle = oracles::kernel_2d_bruteforce(&ctx, &basis, &m).unwrap();
    assert!(worst_agreement(&prod, &oracle) >= 25);
}

#[test]
fn kernel_2d_tapered_grid_matches_bruteforce() {
    // Unequal neighbouring cells exercise every piece of the overlap length.
    let ctx = PrecisionContext::new(40).unwrap();
    let grid = build_grid(&ctx, Scenario::Cone2d, 8, &ctx.scalar(4), TaperMode::default()).unwrap();
    let basis = normalize(&grid);
    let m = ctx.scalar(3) / 2u32;
    let prod = assemble_am14_2d(&ctx, &basis, &m).unwrap();
    let oracle = oracles::kernel_2d_bruteforce(&ctx, &basis, &m).unwrap();
    assert!(worst_agreement(&prod, &oracle) >= 25);
}

#[test]
fn kernel_4d_ell0_matches_closed_form() {
    let ctx = PrecisionContext::new(50).unwrap();
    let grid = Grid {
        breakpoints: ["0", "0.5", "1", "2", "4"].iter().map(|s| ctx.parse(s).unwrap()).collect(),
        measure: Measure::RadialR2,
        inside: vec![true, true, false, false],
    };
    let basis = normalize(&grid);
    for mass in ["1", "0.05", "7"] {
        let m = ctx.parse(mass).unwrap();
        let prod = assemble_ainv_4d(&ctx, &basis, 0, &m, 64).unwrap();
        let oracle = oracles::ainv_4d_ell0_closed_form(&ctx, &basis, &m);
        assert!(worst_agreement(&prod, &oracle) >= 25, "mass {mass}");
    }
}

#[test]
fn kernel_4d_scenario_grid_matches_closed_form() {
    let ctx = PrecisionContext::new(40).unwrap();
    let grid = build_grid(&ctx, Scenario::Cone4d, 16, &ctx.scalar(4), TaperMode::default()).unwrap();
    let basis = normalize(&grid);
    let m = ctx.one();
    let prod = assemble_ainv_4d(&ctx, &basis, 0, &m, 64).unwrap();
    let oracle = oracles::ainv_4d_ell0_closed_form(&ctx, &basis, &m);
    assert!(worst_agreement(&prod, &oracle) >= 25);
}

#[test]
fn antiderivative_at_one_thirty_second_matches_romberg() {
    let ctx = PrecisionContext::new(80).unwrap();
    let x = ctx.one() / 32u32;
    let series = antiderivative_f(&ctx, &ctx.one(), &x).unwrap();
    let romberg = oracles::antiderivative_f_romberg(&ctx, &ctx.one(), &x).expect("converged");
    assert!(agreeing_digits(&series, &romberg, 0.0) >= 60);
}

#[test]
fn bessel_k_matches_integral_representation() {
    let ctx = PrecisionContext::new(60).unwrap();
    let hi = ctx.scaled(3);
    for z in ["0.01", "1", "7.5", "50", "120"] {
        let z = ctx.parse(z).unwrap();
        let k = bessel_k_quarter(&ctx, &z).unwrap();
        let oracle = oracles::bessel_k_integral(&hi, &hi.scalar(0.25), &hi.round(&z));
        assert!(agreeing_digits(&k, &oracle, 0.0) >= 55, "z = {}", z.to_f64());
    }
}
