use proptest::prelude::*;
use rug::ops::Pow;
use rug::Float;

use modgen::discretize::{build_grid, normalize, Scenario, TaperMode};
use modgen::highprec::{arcoth, gauss_legendre, PrecisionContext, Scalar};
use modgen::linalg::{spectral_apply, sym_eigen, SymMatrix};
use modgen::modular::{modular_from_kernel, KernelPower};
use modgen::scenario::{io, Emit, ScenarioConfig};

const DIGITS: u32 = 40;

fn ctx() -> PrecisionContext {
    PrecisionContext::new(DIGITS).unwrap()
}

fn close(a: &Scalar, b: &Scalar, tol: &Scalar) -> bool {
    let scale = Float::with_val(a.prec(), a.abs_ref()).max(&Float::with_val(a.prec(), b.abs_ref())).max(&Float::with_val(a.prec(), 1));
    Float::with_val(a.prec(), a - b).abs() <= Float::with_val(a.prec(), tol * scale)
}

/// `GᵀG + I` from small integer entries: symmetric and positive definite.
fn spd(ctx: &PrecisionContext, g: &[i8], dim: usize) -> SymMatrix {
    SymMatrix::from_fn(dim, ctx.bits(), |i, j| {
        let mut s = ctx.scalar(if i == j { 1 } else { 0 });
        for k in 0..dim {
            s += ctx.scalar(g[k * dim + i] as i32 * g[k * dim + j] as i32) / 16u32;
        }
        s
    })
}

fn scenario_strategy() -> impl Strategy<Value = Scenario> {
    prop_oneof![Just(Scenario::Wedge2d), Just(Scenario::Cone2d), Just(Scenario::Cone4d)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn grids_are_increasing_with_n_cells(
        scenario in scenario_strategy(),
        quarter in 2usize..16,
        b in 2u32..9,
        equal in any::<bool>(),
    ) {
        let ctx = ctx();
        let n = 4 * quarter;
        let taper = if equal { TaperMode::FirstEqual } else { TaperMode::FirstWider };
        let grid = build_grid(&ctx, scenario, n, &ctx.scalar(b), taper).unwrap();
        prop_assert_eq!(grid.cells(), n);
        prop_assert_eq!(grid.inside.len(), n);
        for i in 0..n {
            prop_assert!(grid.left(i) < grid.right(i), "cell {}", i);
        }
        // Every scenario puts half of its cells in the region.
        prop_assert_eq!(grid.inside.iter().filter(|&&x| x).count(), n / 2);
        prop_assert_eq!(normalize(&grid).dim(), n);
    }

    #[test]
    fn arcoth_inverts_coth(num in 1u32..4000, negative in any::<bool>()) {
        let ctx = ctx();
        let mut x = ctx.scalar(num) / 1000u32 + 1u32;
        if negative {
            x = -x;
        }
        let y = arcoth(&ctx, &x).unwrap();
        let back = y.coth();
        prop_assert!(close(&back, &x, &ctx.tolerance(5)), "{} -> {}", x.to_f64(), back.to_f64());
    }

    #[test]
    fn gauss_legendre_is_exact_on_low_degree_monomials(k in 2usize..12, lo in -5i32..5, len in 1u32..6) {
        let ctx = ctx();
        let rule = gauss_legendre(&ctx, k);
        let a = ctx.scalar(lo);
        let b = Float::with_val(ctx.bits(), &a + len);
        for p in 0..(2 * k as u32) {
            let got = rule.integrate(&a, &b, |x| Float::with_val(ctx.bits(), x.pow(p)));
            let exact = (Float::with_val(ctx.bits(), (&b).pow(p + 1)) - Float::with_val(ctx.bits(), (&a).pow(p + 1))) / (p + 1);
            prop_assert!(close(&got, &exact, &ctx.tolerance(5)), "k={} p={}", k, p);
        }
    }

    #[test]
    fn spectral_apply_preserves_trace(dim in 2usize..6, g in prop::collection::vec(-8i8..8, 36)) {
        let ctx = ctx();
        let a = spd(&ctx, &g, dim);
        let e = sym_eigen(&ctx, &a).unwrap();
        let same = spectral_apply(&e, |_, x| Ok(x.clone())).unwrap();
        prop_assert!(close(&same.trace(), &a.trace(), &ctx.tolerance(5)));
        let logs = spectral_apply(&e, |_, x| Ok(Float::with_val(x.prec(), x.ln_ref()))).unwrap();
        let sum = e.lambda.iter().fold(ctx.zero(), |acc, l| acc + Float::with_val(l.prec(), l.ln_ref()));
        prop_assert!(close(&logs.trace(), &sum, &ctx.tolerance(5)));
    }

    #[test]
    fn modular_generators_commute_with_permutations(
        half in 1usize..4,
        g in prop::collection::vec(-8i8..8, 36),
        seed in any::<u64>(),
    ) {
        // An unbalanced projector forces eigenvalues of B onto ±1.
        let dim = 2 * half;
        let ctx = ctx();
        let k = spd(&ctx, &g, dim);
        let chi: Vec<bool> = (0..dim).map(|i| i % 2 == 0).collect();
        let Ok(base) = modular_from_kernel(&ctx, &k, &chi, KernelPower::D2) else {
            return Ok(());
        };
        // Fisher–Yates driven by the seed.
        let mut perm: Vec<usize> = (0..dim).collect();
        let mut s = seed;
        for i in (1..dim).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        let kp = SymMatrix::from_fn(dim, ctx.bits(), |i, j| k.get(perm[i], perm[j]).clone());
        let chip: Vec<bool> = perm.iter().map(|&p| chi[p]).collect();
        let permuted = modular_from_kernel(&ctx, &kp, &chip, KernelPower::D2).unwrap();
        let tol = ctx.tolerance(15);
        for i in 0..dim {
            for j in 0..dim {
                prop_assert!(close(permuted.m_minus.get(i, j), base.m_minus.get(perm[i], perm[j]), &tol));
                prop_assert!(close(permuted.m_plus.get(i, j), base.m_plus.get(perm[i], perm[j]), &tol));
            }
        }
    }

    #[test]
    fn config_round_trips(
        scenario in scenario_strategy(),
        n in 8usize..512,
        mass_num in 1u32..100,
        mass_den in 1u32..9,
        ell in 0u32..2,
        digits in prop::option::of(30u32..900),
        probes in prop::option::of(prop_oneof![Just("-2:0.1:2".to_string()), Just("0.3,0.8".to_string())]),
        equal in any::<bool>(),
        emit in (any::<bool>(), any::<bool>(), any::<bool>()),
        retry in any::<bool>(),
    ) {
        let config = ScenarioConfig {
            n,
            mass: format!("{mass_num}/{mass_den}"),
            ell,
            digits,
            probes,
            taper: if equal { TaperMode::FirstEqual } else { TaperMode::FirstWider },
            emit: Emit { report_csv: emit.0, kernel_csv: emit.1, matrices: emit.2 },
            retry_precision: retry,
            out: Some("runs/x".into()),
            ..ScenarioConfig::new(scenario)
        };
        prop_assert_eq!(ScenarioConfig::parse(&config.serialize()).unwrap(), config);
    }

    #[test]
    fn matrix_files_round_trip(dim in 1usize..6, g in prop::collection::vec(-8i8..8, 36), shift in -60i32..60) {
        let ctx = ctx();
        let mut m = spd(&ctx, &g, dim);
        for i in 0..dim {
            for j in 0..=i {
                let v = Float::with_val(ctx.bits(), m.get(i, j) * ctx.pow10(shift)) / 7u32;
                m.set(i, j, v);
            }
        }
        let (back, digits) = io::decode_matrix(&io::encode_matrix(&m, DIGITS)).unwrap();
        prop_assert_eq!(digits, DIGITS);
        prop_assert_eq!(back, m);
    }
}
