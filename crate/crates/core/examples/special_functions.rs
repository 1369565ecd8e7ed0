//! The multiprecision special functions at 100 digits, each compared with
//! an independent evaluation.

use modgen::highprec::{agreeing_digits, arcoth, bessel_k_quarter, erf, format_sig, gauss_legendre, PrecisionContext};
use modgen::validation::oracles;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ctx = PrecisionContext::new(100)?;
    let hi = ctx.scaled(3);

    let x = ctx.one() + ctx.pow10(-50);
    let a = arcoth(&ctx, &x)?;
    println!("arcoth(1 + 1e-50) = {}", format_sig(&a, 40));
    println!("  agrees with 3x-precision log formula to {} digits", agreeing_digits(&a, &oracles::arcoth_oracle(&ctx, &x), 0.0).min(100));
    match arcoth(&ctx, &ctx.scalar(0.5)) {
        Err(e) => println!("arcoth(0.5): {e}"),
        Ok(_) => unreachable!("inside the forbidden band"),
    }

    for z in [1u32, 50] {
        let z = ctx.scalar(z);
        let k = bessel_k_quarter(&ctx, &z)?;
        let oracle = oracles::bessel_k_integral(&hi, &hi.scalar(0.25), &hi.round(&z));
        println!(
            "K_1/4({}) = {}  ({} digits vs integral representation)",
            z.to_f64(),
            format_sig(&k, 30),
            agreeing_digits(&k, &oracle, 0.0).min(100)
        );
    }

    let e = erf(&ctx, &ctx.one());
    println!("erf(1) = {}  ({} digits vs alternating series)", format_sig(&e, 30), agreeing_digits(&e, &oracles::erf_oracle(&ctx, &ctx.one()), 0.0).min(100));

    let (lo, up) = (-ctx.one(), ctx.one());
    let exact = ctx.one().exp() - (-ctx.one()).exp();
    for k in [10, 20, 40] {
        let rule = gauss_legendre(&ctx, k);
        let v = rule.integrate(&lo, &up, |x| x.clone().exp());
        println!("{k:>2}-point Gauss-Legendre on e^x: {} digits", agreeing_digits(&v, &exact, 0.0).min(100));
    }
    Ok(())
}
