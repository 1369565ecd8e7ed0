//! Functional calculus of symmetric matrices: eigendecomposition, quarter
//! powers and the arcoth of a matrix whose spectrum avoids [-1, 1].

use modgen::highprec::{format_sig, PrecisionContext};
use modgen::linalg::{inverse_residual, matmul, spectral_apply, sym_eigen, SymMatrix};
use rug::Float;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ctx = PrecisionContext::new(60)?;
    let bits = ctx.bits();
    let n = 6;
    // Discrete Helmholtz operator −∂² + m² on a small uniform grid.
    let a = SymMatrix::from_fn(n, bits, |i, j| match i - j {
        0 => ctx.scalar(2) + ctx.scalar(1) / 4u32,
        1 => ctx.scalar(-1),
        _ => ctx.zero(),
    });
    let e = sym_eigen(&ctx, &a)?;
    println!("eigenvalues of A:");
    for l in &e.lambda {
        println!("  {}", format_sig(l, 25));
    }
    println!("orthogonality residual {}", format_sig(&e.orthogonality_residual(), 3));
    println!("reconstruction residual {}", format_sig(&e.reconstruction_residual(&a), 3));

    let quarter = spectral_apply(&e, |_, x| Ok(Float::with_val(bits, x.sqrt_ref()).sqrt()))?;
    let inv_quarter = spectral_apply(&e, |_, x| Ok(Float::with_val(bits, x.sqrt_ref()).sqrt().recip()))?;
    println!(
        "|A^(1/4) A^(-1/4) - I| = {}",
        format_sig(&inverse_residual(&quarter.to_dense(), &inv_quarter.to_dense())?, 3)
    );
    let q2 = matmul(&quarter.to_dense(), &quarter.to_dense())?;
    let q4 = matmul(&q2, &q2)?;
    let diff = (0..n).map(|i| Float::with_val(bits, q4.get(i, i) - a.get(i, i)).abs()).fold(ctx.zero(), |m, d| m.max(&d));
    println!("(A^(1/4))^4 reproduces A to {}", format_sig(&diff, 3));

    // arcoth of B = A / 3 + 1 has all eigenvalues above 1.
    let b = SymMatrix::from_fn(n, bits, |i, j| {
        let v = Float::with_val(bits, a.get(i, j) / 3u32);
        if i == j { v + 1u32 } else { v }
    });
    let eb = sym_eigen(&ctx, &b)?;
    let arcoth_b = spectral_apply(&eb, |_, x| Ok(modgen::highprec::arcoth(&ctx, x)?))?;
    println!("trace arcoth(B) = {}", format_sig(&arcoth_b.trace(), 25));
    let mut direct = ctx.zero();
    for l in &eb.lambda {
        direct += modgen::highprec::arcoth(&ctx, l)?;
    }
    println!("sum of arcoth(lambda) = {}", format_sig(&direct, 25));
    Ok(())
}
