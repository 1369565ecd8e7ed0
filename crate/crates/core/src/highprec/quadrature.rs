use rug::{Assign, Float};

use super::{PrecisionContext, Scalar};

/// Gauss–Legendre rule on `[-1, 1]`, nodes in ascending order.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<Scalar>,
    pub weights: Vec<Scalar>,
}

impl GaussRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn bits(&self) -> u32 {
        self.nodes.first().map_or(0, Float::prec)
    }

    /// Applies the rule on `[a, b]`.
    pub fn integrate<F>(&self, a: &Scalar, b: &Scalar, mut f: F) -> Scalar
    where
        F: FnMut(&Scalar) -> Scalar,
    {
        let bits = self.bits();
        let half = Float::with_val(bits, b - a) / 2u32;
        let mid = Float::with_val(bits, a + b) / 2u32;
        let mut sum = Float::new(bits);
        let mut x = Float::new(bits);
        for (node, weight) in self.nodes.iter().zip(&self.weights) {
            x.assign(&half * node);
            x += &mid;
            let fx = f(&x);
            sum += weight * fx;
        }
        sum * half
    }

    /// Same as [`integrate`](Self::integrate) with the interval split into
    /// `panels` equal pieces.
    pub fn integrate_panels<F>(&self, a: &Scalar, b: &Scalar, panels: usize, mut f: F) -> Scalar
    where
        F: FnMut(&Scalar) -> Scalar,
    {
        let bits = self.bits();
        let width = Float::with_val(bits, b - a) / panels as u32;
        let mut total = Float::new(bits);
        for p in 0..panels {
            let lo = Float::with_val(bits, a + Float::with_val(bits, &width * p as u32));
            let hi = if p + 1 == panels {
                Float::with_val(bits, b)
            } else {
                Float::with_val(bits, a + Float::with_val(bits, &width * (p + 1) as u32))
            };
            total += self.integrate(&lo, &hi, &mut f);
        }
        total
    }
}

/// `(P_k(x), P_{k-1}(x))` from the three-term recurrence.
fn legendre_pair(k: usize, x: &Scalar) -> (Scalar, Scalar) {
    let bits = x.prec();
    let mut prev = Float::with_val(bits, 1);
    let mut cur = x.clone();
    for j in 1..k {
        // (j+1) P_{j+1} = (2j+1) x P_j − j P_{j−1}
        let mut next = Float::with_val(bits, x * &cur);
        next *= (2 * j + 1) as u32;
        next -= Float::with_val(bits, &prev * j as u32);
        next /= (j + 1) as u32;
        prev = std::mem::replace(&mut cur, next);
    }
    (cur, prev)
}

/// `k`-point Gauss–Legendre nodes and weights at context precision, by
/// Newton iteration on `P_k` seeded from the classical cosine estimate.
pub fn gauss_legendre(ctx: &PrecisionContext, k: usize) -> GaussRule {
    assert!(k >= 1, "Gauss-Legendre rule needs at least one node");
    let out_bits = ctx.bits();
    let bits = out_bits + 32;
    let half = k / 2;
    let mut pos_nodes = Vec::with_capacity(half + 1);
    let mut pos_weights = Vec::with_capacity(half + 1);
    // Roots in descending order x_0 > x_1 > ... > 0.
    for i in 0..k.div_ceil(2) {
        let guess = (std::f64::consts::PI * (i as f64 + 0.75) / (k as f64 + 0.5)).cos();
        let mut x = Float::with_val(bits, guess);
        if k % 2 == 1 && i == k / 2 {
            x = Float::new(bits);
        }
        let mut converged = 0;
        for _ in 0..200 {
            let (p, pm1) = legendre_pair(k, &x);
            let dp = derivative(k, &x, &p, &pm1);
            let dx = Float::with_val(bits, &p / &dp);
            x -= &dx;
            let small = dx.is_zero() || dx.get_exp().map_or(true, |e| e < -(bits as i32) + 8);
            if small {
                converged += 1;
                if converged >= 2 {
                    break;
                }
            }
        }
        let (p, pm1) = legendre_pair(k, &x);
        let dp = derivative(k, &x, &p, &pm1);
        // w = 2 / ((1 − x²) P'_k(x)²)
        let one_minus = Float::with_val(bits, 1u32 - Float::with_val(bits, x.square_ref()));
        let w = Float::with_val(bits, 2u32 / (one_minus * Float::with_val(bits, dp.square_ref())));
        pos_nodes.push(Float::with_val(out_bits, &x));
        pos_weights.push(Float::with_val(out_bits, &w));
    }
    let mut nodes = Vec::with_capacity(k);
    let mut weights = Vec::with_capacity(k);
    for (x, w) in pos_nodes.iter().zip(&pos_weights) {
        if x.is_zero() {
            continue;
        }
        nodes.push(Float::with_val(out_bits, -x));
        weights.push(w.clone());
    }
    for (x, w) in pos_nodes.iter().zip(&pos_weights).rev() {
        nodes.push(x.clone());
        weights.push(w.clone());
    }
    GaussRule { nodes, weights }
}

fn derivative(k: usize, x: &Scalar, p: &Scalar, pm1: &Scalar) -> Scalar {
    let bits = x.prec();
    // P'_k = k (x P_k − P_{k−1}) / (x² − 1)
    let num = Float::with_val(bits, x * p) - pm1;
    let den = Float::with_val(bits, x.square_ref()) - 1u32;
    num * k as u32 / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::highprec::agreeing_digits;

    #[test]
    fn two_point_rule() {
        let ctx = PrecisionContext::new(50).unwrap();
        let rule = gauss_legendre(&ctx, 2);
        let inv_sqrt3 = ctx.scalar(3).sqrt().recip();
        assert!(agreeing_digits(&rule.nodes[1], &inv_sqrt3, 0.0) >= 55);
        assert_eq!(rule.nodes[0], -rule.nodes[1].clone());
        for w in &rule.weights {
            assert!(agreeing_digits(w, &ctx.one(), 0.0) >= 55);
        }
    }

    #[test]
    fn odd_rule_has_center_node() {
        let ctx = PrecisionContext::new(40).unwrap();
        let rule = gauss_legendre(&ctx, 5);
        assert_eq!(rule.order(), 5);
        assert!(rule.nodes[2].is_zero());
        let total: Scalar = rule.weights.iter().fold(ctx.zero(), |acc, w| acc + w);
        assert!(agreeing_digits(&total, &ctx.scalar(2), 0.0) >= 45);
        // ascending
        for pair in rule.nodes.windows(2) {
            assert!(pair[0] < pair[1]);
        }
    }

    #[test]
    fn panels_integrate_exp() {
        let ctx = PrecisionContext::new(60).unwrap();
        let rule = gauss_legendre(&ctx, 16);
        let a = ctx.zero();
        let b = ctx.scalar(3);
        let v = rule.integrate_panels(&a, &b, 4, |x| Float::with_val(x.prec(), x.exp_ref()));
        let exact = ctx.scalar(3).exp() - 1u32;
        assert!(agreeing_digits(&v, &exact, 0.0) >= 50);
    }
}
