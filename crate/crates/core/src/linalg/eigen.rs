use rayon::prelude::*;
use rug::{Assign, Float};

use super::{mul_transpose_symmetric, LinalgError, Matrix, SymMatrix};
use crate::highprec::{HighPrecError, PrecisionContext, Scalar};

/// Spectral factorization `M = Q·diag(λ)·Qᵀ` with ascending eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomp {
    /// Orthogonal matrix whose columns are the eigenvectors.
    pub q: Matrix,
    /// Eigenvalues in ascending order, ties broken by original index.
    pub lambda: Vec<Scalar>,
}

impl EigenDecomp {
    pub fn dim(&self) -> usize {
        self.lambda.len()
    }

    /// `‖QᵀQ − I‖_max`.
    pub fn orthogonality_residual(&self) -> Scalar {
        let qt = self.q.transpose();
        let gram = mul_transpose_symmetric(&qt, &qt).expect("square factor");
        let bits = gram.bits();
        let id = SymMatrix::identity(self.dim(), bits);
        super::residual_max_abs(&gram.to_dense(), &id.to_dense()).expect("same shape")
    }

    /// `‖Q·diag(λ)·Qᵀ − M‖_max`.
    pub fn reconstruction_residual(&self, source: &SymMatrix) -> Scalar {
        let rebuilt = spectral_apply(self, |_, x| Ok(x.clone())).expect("identity is total");
        super::residual_max_abs(&rebuilt.to_dense(), &source.to_dense()).expect("same shape")
    }

    pub fn min_eigenvalue(&self) -> &Scalar {
        &self.lambda[0]
    }

    pub fn max_eigenvalue(&self) -> &Scalar {
        &self.lambda[self.lambda.len() - 1]
    }
}

struct Reflector {
    start: usize,
    v: Vec<Scalar>,
    beta: Scalar,
}

/// Householder reduction of a symmetric matrix to tridiagonal form.
/// Returns `(d, e, Q)` with `M = Q·T·Qᵀ`, `T` having diagonal `d` and
/// sub-diagonal `e`.
fn tridiagonalize(m: &SymMatrix) -> (Vec<Scalar>, Vec<Scalar>, Matrix) {
    let n = m.dim();
    let bits = m.bits();
    // Working copy of the lower triangle, row-major.
    let mut a: Vec<Vec<Scalar>> = (0..n)
        .map(|i| (0..=i).map(|j| m.get(i, j).clone()).collect())
        .collect();
    let mut d = vec![Float::new(bits); n];
    let mut e = vec![Float::new(bits); n.saturating_sub(1)];
    let mut reflectors = Vec::new();

    for k in 0..n.saturating_sub(2) {
        let start = k + 1;
        let len = n - start;
        let mut v: Vec<Scalar> = (start..n).map(|i| a[i][k].clone()).collect();
        let mut norm2 = Float::new(bits);
        for x in &v {
            norm2 += x * x;
        }
        d[k] = a[k][k].clone();
        if norm2.is_zero() {
            e[k] = Float::new(bits);
            continue;
        }
        let norm = norm2.clone().sqrt();
        // alpha takes the sign opposite to x0 so v0 = x0 − alpha does not cancel.
        let alpha = if v[0].is_sign_negative() {
            norm.clone()
        } else {
            -norm.clone()
        };
        v[0] -= &alpha;
        // vᵀv = 2·norm·(norm + |x0|) = 2 (norm² − alpha·x0)
        let mut vtv = Float::new(bits);
        for x in &v {
            vtv += x * x;
        }
        let beta = Float::with_val(bits, 2u32 / &vtv);

        // p = β·A22·v over the trailing block (rows/cols start..n).
        let p: Vec<Scalar> = (0..len)
            .into_par_iter()
            .map(|ii| {
                let i = start + ii;
                let mut acc = Float::new(bits);
                for (jj, vj) in v.iter().enumerate() {
                    let j = start + jj;
                    let aij = if j <= i { &a[i][j] } else { &a[j][i] };
                    acc += aij * vj;
                }
                acc * &beta
            })
            .collect();
        let mut pv = Float::new(bits);
        for (pi, vi) in p.iter().zip(&v) {
            pv += pi * vi;
        }
        let kfac = Float::with_val(bits, &beta * &pv) / 2u32;
        let w: Vec<Scalar> = p
            .iter()
            .zip(&v)
            .map(|(pi, vi)| Float::with_val(bits, pi - Float::with_val(bits, &kfac * vi)))
            .collect();
        // A22 −= v wᵀ + w vᵀ on the lower triangle.
        a[start..]
            .par_iter_mut()
            .enumerate()
            .for_each(|(ii, row)| {
                let mut t = Float::new(bits);
                for jj in 0..=ii {
                    t.assign(&v[ii] * &w[jj]);
                    t += &w[ii] * &v[jj];
                    row[start + jj] -= &t;
                }
            });
        e[k] = alpha;
        reflectors.push(Reflector { start, v, beta });
    }
    if n >= 2 {
        d[n - 2] = a[n - 2][n - 2].clone();
        e[n - 2] = a[n - 1][n - 2].clone();
    }
    d[n - 1] = a[n - 1][n - 1].clone();

    // Backward accumulation Q = H_0 (H_1 (… H_{n−3})).
    let mut q = Matrix::identity(n, bits);
    for r in reflectors.iter().rev() {
        let cols: Vec<usize> = (r.start..n).collect();
        let s: Vec<Scalar> = cols
            .par_iter()
            .map(|&c| {
                let mut acc = Float::new(bits);
                for (ii, vi) in r.v.iter().enumerate() {
                    acc += vi * q.get(r.start + ii, c);
                }
                acc * &r.beta
            })
            .collect();
        let data = q.data_mut();
        data[r.start * n..]
            .par_chunks_mut(n)
            .enumerate()
            .for_each(|(ii, row)| {
                let vi = &r.v[ii];
                for (cc, sc) in s.iter().enumerate() {
                    row[r.start + cc] -= vi * sc;
                }
            });
    }
    (d, e, q)
}

struct Rotation {
    k: usize,
    c: Scalar,
    s: Scalar,
}

/// Applies a batch of column rotations to every row of `q`. Rows are
/// independent, so the parallel split does not affect the result.
fn apply_rotations(q: &mut Matrix, rotations: &[Rotation]) {
    let n = q.cols();
    let bits = q.get(0, 0).prec();
    q.data_mut().par_chunks_mut(n).for_each(|row| {
        let mut t1 = Float::new(bits);
        let mut t2 = Float::new(bits);
        for rot in rotations {
            let (x, y) = (&row[rot.k], &row[rot.k + 1]);
            // new x = c x + s y; new y = c y − s x
            t1.assign(&rot.c * x);
            t1 += &rot.s * y;
            t2.assign(&rot.c * y);
            t2 -= &rot.s * x;
            std::mem::swap(&mut row[rot.k], &mut t1);
            std::mem::swap(&mut row[rot.k + 1], &mut t2);
        }
    });
}

/// Full symmetric eigendecomposition: Householder tridiagonalization
/// followed by implicit QR with Wilkinson shifts. Deflation when
/// `|e_i| < 10^{−digits}·(|d_i| + |d_{i+1}|)`.
pub fn sym_eigen(ctx: &PrecisionContext, m: &SymMatrix) -> Result<EigenDecomp, LinalgError> {
    let n = m.dim();
    let bits = m.bits();
    let (mut d, mut e, mut q) = tridiagonalize(m);
    let tol = Float::with_val(bits, ctx.tolerance(0));
    let budget = 60 * n.max(1);
    let mut sweeps = 0usize;

    let mut scratch = Float::new(bits);
    loop {
        // Deflate negligible couplings.
        for i in 0..n.saturating_sub(1) {
            scratch.assign(d[i].abs_ref());
            if d[i + 1].is_sign_negative() {
                scratch -= &d[i + 1];
            } else {
                scratch += &d[i + 1];
            }
            scratch *= &tol;
            if e[i].cmp_abs(&scratch) != Some(std::cmp::Ordering::Greater) {
                e[i] = Float::new(bits);
            }
        }
        // Bottom-most unreduced block [lo, hi].
        let Some(hi) = (0..n.saturating_sub(1)).rev().find(|&i| !e[i].is_zero()).map(|i| i + 1)
        else {
            break;
        };
        let mut lo = hi - 1;
        while lo > 0 && !e[lo - 1].is_zero() {
            lo -= 1;
        }
        if sweeps >= budget {
            let worst = e.iter().fold(Float::new(bits), |acc, x| {
                let ax = Float::with_val(bits, x.abs_ref());
                if ax > acc {
                    ax
                } else {
                    acc
                }
            });
            return Err(LinalgError::NonConvergence {
                sweeps,
                residual: worst.to_string_radix(10, Some(10)),
            });
        }
        sweeps += 1;
        let rotations = qr_sweep(&mut d, &mut e, lo, hi, bits);
        apply_rotations(&mut q, &rotations);
    }

    // Ascending order, ties by original index.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        d[i].partial_cmp(&d[j])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    let lambda = order.iter().map(|&i| d[i].clone()).collect();
    let q = Matrix::from_fn(n, n, |r, c| q.get(r, order[c]).clone());
    Ok(EigenDecomp { q, lambda })
}

/// One implicit symmetric QR step with Wilkinson shift on the block
/// `[lo, hi]` of the tridiagonal `(d, e)`; returns the rotations to apply to
/// the eigenvector matrix.
fn qr_sweep(d: &mut [Scalar], e: &mut [Scalar], lo: usize, hi: usize, bits: u32) -> Vec<Rotation> {
    // Wilkinson shift from the trailing 2×2 block.
    let delta = Float::with_val(bits, &d[hi - 1] - &d[hi]) / 2u32;
    let e2 = Float::with_val(bits, e[hi - 1].square_ref());
    let root = (Float::with_val(bits, delta.square_ref()) + &e2).sqrt();
    let denom = if delta.is_sign_negative() {
        Float::with_val(bits, &delta - &root)
    } else {
        Float::with_val(bits, &delta + &root)
    };
    let mu = if denom.is_zero() {
        d[hi].clone()
    } else {
        Float::with_val(bits, &d[hi] - Float::with_val(bits, &e2 / &denom))
    };

    let mut x = Float::with_val(bits, &d[lo] - &mu);
    let mut z = e[lo].clone();
    let mut rotations = Vec::with_capacity(hi - lo);
    for k in lo..hi {
        let r = Float::with_val(bits, x.hypot_ref(&z));
        let (c, s) = if r.is_zero() {
            (Float::with_val(bits, 1), Float::new(bits))
        } else {
            (Float::with_val(bits, &x / &r), Float::with_val(bits, &z / &r))
        };
        if k > lo {
            e[k - 1] = r;
        }
        let dk = d[k].clone();
        let dk1 = d[k + 1].clone();
        let ek = e[k].clone();
        let cc = Float::with_val(bits, c.square_ref());
        let ss = Float::with_val(bits, s.square_ref());
        let cs = Float::with_val(bits, &c * &s);
        let two_cs_e = Float::with_val(bits, &cs * &ek) * 2u32;
        // d_k' = c²d_k + 2cs e_k + s²d_{k+1}
        d[k] = Float::with_val(bits, &cc * &dk) + &two_cs_e + Float::with_val(bits, &ss * &dk1);
        // d_{k+1}' = s²d_k − 2cs e_k + c²d_{k+1}
        d[k + 1] = Float::with_val(bits, &ss * &dk) - &two_cs_e + Float::with_val(bits, &cc * &dk1);
        // e_k' = cs(d_{k+1} − d_k) + (c² − s²) e_k
        e[k] = Float::with_val(bits, &cs * Float::with_val(bits, &dk1 - &dk))
            + Float::with_val(bits, Float::with_val(bits, &cc - &ss) * &ek);
        if k + 1 < hi {
            z = Float::with_val(bits, &s * &e[k + 1]);
            e[k + 1] *= &c;
            x = e[k].clone();
        }
        rotations.push(Rotation { k, c, s });
    }
    rotations
}

/// Functional calculus `Q·diag(φ(λ))·Qᵀ`. `phi` receives the eigenvalue
/// index and value; a domain error is reported with both.
pub fn spectral_apply<F>(e: &EigenDecomp, phi: F) -> Result<SymMatrix, LinalgError>
where
    F: Fn(usize, &Scalar) -> Result<Scalar, HighPrecError>,
{
    let n = e.dim();
    let values = e
        .lambda
        .iter()
        .enumerate()
        .map(|(i, l)| {
            phi(i, l).map_err(|source| LinalgError::SpectralDomain {
                index: i,
                value: l.to_string_radix(10, Some(30)),
                source,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut weighted = e.q.clone();
    let data = weighted.data_mut();
    for row in data.chunks_mut(n) {
        for (x, v) in row.iter_mut().zip(&values) {
            *x *= v;
        }
    }
    mul_transpose_symmetric(&weighted, &e.q)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(60).unwrap()
    }

    fn sym(ctx: &PrecisionContext, rows: &[&[f64]]) -> SymMatrix {
        SymMatrix::from_fn(rows.len(), ctx.bits(), |i, j| ctx.scalar(rows[i][j]))
    }

    #[test]
    fn diagonal_input() {
        let c = ctx();
        let e = sym_eigen(&c, &sym(&c, &[&[3.0, 0.0], &[0.0, 2.0]])).unwrap();
        assert_eq!(e.lambda[0], 2);
        assert_eq!(e.lambda[1], 3);
        assert_eq!(e.q.get(1, 0).clone().abs(), 1);
        assert_eq!(e.q.get(0, 1).clone().abs(), 1);
    }

    #[test]
    fn two_by_two() {
        let c = ctx();
        let e = sym_eigen(&c, &sym(&c, &[&[2.0, 1.0], &[1.0, 2.0]])).unwrap();
        let tol = c.tolerance(5);
        assert!(Float::with_val(c.bits(), &e.lambda[0] - 1u32).abs() < tol);
        assert!(Float::with_val(c.bits(), &e.lambda[1] - 3u32).abs() < tol);
        // first eigenvector ∝ (1, −1)
        let sum = Float::with_val(c.bits(), e.q.get(0, 0) + e.q.get(1, 0)).abs();
        assert!(sum < tol);
    }

    #[test]
    fn one_by_one() {
        let c = ctx();
        let e = sym_eigen(&c, &sym(&c, &[&[-4.0]])).unwrap();
        assert_eq!(e.lambda[0], -4);
        assert_eq!(*e.q.get(0, 0), 1);
    }

    #[test]
    fn inverse_of_diagonal() {
        let c = ctx();
        let e = sym_eigen(&c, &sym(&c, &[&[2.0, 0.0], &[0.0, 4.0]])).unwrap();
        let inv = spectral_apply(&e, |_, x| Ok(Float::with_val(x.prec(), x.recip_ref()))).unwrap();
        assert_eq!(*inv.get(0, 0), 0.5);
        assert_eq!(*inv.get(1, 1), 0.25);
        assert!(inv.get(0, 1).is_zero());
    }

    #[test]
    fn domain_error_carries_index() {
        let c = ctx();
        let e = sym_eigen(&c, &sym(&c, &[&[2.0, 0.0], &[0.0, 0.5]])).unwrap();
        let err = spectral_apply(&e, |_, x| crate::highprec::arcoth(&c, x)).unwrap_err();
        match err {
            LinalgError::SpectralDomain { index, .. } => assert_eq!(index, 0),
            other => panic!("unexpected {other:?}"),
        }
    }
}
