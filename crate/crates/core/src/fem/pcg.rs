//! Conjugate gradients with a diagonal preconditioner.

use super::sparse::SparseOperator;
use crate::error::SolveError;

#[derive(Debug, Clone, Copy)]
pub struct SolveStats {
    pub iterations: usize,
    pub residual: f64,
}

/// Relative residual required of [`solve_spd`].
pub const SPD_TOLERANCE: f64 = 1e-10;

/// Solve A x = b for symmetric positive definite A to a relative residual
/// of 1e-10, capped at 10·n iterations.
pub fn solve_spd(a: &SparseOperator, b: &[f64]) -> Result<Vec<f64>, SolveError> {
    pcg(a, b, None, SPD_TOLERANCE, 10 * a.dimension()).map(|(x, _)| x)
}

/// Preconditioned CG with an optional initial guess. Convergence is declared
/// on the explicitly recomputed residual ‖b - Ax‖ ≤ tol·‖b‖, so the recursive
/// residual cannot overstate progress. Iteration order is deterministic.
pub fn pcg(
    a: &SparseOperator,
    b: &[f64],
    x0: Option<&[f64]>,
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, SolveStats), SolveError> {
    let n = a.dimension();
    assert_eq!(b.len(), n);
    let norm_b = norm(b);
    if norm_b == 0.0 {
        return Ok((
            vec![0.0; n],
            SolveStats {
                iterations: 0,
                residual: 0.0,
            },
        ));
    }
    let inv_diag: Vec<f64> = a
        .diagonal()
        .iter()
        .map(|&d| if d != 0.0 { 1.0 / d } else { 1.0 })
        .collect();

    let mut x = match x0 {
        Some(x0) => x0.to_vec(),
        None => vec![0.0; n],
    };
    let mut r = b.to_vec();
    let mut ax = vec![0.0; n];
    if x0.is_some() {
        a.matvec_into(&x, &mut ax);
        for i in 0..n {
            r[i] -= ax[i];
        }
    }
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let threshold = tol * norm_b;

    let mut residual = norm(&r);
    if residual <= threshold {
        return Ok((
            x,
            SolveStats {
                iterations: 0,
                residual: residual / norm_b,
            },
        ));
    }
    for iter in 1..=max_iter {
        a.matvec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            // Not SPD (or breakdown); report as non-convergence.
            return Err(SolveError {
                iterations: iter,
                residual: residual / norm_b,
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        residual = norm(&r);
        if residual <= threshold {
            // Confirm with the true residual before accepting.
            a.matvec_into(&x, &mut ax);
            let mut true_norm = 0.0;
            for i in 0..n {
                let ri = b[i] - ax[i];
                true_norm += ri * ri;
                r[i] = ri;
            }
            let true_norm = true_norm.sqrt();
            residual = true_norm;
            if true_norm <= threshold {
                return Ok((
                    x,
                    SolveStats {
                        iterations: iter,
                        residual: true_norm / norm_b,
                    },
                ));
            }
            // Restart the recursion from the exact residual.
            for i in 0..n {
                z[i] = r[i] * inv_diag[i];
            }
            p.copy_from_slice(&z);
            rz = dot(&r, &z);
            continue;
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(SolveError {
        iterations: max_iter,
        residual: residual / norm_b,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
