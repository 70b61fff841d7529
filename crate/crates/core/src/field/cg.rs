//! Jacobi-preconditioned conjugate gradient for the large-system path.

use super::system::SparseSymmetric;

pub(crate) struct CgOutcome {
    pub iterations: usize,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Iterates from the current `x` until the true relative residual
/// `‖b − Ax‖/‖b‖` drops to `tol`, or `max_iter` is spent.
pub(crate) fn solve(
    a: &SparseSymmetric,
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
) -> CgOutcome {
    let n = b.len();
    let inv_diag: Vec<f64> = a.diagonal().iter().map(|d| 1.0 / d).collect();
    let b_norm = dot(b, b).sqrt();
    if b_norm == 0.0 {
        x.fill(0.0);
        return CgOutcome {
            iterations: 0,
            converged: true,
        };
    }

    let mut r = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut q = vec![0.0; n];
    let mut iterations = 0;

    // Restart loop: the recurrence residual drifts from the true one, so
    // convergence is confirmed against a freshly computed residual.
    loop {
        a.mul_vec(x, &mut q);
        for i in 0..n {
            r[i] = b[i] - q[i];
        }
        if dot(&r, &r).sqrt() <= tol * b_norm {
            return CgOutcome {
                iterations,
                converged: true,
            };
        }
        if iterations >= max_iter {
            return CgOutcome {
                iterations,
                converged: false,
            };
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        p.copy_from_slice(&z);
        let mut rz = dot(&r, &z);
        let target = 0.5 * tol * b_norm;
        while iterations < max_iter {
            a.mul_vec(&p, &mut q);
            let alpha = rz / dot(&p, &q);
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * q[i];
            }
            iterations += 1;
            if dot(&r, &r).sqrt() <= target {
                break;
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
    }
}
