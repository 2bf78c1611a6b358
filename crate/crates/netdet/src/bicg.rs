//! Stabilized biconjugate gradient solver for sparse nonsymmetric systems.

use crate::error::{Error, Result};
use crate::matrix::SparseMatrix;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solve A x = b to an absolute residual 2-norm of `tol` with BiCGSTAB,
/// starting from x = 0. Stagnation restarts from the current iterate; the
/// returned solution always satisfies the tolerance or an error carries the
/// best residual reached.
pub fn bicgstab(a: &SparseMatrix, b: &[f64], tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let n = b.len();
    assert_eq!(a.rows(), n);
    assert_eq!(a.cols(), n);

    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    if norm(&r) <= tol {
        return Ok(x);
    }

    let mut r_hat = r.clone();
    let mut rho = 1.0;
    let mut alpha = 1.0;
    let mut omega = 1.0;
    let mut p = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut t = vec![0.0; n];
    let mut best = norm(&r);

    let mut iter = 0;
    while iter < max_iter {
        iter += 1;
        let rho_next = dot(&r_hat, &r);
        if rho_next.abs() < 1e-300 {
            // Stagnation: restart with the current residual as shadow vector.
            a.matvec(&x, &mut t);
            for i in 0..n {
                r[i] = b[i] - t[i];
            }
            if norm(&r) <= tol {
                return Ok(x);
            }
            r_hat.copy_from_slice(&r);
            rho = 1.0;
            alpha = 1.0;
            omega = 1.0;
            p.iter_mut().for_each(|z| *z = 0.0);
            v.iter_mut().for_each(|z| *z = 0.0);
            continue;
        }
        let beta = (rho_next / rho) * (alpha / omega);
        rho = rho_next;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        a.matvec(&p, &mut v);
        let denom = dot(&r_hat, &v);
        if denom.abs() < 1e-300 {
            r_hat.copy_from_slice(&r);
            rho = 1.0;
            alpha = 1.0;
            omega = 1.0;
            p.iter_mut().for_each(|z| *z = 0.0);
            v.iter_mut().for_each(|z| *z = 0.0);
            continue;
        }
        alpha = rho / denom;
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        if norm(&s) <= tol {
            for i in 0..n {
                x[i] += alpha * p[i];
            }
            best = best.min(norm(&s));
            break;
        }
        a.matvec(&s, &mut t);
        let tt = dot(&t, &t);
        omega = if tt > 0.0 { dot(&t, &s) / tt } else { 0.0 };
        for i in 0..n {
            x[i] += alpha * p[i] + omega * s[i];
        }
        for i in 0..n {
            r[i] = s[i] - omega * t[i];
        }
        let rn = norm(&r);
        best = best.min(rn);
        if rn <= tol {
            break;
        }
        if omega.abs() < 1e-300 {
            r_hat.copy_from_slice(&r);
            rho = 1.0;
            alpha = 1.0;
            omega = 1.0;
            p.iter_mut().for_each(|z| *z = 0.0);
            v.iter_mut().for_each(|z| *z = 0.0);
        }
    }

    // Always report the true residual, not the recurrence residual.
    a.matvec(&x, &mut t);
    let mut true_res = 0.0;
    for i in 0..n {
        let d = b[i] - t[i];
        true_res += d * d;
    }
    let true_res = true_res.sqrt();
    if true_res <= tol {
        Ok(x)
    } else {
        Err(Error::SolverNoConvergence {
            iterations: iter,
            residual: true_res.min(best),
            tol,
        })
    }
}
