use super::csr::{dot, norm, CsrMatrix};
use super::SolverError;

/// Converged iterate and the number of iterations taken.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSolution {
    pub x: Vec<f64>,
    pub iterations: usize,
}

fn inverse_diagonal(a: &CsrMatrix) -> Result<Vec<f64>, SolverError> {
    a.diagonal()
        .into_iter()
        .enumerate()
        .map(|(i, d)| if d == 0.0 { Err(SolverError::ZeroDiagonal(i)) } else { Ok(1.0 / d) })
        .collect()
}

/// Jacobi-preconditioned conjugate gradients. Stops once
/// `|b - A x| <= tol |b|`; a zero right-hand side returns zero at once.
pub fn cg_solve(
    a: &CsrMatrix,
    b: &[f64],
    x0: Option<&[f64]>,
    tol: f64,
    max_iter: usize,
) -> Result<LinearSolution, SolverError> {
    let n = a.dim();
    assert_eq!(b.len(), n);
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return Ok(LinearSolution { x: vec![0.0; n], iterations: 0 });
    }
    let dinv = inverse_diagonal(a)?;
    let mut x = x0.map_or_else(|| vec![0.0; n], |v| v.to_vec());
    let mut r: Vec<f64> = b.iter().zip(a.matvec(&x)).map(|(bi, ai)| bi - ai).collect();
    let target = tol * bnorm;
    let mut rnorm = norm(&r);
    if rnorm <= target {
        return Ok(LinearSolution { x, iterations: 0 });
    }
    let mut z: Vec<f64> = r.iter().zip(&dinv).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let (mut best, mut best_res) = (x.clone(), rnorm);
    for it in 1..=max_iter {
        a.matvec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(SolverError::Breakdown { iterations: it });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        rnorm = norm(&r);
        if rnorm <= target {
            return Ok(LinearSolution { x, iterations: it });
        }
        if rnorm < best_res {
            best_res = rnorm;
            best.copy_from_slice(&x);
        }
        for i in 0..n {
            z[i] = r[i] * dinv[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(SolverError::NotConverged {
        iterations: max_iter,
        residual: best_res / bnorm,
        best,
    })
}

/// Jacobi-preconditioned BiCGStab for nonsymmetric systems.
pub fn bicgstab_solve(
    a: &CsrMatrix,
    b: &[f64],
    x0: Option<&[f64]>,
    tol: f64,
    max_iter: usize,
) -> Result<LinearSolution, SolverError> {
    const TINY: f64 = 1e-300;
    let n = a.dim();
    assert_eq!(b.len(), n);
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return Ok(LinearSolution { x: vec![0.0; n], iterations: 0 });
    }
    let dinv = inverse_diagonal(a)?;
    let target = tol * bnorm;
    let mut x = x0.map_or_else(|| vec![0.0; n], |v| v.to_vec());
    let mut r: Vec<f64> = b.iter().zip(a.matvec(&x)).map(|(bi, ai)| bi - ai).collect();
    if norm(&r) <= target {
        return Ok(LinearSolution { x, iterations: 0 });
    }
    let r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0f64, 1.0f64, 1.0f64);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut t = vec![0.0; n];
    let (mut best, mut best_res) = (x.clone(), norm(&r));
    for it in 1..=max_iter {
        let rho_new = dot(&r_hat, &r);
        if rho_new.abs() < TINY || omega.abs() < TINY {
            return Err(SolverError::Breakdown { iterations: it });
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
            y[i] = p[i] * dinv[i];
        }
        a.matvec_into(&y, &mut v);
        let rv = dot(&r_hat, &v);
        if rv.abs() < TINY {
            return Err(SolverError::Breakdown { iterations: it });
        }
        alpha = rho / rv;
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        if norm(&s) <= target {
            for i in 0..n {
                x[i] += alpha * y[i];
            }
            return Ok(LinearSolution { x, iterations: it });
        }
        for i in 0..n {
            z[i] = s[i] * dinv[i];
        }
        a.matvec_into(&z, &mut t);
        let tt = dot(&t, &t);
        if tt < TINY {
            return Err(SolverError::Breakdown { iterations: it });
        }
        omega = dot(&t, &s) / tt;
        for i in 0..n {
            x[i] += alpha * y[i] + omega * z[i];
            r[i] = s[i] - omega * t[i];
        }
        let rnorm = norm(&r);
        if rnorm <= target {
            return Ok(LinearSolution { x, iterations: it });
        }
        if rnorm < best_res {
            best_res = rnorm;
            best.copy_from_slice(&x);
        }
    }
    Err(SolverError::NotConverged {
        iterations: max_iter,
        residual: best_res / bnorm,
        best,
    })
}
