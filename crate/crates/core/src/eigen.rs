//! Largest-eigenvalue solver for the generalized symmetric pencil
//! `A x = λ B x` with exact integer inputs and [`Df`] working arithmetic.
//!
//! Pipeline: per-index power-of-two equilibration (exact, preserves the
//! spectrum), Cholesky `B = LLᵀ`, then Lanczos with full reorthogonalization
//! on the self-adjoint operator `C = L⁻¹ A L⁻ᵀ`.  The small tridiagonal Ritz
//! problem is solved in `f64` (safe: it is well conditioned by construction),
//! but the Ritz vector, Rayleigh quotient, and residual are all re-assembled
//! in multiprecision, so the reported residual bound is trustworthy.
//!
//! For a symmetric operator, `|ρ − λ_i| ≤ ‖Cv − ρv‖/‖v‖` for some eigenvalue
//! λ_i, which is the certificate this module reports.  Callers that need
//! rigor beyond floating point re-verify the Rayleigh quotient in exact
//! rational arithmetic downstream.

use num_bigint::BigInt;
use num_traits::Zero;

use crate::dyadic::Df;
use crate::error::{Error, Result};

/// Result of the pencil solve, in original (unequilibrated) coordinates.
pub struct PencilSolution {
    /// Rayleigh quotient of the returned vector (best eigenvalue estimate).
    pub lambda: Df,
    /// Eigenvector of the pencil, scaled so the largest |entry| is 1.
    pub vector: Vec<Df>,
    /// Residual bound ‖Cv − λv‖/‖v‖ in the self-adjoint transform.
    pub residual: Df,
    /// Total Lanczos steps across sweeps.
    pub iterations: usize,
}

// ---- Df vector helpers -----------------------------------------------------

fn dot(u: &[Df], v: &[Df]) -> Df {
    let mut acc = Df::zero();
    for (a, b) in u.iter().zip(v) {
        acc = &acc + &(a * b);
    }
    acc
}

fn norm(v: &[Df]) -> Df {
    dot(v, v).sqrt()
}

fn axpy(y: &mut [Df], c: &Df, x: &[Df]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi = &*yi + &(c * xi);
    }
}

fn scale_vec(v: &mut [Df], c: &Df) {
    for vi in v.iter_mut() {
        *vi = &*vi * c;
    }
}

// ---- factorization and operator --------------------------------------------

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
fn cholesky(m: &[Vec<Df>]) -> Result<Vec<Vec<Df>>> {
    let n = m.len();
    let mut l = vec![vec![Df::zero(); n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = m[i][j].clone();
            for t in 0..j {
                s = &s - &(&l[i][t] * &l[j][t]);
            }
            if i == j {
                if !s.is_positive() {
                    return Err(Error::IndefiniteForm { pivot: i });
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = &s / &l[j][j];
            }
        }
    }
    Ok(l)
}

/// Solves `L y = x` (forward substitution).
fn solve_lower(l: &[Vec<Df>], x: &[Df]) -> Vec<Df> {
    let n = l.len();
    let mut y = vec![Df::zero(); n];
    for i in 0..n {
        let mut s = x[i].clone();
        for j in 0..i {
            s = &s - &(&l[i][j] * &y[j]);
        }
        y[i] = &s / &l[i][i];
    }
    y
}

/// Solves `Lᵀ y = x` (back substitution).
fn solve_lower_t(l: &[Vec<Df>], x: &[Df]) -> Vec<Df> {
    let n = l.len();
    let mut y = vec![Df::zero(); n];
    for i in (0..n).rev() {
        let mut s = x[i].clone();
        for j in i + 1..n {
            s = &s - &(&l[j][i] * &y[j]);
        }
        y[i] = &s / &l[i][i];
    }
    y
}

fn matvec(m: &[Vec<Df>], x: &[Df]) -> Vec<Df> {
    m.iter().map(|row| dot(row, x)).collect()
}

struct Operator<'a> {
    a: &'a [Vec<Df>],
    l: &'a [Vec<Df>],
}

impl Operator<'_> {
    /// `C v = L⁻¹ A L⁻ᵀ v`.
    fn apply(&self, v: &[Df]) -> Vec<Df> {
        let y = solve_lower_t(self.l, v);
        let z = matvec(self.a, &y);
        solve_lower(self.l, &z)
    }
}

// ---- small tridiagonal eigenproblem (f64) ----------------------------------

/// Number of eigenvalues of the symmetric tridiagonal (alpha, beta) strictly
/// below `x`, by the Sturm sequence.
fn sturm_count(alpha: &[f64], beta: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0f64;
    for i in 0..alpha.len() {
        let off = if i == 0 { 0.0 } else { beta[i - 1] * beta[i - 1] / d };
        d = alpha[i] - x - off;
        if d == 0.0 {
            d = -f64::MIN_POSITIVE;
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Largest eigenvalue of the symmetric tridiagonal, by bisection.
fn tridiag_largest(alpha: &[f64], beta: &[f64]) -> f64 {
    let n = alpha.len();
    let mut lo = f64::MAX;
    let mut hi = f64::MIN;
    for i in 0..n {
        let r = beta.get(i).map_or(0.0, |b| b.abs())
            + if i > 0 { beta[i - 1].abs() } else { 0.0 };
        lo = lo.min(alpha[i] - r);
        hi = hi.max(alpha[i] + r);
    }
    let scale = hi.abs().max(lo.abs()).max(1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sturm_count(alpha, beta, mid) >= n {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= f64::EPSILON * scale {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Solves `(T − σI) y = rhs` for tridiagonal T by Gaussian elimination with
/// partial pivoting (two superdiagonals appear from row swaps).
fn solve_shifted_tridiag(alpha: &[f64], beta: &[f64], sigma: f64, rhs: &[f64]) -> Vec<f64> {
    let n = alpha.len();
    let tiny = f64::EPSILON * f64::EPSILON;
    let mut diag: Vec<f64> = alpha.iter().map(|a| a - sigma).collect();
    let mut sub: Vec<f64> = beta.to_vec();
    let mut sup1 = vec![0.0; n];
    let mut sup2 = vec![0.0; n];
    for i in 0..n - 1 {
        sup1[i] = beta[i];
    }
    let mut b = rhs.to_vec();
    for i in 0..n - 1 {
        if sub[i].abs() > diag[i].abs() {
            // Swap rows i and i+1.
            std::mem::swap(&mut diag[i], &mut sub[i]);
            let t = sup1[i];
            sup1[i] = diag[i + 1];
            diag[i + 1] = t;
            if i + 1 < n - 1 {
                sup2[i] = sup1[i + 1];
                sup1[i + 1] = 0.0;
            }
            b.swap(i, i + 1);
        }
        if diag[i] == 0.0 {
            diag[i] = tiny;
        }
        let m = sub[i] / diag[i];
        diag[i + 1] -= m * sup1[i];
        if i + 1 < n - 1 {
            sup1[i + 1] -= m * sup2[i];
        }
        b[i + 1] -= m * b[i];
    }
    if diag[n - 1] == 0.0 {
        diag[n - 1] = tiny;
    }
    let mut y = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = b[i];
        if i + 1 < n {
            s -= sup1[i] * y[i + 1];
        }
        if i + 2 < n {
            s -= sup2[i] * y[i + 2];
        }
        y[i] = s / diag[i];
    }
    y
}

/// Eigenvector of the tridiagonal for its largest eigenvalue, by inverse
/// iteration; deterministic all-ones start.
fn tridiag_top_vector(alpha: &[f64], beta: &[f64], theta: f64) -> Vec<f64> {
    let n = alpha.len();
    let scale = alpha.iter().fold(1.0f64, |m, a| m.max(a.abs()));
    let sigma = theta + scale * 1e-14;
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    for _ in 0..3 {
        let mut w = solve_shifted_tridiag(alpha, beta, sigma, &v);
        let nrm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !nrm.is_finite() || nrm == 0.0 {
            break;
        }
        for x in &mut w {
            *x /= nrm;
        }
        v = w;
    }
    v
}

// ---- Lanczos ----------------------------------------------------------------

struct RitzPair {
    vector: Vec<Df>,
    steps: usize,
}

/// Removes the components of `w` along every vector in `basis` (two passes).
fn reorthogonalize(w: &mut [Df], basis: &[Vec<Df>]) {
    for _ in 0..2 {
        for u in basis {
            let c = dot(w, u);
            if !c.is_zero() {
                let neg = -&c;
                axpy(w, &neg, u);
            }
        }
    }
}

/// A unit vector orthogonal to `basis`, built from the first workable
/// canonical direction; `None` once the basis spans the whole space.
fn fresh_direction(n: usize, basis: &[Vec<Df>]) -> Option<Vec<Df>> {
    for idx in 0..n {
        let mut e = vec![Df::zero(); n];
        e[idx] = Df::one();
        reorthogonalize(&mut e, basis);
        let nrm = norm(&e);
        if nrm.to_f64() > 1e-6 {
            let inv = &Df::one() / &nrm;
            scale_vec(&mut e, &inv);
            return Some(e);
        }
    }
    None
}

/// One Lanczos sweep with full (two-pass) reorthogonalization, returning the
/// top Ritz pair.
///
/// On happy breakdown (the Krylov space went invariant early — e.g. the start
/// vector was an eigenvector) the recursion continues in a fresh orthogonal
/// direction with a zero coupling: T becomes exactly block tridiagonal and the
/// Sturm solver still finds the global top across blocks.
fn lanczos_sweep(op: &Operator<'_>, start: &[Df], max_steps: usize) -> RitzPair {
    let n_dim = start.len();
    let mut v = start.to_vec();
    let nrm = norm(&v);
    let inv = &Df::one() / &nrm;
    scale_vec(&mut v, &inv);

    let mut basis: Vec<Vec<Df>> = vec![v];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut steps = 0;

    while steps < max_steps {
        let vj = basis.last().unwrap().clone();
        let mut w = op.apply(&vj);
        let a = dot(&w, &vj);
        alpha.push(a.to_f64());
        steps += 1;
        reorthogonalize(&mut w, &basis);
        let b = norm(&w);
        let b_f = b.to_f64();
        if basis.len() >= max_steps || basis.len() >= n_dim {
            break;
        }
        let scale = alpha.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        if b_f < 1e-25 * scale {
            // Invariant subspace: jump to an untouched direction.
            match fresh_direction(n_dim, &basis) {
                Some(e) => {
                    beta.push(0.0);
                    basis.push(e);
                    continue;
                }
                None => break,
            }
        }
        beta.push(b_f);
        let inv = &Df::one() / &b;
        scale_vec(&mut w, &inv);
        basis.push(w);
    }

    let theta = tridiag_largest(&alpha, &beta[..alpha.len() - 1]);
    let s = tridiag_top_vector(&alpha, &beta[..alpha.len() - 1], theta);
    let n = basis[0].len();
    let mut ritz = vec![Df::zero(); n];
    for (coef, u) in s.iter().zip(&basis) {
        if let Some(c) = Df::from_f64(*coef) {
            axpy(&mut ritz, &c, u);
        }
    }
    RitzPair { vector: ritz, steps }
}

// ---- public entry -----------------------------------------------------------

/// Largest eigenvalue of `A x = λ B x` for exact symmetric integer matrices,
/// with `B` positive definite.  `tol` bounds the self-adjoint residual;
/// `max_sweeps` restarts of up to `max(n, 48)` Lanczos steps are attempted.
pub fn largest_generalized_eigen(
    a: &[Vec<BigInt>],
    b: &[Vec<BigInt>],
    tol: f64,
    max_sweeps: usize,
) -> Result<PencilSolution> {
    let n = a.len();
    if n == 0 || b.len() != n || a.iter().any(|r| r.len() != n) || b.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, got: b.len() });
    }
    // Power-of-two equilibration from B's diagonal: d_i = 2^{-s_i} with
    // s_i ≈ log2(sqrt(B_ii)).  Exact in Df, so the spectrum is untouched.
    let mut shift = vec![0i64; n];
    for i in 0..n {
        if b[i][i].is_zero() || b[i][i] < BigInt::zero() {
            return Err(Error::IndefiniteForm { pivot: i });
        }
        shift[i] = (b[i][i].bits() / 2) as i64;
    }
    let to_scaled = |m: &[Vec<BigInt>]| -> Vec<Vec<Df>> {
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| Df::from_bigint(&m[i][j]).ldexp(-(shift[i] + shift[j])))
                    .collect()
            })
            .collect()
    };
    let ah = to_scaled(a);
    let bh = to_scaled(b);
    let l = cholesky(&bh)?;
    let op = Operator { a: &ah, l: &l };

    let sweep_len = n.max(48).min(220);
    let mut start = vec![Df::one(); n];
    let mut iterations = 0;
    let mut best: Option<(Df, Vec<Df>, Df)> = None;
    for _ in 0..max_sweeps.max(1) {
        let ritz = lanczos_sweep(&op, &start, sweep_len);
        iterations += ritz.steps;
        // Multiprecision Rayleigh quotient and residual of the Ritz vector.
        let v = ritz.vector;
        let cv = op.apply(&v);
        let vv = dot(&v, &v);
        let rho = &dot(&cv, &v) / &vv;
        let mut r = cv;
        let neg_rho = -&rho;
        axpy(&mut r, &neg_rho, &v);
        let res = &norm(&r) / &vv.sqrt();
        let replace = match &best {
            Some((_, _, old)) => res < *old,
            None => true,
        };
        if replace {
            best = Some((rho, v.clone(), res.clone()));
        }
        if res.to_f64() <= tol {
            break;
        }
        start = v;
    }
    let (rho, v, res) = best.expect("at least one sweep runs");
    if res.to_f64() > tol {
        return Err(Error::NonConvergence { iterations, residual: res.to_f64() });
    }

    // Back-transform: pencil vector x = D·L⁻ᵀ v, normalized to max |x_i| = 1.
    let mut x = solve_lower_t(&l, &v);
    for i in 0..n {
        x[i] = x[i].ldexp(-shift[i]);
    }
    let mut big = Df::zero();
    for xi in &x {
        let a = xi.abs();
        if a > big {
            big = a;
        }
    }
    // Fix the overall sign so the largest-magnitude entry is positive.
    let mut idx = 0;
    for (i, xi) in x.iter().enumerate() {
        if xi.abs() == big {
            idx = i;
            break;
        }
    }
    let denom = if x[idx].is_negative() { -&big } else { big };
    let inv = &Df::one() / &denom;
    scale_vec(&mut x, &inv);

    Ok(PencilSolution { lambda: rho, vector: x, residual: res, iterations })
}

// ---- tests -----------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> Vec<Vec<BigInt>> {
        rows.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect()
    }

    #[test]
    fn one_by_one_ratio() {
        let sol = largest_generalized_eigen(&m(&[&[3]]), &m(&[&[2]]), 1e-10, 4).unwrap();
        assert!((sol.lambda.to_f64() - 1.5).abs() < 1e-14);
        assert!(sol.residual.to_f64() <= 1e-10);
    }

    #[test]
    fn diagonal_standard_problem() {
        let a = m(&[&[2, 0], &[0, 1]]);
        let b = m(&[&[1, 0], &[0, 1]]);
        let sol = largest_generalized_eigen(&a, &b, 1e-10, 4).unwrap();
        assert!((sol.lambda.to_f64() - 2.0).abs() < 1e-12);
        // Eigenvector along e1 after normalization.
        assert!((sol.vector[0].to_f64().abs() - 1.0).abs() < 1e-10);
        assert!(sol.vector[1].to_f64().abs() < 1e-8);
    }

    #[test]
    fn generalized_two_by_two_known_value() {
        // det(A − λB) = 3λ² − 12λ + 11 = 0 → λ_max = 2 + 1/√3.
        let a = m(&[&[4, 1], &[1, 3]]);
        let b = m(&[&[2, 1], &[1, 2]]);
        let sol = largest_generalized_eigen(&a, &b, 1e-10, 4).unwrap();
        let expect = 2.0 + 1.0 / 3f64.sqrt();
        assert!((sol.lambda.to_f64() - expect).abs() < 1e-12);
        // Pencil residual in original coordinates: ‖A x − λ B x‖ small.
        let x: Vec<f64> = sol.vector.iter().map(|v| v.to_f64()).collect();
        let lam = sol.lambda.to_f64();
        let ax = [4.0 * x[0] + x[1], x[0] + 3.0 * x[1]];
        let bx = [2.0 * x[0] + x[1], x[0] + 2.0 * x[1]];
        for i in 0..2 {
            assert!((ax[i] - lam * bx[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_indefinite_b() {
        let a = m(&[&[1, 0], &[0, 1]]);
        let b = m(&[&[1, 0], &[0, -1]]);
        assert!(matches!(
            largest_generalized_eigen(&a, &b, 1e-10, 2),
            Err(Error::IndefiniteForm { .. })
        ));
    }

    #[test]
    fn rejects_singular_b() {
        let a = m(&[&[2, 0], &[0, 1]]);
        let b = m(&[&[1, 1], &[1, 1]]);
        assert!(matches!(
            largest_generalized_eigen(&a, &b, 1e-10, 2),
            Err(Error::IndefiniteForm { .. })
        ));
    }

    #[test]
    fn hilbert_pencil_survives_ill_conditioning() {
        // B = 360360·Hilbert(8) (condition ≈ 1e10), A = 360360·I.
        // λ_max = 1/λ_min(H₈) ≈ 2.7e9; f64 Cholesky would keep only a digit
        // or two here, the multiprecision path keeps the residual tiny.
        let n = 8;
        let lcm = 360360i64;
        let a: Vec<Vec<BigInt>> = (0..n)
            .map(|i| (0..n).map(|j| BigInt::from(if i == j { lcm } else { 0 })).collect())
            .collect();
        let b: Vec<Vec<BigInt>> = (0..n)
            .map(|i| (0..n).map(|j| BigInt::from(lcm / (i + j + 1) as i64)).collect())
            .collect();
        let sol = largest_generalized_eigen(&a, &b, 1e-10, 6).unwrap();
        assert!(sol.residual.to_f64() <= 1e-10);
        let lam = sol.lambda.to_f64();
        assert!(lam > 1e9 && lam < 1e10, "λ = {lam}");
    }

    #[test]
    fn tridiagonal_helpers() {
        // T = [[2,1],[1,2]] has eigenvalues 1 and 3.
        let top = tridiag_largest(&[2.0, 2.0], &[1.0]);
        assert!((top - 3.0).abs() < 1e-12);
        let v = tridiag_top_vector(&[2.0, 2.0], &[1.0], top);
        assert!((v[0].abs() - v[1].abs()).abs() < 1e-8);
        // 3×3 constant tridiagonal: largest = 2 + √2.
        let top3 = tridiag_largest(&[2.0, 2.0, 2.0], &[1.0, 1.0]);
        assert!((top3 - (2.0 + 2f64.sqrt())).abs() < 1e-12);
    }
}
