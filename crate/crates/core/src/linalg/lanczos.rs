//! Shift-invert Lanczos with full reorthogonalization.
//!
//! A single Krylov sequence sees one vector per eigenspace, so degenerate
//! eigenvalues are recovered by restarting from a fresh random vector that
//! is orthogonal to everything already accepted. The caller supplies the
//! target count (from an inertia computation) and the loop runs until it is
//! met or the restart budget is exhausted.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::band::Ldlt;
use super::dense::tridiagonal_eigen;
use super::{axpy, dot, norm, SymOperator};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions { max_restarts: 64, seed: 0x5eed_1a2c }
    }
}

#[derive(Debug, Clone)]
pub struct LanczosOutput<T> {
    pub values: Vec<T>,
    pub vectors: Vec<Vec<T>>,
    /// Largest `‖Hv − λv‖ / ‖H‖` over the accepted pairs.
    pub residual: T,
    pub restarts: usize,
}

/// The `target` lowest eigenpairs of `op`, all assumed `≤ e_max`.
///
/// `shifted` must be the factorization of `op - sigma·I` with `sigma` strictly
/// below the spectrum.
pub fn lowest_eigenpairs<T: Real, O: SymOperator<T>>(
    op: &O,
    shifted: &Ldlt<T>,
    sigma: T,
    target: usize,
    e_max: T,
    opts: LanczosOptions,
) -> Result<LanczosOutput<T>> {
    let n = op.dim();
    let hnorm = op.norm_bound().max(T::min_positive_value());
    let tol = T::lit(100.0) * T::epsilon().powf(T::lit(0.75));
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut found_vals: Vec<T> = Vec::new();
    let mut found_vecs: Vec<Vec<T>> = Vec::new();
    let mut worst = T::zero();
    let mut steps = (2 * target + 20).max(30);
    let mut restarts = 0usize;
    let mut hv = vec![T::zero(); n];

    while found_vals.len() < target {
        if restarts >= opts.max_restarts {
            return Err(Error::NonConvergence(format!(
                "Lanczos found {} of {} eigenpairs after {} restarts",
                found_vals.len(),
                target,
                restarts
            )));
        }
        restarts += 1;
        let m = steps.min(n - found_vals.len());

        let mut q: Vec<T> = (0..n).map(|_| T::lit(rng.gen_range(-1.0..1.0))).collect();
        for _ in 0..2 {
            for f in &found_vecs {
                let c = dot(f, &q);
                axpy(-c, f, &mut q);
            }
        }
        let qn = norm(&q);
        if qn <= T::epsilon() {
            return Err(Error::NonConvergence("start vector lies in the deflated space".into()));
        }
        q.iter_mut().for_each(|x| *x = *x / qn);

        let mut basis: Vec<Vec<T>> = vec![q];
        let mut alphas: Vec<T> = Vec::with_capacity(m);
        let mut betas: Vec<T> = Vec::with_capacity(m);
        let mut last_beta = T::zero();
        for j in 0..m {
            let mut w = basis[j].clone();
            shifted.solve_in_place(&mut w);
            let alpha = dot(&w, &basis[j]);
            alphas.push(alpha);
            // two passes of classical Gram–Schmidt against everything
            for _ in 0..2 {
                for v in found_vecs.iter().chain(basis.iter()) {
                    let c = dot(v, &w);
                    axpy(-c, v, &mut w);
                }
            }
            let beta = norm(&w);
            last_beta = beta;
            let theta_scale = alphas.iter().fold(T::zero(), |a, x| a.max(x.abs()));
            if j + 1 == m || beta <= T::epsilon() * theta_scale.max(T::one()) * T::lit(10.0) {
                break;
            }
            betas.push(beta);
            w.iter_mut().for_each(|x| *x = *x / beta);
            basis.push(w);
        }

        let k = alphas.len();
        let ritz = tridiagonal_eigen(alphas.clone(), betas.clone(), true)?;
        let svecs = ritz.vectors.expect("requested");
        let mut accepted = 0usize;
        // largest θ first: lowest λ
        for idx in (0..k).rev() {
            let theta = ritz.values[idx];
            if theta <= T::zero() {
                continue;
            }
            let lambda_est = sigma + T::one() / theta;
            if lambda_est > e_max + tol * hnorm {
                break;
            }
            let s = &svecs[idx];
            let est = (last_beta * s[k - 1]).abs();
            if est > tol.sqrt() * theta {
                continue;
            }
            let mut y = vec![T::zero(); n];
            for (coef, b) in s.iter().zip(&basis) {
                axpy(*coef, b, &mut y);
            }
            for f in &found_vecs {
                let c = dot(f, &y);
                axpy(-c, f, &mut y);
            }
            let yn = norm(&y);
            if yn <= T::lit(0.5) {
                continue;
            }
            y.iter_mut().for_each(|x| *x = *x / yn);
            op.apply(&y, &mut hv);
            let lambda = dot(&y, &hv);
            let mut r = hv.clone();
            axpy(-lambda, &y, &mut r);
            let res = norm(&r) / hnorm;
            if res > tol || lambda > e_max {
                continue;
            }
            worst = worst.max(res);
            found_vals.push(lambda);
            found_vecs.push(y);
            accepted += 1;
            if found_vals.len() == target {
                break;
            }
        }
        if accepted == 0 {
            steps = (steps * 2).min(n);
        }
    }

    let mut order: Vec<usize> = (0..found_vals.len()).collect();
    order.sort_by(|&a, &b| found_vals[a].partial_cmp(&found_vals[b]).expect("finite"));
    Ok(LanczosOutput {
        values: order.iter().map(|&i| found_vals[i]).collect(),
        vectors: order.iter().map(|&i| found_vecs[i].clone()).collect(),
        residual: worst,
        restarts,
    })
}
