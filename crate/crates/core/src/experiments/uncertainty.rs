//! Spectral inequality on thick sets: the smallest eigenvalue of the
//! compressed indicator `P_E 1_S P_E` on the free spectral subspace.

use serde::{Deserialize, Serialize};

use super::report::ExperimentReport;
use super::stats::line_fit;
use crate::error::{Error, Result};
use crate::grid_operator::{build_free_laplacian, Boundary, BoxSpec};
use crate::spectral_engine::{compressed_indicator_min_eig, eigs_below, EigenOptions};
use crate::thick_sets::{RasterSet, WindowSpec};

fn default_mesh() -> usize {
    64
}

fn default_bc() -> Boundary {
    Boundary::Dirichlet
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UncertaintyParams {
    pub e_list: Vec<f64>,
    pub l_list: Vec<f64>,
    #[serde(default = "default_bc")]
    pub bc: Boundary,
    #[serde(default = "default_mesh")]
    pub mesh: usize,
}

/// `K ≥ 1` solving `K (|a|₁ + d) log(K^d / γ) = slope`; `1` when the left side
/// already exceeds the slope at `K = 1`.
pub fn fit_k(slope: f64, a: &[f64], gamma: f64) -> f64 {
    let d = a.len() as f64;
    let a1: f64 = a.iter().sum();
    let f = |k: f64| k * (a1 + d) * (k.powf(d) / gamma).ln();
    if !(slope > f(1.0)) {
        return 1.0;
    }
    let (mut lo, mut hi) = (1.0, 2.0);
    while f(hi) < slope {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < slope {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `λ_min(P_E 1_S P_E)` on the cube `[0, L]^d`.
pub fn min_eig_on_box(set: &RasterSet, e: f64, l: f64, bc: Boundary, mesh: usize) -> Result<(f64, usize)> {
    let d = set.d();
    let bx = BoxSpec::with_mesh(d, l, vec![l / 2.0; d], mesh, bc)?;
    let h = build_free_laplacian(&bx)?;
    let eig = eigs_below(&h, e, &EigenOptions::with_vectors())?;
    let basis = eig.eigenvectors.unwrap_or_default();
    if basis.is_empty() {
        return Err(Error::Precondition(format!("no eigenvalue below E = {e} on a box of side {l}")));
    }
    let mask: Vec<bool> = (0..h.dim()).map(|i| set.contains_point(&bx.position(i))).collect();
    Ok((compressed_indicator_min_eig(&basis, &mask)?, basis.len()))
}

pub fn run_uncertainty(set: &RasterSet, window: &WindowSpec, p: &UncertaintyParams) -> Result<ExperimentReport> {
    let start = std::time::Instant::now();
    let mut report = ExperimentReport::new("uncertainty", None);
    report.echo(p);
    report.config.insert("gamma".into(), window.gamma.to_string());
    report.config.insert("a".into(), format!("{:?}", window.a));
    if let Some(l) = p.l_list.iter().find(|&&l| window.a.iter().any(|&a| a > l)) {
        return Err(Error::Precondition(format!("window A_a does not fit in [0, {l}]^d")));
    }
    if set.d() != window.a.len() {
        return Err(Error::LengthMismatch { expected: set.d(), got: window.a.len() });
    }
    let mut table = vec![vec![0.0; p.e_list.len()]; p.l_list.len()];
    for (li, &l) in p.l_list.iter().enumerate() {
        for (ei, &e) in p.e_list.iter().enumerate() {
            let (lambda, dim) = min_eig_on_box(set, e, l, p.bc, p.mesh)?;
            let point = format!("L={l};E={e}");
            report.value(point.clone(), "lambda_min", lambda);
            report.value(point, "subspace_dim", dim as f64);
            table[li][ei] = lambda;
        }
    }
    let all: Vec<f64> = table.iter().flatten().copied().collect();
    let min = all.iter().copied().fold(f64::INFINITY, f64::min);
    report.clause("positive", min > 0.0, format!("smallest λ = {min:e}"));

    let mut worst_ratio = 1.0f64;
    for ei in 0..p.e_list.len() {
        let col: Vec<f64> = table.iter().map(|row| row[ei]).collect();
        let (lo, hi) = col.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
        worst_ratio = worst_ratio.max(hi / lo);
    }
    report.clause("stable_in_L", worst_ratio <= 2.0, format!("max over E of max_L λ / min_L λ = {worst_ratio:.4}"));

    let mut order: Vec<usize> = (0..p.e_list.len()).collect();
    order.sort_by(|&a, &b| p.e_list[a].total_cmp(&p.e_list[b]));
    let monotone = table.iter().all(|row| order.windows(2).all(|w| row[w[1]] <= row[w[0]] + 1e-10));
    report.clause("non_increasing_in_E", monotone, "λ(E', L) ≤ λ(E, L) for E' ≥ E");

    if p.e_list.len() >= 3 {
        let x: Vec<f64> = p.e_list.iter().map(|e| e.sqrt()).collect();
        let mut worst_corr = 1.0f64;
        let mut k_hat = 1.0f64;
        for (li, &l) in p.l_list.iter().enumerate() {
            let y: Vec<f64> = table[li].iter().map(|lam| (1.0 / lam).ln()).collect();
            let fit = line_fit(&x, &y);
            report.value(format!("L={l}"), "slope_log_inv_lambda_vs_sqrtE", fit.slope);
            report.value(format!("L={l}"), "correlation", fit.correlation);
            worst_corr = worst_corr.min(fit.correlation);
            k_hat = k_hat.max(fit_k(fit.slope, &window.a, window.gamma));
        }
        report.fitted.insert("K".into(), k_hat);
        report.clause(
            "exponential_in_sqrtE",
            worst_corr >= 0.9,
            format!("smallest correlation of log(1/λ) with √E over L: {worst_corr:.4}"),
        );
    } else {
        report.note("exponential_in_sqrtE", "needs at least three energies");
    }
    report.wall_clock_s = start.elapsed().as_secs_f64();
    Ok(report)
}
