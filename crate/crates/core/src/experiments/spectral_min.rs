//! Bottom of the spectrum when couplings can vanish: `min σ(H_ω) = 0` almost
//! surely, approached by configurations with small couplings.

use serde::{Deserialize, Serialize};

use super::report::ExperimentReport;
use super::stats::estimate;
use super::{cube, default_mesh, over_replicas};
use crate::error::{Error, Result};
use crate::grid_operator::{add_potential, build_free_laplacian, discrete_dirichlet_mode, discretization_error};
use crate::random_model::{rng::site_rng, AlloyModel};
use crate::spectral_engine::lowest_eigenvalue;

fn default_replicas() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralMinParams {
    pub eps_list: Vec<f64>,
    pub l: f64,
    #[serde(default = "default_replicas")]
    pub replicas: usize,
    #[serde(default = "default_mesh")]
    pub mesh: usize,
}

pub fn run_spectral_minimum(model: &AlloyModel, p: &SpectralMinParams, seed: u64) -> Result<ExperimentReport> {
    let start = std::time::Instant::now();
    let mut report = ExperimentReport::new("spectral_minimum", Some(seed));
    report.echo(p);
    if model.distribution.min_support() != 0.0 {
        return Err(Error::Precondition(format!(
            "requires min supp μ = 0, got {}",
            model.distribution.min_support()
        )));
    }
    let d = model.d;
    let bx = cube(d, p.l, vec![0.0; d], p.mesh)?;
    let h = bx.h();
    let free = build_free_laplacian(&bx)?;
    let ground_discrete = d as f64 * discrete_dirichlet_mode(p.l, h, 1);
    let ground_continuum = d as f64 * (std::f64::consts::PI / p.l).powi(2);
    let allowance = discretization_error(p.l, h, d, ground_continuum);
    report.value(format!("L={}", p.l), "free_ground_discrete", ground_discrete);
    report.value(format!("L={}", p.l), "free_ground_continuum", ground_continuum);
    report.fitted.insert("allowance".into(), allowance);

    let unconditioned = over_replicas(p.replicas, |rep| Ok(lowest_eigenvalue(&model.hamiltonian(seed, rep, &bx)?)))?;
    let lowest = unconditioned.iter().copied().fold(f64::INFINITY, f64::min);
    report.estimate(format!("L={}", p.l), "min_eig", estimate(&unconditioned));
    report.clause(
        "never_below_zero",
        lowest >= -allowance,
        format!("smallest sampled minimum {lowest:.6e}, allowance {allowance:.3e}"),
    );

    // C_V = sup Σ u_j on the box
    let c_v = model.u_sum(&bx)?.into_iter().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    report.fitted.insert("C_V".into(), c_v);
    let mut all_ok = true;
    let mut detail = Vec::new();
    for &eps in &p.eps_list {
        let cap = eps / (3.0 * c_v);
        let mins = over_replicas(p.replicas, |rep| {
            let v = model.superpose(&bx, |j| {
                model.distribution.sample_at_most(&mut site_rng(seed, rep, j), cap).unwrap_or(0.0)
            })?;
            Ok(lowest_eigenvalue(&add_potential(&free, &v)?))
        })?;
        let worst = mins.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let ok = worst < ground_discrete + eps;
        all_ok &= ok;
        report.estimate(format!("L={};eps={eps}", p.l), "conditioned_min_eig", estimate(&mins));
        detail.push(format!("eps={eps}: max {worst:.6} vs {:.6}", ground_discrete + eps));
    }
    report.clause("conditioned_below_ground_plus_eps", all_ok, detail.join("; "));
    report.wall_clock_s = start.elapsed().as_secs_f64();
    Ok(report)
}
