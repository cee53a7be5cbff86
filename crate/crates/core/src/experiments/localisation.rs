//! Eigenfunction decay away from the localisation center, as a consistency
//! indicator only.

use serde::{Deserialize, Serialize};

use super::report::ExperimentReport;
use super::stats::{estimate, line_fit, median};
use super::{cube, over_replicas};
use crate::error::Result;
use crate::spectral_engine::{eigs_below, EigenOptions};

fn default_replicas() -> usize {
    20
}

fn default_mesh() -> usize {
    8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalisationParams {
    pub e_plus: f64,
    pub l: f64,
    #[serde(default = "default_replicas")]
    pub replicas: usize,
    #[serde(default = "default_mesh")]
    pub mesh: usize,
}

/// Decay rate from a fit of `log ‖ψ 1_{shell r}‖` against `r` over unit
/// shells around the maximum, `1 ≤ r ≤ L/4`; and the participation ratio.
fn decay_and_participation(psi: &[f64], positions: &[Vec<f64>], l: f64) -> (f64, f64) {
    let peak = (0..psi.len()).max_by(|&a, &b| psi[a].abs().total_cmp(&psi[b].abs())).unwrap_or(0);
    let shells = (l / 4.0).floor().max(2.0) as usize;
    let mut mass = vec![0.0; shells + 1];
    for (x, p) in psi.iter().zip(positions) {
        let r = p.iter().zip(&positions[peak]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let k = r.floor() as usize;
        if k <= shells {
            mass[k] += x * x;
        }
    }
    let (rs, logs): (Vec<f64>, Vec<f64>) =
        (1..=shells).filter(|&k| mass[k] > 0.0).map(|k| (k as f64, 0.5 * mass[k].ln())).unzip();
    let rate = if rs.len() >= 2 { -line_fit(&rs, &logs).slope } else { 0.0 };
    let p4: f64 = psi.iter().map(|x| x.powi(4)).sum();
    (rate, 1.0 / p4)
}

pub fn localisation_probe(model: &crate::random_model::AlloyModel, p: &LocalisationParams, seed: u64) -> Result<ExperimentReport> {
    let start = std::time::Instant::now();
    let mut report = ExperimentReport::new("localisation_probe", Some(seed));
    report.echo(p);
    let d = model.d;
    let bx = cube(d, p.l, vec![0.0; d], p.mesh)?;
    let positions: Vec<Vec<f64>> = (0..bx.dof()).map(|i| bx.position(i)).collect();
    let per_replica = over_replicas(p.replicas, |rep| {
        let h = model.hamiltonian(seed, rep, &bx)?;
        let eig = eigs_below(&h, p.e_plus, &EigenOptions::with_vectors())?;
        let vecs = eig.eigenvectors.unwrap_or_default();
        let stats: Vec<(f64, f64)> = vecs.iter().map(|v| decay_and_participation(v, &positions, p.l)).collect();
        Ok(stats)
    })?;
    let rates: Vec<f64> = per_replica.iter().map(|s| median(&s.iter().map(|x| x.0).collect::<Vec<_>>())).filter(|x| x.is_finite()).collect();
    let prs: Vec<f64> = per_replica.iter().map(|s| median(&s.iter().map(|x| x.1).collect::<Vec<_>>())).filter(|x| x.is_finite()).collect();
    let states: usize = per_replica.iter().map(Vec::len).sum();
    report.value(format!("L={}", p.l), "states", states as f64);
    report.value(format!("L={}", p.l), "nodes", bx.dof() as f64);
    report.estimate(format!("L={}", p.l), "median_decay_rate", estimate(&rates));
    report.estimate(format!("L={}", p.l), "median_participation", estimate(&prs));
    report.note(
        "decay_profile",
        format!(
            "median decay rate {:.4}, median participation {:.1} of {} nodes",
            median(&rates),
            median(&prs),
            bx.dof()
        ),
    );
    report.wall_clock_s = start.elapsed().as_secs_f64();
    Ok(report)
}
