//! Finite-volume integrated density of states.

use serde::{Deserialize, Serialize};

use super::report::ExperimentReport;
use super::stats::estimate;
use super::{cube, default_mesh, over_replicas};
use crate::error::{Error, Result};
use crate::random_model::{modulus_s, AlloyModel};
use crate::spectral_engine::count_at_most;

fn default_replicas() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdsParams {
    /// Increasing energies.
    pub e_grid: Vec<f64>,
    pub l: f64,
    #[serde(default = "default_replicas")]
    pub replicas: usize,
    #[serde(default = "default_mesh")]
    pub mesh: usize,
    /// Wegner constant to test increments against, e.g. from a Wegner run.
    #[serde(default)]
    pub c_w: Option<f64>,
}

pub fn estimate_ids(model: &AlloyModel, p: &IdsParams, seed: u64) -> Result<ExperimentReport> {
    let start = std::time::Instant::now();
    let mut report = ExperimentReport::new("ids", Some(seed));
    report.echo(p);
    let d = model.d;
    if p.l < 4.0 {
        return Err(Error::Precondition(format!("L = {} holds fewer than 4^d unit cells", p.l)));
    }
    if p.e_grid.windows(2).any(|w| w[1] <= w[0]) || p.e_grid.is_empty() {
        return Err(Error::Precondition("energy grid must be strictly increasing".into()));
    }
    let bx = cube(d, p.l, vec![0.0; d], p.mesh)?;
    let vol = p.l.powi(d as i32);
    let paths = over_replicas(p.replicas, |rep| {
        let h = model.hamiltonian(seed, rep, &bx)?;
        Ok(p.e_grid.iter().map(|&e| count_at_most(&h, e) as f64 / vol).collect::<Vec<f64>>())
    })?;
    let monotone = paths.iter().all(|path| path.windows(2).all(|w| w[0] <= w[1]));
    let mut n_hat = Vec::new();
    for (i, &e) in p.e_grid.iter().enumerate() {
        let xs: Vec<f64> = paths.iter().map(|path| path[i]).collect();
        let est = estimate(&xs);
        report.estimate(format!("E={e}"), "N", est);
        n_hat.push(est);
    }
    report.clause("monotone_every_sample", monotone, format!("{} sample paths", paths.len()));
    match p.c_w {
        Some(c_w) => {
            let mut ok = true;
            let mut worst = 0.0f64;
            for i in 1..p.e_grid.len() {
                let eps = p.e_grid[i] - p.e_grid[i - 1];
                let inc: Vec<f64> = paths.iter().map(|path| path[i] - path[i - 1]).collect();
                let est = estimate(&inc);
                let bound = c_w * modulus_s(model.distributions(), eps);
                report.estimate(format!("E={};eps={eps}", p.e_grid[i]), "increment", est);
                ok &= est.mean <= bound + 3.0 * est.stderr;
                worst = worst.max(est.mean / bound);
            }
            report.clause("increments_below_C_W_s", ok, format!("max increment / (C_W s(ε)) = {worst:.4}"));
        }
        None => report.note("increments_below_C_W_s", "no Wegner constant supplied"),
    }
    report.wall_clock_s = start.elapsed().as_secs_f64();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_operator::free_dirichlet_spectrum;
    use crate::random_model::{Distribution, Profile};

    #[test]
    fn zero_disorder_matches_free_count() {
        let mut model = AlloyModel::covering(1, 20, Distribution::Uniform { lo: 0.0, hi: 1.0 }).unwrap();
        model.profile = Profile::Cell { height: 0.0 };
        // energies away from the levels π²k²/64
        let grid = vec![-1.0, 1.0, 5.0, 12.0, 20.0];
        let p = IdsParams { e_grid: grid.clone(), l: 8.0, replicas: 3, mesh: 32, c_w: None };
        let r = estimate_ids(&model, &p, 1).unwrap();
        for e in grid {
            let free: usize = free_dirichlet_spectrum(8.0, 1, e.max(0.0)).iter().map(|x| x.1).sum();
            let got = r.find(&format!("E={e}"), "N").unwrap();
            assert_eq!(got.value, free as f64 / 8.0, "E={e}");
            assert_eq!(got.stderr, Some(0.0));
        }
    }

    #[test]
    fn random_ids_is_monotone() {
        let model = AlloyModel::covering(1, 20, Distribution::Uniform { lo: 0.0, hi: 1.0 }).unwrap();
        let p = IdsParams { e_grid: vec![0.0, 0.5, 1.0, 2.0, 4.0], l: 8.0, replicas: 10, mesh: 8, c_w: Some(10.0) };
        let r = estimate_ids(&model, &p, 2).unwrap();
        assert_eq!(r.find("E=0", "N").unwrap().value, 0.0);
        assert!(r.clauses[0].verdict == crate::experiments::Verdict::Pass);
    }
}
