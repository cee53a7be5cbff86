//! Expected eigenvalue counts in windows `[E − ε, E + ε]` against `s(ε)·L^d`.

use serde::{Deserialize, Serialize};

use super::report::ExperimentReport;
use super::stats::{estimate, Estimate};
use super::{cube, default_mesh, over_replicas};
use crate::error::{Error, Result};
use crate::random_model::{modulus_s, AlloyModel};
use crate::spectral_engine::{eigs_below, EigenOptions};

fn default_replicas() -> usize {
    200
}


#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WegnerParams {
    pub e0: f64,
    pub eps_list: Vec<f64>,
    pub l_list: Vec<f64>,
    #[serde(default = "default_replicas")]
    pub replicas: usize,
    /// Number of window centers, evenly spaced in `(0, E0 − ε_max)`. By default
    /// the spacing is a quarter of the smallest ε, so the maximum over
    /// centers resolves the peaks of the eigenvalue density.
    #[serde(default)]
    pub centers: Option<usize>,
    #[serde(default = "default_mesh")]
    pub mesh: usize,
}

impl WegnerParams {
    pub fn window_centers(&self) -> Vec<f64> {
        let n = self.center_count();
        let eps_max = self.eps_list.iter().fold(0.0f64, |m, &e| m.max(e));
        let span = self.e0 - eps_max;
        (1..=n).map(|i| span * i as f64 / (n + 1) as f64).collect()
    }

    fn center_count(&self) -> usize {
        self.centers.unwrap_or_else(|| {
            let eps_min = self.eps_list.iter().fold(f64::INFINITY, |m, &e| m.min(e));
            let eps_max = self.eps_list.iter().fold(0.0f64, |m, &e| m.max(e));
            let usable = (self.e0 - eps_max).max(0.0);
            ((usable / (eps_min / 4.0)).ceil() as usize).clamp(1, 100_000)
        })
    }
}

pub fn run_wegner(model: &AlloyModel, p: &WegnerParams, seed: u64) -> Result<ExperimentReport> {
    let start = std::time::Instant::now();
    let mut report = ExperimentReport::new("wegner", Some(seed));
    report.echo(p);
    let claim = model.claimed_thick.as_ref().ok_or(crate::error::Error::MissingClaim("claimed thick set"))?;
    let cert = model.verify_pi()?;
    if !cert.pass {
        return Err(Error::Precondition(format!("thick-set claim fails: {cert:?}")));
    }
    let amax = claim.window.a.iter().fold(0.0f64, |m, &a| m.max(a));
    if let Some(l) = p.l_list.iter().find(|&&l| l < amax) {
        return Err(Error::Precondition(format!("L = {l} is below the window size {amax}")));
    }
    if p.eps_list.is_empty() || p.l_list.is_empty() || p.replicas < 2 || p.centers == Some(0) {
        return Err(Error::Precondition("empty ε or L list, or fewer than two replicas".into()));
    }
    if p.eps_list.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::Precondition("ε must be positive".into()));
    }
    let centers = p.window_centers();
    let eps_max = p.eps_list.iter().fold(0.0f64, |m, &e| m.max(e));
    if !(p.e0 > eps_max) || centers.last().is_some_and(|&c| c + eps_max > p.e0) {
        return Err(Error::Precondition("energy windows must be non-empty and lie below E0".into()));
    }
    let d = model.d;
    let mut rho: Vec<Vec<Estimate>> = Vec::new();
    for &l in &p.l_list {
        let bx = cube(d, l, vec![0.0; d], p.mesh)?;
        // counts[replica][eps][center]; windows are closed, and the
        // inertia count at E0 guards the eigenvalue list
        let counts = over_replicas(p.replicas, |rep| {
            let h = model.hamiltonian(seed, rep, &bx)?;
            let eig = eigs_below(&h, p.e0, &EigenOptions::default())?;
            let ev = &eig.eigenvalues;
            let mut out = Vec::with_capacity(p.eps_list.len());
            for &eps in &p.eps_list {
                let row = centers
                    .iter()
                    .map(|&c| {
                        let lo = ev.partition_point(|&x| x < c - eps);
                        let hi = ev.partition_point(|&x| x <= c + eps);
                        (hi - lo) as f64
                    })
                    .collect::<Vec<_>>();
                out.push(row);
            }
            Ok(out)
        })?;
        let vol = l.powi(d as i32);
        let mut per_eps = Vec::new();
        for (ei, &eps) in p.eps_list.iter().enumerate() {
            let s = modulus_s(model.distributions(), eps);
            let mut best: Option<(f64, Estimate)> = None;
            for (ci, &c) in centers.iter().enumerate() {
                let xs: Vec<f64> = counts.iter().map(|r| r[ei][ci]).collect();
                let e = estimate(&xs);
                if p.centers.is_some() {
                    report.estimate(format!("L={l};eps={eps};E={c}"), "count", e);
                }
                let ratio = Estimate { mean: e.mean / (s * vol), stderr: e.stderr / (s * vol), n: e.n };
                if best.is_none_or(|(_, b)| ratio.mean > b.mean) {
                    best = Some((c, ratio));
                }
            }
            let (argmax, best) = best.expect("at least one center");
            report.value(format!("L={l};eps={eps}"), "s_eps", s);
            report.value(format!("L={l};eps={eps}"), "argmax_E", argmax);
            report.estimate(format!("L={l};eps={eps}"), "rho", best);
            per_eps.push(best);
        }
        rho.push(per_eps);
    }

    // fitted constant from the smallest box, then checked everywhere
    let (first, last) = (0, p.l_list.len() - 1);
    let c_w = rho[first].iter().map(|e| e.mean + 3.0 * e.stderr).fold(0.0, f64::max);
    report.fitted.insert("C_W".into(), c_w);
    let mut trend_ok = true;
    let mut detail = Vec::new();
    for (ei, &eps) in p.eps_list.iter().enumerate() {
        let (a, b) = (rho[first][ei], rho[last][ei]);
        let sigma = (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
        let ok = b.mean <= a.mean + 3.0 * sigma;
        trend_ok &= ok;
        detail.push(format!("eps={eps}: rho(L={})={:.4} vs rho(L={})={:.4}±{:.4}", p.l_list[last], b.mean, p.l_list[first], a.mean, sigma));
    }
    report.clause("no_upward_trend_in_L", trend_ok, detail.join("; "));
    let worst = rho.iter().flatten().map(|e| e.mean).fold(0.0, f64::max);
    report.clause(
        "bounded_by_fitted_C_W",
        worst <= c_w,
        format!("max rho = {worst:.4}, fitted C_W = {c_w:.4}"),
    );
    report.wall_clock_s = start.elapsed().as_secs_f64();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random_model::Distribution;

    #[test]
    fn saturated_windows_and_monotone_eps() {
        let model = AlloyModel::covering(1, 20, Distribution::Uniform { lo: 0.0, hi: 1.0 }).unwrap();
        let p = WegnerParams {
            e0: 20.0,
            eps_list: vec![0.5, 1.0, 3.0],
            l_list: vec![4.0, 8.0],
            replicas: 8,
            centers: Some(2),
            mesh: 8,
        };
        let r = run_wegner(&model, &p, 5).unwrap();
        for l in [4.0, 8.0] {
            for c in p.window_centers() {
                let counts: Vec<f64> = p
                    .eps_list
                    .iter()
                    .map(|e| r.find(&format!("L={l};eps={e};E={c}"), "count").unwrap().value)
                    .collect();
                assert!(counts.windows(2).all(|w| w[0] <= w[1]));
            }
        }
        assert!(r.fitted["C_W"].is_finite());
        let again = run_wegner(&model, &p, 5).unwrap();
        assert_eq!(r.to_csv().unwrap(), again.to_csv().unwrap());
    }

    #[test]
    fn rejects_small_boxes_and_missing_claim() {
        let model = AlloyModel::covering(1, 20, Distribution::Uniform { lo: 0.0, hi: 1.0 }).unwrap();
        let p = WegnerParams { e0: 10.0, eps_list: vec![0.1], l_list: vec![0.5], replicas: 4, centers: Some(1), mesh: 8 };
        assert!(run_wegner(&model, &p, 0).is_err());
        let dil = AlloyModel::geometric_dilution(1, 20, Distribution::Uniform { lo: 0.0, hi: 1.0 }).unwrap();
        let p = WegnerParams { l_list: vec![4.0], ..p };
        assert!(run_wegner(&dil, &p, 0).is_err());
    }
}
