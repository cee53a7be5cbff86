//! Initial-scale estimate: probability that the resolvent below the spectrum
//! decays between opposite corners of the box.

use serde::{Deserialize, Serialize};

use super::report::ExperimentReport;
use super::stats::proportion;
use super::{cube, default_mesh, over_replicas};
use crate::error::{Error, Result};
use crate::random_model::AlloyModel;
use crate::spectral_engine::{nodes_in_box, resolvent_block_norm};

fn default_replicas() -> usize {
    200
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IseParams {
    /// Increasing box sizes.
    pub l_list: Vec<f64>,
    #[serde(default = "default_replicas")]
    pub replicas: usize,
    #[serde(default = "default_mesh")]
    pub mesh: usize,
}

/// Outcome of one disorder sample: the block norm, or `None` when `z` sat on
/// the spectrum.
type Sample = Option<f64>;

fn event_fraction(samples: &[Sample], l: f64, c0: f64) -> usize {
    let threshold = (-c0 * l.sqrt()).exp();
    samples.iter().filter(|s| s.is_some_and(|n| n <= threshold)).count()
}

/// Largest `c₀` with `q̂(L, c₀) ≥ 1 − exp(−c₀ L^{d/4})`; the left side falls
/// and the right side rises with `c₀`, so bisection applies.
fn fit_c0(samples: &[Sample], l: f64, d: usize) -> f64 {
    let n = samples.len() as f64;
    let ok = |c: f64| event_fraction(samples, l, c) as f64 / n >= -(-c * l.powf(d as f64 / 4.0)).exp_m1();
    let (mut lo, mut hi) = (0.0, 1.0);
    while ok(hi) && hi < 1e6 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

pub fn run_ise(model: &AlloyModel, p: &IseParams, seed: u64) -> Result<ExperimentReport> {
    let start = std::time::Instant::now();
    let mut report = ExperimentReport::new("ise", Some(seed));
    report.echo(p);
    if model.distribution.min_support() < 0.0 {
        return Err(Error::Precondition("requires non-negative couplings".into()));
    }
    if p.l_list.is_empty() || p.l_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition("box sizes must be strictly increasing".into()));
    }
    let d = model.d;
    let mut all: Vec<Vec<Sample>> = Vec::new();
    for &l in &p.l_list {
        let bx = cube(d, l, vec![0.0; d], p.mesh)?;
        let z = 1.0 / l.sqrt();
        let lo = bx.lower();
        let corner_a: (Vec<f64>, Vec<f64>) = (lo.clone(), lo.iter().map(|x| x + l / 4.0).collect());
        let corner_b: (Vec<f64>, Vec<f64>) =
            (lo.iter().map(|x| x + 3.0 * l / 4.0).collect(), lo.iter().map(|x| x + l).collect());
        let samples = over_replicas(p.replicas, |rep| {
            let h = model.hamiltonian(seed, rep, &bx)?;
            let a = nodes_in_box(&h, &corner_a.0, &corner_a.1);
            let b = nodes_in_box(&h, &corner_b.0, &corner_b.1);
            match resolvent_block_norm(&h, z, &a, &b) {
                Ok(n) => Ok(Some(n)),
                Err(Error::Resonant { .. }) => Ok(None),
                Err(e) => Err(e),
            }
        })?;
        let resonant = samples.iter().filter(|s| s.is_none()).count();
        report.value(format!("L={l}"), "resonant", resonant as f64);
        let mut norms: Vec<f64> = samples.iter().flatten().copied().collect();
        norms.sort_by(f64::total_cmp);
        if let Some(&worst) = norms.last() {
            report.value(format!("L={l}"), "max_block_norm", worst);
            report.value(format!("L={l}"), "median_block_norm", super::stats::median(&norms));
        }
        all.push(samples);
    }
    let last = p.l_list.len() - 1;
    let c0 = fit_c0(&all[last], p.l_list[last], d);
    report.fitted.insert("c0".into(), c0);
    let mut q = Vec::new();
    for (i, &l) in p.l_list.iter().enumerate() {
        let est = proportion(event_fraction(&all[i], l, c0), all[i].len());
        report.estimate(format!("L={l}"), "q_hat", est);
        q.push(est);
    }
    let trend = q.windows(2).all(|w| w[0].mean <= w[1].mean + 2.0 * (w[0].stderr.powi(2) + w[1].stderr.powi(2)).sqrt());
    let listing: Vec<String> = p.l_list.iter().zip(&q).map(|(l, e)| format!("q({l})={:.4}±{:.4}", e.mean, e.stderr)).collect();
    report.clause("non_decreasing_in_L", trend, listing.join(", "));
    report.clause("c0_positive", c0 > 0.0, format!("c0 = {c0:.6}"));
    report.wall_clock_s = start.elapsed().as_secs_f64();
    Ok(report)
}
