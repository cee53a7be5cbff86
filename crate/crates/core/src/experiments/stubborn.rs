//! Eigenvalues that no disorder configuration can move: boxes where the
//! potential (almost) vanishes keep an eigenvalue near any energy `E`.

use serde::{Deserialize, Serialize};

use super::report::ExperimentReport;
use super::{cube, default_mesh, join, over_replicas};
use crate::error::{Error, Result};
use crate::grid_operator::{discrete_dirichlet_mode, discretization_error, max_spectral_gap_below};
use crate::random_model::AlloyModel;
use crate::spectral_engine::distance_to_spectrum;
use crate::thick_sets::level_set;

fn default_replicas() -> usize {
    100
}

fn default_candidates() -> usize {
    3
}

fn default_search_resolution() -> u32 {
    8
}

fn default_eigen_index() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StubbornParams {
    pub e: f64,
    pub l: f64,
    #[serde(default = "default_candidates")]
    pub box_candidates: usize,
    #[serde(default = "default_replicas")]
    pub replicas: usize,
    #[serde(default = "default_mesh")]
    pub mesh: usize,
    /// Raster resolution of the level-set search.
    #[serde(default = "default_search_resolution")]
    pub search_resolution: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StubbornExpParams {
    pub l: f64,
    /// 1-based index into the free Dirichlet eigenvalues of the box.
    #[serde(default = "default_eigen_index")]
    pub eigen_index: usize,
    #[serde(default = "default_candidates")]
    pub box_candidates: usize,
    #[serde(default = "default_replicas")]
    pub replicas: usize,
    #[serde(default = "default_mesh")]
    pub mesh: usize,
    #[serde(default = "default_search_resolution")]
    pub search_resolution: u32,
}

/// `‖p_1‖_{4/3}` for the Gaussian heat kernel `p_1(z) = (4π)^{-d/2} e^{-|z|²/4}`.
pub fn heat_kernel_constant(d: usize) -> f64 {
    let d = d as f64;
    let pi = std::f64::consts::PI;
    (4.0 * pi).powf(-d / 2.0) * (3.0 * pi).powf(3.0 * d / 8.0)
}

/// `C = C_d · max(|m₋|, |m₊|) · e^{E + ε/2}`.
fn perturbation_constant(model: &AlloyModel, e: f64, eps: f64) -> f64 {
    let m = model.distribution.min_support().abs().max(model.distribution.max_support().abs());
    heat_kernel_constant(model.d) * m.max(f64::MIN_POSITIVE) * (e + eps / 2.0).exp()
}

struct Candidate {
    center: Vec<f64>,
    measure: f64,
}

/// Sublattice boxes `Λ_L(x)`, `x ∈ (Lℤ)^d`, inside the core region, ordered by
/// `vol(S_κ ∩ Λ_L(x))` and kept when below `δ`.
fn search_boxes(model: &AlloyModel, l: f64, kappa: f64, delta: f64, resolution: u32, max: usize) -> Result<(Vec<Candidate>, usize)> {
    let cert = model.verify_no_pi(&[kappa], &[vec![l; model.d]], resolution)?;
    if !cert.pass {
        return Err(Error::Precondition(format!(
            "model does not refute thickness of its level sets (sup U = {}, bound {}, unrefuted {:?})",
            cert.sup_u, cert.bound, cert.unrefuted
        )));
    }
    let u = model.u_field(resolution)?;
    let s = level_set(&u, kappa)?;
    let (lo, hi) = model.core();
    let ranges: Vec<(i64, i64)> = (0..model.d)
        .map(|a| (((lo[a] + l / 2.0) / l).ceil() as i64, ((hi[a] - l / 2.0) / l).floor() as i64))
        .collect();
    let mut all = Vec::new();
    if ranges.iter().all(|(a, b)| a <= b) {
        let mut m: Vec<i64> = ranges.iter().map(|r| r.0).collect();
        'scan: loop {
            let center: Vec<f64> = m.iter().map(|&k| k as f64 * l).collect();
            let lower: Vec<f64> = center.iter().map(|c| c - l / 2.0).collect();
            let measure = s.window_measure(&lower, &vec![l; model.d])?;
            all.push(Candidate { center, measure });
            let mut a = 0;
            loop {
                if a == model.d {
                    break 'scan;
                }
                m[a] += 1;
                if m[a] <= ranges[a].1 {
                    break;
                }
                m[a] = ranges[a].0;
                a += 1;
            }
        }
    }
    let scanned = all.len();
    // stable sort keeps the scan order among equal measures
    all.sort_by(|a, b| a.measure.total_cmp(&b.measure));
    Ok((all.into_iter().filter(|c| c.measure < delta).take(max).collect(), scanned))
}

fn box_key(c: &[f64]) -> String {
    format!("x={}", join(c))
}

pub fn run_stubborn(model: &AlloyModel, p: &StubbornParams, seed: u64) -> Result<ExperimentReport> {
    let start = std::time::Instant::now();
    let mut report = ExperimentReport::new("stubborn", Some(seed));
    report.echo(p);
    if p.l < 1.0 || p.e < 0.0 {
        return Err(Error::Precondition("requires L ≥ 1 and E ≥ 0".into()));
    }
    let d = model.d;
    let root = 6.0 * std::f64::consts::PI * (p.e + 1.0).sqrt();
    let eps = 2.0 * root / p.l;
    let c_u = model.claimed_bound.ok_or(Error::MissingClaim("claimed bound C_U"))?;
    let c = perturbation_constant(model, p.e, eps);
    let delta = (root / (2.0 * c_u * c * p.l)).powi(4);
    let kappa = root / (2.0 * c * p.l.powf(1.0 + d as f64 / 2.0));
    report.fitted.insert("C".into(), c);
    report.fitted.insert("delta".into(), delta);
    report.fitted.insert("kappa".into(), kappa);
    report.value(format!("L={}", p.l), "free_gap", max_spectral_gap_below(p.l, d, p.e));
    report.value(format!("L={}", p.l), "free_gap_bound", root / p.l);

    let (boxes, scanned) = search_boxes(model, p.l, kappa, delta, p.search_resolution, p.box_candidates)?;
    report.value("search", "boxes_scanned", scanned as f64);
    if boxes.is_empty() {
        report.clause("at_least_3_boxes", false, format!("no candidate box among {scanned} scanned"));
        report.wall_clock_s = start.elapsed().as_secs_f64();
        return Ok(report);
    }
    let h = 1.0 / p.mesh as f64;
    let allowance = 3.0 * discretization_error(p.l, h, d, p.e + eps);
    let threshold = eps + allowance;
    report.fitted.insert("epsilon".into(), eps);
    report.fitted.insert("allowance".into(), allowance);
    let mut good = 0usize;
    for b in &boxes {
        let bx = cube(d, p.l, b.center.clone(), p.mesh)?;
        let dists = over_replicas(p.replicas, |rep| {
            let ham = model.hamiltonian(seed, rep, &bx)?;
            distance_to_spectrum(&ham, p.e, threshold)
        })?;
        let hits = dists.iter().filter(|x| x.is_some()).count();
        let worst = dists.iter().map(|x| x.unwrap_or(f64::INFINITY)).fold(0.0, f64::max);
        let key = box_key(&b.center);
        report.value(key.clone(), "vol_S_kappa", b.measure);
        report.value(key.clone(), "max_distance", worst);
        report.estimate(key, "within_epsilon", super::stats::proportion(hits, p.replicas));
        if hits == p.replicas {
            good += 1;
        }
    }
    report.clause(
        "at_least_3_boxes",
        good >= 3,
        format!("{good} of {} boxes keep an eigenvalue within {threshold:.4} of E for every replica", boxes.len()),
    );
    report.wall_clock_s = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Free discrete Dirichlet eigenvalue of the cube, 1-based index.
fn free_discrete_eigenvalue(l: f64, h: f64, d: usize, index: usize) -> f64 {
    let modes: Vec<f64> = (1..=index).map(|k| discrete_dirichlet_mode(l, h, k)).collect();
    let mut sums = vec![0.0];
    for _ in 0..d {
        sums = sums.iter().flat_map(|s| modes.iter().map(move |m| s + m)).collect();
    }
    sums.sort_by(f64::total_cmp);
    sums[index - 1]
}

pub fn run_stubborn_exponential(model: &AlloyModel, p: &StubbornExpParams, seed: u64) -> Result<ExperimentReport> {
    let start = std::time::Instant::now();
    let mut report = ExperimentReport::new("stubborn_exponential", Some(seed));
    report.echo(p);
    let width = (-p.l).exp();
    if width < 1e-12 {
        return Err(Error::Precondition(format!(
            "e^-L = {width:e} is below double-precision resolution of the spectrum; use L < 27"
        )));
    }
    if p.l < 1.0 || p.eigen_index == 0 {
        return Err(Error::Precondition("requires L ≥ 1 and a 1-based eigenvalue index".into()));
    }
    let d = model.d;
    let h = 1.0 / p.mesh as f64;
    let e = free_discrete_eigenvalue(p.l, h, d, p.eigen_index);
    let root = 6.0 * std::f64::consts::PI * (e + 1.0).sqrt();
    let c_u = model.claimed_bound.ok_or(Error::MissingClaim("claimed bound C_U"))?;
    let c = perturbation_constant(model, e, width);
    let delta = (root / (2.0 * c_u * c * p.l.exp())).powi(4);
    let kappa = root / (2.0 * c * p.l.powf(d as f64 / 2.0) * p.l.exp());
    report.fitted.insert("E".into(), e);
    report.fitted.insert("C".into(), c);
    report.fitted.insert("delta".into(), delta);
    report.fitted.insert("kappa".into(), kappa);
    report.fitted.insert("half_width".into(), width);

    let (boxes, scanned) = search_boxes(model, p.l, kappa, delta, p.search_resolution, p.box_candidates)?;
    report.value("search", "boxes_scanned", scanned as f64);
    if boxes.is_empty() {
        report.clause("at_least_3_boxes", false, format!("no candidate box among {scanned} scanned"));
        report.wall_clock_s = start.elapsed().as_secs_f64();
        return Ok(report);
    }
    let mut good = 0usize;
    for b in &boxes {
        let bx = cube(d, p.l, b.center.clone(), p.mesh)?;
        let dists = over_replicas(p.replicas, |rep| {
            let ham = model.hamiltonian(seed, rep, &bx)?;
            distance_to_spectrum(&ham, e, width)
        })?;
        let hits = dists.iter().filter(|x| x.is_some()).count();
        let worst = dists.iter().map(|x| x.unwrap_or(f64::INFINITY)).fold(0.0, f64::max);
        let key = box_key(&b.center);
        report.value(key.clone(), "vol_S_kappa", b.measure);
        report.value(key.clone(), "max_distance", worst);
        report.estimate(key, "within_window", super::stats::proportion(hits, p.replicas));
        if hits == p.replicas {
            good += 1;
        }
    }
    report.clause(
        "at_least_3_boxes",
        good >= 3,
        format!("{good} of {} boxes meet [E − e^-L, E + e^-L] for every replica", boxes.len()),
    );
    report.wall_clock_s = start.elapsed().as_secs_f64();
    Ok(report)
}
