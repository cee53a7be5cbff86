//! Diluted Anderson-type minorant `W_ω ≤ V_ω`.
//!
//! On the sublattice `Γ = ((L + 2R)ℤ)^d` every cell `k` picks one site `j_k`
//! near `k` and a set `T_k ⊆ Λ_L(k)` on which `u_{j_k} ≥ 1/N`; the minorant
//! is `W_ω = Σ_k η_{j_k} N^{-1} 1_{T_k}` with `η_j = ε₁ 1[π_j ≥ ε₁]`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::distribution::modulus_s;
use super::model::AlloyModel;
use crate::error::{Error, Result};
use crate::grid_operator::BoxSpec;
use crate::thick_sets::RasterSet;

#[derive(Debug, Clone, PartialEq)]
pub struct MinorantCell {
    /// Sublattice point `k`.
    pub k: Vec<f64>,
    pub site: Vec<i64>,
    /// `T_k`, a raster of `Λ_L(k)`.
    pub t: RasterSet,
    /// `|S_{j_k}|` before trimming.
    pub selected_measure: f64,
}

/// Scalar parameters of the construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinorantParams {
    pub l: u32,
    pub spacing: f64,
    pub n: usize,
    pub eps1: f64,
    pub s_eps1: f64,
    pub gamma_tilde: f64,
    pub gamma_hat: f64,
    /// `min{ε₁/N, γ̂, 1 − s(ε₁)}`.
    pub m: f64,
    pub resolution: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DilutedMinorant {
    pub params: MinorantParams,
    pub cells: Vec<MinorantCell>,
    index: HashMap<Vec<i64>, usize>,
}

/// Number of lattice points in an open interval of length `s` centered at an
/// integer.
fn lattice_points_open(s: f64) -> usize {
    let half = s / 2.0;
    if (half - half.round()).abs() < 1e-12 {
        2 * half.round() as usize - 1
    } else {
        2 * half.floor() as usize + 1
    }
}

/// `ε₁`: lower end of a bisection bracket for `ε/N = 1 − s(ε)`, which
/// balances the first and last entries of `m`.
pub fn choose_eps1(model: &AlloyModel, n: usize) -> Result<f64> {
    let dist = model.distributions();
    let g = |e: f64| e / n as f64 - (1.0 - modulus_s(dist, e));
    let (mut lo, mut hi) = (0.0, dist.iter().map(|d| d.max_support() - d.min_support()).fold(0.0, f64::max));
    if !(g(lo) < 0.0 && g(hi) > 0.0) {
        return Err(Error::Precondition("modulus is degenerate; no admissible ε₁".into()));
    }
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s = modulus_s(dist, lo);
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Precondition(format!("s(ε₁) = {s} is not in (0, 1)")));
    }
    Ok(lo)
}

/// Builds the minorant over every sublattice cell whose enlarged cube lies in
/// the model's core region. `resolution` is the raster resolution of the
/// sets `T_k`; powers of two keep cell faces on the unit lattice.
pub fn construct_diluted_minorant(model: &AlloyModel, l: u32, resolution: u32) -> Result<DilutedMinorant> {
    let claim = model.claimed_thick.as_ref().ok_or(Error::MissingClaim("claimed thick set"))?;
    let cert = model.verify_pi()?;
    if !cert.pass {
        return Err(Error::Precondition(format!("thick-set claim fails: {cert:?}")));
    }
    if model.distribution.min_support() < 0.0 {
        return Err(Error::Precondition("couplings must be non-negative".into()));
    }
    let lf = l as f64;
    if claim.window.a.iter().any(|&a| a > lf) {
        return Err(Error::Precondition(format!("L = {l} is smaller than a window side")));
    }
    let d = model.d;
    let r = model.radius();
    let spacing = lf + 2.0 * r;
    let n = lattice_points_open(spacing).pow(d as u32);
    let eps1 = choose_eps1(model, n)?;
    let s_eps1 = modulus_s(model.distributions(), eps1);
    let gamma_tilde = claim.window.gamma * claim.window.volume() / lf.powi(d as i32);
    let gamma_hat = gamma_tilde * lf.powi(d as i32) / n as f64;
    let m = (eps1 / n as f64).min(gamma_hat).min(1.0 - s_eps1);

    let (core_lo, core_hi) = model.core();
    let ranges: Vec<(i64, i64)> = (0..d)
        .map(|a| {
            (
                ((core_lo[a] + spacing / 2.0) / spacing).ceil() as i64,
                ((core_hi[a] - spacing / 2.0) / spacing).floor() as i64,
            )
        })
        .collect();
    if ranges.iter().any(|(a, b)| a > b) {
        return Err(Error::Coverage("registration hull holds no complete sublattice cell".into()));
    }
    let threshold = 1.0 / n as f64;
    let cell_vol = (1.0 / resolution as f64).powi(d as i32);
    let want = (gamma_hat / cell_vol).round() as usize;

    let mut cells = Vec::new();
    let mut index = HashMap::new();
    let mut mk: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    loop {
        let k: Vec<f64> = mk.iter().map(|&m| m as f64 * spacing).collect();
        let lo: Vec<f64> = k.iter().map(|c| c - spacing / 2.0).collect();
        let hi: Vec<f64> = k.iter().map(|c| c + spacing / 2.0).collect();
        let origin: Vec<f64> = k.iter().map(|c| c - lf / 2.0).collect();
        let mut best: Option<(Vec<i64>, RasterSet)> = None;
        for j in model.sites_near(&lo, &hi) {
            // open cube Λ_{L+2R}(k)
            if (0..d).any(|a| (j[a] as f64 - k[a]).abs() >= spacing / 2.0) {
                continue;
            }
            let sj = RasterSet::from_fn(origin.clone(), vec![lf; d], vec![resolution; d], false, |x| {
                cell_above(model, &j, x, resolution, threshold)
            })?;
            if best.as_ref().is_none_or(|(_, b)| sj.popcount() > b.popcount()) {
                best = Some((j, sj));
            }
        }
        let (site, sj) =
            best.ok_or_else(|| Error::Precondition(format!("no registered site near sublattice point {k:?}")))?;
        let selected_measure = sj.measure();
        if sj.popcount() < want {
            return Err(Error::TooCoarse(format!(
                "best site {site:?} covers {selected_measure} < γ̂ = {gamma_hat} at resolution {resolution}"
            )));
        }
        let mut t = sj.clone();
        let mut kept = 0usize;
        for idx in 0..t.len() {
            if t.get(idx) {
                if kept < want {
                    kept += 1;
                } else {
                    t.set(idx, false);
                }
            }
        }
        if index.insert(mk.clone(), cells.len()).is_some() || cells.iter().any(|c: &MinorantCell| c.site == site) {
            return Err(Error::Precondition("site selection is not injective".into()));
        }
        cells.push(MinorantCell { k, site, t, selected_measure });

        let mut a = 0;
        loop {
            if a == d {
                let params = MinorantParams {
                    l,
                    spacing,
                    n,
                    eps1,
                    s_eps1,
                    gamma_tilde,
                    gamma_hat,
                    m,
                    resolution,
                };
                return Ok(DilutedMinorant { params, cells, index });
            }
            mk[a] += 1;
            if mk[a] <= ranges[a].1 {
                break;
            }
            mk[a] = ranges[a].0;
            a += 1;
        }
    }
}

/// Whether `u_j ≥ threshold` on the whole raster cell centered at `x`,
/// probed at the center and at slightly shrunk corners.
fn cell_above(model: &AlloyModel, j: &[i64], x: &[f64], resolution: u32, threshold: f64) -> bool {
    let d = x.len();
    let half = 0.5 / resolution as f64 * (1.0 - 1e-9);
    let mut rel = vec![0.0; d];
    for corner in 0..=(1usize << d) {
        for a in 0..d {
            let off = if corner == 1 << d {
                0.0
            } else if corner >> a & 1 == 1 {
                half
            } else {
                -half
            };
            rel[a] = x[a] + off - j[a] as f64;
        }
        if model.profile.eval(&rel) < threshold {
            return false;
        }
    }
    true
}

impl DilutedMinorant {
    /// `η_j = ε₁ 1[π_j ≥ ε₁]`.
    pub fn eta(&self, coupling: f64) -> f64 {
        if coupling >= self.params.eps1 {
            self.params.eps1
        } else {
            0.0
        }
    }

    /// `W_ω` at the nodes of `bx`, with couplings read from the same keyed
    /// streams as the model's potential.
    pub fn potential(&self, model: &AlloyModel, seed: u64, replica: u64, bx: &BoxSpec<f64>) -> Result<Vec<f64>> {
        let mut w = vec![0.0; bx.dof()];
        let scale = 1.0 / self.params.n as f64;
        let mut cache: HashMap<usize, f64> = HashMap::new();
        for (i, wi) in w.iter_mut().enumerate() {
            let x = bx.position(i);
            let mk: Vec<i64> = x.iter().map(|c| (c / self.params.spacing).round() as i64).collect();
            let Some(&ci) = self.index.get(&mk) else { continue };
            let cell = &self.cells[ci];
            if cell.t.contains_point(&x) {
                let eta = *cache
                    .entry(ci)
                    .or_insert_with(|| self.eta(model.coupling(seed, replica, &cell.site)));
                *wi = eta * scale;
            }
        }
        Ok(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_operator::Boundary;
    use crate::random_model::Distribution;

    #[test]
    fn covering_construction() {
        let model = AlloyModel::covering(1, 40, Distribution::Uniform { lo: 0.0, hi: 1.0 }).unwrap();
        let w = construct_diluted_minorant(&model, 4, 16).unwrap();
        let p = &w.params;
        assert_eq!(p.n, 5);
        assert_eq!(p.spacing, 5.0);
        assert!((p.gamma_tilde - 0.25).abs() < 1e-15);
        assert!((p.gamma_hat - 0.2).abs() < 1e-15);
        assert!((p.eps1 - 5.0 / 6.0).abs() < 2e-6);
        assert!(p.m > 0.0);
        for c in &w.cells {
            assert!((c.t.measure() - p.gamma_hat).abs() <= 1.0 / 16.0);
            assert!((c.selected_measure - 1.0).abs() < 1e-12);
        }
        assert_eq!(lattice_points_open(5.0), 5);
        assert_eq!(lattice_points_open(4.0), 3);
        let bx = BoxSpec::with_mesh(1, 30.0, vec![0.0], 16, Boundary::Dirichlet).unwrap();
        for rep in 0..20 {
            let v = model.sample_potential(3, rep, &bx).unwrap();
            let wv = w.potential(&model, 3, rep, &bx).unwrap();
            assert!(wv.iter().zip(&v).all(|(a, b)| a <= b));
        }
    }

    #[test]
    fn requires_thick_claim() {
        let model = AlloyModel::geometric_dilution(1, 40, Distribution::Uniform { lo: 0.0, hi: 1.0 }).unwrap();
        assert!(matches!(construct_diluted_minorant(&model, 4, 16), Err(Error::MissingClaim(_))));
    }
}
