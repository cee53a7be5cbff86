//! Alloy-type random potentials `V_ω = Σ_j π_j(ω) u_j`.

use std::collections::BTreeSet;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::distribution::Distribution;
use super::rng::site_rng;
use crate::error::{Error, Result};
use crate::grid_operator::{add_potential, build_free_laplacian, BoxSpec, DiscreteHamiltonian};
use crate::thick_sets::{level_set, product_and_periodize, CantorSpec, GridField, RasterSet, WindowSpec};

/// Which lattice points inside the registration hull carry a site.
#[derive(Debug, Clone, PartialEq)]
pub enum Layout {
    Full,
    /// Sites with `|j|_∞ = 2^m`, `m ≥ 0`.
    GeometricDilution,
    /// Sites with `j[axis] = 0`.
    Slab { axis: usize },
    Explicit(BTreeSet<Vec<i64>>),
}

impl Layout {
    pub fn contains(&self, j: &[i64]) -> bool {
        match self {
            Layout::Full => true,
            Layout::GeometricDilution => {
                let m = j.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0);
                m.is_power_of_two()
            }
            Layout::Slab { axis } => j.get(*axis) == Some(&0),
            Layout::Explicit(set) => set.contains(j),
        }
    }
}

/// Single-site profile `u` with `u_j = u(· − j)`; non-negative and compactly
/// supported.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    /// `height · 1[x ∈ [−1/2, 1/2)^d]`.
    Cell { height: f64 },
    /// `height · 1[|x| < radius]`.
    Ball { radius: f64, height: f64 },
    /// `height · 1_set`, the raster given in site-local coordinates.
    Raster { set: Arc<RasterSet>, height: f64 },
}

impl Profile {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Profile::Cell { height } => {
                if x.iter().all(|&c| (-0.5..0.5).contains(&c)) {
                    *height
                } else {
                    0.0
                }
            }
            Profile::Ball { radius, height } => {
                if x.iter().map(|c| c * c).sum::<f64>() < radius * radius {
                    *height
                } else {
                    0.0
                }
            }
            Profile::Raster { set, height } => {
                if set.contains_point(x) {
                    *height
                } else {
                    0.0
                }
            }
        }
    }

    /// Radius `R` of a ball about the site containing the support.
    pub fn radius(&self, d: usize) -> f64 {
        match self {
            Profile::Cell { .. } => 0.5 * (d as f64).sqrt(),
            Profile::Ball { radius, .. } => *radius,
            Profile::Raster { set, .. } => {
                let far: f64 = set
                    .origin()
                    .iter()
                    .zip(set.extent())
                    .map(|(&o, &e)| o.abs().max((o + e).abs()).powi(2))
                    .sum();
                far.sqrt()
            }
        }
    }

    pub fn height(&self) -> f64 {
        match self {
            Profile::Cell { height } | Profile::Ball { height, .. } | Profile::Raster { height, .. } => *height,
        }
    }

    /// `‖u‖_p`.
    pub fn lp_norm(&self, d: usize, p: f64) -> f64 {
        let support = match self {
            Profile::Cell { .. } => 1.0,
            Profile::Ball { radius, .. } => {
                let unit = match d {
                    1 => 2.0,
                    2 => std::f64::consts::PI,
                    _ => 4.0 / 3.0 * std::f64::consts::PI,
                };
                unit * radius.powi(d as i32)
            }
            Profile::Raster { set, .. } => set.measure(),
        };
        self.height().abs() * support.powf(1.0 / p)
    }
}

/// Claimed thick set: `Σ_j u_j ≥ 1_S` with `S` `(γ, a)`-thick.
#[derive(Debug, Clone, PartialEq)]
pub struct ThickClaim {
    pub window: WindowSpec,
    pub set: RasterSet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlloyModel {
    pub d: usize,
    /// Registration hull: lattice points `lo ≤ j ≤ hi` componentwise.
    pub lo: Vec<i64>,
    pub hi: Vec<i64>,
    pub layout: Layout,
    pub profile: Profile,
    pub distribution: Distribution,
    pub claimed_thick: Option<ThickClaim>,
    pub claimed_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiCertificate {
    pub pass: bool,
    pub gamma_claimed: f64,
    pub gamma_star: f64,
    pub error_bound: f64,
    pub cells_checked: usize,
    pub violations: usize,
    pub first_violation: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoPiWitness {
    pub kappa: f64,
    pub a: Vec<f64>,
    pub position: Vec<f64>,
    pub measure: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoPiCertificate {
    pub pass: bool,
    pub sup_u: f64,
    pub bound: f64,
    pub witnesses: Vec<NoPiWitness>,
    /// `(κ, a)` pairs without a witness.
    pub unrefuted: Vec<(f64, Vec<f64>)>,
}

/// Smallest γ in the refutation grid; a witness window must hold less than
/// `GAMMA_FLOOR · vol(A_a)` of the level set.
pub const GAMMA_FLOOR: f64 = 1e-3;

impl AlloyModel {
    pub fn new(
        d: usize,
        half_extent: i64,
        layout: Layout,
        profile: Profile,
        distribution: Distribution,
    ) -> Result<Self> {
        if d == 0 || d > 3 {
            return Err(Error::UnsupportedDimension(d));
        }
        distribution.validate()?;
        if half_extent < 1 {
            return Err(Error::InvalidModel("lattice extent must be at least 1".into()));
        }
        if profile.height() < 0.0 {
            return Err(Error::InvalidModel("single-site profiles must be non-negative".into()));
        }
        if let Profile::Raster { set, .. } = &profile {
            if set.d() != d || set.is_periodic() {
                return Err(Error::InvalidModel("profile raster must be non-periodic and match the dimension".into()));
            }
        }
        if let Layout::Slab { axis } = layout {
            if axis >= d {
                return Err(Error::InvalidModel(format!("slab axis {axis} out of range")));
            }
        }
        Ok(AlloyModel {
            d,
            lo: vec![-half_extent; d],
            hi: vec![half_extent; d],
            layout,
            profile,
            distribution,
            claimed_thick: None,
            claimed_bound: None,
        })
    }

    /// Unit-cell indicators on the full lattice: `Σ_j u_j ≡ 1`.
    pub fn covering(d: usize, half_extent: i64, distribution: Distribution) -> Result<Self> {
        let mut m = Self::new(d, half_extent, Layout::Full, Profile::Cell { height: 1.0 }, distribution)?;
        let set = RasterSet::full(vec![-0.5; d], vec![1.0; d], vec![4; d], true)?;
        m.claimed_thick = Some(ThickClaim { window: WindowSpec::new(vec![1.0; d], 1.0)?, set });
        m.claimed_bound = Some(1.0);
        Ok(m)
    }

    /// Translates of a fat Cantor product set in `[−1/2, 1/2)^d`; the
    /// periodized set is the claimed thick set with `a = 1`.
    pub fn cantor_translates(
        d: usize,
        half_extent: i64,
        spec: &CantorSpec,
        resolution: u32,
        distribution: Distribution,
    ) -> Result<Self> {
        let axis = crate::thick_sets::build_fat_cantor(spec, resolution)?.with_origin(vec![-0.5])?;
        let periodic = product_and_periodize(&vec![axis; d])?;
        let mut local = periodic.clone();
        local.set_periodic(false);
        let profile = Profile::Raster { set: Arc::new(local), height: 1.0 };
        let mut m = Self::new(d, half_extent, Layout::Full, profile, distribution)?;
        let gamma = periodic.certify_thickness(&vec![1.0; d])?.gamma_star;
        m.claimed_thick = Some(ThickClaim { window: WindowSpec::new(vec![1.0; d], gamma)?, set: periodic });
        m.claimed_bound = Some(1.0);
        Ok(m)
    }

    /// Unit-cell sites on the shells `|j|_∞ = 2^m`.
    pub fn geometric_dilution(d: usize, half_extent: i64, distribution: Distribution) -> Result<Self> {
        let mut m =
            Self::new(d, half_extent, Layout::GeometricDilution, Profile::Cell { height: 1.0 }, distribution)?;
        m.claimed_bound = Some(1.0);
        Ok(m)
    }

    /// Unit-cell sites on the hyperplane `j_1 = 0`.
    pub fn slab(d: usize, half_extent: i64, distribution: Distribution) -> Result<Self> {
        let mut m = Self::new(d, half_extent, Layout::Slab { axis: 0 }, Profile::Cell { height: 1.0 }, distribution)?;
        m.claimed_bound = Some(1.0);
        Ok(m)
    }

    pub fn radius(&self) -> f64 {
        self.profile.radius(self.d)
    }

    pub fn distributions(&self) -> &[Distribution] {
        std::slice::from_ref(&self.distribution)
    }

    /// Registered sites `j` with `lo − R ≤ j ≤ hi + R`, lexicographic order.
    pub fn sites_near(&self, lo: &[f64], hi: &[f64]) -> Vec<Vec<i64>> {
        let r = self.radius();
        let from: Vec<i64> = (0..self.d).map(|a| ((lo[a] - r).ceil() as i64).max(self.lo[a])).collect();
        let to: Vec<i64> = (0..self.d).map(|a| ((hi[a] + r).floor() as i64).min(self.hi[a])).collect();
        let mut out = Vec::new();
        if from.iter().zip(&to).any(|(f, t)| f > t) {
            return out;
        }
        let mut j = from.clone();
        loop {
            if self.layout.contains(&j) {
                out.push(j.clone());
            }
            let mut a = self.d;
            loop {
                if a == 0 {
                    return out;
                }
                a -= 1;
                if j[a] < to[a] {
                    j[a] += 1;
                    for b in a + 1..self.d {
                        j[b] = from[b];
                    }
                    break;
                }
            }
        }
    }

    /// Fails unless every lattice point within `R` of the region is inside
    /// the registration hull.
    pub fn check_coverage(&self, lo: &[f64], hi: &[f64]) -> Result<()> {
        let r = self.radius();
        for a in 0..self.d {
            if ((lo[a] - r).ceil() as i64) < self.lo[a] || ((hi[a] + r).floor() as i64) > self.hi[a] {
                return Err(Error::Coverage(format!(
                    "region [{:?}, {:?}] padded by R = {r} leaves the registered lattice [{:?}, {:?}]",
                    lo, hi, self.lo, self.hi
                )));
            }
        }
        Ok(())
    }

    /// Region whose points see only registered sites.
    pub fn core(&self) -> (Vec<f64>, Vec<f64>) {
        let r = self.radius().ceil();
        (
            self.lo.iter().map(|&l| l as f64 + r).collect(),
            self.hi.iter().map(|&h| h as f64 - r).collect(),
        )
    }

    pub fn coupling(&self, seed: u64, replica: u64, j: &[i64]) -> f64 {
        self.distribution.sample(&mut site_rng(seed, replica, j))
    }

    /// `Σ_j c(j) u_j` at the nodes of `bx`.
    pub fn superpose(&self, bx: &BoxSpec<f64>, coupling: impl Fn(&[i64]) -> f64) -> Result<Vec<f64>> {
        if bx.d != self.d {
            return Err(Error::LengthMismatch { expected: self.d, got: bx.d });
        }
        let lo = bx.lower();
        let hi: Vec<f64> = lo.iter().map(|l| l + bx.side).collect();
        self.check_coverage(&lo, &hi)?;
        let r = self.radius();
        let h = bx.h();
        let first: Vec<f64> = (0..self.d).map(|a| bx.coord(a, 0)).collect();
        let mut v = vec![0.0; bx.dof()];
        let mut rel = vec![0.0; self.d];
        'sites: for j in self.sites_near(&lo, &hi) {
            let c = coupling(&j);
            if c == 0.0 {
                continue;
            }
            // node index range along each axis within distance R of the site
            let mut from = [0usize; 3];
            let mut to = [0usize; 3];
            for a in 0..self.d {
                let f = ((j[a] as f64 - r - first[a]) / h).floor().max(0.0) as usize;
                let t = ((j[a] as f64 + r - first[a]) / h).ceil() as i64 + 1;
                let t = t.clamp(0, bx.n as i64) as usize;
                if t <= f {
                    continue 'sites;
                }
                from[a] = f;
                to[a] = t;
            }
            let mut mi = from;
            loop {
                for a in 0..self.d {
                    rel[a] = bx.coord(a, mi[a]) - j[a] as f64;
                }
                let u = self.profile.eval(&rel);
                if u != 0.0 {
                    v[bx.flat_index(&mi[..self.d])] += c * u;
                }
                let mut a = 0;
                loop {
                    if a == self.d {
                        continue 'sites;
                    }
                    mi[a] += 1;
                    if mi[a] < to[a] {
                        break;
                    }
                    mi[a] = from[a];
                    a += 1;
                }
            }
        }
        Ok(v)
    }

    /// `V_ω` at the nodes of `bx` for disorder `(seed, replica)`.
    pub fn sample_potential(&self, seed: u64, replica: u64, bx: &BoxSpec<f64>) -> Result<Vec<f64>> {
        self.superpose(bx, |j| self.coupling(seed, replica, j))
    }

    /// `U = Σ_j u_j` at the nodes of `bx`.
    pub fn u_sum(&self, bx: &BoxSpec<f64>) -> Result<Vec<f64>> {
        self.superpose(bx, |_| 1.0)
    }

    /// `U(x)` at a single point, using the registered sites only.
    pub fn u_at(&self, x: &[f64]) -> f64 {
        let mut rel = vec![0.0; self.d];
        self.sites_near(x, x)
            .iter()
            .map(|j| {
                for a in 0..self.d {
                    rel[a] = x[a] - j[a] as f64;
                }
                self.profile.eval(&rel)
            })
            .sum()
    }

    /// `-Δ + V_ω` on `bx`.
    pub fn hamiltonian(&self, seed: u64, replica: u64, bx: &BoxSpec<f64>) -> Result<DiscreteHamiltonian<f64>> {
        let v = self.sample_potential(seed, replica, bx)?;
        add_potential(&build_free_laplacian(bx)?, &v)
    }

    /// Checks `U ≥ 1` on every cell of the claimed set inside the core region
    /// and that the set is `(γ, a)`-thick.
    pub fn verify_pi(&self) -> Result<PiCertificate> {
        let claim = self.claimed_thick.as_ref().ok_or(Error::MissingClaim("claimed thick set"))?;
        let s = &claim.set;
        if s.d() != self.d {
            return Err(Error::InvalidModel("claimed set dimension differs from the model".into()));
        }
        let cert = if s.is_periodic() {
            s.certify_thickness(&claim.window.a)?
        } else {
            let (m, x) = s.min_window(&claim.window.a)?;
            crate::thick_sets::ThicknessCertificate {
                gamma_star: m / claim.window.volume(),
                error_bound: 0.0,
                witness: x,
            }
        };
        let (core_lo, core_hi) = self.core();
        // period translates of the claimed raster that meet the core region
        let mut offsets: Vec<Vec<f64>> = vec![vec![]];
        for a in 0..self.d {
            let (o, e) = (s.origin()[a], s.extent()[a]);
            let (m0, m1) = if s.is_periodic() {
                (((core_lo[a] - o) / e).floor() as i64, ((core_hi[a] - o) / e).ceil() as i64)
            } else {
                (0, 0)
            };
            offsets = offsets
                .into_iter()
                .flat_map(|p| {
                    (m0..=m1).map(move |m| {
                        let mut q = p.clone();
                        q.push(m as f64 * e);
                        q
                    })
                })
                .collect();
        }
        let per_offset: Vec<(usize, usize, Option<Vec<f64>>)> = offsets
            .par_iter()
            .map(|off| {
                let (mut checked, mut bad, mut first) = (0usize, 0usize, None);
                for idx in 0..s.len() {
                    if !s.get(idx) {
                        continue;
                    }
                    let x: Vec<f64> = s.cell_center(idx).iter().zip(off).map(|(c, o)| c + o).collect();
                    if (0..self.d).any(|a| x[a] < core_lo[a] || x[a] > core_hi[a]) {
                        continue;
                    }
                    checked += 1;
                    if self.u_at(&x) < 1.0 - 1e-12 {
                        bad += 1;
                        if first.is_none() {
                            first = Some(x);
                        }
                    }
                }
                (checked, bad, first)
            })
            .collect();
        let cells_checked = per_offset.iter().map(|p| p.0).sum();
        let violations = per_offset.iter().map(|p| p.1).sum();
        let first_violation = per_offset.into_iter().find_map(|p| p.2);
        let pass = violations == 0 && cells_checked > 0 && cert.gamma_star >= claim.window.gamma - 1e-12;
        Ok(PiCertificate {
            pass,
            gamma_claimed: claim.window.gamma,
            gamma_star: cert.gamma_star,
            error_bound: cert.error_bound,
            cells_checked,
            violations,
            first_violation,
        })
    }

    /// Finite refutation of a thick level set: checks `sup U ≤ C_U` on a
    /// raster of the core region and looks for windows holding (almost) none
    /// of `{U ≥ κ}` for each `κ` and each window shape.
    pub fn verify_no_pi(&self, kappas: &[f64], windows: &[Vec<f64>], resolution: u32) -> Result<NoPiCertificate> {
        let bound = self.claimed_bound.ok_or(Error::MissingClaim("claimed bound C_U"))?;
        let u = self.u_field(resolution)?;
        let sup_u = u.sup();
        let mut witnesses = Vec::new();
        let mut unrefuted = Vec::new();
        for &kappa in kappas {
            let s = level_set(&u, kappa)?;
            for a in windows {
                let vol: f64 = a.iter().product();
                let (m, x) = s.min_window(a)?;
                if m < GAMMA_FLOOR * vol {
                    witnesses.push(NoPiWitness { kappa, a: a.clone(), position: x, measure: m });
                } else {
                    unrefuted.push((kappa, a.clone()));
                }
            }
        }
        Ok(NoPiCertificate { pass: sup_u <= bound + 1e-12 && unrefuted.is_empty(), sup_u, bound, witnesses, unrefuted })
    }

    /// `U` sampled at cell centers of a raster of the core region.
    pub fn u_field(&self, resolution: u32) -> Result<GridField> {
        let (lo, hi) = self.core();
        let extent: Vec<f64> = lo.iter().zip(&hi).map(|(l, h)| h - l).collect();
        if extent.iter().any(|&e| e <= 0.0) {
            return Err(Error::InvalidModel("registration hull too small for its profile radius".into()));
        }
        let geometry = RasterSet::empty(lo, extent, vec![resolution; self.d], false)?;
        Ok(GridField::from_fn(geometry, |x| self.u_at(x)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_operator::Boundary;

    fn uniform() -> Distribution {
        Distribution::Uniform { lo: 0.0, hi: 1.0 }
    }

    fn box1(side: f64, center: f64) -> BoxSpec<f64> {
        BoxSpec::with_mesh(1, side, vec![center], 8, Boundary::Dirichlet).unwrap()
    }

    #[test]
    fn covering_sums_to_one() {
        let m = AlloyModel::covering(1, 20, uniform()).unwrap();
        let u = m.u_sum(&box1(10.0, 0.0)).unwrap();
        assert!(u.iter().all(|&x| x == 1.0));
        let m2 = AlloyModel::covering(2, 8, uniform()).unwrap();
        let bx = BoxSpec::with_mesh(2, 4.0, vec![0.5, 0.0], 4, Boundary::Dirichlet).unwrap();
        assert!(m2.u_sum(&bx).unwrap().iter().all(|&x| x == 1.0));
    }

    #[test]
    fn deterministic_sampling() {
        let m = AlloyModel::covering(1, 20, uniform()).unwrap();
        let bx = box1(8.0, 0.0);
        let a = m.sample_potential(7, 0, &bx).unwrap();
        assert_eq!(a, m.sample_potential(7, 0, &bx).unwrap());
        assert_ne!(a, m.sample_potential(7, 1, &bx).unwrap());
        assert!(a.iter().all(|&x| (0.0..1.0).contains(&x)));
        // the same site reads the same coupling from any box
        let b = m.sample_potential(7, 0, &box1(8.0, 2.0)).unwrap();
        let node_a = a.len() / 2 + 16; // position 2.0
        let node_b = b.len() / 2; // position 2.0
        assert_eq!(a[node_a], b[node_b]);
    }

    #[test]
    fn single_site_structure() {
        let mut set = BTreeSet::new();
        set.insert(vec![0]);
        let m = AlloyModel::new(1, 5, Layout::Explicit(set), Profile::Ball { radius: 1.5, height: 1.0 }, uniform())
            .unwrap();
        let bx = box1(4.0, 0.0);
        let v = m.sample_potential(1, 0, &bx).unwrap();
        let c = m.coupling(1, 0, &[0]);
        for (i, &x) in v.iter().enumerate() {
            let p = bx.position(i)[0];
            assert_eq!(x, if p.abs() < 1.5 { c } else { 0.0 });
        }
    }

    #[test]
    fn coverage_is_enforced() {
        let m = AlloyModel::covering(1, 4, uniform()).unwrap();
        assert!(m.sample_potential(0, 0, &box1(6.0, 0.0)).is_ok());
        assert!(matches!(m.sample_potential(0, 0, &box1(10.0, 0.0)), Err(Error::Coverage(_))));
    }

    #[test]
    fn layouts() {
        assert!(Layout::GeometricDilution.contains(&[4]) && Layout::GeometricDilution.contains(&[-1]));
        assert!(!Layout::GeometricDilution.contains(&[0]) && !Layout::GeometricDilution.contains(&[6]));
        assert!(Layout::GeometricDilution.contains(&[3, -8]));
        assert!(Layout::Slab { axis: 0 }.contains(&[0, 5]) && !Layout::Slab { axis: 0 }.contains(&[1, 0]));
    }

    #[test]
    fn pi_verification() {
        let c = AlloyModel::covering(1, 10, uniform()).unwrap().verify_pi().unwrap();
        assert!(c.pass && c.gamma_star == 1.0 && c.cells_checked > 0);
        let spec = CantorSpec::smith_volterra(3);
        let cm = AlloyModel::cantor_translates(1, 10, &spec, 256, uniform()).unwrap();
        let cc = cm.verify_pi().unwrap();
        assert!(cc.pass, "{cc:?}");
        assert!((cc.gamma_star - spec.measure()).abs() < 1e-12);
        let mut half = AlloyModel::covering(1, 10, uniform()).unwrap();
        half.profile = Profile::Cell { height: 0.5 };
        let hc = half.verify_pi().unwrap();
        assert!(!hc.pass && hc.violations == hc.cells_checked);
        assert!(hc.first_violation.is_some());
        let none = AlloyModel::geometric_dilution(1, 10, uniform()).unwrap();
        assert!(matches!(none.verify_pi(), Err(Error::MissingClaim(_))));
    }

    #[test]
    fn no_pi_verification() {
        let slab = AlloyModel::slab(2, 16, uniform()).unwrap();
        let c = slab.verify_no_pi(&[0.5, 1e-3], &[vec![2.0, 2.0]], 4).unwrap();
        assert!(c.pass && c.sup_u == 1.0);
        assert!(c.witnesses.iter().all(|w| w.measure == 0.0 && (w.position[0] >= 0.5 || w.position[0] + 2.0 <= -0.5)));
        let dil = AlloyModel::geometric_dilution(1, 130, uniform()).unwrap();
        let c = dil.verify_no_pi(&[0.1], &[vec![30.0]], 8).unwrap();
        assert!(c.pass);
        let x = c.witnesses[0].position[0];
        // only the largest gaps hold a window of length 30
        assert!(x.abs() > 64.0 && x.abs() < 128.0, "{x}");
        let mut zero = AlloyModel::geometric_dilution(1, 20, uniform()).unwrap();
        zero.profile = Profile::Cell { height: 0.0 };
        assert!(zero.verify_no_pi(&[0.1], &[vec![1.0]], 4).unwrap().pass);
        let cover = AlloyModel::covering(1, 20, uniform()).unwrap();
        let cc = cover.verify_no_pi(&[0.5], &[vec![1.0]], 4).unwrap();
        assert!(!cc.pass && cc.unrefuted.len() == 1);
    }
}
