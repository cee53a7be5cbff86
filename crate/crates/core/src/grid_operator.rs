//! Finite-difference discretization of `-Δ + V` on cubes.
//!
//! Nodes are ordered lexicographically with axis 0 fastest. The kinetic part
//! is never stored; it is applied as a stencil so that constant vectors are
//! annihilated exactly under Neumann and periodic conditions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::band::SymBand;
use crate::scalar::Real;

/// Default cap on `n^d`.
pub const DEFAULT_DOF_BUDGET: usize = 1 << 21;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Dirichlet,
    Neumann,
    Periodic,
}

impl std::str::FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dirichlet" => Ok(Boundary::Dirichlet),
            "neumann" => Ok(Boundary::Neumann),
            "periodic" => Ok(Boundary::Periodic),
            other => Err(Error::InvalidBox(format!("unknown boundary condition '{other}'"))),
        }
    }
}

/// A discretized open cube `center + (-side/2, side/2)^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxSpec<T> {
    pub d: usize,
    pub side: T,
    pub center: Vec<T>,
    /// Interior points per axis.
    pub n: usize,
    pub bc: Boundary,
}

impl<T: Real> BoxSpec<T> {
    pub fn new(d: usize, side: T, center: Vec<T>, n: usize, bc: Boundary) -> Result<Self> {
        let b = BoxSpec { d, side, center, n, bc };
        b.validate(DEFAULT_DOF_BUDGET)?;
        Ok(b)
    }

    /// Box centered at the origin.
    pub fn centered(d: usize, side: T, n: usize, bc: Boundary) -> Result<Self> {
        Self::new(d, side, vec![T::zero(); d], n, bc)
    }

    /// Box whose mesh step is `1 / points_per_unit`. The side must be a
    /// multiple of the step.
    pub fn with_mesh(
        d: usize,
        side: T,
        center: Vec<T>,
        points_per_unit: usize,
        bc: Boundary,
    ) -> Result<Self> {
        let cells = (side * T::from_usize_lossy(points_per_unit)).round();
        let cells = cells
            .to_usize()
            .ok_or_else(|| Error::InvalidBox("side × mesh not representable".into()))?;
        let n = match bc {
            Boundary::Dirichlet => cells.saturating_sub(1),
            Boundary::Neumann | Boundary::Periodic => cells,
        };
        Self::new(d, side, center, n, bc)
    }

    pub fn validate(&self, budget: usize) -> Result<()> {
        if self.d == 0 || self.d > 3 {
            return Err(Error::UnsupportedDimension(self.d));
        }
        if !(self.side > T::zero()) || !self.side.is_finite() {
            return Err(Error::InvalidBox(format!("side length {} must be positive", self.side)));
        }
        if self.center.len() != self.d {
            return Err(Error::LengthMismatch { expected: self.d, got: self.center.len() });
        }
        if self.n == 0 {
            return Err(Error::InvalidBox("at least one grid point per axis required".into()));
        }
        let dof = self.n.checked_pow(self.d as u32).unwrap_or(usize::MAX);
        if dof > budget {
            return Err(Error::TooLarge { dof, budget });
        }
        Ok(())
    }

    /// Mesh step.
    pub fn h(&self) -> T {
        match self.bc {
            Boundary::Dirichlet => self.side / T::from_usize_lossy(self.n + 1),
            Boundary::Neumann | Boundary::Periodic => self.side / T::from_usize_lossy(self.n),
        }
    }

    pub fn dof(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    /// Volume element of one node.
    pub fn cell_volume(&self) -> T {
        self.h().powi(self.d as i32)
    }

    /// Coordinate of grid index `i` along `axis`.
    pub fn coord(&self, axis: usize, i: usize) -> T {
        let lo = self.center[axis] - self.side / T::lit(2.0);
        let h = self.h();
        match self.bc {
            Boundary::Dirichlet => lo + T::from_usize_lossy(i + 1) * h,
            Boundary::Neumann | Boundary::Periodic => {
                lo + (T::from_usize_lossy(i) + T::lit(0.5)) * h
            }
        }
    }

    /// Multi-index of a flat node index.
    pub fn multi_index(&self, mut idx: usize) -> [usize; 3] {
        let mut out = [0; 3];
        for slot in out.iter_mut().take(self.d) {
            *slot = idx % self.n;
            idx /= self.n;
        }
        out
    }

    pub fn flat_index(&self, mi: &[usize]) -> usize {
        mi.iter().take(self.d).rev().fold(0, |acc, &i| acc * self.n + i)
    }

    /// Physical position of a flat node index.
    pub fn position(&self, idx: usize) -> Vec<T> {
        let mi = self.multi_index(idx);
        (0..self.d).map(|a| self.coord(a, mi[a])).collect()
    }

    /// Lower corner of the (closed) box.
    pub fn lower(&self) -> Vec<T> {
        self.center.iter().map(|&c| c - self.side / T::lit(2.0)).collect()
    }
}

/// Sparse symmetric operator `kinetic·(-Δ_h) + V` on a [`BoxSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteHamiltonian<T> {
    boxspec: BoxSpec<T>,
    potential: Vec<T>,
    /// `1/h²` for Schrödinger operators, zero for pure multiplication operators.
    kinetic: T,
}

/// Free Laplacian with zero potential.
pub fn build_free_laplacian<T: Real>(boxspec: &BoxSpec<T>) -> Result<DiscreteHamiltonian<T>> {
    boxspec.validate(DEFAULT_DOF_BUDGET)?;
    let h = boxspec.h();
    Ok(DiscreteHamiltonian {
        boxspec: boxspec.clone(),
        potential: vec![T::zero(); boxspec.dof()],
        kinetic: T::one() / (h * h),
    })
}

/// Returns `H + V`; `H` is left untouched.
pub fn add_potential<T: Real>(
    h: &DiscreteHamiltonian<T>,
    v: &[T],
) -> Result<DiscreteHamiltonian<T>> {
    if v.len() != h.dim() {
        return Err(Error::LengthMismatch { expected: h.dim(), got: v.len() });
    }
    if let Some(bad) = v.iter().find(|x| !x.is_finite()) {
        return Err(Error::InvalidBox(format!("non-finite potential value {bad}")));
    }
    let mut out = h.clone();
    for (p, &x) in out.potential.iter_mut().zip(v) {
        *p = *p + x;
    }
    Ok(out)
}

impl<T: Real> DiscreteHamiltonian<T> {
    /// Multiplication operator by `v`, with no kinetic part.
    pub fn multiplication(boxspec: &BoxSpec<T>, v: Vec<T>) -> Result<Self> {
        boxspec.validate(DEFAULT_DOF_BUDGET)?;
        if v.len() != boxspec.dof() {
            return Err(Error::LengthMismatch { expected: boxspec.dof(), got: v.len() });
        }
        Ok(DiscreteHamiltonian { boxspec: boxspec.clone(), potential: v, kinetic: T::zero() })
    }

    pub fn boxspec(&self) -> &BoxSpec<T> {
        &self.boxspec
    }

    pub fn potential(&self) -> &[T] {
        &self.potential
    }

    pub fn dim(&self) -> usize {
        self.potential.len()
    }

    pub fn kinetic_scale(&self) -> T {
        self.kinetic
    }

    fn stride(&self, axis: usize) -> usize {
        self.boxspec.n.pow(axis as u32)
    }

    /// `y = H x`.
    pub fn apply(&self, x: &[T], y: &mut [T]) {
        let n = self.boxspec.n;
        let c = self.kinetic;
        let bc = self.boxspec.bc;
        for (idx, yi) in y.iter_mut().enumerate() {
            let xi = x[idx];
            let mut acc = self.potential[idx] * xi;
            if c != T::zero() {
                let mut rem = idx;
                for axis in 0..self.boxspec.d {
                    let i = rem % n;
                    rem /= n;
                    let s = self.stride(axis);
                    // left neighbour
                    if i > 0 {
                        acc = acc + c * (xi - x[idx - s]);
                    } else {
                        match bc {
                            Boundary::Dirichlet => acc = acc + c * xi,
                            Boundary::Neumann => {}
                            Boundary::Periodic => acc = acc + c * (xi - x[idx + (n - 1) * s]),
                        }
                    }
                    // right neighbour
                    if i + 1 < n {
                        acc = acc + c * (xi - x[idx + s]);
                    } else {
                        match bc {
                            Boundary::Dirichlet => acc = acc + c * xi,
                            Boundary::Neumann => {}
                            Boundary::Periodic => acc = acc + c * (xi - x[idx - (n - 1) * s]),
                        }
                    }
                }
            }
            *yi = acc;
        }
    }

    pub fn apply_vec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); x.len()];
        self.apply(x, &mut y);
        y
    }

    /// Off-diagonal couplings of node `idx`: `(neighbour, value)`; a periodic
    /// axis with `n ≤ 2` can list the same neighbour twice.
    fn neighbours(&self, idx: usize) -> Vec<(usize, T)> {
        let n = self.boxspec.n;
        let mut out = Vec::with_capacity(2 * self.boxspec.d);
        if self.kinetic == T::zero() {
            return out;
        }
        let c = -self.kinetic;
        let mut rem = idx;
        for axis in 0..self.boxspec.d {
            let i = rem % n;
            rem /= n;
            let s = self.stride(axis);
            if i > 0 {
                out.push((idx - s, c));
            } else if self.boxspec.bc == Boundary::Periodic && n > 1 {
                out.push((idx + (n - 1) * s, c));
            }
            if i + 1 < n {
                out.push((idx + s, c));
            } else if self.boxspec.bc == Boundary::Periodic && n > 1 {
                out.push((idx - (n - 1) * s, c));
            }
        }
        out
    }

    /// Diagonal entries.
    pub fn diagonal(&self) -> Vec<T> {
        let n = self.boxspec.n;
        let wrap = match self.boxspec.bc {
            Boundary::Dirichlet => true,
            Boundary::Neumann => false,
            Boundary::Periodic => n > 1,
        };
        (0..self.dim())
            .map(|idx| {
                let mut acc = self.potential[idx];
                if self.kinetic != T::zero() {
                    let mut rem = idx;
                    for _ in 0..self.boxspec.d {
                        let i = rem % n;
                        rem /= n;
                        for has_nb in [i > 0, i + 1 < n] {
                            if has_nb || wrap {
                                acc = acc + self.kinetic;
                            }
                        }
                    }
                }
                acc
            })
            .collect()
    }

    /// Largest distance between coupled indices.
    pub fn bandwidth(&self) -> usize {
        if self.kinetic == T::zero() {
            return 0;
        }
        let n = self.boxspec.n;
        let top = self.stride(self.boxspec.d - 1);
        if self.boxspec.bc == Boundary::Periodic && n > 2 {
            top * (n - 1)
        } else if n > 1 {
            top
        } else {
            0
        }
    }

    /// Diagonal and sub-diagonal when the operator is tridiagonal.
    pub fn tridiagonal(&self) -> Option<(Vec<T>, Vec<T>)> {
        if self.bandwidth() > 1 {
            return None;
        }
        let diag = self.diagonal();
        let off = if self.bandwidth() == 1 {
            let mut o = vec![-self.kinetic; self.dim().saturating_sub(1)];
            if self.boxspec.bc == Boundary::Periodic {
                // n == 2: both wrap and direct couplings hit the same entry
                for v in o.iter_mut() {
                    *v = *v + *v;
                }
            }
            o
        } else {
            vec![T::zero(); self.dim().saturating_sub(1)]
        };
        Some((diag, off))
    }

    /// Dense row-major copy.
    pub fn to_dense(&self) -> Vec<T> {
        let n = self.dim();
        let diag = self.diagonal();
        let mut a = vec![T::zero(); n * n];
        for i in 0..n {
            a[i * n + i] = diag[i];
            for (j, v) in self.neighbours(i) {
                a[i * n + j] = a[i * n + j] + v;
            }
        }
        a
    }

    /// Band storage of `H - shift·I`.
    pub fn to_band(&self, shift: T) -> SymBand<T> {
        let n = self.dim();
        let b = self.bandwidth();
        let diag = self.diagonal();
        let mut band = SymBand::zeros(n, b);
        for i in 0..n {
            band.add(i, i, diag[i] - shift);
            for (j, v) in self.neighbours(i) {
                if j < i {
                    band.add(i, j, v);
                }
            }
        }
        band
    }

    /// Gershgorin enclosure of the spectrum.
    pub fn gershgorin(&self) -> (T, T) {
        let diag = self.diagonal();
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for (i, &d) in diag.iter().enumerate() {
            let r: T = self.neighbours(i).iter().map(|(_, v)| v.abs()).sum();
            lo = lo.min(d - r);
            hi = hi.max(d + r);
        }
        (lo, hi)
    }

    /// Upper bound on the operator norm.
    pub fn norm_bound(&self) -> T {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs())
    }
}

/// Continuum Dirichlet eigenvalues `π²/L² Σ n_j²` up to `e_max`, grouped with
/// multiplicities. Multiplicities are counted on the integer `Σ n_j²`, so
/// grouping is exact.
pub fn free_dirichlet_spectrum<T: Real>(side: T, d: usize, e_max: T) -> Vec<(T, usize)> {
    let levels = free_dirichlet_levels(side.as_f64(), d, e_max.as_f64());
    let scale = T::lit(std::f64::consts::PI).powi(2) / (side * side);
    levels
        .into_iter()
        .map(|(s, m)| (scale * T::from_u64(s).expect("level"), m))
        .collect()
}

/// Integer levels `Σ n_j²` (n_j ≥ 1) with `π²/L² Σ n_j² ≤ e_max`.
pub fn free_dirichlet_levels(side: f64, d: usize, e_max: f64) -> Vec<(u64, usize)> {
    use std::collections::BTreeMap;
    let scale = std::f64::consts::PI.powi(2) / (side * side);
    let admissible = |s: u64| scale * s as f64 <= e_max + 4.0 * f64::EPSILON * e_max.abs();
    if d == 0 || !admissible(d as u64) {
        return Vec::new();
    }
    let top = (e_max / scale + 1e-9).floor().max(0.0) as u64;
    let kmax = ((top.saturating_sub(d as u64 - 1)) as f64).sqrt().floor() as u64 + 1;
    let mut counts: BTreeMap<u64, usize> = BTreeMap::new();
    let mut idx = vec![1u64; d];
    loop {
        let s: u64 = idx.iter().map(|k| k * k).sum();
        if s <= top && admissible(s) {
            *counts.entry(s).or_default() += 1;
        }
        // odometer over [1, kmax]^d
        let mut axis = 0;
        loop {
            if axis == d {
                return counts.into_iter().collect();
            }
            idx[axis] += 1;
            if idx[axis] <= kmax {
                break;
            }
            idx[axis] = 1;
            axis += 1;
        }
    }
}

/// Largest distance from a point of `[0, E+1]` to the continuum Dirichlet
/// spectrum of the cube of side `side`.
pub fn max_spectral_gap_below(side: f64, d: usize, e: f64) -> f64 {
    let top = e + 1.0;
    let scale = std::f64::consts::PI.powi(2) / (side * side);
    // (m, 1, …, 1) with m² ≥ top/scale is an eigenvalue at or above `top`
    let m = (top / scale).sqrt().ceil().max(1.0);
    let ceiling = scale * (m * m + (d as f64 - 1.0));
    let levels: Vec<f64> = free_dirichlet_levels(side, d, ceiling * (1.0 + 1e-12))
        .into_iter()
        .map(|(s, _)| scale * s as f64)
        .collect();
    let dist = |x: f64| levels.iter().map(|&l| (l - x).abs()).fold(f64::INFINITY, f64::min);
    let mut best = dist(0.0).max(dist(top));
    for w in levels.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        if (0.0..=top).contains(&mid) {
            best = best.max(dist(mid));
        }
    }
    best
}

/// Eigenvalue of the discrete one-dimensional Dirichlet Laplacian with mesh
/// `h` on a side of length `side`, mode `k ≥ 1`.
pub fn discrete_dirichlet_mode(side: f64, h: f64, k: usize) -> f64 {
    let arg = std::f64::consts::PI * k as f64 * h / (2.0 * side);
    4.0 / (h * h) * arg.sin().powi(2)
}

/// Worst-case gap between discrete and continuum free Dirichlet eigenvalues
/// up to energy `e`, summed over axes.
pub fn discretization_error(side: f64, h: f64, d: usize, e: f64) -> f64 {
    let kmax = ((e.max(0.0)).sqrt() * side / std::f64::consts::PI).ceil().max(1.0) as usize;
    let cont = (std::f64::consts::PI * kmax as f64 / side).powi(2);
    d as f64 * (cont - discrete_dirichlet_mode(side, h, kmax)).abs()
}
