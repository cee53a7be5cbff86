//! Rasterized measurable sets and `(γ, a)`-thickness.
//!
//! A set is stored as a bit field over an axis-aligned box; a cell belongs to
//! the set when its center does. Window measures count cells whose centers
//! fall in the half-open window `[x, x + a)`, so a tiling of a period by
//! windows counts every cell exactly once.

mod cantor;
mod io;

pub use cantor::{build_fat_cantor, stripes, CantorSpec};

use bitvec::prelude::*;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Window shape `A_a = [0, a_1] × … × [0, a_d]` with a thickness level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub a: Vec<f64>,
    pub gamma: f64,
}

impl WindowSpec {
    pub fn new(a: Vec<f64>, gamma: f64) -> Result<Self> {
        if a.is_empty() || a.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
            return Err(Error::Precondition(format!("window sides must be positive, got {a:?}")));
        }
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::Precondition(format!("γ must lie in (0, 1], got {gamma}")));
        }
        Ok(WindowSpec { a, gamma })
    }

    pub fn volume(&self) -> f64 {
        self.a.iter().product()
    }
}

/// Indicator function of a set sampled on a regular grid of cells.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterSet {
    origin: Vec<f64>,
    extent: Vec<f64>,
    /// Cells per unit length, per axis.
    resolution: Vec<u32>,
    counts: Vec<usize>,
    cells: BitVec<u64, Lsb0>,
    /// When set, the raster is one period of a periodic set with period
    /// vector `extent`.
    periodic: bool,
}

impl RasterSet {
    /// Empty raster.
    pub fn empty(origin: Vec<f64>, extent: Vec<f64>, resolution: Vec<u32>, periodic: bool) -> Result<Self> {
        let d = origin.len();
        if d == 0 || d > 3 {
            return Err(Error::UnsupportedDimension(d));
        }
        if extent.len() != d || resolution.len() != d {
            return Err(Error::InvalidRaster("origin, extent and resolution differ in length".into()));
        }
        let mut counts = Vec::with_capacity(d);
        for (&e, &r) in extent.iter().zip(&resolution) {
            if !(e > 0.0) || r == 0 {
                return Err(Error::InvalidRaster(format!("extent {e} / resolution {r} must be positive")));
            }
            let c = e * r as f64;
            let rc = c.round();
            if (c - rc).abs() > 1e-9 * c.max(1.0) {
                return Err(Error::InvalidRaster(format!(
                    "extent {e} is not a whole number of cells at resolution {r}"
                )));
            }
            counts.push(rc as usize);
        }
        let total: usize = counts.iter().product();
        if total > 1 << 28 {
            return Err(Error::TooLarge { dof: total, budget: 1 << 28 });
        }
        Ok(RasterSet { origin, extent, resolution, counts, cells: bitvec![u64, Lsb0; 0; total], periodic })
    }

    /// Whole region.
    pub fn full(origin: Vec<f64>, extent: Vec<f64>, resolution: Vec<u32>, periodic: bool) -> Result<Self> {
        let mut r = Self::empty(origin, extent, resolution, periodic)?;
        r.cells.fill(true);
        Ok(r)
    }

    /// Raster whose cells are set where `member(center)` holds.
    pub fn from_fn(
        origin: Vec<f64>,
        extent: Vec<f64>,
        resolution: Vec<u32>,
        periodic: bool,
        member: impl Fn(&[f64]) -> bool,
    ) -> Result<Self> {
        let mut r = Self::empty(origin, extent, resolution, periodic)?;
        for idx in 0..r.len() {
            if member(&r.cell_center(idx)) {
                r.cells.set(idx, true);
            }
        }
        Ok(r)
    }

    pub fn d(&self) -> usize {
        self.origin.len()
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn extent(&self) -> &[f64] {
        &self.extent
    }

    pub fn resolution(&self) -> &[u32] {
        &self.resolution
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    pub fn set_periodic(&mut self, periodic: bool) {
        self.periodic = periodic;
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.not_any()
    }

    pub fn cell_volume(&self) -> f64 {
        self.resolution.iter().map(|&r| 1.0 / r as f64).product()
    }

    pub fn region_volume(&self) -> f64 {
        self.extent.iter().product()
    }

    pub fn popcount(&self) -> usize {
        self.cells.count_ones()
    }

    pub fn measure(&self) -> f64 {
        self.popcount() as f64 * self.cell_volume()
    }

    /// Fraction of the region covered.
    pub fn fraction(&self) -> f64 {
        self.popcount() as f64 / self.len() as f64
    }

    pub fn get(&self, idx: usize) -> bool {
        self.cells[idx]
    }

    pub fn set(&mut self, idx: usize, value: bool) {
        self.cells.set(idx, value);
    }

    pub fn bits(&self) -> &BitSlice<u64, Lsb0> {
        &self.cells
    }

    pub fn flat(&self, mi: &[usize]) -> usize {
        mi.iter().zip(&self.counts).rev().fold(0, |acc, (&i, &c)| acc * c + i)
    }

    pub fn unflat(&self, mut idx: usize) -> Vec<usize> {
        self.counts
            .iter()
            .map(|&c| {
                let i = idx % c;
                idx /= c;
                i
            })
            .collect()
    }

    pub fn cell_center(&self, idx: usize) -> Vec<f64> {
        self.unflat(idx)
            .iter()
            .enumerate()
            .map(|(a, &i)| self.origin[a] + (i as f64 + 0.5) / self.resolution[a] as f64)
            .collect()
    }

    /// Index of the cell containing `x`, wrapping periodically when flagged.
    pub fn cell_of(&self, x: &[f64]) -> Option<usize> {
        let mut mi = Vec::with_capacity(self.d());
        for a in 0..self.d() {
            let k = ((x[a] - self.origin[a]) * self.resolution[a] as f64).floor() as i64;
            let c = self.counts[a] as i64;
            let k = if self.periodic {
                k.rem_euclid(c)
            } else if (0..c).contains(&k) {
                k
            } else {
                return None;
            };
            mi.push(k as usize);
        }
        Some(self.flat(&mi))
    }

    /// Membership of an arbitrary point (cell lookup).
    pub fn contains_point(&self, x: &[f64]) -> bool {
        self.cell_of(x).is_some_and(|i| self.cells[i])
    }

    /// Same cells placed at a different origin.
    pub fn with_origin(mut self, origin: Vec<f64>) -> Result<Self> {
        if origin.len() != self.d() {
            return Err(Error::LengthMismatch { expected: self.d(), got: origin.len() });
        }
        self.origin = origin;
        Ok(self)
    }

    /// Cell-wise `self ⊆ other` for rasters with identical geometry.
    pub fn is_subset_of(&self, other: &RasterSet) -> bool {
        self.counts == other.counts && self.cells.iter().zip(other.cells.iter()).all(|(a, b)| !*a || *b)
    }

    fn prefix(&self) -> PrefixSums {
        PrefixSums::new(self)
    }

    /// Cell-index range `[lo, hi)` of centers inside `[x, x + a)` along `axis`.
    fn axis_range(&self, axis: usize, x: f64, a: f64) -> (i64, i64) {
        let r = self.resolution[axis] as f64;
        let lo = ((x - self.origin[axis]) * r - 0.5).ceil() as i64;
        let hi = ((x + a - self.origin[axis]) * r - 0.5).ceil() as i64;
        (lo, hi)
    }

    /// Raster approximation of `vol(S ∩ (x + A_a))`.
    pub fn window_measure(&self, x: &[f64], a: &[f64]) -> Result<f64> {
        if x.len() != self.d() || a.len() != self.d() {
            return Err(Error::LengthMismatch { expected: self.d(), got: x.len().min(a.len()) });
        }
        let ranges: Vec<(i64, i64)> = (0..self.d()).map(|ax| self.axis_range(ax, x[ax], a[ax])).collect();
        let count = self.count_in_ranges(&self.prefix(), &ranges)?;
        Ok(count as f64 * self.cell_volume())
    }

    fn count_in_ranges(&self, prefix: &PrefixSums, ranges: &[(i64, i64)]) -> Result<u64> {
        let mut per_axis: Vec<Vec<(usize, usize, u64)>> = Vec::with_capacity(self.d());
        for (ax, &(lo, hi)) in ranges.iter().enumerate() {
            let c = self.counts[ax] as i64;
            if hi <= lo {
                return Ok(0);
            }
            if self.periodic {
                per_axis.push(periodic_segments(lo, hi, c));
            } else {
                if lo < 0 || hi > c {
                    return Err(Error::WindowOutside);
                }
                per_axis.push(vec![(lo as usize, hi as usize, 1)]);
            }
        }
        let mut total = 0u64;
        let mut pick = vec![0usize; self.d()];
        loop {
            let mut lo = [0usize; 3];
            let mut hi = [0usize; 3];
            let mut mult = 1u64;
            for ax in 0..self.d() {
                let (a, b, m) = per_axis[ax][pick[ax]];
                lo[ax] = a;
                hi[ax] = b;
                mult *= m;
            }
            total += mult * prefix.box_sum(&lo[..self.d()], &hi[..self.d()]);
            let mut ax = 0;
            loop {
                if ax == self.d() {
                    return Ok(total);
                }
                pick[ax] += 1;
                if pick[ax] < per_axis[ax].len() {
                    break;
                }
                pick[ax] = 0;
                ax += 1;
            }
        }
    }

    /// Minimum window measure over every cell-aligned window position,
    /// `(measure, lower corner)`. Non-periodic rasters only scan windows that
    /// fit inside the region.
    pub fn min_window(&self, a: &[f64]) -> Result<(f64, Vec<f64>)> {
        let (count, _, x) = self.scan(a, false)?;
        Ok((count as f64 * self.cell_volume(), x))
    }

    /// Scan of all cell-aligned windows minimizing either the member count or
    /// the member fraction of the cells the window covers.
    fn scan(&self, a: &[f64], by_fraction: bool) -> Result<(u64, u64, Vec<f64>)> {
        if a.len() != self.d() {
            return Err(Error::LengthMismatch { expected: self.d(), got: a.len() });
        }
        let prefix = self.prefix();
        let positions: Vec<usize> = if self.periodic {
            self.counts.clone()
        } else {
            let mut p = Vec::with_capacity(self.d());
            for ax in 0..self.d() {
                let w = (a[ax] * self.resolution[ax] as f64).round() as usize;
                if (a[ax] * self.resolution[ax] as f64 - w as f64).abs() > 1e-9 || w > self.counts[ax] {
                    return Err(Error::WindowOutside);
                }
                p.push(self.counts[ax] - w + 1);
            }
            p
        };
        let total: usize = positions.iter().product();
        let corner = |mut k: usize| -> Vec<f64> {
            positions
                .iter()
                .enumerate()
                .map(|(ax, &c)| {
                    let i = k % c;
                    k /= c;
                    self.origin[ax] + i as f64 / self.resolution[ax] as f64
                })
                .collect()
        };
        let key = |c: u64, n: u64| if by_fraction { c as f64 / n.max(1) as f64 } else { c as f64 };
        let best = (0..total)
            .into_par_iter()
            .map(|k| {
                let x = corner(k);
                let ranges: Vec<(i64, i64)> =
                    (0..self.d()).map(|ax| self.axis_range(ax, x[ax], a[ax])).collect();
                let covered: u64 = ranges.iter().map(|&(lo, hi)| (hi - lo).max(0) as u64).product();
                self.count_in_ranges(&prefix, &ranges).map(|c| (c, covered, k))
            })
            .try_reduce(
                || (u64::MAX, 1, usize::MAX),
                |p, q| {
                    let (kp, kq) = (key(p.0, p.1), key(q.0, q.1));
                    Ok(if kq < kp || (kq == kp && q.2 < p.2) { q } else { p })
                },
            )?;
        Ok((best.0, best.1, corner(best.2)))
    }

    /// Certifies `(γ, a)`-thickness of a periodic raster. The window fraction
    /// is taken relative to the cells the window covers, so the full set has
    /// `γ* = 1` even when `a` is not a whole number of cells.
    pub fn certify_thickness(&self, a: &[f64]) -> Result<ThicknessCertificate> {
        if !self.periodic {
            return Err(Error::NotPeriodic(
                "the infimum over all translates is only finitely checkable for periodic sets; \
                 a non-periodic raster can only be refuted",
            ));
        }
        let vol: f64 = a.iter().product();
        let (count, covered, witness) = self.scan(a, true)?;
        let inner: f64 = a.iter().zip(&self.resolution).map(|(&ai, &r)| ai * r as f64).product();
        let outer: f64 = a.iter().zip(&self.resolution).map(|(&ai, &r)| ai * r as f64 + 2.0).product();
        let error_bound = (outer - inner) * self.cell_volume() / vol;
        Ok(ThicknessCertificate { gamma_star: count as f64 / covered as f64, error_bound, witness })
    }

    /// A window position where the measure drops below `γ·vol(A_a)`, if any.
    pub fn refute_thickness(&self, a: &[f64], gamma: f64) -> Result<Option<Vec<f64>>> {
        let vol: f64 = a.iter().product();
        let (m, x) = self.min_window(a)?;
        Ok((m < gamma * vol).then_some(x))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        io::to_bytes(self)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        io::from_bytes(bytes)
    }

    pub fn to_text(&self) -> String {
        io::to_text(self)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        io::from_text(text)
    }

    /// Writes the binary format, or the text format for `.txt` paths.
    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        if path.extension().is_some_and(|e| e == "txt") {
            std::fs::write(path, self.to_text())?;
        } else {
            std::fs::write(path, self.to_bytes())?;
        }
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        if bytes.starts_with(io::MAGIC) {
            Self::from_bytes(&bytes)
        } else {
            let text = String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))?;
            Self::from_text(&text)
        }
    }
}

/// Split the periodic index range `[lo, hi)` into in-period segments with
/// multiplicities.
fn periodic_segments(lo: i64, hi: i64, c: i64) -> Vec<(usize, usize, u64)> {
    let len = hi - lo;
    let full = (len / c) as u64;
    let rem = len % c;
    let mut out = Vec::with_capacity(3);
    if full > 0 {
        out.push((0, c as usize, full));
    }
    if rem > 0 {
        let start = lo.rem_euclid(c);
        let end = start + rem;
        if end <= c {
            out.push((start as usize, end as usize, 1));
        } else {
            out.push((start as usize, c as usize, 1));
            out.push((0, (end - c) as usize, 1));
        }
    }
    out
}

struct PrefixSums {
    dims: Vec<usize>,
    data: Vec<u64>,
}

impl PrefixSums {
    fn new(r: &RasterSet) -> Self {
        let dims: Vec<usize> = r.counts.iter().map(|c| c + 1).collect();
        let total: usize = dims.iter().product();
        let mut data = vec![0u64; total];
        let d = dims.len();
        let strides: Vec<usize> = (0..d).map(|a| dims[..a].iter().product()).collect();
        for idx in 0..r.len() {
            if r.cells[idx] {
                let mi = r.unflat(idx);
                let p: usize = mi.iter().zip(&strides).map(|(&i, &s)| (i + 1) * s).sum();
                data[p] = 1;
            }
        }
        // cumulative sums along each axis
        for a in 0..d {
            let s = strides[a];
            for p in 0..total {
                if (p / s) % dims[a] != 0 {
                    data[p] += data[p - s];
                }
            }
        }
        PrefixSums { dims, data }
    }

    fn box_sum(&self, lo: &[usize], hi: &[usize]) -> u64 {
        let d = self.dims.len();
        let mut total: i64 = 0;
        for corner in 0..(1usize << d) {
            let mut p = 0usize;
            let mut stride = 1usize;
            let mut sign = 1i64;
            for a in 0..d {
                let take_lo = corner >> a & 1 == 1;
                let i = if take_lo {
                    sign = -sign;
                    lo[a]
                } else {
                    hi[a]
                };
                p += i * stride;
                stride *= self.dims[a];
            }
            total += sign * self.data[p] as i64;
        }
        total as u64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThicknessCertificate {
    /// Smallest normalized window measure over one period.
    pub gamma_star: f64,
    /// Raster error bound on `gamma_star`; thickness holds for every
    /// `γ ≤ gamma_star − error_bound`.
    pub error_bound: f64,
    /// Lower corner of a minimizing window.
    pub witness: Vec<f64>,
}

/// Product of one-dimensional periodic rasters.
pub fn product_and_periodize(axes: &[RasterSet]) -> Result<RasterSet> {
    if axes.is_empty() || axes.len() > 3 {
        return Err(Error::UnsupportedDimension(axes.len()));
    }
    if let Some(bad) = axes.iter().find(|r| r.d() != 1 || !r.periodic) {
        return Err(Error::InvalidRaster(format!(
            "product factors must be one-dimensional periodic rasters (got d={}, periodic={})",
            bad.d(),
            bad.periodic
        )));
    }
    let mut out = RasterSet::empty(
        axes.iter().map(|r| r.origin[0]).collect(),
        axes.iter().map(|r| r.extent[0]).collect(),
        axes.iter().map(|r| r.resolution[0]).collect(),
        true,
    )?;
    for idx in 0..out.len() {
        let mi = out.unflat(idx);
        if mi.iter().zip(axes).all(|(&i, r)| r.cells[i]) {
            out.cells.set(idx, true);
        }
    }
    Ok(out)
}

/// Real field sampled at the cell centers of a raster geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub geometry: RasterSet,
    pub values: Vec<f64>,
}

impl GridField {
    pub fn from_fn(geometry: RasterSet, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = (0..geometry.len()).map(|i| f(&geometry.cell_center(i))).collect();
        GridField { geometry, values }
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
    }
}

/// Super-level set `{U ≥ κ}`.
pub fn level_set(u: &GridField, kappa: f64) -> Result<RasterSet> {
    if !(kappa > 0.0) {
        return Err(Error::Precondition(format!("level κ must be positive, got {kappa}")));
    }
    let mut out = u.geometry.clone();
    out.cells.fill(false);
    for (i, &v) in u.values.iter().enumerate() {
        if v >= kappa {
            out.cells.set(i, true);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit(res: u32) -> RasterSet {
        RasterSet::full(vec![0.0], vec![1.0], vec![res], true).unwrap()
    }

    #[test]
    fn full_and_empty_windows() {
        let full = RasterSet::full(vec![0.0, 0.0], vec![4.0, 4.0], vec![8, 8], false).unwrap();
        let m = full.window_measure(&[0.5, 1.0], &[1.5, 2.0]).unwrap();
        assert!((m - 3.0).abs() < 1e-12);
        let empty = RasterSet::empty(vec![0.0], vec![4.0], vec![8], false).unwrap();
        assert_eq!(empty.window_measure(&[1.0], &[2.0]).unwrap(), 0.0);
        assert!(matches!(empty.window_measure(&[3.0], &[2.0]), Err(Error::WindowOutside)));
    }

    #[test]
    fn stripe_windows() {
        let s = stripes(1.0 / 3.0, 1.0, 90).unwrap();
        for x in [-3.3, 0.0, 0.1, 0.77, 12.25] {
            let m = s.window_measure(&[x], &[1.0]).unwrap();
            assert!((m - 1.0 / 3.0).abs() <= s.cell_volume() + 1e-12, "x={x}: {m}");
        }
        let c = s.certify_thickness(&[1.0]).unwrap();
        assert!((c.gamma_star - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn certify_examples() {
        let c = unit(16).certify_thickness(&[0.37]).unwrap();
        assert_eq!(c.gamma_star, 1.0);
        let cantor = build_fat_cantor(&CantorSpec::smith_volterra(4), 4096).unwrap();
        let c = cantor.certify_thickness(&[1.0]).unwrap();
        assert!((c.gamma_star - 17.0 / 32.0).abs() < 1e-12);
        // half-unit windows can land mostly in the removed middle
        let c = cantor.certify_thickness(&[0.5]).unwrap();
        assert!(c.gamma_star < 17.0 / 32.0);
        let flat = RasterSet::full(vec![0.0], vec![1.0], vec![4], false).unwrap();
        assert!(matches!(flat.certify_thickness(&[1.0]), Err(Error::NotPeriodic(_))));
    }

    #[test]
    fn product_examples() {
        let f = product_and_periodize(&[unit(4), unit(6)]).unwrap();
        assert_eq!(f.fraction(), 1.0);
        let p = product_and_periodize(&[stripes(1.0 / 3.0, 1.0, 12).unwrap(), stripes(0.5, 1.0, 12).unwrap()])
            .unwrap();
        assert!((p.fraction() - 1.0 / 6.0).abs() < 1e-12);
        let cantor = build_fat_cantor(&CantorSpec::smith_volterra(3), 1024).unwrap();
        let q = product_and_periodize(&[cantor.clone(), unit(1024)]).unwrap();
        assert!((q.fraction() - cantor.fraction()).abs() < 1e-12);
        let flat = RasterSet::full(vec![0.0], vec![1.0], vec![4], false).unwrap();
        assert!(product_and_periodize(&[flat]).is_err());
    }

    #[test]
    fn level_sets() {
        let geom = RasterSet::empty(vec![0.0, 0.0], vec![2.0, 1.0], vec![4, 4], false).unwrap();
        let ones = GridField::from_fn(geom.clone(), |_| 1.0);
        assert_eq!(level_set(&ones, 0.5).unwrap().fraction(), 1.0);
        let zeros = GridField::from_fn(geom.clone(), |_| 0.0);
        assert!(level_set(&zeros, 1e-9).unwrap().is_empty());
        let left = GridField::from_fn(geom.clone(), |x| if x[0] < 1.0 { 1.0 } else { 0.0 });
        let s = level_set(&left, 0.5).unwrap();
        assert!((s.measure() - 1.0).abs() < 1e-12);
        assert!(s.contains_point(&[0.2, 0.5]) && !s.contains_point(&[1.2, 0.5]));
        assert!(level_set(&ones, 0.0).is_err());
    }

    #[test]
    fn windows_larger_than_period() {
        let s = stripes(0.25, 1.0, 8).unwrap();
        let m = s.window_measure(&[0.125], &[2.5]).unwrap();
        // two full periods plus [0.125, 0.625): centers 0.1875 only in the stripe
        assert!((m - (0.5 + 0.125)).abs() < 1e-12);
    }

    #[test]
    fn refutation_on_non_periodic() {
        let s = RasterSet::from_fn(vec![0.0], vec![10.0], vec![4], false, |x| x[0] < 3.0).unwrap();
        let w = s.refute_thickness(&[2.0], 0.1).unwrap().unwrap();
        assert!(w[0] >= 3.0 - 1e-12);
        assert!(s.refute_thickness(&[2.0], 0.0).unwrap().is_none());
    }

    fn arb_periodic() -> impl Strategy<Value = RasterSet> {
        (1usize..=2, prop::collection::vec(any::<bool>(), 64)).prop_map(|(d, bits)| {
            let (ext, res) = if d == 1 { (vec![2.0], vec![32]) } else { (vec![1.0, 2.0], vec![8, 4]) };
            let mut r = RasterSet::empty(vec![0.0; d], ext, res, true).unwrap();
            for (i, b) in bits.into_iter().enumerate() {
                r.set(i, b);
            }
            r
        })
    }

    proptest! {
        #[test]
        fn superset_never_lowers_gamma(r in arb_periodic(), extra in prop::collection::vec(any::<bool>(), 64)) {
            let mut bigger = r.clone();
            for (i, b) in extra.into_iter().enumerate() {
                if b { bigger.set(i, true); }
            }
            let a = vec![0.5; r.d()];
            let g = r.certify_thickness(&a).unwrap().gamma_star;
            let h = bigger.certify_thickness(&a).unwrap().gamma_star;
            prop_assert!(r.is_subset_of(&bigger));
            prop_assert!(g <= h + 1e-12);
        }

        #[test]
        fn tiling_sums_to_measure(r in arb_periodic()) {
            // quarter-period windows tile one period
            let a: Vec<f64> = r.extent().iter().map(|e| e / 4.0).collect();
            let mut sum = 0.0;
            let tiles = 4usize.pow(r.d() as u32);
            for t in 0..tiles {
                let x: Vec<f64> = (0..r.d()).map(|ax| ((t / 4usize.pow(ax as u32)) % 4) as f64 * a[ax]).collect();
                sum += r.window_measure(&x, &a).unwrap();
            }
            prop_assert!((sum - r.measure()).abs() < 1e-12);
        }

        #[test]
        fn period_window_gives_fraction(r in arb_periodic()) {
            let c = r.certify_thickness(&r.extent().to_vec()).unwrap();
            prop_assert!((c.gamma_star - r.fraction()).abs() < 1e-12);
            // whole multiples of the period average to the same fraction
            let twice: Vec<f64> = r.extent().iter().map(|e| 2.0 * e).collect();
            let small: Vec<f64> = r.extent().iter().map(|e| e / 2.0).collect();
            let g2 = r.certify_thickness(&twice).unwrap().gamma_star;
            let gs = r.certify_thickness(&small).unwrap().gamma_star;
            prop_assert!((g2 - r.fraction()).abs() < 1e-12);
            prop_assert!(gs <= g2 + 1e-12);
        }
    }
}
