//! Fat Cantor sets and periodic stripes.

use serde::{Deserialize, Serialize};

use super::RasterSet;
use crate::error::{Error, Result};

/// Stage-wise middle removals from `[0, 1]`. `removed[k-1]` is the absolute
/// length `w_k` removed from the middle of each of the `2^{k-1}` intervals
/// left after stage `k - 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CantorSpec {
    removed: Vec<f64>,
}

impl CantorSpec {
    pub fn new(removed: Vec<f64>) -> Result<Self> {
        let spec = CantorSpec { removed };
        let mut len = 1.0;
        for (k, &w) in spec.removed.iter().enumerate() {
            if !(w > 0.0 && w < len) {
                return Err(Error::Precondition(format!(
                    "stage {} removes {w} from intervals of length {len}",
                    k + 1
                )));
            }
            len = (len - w) / 2.0;
        }
        if spec.measure() <= 0.0 {
            return Err(Error::Precondition("removals exhaust the interval".into()));
        }
        Ok(spec)
    }

    /// `w_k = 4^{-k}`; the limit set has measure 1/2.
    pub fn smith_volterra(depth: usize) -> Self {
        let removed = (1..=depth).map(|k| 0.25f64.powi(k as i32)).collect();
        CantorSpec::new(removed).expect("classic removals are admissible")
    }

    /// Removal given as the proportion `r_k ∈ (0, 1)` of each remaining interval.
    pub fn from_fractions(fractions: &[f64]) -> Result<Self> {
        let mut len = 1.0;
        let mut removed = Vec::with_capacity(fractions.len());
        for &r in fractions {
            if !(r > 0.0 && r < 1.0) {
                return Err(Error::Precondition(format!("removal fraction {r} outside (0, 1)")));
            }
            let w = r * len;
            removed.push(w);
            len = (len - w) / 2.0;
        }
        CantorSpec::new(removed)
    }

    pub fn depth(&self) -> usize {
        self.removed.len()
    }

    pub fn removed(&self) -> &[f64] {
        &self.removed
    }

    /// `1 − Σ_k 2^{k−1} w_k`.
    pub fn measure(&self) -> f64 {
        1.0 - self.removed.iter().enumerate().map(|(k, w)| 2f64.powi(k as i32) * w).sum::<f64>()
    }

    /// Length of each remaining interval after the last stage.
    pub fn finest_length(&self) -> f64 {
        self.removed.iter().fold(1.0, |len, w| (len - w) / 2.0)
    }

    /// Remaining closed intervals after the last stage, left to right.
    pub fn intervals(&self) -> Vec<(f64, f64)> {
        let mut current = vec![(0.0, 1.0)];
        for &w in &self.removed {
            let mut next = Vec::with_capacity(2 * current.len());
            for (a, b) in current {
                let mid = 0.5 * (a + b);
                next.push((a, mid - 0.5 * w));
                next.push((mid + 0.5 * w, b));
            }
            current = next;
        }
        current
    }
}

/// One period `[0, 1)` of the periodized pre-Cantor set at the depth of `spec`.
pub fn build_fat_cantor(spec: &CantorSpec, resolution: u32) -> Result<RasterSet> {
    let cells = spec.finest_length() * resolution as f64;
    if cells < 4.0 {
        return Err(Error::TooCoarse(format!(
            "finest interval spans {cells:.2} cells at resolution {resolution}; need at least 4"
        )));
    }
    let intervals = spec.intervals();
    let mut r = RasterSet::empty(vec![0.0], vec![1.0], vec![resolution], true)?;
    for (a, b) in intervals {
        // cells whose centers fall in [a, b]
        let lo = (a * resolution as f64 - 0.5).ceil().max(0.0) as usize;
        let hi = ((b * resolution as f64 - 0.5).floor() as i64).min(resolution as i64 - 1);
        for i in lo as i64..=hi {
            r.set(i as usize, true);
        }
    }
    Ok(r)
}

/// Periodic stripes `[0, width) + period·ℤ` in one dimension.
pub fn stripes(width: f64, period: f64, resolution: u32) -> Result<RasterSet> {
    if !(width >= 0.0 && width <= period) {
        return Err(Error::Precondition(format!("stripe width {width} outside [0, {period}]")));
    }
    RasterSet::from_fn(vec![0.0], vec![period], vec![resolution], true, |x| x[0] < width)
}
