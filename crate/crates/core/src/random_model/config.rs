//! Model description files (TOML).
//!
//! ```toml
//! dimension = 1
//! extent = 40            # sites j with |j|_∞ ≤ extent are registered
//! layout = "full"        # full | geometric_dilution | slab
//!
//! [profile]
//! kind = "cantor"        # cell | ball | raster | cantor
//! depth = 3
//! resolution = 512
//!
//! [distribution]
//! kind = "uniform"
//! lo = 0.0
//! hi = 1.0
//!
//! [claim]                # optional thick-set claim
//! a = [1.0]
//! bound = 1.0            # sup-norm bound on Σ u_j; derived for cell and cantor
//! ```

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::distribution::Distribution;
use super::model::{AlloyModel, Layout, Profile, ThickClaim};
use crate::error::{Error, Result};
use crate::thick_sets::{build_fat_cantor, product_and_periodize, CantorSpec, RasterSet, WindowSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayoutKind {
    #[default]
    Full,
    GeometricDilution,
    Slab,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileFile {
    Cell {
        #[serde(default = "one")]
        height: f64,
    },
    Ball {
        radius: f64,
        #[serde(default = "one")]
        height: f64,
    },
    /// Raster file in site-local coordinates.
    Raster {
        file: PathBuf,
        #[serde(default = "one")]
        height: f64,
    },
    /// Fat Cantor product set in `[−1/2, 1/2)^d`; `removed` defaults to
    /// `w_k = 4^{-k}`.
    Cantor {
        depth: usize,
        resolution: u32,
        #[serde(default)]
        removed: Option<Vec<f64>>,
        #[serde(default = "one")]
        height: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClaimFile {
    pub a: Vec<f64>,
    /// Defaults to the certified value of the claimed set.
    #[serde(default)]
    pub gamma: Option<f64>,
    /// Periodic raster of `S`; derived from cell and cantor profiles when absent.
    #[serde(default)]
    pub raster: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub dimension: usize,
    pub extent: i64,
    #[serde(default)]
    pub layout: LayoutKind,
    pub profile: ProfileFile,
    pub distribution: Distribution,
    #[serde(default)]
    pub claim: Option<ClaimFile>,
    #[serde(default)]
    pub bound: Option<f64>,
}

impl ModelFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<AlloyModel> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)?.build(path.parent().unwrap_or(Path::new(".")))
    }

    /// Builds the model; relative raster paths resolve against `base`.
    pub fn build(&self, base: &Path) -> Result<AlloyModel> {
        let d = self.dimension;
        let mut derived_claim: Option<RasterSet> = None;
        let profile = match &self.profile {
            ProfileFile::Cell { height } => {
                derived_claim = Some(RasterSet::full(vec![-0.5; d], vec![1.0; d], vec![4; d], true)?);
                Profile::Cell { height: *height }
            }
            ProfileFile::Ball { radius, height } => Profile::Ball { radius: *radius, height: *height },
            ProfileFile::Raster { file, height } => {
                let mut set = RasterSet::load(&base.join(file))?;
                set.set_periodic(false);
                Profile::Raster { set: Arc::new(set), height: *height }
            }
            ProfileFile::Cantor { depth, resolution, removed, height } => {
                let spec = match removed {
                    Some(w) => {
                        if w.len() != *depth {
                            return Err(Error::InvalidModel("cantor `removed` must list one length per stage".into()));
                        }
                        CantorSpec::new(w.clone())?
                    }
                    None => CantorSpec::smith_volterra(*depth),
                };
                let axis = build_fat_cantor(&spec, *resolution)?.with_origin(vec![-0.5])?;
                let periodic = product_and_periodize(&vec![axis; d])?;
                let mut local = periodic.clone();
                local.set_periodic(false);
                derived_claim = Some(periodic);
                Profile::Raster { set: Arc::new(local), height: *height }
            }
        };
        let layout = match self.layout {
            LayoutKind::Full => Layout::Full,
            LayoutKind::GeometricDilution => Layout::GeometricDilution,
            LayoutKind::Slab => Layout::Slab { axis: 0 },
        };
        // cell and cantor bumps live in disjoint unit cells
        let disjoint = match &self.profile {
            ProfileFile::Cell { height } | ProfileFile::Cantor { height, .. } => Some(height.abs()),
            _ => None,
        };
        let mut model = AlloyModel::new(d, self.extent, layout, profile, self.distribution)?;
        model.claimed_bound = self.bound.or(disjoint);
        if let Some(claim) = &self.claim {
            let set = match (&claim.raster, derived_claim) {
                (Some(file), _) => RasterSet::load(&base.join(file))?,
                (None, Some(set)) => set,
                (None, None) => {
                    return Err(Error::InvalidModel("claim needs a raster for this profile kind".into()));
                }
            };
            let gamma = match claim.gamma {
                Some(g) => g,
                None => set.certify_thickness(&claim.a)?.gamma_star,
            };
            model.claimed_thick = Some(ThickClaim { window: WindowSpec::new(claim.a.clone(), gamma)?, set });
        }
        Ok(model)
    }
}
