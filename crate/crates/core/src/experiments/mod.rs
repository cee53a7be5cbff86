//! Monte Carlo and deterministic studies built on the operator, set and
//! disorder layers. Every study returns an [`ExperimentReport`]; replicas run
//! in parallel and are reduced in index order, so results do not depend on
//! the number of worker threads.

mod ids;
mod ise;
mod localisation;
pub mod report;
mod spectral_min;
pub mod stats;
mod stubborn;
mod uncertainty;
mod wegner;

pub use ids::{estimate_ids, IdsParams};
pub use ise::{run_ise, IseParams};
pub use localisation::{localisation_probe, LocalisationParams};
pub use report::{Clause, ExperimentReport, Record, Verdict, CSV_HEADER};
pub use spectral_min::{run_spectral_minimum, SpectralMinParams};
pub use stubborn::{
    heat_kernel_constant, run_stubborn, run_stubborn_exponential, StubbornExpParams, StubbornParams,
};
pub use uncertainty::{fit_k, run_uncertainty, UncertaintyParams};
pub use wegner::{run_wegner, WegnerParams};

use rayon::prelude::*;

use crate::error::Result;
use crate::grid_operator::{Boundary, BoxSpec};

pub(crate) fn default_mesh() -> usize {
    16
}

/// Runs `f(replica)` for `0..n` in parallel; output is in replica order.
pub(crate) fn over_replicas<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    (0..n as u64).into_par_iter().map(f).collect()
}

/// Dirichlet cube `Λ_side(center)` with `mesh` points per unit length.
pub(crate) fn cube(d: usize, side: f64, center: Vec<f64>, mesh: usize) -> Result<BoxSpec<f64>> {
    BoxSpec::with_mesh(d, side, center, mesh, Boundary::Dirichlet)
}

pub(crate) fn join(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(",")
}
