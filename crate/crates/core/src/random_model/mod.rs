//! Random alloy-type potentials, their assumptions, and derived models.

mod config;
mod distribution;
mod minorant;
mod model;
pub mod rng;

pub use config::ModelFile;
pub use distribution::{modulus_s, Distribution};
pub use minorant::{choose_eps1, construct_diluted_minorant, DilutedMinorant, MinorantCell, MinorantParams};
pub use model::{
    AlloyModel, Layout, NoPiCertificate, NoPiWitness, PiCertificate, Profile, ThickClaim, GAMMA_FLOOR,
};
