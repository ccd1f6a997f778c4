//! Far field of internal gravity waves radiated by a point mass source moving
//! horizontally through a stratified layer whose buoyancy frequency varies
//! slowly in the horizontal.
//!
//! The pipeline runs vertical modes → dispersion surface → space-time rays →
//! amplitude transport → global Airy/Fresnel wave synthesis.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod dispersion;
pub mod error;
pub mod modes;
pub mod numerics;
pub mod ode;
pub mod output;
pub mod pipeline;
pub mod rays;
pub mod registry;
pub mod selftest;
pub mod specfun;
pub mod stratification;
pub mod synthesis;
pub mod transport;
pub mod waves;

pub use error::{Error, Result};
