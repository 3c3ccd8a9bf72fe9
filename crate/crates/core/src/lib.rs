//! Sim-to-real toolchain for particle-tracking optical tactile sensors.
//!
//! The pipeline runs contact simulation on an elastic half-space, moves a
//! random particle cloud with the resulting displacement field, renders the
//! particles through an ideal pinhole camera, extracts optical-flow or raw
//! image features, and bins the surface forces into 3×20×20 labels. Real
//! fisheye images are brought into the same pinhole frame by a calibrated
//! lookup-table remap.

pub mod camera;
pub mod config;
pub mod contact;
pub mod dataset;
mod error;
pub mod features;
pub mod labels;
pub mod particles;
pub mod pipeline;
pub mod raster;
pub mod remap;
pub mod render;
pub mod seed;

pub use error::{Error, Result};
