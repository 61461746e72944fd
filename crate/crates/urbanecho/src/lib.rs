//! Deterministic 2D urban sound-propagation simulator and benchmark dataset
//! toolkit: scene ingestion from OpenStreetMap data, receiver-grid simulation
//! with reflections and horizontal diffraction, rasterization to grayscale
//! sound maps, and the MAE/wMAPE line-of-sight evaluation harness.
//!
//! The heavy inner loops (per-receiver simulation, per-pixel rasterization)
//! run on rayon when the default `parallel` feature is enabled and fall back
//! to sequential loops otherwise; results are bit-identical either way.

pub mod dataset;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod metrics;
pub mod osm;
pub mod parallel;
pub mod propagation;
pub mod raster;
pub mod scenario;
pub mod synth;

pub use error::{Error, Result};
pub use geometry::{CellVisibility, PixelGrid, Point2, Polygon2, Segment2};
pub use grid::{Receiver, ReceiverGrid, ReceiverKind};
pub use metrics::MetricsReport;
pub use osm::{GeoLocation, Scene};
pub use propagation::{
    Environment, PathKind, PropagationPath, Propagator, SourceSpec, TaskConfig, TaskVariant,
};
pub use raster::SoundMap;
pub use scenario::SampleParams;
