//! Layered vertex splitting data embedding.
//!
//! A force-directed 2-D embedding in which instances that are pulled in
//! conflicting directions may be split into two projections. Points carry a
//! layer: red for instances the layout represents well, gray for those it
//! had to compromise on.
//!
//! ```no_run
//! use lvsde::{io, run, RunConfig};
//!
//! let data = io::load_dataset("iris.csv", &io::LoadOptions::default())?;
//! let trace = run(&data, &RunConfig::default())?;
//! println!("{} points", trace.final_state.points.len());
//! # Ok::<(), lvsde::LvsdeError>(())
//! ```

pub mod distances;
pub mod error;
pub mod eval;
pub mod forces;
pub mod geometry;
pub mod io;
pub mod model;
pub mod phases;
pub mod splitting;

pub use distances::{DistanceMatrix, DistanceModel, NeighbourhoodGraph};
pub use error::{LvsdeError, Result};
pub use eval::{lambda_measure, LambdaSpec, LayerSet, TABLE_COMBINATIONS};
pub use geometry::{Rect, Vec2};
pub use model::{
    init_random_embedding, optimal_distance, DataSet, EmbeddingState, Layer, Metric,
    ProjectedPoint, RepulsionMode, RunConfig,
};
pub use phases::{run, run_with_progress, Progress, RunTrace, Snapshot};
