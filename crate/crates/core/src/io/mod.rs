//! File formats: input tables, run configuration, embedding documents, SVG.

pub mod config;
pub mod dataset;
pub mod document;
pub mod query;
pub mod render;

pub use config::{apply_entry, config_entries, load_config, parse_config};
pub use dataset::{load_dataset, parse_dataset, InputFormat, LabelColumn, LoadOptions};
pub use document::{data_checksum, DocumentPoint, EmbeddingDocument};
pub use query::{query_rect, Correspondence};
pub use render::{label_colours, render_svg, Metaphor, RenderOptions};
