//! Rewrites `[sage]...[/sage]` pseudotag blocks in HTML or plain text into
//! embedded, auto-evaluating SageMathCell compute cells.
//!
//! The filter runs in four stages: [`scanner`] finds blocks, [`normalizer`]
//! strips editor markup from the captured code, [`sanitizer`] makes it safe
//! inside a script element and [`emitter`] renders the cell fragments.
//! [`pipeline`] ties them together. [`cellclient`] runs code against an
//! execution endpoint and [`packager`] builds and re-roots plugin archives.

pub mod cellclient;
pub mod emitter;
pub mod model;
pub mod normalizer;
pub mod packager;
pub mod pipeline;
pub mod sanitizer;
pub mod scanner;

pub use model::{
    make_config, CodeBlock, ConfigError, ConfigOverrides, Document, ExecutionResult, FilterConfig,
    Maturity, PluginManifest, PluginVersion, RenderedCell, RenderedOutput,
};
pub use pipeline::{filter_document, Filter};
