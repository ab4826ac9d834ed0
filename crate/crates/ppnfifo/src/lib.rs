//! File formats, reports and the command-line pipeline on top of
//! `ppnfifo-core`.

pub mod error;
pub mod model;
pub mod pipeline;
pub mod report;

pub use error::{AppError, AppResult};
pub use ppnfifo_core;
