//! Command-line tools, file formats, a parallel runner and the
//! human-observer service on top of `bellamp-core`.

pub mod commands;
pub mod config;
pub mod formats;
pub mod parallel;
pub mod report;
pub mod service;
