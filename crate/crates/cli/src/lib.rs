//! Command-line pipeline around `notecnn-core`: synthetic data generation,
//! cohort construction, model training, evaluation, and feature reports.

mod binio;
pub mod cache;
pub mod checkpoint;
pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod report;
