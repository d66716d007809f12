//! Prediction of hospital readmission from discharge-summary text.
//!
//! The crate covers the full modeling pipeline: building a heart-failure
//! cohort from admission records ([`cohort`]), turning note text into padded
//! token-id sequences over a word-embedding table ([`textprep`]), a
//! convolutional text classifier with exact gradients and a seeded training
//! loop ([`cnn`]), a TF-IDF / random-forest baseline ([`baseline`]),
//! evaluation metrics ([`metrics`]), chi-square interpretation of correctly
//! predicted samples ([`explain`]), and a seeded synthetic data generator
//! for end-to-end testing ([`synth`]).
//!
//! Everything in here is pure computation over owned data: every randomized
//! operation takes an explicit seed and the same inputs always produce the
//! same outputs, bit for bit. File formats, timestamps and the command-line
//! pipeline live in the companion `notecnn` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod baseline;
pub mod cnn;
pub mod cohort;
pub mod explain;
mod math;
pub mod metrics;
pub mod rng;
pub mod synth;
pub mod textprep;
