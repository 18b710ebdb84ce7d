//! Gowers uniformity norms on Z/NZ, W-tricked von Mangoldt weights, and
//! multiple ergodic averages along shifted primes on simulated systems.

pub mod arith;
pub mod cli;
pub mod combinat;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod fft;
pub mod par;
pub mod phase;
pub mod report;
pub mod selftest;
pub mod znz;

pub use error::{LabError, Result};
