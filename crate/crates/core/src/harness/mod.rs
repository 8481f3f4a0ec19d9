//! Monte-Carlo harness: file formats, sweeps, plots and statistical checks.

pub mod cmat;
pub mod experiments;
pub mod selftest;
pub mod stats;
pub mod svg;
pub mod sweep;
