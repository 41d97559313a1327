//! Random self-similar sets, random Bedford–McMullen carpets and Mandelbrot
//! percolation: exact dimension formulas, finite-depth constructions and
//! covering-count estimators.

pub mod carpet;
pub mod error;
pub mod estimate;
pub mod experiment;
pub mod percolation;
pub mod pgm;
pub mod rational;
pub mod report;
pub mod rng;
pub mod roots;
pub mod selfsim;
pub mod spec;
pub mod words;

pub use error::{Error, Result};
pub use estimate::GridSet;
pub use rational::Rational;
pub use words::{ProbabilityVector, Realization, Word};
