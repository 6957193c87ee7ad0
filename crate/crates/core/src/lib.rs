//! Numerical laboratory for conjugate-function inequalities in several complex
//! variables. Hardy norms come from harmonic and pluriharmonic measures on
//! exhaustions, and each inequality has a checker that returns a verdict.

pub mod error;
pub mod functions;
pub mod geometry;
pub mod hardy;
pub mod measure;
pub mod point;
pub mod potential;
pub mod rules;
pub mod verify;

pub use error::{LabError, Result};
pub use num_complex::Complex64;
pub use functions::{FnSpec, TestFunction};
pub use geometry::{DomainConfig, DomainKind, ExhaustionLevel, ModelDomain, Scheme, Shape};
pub use hardy::NormEstimate;
pub use measure::{Engine, EngineKind};
pub use point::Point;
pub use verify::{CheckReport, Verdict};
