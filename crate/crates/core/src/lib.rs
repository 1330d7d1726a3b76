//! Exponential-histogram quantile sketch.
//!
//! * [`sketch`]: the mergeable sketch with ε-relative quantile accuracy.
//! * [`codec`]: canonical file encoding of sketches.
//! * [`special`]: special functions used by the theory.
//! * [`theory`]: closed-form laws for sketch size, tail mass, occupancy and gaps.
//! * [`simulation`]: seeded Monte Carlo experiments checking the theory.

pub mod codec;
pub mod simulation;
pub mod sketch;
pub mod special;
pub mod theory;

pub use sketch::{ExponentialHistogram, SketchConfig, SketchError};
