//! Extraction of quantum vortex-core lines from 3D complex order-parameter
//! fields.
//!
//! The chain runs from a sampled field Φ to a small set of oriented,
//! spline-smoothed curves:
//!
//! 1. [`circulation`] flags grid nodes around which the phase winds;
//! 2. [`graph`] links flagged nodes into a 6-connected graph and splits it
//!    into connected components;
//! 3. [`reduction`] collapses each component into sparse sample points that
//!    keep its topology;
//! 4. [`localization`] moves every sample onto the density minimum in the
//!    plane normal to the core;
//! 5. [`vectorize`] splits branched graphs at reconnection points, orders
//!    the samples and fits Catmull-Rom splines;
//! 6. [`analysis`] reports lengths, events and a density-based error metric.
//!
//! [`pipeline::run_pipeline`] runs all of it. [`field`] provides analytic
//! test fields and a nonlinear Klein-Gordon solver; [`io`] holds the file
//! formats.
//!
//! ```
//! use qvortex::field::gen_vortex_ring;
//! use qvortex::grid::{Axis, Dims, Vec3};
//! use qvortex::pipeline::{run_pipeline, PipelineConfig};
//!
//! let dx = 0.5;
//! let field = gen_vortex_ring(Dims::cube(40).unwrap(), dx, Vec3::new(10.1, 9.9, 10.05), 10.0 * dx, Axis::Z)?;
//! let out = run_pipeline(&field, &PipelineConfig::default())?;
//! assert_eq!(out.lines.len(), 1);
//! assert!(out.lines[0].is_closed());
//! assert!((out.lines[0].length / (2.0 * std::f64::consts::PI * 5.0) - 1.0).abs() < 0.02);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

// negated comparisons are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod circulation;
pub mod error;
pub mod field;
pub mod graph;
pub mod grid;
pub mod io;
pub mod localization;
pub mod pipeline;
pub mod reduction;
pub mod vectorize;

pub use error::{Error, ErrorClass, FormatError, Result};
pub use field::ComplexField3D;
pub use grid::{Axis, Boundary, Dims, Vec3};
pub use pipeline::{run_pipeline, PipelineConfig, PipelineError, PipelineOutput};

// Book chapters compiled as doctests so their snippets stay in sync.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/fields.md")]
    mod fields {}
    #[doc = include_str!("../../../book/src/detection.md")]
    mod detection {}
    #[doc = include_str!("../../../book/src/reduction.md")]
    mod reduction {}
    #[doc = include_str!("../../../book/src/vectorization.md")]
    mod vectorization {}
    #[doc = include_str!("../../../book/src/analytics.md")]
    mod analytics {}
    #[doc = include_str!("../../../book/src/formats.md")]
    mod formats {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
