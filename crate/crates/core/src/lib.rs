//! Exact combinatorics for generalized Bratteli diagrams.
//!
//! Diagrams are lazily evaluated incidence rules over countably infinite
//! levels. Every probe returns a three-valued [`probes::Verdict`]: a positive
//! answer carries a checkable witness, a negative one carries an invariant
//! verified on a finite window and backed by a structural flag, and anything
//! else is reported as unknown at the searched bounds.

pub mod acceptance;
pub mod dynamics;
pub mod error;
pub mod export;
pub mod model;
pub mod paths;
pub mod probes;
pub mod reenumerate;
pub mod relabel;

pub use error::{GbdError, Result};
pub use model::{
    catalog, load_spec, ColumnSupport, DiagonalRule, DiagramHandle, ExtensionPolicy, Flag,
    Interval, Level, LevelRule, LevelWindow, Mult, Vertex, VertexIndexing,
};

/// Default number of levels searched by probes.
pub const DEFAULT_DEPTH: usize = 24;
/// Default window radius for probes.
pub const DEFAULT_RADIUS: u64 = 16;
/// Default number of levels a path generator is evaluated to.
pub const DEFAULT_HORIZON: usize = 512;
