pub mod catalog;
mod diagram;
mod indexing;
mod spec;

pub use diagram::{
    ColumnSupport, DiagonalRule, DiagramHandle, ExtensionPolicy, Flag, LevelRule,
    FLAG_CHECK_LEVELS, FLAG_CHECK_RADIUS,
};
pub(crate) use diagram::Rule;
pub use indexing::{Interval, Level, LevelWindow, Mult, Vertex, VertexIndexing};
pub use spec::{load_spec, parse_indexing, parse_bijection_spec, parse_generator_spec, parse_level_rule, spec_value};
