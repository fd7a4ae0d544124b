pub mod cli;
pub mod corpus;
pub mod eval;
pub mod fixed;
pub mod formula;
pub mod goal;
pub mod lang;
pub mod model;
pub mod pathfinder;
pub mod plan;
pub mod search;
pub mod timeline;
pub mod trace;
pub mod validate;

/// Fixed-point number with an `i64` mantissa, the numeric type used
/// throughout the planner.
pub type Decimal = fixed::Fixed<i64>;
