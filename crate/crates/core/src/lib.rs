//! Static-analysis workbench: exact and approximate LRU cache classification,
//! interval analysis with widening, exact interval-bound equation solving and
//! symbolic rewriting combined with intervals.

pub mod antichain;
pub mod bounds;
pub mod cache;
pub mod intervals;
pub mod ir;
pub mod random;
pub mod symrewrite;
