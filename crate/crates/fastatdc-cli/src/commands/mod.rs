pub mod bench;
pub mod detect;
pub mod eval;
pub mod gen;
pub mod stats;
pub mod sweep;
