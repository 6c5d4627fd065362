//! Compiler and runtime for TSIA programs executed through task frames.

pub mod frontend;
pub mod lowering;
pub mod machine;
pub mod scheduler;
