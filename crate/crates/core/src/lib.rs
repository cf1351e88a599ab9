//! Exact relative enumerative invariants `N(D, g, alpha, beta)` of the plane
//! blown up at six general points, with tangency conditions along the conic
//! `E = 2L - E1 - ... - E5`.

pub mod arith;
pub mod cache;
pub mod cli;
pub mod engine;
pub mod error;
pub mod genus0;
pub mod oracle;
pub mod picard;
pub mod quadruple;
pub mod splitter;
pub mod tangency;
pub mod verify;

pub use cache::{EngineKind, MemoCache};
pub use engine::{Engine, EvalConfig};
pub use error::{Error, Result};
pub use picard::DivisorClass;
pub use quadruple::Quadruple;
pub use splitter::GenusOffset;
pub use tangency::TangencyVector;
