//! Morphisms `SL2(F) -> SL2(K) -> SO3(K) -> X` for a black box group `X`
//! encrypting SL2 over an odd prime field `F`, with `K` a black box field
//! built from the involution geometry of `X`.

pub mod bbfield;
pub mod blackbox;
pub mod error;
pub mod field;
pub mod matrix;
pub mod par;
pub mod pgl2;
pub mod pipeline;
mod plane;
pub mod prime_field;
pub mod session;
pub mod sharp_flat;
pub mod text;
pub mod toolbox;
pub mod verify;

pub use error::{Error, Result};
