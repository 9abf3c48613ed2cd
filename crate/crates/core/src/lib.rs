//! Poletsky–Stessin Hardy spaces on the unit disc and its conformal images.

pub mod compose;
pub mod error;
pub mod exhaustion;
pub mod expr;
pub mod factor;
pub mod frame;
pub mod hardy;
pub mod loc;
pub mod measure;
pub mod quad;

pub use error::{Error, Result};
pub use loc::{Anchor, Loc};
