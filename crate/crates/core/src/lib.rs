pub mod bounds;
pub mod error;
pub mod estimate;
pub mod eta;
pub mod events;
pub mod linalg;
pub mod signspace;
pub mod verify;

pub use error::{Error, Result};
