pub mod distributions;
pub mod error;
pub mod estimators;
pub mod io;
pub mod numerics;
pub mod processes;
pub mod risk_neutral;

pub use error::{Error, Result};
