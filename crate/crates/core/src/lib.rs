//! Quantization of one-dimensional symmetric anharmonic oscillators through
//! the amplitude-phase (Milne) formulation.

pub mod diffalg;
pub mod error;
pub mod model;
pub mod oracle;
pub mod qlm;
pub mod quad;
pub mod roots;
pub mod semiclassical;
pub mod special;
pub mod spectrum;

pub use error::{Error, Result};
pub use model::{SymmetricPotential, TurningPoints};
