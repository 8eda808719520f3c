pub mod error;
pub mod circlemap;
pub mod exactnum;
pub mod families;
pub mod measure;
pub mod perturb;
pub mod seeds;
pub mod shadowing;

pub use error::{Error, Result};
pub use exactnum::PiRational;
