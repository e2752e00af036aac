pub mod approx;
pub mod closed_form;
pub mod error;
pub mod mixture;
pub mod montecarlo;
pub mod quad;
pub mod report;
pub mod scenario;
pub mod special;
pub mod sweep;
pub mod validate;
pub mod wishart;

pub use error::{Error, Result};
