//! Robust H∞ analysis and state-feedback synthesis for discrete-time
//! descriptor systems with norm-bounded uncertainty, via linear matrix
//! inequalities solved by a built-in semidefinite programming backend.

pub mod config;
pub mod error;
pub mod example;
pub mod io;
pub mod lmi;
pub mod model;
pub mod par;
pub mod random;
pub mod sdp;
pub mod synth;
pub mod verify;

pub use config::Config;
pub use error::{Error, Result};
pub use model::{DescriptorPlant, Mat, SvdEquivalentForm, UncertainPlant};
pub use synth::{synthesize, synthesize_optimal, SynthesisResult};
