//! One-sample survival tests for single-arm trials.
//!
//! The experimental arm is compared with an external control whose survival
//! law is treated as known. The crate provides the one-sample log-rank test
//! and its modified form, score tests tailored to early, middle, delayed and
//! crossing treatment effects, a restricted-mean test, a max-Combo
//! combination, a trial simulator and a real-data analysis pipeline.

pub mod analysis;
pub mod combo;
pub mod dist;
pub mod error;
pub mod io;
pub mod km;
pub mod mvn;
pub mod normal;
pub mod optim;
pub mod quad;
pub mod sample;
pub mod score;
pub mod sim;

pub use dist::{fit_mle, Family, FittedModel, SurvivalModel};
pub use error::{Error, Result};
pub use sample::SurvivalSample;
pub use score::{TestOutcome, Tail};
