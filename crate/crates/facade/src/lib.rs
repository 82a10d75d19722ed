//! Command-line tool and HTTP service for `surfmotif`.
//!
//! Both front ends turn their input into a [`surfmotif::scene::SceneDoc`]
//! (or a curve or lift request) and run it through [`pipeline`], so a scene
//! rendered from the CLI and over HTTP yields the same bytes.

pub mod cli;
pub mod diagnostics;
pub mod pipeline;
pub mod service;

pub use diagnostics::{validate, Diagnostics, Problem};
pub use pipeline::{FacadeError, Limits};
pub use service::{Config, Service};
