//! Generative textile motifs from implicit algebraic surfaces and modified
//! hypocycloid curves.
//!
//! - [`expr`] parses, prints, evaluates, differentiates and composes
//!   implicit equations in `x`, `y`, `z`.
//! - [`render`] ray-casts an equation's zero set into a two-colour image.
//! - [`curve`] samples and transforms the hypocycloid-style plane curves.
//! - [`spherical`] lifts a plane curve to a surface through spherical
//!   coordinates and exports meshes.
//! - [`motif`] holds the preset catalogue and turns renders into repeats.
//!
//! The guide under `book/` walks through each of these; its Rust snippets are
//! compiled and run as doc-tests of this crate.

pub mod color;
pub mod curve;
pub mod expr;
mod geom;
pub mod motif;
pub mod render;
pub mod scene;
pub mod spherical;

pub use color::Rgb;
pub use expr::{Expr, ParamBinding};
pub use geom::Point3;
pub use render::{Image, Scene};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/equations.md")]
    mod equations {}
    #[doc = include_str!("../../../book/src/composition.md")]
    mod composition {}
    #[doc = include_str!("../../../book/src/rendering.md")]
    mod rendering {}
    #[doc = include_str!("../../../book/src/curves.md")]
    mod curves {}
    #[doc = include_str!("../../../book/src/lift.md")]
    mod lift {}
    #[doc = include_str!("../../../book/src/motifs.md")]
    mod motifs {}
    #[doc = include_str!("../../../book/src/cli-http.md")]
    mod cli_http {}
}
