// `!(x > y)` guards are written that way so NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod angle;
pub mod beam;
pub mod decomposition;
pub mod error;
pub mod interference;
pub mod io;
pub mod pipeline;
pub mod scenario;
pub mod verify;

pub use error::{Error, Result};

// Book chapters compile and run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/beam-state.md")]
    mod beam_state {}
    #[doc = include_str!("../../../book/src/sources.md")]
    mod sources {}
    #[doc = include_str!("../../../book/src/interference.md")]
    mod interference {}
    #[doc = include_str!("../../../book/src/symmetry.md")]
    mod symmetry {}
    #[doc = include_str!("../../../book/src/axial-ratio.md")]
    mod axial_ratio {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
