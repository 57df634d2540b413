//! Guide chapters compiled as doctests, one module per chapter so a
//! failing listing points at its file.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/parameters.md")]
pub mod parameters {}

#[doc = include_str!("../../../book/src/scattering.md")]
pub mod scattering {}

#[doc = include_str!("../../../book/src/dynamics.md")]
pub mod dynamics {}

#[doc = include_str!("../../../book/src/full-model.md")]
pub mod full_model {}

#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}
