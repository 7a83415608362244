//! Joint forecasting of two interacting people's 3D poses.
//!
//! The pipeline maps an observed motion window to DCT coefficients, encodes
//! it with a stack of space-time separable graph convolutions whose
//! adjacencies are fully learnable, decodes future coefficient slots with a
//! fully-connected (or temporal-convolutional) head, and reconstructs poses
//! with the inverse DCT. Initialization schemes that keep activation
//! variance flat across deep stacks live in [`init`], together with an
//! empirical variance probe and a seed-stability study.

pub mod data;
pub mod error;
pub mod frequency;
pub mod init;
pub mod model;
pub mod numerics;
pub mod report;
pub mod training;

pub use error::{Error, Result};
