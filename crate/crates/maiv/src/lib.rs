//! Motion-aware video synthesis toolkit.
//!
//! A video-to-video generator is expensive to run on every frame. This
//! crate implements the cheap parts that let it run on only a few: picking
//! the key timestamps worth synthesizing (residual-curve peaks plus
//! fixed/random baselines), reconstructing everything between them with
//! block motion estimation ([`motion`]) and overlapped block motion
//! compensation ([`compensate`]), the generator backend interface with a
//! subprocess wire protocol ([`generator`]), distillation-style quality
//! metrics and a MAC budget model ([`metrics`]), and lossless sequence I/O
//! ([`io`]).
//!
//! The [`pipeline`] module ties those together: select, synthesize the
//! key-frames through a backend, interpolate the rest, and report the
//! compute spent.

pub mod compensate;
pub mod error;
pub mod frame;
pub mod generator;
pub mod io;
pub mod keyframe;
pub mod metrics;
pub mod motion;
pub mod pipeline;
pub mod synthetic;

pub use error::{Error, Result};
pub use frame::{FrameBuffer, FrameRate, Sequence};
