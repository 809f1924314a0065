//! Synthesis, evaluation, and a matching baseline for one-shot texture
//! segmentation: given an image made of several textures and a reference
//! patch of one of them, mark the pixels covered by that texture.
//!
//! - [`colltex`]: collages of textures over a nearest-anchor partition.
//! - [`omniglot`]: textured character masks composited with occlusion.
//! - [`metrics`]: class-balanced cross-entropy and IoU evaluation.
//! - [`matcher`]: local-statistics embeddings with cosine matching.
//! - [`dataset`]: on-disk layout, manifest, and parallel generation.
//!
//! Every sample is a pure function of `(global_seed, sample_index)`, the
//! configuration, and the texture and glyph inputs.

pub mod colltex;
pub mod corpus;
pub mod dataset;
pub mod error;
pub mod image;
pub mod matcher;
pub mod metrics;
pub mod morphology;
pub mod omniglot;
pub mod partitioner;
pub mod rng;
pub mod split;
pub mod texture_store;

pub use error::{Error, Result};
pub use image::{BinaryMask, ProbMask, Rgb8Image};
pub use rng::{derive_stream, RngStream};
pub use split::Split;
pub use texture_store::{load_textures, TextureStore};
