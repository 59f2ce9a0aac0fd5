//! Dictionary-learning image enhancement and rarity detection.
//!
//! An image is cut into 8×8 blocks, a K-SVD dictionary is learned on the
//! block matrix, and each atom receives a rarity score from how often the
//! sparse codes use it. Rescaling the atoms through a transform of those
//! scores and reconstructing gives an enhanced image; weighting the codes by
//! atom rarity gives a saliency map.
//!
//! Modules follow the processing chain:
//!
//! - [`imageio`]: grayscale PGM I/O and block decomposition.
//! - [`coder`]: sparse coding against a fixed dictionary (OMP and ISTA).
//! - [`ksvd`]: dictionary update and the alternating learning loop, plus
//!   the `RDCT` dictionary file format.
//! - [`rarity`]: activation statistics, rarity measures and transforms.
//! - [`pipeline`]: enhancement, saliency maps, the Itti-lite baseline and
//!   saliency evaluation.
//! - [`synth`]: seeded synthetic images used by the evaluation harness.

// `!(x > 0.0)` is used deliberately so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coder;
mod error;
pub mod imageio;
pub mod ksvd;
mod linalg;
pub mod pipeline;
pub mod rarity;
pub mod synth;

pub use error::{Error, Result};
