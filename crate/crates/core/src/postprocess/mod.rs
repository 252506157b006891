//! Mask clean-up and region extraction: opening, 8-connected labelling and
//! bounding boxes of the surviving blobs.

mod components;
mod morphology;
mod roi;

pub use components::{connected_components, Blob, Components};
pub use morphology::{dilate, erode, open, StructuringElement};
pub use roi::extract_rois;
