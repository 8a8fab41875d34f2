//! Forward reference operations for prompt-driven feature modulation.
//!
//! A tag set is encoded as a multi-hot [`TaskDescriptor`], passed through a
//! two-layer adapter and projected into per-channel controllers. The
//! controllers scale the low and high frequency parts of each feature channel
//! and add a bias. Scaled dot-product attention is provided in cross-branch
//! (query exchange) and single-branch forms. Nothing here is trained; all
//! weights are explicit inputs and can be stored in `HSW1` tensor files.

mod attention;
mod descriptor;
mod features;
mod linear;
mod weights;

pub use attention::{
    attend, attention_weights, cross_attend, self_attend, softmax_rows, QkvProjection,
};
pub use descriptor::{
    adapt, encode_tag_set, encode_tags, leaky_relu, make_controllers, AdapterWeights,
    ControllerPair, TaskDescriptor, D_HIDDEN, D_TEXT, LEAKY_SLOPE,
};
pub use features::{modulate_features, FeatureMap, IMAG_TOLERANCE};
pub use linear::Linear;
pub use weights::{Tensor, TensorSet, HSW_MAGIC};
