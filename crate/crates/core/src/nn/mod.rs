//! Hand-written neural network building blocks shared by the classifier and
//! the echo autoencoder.

pub mod attention;
pub mod checkpoint;
pub mod gru;
pub mod mat;
pub mod ops;
pub mod optim;

pub use attention::AttentionLayer;
pub use gru::{BiGru, GruCell};
pub use mat::{Mat, Real};
