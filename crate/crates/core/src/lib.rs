//! Quanvolution with frozen quantum circuits as convolution kernels.
//!
//! The crate contains a small statevector simulator ([`qsim`]), the circuit
//! families used as kernels ([`circuits`]), the quanvolution operator itself
//! ([`quanv`]), file formats ([`tensor_io`]), a timing harness ([`bench`]) and a
//! feature-quality harness ([`probe`]).

pub mod bench;
pub mod circuits;
pub mod cli;
pub mod error;
pub mod probe;
pub mod qsim;
pub mod quanv;
pub mod synth;
pub mod tensor;
pub mod tensor_io;

pub use error::{Error, Result};
pub use tensor::{FeatureMap, ImageTensor, Tensor3};
