//! Single-layer spiking network trained by STDP on interchangeable synapse
//! backends: ideal analog, level-quantized, a single RRAM device, and `n`
//! parallel RRAMs written one at a time.

pub mod crossbar;
pub mod dataset;
pub mod device;
pub mod encoding;
pub mod error;
pub mod harness;
pub mod network;
pub mod seed;
pub mod stdp;
pub mod synapse;

pub use error::{Error, Result};
