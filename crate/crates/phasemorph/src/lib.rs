//! Visualize how a CNN classifier perceives the transition between two
//! classes by extrapolating its gradient in the phase of an invertible
//! image transform.
//!
//! The pipeline: decompose an image with a 2-D DFT or a complex steerable
//! pyramid, transport the class-conditional pixel gradient into the
//! coefficient domain (Wirtinger convention), convert the one-step
//! gradient into a per-coefficient phase shift, extrapolate that shift
//! linearly over `k` frames while holding amplitudes fixed, and
//! reconstruct each frame. The reconstructed sequence, together with the
//! classifier's per-frame confidence, is the morph trajectory.
//!
//! Modules:
//! - [`grid`]: the real-valued image container shared by everything else
//! - [`transforms`]: DFT and complex steerable pyramid with exact
//!   reconstruction and adjoints
//! - [`wirtinger`]: amplitude/phase gradient algebra and phase
//!   extrapolation
//! - [`net`]: a small fixed-vocabulary CNN with reverse-mode gradients
//! - [`datasets`]: synthetic disks, MNIST IDX loading, colorization, YIQ
//! - [`morph`]: the end-to-end trajectory engine and exporters

pub mod datasets;
pub mod grid;
pub mod morph;
pub mod net;
pub mod transforms;
pub mod wirtinger;

pub use grid::ImageGrid;
