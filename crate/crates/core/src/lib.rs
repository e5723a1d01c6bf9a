//! Secrecy performance of a reconfigurable-intelligent-surface link under
//! Fisher-Snedecor F fading.
//!
//! * [`mellin`] evaluates Mellin–Barnes integrals and the special functions
//!   they are built from.
//! * [`channel`] holds the fading model, the moment-matched Gamma law of the
//!   end-to-end SNR and an exact sampler.
//! * [`secrecy`] computes secrecy outage probability and average secrecy
//!   capacity by contour integrals, by direct quadrature and asymptotically.
//! * [`mc_sim`] simulates the physical model for ground truth.

// Parameter checks are written `!(x > 0.0)` on purpose so that NaN fails
// them, and reference constants keep every digit they were computed with.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod channel;
pub mod mc_sim;
pub mod mellin;
pub mod quadrature;
pub mod secrecy;
