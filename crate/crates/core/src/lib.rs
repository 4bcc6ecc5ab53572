//! Simulator and protocol library for quantum key distribution over
//! intensity-correlated twin beams.
//!
//! Two bright beams from a parametric oscillator above threshold share
//! their intensity fluctuations: the noise power of the intensity
//! *difference* sits below the shot-noise limit, while each beam on its
//! own looks noisy. Alice keeps one beam, sends the other to Bob, and
//! both record photocurrent samples at synchronized times. Samples that
//! deviate from the mean current by more than a calibrated threshold
//! carry a sign that both parties see identically, so Alice can transmit
//! a key by announcing only "right"/"wrong"/"dropped" per time slot and
//! never the signs themselves. An eavesdropper tapping or replacing the
//! transmitted beam raises the difference noise and destroys the shared
//! fluctuation pattern, which a disclosed test subset exposes.
//!
//! The crate is split along those lines:
//!
//! - [`source`]: joint photocurrent statistics of the twin beams and
//!   the normalized difference-noise spectrum.
//! - [`channel`]: transmission loss, tap attacks and intercept-resend.
//! - [`protocol`]: calibration, sifting, announcement encoding and
//!   decoding, the eavesdropping test, and the full two-party session.
//! - [`transcript`]: the ordered classical-channel message log and its
//!   line-based serialization.
//! - [`analysis`]: noise estimators, attack sweeps and throughput
//!   accounting.
//!
//! The crate is `no_std` (with `alloc`) and performs no IO; all float
//! math goes through `libm` so results are identical across platforms.
//! Everything is a pure function of its inputs and a 64-bit seed.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod analysis;
pub mod channel;
pub mod error;
pub mod fmt;
pub mod protocol;
pub mod rng;
pub mod source;
pub mod stats;
pub mod transcript;

pub use error::{Error, Result};
pub use source::{SampleStream, SourceParams};
