//! Transmission channel and eavesdropper models for the signal beam.
//!
//! A tap attack diverts a fraction of the signal power, lowering the
//! effective efficiency from `eta0` to `eta = eta0 * (1 - tap_fraction)`
//! and raising the normalized difference noise from `S(eta0)` to
//! `S(eta)`. The penalty is realized as added Gaussian noise variance on
//! Bob's samples; the mean current is unchanged because Bob's detection
//! gain rebalances the DC level against the announced reference.
//!
//! Intercept-resend replaces the signal with a fresh shot-noise-limited
//! beam of the same intensity: quantum noise cannot be cloned, so the
//! resent beam shares no fluctuation pattern with the retained idler.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng;
use crate::source::{difference_noise_at, SampleStream, SourceParams};

/// Channel efficiency state seen by the signal beam.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    /// Effective efficiency after the channel, `eta = eta0 * (1 - tap)`.
    pub eta: f64,
    /// Fraction of signal power diverted by the eavesdropper, in [0, 1).
    pub tap_fraction: f64,
}

impl ChannelParams {
    /// An undisturbed channel at the source's baseline efficiency.
    pub fn lossless(params: &SourceParams) -> Self {
        ChannelParams {
            eta: params.eta0,
            tap_fraction: 0.0,
        }
    }

    /// A tap attack diverting `tap_fraction` of the signal power.
    pub fn with_tap(params: &SourceParams, tap_fraction: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&tap_fraction) {
            return Err(Error::InvalidParameter {
                field: "tap_fraction",
                reason: "must lie in [0, 1)",
            });
        }
        Ok(ChannelParams {
            eta: params.eta0 * (1.0 - tap_fraction),
            tap_fraction,
        })
    }

    fn check_against(&self, params: &SourceParams) -> Result<()> {
        if self.eta > params.eta0 || self.eta < 0.0 {
            return Err(Error::InconsistentChannel {
                eta: self.eta,
                eta0: params.eta0,
            });
        }
        if !(0.0..1.0).contains(&self.tap_fraction) {
            return Err(Error::InvalidParameter {
                field: "tap_fraction",
                reason: "must lie in [0, 1)",
            });
        }
        Ok(())
    }
}

/// Transmit the signal stream through a lossy (possibly tapped) channel.
///
/// The returned stream's joint statistics with the retained idler follow
/// the difference-noise formula at `eta = chan.eta`: independent
/// Gaussian noise of variance `(S' - S0) * 2 * shot_noise_std^2` is
/// admixed per sample. With `eta == eta0` the admixed variance is zero
/// and the output is bit-identical to the input.
pub fn transmit(
    signal: &SampleStream,
    params: &SourceParams,
    chan: &ChannelParams,
    seed: u64,
) -> Result<SampleStream> {
    params.validate()?;
    chan.check_against(params)?;

    let s0 = difference_noise_at(params, params.eta0);
    let s_attacked = difference_noise_at(params, chan.eta);
    let added_variance =
        (s_attacked - s0) * 2.0 * params.shot_noise_std_mv * params.shot_noise_std_mv;
    if added_variance <= 0.0 {
        return Ok(signal.clone());
    }

    let sigma = libm::sqrt(added_variance);
    let mut rng = rng::seeded(seed);
    let mut out = signal.clone();
    for sample in &mut out.samples_mv {
        let z: f64 = rng.sample(StandardNormal);
        *sample += sigma * z;
    }
    Ok(out)
}

/// Intercept-resend attack: measure the signal and send a fresh
/// coherent-state beam of the same mean intensity.
///
/// The output is shot-noise limited (unit excess factor) and statistically
/// independent of the retained idler.
pub fn intercept_resend(
    signal: &SampleStream,
    params: &SourceParams,
    seed: u64,
) -> Result<SampleStream> {
    params.validate()?;
    let mean = signal.normalization.mean_current_mv;
    let scale = signal.normalization.shot_noise_std_mv;
    let mut rng = rng::seeded(seed);
    let mut out = signal.clone();
    for sample in &mut out.samples_mv {
        let z: f64 = rng.sample(StandardNormal);
        *sample = mean + scale * z;
    }
    Ok(out)
}
