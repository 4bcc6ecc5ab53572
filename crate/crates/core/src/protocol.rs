//! Alice's and Bob's protocol steps: calibration, threshold sifting,
//! announcement encoding/decoding, the eavesdropping test, and the full
//! two-party session over a transcripted classical channel.
//!
//! The key never travels in the clear. Alice compares each retained
//! measurement sign against the key bit she wants to send and announces
//! only `R` (same), `W` (different) or `D` (dropped); Bob recovers the
//! bit from his own sign and the announcement. Flipping every retained
//! sign together with the key leaves the announcement unchanged, so the
//! public record carries no information about the bits themselves.

use alloc::vec;
use alloc::vec::Vec;

use crate::analysis;
use crate::channel::{intercept_resend, transmit, ChannelParams};
use crate::error::{Error, Result};
use crate::rng;
use crate::source::{generate_joint, SampleStream, SourceParams};
use crate::stats;
use crate::transcript::{Message, Sender, SessionVerdict, Transcript};

/// Seed stream labels for the session stages.
const SEED_CALIBRATION: u64 = 1;
const SEED_GENERATION: u64 = 2;
const SEED_CHANNEL: u64 = 3;
const SEED_TEST_SET: u64 = 4;

/// Publicly announced reference values measured before communication.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    /// Reference average photocurrent `I0`, in millivolts.
    pub i0_mv: f64,
    /// Statistical scale of the pairwise difference `Is`, in millivolts;
    /// doubles as the sifting threshold.
    pub is_mv: f64,
    /// Averaging window used to obtain the references, in seconds.
    pub window_s: f64,
}

impl Calibration {
    /// The averaging window must dwarf the cavity storage time.
    pub fn validate(&self, params: &SourceParams) -> Result<()> {
        if self.i0_mv.is_nan() || self.i0_mv <= 0.0 {
            return Err(Error::InvalidParameter {
                field: "i0",
                reason: "must be > 0",
            });
        }
        if self.is_mv.is_nan() || self.is_mv <= 0.0 {
            return Err(Error::InvalidParameter {
                field: "is",
                reason: "must be > 0",
            });
        }
        if self.window_s < 100.0 * params.cavity_storage_time_s {
            return Err(Error::InvalidParameter {
                field: "window",
                reason: "must cover at least 100 cavity storage times",
            });
        }
        Ok(())
    }
}

/// Measure `I0` and `Is` on locally generated twin beams.
///
/// `i0` is the sample mean of one beam; `is` is the sample standard
/// deviation of the pairwise difference stream. The run must span at
/// least 100 cavity storage times.
pub fn calibrate(params: &SourceParams, n: usize, seed: u64) -> Result<Calibration> {
    params.validate()?;
    let min_window = 100.0 * params.cavity_storage_time_s;
    let required = libm::ceil(min_window / params.sample_interval_s).max(2.0) as usize;
    if n < required {
        return Err(Error::InsufficientSamples {
            required,
            available: n,
        });
    }
    let (a, b) = generate_joint(params, n, seed)?;
    let i0 = stats::mean(&a.samples_mv);
    let is = libm::sqrt(stats::difference_variance(&a.samples_mv, &b.samples_mv));
    Ok(Calibration {
        i0_mv: i0,
        is_mv: is,
        window_s: n as f64 * params.sample_interval_s,
    })
}

/// Outcome of sifting one sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SiftVerdict {
    /// Deviation exceeded the threshold; sign gives the bit.
    Bit(bool),
    /// Deviation within the threshold; the sample carries no bit.
    Dropped,
}

impl SiftVerdict {
    pub fn bit(&self) -> Option<bool> {
        match self {
            SiftVerdict::Bit(b) => Some(*b),
            SiftVerdict::Dropped => None,
        }
    }

    pub fn is_dropped(&self) -> bool {
        matches!(self, SiftVerdict::Dropped)
    }
}

/// Per-time-point sifting outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiftRecord {
    /// Time index within the measured stream.
    pub k: usize,
    /// Deviation from the calibration reference, `I_k - I0`, in mV.
    pub deviation_mv: f64,
    pub verdict: SiftVerdict,
}

/// Classify every sample of a stream against the calibration.
///
/// Deviations strictly above `Is` give bit 1, strictly below `-Is` give
/// bit 0, everything inside (inclusive) is dropped.
pub fn sift(stream: &SampleStream, cal: &Calibration) -> Vec<SiftRecord> {
    stream
        .samples_mv
        .iter()
        .enumerate()
        .map(|(k, sample)| {
            let deviation = sample - cal.i0_mv;
            let verdict = if deviation > cal.is_mv {
                SiftVerdict::Bit(true)
            } else if deviation < -cal.is_mv {
                SiftVerdict::Bit(false)
            } else {
                SiftVerdict::Dropped
            };
            SiftRecord {
                k,
                deviation_mv: deviation,
                verdict,
            }
        })
        .collect()
}

/// One public announcement symbol per measured time point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symbol {
    /// Alice's retained bit equals the key bit.
    R,
    /// Alice's retained bit differs from the key bit.
    W,
    /// The time point carries no key bit.
    D,
}

/// Alice's public per-index declaration, aligned with time indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Announcement {
    pub symbols: Vec<Symbol>,
}

/// Encode Alice's announcement for transmitting `key`.
///
/// Dropped records announce `D`; the `j`-th retained record announces
/// `R` if Alice's bit equals `key[j]`, else `W`. Retained records beyond
/// the key length are announced `D` (unused). Errors if the key has more
/// bits than there are retained records.
pub fn encode_announcement(alice: &[SiftRecord], key: &[bool]) -> Result<Announcement> {
    encode_with_exclusions(alice, None, key)
}

/// As [`encode_announcement`], but additionally announce `D` at excluded
/// indices (publicly known positions: disclosed test points and Bob's
/// announced drops).
pub(crate) fn encode_with_exclusions(
    alice: &[SiftRecord],
    excluded: Option<&[bool]>,
    key: &[bool],
) -> Result<Announcement> {
    if let Some(ex) = excluded {
        debug_assert_eq!(ex.len(), alice.len());
    }
    let usable = alice
        .iter()
        .enumerate()
        .filter(|(i, r)| {
            !r.verdict.is_dropped() && !excluded.map(|ex| ex[*i]).unwrap_or(false)
        })
        .count();
    if key.len() > usable {
        return Err(Error::KeyTooLong {
            key_bits: key.len(),
            retained: usable,
        });
    }

    let mut symbols = Vec::with_capacity(alice.len());
    let mut next_key_bit = 0;
    for (i, record) in alice.iter().enumerate() {
        let shut_out = excluded.map(|ex| ex[i]).unwrap_or(false);
        let symbol = match record.verdict {
            SiftVerdict::Dropped => Symbol::D,
            SiftVerdict::Bit(_) if shut_out => Symbol::D,
            SiftVerdict::Bit(_) if next_key_bit >= key.len() => Symbol::D,
            SiftVerdict::Bit(bit) => {
                let s = if bit == key[next_key_bit] {
                    Symbol::R
                } else {
                    Symbol::W
                };
                next_key_bit += 1;
                s
            }
        };
        symbols.push(symbol);
    }
    Ok(Announcement { symbols })
}

/// Decode the key from Bob's records and Alice's announcement.
///
/// Indices announced `D`, or where Bob himself dropped, are skipped; `R`
/// emits Bob's bit and `W` its complement.
pub fn decode_key(bob: &[SiftRecord], ann: &Announcement) -> Result<Vec<bool>> {
    if bob.len() != ann.symbols.len() {
        return Err(Error::LengthMismatch {
            left: bob.len(),
            right: ann.symbols.len(),
        });
    }
    let mut key = Vec::new();
    for (record, symbol) in bob.iter().zip(&ann.symbols) {
        let bit = match record.verdict.bit() {
            Some(b) => b,
            None => continue,
        };
        match symbol {
            Symbol::D => continue,
            Symbol::R => key.push(bit),
            Symbol::W => key.push(!bit),
        }
    }
    Ok(key)
}

/// How aggressively the eavesdropping test rejects.
///
/// Thresholds sit `sigma` standard errors away from the no-attack null
/// distribution; the default 5 keeps the false-abort probability below
/// 1e-6 per session at a test size of 1e4.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionPolicy {
    pub sigma: f64,
}

impl Default for DetectionPolicy {
    fn default() -> Self {
        DetectionPolicy { sigma: 5.0 }
    }
}

/// Accept region for the two test statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionThresholds {
    /// Abort if the fraction of `|I_Ak - I_Bk| > Is` exceeds this.
    pub max_exceedance: f64,
    /// Abort if the deviation-pattern correlation falls below this.
    pub min_correlation: f64,
}

impl DetectionPolicy {
    /// Thresholds for a test of `test_size` points against a null with
    /// the given deviation-pattern correlation.
    ///
    /// The null exceedance fraction is universal: `Is` is the standard
    /// deviation of the difference stream, so `P(|diff| > Is) =
    /// 2 (1 - Phi(1))` regardless of calibration. The correlation bound
    /// uses the Fisher transform. Test sizes below 4 clamp to thresholds
    /// that cannot reject.
    pub fn thresholds(&self, null_correlation: f64, test_size: usize) -> DetectionThresholds {
        let p0 = 2.0 * (1.0 - stats::normal_cdf(1.0));
        let m = test_size.max(1) as f64;
        let max_exceedance =
            (p0 + self.sigma * libm::sqrt(p0 * (1.0 - p0) / m)).min(1.0);

        let rho = null_correlation.clamp(-0.999_999_999, 0.999_999_999);
        let m_fisher = (test_size.max(4) - 3) as f64;
        let min_correlation =
            libm::tanh(libm::atanh(rho) - self.sigma / libm::sqrt(m_fisher));
        DetectionThresholds {
            max_exceedance,
            min_correlation,
        }
    }
}

/// Result of the eavesdropping test on a disclosed subset.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionReport {
    /// Disclosed indices, ascending. Excluded from key material.
    pub test_indices: Vec<usize>,
    /// Fraction of test points with `|I_Ak - I_Bk| > Is`.
    pub exceedance: f64,
    /// Sample correlation between the parties' disclosed deviations.
    pub correlation: f64,
    pub thresholds: DetectionThresholds,
    pub accept: bool,
}

/// Pick the disclosed test subset: `floor(test_fraction * n)` distinct
/// indices, ascending.
pub fn pick_test_indices(n: usize, test_fraction: f64, seed: u64) -> Result<Vec<usize>> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidParameter {
            field: "test_fraction",
            reason: "must lie strictly between 0 and 1",
        });
    }
    let m = libm::floor(test_fraction * n as f64) as usize;
    if m == 0 {
        return Err(Error::EmptyTestSet);
    }
    let mut rng = rng::seeded(seed);
    let mut indices = rand::seq::index::sample(&mut rng, n, m).into_vec();
    indices.sort_unstable();
    Ok(indices)
}

/// Evaluate the two detection statistics; this is Bob's side, so it sees
/// only his own stream plus what Alice put on the classical channel:
/// the disclosed `(index, deviation)` pairs.
///
/// The null correlation is estimated from the disclosed deviations of
/// the never-attacked idler: `rho0 = 1 - Is^2 / (2 Var(I_A))`.
pub fn evaluate_test_set(
    disclosed: &[(usize, f64)],
    bob: &SampleStream,
    cal: &Calibration,
    policy: &DetectionPolicy,
) -> Result<DetectionReport> {
    if disclosed.is_empty() {
        return Err(Error::EmptyTestSet);
    }
    if let Some(&(max_index, _)) = disclosed.iter().max_by_key(|(i, _)| *i) {
        if max_index >= bob.len() {
            return Err(Error::LengthMismatch {
                left: max_index + 1,
                right: bob.len(),
            });
        }
    }

    let dev_a: Vec<f64> = disclosed.iter().map(|(_, d)| *d).collect();
    let alice_var = stats::variance(&dev_a);
    let null_correlation = if alice_var > 0.0 {
        1.0 - cal.is_mv * cal.is_mv / (2.0 * alice_var)
    } else {
        0.0
    };
    let thresholds = policy.thresholds(null_correlation, disclosed.len());

    let mut exceeded = 0usize;
    let mut dev_b = Vec::with_capacity(disclosed.len());
    for &(i, dev) in disclosed {
        let b_dev = bob.samples_mv[i] - cal.i0_mv;
        if libm::fabs(dev - b_dev) > cal.is_mv {
            exceeded += 1;
        }
        dev_b.push(b_dev);
    }
    let exceedance = exceeded as f64 / disclosed.len() as f64;
    let correlation = stats::correlation(&dev_a, &dev_b);
    let accept =
        exceedance <= thresholds.max_exceedance && correlation >= thresholds.min_correlation;
    Ok(DetectionReport {
        test_indices: disclosed.iter().map(|(i, _)| *i).collect(),
        exceedance,
        correlation,
        thresholds,
        accept,
    })
}

/// Alice's side of the test: her deviations at the chosen indices, as
/// they go out on the classical channel.
pub fn disclose_test_points(
    alice: &SampleStream,
    cal: &Calibration,
    indices: &[usize],
) -> Vec<(usize, f64)> {
    indices
        .iter()
        .map(|&i| (i, alice.samples_mv[i] - cal.i0_mv))
        .collect()
}

/// Full eavesdropping test: pick a random subset, disclose Alice's
/// values, evaluate on Bob's side.
pub fn eve_test(
    alice: &SampleStream,
    bob: &SampleStream,
    cal: &Calibration,
    test_fraction: f64,
    policy: &DetectionPolicy,
    seed: u64,
) -> Result<DetectionReport> {
    if alice.len() != bob.len() {
        return Err(Error::LengthMismatch {
            left: alice.len(),
            right: bob.len(),
        });
    }
    let indices = pick_test_indices(alice.len(), test_fraction, seed)?;
    let disclosed = disclose_test_points(alice, cal, &indices);
    evaluate_test_set(&disclosed, bob, cal, policy)
}

/// What the signal beam passes through on its way to Bob.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelModel {
    /// Lossy channel, possibly with a beam-splitter tap.
    Tap(ChannelParams),
    /// Eve measures the signal and resends a fresh coherent beam.
    InterceptResend,
}

/// Knobs for one protocol session.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SessionConfig {
    /// Synchronized measurement points per party.
    pub n_samples: usize,
    /// Samples for the pre-communication calibration run.
    pub calibration_samples: usize,
    /// Fraction of measured indices disclosed for the eavesdropping test.
    pub test_fraction: f64,
    pub detection: DetectionPolicy,
}

/// Summary numbers from one session.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SessionStats {
    pub n_samples: usize,
    /// Disclosed test points.
    pub test_size: usize,
    /// Fraction of Alice's samples inside the sifting threshold.
    pub drop_fraction: f64,
    /// Actual disclosed fraction, `test_size / n_samples`.
    pub test_fraction: f64,
    pub exceedance: f64,
    pub correlation: f64,
    pub thresholds: DetectionThresholds,
    pub accepted: bool,
    /// Bits Bob decoded (0 on abort).
    pub key_bits: usize,
    /// Decoded bits differing from Alice's intended key.
    pub bit_errors: usize,
    pub raw_rate_bps: f64,
    pub effective_rate_bps: f64,
}

/// Everything a finished session produces.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionOutcome {
    /// Bob's decoded key; empty when the session aborted.
    pub key: Vec<bool>,
    pub transcript: Transcript,
    pub stats: SessionStats,
}

/// Deterministic random key material for simulations.
pub fn random_key(bits: usize, seed: u64) -> Vec<bool> {
    use rand::Rng;
    let mut rng = rng::seeded(seed);
    (0..bits).map(|_| rng.random::<bool>()).collect()
}

/// The calibration a session with this seed would broadcast.
pub fn session_calibration(
    params: &SourceParams,
    config: &SessionConfig,
    seed: u64,
) -> Result<Calibration> {
    calibrate(
        params,
        config.calibration_samples,
        rng::derive(seed, SEED_CALIBRATION),
    )
}

/// Run the complete two-party session.
///
/// Calibrate and broadcast; generate the twin beams; send the signal
/// through the channel; both parties sift locally; Alice discloses a
/// random test subset; Bob evaluates it and aborts on disagreement
/// (empty key, verdict final). On acceptance Bob announces his drop
/// positions, Alice announces `R`/`W`/`D` against the key, Bob decodes
/// and confirms. Deterministic in `seed`.
pub fn run_session(
    params: &SourceParams,
    channel: &ChannelModel,
    key: &[bool],
    config: &SessionConfig,
    seed: u64,
) -> Result<SessionOutcome> {
    params.validate()?;

    let mut transcript = Transcript::new();
    let cal = session_calibration(params, config, seed)?;
    cal.validate(params)?;
    transcript.push(Sender::Alice, Message::Calibration(cal))?;

    let n = config.n_samples;
    let (idler, signal) = generate_joint(params, n, rng::derive(seed, SEED_GENERATION))?;
    let channel_seed = rng::derive(seed, SEED_CHANNEL);
    let bob_stream = match channel {
        ChannelModel::Tap(chan) => transmit(&signal, params, chan, channel_seed)?,
        ChannelModel::InterceptResend => intercept_resend(&signal, params, channel_seed)?,
    };

    let alice_records = sift(&idler, &cal);
    let bob_records = sift(&bob_stream, &cal);
    let drop_fraction = if n == 0 {
        0.0
    } else {
        alice_records
            .iter()
            .filter(|r| r.verdict.is_dropped())
            .count() as f64
            / n as f64
    };

    let test_indices =
        pick_test_indices(n, config.test_fraction, rng::derive(seed, SEED_TEST_SET))?;
    let disclosed = disclose_test_points(&idler, &cal, &test_indices);
    let disclosed_devs: Vec<f64> = disclosed.iter().map(|(_, d)| *d).collect();
    transcript.push(
        Sender::Alice,
        Message::TestDisclosure {
            noise_level_mv: stats::std_dev(&disclosed_devs),
            points: disclosed.clone(),
        },
    )?;

    // Bob's decision uses only his own stream and the disclosed points.
    let report = evaluate_test_set(&disclosed, &bob_stream, &cal, &config.detection)?;
    let test_fraction_actual = test_indices.len() as f64 / n as f64;
    let throughput = analysis::throughput_report(
        drop_fraction,
        test_fraction_actual,
        params.sample_interval_s,
    );
    let mut stats_out = SessionStats {
        n_samples: n,
        test_size: test_indices.len(),
        drop_fraction,
        test_fraction: test_fraction_actual,
        exceedance: report.exceedance,
        correlation: report.correlation,
        thresholds: report.thresholds,
        accepted: report.accept,
        key_bits: 0,
        bit_errors: 0,
        raw_rate_bps: throughput.raw_rate_bps,
        effective_rate_bps: throughput.effective_rate_bps,
    };

    if !report.accept {
        transcript.push(Sender::Bob, Message::Verdict(SessionVerdict::Abort))?;
        return Ok(SessionOutcome {
            key: Vec::new(),
            transcript,
            stats: stats_out,
        });
    }

    // Bob discloses where he dropped (positions only) so Alice will not
    // assign key bits to indices he cannot read.
    let mut excluded = vec![false; n];
    for &i in &test_indices {
        excluded[i] = true;
    }
    let bob_drops: Vec<usize> = bob_records
        .iter()
        .filter(|r| r.verdict.is_dropped() && !excluded[r.k])
        .map(|r| r.k)
        .collect();
    transcript.push(
        Sender::Bob,
        Message::DropAnnouncement {
            indices: bob_drops.clone(),
        },
    )?;
    for &i in &bob_drops {
        excluded[i] = true;
    }

    let announcement = encode_with_exclusions(&alice_records, Some(&excluded), key)?;
    transcript.push(Sender::Alice, Message::Announcement(announcement.clone()))?;

    let decoded = decode_key(&bob_records, &announcement)?;
    transcript.push(Sender::Bob, Message::Verdict(SessionVerdict::Accept))?;

    stats_out.key_bits = decoded.len();
    stats_out.bit_errors = decoded
        .iter()
        .zip(key)
        .filter(|(got, want)| got != want)
        .count();

    Ok(SessionOutcome {
        key: decoded,
        transcript,
        stats: stats_out,
    })
}
