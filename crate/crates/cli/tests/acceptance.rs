//! Acceptance suite: the eight checks that gate a release.
//!
//! Each test prints one `PASS`/`FAIL` line (visible with
//! `cargo test -p twinqkd-cli --test acceptance -- --nocapture`) and
//! asserts the stated tolerance. Monte Carlo checks use fixed seeds and
//! tolerances of at least five standard errors, so they are
//! deterministic.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use twinqkd::analysis::{
    estimate_difference_noise, throughput_report, to_db, SnlReference,
    REFERENCE_QUOTED_RATE_BPS,
};
use twinqkd::channel::{transmit, ChannelParams};
use twinqkd::protocol::{
    calibrate, decode_key, encode_announcement, random_key, run_session, sift, ChannelModel,
    DetectionPolicy, SessionConfig, SiftVerdict, Symbol,
};
use twinqkd::source::{difference_noise_at, generate_joint, SourceParams};

/// Sign-disagreement probability given both parties retain a sample,
/// predicted by the bivariate Gaussian model at the reference
/// calibration (validated against quadrature in the core test suite).
const EPS_PRED: f64 = 0.007_994_199_307_838_8;

fn check(criterion: &str, pass: bool, detail: &str) {
    println!(
        "{} {criterion}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "{criterion}: {detail}");
}

/// 1. Difference-noise reproduction: Monte Carlo estimate at the
///    calibrated source equals -5.0 dB within 0.3 dB at n = 1e6, in
///    under 10 seconds.
#[test]
fn acceptance_1_difference_noise_reproduction() {
    let start = Instant::now();
    let p = SourceParams::reference();
    let (a, b) = generate_joint(&p, 1_000_000, 20_241).unwrap();
    let report = estimate_difference_noise(&a, &b, SnlReference::Analytic).unwrap();
    let elapsed = start.elapsed();

    let pass = (report.s_db + 5.0).abs() <= 0.3 && elapsed.as_secs_f64() < 10.0;
    check(
        "criterion 1 (difference-noise reproduction)",
        pass,
        &format!(
            "measured {:.3} dB vs -5.0 +/- 0.3 dB at n=1e6 in {:.2} s",
            report.s_db,
            elapsed.as_secs_f64()
        ),
    );
}

/// 2. Drop fraction: the calibrated excess factor puts 40% +/- 2% of
///    per-beam deviations inside the sifting threshold at n = 1e6.
#[test]
fn acceptance_2_drop_fraction() {
    let p = SourceParams::reference();
    let cal = calibrate(&p, 200_000, 30_241).unwrap();
    let (a, _) = generate_joint(&p, 1_000_000, 30_242).unwrap();
    let dropped = a.deviations().filter(|d| d.abs() <= cal.is_mv).count() as f64 / 1e6;

    let pass = (dropped - 0.40).abs() <= 0.02;
    check(
        "criterion 2 (drop fraction)",
        pass,
        &format!("dropped {dropped:.4} vs 0.40 +/- 0.02 at n=1e6"),
    );
}

/// 3. Worked-example fidelity: outcomes 1,1,D,0,1,1,D,0,0,0,1 with key
///    100100010 encode to RWDRRWDRRWW and decode back exactly.
#[test]
fn acceptance_3_worked_example() {
    let p = SourceParams::reference();
    let cal = twinqkd::protocol::Calibration {
        i0_mv: 60.0,
        is_mv: 1.8,
        window_s: 2e-3,
    };
    // Deviations +3.5 (bit 1), -3.0 (bit 0), +0.9 (dropped).
    let samples = [
        63.5, 63.5, 60.9, 57.0, 63.5, 63.5, 60.9, 57.0, 57.0, 57.0, 63.5,
    ];
    let stream = twinqkd::source::SampleStream {
        samples_mv: samples.to_vec(),
        t0_s: 0.0,
        normalization: twinqkd::source::Normalization {
            shot_noise_std_mv: p.shot_noise_std_mv,
            mean_current_mv: p.mean_current_mv,
        },
    };
    let records = sift(&stream, &cal);
    let outcomes: String = records
        .iter()
        .map(|r| match r.verdict {
            SiftVerdict::Bit(true) => '1',
            SiftVerdict::Bit(false) => '0',
            SiftVerdict::Dropped => 'D',
        })
        .collect();

    let key: Vec<bool> = "100100010".chars().map(|c| c == '1').collect();
    let ann = encode_announcement(&records, &key).unwrap();
    let rendered: String = ann
        .symbols
        .iter()
        .map(|s| match s {
            Symbol::R => 'R',
            Symbol::W => 'W',
            Symbol::D => 'D',
        })
        .collect();
    let decoded = decode_key(&records, &ann).unwrap();
    let decoded_str: String = decoded.iter().map(|b| if *b { '1' } else { '0' }).collect();

    let pass = outcomes == "11D011D0001" && rendered == "RWDRRWDRRWW" && decoded_str == "100100010";
    check(
        "criterion 3 (worked-example fidelity)",
        pass,
        &format!("outcomes {outcomes}, announcement {rendered}, decoded {decoded_str}"),
    );
}

/// 4. Attack signature: for tap fractions 0.1, 0.2, 0.5 the measured
///    post-attack noise matches the spectrum formula at the reduced
///    efficiency within 0.3 dB at n = 1e6 per point.
#[test]
fn acceptance_4_attack_signature() {
    let p = SourceParams::reference();
    let mut detail = String::new();
    let mut pass = true;
    for (i, &tap) in [0.1, 0.2, 0.5].iter().enumerate() {
        let (idler, signal) = generate_joint(&p, 1_000_000, 40_241 + i as u64).unwrap();
        let chan = ChannelParams::with_tap(&p, tap).unwrap();
        let received = transmit(&signal, &p, &chan, 40_341 + i as u64).unwrap();
        let report = estimate_difference_noise(&idler, &received, SnlReference::Analytic).unwrap();
        let expected = to_db(difference_noise_at(&p, p.eta0 * (1.0 - tap)));
        pass &= (report.s_db - expected).abs() <= 0.3;
        detail.push_str(&format!(
            "f={tap}: {:.3} dB (formula {expected:.3}); ",
            report.s_db
        ));
    }
    check("criterion 4 (attack noise signature)", pass, detail.trim_end());
}

fn detection_sessions(channel: ChannelModel, base_seed: u64) -> usize {
    let p = SourceParams::reference();
    // 25_000 samples at test fraction 0.4 -> disclosed test size 10_000.
    let cfg = SessionConfig {
        n_samples: 25_000,
        calibration_samples: 20_000,
        test_fraction: 0.4,
        detection: DetectionPolicy::default(),
    };
    let mut aborts = 0;
    for i in 0..200u64 {
        let seed = base_seed + i;
        let key = random_key(3_000, seed ^ 0x5eed);
        let out = run_session(&p, &channel, &key, &cfg, seed).unwrap();
        if !out.stats.accepted {
            aborts += 1;
        }
    }
    aborts
}

/// 5. Detection power at test size 1e4 over 200 sessions:
///    intercept-resend caught with probability >= 0.99, a 20% tap with
///    probability >= 0.95, and no false aborts without an attack (the
///    5-sigma thresholds give < 1e-6 false-abort probability per
///    session).
#[test]
fn acceptance_5_detection_power() {
    let p = SourceParams::reference();
    let ir_aborts = detection_sessions(ChannelModel::InterceptResend, 50_000);
    let tap = ChannelParams::with_tap(&p, 0.2).unwrap();
    let tap_aborts = detection_sessions(ChannelModel::Tap(tap), 51_000);
    let null_aborts = detection_sessions(ChannelModel::Tap(ChannelParams::lossless(&p)), 52_000);

    let pass = ir_aborts >= 198 && tap_aborts >= 190 && null_aborts == 0;
    check(
        "criterion 5 (detection power)",
        pass,
        &format!(
            "intercept-resend {ir_aborts}/200 (need >= 198), 20% tap {tap_aborts}/200 \
             (need >= 190), false aborts {null_aborts}/200 (bound < 1e-6/session)"
        ),
    );
}

/// 6. End-to-end key integrity: an undisturbed 1e5-sample session
///    decodes the intended key with per-bit error within the
///    Gaussian-model bound; predicted and observed are both reported.
#[test]
fn acceptance_6_key_integrity() {
    let p = SourceParams::reference();
    let cfg = SessionConfig {
        n_samples: 100_000,
        calibration_samples: 100_000,
        test_fraction: 0.1,
        detection: DetectionPolicy::default(),
    };
    let key = random_key(38_000, 60_241);
    let out = run_session(
        &p,
        &ChannelModel::Tap(ChannelParams::lossless(&p)),
        &key,
        &cfg,
        60_242,
    )
    .unwrap();

    let observed = out.stats.bit_errors as f64 / key.len() as f64;
    let eps_max = EPS_PRED + 5.0 * (EPS_PRED * (1.0 - EPS_PRED) / key.len() as f64).sqrt();
    let pass = out.stats.accepted && out.key.len() == key.len() && observed <= eps_max;
    check(
        "criterion 6 (end-to-end key integrity)",
        pass,
        &format!(
            "predicted per-bit error {EPS_PRED:.6}, observed {observed:.6}, \
             bound {eps_max:.6} over {} bits",
            key.len()
        ),
    );
}

/// 7. Throughput accounting: a 20 ns sampling interval parsed from the
///    config reproduces the raw rate of 5e7 samples/s exactly; the
///    effective rate at the calibrated 40% drop is 3e7 bits/s, reported
///    alongside the quoted reference figure of 2e7 bits/s.
#[test]
fn acceptance_7_throughput() {
    // Through the config parser, as a user would set it.
    let scenario =
        twinqkd_cli::config::Scenario::parse("source.sample_interval = 20ns\n").unwrap();
    let dt = scenario.source.sample_interval_s;

    let report = throughput_report(0.4, 0.0, dt);
    let raw_exact = report.raw_rate_bps == 5e7;
    let effective_ok = (report.effective_rate_bps - 3e7).abs() < 1e-6;
    let pass = raw_exact && effective_ok;
    check(
        "criterion 7 (throughput accounting)",
        pass,
        &format!(
            "raw {} samples/s (exact: {raw_exact}), effective {} bit/s at 40% drop; \
             quoted reference rate {} bit/s carries an unexplained extra loss factor",
            report.raw_rate_bps, report.effective_rate_bps, REFERENCE_QUOTED_RATE_BPS
        ),
    );
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_twinqkd"))
}

fn reference_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/reference.cfg")
}

/// 8. Determinism: every command repeated with identical config and
///    seed yields byte-identical transcript and CSV outputs.
#[test]
fn acceptance_8_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let config = reference_config();
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");

    for out in [&out_a, &out_b] {
        let status = bin()
            .args(["run", config.to_str().unwrap(), "--out", out.to_str().unwrap()])
            .output()
            .unwrap();
        assert_eq!(status.status.code(), Some(0));
        let status = bin()
            .args([
                "sweep",
                config.to_str().unwrap(),
                "--sessions",
                "5",
                "--out",
                out.to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert_eq!(status.status.code(), Some(0));
    }

    let mut pass = true;
    let mut detail = String::new();
    for name in [
        "transcript.log",
        "stats.csv",
        "key_intended.txt",
        "key_decoded.txt",
        "sweep.csv",
    ] {
        let a = std::fs::read(out_a.join(name)).unwrap();
        let b = std::fs::read(out_b.join(name)).unwrap();
        let same = a == b;
        pass &= same;
        detail.push_str(&format!("{name}: {}; ", if same { "identical" } else { "DIFFERS" }));
    }

    let cal_a = bin().args(["calibrate", config.to_str().unwrap()]).output().unwrap();
    let cal_b = bin().args(["calibrate", config.to_str().unwrap()]).output().unwrap();
    let cal_same = cal_a.stdout == cal_b.stdout;
    pass &= cal_same;
    detail.push_str(&format!(
        "calibrate stdout: {}",
        if cal_same { "identical" } else { "DIFFERS" }
    ));

    check("criterion 8 (determinism)", pass, &detail);
}
