//! Independent statistical oracle for the integration tests.
//!
//! Everything here is computed from the bivariate Gaussian model with
//! `statrs` distribution functions and plain quadrature; none of it
//! touches the crate's own samplers or estimators, so Monte Carlo
//! results can be checked against closed-form expectations.

#![allow(dead_code)]

use statrs::distribution::{ContinuousCDF, Normal};

/// Frozen reference calibration, duplicated from the library defaults so
/// a drift in either place fails loudly.
pub const XI: f64 = 0.9;
pub const ETA0: f64 = 0.765_132_578_6;
pub const OMEGA: f64 = 0.084_194_683_12;
pub const EXCESS_FACTOR: f64 = 2.299_872_606;
pub const SHOT_NOISE_STD_MV: f64 = 2.263_380_173;
pub const MEAN_CURRENT_MV: f64 = 60.0;

/// Difference noise of the unattacked reference source: 10^(-0.5).
pub const S0: f64 = 0.316_227_766_036_050_1;

/// Deviation-pattern correlation of the reference source, 1 - S0/G.
pub const RHO0: f64 = 0.862_502_051_108_803_8;

/// Sign-disagreement probability given both parties retain a sample,
/// for the reference source (no attack).
pub const EPS_PRED: f64 = 0.007_994_199_307_838_8;

/// Probability that both parties retain a sample (reference source).
pub const P_BOTH_RETAIN: f64 = 0.456_940_879_755_682_9;

/// Null exceedance fraction 2 (1 - Phi(1)), universal.
pub const P0_EXCEEDANCE: f64 = 0.317_310_507_862_914_15;

pub fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).unwrap()
}

pub fn phi(x: f64) -> f64 {
    std_normal().cdf(x)
}

pub fn phi_inv(p: f64) -> f64 {
    std_normal().inverse_cdf(p)
}

fn pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * core::f64::consts::PI).sqrt()
}

/// Difference noise at efficiency `eta` for the reference source.
pub fn s_at_eta(eta: f64) -> f64 {
    1.0 - XI * eta / (1.0 + OMEGA * OMEGA)
}

/// Difference noise after a tap attack of fraction `f`.
pub fn s_after_tap(f: f64) -> f64 {
    s_at_eta(ETA0 * (1.0 - f))
}

/// The per-beam sifting threshold in per-beam standard deviations:
/// both beams keep a sample when `|x| > sqrt(2 S / G)`.
pub fn normalized_threshold() -> f64 {
    (2.0 * S0 / EXCESS_FACTOR).sqrt()
}

/// Simpson integration on a uniform grid.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let n = intervals + intervals % 2; // force even
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 0 { 2.0 } else { 4.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// P(X > c, Y > c) for standard bivariate normal with correlation `rho`.
pub fn bvn_both_above(c: f64, rho: f64) -> f64 {
    let s = (1.0 - rho * rho).sqrt();
    simpson(
        |x| pdf(x) * (1.0 - phi((c - rho * x) / s)),
        c,
        c + 12.0,
        4000,
    )
}

/// P(X > c, Y < -c) for standard bivariate normal with correlation `rho`.
pub fn bvn_opposite(c: f64, rho: f64) -> f64 {
    let s = (1.0 - rho * rho).sqrt();
    simpson(
        |x| pdf(x) * phi((-c - rho * x) / s),
        c,
        c + 12.0,
        4000,
    )
}

/// P(sign(X) != sign(Y) | |X| > c, |Y| > c) for correlation `rho`.
pub fn sign_error_given_both_exceed(c: f64, rho: f64) -> f64 {
    let agree = bvn_both_above(c, rho);
    let disagree = bvn_opposite(c, rho);
    disagree / (agree + disagree)
}

/// P(both parties retain a sample), i.e. P(|X| > c, |Y| > c).
pub fn both_retain_probability(c: f64, rho: f64) -> f64 {
    2.0 * (bvn_both_above(c, rho) + bvn_opposite(c, rho))
}

/// Expected exceedance fraction of `|I_A - I_B| > Is` when the true
/// difference noise is `s_attacked` but `Is` was calibrated at `s0`.
pub fn exceedance_under_attack(s0: f64, s_attacked: f64) -> f64 {
    2.0 * (1.0 - phi((s0 / s_attacked).sqrt()))
}

/// Deviation-pattern correlation after a tap attack of fraction `f`.
pub fn correlation_after_tap(f: f64) -> f64 {
    let sp = s_after_tap(f);
    let g = EXCESS_FACTOR;
    (g - S0) / (g * (g + 2.0 * (sp - S0))).sqrt()
}

/// Oracle self-check, called from the test binaries that rely on the
/// frozen constants.
pub fn check_frozen_constants() {
    // S0 comes from the spectrum formula at the frozen calibration.
    assert!((s_at_eta(ETA0) - S0).abs() < 1e-12);
    // ... and sits at -5.0 dB.
    assert!((10.0 * S0.log10() + 5.0).abs() < 1e-9);

    // G makes 40% of per-beam deviations fall inside the threshold:
    // G = 2 S0 / qnorm(0.70)^2.
    let q = phi_inv(0.70);
    assert!((2.0 * S0 / (q * q) - EXCESS_FACTOR).abs() < 1e-9);

    // The threshold in per-beam sigma is that same quantile.
    assert!((normalized_threshold() - q).abs() < 1e-9);

    // Is = 1.8 mV pins the shot-noise scale.
    assert!((SHOT_NOISE_STD_MV * (2.0 * S0).sqrt() - 1.8).abs() < 1e-8);

    // Correlation of the deviation pattern.
    assert!((1.0 - S0 / EXCESS_FACTOR - RHO0).abs() < 1e-12);

    // Null exceedance is parameter-free. (statrs' erf is good to ~1e-10.)
    assert!((2.0 * (1.0 - phi(1.0)) - P0_EXCEEDANCE).abs() < 1e-9);

    // Quadrature reproduces the frozen sign-error and retention numbers.
    let c = normalized_threshold();
    assert!((sign_error_given_both_exceed(c, RHO0) - EPS_PRED).abs() < 1e-8);
    assert!((both_retain_probability(c, RHO0) - P_BOTH_RETAIN).abs() < 1e-8);
}
