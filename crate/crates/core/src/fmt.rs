//! Numeric formatting for the wire and file formats.
//!
//! Transcript lines and CSV tables print floats in plain decimal with six
//! significant digits, so byte-identical output is reproducible from the
//! same seed on any platform.

use alloc::string::String;
use alloc::format;

/// Number of significant digits used by all serialized output.
pub const SIG_DIGITS: i32 = 6;

/// Format `x` in plain decimal with [`SIG_DIGITS`] significant digits.
///
/// Values with magnitude >= 10^6 round to an integer string; zero prints
/// as `0.00000`.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return format!("{:.*}", (SIG_DIGITS - 1) as usize, 0.0);
    }
    if x.is_nan() {
        return String::from("nan");
    }
    if x.is_infinite() {
        return String::from(if x > 0.0 { "inf" } else { "-inf" });
    }
    let exponent = libm::floor(libm::log10(libm::fabs(x))) as i32;
    let decimals = (SIG_DIGITS - 1 - exponent).max(0) as usize;
    format!("{x:.decimals$}")
}
