//! Ordered log of all classical-channel messages, and its line format.
//!
//! One message per line:
//!
//! ```text
//! seq_no<TAB>sender<TAB>msg_type<TAB>payload
//! ```
//!
//! Payload fields are comma-separated; floats print in plain decimal
//! with six significant digits. Lines starting with `#` are comments and
//! are skipped on parse. The calibration broadcast opens every
//! transcript; a verdict, when present, closes it.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fmt::sig6;
use crate::protocol::{Announcement, Calibration, Symbol};

/// Which party put the message on the classical channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sender {
    Alice,
    Bob,
}

impl Sender {
    fn as_str(&self) -> &'static str {
        match self {
            Sender::Alice => "alice",
            Sender::Bob => "bob",
        }
    }
}

/// Final session verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SessionVerdict {
    Accept,
    Abort,
}

/// A classical-channel message.
#[derive(Debug, Clone, PartialEq)]
pub enum Message {
    /// Alice's broadcast of the reference values.
    Calibration(Calibration),
    /// Alice's disclosed test subset: deviations at the chosen indices
    /// plus their measured noise level (standard deviation, mV).
    TestDisclosure {
        noise_level_mv: f64,
        points: Vec<(usize, f64)>,
    },
    /// Bob's dropped positions (positions only, never values).
    DropAnnouncement { indices: Vec<usize> },
    /// Alice's per-index R/W/D declaration.
    Announcement(Announcement),
    /// Bob's final accept/abort decision.
    Verdict(SessionVerdict),
}

impl Message {
    fn type_str(&self) -> &'static str {
        match self {
            Message::Calibration(_) => "calibration",
            Message::TestDisclosure { .. } => "test_disclosure",
            Message::DropAnnouncement { .. } => "drop_announcement",
            Message::Announcement(_) => "announcement",
            Message::Verdict(_) => "verdict",
        }
    }

    fn payload(&self) -> String {
        match self {
            Message::Calibration(cal) => format!(
                "{},{},{}",
                sig6(cal.i0_mv),
                sig6(cal.is_mv),
                sig6(cal.window_s)
            ),
            Message::TestDisclosure {
                noise_level_mv,
                points,
            } => {
                let mut out = format!("{},{}", sig6(*noise_level_mv), points.len());
                for (k, dev) in points {
                    out.push(',');
                    out.push_str(&format!("{k}:{}", sig6(*dev)));
                }
                out
            }
            Message::DropAnnouncement { indices } => {
                let mut out = indices.len().to_string();
                for k in indices {
                    out.push(',');
                    out.push_str(&k.to_string());
                }
                out
            }
            Message::Announcement(ann) => ann
                .symbols
                .iter()
                .map(|s| match s {
                    Symbol::R => 'R',
                    Symbol::W => 'W',
                    Symbol::D => 'D',
                })
                .collect(),
            Message::Verdict(v) => match v {
                SessionVerdict::Accept => "accept",
                SessionVerdict::Abort => "abort",
            }
            .to_string(),
        }
    }
}

/// One transcript record.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub seq: usize,
    pub sender: Sender,
    pub message: Message,
}

/// Append-only ordered message log.
///
/// `push` enforces the ordering invariants: the calibration broadcast
/// comes first and only first, and nothing follows a verdict.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Transcript {
    entries: Vec<Entry>,
}

impl Transcript {
    pub fn new() -> Self {
        Transcript::default()
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The verdict, if the session has concluded.
    pub fn verdict(&self) -> Option<SessionVerdict> {
        match self.entries.last() {
            Some(Entry {
                message: Message::Verdict(v),
                ..
            }) => Some(*v),
            _ => None,
        }
    }

    /// Append a message, enforcing ordering.
    pub fn push(&mut self, sender: Sender, message: Message) -> Result<()> {
        if self.verdict().is_some() {
            return Err(Error::TranscriptOrder("no messages may follow the verdict"));
        }
        match (&message, self.entries.is_empty()) {
            (Message::Calibration(_), false) => {
                return Err(Error::TranscriptOrder(
                    "calibration broadcast must be the first message",
                ))
            }
            (m, true) if !matches!(m, Message::Calibration(_)) => {
                return Err(Error::TranscriptOrder(
                    "transcript must open with the calibration broadcast",
                ))
            }
            _ => {}
        }
        let seq = self.entries.len();
        self.entries.push(Entry {
            seq,
            sender,
            message,
        });
        Ok(())
    }

    /// Check all structural invariants on an assembled transcript.
    pub fn validate(&self) -> Result<()> {
        for (i, entry) in self.entries.iter().enumerate() {
            if entry.seq != i {
                return Err(Error::TranscriptOrder("sequence numbers must be contiguous"));
            }
            match &entry.message {
                Message::Calibration(_) if i != 0 => {
                    return Err(Error::TranscriptOrder(
                        "calibration broadcast must be the first message",
                    ))
                }
                Message::Verdict(_) if i + 1 != self.entries.len() => {
                    return Err(Error::TranscriptOrder("the verdict must be final"))
                }
                _ => {}
            }
        }
        if let Some(first) = self.entries.first() {
            if !matches!(first.message, Message::Calibration(_)) {
                return Err(Error::TranscriptOrder(
                    "transcript must open with the calibration broadcast",
                ));
            }
        }
        Ok(())
    }

    /// Serialize to the line format.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for entry in &self.entries {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\n",
                entry.seq,
                entry.sender.as_str(),
                entry.message.type_str(),
                entry.message.payload()
            ));
        }
        out
    }

    /// Parse the line format back into a transcript.
    ///
    /// Comment lines (`#`) and blank lines are skipped; ordering
    /// invariants are re-enforced during reconstruction.
    pub fn parse(text: &str) -> Result<Transcript> {
        let mut transcript = Transcript::new();
        let mut expected_seq = 0usize;
        for (line_idx, line) in text.lines().enumerate() {
            let line_no = line_idx + 1;
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let malformed = |reason: String| Error::MalformedTranscript {
                line: line_no,
                reason,
            };

            let fields: Vec<&str> = line.splitn(4, '\t').collect();
            if fields.len() != 4 {
                return Err(malformed("expected 4 tab-separated fields".into()));
            }
            let seq: usize = fields[0]
                .parse()
                .map_err(|_| malformed(format!("bad sequence number `{}`", fields[0])))?;
            if seq != expected_seq {
                return Err(malformed(format!(
                    "expected sequence number {expected_seq}, got {seq}"
                )));
            }
            expected_seq += 1;

            let sender = match fields[1] {
                "alice" => Sender::Alice,
                "bob" => Sender::Bob,
                other => return Err(malformed(format!("unknown sender `{other}`"))),
            };
            let message = parse_message(fields[2], fields[3]).map_err(&malformed)?;
            transcript
                .push(sender, message)
                .map_err(|e| malformed(e.to_string()))?;
        }
        Ok(transcript)
    }
}

fn parse_f64(s: &str) -> core::result::Result<f64, String> {
    s.parse::<f64>().map_err(|_| format!("bad number `{s}`"))
}

fn parse_usize(s: &str) -> core::result::Result<usize, String> {
    s.parse::<usize>().map_err(|_| format!("bad count `{s}`"))
}

fn parse_message(msg_type: &str, payload: &str) -> core::result::Result<Message, String> {
    match msg_type {
        "calibration" => {
            let parts: Vec<&str> = payload.split(',').collect();
            if parts.len() != 3 {
                return Err("calibration payload needs 3 fields".into());
            }
            Ok(Message::Calibration(Calibration {
                i0_mv: parse_f64(parts[0])?,
                is_mv: parse_f64(parts[1])?,
                window_s: parse_f64(parts[2])?,
            }))
        }
        "test_disclosure" => {
            let mut parts = payload.split(',');
            let noise = parse_f64(parts.next().ok_or("missing noise level")?)?;
            let count = parse_usize(parts.next().ok_or("missing point count")?)?;
            let mut points = Vec::with_capacity(count);
            for _ in 0..count {
                let pair = parts.next().ok_or("fewer points than declared")?;
                let (k, dev) = pair
                    .split_once(':')
                    .ok_or_else(|| format!("bad point `{pair}`"))?;
                points.push((parse_usize(k)?, parse_f64(dev)?));
            }
            if parts.next().is_some() {
                return Err("more points than declared".into());
            }
            Ok(Message::TestDisclosure {
                noise_level_mv: noise,
                points,
            })
        }
        "drop_announcement" => {
            let mut parts = payload.split(',');
            let count = parse_usize(parts.next().ok_or("missing count")?)?;
            let mut indices = Vec::with_capacity(count);
            for _ in 0..count {
                indices.push(parse_usize(parts.next().ok_or("fewer indices than declared")?)?);
            }
            if parts.next().is_some() {
                return Err("more indices than declared".into());
            }
            Ok(Message::DropAnnouncement { indices })
        }
        "announcement" => {
            let symbols = payload
                .chars()
                .map(|c| match c {
                    'R' => Ok(Symbol::R),
                    'W' => Ok(Symbol::W),
                    'D' => Ok(Symbol::D),
                    other => Err(format!("unknown announcement symbol `{other}`")),
                })
                .collect::<core::result::Result<Vec<_>, _>>()?;
            Ok(Message::Announcement(Announcement { symbols }))
        }
        "verdict" => match payload {
            "accept" => Ok(Message::Verdict(SessionVerdict::Accept)),
            "abort" => Ok(Message::Verdict(SessionVerdict::Abort)),
            other => Err(format!("unknown verdict `{other}`")),
        },
        other => Err(format!("unknown message type `{other}`")),
    }
}
