//! One [`FlowSample`] per line:
//! `{"gauge":..,"t":..,"L":..,"h":[..],"K":[..],"structure":..}`.
//!
//! Doubles are written in shortest round-trip form, so reading a file back
//! reproduces every bit.

use std::io::{BufRead, Write};

use super::types::{FlowSample, Trajectory};
use crate::error::{Error, Result};

pub fn write_jsonl<W: Write>(traj: &Trajectory, mut out: W) -> Result<()> {
    for s in traj.samples() {
        serde_json::to_writer(&mut out, s)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn to_jsonl_string(traj: &Trajectory) -> String {
    let mut buf = Vec::new();
    write_jsonl(traj, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

/// Reads a trajectory; the anchor time is the latest sample.
pub fn read_jsonl<R: BufRead>(input: R) -> Result<Trajectory> {
    let mut samples = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let sample: FlowSample = serde_json::from_str(&line)
            .map_err(|e| Error::InvalidArgument(format!("line {}: {e}", lineno + 1)))?;
        samples.push(sample);
    }
    Trajectory::new(samples)
}
