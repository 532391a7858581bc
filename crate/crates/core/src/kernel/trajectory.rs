//! Per-event trajectory logs.
//!
//! Columns, in order: `time, actor, size, gap_before`. `actor` is 0 for the
//! leader and `i` for the follower behind gap `i`. The binary form writes
//! each column as a little-endian `f64`, 32 bytes per event.

use std::io::{self, Write};

use super::{Actor, Event, Observer};
use crate::model::SystemState;

pub const CSV_HEADER: &str = "time,actor,size,gap_before";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogFormat {
    Csv,
    Binary,
}

fn actor_code(a: Actor) -> usize {
    match a {
        Actor::Leader => 0,
        Actor::Follower(i) => i,
    }
}

/// Observer that writes every event; the first I/O error is kept and
/// further writes are skipped.
pub struct TrajectoryLog<W: Write> {
    out: W,
    format: LogFormat,
    error: Option<io::Error>,
    header_done: bool,
}

impl<W: Write> TrajectoryLog<W> {
    pub fn new(out: W, format: LogFormat) -> Self {
        Self { out, format, error: None, header_done: false }
    }

    fn write(&mut self, e: &Event) -> io::Result<()> {
        match self.format {
            LogFormat::Csv => {
                if !self.header_done {
                    writeln!(self.out, "{CSV_HEADER}")?;
                    self.header_done = true;
                }
                writeln!(self.out, "{},{},{},{}", e.time, actor_code(e.actor), e.size, e.gap_before)
            }
            LogFormat::Binary => {
                for v in [e.time, actor_code(e.actor) as f64, e.size, e.gap_before] {
                    self.out.write_all(&v.to_le_bytes())?;
                }
                Ok(())
            }
        }
    }

    pub fn finish(mut self) -> io::Result<W> {
        if let Some(e) = self.error.take() {
            return Err(e);
        }
        if self.format == LogFormat::Csv && !self.header_done {
            writeln!(self.out, "{CSV_HEADER}")?;
        }
        self.out.flush()?;
        Ok(self.out)
    }
}

impl<W: Write> Observer for TrajectoryLog<W> {
    fn on_event(&mut self, _state: &SystemState, event: &Event) {
        if self.error.is_none() {
            if let Err(e) = self.write(event) {
                self.error = Some(e);
            }
        }
    }
}

/// Decodes a binary log back into rows of four floats.
pub fn read_binary(bytes: &[u8]) -> Vec<[f64; 4]> {
    bytes
        .chunks_exact(32)
        .map(|c| {
            let f = |k: usize| f64::from_le_bytes(c[8 * k..8 * k + 8].try_into().unwrap());
            [f(0), f(1), f(2), f(3)]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::Simulator;
    use crate::model::JumpLaw;
    use crate::rng::stream_from_seed;

    #[test]
    fn csv_and_binary_agree() {
        let run = |format| {
            let mut rng = stream_from_seed(8);
            let mut sim = Simulator::new(SystemState::new(vec![1.0, 2.0, 0.5]).unwrap(), JumpLaw::ExpUnit).unwrap();
            let mut log = TrajectoryLog::new(Vec::new(), format);
            sim.run_until(3.0, &mut rng, &mut log).unwrap();
            log.finish().unwrap()
        };
        let csv = String::from_utf8(run(LogFormat::Csv)).unwrap();
        let bin = read_binary(&run(LogFormat::Binary));
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len() - 1, bin.len());
        for (line, row) in lines[1..].iter().zip(&bin) {
            let parsed: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
            assert_eq!(parsed, row.to_vec());
        }
    }
}
