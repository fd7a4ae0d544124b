//! Search trace events and steering commands, one JSON object per line.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

/// Why a candidate child was rejected.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PruneReason {
    /// Rule name, or the kind of failure for non-rule prunes.
    pub rule: String,
    pub t: i64,
    /// Variable bindings as `name=object` pairs.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub binding: Vec<String>,
}

/// One fluent change made by an expansion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Change {
    pub fluent: String,
    pub t: i64,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum TraceEvent {
    Expanded {
        node: u64,
        parent: Option<u64>,
        action: Option<String>,
        start: i64,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        delta: Vec<Change>,
    },
    Pruned {
        node: u64,
        parent: u64,
        action: String,
        start: i64,
        reason: PruneReason,
    },
    Backtrack {
        node: u64,
        parent: Option<u64>,
    },
    PlanFound {
        node: u64,
        length: usize,
        makespan: i64,
    },
    Snapshot {
        node: u64,
        /// Fluents that are true or non-boolean at the node's horizon.
        state: Vec<Change>,
        plan: Vec<String>,
    },
}

impl TraceEvent {
    pub fn node(&self) -> u64 {
        match self {
            TraceEvent::Expanded { node, .. }
            | TraceEvent::Pruned { node, .. }
            | TraceEvent::Backtrack { node, .. }
            | TraceEvent::PlanFound { node, .. }
            | TraceEvent::Snapshot { node, .. } => *node,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum SteerCommand {
    ForceBacktrack { target: u64 },
    Pause,
    Resume,
    Step,
}

/// What the search should do at its next checkpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Steer {
    Continue,
    /// Abandon everything below this ancestor and continue with its next child.
    Backtrack(u64),
    Abort,
}

/// Receives trace events and is asked for steering between expansions.
pub trait SearchHook {
    fn event(&mut self, e: &TraceEvent);

    fn checkpoint(&mut self) -> Steer {
        Steer::Continue
    }

    /// Whether expansions should carry their fluent changes.
    fn wants_delta(&self) -> bool {
        false
    }
}

/// Hook that does nothing.
pub struct Silent;

impl SearchHook for Silent {
    fn event(&mut self, _: &TraceEvent) {}
}

/// Hook that keeps every event in memory.
#[derive(Debug, Default)]
pub struct Recorder {
    pub events: Vec<TraceEvent>,
}

impl SearchHook for Recorder {
    fn event(&mut self, e: &TraceEvent) {
        self.events.push(e.clone());
    }

    fn wants_delta(&self) -> bool {
        true
    }
}

/// Hook that writes NDJSON to a sink.
pub struct NdjsonWriter<W: Write> {
    out: W,
    pub error: Option<io::Error>,
}

impl<W: Write> NdjsonWriter<W> {
    pub fn new(out: W) -> Self {
        NdjsonWriter { out, error: None }
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

impl<W: Write> SearchHook for NdjsonWriter<W> {
    fn event(&mut self, e: &TraceEvent) {
        if self.error.is_none() {
            if let Err(err) = write_record(&mut self.out, e) {
                self.error = Some(err);
            }
        }
    }

    fn wants_delta(&self) -> bool {
        true
    }
}

pub fn write_record<W: Write, T: Serialize>(out: &mut W, rec: &T) -> io::Result<()> {
    serde_json::to_writer(&mut *out, rec)?;
    out.write_all(b"\n")
}

/// Parse NDJSON trace records, skipping blank lines.
pub fn read_events<R: BufRead>(r: R) -> Result<Vec<TraceEvent>, String> {
    let mut v = vec![];
    for (i, line) in r.lines().enumerate() {
        let line = line.map_err(|e| e.to_string())?;
        if line.trim().is_empty() {
            continue;
        }
        v.push(serde_json::from_str(&line).map_err(|e| format!("line {}: {e}", i + 1))?);
    }
    Ok(v)
}

pub fn parse_command(line: &str) -> Result<SteerCommand, serde_json::Error> {
    serde_json::from_str(line.trim())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn event_wire_names() {
        let e = TraceEvent::Pruned {
            node: 4,
            parent: 2,
            action: "fly(plane1, city0, city1)".into(),
            start: 20,
            reason: PruneReason {
                rule: "planes-always-fly-to-goal".into(),
                t: 21,
                binding: vec!["plane=plane1".into()],
            },
        };
        let s = serde_json::to_string(&e).unwrap();
        assert!(s.starts_with(r#"{"type":"pruned","node":4,"parent":2"#), "{s}");
        assert_eq!(serde_json::from_str::<TraceEvent>(&s).unwrap(), e);
    }

    #[test]
    fn commands() {
        assert_eq!(
            parse_command(r#"{"type":"force-backtrack","target":3}"#).unwrap(),
            SteerCommand::ForceBacktrack { target: 3 }
        );
        assert_eq!(parse_command(r#" {"type":"pause"} "#).unwrap(), SteerCommand::Pause);
        assert!(parse_command(r#"{"type":"jump"}"#).is_err());
    }

    #[test]
    fn ndjson_round_trip() {
        let evs = vec![
            TraceEvent::Expanded {
                node: 0,
                parent: None,
                action: None,
                start: 0,
                delta: vec![],
            },
            TraceEvent::PlanFound {
                node: 0,
                length: 0,
                makespan: 0,
            },
        ];
        let mut w = NdjsonWriter::new(Vec::new());
        for e in &evs {
            w.event(e);
        }
        let buf = w.into_inner();
        assert_eq!(buf.iter().filter(|&&b| b == b'\n').count(), 2);
        assert_eq!(read_events(&buf[..]).unwrap(), evs);
    }
}
