use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const MINUTES_PER_WEEK: u32 = 7 * 24 * 60;

/// Width of one profile time slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SlotConfig {
    slot_minutes: u32,
}

impl Default for SlotConfig {
    fn default() -> Self {
        Self { slot_minutes: 60 }
    }
}

impl SlotConfig {
    pub fn new(slot_minutes: u32) -> Result<Self> {
        if slot_minutes == 0 || !MINUTES_PER_WEEK.is_multiple_of(slot_minutes) {
            return Err(Error::invalid(
                "slot_minutes",
                format!("must divide {MINUTES_PER_WEEK} evenly, got {slot_minutes}"),
            ));
        }
        Ok(Self { slot_minutes })
    }

    pub fn slot_minutes(&self) -> u32 {
        self.slot_minutes
    }

    pub fn slots_per_week(&self) -> u32 {
        MINUTES_PER_WEEK / self.slot_minutes
    }

    pub fn slot_of_week(&self, slot_index: u64) -> u32 {
        (slot_index % self.slots_per_week() as u64) as u32
    }

    pub fn week_of(&self, slot_index: u64) -> u64 {
        slot_index / self.slots_per_week() as u64
    }

    /// Hour of the week at the middle of the slot.
    pub fn hour_of_week(&self, slot_of_week: u32) -> f64 {
        (slot_of_week as f64 + 0.5) * self.slot_minutes as f64 / 60.0
    }
}

/// A grid cell; ordered lexicographically by `(x, y)`.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize,
)]
pub struct CellId {
    pub x: i32,
    pub y: i32,
}

impl CellId {
    pub const fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observation {
    pub slot: u64,
    pub cell: CellId,
}

/// Time-ordered observations for one node, at most one per slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservationTrace {
    node_id: u32,
    records: Vec<Observation>,
}

impl ObservationTrace {
    pub fn new(node_id: u32, records: Vec<Observation>) -> Result<Self> {
        if let Some(w) = records.windows(2).find(|w| w[1].slot <= w[0].slot) {
            return Err(Error::Trace(format!(
                "node {node_id}: slot {} follows slot {}; slots must strictly increase",
                w[1].slot, w[0].slot
            )));
        }
        Ok(Self { node_id, records })
    }

    pub fn node_id(&self) -> u32 {
        self.node_id
    }

    pub fn records(&self) -> &[Observation] {
        &self.records
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Splits at the first week boundary past the trace's midpoint week:
    /// the first `weeks / 2` weeks train, the rest test.
    pub fn split_halves(&self, slots: &SlotConfig) -> (ObservationTrace, ObservationTrace) {
        let weeks = self.records.last().map_or(0, |o| slots.week_of(o.slot) + 1);
        let boundary = (weeks / 2) * slots.slots_per_week() as u64;
        let cut = self.records.partition_point(|o| o.slot < boundary);
        (
            ObservationTrace {
                node_id: self.node_id,
                records: self.records[..cut].to_vec(),
            },
            ObservationTrace {
                node_id: self.node_id,
                records: self.records[cut..].to_vec(),
            },
        )
    }
}

const TRACE_HEADER: [&str; 4] = ["node_id", "slot_index", "cell_x", "cell_y"];

#[derive(Serialize, Deserialize)]
struct TraceRow {
    node_id: u32,
    slot_index: u64,
    cell_x: i32,
    cell_y: i32,
}

/// Writes `node_id,slot_index,cell_x,cell_y` rows under a header line.
pub fn write_traces<W: Write>(out: W, traces: &[ObservationTrace]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    w.write_record(TRACE_HEADER)?;
    for t in traces {
        for o in &t.records {
            w.serialize(TraceRow {
                node_id: t.node_id,
                slot_index: o.slot,
                cell_x: o.cell.x,
                cell_y: o.cell.y,
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads trace CSV; the header line is optional. Nodes may interleave but each
/// node's rows must be in increasing slot order. Traces come back sorted by id.
pub fn read_traces<R: Read>(input: R) -> Result<Vec<ObservationTrace>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut by_node: std::collections::BTreeMap<u32, Vec<Observation>> = Default::default();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if line == 0 && rec.iter().eq(TRACE_HEADER) {
            continue;
        }
        let row: TraceRow = rec
            .deserialize(None)
            .map_err(|e| Error::Trace(format!("line {}: {e}", line + 1)))?;
        by_node.entry(row.node_id).or_default().push(Observation {
            slot: row.slot_index,
            cell: CellId::new(row.cell_x, row.cell_y),
        });
    }
    by_node
        .into_iter()
        .map(|(id, recs)| ObservationTrace::new(id, recs))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slot_config() {
        let s = SlotConfig::default();
        assert_eq!(s.slots_per_week(), 168);
        assert_eq!(s.slot_of_week(170), 2);
        assert_eq!(s.hour_of_week(3), 3.5);
        let ten = SlotConfig::new(10).unwrap();
        assert_eq!(ten.slots_per_week(), 1008);
        assert_eq!(ten.hour_of_week(0), 1.0 / 12.0);
        assert!(SlotConfig::new(7).is_ok());
        assert!(SlotConfig::new(11).is_err());
        assert!(SlotConfig::new(0).is_err());
    }

    #[test]
    fn trace_order_enforced() {
        let o = |slot| Observation {
            slot,
            cell: CellId::new(0, 0),
        };
        assert!(ObservationTrace::new(1, vec![o(1), o(2)]).is_ok());
        assert!(ObservationTrace::new(1, vec![o(2), o(2)]).is_err());
        assert!(ObservationTrace::new(1, vec![o(3), o(2)]).is_err());
    }

    #[test]
    fn csv_round_trip_with_and_without_header() {
        let t = ObservationTrace::new(
            4,
            vec![
                Observation {
                    slot: 0,
                    cell: CellId::new(1, -2),
                },
                Observation {
                    slot: 5,
                    cell: CellId::new(3, 4),
                },
            ],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_traces(&mut buf, std::slice::from_ref(&t)).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("node_id,slot_index,cell_x,cell_y\n4,0,1,-2\n"));
        assert_eq!(read_traces(&buf[..]).unwrap(), vec![t.clone()]);
        let headerless = text.lines().skip(1).collect::<Vec<_>>().join("\n");
        assert_eq!(read_traces(headerless.as_bytes()).unwrap(), vec![t]);
        assert!(read_traces("1,2,x,3\n".as_bytes()).is_err());
    }

    #[test]
    fn split_by_week() {
        let s = SlotConfig::default();
        let recs = (0..4 * 168)
            .step_by(7)
            .map(|slot| Observation {
                slot,
                cell: CellId::default(),
            })
            .collect();
        let t = ObservationTrace::new(0, recs).unwrap();
        let (train, test) = t.split_halves(&s);
        assert!(train.records().iter().all(|o| o.slot < 336));
        assert!(test.records().iter().all(|o| o.slot >= 336));
        assert_eq!(
            train.records().len() + test.records().len(),
            t.records().len()
        );
    }
}
