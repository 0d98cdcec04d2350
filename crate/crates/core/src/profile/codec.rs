//! Binary profile container. All integers little-endian.
//!
//! ```text
//! magic          4   b"LPRP"
//! format         u16 FORMAT_VERSION
//! order          u8  0 | 1 | 3
//! reserved       u8  0
//! slot_minutes   u32
//! version        u64 profile version
//! n_contexts     u32
//! n_contexts × {
//!   tag          u8  0 = (), 1 = (slot), 2 = (slot, previous cell)
//!   slot         u32           tags 1 and 2
//!   prev_x prev_y i32 i32      tag 2
//!   n_entries    u32
//!   n_entries × { x i32, y i32, count u64 }
//! }
//! ```
//!
//! Contexts appear in ascending key order and cells in ascending `(x, y)`
//! order, so equal profiles encode to identical bytes.

use std::collections::BTreeMap;

use super::{CellId, ContextKey, Counts, LocationProfile, Order, SlotConfig};
use crate::{Error, Result};

pub const MAGIC: [u8; 4] = *b"LPRP";
pub const FORMAT_VERSION: u16 = 1;

const ENTRY_BYTES: usize = 16;

pub(super) fn encode(p: &LocationProfile) -> Vec<u8> {
    let mut out = Vec::with_capacity(24 + p.counts.len() * 32);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.push(p.order.depth());
    out.push(0);
    out.extend_from_slice(&p.slots.slot_minutes().to_le_bytes());
    out.extend_from_slice(&p.version.to_le_bytes());
    out.extend_from_slice(&(p.counts.len() as u32).to_le_bytes());
    for (key, cells) in &p.counts {
        match *key {
            ContextKey::Global => out.push(0),
            ContextKey::Slot(s) => {
                out.push(1);
                out.extend_from_slice(&s.to_le_bytes());
            }
            ContextKey::SlotPrev(s, prev) => {
                out.push(2);
                out.extend_from_slice(&s.to_le_bytes());
                out.extend_from_slice(&prev.x.to_le_bytes());
                out.extend_from_slice(&prev.y.to_le_bytes());
            }
        }
        out.extend_from_slice(&(cells.len() as u32).to_le_bytes());
        for (cell, n) in cells {
            out.extend_from_slice(&cell.x.to_le_bytes());
            out.extend_from_slice(&cell.y.to_le_bytes());
            out.extend_from_slice(&n.to_le_bytes());
        }
    }
    out
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, reason: impl Into<String>) -> Error {
        Error::Parse {
            offset: self.pos,
            reason: reason.into(),
        }
    }

    fn take<const N: usize>(&mut self, what: &str) -> Result<[u8; N]> {
        let end = self.pos + N;
        let bytes = self
            .buf
            .get(self.pos..end)
            .ok_or_else(|| self.err(format!("truncated {what}")))?;
        self.pos = end;
        Ok(bytes.try_into().expect("slice length checked"))
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take::<1>(what)?[0])
    }
    fn u16(&mut self, what: &str) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(what)?))
    }
    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(what)?))
    }
    fn i32(&mut self, what: &str) -> Result<i32> {
        Ok(i32::from_le_bytes(self.take(what)?))
    }
    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(what)?))
    }

    fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }
}

pub(super) fn decode(buf: &[u8]) -> Result<LocationProfile> {
    let mut c = Cursor { buf, pos: 0 };
    if c.take::<4>("magic")? != MAGIC {
        return Err(Error::Parse {
            offset: 0,
            reason: "bad magic".into(),
        });
    }
    let at = c.pos;
    let format = c.u16("format version")?;
    if format != FORMAT_VERSION {
        return Err(Error::Parse {
            offset: at,
            reason: format!("unsupported format version {format}"),
        });
    }
    let at = c.pos;
    let order = Order::from_depth(c.u8("order")?).map_err(|e| Error::Parse {
        offset: at,
        reason: e.to_string(),
    })?;
    if c.u8("reserved")? != 0 {
        return Err(c.err("reserved byte must be zero"));
    }
    let at = c.pos;
    let slots = SlotConfig::new(c.u32("slot minutes")?).map_err(|e| Error::Parse {
        offset: at,
        reason: e.to_string(),
    })?;
    let version = c.u64("profile version")?;
    let n_contexts = c.u32("context count")? as usize;
    // Every context needs at least a tag and an entry count.
    if n_contexts > c.remaining() / 5 {
        return Err(c.err(format!(
            "context count {n_contexts} exceeds the remaining input"
        )));
    }

    let mut counts = BTreeMap::new();
    let mut last_key: Option<ContextKey> = None;
    for _ in 0..n_contexts {
        let key_at = c.pos;
        let key = match c.u8("context tag")? {
            0 => ContextKey::Global,
            1 => ContextKey::Slot(c.u32("slot")?),
            2 => {
                let s = c.u32("slot")?;
                let x = c.i32("previous cell x")?;
                let y = c.i32("previous cell y")?;
                ContextKey::SlotPrev(s, CellId::new(x, y))
            }
            t => {
                return Err(Error::Parse {
                    offset: key_at,
                    reason: format!("unknown context tag {t}"),
                })
            }
        };
        if last_key.is_some_and(|k| k >= key) {
            return Err(Error::Parse {
                offset: key_at,
                reason: "contexts out of order or duplicated".into(),
            });
        }
        last_key = Some(key);
        let n_entries = c.u32("entry count")? as usize;
        if n_entries == 0 || n_entries > c.remaining() / ENTRY_BYTES {
            return Err(c.err(format!(
                "entry count {n_entries} invalid for the remaining input"
            )));
        }
        let mut cells = Counts::new();
        let mut last_cell: Option<CellId> = None;
        for _ in 0..n_entries {
            let entry_at = c.pos;
            let cell = CellId::new(c.i32("cell x")?, c.i32("cell y")?);
            let n = c.u64("count")?;
            if n == 0 || last_cell.is_some_and(|l| l >= cell) {
                return Err(Error::Parse {
                    offset: entry_at,
                    reason: "zero count or cells out of order".into(),
                });
            }
            last_cell = Some(cell);
            cells.insert(cell, n);
        }
        counts.insert(key, cells);
    }
    if c.remaining() != 0 {
        return Err(c.err("trailing bytes"));
    }
    LocationProfile::from_counts(order, slots, version, counts).map_err(|e| Error::Parse {
        offset: buf.len(),
        reason: e.to_string(),
    })
}
