use std::collections::BTreeSet;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::PhotonError;

/// Size of one binary record: `u8` channel then `u64` little-endian picoseconds.
pub const RECORD_BYTES: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TimeTag {
    pub channel: u8,
    pub time_ps: u64,
}

/// Detector clicks in acquisition order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeTagStream {
    channels: BTreeSet<u8>,
    events: Vec<TimeTag>,
    duration_ps: u64,
}

impl TimeTagStream {
    /// Validates that every event is on a declared channel and that each
    /// channel's timestamps never decrease.
    pub fn new(
        channels: impl IntoIterator<Item = u8>,
        events: Vec<TimeTag>,
        duration_ps: u64,
    ) -> Result<Self, PhotonError> {
        let channels: BTreeSet<u8> = channels.into_iter().collect();
        let mut last = [None::<u64>; 256];
        for (index, e) in events.iter().enumerate() {
            if !channels.contains(&e.channel) {
                return Err(PhotonError::UnknownChannel(e.channel));
            }
            let slot = &mut last[e.channel as usize];
            if slot.is_some_and(|t| e.time_ps < t) {
                return Err(PhotonError::Unsorted { channel: e.channel, index });
            }
            *slot = Some(e.time_ps);
        }
        if duration_ps == 0 {
            return Err(PhotonError::InvalidParameter("acquisition duration must be positive".into()));
        }
        Ok(Self { channels, events, duration_ps })
    }

    /// Channels are those that occur; the acquisition is taken to run from
    /// t = 0 to the last tag.
    pub fn from_events(events: Vec<TimeTag>) -> Result<Self, PhotonError> {
        let channels: BTreeSet<u8> = events.iter().map(|e| e.channel).collect();
        let duration = events.iter().map(|e| e.time_ps).max().unwrap_or(0).max(1);
        Self::new(channels, events, duration)
    }

    pub fn channels(&self) -> impl Iterator<Item = u8> + '_ {
        self.channels.iter().copied()
    }

    pub fn events(&self) -> &[TimeTag] {
        &self.events
    }

    pub fn duration_ps(&self) -> u64 {
        self.duration_ps
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Sorted timestamps of one channel.
    pub fn times(&self, channel: u8) -> Result<Vec<u64>, PhotonError> {
        if !self.channels.contains(&channel) {
            return Err(PhotonError::UnknownChannel(channel));
        }
        Ok(self.events.iter().filter(|e| e.channel == channel).map(|e| e.time_ps).collect())
    }

    pub fn write_binary(&self, mut w: impl Write) -> std::io::Result<()> {
        let mut buf = Vec::with_capacity(self.events.len() * RECORD_BYTES);
        for e in &self.events {
            buf.push(e.channel);
            buf.extend_from_slice(&e.time_ps.to_le_bytes());
        }
        w.write_all(&buf)
    }

    pub fn read_binary(mut r: impl Read) -> Result<Self, PhotonError> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        let tail = bytes.len() % RECORD_BYTES;
        if tail != 0 {
            return Err(PhotonError::TruncatedRecord(tail));
        }
        let events = bytes
            .chunks_exact(RECORD_BYTES)
            .map(|c| TimeTag { channel: c[0], time_ps: u64::from_le_bytes(c[1..].try_into().expect("8 bytes")) })
            .collect();
        Self::from_events(events)
    }

    /// CSV with header `channel,time_ps`.
    pub fn write_csv(&self, w: impl Write) -> Result<(), PhotonError> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["channel", "time_ps"])?;
        for e in &self.events {
            out.write_record([e.channel.to_string(), e.time_ps.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv(r: impl Read) -> Result<Self, PhotonError> {
        let mut rows = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
        let events = rows.deserialize::<TimeTag>().collect::<Result<Vec<_>, _>>()?;
        Self::from_events(events)
    }
}

/// Keep clicks whose delay after the most recent pulse lies in `[from, to)`;
/// pulses fire at `offset + k period`.
pub fn gate(
    stream: &TimeTagStream,
    period_ps: u64,
    offset_ps: u64,
    from_ps: u64,
    to_ps: u64,
) -> Result<TimeTagStream, PhotonError> {
    if period_ps == 0 || from_ps >= to_ps {
        return Err(PhotonError::InvalidParameter(format!("gate [{from_ps}, {to_ps}) with period {period_ps}")));
    }
    let events = stream
        .events
        .iter()
        .filter(|e| {
            let phase = (e.time_ps as i128 - offset_ps as i128).rem_euclid(period_ps as i128) as u64;
            (from_ps..to_ps).contains(&phase)
        })
        .copied()
        .collect();
    TimeTagStream::new(stream.channels.iter().copied(), events, stream.duration_ps)
}
